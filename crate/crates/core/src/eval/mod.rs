//! Metrics, learner dispatch, cross-validation, degrees-of-freedom estimation
//! and significance tests.

mod cv;
mod df;
mod learner;
mod stats;

pub use cv::{cross_validate, FoldResult, MetricReport};
pub use df::{df_with_test_mse, estimate_df, DfEstimate, FixedDesign};
pub use learner::{FittedModel, LearnerSpec};
pub use stats::{paired_holdout_test, sign_test, PairedTest, SignTest};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Mse,
    Misclassification,
    Auc,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Mse => "mse",
            MetricKind::Misclassification => "misclassification",
            MetricKind::Auc => "auc",
        }
    }
}

fn check_binary(truths: &[f64]) -> Result<()> {
    if truths.iter().any(|&t| t != 0.0 && t != 1.0) {
        return invalid("metric requires 0/1 truths");
    }
    Ok(())
}

/// Mean squared error, misclassification at threshold 0.5, or AUC with tied
/// scores counted as half.
pub fn metric(kind: MetricKind, predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.len() != truths.len() {
        return invalid(format!(
            "{} predictions for {} truths",
            predictions.len(),
            truths.len()
        ));
    }
    if truths.is_empty() {
        return invalid("metric of an empty set");
    }
    let n = truths.len() as f64;
    match kind {
        MetricKind::Mse => Ok(predictions.iter().zip(truths).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n),
        MetricKind::Misclassification => {
            check_binary(truths)?;
            let wrong = predictions
                .iter()
                .zip(truths)
                .filter(|(&p, &t)| ((p >= 0.5) as u8 as f64) != t)
                .count();
            Ok(wrong as f64 / n)
        }
        MetricKind::Auc => {
            check_binary(truths)?;
            auc(predictions, truths)
        }
    }
}

/// Mann–Whitney form: average ranks with ties sharing their mean rank.
fn auc(scores: &[f64], truths: &[f64]) -> Result<f64> {
    let pos = truths.iter().filter(|&&t| t == 1.0).count();
    let neg = truths.len() - pos;
    if pos == 0 || neg == 0 {
        return invalid("AUC needs both classes present");
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mean_rank * order[i..=j].iter().filter(|&&k| truths[k] == 1.0).count() as f64;
        i = j + 1;
    }
    let (p, q) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_examples() {
        let t = [0.0, 0.0, 1.0, 1.0];
        assert_eq!(metric(MetricKind::Auc, &[0.1, 0.2, 0.8, 0.9], &t).unwrap(), 1.0);
        assert_eq!(metric(MetricKind::Auc, &[0.5; 4], &t).unwrap(), 0.5);
        assert_eq!(metric(MetricKind::Mse, &t, &t).unwrap(), 0.0);
        assert_eq!(metric(MetricKind::Misclassification, &[0.6, 0.4, 0.5, 0.9], &t).unwrap(), 0.25);
        assert!(metric(MetricKind::Auc, &[0.1, 0.2], &[1.0, 1.0]).is_err());
        assert!(metric(MetricKind::Mse, &[0.1], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn auc_matches_pair_count() {
        let s = [0.3, 0.3, 0.1, 0.7, 0.5, 0.5, 0.9];
        let t = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                if t[i] == 1.0 && t[j] == 0.0 {
                    den += 1.0;
                    num += if s[i] > s[j] { 1.0 } else if s[i] == s[j] { 0.5 } else { 0.0 };
                }
            }
        }
        assert!((metric(MetricKind::Auc, &s, &t).unwrap() - num / den).abs() < 1e-15);
        let squashed: Vec<f64> = s.iter().map(|v: &f64| v.powi(3) + 2.0).collect();
        assert_eq!(metric(MetricKind::Auc, &squashed, &t).unwrap(), metric(MetricKind::Auc, &s, &t).unwrap());
    }
}
