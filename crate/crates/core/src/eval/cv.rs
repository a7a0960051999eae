use serde::Serialize;

use crate::dataio::{kfold_partition, Dataset, Task};
use crate::error::{invalid, Result};
use crate::rng::derive_seed;

use super::{metric, LearnerSpec, MetricKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// False when the training part is smaller than the learner allows or the
    /// test part is empty; such folds carry no metrics.
    pub valid: bool,
    pub mse: Option<f64>,
    pub misclassification: Option<f64>,
    /// Absent when the test fold lacks one of the classes.
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub learner: String,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    /// Out-of-fold prediction per row; NaN for rows of invalid folds.
    #[serde(skip)]
    pub predictions: Vec<f64>,
}

impl MetricReport {
    /// Mean of a metric over the valid folds that report it.
    pub fn mean(&self, kind: MetricKind) -> Option<f64> {
        let v: Vec<f64> = self
            .folds
            .iter()
            .filter_map(|f| match kind {
                MetricKind::Mse => f.mse,
                MetricKind::Misclassification => f.misclassification,
                MetricKind::Auc => f.auc,
            })
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("fold,n_train,n_test,valid,mse,misclassification,auc\n");
        for f in &self.folds {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                f.fold,
                f.n_train,
                f.n_test,
                f.valid,
                cell(f.mse),
                cell(f.misclassification),
                cell(f.auc)
            ));
        }
        out.push_str(&format!(
            "mean,,,,{},{},{}\n",
            cell(self.mean(MetricKind::Mse)),
            cell(self.mean(MetricKind::Misclassification)),
            cell(self.mean(MetricKind::Auc))
        ));
        out
    }
}

/// K-fold cross-validation. Fold `f` is fitted with seed
/// `derive_seed(seed, f)`, and each row is predicted only by the model of its
/// own fold.
pub fn cross_validate(spec: &LearnerSpec, d: &Dataset, k: usize, seed: u64) -> Result<MetricReport> {
    if k < 2 {
        return invalid(format!("fold count must be at least 2, got {k}"));
    }
    let assignment = kfold_partition(d.n(), k, seed)?;
    let y = d.responses();
    let mut predictions = vec![f64::NAN; d.n()];
    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let train = assignment.train_rows(fold);
        let test = assignment.test_rows(fold);
        let mut result = FoldResult {
            fold,
            n_train: train.len(),
            n_test: test.len(),
            valid: false,
            mse: None,
            misclassification: None,
            auc: None,
        };
        if test.is_empty() || train.len() < spec.min_rows(train.len()).max(2) {
            folds.push(result);
            continue;
        }
        let model = spec.with_seed(derive_seed(seed, fold as u64)).fit(&d.subset(&train)?)?;
        let pred = model.predict(&d.subset(&test)?)?;
        let truth: Vec<f64> = test.iter().map(|&i| y[i]).collect();
        for (&i, &p) in test.iter().zip(&pred) {
            predictions[i] = p;
        }
        result.valid = true;
        result.mse = Some(metric(MetricKind::Mse, &pred, &truth)?);
        if d.task() == Task::Binary {
            result.misclassification = Some(metric(MetricKind::Misclassification, &pred, &truth)?);
            result.auc = metric(MetricKind::Auc, &pred, &truth).ok();
        }
        folds.push(result);
    }
    Ok(MetricReport {
        learner: spec.label(),
        k,
        seed,
        folds,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{FeatureColumn, Response};
    use crate::tree::{GrowConfig, Selector};

    #[test]
    fn mean_predictor_matches_closed_form() {
        let y: Vec<f64> = (0..12).map(|i| (i * i % 7) as f64).collect();
        let x = FeatureColumn::numeric("x", (0..12).map(|i| i as f64).collect()).unwrap();
        let d = Dataset::new(vec![x], Response::regression("y", y.clone())).unwrap();
        let r = cross_validate(&LearnerSpec::Mean, &d, 4, 9).unwrap();
        let a = kfold_partition(12, 4, 9).unwrap();
        for f in &r.folds {
            let train = a.train_rows(f.fold);
            let m = train.iter().map(|&i| y[i]).sum::<f64>() / train.len() as f64;
            let test = a.test_rows(f.fold);
            let mse = test.iter().map(|&i| (y[i] - m).powi(2)).sum::<f64>() / test.len() as f64;
            assert!((f.mse.unwrap() - mse).abs() < 1e-12);
        }
        assert_eq!(r.folds.len(), 4);
    }

    #[test]
    fn small_folds_are_flagged() {
        let x = FeatureColumn::numeric("x", (0..6).map(|i| i as f64).collect()).unwrap();
        let d = Dataset::new(vec![x], Response::regression("y", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0])).unwrap();
        let mut g = GrowConfig::for_task(Selector::Cart, Task::Regression);
        g.min_leaf = 3;
        g.min_node = 6;
        let spec = LearnerSpec::Tree { grow: g, prune_folds: None };
        let r = cross_validate(&spec, &d, 3, 0).unwrap();
        assert!(r.folds.iter().all(|f| !f.valid && f.mse.is_none()));
        assert!(r.mean(MetricKind::Mse).is_none());
    }
}
