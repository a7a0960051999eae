//! Leave-one-out scoring of candidate splitting variables.
//!
//! For a feature `j`, each observation `i` is left out in turn, the best
//! split on `j` is fitted to the remaining `n − 1` rows, and the left-out row
//! is scored by the squared error of the side mean it falls into. The feature
//! score `L(j)` is the sum of those `n` losses. Binary responses are coded
//! 0/1, so the same loss serves Gini and squared-error criteria.
//!
//! [`loo_score_naive`] refits from scratch for every left-out row and is the
//! reference. The four specialised routines give identical results:
//!
//! | column      | impurity | routine                                   | cost        |
//! |-------------|----------|-------------------------------------------|-------------|
//! | categorical | gini     | [`loo_score_categorical_classification`]  | O(max(K², n)) |
//! | numeric     | gini     | [`loo_score_numeric_classification`]      | O(n log n)  |
//! | categorical | sse      | [`loo_score_categorical_regression`]      | O(nK)       |
//! | numeric     | sse      | [`loo_score_numeric_regression`]          | O(n²)       |

mod categorical;
mod naive;
mod numeric;

pub use categorical::{loo_score_categorical_classification, loo_score_categorical_regression};
pub use naive::{lfold_score, loo_replicates_naive, loo_score_naive, ReplicateOutcome};
pub use numeric::{loo_score_numeric_classification, loo_score_numeric_regression};

use serde::{Deserialize, Serialize};

use crate::dataio::{kfold_partition, Column, Dataset};
use crate::error::{invalid, Result};
use crate::splits::{ImpurityKind, Partition, Stats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LooConfig {
    pub kind: ImpurityKind,
    pub min_leaf: usize,
    /// Number of cross-validation folds; `None` means exact leave-one-out.
    pub folds: Option<usize>,
    /// Seed for the fold assignment when `folds` is set.
    pub seed: u64,
    /// Stop unless the best score is below `(1 − stop_margin)·L0`.
    pub stop_margin: f64,
}

impl LooConfig {
    pub fn new(kind: ImpurityKind, min_leaf: usize) -> Self {
        LooConfig {
            kind,
            min_leaf,
            folds: None,
            seed: 0,
            stop_margin: 0.0,
        }
    }
}

/// Score of one feature. `valid` is false when no left-out replicate had a
/// feasible split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LooScore {
    pub total: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooScoreTable {
    /// LOO loss of predicting with the mean of the other rows.
    pub baseline: f64,
    /// `(feature index, score)` in ascending feature order.
    pub scores: Vec<(usize, LooScore)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Split(usize),
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableSelection {
    pub table: LooScoreTable,
    /// Valid feature with the lowest score, ties to the lowest index.
    pub best: Option<usize>,
    pub decision: Decision,
}

/// `Σ_i (y_i − ȳ^(−i))²`.
pub fn loo_baseline(y: &[f64]) -> Result<f64> {
    let n = y.len();
    if n < 2 {
        return invalid("leave-one-out baseline needs at least two rows");
    }
    let s: f64 = y.iter().sum();
    let m = (n - 1) as f64;
    Ok(y.iter().map(|&v| sq(v - (s - v) / m)).sum())
}

#[inline]
pub(crate) fn sq(v: f64) -> f64 {
    v * v
}

pub(crate) fn validate(len: usize, y: &[f64], cfg: &LooConfig) -> Result<()> {
    if len != y.len() {
        return invalid(format!("feature has {len} rows, response has {}", y.len()));
    }
    if y.len() < 2 {
        return invalid("leave-one-out scoring needs at least two rows");
    }
    if cfg.min_leaf == 0 {
        return invalid("min_leaf must be at least 1");
    }
    if cfg.kind == ImpurityKind::Gini && y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return invalid("gini impurity requires a 0/1 response");
    }
    Ok(())
}

/// Whether an unseen category goes left: the side with more training rows,
/// right on a tie.
#[inline]
pub(crate) fn larger_is_left(n_left: f64, n_right: f64) -> bool {
    n_left > n_right
}

/// Loss of a held-out value against a split fitted on (`col`, `y`).
pub(crate) enum HeldOut {
    Numeric(f64),
    Category(u32),
}

pub(crate) fn heldout_loss(
    partition: Option<&Partition>,
    held: HeldOut,
    y_held: f64,
    col: Column<'_>,
    y: &[f64],
) -> f64 {
    let Some(partition) = partition else {
        return sq(y_held - Stats::of(y).mean());
    };
    let (mut left, mut right) = (Stats::default(), Stats::default());
    match col {
        Column::Numeric(x) => {
            for (&xv, &yv) in x.iter().zip(y) {
                if partition.goes_left_numeric(xv) {
                    left.push(yv)
                } else {
                    right.push(yv)
                }
            }
        }
        Column::Categorical { codes, .. } => {
            for (&c, &yv) in codes.iter().zip(y) {
                if partition.side_of_category(c) == Some(true) {
                    left.push(yv)
                } else {
                    right.push(yv)
                }
            }
        }
    }
    let goes_left = match held {
        HeldOut::Numeric(x) => partition.goes_left_numeric(x),
        HeldOut::Category(c) => partition
            .side_of_category(c)
            .unwrap_or_else(|| larger_is_left(left.n, right.n)),
    };
    sq(y_held - if goes_left { left.mean() } else { right.mean() })
}

/// Scores one feature, dispatching to the efficient routine for its
/// column kind and impurity, or to L-fold scoring when `cfg.folds < n`.
pub fn loo_score(col: Column<'_>, y: &[f64], cfg: &LooConfig) -> Result<LooScore> {
    let n = y.len();
    if let Some(folds) = cfg.folds {
        if folds < n {
            let assignment = kfold_partition(n, folds, cfg.seed)?;
            return lfold_score(col, y, cfg, &assignment);
        }
    }
    match (col, cfg.kind) {
        (Column::Numeric(x), ImpurityKind::Gini) => loo_score_numeric_classification(x, y, cfg),
        (Column::Numeric(x), ImpurityKind::SquaredError) => loo_score_numeric_regression(x, y, cfg),
        (Column::Categorical { codes, n_categories }, ImpurityKind::Gini) => {
            loo_score_categorical_classification(codes, n_categories, y, cfg)
        }
        (Column::Categorical { codes, n_categories }, ImpurityKind::SquaredError) => {
            loo_score_categorical_regression(codes, n_categories, y, cfg)
        }
    }
}

/// Scores every feature in `features` over all rows of `d` and decides
/// whether to split: stop when no feature is valid or the best score does not
/// beat the no-split baseline.
pub fn select_variable(d: &Dataset, features: &[usize], cfg: &LooConfig) -> Result<VariableSelection> {
    let y = d.responses();
    let baseline = loo_baseline(&y)?;
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    let mut scores = Vec::with_capacity(features.len());
    for &j in &features {
        let col = d.column(j);
        scores.push((j, loo_score(col.as_column(), &y, cfg)?));
    }
    let mut best: Option<(usize, f64)> = None;
    for &(j, s) in &scores {
        if s.valid && best.map_or(true, |(_, b)| s.total < b) {
            best = Some((j, s.total));
        }
    }
    let decision = match best {
        Some((j, total)) if total < (1.0 - cfg.stop_margin) * baseline => Decision::Split(j),
        _ => Decision::Stop,
    };
    Ok(VariableSelection {
        table: LooScoreTable { baseline, scores },
        best: best.map(|(j, _)| j),
        decision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_examples() {
        assert_eq!(loo_baseline(&[5.0, 5.0, 5.0]).unwrap(), 0.0);
        assert_eq!(loo_baseline(&[0.0, 1.0]).unwrap(), 2.0);
        let b = loo_baseline(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((b - 16.0 / 9.0).abs() < 1e-15);
        assert!(loo_baseline(&[1.0]).is_err());
    }

    use crate::dataio::Column;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()) + 1e-12
    }

    fn binary(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop::bool::ANY.prop_map(|b| b as u8 as f64), n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn numeric_classification_equals_naive(
            (x, y) in (2usize..40).prop_flat_map(|n| (prop::collection::vec(0u8..8, n), binary(n))),
            min_leaf in 1usize..4,
        ) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let cfg = LooConfig::new(ImpurityKind::Gini, min_leaf);
            let fast = loo_score_numeric_classification(&x, &y, &cfg).unwrap();
            let naive = loo_score_naive(Column::Numeric(&x), &y, &cfg).unwrap();
            prop_assert_eq!(fast, naive);
        }

        #[test]
        fn categorical_classification_equals_naive(
            (codes, y) in (2usize..40).prop_flat_map(|n| (prop::collection::vec(0u32..7, n), binary(n))),
            min_leaf in 1usize..4,
        ) {
            let cfg = LooConfig::new(ImpurityKind::Gini, min_leaf);
            let fast = loo_score_categorical_classification(&codes, 7, &y, &cfg).unwrap();
            let col = Column::Categorical { codes: &codes, n_categories: 7 };
            prop_assert_eq!(fast, loo_score_naive(col, &y, &cfg).unwrap());
        }

        #[test]
        fn numeric_regression_equals_naive(
            (x, y) in (2usize..30).prop_flat_map(|n| (prop::collection::vec(0u8..10, n), prop::collection::vec(-5.0f64..5.0, n))),
            min_leaf in 1usize..4,
        ) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let cfg = LooConfig::new(ImpurityKind::SquaredError, min_leaf);
            let fast = loo_score_numeric_regression(&x, &y, &cfg).unwrap();
            let naive = loo_score_naive(Column::Numeric(&x), &y, &cfg).unwrap();
            prop_assert_eq!(fast.valid, naive.valid);
            prop_assert!(close(fast.total, naive.total), "{} vs {}", fast.total, naive.total);
        }

        #[test]
        fn categorical_regression_equals_naive(
            (codes, y) in (2usize..30).prop_flat_map(|n| (prop::collection::vec(0u32..6, n), prop::collection::vec(-5.0f64..5.0, n))),
            min_leaf in 1usize..4,
        ) {
            let cfg = LooConfig::new(ImpurityKind::SquaredError, min_leaf);
            let fast = loo_score_categorical_regression(&codes, 6, &y, &cfg).unwrap();
            let col = Column::Categorical { codes: &codes, n_categories: 6 };
            let naive = loo_score_naive(col, &y, &cfg).unwrap();
            prop_assert_eq!(fast.valid, naive.valid);
            prop_assert!(close(fast.total, naive.total), "{} vs {}", fast.total, naive.total);
        }

        #[test]
        fn singleton_folds_equal_naive(
            (x, y) in (2usize..25).prop_flat_map(|n| (prop::collection::vec(0u8..6, n), binary(n))),
        ) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let cfg = LooConfig::new(ImpurityKind::Gini, 1);
            let folds = crate::dataio::FoldAssignment::singletons(x.len());
            let lf = lfold_score(Column::Numeric(&x), &y, &cfg, &folds).unwrap();
            prop_assert_eq!(lf, loo_score_naive(Column::Numeric(&x), &y, &cfg).unwrap());
        }
    }

    #[test]
    fn replicate_losses_sum_to_score() {
        let x = [0.3, 1.2, 0.7, 2.2, 1.9, 0.1, 1.5];
        let y = [0.1, 1.0, 0.4, 2.5, 2.0, -0.2, 1.1];
        let cfg = LooConfig::new(ImpurityKind::SquaredError, 1);
        let reps = loo_replicates_naive(Column::Numeric(&x), &y, &cfg).unwrap();
        let sum: f64 = reps.iter().map(|r| r.loss).sum();
        assert_eq!(sum, loo_score_naive(Column::Numeric(&x), &y, &cfg).unwrap().total);
        assert!(reps.iter().all(|r| r.partition.is_some()));
    }
}
