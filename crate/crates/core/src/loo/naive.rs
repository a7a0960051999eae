use crate::dataio::{Column, ColumnData, FoldAssignment};
use crate::error::{invalid, Result};
use crate::splits::{best_split, Partition};

use super::{heldout_loss, validate, HeldOut, LooConfig, LooScore};

/// The split chosen without row `i` and the loss `R(s_i, i)` it incurs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub partition: Option<Partition>,
    pub loss: f64,
}

fn held_value(col: Column<'_>, i: usize) -> HeldOut {
    match col {
        Column::Numeric(x) => HeldOut::Numeric(x[i]),
        Column::Categorical { codes, .. } => HeldOut::Category(codes[i]),
    }
}

fn select(col: Column<'_>, idx: &[usize]) -> ColumnData {
    match col {
        Column::Numeric(x) => ColumnData::Numeric(idx.iter().map(|&i| x[i]).collect()),
        Column::Categorical { codes, n_categories } => ColumnData::Categorical {
            codes: idx.iter().map(|&i| codes[i]).collect(),
            n_categories,
        },
    }
}

/// Refits the split for every left-out row.
pub fn loo_replicates_naive(col: Column<'_>, y: &[f64], cfg: &LooConfig) -> Result<Vec<ReplicateOutcome>> {
    validate(col.len(), y, cfg)?;
    let n = y.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let rest: Vec<usize> = (0..n).filter(|&r| r != i).collect();
        let train = select(col, &rest);
        let train_y: Vec<f64> = rest.iter().map(|&r| y[r]).collect();
        let fit = best_split(train.as_column(), &train_y, cfg.kind, cfg.min_leaf)?;
        let loss = heldout_loss(
            fit.partition.as_ref(),
            held_value(col, i),
            y[i],
            train.as_column(),
            &train_y,
        );
        out.push(ReplicateOutcome {
            partition: fit.partition,
            loss,
        });
    }
    Ok(out)
}

/// Reference leave-one-out score: `n` independent split searches.
pub fn loo_score_naive(col: Column<'_>, y: &[f64], cfg: &LooConfig) -> Result<LooScore> {
    let reps = loo_replicates_naive(col, y, cfg)?;
    Ok(LooScore {
        total: reps.iter().map(|r| r.loss).sum(),
        valid: reps.iter().any(|r| r.partition.is_some()),
    })
}

/// Cross-validated score with whole folds held out: the split is fitted on
/// the other folds and each held-out row is scored against it.
pub fn lfold_score(col: Column<'_>, y: &[f64], cfg: &LooConfig, folds: &FoldAssignment) -> Result<LooScore> {
    validate(col.len(), y, cfg)?;
    let n = y.len();
    if folds.folds.len() != n {
        return invalid(format!("fold assignment covers {} rows, expected {n}", folds.folds.len()));
    }
    if folds.k < 2 || folds.k > n {
        return invalid(format!("fold count {} outside [2, {n}]", folds.k));
    }
    let mut losses = vec![0.0; n];
    let mut valid = false;
    for f in 0..folds.k {
        let test = folds.test_rows(f);
        if test.is_empty() {
            continue;
        }
        let train = folds.train_rows(f);
        let train_col = select(col, &train);
        let train_y: Vec<f64> = train.iter().map(|&r| y[r]).collect();
        let fit = best_split(train_col.as_column(), &train_y, cfg.kind, cfg.min_leaf)?;
        valid |= fit.partition.is_some();
        for &i in &test {
            losses[i] = heldout_loss(
                fit.partition.as_ref(),
                held_value(col, i),
                y[i],
                train_col.as_column(),
                &train_y,
            );
        }
    }
    Ok(LooScore {
        total: losses.iter().sum(),
        valid,
    })
}
