//! Leave-one-out scoring of numeric features.
//!
//! Rows are sorted once and grouped into distinct values `v_0 < … < v_{m−1}`.
//! Cut slot `g` separates `v_g` from `v_{g+1}`. Removing a row at value rank
//! `r` lowers the left statistics of every slot `g ≥ r` and the right
//! statistics of every slot `g < r`. When the removed row is the only one at
//! its value, slots `r − 1` and `r` describe the same partition of the
//! remaining rows, whose threshold is the midpoint of `v_{r−1}` and `v_{r+1}`.

use crate::error::Result;
use crate::segtree::MinTree;
use crate::splits::{midpoint, ImpurityKind, Stats};

use super::{sq, validate, LooConfig, LooScore};

struct SortedColumn {
    /// Distinct values in ascending order.
    values: Vec<f64>,
    /// Rows per distinct value.
    counts: Vec<u32>,
    /// Value rank of each row.
    rank: Vec<u32>,
    /// Statistics of all rows with value `<= v_g`.
    prefix: Vec<Stats>,
    /// Rows in ascending `x` order.
    order: Vec<u32>,
    /// Responses in that order.
    sorted_y: Vec<f64>,
    total: Stats,
}

impl SortedColumn {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let mut keyed: Vec<(f64, u32)> = x.iter().copied().zip(0..).collect();
        radsort::sort_by_key(&mut keyed, |p| p.0);
        let n = x.len();
        let mut values = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        let mut prefix: Vec<Stats> = Vec::with_capacity(n);
        let mut rank = vec![0; n];
        let mut order = Vec::with_capacity(n);
        let mut sorted_y = Vec::with_capacity(n);
        let mut acc = Stats::default();
        for &(v, row) in &keyed {
            let i = row as usize;
            if values.last() != Some(&v) {
                values.push(v);
                counts.push(0);
                prefix.push(acc);
            }
            let g = values.len() - 1;
            let yv = y[i];
            acc.push(yv);
            prefix[g] = acc;
            counts[g] += 1;
            rank[i] = g as u32;
            order.push(row);
            sorted_y.push(yv);
        }
        SortedColumn {
            values,
            counts,
            rank,
            prefix,
            order,
            sorted_y,
            total: Stats::of(y),
        }
    }

    fn slots(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Left statistics of slot `g` with a row of response `yv` at rank `r`
    /// removed.
    #[inline]
    fn left_without(&self, g: usize, r: usize, yv: f64) -> Stats {
        if r <= g {
            self.prefix[g].without(yv)
        } else {
            self.prefix[g]
        }
    }

    /// Whether the removed row at rank `r` goes left of the chosen slot `g`.
    fn removed_goes_left(&self, g: usize, r: usize) -> bool {
        let merged = self.counts[r] == 1 && r >= 1 && r + 1 < self.values.len() && (g + 1 == r || g == r);
        if merged {
            self.values[r] <= midpoint(self.values[r - 1], self.values[r + 1])
        } else {
            r <= g
        }
    }
}

#[inline]
fn criterion(left: Stats, total: Stats, kind: ImpurityKind, min_leaf: f64) -> f64 {
    let right = total.sub(left);
    if left.n < min_leaf || right.n < min_leaf {
        f64::INFINITY
    } else {
        left.impurity(kind) + right.impurity(kind)
    }
}

fn side_loss(col: &SortedColumn, g: usize, r: usize, yv: f64, total: Stats) -> f64 {
    let left = col.left_without(g, r, yv);
    let side = if col.removed_goes_left(g, r) { left } else { total.sub(left) };
    sq(yv - side.mean())
}

/// Numeric feature, binary response. For each class the removed rows are
/// visited in ascending `x`; moving the removal from rank `r` to `r'` only
/// changes slots `r ≤ g < r'`, which are updated in an indexed minimum
/// structure. Total cost O(n log n).
pub fn loo_score_numeric_classification(x: &[f64], y: &[f64], cfg: &LooConfig) -> Result<LooScore> {
    validate(x.len(), y, cfg)?;
    let col = SortedColumn::new(x, y);
    let kind = cfg.kind;
    let min_leaf = cfg.min_leaf as f64;
    let slots = col.slots();
    let mut losses = vec![0.0; y.len()];
    let mut valid = false;

    for class in [0.0, 1.0] {
        let total = col.total.without(class);
        let rows: Vec<usize> = col.order.iter().zip(&col.sorted_y).filter(|p| *p.1 == class).map(|p| *p.0 as usize).collect();
        if rows.is_empty() {
            continue;
        }
        // every slot starts in the state for a removal at rank 0
        let init: Vec<f64> = (0..slots)
            .map(|g| criterion(col.left_without(g, 0, class), total, kind, min_leaf))
            .collect();
        let mut tree = MinTree::new(&init);
        let mut switched = 0;
        for &i in &rows {
            let r = col.rank[i] as usize;
            while switched < r.min(slots) {
                let left = col.left_without(switched, r, class);
                tree.update(switched, criterion(left, total, kind, min_leaf));
                switched += 1;
            }
            losses[i] = match tree.min() {
                Some((_, g)) => {
                    valid = true;
                    side_loss(&col, g, r, class, total)
                }
                None => sq(class - total.mean()),
            };
        }
    }
    Ok(LooScore {
        total: losses.iter().sum(),
        valid,
    })
}

/// Numeric feature, continuous response. The best cut can move
/// non-monotonically with the removed row, so every slot is rescanned per
/// removal with adjusted prefix statistics: O(n²).
pub fn loo_score_numeric_regression(x: &[f64], y: &[f64], cfg: &LooConfig) -> Result<LooScore> {
    validate(x.len(), y, cfg)?;
    let col = SortedColumn::new(x, y);
    let kind = cfg.kind;
    let min_leaf = cfg.min_leaf as f64;
    let mut losses = vec![0.0; y.len()];
    let mut valid = false;
    for (i, &yv) in y.iter().enumerate() {
        let r = col.rank[i] as usize;
        let total = col.total.without(yv);
        let mut best: Option<(f64, usize)> = None;
        for g in 0..col.slots() {
            let crit = criterion(col.left_without(g, r, yv), total, kind, min_leaf);
            if crit < best.map_or(f64::INFINITY, |(c, _)| c) {
                best = Some((crit, g));
            }
        }
        losses[i] = match best {
            Some((_, g)) => {
                valid = true;
                side_loss(&col, g, r, yv, total)
            }
            None => sq(yv - total.mean()),
        };
    }
    Ok(LooScore {
        total: losses.iter().sum(),
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::Column;
    use crate::loo::{loo_replicates_naive, loo_score_naive};

    fn cfg(kind: ImpurityKind) -> LooConfig {
        LooConfig::new(kind, 1)
    }

    #[test]
    fn four_point_hand_enumeration() {
        // x=[1,2,3,4], y=[0,0,1,1], min_leaf 1.
        // Leave out 1: (2,0),(3,1),(4,1) -> cut 2.5; x=1 left, mean 0 -> 0.
        // Leave out 2: (1,0),(3,1),(4,1) -> cut 2; x=2 <= 2 left, mean 0 -> 0.
        // Leave out 3: (1,0),(2,0),(4,1) -> cut 3; x=3 <= 3 left, mean 0 -> 1.
        // Leave out 4: (1,0),(2,0),(3,1) -> cut 2.5; x=4 right, mean 1 -> 0.
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 0.0, 1.0, 1.0];
        let expected = 1.0;
        let c = cfg(ImpurityKind::Gini);
        assert_eq!(loo_score_numeric_classification(&x, &y, &c).unwrap().total, expected);
        assert_eq!(loo_score_naive(Column::Numeric(&x), &y, &c).unwrap().total, expected);
    }

    #[test]
    fn interleaved_hand_enumeration() {
        // x=[1,2,3,4], y=[0,1,0,1].
        // Leave out 1: (2,1),(3,0),(4,1): cuts 2.5 -> 0 + gini{0,1}=0.5,
        //   3.5 -> gini{1,0}=0.5 + 0 ; tie -> 2.5. x=1 left, mean 1 -> loss 1.
        // Leave out 2: (1,0),(3,0),(4,1): cut 2 -> 0 + 0.5 ; cut 3.5 -> 0 + 0
        //   -> 3.5; x=2 left, mean 0 -> loss 1.
        // Leave out 3: (1,0),(2,1),(4,1): cut 1.5 -> 0 ; x=3 right, mean 1 -> loss 1.
        // Leave out 4: (1,0),(2,1),(3,0): cut 1.5 -> 0 + 0.5 ; cut 2.5 -> 0.5 + 0
        //   -> tie, 1.5; x=4 right, mean 0.5 -> loss 0.25.
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 1.0, 0.0, 1.0];
        let c = cfg(ImpurityKind::Gini);
        assert_eq!(loo_score_naive(Column::Numeric(&x), &y, &c).unwrap().total, 3.25);
        assert_eq!(loo_score_numeric_classification(&x, &y, &c).unwrap().total, 3.25);
        let reps = loo_replicates_naive(Column::Numeric(&x), &y, &c).unwrap();
        assert_eq!(reps[1].partition, Some(crate::splits::Partition::Threshold(3.5)));
    }

    #[test]
    fn single_class_and_constant_response() {
        let x = [3.0, 1.0, 2.0, 5.0];
        let c = cfg(ImpurityKind::Gini);
        assert_eq!(loo_score_numeric_classification(&x, &[1.0; 4], &c).unwrap().total, 0.0);
        let c = cfg(ImpurityKind::SquaredError);
        assert_eq!(loo_score_numeric_regression(&x, &[2.5; 4], &c).unwrap().total, 0.0);
    }

    #[test]
    fn no_feasible_split_falls_back_to_mean() {
        let x = [1.0, 1.0, 1.0];
        let y = [0.0, 1.0, 1.0];
        let c = cfg(ImpurityKind::Gini);
        let s = loo_score_numeric_classification(&x, &y, &c).unwrap();
        assert!(!s.valid);
        assert!((s.total - crate::loo::loo_baseline(&y).unwrap()).abs() < 1e-15);
    }
}
