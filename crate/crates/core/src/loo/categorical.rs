//! Leave-one-out scoring of categorical features.
//!
//! Removing a row changes only its own category's statistics, so the
//! mean-sorted category sequence is rebuilt by relocating that one entry and
//! rescanning its prefixes. With a binary response the outcome depends only on
//! the (category, label) pair of the removed row, so at most `2K` distinct
//! replicates are evaluated.

use crate::error::{invalid, Result};
use crate::splits::{category_stats, mean_order, scan_prefixes, ImpurityKind, Stats};

use super::{larger_is_left, sq, validate, LooConfig, LooScore};

struct Categories {
    stats: Vec<Stats>,
    /// Occupied categories sorted by mean response.
    seq: Vec<(u32, Stats)>,
    total: Stats,
}

impl Categories {
    fn new(codes: &[u32], n_categories: usize, y: &[f64]) -> Result<Self> {
        if let Some(&c) = codes.iter().find(|&&c| c as usize >= n_categories) {
            return invalid(format!("category code {c} >= {n_categories}"));
        }
        let stats = category_stats(codes, n_categories, y);
        let mut seq: Vec<(u32, Stats)> = stats
            .iter()
            .enumerate()
            .filter(|(_, s)| s.n > 0.0)
            .map(|(c, s)| (c as u32, *s))
            .collect();
        seq.sort_by(|a, b| mean_order(*a, *b));
        Ok(Categories {
            stats,
            seq,
            total: Stats::of(y),
        })
    }

    /// Loss of a removed row with category `c` and response `yv`.
    fn replicate_loss(&self, c: u32, yv: f64, kind: ImpurityKind, min_leaf: usize, buf: &mut Vec<(u32, Stats)>) -> (f64, bool) {
        let adjusted = self.stats[c as usize].without(yv);
        let total = self.total.without(yv);
        buf.clear();
        buf.extend(self.seq.iter().copied().filter(|&(code, _)| code != c));
        let position = if adjusted.n > 0.0 {
            let entry = (c, adjusted);
            let at = buf.partition_point(|&e| mean_order(e, entry) == std::cmp::Ordering::Less);
            buf.insert(at, entry);
            Some(at)
        } else {
            None
        };
        match scan_prefixes(buf, total, kind, min_leaf) {
            None => (sq(yv - total.mean()), false),
            Some((prefix, _, left)) => {
                let right = total.sub(left);
                let goes_left = match position {
                    Some(at) => at < prefix,
                    None => larger_is_left(left.n, right.n),
                };
                (sq(yv - if goes_left { left.mean() } else { right.mean() }), true)
            }
        }
    }
}

/// Categorical feature, binary response: one replicate per occupied
/// (category, label) pair, each an O(K) relocation and prefix scan.
pub fn loo_score_categorical_classification(
    codes: &[u32],
    n_categories: usize,
    y: &[f64],
    cfg: &LooConfig,
) -> Result<LooScore> {
    validate(codes.len(), y, cfg)?;
    let cats = Categories::new(codes, n_categories, y)?;
    let mut table: Vec<[Option<(f64, bool)>; 2]> = vec![[None, None]; n_categories];
    let mut buf = Vec::with_capacity(cats.seq.len());
    let mut losses = Vec::with_capacity(y.len());
    let mut valid = false;
    for (&c, &yv) in codes.iter().zip(y) {
        let slot = &mut table[c as usize][yv as usize];
        let (loss, ok) = *slot.get_or_insert_with(|| cats.replicate_loss(c, yv, cfg.kind, cfg.min_leaf, &mut buf));
        valid |= ok;
        losses.push(loss);
    }
    Ok(LooScore {
        total: losses.iter().sum(),
        valid,
    })
}

/// Categorical feature, continuous response: every removal shifts its
/// category's mean by a row-specific amount, so each row gets its own O(K)
/// relocation and prefix scan: O(nK).
pub fn loo_score_categorical_regression(
    codes: &[u32],
    n_categories: usize,
    y: &[f64],
    cfg: &LooConfig,
) -> Result<LooScore> {
    validate(codes.len(), y, cfg)?;
    let cats = Categories::new(codes, n_categories, y)?;
    let mut buf = Vec::with_capacity(cats.seq.len());
    let mut total = 0.0;
    let mut valid = false;
    for (&c, &yv) in codes.iter().zip(y) {
        let (loss, ok) = cats.replicate_loss(c, yv, cfg.kind, cfg.min_leaf, &mut buf);
        valid |= ok;
        total += loss;
    }
    Ok(LooScore { total, valid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::Column;
    use crate::loo::loo_score_naive;

    #[test]
    fn singleton_category_routes_to_larger_child() {
        // codes [0,0,1,1,1,2], y [0,0,1,1,1,1]. Leaving out the only row of
        // category 2 leaves {0} | {1}: left 2 rows, right 3, so the row goes
        // right with mean 1 and loss 0.
        let codes = [0, 0, 1, 1, 1, 2];
        let y = [0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let cfg = LooConfig::new(ImpurityKind::Gini, 1);
        let s = loo_score_categorical_classification(&codes, 3, &y, &cfg).unwrap();
        let naive = loo_score_naive(Column::Categorical { codes: &codes, n_categories: 3 }, &y, &cfg).unwrap();
        assert_eq!(s, naive);
        assert!(s.valid);
    }

    #[test]
    fn single_category_is_invalid() {
        let codes = [1, 1, 1];
        let y = [0.0, 1.0, 1.0];
        let cfg = LooConfig::new(ImpurityKind::Gini, 1);
        let s = loo_score_categorical_classification(&codes, 2, &y, &cfg).unwrap();
        assert!(!s.valid);
        let cfg = LooConfig::new(ImpurityKind::SquaredError, 1);
        assert!(!loo_score_categorical_regression(&codes, 2, &y, &cfg).unwrap().valid);
    }

    #[test]
    fn rejects_out_of_range_codes() {
        let cfg = LooConfig::new(ImpurityKind::Gini, 1);
        assert!(loo_score_categorical_classification(&[0, 3], 2, &[0.0, 1.0], &cfg).is_err());
    }
}
