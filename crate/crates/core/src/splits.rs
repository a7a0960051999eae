//! Single-variable CART split search.
//!
//! Impurities are totals rather than means, so a parent's impurity is the sum
//! of its children's. Gini for a 0/1 response is `n·p̂·(1 − p̂)`; squared error
//! is `Σ(y − ȳ)²`.

use serde::{Deserialize, Serialize};

use crate::dataio::{Column, Dataset};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImpurityKind {
    Gini,
    SquaredError,
}

impl ImpurityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ImpurityKind::Gini => "gini",
            ImpurityKind::SquaredError => "sse",
        }
    }
}

impl std::str::FromStr for ImpurityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gini" => Ok(ImpurityKind::Gini),
            "sse" | "squared-error" => Ok(ImpurityKind::SquaredError),
            _ => invalid(format!("unknown impurity '{s}'")),
        }
    }
}

/// Sufficient statistics of a set of responses.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub n: f64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Stats {
    pub fn of(y: &[f64]) -> Stats {
        let mut s = Stats::default();
        for &v in y {
            s.push(v);
        }
        s
    }

    #[inline]
    pub fn push(&mut self, y: f64) {
        self.n += 1.0;
        self.sum += y;
        self.sum_sq += y * y;
    }

    #[inline]
    pub fn without(self, y: f64) -> Stats {
        Stats {
            n: self.n - 1.0,
            sum: self.sum - y,
            sum_sq: self.sum_sq - y * y,
        }
    }

    #[inline]
    pub fn add(self, o: Stats) -> Stats {
        Stats {
            n: self.n + o.n,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }

    #[inline]
    pub fn sub(self, o: Stats) -> Stats {
        Stats {
            n: self.n - o.n,
            sum: self.sum - o.sum,
            sum_sq: self.sum_sq - o.sum_sq,
        }
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        self.sum / self.n
    }

    /// Total impurity of the set; zero when empty.
    #[inline]
    pub fn impurity(&self, kind: ImpurityKind) -> f64 {
        if self.n <= 0.0 {
            return 0.0;
        }
        match kind {
            ImpurityKind::Gini => self.sum * (self.n - self.sum) / self.n,
            ImpurityKind::SquaredError => (self.sum_sq - self.sum * self.sum / self.n).max(0.0),
        }
    }
}

/// How a split partitions a single feature's values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Partition {
    /// Left iff `x <= threshold`.
    Threshold(f64),
    /// Left iff the code is in `left`. `right` holds the occupied categories
    /// sent right when the split was fitted; codes in neither set were not
    /// observed at the node.
    Categories { left: Vec<u32>, right: Vec<u32> },
}

impl Partition {
    /// Categorical partitions with the smallest code on the left.
    pub fn canonical(&self) -> Partition {
        match self {
            Partition::Categories { left, right } if right.first() < left.first() => {
                Partition::Categories {
                    left: right.clone(),
                    right: left.clone(),
                }
            }
            p => p.clone(),
        }
    }

    #[inline]
    pub fn goes_left_numeric(&self, x: f64) -> bool {
        matches!(self, Partition::Threshold(t) if x <= *t)
    }

    /// `Some(true)` for left, `Some(false)` for right, `None` when the code was
    /// not observed at the node.
    #[inline]
    pub fn side_of_category(&self, code: u32) -> Option<bool> {
        match self {
            Partition::Categories { left, right } => {
                if left.binary_search(&code).is_ok() {
                    Some(true)
                } else if right.binary_search(&code).is_ok() {
                    Some(false)
                } else {
                    None
                }
            }
            Partition::Threshold(_) => None,
        }
    }
}

/// A split on a specific feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub feature: usize,
    pub partition: Partition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSearchResult {
    pub partition: Option<Partition>,
    /// Impurity of the best split, or the node impurity if there is none.
    pub impurity: f64,
    pub node_impurity: f64,
    pub n_left: usize,
    pub n_right: usize,
}

impl SplitSearchResult {
    fn none(node_impurity: f64) -> Self {
        SplitSearchResult {
            partition: None,
            impurity: node_impurity,
            node_impurity,
            n_left: 0,
            n_right: 0,
        }
    }
}

/// Threshold strictly between `a < b`, with `a <= t < b` guaranteed under
/// rounding.
#[inline]
pub fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) * 0.5;
    if m < b && m >= a {
        m
    } else {
        a
    }
}

fn check_binary(y: &[f64]) -> Result<()> {
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return invalid("gini impurity requires a 0/1 response");
    }
    Ok(())
}

pub fn node_impurity(y: &[f64], kind: ImpurityKind) -> Result<f64> {
    if y.is_empty() {
        return invalid("impurity of an empty node");
    }
    if kind == ImpurityKind::Gini {
        check_binary(y)?;
    }
    Ok(Stats::of(y).impurity(kind))
}

fn check_inputs(len: usize, y: &[f64], kind: ImpurityKind, min_leaf: usize) -> Result<()> {
    if len != y.len() {
        return invalid(format!("feature has {len} rows, response has {}", y.len()));
    }
    if min_leaf == 0 {
        return invalid("min_leaf must be at least 1");
    }
    if kind == ImpurityKind::Gini {
        check_binary(y)?;
    }
    Ok(())
}

/// Indices of `x` in ascending order (stable).
pub(crate) fn argsort(x: &[f64]) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = x.iter().copied().zip(0..).collect();
    radsort::sort_by_key(&mut keyed, |p| p.0);
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Best threshold split. Candidates are midpoints between adjacent distinct
/// values; ties go to the smallest threshold.
pub fn best_split_numeric(
    x: &[f64],
    y: &[f64],
    kind: ImpurityKind,
    min_leaf: usize,
) -> Result<SplitSearchResult> {
    check_inputs(x.len(), y, kind, min_leaf)?;
    Ok(numeric_search(x, y, &argsort(x), kind, min_leaf))
}

/// Numeric search with a precomputed ascending order of `x`.
pub(crate) fn numeric_search(
    x: &[f64],
    y: &[f64],
    order: &[usize],
    kind: ImpurityKind,
    min_leaf: usize,
) -> SplitSearchResult {
    let total = Stats::of(y);
    let node = total.impurity(kind);
    let n = order.len();
    let mut best: Option<(f64, usize, Stats)> = None;
    let mut left = Stats::default();
    for pos in 0..n.saturating_sub(1) {
        left.push(y[order[pos]]);
        let (a, b) = (x[order[pos]], x[order[pos + 1]]);
        if a == b {
            continue;
        }
        let nl = pos + 1;
        if nl < min_leaf || n - nl < min_leaf {
            continue;
        }
        let crit = left.impurity(kind) + total.sub(left).impurity(kind);
        if best.map_or(true, |(c, _, _)| crit < c) {
            best = Some((crit, pos, left));
        }
    }
    match best {
        None => SplitSearchResult::none(node),
        Some((crit, pos, left)) => SplitSearchResult {
            partition: Some(Partition::Threshold(midpoint(x[order[pos]], x[order[pos + 1]]))),
            impurity: crit.min(node),
            node_impurity: node,
            n_left: left.count(),
            n_right: n - left.count(),
        },
    }
}

/// Per-category statistics indexed by code.
pub(crate) fn category_stats(codes: &[u32], n_categories: usize, y: &[f64]) -> Vec<Stats> {
    let mut stats = vec![Stats::default(); n_categories];
    for (&c, &v) in codes.iter().zip(y) {
        stats[c as usize].push(v);
    }
    stats
}

/// Orders occupied categories by mean response, ties by code.
#[inline]
pub(crate) fn mean_order(a: (u32, Stats), b: (u32, Stats)) -> std::cmp::Ordering {
    a.1.mean().total_cmp(&b.1.mean()).then(a.0.cmp(&b.0))
}

/// Best prefix split along a mean-sorted category sequence.
/// Returns `(prefix length, criterion, left stats)`; ties go to the shorter
/// prefix.
pub(crate) fn scan_prefixes(
    seq: &[(u32, Stats)],
    total: Stats,
    kind: ImpurityKind,
    min_leaf: usize,
) -> Option<(usize, f64, Stats)> {
    let mut best: Option<(usize, f64, Stats)> = None;
    let mut left = Stats::default();
    let min_leaf = min_leaf as f64;
    for (p, &(_, s)) in seq.iter().enumerate().take(seq.len().saturating_sub(1)) {
        left = left.add(s);
        let right = total.sub(left);
        if left.n < min_leaf || right.n < min_leaf {
            continue;
        }
        let crit = left.impurity(kind) + right.impurity(kind);
        if best.map_or(true, |(_, c, _)| crit < c) {
            best = Some((p + 1, crit, left));
        }
    }
    best
}

pub(crate) fn categories_partition(seq: &[(u32, Stats)], prefix: usize) -> Partition {
    let mut left: Vec<u32> = seq[..prefix].iter().map(|&(c, _)| c).collect();
    let mut right: Vec<u32> = seq[prefix..].iter().map(|&(c, _)| c).collect();
    left.sort_unstable();
    right.sort_unstable();
    Partition::Categories { left, right }
}

/// Best binary grouping of categories: sort occupied categories by mean
/// response and take the best prefix. The left set is the low-mean prefix.
pub fn best_split_categorical(
    codes: &[u32],
    n_categories: usize,
    y: &[f64],
    kind: ImpurityKind,
    min_leaf: usize,
) -> Result<SplitSearchResult> {
    check_inputs(codes.len(), y, kind, min_leaf)?;
    if let Some(&c) = codes.iter().find(|&&c| c as usize >= n_categories) {
        return invalid(format!("category code {c} >= {n_categories}"));
    }
    let stats = category_stats(codes, n_categories, y);
    let total = Stats::of(y);
    let node = total.impurity(kind);
    let mut seq: Vec<(u32, Stats)> = stats
        .iter()
        .enumerate()
        .filter(|(_, s)| s.n > 0.0)
        .map(|(c, s)| (c as u32, *s))
        .collect();
    if seq.len() < 2 {
        return Ok(SplitSearchResult::none(node));
    }
    seq.sort_by(|a, b| mean_order(*a, *b));
    Ok(match scan_prefixes(&seq, total, kind, min_leaf) {
        None => SplitSearchResult::none(node),
        Some((prefix, crit, left)) => SplitSearchResult {
            partition: Some(categories_partition(&seq, prefix)),
            impurity: crit.min(node),
            node_impurity: node,
            n_left: left.count(),
            n_right: codes.len() - left.count(),
        },
    })
}

/// Exhaustive search over all proper binary groupings of the occupied
/// categories. The lowest occupied code is always on the left; refuses more
/// than 20 occupied categories.
pub fn best_split_exhaustive_categorical(
    codes: &[u32],
    n_categories: usize,
    y: &[f64],
    kind: ImpurityKind,
    min_leaf: usize,
) -> Result<SplitSearchResult> {
    check_inputs(codes.len(), y, kind, min_leaf)?;
    let stats = category_stats(codes, n_categories, y);
    let occupied: Vec<u32> = (0..n_categories as u32)
        .filter(|&c| stats[c as usize].n > 0.0)
        .collect();
    let m = occupied.len();
    if m > 20 {
        return Err(Error::TooManyCategories(m));
    }
    let total = Stats::of(y);
    let node = total.impurity(kind);
    if m < 2 {
        return Ok(SplitSearchResult::none(node));
    }
    let mut best: Option<(f64, u32, Stats)> = None;
    for mask in 1u32..(1u32 << (m - 1)) {
        // bit b set: occupied[b + 1] goes right
        let mut right = Stats::default();
        for b in 0..m - 1 {
            if mask >> b & 1 == 1 {
                right = right.add(stats[occupied[b + 1] as usize]);
            }
        }
        let left = total.sub(right);
        if left.n < min_leaf as f64 || right.n < min_leaf as f64 {
            continue;
        }
        let crit = left.impurity(kind) + right.impurity(kind);
        if best.map_or(true, |(c, _, _)| crit < c) {
            best = Some((crit, mask, left));
        }
    }
    Ok(match best {
        None => SplitSearchResult::none(node),
        Some((crit, mask, left)) => {
            let (mut l, mut r) = (vec![occupied[0]], Vec::new());
            for b in 0..m - 1 {
                if mask >> b & 1 == 1 {
                    r.push(occupied[b + 1]);
                } else {
                    l.push(occupied[b + 1]);
                }
            }
            SplitSearchResult {
                partition: Some(Partition::Categories { left: l, right: r }),
                impurity: crit.min(node),
                node_impurity: node,
                n_left: left.count(),
                n_right: codes.len() - left.count(),
            }
        }
    })
}

/// Dispatches on the column kind.
pub fn best_split(column: Column<'_>, y: &[f64], kind: ImpurityKind, min_leaf: usize) -> Result<SplitSearchResult> {
    match column {
        Column::Numeric(x) => best_split_numeric(x, y, kind, min_leaf),
        Column::Categorical { codes, n_categories } => {
            best_split_categorical(codes, n_categories, y, kind, min_leaf)
        }
    }
}

/// Partitions the view's rows by `rule`. Categorical codes outside the left
/// set go right.
pub fn apply_split(rule: &SplitRule, d: &Dataset) -> (Vec<usize>, Vec<usize>) {
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for i in 0..d.n() {
        let goes_left = match &rule.partition {
            Partition::Threshold(t) => d.numeric_value(rule.feature, i).is_some_and(|x| x <= *t),
            Partition::Categories { left, .. } => d
                .category_code(rule.feature, i)
                .is_some_and(|c| left.binary_search(&c).is_ok()),
        };
        if goes_left {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    (left, right)
}
