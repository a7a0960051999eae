use rand::seq::index::sample;

use crate::dataio::Dataset;
use crate::error::Result;
use crate::loo::{select_variable, Decision, LooConfig};
use crate::rng::{derived_rng, Rng};
use crate::splits::{best_split, Partition, SplitRule, Stats};

use super::{FeatureSpace, GrowConfig, NodeKind, Selector, TreeModel, TreeNode};

struct Candidate {
    rule: SplitRule,
    gain: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

struct Pending {
    node: usize,
    depth: usize,
    candidate: Candidate,
}

struct Grower<'a> {
    d: &'a Dataset,
    cfg: &'a GrowConfig,
    y: Vec<f64>,
    eligible: Vec<usize>,
    rng: Rng,
    nodes: Vec<TreeNode>,
}

impl Grower<'_> {
    fn features_for_node(&mut self) -> Vec<usize> {
        match self.cfg.mtry {
            Some(m) if m < self.eligible.len() => {
                let mut fs: Vec<usize> = sample(&mut self.rng, self.eligible.len(), m)
                    .into_iter()
                    .map(|k| self.eligible[k])
                    .collect();
                fs.sort_unstable();
                fs
            }
            _ => self.eligible.clone(),
        }
    }

    fn route(&self, rows: &[usize], rule: &SplitRule) -> (Vec<usize>, Vec<usize>) {
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for &i in rows {
            let goes_left = match &rule.partition {
                Partition::Threshold(t) => self.d.numeric_value(rule.feature, i).is_some_and(|x| x <= *t),
                p @ Partition::Categories { .. } => self
                    .d
                    .category_code(rule.feature, i)
                    .and_then(|c| p.side_of_category(c))
                    .unwrap_or(false),
            };
            if goes_left {
                left.push(i)
            } else {
                right.push(i)
            }
        }
        (left, right)
    }

    fn cart_split(&mut self, rows: &[usize], y: &[f64], node_impurity: f64) -> Result<Option<(SplitRule, f64)>> {
        let mut best: Option<(SplitRule, f64)> = None;
        for j in self.features_for_node() {
            let col = self.d.gather(j, rows);
            let res = best_split(col.as_column(), y, self.cfg.kind, self.cfg.min_leaf)?;
            if let Some(partition) = res.partition {
                if best.as_ref().map_or(true, |(_, c)| res.impurity < *c) {
                    best = Some((SplitRule { feature: j, partition }, res.impurity));
                }
            }
        }
        Ok(best.filter(|(_, crit)| *crit < node_impurity * (1.0 - 1e-12)))
    }

    fn aloof_split(&mut self, rows: &[usize], y: &[f64]) -> Result<Option<(SplitRule, f64)>> {
        let features = self.features_for_node();
        let view = self.d.select_rows(rows);
        let loo = LooConfig {
            kind: self.cfg.kind,
            min_leaf: self.cfg.min_leaf,
            folds: self.cfg.aloof.folds,
            seed: self.cfg.seed,
            stop_margin: self.cfg.aloof.stop_margin,
        };
        let selection = select_variable(&view, &features, &loo)?;
        let chosen = match (selection.decision, selection.best) {
            (Decision::Split(j), _) => j,
            (Decision::Stop, Some(j)) if !self.cfg.aloof.stopping => j,
            _ => return Ok(None),
        };
        let col = self.d.gather(chosen, rows);
        let res = best_split(col.as_column(), y, self.cfg.kind, self.cfg.min_leaf)?;
        Ok(res.partition.map(|partition| {
            (
                SplitRule {
                    feature: chosen,
                    partition,
                },
                res.impurity,
            )
        }))
    }

    /// Creates a node for `rows` and returns its split candidate, if any.
    fn make_node(&mut self, rows: &[usize], depth: usize) -> Result<(usize, Option<Candidate>)> {
        let y: Vec<f64> = rows.iter().map(|&i| self.y[i]).collect();
        let stats = Stats::of(&y);
        let impurity = stats.impurity(self.cfg.kind);
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            n: rows.len(),
            value: stats.mean(),
            impurity,
            kind: NodeKind::Leaf,
        });
        let pure = impurity <= 0.0 || y.iter().all(|&v| v == y[0]);
        let blocked = self.cfg.max_depth.is_some_and(|m| depth >= m)
            || rows.len() < self.cfg.min_node
            || rows.len() < 2
            || pure
            || self.cfg.max_leaves == Some(1);
        if blocked {
            return Ok((id, None));
        }
        let found = match self.cfg.selector {
            Selector::Cart => self.cart_split(rows, &y, impurity)?,
            Selector::Aloof => self.aloof_split(rows, &y)?,
        };
        Ok((
            id,
            found.map(|(rule, crit)| {
                let (left, right) = self.route(rows, &rule);
                Candidate {
                    rule,
                    gain: impurity - crit,
                    left,
                    right,
                }
            }),
        ))
    }

    fn apply(&mut self, p: Pending) -> Result<[(usize, Option<Candidate>); 2]> {
        let Candidate { rule, left, right, .. } = p.candidate;
        let larger_left = left.len() > right.len();
        let l = self.make_node(&left, p.depth + 1)?;
        let r = self.make_node(&right, p.depth + 1)?;
        self.nodes[p.node].kind = NodeKind::Split {
            rule,
            left: l.0,
            right: r.0,
            larger_left,
        };
        Ok([l, r])
    }

    fn run(mut self) -> Result<Vec<TreeNode>> {
        let all: Vec<usize> = (0..self.d.n()).collect();
        let (root, cand) = self.make_node(&all, 0)?;
        let mut pending: Vec<Pending> = cand
            .map(|candidate| Pending {
                node: root,
                depth: 0,
                candidate,
            })
            .into_iter()
            .collect();
        match self.cfg.max_leaves {
            None => {
                // depth-first, left subtree first
                while let Some(p) = pending.pop() {
                    let depth = p.depth + 1;
                    let [l, r] = self.apply(p)?;
                    for (node, cand) in [r, l] {
                        if let Some(candidate) = cand {
                            pending.push(Pending { node, depth, candidate });
                        }
                    }
                }
            }
            Some(max_leaves) => {
                // best-first on impurity decrease, ties to the earliest node
                let mut leaves = 1;
                while leaves < max_leaves && !pending.is_empty() {
                    let mut k = 0;
                    for (i, p) in pending.iter().enumerate() {
                        let b = &pending[k];
                        if p.candidate.gain > b.candidate.gain
                            || (p.candidate.gain == b.candidate.gain && p.node < b.node)
                        {
                            k = i;
                        }
                    }
                    let p = pending.swap_remove(k);
                    let depth = p.depth + 1;
                    for (node, cand) in self.apply(p)? {
                        if let Some(candidate) = cand {
                            pending.push(Pending { node, depth, candidate });
                        }
                    }
                    leaves += 1;
                }
            }
        }
        Ok(TreeModel::compact(&self.nodes, root))
    }
}

/// Grows a tree with the configured selector.
pub fn grow(d: &Dataset, cfg: &GrowConfig) -> Result<TreeModel> {
    cfg.validate(d.task(), d.n_features())?;
    let candidates: Vec<usize> = match &cfg.features {
        Some(fs) => {
            let mut fs = fs.clone();
            fs.sort_unstable();
            fs.dedup();
            fs
        }
        None => (0..d.n_features()).collect(),
    };
    let eligible = candidates
        .into_iter()
        .filter(|&j| match (cfg.max_categories, d.feature(j).n_categories()) {
            (Some(limit), Some(k)) => k <= limit,
            _ => true,
        })
        .collect();
    let nodes = if d.n() == 0 {
        vec![TreeNode {
            n: 0,
            value: 0.0,
            impurity: 0.0,
            kind: NodeKind::Leaf,
        }]
    } else {
        Grower {
            d,
            cfg,
            y: d.responses(),
            eligible,
            rng: derived_rng(cfg.seed, 0x7472_6565),
            nodes: Vec::new(),
        }
        .run()?
    };
    Ok(TreeModel {
        nodes,
        space: FeatureSpace::of(d),
        config: cfg.clone(),
    })
}

/// Greedy impurity-minimising growth.
pub fn grow_cart(d: &Dataset, cfg: &GrowConfig) -> Result<TreeModel> {
    let cfg = GrowConfig {
        selector: Selector::Cart,
        ..cfg.clone()
    };
    grow(d, &cfg)
}

/// Growth with leave-one-out selection of the splitting variable at every
/// node; a node whose best score does not beat the no-split baseline becomes
/// a leaf.
pub fn grow_aloof(d: &Dataset, cfg: &GrowConfig) -> Result<TreeModel> {
    let cfg = GrowConfig {
        selector: Selector::Aloof,
        ..cfg.clone()
    };
    grow(d, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{FeatureColumn, Response};
    use crate::splits::ImpurityKind;
    use crate::tree::tests::stump_data;

    fn leaf_rows(t: &TreeModel, d: &Dataset) -> Vec<usize> {
        let rows = t.space.encode(d).unwrap();
        rows.iter().map(|r| t.leaf_of(r)).collect()
    }

    #[test]
    fn constant_response_is_single_leaf() {
        let x = FeatureColumn::numeric("x", vec![1.0, 2.0, 3.0]).unwrap();
        let d = Dataset::new(vec![x], Response::regression("y", vec![0.1; 3])).unwrap();
        for sel in [Selector::Cart, Selector::Aloof] {
            let t = grow(&d, &GrowConfig::new(sel, ImpurityKind::SquaredError)).unwrap();
            assert_eq!(t.nodes.len(), 1);
            assert!((t.root().value - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn limited_k_excludes_wide_feature() {
        let labels: Vec<String> = (0..50).map(|c| format!("c{c}")).collect();
        let codes: Vec<u32> = (0..200).map(|i| (i % 50) as u32).collect();
        let y: Vec<f64> = codes.iter().map(|&c| (c < 25) as u8 as f64).collect();
        let x = FeatureColumn::categorical("x", codes, labels).unwrap();
        let d = Dataset::new(vec![x], Response::binary("y", y)).unwrap();
        let mut cfg = GrowConfig::cart(ImpurityKind::Gini);
        cfg.max_categories = Some(32);
        assert_eq!(grow_cart(&d, &cfg).unwrap().nodes.len(), 1);
        cfg.max_categories = None;
        assert_eq!(grow_cart(&d, &cfg).unwrap().nodes.len(), 3);
    }

    #[test]
    fn leaves_partition_training_rows() {
        let d = crate::synth::gen_interaction_model(&crate::synth::InteractionModelParams {
            n: 200,
            k: 10,
            alpha: 3.0,
            seed: 4,
        })
        .unwrap();
        for sel in [Selector::Cart, Selector::Aloof] {
            let t = grow(&d, &GrowConfig::new(sel, ImpurityKind::SquaredError)).unwrap();
            let leaves = leaf_rows(&t, &d);
            for (id, node) in t.nodes.iter().enumerate() {
                if node.is_leaf() {
                    assert_eq!(leaves.iter().filter(|&&l| l == id).count(), node.n);
                }
            }
            for node in &t.nodes {
                if let NodeKind::Split { left, right, larger_left, .. } = node.kind {
                    assert_eq!(t.nodes[left].n + t.nodes[right].n, node.n);
                    assert_eq!(larger_left, t.nodes[left].n > t.nodes[right].n);
                }
            }
        }
    }

    #[test]
    fn best_first_respects_leaf_budget() {
        let d = crate::synth::gen_uninformative(300, 20, 9).unwrap();
        let mut cfg = GrowConfig::cart(ImpurityKind::SquaredError);
        for leaves in 1..=12 {
            cfg.max_leaves = Some(leaves);
            assert_eq!(grow_cart(&d, &cfg).unwrap().n_leaves(), leaves);
        }
    }

    #[test]
    fn stump_depth_limit() {
        let mut cfg = GrowConfig::cart(ImpurityKind::Gini);
        cfg.max_depth = Some(0);
        assert_eq!(grow_cart(&stump_data(), &cfg).unwrap().nodes.len(), 1);
    }

    #[test]
    fn deterministic_under_mtry() {
        let d = crate::synth::gen_uninformative(150, 8, 2).unwrap();
        let mut cfg = GrowConfig::cart(ImpurityKind::SquaredError);
        cfg.mtry = Some(1);
        cfg.seed = 17;
        assert_eq!(grow_cart(&d, &cfg).unwrap(), grow_cart(&d, &cfg).unwrap());
    }
}
