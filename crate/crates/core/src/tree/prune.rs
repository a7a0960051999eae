use crate::dataio::{kfold_partition, Dataset, FeatureValue};
use crate::error::Result;

use super::{grow, NodeKind, Selector, TreeModel, TreeNode};

/// One subtree of the weakest-link sequence: the tree obtained for any
/// complexity penalty in `[alpha, next alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneStep {
    pub alpha: f64,
    pub n_leaves: usize,
}

/// Per node, the smallest penalty at which it becomes a leaf; `+∞` for
/// leaves of the full tree.
fn collapse_alphas(nodes: &[TreeNode]) -> Vec<f64> {
    let mut alpha = vec![f64::INFINITY; nodes.len()];
    let mut collapsed = vec![false; nodes.len()];
    let mut current = 0.0f64;
    // post-order: children precede parents
    let mut order = Vec::with_capacity(nodes.len());
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        order.push(i);
        if let NodeKind::Split { left, right, .. } = nodes[i].kind {
            stack.push(left);
            stack.push(right);
        }
    }
    order.reverse();
    let mut sub_risk = vec![0.0; nodes.len()];
    let mut sub_leaves = vec![0usize; nodes.len()];
    while !collapsed[0] && !nodes[0].is_leaf() {
        let mut weakest = f64::INFINITY;
        let mut g = vec![f64::INFINITY; nodes.len()];
        for &i in &order {
            match nodes[i].kind {
                NodeKind::Split { left, right, .. } if !collapsed[i] => {
                    sub_risk[i] = sub_risk[left] + sub_risk[right];
                    sub_leaves[i] = sub_leaves[left] + sub_leaves[right];
                    g[i] = (nodes[i].impurity - sub_risk[i]) / (sub_leaves[i] - 1) as f64;
                    weakest = weakest.min(g[i]);
                }
                _ => {
                    sub_risk[i] = nodes[i].impurity;
                    sub_leaves[i] = 1;
                }
            }
        }
        current = current.max(weakest);
        let tol = 1e-12 * weakest.abs().max(1e-300);
        for &i in &order {
            if !collapsed[i] && !nodes[i].is_leaf() && g[i] <= weakest + tol {
                collapsed[i] = true;
                alpha[i] = current;
            }
        }
    }
    // descendants of a collapsed node are gone at the same penalty
    for i in 0..nodes.len() {
        if let NodeKind::Split { left, right, .. } = nodes[i].kind {
            for c in [left, right] {
                alpha[c] = alpha[c].min(alpha[i]);
            }
        }
    }
    alpha
}

fn pruned_value(t: &TreeModel, alphas: &[f64], beta: f64, row: &[FeatureValue]) -> f64 {
    let mut i = 0;
    while alphas[i] > beta {
        match t.nodes[i].kind {
            NodeKind::Leaf => break,
            NodeKind::Split { left, right, .. } => i = if t.goes_left(i, row) { left } else { right },
        }
    }
    t.nodes[i].value
}

/// The weakest-link sequence from the full tree (`alpha = 0`) to the root.
pub fn pruning_sequence(t: &TreeModel) -> Vec<PruneStep> {
    // a split survives penalty `a` iff its collapse penalty exceeds `a`
    let alphas = collapse_alphas(&t.nodes);
    let mut split_alphas: Vec<f64> = t
        .nodes
        .iter()
        .zip(&alphas)
        .filter(|(n, _)| !n.is_leaf())
        .map(|(_, &a)| a)
        .collect();
    split_alphas.sort_by(f64::total_cmp);
    let mut steps = vec![PruneStep {
        alpha: 0.0,
        n_leaves: t.n_leaves(),
    }];
    let mut i = 0;
    while i < split_alphas.len() {
        let a = split_alphas[i];
        while i < split_alphas.len() && split_alphas[i] <= a {
            i += 1;
        }
        let n_leaves = 1 + split_alphas.len() - i;
        if a == 0.0 {
            steps[0].n_leaves = n_leaves;
        } else {
            steps.push(PruneStep { alpha: a, n_leaves });
        }
    }
    steps
}

/// The optimal subtree for penalty `alpha`.
pub fn prune_at(t: &TreeModel, alpha: f64) -> TreeModel {
    prune_with(t, &collapse_alphas(&t.nodes), alpha)
}

fn prune_with(t: &TreeModel, alphas: &[f64], alpha: f64) -> TreeModel {
    let nodes: Vec<TreeNode> = t
        .nodes
        .iter()
        .zip(alphas)
        .map(|(n, &a)| {
            if a <= alpha {
                TreeNode {
                    kind: NodeKind::Leaf,
                    ..n.clone()
                }
            } else {
                n.clone()
            }
        })
        .collect();
    TreeModel {
        nodes: TreeModel::compact(&nodes, 0),
        ..t.clone()
    }
}

/// Cost-complexity pruning with the penalty chosen by `folds`-fold
/// cross-validation on squared validation error. Candidate penalties are the
/// geometric midpoints of the full tree's sequence; ties favour the smaller
/// tree.
pub fn prune_cost_complexity(t: &TreeModel, d: &Dataset, folds: usize, seed: u64) -> Result<TreeModel> {
    if t.nodes.len() == 1 || d.n() < 2 {
        return Ok(t.clone());
    }
    let steps = pruning_sequence(t);
    let betas: Vec<f64> = (0..steps.len())
        .map(|k| match steps.get(k + 1) {
            Some(next) => (steps[k].alpha * next.alpha).sqrt(),
            None => f64::INFINITY,
        })
        .collect();
    let assignment = kfold_partition(d.n(), folds.clamp(2, d.n()), seed)?;
    let cfg = super::GrowConfig {
        selector: Selector::Cart,
        ..t.config.clone()
    };
    let mut loss = vec![0.0; betas.len()];
    for f in 0..assignment.k {
        let test_rows = assignment.test_rows(f);
        if test_rows.is_empty() {
            continue;
        }
        let train = d.select_rows(&assignment.train_rows(f));
        let test = d.select_rows(&test_rows);
        let fold_tree = grow(&train, &cfg)?;
        let alphas = collapse_alphas(&fold_tree.nodes);
        let encoded = fold_tree.space.encode(&test)?;
        let y = test.responses();
        for (k, &beta) in betas.iter().enumerate() {
            loss[k] += encoded
                .iter()
                .zip(&y)
                .map(|(row, &yv)| {
                    let p = pruned_value(&fold_tree, &alphas, beta, row);
                    (yv - p) * (yv - p)
                })
                .sum::<f64>();
        }
    }
    let mut best = 0;
    for k in 1..loss.len() {
        if loss[k] <= loss[best] {
            best = k;
        }
    }
    Ok(prune_at(t, steps[best].alpha))
}
