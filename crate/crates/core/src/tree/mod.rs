//! Single decision trees grown with CART or leave-one-out variable selection.

pub(crate) mod format;
mod grow;
mod prune;

pub use format::FORMAT_VERSION;
pub use grow::{grow, grow_aloof, grow_cart};
pub use prune::{prune_cost_complexity, pruning_sequence, PruneStep};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dataio::{ColumnKind, Dataset, FeatureColumn, FeatureValue, Task};
use crate::error::{invalid, Error, Result};
use crate::splits::{ImpurityKind, Partition, SplitRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Cart,
    Aloof,
}

impl std::str::FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cart" => Ok(Selector::Cart),
            "aloof" => Ok(Selector::Aloof),
            _ => invalid(format!("unknown selector '{s}'")),
        }
    }
}

/// Settings of the leave-one-out selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AloofOptions {
    /// L-fold scoring instead of exact leave-one-out when below the node size.
    pub folds: Option<usize>,
    pub stop_margin: f64,
    /// When false, nodes always split on the best-scoring valid feature and
    /// growth is bounded only by the size limits.
    pub stopping: bool,
}

impl Default for AloofOptions {
    fn default() -> Self {
        AloofOptions {
            folds: None,
            stop_margin: 0.0,
            stopping: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowConfig {
    pub selector: Selector,
    pub kind: ImpurityKind,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub min_node: usize,
    /// Categorical features with more dictionary categories are ignored.
    pub max_categories: Option<usize>,
    /// Best-first growth up to this many leaves.
    pub max_leaves: Option<usize>,
    /// Features sampled per node.
    pub mtry: Option<usize>,
    /// Candidate features; all when `None`.
    pub features: Option<Vec<usize>>,
    pub aloof: AloofOptions,
    pub seed: u64,
}

impl GrowConfig {
    pub fn new(selector: Selector, kind: ImpurityKind) -> Self {
        GrowConfig {
            selector,
            kind,
            max_depth: None,
            min_leaf: 1,
            min_node: 2,
            max_categories: None,
            max_leaves: None,
            mtry: None,
            features: None,
            aloof: AloofOptions::default(),
            seed: 0,
        }
    }

    pub fn cart(kind: ImpurityKind) -> Self {
        Self::new(Selector::Cart, kind)
    }

    pub fn aloof(kind: ImpurityKind) -> Self {
        Self::new(Selector::Aloof, kind)
    }

    /// Gini for binary responses, squared error otherwise.
    pub fn for_task(selector: Selector, task: Task) -> Self {
        Self::new(selector, default_impurity(task))
    }

    pub fn validate(&self, task: Task, n_features: usize) -> Result<()> {
        if self.min_leaf == 0 {
            return invalid("min_leaf must be at least 1");
        }
        if self.min_node < 2 * self.min_leaf {
            return invalid(format!(
                "min_node ({}) must be at least 2·min_leaf ({})",
                self.min_node,
                2 * self.min_leaf
            ));
        }
        if self.max_leaves == Some(0) {
            return invalid("max_leaves must be at least 1");
        }
        if self.mtry == Some(0) {
            return invalid("mtry must be at least 1");
        }
        if self.kind == ImpurityKind::Gini && task != Task::Binary {
            return invalid("gini impurity requires a binary response");
        }
        if let Some(fs) = &self.features {
            if let Some(&j) = fs.iter().find(|&&j| j >= n_features) {
                return Err(Error::IndexOutOfRange { index: j, len: n_features });
            }
        }
        if !(self.aloof.stop_margin.is_finite() && self.aloof.stop_margin < 1.0) {
            return invalid("stop_margin must be finite and below 1");
        }
        Ok(())
    }
}

pub fn default_impurity(task: Task) -> ImpurityKind {
    match task {
        Task::Binary => ImpurityKind::Gini,
        Task::Regression => ImpurityKind::SquaredError,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Leaf,
    Split {
        rule: SplitRule,
        left: usize,
        right: usize,
        /// The left child holds more training rows; ties count as right.
        larger_left: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    /// Training rows reaching the node.
    pub n: usize,
    /// Mean response (class-1 proportion for binary tasks).
    pub value: f64,
    /// Total training impurity of the node.
    pub impurity: f64,
    pub kind: NodeKind,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf)
    }
}

/// Feature names, kinds and category dictionaries a model was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureInfo {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpace {
    pub features: Vec<FeatureInfo>,
    pub response: String,
    pub task: Task,
    pub schema_fingerprint: String,
}

impl FeatureSpace {
    pub fn of(d: &Dataset) -> FeatureSpace {
        let features = d
            .features()
            .iter()
            .map(|c| FeatureInfo {
                name: c.name().to_string(),
                kind: c.kind(),
                labels: match c {
                    FeatureColumn::Categorical { labels, .. } => Some(labels.clone()),
                    FeatureColumn::Numeric { .. } => None,
                },
            })
            .collect();
        FeatureSpace {
            features,
            response: d.response_name().to_string(),
            task: d.task(),
            schema_fingerprint: d.schema().fingerprint(),
        }
    }

    /// Rows of `d` in this space's feature order and category codes. Features
    /// are matched by name; labels the model never saw become `None`.
    pub fn encode(&self, d: &Dataset) -> Result<Vec<Vec<FeatureValue>>> {
        enum Source {
            Numeric(usize),
            Categorical(usize, Vec<Option<u32>>),
        }
        let mut sources = Vec::with_capacity(self.features.len());
        for f in &self.features {
            let j = d
                .features()
                .iter()
                .position(|c| c.name() == f.name)
                .ok_or_else(|| Error::SchemaMismatch(format!("feature '{}' missing", f.name)))?;
            let col = d.feature(j);
            if col.kind() != f.kind {
                return Err(Error::SchemaMismatch(format!(
                    "feature '{}' is {}, model expects {}",
                    f.name,
                    col.kind().as_str(),
                    f.kind.as_str()
                )));
            }
            sources.push(match &f.labels {
                None => Source::Numeric(j),
                Some(labels) => Source::Categorical(j, d.category_mapping(j, labels).unwrap_or_default()),
            });
        }
        Ok((0..d.n())
            .map(|i| {
                sources
                    .iter()
                    .map(|s| match s {
                        Source::Numeric(j) => FeatureValue::Numeric(d.numeric_value(*j, i).unwrap_or(f64::NAN)),
                        Source::Categorical(j, map) => {
                            FeatureValue::Category(d.category_code(*j, i).and_then(|c| map[c as usize]))
                        }
                    })
                    .collect()
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    /// Nodes in pre-order; the root is node 0.
    pub nodes: Vec<TreeNode>,
    pub space: FeatureSpace,
    pub config: GrowConfig,
}

impl TreeModel {
    pub fn task(&self) -> Task {
        self.space.task
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.len() - self.n_leaves()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i].kind {
                NodeKind::Leaf => 0,
                NodeKind::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Features appearing in at least one split.
    pub fn used_features(&self) -> BTreeSet<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match &n.kind {
                NodeKind::Split { rule, .. } => Some(rule.feature),
                NodeKind::Leaf => None,
            })
            .collect()
    }

    /// Whether an encoded row goes left at split node `i`. Unseen categories
    /// and mismatched values follow the larger child.
    pub(crate) fn goes_left(&self, i: usize, row: &[FeatureValue]) -> bool {
        match &self.nodes[i].kind {
            NodeKind::Leaf => false,
            NodeKind::Split { rule, larger_left, .. } => match (&rule.partition, row[rule.feature]) {
                (Partition::Threshold(t), FeatureValue::Numeric(x)) => x <= *t,
                (p @ Partition::Categories { .. }, FeatureValue::Category(Some(c))) => {
                    p.side_of_category(c).unwrap_or(*larger_left)
                }
                _ => *larger_left,
            },
        }
    }

    /// Index of the leaf reached by an encoded row.
    pub fn leaf_of(&self, row: &[FeatureValue]) -> usize {
        let mut i = 0;
        while let NodeKind::Split { left, right, .. } = self.nodes[i].kind {
            i = if self.goes_left(i, row) { left } else { right };
        }
        i
    }

    pub fn predict_row(&self, row: &[FeatureValue]) -> f64 {
        self.nodes[self.leaf_of(row)].value
    }

    pub fn predict_encoded(&self, rows: &[Vec<FeatureValue>]) -> Vec<f64> {
        rows.iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        Ok(self.predict_encoded(&self.space.encode(d)?))
    }

    /// Rebuilds the node list in pre-order from `root`, dropping unreachable
    /// nodes.
    pub(crate) fn compact(nodes: &[TreeNode], root: usize) -> Vec<TreeNode> {
        let mut out = Vec::with_capacity(nodes.len());
        fn go(nodes: &[TreeNode], i: usize, out: &mut Vec<TreeNode>) -> usize {
            let id = out.len();
            out.push(TreeNode {
                kind: NodeKind::Leaf,
                ..nodes[i].clone()
            });
            if let NodeKind::Split {
                rule,
                left,
                right,
                larger_left,
            } = &nodes[i].kind
            {
                let l = go(nodes, *left, out);
                let r = go(nodes, *right, out);
                out[id].kind = NodeKind::Split {
                    rule: rule.clone(),
                    left: l,
                    right: r,
                    larger_left: *larger_left,
                };
            }
            id
        }
        go(nodes, root, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::Response;

    pub(crate) fn stump_data() -> Dataset {
        let x = FeatureColumn::numeric("x", vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        Dataset::new(vec![x], Response::binary("y", vec![0.0, 0.0, 1.0, 1.0])).unwrap()
    }

    #[test]
    fn stump_predicts_by_threshold() {
        let d = stump_data();
        let mut cfg = GrowConfig::cart(ImpurityKind::Gini);
        cfg.max_depth = Some(1);
        let t = grow_cart(&d, &cfg).unwrap();
        assert_eq!(t.nodes.len(), 3);
        match &t.root().kind {
            NodeKind::Split { rule, .. } => assert_eq!(rule.partition, Partition::Threshold(2.5)),
            NodeKind::Leaf => panic!("expected a split"),
        }
        assert_eq!(t.predict_row(&[FeatureValue::Numeric(3.7)]), 1.0);
        assert_eq!(t.predict_row(&[FeatureValue::Numeric(0.0)]), 0.0);
        assert_eq!(t.predict(&d).unwrap(), vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn unseen_category_goes_to_larger_child() {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let x = FeatureColumn::categorical("x", vec![0, 0, 0, 1, 1], labels.clone()).unwrap();
        let d = Dataset::new(vec![x], Response::regression("y", vec![0.0, 0.1, 0.2, 5.0, 5.1])).unwrap();
        let t = grow_cart(&d, &GrowConfig::cart(ImpurityKind::SquaredError)).unwrap();
        assert_eq!(t.n_leaves(), 2);
        // 'c' was never observed: the larger child is the one holding 'a'
        let p = t.predict_row(&[FeatureValue::Category(Some(2))]);
        assert!((p - 0.1).abs() < 1e-12);
        assert!((t.predict_row(&[FeatureValue::Category(None)]) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn encode_rejects_schema_mismatch() {
        let d = stump_data();
        let t = grow_cart(&d, &GrowConfig::cart(ImpurityKind::Gini)).unwrap();
        let z = FeatureColumn::numeric("z", vec![1.0, 2.0]).unwrap();
        let other = Dataset::new(vec![z], Response::binary("y", vec![0.0, 1.0])).unwrap();
        assert!(matches!(t.predict(&other), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn config_validation() {
        let mut cfg = GrowConfig::cart(ImpurityKind::SquaredError);
        cfg.min_leaf = 3;
        cfg.min_node = 5;
        assert!(cfg.validate(Task::Regression, 1).is_err());
        cfg.min_node = 6;
        assert!(cfg.validate(Task::Regression, 1).is_ok());
        assert!(GrowConfig::cart(ImpurityKind::Gini).validate(Task::Regression, 1).is_err());
    }
}
