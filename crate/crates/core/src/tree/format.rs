//! JSON model documents.

use serde::{Deserialize, Serialize};

use crate::dataio::{ColumnKind, Task};
use crate::error::{Error, Result};
use crate::splits::{ImpurityKind, Partition, SplitRule};

use super::{FeatureInfo, FeatureSpace, GrowConfig, NodeKind, TreeModel, TreeNode};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub(crate) enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SplitDoc {
    feature: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left_categories: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right_categories: Option<Vec<u32>>,
    left: usize,
    right: usize,
    larger: Side,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct NodeDoc {
    n: usize,
    value: f64,
    impurity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<SplitDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SpaceDoc {
    task: Task,
    schema_fingerprint: String,
    response: String,
    features: Vec<FeatureInfo>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDoc {
    format_version: u32,
    task: Task,
    impurity: ImpurityKind,
    schema_fingerprint: String,
    response: String,
    features: Vec<FeatureInfo>,
    config: GrowConfig,
    nodes: Vec<NodeDoc>,
}

pub(crate) fn space_to_doc(s: &FeatureSpace) -> SpaceDoc {
    SpaceDoc {
        task: s.task,
        schema_fingerprint: s.schema_fingerprint.clone(),
        response: s.response.clone(),
        features: s.features.clone(),
    }
}

pub(crate) fn space_from_doc(d: SpaceDoc) -> Result<FeatureSpace> {
    for f in &d.features {
        match (f.kind, &f.labels) {
            (ColumnKind::Numeric, None) | (ColumnKind::Categorical, Some(_)) => {}
            _ => {
                return Err(Error::Format(format!(
                    "feature '{}': kind {} inconsistent with labels",
                    f.name,
                    f.kind.as_str()
                )))
            }
        }
    }
    Ok(FeatureSpace {
        features: d.features,
        response: d.response,
        task: d.task,
        schema_fingerprint: d.schema_fingerprint,
    })
}

pub(crate) fn nodes_to_doc(nodes: &[TreeNode]) -> Vec<NodeDoc> {
    nodes
        .iter()
        .map(|n| NodeDoc {
            n: n.n,
            value: n.value,
            impurity: n.impurity,
            split: match &n.kind {
                NodeKind::Leaf => None,
                NodeKind::Split {
                    rule,
                    left,
                    right,
                    larger_left,
                } => {
                    let (threshold, lc, rc) = match &rule.partition {
                        Partition::Threshold(t) => (Some(t.to_string()), None, None),
                        Partition::Categories { left, right } => (None, Some(left.clone()), Some(right.clone())),
                    };
                    Some(SplitDoc {
                        feature: rule.feature,
                        threshold,
                        left_categories: lc,
                        right_categories: rc,
                        left: *left,
                        right: *right,
                        larger: if *larger_left { Side::Left } else { Side::Right },
                    })
                }
            },
        })
        .collect()
}

fn sorted_codes(v: Vec<u32>, k: usize, at: usize) -> Result<Vec<u32>> {
    if v.windows(2).any(|w| w[0] >= w[1]) || v.last().is_some_and(|&c| c as usize >= k) {
        return Err(Error::Format(format!(
            "node {at}: category codes must be sorted, distinct and below {k}"
        )));
    }
    Ok(v)
}

/// Checks structure: children follow their parent, every non-root node has
/// exactly one parent, splits match feature kinds.
pub(crate) fn nodes_from_doc(docs: Vec<NodeDoc>, space: &FeatureSpace) -> Result<Vec<TreeNode>> {
    let len = docs.len();
    if len == 0 {
        return Err(Error::Format("tree has no nodes".into()));
    }
    let mut parents = vec![0usize; len];
    let mut nodes = Vec::with_capacity(len);
    for (i, d) in docs.into_iter().enumerate() {
        let bad = |m: String| Error::Format(format!("node {i}: {m}"));
        if !(d.value.is_finite() && d.impurity.is_finite()) {
            return Err(bad("non-finite value".into()));
        }
        let kind = match d.split {
            None => NodeKind::Leaf,
            Some(s) => {
                for c in [s.left, s.right] {
                    if c <= i || c >= len {
                        return Err(bad(format!("child index {c} out of order")));
                    }
                    parents[c] += 1;
                }
                if s.left == s.right {
                    return Err(bad("children must differ".into()));
                }
                let info = space
                    .features
                    .get(s.feature)
                    .ok_or_else(|| bad(format!("feature {} out of range", s.feature)))?;
                let partition = match (info.kind, s.threshold, s.left_categories, s.right_categories) {
                    (ColumnKind::Numeric, Some(t), None, None) => {
                        let t: f64 = t.parse().map_err(|_| bad(format!("bad threshold '{t}'")))?;
                        if !t.is_finite() {
                            return Err(bad("non-finite threshold".into()));
                        }
                        Partition::Threshold(t)
                    }
                    (ColumnKind::Categorical, None, Some(l), Some(r)) => {
                        let k = info.labels.as_ref().map_or(0, Vec::len);
                        Partition::Categories {
                            left: sorted_codes(l, k, i)?,
                            right: sorted_codes(r, k, i)?,
                        }
                    }
                    _ => return Err(bad(format!("split does not match kind of feature '{}'", info.name))),
                };
                NodeKind::Split {
                    rule: SplitRule {
                        feature: s.feature,
                        partition,
                    },
                    left: s.left,
                    right: s.right,
                    larger_left: s.larger == Side::Left,
                }
            }
        };
        nodes.push(TreeNode {
            n: d.n,
            value: d.value,
            impurity: d.impurity,
            kind,
        });
    }
    if let Some(i) = (1..len).find(|&i| parents[i] != 1) {
        return Err(Error::Format(format!("node {i} has {} parents", parents[i])));
    }
    Ok(nodes)
}

pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

pub(crate) fn check_version(text: &str) -> Result<()> {
    #[derive(Deserialize)]
    struct Probe {
        format_version: u32,
    }
    let probe: Probe = parse_json(text)?;
    if probe.format_version != FORMAT_VERSION {
        return Err(Error::Version {
            expected: FORMAT_VERSION,
            found: probe.format_version,
        });
    }
    Ok(())
}

impl TreeModel {
    pub fn to_json(&self) -> String {
        let s = space_to_doc(&self.space);
        let doc = TreeDoc {
            format_version: FORMAT_VERSION,
            task: s.task,
            impurity: self.config.kind,
            schema_fingerprint: s.schema_fingerprint,
            response: s.response,
            features: s.features,
            config: self.config.clone(),
            nodes: nodes_to_doc(&self.nodes),
        };
        serde_json::to_string_pretty(&doc).expect("tree documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<TreeModel> {
        check_version(text)?;
        let doc: TreeDoc = parse_json(text)?;
        if doc.impurity != doc.config.kind {
            return Err(Error::Format("impurity disagrees with config".into()));
        }
        let space = space_from_doc(SpaceDoc {
            task: doc.task,
            schema_fingerprint: doc.schema_fingerprint,
            response: doc.response,
            features: doc.features,
        })?;
        let nodes = nodes_from_doc(doc.nodes, &space)?;
        Ok(TreeModel {
            nodes,
            space,
            config: doc.config,
        })
    }
}
