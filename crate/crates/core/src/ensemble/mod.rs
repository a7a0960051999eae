//! Gradient boosting and random forests over CART or leave-one-out trees.

mod gb;
mod importance;
mod rf;

pub use gb::{fit_gradient_boosting, GbConfig, GbLoss};
pub use importance::{oob_permutation_importance, FeatureImportance};
pub use rf::{fit_random_forest, RfConfig};

use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, FeatureValue};
use crate::error::{Error, Result};
use crate::tree::format::{
    check_version, nodes_from_doc, nodes_to_doc, parse_json, space_from_doc, space_to_doc, NodeDoc, SpaceDoc,
};
use crate::tree::{FeatureSpace, GrowConfig, TreeModel, FORMAT_VERSION};

/// A fitted member tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub tree: TreeModel,
    pub seed: u64,
    /// Training rows absent from the member's bootstrap sample, ascending.
    pub oob: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnsembleConfig {
    Gb(GbConfig),
    Rf(RfConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub config: EnsembleConfig,
    /// Initial score of a boosted model (mean, or log-odds under deviance).
    pub base: f64,
    pub members: Vec<Member>,
    pub space: FeatureSpace,
    /// Rows of the training dataset.
    pub n_train: usize,
}

#[inline]
pub(crate) fn sigmoid(f: f64) -> f64 {
    1.0 / (1.0 + (-f).exp())
}

impl EnsembleModel {
    /// Prediction for an encoded row: the boosted score (a probability under
    /// deviance) or the member average.
    pub fn predict_row(&self, row: &[FeatureValue]) -> f64 {
        match &self.config {
            EnsembleConfig::Gb(cfg) => {
                let f = self.base + cfg.nu * self.members.iter().map(|m| m.tree.predict_row(row)).sum::<f64>();
                match cfg.loss {
                    GbLoss::SquaredError => f,
                    GbLoss::Deviance => sigmoid(f),
                }
            }
            EnsembleConfig::Rf(_) => {
                self.members.iter().map(|m| m.tree.predict_row(row)).sum::<f64>() / self.members.len().max(1) as f64
            }
        }
    }

    pub fn predict_encoded(&self, rows: &[Vec<FeatureValue>]) -> Vec<f64> {
        rows.iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        Ok(self.predict_encoded(&self.space.encode(d)?))
    }
}

/// Convenience entry point mirroring the single-tree `predict`.
pub fn predict_ensemble(m: &EnsembleModel, d: &Dataset) -> Result<Vec<f64>> {
    m.predict(d)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemberDoc {
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oob: Option<Vec<usize>>,
    config: GrowConfig,
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleDoc {
    format_version: u32,
    config: EnsembleConfig,
    base: f64,
    n_train: usize,
    space: SpaceDoc,
    members: Vec<MemberDoc>,
}

impl EnsembleModel {
    pub fn to_json(&self) -> String {
        let doc = EnsembleDoc {
            format_version: FORMAT_VERSION,
            config: self.config.clone(),
            base: self.base,
            n_train: self.n_train,
            space: space_to_doc(&self.space),
            members: self
                .members
                .iter()
                .map(|m| MemberDoc {
                    seed: m.seed,
                    oob: m.oob.clone(),
                    config: m.tree.config.clone(),
                    nodes: nodes_to_doc(&m.tree.nodes),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("ensemble documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<EnsembleModel> {
        check_version(text)?;
        let doc: EnsembleDoc = parse_json(text)?;
        if !doc.base.is_finite() {
            return Err(Error::Format("non-finite base prediction".into()));
        }
        let space = space_from_doc(doc.space)?;
        let mut members = Vec::with_capacity(doc.members.len());
        for (t, m) in doc.members.into_iter().enumerate() {
            if let Some(&r) = m.oob.as_ref().and_then(|o| o.iter().find(|&&r| r >= doc.n_train)) {
                return Err(Error::Format(format!("member {t}: out-of-bag row {r} out of range")));
            }
            let nodes = nodes_from_doc(m.nodes, &space).map_err(|e| Error::Format(format!("member {t}: {e}")))?;
            members.push(Member {
                tree: TreeModel {
                    nodes,
                    space: space.clone(),
                    config: m.config,
                },
                seed: m.seed,
                oob: m.oob,
            });
        }
        Ok(EnsembleModel {
            config: doc.config,
            base: doc.base,
            members,
            space,
            n_train: doc.n_train,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_interaction_model, InteractionModelParams};
    use crate::tree::Selector;

    #[test]
    fn json_round_trip() {
        let d = gen_interaction_model(&InteractionModelParams {
            n: 120,
            k: 6,
            alpha: 3.0,
            seed: 2,
        })
        .unwrap();
        let mut gb = GbConfig::new(Selector::Cart);
        gb.trees = 5;
        let m = fit_gradient_boosting(&d, &gb).unwrap();
        let text = m.to_json();
        let back = EnsembleModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), text);

        let mut rf = RfConfig::new(Selector::Aloof);
        rf.trees = 4;
        let m = fit_random_forest(&d, &rf).unwrap();
        let back = EnsembleModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(TreeModel::from_json(&m.to_json()).is_err());
    }
}
