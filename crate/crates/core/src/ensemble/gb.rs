use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, Task};
use crate::error::{invalid, Result};
use crate::rng::derive_seed;
use crate::splits::ImpurityKind;
use crate::tree::{grow, AloofOptions, FeatureSpace, GrowConfig, NodeKind, Selector};

use super::{sigmoid, EnsembleConfig, EnsembleModel, Member};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GbLoss {
    SquaredError,
    /// Binomial deviance on the log-odds scale.
    Deviance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbConfig {
    pub trees: usize,
    pub nu: f64,
    /// Minimum leaf size as a fraction of the training rows.
    pub min_leaf_frac: f64,
    pub selector: Selector,
    pub loss: GbLoss,
    pub max_depth: Option<usize>,
    pub max_categories: Option<usize>,
    pub aloof: AloofOptions,
    pub seed: u64,
}

impl GbConfig {
    pub fn new(selector: Selector) -> Self {
        GbConfig {
            trees: 50,
            nu: 0.1,
            min_leaf_frac: 0.05,
            selector,
            loss: GbLoss::SquaredError,
            max_depth: None,
            max_categories: None,
            aloof: AloofOptions::default(),
            seed: 0,
        }
    }

    /// Squared error for regression, deviance for binary responses.
    pub fn for_task(selector: Selector, task: Task) -> Self {
        GbConfig {
            loss: match task {
                Task::Regression => GbLoss::SquaredError,
                Task::Binary => GbLoss::Deviance,
            },
            ..Self::new(selector)
        }
    }
}

/// Stagewise boosting of regression trees fitted to the negative gradient.
/// Under deviance the leaf values are replaced by one Newton step,
/// `Σ r / Σ p(1 − p)` over the leaf's rows.
pub fn fit_gradient_boosting(d: &Dataset, cfg: &GbConfig) -> Result<EnsembleModel> {
    if !(cfg.nu > 0.0 && cfg.nu <= 1.0) {
        return invalid(format!("learning rate must lie in (0, 1], got {}", cfg.nu));
    }
    if !(cfg.min_leaf_frac > 0.0 && cfg.min_leaf_frac <= 0.5) {
        return invalid(format!("min leaf fraction must lie in (0, 0.5], got {}", cfg.min_leaf_frac));
    }
    if cfg.loss == GbLoss::Deviance && d.task() != Task::Binary {
        return invalid("deviance loss requires a binary response");
    }
    let n = d.n();
    if n == 0 {
        return invalid("cannot boost on an empty dataset");
    }
    let y = d.responses();
    let mean = y.iter().sum::<f64>() / n as f64;
    let constant = y.iter().all(|&v| v == y[0]);
    let base = match cfg.loss {
        GbLoss::SquaredError => mean,
        GbLoss::Deviance => {
            let p = mean.clamp(1e-12, 1.0 - 1e-12);
            (p / (1.0 - p)).ln()
        }
    };
    let min_leaf = ((cfg.min_leaf_frac * n as f64).ceil() as usize).max(1);
    let mut model = EnsembleModel {
        config: EnsembleConfig::Gb(cfg.clone()),
        base,
        members: Vec::new(),
        space: FeatureSpace::of(d),
        n_train: n,
    };
    if constant {
        return Ok(model);
    }
    let encoded = model.space.encode(d)?;
    let mut f = vec![base; n];
    for m in 0..cfg.trees {
        let prob: Vec<f64> = match cfg.loss {
            GbLoss::SquaredError => f.clone(),
            GbLoss::Deviance => f.iter().map(|&v| sigmoid(v)).collect(),
        };
        let residual: Vec<f64> = y.iter().zip(&prob).map(|(a, b)| a - b).collect();
        let target = d.with_response(&residual, Task::Regression)?;
        let seed = derive_seed(cfg.seed, m as u64);
        let grow_cfg = GrowConfig {
            max_depth: cfg.max_depth,
            min_leaf,
            min_node: 2 * min_leaf,
            max_categories: cfg.max_categories,
            aloof: cfg.aloof,
            seed,
            ..GrowConfig::new(cfg.selector, ImpurityKind::SquaredError)
        };
        let mut tree = grow(&target, &grow_cfg)?;
        let leaves: Vec<usize> = encoded.iter().map(|r| tree.leaf_of(r)).collect();
        if cfg.loss == GbLoss::Deviance {
            let mut num = vec![0.0; tree.nodes.len()];
            let mut den = vec![0.0; tree.nodes.len()];
            for (i, &l) in leaves.iter().enumerate() {
                num[l] += residual[i];
                den[l] += prob[i] * (1.0 - prob[i]);
            }
            for (id, node) in tree.nodes.iter_mut().enumerate() {
                if matches!(node.kind, NodeKind::Leaf) {
                    node.value = if den[id] > 1e-12 { num[id] / den[id] } else { 0.0 };
                }
            }
        }
        for (fi, &l) in f.iter_mut().zip(&leaves) {
            *fi += cfg.nu * tree.nodes[l].value;
        }
        model.members.push(Member {
            tree,
            seed,
            oob: None,
        });
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{FeatureColumn, Response};
    use crate::synth::gen_uninformative;

    #[test]
    fn one_tree_full_step_equals_tree_fit() {
        let d = gen_uninformative(200, 10, 5).unwrap();
        let mut cfg = GbConfig::new(Selector::Cart);
        cfg.trees = 1;
        cfg.nu = 1.0;
        let m = fit_gradient_boosting(&d, &cfg).unwrap();
        let y = d.responses();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let resid: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let t = grow(&d.with_response(&resid, Task::Regression).unwrap(), &m.members[0].tree.config).unwrap();
        let single = t.predict(&d).unwrap();
        let boosted = m.predict(&d).unwrap();
        for (a, b) in boosted.iter().zip(&single) {
            assert_eq!(*a, mean + 1.0 * b);
        }
    }

    #[test]
    fn training_loss_non_increasing() {
        let d = gen_uninformative(300, 20, 1).unwrap();
        let y = d.responses();
        let mut cfg = GbConfig::new(Selector::Cart);
        let mut last = f64::INFINITY;
        for trees in [0, 1, 5, 20, 50] {
            cfg.trees = trees;
            let p = fit_gradient_boosting(&d, &cfg).unwrap().predict(&d).unwrap();
            let loss: f64 = p.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(loss <= last + 1e-9);
            last = loss;
        }
    }

    #[test]
    fn constant_response_gives_base_only() {
        let x = FeatureColumn::numeric("x", vec![1.0, 2.0, 3.0]).unwrap();
        let d = Dataset::new(vec![x], Response::regression("y", vec![4.0; 3])).unwrap();
        let m = fit_gradient_boosting(&d, &GbConfig::new(Selector::Aloof)).unwrap();
        assert!(m.members.is_empty());
        assert_eq!(m.predict(&d).unwrap(), vec![4.0; 3]);
    }

    #[test]
    fn deviance_outputs_are_probabilities() {
        let d = gen_uninformative(200, 5, 3).unwrap();
        let yb: Vec<f64> = d.responses().iter().map(|&v| (v > 0.0) as u8 as f64).collect();
        let d = d.with_response(&yb, Task::Binary).unwrap();
        let m = fit_gradient_boosting(&d, &GbConfig::for_task(Selector::Cart, Task::Binary)).unwrap();
        assert!(m.predict(&d).unwrap().iter().all(|&p| p > 0.0 && p < 1.0));
        let mut cfg = GbConfig::for_task(Selector::Cart, Task::Regression);
        cfg.loss = GbLoss::Deviance;
        assert!(fit_gradient_boosting(&gen_uninformative(20, 2, 0).unwrap(), &cfg).is_err());
    }
}
