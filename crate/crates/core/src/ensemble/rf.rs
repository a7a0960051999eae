use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, Task};
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::tree::{default_impurity, grow, AloofOptions, FeatureSpace, GrowConfig, Selector};

use super::{EnsembleConfig, EnsembleModel, Member};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfConfig {
    pub trees: usize,
    pub bootstrap: bool,
    /// Features sampled per node; `⌈√p⌉` for binary tasks and `⌈p/3⌉` for
    /// regression when unset.
    pub mtry: Option<usize>,
    /// Defaults to 1 for binary tasks and 5 for regression.
    pub min_leaf: Option<usize>,
    pub selector: Selector,
    pub max_depth: Option<usize>,
    pub max_categories: Option<usize>,
    pub aloof: AloofOptions,
    pub seed: u64,
}

impl RfConfig {
    pub fn new(selector: Selector) -> Self {
        RfConfig {
            trees: 500,
            bootstrap: true,
            mtry: None,
            min_leaf: None,
            selector,
            max_depth: None,
            max_categories: None,
            aloof: AloofOptions::default(),
            seed: 0,
        }
    }

    pub fn resolved_mtry(&self, task: Task, p: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| match task {
                Task::Binary => (p as f64).sqrt().ceil() as usize,
                Task::Regression => p.div_ceil(3),
            })
            .clamp(1, p.max(1))
    }
}

/// Bagged unpruned trees with per-node feature sampling. Member `t` draws all
/// of its randomness from `derive_seed(seed, t)`, so the fit does not depend
/// on scheduling.
pub fn fit_random_forest(d: &Dataset, cfg: &RfConfig) -> Result<EnsembleModel> {
    let n = d.n();
    if n < 2 {
        return invalid("random forest needs at least two rows");
    }
    let p = d.n_features();
    if let Some(m) = cfg.mtry {
        if m == 0 || m > p {
            return invalid(format!("mtry must lie in [1, {p}], got {m}"));
        }
    }
    let min_leaf = cfg.min_leaf.unwrap_or(match d.task() {
        Task::Binary => 1,
        Task::Regression => 5,
    });
    let mtry = cfg.resolved_mtry(d.task(), p);
    let members = (0..cfg.trees)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(cfg.seed, t as u64);
            let mut rng = rng_from_seed(seed);
            let (sample, oob) = if cfg.bootstrap {
                let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let mut drawn = vec![false; n];
                for &i in &sample {
                    drawn[i] = true;
                }
                let oob = (0..n).filter(|&i| !drawn[i]).collect();
                (sample, Some(oob))
            } else {
                ((0..n).collect(), None)
            };
            let grow_cfg = GrowConfig {
                max_depth: cfg.max_depth,
                min_leaf,
                min_node: 2 * min_leaf,
                max_categories: cfg.max_categories,
                mtry: Some(mtry),
                aloof: cfg.aloof,
                seed: rng.random(),
                ..GrowConfig::new(cfg.selector, default_impurity(d.task()))
            };
            let tree = grow(&d.resample(&sample)?, &grow_cfg)?;
            Ok(Member { tree, seed, oob })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleModel {
        config: EnsembleConfig::Rf(cfg.clone()),
        base: 0.0,
        members,
        space: FeatureSpace::of(d),
        n_train: n,
    })
}
