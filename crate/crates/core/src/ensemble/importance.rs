use rand::seq::SliceRandom;

use crate::dataio::{Dataset, FeatureValue, Task};
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, derived_rng};

use super::{EnsembleConfig, EnsembleModel};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureImportance {
    pub feature: usize,
    pub name: String,
    /// Mean over trees of the increase in out-of-bag loss.
    pub score: f64,
    /// Standard error of that mean across trees.
    pub stderr: f64,
}

fn loss(task: Task, pred: f64, y: f64) -> f64 {
    match task {
        Task::Binary => ((pred >= 0.5) as u8 as f64 - y).abs(),
        Task::Regression => (pred - y) * (pred - y),
    }
}

/// Permutation importance on each member's out-of-bag rows: misclassification
/// rate for binary responses, squared error for regression. A feature a tree
/// never splits on contributes exactly 0 for that tree. Sorted by score,
/// highest first, ties by feature index.
pub fn oob_permutation_importance(m: &EnsembleModel, d: &Dataset, seed: u64) -> Result<Vec<FeatureImportance>> {
    if !matches!(m.config, EnsembleConfig::Rf(_)) {
        return invalid("out-of-bag importance needs a random forest");
    }
    if d.n() != m.n_train {
        return invalid(format!(
            "dataset has {} rows but the forest was trained on {}",
            d.n(),
            m.n_train
        ));
    }
    let rows = m.space.encode(d)?;
    let y = d.responses();
    let task = m.space.task;
    let p = m.space.features.len();
    let mut per_tree: Vec<Vec<f64>> = vec![Vec::new(); p];
    for (t, member) in m.members.iter().enumerate() {
        let Some(oob) = member.oob.as_ref() else {
            return invalid("out-of-bag importance needs bootstrap samples");
        };
        if oob.is_empty() {
            continue;
        }
        let tree = &member.tree;
        let base: f64 = oob.iter().map(|&i| loss(task, tree.predict_row(&rows[i]), y[i])).sum::<f64>() / oob.len() as f64;
        let used = tree.used_features();
        for (j, scores) in per_tree.iter_mut().enumerate() {
            if !used.contains(&j) {
                scores.push(0.0);
                continue;
            }
            let mut values: Vec<FeatureValue> = oob.iter().map(|&i| rows[i][j]).collect();
            values.shuffle(&mut derived_rng(derive_seed(seed, t as u64), j as u64));
            let mut row = Vec::with_capacity(p);
            let permuted: f64 = oob
                .iter()
                .zip(&values)
                .map(|(&i, &v)| {
                    row.clear();
                    row.extend_from_slice(&rows[i]);
                    row[j] = v;
                    loss(task, tree.predict_row(&row), y[i])
                })
                .sum::<f64>()
                / oob.len() as f64;
            scores.push(permuted - base);
        }
    }
    let mut out: Vec<FeatureImportance> = per_tree
        .into_iter()
        .enumerate()
        .map(|(j, s)| {
            let k = s.len() as f64;
            let (score, stderr) = if s.is_empty() {
                (0.0, 0.0)
            } else {
                let mean = s.iter().sum::<f64>() / k;
                let var = if s.len() > 1 {
                    s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)
                } else {
                    0.0
                };
                (mean, (var / k).sqrt())
            };
            FeatureImportance {
                feature: j,
                name: m.space.features[j].name.clone(),
                score,
                stderr,
            }
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.feature.cmp(&b.feature)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{FeatureColumn, Response};
    use crate::ensemble::{fit_random_forest, RfConfig};
    use crate::rng::rng_from_seed;
    use crate::tree::Selector;
    use rand::Rng;

    fn data(seed: u64) -> Dataset {
        let mut rng = rng_from_seed(seed);
        let n = 200;
        let x1: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let x3: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        Dataset::new(
            vec![
                FeatureColumn::numeric("x1", x1.clone()).unwrap(),
                FeatureColumn::numeric("x2", x2).unwrap(),
                FeatureColumn::numeric("x3", x3).unwrap(),
            ],
            Response::regression("y", x1),
        )
        .unwrap()
    }

    #[test]
    fn signal_feature_ranks_first() {
        let d = data(1);
        let mut cfg = RfConfig::new(Selector::Cart);
        cfg.trees = 40;
        let m = fit_random_forest(&d, &cfg).unwrap();
        let imp = oob_permutation_importance(&m, &d, 5).unwrap();
        assert_eq!(imp.len(), 3);
        assert_eq!(imp[0].name, "x1");
        for f in &imp[1..] {
            assert!(f.score.abs() < 3.0 * f.stderr.max(1e-12) || f.score.abs() < 1e-3, "{f:?}");
        }
    }

    #[test]
    fn unused_feature_scores_zero() {
        let d = data(2);
        let mut cfg = RfConfig::new(Selector::Cart);
        cfg.trees = 10;
        cfg.max_depth = Some(1);
        cfg.mtry = Some(3);
        let m = fit_random_forest(&d, &cfg).unwrap();
        let imp = oob_permutation_importance(&m, &d, 0).unwrap();
        for f in imp.iter().filter(|f| f.name != "x1") {
            assert_eq!(f.score, 0.0);
        }
    }
}
