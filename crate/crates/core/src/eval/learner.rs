use nalgebra::{DMatrix, DVector};

use crate::dataio::{Dataset, FeatureColumn};
use crate::ensemble::{fit_gradient_boosting, fit_random_forest, EnsembleModel, GbConfig, RfConfig};
use crate::error::{invalid, Error, Result};
use crate::tree::{grow, prune_cost_complexity, GrowConfig, Selector, TreeModel};

/// A learner configuration that can be fitted repeatedly, e.g. per fold.
#[derive(Debug, Clone, PartialEq)]
pub enum LearnerSpec {
    /// A single tree; CART trees are pruned by cross-validation when
    /// `prune_folds` is set.
    Tree { grow: GrowConfig, prune_folds: Option<usize> },
    Gb(GbConfig),
    Rf(RfConfig),
    /// Predicts the training mean.
    Mean,
    /// Ordinary least squares on the numeric features.
    LeastSquares { intercept: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Tree(TreeModel),
    Ensemble(EnsembleModel),
    Constant(f64),
    Linear { features: Vec<usize>, intercept: f64, coefficients: Vec<f64> },
}

impl LearnerSpec {
    pub fn label(&self) -> String {
        let sel = |s: Selector| match s {
            Selector::Cart => "cart",
            Selector::Aloof => "aloof",
        };
        match self {
            LearnerSpec::Tree { grow, .. } => match (grow.selector, grow.max_categories) {
                (Selector::Cart, Some(k)) => format!("cart-limited-{k}"),
                (s, _) => sel(s).to_string(),
            },
            LearnerSpec::Gb(c) => format!("gb-{}", sel(c.selector)),
            LearnerSpec::Rf(c) => format!("rf-{}", sel(c.selector)),
            LearnerSpec::Mean => "mean".into(),
            LearnerSpec::LeastSquares { .. } => "least-squares".into(),
        }
    }

    /// The same learner with every seed replaced.
    pub fn with_seed(&self, seed: u64) -> LearnerSpec {
        let mut s = self.clone();
        match &mut s {
            LearnerSpec::Tree { grow, .. } => grow.seed = seed,
            LearnerSpec::Gb(c) => c.seed = seed,
            LearnerSpec::Rf(c) => c.seed = seed,
            LearnerSpec::Mean | LearnerSpec::LeastSquares { .. } => {}
        }
        s
    }

    /// Smallest training set the learner can use.
    pub fn min_rows(&self, n: usize) -> usize {
        match self {
            LearnerSpec::Tree { grow, .. } => grow.min_node.max(1),
            LearnerSpec::Gb(c) => 2 * ((c.min_leaf_frac * n as f64).ceil() as usize).max(1),
            LearnerSpec::Rf(_) => 2,
            LearnerSpec::Mean => 1,
            LearnerSpec::LeastSquares { .. } => 1,
        }
    }

    pub fn fit(&self, d: &Dataset) -> Result<FittedModel> {
        match self {
            LearnerSpec::Tree { grow: cfg, prune_folds } => {
                let t = grow(d, cfg)?;
                Ok(FittedModel::Tree(match (cfg.selector, prune_folds) {
                    (Selector::Cart, Some(k)) if d.n() >= 2 => prune_cost_complexity(&t, d, *k, cfg.seed)?,
                    _ => t,
                }))
            }
            LearnerSpec::Gb(c) => Ok(FittedModel::Ensemble(fit_gradient_boosting(d, c)?)),
            LearnerSpec::Rf(c) => Ok(FittedModel::Ensemble(fit_random_forest(d, c)?)),
            LearnerSpec::Mean => {
                if d.n() == 0 {
                    return invalid("mean of an empty dataset");
                }
                Ok(FittedModel::Constant(d.responses().iter().sum::<f64>() / d.n() as f64))
            }
            LearnerSpec::LeastSquares { intercept } => fit_least_squares(d, *intercept),
        }
    }
}

fn fit_least_squares(d: &Dataset, intercept: bool) -> Result<FittedModel> {
    let features: Vec<usize> = (0..d.n_features())
        .filter(|&j| matches!(d.feature(j), FeatureColumn::Numeric { .. }))
        .collect();
    let cols = features.len() + intercept as usize;
    if cols == 0 || d.n() < cols {
        return invalid("least squares needs at least as many rows as coefficients");
    }
    let x = DMatrix::from_fn(d.n(), cols, |i, c| {
        if intercept && c == 0 {
            1.0
        } else {
            d.numeric_value(features[c - intercept as usize], i).unwrap_or(0.0)
        }
    });
    let y = DVector::from_vec(d.responses());
    let beta = x
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))?;
    let b: Vec<f64> = beta.iter().copied().collect();
    Ok(FittedModel::Linear {
        features,
        intercept: if intercept { b[0] } else { 0.0 },
        coefficients: b[intercept as usize..].to_vec(),
    })
}

impl FittedModel {
    pub fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        match self {
            FittedModel::Tree(t) => t.predict(d),
            FittedModel::Ensemble(m) => m.predict(d),
            FittedModel::Constant(c) => Ok(vec![*c; d.n()]),
            FittedModel::Linear {
                features,
                intercept,
                coefficients,
            } => Ok((0..d.n())
                .map(|i| {
                    intercept
                        + features
                            .iter()
                            .zip(coefficients)
                            .map(|(&j, b)| b * d.numeric_value(j, i).unwrap_or(0.0))
                            .sum::<f64>()
                })
                .collect()),
        }
    }

    /// JSON document for tree and ensemble models.
    pub fn to_json(&self) -> Result<String> {
        match self {
            FittedModel::Tree(t) => Ok(t.to_json()),
            FittedModel::Ensemble(m) => Ok(m.to_json()),
            _ => invalid("only tree and ensemble models are serialized"),
        }
    }

    /// Reads either document kind; ensembles carry a `members` array.
    pub fn from_json(text: &str) -> Result<FittedModel> {
        let probe: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if probe.get("members").is_some() {
            Ok(FittedModel::Ensemble(EnsembleModel::from_json(text)?))
        } else {
            Ok(FittedModel::Tree(TreeModel::from_json(text)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::Response;

    #[test]
    fn least_squares_recovers_coefficients() {
        let x1: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let x2: Vec<f64> = (0..20).map(|i| ((i * 7) % 5) as f64).collect();
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 1.5 + 2.0 * a - 0.5 * b).collect();
        let d = Dataset::new(
            vec![
                FeatureColumn::numeric("a", x1).unwrap(),
                FeatureColumn::numeric("b", x2).unwrap(),
            ],
            Response::regression("y", y.clone()),
        )
        .unwrap();
        let m = LearnerSpec::LeastSquares { intercept: true }.fit(&d).unwrap();
        for (p, t) in m.predict(&d).unwrap().iter().zip(&y) {
            assert!((p - t).abs() < 1e-9);
        }
    }
}
