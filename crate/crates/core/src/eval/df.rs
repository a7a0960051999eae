use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::dataio::{Dataset, Task};
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, derived_rng};

use super::{metric, LearnerSpec, MetricKind};

/// Fixed covariates with responses drawn as `mu + sigma · ε`.
#[derive(Debug, Clone)]
pub struct FixedDesign {
    pub design: Dataset,
    pub mu: Vec<f64>,
    pub sigma: f64,
}

impl FixedDesign {
    pub fn new(design: Dataset, mu: Vec<f64>, sigma: f64) -> Result<Self> {
        if mu.len() != design.n() {
            return invalid(format!("{} means for {} rows", mu.len(), design.n()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return invalid(format!("noise level must be positive, got {sigma}"));
        }
        Ok(FixedDesign { design, mu, sigma })
    }

    pub fn sample(&self, seed: u64, rep: u64) -> Result<Dataset> {
        let mut rng = derived_rng(seed, rep);
        let y: Vec<f64> = self
            .mu
            .iter()
            .map(|m| m + self.sigma * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect::<Vec<f64>>();
        self.design.with_response(&y, Task::Regression)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfEstimate {
    pub df: f64,
    pub stderr: f64,
    pub reps: usize,
    pub sigma2: f64,
}

/// Monte Carlo estimate of `Σ_i cov(y_i, ŷ_i) / σ²`. Each replicate's
/// contribution `Σ_i (y_i − ȳ_i)(ŷ_i − ŷ̄_i) · R/(R−1) / σ²` averages to the
/// estimate, and its spread gives the standard error.
pub fn estimate_df(design: &FixedDesign, spec: &LearnerSpec, reps: usize, seed: u64) -> Result<DfEstimate> {
    Ok(run(design, spec, reps, seed, None)?.0)
}

/// [`estimate_df`] plus the mean test MSE of the same fitted models.
pub fn df_with_test_mse(
    design: &FixedDesign,
    spec: &LearnerSpec,
    reps: usize,
    seed: u64,
    test: &Dataset,
) -> Result<(DfEstimate, f64)> {
    run(design, spec, reps, seed, Some(test))
}

fn run(
    design: &FixedDesign,
    spec: &LearnerSpec,
    reps: usize,
    seed: u64,
    test: Option<&Dataset>,
) -> Result<(DfEstimate, f64)> {
    if reps < 10 {
        return invalid(format!("at least 10 replicates are required, got {reps}"));
    }
    let truth = test.map(|t| t.responses());
    let runs: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let d = design.sample(derive_seed(seed, 0), r as u64)?;
            let model = spec.with_seed(derive_seed(derive_seed(seed, 1), r as u64)).fit(&d)?;
            let mse = match (test, &truth) {
                (Some(t), Some(y)) => metric(MetricKind::Mse, &model.predict(t)?, y)?,
                _ => 0.0,
            };
            Ok((d.responses(), model.predict(&d)?, mse))
        })
        .collect::<Result<_>>()?;
    let n = design.design.n();
    let rf = reps as f64;
    let mut ybar = vec![0.0; n];
    let mut fbar = vec![0.0; n];
    for (y, f, _) in &runs {
        for i in 0..n {
            ybar[i] += y[i] / rf;
            fbar[i] += f[i] / rf;
        }
    }
    let sigma2 = design.sigma * design.sigma;
    let z: Vec<f64> = runs
        .iter()
        .map(|(y, f, _)| (0..n).map(|i| (y[i] - ybar[i]) * (f[i] - fbar[i])).sum::<f64>() * rf / (rf - 1.0) / sigma2)
        .collect();
    let df = z.iter().sum::<f64>() / rf;
    let var = z.iter().map(|v| (v - df) * (v - df)).sum::<f64>() / (rf - 1.0);
    let mse = runs.iter().map(|r| r.2).sum::<f64>() / rf;
    Ok((
        DfEstimate {
            df,
            stderr: (var / rf).sqrt(),
            reps,
            sigma2,
        },
        mse,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{FeatureColumn, Response};

    fn design(p: usize) -> FixedDesign {
        let n = 40;
        let cols = (0..p)
            .map(|j| FeatureColumn::numeric(format!("x{j}"), (0..n).map(|i| ((i * (j + 3)) % 11) as f64 + j as f64 * 0.1).collect()).unwrap())
            .collect();
        let d = Dataset::new(cols, Response::regression("y", vec![0.0; n])).unwrap();
        FixedDesign::new(d, (0..n).map(|i| i as f64 / 10.0).collect(), 1.0).unwrap()
    }

    #[test]
    fn constant_mean_has_one_df() {
        let e = estimate_df(&design(1), &LearnerSpec::Mean, 400, 3).unwrap();
        assert!((e.df - 1.0).abs() < 3.0 * e.stderr + 0.05, "{e:?}");
    }

    #[test]
    fn too_few_reps_rejected() {
        assert!(estimate_df(&design(1), &LearnerSpec::Mean, 9, 0).is_err());
    }
}
