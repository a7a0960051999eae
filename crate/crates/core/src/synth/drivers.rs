use rayon::prelude::*;

use crate::dataio::{Dataset, Task};
use crate::error::{invalid, Result};
use crate::eval::{metric, DfEstimate, FixedDesign, LearnerSpec, MetricKind};
use crate::rng::derive_seed;
use crate::tree::{GrowConfig, Selector};

use super::{gen_interaction_model, gen_uninformative, InteractionModelParams};

/// Category limit of the limited-K baseline.
pub const LIMITED_K: usize = 32;
/// Folds used to prune the CART baselines.
pub const PRUNE_FOLDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepLearner {
    Aloof,
    /// Pruned CART that sees every feature.
    CartUnlimited,
    /// Pruned CART that drops categorical features with more than
    /// [`LIMITED_K`] categories.
    CartLimited,
    /// Pruned CART restricted to the numeric feature.
    CartNoCategorical,
}

impl SweepLearner {
    pub fn label(self) -> &'static str {
        match self {
            SweepLearner::Aloof => "aloof",
            SweepLearner::CartUnlimited => "cart-unlimited",
            SweepLearner::CartLimited => "cart-limited",
            SweepLearner::CartNoCategorical => "cart-no-categorical",
        }
    }

    pub fn spec(self) -> LearnerSpec {
        let cart = GrowConfig::for_task(Selector::Cart, Task::Regression);
        let pruned = |grow: GrowConfig| LearnerSpec::Tree {
            grow,
            prune_folds: Some(PRUNE_FOLDS),
        };
        match self {
            SweepLearner::Aloof => LearnerSpec::Tree {
                grow: GrowConfig::for_task(Selector::Aloof, Task::Regression),
                prune_folds: None,
            },
            SweepLearner::CartUnlimited => pruned(cart),
            SweepLearner::CartLimited => pruned(GrowConfig {
                max_categories: Some(LIMITED_K),
                ..cart
            }),
            SweepLearner::CartNoCategorical => pruned(GrowConfig {
                features: Some(vec![0]),
                ..cart
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub sweep: f64,
    pub learner: String,
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    /// Per-replicate values in replicate order.
    pub values: Vec<f64>,
}

impl SeriesRow {
    pub fn from_values(sweep: f64, learner: impl Into<String>, values: Vec<f64>) -> Self {
        let r = values.len() as f64;
        let mean = values.iter().sum::<f64>() / r;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0)
        } else {
            0.0
        };
        SeriesRow {
            sweep,
            learner: learner.into(),
            mean,
            stderr: (var / r).sqrt(),
            reps: values.len(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentSeries {
    pub rows: Vec<SeriesRow>,
}

impl ExperimentSeries {
    pub fn row(&self, sweep: f64, learner: &str) -> Option<&SeriesRow> {
        self.rows.iter().find(|r| r.sweep == sweep && r.learner == learner)
    }

    pub fn learner(&self, learner: &str) -> Vec<&SeriesRow> {
        self.rows.iter().filter(|r| r.learner == learner).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep,learner,mean,stderr,reps\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.sweep, r.learner, r.mean, r.stderr, r.reps));
        }
        out
    }
}

fn test_mse(spec: &LearnerSpec, train: &Dataset, test: &Dataset) -> Result<f64> {
    let pred = spec.fit(train)?.predict(test)?;
    metric(MetricKind::Mse, &pred, &test.responses())
}

/// Runs every learner on `reps` replicates per grid point. `draw(g, seed)`
/// returns the train and test sets of one replicate.
fn sweep<F>(grid: &[f64], learners: &[SweepLearner], reps: usize, seed: u64, draw: F) -> Result<ExperimentSeries>
where
    F: Fn(f64, u64) -> Result<(Dataset, Dataset)> + Sync,
{
    if grid.is_empty() {
        return invalid("sweep grid is empty");
    }
    if learners.is_empty() || reps == 0 {
        return invalid("a sweep needs learners and at least one replicate");
    }
    let mut series = ExperimentSeries::default();
    for (g, &x) in grid.iter().enumerate() {
        let losses: Vec<Vec<f64>> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let s = derive_seed(derive_seed(seed, g as u64), r as u64);
                let (train, test) = draw(x, derive_seed(s, 0))?;
                learners
                    .iter()
                    .map(|l| test_mse(&l.spec().with_seed(derive_seed(s, 1)), &train, &test))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        for (li, l) in learners.iter().enumerate() {
            series
                .rows
                .push(SeriesRow::from_values(x, l.label(), losses.iter().map(|v| v[li]).collect()));
        }
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSweepConfig {
    pub alphas: Vec<f64>,
    pub n: usize,
    pub k: usize,
    pub test_n: usize,
    pub reps: usize,
    pub learners: Vec<SweepLearner>,
    pub seed: u64,
}

impl Default for AlphaSweepConfig {
    fn default() -> Self {
        AlphaSweepConfig {
            alphas: vec![0.0, 1.0, 2.0, 5.0, 10.0, 15.0],
            n: 300,
            k: 50,
            test_n: 1000,
            reps: 50,
            learners: vec![SweepLearner::CartLimited, SweepLearner::CartUnlimited, SweepLearner::Aloof],
            seed: 0,
        }
    }
}

/// Test MSE against the interaction strength.
pub fn run_alpha_sweep(cfg: &AlphaSweepConfig) -> Result<ExperimentSeries> {
    sweep(&cfg.alphas, &cfg.learners, cfg.reps, cfg.seed, |alpha, s| {
        let gen = |n, seed| {
            gen_interaction_model(&InteractionModelParams {
                n,
                k: cfg.k,
                alpha,
                seed,
            })
        };
        Ok((gen(cfg.n, derive_seed(s, 0))?, gen(cfg.test_n, derive_seed(s, 1))?))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSweepConfig {
    pub ks: Vec<usize>,
    /// Rows per replicate before the train/test split.
    pub n: usize,
    pub train_n: usize,
    /// Informative mode draws from the interaction model at `alpha`;
    /// otherwise the categorical feature is independent of the response.
    pub informative: bool,
    pub alpha: f64,
    pub reps: usize,
    pub learners: Vec<SweepLearner>,
    pub seed: u64,
}

impl KSweepConfig {
    pub fn new(informative: bool) -> Self {
        let mut learners = vec![SweepLearner::CartUnlimited, SweepLearner::Aloof];
        if informative {
            learners.insert(0, SweepLearner::CartLimited);
        } else {
            learners.push(SweepLearner::CartNoCategorical);
        }
        KSweepConfig {
            ks: vec![10, 25, 50, 100, 200],
            n: 1000,
            train_n: 900,
            informative,
            alpha: 15.0,
            reps: 50,
            learners,
            seed: 0,
        }
    }
}

/// Test MSE against the number of categories.
pub fn run_k_sweep(cfg: &KSweepConfig) -> Result<ExperimentSeries> {
    if cfg.train_n == 0 || cfg.train_n >= cfg.n {
        return invalid(format!("train size {} must lie in [1, {})", cfg.train_n, cfg.n));
    }
    let grid: Vec<f64> = cfg.ks.iter().map(|&k| k as f64).collect();
    sweep(&grid, &cfg.learners, cfg.reps, cfg.seed, |k, s| {
        let k = k as usize;
        let d = if cfg.informative {
            gen_interaction_model(&InteractionModelParams {
                n: cfg.n,
                k,
                alpha: cfg.alpha,
                seed: s,
            })?
        } else {
            gen_uninformative(cfg.n, k, s)?
        };
        let train: Vec<usize> = (0..cfg.train_n).collect();
        let test: Vec<usize> = (cfg.train_n..cfg.n).collect();
        Ok((d.subset(&train)?, d.subset(&test)?))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfConfig {
    pub ks: Vec<usize>,
    pub n: usize,
    pub test_n: usize,
    /// CART size curve as maximum leaf counts.
    pub sizes: Vec<usize>,
    /// Response draws per design for both the df estimate and the test MSE.
    pub reps: usize,
    /// Independent designs per K.
    pub runs: usize,
    pub seed: u64,
}

impl Default for DfConfig {
    fn default() -> Self {
        DfConfig {
            ks: vec![25, 50, 100],
            n: 200,
            test_n: 1000,
            sizes: (1..=20).collect(),
            reps: 100,
            runs: 20,
            seed: 0,
        }
    }
}

/// One (df̂, test MSE) point of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfPoint {
    pub df: DfEstimate,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfRun {
    pub k: usize,
    pub run: usize,
    /// Indexed like [`DfConfig::sizes`].
    pub cart: Vec<DfPoint>,
    pub aloof: DfPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DfExperiment {
    pub config: DfConfig,
    pub runs: Vec<DfRun>,
}

impl DfExperiment {
    /// Two series per K, labelled `<learner>:K=<k>:df` and `...:mse`, with
    /// the CART size as sweep value and the ALOOF point at sweep 0.
    pub fn to_series(&self) -> ExperimentSeries {
        let mut s = ExperimentSeries::default();
        for &k in &self.config.ks {
            let runs: Vec<&DfRun> = self.runs.iter().filter(|r| r.k == k).collect();
            for (si, &size) in self.config.sizes.iter().enumerate() {
                s.rows.push(SeriesRow::from_values(size as f64, format!("cart:K={k}:df"), runs.iter().map(|r| r.cart[si].df.df).collect()));
                s.rows.push(SeriesRow::from_values(size as f64, format!("cart:K={k}:mse"), runs.iter().map(|r| r.cart[si].mse).collect()));
            }
            s.rows.push(SeriesRow::from_values(0.0, format!("aloof:K={k}:df"), runs.iter().map(|r| r.aloof.df.df).collect()));
            s.rows.push(SeriesRow::from_values(0.0, format!("aloof:K={k}:mse"), runs.iter().map(|r| r.aloof.mse).collect()));
        }
        s
    }
}

/// Complexity against test MSE on the uninformative model. Each run fixes a
/// design, then every learner sees the same response draws.
pub fn run_df_experiment(cfg: &DfConfig) -> Result<DfExperiment> {
    if cfg.ks.is_empty() || cfg.sizes.is_empty() || cfg.runs == 0 {
        return invalid("df experiment needs K values, CART sizes and runs");
    }
    if cfg.sizes.contains(&0) {
        return invalid("CART sizes must be positive");
    }
    let mut runs = Vec::new();
    for (ki, &k) in cfg.ks.iter().enumerate() {
        for run in 0..cfg.runs {
            let s = derive_seed(derive_seed(cfg.seed, ki as u64), run as u64);
            let x = gen_uninformative(cfg.n, k, derive_seed(s, 0))?;
            let mu: Vec<f64> = (0..x.n()).map(|i| x.numeric_value(0, i).unwrap_or(0.0)).collect();
            let design = FixedDesign::new(x, mu, 1.0)?;
            let test = gen_uninformative(cfg.test_n, k, derive_seed(s, 1))?;
            let point = |spec: &LearnerSpec| -> Result<DfPoint> {
                let (df, mse) = crate::eval::df_with_test_mse(&design, spec, cfg.reps, derive_seed(s, 2), &test)?;
                Ok(DfPoint { df, mse })
            };
            let cart = cfg
                .sizes
                .iter()
                .map(|&size| {
                    point(&LearnerSpec::Tree {
                        grow: GrowConfig {
                            max_leaves: Some(size),
                            ..GrowConfig::for_task(Selector::Cart, Task::Regression)
                        },
                        prune_folds: None,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let aloof = point(&SweepLearner::Aloof.spec())?;
            runs.push(DfRun { k, run, cart, aloof });
        }
    }
    Ok(DfExperiment {
        config: cfg.clone(),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_sweep_shape_and_determinism() {
        let cfg = AlphaSweepConfig {
            alphas: vec![0.0, 5.0],
            n: 60,
            k: 6,
            test_n: 50,
            reps: 3,
            seed: 4,
            ..Default::default()
        };
        let a = run_alpha_sweep(&cfg).unwrap();
        assert_eq!(a.rows.len(), 6);
        assert!(a.rows.iter().all(|r| r.reps == 3 && r.mean.is_finite() && r.stderr >= 0.0));
        assert_eq!(a, run_alpha_sweep(&cfg).unwrap());
        let csv = a.to_csv();
        assert!(csv.starts_with("sweep,learner,mean,stderr,reps\n"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn k_sweep_uses_oracle_in_uninformative_mode() {
        let cfg = KSweepConfig {
            ks: vec![4],
            n: 80,
            train_n: 60,
            reps: 2,
            ..KSweepConfig::new(false)
        };
        let s = run_k_sweep(&cfg).unwrap();
        assert!(s.row(4.0, "cart-no-categorical").is_some());
        assert!(s.row(4.0, "cart-limited").is_none());
    }

    #[test]
    fn df_curve_increases_with_size() {
        let cfg = DfConfig {
            ks: vec![10],
            n: 60,
            test_n: 60,
            sizes: vec![1, 2, 4, 8],
            reps: 30,
            runs: 1,
            seed: 2,
        };
        let e = run_df_experiment(&cfg).unwrap();
        let dfs: Vec<f64> = e.runs[0].cart.iter().map(|p| p.df.df).collect();
        assert!((dfs[0] - 1.0).abs() < 0.3, "{dfs:?}");
        assert!(dfs.windows(2).all(|w| w[1] > w[0]), "{dfs:?}");
        assert_eq!(e.to_series().rows.len(), 2 * 4 + 2);
    }

    #[test]
    fn empty_grid_rejected() {
        let cfg = AlphaSweepConfig {
            alphas: vec![],
            ..Default::default()
        };
        assert!(run_alpha_sweep(&cfg).is_err());
    }
}
