//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{bench_csv, run_bench, BenchCase};
use crate::dataio::{load_csv, Dataset, MissingPolicy, Schema, Task};
use crate::ensemble::{oob_permutation_importance, EnsembleModel, GbConfig, RfConfig};
use crate::eval::{cross_validate, sign_test, FittedModel, LearnerSpec};
use crate::splits::ImpurityKind;
use crate::synth::{
    run_alpha_sweep, run_df_experiment, run_k_sweep, AlphaSweepConfig, DfConfig, KSweepConfig,
};
use crate::tree::{default_impurity, GrowConfig, Selector};

#[derive(Debug, Parser)]
#[command(name = "aloof", version, about = "Decision trees with leave-one-out variable selection")]
pub struct Cli {
    /// Worker threads for parallel fits.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model and write it as JSON.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        learner: LearnerArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predict with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// K-fold cross-validation; per-fold CSV with a final mean row.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        learner: LearnerArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Out-of-bag permutation importance of a random forest.
    Importance {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        learner: LearnerArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulation experiments written as series CSV.
    Simulate {
        #[command(subcommand)]
        experiment: Experiment,
    },
    /// Timing of the split and leave-one-out routines.
    Bench {
        #[arg(long, value_delimiter = ',', value_parser = parse_case, default_values_t = BenchCase::ALL)]
        cases: Vec<BenchCase>,
        #[arg(long = "n", value_delimiter = ',', default_values_t = [2000usize, 4000, 8000])]
        ns: Vec<usize>,
        #[arg(long = "k-categories", value_delimiter = ',', default_values_t = [20usize])]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-sided sign test of wins out of trials.
    SignTest {
        #[arg(long)]
        wins: u64,
        #[arg(long)]
        trials: u64,
    },
}

fn parse_case(s: &str) -> Result<BenchCase, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Experiment {
    AlphaSweep {
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0, 5.0, 10.0, 15.0])]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long = "k-categories", default_value_t = 50)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        test_n: usize,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    KSweep {
        #[arg(long = "k-categories", value_delimiter = ',', default_values_t = [10usize, 25, 50, 100, 200])]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 900)]
        train_n: usize,
        /// Use the interaction model instead of an independent categorical.
        #[arg(long)]
        informative: bool,
        #[arg(long, default_value_t = 15.0)]
        alpha: f64,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Df {
        #[arg(long = "k-categories", value_delimiter = ',', default_values_t = [25usize, 50, 100])]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        max_leaves: usize,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LearnerKind {
    Tree,
    Gb,
    Rf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SelectorArg {
    Cart,
    Aloof,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ImpurityArg {
    Gini,
    Sse,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Debug, Args)]
struct LearnerArgs {
    #[arg(long, value_enum, default_value = "tree")]
    learner: LearnerKind,
    #[arg(long, value_enum, default_value = "aloof")]
    selector: SelectorArg,
    /// Defaults to gini for binary responses and sse otherwise.
    #[arg(long, value_enum)]
    impurity: Option<ImpurityArg>,
    /// Drop categorical features with more categories than this.
    #[arg(long)]
    max_categories: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    min_node: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Prune CART trees by cost-complexity with this many folds.
    #[arg(long)]
    prune_folds: Option<usize>,
    #[arg(long, default_value_t = 50)]
    gb_trees: usize,
    #[arg(long, default_value_t = 0.1)]
    gb_nu: f64,
    #[arg(long, default_value_t = 0.05)]
    gb_min_frac: f64,
    #[arg(long, default_value_t = 500)]
    rf_trees: usize,
    #[arg(long)]
    rf_mtry: Option<usize>,
    #[arg(long, value_enum, default_value = "on")]
    bootstrap: OnOff,
}

impl LearnerArgs {
    fn spec(&self, task: Task, seed: u64) -> anyhow::Result<LearnerSpec> {
        let selector = match self.selector {
            SelectorArg::Cart => Selector::Cart,
            SelectorArg::Aloof => Selector::Aloof,
        };
        Ok(match self.learner {
            LearnerKind::Tree => {
                let kind = match self.impurity {
                    Some(ImpurityArg::Gini) => ImpurityKind::Gini,
                    Some(ImpurityArg::Sse) => ImpurityKind::SquaredError,
                    None => default_impurity(task),
                };
                let mut grow = GrowConfig::new(selector, kind);
                grow.max_categories = self.max_categories;
                grow.max_depth = self.max_depth;
                grow.seed = seed;
                if let Some(m) = self.min_leaf {
                    grow.min_leaf = m;
                    grow.min_node = grow.min_node.max(2 * m);
                }
                if let Some(m) = self.min_node {
                    grow.min_node = m;
                }
                LearnerSpec::Tree {
                    grow,
                    prune_folds: self.prune_folds,
                }
            }
            LearnerKind::Gb => LearnerSpec::Gb(GbConfig {
                trees: self.gb_trees,
                nu: self.gb_nu,
                min_leaf_frac: self.gb_min_frac,
                max_depth: self.max_depth,
                max_categories: self.max_categories,
                seed,
                ..GbConfig::for_task(selector, task)
            }),
            LearnerKind::Rf => LearnerSpec::Rf(RfConfig {
                trees: self.rf_trees,
                mtry: self.rf_mtry,
                bootstrap: matches!(self.bootstrap, OnOff::On),
                min_leaf: self.min_leaf,
                max_depth: self.max_depth,
                max_categories: self.max_categories,
                seed,
                ..RfConfig::new(selector)
            }),
        })
    }
}

fn load(args: &DataArgs) -> anyhow::Result<Dataset> {
    let schema = Schema::from_file(&args.schema).with_context(|| format!("reading schema {}", args.schema.display()))?;
    load_csv(&args.data, &schema, MissingPolicy::DropRow).with_context(|| format!("reading data {}", args.data.display()))
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn emit(out: Option<&Path>, inputs: &[&Path], text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if inputs.iter().any(|i| same_file(i, path)) {
                bail!("output {} would overwrite an input file", path.display());
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build()
        .context("starting worker pool")?
        .install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Train {
            data,
            learner,
            seed,
            out,
        } => {
            let d = load(&data)?;
            let model = learner.spec(d.task(), seed)?.fit(&d)?;
            let mut json = model.to_json()?;
            json.push('\n');
            emit(out.as_deref(), &[&data.data, &data.schema], &json)
        }
        Command::Predict { model, data, out } => {
            let text = fs::read_to_string(&model).with_context(|| format!("reading model {}", model.display()))?;
            let m = FittedModel::from_json(&text)?;
            let d = load(&data)?;
            let mut csv = String::from("prediction\n");
            for p in m.predict(&d)? {
                csv.push_str(&format!("{p}\n"));
            }
            emit(out.as_deref(), &[&data.data, &data.schema, &model], &csv)
        }
        Command::Cv {
            data,
            learner,
            k,
            seed,
            out,
        } => {
            let d = load(&data)?;
            let report = cross_validate(&learner.spec(d.task(), seed)?, &d, k, seed)?;
            emit(out.as_deref(), &[&data.data, &data.schema], &report.to_csv())
        }
        Command::Importance {
            data,
            learner,
            seed,
            out,
        } => {
            if !matches!(learner.learner, LearnerKind::Rf) {
                bail!("importance requires --learner rf");
            }
            let d = load(&data)?;
            let FittedModel::Ensemble(m) = learner.spec(d.task(), seed)?.fit(&d)? else {
                unreachable!("random forest fits an ensemble")
            };
            emit(out.as_deref(), &[&data.data, &data.schema], &importance_csv(&m, &d, seed)?)
        }
        Command::Simulate { experiment } => simulate(experiment),
        Command::Bench {
            cases,
            ns,
            ks,
            seed,
            out,
        } => {
            emit(out.as_deref(), &[], &bench_csv(&run_bench(&cases, &ns, &ks, seed)?))
        }
        Command::SignTest { wins, trials } => {
            let s = sign_test(wins, trials)?;
            emit(None, &[], &format!("wins,trials,exact,normal\n{},{},{},{}\n", s.wins, s.trials, s.exact, s.normal))
        }
    }
}

fn importance_csv(m: &EnsembleModel, d: &Dataset, seed: u64) -> anyhow::Result<String> {
    let mut csv = String::from("feature,score,stderr\n");
    for f in oob_permutation_importance(m, d, seed)? {
        csv.push_str(&format!("{},{},{}\n", f.name, f.score, f.stderr));
    }
    Ok(csv)
}

fn simulate(experiment: Experiment) -> anyhow::Result<()> {
    match experiment {
        Experiment::AlphaSweep {
            alphas,
            n,
            k,
            test_n,
            reps,
            seed,
            out,
        } => {
            let cfg = AlphaSweepConfig {
                alphas,
                n,
                k,
                test_n,
                reps,
                seed,
                ..Default::default()
            };
            emit(out.as_deref(), &[], &run_alpha_sweep(&cfg)?.to_csv())
        }
        Experiment::KSweep {
            ks,
            n,
            train_n,
            informative,
            alpha,
            reps,
            seed,
            out,
        } => {
            let cfg = KSweepConfig {
                ks,
                n,
                train_n,
                alpha,
                reps,
                seed,
                ..KSweepConfig::new(informative)
            };
            emit(out.as_deref(), &[], &run_k_sweep(&cfg)?.to_csv())
        }
        Experiment::Df {
            ks,
            n,
            max_leaves,
            reps,
            runs,
            seed,
            out,
        } => {
            let cfg = DfConfig {
                ks,
                n,
                sizes: (1..=max_leaves).collect(),
                reps,
                runs,
                seed,
                ..Default::default()
            };
            emit(out.as_deref(), &[], &run_df_experiment(&cfg)?.to_series().to_csv())
        }
    }
}

/// Parses and runs; returns the process exit code: 0 on success, 2 on usage
/// errors, 1 on runtime errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
