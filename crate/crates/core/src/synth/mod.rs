//! Simulation models and experiment drivers.

mod drivers;
mod generators;

pub use drivers::{
    run_alpha_sweep, run_df_experiment, run_k_sweep, AlphaSweepConfig, DfConfig, DfExperiment, DfPoint, DfRun,
    ExperimentSeries, KSweepConfig, SeriesRow, SweepLearner, LIMITED_K, PRUNE_FOLDS,
};
pub use generators::{gen_interaction_model, gen_uninformative, InteractionModelParams};
