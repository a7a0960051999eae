//! Decision trees with leave-one-out selection of the splitting variable.

pub mod bench;
pub mod cli;
pub mod dataio;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod loo;
pub mod rng;
pub mod segtree;
pub mod splits;
pub mod synth;
pub mod tree;

pub use dataio::{Column, ColumnData, Dataset, FeatureColumn, Response, Schema, Task};
pub use error::{Error, Result};
pub use splits::{ImpurityKind, Partition, SplitRule, Stats};
