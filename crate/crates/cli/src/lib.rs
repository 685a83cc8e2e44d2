//! Experiment harness behind the `umom` command line: estimation on data
//! files, Monte Carlo rate sweeps, stable-sampler self-tests and clustering
//! selection, all reproducible from a seed.

pub mod cluster;
pub mod config;
pub mod data;
pub mod error;
pub mod estimate;
pub mod kernels;
pub mod rate_sweep;
pub mod stable_check;

pub use cluster::{run_cluster, ClusterOutcome, ClusterRow};
pub use config::{
    ClusterConfig, DissimilaritySpec, DistSpec, EstimateConfig, GeneratorSpec, PartitionRule,
    PartitionSpec, PointGen, RateSweepConfig, StableCheckConfig, StableNoiseSpec, SumCheck,
};
pub use error::CliError;
pub use estimate::{run_estimate, EstimateOutcome};
pub use rate_sweep::{run_rate_sweep, SweepOutcome, SweepRow};
pub use stable_check::{run_stable_check, CheckLine, StableCheckOutcome};
