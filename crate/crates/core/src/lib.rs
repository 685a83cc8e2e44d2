//! Median-of-means estimation for U-statistics of possibly heavy-tailed
//! kernels.
//!
//! The classical U-statistic averages a symmetric arity-m kernel over all
//! m-subsets of a sample. Under heavy tails its deviations are ruled by the
//! largest observations, so this crate also provides the robust alternative:
//! split the sample into V regular blocks, compute a decoupled U-statistic
//! on every m-tuple of distinct blocks, and take the median. With
//! `V = 32 m ⌈ln(1/δ)⌉` blocks the deviation of the median matches, at
//! confidence 1 − 2δ, the rates available for bounded kernels — assuming
//! only finite variance, or just a p-th moment with 1 < p ≤ 2.
//!
//! Modules:
//! - [`kernels`]: the kernel abstraction plus an exact Hoeffding-projection
//!   oracle over finite discrete distributions.
//! - [`blocks`]: regular partitions, the block-count rule, the median.
//! - [`estimators`]: classical, decoupled and median-of-means estimators.
//! - [`stable`]: symmetric α-stable sampling (Chambers–Mallows–Stuck) with
//!   self-check statistics, for heavy-tailed experiments.
//! - [`clustering`]: clustering-risk estimation and partition selection.
//! - [`stats`]: KS distance, quantiles, slopes and binomials.

pub mod blocks;
pub mod clustering;
pub mod error;
pub mod estimators;
pub mod kernels;
pub mod stable;
pub mod stats;
pub mod sum;

pub use blocks::{
    block_count, ceil_log, median, regular_partition, regular_partition_shuffled, EstimatorMode,
    MoMPlan, RegularPartition, DEFAULT_EVAL_CAP,
};
pub use clustering::{
    cluster_block_count, clustering_kernel, empirical_clustering_risk, low_noise_margin,
    mom_clustering_risk, mom_clustering_risk_with_plan, oracle_risk, select_partition,
    select_partition_classical, CellPartition, Dissimilarity, LowNoisePoint, OracleRisk,
    PartitionClass, RiskReport,
};
pub use error::{Error, Result};
pub use estimators::{
    decoupled_block_ustat, diagonal_block_ustat, mom_mean, mom_ustat, u_statistic,
    u_statistic_report, EstimateReport, Sample,
};
pub use kernels::{
    degeneracy_order, hoeffding_projection, identity_kernel, product_kernel,
    variance_decomposition, DegeneracyReport, FiniteDistribution, Kernel, ProjectionResult,
    DEGENERACY_TOL, ENUMERATION_BUDGET,
};
pub use stable::{
    draw_normal, draw_stable, sample_normal, sample_stable, sum_stability_check,
    tail_exponent_estimate, ChaCha8Rng, SeededStream, StableParams,
};
pub use stats::{binomial, ks_statistic, ols_slope, quantile_type1};
pub use sum::KahanSum;
