//! Experiment configuration: JSON files fully determine a run, command-line
//! flags override individual fields.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use umom_core::stable::{draw_normal, draw_stable, next_open01, ChaCha8Rng};
use umom_core::{CellPartition, Dissimilarity, EstimatorMode, StableParams};

use crate::error::{CliError, Result};

pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

/// Input distribution of a rate sweep.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistSpec {
    Normal {
        #[serde(default)]
        mean: f64,
        #[serde(default = "one")]
        sd: f64,
    },
    Stable { gamma: f64, alpha: f64 },
}

fn one() -> f64 {
    1.0
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DistSpec::Normal { sd, .. } => {
                if !(*sd > 0.0) {
                    return Err(CliError::validation("normal sd must be positive"));
                }
            }
            DistSpec::Stable { gamma, alpha } => {
                StableParams::new(*gamma, *alpha)?;
            }
        }
        Ok(())
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            DistSpec::Normal { mean, sd } => mean + sd * draw_normal(rng),
            DistSpec::Stable { gamma, alpha } => {
                let p = StableParams::new(*gamma, *alpha).expect("validated");
                draw_stable(&p, rng)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DistSpec::Normal { mean, sd } => format!("normal(mean={mean}, sd={sd})"),
            DistSpec::Stable { gamma, alpha } => format!("stable(gamma={gamma}, alpha={alpha})"),
        }
    }
}

/// `estimate`: one estimation run over a data file.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub data: Option<PathBuf>,
    pub kernel: Option<String>,
    #[serde(default)]
    pub delta: Option<f64>,
    /// Explicit block count, bypassing the confidence rule.
    #[serde(default)]
    pub blocks: Option<usize>,
    #[serde(default)]
    pub mode: Option<EstimatorMode>,
    #[serde(default)]
    pub shuffle_seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// `rate-sweep`: deviation quantiles of the estimators across sample sizes.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSweepConfig {
    pub distribution: DistSpec,
    pub kernel: String,
    pub n_grid: Vec<usize>,
    pub delta: f64,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Analytic kernel mean; derived from the scenario when omitted.
    #[serde(default)]
    pub truth: Option<f64>,
    /// When set, rows carry the empirical exceedance frequency of the
    /// explicit deviation bound `512 σ (1 + ln(1/δ)) / n`.
    #[serde(default)]
    pub bound_sigma: Option<f64>,
    /// Restrict the median-of-means side to one enumeration mode.
    #[serde(default)]
    pub mode: Option<EstimatorMode>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// One sum-stability check of the `stable-check` suite.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumCheck {
    pub alpha: f64,
    pub sum_terms: usize,
}

/// `stable-check`: sampler self-tests with documented thresholds.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StableCheckConfig {
    pub gamma: f64,
    pub checks: Vec<SumCheck>,
    pub ks_samples: usize,
    pub symmetry_samples: usize,
    pub hill_samples: usize,
    pub hill_k: usize,
    pub hill_alphas: Vec<f64>,
    pub ks_threshold: f64,
    pub sign_tolerance: f64,
    pub hill_tolerance: f64,
    /// KS of the α = 2 branch against an independent Box–Muller reference.
    pub normal_reference_check: bool,
    /// Harness sanity: two deliberately different laws must be told apart.
    pub mismatch_pair: Option<(f64, f64)>,
    pub mismatch_min_ks: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for StableCheckConfig {
    fn default() -> Self {
        StableCheckConfig {
            gamma: 1.0,
            checks: vec![
                SumCheck { alpha: 1.2, sum_terms: 8 },
                SumCheck { alpha: 1.5, sum_terms: 8 },
                SumCheck { alpha: 2.0, sum_terms: 4 },
            ],
            ks_samples: 100_000,
            symmetry_samples: 100_000,
            hill_samples: 1_000_000,
            hill_k: 10_000,
            hill_alphas: vec![1.2, 1.5],
            ks_threshold: 0.015,
            sign_tolerance: 0.005,
            hill_tolerance: 0.15,
            normal_reference_check: true,
            mismatch_pair: Some((1.2, 2.0)),
            mismatch_min_ks: 0.05,
            seed: 0,
            out: None,
        }
    }
}

/// Which dissimilarity the cluster command applies to point pairs.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DissimilaritySpec {
    Euclidean,
    SqEuclidean,
}

impl DissimilaritySpec {
    pub fn build(self) -> Dissimilarity<Vec<f64>> {
        match self {
            DissimilaritySpec::Euclidean => Dissimilarity::new(|x: &Vec<f64>, y: &Vec<f64>| {
                x.iter()
                    .zip(y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            }),
            DissimilaritySpec::SqEuclidean => Dissimilarity::new(|x: &Vec<f64>, y: &Vec<f64>| {
                x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            }),
        }
    }
}

/// Assignment rule of one candidate partition.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PartitionRule {
    /// Axis-aligned cells: `thresholds` must be strictly increasing; point x
    /// lands in cell `#{t : x[feature] > t}`.
    Threshold { feature: usize, thresholds: Vec<f64> },
    /// Nearest-center cells, ties to the lowest center index.
    Centers { centers: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Deserialize)]
pub struct PartitionSpec {
    pub label: String,
    #[serde(flatten)]
    pub rule: PartitionRule,
}

impl PartitionSpec {
    pub fn build(&self, dim: usize) -> Result<CellPartition<Vec<f64>>> {
        match &self.rule {
            PartitionRule::Threshold { feature, thresholds } => {
                if *feature >= dim {
                    return Err(CliError::validation(format!(
                        "partition '{}': feature {feature} out of range for dimension {dim}",
                        self.label
                    )));
                }
                if thresholds.is_empty() {
                    return Err(CliError::validation(format!(
                        "partition '{}': needs at least one threshold",
                        self.label
                    )));
                }
                if thresholds.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(CliError::validation(format!(
                        "partition '{}': thresholds must be strictly increasing",
                        self.label
                    )));
                }
                let feature = *feature;
                let ts = thresholds.clone();
                let cells = ts.len() + 1;
                Ok(CellPartition::new(self.label.clone(), cells, move |x: &Vec<f64>| {
                    ts.iter().filter(|t| x[feature] > **t).count()
                })?)
            }
            PartitionRule::Centers { centers } => {
                if centers.is_empty() {
                    return Err(CliError::validation(format!(
                        "partition '{}': needs at least one center",
                        self.label
                    )));
                }
                if centers.iter().any(|c| c.len() != dim) {
                    return Err(CliError::validation(format!(
                        "partition '{}': every center must have dimension {dim}",
                        self.label
                    )));
                }
                let cs = centers.clone();
                let cells = cs.len();
                Ok(CellPartition::new(self.label.clone(), cells, move |x: &Vec<f64>| {
                    let mut best = 0;
                    let mut best_d = f64::INFINITY;
                    for (i, c) in cs.iter().enumerate() {
                        let d: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                        if d < best_d {
                            best_d = d;
                            best = i;
                        }
                    }
                    best
                })?)
            }
        }
    }
}

/// Additive α-stable noise on selected coordinates of generated points.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableNoiseSpec {
    pub alpha: f64,
    pub gamma: f64,
    pub coords: Vec<usize>,
}

/// Generative model for synthetic cluster instances: an isotropic Gaussian
/// mixture with optional heavy-tailed coordinates.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub centers: Vec<Vec<f64>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub sd: f64,
    #[serde(default)]
    pub stable_noise: Option<StableNoiseSpec>,
}

/// Compiled form of [`GeneratorSpec`]: one `draw` consumes a fixed number of
/// uniforms, so consumption does not depend on the component drawn.
pub struct PointGen {
    centers: Vec<Vec<f64>>,
    cumulative: Vec<f64>,
    sd: f64,
    noise: Option<(StableParams, Vec<usize>)>,
}

impl PointGen {
    pub fn new(spec: &GeneratorSpec) -> Result<Self> {
        if spec.centers.is_empty() {
            return Err(CliError::validation("generator needs at least one center"));
        }
        let dim = spec.centers[0].len();
        if dim == 0 || spec.centers.iter().any(|c| c.len() != dim) {
            return Err(CliError::validation(
                "generator centers must share a positive dimension",
            ));
        }
        if !(spec.sd >= 0.0) {
            return Err(CliError::validation("generator sd must be nonnegative"));
        }
        let weights = match &spec.weights {
            None => vec![1.0 / spec.centers.len() as f64; spec.centers.len()],
            Some(w) => {
                if w.len() != spec.centers.len() || w.iter().any(|x| !(*x > 0.0)) {
                    return Err(CliError::validation(
                        "generator weights must be positive, one per center",
                    ));
                }
                let total: f64 = w.iter().sum();
                w.iter().map(|x| x / total).collect()
            }
        };
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        let noise = match &spec.stable_noise {
            None => None,
            Some(ns) => {
                if ns.coords.iter().any(|c| *c >= dim) {
                    return Err(CliError::validation(
                        "stable noise coordinate out of range",
                    ));
                }
                Some((StableParams::new(ns.gamma, ns.alpha)?, ns.coords.clone()))
            }
        };
        Ok(PointGen {
            centers: spec.centers.clone(),
            cumulative,
            sd: spec.sd,
            noise,
        })
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let u = next_open01(rng);
        let comp = self
            .cumulative
            .iter()
            .position(|c| u <= *c)
            .unwrap_or(self.centers.len() - 1);
        let mut x: Vec<f64> = self.centers[comp]
            .iter()
            .map(|c| c + self.sd * draw_normal(rng))
            .collect();
        if let Some((params, coords)) = &self.noise {
            for &c in coords {
                x[c] += draw_stable(params, rng);
            }
        }
        x
    }
}

/// `cluster`: partition selection over a data file or a generated instance.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    /// Sample size when drawing from the generator.
    #[serde(default)]
    pub n: Option<usize>,
    pub dissimilarity: DissimilaritySpec,
    pub partitions: Vec<PartitionSpec>,
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    /// Monte Carlo pairs for the per-partition oracle risk; requires a
    /// generator.
    #[serde(default)]
    pub oracle_pairs: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}
