//! Regular partitions of the index set, the block-count rule and the median.
//!
//! A partition of `{0..n-1}` into `V` blocks is *regular* when every block
//! size is within 1 of `n / V`. Estimation plans bundle the block count with
//! the enumeration mode and reproducibility options.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of kernel evaluations a single plan may imply.
pub const DEFAULT_EVAL_CAP: u64 = 10_000_000_000;

/// How block statistics are enumerated and aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorMode {
    /// Plain U-statistic over the full sample; no blocks.
    Classical,
    /// Median over the decoupled statistics of all strictly increasing
    /// m-tuples of distinct blocks.
    Combinations,
    /// Median over the V within-block U-statistics.
    Diagonal,
}

impl std::fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimatorMode::Classical => write!(f, "classical"),
            EstimatorMode::Combinations => write!(f, "combinations"),
            EstimatorMode::Diagonal => write!(f, "diagonal"),
        }
    }
}

/// `⌈ln x⌉` with a 1-ulp guard: values within 1e-9 above an integer are
/// rounded down to it, so that e.g. `x = e` yields exactly 1.
pub fn ceil_log(x: f64) -> Result<usize> {
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::invalid(format!(
            "ceil_log requires a finite argument > 1, got {x}"
        )));
    }
    Ok((x.ln() - 1e-9).ceil().max(1.0) as usize)
}

/// Number of blocks prescribed for arity `m` at confidence `delta`:
/// `V = 32 * m * ⌈ln(1/delta)⌉`, valid only when `⌈ln(1/delta)⌉ <= n/(64 m)`.
///
/// The hypothesis is enforced as a hard error (carrying the minimal
/// admissible n) rather than clamped, since clamping would void the
/// guarantee the rule comes from.
pub fn block_count(m: usize, delta: f64, n: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::invalid("kernel arity must be at least 1"));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1/2), got {delta}"
        )));
    }
    let l = ceil_log(1.0 / delta)?;
    let needed = 64 * m * l;
    if n < needed {
        return Err(Error::SampleTooSmall { needed, got: n });
    }
    Ok(32 * m * l)
}

/// A partition of `{0..n-1}` into blocks whose sizes differ from `n / V`
/// by at most 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl RegularPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of blocks.
    pub fn v(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &[usize] {
        &self.blocks[i]
    }

    pub fn min_block_len(&self) -> usize {
        self.blocks.iter().map(Vec::len).min().unwrap_or(0)
    }

    fn from_order(order: &[usize], v: usize) -> Self {
        let n = order.len();
        let base = n / v;
        let extra = n % v; // the first `extra` blocks get one more element
        let mut blocks = Vec::with_capacity(v);
        let mut pos = 0;
        for k in 0..v {
            let len = if k < extra { base + 1 } else { base };
            blocks.push(order[pos..pos + len].to_vec());
            pos += len;
        }
        RegularPartition { n, blocks }
    }
}

/// Deterministic regular partition: indices assigned contiguously in order,
/// with the first `n mod V` blocks one element larger.
pub fn regular_partition(n: usize, v: usize) -> Result<RegularPartition> {
    if v == 0 || v > n {
        return Err(Error::invalid(format!(
            "block count must satisfy 1 <= V <= n, got V={v}, n={n}"
        )));
    }
    let order: Vec<usize> = (0..n).collect();
    Ok(RegularPartition::from_order(&order, v))
}

/// Regular partition of a seeded Fisher–Yates shuffle of the indices.
/// Useful when the input ordering is not exchangeable.
pub fn regular_partition_shuffled(n: usize, v: usize, seed: u64) -> Result<RegularPartition> {
    if v == 0 || v > n {
        return Err(Error::invalid(format!(
            "block count must satisfy 1 <= V <= n, got V={v}, n={n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = uniform_below(&mut rng, (i + 1) as u64) as usize;
        order.swap(i, j);
    }
    Ok(RegularPartition::from_order(&order, v))
}

/// Unbiased integer in `[0, bound)` by rejection; deterministic given the RNG.
fn uniform_below(rng: &mut impl RngCore, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound; // 2^64 mod bound
    loop {
        let r = rng.next_u64();
        if r >= threshold {
            return r % bound;
        }
    }
}

/// Median of a nonempty list of finite reals: the middle order statistic for
/// odd length, the midpoint of the two central order statistics for even
/// length. Either choice satisfies the two-sided counting condition
/// `|{a_i <= b}| >= N/2` and `|{a_i >= b}| >= N/2`.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("median of an empty list"));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("median over non-finite value {bad}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        Ok(sorted[n / 2])
    } else {
        Ok((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0)
    }
}

/// An estimation plan: kernel arity, block count, enumeration mode and
/// reproducibility options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoMPlan {
    m: usize,
    v: usize,
    /// Confidence the block count was derived from, when it was.
    delta: Option<f64>,
    mode: EstimatorMode,
    /// Seed for an optional pre-shuffle of the indices. Off by default:
    /// exchangeable data makes the assignment irrelevant in distribution,
    /// and the contiguous default is reproducible.
    shuffle_seed: Option<u64>,
    eval_cap: u64,
}

impl MoMPlan {
    /// Plan with the prescribed block count `V = 32 m ⌈ln(1/delta)⌉` for a
    /// sample of size `n`. Fails when the sample-size hypothesis
    /// `⌈ln(1/delta)⌉ <= n/(64 m)` does not hold.
    pub fn from_confidence(m: usize, delta: f64, n: usize) -> Result<Self> {
        let v = block_count(m, delta, n)?;
        Ok(MoMPlan {
            m,
            v,
            delta: Some(delta),
            mode: EstimatorMode::Combinations,
            shuffle_seed: None,
            eval_cap: DEFAULT_EVAL_CAP,
        })
    }

    /// Plan with an explicit block count, bypassing the confidence rule.
    pub fn with_block_count(m: usize, v: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("kernel arity must be at least 1"));
        }
        if v == 0 {
            return Err(Error::invalid("block count must be positive"));
        }
        Ok(MoMPlan {
            m,
            v,
            delta: None,
            mode: EstimatorMode::Combinations,
            shuffle_seed: None,
            eval_cap: DEFAULT_EVAL_CAP,
        })
    }

    pub fn mode(mut self, mode: EstimatorMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn shuffle_seed(mut self, seed: u64) -> Self {
        self.shuffle_seed = Some(seed);
        self
    }

    pub fn eval_cap(mut self, cap: u64) -> Self {
        self.eval_cap = cap;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    pub fn mode_kind(&self) -> EstimatorMode {
        self.mode
    }

    pub fn shuffle(&self) -> Option<u64> {
        self.shuffle_seed
    }

    pub fn cap(&self) -> u64 {
        self.eval_cap
    }

    /// Checks the plan against a concrete sample size.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        if let Some(delta) = self.delta {
            // re-check the hypothesis against the actual n; this error carries
            // the minimal admissible n, so it goes first
            block_count(self.m, delta, n)?;
        }
        if self.v > n {
            return Err(Error::invalid(format!(
                "plan has V={} blocks but the sample has only n={n} points",
                self.v
            )));
        }
        match self.mode {
            EstimatorMode::Classical => {
                return Err(Error::invalid(
                    "a block plan cannot use classical mode; call u_statistic instead",
                ));
            }
            EstimatorMode::Combinations => {
                if self.v < self.m {
                    return Err(Error::invalid(format!(
                        "combinations mode needs V >= m, got V={} < m={}",
                        self.v, self.m
                    )));
                }
            }
            EstimatorMode::Diagonal => {
                if n / self.v < self.m {
                    return Err(Error::invalid(format!(
                        "diagonal mode needs floor(n/V) >= m, got floor({n}/{}) < {}",
                        self.v, self.m
                    )));
                }
            }
        }
        Ok(())
    }

    /// Builds the (optionally pre-shuffled) regular partition for `n` points.
    pub fn build_partition(&self, n: usize) -> Result<RegularPartition> {
        match self.shuffle_seed {
            None => regular_partition(n, self.v),
            Some(seed) => regular_partition_shuffled(n, self.v, seed),
        }
    }
}
