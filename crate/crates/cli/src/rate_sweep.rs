//! `rate-sweep`: Monte Carlo deviation quantiles of the classical and
//! median-of-means estimators across a grid of sample sizes, with fitted
//! log-log slopes.
//!
//! Replicates are independent tasks on disjoint RNG streams (the stream id
//! encodes grid index and replicate index), gathered in replicate order, so
//! the CSV is byte-identical across runs regardless of scheduling.

use rayon::prelude::*;

use umom_core::{
    mom_ustat, ols_slope, quantile_type1, u_statistic, Error, EstimatorMode, MoMPlan, Sample,
    SeededStream,
};

use crate::config::RateSweepConfig;
use crate::error::{CliError, Result};
use crate::kernels::{analytic_truth, kernel_by_id};

pub const CSV_HEADER: &str = "estimator,n,delta,replicates,q50,q90,q1md,slope_group,nonfinite_count";

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub estimator: String,
    pub n: usize,
    pub delta: f64,
    pub replicates: usize,
    pub q50: f64,
    pub q90: f64,
    /// Quantile at level 1 − δ.
    pub q1md: f64,
    /// OLS slope of ln(q1md) on ln(n) over the grid, repeated per group.
    pub slope_group: f64,
    pub nonfinite_count: u64,
    /// Fraction of replicates whose deviation exceeded the explicit bound
    /// `512 σ (1 + ln(1/δ)) / n`; present when `bound_sigma` was configured.
    pub bound_exceedance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub truth: f64,
    pub csv: String,
}

impl SweepOutcome {
    pub fn slope_of(&self, estimator: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator)
            .map(|r| r.slope_group)
    }

    pub fn row(&self, estimator: &str, n: usize) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.n == n)
    }
}

fn validate(cfg: &RateSweepConfig) -> Result<()> {
    cfg.distribution.validate()?;
    if !(cfg.delta > 0.0 && cfg.delta < 0.5) {
        return Err(CliError::validation(format!(
            "delta must lie in (0, 1/2), got {}",
            cfg.delta
        )));
    }
    let mut distinct = cfg.n_grid.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(CliError::validation(
            "rate sweeps need a grid of at least 4 distinct sample sizes",
        ));
    }
    if cfg.replicates < 100 {
        return Err(CliError::validation(
            "rate sweeps need at least 100 replicates per grid point",
        ));
    }
    if let Some(EstimatorMode::Classical) = cfg.mode {
        return Err(CliError::validation(
            "mode restricts the median-of-means side; use 'combinations' or 'diagonal'",
        ));
    }
    let kernel = kernel_by_id(&cfg.kernel)?;
    // every grid point must satisfy the plan hypothesis up front; the error
    // carries the minimal admissible n
    for &n in &cfg.n_grid {
        MoMPlan::from_confidence(kernel.arity(), cfg.delta, n)?;
        let diag = MoMPlan::from_confidence(kernel.arity(), cfg.delta, n)?
            .mode(EstimatorMode::Diagonal);
        diag.validate_for(n)?;
    }
    Ok(())
}

/// Deviations of one replicate: (classical, combinations, diagonal).
/// Non-finite estimates (including poisoned block statistics) become +inf
/// deviations so they are counted, never dropped.
fn replicate_deviations(
    cfg: &RateSweepConfig,
    kernel: &umom_core::Kernel<f64>,
    truth: f64,
    n: usize,
    grid_index: usize,
    replicate: usize,
) -> Result<[f64; 3]> {
    let stream = SeededStream::new(cfg.seed, ((grid_index as u64) << 32) | replicate as u64);
    let mut rng = stream.rng();
    let points: Vec<f64> = (0..n).map(|_| cfg.distribution.draw(&mut rng)).collect();
    let sample = Sample::new(points)?;

    let deviation = |value: f64| {
        let d = (value - truth).abs();
        if d.is_finite() {
            d
        } else {
            f64::INFINITY
        }
    };
    let run_mom = |mode: EstimatorMode| -> Result<f64> {
        let plan = MoMPlan::from_confidence(kernel.arity(), cfg.delta, n)?.mode(mode);
        match mom_ustat(kernel, &sample, &plan) {
            Ok(rep) => Ok(deviation(rep.value)),
            Err(Error::PoisonedValue { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e.into()),
        }
    };

    let classical = deviation(u_statistic(kernel, &sample)?);
    let comb = match cfg.mode {
        Some(EstimatorMode::Diagonal) => f64::NAN,
        _ => run_mom(EstimatorMode::Combinations)?,
    };
    let diag = match cfg.mode {
        Some(EstimatorMode::Combinations) => f64::NAN,
        _ => run_mom(EstimatorMode::Diagonal)?,
    };
    Ok([classical, comb, diag])
}

pub fn run_rate_sweep(cfg: &RateSweepConfig) -> Result<SweepOutcome> {
    validate(cfg)?;
    let kernel = kernel_by_id(&cfg.kernel)?;
    let truth = match cfg.truth {
        Some(t) => t,
        None => analytic_truth(&cfg.kernel, &cfg.distribution)?,
    };

    let estimators: Vec<&str> = match cfg.mode {
        None => vec!["classical", "mom-combinations", "mom-diagonal"],
        Some(EstimatorMode::Combinations) => vec!["classical", "mom-combinations"],
        Some(EstimatorMode::Diagonal) => vec!["classical", "mom-diagonal"],
        Some(EstimatorMode::Classical) => unreachable!("rejected by validate"),
    };

    // devs[grid][estimator] = sorted deviations over replicates
    let mut devs: Vec<[Vec<f64>; 3]> = Vec::with_capacity(cfg.n_grid.len());
    for (gi, &n) in cfg.n_grid.iter().enumerate() {
        let rows: Vec<[f64; 3]> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| replicate_deviations(cfg, &kernel, truth, n, gi, r))
            .collect::<Result<Vec<_>>>()?;
        let mut cols: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for row in rows {
            for (c, v) in cols.iter_mut().zip(row) {
                c.push(v);
            }
        }
        for c in cols.iter_mut() {
            c.sort_by(f64::total_cmp);
        }
        devs.push(cols);
    }

    let column_of = |name: &str| match name {
        "classical" => 0usize,
        "mom-combinations" => 1,
        "mom-diagonal" => 2,
        _ => unreachable!(),
    };

    let log_delta_bound = |n: usize, sigma: f64| -> f64 {
        512.0 * sigma * (1.0 + (1.0 / cfg.delta).ln()) / n as f64
    };

    let mut rows = Vec::new();
    for name in &estimators {
        let col = column_of(name);
        // slope of the (1 - delta)-quantile across the grid
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut finite = true;
        for (gi, &n) in cfg.n_grid.iter().enumerate() {
            let q = quantile_type1(&devs[gi][col], 1.0 - cfg.delta);
            if q.is_finite() && q > 0.0 {
                xs.push((n as f64).ln());
                ys.push(q.ln());
            } else {
                finite = false;
            }
        }
        let slope = if finite && xs.len() >= 2 {
            ols_slope(&xs, &ys)
        } else {
            f64::NAN
        };
        for (gi, &n) in cfg.n_grid.iter().enumerate() {
            let sorted = &devs[gi][col];
            let nonfinite = sorted.iter().filter(|d| !d.is_finite()).count() as u64;
            let exceedance = cfg.bound_sigma.map(|sigma| {
                let bound = log_delta_bound(n, sigma);
                sorted.iter().filter(|d| **d > bound).count() as f64 / sorted.len() as f64
            });
            rows.push(SweepRow {
                estimator: name.to_string(),
                n,
                delta: cfg.delta,
                replicates: cfg.replicates,
                q50: quantile_type1(sorted, 0.5),
                q90: quantile_type1(sorted, 0.9),
                q1md: quantile_type1(sorted, 1.0 - cfg.delta),
                slope_group: slope,
                nonfinite_count: nonfinite,
                bound_exceedance: exceedance,
            });
        }
    }

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.estimator, r.n, r.delta, r.replicates, r.q50, r.q90, r.q1md, r.slope_group,
            r.nonfinite_count
        ));
    }

    let outcome = SweepOutcome { rows, truth, csv };
    if let Some(out) = &cfg.out {
        std::fs::write(out, &outcome.csv).map_err(|source| CliError::Io {
            path: out.clone(),
            source,
        })?;
    }
    Ok(outcome)
}
