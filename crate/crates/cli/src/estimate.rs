//! `estimate`: robust and classical estimates of a kernel mean on a data
//! file, with full plan auditing.

use serde::Serialize;

use umom_core::{
    binomial, mom_ustat, u_statistic_report, EstimateReport, EstimatorMode, MoMPlan, Sample,
};

use crate::config::EstimateConfig;
use crate::data::read_scalar_file;
use crate::error::{CliError, Result};
use crate::kernels::kernel_by_id;

/// Classical enumeration is skipped beyond this many kernel evaluations.
const CLASSICAL_EVAL_CAP: u128 = 100_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct EstimateOutcome {
    pub n: usize,
    pub kernel: String,
    pub delta: Option<f64>,
    pub robust: EstimateReport,
    /// Absent when the full enumeration would exceed the classical cap.
    pub classical: Option<EstimateReport>,
}

impl EstimateOutcome {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("n = {}, kernel = {}\n", self.n, self.kernel));
        match self.delta {
            Some(d) => out.push_str(&format!(
                "plan: V = {} ({} mode), delta = {d}\n",
                self.robust.v, self.robust.mode
            )),
            None => out.push_str(&format!(
                "plan: V = {} ({} mode), explicit block count\n",
                self.robust.v, self.robust.mode
            )),
        }
        out.push_str(&format!(
            "robust estimate    = {} ({} block statistics, {} kernel evals)\n",
            self.robust.value, self.robust.tuple_count, self.robust.kernel_eval_count
        ));
        match &self.classical {
            Some(c) => out.push_str(&format!(
                "classical estimate = {} ({} kernel evals)\n",
                c.value, c.kernel_eval_count
            )),
            None => out.push_str("classical estimate = (skipped: enumeration too large)\n"),
        }
        out
    }
}

pub fn run_estimate(cfg: &EstimateConfig) -> Result<EstimateOutcome> {
    let data_path = cfg
        .data
        .as_ref()
        .ok_or_else(|| CliError::validation("estimate needs a data file (--data or config)"))?;
    let kernel_id = cfg
        .kernel
        .as_deref()
        .ok_or_else(|| CliError::validation("estimate needs a kernel id (--kernel or config)"))?;
    let kernel = kernel_by_id(kernel_id)?;
    let points = read_scalar_file(data_path)?;
    let n = points.len();
    let sample = Sample::new(points)?;

    let mut plan = match (cfg.blocks, cfg.delta) {
        (Some(v), _) => MoMPlan::with_block_count(kernel.arity(), v)?,
        (None, Some(delta)) => MoMPlan::from_confidence(kernel.arity(), delta, n)?,
        (None, None) => {
            return Err(CliError::validation(
                "estimate needs either a confidence (--delta) or an explicit block count (--blocks)",
            ))
        }
    };
    if let Some(mode) = cfg.mode {
        if mode == EstimatorMode::Classical {
            return Err(CliError::validation(
                "mode must be 'combinations' or 'diagonal'; the classical estimate is always printed",
            ));
        }
        plan = plan.mode(mode);
    }
    if let Some(seed) = cfg.shuffle_seed {
        plan = plan.shuffle_seed(seed);
    }

    let robust = mom_ustat(&kernel, &sample, &plan)?;
    let classical = if binomial(n as u64, kernel.arity() as u64) <= CLASSICAL_EVAL_CAP {
        Some(u_statistic_report(&kernel, &sample)?)
    } else {
        None
    };

    let outcome = EstimateOutcome {
        n,
        kernel: kernel_id.to_string(),
        delta: cfg.delta,
        robust,
        classical,
    };
    if let Some(out) = &cfg.out {
        let json = serde_json::to_string_pretty(&outcome)
            .map_err(|e| CliError::validation(format!("cannot serialize record: {e}")))?;
        std::fs::write(out, json + "\n").map_err(|source| CliError::Io {
            path: out.clone(),
            source,
        })?;
    }
    Ok(outcome)
}
