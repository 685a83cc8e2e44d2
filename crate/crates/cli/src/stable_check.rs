//! `stable-check`: self-tests of the α-stable sampler with documented
//! thresholds — sum-stability (two-sample KS), sign symmetry, tail-index
//! recovery (Hill), a cross-check of the Gaussian branch against an
//! independent reference generator, and a harness sanity check that two
//! deliberately different laws are told apart.

use umom_core::{
    ks_statistic, sample_normal, sample_stable, sum_stability_check, tail_exponent_estimate,
    SeededStream, StableParams,
};

use crate::config::StableCheckConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: String,
    pub statistic: f64,
    pub requirement: String,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct StableCheckOutcome {
    pub lines: Vec<CheckLine>,
    pub all_pass: bool,
    pub report: String,
}

pub fn run_stable_check(cfg: &StableCheckConfig) -> Result<StableCheckOutcome> {
    if cfg.ks_samples < 1000 || cfg.symmetry_samples < 1000 {
        return Err(CliError::validation(
            "stable-check needs at least 1000 samples per statistic",
        ));
    }
    let mut lines: Vec<CheckLine> = Vec::new();
    let mut stream_counter = 0u64;
    let mut next_stream = || {
        let s = SeededStream::new(cfg.seed, stream_counter);
        stream_counter += 1;
        s
    };

    for check in &cfg.checks {
        let params = StableParams::new(cfg.gamma, check.alpha)?;
        let ks = sum_stability_check(&params, check.sum_terms, next_stream(), cfg.ks_samples)?;
        lines.push(CheckLine {
            name: format!(
                "sum-stability alpha={} n={} N={}",
                check.alpha, check.sum_terms, cfg.ks_samples
            ),
            statistic: ks,
            requirement: format!("KS < {}", cfg.ks_threshold),
            pass: ks < cfg.ks_threshold,
        });
    }

    for check in &cfg.checks {
        let params = StableParams::new(cfg.gamma, check.alpha)?;
        let draws = sample_stable(&params, next_stream(), cfg.symmetry_samples);
        let frac = draws.iter().filter(|x| **x > 0.0).count() as f64 / draws.len() as f64;
        lines.push(CheckLine {
            name: format!("sign-symmetry alpha={} N={}", check.alpha, cfg.symmetry_samples),
            statistic: frac,
            requirement: format!("|frac - 0.5| <= {}", cfg.sign_tolerance),
            pass: (frac - 0.5).abs() <= cfg.sign_tolerance,
        });
    }

    if cfg.normal_reference_check {
        // S(1/√2, 2) is standard normal; the reference is Box–Muller
        let params = StableParams::new(1.0 / 2.0f64.sqrt(), 2.0)?;
        let a = sample_stable(&params, next_stream(), cfg.ks_samples);
        let b = sample_normal(0.0, 1.0, next_stream(), cfg.ks_samples);
        let ks = ks_statistic(&a, &b);
        lines.push(CheckLine {
            name: format!("gaussian-branch-vs-reference N={}", cfg.ks_samples),
            statistic: ks,
            requirement: format!("KS < {}", cfg.ks_threshold),
            pass: ks < cfg.ks_threshold,
        });
    }

    for &alpha in &cfg.hill_alphas {
        let params = StableParams::new(cfg.gamma, alpha)?;
        let draws = sample_stable(&params, next_stream(), cfg.hill_samples);
        let hat = tail_exponent_estimate(&draws, cfg.hill_k)?;
        lines.push(CheckLine {
            name: format!("hill-tail-index alpha={alpha} N={} k={}", cfg.hill_samples, cfg.hill_k),
            statistic: hat,
            requirement: format!("|alpha_hat - {alpha}| <= {}", cfg.hill_tolerance),
            pass: (hat - alpha).abs() <= cfg.hill_tolerance,
        });
    }

    if let Some((a, b)) = cfg.mismatch_pair {
        let pa = StableParams::new(cfg.gamma, a)?;
        let pb = StableParams::new(cfg.gamma, b)?;
        let xs = sample_stable(&pa, next_stream(), cfg.ks_samples);
        let ys = sample_stable(&pb, next_stream(), cfg.ks_samples);
        let ks = ks_statistic(&xs, &ys);
        lines.push(CheckLine {
            name: format!("mismatch-sanity alpha={a} vs alpha={b}"),
            statistic: ks,
            requirement: format!("KS > {}", cfg.mismatch_min_ks),
            pass: ks > cfg.mismatch_min_ks,
        });
    }

    let all_pass = lines.iter().all(|l| l.pass);
    let mut report = String::new();
    for l in &lines {
        report.push_str(&format!(
            "{} {}: statistic = {} (require {})\n",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.statistic,
            l.requirement
        ));
    }
    report.push_str(&format!(
        "{}: {}/{} checks passed\n",
        if all_pass { "PASS" } else { "FAIL" },
        lines.iter().filter(|l| l.pass).count(),
        lines.len()
    ));

    let outcome = StableCheckOutcome {
        lines,
        all_pass,
        report,
    };
    if let Some(out) = &cfg.out {
        std::fs::write(out, &outcome.report).map_err(|source| CliError::Io {
            path: out.clone(),
            source,
        })?;
    }
    Ok(outcome)
}
