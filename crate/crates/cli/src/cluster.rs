//! `cluster`: clustering-risk estimation over a candidate partition class,
//! robust (median-of-means) and classical selection side by side, with an
//! optional Monte Carlo oracle when the instance is generated.

use umom_core::{
    oracle_risk, select_partition, select_partition_classical, OracleRisk, PartitionClass, Sample,
    SeededStream,
};

use crate::config::{ClusterConfig, PointGen};
use crate::data::read_numeric_file;
use crate::error::{CliError, Result};

pub const CSV_HEADER: &str =
    "partition,mom_risk,classical_risk,oracle_risk,oracle_se,mom_selected,classical_selected";

#[derive(Debug, Clone)]
pub struct ClusterRow {
    pub label: String,
    pub mom_risk: f64,
    pub classical_risk: f64,
    pub oracle: Option<OracleRisk>,
}

#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub rows: Vec<ClusterRow>,
    pub mom_selected: usize,
    pub classical_selected: usize,
    /// Blocks used by the robust estimates.
    pub v: usize,
    /// Rate-form diagnostic `σ̂ √(⌈ln(N/δ)⌉/n)`.
    pub deviation_bound: f64,
    /// `max_i |mom_risk_i − oracle_i|`, when the oracle ran.
    pub sup_deviation: Option<f64>,
    /// Oracle excess risk of each selection, when the oracle ran.
    pub mom_excess: Option<f64>,
    pub classical_excess: Option<f64>,
    pub csv: String,
    pub report: String,
}

pub fn run_cluster(cfg: &ClusterConfig) -> Result<ClusterOutcome> {
    if cfg.partitions.is_empty() {
        return Err(CliError::validation("cluster needs at least one partition"));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 0.5) {
        return Err(CliError::validation(format!(
            "delta must lie in (0, 1/2), got {}",
            cfg.delta
        )));
    }

    // points: file or generator
    let gen = cfg.generator.as_ref().map(PointGen::new).transpose()?;
    let points: Vec<Vec<f64>> = match (&cfg.data, &gen) {
        (Some(path), _) => read_numeric_file(path)?,
        (None, Some(g)) => {
            let n = cfg.n.ok_or_else(|| {
                CliError::validation("generated instances need a sample size `n`")
            })?;
            let mut rng = SeededStream::new(cfg.seed, 0).rng();
            (0..n).map(|_| g.draw(&mut rng)).collect()
        }
        (None, None) => {
            return Err(CliError::validation(
                "cluster needs either a data file or a generator",
            ))
        }
    };
    let dim = points[0].len();
    let sample = Sample::new(points)?;

    let members = cfg
        .partitions
        .iter()
        .map(|spec| spec.build(dim))
        .collect::<Result<Vec<_>>>()?;
    let class = PartitionClass::new(members)?;
    let diss = cfg.dissimilarity.build();

    let mom = select_partition(&diss, &class, &sample, cfg.delta)?;
    let classical = select_partition_classical(&diss, &class, &sample)?;

    let oracles: Option<Vec<OracleRisk>> = match (&gen, cfg.oracle_pairs) {
        (Some(g), Some(pairs)) => {
            // same stream for every member: shared pair draws keep the
            // oracle values comparable across partitions
            let stream = SeededStream::new(cfg.seed, 1);
            let mut riscs = Vec::with_capacity(class.len());
            for member in class.members() {
                riscs.push(oracle_risk(
                    &diss,
                    member,
                    |rng| g.draw(rng),
                    pairs,
                    stream,
                )?);
            }
            Some(riscs)
        }
        (None, Some(_)) => {
            return Err(CliError::validation(
                "oracle_pairs needs a generator to draw from",
            ))
        }
        _ => None,
    };

    let rows: Vec<ClusterRow> = (0..class.len())
        .map(|i| ClusterRow {
            label: mom.labels[i].clone(),
            mom_risk: mom.risks[i],
            classical_risk: classical.risks[i],
            oracle: oracles.as_ref().map(|o| o[i]),
        })
        .collect();

    let (sup_deviation, mom_excess, classical_excess) = match &oracles {
        None => (None, None, None),
        Some(o) => {
            let w_star = o.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
            let sup = rows
                .iter()
                .zip(o)
                .map(|(r, or)| (r.mom_risk - or.value).abs())
                .fold(0.0f64, f64::max);
            (
                Some(sup),
                Some(o[mom.selected].value - w_star),
                Some(o[classical.selected].value - w_star),
            )
        }
    };

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for (i, r) in rows.iter().enumerate() {
        let (or, se) = match &r.oracle {
            Some(o) => (o.value.to_string(), o.std_error.to_string()),
            None => (String::new(), String::new()),
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.label,
            r.mom_risk,
            r.classical_risk,
            or,
            se,
            (i == mom.selected) as u8,
            (i == classical.selected) as u8,
        ));
    }

    let mut report = String::new();
    report.push_str(&format!(
        "n = {}, class size = {}, V = {} blocks, delta = {}\n",
        sample.n(),
        class.len(),
        mom.v,
        cfg.delta
    ));
    for (i, r) in rows.iter().enumerate() {
        report.push_str(&format!(
            "  {:<24} mom = {:<24} classical = {:<24}{}\n",
            r.label,
            r.mom_risk,
            r.classical_risk,
            match &r.oracle {
                Some(o) => format!(" oracle = {} (se {})", o.value, o.std_error),
                None => String::new(),
            }
        ));
        let _ = i;
    }
    report.push_str(&format!(
        "selected (median-of-means): {}\nselected (classical):       {}\n",
        mom.selected_label(),
        classical.selected_label()
    ));
    report.push_str(&format!(
        "deviation diagnostic sigma_hat * sqrt(ceil(ln(N/delta))/n) = {}\n",
        mom.deviation_bound.unwrap_or(f64::NAN)
    ));
    if let (Some(sup), Some(me), Some(ce)) = (sup_deviation, mom_excess, classical_excess) {
        report.push_str(&format!(
            "sup |mom - oracle| = {sup}\nexcess risk: mom = {me}, classical = {ce}\n"
        ));
    }

    let outcome = ClusterOutcome {
        rows,
        mom_selected: mom.selected,
        classical_selected: classical.selected,
        v: mom.v,
        deviation_bound: mom.deviation_bound.unwrap_or(f64::NAN),
        sup_deviation,
        mom_excess,
        classical_excess,
        csv,
        report,
    };
    if let Some(out) = &cfg.out {
        std::fs::write(out, &outcome.csv).map_err(|source| CliError::Io {
            path: out.clone(),
            source,
        })?;
    }
    Ok(outcome)
}
