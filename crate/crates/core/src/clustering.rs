//! Clustering-risk estimation and partition selection.
//!
//! For a dissimilarity D and a partition of the sample space into K cells,
//! the clustering risk is `W(P) = E[D(X,X') Φ_P(X,X')]`, where `Φ_P`
//! indicates co-membership in a cell. The risk is estimated classically by
//! the pair U-statistic, or robustly by the median-of-means estimator with
//! `V = 64 ⌈ln(N/δ)⌉` blocks when a class of N candidate partitions is
//! scanned for the empirical minimizer.

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use crate::blocks::{ceil_log, MoMPlan};
use crate::error::{Error, Result};
use crate::estimators::{u_statistic, EstimateReport, Sample};
use crate::kernels::Kernel;
use crate::stable::SeededStream;
use crate::sum::KahanSum;

/// A symmetric nonnegative function on pairs of sample points.
pub struct Dissimilarity<P> {
    eval: Arc<dyn Fn(&P, &P) -> f64 + Send + Sync>,
}

impl<P> Clone for Dissimilarity<P> {
    fn clone(&self) -> Self {
        Dissimilarity {
            eval: Arc::clone(&self.eval),
        }
    }
}

impl<P> Dissimilarity<P> {
    pub fn new(eval: impl Fn(&P, &P) -> f64 + Send + Sync + 'static) -> Self {
        Dissimilarity {
            eval: Arc::new(eval),
        }
    }

    #[inline]
    pub fn eval(&self, x: &P, y: &P) -> f64 {
        (self.eval)(x, y)
    }
}

/// A K-cell partition of the sample space, given by a total assignment
/// function. Only co-membership matters to the risk: relabeling cells
/// leaves every estimate unchanged.
pub struct CellPartition<P> {
    label: String,
    cells: usize,
    assign: Arc<dyn Fn(&P) -> usize + Send + Sync>,
}

impl<P> Clone for CellPartition<P> {
    fn clone(&self) -> Self {
        CellPartition {
            label: self.label.clone(),
            cells: self.cells,
            assign: Arc::clone(&self.assign),
        }
    }
}

impl<P> std::fmt::Debug for CellPartition<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CellPartition")
            .field("label", &self.label)
            .field("cells", &self.cells)
            .finish()
    }
}

impl<P> CellPartition<P> {
    pub fn new(
        label: impl Into<String>,
        cells: usize,
        assign: impl Fn(&P) -> usize + Send + Sync + 'static,
    ) -> Result<Self> {
        if cells == 0 {
            return Err(Error::invalid("a partition needs at least one cell"));
        }
        Ok(CellPartition {
            label: label.into(),
            cells,
            assign: Arc::new(assign),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn assign(&self, point: &P) -> usize {
        (self.assign)(point)
    }
}

/// A finite family of candidate partitions with distinct labels.
#[derive(Debug, Clone)]
pub struct PartitionClass<P> {
    members: Vec<CellPartition<P>>,
}

impl<P> PartitionClass<P> {
    pub fn new(members: Vec<CellPartition<P>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("a partition class needs at least one member"));
        }
        for (i, a) in members.iter().enumerate() {
            if members[i + 1..].iter().any(|b| b.label() == a.label()) {
                return Err(Error::invalid(format!(
                    "duplicate partition label '{}'",
                    a.label()
                )));
            }
        }
        Ok(PartitionClass { members })
    }

    pub fn members(&self) -> &[CellPartition<P>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Risk estimates for every member of a class, plus the selected minimizer.
#[derive(Debug, Clone)]
pub struct RiskReport {
    /// Per-member estimated risks, in class order.
    pub risks: Vec<f64>,
    /// Labels in class order.
    pub labels: Vec<String>,
    /// Index of the selected partition (lowest estimated risk, ties broken
    /// by lowest index).
    pub selected: usize,
    /// Block count used by the estimates (0 for classical).
    pub v: usize,
    /// Rate-form deviation diagnostic `σ̂ · √(⌈ln(N/δ)⌉/n)` with σ̂ the
    /// plug-in `√(mean D²)` over sample pairs. The multiplicative constant
    /// of the underlying guarantee is unspecified, so this is a diagnostic,
    /// not a bound. `None` for classical selection.
    pub deviation_bound: Option<f64>,
}

impl RiskReport {
    pub fn selected_label(&self) -> &str {
        &self.labels[self.selected]
    }

    pub fn selected_risk(&self) -> f64 {
        self.risks[self.selected]
    }
}

/// The symmetric arity-2 kernel `(x, x') ↦ D(x,x') · 1{same cell}`.
pub fn clustering_kernel<P: 'static>(
    diss: &Dissimilarity<P>,
    partition: &CellPartition<P>,
) -> Kernel<P> {
    let d = diss.clone();
    let p = partition.clone();
    Kernel::symmetric(2, move |args: &[&P]| {
        if p.assign(args[0]) == p.assign(args[1]) {
            d.eval(args[0], args[1])
        } else {
            0.0
        }
    })
    .expect("arity 2 is valid")
}

/// Classical estimate of the clustering risk: the pair U-statistic
/// `2/(n(n−1)) Σ_{i<j} D(X_i,X_j) Φ(X_i,X_j)`.
pub fn empirical_clustering_risk<P: 'static>(
    diss: &Dissimilarity<P>,
    partition: &CellPartition<P>,
    sample: &Sample<P>,
) -> Result<f64> {
    u_statistic(&clustering_kernel(diss, partition), sample)
}

/// Block count for scanning a class of `n_class` partitions at confidence
/// `delta`: `V = 64 ⌈ln(N/δ)⌉`, requiring `n >= 128 ⌈ln(N/δ)⌉`.
pub fn cluster_block_count(n_class: usize, delta: f64, n: usize) -> Result<usize> {
    if n_class == 0 {
        return Err(Error::invalid("class size must be at least 1"));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1/2), got {delta}"
        )));
    }
    let l = ceil_log(n_class as f64 / delta)?;
    let needed = 128 * l;
    if n < needed {
        return Err(Error::SampleTooSmall { needed, got: n });
    }
    Ok(64 * l)
}

/// Median-of-means estimate of one partition's risk at confidence `delta`,
/// using the single-candidate block count `V = 64 ⌈ln(1/δ)⌉`.
pub fn mom_clustering_risk<P: Sync + 'static>(
    diss: &Dissimilarity<P>,
    partition: &CellPartition<P>,
    sample: &Sample<P>,
    delta: f64,
) -> Result<EstimateReport> {
    let plan = MoMPlan::from_confidence(2, delta, sample.n())?;
    crate::estimators::mom_ustat(&clustering_kernel(diss, partition), sample, &plan)
}

/// Median-of-means risk under a caller-supplied plan (any valid block
/// count or mode).
pub fn mom_clustering_risk_with_plan<P: Sync + 'static>(
    diss: &Dissimilarity<P>,
    partition: &CellPartition<P>,
    sample: &Sample<P>,
    plan: &MoMPlan,
) -> Result<EstimateReport> {
    crate::estimators::mom_ustat(&clustering_kernel(diss, partition), sample, plan)
}

/// Plug-in `√(mean D²)` over all unordered sample pairs.
pub fn empirical_d2_root<P: 'static>(diss: &Dissimilarity<P>, sample: &Sample<P>) -> Result<f64> {
    let d = diss.clone();
    let k = Kernel::symmetric(2, move |args: &[&P]| {
        let v = d.eval(args[0], args[1]);
        v * v
    })
    .expect("arity 2 is valid");
    Ok(u_statistic(&k, sample)?.sqrt())
}

/// Scans the class with the median-of-means risk estimator and returns the
/// empirical minimizer.
///
/// Every member is evaluated on the same deterministic block partition
/// (`V = 64 ⌈ln(N/δ)⌉` blocks of the same sample), so the per-member
/// deviations are comparable and the union-bound reading applies.
pub fn select_partition<P: Sync + 'static>(
    diss: &Dissimilarity<P>,
    class: &PartitionClass<P>,
    sample: &Sample<P>,
    delta: f64,
) -> Result<RiskReport> {
    let n = sample.n();
    let n_class = class.len();
    let v = cluster_block_count(n_class, delta, n)?;
    let plan = MoMPlan::with_block_count(2, v)?;
    plan.validate_for(n)?;

    let mut risks = Vec::with_capacity(n_class);
    for member in class.members() {
        risks.push(mom_clustering_risk_with_plan(diss, member, sample, &plan)?.value);
    }
    let selected = argmin(&risks);
    let l = ceil_log(n_class as f64 / delta)? as f64;
    let sigma_hat = empirical_d2_root(diss, sample)?;
    Ok(RiskReport {
        labels: class.members().iter().map(|m| m.label().to_string()).collect(),
        risks,
        selected,
        v,
        deviation_bound: Some(sigma_hat * (l / n as f64).sqrt()),
    })
}

/// Scans the class with the classical U-statistic risk estimate. Provided
/// as the comparison baseline for contaminated instances.
pub fn select_partition_classical<P: 'static>(
    diss: &Dissimilarity<P>,
    class: &PartitionClass<P>,
    sample: &Sample<P>,
) -> Result<RiskReport> {
    let mut risks = Vec::with_capacity(class.len());
    for member in class.members() {
        risks.push(empirical_clustering_risk(diss, member, sample)?);
    }
    let selected = argmin(&risks);
    Ok(RiskReport {
        labels: class.members().iter().map(|m| m.label().to_string()).collect(),
        risks,
        selected,
        v: 0,
        deviation_bound: None,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// A Monte Carlo risk value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRisk {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo stand-in for the unobservable risk: averages `D·Φ` over
/// `n_mc` independently drawn pairs from the generator.
pub fn oracle_risk<P>(
    diss: &Dissimilarity<P>,
    partition: &CellPartition<P>,
    mut gen: impl FnMut(&mut ChaCha8Rng) -> P,
    n_mc: usize,
    stream: SeededStream,
) -> Result<OracleRisk> {
    if n_mc < 10_000 {
        return Err(Error::invalid(format!(
            "oracle risk needs at least 10000 Monte Carlo pairs, got {n_mc}"
        )));
    }
    let mut rng = stream.rng();
    let mut acc = KahanSum::new();
    let mut acc_sq = KahanSum::new();
    for _ in 0..n_mc {
        let x = gen(&mut rng);
        let y = gen(&mut rng);
        let v = if partition.assign(&x) == partition.assign(&y) {
            diss.eval(&x, &y)
        } else {
            0.0
        };
        acc.add(v);
        acc_sq.add(v * v);
    }
    let nf = n_mc as f64;
    let mean = acc.value() / nf;
    let var = ((acc_sq.value() / nf) - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(OracleRisk {
        value: mean,
        std_error: (var / nf).sqrt(),
    })
}

/// One row of the low-noise diagnostic: the excess risk of a partition and
/// the largest disagreement probability over the probe grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowNoisePoint {
    /// `W(P) − W(P*)`, both sides estimated on the same Monte Carlo pairs.
    pub excess_risk: f64,
    /// `max over probes x of P{Φ_P(x,X) ≠ Φ_P*(x,X)}`.
    pub disagreement: f64,
}

/// Monte Carlo estimates of both sides of the low-noise condition
/// `P{Φ_P ≠ Φ_P*} <= κ (W(P) − W*)^a`, for fitting `(κ, a)` offline.
/// No selection logic depends on these values.
///
/// Risk differences use shared pair draws (lane 0), so a member identical
/// to the reference reports exactly zero; disagreement probabilities share
/// single draws (lane 1) across members and probes.
pub fn low_noise_margin<P>(
    diss: &Dissimilarity<P>,
    class: &PartitionClass<P>,
    reference: &CellPartition<P>,
    mut gen: impl FnMut(&mut ChaCha8Rng) -> P,
    n_mc: usize,
    stream: SeededStream,
    probes: &[P],
) -> Result<Vec<LowNoisePoint>> {
    if n_mc < 10_000 {
        return Err(Error::invalid(format!(
            "low-noise diagnostics need at least 10000 Monte Carlo draws, got {n_mc}"
        )));
    }
    if probes.is_empty() {
        return Err(Error::invalid("the sup over x needs at least one probe point"));
    }
    let n_class = class.len();

    // risks on shared pairs
    let mut rng = stream.lane(0).rng();
    let mut accs: Vec<KahanSum> = vec![KahanSum::new(); n_class];
    let mut acc_ref = KahanSum::new();
    for _ in 0..n_mc {
        let x = gen(&mut rng);
        let y = gen(&mut rng);
        let d = diss.eval(&x, &y);
        for (j, member) in class.members().iter().enumerate() {
            if member.assign(&x) == member.assign(&y) {
                accs[j].add(d);
            }
        }
        if reference.assign(&x) == reference.assign(&y) {
            acc_ref.add(d);
        }
    }
    let w_ref = acc_ref.value() / n_mc as f64;

    // disagreement counts on shared single draws
    let probe_cells: Vec<Vec<usize>> = class
        .members()
        .iter()
        .map(|m| probes.iter().map(|x| m.assign(x)).collect())
        .collect();
    let probe_cells_ref: Vec<usize> = probes.iter().map(|x| reference.assign(x)).collect();
    let mut disagree = vec![vec![0u64; probes.len()]; n_class];
    let mut rng = stream.lane(1).rng();
    for _ in 0..n_mc {
        let x = gen(&mut rng);
        let ref_cell = reference.assign(&x);
        for (j, member) in class.members().iter().enumerate() {
            let member_cell = member.assign(&x);
            for (i, (&pc, &pc_ref)) in probe_cells[j].iter().zip(&probe_cells_ref).enumerate() {
                let phi = member_cell == pc;
                let phi_ref = ref_cell == pc_ref;
                if phi != phi_ref {
                    disagree[j][i] += 1;
                }
            }
        }
    }

    Ok((0..n_class)
        .map(|j| LowNoisePoint {
            excess_risk: accs[j].value() / n_mc as f64 - w_ref,
            disagreement: disagree[j]
                .iter()
                .map(|&c| c as f64 / n_mc as f64)
                .fold(0.0, f64::max),
        })
        .collect())
}
