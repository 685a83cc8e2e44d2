//! The classical U-statistic, decoupled block U-statistics and the
//! median-of-means estimator.
//!
//! The robust estimator splits the sample into V regular blocks, computes a
//! decoupled U-statistic for every strictly increasing m-tuple of distinct
//! blocks and takes the median of those values. A cheaper diagonal variant
//! takes the median of the V within-block U-statistics instead.
//!
//! Every inner sum runs compensated in a fixed lexicographic order; the
//! per-tuple values are materialized in their canonical enumeration order
//! before the median, so internal parallelism never changes the result.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{median, EstimatorMode, MoMPlan, RegularPartition};
use crate::error::{Error, Result};
use crate::kernels::{identity_kernel, Kernel};
use crate::stats::binomial;
use crate::sum::KahanSum;

/// An immutable ordered sample of points.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<P> {
    points: Vec<P>,
}

impl<P> Sample<P> {
    pub fn new(points: Vec<P>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("a sample needs at least one point"));
        }
        Ok(Sample { points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }
}

/// What an estimation run produced, with exact work accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub value: f64,
    pub mode: EstimatorMode,
    /// Block count used; 0 for the classical estimator.
    pub v: usize,
    /// Number of aggregated statistics: C(V,m) in combinations mode, V in
    /// diagonal mode, 1 for classical.
    pub tuple_count: u64,
    /// Exact number of kernel evaluations performed.
    pub kernel_eval_count: u64,
}

/// Visits all strictly increasing m-subsets of `0..n` in lexicographic order.
fn for_each_combination(n: usize, m: usize, mut f: impl FnMut(&[usize])) {
    if m == 0 || m > n {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx);
        // rightmost position that can still advance
        let Some(j) = (0..m).rev().find(|&j| idx[j] < n - m + j) else {
            return;
        };
        idx[j] += 1;
        for l in j + 1..m {
            idx[l] = idx[l - 1] + 1;
        }
    }
}

/// The classical U-statistic: the average of the kernel over all unordered
/// m-subsets of the sample (equal, by symmetry, to the average over ordered
/// tuples of distinct indices).
pub fn u_statistic<P>(kernel: &Kernel<P>, sample: &Sample<P>) -> Result<f64> {
    if !kernel.is_symmetric() {
        return Err(Error::invalid(
            "the classical U-statistic requires a symmetric kernel; symmetrize it first",
        ));
    }
    let m = kernel.arity();
    let n = sample.n();
    if n < m {
        return Err(Error::invalid(format!(
            "U-statistic of arity {m} needs n >= {m}, got n = {n}"
        )));
    }
    let pts = sample.points();
    let mut args: Vec<&P> = vec![&pts[0]; m];
    let mut acc = KahanSum::new();
    for_each_combination(n, m, |idx| {
        for (slot, &i) in args.iter_mut().zip(idx) {
            *slot = &pts[i];
        }
        acc.add(kernel.eval(&args));
    });
    Ok(acc.value() / binomial(n as u64, m as u64) as f64)
}

/// Classical U-statistic wrapped in a report with exact eval accounting.
pub fn u_statistic_report<P>(kernel: &Kernel<P>, sample: &Sample<P>) -> Result<EstimateReport> {
    let value = u_statistic(kernel, sample)?;
    let evals = binomial(sample.n() as u64, kernel.arity() as u64);
    Ok(EstimateReport {
        value,
        mode: EstimatorMode::Classical,
        v: 0,
        tuple_count: 1,
        kernel_eval_count: u64::try_from(evals).unwrap_or(u64::MAX),
    })
}

/// Average of the kernel over the full Cartesian product of the chosen
/// blocks, each argument drawn from its own block. No validation; callers
/// check the tuple first.
fn decoupled_unchecked<P>(kernel: &Kernel<P>, pts: &[P], blocks: &[&[usize]]) -> f64 {
    let m = blocks.len();
    let mut digits = vec![0usize; m];
    let mut args: Vec<&P> = blocks.iter().map(|b| &pts[b[0]]).collect();
    let mut acc = KahanSum::new();
    let mut count = 1.0f64;
    for b in blocks {
        count *= b.len() as f64;
    }
    loop {
        acc.add(kernel.eval(&args));
        // advance odometer, last position fastest
        let mut j = m;
        loop {
            if j == 0 {
                return acc.value() / count;
            }
            j -= 1;
            digits[j] += 1;
            if digits[j] < blocks[j].len() {
                args[j] = &pts[blocks[j][digits[j]]];
                break;
            }
            digits[j] = 0;
            args[j] = &pts[blocks[j][0]];
        }
    }
}

/// Decoupled block U-statistic over `m` distinct blocks of a partition:
/// the average of the kernel over the Cartesian product of the blocks, in
/// lexicographic order over the index tuple.
pub fn decoupled_block_ustat<P>(
    kernel: &Kernel<P>,
    sample: &Sample<P>,
    partition: &RegularPartition,
    block_indices: &[usize],
) -> Result<f64> {
    let m = kernel.arity();
    if block_indices.len() != m {
        return Err(Error::invalid(format!(
            "expected {m} block indices for an arity-{m} kernel, got {}",
            block_indices.len()
        )));
    }
    for (i, a) in block_indices.iter().enumerate() {
        if *a >= partition.v() {
            return Err(Error::invalid(format!(
                "block index {a} out of range for V = {}",
                partition.v()
            )));
        }
        if block_indices[i + 1..].contains(a) {
            return Err(Error::invalid(format!("repeated block index {a}")));
        }
    }
    if partition.n() != sample.n() {
        return Err(Error::invalid(format!(
            "partition covers {} indices but the sample has {}",
            partition.n(),
            sample.n()
        )));
    }
    let blocks: Vec<&[usize]> = block_indices.iter().map(|&i| partition.block(i)).collect();
    Ok(decoupled_unchecked(kernel, sample.points(), &blocks))
}

/// Classical U-statistic restricted to the points of one block.
pub fn diagonal_block_ustat<P>(
    kernel: &Kernel<P>,
    sample: &Sample<P>,
    partition: &RegularPartition,
    block: usize,
) -> Result<f64> {
    if !kernel.is_symmetric() {
        return Err(Error::invalid(
            "the diagonal block statistic requires a symmetric kernel",
        ));
    }
    if block >= partition.v() {
        return Err(Error::invalid(format!(
            "block index {block} out of range for V = {}",
            partition.v()
        )));
    }
    if partition.n() != sample.n() {
        return Err(Error::invalid(format!(
            "partition covers {} indices but the sample has {}",
            partition.n(),
            sample.n()
        )));
    }
    let m = kernel.arity();
    let members = partition.block(block);
    if members.len() < m {
        return Err(Error::invalid(format!(
            "block {block} has {} points, fewer than the kernel arity {m}",
            members.len()
        )));
    }
    let pts = sample.points();
    let mut args: Vec<&P> = vec![&pts[members[0]]; m];
    let mut acc = KahanSum::new();
    for_each_combination(members.len(), m, |idx| {
        for (slot, &i) in args.iter_mut().zip(idx) {
            *slot = &pts[members[i]];
        }
        acc.add(kernel.eval(&args));
    });
    Ok(acc.value() / binomial(members.len() as u64, m as u64) as f64)
}

/// The median-of-means U-estimator.
///
/// Combinations mode enumerates every strictly increasing m-tuple of
/// distinct blocks, computes the decoupled statistic of each and returns the
/// median; diagonal mode takes the median of the V within-block statistics.
/// Tuple statistics may be computed in parallel, but they are materialized
/// in canonical enumeration order before the median, so the result does not
/// depend on scheduling.
///
/// A non-finite block statistic is reported as [`Error::PoisonedValue`] with
/// the offending tuple instead of flowing through the median.
pub fn mom_ustat<P: Sync>(
    kernel: &Kernel<P>,
    sample: &Sample<P>,
    plan: &MoMPlan,
) -> Result<EstimateReport> {
    if !kernel.is_symmetric() {
        return Err(Error::invalid(
            "the median-of-means estimator requires a symmetric kernel; symmetrize it first",
        ));
    }
    let m = kernel.arity();
    if plan.m() != m {
        return Err(Error::invalid(format!(
            "plan is for arity {} but the kernel has arity {m}",
            plan.m()
        )));
    }
    let n = sample.n();
    plan.validate_for(n)?;
    let v = plan.v();

    match plan.mode_kind() {
        EstimatorMode::Classical => unreachable!("validate_for rejects classical plans"),
        EstimatorMode::Combinations => {
            let tuple_count = binomial(v as u64, m as u64);
            let max_block = n.div_ceil(v) as u128;
            let estimated_evals = tuple_count.saturating_mul(max_block.pow(m as u32));
            if estimated_evals > plan.cap() as u128 {
                return Err(Error::BudgetExceeded {
                    required: estimated_evals,
                    cap: plan.cap() as u128,
                });
            }
            let partition = plan.build_partition(n)?;

            let mut tuples: Vec<usize> = Vec::with_capacity(tuple_count as usize * m);
            for_each_combination(v, m, |idx| tuples.extend_from_slice(idx));

            let pts = sample.points();
            let values: Vec<f64> = tuples
                .par_chunks_exact(m)
                .with_min_len(64)
                .map(|tuple| {
                    let blocks: Vec<&[usize]> =
                        tuple.iter().map(|&i| partition.block(i)).collect();
                    decoupled_unchecked(kernel, pts, &blocks)
                })
                .collect();

            if let Some(pos) = values.iter().position(|x| !x.is_finite()) {
                return Err(Error::PoisonedValue {
                    tuple: tuples[pos * m..(pos + 1) * m].to_vec(),
                });
            }

            let mut eval_count: u64 = 0;
            for tuple in tuples.chunks_exact(m) {
                let mut prod: u64 = 1;
                for &i in tuple {
                    prod *= partition.block(i).len() as u64;
                }
                eval_count += prod;
            }

            Ok(EstimateReport {
                value: median(&values)?,
                mode: EstimatorMode::Combinations,
                v,
                tuple_count: u64::try_from(tuple_count).unwrap_or(u64::MAX),
                kernel_eval_count: eval_count,
            })
        }
        EstimatorMode::Diagonal => {
            let partition = plan.build_partition(n)?;
            let pts = sample.points();
            let values: Vec<f64> = (0..v)
                .into_par_iter()
                .with_min_len(8)
                .map(|b| {
                    let members = partition.block(b);
                    let mut args: Vec<&P> = vec![&pts[members[0]]; m];
                    let mut acc = KahanSum::new();
                    for_each_combination(members.len(), m, |idx| {
                        for (slot, &i) in args.iter_mut().zip(idx) {
                            *slot = &pts[members[i]];
                        }
                        acc.add(kernel.eval(&args));
                    });
                    acc.value() / binomial(members.len() as u64, m as u64) as f64
                })
                .collect();

            if let Some(pos) = values.iter().position(|x| !x.is_finite()) {
                return Err(Error::PoisonedValue { tuple: vec![pos] });
            }

            let eval_count: u64 = partition
                .blocks()
                .iter()
                .map(|b| u64::try_from(binomial(b.len() as u64, m as u64)).unwrap_or(u64::MAX))
                .sum();

            Ok(EstimateReport {
                value: median(&values)?,
                mode: EstimatorMode::Diagonal,
                v,
                tuple_count: v as u64,
                kernel_eval_count: eval_count,
            })
        }
    }
}

/// Median-of-means estimator of the plain mean: the arity-1 identity kernel
/// under the confidence-derived plan. Combinations and diagonal enumeration
/// coincide for arity 1.
pub fn mom_mean(sample: &Sample<f64>, delta: f64) -> Result<EstimateReport> {
    let plan = MoMPlan::from_confidence(1, delta, sample.n())?;
    mom_ustat(&identity_kernel(), sample, &plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::regular_partition;
    use crate::kernels::product_kernel;

    fn sample(points: &[f64]) -> Sample<f64> {
        Sample::new(points.to_vec()).unwrap()
    }

    #[test]
    fn u_statistic_product_123() {
        let v = u_statistic(&product_kernel(), &sample(&[1.0, 2.0, 3.0])).unwrap();
        assert!((v - 11.0 / 3.0).abs() <= 1e-15);
    }

    #[test]
    fn u_statistic_constant_points() {
        let k = Kernel::symmetric(2, |a: &[&f64]| a[0] + 2.0 * a[1]).unwrap();
        // not symmetric as a function, but constant points make every term equal
        let v = u_statistic(&k, &sample(&[3.0, 3.0, 3.0, 3.0])).unwrap();
        assert!((v - 9.0).abs() <= 1e-15);
    }

    #[test]
    fn u_statistic_squared_diff() {
        let k = Kernel::symmetric(2, |a: &[&f64]| {
            let d = a[0] - a[1];
            d * d / 2.0
        })
        .unwrap();
        let v = u_statistic(&k, &sample(&[0.0, 2.0])).unwrap();
        assert!((v - 2.0).abs() <= 1e-15);
    }

    #[test]
    fn u_statistic_rejects_bad_input() {
        assert!(u_statistic(&product_kernel(), &sample(&[1.0])).is_err());
        let asym = Kernel::new(2, false, |a: &[&f64]| a[0] - a[1]).unwrap();
        assert!(u_statistic(&asym, &sample(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn decoupled_product_factorizes() {
        let s = sample(&[1.0, 2.0, 3.0, 4.0]);
        let p = regular_partition(4, 2).unwrap();
        let v = decoupled_block_ustat(&product_kernel(), &s, &p, &[0, 1]).unwrap();
        assert!((v - 1.5 * 3.5).abs() <= 1e-15);
    }

    #[test]
    fn decoupled_singletons_single_eval() {
        let s = sample(&[5.0, 7.0]);
        let p = regular_partition(2, 2).unwrap();
        let v = decoupled_block_ustat(&product_kernel(), &s, &p, &[0, 1]).unwrap();
        assert_eq!(v, 35.0);
    }

    #[test]
    fn decoupled_constant_kernel() {
        let k = Kernel::symmetric(2, |_: &[&f64]| 4.25).unwrap();
        let s = sample(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let p = regular_partition(6, 3).unwrap();
        let v = decoupled_block_ustat(&k, &s, &p, &[0, 2]).unwrap();
        assert_eq!(v, 4.25);
    }

    #[test]
    fn decoupled_rejects_repeated_blocks() {
        let s = sample(&[1.0, 2.0, 3.0, 4.0]);
        let p = regular_partition(4, 2).unwrap();
        assert!(decoupled_block_ustat(&product_kernel(), &s, &p, &[1, 1]).is_err());
        assert!(decoupled_block_ustat(&product_kernel(), &s, &p, &[0, 2]).is_err());
    }

    #[test]
    fn diagonal_matches_u_statistic_on_block() {
        let s = sample(&[1.0, 2.0, 3.0, 9.0, 9.0]);
        let p = regular_partition(5, 2).unwrap(); // blocks {0,1,2}, {3,4}
        let v = diagonal_block_ustat(&product_kernel(), &s, &p, 0).unwrap();
        assert!((v - 11.0 / 3.0).abs() <= 1e-15);
        let w = diagonal_block_ustat(&product_kernel(), &s, &p, 1).unwrap();
        assert_eq!(w, 81.0);
    }

    #[test]
    fn diagonal_rejects_small_block() {
        let s = sample(&[1.0, 2.0, 3.0]);
        let p = regular_partition(3, 3).unwrap();
        assert!(diagonal_block_ustat(&product_kernel(), &s, &p, 0).is_err());
    }

    #[test]
    fn mom_constant_sample_is_exact() {
        let s = sample(&[2.0; 12]);
        let plan = MoMPlan::with_block_count(2, 4).unwrap();
        let rep = mom_ustat(&product_kernel(), &s, &plan).unwrap();
        assert_eq!(rep.value, 4.0);
        assert_eq!(rep.tuple_count, 6);
        assert_eq!(rep.kernel_eval_count, 6 * 9);
    }

    #[test]
    fn mom_mean_outlier_in_own_block() {
        // contiguous blocks of [0,0,10,0,0,0] with V=3: means {0, 5, 0}
        let s = sample(&[0.0, 0.0, 10.0, 0.0, 0.0, 0.0]);
        let plan = MoMPlan::with_block_count(1, 3).unwrap();
        let rep = mom_ustat(&identity_kernel(), &s, &plan).unwrap();
        assert_eq!(rep.value, 0.0);
    }

    #[test]
    fn mom_pairs_example_six_points() {
        // blocks {1,2},{3,4},{5,6}: decoupled stats {5.25, 8.25, 19.25}
        let s = sample(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let plan = MoMPlan::with_block_count(2, 3).unwrap();
        let rep = mom_ustat(&product_kernel(), &s, &plan).unwrap();
        assert_eq!(rep.value, 8.25);
        assert_eq!(rep.tuple_count, 3);
        assert_eq!(rep.v, 3);
    }

    #[test]
    fn mom_mean_large_outlier_ignored() {
        let mut pts = vec![0.0; 8];
        pts.push(1e6);
        let s = Sample::new(pts).unwrap();
        let plan = MoMPlan::with_block_count(1, 3).unwrap();
        let rep = mom_ustat(&identity_kernel(), &s, &plan).unwrap();
        assert_eq!(rep.value, 0.0);
    }

    #[test]
    fn mom_poisoned_value_reports_tuple() {
        let s = sample(&[1.0, 2.0, f64::INFINITY, 4.0, 5.0, 6.0]);
        let plan = MoMPlan::with_block_count(2, 3).unwrap();
        match mom_ustat(&product_kernel(), &s, &plan) {
            Err(Error::PoisonedValue { tuple }) => assert_eq!(tuple, vec![0, 1]),
            other => panic!("expected poisoned value, got {other:?}"),
        }
    }

    #[test]
    fn mom_budget_guard_points_to_cap() {
        let s = sample(&(0..64).map(|i| i as f64).collect::<Vec<_>>());
        let plan = MoMPlan::with_block_count(2, 16).unwrap().eval_cap(100);
        assert!(matches!(
            mom_ustat(&product_kernel(), &s, &plan),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn mom_mean_constant_and_symmetric() {
        let s = sample(&[7.5; 256]);
        let rep = mom_mean(&s, 0.05).unwrap();
        assert_eq!(rep.value, 7.5);
        assert_eq!(rep.v, 96); // 32 * ceil(ln 20) = 96
    }

    #[test]
    fn diagonal_mode_median_of_blocks() {
        let s = sample(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let plan = MoMPlan::with_block_count(2, 3)
            .unwrap()
            .mode(EstimatorMode::Diagonal);
        let rep = mom_ustat(&product_kernel(), &s, &plan).unwrap();
        // within-block pair averages: (2+3+6)/3, (20+24+30)/3, (56+63+72)/3
        assert!((rep.value - 74.0 / 3.0).abs() <= 1e-12);
        assert_eq!(rep.tuple_count, 3);
        assert_eq!(rep.kernel_eval_count, 9);
    }

    #[test]
    fn shuffled_plan_is_reproducible() {
        let pts: Vec<f64> = (0..128).map(|i| (i as f64).sin()).collect();
        let s = Sample::new(pts).unwrap();
        let plan = MoMPlan::with_block_count(2, 8).unwrap().shuffle_seed(42);
        let a = mom_ustat(&product_kernel(), &s, &plan).unwrap();
        let b = mom_ustat(&product_kernel(), &s, &plan).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
