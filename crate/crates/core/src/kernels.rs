//! Kernels and the enumeration oracle over finite discrete distributions.
//!
//! A kernel is an arity-m real-valued function of sample points. Sample
//! points are opaque to this crate (equality is all that is required of
//! them); kernels own every bit of numeric interpretation.
//!
//! For a finite discrete distribution the projections
//! `π_k h = (δ_x − P) × ⋯ × (δ_x − P) × P^{m−k} h` can be computed exactly
//! by exhausting the support, which is what makes them usable as a test
//! oracle for degeneracy and for the orthogonal variance decomposition
//! `Var h = Σ_s C(m,s) E[(π_s h)²]`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::stats::binomial;
use crate::sum::KahanSum;

/// Hard cap on `support_size ^ arity` for the enumeration oracle.
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

/// Default tolerance for [`degeneracy_order`]: well above f64 rounding of
/// the exact enumeration, far below any genuine projection value.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// An arity-m kernel over sample points of type `P`.
///
/// The `symmetric` flag is declared by the constructor; a symmetric kernel
/// must be invariant under every permutation of its arguments, and several
/// operations reject kernels not declared symmetric.
pub struct Kernel<P> {
    arity: usize,
    symmetric: bool,
    eval: Arc<dyn Fn(&[&P]) -> f64 + Send + Sync>,
}

impl<P> Clone for Kernel<P> {
    fn clone(&self) -> Self {
        Kernel {
            arity: self.arity,
            symmetric: self.symmetric,
            eval: Arc::clone(&self.eval),
        }
    }
}

impl<P> std::fmt::Debug for Kernel<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Kernel")
            .field("arity", &self.arity)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

impl<P> Kernel<P> {
    pub fn new(
        arity: usize,
        symmetric: bool,
        eval: impl Fn(&[&P]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::invalid("kernel arity must be at least 1"));
        }
        Ok(Kernel {
            arity,
            symmetric,
            eval: Arc::new(eval),
        })
    }

    /// Shorthand for a kernel declared symmetric.
    pub fn symmetric(
        arity: usize,
        eval: impl Fn(&[&P]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Kernel::new(arity, true, eval)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    #[inline]
    pub fn eval(&self, args: &[&P]) -> f64 {
        debug_assert_eq!(args.len(), self.arity, "kernel arity mismatch");
        (self.eval)(args)
    }
}

impl<P: 'static> Kernel<P> {
    /// The symmetrized kernel: the average of this kernel over all `m!`
    /// argument permutations. The evaluated values are summed in sorted
    /// order, so the result is bit-identical under any permutation of the
    /// input arguments.
    pub fn symmetrized(&self) -> Result<Kernel<P>> {
        if self.arity > 8 {
            return Err(Error::invalid(format!(
                "symmetrization is limited to arity <= 8 (m! evaluations), got {}",
                self.arity
            )));
        }
        let perms = permutations(self.arity);
        let count = perms.len() as f64;
        let inner = Arc::clone(&self.eval);
        let m = self.arity;
        Kernel::new(m, true, move |args: &[&P]| {
            let mut buf: Vec<&P> = Vec::with_capacity(m);
            let mut vals: Vec<f64> = Vec::with_capacity(perms.len());
            for perm in &perms {
                buf.clear();
                buf.extend(perm.iter().map(|&i| args[i]));
                vals.push(inner(&buf));
            }
            vals.sort_by(f64::total_cmp);
            KahanSum::sum_iter(vals.into_iter()) / count
        })
    }
}

/// All permutations of `0..m` in lexicographic order.
fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..m).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
    out
}

/// Visits all `k`-tuples over `0..s` in row-major (odometer) order, the last
/// coordinate moving fastest.
fn for_each_tuple(s: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut digits = vec![0usize; k];
    loop {
        f(&digits);
        let mut j = k;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            digits[j] += 1;
            if digits[j] < s {
                break;
            }
            digits[j] = 0;
        }
    }
}

/// The symmetric arity-2 product kernel `(x, y) ↦ x·y`.
pub fn product_kernel() -> Kernel<f64> {
    Kernel::symmetric(2, |args: &[&f64]| *args[0] * *args[1]).expect("arity 2 is valid")
}

/// The arity-1 identity kernel `x ↦ x`, whose mean is the plain mean.
pub fn identity_kernel() -> Kernel<f64> {
    Kernel::symmetric(1, |args: &[&f64]| *args[0]).expect("arity 1 is valid")
}

/// A finitely supported distribution used as an exact enumeration oracle.
#[derive(Debug, Clone)]
pub struct FiniteDistribution<P> {
    support: Vec<P>,
    weights: Vec<f64>,
}

impl<P: PartialEq + Clone> FiniteDistribution<P> {
    pub fn new(support: Vec<P>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("support must be nonempty"));
        }
        if support.len() != weights.len() {
            return Err(Error::invalid("support and weights lengths differ"));
        }
        for (i, a) in support.iter().enumerate() {
            if support[i + 1..].contains(a) {
                return Err(Error::invalid("support points must be pairwise distinct"));
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total = KahanSum::sum_iter(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "weights must sum to 1 within 1e-12, got {total}"
            )));
        }
        Ok(FiniteDistribution { support, weights })
    }

    pub fn uniform(support: Vec<P>) -> Result<Self> {
        let w = 1.0 / support.len() as f64;
        let weights = vec![w; support.len()];
        FiniteDistribution::new(support, weights)
    }

    pub fn support(&self) -> &[P] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    fn check_budget(&self, arity: usize) -> Result<()> {
        let required = (self.support.len() as u128)
            .checked_pow(arity as u32)
            .unwrap_or(u128::MAX);
        if required > ENUMERATION_BUDGET {
            return Err(Error::BudgetExceeded {
                required,
                cap: ENUMERATION_BUDGET,
            });
        }
        Ok(())
    }

    /// Expectation of the kernel with the points in `fixed` occupying the
    /// first coordinates and the remaining `m − |fixed|` integrated out.
    fn conditional_mean(&self, kernel: &Kernel<P>, fixed: &[&P]) -> f64 {
        let m = kernel.arity();
        let free = m - fixed.len();
        let mut args: Vec<&P> = Vec::with_capacity(m);
        args.extend_from_slice(fixed);
        args.resize(m, &self.support[0]);
        let mut acc = KahanSum::new();
        for_each_tuple(self.support.len(), free, |digits| {
            let mut w = 1.0;
            for (j, &d) in digits.iter().enumerate() {
                w *= self.weights[d];
                args[fixed.len() + j] = &self.support[d];
            }
            acc.add(w * kernel.eval(&args));
        });
        acc.value()
    }

    /// `P^m h`, the exact mean of the kernel under the product measure.
    pub fn kernel_mean(&self, kernel: &Kernel<P>) -> Result<f64> {
        self.check_budget(kernel.arity())?;
        Ok(self.conditional_mean(kernel, &[]))
    }

    /// Exact variance of the kernel under the product measure.
    pub fn kernel_variance(&self, kernel: &Kernel<P>) -> Result<f64> {
        self.check_budget(kernel.arity())?;
        let mean = self.conditional_mean(kernel, &[]);
        let m = kernel.arity();
        let mut args: Vec<&P> = vec![&self.support[0]; m];
        let mut acc = KahanSum::new();
        for_each_tuple(self.support.len(), m, |digits| {
            let mut w = 1.0;
            for (j, &d) in digits.iter().enumerate() {
                w *= self.weights[d];
                args[j] = &self.support[d];
            }
            let v = kernel.eval(&args) - mean;
            acc.add(w * v * v);
        });
        Ok(acc.value())
    }
}

/// The exact table of one projection order over the k-fold support product.
#[derive(Debug, Clone)]
pub struct ProjectionResult<P> {
    order: usize,
    support: Vec<P>,
    values: Vec<f64>,
}

impl<P: PartialEq> ProjectionResult<P> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn support(&self) -> &[P] {
        &self.support
    }

    /// Row-major table over the k-fold product of the support: the entry for
    /// support indices `(i_1, …, i_k)` sits at `Σ_j i_j · s^(k−1−j)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, indices: &[usize]) -> f64 {
        assert_eq!(indices.len(), self.order, "projection order mismatch");
        let s = self.support.len();
        let mut idx = 0usize;
        for &i in indices {
            assert!(i < s, "support index out of range");
            idx = idx * s + i;
        }
        self.values[idx]
    }

    /// Looks the projection up by support points instead of indices.
    pub fn value_at(&self, points: &[&P]) -> Option<f64> {
        let mut indices = Vec::with_capacity(points.len());
        for p in points {
            indices.push(self.support.iter().position(|q| q == *p)?);
        }
        Some(self.value(&indices))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Exact Hoeffding projection `π_order h` of a symmetric kernel under a
/// finite distribution, computed by expanding the signed product measure
/// over coordinate subsets: for each `order`-tuple of support points,
///
/// `π_k h(x_1,…,x_k) = Σ_{S ⊆ {1..k}} (−1)^(k−|S|) E[h | coords in S fixed]`.
pub fn hoeffding_projection<P: PartialEq + Clone>(
    kernel: &Kernel<P>,
    dist: &FiniteDistribution<P>,
    order: usize,
) -> Result<ProjectionResult<P>> {
    if !kernel.is_symmetric() {
        return Err(Error::invalid(
            "projections require a symmetric kernel; symmetrize it first",
        ));
    }
    if order > kernel.arity() {
        return Err(Error::invalid(format!(
            "projection order {order} exceeds kernel arity {}",
            kernel.arity()
        )));
    }
    dist.check_budget(kernel.arity())?;

    let s = dist.len();
    // Conditional-mean tables per number of fixed coordinates: tables[f] has
    // one entry per f-tuple of support indices (row-major). Symmetry of the
    // kernel makes the fixed positions irrelevant, only the points matter.
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for f in 0..=order {
        let mut table = Vec::with_capacity(s.pow(f as u32));
        let mut fixed: Vec<&P> = Vec::with_capacity(f);
        for_each_tuple(s, f, |digits| {
            fixed.clear();
            fixed.extend(digits.iter().map(|&d| &dist.support()[d]));
            table.push(dist.conditional_mean(kernel, &fixed));
        });
        tables.push(table);
    }

    let mut values = Vec::with_capacity(s.pow(order as u32));
    for_each_tuple(s, order, |digits| {
        // inclusion–exclusion over the subsets of fixed coordinates
        let mut acc = KahanSum::new();
        for mask in 0u32..(1u32 << order) {
            let fixed_count = mask.count_ones() as usize;
            let mut idx = 0usize;
            for (j, &d) in digits.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    idx = idx * s + d;
                }
            }
            let sign = if (order - fixed_count) % 2 == 0 { 1.0 } else { -1.0 };
            acc.add(sign * tables[fixed_count][idx]);
        }
        values.push(acc.value());
    });

    Ok(ProjectionResult {
        order,
        support: dist.support().to_vec(),
        values,
    })
}

/// Result of the degeneracy probe: `q` is the largest order such that all
/// projections `π_s h` with `1 <= s <= q−1` vanish (clamped to the arity),
/// and `canonical` additionally records `P^m h = 0` together with `q = m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegeneracyReport {
    pub q: usize,
    pub canonical: bool,
}

/// Probes the degeneracy order of a symmetric kernel under a finite
/// distribution by enumerating projections until one fails to vanish.
pub fn degeneracy_order<P: PartialEq + Clone>(
    kernel: &Kernel<P>,
    dist: &FiniteDistribution<P>,
    tol: f64,
) -> Result<DegeneracyReport> {
    let m = kernel.arity();
    let mean = dist.kernel_mean(kernel)?;
    let mut q = m;
    for s in 1..=m {
        let proj = hoeffding_projection(kernel, dist, s)?;
        if proj.max_abs() > tol {
            q = s;
            break;
        }
    }
    Ok(DegeneracyReport {
        q,
        canonical: q == m && mean.abs() <= tol,
    })
}

/// Per-order variance contributions `(s, C(m,s) · E[(π_s h)²])` for
/// `s = 1..m`. Their sum equals `Var h` by the orthogonality of the
/// decomposition, which is what the tests pin down.
pub fn variance_decomposition<P: PartialEq + Clone>(
    kernel: &Kernel<P>,
    dist: &FiniteDistribution<P>,
) -> Result<Vec<(usize, f64)>> {
    let m = kernel.arity();
    let mut out = Vec::with_capacity(m);
    for order in 1..=m {
        let proj = hoeffding_projection(kernel, dist, order)?;
        // E[(π_s h)^2] over P^s, walking the table in row-major order
        let mut acc = KahanSum::new();
        let mut t = 0usize;
        for_each_tuple(dist.len(), order, |digits| {
            let mut w = 1.0;
            for &d in digits {
                w *= dist.weights()[d];
            }
            let v = proj.values()[t];
            acc.add(w * v * v);
            t += 1;
        });
        let coeff = binomial(m as u64, order as u64) as f64;
        out.push((order, coeff * acc.value()));
    }
    Ok(out)
}
