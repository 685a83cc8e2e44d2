//! Small statistical utilities shared by the experiment harness and the
//! self-test suites: two-sample Kolmogorov–Smirnov distance, order-statistic
//! quantiles, least-squares slopes and exact binomial coefficients.

use std::cmp::Ordering;

/// Two-sample Kolmogorov–Smirnov statistic: the sup-distance between the
/// empirical CDFs of `a` and `b`.
///
/// Both slices must be nonempty; inputs are copied and sorted internally.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "ks_statistic on empty sample");
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);

    let x_inc = 1.0 / xs.len() as f64;
    let y_inc = 1.0 / ys.len() as f64;
    let mut diff = 0.0f64;
    let mut max_diff = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < xs.len() || j < ys.len() {
        if i == xs.len() {
            diff -= y_inc;
            j += 1;
        } else if j == ys.len() {
            diff += x_inc;
            i += 1;
        } else {
            match xs[i].total_cmp(&ys[j]) {
                Ordering::Less => {
                    diff += x_inc;
                    i += 1;
                }
                Ordering::Greater => {
                    diff -= y_inc;
                    j += 1;
                }
                Ordering::Equal => {
                    // advance over the whole tie group on both sides at once
                    let v = xs[i];
                    while i < xs.len() && xs[i] == v {
                        diff += x_inc;
                        i += 1;
                    }
                    while j < ys.len() && ys[j] == v {
                        diff -= y_inc;
                        j += 1;
                    }
                }
            }
        }
        max_diff = max_diff.max(diff.abs());
    }
    max_diff
}

/// Type-1 (order statistic) quantile of an ascending-sorted slice: the value
/// at 1-based index `ceil(q * n)`, clamped to the valid range.
pub fn quantile_type1(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&q), "quantile level out of [0,1]");
    let n = sorted.len();
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[idx - 1]
}

/// Ordinary least-squares slope of y on x.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "slope needs at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    sxy / sxx
}

/// Exact binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        // c * (n - k + i) stays integral at every step
        match c.checked_mul((n - k + i) as u128) {
            Some(v) => c = v / i as u128,
            None => return u128::MAX,
        }
    }
    c
}
