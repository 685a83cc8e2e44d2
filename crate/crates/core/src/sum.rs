//! Compensated accumulation.
//!
//! All inner sums in this crate run in a fixed order with Neumaier-style
//! compensation, so results are reproducible across runs regardless of how
//! the surrounding work is scheduled.

/// Kahan–Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Sums an iterator in its own order.
    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_small_terms() {
        // 1 + 2^-60 * 2^60 == 2 exactly under compensation, while the naive
        // sum loses every tiny term.
        let tiny = (2.0f64).powi(-60);
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..(1u64 << 20) {
            acc.add(tiny * (2.0f64).powi(40));
        }
        let expected = 1.0 + (2.0f64).powi(-60 + 40 + 20);
        assert_eq!(acc.value(), expected);
    }

    #[test]
    fn neumaier_handles_large_then_small() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        acc.add(1e100);
        acc.add(1.0);
        acc.add(-1e100);
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn matches_exact_integer_sums() {
        let s = KahanSum::sum_iter((0..1000).map(|i| i as f64));
        assert_eq!(s, 499_500.0);
    }
}
