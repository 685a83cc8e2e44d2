//! Shared fixtures for the benchmark targets.

use umom_core::{sample_normal, sample_stable, SeededStream, StableParams};

pub fn normal_points(n: usize) -> Vec<f64> {
    sample_normal(0.0, 1.0, SeededStream::new(0xBE7C, 0), n)
}

pub fn stable_points(n: usize, alpha: f64) -> Vec<f64> {
    let params = StableParams::new(1.0, alpha).expect("valid params");
    sample_stable(&params, SeededStream::new(0xBE7C, 1), n)
}
