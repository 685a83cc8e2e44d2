//! Built-in scalar kernels addressable by id.

use umom_core::{identity_kernel, product_kernel, Kernel};

use crate::config::DistSpec;
use crate::error::{CliError, Result};

pub const KERNEL_IDS: &[&str] = &["product", "mean", "variance"];

/// Kernels:
/// - `product`: (x, y) ↦ x·y, arity 2; its mean is (E X)².
/// - `mean`: x ↦ x, arity 1; plain mean.
/// - `variance`: (x, y) ↦ (x−y)²/2, arity 2; its mean is Var X.
pub fn kernel_by_id(id: &str) -> Result<Kernel<f64>> {
    match id {
        "product" => Ok(product_kernel()),
        "mean" => Ok(identity_kernel()),
        "variance" => Ok(Kernel::symmetric(2, |a: &[&f64]| {
            let d = *a[0] - *a[1];
            d * d / 2.0
        })
        .expect("arity 2 is valid")),
        other => Err(CliError::validation(format!(
            "unknown kernel '{other}'; available: {}",
            KERNEL_IDS.join(", ")
        ))),
    }
}

/// The analytic kernel mean of a built-in scenario, used as the deviation
/// reference so the measurement does not inherit estimator bias.
pub fn analytic_truth(kernel_id: &str, dist: &DistSpec) -> Result<f64> {
    match (kernel_id, dist) {
        ("product", DistSpec::Normal { mean, .. }) => Ok(mean * mean),
        ("mean", DistSpec::Normal { mean, .. }) => Ok(*mean),
        ("variance", DistSpec::Normal { sd, .. }) => Ok(sd * sd),
        ("product" | "mean", DistSpec::Stable { alpha, .. }) => {
            if *alpha > 1.0 {
                Ok(0.0) // symmetric stable with α > 1 has mean 0
            } else {
                Err(CliError::validation(format!(
                    "kernel mean undefined for stable inputs with alpha = {alpha} <= 1; \
                     supply `truth` explicitly"
                )))
            }
        }
        ("variance", DistSpec::Stable { gamma, alpha }) => {
            if *alpha == 2.0 {
                Ok(2.0 * gamma * gamma)
            } else {
                Err(CliError::validation(format!(
                    "variance is infinite for stable inputs with alpha = {alpha} < 2; \
                     supply `truth` explicitly"
                )))
            }
        }
        (other, _) => Err(CliError::validation(format!(
            "unknown kernel '{other}'; available: {}",
            KERNEL_IDS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_knows_all_ids() {
        for id in KERNEL_IDS {
            assert!(kernel_by_id(id).is_ok());
        }
        assert!(kernel_by_id("nope").is_err());
    }

    #[test]
    fn variance_kernel_value() {
        let k = kernel_by_id("variance").unwrap();
        assert_eq!(k.eval(&[&0.0, &2.0]), 2.0);
    }

    #[test]
    fn truths() {
        let normal = DistSpec::Normal { mean: 2.0, sd: 3.0 };
        assert_eq!(analytic_truth("product", &normal).unwrap(), 4.0);
        assert_eq!(analytic_truth("mean", &normal).unwrap(), 2.0);
        assert_eq!(analytic_truth("variance", &normal).unwrap(), 9.0);
        let stable = DistSpec::Stable { gamma: 1.0, alpha: 1.5 };
        assert_eq!(analytic_truth("product", &stable).unwrap(), 0.0);
        assert!(analytic_truth("variance", &stable).is_err());
        let cauchy = DistSpec::Stable { gamma: 1.0, alpha: 1.0 };
        assert!(analytic_truth("mean", &cauchy).is_err());
    }
}
