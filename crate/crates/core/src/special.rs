//! Special functions used by the closed-form kernels.
//!
//! Gamma and Beta come from `statrs` (Lanczos approximation, ~1e-15 relative).

pub use statrs::function::beta::beta;
pub use statrs::function::gamma::{gamma, ln_gamma};

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gamma_reference_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-13);
        assert!((gamma(1.5) - 0.5 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma(5.0) - 24.0).abs() < 1e-11);
        // Reflection formula Gamma(z) Gamma(1-z) = pi / sin(pi z)
        for &z in &[0.1, 0.25, 0.7, 0.9] {
            let lhs = gamma(z) * gamma(1.0 - z);
            let rhs = PI / (PI * z).sin();
            assert!((lhs / rhs - 1.0).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn beta_matches_gamma_ratio() {
        let (a, b) = (0.9, 1.5);
        let r = gamma(a) * gamma(b) / gamma(a + b);
        assert!((beta(a, b) / r - 1.0).abs() < 1e-12);
    }
}
