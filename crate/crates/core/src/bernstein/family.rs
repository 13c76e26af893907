//! The built-in family of complete Bernstein functions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::special::gamma;

/// Closed-form families. Parameters follow the usual conventions: `alpha` is the
/// stability index in (0, 2], `kappa` a secondary exponent, `m` a mass parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// λ^{α/2}
    Stable,
    /// (λ + λ^α)^κ
    MixedPower,
    /// (λ + m^{2/α})^{α/2} − m
    Relativistic,
    /// λ^{α/2} + λ^{κ/2}
    StableSum,
    /// λ^{α/2} (log(1+λ))^κ
    StableLog,
    /// log(1 + λ^{α/2})
    Geometric,
    /// log(1 + (λ + m^{2/α})^{α/2} − m)
    GeometricRelativistic,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Stable,
        Family::MixedPower,
        Family::Relativistic,
        Family::StableSum,
        Family::StableLog,
        Family::Geometric,
        Family::GeometricRelativistic,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Family::Stable => "stable",
            Family::MixedPower => "mixed-power",
            Family::Relativistic => "relativistic",
            Family::StableSum => "stable-sum",
            Family::StableLog => "stable-log",
            Family::Geometric => "geometric",
            Family::GeometricRelativistic => "geometric-relativistic",
        }
    }

    pub fn from_tag(s: &str) -> Result<Family> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.tag() == s)
            .ok_or_else(|| LabError::Parameter(format!("unknown family '{s}'")))
    }

    pub fn formula(&self) -> &'static str {
        match self {
            Family::Stable => "lambda^(alpha/2)",
            Family::MixedPower => "(lambda + lambda^alpha)^kappa",
            Family::Relativistic => "(lambda + m^(2/alpha))^(alpha/2) - m",
            Family::StableSum => "lambda^(alpha/2) + lambda^(kappa/2)",
            Family::StableLog => "lambda^(alpha/2) * log(1+lambda)^kappa",
            Family::Geometric => "log(1 + lambda^(alpha/2))",
            Family::GeometricRelativistic => "log(1 + (lambda + m^(2/alpha))^(alpha/2) - m)",
        }
    }

    pub fn parameter_ranges(&self) -> &'static str {
        match self {
            Family::Stable => "alpha in (0,2)",
            Family::MixedPower => "alpha, kappa in (0,1)",
            Family::Relativistic => "alpha in (0,2), m > 0; requires d > 2",
            Family::StableSum => "0 < kappa < alpha < 2",
            Family::StableLog => "alpha in (0,2), kappa in (-alpha/2, 1-alpha/2)",
            Family::Geometric => "alpha in (0,2]; requires d > alpha",
            Family::GeometricRelativistic => "alpha in (0,2), m > 0; requires d > 2",
        }
    }

    /// Parameters used when a config names the family without values.
    pub fn default_params(&self) -> FamilySpec {
        let (alpha, kappa, m) = match self {
            Family::Stable => (1.0, 0.0, 0.0),
            Family::MixedPower => (0.5, 0.5, 0.0),
            Family::Relativistic => (1.0, 0.0, 1.0),
            Family::StableSum => (1.5, 0.5, 0.0),
            Family::StableLog => (1.0, 0.25, 0.0),
            Family::Geometric => (1.0, 0.0, 0.0),
            Family::GeometricRelativistic => (1.0, 0.0, 1.0),
        };
        FamilySpec { family: *self, alpha, kappa, m }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Serializable family description, `{family, alpha, kappa, m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub alpha: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub m: f64,
}

impl FamilySpec {
    pub fn build(&self) -> Result<BernsteinFunction> {
        BernsteinFunction::new(self.family, self.alpha, self.kappa, self.m)
    }
}

/// A member of the built-in family with closed-form φ, φ′, φ″ and, where known,
/// the Lévy density χ of the associated subordinator. The drift is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinFunction {
    spec: FamilySpec,
    closed_form_derivative: bool,
}

fn open(lo: f64, x: f64, hi: f64) -> bool {
    x > lo && x < hi
}

impl BernsteinFunction {
    /// Validates parameters against the family's stated range.
    pub fn new(family: Family, alpha: f64, kappa: f64, m: f64) -> Result<Self> {
        let ok = match family {
            Family::Stable => open(0.0, alpha, 2.0),
            Family::MixedPower => open(0.0, alpha, 1.0) && open(0.0, kappa, 1.0),
            Family::Relativistic | Family::GeometricRelativistic => open(0.0, alpha, 2.0) && m > 0.0,
            // kappa = 0 would give phi(0+) = 1, so the lower end is excluded.
            Family::StableSum => open(0.0, alpha, 2.0) && open(0.0, kappa, alpha),
            Family::StableLog => open(0.0, alpha, 2.0) && open(-alpha / 2.0, kappa, 1.0 - alpha / 2.0),
            Family::Geometric => alpha > 0.0 && alpha <= 2.0,
        };
        if !ok || !alpha.is_finite() || !kappa.is_finite() || !m.is_finite() {
            return Err(LabError::Parameter(format!(
                "{family}: parameters alpha={alpha}, kappa={kappa}, m={m} outside {}",
                family.parameter_ranges()
            )));
        }
        Ok(BernsteinFunction { spec: FamilySpec { family, alpha, kappa, m }, closed_form_derivative: true })
    }

    pub fn stable(alpha: f64) -> Result<Self> {
        Self::new(Family::Stable, alpha, 0.0, 0.0)
    }

    pub fn geometric(alpha: f64) -> Result<Self> {
        Self::new(Family::Geometric, alpha, 0.0, 0.0)
    }

    /// λ^{α/2} allowing the closed endpoint α = 2 (Brownian motion, φ(λ) = λ).
    /// Only meant for probing boundary behaviour such as recurrence in d = 2.
    pub fn stable_edge(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(LabError::Parameter(format!("stable edge: alpha={alpha} outside (0,2]")));
        }
        Ok(BernsteinFunction {
            spec: FamilySpec { family: Family::Stable, alpha, kappa: 0.0, m: 0.0 },
            closed_form_derivative: true,
        })
    }

    /// Same function, but φ′ evaluated by central differences.
    pub fn with_numeric_derivative(mut self) -> Self {
        self.closed_form_derivative = false;
        self
    }

    pub fn spec(&self) -> FamilySpec {
        self.spec
    }

    pub fn family(&self) -> Family {
        self.spec.family
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    pub fn kappa(&self) -> f64 {
        self.spec.kappa
    }

    pub fn mass(&self) -> f64 {
        self.spec.m
    }

    /// Linear coefficient b of the Lévy–Khintchine form; zero for every built-in family.
    pub fn drift(&self) -> f64 {
        0.0
    }

    /// Whether the family's stated dimension constraint admits `d`.
    pub fn dimension_ok(&self, d: usize) -> bool {
        match self.spec.family {
            Family::Relativistic | Family::GeometricRelativistic => d > 2,
            Family::Geometric => (d as f64) > self.spec.alpha,
            _ => d >= 2,
        }
    }

    fn check(lambda: f64) -> Result<()> {
        if lambda > 0.0 && lambda.is_finite() {
            Ok(())
        } else {
            Err(LabError::Domain(format!("lambda must be positive and finite, got {lambda}")))
        }
    }

    /// φ(λ).
    pub fn phi(&self, lambda: f64) -> Result<f64> {
        Self::check(lambda)?;
        Ok(self.phi_unchecked(lambda))
    }

    /// φ′(λ), closed form unless the numeric fallback was requested.
    pub fn phi_prime(&self, lambda: f64) -> Result<f64> {
        Self::check(lambda)?;
        if self.closed_form_derivative {
            Ok(self.phi_prime_unchecked(lambda))
        } else {
            Ok(self.phi_prime_numeric(lambda))
        }
    }

    /// φ″(λ).
    pub fn phi_second(&self, lambda: f64) -> Result<f64> {
        Self::check(lambda)?;
        Ok(self.phi_second_unchecked(lambda))
    }

    /// Central difference with step λ·10⁻⁶.
    pub fn phi_prime_numeric(&self, lambda: f64) -> f64 {
        let h = lambda * 1e-6;
        (self.phi_unchecked(lambda + h) - self.phi_unchecked(lambda - h)) / (2.0 * h)
    }

    fn relativistic_parts(&self, lambda: f64) -> (f64, f64, f64) {
        let a = self.spec.alpha / 2.0;
        let m = self.spec.m;
        let c = m.powf(2.0 / self.spec.alpha);
        // m * ((1 + λ/c)^a - 1) avoids cancellation at small λ
        let psi = m * (a * (lambda / c).ln_1p()).exp_m1();
        let dpsi = a * (lambda + c).powf(a - 1.0);
        let d2psi = a * (a - 1.0) * (lambda + c).powf(a - 2.0);
        (psi, dpsi, d2psi)
    }

    #[inline]
    pub(crate) fn phi_unchecked(&self, l: f64) -> f64 {
        let FamilySpec { family, alpha, kappa, .. } = self.spec;
        let a = alpha / 2.0;
        match family {
            Family::Stable => l.powf(a),
            Family::MixedPower => (l + l.powf(alpha)).powf(kappa),
            Family::Relativistic => self.relativistic_parts(l).0,
            Family::StableSum => l.powf(a) + l.powf(kappa / 2.0),
            Family::StableLog => l.powf(a) * l.ln_1p().powf(kappa),
            Family::Geometric => l.powf(a).ln_1p(),
            Family::GeometricRelativistic => self.relativistic_parts(l).0.ln_1p(),
        }
    }

    #[inline]
    pub(crate) fn phi_prime_unchecked(&self, l: f64) -> f64 {
        let FamilySpec { family, alpha, kappa, .. } = self.spec;
        let a = alpha / 2.0;
        match family {
            Family::Stable => a * l.powf(a - 1.0),
            Family::MixedPower => {
                let g = l + l.powf(alpha);
                let dg = 1.0 + alpha * l.powf(alpha - 1.0);
                kappa * g.powf(kappa - 1.0) * dg
            }
            Family::Relativistic => self.relativistic_parts(l).1,
            Family::StableSum => {
                let b = kappa / 2.0;
                a * l.powf(a - 1.0) + b * l.powf(b - 1.0)
            }
            Family::StableLog => {
                let lg = l.ln_1p();
                a * l.powf(a - 1.0) * lg.powf(kappa) + l.powf(a) * kappa * lg.powf(kappa - 1.0) / (1.0 + l)
            }
            Family::Geometric => {
                let p = l.powf(a);
                a * l.powf(a - 1.0) / (1.0 + p)
            }
            Family::GeometricRelativistic => {
                let (psi, dpsi, _) = self.relativistic_parts(l);
                dpsi / (1.0 + psi)
            }
        }
    }

    #[inline]
    pub(crate) fn phi_second_unchecked(&self, l: f64) -> f64 {
        let FamilySpec { family, alpha, kappa, .. } = self.spec;
        let a = alpha / 2.0;
        match family {
            Family::Stable => a * (a - 1.0) * l.powf(a - 2.0),
            Family::MixedPower => {
                let g = l + l.powf(alpha);
                let dg = 1.0 + alpha * l.powf(alpha - 1.0);
                let d2g = alpha * (alpha - 1.0) * l.powf(alpha - 2.0);
                kappa * (kappa - 1.0) * g.powf(kappa - 2.0) * dg * dg + kappa * g.powf(kappa - 1.0) * d2g
            }
            Family::Relativistic => self.relativistic_parts(l).2,
            Family::StableSum => {
                let b = kappa / 2.0;
                a * (a - 1.0) * l.powf(a - 2.0) + b * (b - 1.0) * l.powf(b - 2.0)
            }
            Family::StableLog => {
                let lg = l.ln_1p();
                let q = 1.0 + l;
                a * (a - 1.0) * l.powf(a - 2.0) * lg.powf(kappa)
                    + 2.0 * a * kappa * l.powf(a - 1.0) * lg.powf(kappa - 1.0) / q
                    + l.powf(a) * kappa * ((kappa - 1.0) * lg.powf(kappa - 2.0) - lg.powf(kappa - 1.0)) / (q * q)
            }
            Family::Geometric => {
                let p = l.powf(a);
                a * l.powf(a - 2.0) * ((a - 1.0) - p) / ((1.0 + p) * (1.0 + p))
            }
            Family::GeometricRelativistic => {
                let (psi, dpsi, d2psi) = self.relativistic_parts(l);
                d2psi / (1.0 + psi) - dpsi * dpsi / ((1.0 + psi) * (1.0 + psi))
            }
        }
    }

    /// Whether a closed-form subordinator Lévy density is registered.
    pub fn has_levy_density(&self) -> bool {
        matches!(self.spec.family, Family::Stable | Family::StableSum | Family::Relativistic)
    }

    /// Subordinator Lévy density χ(t), if registered.
    ///
    /// Stable: (a/Γ(1−a)) t^{−1−a} with a = α/2; sums of stables add such terms;
    /// the relativistic family is the exponentially tempered stable density.
    pub fn levy_density(&self, t: f64) -> Option<f64> {
        if !(t > 0.0) {
            return None;
        }
        let FamilySpec { family, alpha, kappa, m } = self.spec;
        let stable_term = |a: f64| a / gamma(1.0 - a) * t.powf(-1.0 - a);
        match family {
            Family::Stable => Some(stable_term(alpha / 2.0)),
            Family::StableSum => Some(stable_term(alpha / 2.0) + stable_term(kappa / 2.0)),
            Family::Relativistic => {
                let c = m.powf(2.0 / alpha);
                Some(stable_term(alpha / 2.0) * (-c * t).exp())
            }
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        let FamilySpec { family, alpha, kappa, m } = self.spec;
        match family {
            Family::Stable | Family::Geometric => format!("{family}(alpha={alpha})"),
            Family::MixedPower | Family::StableSum | Family::StableLog => {
                format!("{family}(alpha={alpha}, kappa={kappa})")
            }
            Family::Relativistic | Family::GeometricRelativistic => format!("{family}(alpha={alpha}, m={m})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_defaults() -> Vec<BernsteinFunction> {
        Family::ALL.iter().map(|f| f.default_params().build().unwrap()).collect()
    }

    #[test]
    fn closed_form_examples() {
        let s = BernsteinFunction::stable(1.0).unwrap();
        assert!((s.phi(4.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((s.phi_prime(4.0).unwrap() - 0.25).abs() < 1e-15);
        let g = BernsteinFunction::geometric(1.0).unwrap();
        assert!(g.phi(1e-300).unwrap() < 1e-149);
        // d/dλ log(1+√λ) at λ=1 is (1/2)/(1+1)
        assert!((g.phi_prime(1.0).unwrap() - 0.25).abs() < 1e-15);
        let sum = BernsteinFunction::new(Family::StableSum, 1.0, 0.5, 0.0).unwrap();
        assert!((sum.phi(1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let s = BernsteinFunction::stable(1.0).unwrap();
        assert!(matches!(s.phi(0.0), Err(LabError::Domain(_))));
        assert!(matches!(s.phi(-1.0), Err(LabError::Domain(_))));
        assert!(BernsteinFunction::stable(2.0).is_err());
        assert!(BernsteinFunction::stable(0.0).is_err());
        assert!(BernsteinFunction::new(Family::StableSum, 1.0, 0.0, 0.0).is_err());
        assert!(BernsteinFunction::new(Family::StableSum, 1.0, 1.2, 0.0).is_err());
        assert!(BernsteinFunction::new(Family::StableLog, 1.0, -0.6, 0.0).is_err());
        assert!(BernsteinFunction::new(Family::Relativistic, 1.0, 0.0, 0.0).is_err());
        assert!(BernsteinFunction::geometric(2.0).is_ok());
        assert!(BernsteinFunction::stable_edge(2.0).is_ok());
    }

    #[test]
    fn numeric_derivative_matches_closed_form() {
        for f in all_defaults() {
            let mut l = 1e-3;
            while l <= 1e3 {
                let exact = f.phi_prime(l).unwrap();
                let fd = f.phi_prime_numeric(l);
                assert!((fd / exact - 1.0).abs() < 1e-6, "{} at {l}: {fd} vs {exact}", f.describe());
                l *= 1.37;
            }
        }
    }

    #[test]
    fn second_derivative_matches_difference_of_first() {
        for f in all_defaults() {
            for &l in &[1e-2, 0.3, 1.0, 7.0, 150.0] {
                let h = l * 1e-5;
                let fd = (f.phi_prime(l + h).unwrap() - f.phi_prime(l - h).unwrap()) / (2.0 * h);
                let exact = f.phi_second(l).unwrap();
                assert!((fd - exact).abs() <= 1e-5 * exact.abs(), "{} at {l}: {fd} vs {exact}", f.describe());
            }
        }
    }

    #[test]
    fn levy_density_reproduces_phi() {
        // φ(λ) = ∫ (1 - e^{-λt}) χ(t) dt, checked by quadrature
        for f in [
            BernsteinFunction::stable(1.0).unwrap(),
            BernsteinFunction::new(Family::StableSum, 1.5, 0.5, 0.0).unwrap(),
            BernsteinFunction::new(Family::Relativistic, 1.0, 0.0, 1.0).unwrap(),
        ] {
            for &lam in &[0.5, 2.0] {
                let body = |t: f64| -(-lam * t).exp_m1() * f.levy_density(t).unwrap();
                let near = crate::quad::integrate_from_zero_singular(body, 1.0, 1e-10, 0.0).unwrap().value;
                let far = crate::quad::integrate_from_zero_singular(|x| body(1.0 / x) / (x * x), 1.0, 1e-10, 0.0)
                    .unwrap()
                    .value;
                let phi = f.phi(lam).unwrap();
                assert!(((near + far) / phi - 1.0).abs() < 1e-7, "{}: {} vs {phi}", f.describe(), near + far);
            }
        }
        assert!(BernsteinFunction::geometric(1.0).unwrap().levy_density(1.0).is_none());
    }

    #[test]
    fn tag_roundtrip() {
        for f in Family::ALL {
            assert_eq!(Family::from_tag(f.tag()).unwrap(), f);
        }
        assert!(Family::from_tag("nope").is_err());
    }
}
