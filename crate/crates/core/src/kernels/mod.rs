//! Jump, Green and Poisson kernels: exact stable forms, subordination quadrature,
//! comparability surrogates and the two-sided Poisson envelope.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bernstein::{BernsteinFunction, Family};
use crate::error::{LabError, Result};
use crate::geometry::Domain;
use crate::point::{unit_sphere_area, Point};
use crate::quad;
use crate::special::{gamma, ln_gamma};

/// Default cutoff M for the surrogate estimates.
pub const DEFAULT_CUTOFF: f64 = 2.0;

/// Largest admissible span c_high/c_low in comparability fits.
pub const MAX_SPAN: f64 = 1e6;

/// A(d,α) = α 2^{α−1} π^{−d/2} Γ((d+α)/2) / Γ(1−α/2).
pub fn stable_jump_constant(d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * PI.powf(-d / 2.0) * (ln_gamma((d + alpha) / 2.0) - ln_gamma(1.0 - alpha / 2.0)).exp()
}

/// C(d,α) = Γ((d−α)/2) / (2^α π^{d/2} Γ(α/2)).
pub fn riesz_constant(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    (ln_gamma((df - alpha) / 2.0) - ln_gamma(alpha / 2.0)).exp() / (2f64.powf(alpha) * PI.powf(df / 2.0))
}

/// Whole-space Green function of the isotropic α-stable process, C(d,α) r^{α−d}.
pub fn green_exact_stable(d: usize, alpha: f64, r: f64) -> Result<f64> {
    if (d as f64) <= alpha {
        return Err(LabError::Domain(format!("stable Green function needs d > alpha (d={d}, alpha={alpha})")));
    }
    if !(r > 0.0) {
        return Err(LabError::Domain(format!("r must be positive, got {r}")));
    }
    Ok(riesz_constant(d, alpha) * r.powf(alpha - d as f64))
}

/// Green function of the stable process by time integration of the subordinated
/// heat kernel against the potential density s^{α/2−1}/Γ(α/2).
pub fn green_stable_quadrature(d: usize, alpha: f64, r: f64) -> Result<f64> {
    if (d as f64) <= alpha {
        return Err(LabError::Domain(format!("stable Green function needs d > alpha (d={d}, alpha={alpha})")));
    }
    let a = alpha / 2.0;
    let df = d as f64;
    let g = gamma(a);
    let body = |s: f64| (4.0 * PI * s).powf(-df / 2.0) * (-r * r / (4.0 * s)).exp() * s.powf(a - 1.0) / g;
    let s0 = r * r;
    let near = quad::integrate(|u| if u > 0.0 { body(s0 * u) * s0 } else { 0.0 }, 0.0, 1.0, 1e-10, 0.0)?;
    let far = quad::integrate_from_zero_singular(|v| body(s0 / v) * s0 / (v * v), 1.0, 1e-10, 0.0)?;
    Ok(near.value + far.value)
}

/// Kernel evaluators for one Bernstein function in dimension d.
#[derive(Debug, Clone)]
pub struct KernelSuite {
    pub phi: BernsteinFunction,
    pub d: usize,
    pub cutoff: f64,
}

impl KernelSuite {
    pub fn new(phi: BernsteinFunction, d: usize) -> Result<Self> {
        Self::with_cutoff(phi, d, DEFAULT_CUTOFF)
    }

    pub fn with_cutoff(phi: BernsteinFunction, d: usize, cutoff: f64) -> Result<Self> {
        if d < 2 || d > crate::point::MAX_DIM {
            return Err(LabError::Parameter(format!("dimension {d} outside 2..=4")));
        }
        if !(cutoff > 0.0) {
            return Err(LabError::Parameter(format!("cutoff must be positive, got {cutoff}")));
        }
        Ok(KernelSuite { phi, d, cutoff })
    }

    fn is_stable(&self) -> bool {
        self.phi.family() == Family::Stable
    }

    fn check_positive(r: f64) -> Result<()> {
        if r > 0.0 && r.is_finite() {
            Ok(())
        } else {
            Err(LabError::Domain(format!("r must be positive and finite, got {r}")))
        }
    }

    fn check_cutoff(&self, r: f64) -> Result<()> {
        Self::check_positive(r)?;
        if r > self.cutoff {
            return Err(LabError::Domain(format!("r = {r} beyond the estimate range (0, {}]", self.cutoff)));
        }
        Ok(())
    }

    /// Jump density j(r): closed form for the stable family, subordination
    /// quadrature for the other families with a registered χ. Strongly tempered
    /// relativistic members (m^{1/α}·r beyond about 700) underflow to 0.
    pub fn jump_density(&self, r: f64) -> Result<f64> {
        Self::check_positive(r)?;
        if self.is_stable() {
            let alpha = self.phi.alpha();
            return Ok(stable_jump_constant(self.d, alpha) * r.powf(-(self.d as f64) - alpha));
        }
        self.jump_density_quadrature(r)
    }

    /// j(r) = ∫₀^∞ (4πt)^{−d/2} e^{−r²/(4t)} χ(t) dt with t = r²u, split at u = 1.
    pub fn jump_density_quadrature(&self, r: f64) -> Result<f64> {
        Self::check_positive(r)?;
        if !self.phi.has_levy_density() {
            return Err(LabError::SurrogateOnly(self.phi.describe()));
        }
        let d = self.d as f64;
        let r2 = r * r;
        let chi = |t: f64| self.phi.levy_density(t).unwrap_or(0.0);
        let body = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            (4.0 * PI * r2 * u).powf(-d / 2.0) * (-0.25 / u).exp() * chi(r2 * u) * r2
        };
        // Tempering moves the peak of the integrand towards u ~ 1/(m^{1/α} r), so [0, 1]
        // is cut at dyadic points; below 2^-DYADIC_CUTS the Gaussian factor is < e^-2000.
        const DYADIC_CUTS: i32 = 13;
        let mut near = 0.0;
        for k in 0..DYADIC_CUTS {
            let hi = 0.5f64.powi(k);
            near += quad::integrate(body, 0.5 * hi, hi, 1e-10, 0.0)?.value;
        }
        let far = quad::integrate_from_zero_singular(|v| body(1.0 / v) / (v * v), 1.0, 1e-10, 0.0)?;
        Ok(near + far.value)
    }

    /// j̃(r) = φ′(r⁻²)/r^{d+2}.
    pub fn jump_surrogate(&self, r: f64) -> Result<f64> {
        self.check_cutoff(r)?;
        Ok(self.jump_surrogate_unchecked(r))
    }

    fn jump_surrogate_unchecked(&self, r: f64) -> f64 {
        self.phi.phi_prime_unchecked(r.powi(-2)) / r.powi(self.d as i32 + 2)
    }

    /// g̃(r) = φ′(r⁻²)/(r^{d+2} φ(r⁻²)²).
    pub fn green_surrogate(&self, r: f64) -> Result<f64> {
        self.check_cutoff(r)?;
        let l = r.powi(-2);
        let p = self.phi.phi_unchecked(l);
        Ok(self.phi.phi_prime_unchecked(l) / (r.powi(self.d as i32 + 2) * p * p))
    }

    /// Whole-space Green radial profile, available for the transient stable case.
    pub fn green_exact(&self, r: f64) -> Result<f64> {
        if !self.is_stable() {
            return Err(LabError::SurrogateOnly(format!("exact Green function for {}", self.phi.describe())));
        }
        green_exact_stable(self.d, self.phi.alpha(), r)
    }

    /// Jump kernel used by envelopes: exact where available, otherwise the surrogate.
    pub fn jump_for_envelope(&self, r: f64) -> (f64, bool) {
        match self.jump_density(r) {
            Ok(v) => (v, false),
            Err(_) => (self.jump_surrogate_unchecked(r), true),
        }
    }

    /// Fitted c in the monotonicity statement h(t) ≤ c h(s) for s ≤ t ≤ 2, with
    /// h(t) = φ′(t⁻²)/(φ(t⁻²) t^{d+2}); c = 1 means h is nonincreasing.
    pub fn gdec_constant(&self, radii: &[f64]) -> f64 {
        let h = |t: f64| {
            let l = t.powi(-2);
            self.phi.phi_prime_unchecked(l) / (self.phi.phi_unchecked(l) * t.powi(self.d as i32 + 2))
        };
        let mut sorted: Vec<f64> = radii.iter().copied().filter(|&t| t > 0.0 && t <= 2.0).collect();
        sorted.sort_by(f64::total_cmp);
        let mut c = 1.0f64;
        let mut min_so_far = f64::INFINITY;
        for t in sorted {
            let v = h(t);
            min_so_far = min_so_far.min(v);
            c = c.max(v / min_so_far);
        }
        c
    }

    /// Rows (r, exact, surrogate, ratio) for CSV export.
    pub fn curve(&self, which: KernelKind, radii: &[f64]) -> Result<Vec<KernelRow>> {
        radii
            .iter()
            .map(|&r| {
                let (exact, surrogate) = match which {
                    KernelKind::Jump => (self.jump_density(r).ok(), self.jump_surrogate(r)?),
                    KernelKind::Green => (self.green_exact(r).ok(), self.green_surrogate(r)?),
                };
                Ok(KernelRow { r, exact, surrogate, ratio: exact.map(|e| e / surrogate) })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Jump,
    Green,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelRow {
    pub r: f64,
    pub exact: Option<f64>,
    pub surrogate: f64,
    pub ratio: Option<f64>,
}

pub fn write_kernel_csv<W: Write>(mut w: W, rows: &[KernelRow]) -> Result<()> {
    writeln!(w, "r,exact,surrogate,ratio")?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for row in rows {
        writeln!(w, "{:e},{},{:e},{}", row.r, opt(row.exact), row.surrogate, opt(row.ratio))?;
    }
    Ok(())
}

/// Inf and sup of exact/surrogate on a grid and the comparability constant max(1/c_low, c_high).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparability {
    pub c_low: f64,
    pub c_high: f64,
    pub c: f64,
}

pub fn verify_comparability<E, S>(exact: E, surrogate: S, radii: &[f64]) -> Result<Comparability>
where
    E: Fn(f64) -> Result<f64>,
    S: Fn(f64) -> Result<f64>,
{
    if radii.is_empty() {
        return Err(LabError::Parameter("empty r grid".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &r in radii {
        let q = exact(r)? / surrogate(r)?;
        if !(q > 0.0 && q.is_finite()) {
            return Err(LabError::Comparability { span: f64::INFINITY });
        }
        lo = lo.min(q);
        hi = hi.max(q);
    }
    if hi / lo > MAX_SPAN {
        return Err(LabError::Comparability { span: hi / lo });
    }
    Ok(Comparability { c_low: lo, c_high: hi, c: (1.0 / lo).max(hi) })
}

/// E(x,z) = φ(δ_U(z)⁻²)^{1/2} j(|x−z|) / (φ(δ_U(x)⁻²)^{1/2} φ(|x−z|⁻²) (1 + φ(δ_U(z)⁻²)^{−1/2})).
#[derive(Debug, Clone)]
pub struct PoissonEnvelope {
    pub suite: KernelSuite,
    pub domain: Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeValue {
    pub value: f64,
    /// j̃ stood in for j.
    pub surrogate: bool,
}

impl PoissonEnvelope {
    pub fn new(suite: KernelSuite, domain: Domain) -> Result<Self> {
        if suite.d != domain.dim() {
            return Err(LabError::Parameter("kernel suite and domain dimensions differ".into()));
        }
        Ok(PoissonEnvelope { suite, domain })
    }

    pub fn eval(&self, x: &Point, z: &Point) -> Result<EnvelopeValue> {
        let dx = self.domain.signed_distance(x);
        let dz = -self.domain.signed_distance(z);
        if !(dx > 0.0) {
            return Err(LabError::Domain(format!("x = {x:?} is not in U")));
        }
        if !(dz > 0.0) {
            return Err(LabError::Domain(format!("z = {z:?} is not outside the closure of U")));
        }
        let r = x.dist(z);
        if r >= 2.0 {
            return Err(LabError::Domain(format!("|x - z| = {r} must be below 2")));
        }
        let f = &self.suite.phi;
        let pz = f.phi_unchecked(dz.powi(-2));
        let px = f.phi_unchecked(dx.powi(-2));
        let pr = f.phi_unchecked(r.powi(-2));
        let (j, surrogate) = self.suite.jump_for_envelope(r);
        let value = pz.sqrt() / (px.sqrt() * pr * (1.0 + 1.0 / pz.sqrt())) * j;
        Ok(EnvelopeValue { value, surrogate })
    }

    /// Envelope values along the ray z = x + s·dir for s in `offsets`, skipping
    /// points inside the closure of U.
    pub fn ray_slice(&self, x: &Point, dir: &Point, offsets: &[f64]) -> Vec<(f64, f64)> {
        let u = dir.normalized();
        offsets
            .iter()
            .filter_map(|&s| self.eval(x, &(*x + u * s)).ok().map(|e| (s, e.value)))
            .collect()
    }
}

/// Poisson kernel of the ball B(0,R) for the isotropic α-stable process:
/// C (R²−|x|²)^{α/2} (|z|²−R²)^{−α/2} |x−z|^{−d}, C = Γ(d/2) π^{−d/2−1} sin(πα/2).
pub fn stable_ball_poisson(d: usize, alpha: f64, radius: f64, x: &Point, z: &Point) -> Result<f64> {
    let (x2, z2, r2) = (x.norm_sq(), z.norm_sq(), radius * radius);
    if !(x2 < r2) || !(z2 > r2) {
        return Err(LabError::Domain("need |x| < R < |z|".into()));
    }
    let df = d as f64;
    let c = gamma(df / 2.0) * PI.powf(-df / 2.0 - 1.0) * (PI * alpha / 2.0).sin();
    Ok(c * ((r2 - x2) / (z2 - r2)).powf(alpha / 2.0) * x.dist(z).powf(-df))
}

/// P(|X_τ| ≤ s) for the stable process started at the centre of B(0,R):
/// the regularized incomplete beta I_v(1−α/2, α/2) at v = 1 − R²/s².
pub fn stable_ball_radial_cdf(alpha: f64, radius: f64, s: f64) -> f64 {
    if s <= radius {
        return 0.0;
    }
    let v = 1.0 - (radius / s).powi(2);
    statrs::function::beta::beta_reg(1.0 - alpha / 2.0, alpha / 2.0, v)
}

/// Radial exit density at the centre, integrated over the sphere of radius s.
pub fn stable_ball_radial_density(d: usize, alpha: f64, radius: f64, s: f64) -> f64 {
    let z = Point::unit(d, 0) * s;
    stable_ball_poisson(d, alpha, radius, &Point::zeros(d), &z).map(|k| k * unit_sphere_area(d) * s.powi(d as i32 - 1)).unwrap_or(0.0)
}
