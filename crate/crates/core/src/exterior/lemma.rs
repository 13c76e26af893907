//! Slab and ball integrals of φ(δ_D(y)⁻²)^{q/2} near the boundary.

use serde::{Deserialize, Serialize};

use crate::bernstein::BernsteinFunction;
use crate::error::{LabError, Result};
use crate::geometry::{Chart, Domain};
use crate::point::{unit_ball_volume, Point};
use crate::qmc::Halton;
use crate::quad;

/// Outer quasi-random nodes over ỹ.
pub const OUTER_NODES: usize = 512;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlabIntegral {
    pub r: f64,
    pub lhs: f64,
    /// lhs / (r s^{d−1} φ(r⁻²)^{q/2}), or lhs / (r^d φ(r⁻²)^{1/2}) for the ball form.
    pub ratio: f64,
}

/// ∫ g over [lo, hi] where g may have an integrable power singularity at 0.
fn integrate_across_zero<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64) -> Result<f64> {
    const TOL: f64 = 1e-8;
    if hi <= lo {
        return Ok(0.0);
    }
    if lo < 0.0 && hi > 0.0 {
        let right = quad::integrate_from_zero_singular(&g, hi, TOL, 0.0)?.value;
        let left = quad::integrate_from_zero_singular(|t| g(-t), -lo, TOL, 0.0)?.value;
        return Ok(left + right);
    }
    if lo >= 0.0 {
        quad::integrate_from_zero_singular(|t| g(lo + t), hi - lo, TOL, 0.0).map(|q| q.value)
    } else {
        quad::integrate_from_zero_singular(|t| g(hi - t), hi - lo, TOL, 0.0).map(|q| q.value)
    }
}

/// Outer average over |ỹ| < s of an inner function of ỹ, times the (d−1)-volume.
fn outer_average<F: FnMut(&Point) -> Result<f64>>(dm1: usize, s: f64, mut inner: F) -> Result<f64> {
    if dm1 == 1 {
        // Gauss–Legendre on [−s, s]
        let mut acc = 0.0;
        for (x, w) in quad::gauss_legendre(64, -s, s) {
            acc += w * inner(&Point::from_slice(&[x]))?;
        }
        return Ok(acc);
    }
    let h = Halton::new(dm1);
    let mut u = vec![0.0; dm1];
    let mut acc = 0.0;
    let mut taken = 0usize;
    let mut i = 0u64;
    while taken < OUTER_NODES {
        h.fill(i, &mut u);
        i += 1;
        let yt = Point::from_slice(&u.iter().map(|v| (2.0 * v - 1.0) * s).collect::<Vec<_>>());
        if yt.norm() >= s {
            continue;
        }
        taken += 1;
        acc += inner(&yt)?;
    }
    Ok(acc / OUTER_NODES as f64 * unit_ball_volume(dm1) * s.powi(dm1 as i32))
}

/// Width of the layer, relative to r, where δ_D is taken linear in ρ. Below it the computed
/// distance is rounding noise, which a strong singularity would amplify.
pub(super) const LINEAR_LAYER: f64 = 1e-6;

fn weight(phi: &BernsteinFunction, dd: f64, q: f64) -> f64 {
    if dd <= 0.0 {
        return 0.0;
    }
    phi.phi_unchecked(dd.powi(-2)).powf(q / 2.0)
}

fn chart_point(chart: &Chart, yt: &Point, rho: f64) -> Point {
    chart.from_local(yt, chart.psi(yt) + rho)
}

/// δ_D at chart height ρ above ỹ, extrapolated linearly from ±h when |ρ| < h.
pub(super) fn chart_dist(domain: &Domain, chart: &Chart, yt: &Point, rho: f64, h: f64) -> f64 {
    if rho.abs() >= h {
        return domain.dist_to_boundary(&chart_point(chart, yt, rho));
    }
    domain.dist_to_boundary(&chart_point(chart, yt, h.copysign(rho))) * rho.abs() / h
}

/// ∫ φ(δ_D(y)⁻²)^{q/2} over {|ỹ| < s, |ρ_ξ(y)| < M r} in CS_ξ, on both sides of ∂D.
/// The map (ỹ, y_d) ↦ (ỹ, ρ) has unit Jacobian, so the inner integral runs over ρ.
#[allow(clippy::too_many_arguments)]
pub fn lemma31_check(
    domain: &Domain,
    phi: &BernsteinFunction,
    xi: &Point,
    s: f64,
    r: f64,
    q: f64,
    m: f64,
    lambda0: f64,
    delta: f64,
) -> Result<SlabIntegral> {
    let (r_lip, _) = domain.lipschitz();
    if !(s > 0.0 && s <= r_lip / 2.0) {
        return Err(LabError::Domain(format!("s = {s} must lie in (0, R_Lip/2] = (0, {}]", r_lip / 2.0)));
    }
    let r_max = (r_lip.min(lambda0.powf(-0.5))) / (2.0 * m);
    if !(r > 0.0 && r <= r_max) || m < 1.0 {
        return Err(LabError::Domain(format!("r = {r} must lie in (0, {r_max}] with M >= 1")));
    }
    let q_max = if delta >= 1.0 { f64::INFINITY } else { 1.0 / (1.0 - delta) };
    if !(q >= 1.0 && q < q_max) {
        return Err(LabError::Domain(format!("q = {q} must lie in [1, {q_max})")));
    }
    let chart = domain.chart(xi)?;
    let d = domain.dim();
    let lhs = outer_average(d - 1, s, |yt| {
        integrate_across_zero(|rho| weight(phi, chart_dist(domain, &chart, yt, rho, LINEAR_LAYER * r), q), -m * r, m * r)
    })?;
    let ratio = lhs / (r * s.powi(d as i32 - 1) * phi.phi_unchecked(r.powi(-2)).powf(q / 2.0));
    Ok(SlabIntegral { r, lhs, ratio })
}

/// ∫_{B(ξ,r)} φ(δ_D(y)⁻²)^{1/2} dy and its ratio to r^d φ(r⁻²)^{1/2}.
pub fn corollary32(domain: &Domain, phi: &BernsteinFunction, xi: &Point, r: f64) -> Result<SlabIntegral> {
    if !(r > 0.0) {
        return Err(LabError::Domain(format!("r must be positive, got {r}")));
    }
    let chart = domain.chart(xi)?;
    let d = domain.dim();
    let lhs = outer_average(d - 1, r, |yt| {
        // |ỹ|² + (ψ(ỹ) + ρ)² < r²
        let w2 = r * r - yt.norm_sq();
        if w2 <= 0.0 {
            return Ok(0.0);
        }
        let w = w2.sqrt();
        let psi = chart.psi(yt);
        if !psi.is_finite() {
            return Ok(0.0);
        }
        integrate_across_zero(|rho| weight(phi, chart_dist(domain, &chart, yt, rho, LINEAR_LAYER * r), 1.0), -psi - w, -psi + w)
    })?;
    let ratio = lhs / (r.powi(d as i32) * phi.phi_unchecked(r.powi(-2)).sqrt());
    Ok(SlabIntegral { r, lhs, ratio })
}

/// Closed form of the slab integral ratio for the stable family over a flat boundary:
/// ω_{d−1} · 2 M^{1−qα/2} / (1 − qα/2).
pub fn stable_flat_slab_ratio(d: usize, alpha: f64, q: f64, m: f64) -> f64 {
    let e = q * alpha / 2.0;
    unit_ball_volume(d - 1) * 2.0 * m.powf(1.0 - e) / (1.0 - e)
}
