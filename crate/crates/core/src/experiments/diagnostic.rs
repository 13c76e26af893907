//! Quadrature of the two pieces of the Poisson-kernel upper bound for |u_f(x) − A(ξ)|:
//! the part of the exterior within 2|x−ξ| of ξ and the part between 2|x−ξ| and r₀.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bernstein::BernsteinFunction;
use crate::error::{LabError, Result};
use crate::exterior::ExteriorFunction;
use crate::geometry::{Domain, Profile, Shape};
use crate::point::Point;
use crate::quad::gauss_legendre;

/// Gauss–Legendre nodes per radial panel.
const PANEL_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSums {
    /// ∫ over {y ∉ D̄, |y−ξ| < 2|x−ξ|}.
    pub near: f64,
    /// ∫ over {y ∉ D̄, 2|x−ξ| ≤ |y−ξ| < r₀}.
    pub intermediate: f64,
}

/// Directions and weights covering the unit sphere in d = 2 or 3.
fn sphere_rule(d: usize, angles: usize) -> Result<Vec<(Point, f64)>> {
    match d {
        2 => Ok((0..angles)
            .map(|j| {
                let t = 2.0 * PI * (j as f64 + 0.5) / angles as f64;
                (Point::from_slice(&[t.cos(), t.sin()]), 2.0 * PI / angles as f64)
            })
            .collect()),
        3 => {
            let polar = (angles / 4).max(8);
            let mut out = Vec::with_capacity(polar * angles);
            for (c, w) in gauss_legendre(polar, -1.0, 1.0) {
                let s = (1.0 - c * c).sqrt();
                for j in 0..angles {
                    let t = 2.0 * PI * (j as f64 + 0.5) / angles as f64;
                    out.push((Point::from_slice(&[s * t.cos(), s * t.sin(), c]), w * 2.0 * PI / angles as f64));
                }
            }
            Ok(out)
        }
        _ => Err(LabError::UnsupportedShape(format!("diagnostic quadrature in d = {d}"))),
    }
}

/// Largest ρ with |v + ρω| ≤ R, for |v| < R.
fn sphere_exit(v: &Point, w: &Point, radius: f64) -> f64 {
    let b = v.dot(w);
    (b * b - v.norm_sq() + radius * radius).max(0.0).sqrt() - b
}

/// Distance from x ∈ D to ∂D along ω, assuming D is convex; `None` if beyond `cap`.
fn boundary_exit(domain: &Domain, x: &Point, w: &Point, delta: f64, cap: f64) -> Option<f64> {
    let mut lo = delta;
    let mut hi = delta;
    while domain.signed_distance(&(*x + *w * hi)) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 2.0 * cap {
            return None;
        }
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if domain.signed_distance(&(*x + *w * mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// ∫_a^b g on panels [a + (b−a)2^{−k−1}, a + (b−a)2^{−k}], graded towards a.
fn graded<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut g: F) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let unit = gauss_legendre(PANEL_NODES, 0.0, 1.0);
    let mut total = 0.0;
    let mut hi = b;
    for k in 0..=panels {
        let lo = if k == panels { a } else { a + (b - a) * 0.5f64.powi(k as i32 + 1) };
        let h = hi - lo;
        for &(t, w) in &unit {
            total += w * h * g(lo + h * t);
        }
        hi = lo;
    }
    total
}

fn convex(domain: &Domain) -> bool {
    match &domain.shape {
        Shape::Ball { .. } => true,
        Shape::Graph { profile, .. } => matches!(profile, Profile::Flat | Profile::SmoothedCone { .. }),
        Shape::Localized(_) => true,
    }
}

/// Both sums at x, normalised by φ(δ_D(x)⁻²)^{1/2} as in the bound, with integrand
/// φ(δ_D(y)⁻²)^{1/2} φ′(|x−y|⁻²)/(φ(|x−y|⁻²)|x−y|^{d+2}) |f(y) − A|, integrated in polar
/// coordinates about x.
#[allow(clippy::too_many_arguments)]
pub fn diagnostic_sums(
    domain: &Domain,
    phi: &BernsteinFunction,
    f: &ExteriorFunction,
    a_xi: f64,
    xi: &Point,
    x: &Point,
    r0: f64,
    angles: usize,
    panels: usize,
) -> Result<DiagnosticSums> {
    if !convex(domain) {
        return Err(LabError::UnsupportedShape(format!("diagnostic sums need a convex domain, got {}", domain.describe())));
    }
    let delta = domain.signed_distance(x);
    let r = x.dist(xi);
    if !(delta > 0.0) || !(8.0 * r < r0) {
        return Err(LabError::Domain(format!("x must lie in D within r0/8 of xi (|x-xi| = {r}, r0 = {r0})")));
    }
    let d = domain.dim();
    let rule = sphere_rule(d, angles)?;
    let v = *x - *xi;
    let integrand = |w: &Point, rho: f64| -> f64 {
        let y = *x + *w * rho;
        let dy = domain.dist_to_boundary(&y);
        if !(dy > 0.0) {
            return 0.0;
        }
        let l = rho.powi(-2);
        let k = phi.phi_prime_unchecked(l) / (phi.phi_unchecked(l) * rho.powi(d as i32 + 2));
        rho.powi(d as i32 - 1) * phi.phi_unchecked(dy.powi(-2)).sqrt() * k * (f.eval(&y) - a_xi).abs()
    };
    let (mut near, mut inter) = (0.0, 0.0);
    for (w, wt) in &rule {
        let rho3 = sphere_exit(&v, w, r0);
        let Some(rho_b) = boundary_exit(domain, x, w, delta, rho3) else { continue };
        if rho_b >= rho3 {
            continue;
        }
        let rho2 = sphere_exit(&v, w, 2.0 * r);
        near += wt * graded(rho_b, rho2, panels, |t| integrand(w, t));
        inter += wt * graded(rho_b.max(rho2), rho3, panels, |t| integrand(w, t));
    }
    let norm = phi.phi_unchecked(delta.powi(-2)).sqrt();
    Ok(DiagnosticSums { near: near / norm, intermediate: inter / norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_rule_handles_endpoint_singularity() {
        // ∫_0^1 t^{-1/2} dt = 2
        let v = graded(0.0, 1.0, 60, |t| t.powf(-0.5));
        assert!((v - 2.0).abs() < 1e-7, "{v}");
        assert!((graded(1.0, 3.0, 10, |t| t * t) - 26.0 / 3.0).abs() < 1e-12);
        assert_eq!(graded(2.0, 1.0, 10, |_| 1.0), 0.0);
    }

    #[test]
    fn sphere_rules_have_full_measure() {
        let s2: f64 = sphere_rule(2, 64).unwrap().iter().map(|p| p.1).sum();
        assert!((s2 - 2.0 * PI).abs() < 1e-12);
        let s3: f64 = sphere_rule(3, 64).unwrap().iter().map(|p| p.1).sum();
        assert!((s3 - 4.0 * PI).abs() < 1e-12);
        assert!(sphere_rule(4, 8).is_err());
    }

    #[test]
    fn ray_exits() {
        let dom = Domain::unit_ball(2);
        let x = Point::from_slice(&[0.5, 0.0]);
        let w = Point::from_slice(&[1.0, 0.0]);
        let b = boundary_exit(&dom, &x, &w, 0.5, 10.0).unwrap();
        assert!((b - 0.5).abs() < 1e-12);
        let v = Point::from_slice(&[0.1, 0.0]);
        assert!((sphere_exit(&v, &Point::from_slice(&[0.0, 1.0]), 1.0) - 0.99f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sums_vanish_for_data_equal_to_the_limit() {
        let dom = Domain::unit_ball(2);
        let phi = BernsteinFunction::stable(1.0).unwrap();
        let xi = Point::unit(2, 0);
        let f = ExteriorFunction::constant(0.7);
        let x = xi * (1.0 - 1e-3);
        let s = diagnostic_sums(&dom, &phi, &f, 0.7, &xi, &x, 0.5, 64, 40).unwrap();
        assert_eq!(s.near, 0.0);
        assert_eq!(s.intermediate, 0.0);
        let g = ExteriorFunction::constant(1.7);
        let s = diagnostic_sums(&dom, &phi, &g, 0.7, &xi, &x, 0.5, 64, 40).unwrap();
        assert!(s.near > 0.0 && s.intermediate > 0.0);
    }
}
