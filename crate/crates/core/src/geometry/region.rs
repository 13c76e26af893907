//! Tangential approach regions T_{γ,φ,a}(ξ), T′_{γ,φ}(ξ) and Stolz sets S_M(ξ).

use serde::{Deserialize, Serialize};

use super::domain::Domain;
use crate::bernstein::BernsteinFunction;
use crate::error::{LabError, Result};
use crate::point::{orthonormal_complement, Point};
use crate::qmc::Halton;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    T,
    TPrime,
    Stolz,
}

/// Approach regions at a boundary point ξ.
#[derive(Debug, Clone)]
pub struct ApproachRegion {
    pub domain: Domain,
    pub phi: BernsteinFunction,
    pub xi: Point,
    pub gamma: f64,
    pub a: f64,
    pub m_stolz: f64,
}

/// Log-space sides of the region inequalities at a point.
#[derive(Debug, Clone, Copy)]
pub struct RegionSides {
    /// (γ+d) ln|x−ξ| + ½ ln φ(|x−ξ|⁻²)
    pub lhs: f64,
    /// d ln δ + ½ ln φ(δ⁻²)
    pub rhs_prime: f64,
    /// ln a + (d+2) ln δ + (3/2) ln φ(δ⁻²) − ln φ′(δ⁻²)
    pub rhs_t: f64,
}

impl ApproachRegion {
    pub fn new(domain: Domain, phi: BernsteinFunction, xi: Point, gamma: f64, a: f64, m_stolz: f64) -> Result<Self> {
        if !(gamma > 0.0 && a > 0.0 && m_stolz > 1.0) {
            return Err(LabError::Parameter(format!(
                "region needs gamma > 0, a > 0, M > 1 (gamma={gamma}, a={a}, M={m_stolz})"
            )));
        }
        domain.inward_normal(&xi)?;
        Ok(ApproachRegion { domain, phi, xi, gamma, a, m_stolz })
    }

    fn d(&self) -> f64 {
        self.domain.dim() as f64
    }

    /// Left side of the T and T′ inequalities as a function of r = |x − ξ|.
    pub fn lhs_at(&self, r: f64) -> f64 {
        (self.gamma + self.d()) * r.ln() + 0.5 * self.phi.phi_unchecked(r.powi(-2)).ln()
    }

    /// Right side of the T′ inequality as a function of δ.
    pub fn rhs_prime_at(&self, delta: f64) -> f64 {
        self.d() * delta.ln() + 0.5 * self.phi.phi_unchecked(delta.powi(-2)).ln()
    }

    /// Right side of the T inequality, written as the T′ side plus ln a + ln(φ/(λφ′))
    /// at λ = δ⁻², so that the chain T′ ⊂ T survives rounding.
    pub fn rhs_t_at(&self, delta: f64) -> f64 {
        let l = delta.powi(-2);
        let p = self.phi.phi_unchecked(l);
        let dp = self.phi.phi_prime_unchecked(l);
        self.rhs_prime_at(delta) + self.a.ln() + (p / (l * dp)).ln()
    }

    pub fn sides(&self, x: &Point) -> Option<RegionSides> {
        let delta = self.domain.signed_distance(x);
        let r = x.dist(&self.xi);
        if !(delta > 0.0) || r == 0.0 {
            return None;
        }
        Some(RegionSides { lhs: self.lhs_at(r), rhs_prime: self.rhs_prime_at(delta), rhs_t: self.rhs_t_at(delta) })
    }

    /// Membership predicate; points outside D are in no region.
    pub fn in_region(&self, x: &Point, which: RegionKind) -> bool {
        let delta = self.domain.signed_distance(x);
        if !(delta > 0.0) {
            return false;
        }
        let r = x.dist(&self.xi);
        match which {
            RegionKind::Stolz => {
                r <= self.m_stolz * delta && r < self.m_stolz.powf(-self.d() / self.gamma)
            }
            RegionKind::TPrime | RegionKind::T => {
                if r == 0.0 {
                    return false;
                }
                let lhs = self.lhs_at(r);
                if which == RegionKind::TPrime {
                    lhs <= self.rhs_prime_at(delta)
                } else {
                    lhs <= self.rhs_t_at(delta)
                }
            }
        }
    }

    /// Points x = ξ + r(sin ψ · n + cos ψ · τ), ψ ∈ [0, π/2], for tangent τ.
    fn arc_point(&self, r: f64, psi: f64, n: &Point, tau: &Point) -> Point {
        self.xi + (*n * psi.sin() + *tau * psi.cos()) * r
    }

    /// For each r_k, the point at distance r_k from ξ on the edge of T (the smallest
    /// δ_D with x ∈ T along the arc from the tangent direction to the normal), plus a
    /// companion point on the same arc with half that δ_D, which is outside T.
    pub fn tangential_curve(&self, radii: &[f64], normal_ray: bool) -> Result<Vec<CurvePoint>> {
        let n = self.domain.inward_normal(&self.xi)?;
        let tau = orthonormal_complement(&n)[0];
        let (big_r, _) = self.domain.c11();
        let mut out = Vec::with_capacity(radii.len());
        for &r in radii {
            if !(r > 0.0 && r < big_r / 8.0) {
                return Err(LabError::Domain(format!("curve radius {r} must lie in (0, R/8) = (0, {})", big_r / 8.0)));
            }
            if normal_ray {
                let x = self.xi + n * r;
                out.push(CurvePoint { r, x, delta: self.domain.dist_to_boundary(&x), companion: None });
                continue;
            }
            let margin = |psi: f64| -> f64 {
                let x = self.arc_point(r, psi, &n, &tau);
                let delta = self.domain.signed_distance(&x);
                if delta <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                self.rhs_t_at(delta) - self.lhs_at(r)
            };
            let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_2);
            if margin(hi) < 0.0 {
                return Err(LabError::Bisection(format!("normal point at r={r} is not in T")));
            }
            if margin(lo) >= 0.0 {
                return Err(LabError::Bisection(format!("no sign change along the arc at r={r}")));
            }
            while hi - lo > 1e-13 * hi {
                let mid = 0.5 * (lo + hi);
                if margin(mid) >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let x = self.arc_point(r, hi, &n, &tau);
            let delta = self.domain.dist_to_boundary(&x);
            // companion: bisection on δ_D(arc(ψ)) = δ/2
            let target = 0.5 * delta;
            let (mut a, mut b) = (0.0f64, hi);
            while b - a > 1e-13 * b {
                let mid = 0.5 * (a + b);
                if self.domain.signed_distance(&self.arc_point(r, mid, &n, &tau)) >= target {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            let companion = self.arc_point(r, b, &n, &tau);
            out.push(CurvePoint { r, x, delta, companion: Some(companion) });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: f64,
    pub x: Point,
    pub delta: f64,
    pub companion: Option<Point>,
}

/// Counts from a containment scan, with any chain violations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub sampled: usize,
    pub in_stolz: usize,
    pub in_t_prime: usize,
    pub in_t: usize,
    /// Points in T but not in T′.
    pub t_minus_t_prime: usize,
    pub violations: Vec<(Point, String)>,
    pub example_t_minus_t_prime: Option<Point>,
}

impl ContainmentReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks S_M ⊂ T′ ⊂ T on `n` quasi-random points of D near ξ. Radii are spread
/// log-uniformly over [10⁻⁴ r_max, r_max] with r_max = R_Lip, directions over the
/// inward half-sphere.
pub fn containment_check(reg: &ApproachRegion, n: usize) -> Result<ContainmentReport> {
    if n == 0 {
        return Err(LabError::Parameter("containment check needs at least one point".into()));
    }
    let d = reg.domain.dim();
    let normal = reg.domain.inward_normal(&reg.xi)?;
    let (r_max, _) = reg.domain.lipschitz();
    let h = Halton::new(d + 1);
    let mut u = vec![0.0; d + 1];
    let mut rep = ContainmentReport {
        sampled: 0,
        in_stolz: 0,
        in_t_prime: 0,
        in_t: 0,
        t_minus_t_prime: 0,
        violations: Vec::new(),
        example_t_minus_t_prime: None,
    };
    let mut i = 0u64;
    while rep.sampled < n {
        h.fill(i, &mut u);
        i += 1;
        if i > 1000 * n as u64 {
            return Err(LabError::DegenerateRegion("could not sample interior points near xi".into()));
        }
        let mut v = Point::zeros(d);
        for k in 0..d {
            v[k] = 2.0 * u[k] - 1.0;
        }
        let len = v.norm();
        if len > 1.0 || len < 1e-3 {
            continue;
        }
        let mut dir = v * (1.0 / len);
        if dir.dot(&normal) < 0.0 {
            dir = -dir;
        }
        let r = r_max * 10f64.powf(-4.0 * u[d]);
        let x = reg.xi + dir * r;
        if !reg.domain.contains(&x) {
            continue;
        }
        rep.sampled += 1;
        let s = reg.in_region(&x, RegionKind::Stolz);
        let tp = reg.in_region(&x, RegionKind::TPrime);
        let t = reg.in_region(&x, RegionKind::T);
        rep.in_stolz += s as usize;
        rep.in_t_prime += tp as usize;
        rep.in_t += t as usize;
        if t && !tp {
            rep.t_minus_t_prime += 1;
            rep.example_t_minus_t_prime.get_or_insert(x);
        }
        if s && !tp {
            rep.violations.push((x, "in S_M but not in T'".into()));
        }
        if tp && !t {
            rep.violations.push((x, "in T' but not in T".into()));
        }
    }
    Ok(rep)
}

/// Minimum over consecutive grid points of the increments of r ↦ r^d φ(r⁻²)^{1/2},
/// in log space; nonnegative when the map is nondecreasing on the grid.
pub fn stolz_profile_min_increment(phi: &BernsteinFunction, d: usize, radii: &[f64]) -> f64 {
    let v: Vec<f64> = radii.iter().map(|&r| d as f64 * r.ln() + 0.5 * phi.phi_unchecked(r.powi(-2)).ln()).collect();
    v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Smallest x_d with x in T for the stable half-space at distance r:
/// r^{γ+d−α/2} · (α/2)/a ≤ x_d^{d−α/2}.
pub fn stable_halfspace_threshold(alpha: f64, d: usize, gamma: f64, a: f64, r: f64) -> f64 {
    let h = alpha / 2.0;
    let d = d as f64;
    (r.powf(gamma + d - h) * h / a).powf(1.0 / (d - h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::Family;

    fn stable_halfspace(alpha: f64, gamma: f64, a: f64) -> ApproachRegion {
        ApproachRegion::new(
            Domain::half_space(2),
            BernsteinFunction::stable(alpha).unwrap(),
            Point::zeros(2),
            gamma,
            a,
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn halfspace_threshold_matches_curve() {
        let reg = stable_halfspace(1.0, 0.3, 1.0);
        let radii: Vec<f64> = (4..10).map(|k| 2f64.powi(-k)).collect();
        let curve = reg.tangential_curve(&radii, false).unwrap();
        for cp in &curve {
            let want = stable_halfspace_threshold(1.0, 2, 0.3, 1.0, cp.r);
            assert!((cp.x[1] / want - 1.0).abs() < 1e-9, "{} vs {want}", cp.x[1]);
            // 2^{-2/3} r^{1.2}
            assert!((want / (cp.r.powf(1.2) * 2f64.powf(-2.0 / 3.0)) - 1.0).abs() < 1e-12);
            assert!(!reg.in_region(cp.companion.as_ref().unwrap(), RegionKind::T));
            assert!(reg.in_region(&cp.x, RegionKind::T));
        }
        // with a = α/2 the region is exactly |x − ξ|^{1+γ/(d−α/2)} ≤ x_d
        let reg = stable_halfspace(1.0, 0.3, 0.5);
        for cp in reg.tangential_curve(&radii, false).unwrap() {
            let ratio = cp.x[1] / cp.r.powf(1.0 + 0.3 / 1.5);
            assert!((ratio - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn normal_ray_is_trivial() {
        let reg = stable_halfspace(1.0, 0.3, 1.0);
        let c = reg.tangential_curve(&[0.01], true).unwrap();
        assert!((c[0].x[1] - 0.01).abs() < 1e-15 && c[0].x[0] == 0.0);
        for s in [1e-4, 1e-3] {
            let x = Point::from_slice(&[0.0, s]);
            for k in [RegionKind::Stolz, RegionKind::TPrime, RegionKind::T] {
                assert!(reg.in_region(&x, k));
            }
        }
    }

    #[test]
    fn geometric_log_form() {
        let alpha = 1.0;
        let gamma = 0.3;
        let reg = ApproachRegion::new(
            Domain::half_space(2),
            BernsteinFunction::geometric(alpha).unwrap(),
            Point::zeros(2),
            gamma,
            1.0,
            2.0,
        )
        .unwrap();
        let h = Halton::new(2);
        let mut u = [0.0; 2];
        for i in 0..4000 {
            h.fill(i, &mut u);
            let x = Point::from_slice(&[(u[0] - 0.5) * 0.2, u[1] * 0.1 + 1e-9]);
            let r = x.norm();
            let xd = x[1];
            let lhs = (gamma + 2.0) * r.ln() + 0.5 * (r.powf(-alpha)).ln_1p().ln();
            let rhs = (2.0 / alpha).ln()
                + xd.powf(alpha).ln_1p()
                + 2.0 * xd.ln()
                + 1.5 * (xd.powf(-alpha)).ln_1p().ln();
            if (lhs - rhs).abs() > 1e-9 {
                assert_eq!(reg.in_region(&x, RegionKind::T), lhs <= rhs, "{x:?}");
            }
        }
    }

    #[test]
    fn chain_holds_for_all_families() {
        for fam in Family::ALL {
            let phi = fam.default_params().build().unwrap();
            let d = if phi.dimension_ok(2) { 2 } else { 3 };
            let mut xi = vec![0.0; d];
            xi[d - 1] = -1.0;
            let reg = ApproachRegion::new(Domain::unit_ball(d), phi, Point::from_slice(&xi), 0.3, 1.0, 2.0).unwrap();
            let rep = containment_check(&reg, 2000).unwrap();
            assert!(rep.holds(), "{fam}: {:?}", rep.violations.first());
            assert!(rep.in_stolz > 0);
        }
    }

    #[test]
    fn geometric_t_strictly_larger() {
        let reg = ApproachRegion::new(
            Domain::half_space(2),
            BernsteinFunction::geometric(1.0).unwrap(),
            Point::zeros(2),
            0.3,
            1.0,
            2.0,
        )
        .unwrap();
        let rep = containment_check(&reg, 4000).unwrap();
        assert!(rep.holds());
        assert!(rep.t_minus_t_prime > 0);
    }

    #[test]
    fn stolz_profile_increasing() {
        let radii: Vec<f64> = (0..200).map(|k| 1e-4 * 10f64.powf(k as f64 / 50.0)).collect();
        for fam in Family::ALL {
            let phi = fam.default_params().build().unwrap();
            assert!(stolz_profile_min_increment(&phi, 2, &radii) >= 0.0, "{fam}");
        }
    }
}
