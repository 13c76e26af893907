//! Computable domains: balls, box-clipped radial graphs and localized openings.

use serde::{Deserialize, Serialize};

use super::profile::Profile;
use crate::error::{LabError, Result};
use crate::point::{orthonormal_complement, Point};

/// Rounding scale divisor for localization (fillet radius r/(2L)).
pub const LOCALIZE_L: f64 = 10.0;

/// Default half-side of the box clipping graph domains.
pub const GRAPH_HALF_SIDE: f64 = 10.0;

/// A closed convex piece used to build localized sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Convex {
    Ball { center: Point, radius: f64 },
    /// {x : x·normal > offset}
    HalfSpace { normal: Point, offset: f64 },
}

impl Convex {
    /// Distance to the boundary, positive inside.
    fn signed(&self, x: &Point) -> f64 {
        match self {
            Convex::Ball { center, radius } => radius - x.dist(center),
            Convex::HalfSpace { normal, offset } => x.dot(normal) - offset,
        }
    }

    fn erode(&self, e: f64) -> Convex {
        match *self {
            Convex::Ball { center, radius } => Convex::Ball { center, radius: radius - e },
            Convex::HalfSpace { normal, offset } => Convex::HalfSpace { normal, offset: offset + e },
        }
    }

    fn project_boundary(&self, x: &Point) -> Point {
        match self {
            Convex::Ball { center, radius } => {
                let v = *x - *center;
                let n = v.norm();
                if n == 0.0 {
                    *center + Point::unit(x.dim(), x.dim() - 1) * *radius
                } else {
                    *center + v * (radius / n)
                }
            }
            Convex::HalfSpace { normal, offset } => *x - *normal * (x.dot(normal) - offset),
        }
    }

    fn project_closed(&self, x: &Point) -> Point {
        if self.signed(x) >= 0.0 {
            *x
        } else {
            self.project_boundary(x)
        }
    }
}

/// Closest point to `x` on the intersection of two convex sets whose boundaries are
/// spheres or planes; the candidate set is the two single projections and the rim
/// ∂A ∩ ∂B, a (d−2)-sphere.
fn project_intersection(a: &Convex, b: &Convex, x: &Point) -> Point {
    const SLACK: f64 = 1e-12;
    if a.signed(x) >= 0.0 && b.signed(x) >= 0.0 {
        return *x;
    }
    let pa = a.project_closed(x);
    if b.signed(&pa) >= -SLACK {
        return pa;
    }
    let pb = b.project_closed(x);
    if a.signed(&pb) >= -SLACK {
        return pb;
    }
    let (center, radius, normal) = match (a, b) {
        (Convex::Ball { center: c1, radius: r1 }, Convex::Ball { center: c2, radius: r2 }) => {
            let axis = *c2 - *c1;
            let dd = axis.norm();
            let u = axis * (1.0 / dd);
            let t = (dd * dd + r1 * r1 - r2 * r2) / (2.0 * dd);
            (*c1 + u * t, (r1 * r1 - t * t).max(0.0).sqrt(), u)
        }
        (Convex::Ball { center, radius }, Convex::HalfSpace { normal, offset })
        | (Convex::HalfSpace { normal, offset }, Convex::Ball { center, radius }) => {
            let h = center.dot(normal) - offset;
            (*center - *normal * h, (radius * radius - h * h).max(0.0).sqrt(), *normal)
        }
        // two half-spaces never occur in localization
        (Convex::HalfSpace { .. }, Convex::HalfSpace { .. }) => return pa,
    };
    let xh = *x - normal * (*x - center).dot(&normal);
    let v = xh - center;
    let n = v.norm();
    let dir = if n > 0.0 { v * (1.0 / n) } else { orthonormal_complement(&normal)[0] };
    center + dir * radius
}

/// U = (E ⊖ ε) ⊕ ε for the convex core E = A ∩ B(ξ, ρ): a C^{1,1} set whose corner
/// along ∂A ∩ ∂B(ξ,ρ) is rounded with radius ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localized {
    pub core: Convex,
    pub xi: Point,
    pub rho: f64,
    pub eps: f64,
}

impl Localized {
    fn cap(&self) -> Convex {
        Convex::Ball { center: self.xi, radius: self.rho }
    }

    fn signed(&self, x: &Point) -> f64 {
        let (a, b) = (self.core, self.cap());
        let (ae, be) = (a.erode(self.eps), b.erode(self.eps));
        if ae.signed(x) >= 0.0 && be.signed(x) >= 0.0 {
            a.signed(x).min(b.signed(x))
        } else {
            let p = project_intersection(&ae, &be, x);
            self.eps - x.dist(&p)
        }
    }

    fn project(&self, x: &Point) -> Point {
        let (a, b) = (self.core, self.cap());
        let (ae, be) = (a.erode(self.eps), b.erode(self.eps));
        if ae.signed(x) >= 0.0 && be.signed(x) >= 0.0 {
            if a.signed(x) <= b.signed(x) {
                a.project_boundary(x)
            } else {
                b.project_boundary(x)
            }
        } else {
            let p = project_intersection(&ae, &be, x);
            let v = *x - p;
            p + v * (self.eps / v.norm())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Shape {
    Ball { center: Point, radius: f64 },
    /// {x : ψ(x̃) < x_d < h, |x̃_i| < h}
    Graph { profile: Profile, half_side: f64 },
    Localized(Box<Localized>),
}

/// A bounded open set in R^d with exact or iterative distance and projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub shape: Shape,
    pub dim: usize,
}

/// Local orthonormal frame at a boundary point with the boundary written as a graph.
#[derive(Debug, Clone)]
pub struct Chart {
    pub origin: Point,
    pub tangents: Vec<Point>,
    pub normal: Point,
    kind: ChartKind,
}

#[derive(Debug, Clone)]
enum ChartKind {
    Ball { radius: f64 },
    Graph { profile: Profile, base: Point, base_height: f64 },
}

impl Chart {
    /// (ỹ, y_d) coordinates of x.
    pub fn to_local(&self, x: &Point) -> (Point, f64) {
        let v = *x - self.origin;
        let mut yt = Point::zeros(self.tangents.len());
        for (i, t) in self.tangents.iter().enumerate() {
            yt[i] = v.dot(t);
        }
        (yt, v.dot(&self.normal))
    }

    pub fn from_local(&self, yt: &Point, yd: f64) -> Point {
        let mut x = self.origin + self.normal * yd;
        for (i, t) in self.tangents.iter().enumerate() {
            x = x + *t * yt[i];
        }
        x
    }

    /// Boundary height ψ_ξ(ỹ); the domain is locally {y_d > ψ_ξ(ỹ)}.
    pub fn psi(&self, yt: &Point) -> f64 {
        match &self.kind {
            ChartKind::Ball { radius } => {
                let s2 = yt.norm_sq();
                if s2 >= radius * radius {
                    f64::INFINITY
                } else {
                    radius - (radius * radius - s2).sqrt()
                }
            }
            ChartKind::Graph { profile, base, base_height } => profile.g((*base + *yt).norm()) - base_height,
        }
    }
}

impl Domain {
    pub fn ball(center: Point, radius: f64) -> Result<Domain> {
        if !(radius > 0.0 && radius.is_finite()) || center.dim() < 2 {
            return Err(LabError::Parameter(format!("ball needs d >= 2 and radius > 0, got {radius}")));
        }
        Ok(Domain { shape: Shape::Ball { center, radius }, dim: center.dim() })
    }

    pub fn unit_ball(d: usize) -> Domain {
        Domain::ball(Point::zeros(d), 1.0).expect("valid")
    }

    pub fn graph(d: usize, profile: Profile, half_side: f64) -> Result<Domain> {
        profile.validate().map_err(LabError::Parameter)?;
        if !(2..=crate::point::MAX_DIM).contains(&d) || !(half_side > 0.0) {
            return Err(LabError::Parameter(format!("graph needs 2 <= d <= 4 and half_side > 0 (d={d})")));
        }
        Ok(Domain { shape: Shape::Graph { profile, half_side }, dim: d })
    }

    /// Upper half-space clipped to the default box.
    pub fn half_space(d: usize) -> Domain {
        Domain::graph(d, Profile::Flat, GRAPH_HALF_SIDE).expect("valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn describe(&self) -> String {
        match &self.shape {
            Shape::Ball { radius, .. } => format!("ball(d={}, radius={radius})", self.dim),
            Shape::Graph { profile, half_side } => format!("graph(d={}, {profile:?}, box={half_side})", self.dim),
            Shape::Localized(l) => format!("localized(d={}, rho={}, eps={})", self.dim, l.rho, l.eps),
        }
    }

    /// Distance from x to the graph surface and the nearest surface point's x̃.
    fn graph_nearest(profile: &Profile, x: &Point) -> (f64, Point) {
        let xt = x.tangential();
        let xd = x.last();
        if profile.is_flat() {
            return (xd.abs(), xt);
        }
        let rho = xt.norm();
        let dir = if rho > 0.0 { xt * (1.0 / rho) } else { Point::unit(xt.dim(), 0) };
        let d0 = (xd - profile.g(rho)).abs();
        if d0 == 0.0 {
            return (0.0, xt);
        }
        // The closest point lies in the plane spanned by x̃ and e_d.
        let h = |s: f64| {
            let dz = xd - profile.g(s.abs());
            (rho - s) * (rho - s) + dz * dz
        };
        const N: usize = 64;
        let (lo, hi) = (rho - d0, rho + d0);
        let step = (hi - lo) / N as f64;
        let mut best = (0usize, f64::INFINITY);
        for k in 0..=N {
            let v = h(lo + step * k as f64);
            if v < best.1 {
                best = (k, v);
            }
        }
        let mut a = lo + step * (best.0 as f64 - 1.0);
        let mut b = lo + step * (best.0 as f64 + 1.0);
        let gr = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - gr * (b - a);
        let mut e = a + gr * (b - a);
        let (mut hc, mut he) = (h(c), h(e));
        for _ in 0..200 {
            if (b - a).abs() <= 1e-15 * (1.0 + rho.abs() + d0) {
                break;
            }
            if hc < he {
                b = e;
                e = c;
                he = hc;
                c = b - gr * (b - a);
                hc = h(c);
            } else {
                a = c;
                c = e;
                hc = he;
                e = a + gr * (b - a);
                he = h(e);
            }
        }
        let s = 0.5 * (a + b);
        (h(s).sqrt().min(d0), dir * s)
    }

    fn graph_in_box(&self, x: &Point, h: f64) -> bool {
        x.last() < h && x.tangential().as_slice().iter().all(|v| v.abs() < h)
    }

    /// Distance to ∂D, positive inside D and negative outside.
    pub fn signed_distance(&self, x: &Point) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => radius - x.dist(center),
            Shape::Graph { profile, half_side } => {
                let h = *half_side;
                let above = x.last() > profile.g(x.tangential().norm());
                let (gd, _) = Self::graph_nearest(profile, x);
                if !above {
                    return -gd;
                }
                if self.graph_in_box(x, h) {
                    let mut d = gd.min(h - x.last());
                    for v in x.tangential().as_slice() {
                        d = d.min(h - v.abs());
                    }
                    d
                } else {
                    // outside the clipping box: Euclidean excess over the box faces
                    let mut s = (x.last() - h).max(0.0).powi(2);
                    for v in x.tangential().as_slice() {
                        s += (v.abs() - h).max(0.0).powi(2);
                    }
                    -s.sqrt()
                }
            }
            Shape::Localized(l) => l.signed(x),
        }
    }

    /// δ_D(x): unsigned distance to the boundary.
    pub fn dist_to_boundary(&self, x: &Point) -> f64 {
        self.signed_distance(x).abs()
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.signed_distance(x) > 0.0
    }

    /// Whether an exterior point left a graph domain through the clipping box rather
    /// than across the graph.
    pub fn beyond_clip(&self, z: &Point) -> bool {
        match &self.shape {
            Shape::Graph { profile, half_side } => {
                z.last() > profile.g(z.tangential().norm()) && !self.graph_in_box(z, *half_side)
            }
            _ => false,
        }
    }

    /// Nearest boundary point (for graphs, on the graph surface).
    pub fn project(&self, x: &Point) -> Point {
        match &self.shape {
            Shape::Ball { center, radius } => Convex::Ball { center: *center, radius: *radius }.project_boundary(x),
            Shape::Graph { profile, .. } => {
                let (_, yt) = Self::graph_nearest(profile, x);
                yt.extend(profile.g(yt.norm()))
            }
            Shape::Localized(l) => l.project(x),
        }
    }

    /// Unit inward normal at a boundary point.
    pub fn inward_normal(&self, xi: &Point) -> Result<Point> {
        self.check_boundary(xi)?;
        match &self.shape {
            Shape::Ball { center, .. } => Ok((*center - *xi).normalized()),
            Shape::Graph { profile, .. } => {
                let xt = xi.tangential();
                let s = xt.norm();
                let slope = profile.dg(s);
                let grad = if s > 0.0 { xt * (slope / s) } else { xt * 0.0 };
                Ok((-grad).extend(1.0).normalized())
            }
            Shape::Localized(l) => {
                let x = *xi;
                let h = 1e-7 * l.eps;
                let mut g = Point::zeros(self.dim);
                for i in 0..self.dim {
                    let e = Point::unit(self.dim, i) * h;
                    g[i] = (l.signed(&(x + e)) - l.signed(&(x - e))) / (2.0 * h);
                }
                Ok(g.normalized())
            }
        }
    }

    fn check_boundary(&self, xi: &Point) -> Result<()> {
        if xi.dim() != self.dim {
            return Err(LabError::Domain(format!("point dimension {} != {}", xi.dim(), self.dim)));
        }
        let s = self.signed_distance(xi).abs();
        if s > 1e-9 {
            return Err(LabError::Domain(format!("point {xi:?} is not on the boundary (distance {s:e})")));
        }
        Ok(())
    }

    /// C^{1,1} characteristics (R, Λ).
    pub fn c11(&self) -> (f64, f64) {
        match &self.shape {
            // chart ψ(ỹ) = R − √(R²−|ỹ|²) on |ỹ| < R/2 has ∇ψ Lipschitz with constant (4/3)^{3/2}/R
            Shape::Ball { radius, .. } => (radius / 2.0, (4.0f64 / 3.0).powf(1.5) / radius),
            Shape::Graph { profile, half_side } => ((half_side / 2.0).min(1.0), profile.curvature()),
            Shape::Localized(l) => (l.eps / 2.0, (4.0f64 / 3.0).powf(1.5) / l.eps),
        }
    }

    /// Lipschitz characteristics (R_Lip < 1, Λ_Lip).
    pub fn lipschitz(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Ball { radius, .. } => ((radius / 2.0).min(0.9), 1.0 / 3f64.sqrt()),
            Shape::Graph { profile, half_side } => ((half_side / 2.0).min(0.9), profile.lipschitz()),
            Shape::Localized(l) => ((l.eps / 2.0).min(0.9), 1.0 / 3f64.sqrt()),
        }
    }

    /// The coordinate system CS_ξ. Graph domains use the global vertical frame
    /// translated to ξ.
    pub fn chart(&self, xi: &Point) -> Result<Chart> {
        self.check_boundary(xi)?;
        match &self.shape {
            Shape::Ball { radius, .. } => {
                let normal = self.inward_normal(xi)?;
                Ok(Chart {
                    origin: *xi,
                    tangents: orthonormal_complement(&normal),
                    normal,
                    kind: ChartKind::Ball { radius: *radius },
                })
            }
            Shape::Graph { profile, .. } => {
                let d = self.dim;
                Ok(Chart {
                    origin: *xi,
                    tangents: (0..d - 1).map(|i| Point::unit(d, i)).collect(),
                    normal: Point::unit(d, d - 1),
                    kind: ChartKind::Graph { profile: *profile, base: xi.tangential(), base_height: xi.last() },
                })
            }
            Shape::Localized(_) => Err(LabError::UnsupportedShape("charts of localized sets".into())),
        }
    }

    /// ρ_ξ(x) = y_d − ψ_ξ(ỹ) in CS_ξ.
    pub fn vertical_distance(&self, xi: &Point, x: &Point) -> Result<f64> {
        let (r_lip, _) = self.lipschitz();
        let r = x.dist(xi);
        if r >= r_lip {
            return Err(LabError::Domain(format!("|x - xi| = {r} must be below R_Lip = {r_lip}")));
        }
        let chart = self.chart(xi)?;
        let (yt, yd) = chart.to_local(x);
        Ok(yd - chart.psi(&yt))
    }

    /// Axis-aligned bounding box of the closure.
    pub fn bounding_box(&self) -> (Point, Point) {
        let d = self.dim;
        match &self.shape {
            Shape::Ball { center, radius } => {
                let r = Point::from_slice(&vec![*radius; d]);
                (*center - r, *center + r)
            }
            Shape::Graph { profile, half_side } => {
                let h = *half_side;
                let floor = match profile {
                    Profile::Bump { height, .. } => height.min(0.0),
                    _ => 0.0,
                };
                let mut lo = Point::from_slice(&vec![-h; d]);
                lo[d - 1] = floor;
                (lo, Point::from_slice(&vec![h; d]))
            }
            Shape::Localized(l) => {
                let r = Point::from_slice(&vec![l.rho; d]);
                (l.xi - r, l.xi + r)
            }
        }
    }

    /// A C^{1,1} set U with D ∩ B(ξ, r/2) ⊂ U ⊂ D ∩ B(ξ, r), obtained by rounding the
    /// corner of the convex set D ∩ B(ξ, 3r/4) at scale r/(2L).
    pub fn localize(&self, xi: &Point, r: f64) -> Result<Domain> {
        self.check_boundary(xi)?;
        let (big_r, _) = self.c11();
        let core = match &self.shape {
            Shape::Ball { center, radius } => Convex::Ball { center: *center, radius: *radius },
            Shape::Graph { profile: Profile::Flat, .. } => {
                Convex::HalfSpace { normal: Point::unit(self.dim, self.dim - 1), offset: 0.0 }
            }
            other => {
                return Err(LabError::UnsupportedShape(format!(
                    "localization needs a convex core, got {:?}",
                    std::mem::discriminant(other)
                )))
            }
        };
        if !(r > 0.0 && r <= big_r.min(1.0)) {
            return Err(LabError::Domain(format!("localization radius {r} must be in (0, min(R,1)] = (0, {}]", big_r.min(1.0))));
        }
        Ok(Domain {
            shape: Shape::Localized(Box::new(Localized { core, xi: *xi, rho: 0.75 * r, eps: r / (2.0 * LOCALIZE_L) })),
            dim: self.dim,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmc::Halton;

    fn p(v: &[f64]) -> Point {
        Point::from_slice(v)
    }

    #[test]
    fn ball_distances() {
        let b = Domain::unit_ball(2);
        assert_eq!(b.dist_to_boundary(&p(&[0.0, 0.0])), 1.0);
        assert!((b.dist_to_boundary(&p(&[0.0, 0.4])) - 0.6).abs() < 1e-15);
        assert!(b.signed_distance(&p(&[0.0, 1.5])) < 0.0);
        assert!((b.dist_to_boundary(&p(&[0.0, 1.5])) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flat_graph_vertical_distance() {
        let h = Domain::half_space(2);
        let x = p(&[0.1, 0.2]);
        assert!((h.dist_to_boundary(&x) - 0.2).abs() < 1e-15);
        let xi = p(&[0.0, 0.0]);
        assert!((h.vertical_distance(&xi, &x).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(h.vertical_distance(&xi, &p(&[0.3, 0.0])).unwrap(), 0.0);
        assert!(h.vertical_distance(&xi, &p(&[0.0, 0.95])).is_err());
    }

    #[test]
    fn cone_distance_matches_brute_force() {
        let prof = Profile::SmoothedCone { slope: 0.5, eps: 0.1 };
        let d = Domain::graph(2, prof, 10.0).unwrap();
        for x in [p(&[0.3, 0.4]), p(&[0.0, 0.5]), p(&[-0.7, 0.1]), p(&[0.2, -0.3])] {
            let brute = (0..=400_000)
                .map(|k| {
                    let s = -2.0 + 4.0 * k as f64 / 400_000.0;
                    ((x[0] - s).powi(2) + (x[1] - prof.g(s.abs())).powi(2)).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            let got = d.dist_to_boundary(&x);
            assert!((got - brute).abs() < 1e-9, "{x:?}: {got} vs {brute}");
            assert!(got <= brute + 1e-15);
        }
    }

    #[test]
    fn compara_sandwich_on_cone() {
        let prof = Profile::SmoothedCone { slope: 0.6, eps: 0.05 };
        let d = Domain::graph(3, prof, 10.0).unwrap();
        let xi = p(&[0.0, 0.0, 0.0]);
        let (r_lip, lam) = d.lipschitz();
        let h = Halton::new(3);
        let mut u = [0.0; 3];
        let mut checked = 0;
        for i in 0..5000 {
            h.fill(i, &mut u);
            let x = p(&[(u[0] - 0.5) * r_lip, (u[1] - 0.5) * r_lip, u[2] * r_lip]);
            if x.dist(&xi) >= r_lip || !d.contains(&x) {
                continue;
            }
            let rho = d.vertical_distance(&xi, &x).unwrap();
            let dd = d.dist_to_boundary(&x);
            assert!(dd <= rho * (1.0 + 1e-12) && rho <= (1.0 + lam) * dd * (1.0 + 1e-12), "{x:?}");
            checked += 1;
        }
        assert!(checked > 1000);
    }

    #[test]
    fn ball_chart_roundtrip() {
        let b = Domain::ball(p(&[0.5, 0.0, 0.0]), 2.0).unwrap();
        let xi = p(&[0.5, 0.0, -2.0]);
        let c = b.chart(&xi).unwrap();
        let x = p(&[0.7, 0.1, -1.7]);
        let (yt, yd) = c.to_local(&x);
        assert!(c.from_local(&yt, yd).dist(&x) < 1e-14);
        // boundary points have ρ = 0
        let bp = b.project(&p(&[0.9, 0.3, -1.5]));
        assert!(b.vertical_distance(&xi, &bp).unwrap().abs() < 1e-12);
    }

    #[test]
    fn localize_sandwich() {
        for dom in [Domain::unit_ball(2), Domain::half_space(2), Domain::unit_ball(3)] {
            let d = dom.dim();
            let xi = if matches!(dom.shape, Shape::Ball { .. }) {
                p(&{
                    let mut v = vec![0.0; d];
                    v[d - 1] = -1.0;
                    v
                })
            } else {
                Point::zeros(d)
            };
            let r = 0.4;
            let u = dom.localize(&xi, r).unwrap();
            let h = Halton::new(d);
            let mut v = vec![0.0; d];
            for i in 0..1000 {
                h.fill(i, &mut v);
                let x = xi + Point::from_slice(&v.iter().map(|t| (2.0 * t - 1.0) * r).collect::<Vec<_>>());
                let in_d = dom.contains(&x);
                if in_d && x.dist(&xi) < r / 2.0 {
                    assert!(u.contains(&x), "{x:?} should be in U");
                }
                if u.contains(&x) {
                    assert!(in_d && x.dist(&xi) < r);
                    assert!(u.dist_to_boundary(&x) <= dom.dist_to_boundary(&x) + 1e-12);
                }
            }
        }
        let cone = Domain::graph(2, Profile::SmoothedCone { slope: 0.5, eps: 0.1 }, 10.0).unwrap();
        assert!(matches!(cone.localize(&Point::zeros(2), 0.1), Err(LabError::UnsupportedShape(_))));
        assert!(Domain::unit_ball(2).localize(&p(&[0.0, -1.0]), 0.9).is_err());
    }

    #[test]
    fn localized_distance_is_one_lipschitz() {
        let u = Domain::unit_ball(2).localize(&p(&[0.0, -1.0]), 0.4).unwrap();
        let h = Halton::new(4);
        let mut v = [0.0; 4];
        for i in 0..2000 {
            h.fill(i, &mut v);
            let a = p(&[(v[0] - 0.5) * 0.8, -1.0 + v[1] * 0.6]);
            let b = p(&[(v[2] - 0.5) * 0.8, -1.0 + v[3] * 0.6]);
            let dd = (u.signed_distance(&a) - u.signed_distance(&b)).abs();
            assert!(dd <= a.dist(&b) * (1.0 + 1e-9) + 1e-12);
        }
    }
}
