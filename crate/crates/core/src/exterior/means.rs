//! Hölder seminorms, exterior boundary means and the oscillation functionals.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::function::ExteriorFunction;
use super::lemma::{chart_dist, LINEAR_LAYER};
use crate::bernstein::BernsteinFunction;
use crate::error::{LabError, Result};
use crate::geometry::Domain;
use crate::point::Point;
use crate::qmc::Halton;

/// Default number of quasi-random nodes.
pub const DEFAULT_NODES: usize = 100_000;

/// Smallest admissible |B(ξ,r) \ D̄| / |B(ξ,r)|.
pub const MIN_ACCEPT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderFit {
    /// sup over shifts of ‖f(·+y) − f‖_p / |y|^β.
    pub c: f64,
    /// (|y|, ratio) per shift.
    pub ratios: Vec<(f64, f64)>,
    /// Least-squares slope of log ratio against log |y|.
    pub slope: f64,
    /// Ratios grow as |y| → 0.
    pub diverges: bool,
}

/// Estimates the L^p-Hölder constant of f over a box window; p < ∞ by quasi-random
/// quadrature of the L^p norm, p = ∞ by the maximum over nodes.
pub fn holder_seminorm(
    f: &ExteriorFunction,
    shifts: &[Point],
    window: (Point, Point),
    nodes: usize,
) -> Result<HolderFit> {
    let (lo, hi) = window;
    let d = lo.dim();
    if shifts.is_empty() || nodes == 0 {
        return Err(LabError::Parameter("holder seminorm needs shifts and nodes".into()));
    }
    let vol: f64 = (0..d).map(|i| hi[i] - lo[i]).product();
    let h = Halton::new(d);
    let mut u = vec![0.0; d];
    let pts: Vec<Point> = (0..nodes as u64)
        .map(|i| {
            h.fill(i, &mut u);
            let mut y = lo;
            for k in 0..d {
                y[k] = lo[k] + u[k] * (hi[k] - lo[k]);
            }
            y
        })
        .collect();
    let mut ratios = Vec::with_capacity(shifts.len());
    for s in shifts {
        let len = s.norm();
        if !(len > 0.0) {
            return Err(LabError::Parameter("zero shift".into()));
        }
        let norm = if f.p.is_infinite() {
            pts.iter().map(|y| (f.eval(&(*y + *s)) - f.eval(y)).abs()).fold(0.0, f64::max)
        } else {
            let mean = pts.iter().map(|y| (f.eval(&(*y + *s)) - f.eval(y)).abs().powf(f.p)).sum::<f64>() / nodes as f64;
            (vol * mean).powf(1.0 / f.p)
        };
        ratios.push((len, norm / len.powf(f.beta)));
    }
    let c = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let pos: Vec<(f64, f64)> = ratios.iter().filter(|r| r.1 > 0.0).map(|r| (r.0.ln(), r.1.ln())).collect();
    let slope = if pos.len() >= 2 { ls_slope(&pos) } else { 0.0 };
    // class members give a flat or rising ratio; a wrong β shows slope β_true − β < 0
    let diverges = slope < -0.15;
    Ok(HolderFit { c, ratios, slope, diverges })
}

pub(crate) fn ls_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub value: f64,
    /// Nominal standard error (sample deviation over √n).
    pub se: f64,
    pub accepted: usize,
    /// Accepted fraction of nodes that fell in B(ξ, r).
    pub fraction: f64,
}

/// Visits quasi-random points of B(ξ,r) \ D̄ until `n` are accepted.
fn exterior_nodes<F: FnMut(Point)>(domain: &Domain, xi: &Point, r: f64, n: usize, mut visit: F) -> Result<(usize, f64)> {
    let d = xi.dim();
    let h = Halton::new(d);
    let mut u = vec![0.0; d];
    let (mut accepted, mut in_ball) = (0usize, 0usize);
    let mut i = 0u64;
    while accepted < n {
        h.fill(i, &mut u);
        i += 1;
        let mut y = *xi;
        let mut s2 = 0.0;
        for k in 0..d {
            let v = (2.0 * u[k] - 1.0) * r;
            y[k] += v;
            s2 += v * v;
        }
        if s2 >= r * r {
            continue;
        }
        in_ball += 1;
        if domain.signed_distance(&y) < 0.0 {
            accepted += 1;
            visit(y);
        }
        if in_ball >= 10_000 && (accepted as f64) < MIN_ACCEPT_FRACTION * in_ball as f64 {
            return Err(LabError::DegenerateRegion(format!(
                "exterior part of B(xi, {r}) below {MIN_ACCEPT_FRACTION} of the ball"
            )));
        }
    }
    Ok((accepted, accepted as f64 / in_ball as f64))
}

/// A(ξ,r): mean of f over B(ξ,r) \ D̄.
pub fn boundary_mean(domain: &Domain, f: &ExteriorFunction, xi: &Point, r: f64, n: usize) -> Result<MeanEstimate> {
    let (r_lip, _) = domain.lipschitz();
    if !(r > 0.0 && r < r_lip / 2.0) {
        return Err(LabError::Domain(format!("boundary mean radius {r} must lie in (0, R_Lip/2) = (0, {})", r_lip / 2.0)));
    }
    let (mut sum, mut sum2) = (0.0, 0.0);
    let (accepted, fraction) = exterior_nodes(domain, xi, r, n, |y| {
        let v = f.eval(&y);
        sum += v;
        sum2 += v * v;
    })?;
    let m = sum / accepted as f64;
    let var = (sum2 / accepted as f64 - m * m).max(0.0);
    let se = if f.is_constant() { 0.0 } else { (var / accepted as f64).sqrt() };
    Ok(MeanEstimate { value: m, se, accepted, fraction })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryMean {
    pub xi: Point,
    pub radii: Vec<f64>,
    pub means: Vec<f64>,
    /// Value at the smallest radius.
    pub limit: f64,
    /// sup_k r_k^{−γ} |A(ξ,2r_k) − A(ξ,r_k)|
    pub diagnostic: f64,
    pub converged: bool,
}

/// A(ξ, 2^{−k}) for k from the first radius below R_Lip/2 up to k_max, with a Cauchy diagnostic.
pub fn boundary_limit(
    domain: &Domain,
    f: &ExteriorFunction,
    xi: &Point,
    gamma: f64,
    k_max: u32,
    n: usize,
) -> Result<BoundaryMean> {
    if k_max < 8 {
        return Err(LabError::Parameter(format!("k_max must be at least 8, got {k_max}")));
    }
    let (r_lip, _) = domain.lipschitz();
    let k0 = (1..=k_max).find(|&k| 2f64.powi(-(k as i32)) < r_lip / 2.0).unwrap_or(k_max);
    let mut radii = Vec::new();
    let mut means = Vec::new();
    for k in k0..=k_max {
        let r = 2f64.powi(-(k as i32));
        radii.push(r);
        means.push(boundary_mean(domain, f, xi, r, n)?.value);
    }
    let diffs: Vec<f64> = means.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let diagnostic = diffs
        .iter()
        .zip(&radii[1..])
        .map(|(dv, r)| dv / r.powf(gamma))
        .fold(0.0, f64::max);
    // successive differences must shrink: last third no larger than first third
    let third = (diffs.len() / 3).max(1);
    let head = diffs[..third].iter().copied().fold(0.0, f64::max);
    let tail = diffs[diffs.len() - third..].iter().copied().fold(0.0, f64::max);
    let converged = tail <= head.max(1e-12) && diagnostic.is_finite();
    Ok(BoundaryMean { xi: *xi, limit: *means.last().unwrap(), radii, means, diagnostic, converged })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Oscillation {
    pub r: f64,
    /// Weighted double integral with φ(δ_D(y)⁻²)^{1/2} / (r^{2d+γ} φ(r⁻²)^{1/2}).
    pub e_val: f64,
    /// r^{−2d−γ} ∫∫ |f(y) − f(z)|.
    pub f_val: f64,
}

/// Power of the depth substitution τ = τ_max t^k. The weight behaves like δ^{−e}; the
/// substituted integrand then has finite variance for e < 1 − 1/(2k).
const DEPTH_POWER: i32 = 4;

/// Double integrals over (B(ξ,r) \ D̄)² by paired quasi-random nodes. z is uniform in the
/// cube [−r,r]^d; y is placed in the chart at ξ at depth τ below ∂D, with τ = τ_max t⁴ so
/// that the singular weight at ∂D is integrated without blowing up the variance.
pub fn oscillation_functionals(
    domain: &Domain,
    f: &ExteriorFunction,
    phi: &BernsteinFunction,
    xi: &Point,
    r: f64,
    gamma: f64,
    pairs: usize,
) -> Result<Oscillation> {
    let d = xi.dim();
    if pairs == 0 || !(r > 0.0) {
        return Err(LabError::Parameter("oscillation functionals need r > 0 and pairs > 0".into()));
    }
    let chart = domain.chart(xi)?;
    let tau_max = r * (2.0 + domain.lipschitz().1);
    let layer = LINEAR_LAYER * r;
    let h = Halton::new(2 * d);
    let mut u = vec![0.0; 2 * d];
    let mut yt = Point::zeros(d - 1);
    let (mut se, mut sf) = (0.0, 0.0);
    for i in 0..pairs as u64 {
        h.fill(i, &mut u);
        for k in 0..d - 1 {
            yt[k] = (2.0 * u[k] - 1.0) * r;
        }
        let t = u[d - 1];
        let tau = tau_max * t.powi(DEPTH_POWER);
        let psi = chart.psi(&yt);
        if !psi.is_finite() || !(tau > 0.0) {
            continue;
        }
        let y = chart.from_local(&yt, psi - tau);
        if y.dist(xi) >= r || (tau >= layer && domain.signed_distance(&y) >= 0.0) {
            continue;
        }
        let mut z = *xi;
        for k in 0..d {
            z[k] += (2.0 * u[d + k] - 1.0) * r;
        }
        if z.dist(xi) >= r || domain.signed_distance(&z) >= 0.0 {
            continue;
        }
        let diff = (f.eval(&y) - f.eval(&z)).abs();
        if diff == 0.0 {
            continue;
        }
        let jac = DEPTH_POWER as f64 * t.powi(DEPTH_POWER - 1);
        let dy = chart_dist(domain, &chart, &yt, -tau, layer);
        se += jac * phi.phi_unchecked(dy.powi(-2)).sqrt() * diff;
        sf += jac * diff;
    }
    // (2r)^d for z, (2r)^{d−1} τ_max for (ỹ, t)
    let volume = (2.0 * r).powi(2 * d as i32 - 1) * tau_max / pairs as f64;
    let scale = r.powf(2.0 * d as f64 + gamma);
    let e_val = se * volume / (scale * phi.phi_unchecked(r.powi(-2)).sqrt());
    let f_val = sf * volume / scale;
    Ok(Oscillation { r, e_val, f_val })
}

/// Trend of a sequence ordered by decreasing r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Decreasing,
    Increasing,
    Mixed,
}

pub fn trend(values: &[f64]) -> Trend {
    if values.windows(2).all(|w| w[1] < w[0]) {
        Trend::Decreasing
    } else if values.windows(2).all(|w| w[1] > w[0]) {
        Trend::Increasing
    } else {
        Trend::Mixed
    }
}

/// CSV trace with columns r, E_val, F_val, A(xi,r).
pub fn write_trace_csv<W: Write>(mut w: W, osc: &[Oscillation], means: &[f64]) -> Result<()> {
    writeln!(w, "r,E_val,F_val,A_xi_r")?;
    for (i, o) in osc.iter().enumerate() {
        let a = means.get(i).map(|v| format!("{v:e}")).unwrap_or_default();
        writeln!(w, "{:e},{:e},{:e},{a}", o.r, o.e_val, o.f_val)?;
    }
    Ok(())
}
