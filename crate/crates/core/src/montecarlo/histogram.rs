//! Binned exit laws around a ball and their comparison with closed forms and envelopes.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::exit::{for_each_exit, McParams, StepControl};
use super::subordinator::SubordinatorStepper;
use crate::error::{LabError, Result};
use crate::geometry::{Domain, Shape};
use crate::kernels::{stable_ball_poisson, stable_ball_radial_cdf, PoissonEnvelope};
use crate::point::{unit_ball_volume, Point};
use crate::quad::{gauss_legendre, integrate};

pub const UNDERSAMPLED_HITS: u64 = 50;
pub const CHI2_MIN_HITS: u64 = 200;
pub const MIN_HISTOGRAM_SAMPLES: usize = 100_000;

/// Partition of {R ≤ |z − c| ≤ R + 1} into shells with radii R + u_i², u_i = i/n, each cut
/// into equal sectors of the angle in the (z₁, z₂) plane. Everything beyond is the tail bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorBins {
    pub center: Point,
    pub radius: f64,
    pub shells: usize,
    pub sectors: usize,
}

impl ExteriorBins {
    pub fn around_ball(domain: &Domain, shells: usize, sectors: usize) -> Result<Self> {
        let Shape::Ball { center, radius } = &domain.shape else {
            return Err(LabError::UnsupportedShape("exterior bins are built around balls".into()));
        };
        if shells == 0 || sectors == 0 {
            return Err(LabError::Parameter("need at least one shell and one sector".into()));
        }
        Ok(ExteriorBins { center: *center, radius: *radius, shells, sectors })
    }

    pub fn len(&self) -> usize {
        self.shells * self.sectors
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Radii bounding shell `i`.
    pub fn shell_radii(&self, i: usize) -> (f64, f64) {
        let u = |k: usize| (k as f64 / self.shells as f64).powi(2);
        (self.radius + u(i), self.radius + u(i + 1))
    }

    fn angle(&self, z: &Point) -> f64 {
        let a = (z[1] - self.center[1]).atan2(z[0] - self.center[0]);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }

    pub fn sector_of(&self, z: &Point) -> usize {
        ((self.angle(z) / (2.0 * PI) * self.sectors as f64) as usize).min(self.sectors - 1)
    }

    /// Bin index of an exterior point, `None` for the tail (or points inside the ball).
    pub fn locate(&self, z: &Point) -> Option<usize> {
        let s = z.dist(&self.center) - self.radius;
        if !(s >= 0.0) || s >= 1.0 {
            return None;
        }
        let shell = ((s.sqrt() * self.shells as f64) as usize).min(self.shells - 1);
        Some(shell * self.sectors + self.sector_of(z))
    }

    pub fn volume(&self, bin: usize) -> f64 {
        let d = self.center.dim() as i32;
        let (a, b) = self.shell_radii(bin / self.sectors);
        unit_ball_volume(self.center.dim()) * (b.powi(d) - a.powi(d)) / self.sectors as f64
    }

    /// Mid-radius, mid-angle representative point.
    pub fn centroid(&self, bin: usize) -> Point {
        let (a, b) = self.shell_radii(bin / self.sectors);
        let th = (bin % self.sectors) as f64 + 0.5;
        let th = th * 2.0 * PI / self.sectors as f64;
        let rho = 0.5 * (a + b);
        let mut p = self.center;
        p[0] += rho * th.cos();
        p[1] += rho * th.sin();
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub bin: usize,
    pub shell: usize,
    pub sector: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    /// δ of the bin centroid.
    pub delta: f64,
    pub volume: f64,
    pub hits: u64,
    pub prob: f64,
    /// Empirical kernel: probability per unit volume.
    pub k_hat: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitHistogram {
    pub x: Point,
    pub bins: ExteriorBins,
    pub rows: Vec<BinRow>,
    /// Uncensored exits.
    pub n: u64,
    pub censored: u64,
    pub tail_hits: u64,
    pub tail_mass: f64,
    /// Exit counts per angular sector over all exits, tail included.
    pub angular: Vec<u64>,
    /// Exits that landed within 10⁻³ of the boundary.
    pub boundary_hits: u64,
    /// Bins with fewer than 50 hits.
    pub undersampled: Vec<usize>,
    pub seed: u64,
}

impl ExitHistogram {
    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / (self.n + self.censored).max(1) as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.rows.iter().map(|r| r.prob).sum::<f64>() + self.tail_mass
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin,shell,sector,r_lo,r_hi,delta,volume,hits,prob,k_hat,se")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{:e},{:e},{:e},{:e},{},{:e},{:e},{:e}",
                r.bin, r.shell, r.sector, r.r_lo, r.r_hi, r.delta, r.volume, r.hits, r.prob, r.k_hat, r.se
            )?;
        }
        writeln!(w, "tail,,,,,,,{},{:e},,", self.tail_hits, self.tail_mass)?;
        Ok(())
    }
}

/// Bins `params.n` exits from `x`.
pub fn estimate_exit_histogram(
    domain: &Domain,
    x: &Point,
    bins: &ExteriorBins,
    stepper: &SubordinatorStepper,
    ctrl: &StepControl,
    params: &McParams,
) -> Result<ExitHistogram> {
    if params.n < MIN_HISTOGRAM_SAMPLES {
        return Err(LabError::Parameter(format!("histograms need at least {MIN_HISTOGRAM_SAMPLES} exits, got {}", params.n)));
    }
    let mut hits = vec![0u64; bins.len()];
    let mut angular = vec![0u64; bins.sectors];
    let (mut tail, mut censored, mut boundary_hits) = (0u64, 0u64, 0u64);
    for_each_exit(domain, x, stepper, ctrl, params, |_, s| {
        if s.censored {
            censored += 1;
            return Ok(());
        }
        angular[bins.sector_of(&s.exit)] += 1;
        if domain.dist_to_boundary(&s.exit) < 1e-3 {
            boundary_hits += 1;
        }
        match bins.locate(&s.exit) {
            Some(b) => hits[b] += 1,
            None => tail += 1,
        }
        Ok(())
    })?;
    let n = params.n as u64 - censored;
    if n == 0 {
        return Err(LabError::Parameter("every exit was censored".into()));
    }
    let nf = n as f64;
    let rows: Vec<BinRow> = hits
        .iter()
        .enumerate()
        .map(|(b, &h)| {
            let (r_lo, r_hi) = bins.shell_radii(b / bins.sectors);
            let volume = bins.volume(b);
            let prob = h as f64 / nf;
            BinRow {
                bin: b,
                shell: b / bins.sectors,
                sector: b % bins.sectors,
                r_lo,
                r_hi,
                delta: domain.dist_to_boundary(&bins.centroid(b)),
                volume,
                hits: h,
                prob,
                k_hat: prob / volume,
                se: (prob * (1.0 - prob) / nf).sqrt() / volume,
            }
        })
        .collect();
    let undersampled = rows.iter().filter(|r| r.hits < UNDERSAMPLED_HITS).map(|r| r.bin).collect();
    Ok(ExitHistogram {
        x: *x,
        bins: bins.clone(),
        rows,
        n,
        censored,
        tail_hits: tail,
        tail_mass: tail as f64 / nf,
        angular,
        boundary_hits,
        undersampled,
        seed: params.seed,
    })
}

/// Probability that the stable exit from `x` lands in each bin, from the closed-form
/// ball kernel. Exact radial CDF from the centre; a polar quadrature in the plane otherwise.
pub fn stable_ball_bin_masses(bins: &ExteriorBins, alpha: f64, x: &Point) -> Result<Vec<f64>> {
    let d = bins.center.dim();
    let rel = *x - bins.center;
    let cdf = |s: f64| stable_ball_radial_cdf(alpha, bins.radius, s);
    if rel.norm() == 0.0 {
        return Ok((0..bins.len())
            .map(|b| {
                let (a, c) = bins.shell_radii(b / bins.sectors);
                (cdf(c) - cdf(a)) / bins.sectors as f64
            })
            .collect());
    }
    if d != 2 {
        return Err(LabError::UnsupportedShape("off-centre bin masses are implemented in the plane only".into()));
    }
    let width = 2.0 * PI / bins.sectors as f64;
    let angles = gauss_legendre(48, 0.0, width);
    (0..bins.len())
        .map(|b| {
            let (shell, sector) = (b / bins.sectors, b % bins.sectors);
            let (u0, u1) = (shell as f64 / bins.shells as f64, (shell + 1) as f64 / bins.shells as f64);
            let th0 = sector as f64 * width;
            let mut total = 0.0;
            for &(t, w) in &angles {
                let (c, s) = ((th0 + t).cos(), (th0 + t).sin());
                // ρ = R + u², dρ = 2u du; K ~ u^{−α} at the sphere
                let v = integrate(
                    |u| {
                        if u <= 0.0 {
                            return 0.0;
                        }
                        let rho = bins.radius + u * u;
                        let mut z = bins.center;
                        z[0] += rho * c;
                        z[1] += rho * s;
                        stable_ball_poisson(2, alpha, bins.radius, &(*x - bins.center), &(z - bins.center))
                            .map(|k| k * rho * 2.0 * u)
                            .unwrap_or(0.0)
                    },
                    u0,
                    u1,
                    1e-9,
                    1e-14,
                )?
                .value;
                total += w * v;
            }
            Ok(total)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub bin: usize,
    pub hits: u64,
    pub expected_prob: f64,
    pub expected_k: f64,
    /// (K̂ − K) / SE, with the SE taken from the oracle probability.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
    pub tail_expected: f64,
    pub max_abs_z: f64,
    /// Every bin within three standard errors.
    pub per_bin_ok: bool,
    /// Pearson statistic over bins with at least 200 hits, remaining bins and the tail lumped.
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    pub chi2_ok: bool,
}

/// Pearson χ² statistic and its upper-tail p-value.
pub fn pearson(observed: &[u64], expected: &[f64]) -> Result<(f64, usize, f64)> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(LabError::Parameter("χ² needs at least two matching categories".into()));
    }
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| if e > 0.0 { (o as f64 - e).powi(2) / e } else { 0.0 })
        .sum();
    let dof = observed.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| LabError::Parameter(e.to_string()))?;
    Ok((stat, dof, dist.sf(stat)))
}

/// Compares a histogram with the stable ball kernel.
pub fn compare_stable_ball(hist: &ExitHistogram, alpha: f64) -> Result<OracleReport> {
    let masses = stable_ball_bin_masses(&hist.bins, alpha, &hist.x)?;
    let nf = hist.n as f64;
    let rows: Vec<OracleRow> = hist
        .rows
        .iter()
        .zip(&masses)
        .map(|(r, &p)| {
            let se = (p * (1.0 - p) / nf).sqrt();
            OracleRow { bin: r.bin, hits: r.hits, expected_prob: p, expected_k: p / r.volume, z: (r.prob - p) / se }
        })
        .collect();
    let tail_expected = 1.0 - masses.iter().sum::<f64>();
    let max_abs_z = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut rest_o, mut rest_e) = (hist.tail_hits, tail_expected * nf);
    for r in &rows {
        if r.hits >= CHI2_MIN_HITS {
            obs.push(r.hits);
            exp.push(r.expected_prob * nf);
        } else {
            rest_o += r.hits;
            rest_e += r.expected_prob * nf;
        }
    }
    obs.push(rest_o);
    exp.push(rest_e);
    let (chi2, dof, p_value) = pearson(&obs, &exp)?;
    Ok(OracleReport { rows, tail_expected, max_abs_z, per_bin_ok: max_abs_z <= 3.0, chi2, dof, p_value, chi2_ok: p_value >= 0.05 })
}

/// χ² test of uniformity of the exit angle.
pub fn isotropy_test(hist: &ExitHistogram) -> Result<(f64, usize, f64)> {
    let n: u64 = hist.angular.iter().sum();
    let e = n as f64 / hist.angular.len() as f64;
    pearson(&hist.angular, &vec![e; hist.angular.len()])
}

/// Fitted constants of c⁻¹ E(x,z) ≤ K̂(x,z) ≤ c E(x,z) over a δ(z) window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// max(ratio_max, 1/ratio_min).
    pub c: f64,
    pub bins_used: usize,
    pub ratios: Vec<(usize, f64)>,
    pub surrogate: bool,
}

pub fn fit_sandwich(hist: &ExitHistogram, envelope: &PoissonEnvelope, delta_window: (f64, f64)) -> Result<Sandwich> {
    let mut ratios = Vec::new();
    let mut surrogate = false;
    for r in &hist.rows {
        if r.hits == 0 || r.delta < delta_window.0 || r.delta > delta_window.1 {
            continue;
        }
        let z = hist.bins.centroid(r.bin);
        if hist.x.dist(&z) >= 2.0 {
            continue;
        }
        let e = envelope.eval(&hist.x, &z)?;
        surrogate |= e.surrogate;
        ratios.push((r.bin, r.k_hat / e.value));
    }
    if ratios.is_empty() {
        return Err(LabError::Parameter("no populated bins in the sandwich window".into()));
    }
    let lo = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(Sandwich { ratio_min: lo, ratio_max: hi, c: hi.max(1.0 / lo), bins_used: ratios.len(), ratios, surrogate })
}
