//! Batch-means estimators built on exit samples.

use serde::{Deserialize, Serialize};

use super::exit::{for_each_exit, for_each_indexed, sample_exit, ExitSample, McParams, StepControl};
use super::subordinator::SubordinatorStepper;
use crate::error::{LabError, Result};
use crate::exterior::{ExteriorFunction, Trend};
use crate::geometry::Domain;
use crate::point::Point;

pub const BATCHES: usize = 32;
pub const MIN_SAMPLES: usize = 1000;
/// Batch means further than this many batch standard deviations from the mean raise a warning.
pub const HEAVY_TAIL_Z: f64 = 5.0;

/// Mean with batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchEstimate {
    pub value: f64,
    pub se: f64,
    /// Samples used (censored ones excluded).
    pub n: u64,
    pub censored: u64,
    pub heavy_tail: bool,
}

impl BatchEstimate {
    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / (self.n + self.censored).max(1) as f64
    }
}

/// Accumulates values by contiguous index batches.
#[derive(Debug, Clone)]
pub struct BatchAccumulator {
    total: u64,
    sums: Vec<f64>,
    counts: Vec<u64>,
    first: Option<f64>,
    all_equal: bool,
    censored: u64,
}

impl BatchAccumulator {
    pub fn new(total: usize) -> Self {
        BatchAccumulator {
            total: total.max(1) as u64,
            sums: vec![0.0; BATCHES],
            counts: vec![0; BATCHES],
            first: None,
            all_equal: true,
            censored: 0,
        }
    }

    pub fn push(&mut self, index: u64, v: f64) {
        let b = ((index as u128 * BATCHES as u128) / self.total as u128) as usize;
        let b = b.min(BATCHES - 1);
        self.sums[b] += v;
        self.counts[b] += 1;
        match self.first {
            None => self.first = Some(v),
            Some(f) if f != v => self.all_equal = false,
            _ => {}
        }
    }

    pub fn push_censored(&mut self) {
        self.censored += 1;
    }

    pub fn finish(&self) -> Result<BatchEstimate> {
        let n: u64 = self.counts.iter().sum();
        if n == 0 {
            return Err(LabError::Parameter("no uncensored samples".into()));
        }
        if self.all_equal {
            let v = self.first.unwrap_or(0.0);
            return Ok(BatchEstimate { value: v, se: 0.0, n, censored: self.censored, heavy_tail: false });
        }
        let value = self.sums.iter().sum::<f64>() / n as f64;
        if !value.is_finite() {
            return Err(LabError::Parameter("non-finite sample mean: f is not integrable against the exit law".into()));
        }
        let means: Vec<f64> = self
            .sums
            .iter()
            .zip(&self.counts)
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| s / c as f64)
            .collect();
        let k = means.len() as f64;
        if means.len() < 2 {
            return Ok(BatchEstimate { value, se: f64::INFINITY, n, censored: self.censored, heavy_tail: false });
        }
        let var = means.iter().map(|m| (m - value).powi(2)).sum::<f64>() / (k - 1.0);
        let sd = var.sqrt();
        let heavy_tail = sd > 0.0 && means.iter().any(|m| (m - value).abs() > HEAVY_TAIL_Z * sd);
        Ok(BatchEstimate { value, se: sd / k.sqrt(), n, censored: self.censored, heavy_tail })
    }
}

/// Estimates E[g_k(exit sample)] for several functionals from one set of exits.
pub fn estimate_functionals(
    domain: &Domain,
    x: &Point,
    stepper: &SubordinatorStepper,
    ctrl: &StepControl,
    params: &McParams,
    fns: &[&(dyn Fn(&ExitSample) -> f64 + Sync)],
) -> Result<Vec<BatchEstimate>> {
    let mut accs: Vec<BatchAccumulator> = fns.iter().map(|_| BatchAccumulator::new(params.n)).collect();
    for_each_exit(domain, x, stepper, ctrl, params, |i, s| {
        for (acc, g) in accs.iter_mut().zip(fns) {
            if s.censored {
                acc.push_censored();
            } else {
                acc.push(i, g(&s));
            }
        }
        Ok(())
    })?;
    accs.iter().map(|a| a.finish()).collect()
}

/// û_f(x) with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicEstimate {
    pub x: Point,
    pub value: f64,
    pub se: f64,
    pub n: u64,
    pub censored: u64,
    pub seed: u64,
    pub f_id: String,
    /// Batch means disagree by more than five batch standard deviations.
    pub heavy_tail: bool,
}

impl HarmonicEstimate {
    fn from_batch(x: &Point, b: BatchEstimate, seed: u64, f: &ExteriorFunction) -> Self {
        HarmonicEstimate {
            x: *x,
            value: b.value,
            se: b.se,
            n: b.n,
            censored: b.censored,
            seed,
            f_id: f.tag().to_string(),
            heavy_tail: b.heavy_tail,
        }
    }
}

fn check_n(params: &McParams) -> Result<()> {
    if params.n < MIN_SAMPLES {
        return Err(LabError::Parameter(format!("need at least {MIN_SAMPLES} samples, got {}", params.n)));
    }
    Ok(())
}

/// u_f(x) = E_x[f(X_{τ_D})], averaged over `params.n` exits.
pub fn estimate_u_f(
    domain: &Domain,
    f: &ExteriorFunction,
    x: &Point,
    stepper: &SubordinatorStepper,
    ctrl: &StepControl,
    params: &McParams,
) -> Result<HarmonicEstimate> {
    check_n(params)?;
    let g = |s: &ExitSample| f.eval(&s.exit);
    let b = estimate_functionals(domain, x, stepper, ctrl, params, &[&g])?[0];
    Ok(HarmonicEstimate::from_batch(x, b, params.seed, f))
}

/// Direct estimate of û_f(x) against the mean of û_f(X_{τ_B}) over exits from B = B(x, ρ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicityReport {
    pub x: Point,
    pub rho: f64,
    pub direct: HarmonicEstimate,
    pub nested: BatchEstimate,
    pub inner_paths: usize,
    pub difference: f64,
    pub combined_se: f64,
    /// |difference| ≤ 3 combined SE.
    pub consistent: bool,
}

/// Nested check of the mean-value property u(x) = E_x[u(X_{τ_B})] for B(x, ρ) ⊂ D.
#[allow(clippy::too_many_arguments)]
pub fn harmonicity_check(
    domain: &Domain,
    f: &ExteriorFunction,
    x: &Point,
    rho: f64,
    stepper: &SubordinatorStepper,
    ctrl: &StepControl,
    params: &McParams,
    inner_paths: usize,
) -> Result<HarmonicityReport> {
    check_n(params)?;
    if !(rho > 0.0) || domain.signed_distance(x) <= rho {
        return Err(LabError::Domain(format!("closure of B(x, {rho}) is not inside D")));
    }
    if inner_paths == 0 {
        return Err(LabError::Parameter("need at least one inner path".into()));
    }
    let direct = estimate_u_f(domain, f, x, stepper, ctrl, &params.child("harmonicity/direct", 0))?;
    let small = Domain::ball(*x, rho)?;
    let outer = params.child("harmonicity/nested", 0);
    let mut acc = BatchAccumulator::new(outer.n);
    for_each_indexed(
        &outer,
        |_, r| {
            let y = sample_exit(&small, x, stepper, ctrl, r)?;
            if y.censored {
                return Ok(None);
            }
            if !domain.contains(&y.exit) {
                return Ok(Some(f.eval(&y.exit)));
            }
            let mut sum = 0.0;
            for _ in 0..inner_paths {
                let z = sample_exit(domain, &y.exit, stepper, ctrl, r)?;
                if z.censored {
                    return Ok(None);
                }
                sum += f.eval(&z.exit);
            }
            Ok(Some(sum / inner_paths as f64))
        },
        |i, v| {
            match v {
                Some(v) => acc.push(i, v),
                None => acc.push_censored(),
            }
            Ok(())
        },
    )?;
    let nested = acc.finish()?;
    let difference = direct.value - nested.value;
    let combined_se = direct.se.hypot(nested.se);
    Ok(HarmonicityReport {
        x: *x,
        rho,
        consistent: difference.abs() <= 3.0 * combined_se,
        direct,
        nested,
        inner_paths,
        difference,
        combined_se,
    })
}

/// Trend of a noisy sequence: every step may go the wrong way by at most three combined
/// standard errors, and the endpoints must differ by more than three.
pub fn noisy_trend(values: &[f64], ses: &[f64]) -> Trend {
    let n = values.len();
    if n < 2 || ses.len() != n {
        return Trend::Mixed;
    }
    let tol = |i: usize, j: usize| 3.0 * ses[i].hypot(ses[j]);
    let down = values.windows(2).enumerate().all(|(k, w)| w[1] - w[0] <= tol(k, k + 1))
        && values[0] - values[n - 1] > tol(0, n - 1);
    let up = values.windows(2).enumerate().all(|(k, w)| w[0] - w[1] <= tol(k, k + 1))
        && values[n - 1] - values[0] > tol(0, n - 1);
    match (down, up) {
        (true, false) => Trend::Decreasing,
        (false, true) => Trend::Increasing,
        _ => Trend::Mixed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub x: Point,
    pub dist_xi: f64,
    pub delta: f64,
    /// û₂(x) = P_x(X_{τ_D} ∉ B(ξ, r₀)).
    pub u2: f64,
    pub se: f64,
    pub censored: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub xi: Point,
    pub r0: f64,
    pub rows: Vec<DecayRow>,
    pub trend: Trend,
}

/// û₂(x) = P_x(X_{τ_D} lands outside B(ξ, r₀)) at one point, with no restriction on x.
pub fn estimate_far_exit(
    domain: &Domain,
    xi: &Point,
    r0: f64,
    x: &Point,
    stepper: &SubordinatorStepper,
    ctrl: &StepControl,
    params: &McParams,
) -> Result<BatchEstimate> {
    check_n(params)?;
    let g = |s: &ExitSample| if s.exit.dist(xi) >= r0 { 1.0 } else { 0.0 };
    Ok(estimate_functionals(domain, x, stepper, ctrl, params, &[&g])?[0])
}

/// û₂ along points approaching ξ; each point must lie in D ∩ B(ξ, r₀/8).
pub fn boundary_decay_check(
    domain: &Domain,
    xi: &Point,
    r0: f64,
    points: &[Point],
    stepper: &SubordinatorStepper,
    ctrl: &StepControl,
    params: &McParams,
) -> Result<DecayTable> {
    let mut rows = Vec::with_capacity(points.len());
    for (k, x) in points.iter().enumerate() {
        if x.dist(xi) >= r0 / 8.0 || !domain.contains(x) {
            return Err(LabError::Domain(format!("decay point {x:?} is not in D ∩ B(xi, r0/8)")));
        }
        let b = estimate_far_exit(domain, xi, r0, x, stepper, ctrl, &params.child("decay", k as u64))?;
        rows.push(DecayRow {
            x: *x,
            dist_xi: x.dist(xi),
            delta: domain.dist_to_boundary(x),
            u2: b.value,
            se: b.se,
            censored: b.censored,
        });
    }
    let vals: Vec<f64> = rows.iter().map(|r| r.u2).collect();
    let ses: Vec<f64> = rows.iter().map(|r| r.se).collect();
    Ok(DecayTable { xi: *xi, r0, trend: noisy_trend(&vals, &ses), rows })
}

/// Empirical E[exp(−λ S_dt)] against exp(−dt φ(λ)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceRow {
    pub lambda: f64,
    pub empirical: f64,
    pub se: f64,
    pub exact: f64,
    /// (empirical − exact) / se.
    pub z: f64,
}

pub fn laplace_check(stepper: &SubordinatorStepper, dt: f64, lambdas: &[f64], params: &McParams) -> Result<Vec<LaplaceRow>> {
    if !(dt > 0.0) {
        return Err(LabError::Parameter(format!("dt must be positive, got {dt}")));
    }
    let mut accs: Vec<BatchAccumulator> = lambdas.iter().map(|_| BatchAccumulator::new(params.n)).collect();
    for_each_indexed(
        params,
        |_, r| Ok(stepper.increment(dt, r)),
        |i, s| {
            for (acc, l) in accs.iter_mut().zip(lambdas) {
                acc.push(i, (-l * s).exp());
            }
            Ok(())
        },
    )?;
    lambdas
        .iter()
        .zip(&accs)
        .map(|(&lambda, acc)| {
            let b = acc.finish()?;
            let exact = (-dt * stepper.phi().phi(lambda)?).exp();
            Ok(LaplaceRow { lambda, empirical: b.value, se: b.se, exact, z: (b.value - exact) / b.se })
        })
        .collect()
}
