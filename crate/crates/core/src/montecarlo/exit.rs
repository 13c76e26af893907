//! First exits of X_t = B(S_t) from a domain.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::subordinator::{SubordinatorStepper, DEFAULT_EPS};
use crate::error::{LabError, Result};
use crate::geometry::Domain;
use crate::point::Point;
use crate::rng::{self, StreamRng};

pub const DEFAULT_C_TIME: f64 = 0.05;
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;
pub const DEFAULT_JUMP_CUT: f64 = 1e-4;
/// Samples are produced and consumed in chunks of this many indices.
const CHUNK: usize = 1 << 15;

/// How a step of the walk is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExitScheme {
    /// Subordinator jumps of size at least `jump_cut·δ²` are drawn one by one and exits are
    /// checked at each jump; smaller jumps move the walker as Brownian motion at their mean
    /// rate. Falls back to the skeleton for subordinators without a Lévy density.
    #[default]
    JumpResolved,
    /// Whole increments X ↦ X + (2 S_Δ)^{1/2} G, exits checked at skeleton points only.
    Skeleton,
}

/// Skeleton and sampler settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepControl {
    /// Δ = c_time / φ(δ_D(X)⁻²).
    pub c_time: f64,
    pub max_steps: u64,
    /// Small-jump cutoff for the compound Poisson sampler.
    pub eps: f64,
    pub scheme: ExitScheme,
    /// Jumps of S below `jump_cut·δ_D(X)²` are not resolved individually.
    pub jump_cut: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            c_time: DEFAULT_C_TIME,
            max_steps: DEFAULT_MAX_STEPS,
            eps: DEFAULT_EPS,
            scheme: ExitScheme::default(),
            jump_cut: DEFAULT_JUMP_CUT,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_time > 0.0 && self.c_time.is_finite()) {
            return Err(LabError::Parameter(format!("c_time must be positive, got {}", self.c_time)));
        }
        if self.max_steps == 0 {
            return Err(LabError::Parameter("step budget must be positive".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(LabError::Parameter(format!("eps must lie in (0,1), got {}", self.eps)));
        }
        if !(self.jump_cut > 0.0 && self.jump_cut < 1.0) {
            return Err(LabError::Parameter(format!("jump_cut must lie in (0,1), got {}", self.jump_cut)));
        }
        Ok(())
    }
}

/// One simulated exit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitSample {
    pub start: Point,
    /// Accumulated process time at the first observed position outside D.
    pub tau: f64,
    /// X_{τ_D}: first observed position outside D (the last point reached if censored).
    pub exit: Point,
    /// X_{τ_D−}: last observed position inside D.
    pub pre_exit: Point,
    pub steps: u64,
    /// Smallest δ_D over the observed positions inside D.
    pub min_delta: f64,
    /// Step budget ran out before leaving D.
    pub censored: bool,
    /// The exit point is within 10⁻³·δ_D(X_{τ_D−}) of ∂D, i.e. the walk barely crossed.
    pub near_boundary: bool,
}

/// Simulates X from `x` until it is first seen outside `domain`.
pub fn sample_exit<R: Rng + ?Sized>(
    domain: &Domain,
    x: &Point,
    stepper: &SubordinatorStepper,
    ctrl: &StepControl,
    rng: &mut R,
) -> Result<ExitSample> {
    let delta = domain.signed_distance(x);
    if !(delta > 0.0) {
        return Err(LabError::Domain(format!("start point {x:?} is not in D")));
    }
    match ctrl.scheme {
        ExitScheme::JumpResolved if stepper.split_at(1.0).is_some() => {
            Ok(jump_resolved(domain, x, delta, stepper, ctrl, rng))
        }
        _ => Ok(skeleton(domain, x, delta, stepper, ctrl, rng)),
    }
}

#[inline]
fn gaussian_step<R: Rng + ?Sized>(from: &Point, scale: f64, rng: &mut R) -> Point {
    let mut next = *from;
    for i in 0..from.dim() {
        let g: f64 = StandardNormal.sample(rng);
        next[i] += scale * g;
    }
    next
}

fn exited(x: &Point, tau: f64, exit: Point, pre: Point, steps: u64, min_delta: f64, sd: f64, delta: f64) -> ExitSample {
    ExitSample {
        start: *x,
        tau,
        exit,
        pre_exit: pre,
        steps,
        min_delta,
        censored: false,
        near_boundary: -sd < 1e-3 * delta,
    }
}

fn censored(x: &Point, tau: f64, cur: Point, steps: u64, min_delta: f64) -> ExitSample {
    ExitSample { start: *x, tau, exit: cur, pre_exit: cur, steps, min_delta, censored: true, near_boundary: false }
}

fn jump_resolved<R: Rng + ?Sized>(
    domain: &Domain,
    x: &Point,
    mut delta: f64,
    stepper: &SubordinatorStepper,
    ctrl: &StepControl,
    rng: &mut R,
) -> ExitSample {
    let phi = stepper.phi();
    let mut cur = *x;
    let mut tau = 0.0;
    let mut min_delta = delta;
    for step in 1..=ctrl.max_steps {
        let dt_max = ctrl.c_time / phi.phi_unchecked(delta.powi(-2));
        let u = ctrl.jump_cut * delta * delta;
        let (rate, drift) = stepper.split_at(u).expect("checked by the caller");
        let t_jump = if rate > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / rate
        } else {
            f64::INFINITY
        };
        let seg = t_jump.min(dt_max);
        tau += seg;
        // small jumps: Brownian motion run at their mean rate
        let mut next = gaussian_step(&cur, (2.0 * drift * seg).sqrt(), rng);
        let mut sd = domain.signed_distance(&next);
        if !(sd > 0.0) {
            return exited(x, tau, next, cur, step, min_delta, sd, delta);
        }
        if t_jump < dt_max {
            let pre = next;
            let pre_delta = sd;
            let j = stepper.jump_above(u, rate, rng);
            next = gaussian_step(&pre, (2.0 * j).sqrt(), rng);
            sd = domain.signed_distance(&next);
            if !(sd > 0.0) {
                return exited(x, tau, next, pre, step, min_delta.min(pre_delta), sd, pre_delta);
            }
            min_delta = min_delta.min(pre_delta);
        }
        cur = next;
        delta = sd;
        min_delta = min_delta.min(sd);
    }
    censored(x, tau, cur, ctrl.max_steps, min_delta)
}

fn skeleton<R: Rng + ?Sized>(
    domain: &Domain,
    x: &Point,
    mut delta: f64,
    stepper: &SubordinatorStepper,
    ctrl: &StepControl,
    rng: &mut R,
) -> ExitSample {
    let phi = stepper.phi();
    let mut cur = *x;
    let mut tau = 0.0;
    let mut min_delta = delta;
    for step in 1..=ctrl.max_steps {
        let dt = ctrl.c_time / phi.phi_unchecked(delta.powi(-2));
        let s = stepper.increment(dt, rng);
        let next = gaussian_step(&cur, (2.0 * s).sqrt(), rng);
        tau += dt;
        let sd = domain.signed_distance(&next);
        if !(sd > 0.0) {
            return exited(x, tau, next, cur, step, min_delta, sd, delta);
        }
        cur = next;
        delta = sd;
        min_delta = min_delta.min(sd);
    }
    censored(x, tau, cur, ctrl.max_steps, min_delta)
}

/// Sample count, seed and worker bound for one Monte Carlo computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McParams {
    pub n: usize,
    pub seed: u64,
    /// Identifies the computation so that different estimates use independent streams.
    pub stream: u64,
    /// 0 means all available cores.
    pub workers: usize,
}

impl McParams {
    pub fn new(n: usize, seed: u64, label: &str) -> Self {
        McParams { n, seed, stream: rng::tag(label), workers: 0 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Derived parameters for a sub-computation.
    pub fn child(&self, label: &str, index: u64) -> Self {
        McParams { stream: rng::tag(label) ^ self.stream.rotate_left(17) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15), ..*self }
    }
}

/// Evaluates `sample(i, rng_i)` for i in 0..n with per-index streams, in parallel, and
/// hands results to `consume` strictly in index order. Output is independent of the
/// worker count.
pub fn for_each_indexed<T, S, C>(params: &McParams, sample: S, mut consume: C) -> Result<()>
where
    T: Send,
    S: Fn(u64, &mut StreamRng) -> Result<T> + Sync,
    C: FnMut(u64, T) -> Result<()>,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.workers)
        .build()
        .map_err(|e| LabError::Parameter(format!("worker pool: {e}")))?;
    let n = params.n as u64;
    let mut lo = 0u64;
    while lo < n {
        let hi = (lo + CHUNK as u64).min(n);
        let chunk: Vec<Result<T>> = pool.install(|| {
            (lo..hi)
                .into_par_iter()
                .map(|i| {
                    let mut r = rng::stream(params.seed, params.stream, i);
                    sample(i, &mut r)
                })
                .collect()
        });
        for (k, item) in chunk.into_iter().enumerate() {
            consume(lo + k as u64, item?)?;
        }
        lo = hi;
    }
    Ok(())
}

/// Runs `params.n` exits from `x` and passes each to `consume` in index order.
pub fn for_each_exit<C>(
    domain: &Domain,
    x: &Point,
    stepper: &SubordinatorStepper,
    ctrl: &StepControl,
    params: &McParams,
    consume: C,
) -> Result<()>
where
    C: FnMut(u64, ExitSample) -> Result<()>,
{
    ctrl.validate()?;
    if domain.dim() != x.dim() {
        return Err(LabError::Parameter("start point and domain dimensions differ".into()));
    }
    if !domain.contains(x) {
        return Err(LabError::Domain(format!("start point {x:?} is not in D")));
    }
    for_each_indexed(params, |_, r| sample_exit(domain, x, stepper, ctrl, r), consume)
}

/// Collects `params.n` exits (for small runs and spooling).
pub fn sample_exits(
    domain: &Domain,
    x: &Point,
    stepper: &SubordinatorStepper,
    ctrl: &StepControl,
    params: &McParams,
) -> Result<Vec<ExitSample>> {
    let mut out = Vec::with_capacity(params.n);
    for_each_exit(domain, x, stepper, ctrl, params, |_, s| {
        out.push(s);
        Ok(())
    })?;
    Ok(out)
}
