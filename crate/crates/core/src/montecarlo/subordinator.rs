//! Increments of the subordinator S with E[exp(−λ S_t)] = exp(−t φ(λ)).

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::bernstein::{BernsteinFunction, Family};
use crate::error::{LabError, Result};
use crate::quad::{gauss_legendre, integrate_from_zero_singular};
use crate::rng::open01;

pub const DEFAULT_EPS: f64 = 1e-4;

/// Cells per decade of the jump-size table.
const TABLE_PER_DECADE: usize = 64;
/// The table spans [ε, ε·10^TABLE_DECADES]; the rest of the tail is extrapolated.
const TABLE_DECADES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    /// Kanter's representation of the one-sided stable law.
    ExactStable,
    /// Stable subordinator run on an independent gamma clock: φ = log(1 + λ^{α/2}).
    ExactGeometric,
    /// Jumps above ε as a compound Poisson process, jumps below ε as their mean drift.
    CompoundPoisson,
}

/// Tail Λ(t) = μ([t, ∞)) tabulated on a log grid starting at ε.
#[derive(Debug, Clone)]
struct JumpTable {
    ts: Vec<f64>,
    tail: Vec<f64>,
    /// ∫_ε^{t_i} t μ(dt).
    moment: Vec<f64>,
    /// μ beyond the last grid point.
    far: f64,
    /// Power-law index used for the part of the tail beyond the grid.
    far_index: f64,
}

impl JumpTable {
    fn build(f: &BernsteinFunction, eps: f64) -> Result<JumpTable> {
        let chi = |t: f64| f.levy_density(t).unwrap_or(0.0);
        let n = TABLE_PER_DECADE * TABLE_DECADES;
        let step = std::f64::consts::LN_10 / TABLE_PER_DECADE as f64;
        let ts: Vec<f64> = (0..=n).map(|i| eps * (step * i as f64).exp()).collect();
        // cell masses by Gauss–Legendre in s = ln t, where χ(t)·t is smooth
        let nodes = gauss_legendre(16, 0.0, step);
        let cell = |t0: f64, power: i32| -> f64 {
            nodes
                .iter()
                .map(|&(s, w)| {
                    let t = t0 * s.exp();
                    w * chi(t) * t.powi(power)
                })
                .sum()
        };
        let masses: Vec<f64> = ts[..n].iter().map(|&t0| cell(t0, 1)).collect();
        let mut moment = vec![0.0; n + 1];
        for i in 0..n {
            moment[i + 1] = moment[i] + cell(ts[i], 2);
        }
        let t_end = ts[n];
        let far = integrate_from_zero_singular(|x| chi(1.0 / x) / (x * x), 1.0 / t_end, 1e-10, 1e-300)?.value;
        let mut tail = vec![0.0; n + 1];
        tail[n] = far;
        for i in (0..n).rev() {
            tail[i] = tail[i + 1] + masses[i];
        }
        if !(tail[0].is_finite() && tail[0] > 0.0) {
            return Err(LabError::Quadrature(format!("jump tail Λ(ε) = {} for {}", tail[0], f.describe())));
        }
        let far_index = if far > 0.0 && tail[n - 1] > far {
            (tail[n - 1] / far).ln() / step
        } else {
            1.0
        };
        Ok(JumpTable { ts, tail, moment, far, far_index })
    }

    fn total(&self) -> f64 {
        self.tail[0]
    }

    fn cell_of(&self, u: f64) -> Option<usize> {
        let n = self.ts.len() - 1;
        if u >= self.ts[n] {
            return None;
        }
        Some(self.ts.partition_point(|&t| t <= u).saturating_sub(1))
    }

    /// Λ(u) for u ≥ ε.
    fn tail_at(&self, u: f64) -> f64 {
        let Some(i) = self.cell_of(u) else {
            return self.far * (u / self.ts[self.ts.len() - 1]).powf(-self.far_index);
        };
        let (t0, t1, a, b) = (self.ts[i], self.ts[i + 1], self.tail[i], self.tail[i + 1]);
        if !(a > b) || b <= 0.0 {
            return a - (a - b) * (u - t0) / (t1 - t0);
        }
        a * (b / a).powf((u / t0).ln() / (t1 / t0).ln())
    }

    /// ∫_ε^u t μ(dt) for u ≥ ε, linear inside a cell.
    fn moment_to(&self, u: f64) -> f64 {
        let Some(i) = self.cell_of(u) else {
            return self.moment[self.moment.len() - 1];
        };
        let w = (u / self.ts[i]).ln() / (self.ts[i + 1] / self.ts[i]).ln();
        self.moment[i] + w * (self.moment[i + 1] - self.moment[i])
    }

    /// Jump size t with Λ(t) = v, for v in (0, Λ(ε)]; power-law interpolation inside cells.
    fn invert(&self, v: f64) -> f64 {
        let n = self.ts.len() - 1;
        if v <= self.far {
            return self.ts[n] * (self.far / v).powf(1.0 / self.far_index);
        }
        // tail is non-increasing: find the last i with tail[i] >= v
        let i = self.tail.partition_point(|&x| x >= v).saturating_sub(1).min(n - 1);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let (a, b) = (self.tail[i], self.tail[i + 1]);
        if !(a > b) {
            return t0;
        }
        if b <= 0.0 {
            // exponentially cut off: linear interpolation of Λ
            return t0 + (a - v) / (a - b) * (t1 - t0);
        }
        let s = (a / b).ln() / (t1 / t0).ln();
        t0 * (a / v).powf(1.0 / s)
    }
}

/// Sampler of subordinator increments for one Bernstein function.
#[derive(Debug, Clone)]
pub struct SubordinatorStepper {
    phi: BernsteinFunction,
    kind: SamplerKind,
    eps: f64,
    /// Λ(ε) = μ([ε, ∞)).
    jump_rate: f64,
    /// b(ε) = ∫₀^ε t μ(dt).
    drift: f64,
    table: Option<JumpTable>,
    /// Γ(1 − α/2), for the stable jump intensities.
    gamma_1ma: f64,
}

impl SubordinatorStepper {
    /// Exact samplers where available, otherwise the compound Poisson scheme at cutoff `eps`.
    pub fn new(phi: BernsteinFunction, eps: f64) -> Result<Self> {
        match phi.family() {
            Family::Stable => Ok(Self::exact(phi, SamplerKind::ExactStable, eps)),
            Family::Geometric => Ok(Self::exact(phi, SamplerKind::ExactGeometric, eps)),
            _ => Self::compound_poisson(phi, eps),
        }
    }

    /// Forces the compound Poisson scheme (needs a registered Lévy density).
    pub fn compound_poisson(phi: BernsteinFunction, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(LabError::Parameter(format!("small-jump cutoff must lie in (0,1), got {eps}")));
        }
        if !phi.has_levy_density() {
            return Err(LabError::MissingDensity(phi.describe()));
        }
        let table = JumpTable::build(&phi, eps)?;
        let drift = integrate_from_zero_singular(|t| t * phi.levy_density(t).unwrap_or(0.0), eps, 1e-10, 1e-300)?.value;
        Ok(SubordinatorStepper {
            jump_rate: table.total(),
            drift,
            table: Some(table),
            phi,
            kind: SamplerKind::CompoundPoisson,
            eps,
            gamma_1ma: f64::NAN,
        })
    }

    fn exact(phi: BernsteinFunction, kind: SamplerKind, eps: f64) -> Self {
        let a = phi.alpha() / 2.0;
        let gamma_1ma = if a < 1.0 { crate::special::gamma(1.0 - a) } else { f64::NAN };
        SubordinatorStepper { phi, kind, eps, jump_rate: f64::INFINITY, drift: 0.0, table: None, gamma_1ma }
    }

    pub fn phi(&self) -> &BernsteinFunction {
        &self.phi
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    pub fn is_exact(&self) -> bool {
        self.kind != SamplerKind::CompoundPoisson
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Λ(ε); infinite for the exact samplers.
    pub fn jump_rate(&self) -> f64 {
        self.jump_rate
    }

    /// b(ε); zero for the exact samplers.
    pub fn small_jump_drift(&self) -> f64 {
        self.drift
    }

    /// Splits the jumps of S at size u: returns the intensity Λ(u) of jumps of size at least u
    /// and the mean rate ∫₀^u t μ(dt) of the smaller ones. `None` without a Lévy density.
    /// For the compound Poisson scheme u is raised to ε.
    pub fn split_at(&self, u: f64) -> Option<(f64, f64)> {
        let a = self.phi.alpha() / 2.0;
        match self.kind {
            SamplerKind::ExactStable if a >= 1.0 => Some((0.0, 1.0)),
            SamplerKind::ExactStable => {
                let g = self.gamma_1ma;
                Some((u.powf(-a) / g, a * u.powf(1.0 - a) / ((1.0 - a) * g)))
            }
            SamplerKind::ExactGeometric => None,
            SamplerKind::CompoundPoisson => {
                let table = self.table.as_ref()?;
                let u = u.max(self.eps);
                Some((table.tail_at(u), self.drift + table.moment_to(u)))
            }
        }
    }

    /// A jump of S conditioned to be at least u; `rate` must be Λ(u) from [`split_at`](Self::split_at).
    pub fn jump_above<R: Rng + ?Sized>(&self, u: f64, rate: f64, rng: &mut R) -> f64 {
        let v = open01(rng);
        match self.kind {
            SamplerKind::ExactStable => u * v.powf(-2.0 / self.phi.alpha()),
            _ => {
                let table = self.table.as_ref().expect("jump sizes need a Lévy density");
                table.invert(v * rate).max(u.max(self.eps))
            }
        }
    }

    /// A draw of S_dt.
    pub fn increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
        debug_assert!(dt > 0.0);
        let a = self.phi.alpha() / 2.0;
        match self.kind {
            SamplerKind::ExactStable => {
                if a >= 1.0 {
                    return dt;
                }
                (dt.ln() / a + ln_unit_stable(a, rng)).exp()
            }
            SamplerKind::ExactGeometric => {
                let lg = ln_gamma_variate(dt, rng);
                if a >= 1.0 {
                    return lg.exp();
                }
                (lg / a + ln_unit_stable(a, rng)).exp()
            }
            SamplerKind::CompoundPoisson => {
                let table = self.table.as_ref().expect("compound Poisson stepper carries a table");
                let mean = self.jump_rate * dt;
                let count = Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0);
                let mut s = self.drift * dt;
                for _ in 0..count {
                    s += table.invert(open01(rng) * self.jump_rate);
                }
                s
            }
        }
    }
}

/// ln of a draw from the one-sided a-stable law with E e^{−λS} = e^{−λ^a}, 0 < a < 1:
/// S = (A(U)/E)^{(1−a)/a}, A(u) = sin(aπu)^{a/(1−a)} sin((1−a)πu) / sin(πu)^{1/(1−a)}.
#[inline]
fn ln_unit_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u = open01(rng);
    let e: f64 = Exp1.sample(rng);
    let b = 1.0 - a;
    let ln_a = (a / b) * (a * PI * u).sin().ln() + (b * PI * u).sin().ln() - (PI * u).sin().ln() / b;
    (b / a) * (ln_a - e.ln())
}

/// ln of a Gamma(k, 1) draw, safe for tiny shapes: Gamma(k) = Gamma(k+1)·U^{1/k}.
fn ln_gamma_variate<R: Rng + ?Sized>(k: f64, rng: &mut R) -> f64 {
    let g: f64 = Gamma::new(k + 1.0, 1.0).expect("positive shape").sample(rng);
    g.ln() + open01(rng).ln() / k
}
