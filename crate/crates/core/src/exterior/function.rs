use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::point::Point;

/// Exterior data families, each given by a formula on all of R^d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExteriorKind {
    Constant { value: f64 },
    /// min(|y − y₀|^β, cap)
    Power { center: Point, cap: f64 },
    /// min(|y_d|^β, cap)
    VerticalPower { cap: f64 },
    /// 1{y·n > c}
    HalfspaceIndicator { normal: Point, offset: f64 },
    /// 1{|y − c| < ρ}
    BallIndicator { center: Point, radius: f64 },
    /// ½(1 + tanh((y·n − c)/w))
    MollifiedIndicator { normal: Point, offset: f64, width: f64 },
    /// |y − z₀|^{−s}
    Singular { center: Point, s: f64 },
}

/// f with its declared L^p-Hölder class (p ∈ (1, ∞], β > 1/p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorFunction {
    pub kind: ExteriorKind,
    /// `f64::INFINITY` for p = ∞.
    pub p: f64,
    pub beta: f64,
}

impl ExteriorFunction {
    pub fn new(kind: ExteriorKind, p: f64, beta: f64) -> Result<Self> {
        if !(p > 1.0) || !(beta > 0.0) {
            return Err(LabError::Parameter(format!("need p > 1 and beta > 0 (p={p}, beta={beta})")));
        }
        if beta <= 1.0 / p {
            return Err(LabError::Hypothesis(format!("beta = {beta} must exceed 1/p = {}", 1.0 / p)));
        }
        if let ExteriorKind::Singular { center, s } = kind {
            let d = center.dim() as f64;
            if !(s > 0.0) || s >= d / p {
                return Err(LabError::Hypothesis(format!("singular exponent {s} must lie in (0, d/p) for local L^p")));
            }
        }
        Ok(ExteriorFunction { kind, p, beta })
    }

    pub fn constant(value: f64) -> Self {
        ExteriorFunction { kind: ExteriorKind::Constant { value }, p: f64::INFINITY, beta: 1.0 }
    }

    pub fn power(center: Point, beta: f64, cap: f64) -> Result<Self> {
        Self::new(ExteriorKind::Power { center, cap }, f64::INFINITY, beta)
    }

    /// |y − z₀|^{−s} with s = 0.9 (d/p − β), which keeps the L^p modulus of
    /// continuity of order |h|^β (it scales like |h|^{d/p − s}).
    pub fn singular(center: Point, p: f64, beta: f64) -> Result<Self> {
        let d = center.dim() as f64;
        if !(p.is_finite() && beta < d / p) {
            return Err(LabError::Hypothesis(format!("singular family needs finite p and beta < d/p (p={p}, beta={beta})")));
        }
        Self::new(ExteriorKind::Singular { center, s: 0.9 * (d / p - beta) }, p, beta)
    }

    pub fn tag(&self) -> &'static str {
        match self.kind {
            ExteriorKind::Constant { .. } => "constant",
            ExteriorKind::Power { .. } => "power",
            ExteriorKind::VerticalPower { .. } => "vertical-power",
            ExteriorKind::HalfspaceIndicator { .. } => "halfspace-indicator",
            ExteriorKind::BallIndicator { .. } => "ball-indicator",
            ExteriorKind::MollifiedIndicator { .. } => "mollified-indicator",
            ExteriorKind::Singular { .. } => "singular",
        }
    }

    #[inline]
    pub fn eval(&self, y: &Point) -> f64 {
        match self.kind {
            ExteriorKind::Constant { value } => value,
            ExteriorKind::Power { center, cap } => y.dist(&center).powf(self.beta).min(cap),
            ExteriorKind::VerticalPower { cap } => y.last().abs().powf(self.beta).min(cap),
            ExteriorKind::HalfspaceIndicator { normal, offset } => (y.dot(&normal) > offset) as u8 as f64,
            ExteriorKind::BallIndicator { center, radius } => (y.dist(&center) < radius) as u8 as f64,
            ExteriorKind::MollifiedIndicator { normal, offset, width } => {
                0.5 * (1.0 + ((y.dot(&normal) - offset) / width).tanh())
            }
            ExteriorKind::Singular { center, s } => y.dist(&center).powf(-s),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ExteriorKind::Constant { .. })
    }

    /// sup |f| where finite.
    pub fn sup_bound(&self) -> Option<f64> {
        match self.kind {
            ExteriorKind::Constant { value } => Some(value.abs()),
            ExteriorKind::Power { cap, .. } | ExteriorKind::VerticalPower { cap } => Some(cap),
            ExteriorKind::HalfspaceIndicator { .. }
            | ExteriorKind::BallIndicator { .. }
            | ExteriorKind::MollifiedIndicator { .. } => Some(1.0),
            ExteriorKind::Singular { .. } => None,
        }
    }

    /// Theorem hypothesis 0 < γ < β − 1/p.
    pub fn admits_gamma(&self, gamma: f64) -> bool {
        gamma > 0.0 && gamma < self.beta - 1.0 / self.p
    }
}
