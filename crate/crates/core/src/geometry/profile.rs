use serde::{Deserialize, Serialize};

/// Radial graph profiles ψ(x̃) = g(|x̃|) on R^{d−1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum Profile {
    /// ψ ≡ 0: the half-space.
    Flat,
    /// Λ·(√(|x̃|²+ε²) − ε): a cone of slope Λ with its apex rounded at scale ε.
    SmoothedCone { slope: f64, eps: f64 },
    /// h·exp(−|x̃|²/w²).
    Bump { height: f64, width: f64 },
}

impl Profile {
    #[inline]
    pub fn g(&self, s: f64) -> f64 {
        match *self {
            Profile::Flat => 0.0,
            Profile::SmoothedCone { slope, eps } => slope * ((s * s + eps * eps).sqrt() - eps),
            Profile::Bump { height, width } => height * (-(s * s) / (width * width)).exp(),
        }
    }

    /// Radial derivative g′(s).
    #[inline]
    pub fn dg(&self, s: f64) -> f64 {
        match *self {
            Profile::Flat => 0.0,
            Profile::SmoothedCone { slope, eps } => slope * s / (s * s + eps * eps).sqrt(),
            Profile::Bump { height, width } => {
                -2.0 * height * s / (width * width) * (-(s * s) / (width * width)).exp()
            }
        }
    }

    /// Bound on |∇ψ|.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Profile::Flat => 0.0,
            Profile::SmoothedCone { slope, .. } => slope.abs(),
            // max of 2h s/w² e^{−s²/w²} at s = w/√2
            Profile::Bump { height, width } => height.abs() * (2.0f64).sqrt() / width * (-0.5f64).exp(),
        }
    }

    /// Bound on the Lipschitz constant of ∇ψ.
    pub fn curvature(&self) -> f64 {
        match *self {
            Profile::Flat => 0.0,
            Profile::SmoothedCone { slope, eps } => slope.abs() / eps,
            Profile::Bump { height, width } => 2.0 * height.abs() / (width * width),
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, Profile::Flat)
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            Profile::Flat => Ok(()),
            Profile::SmoothedCone { slope, eps } if slope.is_finite() && eps > 0.0 => Ok(()),
            Profile::Bump { height, width } if height.is_finite() && width > 0.0 => Ok(()),
            p => Err(format!("invalid profile parameters {p:?}")),
        }
    }
}
