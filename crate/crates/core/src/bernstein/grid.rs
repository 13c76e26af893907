use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Log-spaced grid `lo * 10^(k / per_decade)`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub per_decade: usize,
}

impl LogGrid {
    pub fn new(lo: f64, hi: f64, per_decade: usize) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo && hi.is_finite() && per_decade > 0) {
            return Err(LabError::Parameter(format!(
                "log grid needs 0 < lo <= hi and per_decade > 0 (lo={lo}, hi={hi}, per_decade={per_decade})"
            )));
        }
        Ok(LogGrid { lo, hi, per_decade })
    }

    pub fn len(&self) -> usize {
        let decades = (self.hi / self.lo).log10();
        (decades * self.per_decade as f64 - 1e-9).ceil().max(0.0) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.len();
        let step = 1.0 / self.per_decade as f64;
        let mut out: Vec<f64> = (0..n).map(|k| self.lo * 10f64.powf(k as f64 * step)).collect();
        if let Some(last) = out.last_mut() {
            if n > 1 {
                *last = self.hi;
            }
        }
        out
    }
}

/// Grid used by the scaling fits: λ ∈ [λ₀, lambda_max], t ∈ [1, t_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingGrid {
    pub lambda_max: f64,
    pub t_max: f64,
    pub per_decade: usize,
}

impl Default for ScalingGrid {
    fn default() -> Self {
        ScalingGrid { lambda_max: 1e6, t_max: 1e6, per_decade: 200 }
    }
}

impl ScalingGrid {
    pub fn lambdas(&self, lambda0: f64) -> Result<Vec<f64>> {
        Ok(LogGrid::new(lambda0, self.lambda_max.max(lambda0), self.per_decade)?.points())
    }

    pub fn ts(&self) -> Result<Vec<f64>> {
        Ok(LogGrid::new(1.0, self.t_max, self.per_decade)?.points())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_count() {
        let g = LogGrid::new(1e-6, 1e6, 200).unwrap();
        let p = g.points();
        assert_eq!(p.len(), 2401);
        assert_eq!(p[0], 1e-6);
        assert_eq!(*p.last().unwrap(), 1e6);
        assert!((p[200] / 1e-5 - 1.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(LogGrid::new(3.0, 3.0, 10).unwrap().points(), vec![3.0]);
        assert!(LogGrid::new(0.0, 1.0, 10).is_err());
    }
}
