//! Halton low-discrepancy sequences for quasi-random quadrature.

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `i` in base `b`.
#[inline]
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv_b = 1.0 / b as f64;
    let mut f = inv_b;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv_b;
    }
    r
}

/// Halton sequence in `[0,1)^dim`. Index 0 (the origin) is skipped.
#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
}

impl Halton {
    pub fn new(dim: usize) -> Self {
        assert!(dim <= PRIMES.len(), "Halton supports at most {} dimensions", PRIMES.len());
        Halton { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes the `i`-th point into `out[..dim]`.
    #[inline]
    pub fn fill(&self, i: u64, out: &mut [f64]) {
        for (k, o) in out.iter_mut().take(self.dim).enumerate() {
            *o = radical_inverse(i + 1, PRIMES[k]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_two_prefix() {
        let v: Vec<f64> = (1..=4).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn integrates_smooth_function() {
        let h = Halton::new(2);
        let mut p = [0.0; 2];
        let n = 20_000;
        let mut s = 0.0;
        for i in 0..n {
            h.fill(i, &mut p);
            s += p[0] * p[1];
        }
        assert!((s / n as f64 - 0.25).abs() < 1e-3);
    }
}
