//! Fixed-capacity points in R^d for 2 <= d <= 4.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub const MAX_DIM: usize = 4;

/// A point (or vector) in R^d. Copyable so that inner Monte Carlo loops never allocate.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct Point {
    c: [f64; MAX_DIM],
    dim: usize,
}

impl Point {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Point { c: [0.0; MAX_DIM], dim }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut p = Point::zeros(xs.len());
        p.c[..xs.len()].copy_from_slice(xs);
        p
    }

    /// Unit vector along axis `i`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut p = Point::zeros(dim);
        p.c[i] = 1.0;
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    #[inline]
    pub fn dot(&self, o: &Point) -> f64 {
        debug_assert_eq!(self.dim, o.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            s += self.c[i] * o.c[i];
        }
        s
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist(&self, o: &Point) -> f64 {
        (*self - *o).norm()
    }

    pub fn normalized(&self) -> Point {
        let n = self.norm();
        *self * (1.0 / n)
    }

    /// The first d-1 coordinates as a point in R^{d-1}.
    pub fn tangential(&self) -> Point {
        let mut p = Point::zeros(self.dim - 1);
        p.c[..self.dim - 1].copy_from_slice(&self.c[..self.dim - 1]);
        p
    }

    #[inline]
    pub fn last(&self) -> f64 {
        self.c[self.dim - 1]
    }

    /// Appends a coordinate, lifting R^{d-1} to R^d.
    pub fn extend(&self, last: f64) -> Point {
        let mut p = Point::zeros(self.dim + 1);
        p.c[..self.dim].copy_from_slice(&self.c[..self.dim]);
        p.c[self.dim] = last;
        p
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }
}

impl std::fmt::Debug for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.as_slice().to_vec()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = String;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(format!("point must have 1..={MAX_DIM} coordinates, got {}", v.len()));
        }
        Ok(Point::from_slice(&v))
    }
}

impl Index<usize> for Point {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.dim);
        &self.c[i]
    }
}

impl IndexMut<usize> for Point {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        debug_assert!(i < self.dim);
        &mut self.c[i]
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(mut self, o: Point) -> Point {
        for i in 0..self.dim {
            self.c[i] += o.c[i];
        }
        self
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(mut self, o: Point) -> Point {
        for i in 0..self.dim {
            self.c[i] -= o.c[i];
        }
        self
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(mut self, s: f64) -> Point {
        for i in 0..self.dim {
            self.c[i] *= s;
        }
        self
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        self * -1.0
    }
}

/// Volume of the unit ball in R^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    std::f64::consts::PI.powf(h) / crate::special::gamma(h + 1.0)
}

/// Surface area of the unit sphere S^{d-1}.
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// Completes `n` to an orthonormal frame; the returned vectors span n^perp.
pub fn orthonormal_complement(n: &Point) -> Vec<Point> {
    let d = n.dim();
    let n = n.normalized();
    let mut basis: Vec<Point> = Vec::with_capacity(d - 1);
    for i in 0..d {
        let mut v = Point::unit(d, i);
        v = v - n * v.dot(&n);
        for b in &basis {
            v = v - *b * v.dot(b);
        }
        let len = v.norm();
        if len > 1e-8 {
            basis.push(v * (1.0 / len));
        }
        if basis.len() == d - 1 {
            break;
        }
    }
    basis
}
