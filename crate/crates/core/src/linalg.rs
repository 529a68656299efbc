//! Fixed-size complex linear algebra for the 2x2 relay model.
//!
//! Everything here is a small `Copy` value type. The QR factorization uses a
//! canonical convention: `r11` and `r22` are real and nonnegative and `r21`
//! is exactly zero, so `real(r12) / r11` has no phase ambiguity.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex baseband sample.
pub type Cplx = Complex64;

/// Smallest first-column norm accepted by [`qr_decompose`].
pub const MIN_COLUMN_NORM: f64 = 1e-300;

const ZERO: Cplx = Cplx::new(0.0, 0.0);
const ONE: Cplx = Cplx::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub a: Cplx,
    pub b: Cplx,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { a: ZERO, b: ZERO };

    pub const fn new(a: Cplx, b: Cplx) -> Self {
        Vec2 { a, b }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Hermitian inner product `selfᴴ · other`.
    pub fn dot_h(&self, other: &Vec2) -> Cplx {
        self.a.conj() * other.a + self.b.conj() * other.b
    }

    pub fn scale(&self, s: Cplx) -> Vec2 {
        Vec2::new(self.a * s, self.b * s)
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.a - o.a, self.b - o.b)
    }
}

/// Row-major 2x2 complex matrix `[[h11, h12], [h21, h22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2 {
    pub h11: Cplx,
    pub h12: Cplx,
    pub h21: Cplx,
    pub h22: Cplx,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        h11: ONE,
        h12: ZERO,
        h21: ZERO,
        h22: ONE,
    };

    pub const fn new(h11: Cplx, h12: Cplx, h21: Cplx, h22: Cplx) -> Self {
        Mat2 { h11, h12, h21, h22 }
    }

    /// Real-valued matrix, convenient for fixtures.
    pub const fn real(h11: f64, h12: f64, h21: f64, h22: f64) -> Self {
        Mat2::new(
            Cplx::new(h11, 0.0),
            Cplx::new(h12, 0.0),
            Cplx::new(h21, 0.0),
            Cplx::new(h22, 0.0),
        )
    }

    pub fn from_columns(c1: Vec2, c2: Vec2) -> Self {
        Mat2::new(c1.a, c2.a, c1.b, c2.b)
    }

    pub fn col1(&self) -> Vec2 {
        Vec2::new(self.h11, self.h21)
    }

    pub fn col2(&self) -> Vec2 {
        Vec2::new(self.h12, self.h22)
    }

    pub fn det(&self) -> Cplx {
        self.h11 * self.h22 - self.h12 * self.h21
    }

    /// Largest entry magnitude.
    pub fn norm_max(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_fro_sqr(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn entries(&self) -> [Cplx; 4] {
        [self.h11, self.h12, self.h21, self.h22]
    }

    pub fn conj_transpose(&self) -> Mat2 {
        Mat2::new(
            self.h11.conj(),
            self.h21.conj(),
            self.h12.conj(),
            self.h22.conj(),
        )
    }

    pub fn mul_vec(&self, x: &Vec2) -> Vec2 {
        Vec2::new(
            self.h11 * x.a + self.h12 * x.b,
            self.h21 * x.a + self.h22 * x.b,
        )
    }

    /// Inverse, or `None` when the determinant is exactly zero.
    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == ZERO {
            return None;
        }
        let inv = d.inv();
        Some(Mat2::new(
            self.h22 * inv,
            -self.h12 * inv,
            -self.h21 * inv,
            self.h11 * inv,
        ))
    }

    /// `true` when `|det| > rel_tol * ‖H‖_F²`.
    pub fn is_nonsingular(&self, rel_tol: f64) -> bool {
        self.det().norm() > rel_tol * self.norm_fro_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }

    /// Entry-wise maximum absolute difference.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.h11 * o.h11 + self.h12 * o.h21,
            self.h11 * o.h12 + self.h12 * o.h22,
            self.h21 * o.h11 + self.h22 * o.h21,
            self.h21 * o.h12 + self.h22 * o.h22,
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.h11 - o.h11,
            self.h12 - o.h12,
            self.h21 - o.h21,
            self.h22 - o.h22,
        )
    }
}

/// `H = Q·R` with unitary `Q` and canonical upper-triangular `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrFactors {
    pub q: Mat2,
    pub r: Mat2,
}

impl QrFactors {
    pub fn r11(&self) -> f64 {
        self.r.h11.re
    }

    pub fn r12(&self) -> Cplx {
        self.r.h12
    }

    pub fn r22(&self) -> f64 {
        self.r.h22.re
    }
}

/// QR factorization by Gram-Schmidt on the two columns.
///
/// The second basis vector is taken as the orthogonal complement of the
/// first, rotated so that `r22 = q2ᴴ·c2` is real and nonnegative. This keeps
/// `Q` unitary to rounding even when the columns are nearly parallel, and
/// represents a rank-deficient `H` with `r22 = 0`.
pub fn qr_decompose(h: &Mat2) -> Result<QrFactors> {
    let c1 = h.col1();
    let c2 = h.col2();
    let r11 = c1.norm();
    if r11.is_nan() || r11 <= MIN_COLUMN_NORM {
        return Err(Error::DegenerateChannel("first channel column vanishes"));
    }
    let q1 = c1.scale(Cplx::new(1.0 / r11, 0.0));
    let r12 = q1.dot_h(&c2);

    let perp = Vec2::new(-q1.b.conj(), q1.a.conj());
    let z = perp.dot_h(&c2);
    let r22 = z.norm();
    let q2 = if r22 > 0.0 { perp.scale(z / r22) } else { perp };

    Ok(QrFactors {
        q: Mat2::from_columns(q1, q2),
        r: Mat2::new(Cplx::new(r11, 0.0), r12, ZERO, Cplx::new(r22, 0.0)),
    })
}

/// `W = Qᴴ·y`.
pub fn apply_qh(f: &QrFactors, y: &Vec2) -> Vec2 {
    let q = &f.q;
    Vec2::new(
        q.h11.conj() * y.a + q.h21.conj() * y.b,
        q.h12.conj() * y.a + q.h22.conj() * y.b,
    )
}

/// Exchange the two columns (the transmit-layer order).
pub fn swap_columns(h: &Mat2) -> Mat2 {
    Mat2::new(h.h12, h.h11, h.h22, h.h21)
}
