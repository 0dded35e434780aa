//! Alamouti space-time block coding with time-domain differential encoding.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::PskConstellation;

/// The 2x2 matrix `[[a, b], [-conj(b), conj(a)]]`.
///
/// Rows index transmit antennas (or the desired/conjugate rows of a received
/// block), columns index the two OFDM symbols of an STBC block. The set is
/// closed under addition, products, Hermitian transpose and left
/// multiplication by `diag(g, conj(g))`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlamoutiMatrix {
    pub a: Complex64,
    pub b: Complex64,
}

impl AlamoutiMatrix {
    pub const fn new(a: Complex64, b: Complex64) -> Self {
        Self { a, b }
    }

    pub fn identity() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Row-major entries.
    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        [[self.a, self.b], [-self.b.conj(), self.a.conj()]]
    }

    pub fn hermitian(&self) -> Self {
        Self::new(self.a.conj(), -self.b)
    }

    /// Elementwise complex conjugate, which keeps the Alamouti structure.
    pub fn conj(&self) -> Self {
        Self::new(self.a.conj(), self.b.conj())
    }

    /// `|a|^2 + |b|^2`, so that `M M^H = power() I`.
    pub fn power(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    /// `diag(g, conj(g)) * self`.
    #[inline]
    pub fn row_scale(&self, g: Complex64) -> Self {
        Self::new(g * self.a, g * self.b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s)
    }

    /// `Re{trace(self)}`.
    pub fn re_trace(&self) -> f64 {
        2.0 * self.a.re
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (2.0 * self.power()).sqrt()
    }
}

impl Mul for AlamoutiMatrix {
    type Output = AlamoutiMatrix;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.a * rhs.a - self.b * rhs.b.conj(),
            self.a * rhs.b + self.b * rhs.a.conj(),
        )
    }
}

impl Add for AlamoutiMatrix {
    type Output = AlamoutiMatrix;

    fn add(self, rhs: Self) -> Self {
        Self::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl Sub for AlamoutiMatrix {
    type Output = AlamoutiMatrix;

    fn sub(self, rhs: Self) -> Self {
        Self::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Neg for AlamoutiMatrix {
    type Output = AlamoutiMatrix;

    fn neg(self) -> Self {
        Self::new(-self.a, -self.b)
    }
}

/// Information matrix `U = [[x1, x2], [-x2*, x1*]]` from two unit-modulus
/// symbols.
pub fn alamouti_encode(x1: Complex64, x2: Complex64) -> Result<AlamoutiMatrix> {
    for x in [x1, x2] {
        if (x.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnitModulus(x.norm()));
        }
    }
    Ok(AlamoutiMatrix::new(x1, x2))
}

/// `S_{k+1} = S_k U_{k+1}`.
pub fn differential_encode(s_k: AlamoutiMatrix, u_next: AlamoutiMatrix) -> AlamoutiMatrix {
    s_k * u_next
}

/// A detected information matrix with the constellation indices of its
/// two symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub u: AlamoutiMatrix,
    pub indices: (usize, usize),
}

/// Maximises `Re{tr(U^H Q)}` over all Alamouti matrices built from PSK pairs.
///
/// With `U = [[x1, x2], [-x2*, x1*]]` the objective splits into
/// `Re{x1* (q11 + q22*)} + Re{x2* (q12 - q21*)}`, so each symbol is decided
/// on its own.
#[inline]
pub fn detect_from_metric(q: &[[Complex64; 2]; 2], constellation: &PskConstellation) -> Decision {
    let t1 = q[0][0] + q[1][1].conj();
    let t2 = q[0][1] - q[1][0].conj();
    let i1 = constellation.best_correlation(t1);
    let i2 = constellation.best_correlation(t2);
    Decision {
        u: AlamoutiMatrix::new(constellation.point(i1), constellation.point(i2)),
        indices: (i1, i2),
    }
}

/// ML differential detection of `U_{k+1}` from `Z_k` and `Z_{k+1}`.
#[inline]
pub fn ml_differential_detect(
    z_k: &AlamoutiMatrix,
    z_next: &AlamoutiMatrix,
    constellation: &PskConstellation,
) -> Decision {
    let q = (z_k.hermitian() * *z_next).entries();
    detect_from_metric(&q, constellation)
}

/// Coherent detection with known channel matrix `lambda`.
#[inline]
pub fn coherent_detect(
    z_obs: &AlamoutiMatrix,
    lambda: &AlamoutiMatrix,
    constellation: &PskConstellation,
) -> Decision {
    let q = (lambda.hermitian() * *z_obs).entries();
    detect_from_metric(&q, constellation)
}
