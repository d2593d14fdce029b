//! Exact 2×2 complex kernels.
//!
//! Everything in the simulator is a two-component polarization vector or a
//! 2×2 Jones-type matrix, so the general-purpose routines here are written
//! out by hand: products, adjoints, a Givens/closed-form singular value
//! decomposition and a Hermitian Cholesky factorization.
//!
//! Complex amplitudes carry the two quadratures as real and imaginary part.
//! Covariances are normalized per quadrature: `cov(z) = E[z z†] / 2`, so a
//! vacuum mode has covariance `I`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Eigenvalues below this (negated) are treated as roundoff and clamped to 0.
pub const PSD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
}

/// Dual-polarization complex amplitude `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVec2 {
    pub x: C64,
    pub y: C64,
}

impl CVec2 {
    pub const ZERO: CVec2 = CVec2 { x: ZERO, y: ZERO };

    pub const fn new(x: C64, y: C64) -> Self {
        Self { x, y }
    }

    pub fn from_parts(xr: f64, xi: f64, yr: f64, yi: f64) -> Self {
        Self::new(C64::new(xr, xi), C64::new(yr, yi))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn get(&self, pol: usize) -> C64 {
        match pol {
            0 => self.x,
            _ => self.y,
        }
    }

    /// Outer product `a · b†`.
    pub fn outer(a: CVec2, b: CVec2) -> CMat2 {
        CMat2::new(
            a.x * b.x.conj(),
            a.x * b.y.conj(),
            a.y * b.x.conj(),
            a.y * b.y.conj(),
        )
    }
}

impl Add for CVec2 {
    type Output = CVec2;
    fn add(self, rhs: CVec2) -> CVec2 {
        CVec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for CVec2 {
    fn add_assign(&mut self, rhs: CVec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for CVec2 {
    type Output = CVec2;
    fn sub(self, rhs: CVec2) -> CVec2 {
        CVec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for CVec2 {
    type Output = CVec2;
    fn mul(self, rhs: f64) -> CVec2 {
        CVec2::new(self.x * rhs, self.y * rhs)
    }
}

/// 2×2 complex matrix, row-major: `m[row][col]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat2 {
    pub m: [[C64; 2]; 2],
}

impl Default for CMat2 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl CMat2 {
    pub const IDENTITY: CMat2 = CMat2 {
        m: [[ONE, ZERO], [ZERO, ONE]],
    };
    pub const ZERO: CMat2 = CMat2 {
        m: [[ZERO, ZERO], [ZERO, ZERO]],
    };

    pub const fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Self {
            m: [[m11, m12], [m21, m22]],
        }
    }

    pub fn real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self::new(m11.into(), m12.into(), m21.into(), m22.into())
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    pub fn diag_real(d1: f64, d2: f64) -> Self {
        Self::real(d1, 0.0, 0.0, d2)
    }

    /// Real rotation `[[cos, -sin], [sin, cos]]`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::real(c, -s, s, c)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(
            m[0][0].conj(),
            m[1][0].conj(),
            m[0][1].conj(),
            m[1][1].conj(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = &self.m;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.is_finite())
    }

    /// Squared norm of a row, i.e. the power gain seen by that output.
    pub fn row_power(&self, row: usize) -> f64 {
        self.m[row][0].norm_sqr() + self.m[row][1].norm_sqr()
    }

    /// `‖M M† − I‖_F`
    pub fn unitarity_residual(&self) -> f64 {
        (*self * self.adjoint() - Self::IDENTITY).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() < tol
    }

    pub fn hermitian_residual(&self) -> f64 {
        (*self - self.adjoint()).frobenius_norm()
    }

    /// Eigenvalues of a Hermitian matrix, descending. Only the Hermitian part
    /// is used.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = 0.5 * (self.m[0][1] + self.m[1][0].conj());
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean + half_gap, mean - half_gap]
    }

    pub fn mul_vec(&self, v: CVec2) -> CVec2 {
        let m = &self.m;
        CVec2::new(m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y)
    }

    /// Flattened `[re11, im11, re12, im12, re21, im21, re22, im22]`.
    pub fn to_reals(&self) -> [f64; 8] {
        let m = &self.m;
        [
            m[0][0].re, m[0][0].im, m[0][1].re, m[0][1].im, m[1][0].re, m[1][0].im, m[1][1].re,
            m[1][1].im,
        ]
    }

    pub fn from_reals(r: [f64; 8]) -> Self {
        Self::new(
            C64::new(r[0], r[1]),
            C64::new(r[2], r[3]),
            C64::new(r[4], r[5]),
            C64::new(r[6], r[7]),
        )
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, rhs: CMat2) -> CMat2 {
        let a = &self.m;
        let b = &rhs.m;
        CMat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<CVec2> for CMat2 {
    type Output = CVec2;
    fn mul(self, rhs: CVec2) -> CVec2 {
        self.mul_vec(rhs)
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, rhs: CMat2) -> CMat2 {
        let mut out = self;
        for (r, row) in out.m.iter_mut().enumerate() {
            for (c, z) in row.iter_mut().enumerate() {
                *z += rhs.m[r][c];
            }
        }
        out
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, rhs: CMat2) -> CMat2 {
        self + (-rhs)
    }
}

impl Neg for CMat2 {
    type Output = CMat2;
    fn neg(self) -> CMat2 {
        self.scale(-1.0)
    }
}

/// `M = U · diag(sigma) · V` with `U`, `V` unitary and `sigma` descending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Svd2 {
    pub u: CMat2,
    pub sigma: [f64; 2],
    pub v: CMat2,
}

impl Svd2 {
    pub fn reconstruct(&self) -> CMat2 {
        self.u * CMat2::diag_real(self.sigma[0], self.sigma[1]) * self.v
    }
}

/// Singular value decomposition of a 2×2 complex matrix.
///
/// A complex Givens rotation triangularizes `M`, diagonal phases make the
/// triangle real, and the real 2×2 problem is solved in closed form from its
/// rotation angles. Gauge: the first nonzero entry of every column of `U` is
/// real positive.
pub fn svd2(m: &CMat2) -> Result<Svd2, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }

    // Left Givens: G·M has a zero in (2,1).
    let (a, c) = (m.m[0][0], m.m[1][0]);
    let r = (a.norm_sqr() + c.norm_sqr()).sqrt();
    let g = if r > 0.0 {
        CMat2::new(a.conj() / r, c.conj() / r, -c / r, a / r)
    } else {
        CMat2::IDENTITY
    };
    let tri = g * *m;

    // Right phase on column 2 makes (1,2) real, left phase on row 2 makes (2,2) real.
    let x = tri.m[0][1];
    let right_phase = if x.norm() > 0.0 {
        (x / x.norm()).conj()
    } else {
        ONE
    };
    let y = tri.m[1][1] * right_phase;
    let left_phase = if y.norm() > 0.0 {
        (y / y.norm()).conj()
    } else {
        ONE
    };
    let (f, gg, h) = (tri.m[0][0].re.max(0.0), x.norm(), y.norm());

    // Real upper triangle [[f, gg], [0, h]] = R(phi) diag(s1, s2) R(theta).
    let e = 0.5 * (f + h);
    let ff = 0.5 * (f - h);
    let gq = 0.5 * gg;
    let hq = -0.5 * gg;
    let q = e.hypot(hq);
    let rr = ff.hypot(gq);
    let sum = hq.atan2(e);
    let diff = gq.atan2(ff);
    let phi = 0.5 * (sum + diff);
    let theta = 0.5 * (sum - diff);
    let s1 = q + rr;
    let mut s2 = q - rr;
    let mut left_rot = CMat2::rotation(phi);
    if s2 < 0.0 {
        s2 = -s2;
        left_rot.m[0][1] = -left_rot.m[0][1];
        left_rot.m[1][1] = -left_rot.m[1][1];
    }
    let right_rot = CMat2::rotation(theta);

    let d_left = CMat2::diag(ONE, left_phase);
    let d_right = CMat2::diag(ONE, right_phase);
    let mut u = g.adjoint() * d_left.adjoint() * left_rot;
    let mut v = right_rot * d_right.adjoint();

    // Column gauge of U, compensated in the rows of V.
    for col in 0..2 {
        let lead = if u.m[0][col].norm() > 1e-14 {
            u.m[0][col]
        } else {
            u.m[1][col]
        };
        let n = lead.norm();
        if n > 0.0 {
            let ph = lead / n;
            u.m[0][col] *= ph.conj();
            u.m[1][col] *= ph.conj();
            v.m[col][0] *= ph;
            v.m[col][1] *= ph;
        }
    }

    Ok(Svd2 {
        u,
        sigma: [s1, s2],
        v,
    })
}

/// Lower-triangular `L` with `L·L† = C` for a Hermitian PSD `C`.
///
/// Eigenvalues down to `-PSD_TOLERANCE` are accepted as roundoff. A zero
/// first pivot zeroes the first column of `L`.
pub fn chol2(c: &CMat2) -> Result<CMat2, LinalgError> {
    if !c.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let asym = c.hermitian_residual();
    if asym > 1e-12 * (1.0 + c.max_abs()) {
        return Err(LinalgError::NotHermitian(asym));
    }
    let eig = c.hermitian_eigenvalues();
    if eig[1] < -PSD_TOLERANCE {
        return Err(LinalgError::NotPsd(eig[1]));
    }

    let c11 = c.m[0][0].re.max(0.0);
    let c22 = c.m[1][1].re.max(0.0);
    let c21 = 0.5 * (c.m[1][0] + c.m[0][1].conj());
    let (l11, l21) = if c11 > 1e-300 {
        let l11 = c11.sqrt();
        (l11, c21 / l11)
    } else {
        (0.0, ZERO)
    };
    let l22 = (c22 - l21.norm_sqr()).max(0.0).sqrt();
    Ok(CMat2::new(l11.into(), ZERO, l21, l22.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit_disk(rng: &mut impl Rng) -> C64 {
        loop {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if z.norm() <= 1.0 {
                return z;
            }
        }
    }

    fn random_matrix(rng: &mut impl Rng) -> CMat2 {
        CMat2::new(
            random_unit_disk(rng),
            random_unit_disk(rng),
            random_unit_disk(rng),
            random_unit_disk(rng),
        )
    }

    /// Singular values from the characteristic polynomial of M†M.
    fn oracle_singular_values(m: &CMat2) -> [f64; 2] {
        let h = m.adjoint() * *m;
        let tr = h.trace().re;
        let det = h.det().re;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        [
            (0.5 * (tr + disc)).max(0.0).sqrt(),
            (0.5 * (tr - disc)).max(0.0).sqrt(),
        ]
    }

    #[test]
    fn svd_identity() {
        let s = svd2(&CMat2::IDENTITY).unwrap();
        assert_eq!(s.sigma, [1.0, 1.0]);
        assert!((s.reconstruct() - CMat2::IDENTITY).frobenius_norm() < 1e-15);
        assert!((s.u - CMat2::IDENTITY).frobenius_norm() < 1e-15);
        assert!((s.v - CMat2::IDENTITY).frobenius_norm() < 1e-15);
    }

    #[test]
    fn svd_diagonal() {
        let m = CMat2::diag_real(0.9, 0.5);
        let s = svd2(&m).unwrap();
        assert!((s.sigma[0] - 0.9).abs() < 1e-15);
        assert!((s.sigma[1] - 0.5).abs() < 1e-15);
        assert!((s.reconstruct() - m).frobenius_norm() < 1e-15);
        // Swapped order still sorts descending.
        let s = svd2(&CMat2::diag_real(0.5, -0.9)).unwrap();
        assert!((s.sigma[0] - 0.9).abs() < 1e-15);
        assert!((s.reconstruct() - CMat2::diag_real(0.5, -0.9)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn svd_random_against_eigen_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let m = random_matrix(&mut rng);
            let s = svd2(&m).unwrap();
            assert!((s.reconstruct() - m).frobenius_norm() < 1e-12);
            assert!(s.u.unitarity_residual() < 1e-12);
            assert!(s.v.unitarity_residual() < 1e-12);
            assert!(s.sigma[0] >= s.sigma[1] && s.sigma[1] >= 0.0);
            let o = oracle_singular_values(&m);
            assert!((s.sigma[0] - o[0]).abs() < 1e-10);
            assert!((s.sigma[1] - o[1]).abs() < 1e-10);
            for col in 0..2 {
                let lead = if s.u.m[0][col].norm() > 1e-14 {
                    s.u.m[0][col]
                } else {
                    s.u.m[1][col]
                };
                assert!(lead.im.abs() < 1e-12 && lead.re > 0.0);
            }
        }
    }

    #[test]
    fn svd_rank_deficient_and_zero() {
        let m = CMat2::new(C64::new(1.0, 1.0), C64::new(2.0, -1.0), ZERO, ZERO);
        let s = svd2(&m).unwrap();
        assert!(s.sigma[1] < 1e-15);
        assert!((s.reconstruct() - m).frobenius_norm() < 1e-12);
        let s = svd2(&CMat2::ZERO).unwrap();
        assert_eq!(s.sigma, [0.0, 0.0]);
        assert!(s.u.is_unitary(1e-15) && s.v.is_unitary(1e-15));
        let col0 = CMat2::new(ZERO, C64::new(0.0, 2.0), ZERO, C64::new(1.0, 0.0));
        let s = svd2(&col0).unwrap();
        assert!((s.reconstruct() - col0).frobenius_norm() < 1e-12);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let m = CMat2::real(f64::NAN, 0.0, 0.0, 1.0);
        assert_eq!(svd2(&m), Err(LinalgError::NonFinite));
    }

    #[test]
    fn chol_examples() {
        assert_eq!(chol2(&CMat2::IDENTITY).unwrap(), CMat2::IDENTITY);
        let l = chol2(&CMat2::diag_real(4.0, 1.0)).unwrap();
        assert!((l - CMat2::diag_real(2.0, 1.0)).frobenius_norm() < 1e-15);
        let c = CMat2::real(1.0, 0.5, 0.5, 1.0);
        let l = chol2(&c).unwrap();
        let expect = CMat2::real(1.0, 0.0, 0.5, 0.75f64.sqrt());
        assert!((l - expect).frobenius_norm() < 1e-15);
        assert!((l * l.adjoint() - c).frobenius_norm() < 1e-10);
    }

    #[test]
    fn chol_zero_pivot_and_errors() {
        let l = chol2(&CMat2::diag_real(0.0, 0.75)).unwrap();
        assert_eq!(l.m[0][0], ZERO);
        assert_eq!(l.m[1][0], ZERO);
        assert!((l.m[1][1].re - 0.75f64.sqrt()).abs() < 1e-15);
        // Tiny negative from roundoff is clamped.
        assert!(chol2(&CMat2::diag_real(-1e-13, 1.0)).is_ok());
        assert!(matches!(
            chol2(&CMat2::diag_real(-1e-6, 1.0)),
            Err(LinalgError::NotPsd(_))
        ));
        assert!(matches!(
            chol2(&CMat2::real(1.0, 0.5, 0.0, 1.0)),
            Err(LinalgError::NotHermitian(_))
        ));
    }

    #[test]
    fn unitary_has_unit_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u = svd2(&random_matrix(&mut rng)).unwrap().u;
            let s = svd2(&(u * CMat2::rotation(rng.random_range(0.0..6.3)))).unwrap();
            assert!((s.sigma[0] - 1.0).abs() < 1e-12 && (s.sigma[1] - 1.0).abs() < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cplx() -> impl Strategy<Value = C64> {
            (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(re, im)| C64::new(re, im))
        }

        proptest! {
            #[test]
            fn svd_reconstructs(a in cplx(), b in cplx(), c in cplx(), d in cplx()) {
                let m = CMat2::new(a, b, c, d);
                let s = svd2(&m).unwrap();
                let scale = 1.0 + m.frobenius_norm();
                prop_assert!((s.reconstruct() - m).frobenius_norm() < 1e-12 * scale);
                prop_assert!(s.u.unitarity_residual() < 1e-12);
                prop_assert!(s.v.unitarity_residual() < 1e-12);
            }

            #[test]
            fn chol_recovers_factor(d1 in 0.01f64..5.0, d2 in 0.01f64..5.0, off in cplx()) {
                let l = CMat2::new(d1.into(), ZERO, off * 0.1, d2.into());
                let back = chol2(&(l * l.adjoint())).unwrap();
                prop_assert!((back - l).frobenius_norm() < 1e-10 * (1.0 + l.frobenius_norm()));
            }
        }
    }
}
