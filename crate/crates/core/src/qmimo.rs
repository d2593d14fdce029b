//! Trusted-noise correction of the MIMO output.
//!
//! The effective equalizer matrix is divided by its largest singular value so
//! that every singular value is at most one. The normalized matrix `W0` is then
//! an attenuating (beam-splitter) operation, and the vacuum it would have
//! coupled in is supplied digitally as trusted noise with covariance
//! `C_add = I − W0·W0†`. The corrected output has unit processing-noise
//! covariance again, so the shot-noise unit is preserved.
//!
//! Two constructions of the added noise are provided and must agree:
//! the Cholesky factor of `C_add` (the closed-form two-line recipe) and the
//! singular-vector route `U·diag(√(1−ω²))·N_D`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg2::{chol2, svd2, CMat2, CVec2, LinalgError, Svd2, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmimoError {
    #[error("effective matrix is zero, cannot normalize")]
    Degenerate,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Below this `V_XX` the closed-form recipe switches to its degenerate branch.
pub const VXX_FLOOR: f64 = 1e-12;

/// Per-frame correction derived from a frozen tap matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCorrection {
    pub w0: CMat2,
    /// Singular values of `W0`, descending; the first is 1.
    pub omega: [f64; 2],
    pub omega_max: f64,
    pub c_add: CMat2,
    pub l_add: CMat2,
    pub svd: Svd2,
}

/// Closed-form entries of the added-noise covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AddedNoiseVariances {
    pub v_xx: f64,
    pub v_yy: f64,
    pub v_xy: C64,
}

impl AddedNoiseVariances {
    pub fn as_matrix(&self) -> CMat2 {
        CMat2::new(
            self.v_xx.into(),
            self.v_xy,
            self.v_xy.conj(),
            self.v_yy.into(),
        )
    }
}

/// Normalize the effective matrix `[[w_XX, w_YX], [w_XY, w_YY]]` by its
/// largest singular value and build the trusted-noise covariance.
pub fn normalize_w(w_eff: &CMat2) -> Result<NoiseCorrection, QmimoError> {
    let raw = svd2(w_eff)?;
    let omega_max = raw.sigma[0];
    if omega_max <= 0.0 {
        return Err(QmimoError::Degenerate);
    }
    let w0 = w_eff.scale(1.0 / omega_max);
    let svd = Svd2 {
        u: raw.u,
        sigma: [1.0, raw.sigma[1] / omega_max],
        v: raw.v,
    };
    let mut c_add = CMat2::IDENTITY - w0 * w0.adjoint();
    // Exact Hermitian symmetry: real diagonal, conjugate off-diagonals.
    c_add.m[0][0].im = 0.0;
    c_add.m[1][1].im = 0.0;
    c_add.m[1][0] = c_add.m[0][1].conj();
    let l_add = chol2(&c_add)?;
    Ok(NoiseCorrection {
        w0,
        omega: svd.sigma,
        omega_max,
        c_add,
        l_add,
        svd,
    })
}

impl NoiseCorrection {
    /// `V_XX`, `V_YY`, `V_XY` evaluated directly from the entries of `W0`.
    pub fn closed_form_variances(&self) -> AddedNoiseVariances {
        let [[w_xx, w_yx], [w_xy, w_yy]] = self.w0.m;
        AddedNoiseVariances {
            v_xx: 1.0 - w_xx.norm_sqr() - w_yx.norm_sqr(),
            v_yy: 1.0 - w_xy.norm_sqr() - w_yy.norm_sqr(),
            v_xy: -(w_xx * w_xy.conj()) - w_yx * w_yy.conj(),
        }
    }

    /// Singular values assigned to output polarizations `(ω_X, ω_Y)`: each
    /// left singular vector belongs to the polarization holding most of its
    /// power.
    pub fn axis_omegas(&self) -> [f64; 2] {
        let u = &self.svd.u;
        let first_on_x = u.m[0][0].norm_sqr() >= u.m[1][0].norm_sqr();
        let [big, small] = self.omega;
        if first_on_x {
            [big, small]
        } else {
            [small, big]
        }
    }

    /// Same as [`Self::axis_omegas`] but before normalization.
    pub fn raw_axis_omegas(&self) -> [f64; 2] {
        let [x, y] = self.axis_omegas();
        [x * self.omega_max, y * self.omega_max]
    }

    /// Added noise `L_add · ξ` for a given pair of unit vacuum samples.
    pub fn cholesky_noise(&self, xi: CVec2) -> CVec2 {
        self.l_add * xi
    }

    /// The two-line recipe `n_X = √V_XX·ξ_X`,
    /// `n_Y = √(V_YY − |V_XY|²/V_XX)·ξ_Y + V_XY*/√V_XX·ξ_X`.
    /// When `V_XX` vanishes the cross term is bounded by `√(V_XX·V_YY)` and
    /// is dropped, leaving `n_Y = √V_YY·ξ_Y`.
    pub fn closed_form_noise(&self, xi: CVec2) -> CVec2 {
        let v = self.closed_form_variances();
        if v.v_xx <= VXX_FLOOR {
            return CVec2::new(xi.x * v.v_xx.max(0.0).sqrt(), xi.y * v.v_yy.max(0.0).sqrt());
        }
        let sx = v.v_xx.sqrt();
        let ny_gain = (v.v_yy - v.v_xy.norm_sqr() / v.v_xx).max(0.0).sqrt();
        CVec2::new(xi.x * sx, xi.y * ny_gain + xi.x * (v.v_xy.conj() / sx))
    }

    /// Fresh trusted vacuum noise with covariance `C_add`.
    pub fn sample_trusted_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec2 {
        self.cholesky_noise(vacuum(rng))
    }

    /// Corrected output `W0·S_in + N_add`.
    pub fn apply<R: Rng + ?Sized>(&self, s_in: CVec2, rng: &mut R) -> CVec2 {
        self.w0 * s_in + self.sample_trusted_noise(rng)
    }

    /// Normalized output without the trusted noise, `W0·S_in`.
    pub fn apply_uncorrected(&self, s_in: CVec2) -> CVec2 {
        self.w0 * s_in
    }

    /// Singular-vector construction `U·(Ω0·V·N + diag(√(1−ω0²))·N_D)`.
    pub fn svd_noise_path(&self, n: CVec2, n_d: CVec2) -> CVec2 {
        let s = &self.svd;
        let omega = CMat2::diag_real(s.sigma[0], s.sigma[1]);
        let inner = omega * (s.v * n) + self.attenuation_gains() * n_d;
        s.u * inner
    }

    fn attenuation_gains(&self) -> CMat2 {
        let g = |w: f64| (1.0 - w * w).max(0.0).sqrt();
        CMat2::diag_real(g(self.svd.sigma[0]), g(self.svd.sigma[1]))
    }

    /// Output covariance of the singular-vector route for unit inputs
    /// `N`, `N_D`: `(U Ω0 V)(U Ω0 V)† + U D² U†`.
    pub fn svd_path_covariance(&self) -> CMat2 {
        let s = &self.svd;
        let a = s.u * CMat2::diag_real(s.sigma[0], s.sigma[1]) * s.v;
        let b = s.u * self.attenuation_gains();
        a * a.adjoint() + b * b.adjoint()
    }

    /// Same covariance through the Cholesky route: `W0 W0† + L L†`.
    pub fn cholesky_path_covariance(&self) -> CMat2 {
        self.w0 * self.w0.adjoint() + self.l_add * self.l_add.adjoint()
    }
}

/// Complex vacuum sample pair: unit variance per quadrature.
pub fn vacuum<R: Rng + ?Sized>(rng: &mut R) -> CVec2 {
    let mut q = [0.0f64; 4];
    for v in q.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
    CVec2::from_parts(q[0], q[1], q[2], q[3])
}
