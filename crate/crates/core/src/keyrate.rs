//! Secret key rates for Gaussian-modulated coherent states under collective
//! attacks with reverse reconciliation and a trusted (calibrated) detector.
//!
//! Conventions: `T` is the channel transmittance, `ε` the input-referred excess
//! noise, `η` and `v_el` the detector efficiency and electronic noise. The
//! line and detection noises referred to the channel input are
//!
//! ```text
//! χ_line = 1/T − 1 + ε
//! χ_hom  = (1 − η + v_el)/η          χ_het = (2 − η + 2 v_el)/η
//! χ_tot  = χ_line + χ_det / T
//! ```
//!
//! The Holevo information is computed twice: from the closed-form symplectic
//! eigenvalues, and numerically from the explicitly assembled covariance
//! matrices of the entanglement-based picture (Alice's EPR half, Bob's mode,
//! and the EPR pair modelling the detector noise).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeyRateError {
    #[error("invalid key-rate parameter `{0}`: {1}")]
    InvalidParam(&'static str, String),
    #[error("symplectic spectrum out of numerical domain (discriminant {0:e})")]
    NumericalDomain(f64),
    #[error("finite-size split invalid: n = {n} must be in (0, N = {total})")]
    InvalidSplit { n: u64, total: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    Homodyne,
    Heterodyne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSizeParams {
    /// Total number of exchanged symbols `N`.
    pub n_total: u64,
    /// Symbols used for the key `n`; the remaining `N − n` estimate parameters.
    pub n_key: u64,
    /// Dimension of the raw-key alphabet.
    pub dim_h: u32,
    pub eps_bar: f64,
    pub eps_pe: f64,
    pub eps_pa: f64,
}

impl Default for FiniteSizeParams {
    fn default() -> Self {
        Self {
            n_total: 20_000_000,
            n_key: 10_000_000,
            dim_h: 2,
            eps_bar: 1e-10,
            eps_pe: 1e-10,
            eps_pa: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyRateParams {
    pub v_a: f64,
    pub t: f64,
    pub eps: f64,
    pub beta: f64,
    /// Symbol rate in Hz.
    pub f_rep: f64,
    /// Fraction of symbols spent on non-key tasks (training).
    pub overhead: f64,
    pub eta_d: f64,
    pub v_el: f64,
    pub detection: Detection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_size: Option<FiniteSizeParams>,
}

impl Default for KeyRateParams {
    fn default() -> Self {
        Self {
            v_a: 4.0,
            t: 0.352,
            eps: 0.07,
            beta: 0.96,
            f_rep: 500e6,
            overhead: 0.1,
            eta_d: 0.44,
            v_el: 0.13,
            detection: Detection::Homodyne,
            finite_size: None,
        }
    }
}

impl KeyRateParams {
    pub fn validate(&self) -> Result<(), KeyRateError> {
        fn bad(field: &'static str, v: f64) -> KeyRateError {
            KeyRateError::InvalidParam(field, format!("value {v} out of range"))
        }
        if !(self.v_a > 1.0 && self.v_a.is_finite()) {
            return Err(bad("v_a", self.v_a));
        }
        if !(self.t > 0.0 && self.t <= 1.0) {
            return Err(bad("t", self.t));
        }
        if !(self.eps.is_finite() && self.chi_line() >= 0.0) {
            return Err(bad("eps", self.eps));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(bad("beta", self.beta));
        }
        if !(self.f_rep > 0.0 && self.f_rep.is_finite()) {
            return Err(bad("f_rep", self.f_rep));
        }
        if !(0.0..1.0).contains(&self.overhead) {
            return Err(bad("overhead", self.overhead));
        }
        if !(self.eta_d > 0.0 && self.eta_d <= 1.0) {
            return Err(bad("eta_d", self.eta_d));
        }
        if !(self.v_el >= 0.0 && self.v_el.is_finite()) {
            return Err(bad("v_el", self.v_el));
        }
        if self.eta_d == 1.0 && self.v_el > 0.0 {
            return Err(KeyRateError::InvalidParam(
                "v_el",
                "electronic noise needs eta_d < 1 in the trusted-detector model".into(),
            ));
        }
        if let Some(fs) = &self.finite_size {
            if fs.n_key == 0 || fs.n_key >= fs.n_total {
                return Err(KeyRateError::InvalidSplit {
                    n: fs.n_key,
                    total: fs.n_total,
                });
            }
            for (name, v) in [
                ("eps_bar", fs.eps_bar),
                ("eps_pe", fs.eps_pe),
                ("eps_pa", fs.eps_pa),
            ] {
                if !(v > 0.0 && v < 1.0) {
                    return Err(bad(name, v));
                }
            }
        }
        Ok(())
    }

    pub fn chi_line(&self) -> f64 {
        1.0 / self.t - 1.0 + self.eps
    }

    pub fn chi_det(&self) -> f64 {
        match self.detection {
            Detection::Homodyne => (1.0 - self.eta_d + self.v_el) / self.eta_d,
            Detection::Heterodyne => (2.0 - self.eta_d + 2.0 * self.v_el) / self.eta_d,
        }
    }

    pub fn chi_tot(&self) -> f64 {
        self.chi_line() + self.chi_det() / self.t
    }

    fn with_channel(&self, t: f64, eps: f64) -> Self {
        Self {
            t,
            eps,
            ..self.clone()
        }
    }

    /// Variance of the EPR pair that models the detector's electronic noise.
    fn detector_epr_variance(&self) -> f64 {
        if self.eta_d >= 1.0 {
            return 1.0;
        }
        match self.detection {
            Detection::Homodyne => 1.0 + self.v_el / (1.0 - self.eta_d),
            Detection::Heterodyne => 1.0 + 2.0 * self.v_el / (1.0 - self.eta_d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRateResult {
    pub i_ab: f64,
    pub chi_be: f64,
    /// Clamped at zero.
    pub k_asy: f64,
    pub k_asy_raw: f64,
    pub k_fin: Option<f64>,
    pub k_fin_raw: Option<f64>,
    pub delta_n: Option<f64>,
    /// Holevo information at the worst-case estimated parameters.
    pub s_pe: Option<f64>,
    pub t_worst: Option<f64>,
    pub eps_worst: Option<f64>,
}

/// Von Neumann entropy of a thermal mode with symplectic eigenvalue `x`.
pub fn g(x: f64) -> f64 {
    // Roundoff around the vacuum value.
    if x <= 1.0 + 1e-12 {
        return 0.0;
    }
    let a = 0.5 * (x + 1.0);
    let b = 0.5 * (x - 1.0);
    a * a.log2() - b * b.log2()
}

pub fn mutual_information(p: &KeyRateParams) -> f64 {
    let chi = p.chi_tot();
    let ratio = ((p.v_a + chi) / (1.0 + chi)).log2();
    match p.detection {
        Detection::Homodyne => 0.5 * ratio,
        Detection::Heterodyne => ratio,
    }
}

fn eigen_pair(sum: f64, prod: f64) -> Result<[f64; 2], KeyRateError> {
    let disc = sum * sum - 4.0 * prod;
    if disc < -1e-9 {
        return Err(KeyRateError::NumericalDomain(disc));
    }
    // A degenerate pair leaves roundoff of order ε·sum² in `disc`; its square
    // root would split the pair by ~1e-8.
    let root = if disc <= 8.0 * f64::EPSILON * sum * sum {
        0.0
    } else {
        disc.sqrt()
    };
    Ok([
        (0.5 * (sum + root)).max(0.0).sqrt(),
        (0.5 * (sum - root)).max(0.0).sqrt(),
    ])
}

/// Symplectic eigenvalues `(λ1, λ2)` of Alice–Bob and `(λ3, λ4)` of the
/// state conditioned on Bob's measurement (`λ5 = 1`).
pub fn symplectic_spectrum(p: &KeyRateParams) -> Result<([f64; 2], [f64; 2]), KeyRateError> {
    let (v, t) = (p.v_a, p.t);
    let cl = p.chi_line();
    let cd = p.chi_det();
    let ct = p.chi_tot();
    let a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + cl).powi(2);
    let b = t * t * (v * cl + 1.0).powi(2);
    let sb = b.sqrt();
    let lam12 = eigen_pair(a, b)?;
    let (c, d) = match p.detection {
        Detection::Homodyne => (
            (v * sb + t * (v + cl) + a * cd) / (t * (v + ct)),
            sb * (v + sb * cd) / (t * (v + ct)),
        ),
        Detection::Heterodyne => (
            (a * cd * cd + b + 1.0 + 2.0 * cd * (v * sb + t * (v + cl)) + 2.0 * t * (v * v - 1.0))
                / (t * (v + ct)).powi(2),
            ((v + sb * cd) / (t * (v + ct))).powi(2),
        ),
    };
    let lam34 = eigen_pair(c, d)?;
    Ok((lam12, lam34))
}

/// Holevo bound χ(B:E) from the closed-form spectrum.
pub fn holevo_bound(p: &KeyRateParams) -> Result<f64, KeyRateError> {
    let (ab, cond) = symplectic_spectrum(p)?;
    Ok(g(ab[0]) + g(ab[1]) - g(cond[0]) - g(cond[1]))
}

fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

/// Symplectic eigenvalues of a covariance matrix ordered `(x1, p1, x2, p2, …)`,
/// from the spectrum `±ν` of the Hermitian matrix `i·γ^½ Ω γ^½`.
///
/// Working with `i·M` rather than `MᵀM` keeps the absolute error at `ε·ν_max`
/// instead of `ε·ν_max²`, which matters for eigenvalues close to 1 where
/// `g` is steep.
pub fn numeric_symplectic_eigenvalues(gamma: &DMatrix<f64>) -> Vec<f64> {
    let n = gamma.nrows();
    let eig = SymmetricEigen::new(gamma.clone());
    let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let root =
        &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
    let m = &root * symplectic_form(n / 2) * &root;
    let h = m.map(|x| Complex64::new(0.0, x));
    let mut nu: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    nu.sort_by(|a, b| b.total_cmp(a));
    // The spectrum is ±ν; pair the top half with the mirrored bottom half.
    let half = n / 2;
    (0..half)
        .map(|k| (0.5 * (nu[k] - nu[n - 1 - k])).max(0.0))
        .collect()
}

fn block_diag_mode(m: &mut DMatrix<f64>, i: usize, j: usize, diag: f64, zsign: bool) {
    m[(2 * i, 2 * j)] = diag;
    m[(2 * i + 1, 2 * j + 1)] = if zsign { -diag } else { diag };
}

/// Holevo bound from explicitly assembled covariance matrices. Mode order:
/// A (Alice), B (Bob at the detector output), F (detector loss port),
/// G (purification of the detector noise).
pub fn holevo_bound_numeric(p: &KeyRateParams) -> Result<f64, KeyRateError> {
    p.validate()?;
    let (v, t, eta) = (p.v_a, p.t, p.eta_d);
    let w = p.detector_epr_variance();
    let corr_ab = (t * (v * v - 1.0)).sqrt();
    let corr_fg = (w * w - 1.0).max(0.0).sqrt();

    // A, B1, F0, G before the detector beam splitter.
    let mut gamma = DMatrix::<f64>::zeros(8, 8);
    block_diag_mode(&mut gamma, 0, 0, v, false);
    block_diag_mode(&mut gamma, 0, 1, corr_ab, true);
    block_diag_mode(&mut gamma, 1, 0, corr_ab, true);
    block_diag_mode(&mut gamma, 1, 1, t * (v + p.chi_line()), false);
    block_diag_mode(&mut gamma, 2, 2, w, false);
    block_diag_mode(&mut gamma, 2, 3, corr_fg, true);
    block_diag_mode(&mut gamma, 3, 2, corr_fg, true);
    block_diag_mode(&mut gamma, 3, 3, w, false);

    let s_ab = numeric_symplectic_eigenvalues(&gamma.view((0, 0), (4, 4)).into_owned())
        .into_iter()
        .map(g)
        .sum::<f64>();

    // Beam splitter of transmittance η between B1 and F0.
    let (st, sr) = (eta.sqrt(), (1.0 - eta).sqrt());
    let mut bs = DMatrix::<f64>::identity(8, 8);
    for q in 0..2 {
        let (b, f) = (2 + q, 4 + q);
        bs[(b, b)] = st;
        bs[(b, f)] = sr;
        bs[(f, b)] = -sr;
        bs[(f, f)] = st;
    }
    let gamma = &bs * gamma * bs.transpose();

    // Condition on Bob's measurement (mode index 1 → rows/cols 2, 3).
    let rest = [0usize, 1, 4, 5, 6, 7];
    let g_rest = DMatrix::from_fn(6, 6, |i, j| gamma[(rest[i], rest[j])]);
    let c = DMatrix::from_fn(6, 2, |i, j| gamma[(rest[i], 2 + j)]);
    let gb = gamma.view((2, 2), (2, 2)).into_owned();
    let cond = match p.detection {
        Detection::Homodyne => {
            let cx = c.column(0).into_owned();
            &g_rest - (&cx * cx.transpose()) / gb[(0, 0)]
        }
        Detection::Heterodyne => {
            let inv = (gb + DMatrix::identity(2, 2))
                .try_inverse()
                .ok_or(KeyRateError::NumericalDomain(0.0))?;
            &g_rest - &c * inv * c.transpose()
        }
    };
    let s_cond = numeric_symplectic_eigenvalues(&cond)
        .into_iter()
        .map(g)
        .sum::<f64>();
    Ok(s_ab - s_cond)
}

/// Privacy-amplification penalty
/// `(2·dim_H + 3)·√(log2(2/ε̄)/n) + (2/n)·log2(1/ε_PA)`.
pub fn delta_n(n: f64, dim_h: u32, eps_bar: f64, eps_pa: f64) -> f64 {
    (2.0 * dim_h as f64 + 3.0) * ((2.0 / eps_bar).log2() / n).sqrt()
        + 2.0 / n * (1.0 / eps_pa).log2()
}

/// Two-sided Gaussian confidence coefficient `z` with `P(|Z| > z) = ε_PE`.
pub fn confidence_coefficient(eps_pe: f64) -> f64 {
    let normal = Normal::standard();
    -normal.inverse_cdf(eps_pe / 2.0)
}

/// Worst-case `(T, ε)` consistent with `m` estimation samples: the
/// measured gain is lowered and the measured noise raised by `z` standard
/// errors of their maximum-likelihood estimators.
pub fn worst_case_parameters(p: &KeyRateParams, m: f64, eps_pe: f64) -> (f64, f64) {
    let z = confidence_coefficient(eps_pe);
    // Bob's measured quadrature y = g·x + noise, per measured quadrature.
    let (gain_sq, samples) = match p.detection {
        Detection::Homodyne => (p.eta_d * p.t, m),
        Detection::Heterodyne => (0.5 * p.eta_d * p.t, 2.0 * m),
    };
    let noise_of = |g2: f64, eps: f64| 1.0 + p.v_el + g2 * eps;
    let sigma2 = noise_of(gain_sq, p.eps);
    let gain_min = (gain_sq.sqrt() - z * (sigma2 / (samples * (p.v_a - 1.0))).sqrt()).max(0.0);
    let sigma2_max = sigma2 + z * sigma2 * (2.0 / samples).sqrt();
    let g2_min = gain_min * gain_min;
    let t_min = g2_min / gain_sq * p.t;
    let eps_max = (sigma2_max - 1.0 - p.v_el) / g2_min;
    (t_min, eps_max)
}

pub fn key_rate_asymptotic(p: &KeyRateParams) -> Result<KeyRateResult, KeyRateError> {
    p.validate()?;
    let i_ab = mutual_information(p);
    let chi_be = holevo_bound(p)?;
    let k_asy_raw = p.f_rep * (1.0 - p.overhead) * (p.beta * i_ab - chi_be);
    Ok(KeyRateResult {
        i_ab,
        chi_be,
        k_asy: k_asy_raw.max(0.0),
        k_asy_raw,
        k_fin: None,
        k_fin_raw: None,
        delta_n: None,
        s_pe: None,
        t_worst: None,
        eps_worst: None,
    })
}

/// Asymptotic and finite-size rates. Requires `finite_size`.
pub fn key_rate_finite(p: &KeyRateParams) -> Result<KeyRateResult, KeyRateError> {
    let mut out = key_rate_asymptotic(p)?;
    let fs = p
        .finite_size
        .as_ref()
        .ok_or(KeyRateError::InvalidParam("finite_size", "missing".into()))?;
    let n = fs.n_key as f64;
    let m = (fs.n_total - fs.n_key) as f64;
    let (t_w, eps_w) = worst_case_parameters(p, m, fs.eps_pe);
    let worst = p.with_channel(t_w.clamp(f64::MIN_POSITIVE, 1.0), eps_w);
    let s_pe = holevo_bound(&worst)?;
    let dn = delta_n(n, fs.dim_h, fs.eps_bar, fs.eps_pa);
    let raw =
        p.f_rep * (1.0 - p.overhead) * (n / fs.n_total as f64) * (p.beta * out.i_ab - s_pe - dn);
    out.k_fin = Some(raw.max(0.0));
    out.k_fin_raw = Some(raw);
    out.delta_n = Some(dn);
    out.s_pe = Some(s_pe);
    out.t_worst = Some(t_w);
    out.eps_worst = Some(eps_w);
    Ok(out)
}

/// Finite-size rate when configured, otherwise asymptotic only.
pub fn key_rate(p: &KeyRateParams) -> Result<KeyRateResult, KeyRateError> {
    if p.finite_size.is_some() {
        key_rate_finite(p)
    } else {
        key_rate_asymptotic(p)
    }
}

/// Fiber transmittance for `distance_km` at `loss_db_per_km`.
pub fn fiber_transmittance(distance_km: f64, loss_db_per_km: f64) -> f64 {
    10f64.powf(-loss_db_per_km * distance_km / 10.0)
}
