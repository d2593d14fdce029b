//! Covariance-based estimation of transmittance and excess noise from paired
//! Alice/Bob quadratures, and the analytic prediction of how much a
//! non-unitary MIMO output hides.
//!
//! Both quadratures are pooled: with `a` Alice's complex amplitude and `b`
//! Bob's,
//!
//! ```text
//! √T' = Σ Re(a* b) / Σ |a|²
//! ε_e = (Var_B − T'(V_A − 1) − 1) / T'      Var_B = Σ |b|² / 2N
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg2::{CVec2, C64};
use crate::qmimo::NoiseCorrection;

/// Smallest block accepted by the estimators.
pub const MIN_BLOCK_LEN: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("block has {0} samples, at least {MIN_BLOCK_LEN} are required")]
    TooFewSamples(u64),
    #[error("Alice's variance is zero, transmittance undefined")]
    ZeroAliceVariance,
    #[error("invalid covariance parameters: {0}")]
    InvalidParams(String),
    #[error("Bob variance {0} is below shot noise for an honest lossy channel")]
    Inconsistent(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "C-MIMO")]
    CMimo,
    #[serde(rename = "Q-MIMO")]
    QMimo,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::CMimo, Method::QMimo];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::CMimo => "C-MIMO",
            Method::QMimo => "Q-MIMO",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sufficient statistics of one polarization's `(a, b)` pairs. Mergeable, so
/// blocks from different frames or trials reduce in any order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolStats {
    pub n: u64,
    /// Σ |a|²
    pub saa: f64,
    /// Σ Re(a* b)
    pub sab: f64,
    /// Σ |b|²
    pub sbb: f64,
}

impl PolStats {
    pub fn push(&mut self, a: C64, b: C64) {
        self.n += 1;
        self.saa += a.norm_sqr();
        self.sab += (a.conj() * b).re;
        self.sbb += b.norm_sqr();
    }

    pub fn merge(&mut self, other: &PolStats) {
        self.n += other.n;
        self.saa += other.saa;
        self.sab += other.sab;
        self.sbb += other.sbb;
    }

    /// Pooled per-quadrature Bob variance (zero-mean data).
    pub fn bob_variance(&self) -> f64 {
        self.sbb / (2.0 * self.n as f64)
    }
}

/// Paired quantum-slot data for both polarizations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairedBlock {
    pub alice: Vec<CVec2>,
    pub bob: Vec<CVec2>,
}

impl PairedBlock {
    pub fn push(&mut self, alice: CVec2, bob: CVec2) {
        self.alice.push(alice);
        self.bob.push(bob);
    }

    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }

    pub fn stats(&self) -> [PolStats; 2] {
        let mut s = [PolStats::default(); 2];
        for (a, b) in self.alice.iter().zip(&self.bob) {
            s[0].push(a.x, b.x);
            s[1].push(a.y, b.y);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimate {
    pub method: Method,
    pub t_prime: [f64; 2],
    pub eps_e: [f64; 2],
}

/// `T'` for one polarization, clamped to `(0, 1]`.
pub fn estimate_transmittance(stats: &PolStats) -> Result<f64, EstimationError> {
    if stats.n < MIN_BLOCK_LEN {
        return Err(EstimationError::TooFewSamples(stats.n));
    }
    if stats.saa <= 0.0 {
        return Err(EstimationError::ZeroAliceVariance);
    }
    let sqrt_t = stats.sab / stats.saa;
    Ok((sqrt_t * sqrt_t).clamp(f64::MIN_POSITIVE, 1.0))
}

/// Input-referred excess noise. Negative values are returned as-is.
pub fn estimate_excess_noise(stats: &PolStats, t_prime: f64, v_a: f64) -> f64 {
    (stats.bob_variance() - t_prime * (v_a - 1.0) - 1.0) / t_prime
}

/// Transmittance and excess noise for both polarizations.
pub fn estimate(
    stats: &[PolStats; 2],
    v_a: f64,
    method: Method,
) -> Result<ChannelEstimate, EstimationError> {
    let mut t_prime = [0.0; 2];
    let mut eps_e = [0.0; 2];
    for pol in 0..2 {
        t_prime[pol] = estimate_transmittance(&stats[pol])?;
        eps_e[pol] = estimate_excess_noise(&stats[pol], t_prime[pol], v_a);
    }
    Ok(ChannelEstimate {
        method,
        t_prime,
        eps_e,
    })
}

/// Underestimation of ε caused by reading the uncorrected output:
/// `Δε_X = V_XX / T'_X`, `Δε_Y = V_YY / T'_Y`.
pub fn predict_underestimation(nc: &NoiseCorrection, t_prime: [f64; 2]) -> [f64; 2] {
    let v = nc.closed_form_variances();
    [v.v_xx / t_prime[0], v.v_yy / t_prime[1]]
}

/// Scalar blocks of the two-mode covariance matrix for one polarization:
/// Alice `V_A·I`, correlation `√(T(V_A²−1))·σ_z`, Bob `[T(V_A−1+ε)+1−V_XX]·I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceBlocks {
    pub alice: f64,
    pub cross: f64,
    pub bob: f64,
}

pub fn build_covariance(
    v_a: f64,
    t: f64,
    eps: f64,
    corruption: Option<f64>,
) -> Result<CovarianceBlocks, EstimationError> {
    if !(v_a > 1.0) {
        return Err(EstimationError::InvalidParams(format!(
            "V_A = {v_a} must exceed 1"
        )));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(EstimationError::InvalidParams(format!(
            "T = {t} outside (0, 1]"
        )));
    }
    let bob = t * (v_a - 1.0 + eps) + 1.0 - corruption.unwrap_or(0.0);
    if eps == 0.0 && corruption.is_none() && bob < 1.0 {
        return Err(EstimationError::Inconsistent(bob));
    }
    Ok(CovarianceBlocks {
        alice: v_a,
        cross: (t * (v_a * v_a - 1.0)).sqrt(),
        bob,
    })
}
