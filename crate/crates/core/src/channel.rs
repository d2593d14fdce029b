//! Time-varying dual-polarization quantum channel.
//!
//! The Jones matrix starts as `√T · R(θ₀) · diag(1, 10^(-PDL/20)) · R(θ₀')` and
//! is then evolved by small unitary increments, one per symbol. PDL is fixed in
//! the initial state; the increments only rotate the SOP and drift the phases,
//! so the singular values of the channel never change.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg2::{CMat2, CVec2, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid channel parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
}

/// Scenario parameters of the fiber link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// Symbols per second.
    pub symbol_rate: f64,
    /// SOP rotation speed in rad/s.
    pub rotation_speed: f64,
    pub pdl_db: f64,
    /// Standard deviation of the per-symbol phase increments φ1, φ2 (rad).
    pub phase_drift_std: f64,
    /// Common-mode attenuation in dB.
    pub attenuation_db: f64,
    /// Input-referred excess noise ε in SNU per quadrature.
    pub excess_noise: f64,
    /// Fixed `(θ₀, θ₀')` instead of uniformly drawn orientations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_angles: Option<[f64; 2]>,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            symbol_rate: 500e6,
            rotation_speed: 2e3,
            pdl_db: 0.0,
            phase_drift_std: 0.0,
            attenuation_db: 4.0,
            excess_noise: 0.15,
            initial_angles: None,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let check = |ok: bool, field: &'static str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(ChannelError::InvalidParam {
                    field,
                    reason: reason.to_string(),
                })
            }
        };
        check(
            self.symbol_rate.is_finite() && self.symbol_rate > 0.0,
            "symbol_rate",
            "must be > 0",
        )?;
        check(
            self.rotation_speed.is_finite(),
            "rotation_speed",
            "must be finite",
        )?;
        check(
            self.pdl_db.is_finite() && self.pdl_db >= 0.0,
            "pdl_db",
            "must be >= 0",
        )?;
        check(
            self.phase_drift_std.is_finite() && self.phase_drift_std >= 0.0,
            "phase_drift_std",
            "must be >= 0",
        )?;
        check(
            self.attenuation_db.is_finite() && self.attenuation_db >= 0.0,
            "attenuation_db",
            "must be >= 0",
        )?;
        check(
            self.excess_noise.is_finite() && self.excess_noise >= 0.0,
            "excess_noise",
            "must be >= 0",
        )?;
        check(
            self.initial_angles
                .is_none_or(|a| a.iter().all(|v| v.is_finite())),
            "initial_angles",
            "must be finite",
        )
    }

    /// Power transmittance of the strong axis, `10^(-att/10)`.
    pub fn max_transmittance(&self) -> f64 {
        10f64.powf(-self.attenuation_db / 10.0)
    }

    /// Amplitude ratio of the weak to the strong axis.
    pub fn pdl_amplitude(&self) -> f64 {
        10f64.powf(-self.pdl_db / 20.0)
    }

    /// SOP rotation per symbol.
    pub fn rotation_per_symbol(&self) -> f64 {
        self.rotation_speed / self.symbol_rate
    }
}

/// Incremental Jones matrix with the PDL exponent set to zero.
pub fn delta_jones(dtheta: f64, phi1: f64, phi2: f64) -> CMat2 {
    let (s, c) = dtheta.sin_cos();
    let e1 = C64::from_polar(1.0, phi1);
    let e2 = C64::from_polar(1.0, phi2);
    CMat2::new(e1 * c, -e2 * s, e2.conj() * s, e1.conj() * c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub j: CMat2,
    pub step_index: u64,
    // Cached increment for the jitter-free case.
    fixed_step: Option<CMat2>,
}

impl ChannelState {
    /// Initial channel with random (or configured) input and output SOP
    /// orientation.
    pub fn new<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> Result<Self, ChannelError> {
        params.validate()?;
        let [theta_out, theta_in] = match params.initial_angles {
            Some(a) => a,
            None => [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)],
        };
        let j = CMat2::rotation(theta_out)
            * CMat2::diag_real(1.0, params.pdl_amplitude())
            * CMat2::rotation(theta_in);
        Ok(Self::from_jones(
            j.scale(params.max_transmittance().sqrt()),
            params,
        ))
    }

    pub fn from_jones(j: CMat2, params: &ChannelParams) -> Self {
        let fixed_step = (params.phase_drift_std == 0.0)
            .then(|| delta_jones(params.rotation_per_symbol(), 0.0, 0.0));
        Self {
            j,
            step_index: 0,
            fixed_step,
        }
    }

    /// Advance one symbol: `J ← ΔJ · J`.
    pub fn step<R: Rng + ?Sized>(&mut self, params: &ChannelParams, rng: &mut R) {
        let dj = match self.fixed_step {
            Some(dj) => dj,
            None => {
                let phi1: f64 = rng.sample::<f64, _>(StandardNormal) * params.phase_drift_std;
                let phi2: f64 = rng.sample::<f64, _>(StandardNormal) * params.phase_drift_std;
                delta_jones(params.rotation_per_symbol(), phi1, phi2)
            }
        };
        self.j = dj * self.j;
        self.step_index += 1;
    }

    /// Received SNU-normalized sample `J·α + n_ex + n_vac`.
    ///
    /// Excess noise on each output polarization has per-quadrature variance
    /// `T_pol · ε`, where `T_pol` is that row's power gain; vacuum noise has
    /// unit variance.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        alpha: CVec2,
        params: &ChannelParams,
        rng: &mut R,
    ) -> CVec2 {
        let mean = self.j * alpha;
        let ex = [
            (self.j.row_power(0) * params.excess_noise).sqrt(),
            (self.j.row_power(1) * params.excess_noise).sqrt(),
        ];
        let mut out = [mean.x, mean.y];
        for (pol, z) in out.iter_mut().enumerate() {
            let sd = (ex[pol] * ex[pol] + 1.0).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *z += C64::new(re, im) * sd;
        }
        CVec2::new(out[0], out[1])
    }

    pub fn singular_values(&self) -> [f64; 2] {
        crate::linalg2::svd2(&self.j)
            .map(|s| s.sigma)
            .unwrap_or([f64::NAN, f64::NAN])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(att: f64, pdl: f64) -> ChannelParams {
        ChannelParams {
            attenuation_db: att,
            pdl_db: pdl,
            ..ChannelParams::default()
        }
    }

    #[test]
    fn lossless_channel_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = ChannelState::new(&params(0.0, 0.0), &mut rng).unwrap();
        assert!(ch.j.is_unitary(1e-12));
    }

    #[test]
    fn attenuation_sets_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = ChannelState::new(&params(4.0, 0.0), &mut rng).unwrap();
        let s = ch.singular_values();
        let amp = 10f64.powf(-0.2);
        assert!((s[0] - amp).abs() < 1e-12 && (s[1] - amp).abs() < 1e-12);
        assert!((amp * amp - 0.398).abs() < 1e-3);
    }

    #[test]
    fn pdl_sets_singular_value_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = ChannelState::new(&params(0.0, 3.0), &mut rng).unwrap();
        let s = ch.singular_values();
        assert!((s[1] / s[0] - 10f64.powf(-0.15)).abs() < 1e-12);
        assert!((s[1] / s[0] - 0.708).abs() < 1e-3);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for bad in [
            ChannelParams {
                pdl_db: -1.0,
                ..Default::default()
            },
            ChannelParams {
                attenuation_db: -0.1,
                ..Default::default()
            },
            ChannelParams {
                excess_noise: -0.1,
                ..Default::default()
            },
            ChannelParams {
                symbol_rate: 0.0,
                ..Default::default()
            },
        ] {
            assert!(ChannelState::new(&bad, &mut rng).is_err());
        }
    }

    #[test]
    fn frozen_channel_does_not_move() {
        let p = ChannelParams {
            rotation_speed: 0.0,
            phase_drift_std: 0.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut ch = ChannelState::new(&p, &mut rng).unwrap();
        let j0 = ch.j;
        for _ in 0..100 {
            ch.step(&p, &mut rng);
        }
        assert_eq!(ch.j, j0);
        assert_eq!(ch.step_index, 100);
    }

    #[test]
    fn quarter_turn_increment() {
        let dj = delta_jones(std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        assert!((dj - CMat2::real(0.0, -1.0, 1.0, 0.0)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn accumulated_rotation_matches_rate() {
        // 2 krad/s at 500 MBd: 4e-6 rad per symbol, 4 rad after 1e6 symbols.
        let p = ChannelParams {
            attenuation_db: 0.0,
            ..Default::default()
        };
        assert!((p.rotation_per_symbol() - 4e-6).abs() < 1e-18);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ch = ChannelState::from_jones(CMat2::IDENTITY, &p);
        for _ in 0..1_000_000 {
            ch.step(&p, &mut rng);
        }
        let expect = CMat2::rotation(4.0);
        assert!((ch.j - expect).frobenius_norm() < 1e-8);
    }

    #[test]
    fn evolution_preserves_singular_values() {
        let p = ChannelParams {
            pdl_db: 3.0,
            phase_drift_std: 1e-3,
            rotation_speed: 2e5,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut ch = ChannelState::new(&p, &mut rng).unwrap();
        let s0 = ch.singular_values();
        for k in 0..200_000 {
            ch.step(&p, &mut rng);
            if k % 10_000 == 0 {
                let dj = delta_jones(p.rotation_per_symbol(), 0.3, -0.2);
                assert!(dj.is_unitary(1e-12));
            }
        }
        let s = ch.singular_values();
        assert!((s[0] - s0[0]).abs() < 1e-9);
        assert!((s[0] - p.max_transmittance().sqrt()).abs() < 1e-9);
        assert!((s[1] - s0[1]).abs() < 1e-9);
    }

    #[test]
    fn vacuum_only_output() {
        let p = ChannelParams {
            attenuation_db: 0.0,
            excess_noise: 0.0,
            ..Default::default()
        };
        let ch = ChannelState::from_jones(CMat2::IDENTITY, &p);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut acc = [0.0; 4];
        for _ in 0..n {
            let s = ch.transmit(CVec2::ZERO, &p, &mut rng);
            acc[0] += s.x.re * s.x.re;
            acc[1] += s.x.im * s.x.im;
            acc[2] += s.y.re * s.y.re;
            acc[3] += s.y.im * s.y.im;
        }
        // Sample variance of N(0,1) has sd sqrt(2/n).
        let bound = 5.0 * (2.0 / n as f64).sqrt();
        for a in acc {
            assert!((a / n as f64 - 1.0).abs() < bound, "{}", a / n as f64);
        }
    }

    #[test]
    fn mean_propagates_through_jones() {
        let p = ChannelParams {
            excess_noise: 0.0,
            ..Default::default()
        };
        let h = 0.5f64.sqrt();
        let ch = ChannelState::from_jones(CMat2::diag_real(h, h), &p);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 100_000;
        let mut sum = CVec2::ZERO;
        for _ in 0..n {
            sum += ch.transmit(CVec2::from_parts(1.0, 0.0, 0.0, 0.0), &p, &mut rng);
        }
        let mean = sum * (1.0 / n as f64);
        let tol = 5.0 / (n as f64).sqrt();
        assert!((mean.x.re - h).abs() < tol && mean.x.im.abs() < tol);
        assert!(mean.y.norm() < 2.0 * tol);
    }

    #[test]
    fn bob_variance_matches_closed_form() {
        // T(V_A - 1 + ε) + 1 with T = 0.395, V_A = 4, ε = 0.15.
        let t: f64 = 0.395;
        let p = ChannelParams {
            excess_noise: 0.15,
            ..Default::default()
        };
        let ch = ChannelState::from_jones(CMat2::rotation(0.7).scale(t.sqrt()), &p);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let a = CVec2::new(
                C64::new(
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                ) * 3f64.sqrt(),
                C64::new(
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                ) * 3f64.sqrt(),
            );
            let s = ch.transmit(a, &p, &mut rng);
            acc += s.x.norm_sqr();
        }
        let var = acc / (2.0 * n as f64);
        let expect = t * (3.0 + 0.15) + 1.0;
        assert!((expect - 2.244).abs() < 1e-3);
        let bound = 5.0 * expect * (1.0 / n as f64).sqrt();
        assert!((var - expect).abs() < bound, "{var} vs {expect}");
    }

    #[test]
    fn configured_angles_fix_orientation() {
        let p = ChannelParams {
            initial_angles: Some([0.0, 0.0]),
            ..params(4.0, 3.0)
        };
        let a = ChannelState::new(&p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = ChannelState::new(&p, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a.j, b.j);
        let s = p.max_transmittance().sqrt();
        let want = CMat2::diag_real(s, s * p.pdl_amplitude());
        assert!((a.j - want).max_abs() < 1e-15);

        let bad = ChannelParams {
            initial_angles: Some([f64::NAN, 0.0]),
            ..p
        };
        assert!(bad.validate().is_err());
    }
}
