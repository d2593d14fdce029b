//! Single-tap 2×2 LMS MIMO equalizer.
//!
//! The tap matrix `W` is stored in the update convention, the applied
//! transfer is `W†`: `S_out = W†·S_in`, `e = D − S_out`,
//! `W ← W + μ·S_in·e†`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg2::{CMat2, CVec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EqualizerError {
    #[error("LMS diverged at update {step} (step size too large?)")]
    Diverged { step: u64 },
    #[error("step size must be a positive finite number (got {0})")]
    InvalidStepSize(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EqualizerParams {
    pub mu: f64,
}

impl Default for EqualizerParams {
    fn default() -> Self {
        Self { mu: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerState {
    pub w: CMat2,
    pub mu: f64,
    pub updates: u64,
}

impl EqualizerState {
    /// Cold start with `W = I`.
    pub fn new(mu: f64) -> Result<Self, EqualizerError> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(EqualizerError::InvalidStepSize(mu));
        }
        Ok(Self {
            w: CMat2::IDENTITY,
            mu,
            updates: 0,
        })
    }

    /// One data-aided LMS iteration on a training slot. Returns `(S_out, e)`.
    pub fn lms_update(
        &mut self,
        s_in: CVec2,
        desired: CVec2,
    ) -> Result<(CVec2, CVec2), EqualizerError> {
        let out = self.apply(s_in);
        let err = desired - out;
        let w = self.w + CVec2::outer(s_in, err).scale(self.mu);
        if !w.is_finite() || !out.is_finite() {
            return Err(EqualizerError::Diverged {
                step: self.updates + 1,
            });
        }
        self.w = w;
        self.updates += 1;
        Ok((out, err))
    }

    /// Frozen-tap output `W†·S_in`.
    pub fn apply(&self, s_in: CVec2) -> CVec2 {
        self.effective_matrix() * s_in
    }

    /// `W†`, laid out as `[[w_XX, w_YX], [w_XY, w_YY]]` acting on `S_in`.
    pub fn effective_matrix(&self) -> CMat2 {
        self.w.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelParams, ChannelState};
    use crate::linalg2::C64;
    use crate::txrx::{gen_quantum_symbols, gen_training_symbols, ModulationParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_step_size() {
        assert!(EqualizerState::new(0.0).is_err());
        assert!(EqualizerState::new(f64::NAN).is_err());
    }

    #[test]
    fn tiny_step_is_nearly_frozen() {
        let mut eq = EqualizerState::new(1e-300).unwrap();
        let s = CVec2::from_parts(0.3, -1.0, 2.0, 0.5);
        let (out, _) = eq.lms_update(s, CVec2::ZERO).unwrap();
        assert_eq!(out, s);
        assert!((eq.w - CMat2::IDENTITY).frobenius_norm() < 1e-290);
    }

    #[test]
    fn fixed_point_leaves_taps_unchanged() {
        let mut eq = EqualizerState::new(0.5).unwrap();
        let s = CVec2::from_parts(1.0, 0.0, 0.0, 0.0);
        let (_, e) = eq.lms_update(s, s).unwrap();
        assert_eq!(e, CVec2::ZERO);
        assert_eq!(eq.w, CMat2::IDENTITY);
        assert_eq!(eq.updates, 1);
    }

    #[test]
    fn hand_computed_update() {
        let mut eq = EqualizerState::new(0.1).unwrap();
        let (out, e) = eq
            .lms_update(
                CVec2::from_parts(1.0, 0.0, 0.0, 0.0),
                CVec2::from_parts(0.5, 0.0, 0.0, 0.0),
            )
            .unwrap();
        assert_eq!(out, CVec2::from_parts(1.0, 0.0, 0.0, 0.0));
        assert!((e.x - C64::new(-0.5, 0.0)).norm() < 1e-15 && e.y.norm() == 0.0);
        let expect = CMat2::diag_real(0.95, 1.0);
        assert!((eq.w - expect).frobenius_norm() < 1e-15);
        assert!((eq.effective_matrix() - expect).frobenius_norm() < 1e-15);
    }

    #[test]
    fn apply_swaps_with_cross_taps() {
        let eq = EqualizerState {
            w: CMat2::real(0.0, 1.0, 1.0, 0.0),
            mu: 1e-3,
            updates: 0,
        };
        let s = CVec2::from_parts(1.0, 2.0, 3.0, 4.0);
        assert_eq!(eq.apply(s), CVec2::new(s.y, s.x));
        assert_eq!(EqualizerState::new(1e-3).unwrap().apply(s), s);
    }

    #[test]
    fn divergence_is_reported() {
        let mut eq = EqualizerState::new(1.0).unwrap();
        let s = CVec2::from_parts(1e3, 0.0, 1e3, 0.0);
        let mut result = Ok((CVec2::ZERO, CVec2::ZERO));
        for _ in 0..200 {
            result = eq.lms_update(s, CVec2::ZERO);
            if result.is_err() {
                break;
            }
        }
        assert!(matches!(result, Err(EqualizerError::Diverged { .. })));
    }

    /// Train on a static channel and return the equalizer with the channel.
    fn converge(
        seed: u64,
        mu: f64,
        updates: usize,
    ) -> (EqualizerState, ChannelState, ChannelParams) {
        let cp = ChannelParams {
            rotation_speed: 0.0,
            excess_noise: 0.0,
            ..Default::default()
        };
        let mp = ModulationParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = ChannelState::new(&cp, &mut rng).unwrap();
        let mut eq = EqualizerState::new(mu).unwrap();
        for d in gen_training_symbols(updates, &mp, &mut rng) {
            let s = ch.transmit(d, &cp, &mut rng);
            eq.lms_update(s, d).unwrap();
        }
        (eq, ch, cp)
    }

    #[test]
    fn converged_taps_invert_channel() {
        let (eq, ch, _) = converge(21, 2e-4, 20_000);
        let g = eq.effective_matrix() * ch.j;
        for k in 0..2 {
            assert!((g.m[k][k].re - 1.0).abs() < 0.05, "{g:?}");
            assert!(g.m[k][1 - k].norm() < 0.05, "{g:?}");
        }
    }

    #[test]
    fn converged_mse_reaches_noise_floor() {
        let (eq, ch, cp) = converge(22, 2e-4, 20_000);
        let mp = ModulationParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let alphas = gen_quantum_symbols(n, &mp, &mut rng);
        let mut mse = [0.0; 2];
        for a in &alphas {
            let out = eq.apply(ch.transmit(*a, &cp, &mut rng));
            let d = out - *a;
            mse[0] += d.x.norm_sqr();
            mse[1] += d.y.norm_sqr();
        }
        // Noise floor: 2 SNU of vacuum per polarization amplified by |W|² = 1/T.
        let floor = 2.0 / cp.max_transmittance();
        for m in mse {
            let m = m / n as f64;
            assert!((m / floor - 1.0).abs() < 0.1, "{m} vs {floor}");
        }
    }

    #[test]
    fn training_mse_decreases_on_static_channel() {
        // Mean of the squared error over many seeds, early vs late window.
        let mp = ModulationParams::default();
        let cp = ChannelParams {
            rotation_speed: 0.0,
            excess_noise: 0.0,
            ..Default::default()
        };
        let windows = 8;
        let per = 20;
        let mut curve = vec![0.0; windows];
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let ch = ChannelState::new(&cp, &mut rng).unwrap();
            let mut eq = EqualizerState::new(2e-4).unwrap();
            for (i, d) in gen_training_symbols(windows * per, &mp, &mut rng)
                .into_iter()
                .enumerate()
            {
                let (_, e) = eq.lms_update(ch.transmit(d, &cp, &mut rng), d).unwrap();
                curve[i / per] += e.norm_sqr();
            }
        }
        for w in curve.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "{curve:?}");
        }
        assert!(curve[windows - 1] < 0.1 * curve[0], "{curve:?}");
    }

    #[test]
    fn tracking_stays_near_static_mse() {
        let mp = ModulationParams::default();
        let run = |rotation_speed: f64| {
            let cp = ChannelParams {
                rotation_speed,
                excess_noise: 0.0,
                ..Default::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let mut ch = ChannelState::new(&cp, &mut rng).unwrap();
            let mut eq = EqualizerState::new(1e-3).unwrap();
            let mut acc = 0.0;
            let mut count = 0;
            for (i, d) in gen_training_symbols(20_000, &mp, &mut rng)
                .into_iter()
                .enumerate()
            {
                // Ten channel steps per training update (quantum slots in between).
                for _ in 0..10 {
                    ch.step(&cp, &mut rng);
                }
                let (_, e) = eq.lms_update(ch.transmit(d, &cp, &mut rng), d).unwrap();
                if i >= 2_000 {
                    acc += e.norm_sqr();
                    count += 1;
                }
            }
            acc / count as f64
        };
        let stat = run(0.0);
        let track = run(2e3);
        assert!(track < 2.0 * stat, "{track} vs {stat}");
    }
}
