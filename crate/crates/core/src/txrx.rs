//! Transmitter: Gaussian-modulated quantum symbols, boosted QPSK training
//! symbols and their time-division frame assembly.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg2::{CVec2, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TxError {
    #[error("modulation variance V_A must exceed 1 (got {0})")]
    InvalidVa(f64),
    #[error("training boost must be finite")]
    InvalidBoost,
    #[error("frame layout needs at least one quantum slot")]
    EmptyLayout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationParams {
    /// State variance `V_A` in SNU (modulation variance is `V_A − 1`).
    pub v_a: f64,
    /// Training power above the quantum modulation, in dB.
    pub training_boost_db: f64,
    /// Modulate both polarizations; when off the Y polarization carries zeros.
    pub dual_pol: bool,
}

impl Default for ModulationParams {
    fn default() -> Self {
        Self {
            v_a: 4.0,
            training_boost_db: 20.0,
            dual_pol: true,
        }
    }
}

impl ModulationParams {
    /// `V_A = 1` (no modulation) is accepted for vacuum-input runs.
    pub fn validate(&self) -> Result<(), TxError> {
        if !(self.v_a.is_finite() && self.v_a >= 1.0) {
            return Err(TxError::InvalidVa(self.v_a));
        }
        if !self.training_boost_db.is_finite() {
            return Err(TxError::InvalidBoost);
        }
        Ok(())
    }

    pub fn modulation_variance(&self) -> f64 {
        self.v_a - 1.0
    }

    /// Per-quadrature second moment of the training constellation.
    pub fn training_power(&self) -> f64 {
        10f64.powf(self.training_boost_db / 10.0) * self.modulation_variance()
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * sd, im * sd)
}

/// i.i.d. `N(0, V_A − 1)` quadratures on each modulated polarization.
pub fn gen_quantum_symbols<R: Rng + ?Sized>(
    n: usize,
    params: &ModulationParams,
    rng: &mut R,
) -> Vec<CVec2> {
    let sd = params.modulation_variance().max(0.0).sqrt();
    (0..n)
        .map(|_| {
            let x = gaussian(rng, sd);
            let y = if params.dual_pol {
                gaussian(rng, sd)
            } else {
                C64::new(0.0, 0.0)
            };
            CVec2::new(x, y)
        })
        .collect()
}

/// Uniform QPSK points `(±a, ±a)` with `a² = 10^(boost/10)·(V_A − 1)`.
pub fn gen_training_symbols<R: Rng + ?Sized>(
    n: usize,
    params: &ModulationParams,
    rng: &mut R,
) -> Vec<CVec2> {
    let a = params.training_power().sqrt();
    let point = |rng: &mut R| {
        let bits: u8 = rng.random_range(0..4);
        C64::new(
            if bits & 1 == 0 { a } else { -a },
            if bits & 2 == 0 { a } else { -a },
        )
    };
    (0..n)
        .map(|_| {
            let x = point(rng);
            let y = if params.dual_pol {
                point(rng)
            } else {
                C64::new(0.0, 0.0)
            };
            CVec2::new(x, y)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Training,
    Quantum,
}

impl SlotKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SlotKind::Training => "training",
            SlotKind::Quantum => "quantum",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "training" => Some(SlotKind::Training),
            "quantum" => Some(SlotKind::Quantum),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolRecord {
    pub kind: SlotKind,
    pub alpha: CVec2,
}

/// Training slots followed by quantum slots, repeated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameLayout {
    pub n_train: usize,
    pub n_quantum: usize,
}

impl Default for FrameLayout {
    fn default() -> Self {
        Self {
            n_train: 100,
            n_quantum: 900,
        }
    }
}

impl FrameLayout {
    pub fn validate(&self) -> Result<(), TxError> {
        if self.n_quantum == 0 {
            return Err(TxError::EmptyLayout);
        }
        Ok(())
    }

    pub fn frame_len(&self) -> usize {
        self.n_train + self.n_quantum
    }

    /// Training overhead ratio `n_train / (n_train + n_quantum)`.
    pub fn overhead(&self) -> f64 {
        self.n_train as f64 / self.frame_len() as f64
    }

    /// Training symbols needed alongside `n_quantum_total` quantum symbols:
    /// one training block per complete frame.
    pub fn training_for(&self, n_quantum_total: usize) -> usize {
        self.n_train * (n_quantum_total / self.n_quantum)
    }

    pub fn equalizer_enabled(&self) -> bool {
        self.n_train > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSpan {
    pub start: usize,
    pub n_train: usize,
    pub n_quantum: usize,
}

impl FrameSpan {
    pub fn is_partial(&self, layout: &FrameLayout) -> bool {
        self.n_train != layout.n_train || self.n_quantum != layout.n_quantum
    }
}

/// Interleaved symbol stream with its frame boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub layout: FrameLayout,
    pub records: Vec<SymbolRecord>,
    pub frames: Vec<FrameSpan>,
    /// Set when the final frame is shorter than the layout.
    pub truncated: bool,
}

impl SymbolFrame {
    pub fn overhead(&self) -> f64 {
        self.layout.overhead()
    }

    /// Splits the stream back into `(quantum, training)` sequences.
    pub fn disassemble(&self) -> (Vec<CVec2>, Vec<CVec2>) {
        let mut quantum = Vec::new();
        let mut training = Vec::new();
        for r in &self.records {
            match r.kind {
                SlotKind::Quantum => quantum.push(r.alpha),
                SlotKind::Training => training.push(r.alpha),
            }
        }
        (quantum, training)
    }
}

/// Interleave training and quantum symbols per `layout` until both inputs are
/// exhausted.
pub fn build_frames(
    quantum: &[CVec2],
    training: &[CVec2],
    layout: FrameLayout,
) -> Result<SymbolFrame, TxError> {
    layout.validate()?;
    let mut records = Vec::with_capacity(quantum.len() + training.len());
    let mut frames = Vec::new();
    let (mut qi, mut ti) = (0, 0);
    while qi < quantum.len() || ti < training.len() {
        let start = records.len();
        let nt = layout.n_train.min(training.len() - ti);
        let nq = layout.n_quantum.min(quantum.len() - qi);
        records.extend(training[ti..ti + nt].iter().map(|&alpha| SymbolRecord {
            kind: SlotKind::Training,
            alpha,
        }));
        records.extend(quantum[qi..qi + nq].iter().map(|&alpha| SymbolRecord {
            kind: SlotKind::Quantum,
            alpha,
        }));
        ti += nt;
        qi += nq;
        frames.push(FrameSpan {
            start,
            n_train: nt,
            n_quantum: nq,
        });
        if nt == 0 && nq == 0 {
            break;
        }
    }
    let truncated = frames.last().is_some_and(|f| f.is_partial(&layout));
    Ok(SymbolFrame {
        layout,
        records,
        frames,
        truncated,
    })
}
