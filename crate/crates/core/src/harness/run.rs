//! Seeded trial loop: generate, transmit, equalize, correct, estimate.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::{ensure_dir, pol_name, trial_rng, write_csv, CsvOut, HarnessError, Stream};
use crate::channel::ChannelState;
use crate::equalizer::{EqualizerError, EqualizerState};
use crate::estimation::{estimate_excess_noise, estimate_transmittance, Method, PolStats};
use crate::keyrate::{key_rate, KeyRateParams};
use crate::linalg2::{CMat2, CVec2};
use crate::qmimo::{normalize_w, NoiseCorrection};
use crate::txrx::{gen_quantum_symbols, gen_training_symbols, SlotKind};

#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Completed,
    Diverged { step: u64 },
    Failed(String),
}

impl TrialOutcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, Self::Completed)
    }

    fn label(&self) -> (&'static str, String) {
        match self {
            Self::Completed => ("completed", String::new()),
            Self::Diverged { step } => ("diverged", format!("LMS diverged at update {step}")),
            Self::Failed(m) => ("failed", m.clone()),
        }
    }
}

/// Per-polarization estimate of one method on one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolEstimate {
    pub t_prime: f64,
    pub eps_e: f64,
}

/// Singular values and added noise after one LMS update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateTrace {
    pub update_index: u64,
    /// Normalized singular values assigned to (X, Y).
    pub omega: [f64; 2],
    /// `(V_XX, V_YY)`.
    pub v: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub trial_index: usize,
    pub outcome: TrialOutcome,
    /// Sufficient statistics per method (only requested methods).
    pub stats: Vec<(Method, [PolStats; 2])>,
    pub estimates: Vec<(Method, [PolEstimate; 2])>,
    /// Mean `(V_XX, V_YY)` over the estimation frames.
    pub mean_v: [f64; 2],
    pub delta_eps_pred: [f64; 2],
    pub frames_used: usize,
    /// Quantum symbols entering the estimate.
    pub n_symbols: u64,
    pub updates: Vec<UpdateTrace>,
}

impl TrialReport {
    pub fn estimate(&self, method: Method) -> Option<&[PolEstimate; 2]> {
        self.estimates
            .iter()
            .find(|(m, _)| *m == method)
            .map(|(_, e)| e)
    }

    /// Measured `ε(Q-MIMO) − ε(C-MIMO)` per polarization.
    pub fn measured_gap(&self) -> Option<[f64; 2]> {
        let c = self.estimate(Method::CMimo)?;
        let q = self.estimate(Method::QMimo)?;
        Some([q[0].eps_e - c[0].eps_e, q[1].eps_e - c[1].eps_e])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PooledEstimate {
    pub pol: &'static str,
    pub method: Method,
    #[serde(rename = "T_prime")]
    pub t_prime: f64,
    pub eps_e: f64,
    pub delta_eps_pred: f64,
    pub n_symbols: u64,
    /// Standard errors across trials (absent with a single trial).
    #[serde(rename = "T_prime_se")]
    pub t_prime_se: Option<f64>,
    pub eps_e_se: Option<f64>,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyRateRow {
    pub method: Method,
    pub pol: &'static str,
    #[serde(rename = "T")]
    pub t: f64,
    pub eps: f64,
    #[serde(rename = "I_AB")]
    pub i_ab: Option<f64>,
    #[serde(rename = "chi_BE")]
    pub chi_be: Option<f64>,
    #[serde(rename = "K_asy_bps")]
    pub k_asy: Option<f64>,
    #[serde(rename = "K_fin_bps")]
    pub k_fin: Option<f64>,
    #[serde(rename = "K_asy_raw_bps")]
    pub k_asy_raw: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub master_seed: u64,
    pub trials: Vec<TrialReport>,
    pub pooled: Vec<PooledEstimate>,
    pub key_rates: Vec<KeyRateRow>,
    pub files: Vec<PathBuf>,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn pooled(&self, method: Method, pol: usize) -> Option<&PooledEstimate> {
        self.pooled
            .iter()
            .find(|p| p.method == method && p.pol == pol_name(pol))
    }

    pub fn failed_trials(&self) -> Vec<&TrialReport> {
        self.trials
            .iter()
            .filter(|t| !t.outcome.is_completed())
            .collect()
    }
}

// CSV records. Shared with the audit reader, hence `Deserialize`.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationRow {
    pub block_id: usize,
    pub pol: String,
    pub method: Method,
    #[serde(rename = "T_prime")]
    pub t_prime: f64,
    pub eps_e: f64,
    pub delta_eps_pred: f64,
    pub n_symbols: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub frame_index: usize,
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_max: f64,
    pub v_xx: f64,
    pub v_yy: f64,
    pub v_xy_re: f64,
    pub v_xy_im: f64,
}

impl AuditRow {
    pub fn new(frame_index: usize, nc: &NoiseCorrection) -> Self {
        let [omega_x, omega_y] = nc.axis_omegas();
        let v = nc.closed_form_variances();
        Self {
            frame_index,
            omega_x,
            omega_y,
            omega_max: nc.omega_max,
            v_xx: v.v_xx,
            v_yy: v.v_yy,
            v_xy_re: v.v_xy.re,
            v_xy_im: v.v_xy.im,
        }
    }
}

/// Tap matrix `W` (update convention) after `update_index` LMS updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TapRow {
    pub update_index: u64,
    pub w11_re: f64,
    pub w11_im: f64,
    pub w12_re: f64,
    pub w12_im: f64,
    pub w21_re: f64,
    pub w21_im: f64,
    pub w22_re: f64,
    pub w22_im: f64,
}

impl TapRow {
    pub fn new(update_index: u64, w: &CMat2) -> Self {
        let r = w.to_reals();
        Self {
            update_index,
            w11_re: r[0],
            w11_im: r[1],
            w12_re: r[2],
            w12_im: r[3],
            w21_re: r[4],
            w21_im: r[5],
            w22_re: r[6],
            w22_im: r[7],
        }
    }

    pub fn matrix(&self) -> CMat2 {
        CMat2::from_reals([
            self.w11_re,
            self.w11_im,
            self.w12_re,
            self.w12_im,
            self.w21_re,
            self.w21_im,
            self.w22_re,
            self.w22_im,
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolRow {
    pub index: u64,
    pub slot_kind: SlotKind,
    pub ax_re: f64,
    pub ax_im: f64,
    pub ay_re: f64,
    pub ay_im: f64,
}

impl SymbolRow {
    pub fn alpha(&self) -> CVec2 {
        CVec2::from_parts(self.ax_re, self.ax_im, self.ay_re, self.ay_im)
    }
}

/// Received SNU-normalized sample `S_in` for every slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceivedRow {
    pub index: u64,
    pub slot_kind: SlotKind,
    pub sx_re: f64,
    pub sx_im: f64,
    pub sy_re: f64,
    pub sy_im: f64,
}

impl ReceivedRow {
    pub fn sample(&self) -> CVec2 {
        CVec2::from_parts(self.sx_re, self.sx_im, self.sy_re, self.sy_im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ChannelRow {
    step_index: u64,
    j11_re: f64,
    j11_im: f64,
    j12_re: f64,
    j12_im: f64,
    j21_re: f64,
    j21_im: f64,
    j22_re: f64,
    j22_im: f64,
    sigma_1: f64,
    sigma_2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct TrialRow {
    trial_index: usize,
    status: &'static str,
    detail: String,
    frames_used: usize,
    n_symbols: u64,
}

/// Open export files of one trial.
#[derive(Default)]
pub(crate) struct Sinks {
    audit: Option<CsvOut>,
    taps: Option<CsvOut>,
    symbols: Option<CsvOut>,
    received: Option<CsvOut>,
    channel: Option<CsvOut>,
    channel_stride: u64,
}

impl Sinks {
    fn open(cfg: &ScenarioConfig, trial: usize, dir: &Path) -> Result<Self, HarnessError> {
        let ex = &cfg.exports;
        let mut s = Sinks {
            channel_stride: ex.channel_stride,
            ..Default::default()
        };
        if !ex.trials.contains(&trial) {
            return Ok(s);
        }
        let open = |on: bool, stem: &str| -> Result<Option<CsvOut>, HarnessError> {
            on.then(|| CsvOut::create(dir.join(format!("{stem}_trial{trial}.csv"))))
                .transpose()
        };
        s.audit = open(ex.audit, "audit")?;
        s.taps = open(ex.taps, "taps")?;
        s.symbols = open(ex.symbols, "symbols")?;
        s.received = open(ex.received, "received")?;
        s.channel = open(ex.channel, "channel")?;
        Ok(s)
    }

    fn slot(
        &mut self,
        index: u64,
        kind: SlotKind,
        alpha: CVec2,
        s_in: CVec2,
        channel: &ChannelState,
    ) -> Result<(), HarnessError> {
        if let Some(w) = &mut self.symbols {
            w.row(&SymbolRow {
                index,
                slot_kind: kind,
                ax_re: alpha.x.re,
                ax_im: alpha.x.im,
                ay_re: alpha.y.re,
                ay_im: alpha.y.im,
            })?;
        }
        if let Some(w) = &mut self.received {
            w.row(&ReceivedRow {
                index,
                slot_kind: kind,
                sx_re: s_in.x.re,
                sx_im: s_in.x.im,
                sy_re: s_in.y.re,
                sy_im: s_in.y.im,
            })?;
        }
        if let Some(w) = &mut self.channel {
            if channel.step_index.is_multiple_of(self.channel_stride) {
                let r = channel.j.to_reals();
                let [sigma_1, sigma_2] = channel.singular_values();
                w.row(&ChannelRow {
                    step_index: channel.step_index,
                    j11_re: r[0],
                    j11_im: r[1],
                    j12_re: r[2],
                    j12_im: r[3],
                    j21_re: r[4],
                    j21_im: r[5],
                    j22_re: r[6],
                    j22_im: r[7],
                    sigma_1,
                    sigma_2,
                })?;
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Vec<PathBuf>, HarnessError> {
        [
            self.audit,
            self.taps,
            self.symbols,
            self.received,
            self.channel,
        ]
        .into_iter()
        .flatten()
        .map(CsvOut::finish)
        .collect()
    }
}

fn runtime(trial: usize, what: impl std::fmt::Display) -> HarnessError {
    HarnessError::Runtime(format!("trial {trial}: {what}"))
}

/// Estimate `(T′, ε)` per polarization. Polarizations without modulation
/// yield NaN.
fn estimate_block(stats: &[PolStats; 2], v_a: f64) -> Result<[PolEstimate; 2], String> {
    let mut out = [PolEstimate {
        t_prime: f64::NAN,
        eps_e: f64::NAN,
    }; 2];
    for pol in 0..2 {
        if pol == 1 && stats[1].saa == 0.0 {
            continue;
        }
        let t = estimate_transmittance(&stats[pol])
            .map_err(|e| format!("{} pol: {e}", pol_name(pol)))?;
        out[pol] = PolEstimate {
            t_prime: t,
            eps_e: estimate_excess_noise(&stats[pol], t, v_a),
        };
    }
    Ok(out)
}

/// One trial. Divergence and estimation failures are recorded in the
/// outcome; only I/O problems are returned as errors.
pub(crate) fn simulate_trial(
    cfg: &ScenarioConfig,
    trial_index: usize,
    sinks: &mut Sinks,
    trace_updates: bool,
) -> Result<TrialReport, HarnessError> {
    let cp = &cfg.channel;
    let mp = &cfg.modulation;
    let mut ch_rng = trial_rng(cfg.master_seed, trial_index, Stream::Channel);
    let mut tx_rng = trial_rng(cfg.master_seed, trial_index, Stream::Symbols);
    let mut qn_rng = trial_rng(cfg.master_seed, trial_index, Stream::TrustedNoise);

    let mut channel = ChannelState::new(cp, &mut ch_rng).map_err(|e| runtime(trial_index, e))?;
    let mut eq = EqualizerState::new(cfg.equalizer.mu).map_err(|e| runtime(trial_index, e))?;
    let use_c = cfg.uses(Method::CMimo);
    let use_q = cfg.uses(Method::QMimo);

    let mut stats_c = [PolStats::default(); 2];
    let mut stats_q = [PolStats::default(); 2];
    let mut v_sum = [0.0; 2];
    let mut frames_used = 0usize;
    let mut updates = Vec::new();
    let mut outcome = TrialOutcome::Completed;

    let mut index = 0u64;
    let mut remaining = cfg.symbols_per_trial;
    let mut frame_index = 0usize;
    'frames: while remaining > 0 {
        let n_train = cfg.frame.n_train.min(remaining);
        let n_quantum = cfg.frame.n_quantum.min(remaining - n_train);
        remaining -= n_train + n_quantum;
        let full = n_train == cfg.frame.n_train && n_quantum == cfg.frame.n_quantum;

        for d in gen_training_symbols(n_train, mp, &mut tx_rng) {
            let s = channel.transmit(d, cp, &mut ch_rng);
            sinks.slot(index, SlotKind::Training, d, s, &channel)?;
            channel.step(cp, &mut ch_rng);
            index += 1;
            match eq.lms_update(s, d) {
                Ok(_) => {}
                Err(EqualizerError::Diverged { step }) => {
                    outcome = TrialOutcome::Diverged { step };
                    break 'frames;
                }
                Err(e) => return Err(runtime(trial_index, e)),
            }
            if let Some(w) = &mut sinks.taps {
                w.row(&TapRow::new(eq.updates, &eq.w))?;
            }
            if trace_updates {
                match normalize_w(&eq.effective_matrix()) {
                    Ok(nc) => {
                        let v = nc.closed_form_variances();
                        updates.push(UpdateTrace {
                            update_index: eq.updates,
                            omega: nc.axis_omegas(),
                            v: [v.v_xx, v.v_yy],
                        });
                    }
                    Err(e) => {
                        outcome = TrialOutcome::Failed(format!("update {}: {e}", eq.updates));
                        break 'frames;
                    }
                }
            }
        }

        // Taps are frozen for the quantum slots of this frame.
        let nc = match normalize_w(&eq.effective_matrix()) {
            Ok(nc) => nc,
            Err(e) => {
                outcome = TrialOutcome::Failed(format!("frame {frame_index}: {e}"));
                break 'frames;
            }
        };
        if let Some(w) = &mut sinks.audit {
            w.row(&AuditRow::new(frame_index, &nc))?;
        }
        let used = full && frame_index >= cfg.warmup_frames;
        if used {
            let v = nc.closed_form_variances();
            v_sum[0] += v.v_xx;
            v_sum[1] += v.v_yy;
            frames_used += 1;
        }

        for a in gen_quantum_symbols(n_quantum, mp, &mut tx_rng) {
            let s = channel.transmit(a, cp, &mut ch_rng);
            sinks.slot(index, SlotKind::Quantum, a, s, &channel)?;
            channel.step(cp, &mut ch_rng);
            index += 1;
            let c_out = nc.apply_uncorrected(s);
            let q_out = use_q.then(|| c_out + nc.sample_trusted_noise(&mut qn_rng));
            if used {
                if use_c {
                    stats_c[0].push(a.x, c_out.x);
                    stats_c[1].push(a.y, c_out.y);
                }
                if let Some(q) = q_out {
                    stats_q[0].push(a.x, q.x);
                    stats_q[1].push(a.y, q.y);
                }
            }
        }
        frame_index += 1;
    }

    let mut stats = Vec::new();
    if use_c {
        stats.push((Method::CMimo, stats_c));
    }
    if use_q {
        stats.push((Method::QMimo, stats_q));
    }
    let mut estimates = Vec::new();
    let mut mean_v = [f64::NAN; 2];
    let mut delta_eps_pred = [f64::NAN; 2];
    if outcome.is_completed() {
        for (m, s) in &stats {
            match estimate_block(s, mp.v_a) {
                Ok(e) => estimates.push((*m, e)),
                Err(msg) => {
                    outcome = TrialOutcome::Failed(format!("{m}: {msg}"));
                    estimates.clear();
                    break;
                }
            }
        }
        if let Some((_, reference)) = estimates.last() {
            for pol in 0..2 {
                mean_v[pol] = v_sum[pol] / frames_used as f64;
                delta_eps_pred[pol] = mean_v[pol] / reference[pol].t_prime;
            }
        }
    }

    Ok(TrialReport {
        trial_index,
        outcome,
        n_symbols: stats.first().map(|(_, s)| s[0].n).unwrap_or(0),
        stats,
        estimates,
        mean_v,
        delta_eps_pred,
        frames_used,
        updates,
    })
}

/// Run all trials in parallel (optionally keeping per-update traces) and
/// write per-trial exports into `out_dir`.
pub(crate) fn run_trials(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    trace_updates: bool,
) -> Result<(Vec<TrialReport>, Vec<PathBuf>), HarnessError> {
    cfg.validate()?;
    ensure_dir(out_dir)?;
    let results: Vec<(TrialReport, Vec<PathBuf>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut sinks = Sinks::open(cfg, i, out_dir)?;
            let report = simulate_trial(cfg, i, &mut sinks, trace_updates)?;
            Ok((report, sinks.finish()?))
        })
        .collect::<Result<_, HarnessError>>()?;
    let mut files = Vec::new();
    let mut trials = Vec::with_capacity(results.len());
    for (r, f) in results {
        trials.push(r);
        files.extend(f);
    }
    Ok((trials, files))
}

fn mean_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

/// Merge statistics of all completed trials.
pub fn pool(cfg: &ScenarioConfig, trials: &[TrialReport]) -> Vec<PooledEstimate> {
    let done: Vec<&TrialReport> = trials.iter().filter(|t| t.outcome.is_completed()).collect();
    if done.is_empty() {
        return Vec::new();
    }
    let frames: usize = done.iter().map(|t| t.frames_used).sum();
    let mut v_total = [0.0; 2];
    for t in &done {
        for pol in 0..2 {
            v_total[pol] += t.mean_v[pol] * t.frames_used as f64;
        }
    }
    let mut merged: Vec<(Method, [PolStats; 2])> = Vec::new();
    for m in Method::ALL.into_iter().filter(|m| cfg.uses(*m)) {
        let mut acc = [PolStats::default(); 2];
        for t in &done {
            if let Some((_, s)) = t.stats.iter().find(|(mm, _)| *mm == m) {
                acc[0].merge(&s[0]);
                acc[1].merge(&s[1]);
            }
        }
        merged.push((m, acc));
    }
    let estimates: Vec<(Method, [PolEstimate; 2])> = merged
        .iter()
        .filter_map(|(m, s)| estimate_block(s, cfg.modulation.v_a).ok().map(|e| (*m, e)))
        .collect();
    let Some((_, reference)) = estimates.last() else {
        return Vec::new();
    };
    let reference = *reference;
    let mut out = Vec::new();
    for pol in 0..2 {
        if reference[pol].t_prime.is_nan() {
            continue;
        }
        let pred = v_total[pol] / frames as f64 / reference[pol].t_prime;
        for (m, est) in &estimates {
            let per_t: Vec<f64> = done
                .iter()
                .filter_map(|t| t.estimate(*m).map(|e| e[pol].t_prime))
                .collect();
            let per_e: Vec<f64> = done
                .iter()
                .filter_map(|t| t.estimate(*m).map(|e| e[pol].eps_e))
                .collect();
            let n_symbols = merged
                .iter()
                .find(|(mm, _)| mm == m)
                .map(|(_, s)| s[pol].n)
                .unwrap_or(0);
            out.push(PooledEstimate {
                pol: pol_name(pol),
                method: *m,
                t_prime: est[pol].t_prime,
                eps_e: est[pol].eps_e,
                delta_eps_pred: pred,
                n_symbols,
                t_prime_se: mean_se(&per_t).1,
                eps_e_se: mean_se(&per_e).1,
                n_trials: done.len(),
            });
        }
    }
    out
}

/// Key rates at the pooled estimates, using the scenario's detector and
/// protocol parameters.
pub fn key_rates(base: &KeyRateParams, pooled: &[PooledEstimate]) -> Vec<KeyRateRow> {
    pooled
        .iter()
        .map(|p| {
            let params = KeyRateParams {
                t: p.t_prime,
                eps: p.eps_e,
                ..base.clone()
            };
            let mut row = KeyRateRow {
                method: p.method,
                pol: p.pol,
                t: p.t_prime,
                eps: p.eps_e,
                i_ab: None,
                chi_be: None,
                k_asy: None,
                k_fin: None,
                k_asy_raw: None,
                error: String::new(),
            };
            match key_rate(&params) {
                Ok(r) => {
                    row.i_ab = Some(r.i_ab);
                    row.chi_be = Some(r.chi_be);
                    row.k_asy = Some(r.k_asy);
                    row.k_fin = r.k_fin;
                    row.k_asy_raw = Some(r.k_asy_raw);
                }
                Err(e) => row.error = e.to_string(),
            }
            row
        })
        .collect()
}

pub(crate) fn estimation_rows(trials: &[TrialReport]) -> Vec<EstimationRow> {
    let mut rows = Vec::new();
    for t in trials {
        for (m, est) in &t.estimates {
            for pol in 0..2 {
                if est[pol].t_prime.is_nan() {
                    continue;
                }
                rows.push(EstimationRow {
                    block_id: t.trial_index,
                    pol: pol_name(pol).to_string(),
                    method: *m,
                    t_prime: est[pol].t_prime,
                    eps_e: est[pol].eps_e,
                    delta_eps_pred: t.delta_eps_pred[pol],
                    n_symbols: t.n_symbols,
                });
            }
        }
    }
    rows
}

/// Full scenario: trials, pooled estimates, key rates and CSV artifacts.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunReport, HarnessError> {
    let start = Instant::now();
    let (trials, mut files) = run_trials(cfg, out_dir, false)?;
    let pooled = pool(cfg, &trials);
    let rates = key_rates(&cfg.keyrate, &pooled);

    files.push(write_csv(
        out_dir.join("estimation.csv"),
        &estimation_rows(&trials),
    )?);
    files.push(write_csv(out_dir.join("summary.csv"), &pooled)?);
    files.push(write_csv(out_dir.join("keyrate.csv"), &rates)?);
    let trial_rows: Vec<TrialRow> = trials
        .iter()
        .map(|t| {
            let (status, detail) = t.outcome.label();
            TrialRow {
                trial_index: t.trial_index,
                status,
                detail,
                frames_used: t.frames_used,
                n_symbols: t.n_symbols,
            }
        })
        .collect();
    files.push(write_csv(out_dir.join("trials.csv"), &trial_rows)?);
    files.sort();

    Ok(RunReport {
        scenario: cfg.name.clone(),
        master_seed: cfg.master_seed,
        trials,
        pooled,
        key_rates: rates,
        files,
        elapsed: start.elapsed(),
    })
}
