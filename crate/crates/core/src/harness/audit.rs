//! Offline re-estimation from exported tap, symbol and received-sample logs.
//!
//! The frozen taps of each frame are the last tap row of its training block.
//! C-MIMO outputs are reproduced exactly; Q-MIMO trusted noise is redrawn
//! from the trial's noise stream, so a complete log reproduces both methods.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use super::config::ScenarioConfig;
use super::run::{EstimationRow, ReceivedRow, SymbolRow, TapRow};
use super::{pol_name, trial_rng, write_csv, HarnessError, Stream};
use crate::estimation::{estimate_excess_noise, estimate_transmittance, Method, PolStats};
use crate::linalg2::CMat2;
use crate::qmimo::normalize_w;
use crate::txrx::SlotKind;

pub struct AuditInputs<'a> {
    pub taps: &'a Path,
    pub symbols: &'a Path,
    pub received: &'a Path,
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    rdr.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| HarnessError::csv(path, e))
}

fn bad_input(msg: impl Into<String>) -> HarnessError {
    HarnessError::Runtime(format!("audit: {}", msg.into()))
}

/// Re-run estimation for one trial of `cfg` from its exported logs.
pub fn audit_trial(
    cfg: &ScenarioConfig,
    trial_index: usize,
    inputs: &AuditInputs<'_>,
) -> Result<Vec<EstimationRow>, HarnessError> {
    cfg.validate()?;
    let taps: Vec<TapRow> = read_rows(inputs.taps)?;
    let symbols: Vec<SymbolRow> = read_rows(inputs.symbols)?;
    let received: Vec<ReceivedRow> = read_rows(inputs.received)?;
    if symbols.len() != received.len() {
        return Err(bad_input(format!(
            "{} symbols but {} received samples",
            symbols.len(),
            received.len()
        )));
    }
    if symbols.len() != cfg.symbols_per_trial {
        return Err(bad_input(format!(
            "log has {} slots, scenario expects {}",
            symbols.len(),
            cfg.symbols_per_trial
        )));
    }
    for (k, t) in taps.iter().enumerate() {
        if t.update_index != k as u64 + 1 {
            return Err(bad_input(format!(
                "tap row {k} has update_index {}",
                t.update_index
            )));
        }
    }

    let use_q = cfg.uses(Method::QMimo);
    let mut qn_rng = trial_rng(cfg.master_seed, trial_index, Stream::TrustedNoise);
    let mut stats_c = [PolStats::default(); 2];
    let mut stats_q = [PolStats::default(); 2];
    let mut v_sum = [0.0; 2];
    let mut frames_used = 0usize;

    let mut pos = 0usize;
    let mut updates = 0usize;
    let mut frame_index = 0usize;
    let mut remaining = cfg.symbols_per_trial;
    while remaining > 0 {
        let n_train = cfg.frame.n_train.min(remaining);
        let n_quantum = cfg.frame.n_quantum.min(remaining - n_train);
        remaining -= n_train + n_quantum;
        let full = n_train == cfg.frame.n_train && n_quantum == cfg.frame.n_quantum;

        for k in pos..pos + n_train {
            if symbols[k].slot_kind != SlotKind::Training
                || received[k].slot_kind != SlotKind::Training
            {
                return Err(bad_input(format!("slot {k} should be a training slot")));
            }
        }
        pos += n_train;
        updates += n_train;
        let w = match updates {
            0 => CMat2::IDENTITY,
            u => taps
                .get(u - 1)
                .ok_or_else(|| bad_input(format!("tap log ends before update {u}")))?
                .matrix(),
        };
        let nc = normalize_w(&w.adjoint())
            .map_err(|e| bad_input(format!("frame {frame_index}: {e}")))?;
        let used = full && frame_index >= cfg.warmup_frames;
        if used {
            let v = nc.closed_form_variances();
            v_sum[0] += v.v_xx;
            v_sum[1] += v.v_yy;
            frames_used += 1;
        }
        for k in pos..pos + n_quantum {
            if symbols[k].slot_kind != SlotKind::Quantum {
                return Err(bad_input(format!("slot {k} should be a quantum slot")));
            }
            let a = symbols[k].alpha();
            let c_out = nc.apply_uncorrected(received[k].sample());
            let q_out = use_q.then(|| c_out + nc.sample_trusted_noise(&mut qn_rng));
            if used {
                stats_c[0].push(a.x, c_out.x);
                stats_c[1].push(a.y, c_out.y);
                if let Some(q) = q_out {
                    stats_q[0].push(a.x, q.x);
                    stats_q[1].push(a.y, q.y);
                }
            }
        }
        pos += n_quantum;
        frame_index += 1;
    }

    let mut blocks = Vec::new();
    if cfg.uses(Method::CMimo) {
        blocks.push((Method::CMimo, stats_c));
    }
    if use_q {
        blocks.push((Method::QMimo, stats_q));
    }
    let v_a = cfg.modulation.v_a;
    let mut rows = Vec::new();
    // Reference T′ for the prediction: Q-MIMO when present, as in the simulator.
    let reference = &blocks.last().expect("validated non-empty").1;
    let mut preds = [None; 2];
    for pol in 0..2 {
        if reference[pol].saa == 0.0 {
            continue;
        }
        let t_ref =
            estimate_transmittance(&reference[pol]).map_err(|e| bad_input(e.to_string()))?;
        preds[pol] = Some(v_sum[pol] / frames_used as f64 / t_ref);
    }
    // Row order follows estimation.csv: method, then polarization.
    for (m, s) in &blocks {
        for pol in 0..2 {
            let Some(pred) = preds[pol] else { continue };
            let t = estimate_transmittance(&s[pol]).map_err(|e| bad_input(e.to_string()))?;
            rows.push(EstimationRow {
                block_id: trial_index,
                pol: pol_name(pol).to_string(),
                method: *m,
                t_prime: t,
                eps_e: estimate_excess_noise(&s[pol], t, v_a),
                delta_eps_pred: pred,
                n_symbols: s[pol].n,
            });
        }
    }
    Ok(rows)
}

pub fn write_audit(rows: &[EstimationRow], out_dir: &Path) -> Result<PathBuf, HarnessError> {
    super::ensure_dir(out_dir)?;
    write_csv(out_dir.join("audit_estimation.csv"), rows)
}
