//! Per-update singular-value and underestimation traces.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ScenarioConfig;
use super::run::{pool, run_trials, TrialReport};
use super::{write_csv, CsvOut, HarnessError};
use crate::estimation::Method;

#[derive(Debug, Clone, PartialEq, Serialize)]
struct TraceRow {
    update_index: u64,
    omega_x: f64,
    omega_y: f64,
    delta_omega: f64,
    delta_eps_x: f64,
    delta_eps_y: f64,
    avg_delta_omega: f64,
    avg_delta_eps_x: f64,
    avg_delta_eps_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig4Summary {
    pub trial_index: usize,
    pub updates: usize,
    #[serde(rename = "T_prime_x")]
    pub t_prime_x: f64,
    #[serde(rename = "T_prime_y")]
    pub t_prime_y: f64,
    pub mean_delta_omega: f64,
    pub mean_delta_eps_x: f64,
    pub mean_delta_eps_y: f64,
    /// `|avg(N) − avg(0.9·N)| / |avg(N)|` of the running average of Δε.
    pub last_decile_change_x: f64,
    pub last_decile_change_y: f64,
}

#[derive(Debug, Clone)]
pub struct Fig4Report {
    pub summaries: Vec<Fig4Summary>,
    pub trials: Vec<TrialReport>,
    pub files: Vec<PathBuf>,
}

fn relative_change(avg: &[f64]) -> f64 {
    let n = avg.len();
    if n == 0 {
        return f64::NAN;
    }
    let last = avg[n - 1];
    let at = avg[(n * 9 / 10).min(n - 1)];
    (last - at).abs() / last.abs()
}

/// Run the configured trials and write one trace per trial. Δε divides the
/// instantaneous added-noise variance by the trial's estimated `T′`.
pub fn run_fig4(cfg: &ScenarioConfig, out_dir: &Path) -> Result<Fig4Report, HarnessError> {
    let stride = cfg.fig4.as_ref().map(|f| f.stride).unwrap_or(1);
    let (trials, mut files) = run_trials(cfg, out_dir, true)?;
    let mut summaries = Vec::new();
    for t in &trials {
        if !t.outcome.is_completed() {
            continue;
        }
        let reference = t
            .estimate(Method::QMimo)
            .or_else(|| t.estimate(Method::CMimo))
            .ok_or_else(|| {
                HarnessError::Runtime(format!("trial {}: no estimate", t.trial_index))
            })?;
        let tp = [reference[0].t_prime, reference[1].t_prime];
        let mut out = CsvOut::create(out_dir.join(format!("fig4_trial{}.csv", t.trial_index)))?;
        let mut sums = [0.0; 3];
        let mut avg_x = Vec::with_capacity(t.updates.len());
        let mut avg_y = Vec::with_capacity(t.updates.len());
        for (k, u) in t.updates.iter().enumerate() {
            let d_omega = u.omega[1] - u.omega[0];
            let d_eps = [u.v[0] / tp[0], u.v[1] / tp[1]];
            sums[0] += d_omega;
            sums[1] += d_eps[0];
            sums[2] += d_eps[1];
            let n = (k + 1) as f64;
            avg_x.push(sums[1] / n);
            avg_y.push(sums[2] / n);
            if k % stride == 0 || k + 1 == t.updates.len() {
                out.row(&TraceRow {
                    update_index: u.update_index,
                    omega_x: u.omega[0],
                    omega_y: u.omega[1],
                    delta_omega: d_omega,
                    delta_eps_x: d_eps[0],
                    delta_eps_y: d_eps[1],
                    avg_delta_omega: sums[0] / n,
                    avg_delta_eps_x: sums[1] / n,
                    avg_delta_eps_y: sums[2] / n,
                })?;
            }
        }
        files.push(out.finish()?);
        let n = t.updates.len().max(1) as f64;
        summaries.push(Fig4Summary {
            trial_index: t.trial_index,
            updates: t.updates.len(),
            t_prime_x: tp[0],
            t_prime_y: tp[1],
            mean_delta_omega: sums[0] / n,
            mean_delta_eps_x: sums[1] / n,
            mean_delta_eps_y: sums[2] / n,
            last_decile_change_x: relative_change(&avg_x),
            last_decile_change_y: relative_change(&avg_y),
        });
    }
    files.push(write_csv(out_dir.join("fig4_summary.csv"), &summaries)?);
    files.push(write_csv(out_dir.join("summary.csv"), &pool(cfg, &trials))?);
    files.sort();
    Ok(Fig4Report {
        summaries,
        trials,
        files,
    })
}
