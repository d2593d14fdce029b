//! Key rate against distance, and named operating points.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ScenarioConfig;
use super::{ensure_dir, write_csv, HarnessError};
use crate::keyrate::{fiber_transmittance, key_rate, KeyRateParams, KeyRateResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePoint {
    pub distance_km: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub eps: f64,
    #[serde(rename = "K_asy_bps")]
    pub k_asy: f64,
    #[serde(rename = "K_fin_bps")]
    pub k_fin: Option<f64>,
    #[serde(rename = "I_AB")]
    pub i_ab: f64,
    #[serde(rename = "chi_BE")]
    pub chi_be: f64,
}

#[derive(Debug, Clone)]
pub struct RateCurve {
    pub name: String,
    pub points: Vec<RatePoint>,
    /// Unclamped asymptotic rates, aligned with `points`.
    pub k_asy_raw: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub name: String,
    #[serde(rename = "T")]
    pub t: f64,
    pub eps: f64,
    #[serde(rename = "I_AB")]
    pub i_ab: f64,
    #[serde(rename = "chi_BE")]
    pub chi_be: f64,
    #[serde(rename = "K_asy_bps")]
    pub k_asy: f64,
    #[serde(rename = "K_asy_raw_bps")]
    pub k_asy_raw: f64,
    #[serde(rename = "K_fin_bps")]
    pub k_fin: Option<f64>,
    pub delta_n: Option<f64>,
    #[serde(rename = "S_pe")]
    pub s_pe: Option<f64>,
}

fn rate(base: &KeyRateParams, t: f64, eps: f64) -> Result<KeyRateResult, HarnessError> {
    let p = KeyRateParams {
        t,
        eps,
        ..base.clone()
    };
    key_rate(&p).map_err(|e| HarnessError::Runtime(format!("key rate at T={t}, eps={eps}: {e}")))
}

/// One CSV per configured curve, `ratecurve_<name>.csv`.
pub fn run_ratecurve(
    cfg: &ScenarioConfig,
    out_dir: &Path,
) -> Result<(Vec<RateCurve>, Vec<PathBuf>), HarnessError> {
    cfg.validate()?;
    let rc = cfg
        .ratecurve
        .as_ref()
        .ok_or_else(|| HarnessError::Config("scenario has no [ratecurve] section".into()))?;
    ensure_dir(out_dir)?;
    let mut curves = Vec::new();
    let mut files = Vec::new();
    for spec in &rc.curves {
        let mut points = Vec::new();
        let mut raw = Vec::new();
        for d in rc.distances() {
            let t = fiber_transmittance(d, rc.loss_db_per_km);
            let r = rate(&cfg.keyrate, t, spec.eps)?;
            raw.push(r.k_asy_raw);
            points.push(RatePoint {
                distance_km: d,
                t,
                eps: spec.eps,
                k_asy: r.k_asy,
                k_fin: r.k_fin,
                i_ab: r.i_ab,
                chi_be: r.chi_be,
            });
        }
        files.push(write_csv(
            out_dir.join(format!("ratecurve_{}.csv", spec.name)),
            &points,
        )?);
        curves.push(RateCurve {
            name: spec.name.clone(),
            points,
            k_asy_raw: raw,
        });
    }
    Ok((curves, files))
}

/// Evaluate the scenario's `[[points]]`, or the bare `[keyrate]` table when
/// none are listed.
pub fn operating_points(cfg: &ScenarioConfig) -> Result<Vec<OperatingPoint>, HarnessError> {
    let base = &cfg.keyrate;
    let specs: Vec<(String, f64, f64)> = if cfg.points.is_empty() {
        vec![("keyrate".into(), base.t, base.eps)]
    } else {
        cfg.points
            .iter()
            .map(|p| (p.name.clone(), p.t.unwrap_or(base.t), p.eps))
            .collect()
    };
    specs
        .into_iter()
        .map(|(name, t, eps)| {
            let r = rate(base, t, eps)?;
            Ok(OperatingPoint {
                name,
                t,
                eps,
                i_ab: r.i_ab,
                chi_be: r.chi_be,
                k_asy: r.k_asy,
                k_asy_raw: r.k_asy_raw,
                k_fin: r.k_fin,
                delta_n: r.delta_n,
                s_pe: r.s_pe,
            })
        })
        .collect()
}

pub fn write_operating_points(
    points: &[OperatingPoint],
    out_dir: &Path,
) -> Result<PathBuf, HarnessError> {
    ensure_dir(out_dir)?;
    write_csv(out_dir.join("keyrate_points.csv"), points)
}
