//! Experiment configs, sweeps and report emission.

mod config;
mod experiments;
mod output;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diophantine::{nearest_int_dist, AlphaVector};
use crate::discrepancy::RateFit;
use crate::error::{param, Error, Result};
use crate::numerics::{frac_mul, sin_pi_mul, CompensatedSum};

pub use config::{ExperimentConfig, ExperimentKind, Measure, Schedule};
pub use experiments::{ks_distance, run_experiment};
pub use output::{write_report, ReportFiles};

/// One sweep point. `n` is the schedule value (N, R or sample count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: u64,
    pub measured: f64,
    pub predictor: f64,
    pub ratio: f64,
    pub extra: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    /// Names of the `extra` columns.
    pub extra_columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub fit: Option<RateFit>,
    pub checks: BTreeMap<String, serde_json::Value>,
}

impl ExperimentReport {
    pub fn check_f64(&self, key: &str) -> Option<f64> {
        self.checks.get(key).and_then(|v| v.as_f64())
    }

    pub fn check_bool(&self, key: &str) -> Option<bool> {
        self.checks.get(key).and_then(|v| v.as_bool())
    }

    /// Largest over smallest `ratio` column value.
    pub fn ratio_spread(&self) -> f64 {
        let hi = self.rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        let lo = self.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        hi / lo
    }
}

/// `sum_{m=1}^{M} ||m beta||^2 / m^2 * sin^2(pi N m alpha) / sin^2(pi m alpha)`.
pub fn petersen_series(alpha: &AlphaVector, beta: &AlphaVector, n: u64, big_m: u64) -> Result<f64> {
    if alpha.dim() != 1 || beta.dim() != 1 {
        return Err(param("petersen series is one-dimensional"));
    }
    let (a, b) = (alpha.components[0], beta.components[0]);
    let mut acc = CompensatedSum::new();
    for m in 1..=big_m as i64 {
        let t = frac_mul(m, a);
        let u = if t >= 0.5 { t - 1.0 } else { t };
        if nearest_int_dist(u) < 1e-12 {
            return Err(Error::Singular(format!("||{m} alpha|| = {:e}", u.abs())));
        }
        let ratio = sin_pi_mul(n as i64, u) / (std::f64::consts::PI * u).sin();
        let db = nearest_int_dist(frac_mul(m, b));
        acc.add(db * db / (m as f64 * m as f64) * ratio * ratio);
    }
    Ok(acc.value())
}
