use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::config::{cfg_err, default_measure};
use super::{petersen_series, ExperimentConfig, ExperimentKind, ExperimentReport, Measure, ReportRow};
use crate::diophantine::{
    frac_dot_slice, inverse_dist_sum, interval_occupancy_check, l2_majorant, make_alpha, nearest_int_dist, AlphaSpec,
    AlphaVector,
};
use crate::discrepancy::{quadrature_error, rate_fit, sup_discrepancy, worst_case_quadrature_error, x_factor, y_factor};
use crate::error::Result;
use crate::fourier::{build_named_function, SparseFourierFunction};
use crate::lattice::norm_sq;
use crate::weights::{make_weights, t_grid, WeightScheme};

/// Decorrelates the function's random stream from the direction's when both share one seed.
const FUNCTION_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;
const DEFAULT_GRID: usize = 1024;

/// Runs the configured sweep. Pure: nothing is written to disk.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = match cfg.experiment {
        ExperimentKind::Rates | ExperimentKind::Quadrature | ExperimentKind::Divergence => rates(cfg)?,
        ExperimentKind::Sandwich => sandwich(cfg)?,
        ExperimentKind::L2sum => l2sum(cfg)?,
        ExperimentKind::Petersen => petersen(cfg)?,
        ExperimentKind::Distribution => distribution(cfg)?,
    };
    report.config = cfg.clone();
    Ok(report)
}

fn empty_report(cfg: &ExperimentConfig, extra: &[&str]) -> ExperimentReport {
    ExperimentReport {
        experiment: cfg.experiment,
        config: cfg.clone(),
        extra_columns: extra.iter().map(|s| s.to_string()).collect(),
        rows: Vec::new(),
        fit: None,
        checks: BTreeMap::new(),
    }
}

fn alpha_of(spec: &Option<AlphaSpec>, seed: Option<u64>) -> Result<AlphaVector> {
    make_alpha(spec.as_ref().unwrap_or(&AlphaSpec::Golden), seed)
}

fn function_of(cfg: &ExperimentConfig, alpha: &AlphaVector) -> Result<Option<SparseFourierFunction>> {
    cfg.function
        .as_ref()
        .map(|spec| build_named_function(spec, Some(alpha), cfg.seed.map(|s| s ^ FUNCTION_STREAM)))
        .transpose()
}

fn sigma_of(cfg: &ExperimentConfig, alpha: &AlphaVector) -> Result<f64> {
    cfg.sigma
        .or(alpha.metadata.map(|m| m.sigma))
        .ok_or_else(|| cfg_err("sigma", "no sigma given and alpha carries no Diophantine type"))
}

fn schedule_values(cfg: &ExperimentConfig) -> Result<Vec<u64>> {
    let v = cfg.schedule.values()?;
    if cfg.square_schedule {
        v.iter()
            .map(|&n| n.checked_mul(n).ok_or_else(|| cfg_err("schedule", "squared schedule overflows")))
            .collect()
    } else {
        Ok(v)
    }
}

fn rates(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let scheme = cfg.scheme.clone().expect("validated");
    let alpha = alpha_of(&cfg.alpha, cfg.seed)?;
    let f = function_of(cfg, &alpha)?;
    let measure = cfg.measure.unwrap_or(default_measure(cfg.experiment, f.is_some()));
    let grid = cfg.grid_size.unwrap_or(DEFAULT_GRID);
    let d = alpha.dim();
    let log_means = matches!(scheme, WeightScheme::Logarithmic);
    let quadrature = matches!(measure, Measure::Quadrature | Measure::WorstCase);
    let theta = if log_means || quadrature {
        cfg.theta.or(scheme.nominal_theta()).unwrap_or(f64::NAN)
    } else {
        cfg.theta
            .or(scheme.nominal_theta())
            .ok_or_else(|| cfg_err("theta", format!("scheme {} has no nominal exponent", scheme.name())))?
    };
    let with_x = cfg.experiment == ExperimentKind::Rates && cfg.delta.is_some() && !quadrature && !log_means;
    let sigma = if quadrature || with_x { Some(sigma_of(cfg, &alpha)?) } else { None };
    let norm = match (&f, cfg.delta) {
        (Some(f), Some(delta)) => f.sobolev_norm(delta),
        _ => 1.0,
    };
    let log_mass = f.as_ref().map(|f| {
        f.coeffs()
            .filter(|(m, _)| m.iter().any(|&v| v != 0))
            .map(|(m, c)| c.norm() * norm_sq(m).sqrt().ln_1p())
            .sum::<f64>()
    });

    let ns = schedule_values(cfg)?;
    let rows: Vec<Result<ReportRow>> = ns
        .par_iter()
        .map(|&n| {
            let w = make_weights(&scheme, n)?;
            let s = scheme.effective_scale(n);
            let (measured, lower, upper) = match measure {
                Measure::SupLower | Measure::SupUpper => {
                    let rep = sup_discrepancy(f.as_ref().expect("validated"), &w, &alpha, grid)?;
                    let m = if measure == Measure::SupLower { rep.sup_lower } else { rep.sup_upper };
                    (m, rep.sup_lower, rep.sup_upper)
                }
                Measure::Quadrature => {
                    let e = quadrature_error(f.as_ref().expect("validated"), &w, &alpha)?;
                    (e, f64::NAN, f64::NAN)
                }
                Measure::WorstCase => {
                    let e = worst_case_quadrature_error(&w, &alpha, cfg.delta.expect("validated"), cfg.r.expect("validated"))?;
                    (e, f64::NAN, f64::NAN)
                }
            };
            let predictor = if log_means {
                log_mass.unwrap_or(1.0) / (n as f64).ln_1p()
            } else if quadrature {
                let delta = cfg.delta.expect("validated");
                let sigma = sigma.expect("set for quadrature");
                let scale = if measure == Measure::Quadrature { norm } else { 1.0 };
                s.powf(-delta / sigma) * y_factor(d, delta, sigma, s)? * scale
            } else if with_x {
                let delta = cfg.delta.expect("checked");
                s.powf(-theta) * x_factor(d, delta, theta, sigma.expect("set with x"), s)? * norm
            } else {
                s.powf(-theta)
            };
            Ok(ReportRow {
                n,
                measured,
                predictor,
                ratio: measured / predictor,
                extra: vec![s, lower, upper],
            })
        })
        .collect();
    let mut report = empty_report(cfg, &["scale", "sup_lower", "sup_upper"]);
    report.rows = rows.into_iter().collect::<Result<_>>()?;

    let pts: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.extra[0], r.measured)).collect();
    if pts.len() >= 3 && pts.iter().all(|p| p.1 > 0.0) {
        let fit = rate_fit(&pts)?;
        report.checks.insert("slope".into(), json!(fit.slope));
        report.checks.insert("r2".into(), json!(fit.r2));
        report.fit = Some(fit);
    }
    report.checks.insert("ratio_spread".into(), json!(report.ratio_spread()));
    report.checks.insert("measure".into(), json!(measure));
    report.checks.insert("theta".into(), json!(theta));
    if let Some(f) = &f {
        report.checks.insert("support".into(), json!(f.support_len()));
    }
    if cfg.experiment == ExperimentKind::Divergence {
        let r: Vec<f64> = report.rows.iter().map(|r| r.ratio).collect();
        let growth = r.last().copied().unwrap_or(f64::NAN) / r.first().copied().unwrap_or(f64::NAN);
        let moving_min: Vec<f64> = r.windows(3).map(|w| w[0].min(w[1]).min(w[2])).collect();
        let monotone = moving_min.windows(2).all(|w| w[1] >= w[0]);
        report.checks.insert("growth".into(), json!(growth));
        report.checks.insert("monotone".into(), json!(monotone));
        report.checks.insert("witness".into(), json!(growth >= 2.0 && monotone));
    }
    Ok(report)
}

fn sandwich(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let scheme = cfg.scheme.clone().expect("validated");
    let theta = cfg
        .theta
        .or(scheme.nominal_theta())
        .ok_or_else(|| cfg_err("theta", "sandwich needs an exponent"))?;
    let grid = cfg.grid_size.unwrap_or(4096);
    let ns = schedule_values(cfg)?;
    let rows: Vec<Result<ReportRow>> = ns
        .par_iter()
        .map(|&n| {
            let w = make_weights(&scheme, n)?;
            let s = scheme.effective_scale(n);
            let (lo, hi, kmin) = t_grid(n, grid)
                .par_iter()
                .map(|&t| {
                    let k = w.kernel(t).re;
                    let v = k * (1.0 + s * nearest_int_dist(t)).powf(theta);
                    (v, v, k)
                })
                .reduce(
                    || (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY),
                    |a, b| (a.0.min(b.0), a.1.max(b.1), a.2.min(b.2)),
                );
            Ok(ReportRow {
                n,
                measured: hi,
                predictor: lo,
                ratio: hi / lo,
                extra: vec![kmin],
            })
        })
        .collect();
    let mut report = empty_report(cfg, &["kernel_min"]);
    report.rows = rows.into_iter().collect::<Result<_>>()?;
    let h = report.rows.iter().map(|r| r.predictor).fold(f64::INFINITY, f64::min);
    let k = report.rows.iter().map(|r| r.measured).fold(f64::NEG_INFINITY, f64::max);
    let positive = report.rows.iter().all(|r| r.extra[0] > 0.0);
    report.checks.insert("h".into(), json!(h));
    report.checks.insert("k".into(), json!(k));
    report.checks.insert("k_over_h".into(), json!(k / h));
    report.checks.insert("positive".into(), json!(positive));
    Ok(report)
}

/// Exponent of `R` in the growth of the shell sum (the `theta = 1` case carries an extra log).
pub(crate) fn shell_sum_exponent(d: f64, sigma: f64, theta: f64) -> f64 {
    if theta < 1.0 {
        theta * sigma + d * (1.0 - theta)
    } else if theta == 1.0 {
        sigma
    } else {
        theta * sigma
    }
}

fn l2sum(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let alpha = alpha_of(&cfg.alpha, cfg.seed)?;
    let theta = cfg.theta.expect("validated");
    let sigma = sigma_of(cfg, &alpha)?;
    let h = cfg
        .h
        .or(alpha.metadata.and_then(|m| m.h))
        .ok_or_else(|| cfg_err("h", "no H given and alpha carries none"))?;
    let d = alpha.dim();
    let rs = cfg.schedule.values()?;
    let rows: Vec<Result<ReportRow>> = rs
        .par_iter()
        .map(|&r| {
            let rf = r as f64;
            let measured = inverse_dist_sum(&alpha, rf, theta)?;
            let predictor = l2_majorant(d, sigma, h, theta, rf)?;
            let occ = interval_occupancy_check(&alpha, rf, h, sigma)?;
            Ok(ReportRow {
                n: r,
                measured,
                predictor,
                ratio: measured / predictor,
                extra: vec![if occ.ok { 1.0 } else { 0.0 }],
            })
        })
        .collect();
    let mut report = empty_report(cfg, &["occupancy_ok"]);
    report.rows = rows.into_iter().collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .map(|r| {
            let rf = r.n as f64;
            let v = if theta == 1.0 { r.measured / rf.ln_1p() } else { r.measured };
            (rf, v)
        })
        .collect();
    if pts.len() >= 3 && pts.iter().all(|p| p.1 > 0.0) {
        let fit = rate_fit(&pts)?;
        report.checks.insert("slope".into(), json!(fit.slope));
        report.fit = Some(fit);
    }
    report
        .checks
        .insert("expected_exponent".into(), json!(shell_sum_exponent(d as f64, sigma, theta)));
    report
        .checks
        .insert("majorant_holds".into(), json!(report.rows.iter().all(|r| r.ratio <= 1.0)));
    report
        .checks
        .insert("occupancy_ok".into(), json!(report.rows.iter().all(|r| r.extra[0] == 1.0)));
    Ok(report)
}

fn petersen(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let alpha = alpha_of(&cfg.alpha, cfg.seed)?;
    let beta = alpha_of(&cfg.beta, cfg.seed.map(|s| s.wrapping_add(1)))?;
    let big_m = cfg.m_terms.expect("validated");
    let ns = schedule_values(cfg)?;
    let values: Vec<f64> = ns
        .par_iter()
        .map(|&n| petersen_series(&alpha, &beta, n, big_m))
        .collect::<Result<_>>()?;
    let mut report = empty_report(cfg, &["running_sup"]);
    let first = values[0];
    let mut running = f64::NEG_INFINITY;
    for (&n, &v) in ns.iter().zip(&values) {
        running = running.max(v);
        report.rows.push(ReportRow {
            n,
            measured: v,
            predictor: first,
            ratio: running / first,
            extra: vec![running],
        });
    }
    report.checks.insert("growth".into(), json!(running / first));
    Ok(report)
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

fn distribution(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let m = cfg.frequency.clone().unwrap_or_else(|| vec![1, 1]);
    let p = cfg.exponent.unwrap_or(0.5);
    let seed = cfg.seed.expect("validated");
    let checkpoints = cfg.schedule.values()?;
    let total = *checkpoints.last().expect("nonempty");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alpha = vec![0.0; m.len()];
    let values: Vec<f64> = (0..total)
        .map(|_| {
            for a in alpha.iter_mut() {
                *a = rng.random();
            }
            nearest_int_dist(frac_dot_slice(&m, &alpha)).powf(-p)
        })
        .collect();
    // ||t|| is uniform on [0, 1/2], so P(g <= s) = 1 - 2 s^{-1/p} for s >= 2^p
    let floor = 2f64.powf(p);
    let cdf = |s: f64| if s < floor { 0.0 } else { 1.0 - 2.0 * s.powf(-1.0 / p) };
    let mut report = empty_report(cfg, &[]);
    for &n in &checkpoints {
        let mut sample = values[..n as usize].to_vec();
        let ks = ks_distance(&mut sample, cdf);
        let crit = 1.36 / (n as f64).sqrt();
        report.rows.push(ReportRow {
            n,
            measured: ks,
            predictor: crit,
            ratio: ks / crit,
            extra: Vec::new(),
        });
    }
    let last = report.rows.last().expect("nonempty");
    report.checks.insert("ks".into(), json!(last.measured));
    report.checks.insert("samples".into(), json!(total));
    Ok(report)
}
