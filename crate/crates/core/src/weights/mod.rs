//! Weight families `Phi(N, n)` and their kernels `K_N(t) = sum_n Phi(N, n) e^{2 pi i n t}`.

mod two_sided;

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diophantine::nearest_int_dist;
use crate::error::{param, Error, Result};
use crate::numerics::{frac_mul, sin_pi_mul, unit, CompensatedComplexSum, CompensatedSum};


/// Default absolute tolerance for the two-sided profile quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

/// Profile used by the smooth bump scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpProfile {
    /// `exp(-1 / (1 - t^2))` on `|t| < 1`.
    #[default]
    Exp,
}

impl BumpProfile {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            BumpProfile::Exp => {
                if t.abs() < 1.0 {
                    (-1.0 / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            }
        }
    }
}

/// A named family of weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "SchemeRepr")]
pub enum WeightScheme {
    Rectangular,
    Triangular,
    BochnerRiesz {
        gamma: f64,
    },
    Binomial,
    SmoothBump {
        profile: BumpProfile,
    },
    Logarithmic,
    TwoSided {
        theta: f64,
        j: u32,
        quad_tol: f64,
    },
    /// Fixed weights starting at index `n_min`; normalized on use.
    Custom {
        n_min: i64,
        values: Vec<f64>,
    },
}

/// Flat form used for deserialization so that stray keys are rejected for every kind.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeRepr {
    kind: String,
    gamma: Option<f64>,
    theta: Option<f64>,
    j: Option<u32>,
    quad_tol: Option<f64>,
    profile: Option<BumpProfile>,
    n_min: Option<i64>,
    values: Option<Vec<f64>>,
}

impl TryFrom<SchemeRepr> for WeightScheme {
    type Error = String;

    fn try_from(r: SchemeRepr) -> std::result::Result<Self, String> {
        let present = [
            ("gamma", r.gamma.is_some()),
            ("theta", r.theta.is_some()),
            ("j", r.j.is_some()),
            ("quad_tol", r.quad_tol.is_some()),
            ("profile", r.profile.is_some()),
            ("n_min", r.n_min.is_some()),
            ("values", r.values.is_some()),
        ];
        let allowed: &[&str] = match r.kind.as_str() {
            "bochner_riesz" => &["gamma"],
            "smooth_bump" => &["profile"],
            "two_sided" => &["theta", "j", "quad_tol"],
            "custom" => &["n_min", "values"],
            _ => &[],
        };
        if let Some((name, _)) = present.iter().find(|(n, p)| *p && !allowed.contains(n)) {
            return Err(format!("unknown field `{name}` for scheme kind `{}`", r.kind));
        }
        let missing = |name: &str| format!("missing field `{name}` for scheme kind `{}`", r.kind);
        Ok(match r.kind.as_str() {
            "rectangular" => WeightScheme::Rectangular,
            "triangular" => WeightScheme::Triangular,
            "bochner_riesz" => WeightScheme::BochnerRiesz {
                gamma: r.gamma.ok_or_else(|| missing("gamma"))?,
            },
            "binomial" => WeightScheme::Binomial,
            "smooth_bump" => WeightScheme::SmoothBump {
                profile: r.profile.unwrap_or_default(),
            },
            "logarithmic" => WeightScheme::Logarithmic,
            "two_sided" => WeightScheme::TwoSided {
                theta: r.theta.ok_or_else(|| missing("theta"))?,
                j: r.j.ok_or_else(|| missing("j"))?,
                quad_tol: r.quad_tol.unwrap_or(DEFAULT_QUAD_TOL),
            },
            "custom" => WeightScheme::Custom {
                n_min: r.n_min.ok_or_else(|| missing("n_min"))?,
                values: r.values.ok_or_else(|| missing("values"))?,
            },
            other => return Err(format!("unknown variant `{other}` for scheme kind")),
        })
    }
}

impl WeightScheme {
    pub fn two_sided(theta: f64, j: u32) -> Self {
        WeightScheme::TwoSided {
            theta,
            j,
            quad_tol: DEFAULT_QUAD_TOL,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::Rectangular => "rectangular",
            WeightScheme::Triangular => "triangular",
            WeightScheme::BochnerRiesz { .. } => "bochner_riesz",
            WeightScheme::Binomial => "binomial",
            WeightScheme::SmoothBump { .. } => "smooth_bump",
            WeightScheme::Logarithmic => "logarithmic",
            WeightScheme::TwoSided { .. } => "two_sided",
            WeightScheme::Custom { .. } => "custom",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightScheme::BochnerRiesz { gamma } if !(*gamma > 0.0 && gamma.is_finite()) => {
                Err(param(format!("bochner_riesz gamma must be positive, got {gamma}")))
            }
            WeightScheme::TwoSided { theta, j, quad_tol } => {
                if !(*theta > 0.0 && theta.is_finite()) {
                    return Err(param(format!("two_sided theta must be positive, got {theta}")));
                }
                if *j == 0 {
                    return Err(param("two_sided j must be at least 1"));
                }
                if ((2 * j - 1) as f64) < *theta {
                    return Err(param(format!("two_sided requires 2j - 1 >= theta (j = {j}, theta = {theta})")));
                }
                if !(*quad_tol > 0.0) {
                    return Err(param("quad_tol must be positive"));
                }
                Ok(())
            }
            WeightScheme::Custom { values, .. } => {
                if values.is_empty() {
                    return Err(param("custom weights are empty"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(param("custom weights must be finite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Decay exponent the kernel is known to achieve, when there is one.
    pub fn nominal_theta(&self) -> Option<f64> {
        match self {
            WeightScheme::Rectangular => Some(1.0),
            WeightScheme::Triangular => Some(2.0),
            WeightScheme::BochnerRiesz { gamma } => Some(gamma + 1.0),
            WeightScheme::Binomial => Some(2.0),
            WeightScheme::TwoSided { theta, .. } => Some(*theta),
            _ => None,
        }
    }

    /// Scale against which kernel decay is measured: `floor(sqrt(N))` for binomial, `N` otherwise.
    pub fn effective_scale(&self, n: u64) -> f64 {
        match self {
            WeightScheme::Binomial => ((n as f64).sqrt().floor()).max(1.0),
            _ => n as f64,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            WeightScheme::Custom { values, .. } => values.iter().all(|&v| v >= 0.0),
            _ => true,
        }
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(self, WeightScheme::Rectangular | WeightScheme::Triangular | WeightScheme::Binomial)
    }
}

/// Normalized, finitely supported weights for one scale `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    pub scheme: WeightScheme,
    pub n: u64,
    pub n_min: i64,
    pub values: Vec<f64>,
    #[serde(skip)]
    symmetric: bool,
}

impl WeightSequence {
    fn from_raw(scheme: WeightScheme, n: u64, n_min: i64, raw: Vec<f64>) -> Result<Self> {
        let total: f64 = raw.iter().copied().collect::<CompensatedSum>().value();
        if total == 0.0 || !total.is_finite() {
            return Err(Error::Numeric {
                n: n as i64,
                reason: format!("{} weights sum to {total}", scheme.name()),
            });
        }
        let values: Vec<f64> = raw.into_iter().map(|v| v / total).collect();
        let len = values.len();
        let symmetric = n_min == -(n_min + len as i64 - 1) && (0..len / 2).all(|i| values[i] == values[len - 1 - i]);
        Ok(Self {
            scheme,
            n,
            n_min,
            values,
            symmetric,
        })
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.values.len() as i64 - 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (self.n_min + i as i64, v))
    }

    pub fn get(&self, k: i64) -> f64 {
        if k < self.n_min || k > self.n_max() {
            0.0
        } else {
            self.values[(k - self.n_min) as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().copied().collect::<CompensatedSum>().value()
    }

    pub fn abs_total(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).collect::<CompensatedSum>().value()
    }

    /// Kernel value using the closed form when one exists, a blocked rotation otherwise.
    pub fn kernel(&self, t: f64) -> Complex64 {
        if let Some(v) = kernel_closed_form(&self.scheme, self.n, t) {
            return v;
        }
        self.kernel_summed(t)
    }

    /// Fast summation without closed forms. Phases are recomputed exactly every block.
    pub fn kernel_summed(&self, t: f64) -> Complex64 {
        const BLOCK: usize = 48;
        let step = unit(frac(t));
        if self.symmetric {
            let centre = (-self.n_min) as usize;
            let mut acc = 0.0;
            let tail = &self.values[centre + 1..];
            for (b, chunk) in tail.chunks(BLOCK).enumerate() {
                let first = (b * BLOCK + 1) as i64;
                let mut z = unit(frac_mul(first, t));
                for &v in chunk {
                    acc += v * z.re;
                    z *= step;
                }
            }
            return Complex64::new(self.values[centre] + 2.0 * acc, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, chunk) in self.values.chunks(BLOCK).enumerate() {
            let first = self.n_min + (b * BLOCK) as i64;
            let mut z = unit(frac_mul(first, t));
            for &v in chunk {
                acc += z * v;
                z *= step;
            }
        }
        acc
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,phi\n");
        for (k, v) in self.iter() {
            let _ = writeln!(out, "{k},{v:.16e}");
        }
        out
    }
}

#[inline]
fn frac(t: f64) -> f64 {
    crate::numerics::frac(t)
}

/// Build the weights of `scheme` at scale `n`.
pub fn make_weights(scheme: &WeightScheme, n: u64) -> Result<WeightSequence> {
    if n == 0 {
        return Err(param("N must be at least 1"));
    }
    scheme.validate()?;
    let big = n as i64;
    let nf = n as f64;
    let (n_min, raw): (i64, Vec<f64>) = match scheme {
        WeightScheme::Rectangular => (-big, vec![1.0; (2 * big + 1) as usize]),
        WeightScheme::Triangular => (-(big - 1), (-(big - 1)..big).map(|k| 1.0 - k.abs() as f64 / nf).collect()),
        WeightScheme::BochnerRiesz { gamma } => (
            -(big - 1),
            (-(big - 1)..big).map(|k| (1.0 - (k as f64 / nf).powi(2)).powf(*gamma)).collect(),
        ),
        WeightScheme::Binomial => {
            let mut half = Vec::with_capacity(n as usize + 1);
            let mut phi = 1.0;
            for k in 1..=n {
                phi *= (2 * k - 1) as f64 / (2 * k) as f64;
            }
            for k in 0..=big {
                half.push(phi);
                phi *= (big - k) as f64 / (big + k + 1) as f64;
            }
            let mut raw: Vec<f64> = half.iter().rev().copied().collect();
            raw.extend_from_slice(&half[1..]);
            if raw.iter().all(|&v| v == 0.0) {
                return Err(Error::Numeric {
                    n: big,
                    reason: "binomial weights underflowed".into(),
                });
            }
            (-big, raw)
        }
        WeightScheme::SmoothBump { profile } => {
            (-(big - 1), (-(big - 1)..big).map(|k| profile.eval(k as f64 / nf)).collect())
        }
        WeightScheme::Logarithmic => (1, (1..=big).map(|k| 1.0 / k as f64).collect()),
        WeightScheme::TwoSided { theta, j, quad_tol } => {
            let raw = two_sided::raw_weights(*theta, *j, n, *quad_tol)?;
            (-(big - 1) * *j as i64, raw)
        }
        WeightScheme::Custom { n_min, values } => (*n_min, values.clone()),
    };
    WeightSequence::from_raw(scheme.clone(), n, n_min, raw)
}

/// Convenience wrapper for the two-sided family.
pub fn make_two_sided_weights(theta: f64, j: u32, n: u64, quad_tol: f64) -> Result<WeightSequence> {
    make_weights(&WeightScheme::TwoSided { theta, j, quad_tol }, n)
}

/// Reference evaluation: exact phase per term and compensated accumulation.
pub fn kernel_direct(w: &WeightSequence, t: f64) -> Complex64 {
    let mut acc = CompensatedComplexSum::new();
    for (k, v) in w.iter() {
        acc.add(unit(frac_mul(k, t)) * v);
    }
    acc.value()
}

/// Closed forms for the Dirichlet, Fejer and de la Vallee Poussin kernels.
pub fn kernel_closed_form(scheme: &WeightScheme, n: u64, t: f64) -> Option<Complex64> {
    if !scheme.has_closed_form() {
        return None;
    }
    let u = t - t.round();
    if u == 0.0 {
        return Some(Complex64::new(1.0, 0.0));
    }
    let big = n as i64;
    let s = (PI * u).sin();
    let v = match scheme {
        WeightScheme::Rectangular => sin_pi_mul(2 * big + 1, u) / ((2 * big + 1) as f64 * s),
        WeightScheme::Triangular => {
            let r = sin_pi_mul(big, u) / (n as f64 * s);
            r * r
        }
        WeightScheme::Binomial => (PI * u).cos().powf(2.0 * n as f64),
        _ => unreachable!(),
    };
    Some(Complex64::new(v, 0.0))
}

/// Sample points in `[0, 1/2]` used for sup estimates at scale `n`.
pub fn t_grid(n: u64, grid_size: usize) -> Vec<f64> {
    let mut ts = Vec::with_capacity(grid_size + 3 * n as usize + 1);
    ts.push(0.0);
    ts.extend((1..=grid_size).map(|k| k as f64 / (2 * grid_size) as f64));
    let nf = n as f64;
    for k in 0..=n {
        let kf = k as f64;
        for t in [kf / (2.0 * nf + 1.0), kf / (2.0 * nf), (kf + 0.5) / nf] {
            if t > 0.0 && t <= 0.5 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDecayEstimate {
    pub theta: f64,
    pub k_hat: f64,
    /// `(N, max_t |K_N(t)| (1 + s||t||)^theta)` for each probed `N`.
    pub per_n: Vec<(u64, f64)>,
    pub n_list: Vec<u64>,
    pub grid_size: usize,
}

/// Largest value of `|K_N(t)| (1 + s ||t||)^theta` over the sample grid, where `s` is the
/// scheme's effective scale.
pub fn estimate_decay_constant(
    scheme: &WeightScheme,
    theta: f64,
    n_list: &[u64],
    grid_size: usize,
) -> Result<KernelDecayEstimate> {
    if !(theta > 0.0) {
        return Err(param(format!("theta must be positive, got {theta}")));
    }
    let mut per_n = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let w = make_weights(scheme, n)?;
        let s = scheme.effective_scale(n);
        let m = t_grid(n, grid_size)
            .par_iter()
            .map(|&t| w.kernel(t).norm() * (1.0 + s * nearest_int_dist(t)).powf(theta))
            .reduce(|| 0.0, f64::max);
        per_n.push((n, m));
    }
    let k_hat = per_n.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(KernelDecayEstimate {
        theta,
        k_hat,
        per_n,
        n_list: n_list.to_vec(),
        grid_size,
    })
}

/// `min{1, c log(1 + 1/||t||) / log(1 + N)}`.
pub fn log_kernel_bound(n: u64, t: f64, c: f64) -> Result<f64> {
    if n < 2 {
        return Err(param("log_kernel_bound needs N >= 2"));
    }
    if !(c > 0.0) {
        return Err(param("log_kernel_bound needs c > 0"));
    }
    let dist = nearest_int_dist(t);
    if dist == 0.0 {
        return Ok(1.0);
    }
    Ok((c * (1.0 / dist).ln_1p() / (n as f64).ln_1p()).min(1.0))
}

/// Constants for the two-sided logarithmic kernel bound, fitted on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogBoundFit {
    /// Smallest `c` with `|K_N(t)| <= min{1, c L(t) / log(1+N)}` on the grid.
    pub c_upper: f64,
    /// Largest `c` with `|K_N(t)| >= c min{1, L(t) / log(1+N)}` on the grid where `||t|| >= 1/N`.
    pub c_lower: f64,
    /// `(N, c_upper, c_lower)` per scale.
    pub per_n: Vec<(u64, f64, f64)>,
}

pub fn fit_log_kernel_constants(n_list: &[u64], grid_size: usize) -> Result<LogBoundFit> {
    let mut per_n = Vec::new();
    for &n in n_list {
        if n < 2 {
            return Err(param("log bound fit needs N >= 2"));
        }
        let w = make_weights(&WeightScheme::Logarithmic, n)?;
        let log_n = (n as f64).ln_1p();
        let (up, low) = t_grid(n, grid_size)
            .par_iter()
            .filter(|&&t| t > 0.0)
            .map(|&t| {
                let k = w.kernel(t).norm();
                let l = (1.0 / t).ln_1p();
                let up = k * log_n / l;
                let low = if t >= 1.0 / n as f64 {
                    k / (l / log_n).min(1.0)
                } else {
                    f64::INFINITY
                };
                (up, low)
            })
            .reduce(|| (0.0, f64::INFINITY), |a, b| (a.0.max(b.0), a.1.min(b.1)));
        per_n.push((n, up, low));
    }
    Ok(LogBoundFit {
        c_upper: per_n.iter().map(|p| p.1).fold(0.0, f64::max),
        c_lower: per_n.iter().map(|p| p.2).fold(f64::INFINITY, f64::min),
        per_n,
    })
}
