//! Sparse trigonometric polynomials on the torus and the named test functions.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diophantine::{dirichlet_search, AlphaVector};
use crate::error::{param, Error, Result};
use crate::lattice::{ball_representatives, norm_sq};
use crate::numerics::{unit, CompensatedComplexSum, CompensatedSum};

/// Finitely supported Fourier series `sum f^(m) e^{2 pi i m . x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionJson", into = "FunctionJson")]
pub struct SparseFourierFunction {
    d: usize,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
    real_flag: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionJson {
    d: usize,
    real_flag: bool,
    entries: Vec<(Vec<i64>, f64, f64)>,
}

impl TryFrom<FunctionJson> for SparseFourierFunction {
    type Error = Error;

    fn try_from(j: FunctionJson) -> Result<Self> {
        SparseFourierFunction::new(
            j.d,
            j.entries.into_iter().map(|(m, re, im)| (m, Complex64::new(re, im))),
            j.real_flag,
        )
    }
}

impl From<SparseFourierFunction> for FunctionJson {
    fn from(f: SparseFourierFunction) -> Self {
        FunctionJson {
            d: f.d,
            real_flag: f.real_flag,
            entries: f.coeffs.into_iter().map(|(m, c)| (m, c.re, c.im)).collect(),
        }
    }
}

impl SparseFourierFunction {
    /// Repeated frequencies are summed. With `real_flag` the coefficients must already be Hermitian.
    pub fn new(
        d: usize,
        entries: impl IntoIterator<Item = (Vec<i64>, Complex64)>,
        real_flag: bool,
    ) -> Result<Self> {
        if d == 0 {
            return Err(param("dimension must be at least 1"));
        }
        let mut coeffs: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (m, c) in entries {
            if m.len() != d {
                return Err(param(format!("frequency {m:?} does not have dimension {d}")));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(param(format!("coefficient at {m:?} is not finite")));
            }
            *coeffs.entry(m).or_default() += c;
        }
        if real_flag {
            for (m, c) in &coeffs {
                let neg: Vec<i64> = m.iter().map(|v| -v).collect();
                let partner = coeffs.get(&neg).copied().unwrap_or_default();
                if partner != c.conj() {
                    return Err(param(format!("coefficients at {m:?} and {neg:?} are not conjugate")));
                }
            }
        }
        Ok(Self { d, coeffs, real_flag })
    }

    /// Real function from one coefficient per `±` pair; the mirror image is filled in.
    pub fn real_from_half(d: usize, half: impl IntoIterator<Item = (Vec<i64>, Complex64)>) -> Result<Self> {
        let mut all = Vec::new();
        for (m, c) in half {
            if m.iter().all(|&v| v == 0) {
                all.push((m, Complex64::new(c.re, 0.0)));
            } else {
                let neg = m.iter().map(|v| -v).collect();
                all.push((m, c));
                all.push((neg, c.conj()));
            }
        }
        Self::new(d, all, true)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("function serializes")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_real(&self) -> bool {
        self.real_flag
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&[i64], Complex64)> {
        self.coeffs.iter().map(|(m, c)| (m.as_slice(), *c))
    }

    pub fn coeff(&self, m: &[i64]) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or_default()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// `f^(0)`, the integral over the torus.
    pub fn mean(&self) -> Complex64 {
        self.coeff(&vec![0; self.d])
    }

    /// Largest `|m_i|` over the support.
    pub fn bandwidth(&self) -> i64 {
        self.coeffs.keys().flat_map(|m| m.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut acc = CompensatedComplexSum::new();
        for (m, c) in &self.coeffs {
            acc.add(c * unit(crate::diophantine::frac_dot_slice(m, x)));
        }
        let v = acc.value();
        if self.real_flag {
            Complex64::new(v.re, 0.0)
        } else {
            v
        }
    }

    /// `(sum (1 + |m|^2)^delta |f^(m)|^2)^{1/2}`.
    pub fn sobolev_norm(&self, delta: f64) -> f64 {
        let acc: CompensatedSum = self
            .coeffs
            .iter()
            .map(|(m, c)| (1.0 + norm_sq(m)).powf(delta) * c.norm_sqr())
            .collect();
        acc.value().sqrt()
    }

    /// `sum |f^(m)|` over `m != 0`.
    pub fn abs_coeff_sum(&self) -> f64 {
        self.coeffs
            .iter()
            .filter(|(m, _)| m.iter().any(|&v| v != 0))
            .map(|(_, c)| c.norm())
            .collect::<CompensatedSum>()
            .value()
    }
}

/// Test functions with a closed description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Monomial {
        m: Vec<i64>,
    },
    /// `|m|^{-d theta}` on `0 < |m| <= R`.
    T5 { d: usize, theta: f64, r: f64 },
    /// `|m|^{-d theta} log^{-theta}(1 + |m|)` on `0 < |m| <= R`.
    T5Log { d: usize, theta: f64, r: f64 },
    /// `(1 + |m|^2)^{-d/2} / log(2 + |m|)` on `0 < |m| <= R`.
    T4Unbounded { d: usize, r: f64 },
    /// `(1 + |m|^2)^{-delta/2}` on resonances found by successive Dirichlet searches.
    T6Resonant { delta: f64, count: usize },
    /// `(1 + |m|^2)^{-(delta + d/2 + 0.51)/2}` times a seeded unit phase on `|m| <= R`.
    RandomSobolev {
        d: usize,
        delta: f64,
        r: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Inline JSON text or a path to a JSON file.
    Json { source: String },
}

impl FunctionSpec {
    pub fn needs_seed(&self) -> bool {
        matches!(self, FunctionSpec::RandomSobolev { .. })
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(param(format!("truncation radius must be at least 1, got {r}")));
    }
    Ok(())
}

fn radial(d: usize, r: f64, profile: impl Fn(f64) -> f64) -> Result<SparseFourierFunction> {
    check_radius(r)?;
    let reps = ball_representatives(d, r, true)?;
    SparseFourierFunction::real_from_half(
        d,
        reps.into_iter().map(|m| {
            let v = profile(norm_sq(&m).sqrt());
            (m, Complex64::new(v, 0.0))
        }),
    )
}

/// Moduli used by the resonant construction: 3, 5, 8, 13, ...
fn resonant_schedule() -> impl Iterator<Item = u64> {
    std::iter::successors(Some((3u64, 5u64)), |&(a, b)| Some((b, a + b))).map(|p| p.0)
}

/// Build a named function. `alpha` is needed by the resonant construction, `seed` overrides
/// any seed given in the spec.
pub fn build_named_function(
    spec: &FunctionSpec,
    alpha: Option<&AlphaVector>,
    seed: Option<u64>,
) -> Result<SparseFourierFunction> {
    match spec {
        FunctionSpec::Monomial { m } => SparseFourierFunction::new(m.len(), [(m.clone(), Complex64::new(1.0, 0.0))], false),
        FunctionSpec::T5 { d, theta, r } => {
            let e = *d as f64 * theta;
            radial(*d, *r, |n| n.powf(-e))
        }
        FunctionSpec::T5Log { d, theta, r } => {
            let e = *d as f64 * theta;
            radial(*d, *r, |n| n.powf(-e) * n.ln_1p().powf(-theta))
        }
        FunctionSpec::T4Unbounded { d, r } => {
            let half = *d as f64 / 2.0;
            radial(*d, *r, |n| (1.0 + n * n).powf(-half) / (2.0 + n).ln())
        }
        FunctionSpec::T6Resonant { delta, count } => {
            if *count == 0 {
                return Err(param("t6_resonant needs count >= 1"));
            }
            let alpha = alpha.ok_or_else(|| param("t6_resonant needs a direction alpha"))?;
            let mut chosen: Vec<Vec<i64>> = Vec::new();
            for big_m in resonant_schedule() {
                if chosen.len() == *count {
                    break;
                }
                let rec = dirichlet_search(alpha, big_m)?;
                if !chosen.contains(&rec.m) {
                    chosen.push(rec.m);
                }
            }
            let d = alpha.dim();
            SparseFourierFunction::real_from_half(
                d,
                chosen.into_iter().map(|m| {
                    let v = (1.0 + norm_sq(&m)).powf(-delta / 2.0);
                    (m, Complex64::new(v, 0.0))
                }),
            )
        }
        FunctionSpec::RandomSobolev { d, delta, r, seed: own } => {
            check_radius(*r)?;
            let seed = seed.or(*own).ok_or_else(|| param("random_sobolev needs a seed"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = -(delta + *d as f64 / 2.0 + 0.51) / 2.0;
            let reps = ball_representatives(*d, *r, true)?;
            let mut half = vec![(vec![0; *d], Complex64::new(1.0, 0.0))];
            for m in reps {
                let phase: f64 = rng.random();
                half.push((m.clone(), unit(phase) * (1.0 + norm_sq(&m)).powf(e)));
            }
            SparseFourierFunction::real_from_half(*d, half)
        }
        FunctionSpec::Json { source } => {
            if source.trim_start().starts_with('{') {
                SparseFourierFunction::from_json_str(source)
            } else {
                SparseFourierFunction::from_json_file(Path::new(source))
            }
        }
    }
}
