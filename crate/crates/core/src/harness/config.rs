use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diophantine::AlphaSpec;
use crate::error::{Error, Result};
use crate::fourier::FunctionSpec;
use crate::weights::WeightScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Rates,
    Sandwich,
    L2sum,
    Quadrature,
    Petersen,
    Divergence,
    Distribution,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Rates,
        ExperimentKind::Sandwich,
        ExperimentKind::L2sum,
        ExperimentKind::Quadrature,
        ExperimentKind::Petersen,
        ExperimentKind::Divergence,
        ExperimentKind::Distribution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Rates => "rates",
            ExperimentKind::Sandwich => "sandwich",
            ExperimentKind::L2sum => "l2sum",
            ExperimentKind::Quadrature => "quadrature",
            ExperimentKind::Petersen => "petersen",
            ExperimentKind::Divergence => "divergence",
            ExperimentKind::Distribution => "distribution",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Sweep values: `N` for most experiments, `R` for l2sum, sample counts for distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    /// `base^from, .., base^to`.
    Geometric { base: u64, from: u32, to: u32 },
    List { values: Vec<u64> },
}

impl Schedule {
    pub fn dyadic(from: u32, to: u32) -> Self {
        Schedule::Geometric { base: 2, from, to }
    }

    pub fn values(&self) -> Result<Vec<u64>> {
        let v = match self {
            Schedule::Geometric { base, from, to } => {
                if *base < 2 {
                    return Err(cfg_err("schedule.base", "base must be at least 2"));
                }
                (*from..=*to)
                    .map(|e| base.checked_pow(e).ok_or_else(|| cfg_err("schedule.to", "schedule overflows u64")))
                    .collect::<Result<Vec<_>>>()?
            }
            Schedule::List { values } => values.clone(),
        };
        if v.is_empty() {
            return Err(cfg_err("schedule", "schedule is empty"));
        }
        if v[0] == 0 {
            return Err(cfg_err("schedule", "schedule values must be positive"));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(cfg_err("schedule", "schedule must be strictly increasing"));
        }
        Ok(v)
    }
}

/// What the rates-style experiments measure at each `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    SupLower,
    SupUpper,
    /// `|sum Phi f(n alpha) - f^(0)|` for the configured function.
    Quadrature,
    /// Worst case over the unit ball of `W^{delta,2}` truncated at `r`.
    WorstCase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<WeightScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaSpec>,
    /// Second direction for the petersen experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<AlphaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    pub schedule: Schedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Measure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Square every schedule value (binomial weights measured against `sqrt(N)`).
    #[serde(default)]
    pub square_schedule: bool,
    /// Number of series terms for petersen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_terms: Option<u64>,
    /// Frequency `m` for the distribution experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<Vec<i64>>,
    /// Exponent `p` of `g(t) = ||t||^{-p}` for the distribution experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

pub(crate) fn cfg_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        line: None,
        reason: reason.into(),
    }
}

fn field_from_message(msg: &str) -> String {
    for key in ["unknown field `", "missing field `", "unknown variant `"] {
        if let Some(pos) = msg.find(key) {
            let rest = &msg[pos + key.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    "config".to_string()
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, schedule: Schedule) -> Self {
        Self {
            experiment,
            scheme: None,
            alpha: None,
            beta: None,
            function: None,
            schedule,
            measure: None,
            delta: None,
            theta: None,
            sigma: None,
            h: None,
            r: None,
            grid_size: None,
            seed: None,
            square_schedule: false,
            m_terms: None,
            frequency: None,
            exponent: None,
            output: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            Error::Config {
                field: field_from_message(e.message()),
                line,
                reason: e.message().trim().to_string(),
            }
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config {
            field: field_from_message(&e.to_string()),
            line: Some(e.line()),
            reason: e.to_string(),
        })
    }

    /// Parses TOML or JSON, chosen by extension (`.json`) or a leading `{`. Call
    /// [`ExperimentConfig::validate`] once any overrides are applied.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('{');
        if is_json {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn uses_randomness(&self) -> bool {
        self.experiment == ExperimentKind::Distribution
            || self.alpha.as_ref().is_some_and(AlphaSpec::needs_seed)
            || self.beta.as_ref().is_some_and(AlphaSpec::needs_seed)
            || self.function.as_ref().is_some_and(FunctionSpec::needs_seed)
    }

    fn has_component_seeds(&self) -> bool {
        let alpha_ok = |a: &Option<AlphaSpec>| match a {
            Some(AlphaSpec::RandomSample { seed, .. }) => seed.is_some(),
            _ => true,
        };
        let f_ok = match &self.function {
            Some(FunctionSpec::RandomSobolev { seed, .. }) => seed.is_some(),
            _ => true,
        };
        self.experiment != ExperimentKind::Distribution && alpha_ok(&self.alpha) && alpha_ok(&self.beta) && f_ok
    }

    pub fn validate(&self) -> Result<()> {
        let values = self.schedule.values()?;
        if self.uses_randomness() && self.seed.is_none() && !self.has_component_seeds() {
            return Err(cfg_err("seed", "this experiment uses randomness and needs a seed"));
        }
        if let Some(s) = &self.scheme {
            s.validate().map_err(|e| cfg_err("scheme", e.to_string()))?;
        }
        let need = |present: bool, field: &str| -> Result<()> {
            if present {
                Ok(())
            } else {
                Err(cfg_err(field, format!("required by the {} experiment", self.experiment.name())))
            }
        };
        use ExperimentKind::*;
        match self.experiment {
            Rates | Divergence | Quadrature => {
                need(self.scheme.is_some(), "scheme")?;
                need(self.alpha.is_some(), "alpha")?;
                let measure = self.measure.unwrap_or(default_measure(self.experiment, self.function.is_some()));
                match measure {
                    Measure::WorstCase => {
                        need(self.delta.is_some(), "delta")?;
                        need(self.r.is_some(), "r")?;
                    }
                    _ => need(self.function.is_some(), "function")?,
                }
                if self.experiment == Quadrature {
                    need(self.delta.is_some(), "delta")?;
                }
            }
            Sandwich => need(self.scheme.is_some(), "scheme")?,
            L2sum => {
                need(self.theta.is_some(), "theta")?;
                if values.iter().any(|&r| r as f64 > 1e6) {
                    return Err(cfg_err("schedule", "radius too large"));
                }
            }
            Petersen => {
                need(self.alpha.is_some(), "alpha")?;
                need(self.beta.is_some(), "beta")?;
                need(self.m_terms.is_some(), "m_terms")?;
            }
            Distribution => {
                if let Some(m) = &self.frequency {
                    if m.is_empty() || m.iter().all(|&v| v == 0) {
                        return Err(cfg_err("frequency", "frequency must be a nonzero vector"));
                    }
                }
                if let Some(p) = self.exponent {
                    if !(p > 0.0) {
                        return Err(cfg_err("exponent", "exponent must be positive"));
                    }
                }
            }
        }
        if let Some(g) = self.grid_size {
            if g == 0 {
                return Err(cfg_err("grid_size", "grid_size must be positive"));
            }
        }
        Ok(())
    }
}

pub(crate) fn default_measure(kind: ExperimentKind, has_function: bool) -> Measure {
    match kind {
        ExperimentKind::Quadrature if has_function => Measure::Quadrature,
        ExperimentKind::Quadrature => Measure::WorstCase,
        _ => Measure::SupLower,
    }
}
