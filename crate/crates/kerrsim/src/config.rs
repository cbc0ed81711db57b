//! Flat key = value run configuration for the scenario runner.
//!
//! The scenario space is small, so configs are a flat, line-oriented format:
//! one `key = value` per line, `#` starts a comment, unknown keys are
//! rejected. Command-line flags override file values.

use crate::params::SystemParams;
use crate::pulse::PulseShape;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Configuration and usage errors; the CLI maps these to exit code 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{context}: {message}")]
    Override { context: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Source, absorption, and emission rate curves (analytic).
    Rates,
    /// Monte Carlo histogram of the conditional displacement magnitude.
    Histogram,
    /// Conditional displacement statistics, analytic vs Monte Carlo.
    Conditional,
    /// Cascaded master-equation observables.
    Cascade,
    /// Two-qubit parity-gate Monte Carlo.
    Parity,
    /// Validate the configuration and exit without output.
    Validate,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Rates,
        Scenario::Histogram,
        Scenario::Conditional,
        Scenario::Cascade,
        Scenario::Parity,
        Scenario::Validate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Rates => "rates",
            Scenario::Histogram => "histogram",
            Scenario::Conditional => "conditional",
            Scenario::Cascade => "cascade",
            Scenario::Parity => "parity",
            Scenario::Validate => "validate",
        }
    }

    fn list() -> String {
        Scenario::ALL
            .iter()
            .map(|s| s.name())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}` (expected one of {})", Scenario::list()))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully parsed run request. Numeric defaults are chosen so that the
/// out-of-the-box Monte Carlo scenarios sit in the peaked-histogram regime
/// (κ_b/κ_a = 4 with peak displacement B = 1) inside the absorption model's
/// validity range.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Option<Scenario>,
    pub gamma: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub chi: f64,
    pub epsilon: f64,
    pub delta_a: f64,
    /// Pulse start time.
    pub t0: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub n_trials: u64,
    pub seed: u64,
    pub n_b: usize,
    /// Master-equation step; derived from the fastest rate when absent.
    pub dt: Option<f64>,
    /// Integrate the cascade in the displaced picture.
    pub displaced: bool,
    pub bins: usize,
    /// Parity quadrature angle; swept when absent.
    pub phi: Option<f64>,
    pub window_start: Option<f64>,
    pub window_end: Option<f64>,
    pub timing_offset: f64,
    /// Output path; the CLI falls back to `<scenario>.csv`.
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: None,
            gamma: 1.0,
            kappa_a: 0.25,
            kappa_b: 1.0,
            chi: 0.25,
            epsilon: 1.0,
            delta_a: 0.0,
            t0: 0.0,
            t_max: 40.0,
            n_points: 801,
            n_trials: 50_000,
            seed: 42,
            n_b: 8,
            dt: None,
            displaced: true,
            bins: 100,
            phi: None,
            window_start: None,
            window_end: None,
            timing_offset: 0.0,
            out: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str, kind: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("key `{key}` expects {kind}, got `{value}`"))
}

impl RunConfig {
    /// Applies one key/value pair; error messages carry no position (the
    /// callers attach line numbers or flag context).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "scenario" => self.scenario = Some(value.parse()?),
            "gamma" => self.gamma = parse_num(key, value, "a number")?,
            "kappa_a" => self.kappa_a = parse_num(key, value, "a number")?,
            "kappa_b" => self.kappa_b = parse_num(key, value, "a number")?,
            "chi" => self.chi = parse_num(key, value, "a number")?,
            "epsilon" => self.epsilon = parse_num(key, value, "a number")?,
            "delta_a" => self.delta_a = parse_num(key, value, "a number")?,
            "t0" => self.t0 = parse_num(key, value, "a number")?,
            "t_max" => self.t_max = parse_num(key, value, "a number")?,
            "n_points" => self.n_points = parse_num(key, value, "an integer")?,
            "n_trials" => self.n_trials = parse_num(key, value, "an integer")?,
            "seed" => self.seed = parse_num(key, value, "an integer")?,
            "n_b" => self.n_b = parse_num(key, value, "an integer")?,
            "dt" => self.dt = Some(parse_num(key, value, "a number")?),
            "displaced" => self.displaced = parse_num(key, value, "true or false")?,
            "bins" => self.bins = parse_num(key, value, "an integer")?,
            "phi" => self.phi = Some(parse_num(key, value, "a number")?),
            "window_start" => self.window_start = Some(parse_num(key, value, "a number")?),
            "window_end" => self.window_end = Some(parse_num(key, value, "a number")?),
            "timing_offset" => self.timing_offset = parse_num(key, value, "a number")?,
            "out" => self.out = Some(value.to_string()),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Applies a `key=value` override (from `--set`).
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| ConfigError::Override {
            context: format!("--set {assignment}"),
            message: "expected key=value".into(),
        })?;
        self.set(key.trim(), value.trim())
            .map_err(|message| ConfigError::Override {
                context: format!("--set {assignment}"),
                message,
            })
    }

    pub fn require_scenario(&self) -> Result<Scenario, ConfigError> {
        self.scenario.ok_or_else(|| {
            ConfigError::Usage(format!("missing scenario (expected one of {})", Scenario::list()))
        })
    }

    pub fn params(&self) -> SystemParams {
        SystemParams {
            gamma: self.gamma,
            kappa_a: self.kappa_a,
            kappa_b: self.kappa_b,
            chi: self.chi,
            epsilon: self.epsilon,
            delta_a: self.delta_a,
        }
    }

    pub fn pulse(&self) -> PulseShape {
        PulseShape::ExponentialDecay {
            gamma: self.gamma,
            t0: self.t0,
        }
    }

    /// The parity window, when both ends are configured.
    pub fn window(&self) -> crate::error::Result<Option<(f64, f64)>> {
        match (self.window_start, self.window_end) {
            (None, None) => Ok(None),
            (Some(lo), Some(hi)) => Ok(Some((lo, hi))),
            _ => Err(crate::error::Error::Validation(
                "window_start and window_end must be set together".into(),
            )),
        }
    }
}

/// Parses config text without requiring a scenario (the CLI supplies it
/// positionally afterwards).
pub fn parse_partial(text: &str) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        // `#` starts a comment anywhere on the line
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        config
            .set(key.trim(), value.trim())
            .map_err(|message| ConfigError::Parse {
                line: line_no,
                message,
            })?;
    }
    Ok(config)
}

/// Parses a complete config: like [`parse_partial`] but the scenario is
/// required.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config = parse_partial(text)?;
    config.require_scenario()?;
    Ok(config)
}
