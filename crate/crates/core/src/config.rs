//! Experiment configuration in a flat `key = value` text format.
//!
//! ```text
//! # comments start with '#'
//! discretization = spectral
//! K = 64
//! schemes = ERKN3, ERKN4
//! h_exponents = 0, 1, 2, 3
//! ```
//!
//! Unknown or repeated keys are rejected. Keys that are absent keep their
//! default values.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::integrators::scheme_by_id;
use crate::problem::{Discretization, InitialDataSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given more than once")]
    Duplicate { line: usize, key: String },
    #[error("field `{field}`: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

/// Which error the convergence study records for each stepsize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorTime {
    /// Error at `t_end` only.
    Final,
    /// Maximum error over all grid times `t_n ≤ t_end`.
    MaxOverSteps,
}

impl ErrorTime {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorTime::Final => "final",
            ErrorTime::MaxOverSteps => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub discretization: Discretization,
    pub k: usize,
    pub p: u32,
    pub schemes: Vec<String>,
    pub t_end: f64,
    /// Stepsizes `h = 2^{-j}`.
    pub h_exponents: Vec<i32>,
    pub alphas: Vec<f64>,
    pub s: f64,
    pub seed: u64,
    pub decay_y: f64,
    pub decay_ydot: f64,
    pub amplitude: f64,
    pub zero_mean_velocity: bool,
    /// Reference stepsize `2^{-j}` (scaled with `t_end / 10`).
    pub h_ref_exponent: i32,
    pub error_time: ErrorTime,
    pub output: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            discretization: Discretization::Spectral,
            k: 64,
            p: 2,
            schemes: vec!["ERKN3".into(), "ERKN4".into()],
            t_end: 10.0,
            h_exponents: (0..=10).collect(),
            alphas: vec![1.0, 0.5, 0.0, -0.5, -1.0],
            s: 0.0,
            seed: 1,
            decay_y: 1.51,
            decay_ydot: 0.51,
            amplitude: 0.03,
            zero_mean_velocity: true,
            h_ref_exponent: 13,
            error_time: ErrorTime::Final,
            output: None,
        }
    }
}

const KEYS: [&str; 16] = [
    "discretization",
    "K",
    "p",
    "schemes",
    "t_end",
    "h_exponents",
    "alphas",
    "s",
    "seed",
    "decay_y",
    "decay_ydot",
    "amplitude",
    "zero_mean_velocity",
    "h_ref_exponent",
    "error_time",
    "output",
];

fn parse_scalar<T: FromStr>(field: &'static str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| invalid(field, format!("cannot parse `{value}`")))
}

fn parse_list<T: FromStr>(field: &'static str, value: &str) -> Result<Vec<T>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|v| parse_scalar(field, v.trim()))
        .collect()
}

fn parse_f64(field: &'static str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse_scalar(field, value)?;
    if !v.is_finite() {
        return Err(invalid(field, "must be finite"));
    }
    Ok(v)
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

impl ExperimentConfig {
    /// Parses and validates a config text.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: content.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            };
            if seen.contains(&known) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(known);
            cfg.set(known, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &'static str, value: &str) -> Result<(), ConfigError> {
        match key {
            "discretization" => {
                self.discretization = value.parse().map_err(|_| {
                    invalid(
                        key,
                        format!("expected `spectral` or `finite_difference`, got `{value}`"),
                    )
                })?
            }
            "K" => self.k = parse_scalar(key, value)?,
            "p" => self.p = parse_scalar(key, value)?,
            "schemes" => {
                self.schemes = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            "t_end" => self.t_end = parse_f64(key, value)?,
            "h_exponents" => self.h_exponents = parse_list(key, value)?,
            "alphas" => {
                self.alphas = parse_list(key, value)?;
                if self.alphas.iter().any(|a: &f64| !a.is_finite()) {
                    return Err(invalid(key, "must be finite"));
                }
            }
            "s" => self.s = parse_f64(key, value)?,
            "seed" => self.seed = parse_scalar(key, value)?,
            "decay_y" => self.decay_y = parse_f64(key, value)?,
            "decay_ydot" => self.decay_ydot = parse_f64(key, value)?,
            "amplitude" => self.amplitude = parse_f64(key, value)?,
            "zero_mean_velocity" => self.zero_mean_velocity = parse_scalar(key, value)?,
            "h_ref_exponent" => self.h_ref_exponent = parse_scalar(key, value)?,
            "error_time" => {
                self.error_time = match value {
                    "final" => ErrorTime::Final,
                    "max" => ErrorTime::MaxOverSteps,
                    _ => {
                        return Err(invalid(
                            key,
                            format!("expected `final` or `max`, got `{value}`"),
                        ))
                    }
                }
            }
            "output" => self.output = (!value.is_empty()).then(|| value.to_string()),
            _ => unreachable!("key list and setter out of sync"),
        }
        Ok(())
    }

    /// Checks every field against the preconditions of the study.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(invalid("K", "must be positive"));
        }
        if self.p < 2 {
            return Err(invalid("p", "must be at least 2"));
        }
        for id in &self.schemes {
            scheme_by_id(id).map_err(|e| invalid("schemes", e.to_string()))?;
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end", "must be positive and finite"));
        }
        if self.h_exponents.is_empty() {
            return Err(invalid("h_exponents", "must not be empty"));
        }
        for &j in &self.h_exponents {
            if !(-30..=40).contains(&j) {
                return Err(invalid("h_exponents", format!("exponent {j} out of range")));
            }
            let n = self.t_end * 2f64.powi(j);
            if n.fract() != 0.0 {
                return Err(invalid(
                    "h_exponents",
                    format!("t_end = {} is not a multiple of h = 2^-{j}", self.t_end),
                ));
            }
        }
        let max_j = self.h_exponents.iter().copied().max().unwrap_or(0);
        if self.h_ref_exponent <= max_j {
            return Err(invalid(
                "h_ref_exponent",
                format!("must exceed every stepsize exponent (max {max_j})"),
            ));
        }
        if self.h_ref_exponent > 40 {
            return Err(invalid("h_ref_exponent", "must be at most 40"));
        }
        if self.alphas.iter().any(|a| !(-1.0..=1.0).contains(a)) {
            return Err(invalid("alphas", "every alpha must lie in [-1, 1]"));
        }
        if self.amplitude.is_nan() || self.amplitude <= 0.0 {
            return Err(invalid("amplitude", "must be positive"));
        }
        Ok(())
    }

    pub fn initial_data(&self) -> InitialDataSpec {
        InitialDataSpec::SeededRandom {
            seed: self.seed,
            decay_y: self.decay_y,
            decay_ydot: self.decay_ydot,
            amplitude: self.amplitude,
            zero_mean_velocity: self.zero_mean_velocity,
        }
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("discretization", self.discretization.as_str().into());
        kv("K", self.k.to_string());
        kv("p", self.p.to_string());
        kv("schemes", self.schemes.join(", "));
        kv("t_end", self.t_end.to_string());
        kv("h_exponents", join(&self.h_exponents));
        kv("alphas", join(&self.alphas));
        kv("s", self.s.to_string());
        kv("seed", self.seed.to_string());
        kv("decay_y", self.decay_y.to_string());
        kv("decay_ydot", self.decay_ydot.to_string());
        kv("amplitude", self.amplitude.to_string());
        kv("zero_mean_velocity", self.zero_mean_velocity.to_string());
        kv("h_ref_exponent", self.h_ref_exponent.to_string());
        kv("error_time", self.error_time.as_str().into());
        if let Some(path) = &self.output {
            kv("output", path.clone());
        }
        out
    }
}
