//! Flat `key = value` scenario files.
//!
//! Blank lines and `#` comments are ignored, keys may appear at most once and
//! unknown keys are rejected. `load_grid` takes a comma-separated list. Every
//! key has a default, so an empty file is a valid configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::erasure::MAX_CODE_LEN;
use crate::model::{ModelVariant, NetworkParams, DEFAULT_ALPHA, DEFAULT_PROBING_RATE, DEFAULT_Q};
use crate::sim::SimConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {msg}")]
    Value { line: usize, key: String, msg: String },
    #[error("`{key}` out of range: {msg}")]
    Range { key: &'static str, msg: String },
}

impl ConfigError {
    /// The key the error is about, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax { .. } => None,
            ConfigError::UnknownKey { key, .. } | ConfigError::Duplicate { key, .. } | ConfigError::Value { key, .. } => {
                Some(key)
            }
            ConfigError::Range { key, .. } => Some(key),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scenario {
    #[default]
    SweepR,
    Modes,
    Equilibrium,
    Validate,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::SweepR, Scenario::Modes, Scenario::Equilibrium, Scenario::Validate];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SweepR => "sweep-r",
            Scenario::Modes => "modes",
            Scenario::Equilibrium => "equilibrium",
            Scenario::Validate => "validate",
        }
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("expected one of sweep-r, modes, equilibrium, validate; got `{s}`"))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvaluatorKind {
    #[default]
    Analytic,
    Simulated,
}

impl EvaluatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EvaluatorKind::Analytic => "analytic",
            EvaluatorKind::Simulated => "simulated",
        }
    }
}

impl FromStr for EvaluatorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "analytic" => Ok(EvaluatorKind::Analytic),
            "simulated" => Ok(EvaluatorKind::Simulated),
            _ => Err(format!("expected analytic or simulated; got `{s}`")),
        }
    }
}

/// Loads used by `modes` when `load_grid` is not set. Analytic loads are in
/// the model's units; simulated loads are source packets per slot and must
/// stay below the one-packet-per-slot channel capacity.
pub const ANALYTIC_LOAD_GRID: [f64; 5] = [2.0, 3.0, 4.0, 5.0, 6.0];
pub const SIMULATED_LOAD_GRID: [f64; 5] = [0.05, 0.1, 0.2, 0.3, 0.4];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub m_nodes: usize,
    /// Per-node rate; the offered load is `m_nodes * lambda`.
    pub lambda: f64,
    pub alpha: f64,
    pub q: f64,
    pub probing_rate: f64,
    pub k: usize,
    pub r_max: usize,
    pub erasure_prob: f64,
    pub backoff_window: u32,
    pub slots: u64,
    pub seed: u64,
    /// `None` selects the evaluator's default grid.
    pub load_grid: Option<Vec<f64>>,
    pub model_variant: ModelVariant,
    pub evaluator: EvaluatorKind,
    pub max_iters: usize,
    pub tolerance: f64,
    pub random_r_offset: usize,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::SweepR,
            m_nodes: 5,
            lambda: 0.8,
            alpha: DEFAULT_ALPHA,
            q: DEFAULT_Q,
            probing_rate: DEFAULT_PROBING_RATE,
            k: 4,
            r_max: 16,
            erasure_prob: 0.1,
            backoff_window: 16,
            slots: 20_000,
            seed: 1,
            load_grid: None,
            model_variant: ModelVariant::Literal,
            evaluator: EvaluatorKind::Analytic,
            max_iters: 100,
            tolerance: 1e-9,
            random_r_offset: 3,
            output_dir: PathBuf::from("."),
            emit_svg: false,
        }
    }
}

pub const KEYS: [&str; 18] = [
    "scenario",
    "m_nodes",
    "lambda",
    "alpha",
    "q",
    "probing_rate",
    "k",
    "r_max",
    "erasure_prob",
    "backoff_window",
    "slots",
    "seed",
    "load_grid",
    "model_variant",
    "evaluator",
    "max_iters",
    "tolerance",
    "random_r_offset",
];

fn parse_value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>().map_err(|e| ConfigError::Value { line, key: key.to_string(), msg: e.to_string() })
}

fn parse_grid(line: usize, key: &str, raw: &str) -> Result<Vec<f64>, ConfigError> {
    raw.split(',').map(|s| parse_value::<f64>(line, key, s.trim())).collect()
}

fn range(key: &'static str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Range { key, msg: msg.into() }
}

impl ScenarioConfig {
    /// Parses a config file body; the result is validated.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw_line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax { line, text: raw_line.trim().to_string() });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(ConfigError::UnknownKey { line, key: key.to_string() });
            };
            if seen.contains(&known) {
                return Err(ConfigError::Duplicate { line, key: key.to_string() });
            }
            seen.push(known);
            match known {
                "scenario" => cfg.scenario = parse_value(line, key, value)?,
                "m_nodes" => cfg.m_nodes = parse_value(line, key, value)?,
                "lambda" => cfg.lambda = parse_value(line, key, value)?,
                "alpha" => cfg.alpha = parse_value(line, key, value)?,
                "q" => cfg.q = parse_value(line, key, value)?,
                "probing_rate" => cfg.probing_rate = parse_value(line, key, value)?,
                "k" => cfg.k = parse_value(line, key, value)?,
                "r_max" => cfg.r_max = parse_value(line, key, value)?,
                "erasure_prob" => cfg.erasure_prob = parse_value(line, key, value)?,
                "backoff_window" => cfg.backoff_window = parse_value(line, key, value)?,
                "slots" => cfg.slots = parse_value(line, key, value)?,
                "seed" => cfg.seed = parse_value(line, key, value)?,
                "load_grid" => cfg.load_grid = Some(parse_grid(line, key, value)?),
                "model_variant" => {
                    cfg.model_variant = ModelVariant::parse(value).ok_or_else(|| ConfigError::Value {
                        line,
                        key: key.to_string(),
                        msg: format!("expected literal or swapped; got `{value}`"),
                    })?
                }
                "evaluator" => cfg.evaluator = parse_value(line, key, value)?,
                "max_iters" => cfg.max_iters = parse_value(line, key, value)?,
                "tolerance" => cfg.tolerance = parse_value(line, key, value)?,
                "random_r_offset" => cfg.random_r_offset = parse_value(line, key, value)?,
                _ => unreachable!("every known key is handled"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() { Ok(()) } else { Err(range(key, format!("{v} must be positive"))) }
        };
        if self.m_nodes < 1 {
            return Err(range("m_nodes", "need at least one node"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(range("lambda", format!("{} must be finite and >= 0", self.lambda)));
        }
        positive("alpha", self.alpha)?;
        positive("q", self.q)?;
        positive("probing_rate", self.probing_rate)?;
        if self.k < 1 {
            return Err(range("k", "need at least one source packet"));
        }
        if self.r_max < 1 {
            return Err(range("r_max", "need at least one redundancy level besides 0"));
        }
        if self.k + self.r_max > MAX_CODE_LEN {
            return Err(range("r_max", format!("k + r_max = {} exceeds {MAX_CODE_LEN}", self.k + self.r_max)));
        }
        if !(0.0..=1.0).contains(&self.erasure_prob) {
            return Err(range("erasure_prob", format!("{} not in [0, 1]", self.erasure_prob)));
        }
        if self.backoff_window < 1 {
            return Err(range("backoff_window", "must be at least 1"));
        }
        if self.slots < 1 {
            return Err(range("slots", "must be at least 1"));
        }
        if let Some(grid) = &self.load_grid {
            if grid.is_empty() {
                return Err(range("load_grid", "empty"));
            }
            if let Some(bad) = grid.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
                return Err(range("load_grid", format!("{bad} must be finite and >= 0")));
            }
        }
        if self.max_iters < 1 {
            return Err(range("max_iters", "must be at least 1"));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(range("tolerance", format!("{} must be finite and >= 0", self.tolerance)));
        }
        if self.random_r_offset < 1 {
            return Err(range("random_r_offset", "must be at least 1"));
        }
        Ok(())
    }

    /// Writes every key in canonical order; `parse` reads it back unchanged.
    pub fn serialize(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// `(key, value)` pairs in canonical order. An unset `load_grid` is
    /// omitted so the round trip keeps the evaluator default.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("scenario", self.scenario.name().to_string()),
            ("m_nodes", self.m_nodes.to_string()),
            ("lambda", self.lambda.to_string()),
            ("alpha", self.alpha.to_string()),
            ("q", self.q.to_string()),
            ("probing_rate", self.probing_rate.to_string()),
            ("k", self.k.to_string()),
            ("r_max", self.r_max.to_string()),
            ("erasure_prob", self.erasure_prob.to_string()),
            ("backoff_window", self.backoff_window.to_string()),
            ("slots", self.slots.to_string()),
            ("seed", self.seed.to_string()),
        ];
        if let Some(grid) = &self.load_grid {
            let parts: Vec<String> = grid.iter().map(|g| g.to_string()).collect();
            out.push(("load_grid", parts.join(", ")));
        }
        out.extend([
            ("model_variant", self.model_variant.name().to_string()),
            ("evaluator", self.evaluator.name().to_string()),
            ("max_iters", self.max_iters.to_string()),
            ("tolerance", self.tolerance.to_string()),
            ("random_r_offset", self.random_r_offset.to_string()),
        ]);
        out
    }

    /// The configured grid, or the evaluator default.
    pub fn loads(&self) -> Vec<f64> {
        self.load_grid.clone().unwrap_or_else(|| match self.evaluator {
            EvaluatorKind::Analytic => ANALYTIC_LOAD_GRID.to_vec(),
            EvaluatorKind::Simulated => SIMULATED_LOAD_GRID.to_vec(),
        })
    }

    /// Analytic parameters at the configured rate and `r = 0`.
    pub fn network_params(&self) -> NetworkParams {
        NetworkParams {
            alpha: self.alpha,
            q: self.q,
            probing_rate: self.probing_rate,
            ..NetworkParams::new(self.m_nodes, self.lambda, self.k, 0)
        }
    }

    /// Simulator template carrying the same source-packet rate per node:
    /// `lambda / k` generations per slot.
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            m_nodes: self.m_nodes,
            lambda_slot: self.lambda / self.k as f64,
            k: self.k,
            r: 0,
            node_redundancy: None,
            erasure_prob: self.erasure_prob,
            backoff_window: self.backoff_window,
            slots: self.slots,
            seed: self.seed,
            coding_enabled: true,
            verify_decode: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(ScenarioConfig::parse("").unwrap(), ScenarioConfig::default());
        assert_eq!(ScenarioConfig::parse("# only a comment\n\n").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn negative_alpha_names_key() {
        let err = ScenarioConfig::parse("alpha = -1").unwrap_err();
        assert_eq!(err.key(), Some("alpha"));
        assert!(err.to_string().contains("alpha"));
    }

    #[test]
    fn round_trip() {
        let cfg = ScenarioConfig::parse("k = 8\nr_max = 16\nm_nodes = 10").unwrap();
        assert_eq!((cfg.k, cfg.r_max, cfg.m_nodes), (8, 16, 10));
        assert_eq!(ScenarioConfig::parse(&cfg.serialize()).unwrap(), cfg);
        let grid = ScenarioConfig::parse("load_grid = 0.05, 0.1,0.3\nevaluator = simulated\nlambda = 0.1").unwrap();
        assert_eq!(grid.load_grid, Some(vec![0.05, 0.1, 0.3]));
        assert_eq!(ScenarioConfig::parse(&grid.serialize()).unwrap(), grid);
    }

    #[test]
    fn rejects_bad_input() {
        let cases = [
            ("nonsense", None),
            ("beta = 1", Some("beta")),
            ("k = 2\nk = 3", Some("k")),
            ("k = two", Some("k")),
            ("scenario = fig9", Some("scenario")),
            ("model_variant = other", Some("model_variant")),
            ("erasure_prob = 1.5", Some("erasure_prob")),
            ("r_max = 0", Some("r_max")),
            ("k = 200\nr_max = 57", Some("r_max")),
            ("load_grid = 0.1, -2", Some("load_grid")),
            ("load_grid = 0.1, x", Some("load_grid")),
            ("tolerance = NaN", Some("tolerance")),
            ("m_nodes = 0", Some("m_nodes")),
        ];
        for (text, key) in cases {
            let err = ScenarioConfig::parse(text).expect_err(text);
            assert_eq!(err.key(), key, "{text}: {err}");
        }
        let err = ScenarioConfig::parse("k = 4\nbad line").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }));
    }

    #[test]
    fn trailing_comments_and_whitespace() {
        let cfg = ScenarioConfig::parse("  seed = 42   # fixed\nscenario=modes").unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.scenario, Scenario::Modes);
    }

    #[test]
    fn default_grids_follow_evaluator() {
        let a = ScenarioConfig::default();
        assert_eq!(a.loads(), ANALYTIC_LOAD_GRID.to_vec());
        let s = ScenarioConfig { evaluator: EvaluatorKind::Simulated, ..a };
        assert_eq!(s.loads(), SIMULATED_LOAD_GRID.to_vec());
    }
}
