use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use semidiag::symfun::{parse_space, SpaceSpec};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "mult1d")]
    Mult1d,
    #[serde(rename = "multnd")]
    MultNd,
    #[serde(rename = "appendixA")]
    AppendixA,
    #[serde(rename = "shift_certificate")]
    ShiftCertificate,
    #[serde(rename = "sweep_psi")]
    SweepPsi,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Mult1d => "mult1d",
            Scenario::MultNd => "multnd",
            Scenario::AppendixA => "appendixA",
            Scenario::ShiftCertificate => "shift_certificate",
            Scenario::SweepPsi => "sweep_psi",
        }
    }
}

/// Trace weight of one grid point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mesh {
    /// `1/d`, so the model has total trace 1.
    #[default]
    Uniform,
    /// `1` per point.
    Counting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: u32,
    pub max: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default = "one")]
    pub d: usize,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default)]
    pub mesh: Mesh,
    #[serde(default)]
    pub spaces: Vec<String>,
    #[serde(default = "default_m")]
    pub m: Range,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub seed: u64,
    pub output: PathBuf,
    /// Metrics to emit; empty selects the scenario default.
    #[serde(default)]
    pub metrics: Vec<String>,
    /// Grid points move by up to `jitter` cells, drawn from `seed`.
    #[serde(default)]
    pub jitter: f64,
    #[serde(default = "default_m_cap")]
    pub m_cap: u32,
    #[serde(default)]
    pub timing: bool,
}

fn one() -> usize {
    1
}

fn default_m() -> Range {
    Range { min: 0, max: 5 }
}

fn default_k_max() -> u32 {
    5
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_m_cap() -> u32 {
    semidiag::construct::DEFAULT_M_CAP
}

pub const MULT_METRICS: &[&str] = &["comm_inf", "tau", "comm_space", "tuple_residual"];
pub const APPENDIX_METRICS: &[&str] = &["comm", "step1", "residual", "telescoping"];

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&src)
    }

    pub fn from_json(src: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(src).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parsed_spaces(&self) -> Result<Vec<SpaceSpec>, CliError> {
        self.spaces
            .iter()
            .map(|s| {
                let space = parse_space(s).map_err(|e| CliError::Config(format!("space `{s}`: {e}")))?;
                space.validate().map_err(|e| CliError::Config(format!("space `{s}`: {e}")))?;
                Ok(space)
            })
            .collect()
    }

    pub fn metrics(&self) -> Vec<String> {
        if !self.metrics.is_empty() {
            return self.metrics.clone();
        }
        let default: &[&str] = match self.scenario {
            Scenario::Mult1d | Scenario::MultNd => &["comm_space"],
            Scenario::AppendixA => &["residual"],
            Scenario::ShiftCertificate | Scenario::SweepPsi => &[],
        };
        default.iter().map(|s| s.to_string()).collect()
    }

    /// Side length of the `n`-dimensional grid with `d` points.
    pub fn side(&self) -> Result<usize, CliError> {
        let side = (self.d as f64).powf(1.0 / self.n as f64).round() as usize;
        let candidates = [side.saturating_sub(1), side, side + 1];
        candidates
            .into_iter()
            .find(|&s| s > 0 && s.checked_pow(self.n as u32) == Some(self.d))
            .ok_or_else(|| CliError::Config(format!("d = {} is not an {}-th power", self.d, self.n)))
    }

    pub fn point_weight(&self) -> f64 {
        match self.mesh {
            Mesh::Uniform => 1.0 / self.d as f64,
            Mesh::Counting => 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg_err = |m: String| Err(CliError::Config(m));
        if self.d == 0 || self.n == 0 {
            return cfg_err("d and n must be positive".into());
        }
        if self.m.min > self.m.max {
            return cfg_err(format!("m range {}..={} is empty", self.m.min, self.m.max));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return cfg_err(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return cfg_err(format!("jitter must lie in [0, 1), got {}", self.jitter));
        }
        let spaces = self.parsed_spaces()?;
        let allowed: &[&str] = match self.scenario {
            Scenario::Mult1d | Scenario::MultNd => MULT_METRICS,
            Scenario::AppendixA => APPENDIX_METRICS,
            Scenario::ShiftCertificate | Scenario::SweepPsi => &[],
        };
        if let Some(bad) = self.metrics.iter().find(|m| !allowed.contains(&m.as_str())) {
            return cfg_err(format!("metric `{bad}` is not available for {}", self.scenario.name()));
        }
        match self.scenario {
            Scenario::Mult1d | Scenario::AppendixA if self.n != 1 => {
                cfg_err(format!("{} needs n = 1", self.scenario.name()))
            }
            Scenario::Mult1d | Scenario::MultNd | Scenario::AppendixA | Scenario::SweepPsi if spaces.is_empty() => {
                cfg_err(format!("{} needs at least one space", self.scenario.name()))
            }
            Scenario::AppendixA if self.k_max == 0 => cfg_err("k_max must be at least 1".into()),
            Scenario::MultNd => self.side().map(|_| ()),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> Result<ScenarioConfig, CliError> {
        ScenarioConfig::from_json(&format!(r#"{{"scenario": "mult1d", "seed": 1, "output": "out"{extra}}}"#))
    }

    #[test]
    fn defaults_need_a_space() {
        assert!(matches!(cfg(""), Err(CliError::Config(_))));
        let c = cfg(r#", "spaces": ["ln1(2)"]"#).unwrap();
        assert_eq!(c.metrics(), vec!["comm_space"]);
        assert_eq!(c.m, Range { min: 0, max: 5 });
    }

    #[test]
    fn seed_is_mandatory() {
        let err = ScenarioConfig::from_json(r#"{"scenario": "mult1d", "output": "o", "spaces": ["linf"]}"#);
        assert!(matches!(err, Err(CliError::Config(m)) if m.contains("seed")));
    }

    #[test]
    fn invalid_psi_is_a_config_error() {
        assert!(matches!(cfg(r#", "spaces": ["pow(3/2)"]"#), Err(CliError::Config(_))));
        assert!(matches!(cfg(r#", "spaces": ["pow(1/2"]"#), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_fields_and_metrics() {
        assert!(cfg(r#", "spaces": ["linf"], "colour": 1"#).is_err());
        assert!(cfg(r#", "spaces": ["linf"], "metrics": ["residual"]"#).is_err());
    }

    #[test]
    fn grid_side() {
        let c = ScenarioConfig::from_json(
            r#"{"scenario": "multnd", "d": 1024, "n": 2, "seed": 0, "output": "o", "spaces": ["ln1(2)"]}"#,
        )
        .unwrap();
        assert_eq!(c.side().unwrap(), 32);
        let bad = r#"{"scenario": "multnd", "d": 1000, "n": 2, "seed": 0, "output": "o", "spaces": ["ln1(2)"]}"#;
        assert!(ScenarioConfig::from_json(bad).is_err());
        let cube = r#"{"scenario": "multnd", "d": 1000, "n": 3, "seed": 0, "output": "o", "spaces": ["ln1(3)"]}"#;
        assert_eq!(ScenarioConfig::from_json(cube).unwrap().side().unwrap(), 10);
    }
}
