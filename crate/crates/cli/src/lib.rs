//! Experiment driver: JSON scenario configs in, CSV rows, JSON reports and
//! SVG plots out.

pub mod bounds;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod scenarios;

use serde_json::json;

pub use config::ScenarioConfig;
pub use error::CliError;

pub const RESULTS: &str = "results.csv";
pub const REPORTS: &str = "reports.json";
pub const MANIFEST: &str = "manifest.json";

/// Outcome of a completed run.
#[derive(Debug)]
pub struct RunSummary {
    pub rows: usize,
    pub violations: usize,
    pub artifacts: Vec<String>,
}

/// Runs a scenario and writes its artifacts into `cfg.output`.
pub fn run_config(cfg: &ScenarioConfig) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let out = scenarios::run(cfg)?;
    let mut rows = out.rows;
    output::sort_rows(&mut rows);
    let violations = rows.iter().filter(|r| r.violates()).count();
    let dir = &cfg.output;

    output::write_atomic(&dir.join(RESULTS), &output::csv_bytes(&rows)?)?;
    output::write_json(&dir.join(REPORTS), &out.reports)?;
    let mut artifacts = vec![RESULTS.to_string(), REPORTS.to_string()];
    for (name, value) in &out.extra {
        output::write_json(&dir.join(name), value)?;
        artifacts.push(name.clone());
    }
    let manifest = json!({
        "config": cfg,
        "versions": {
            "semidiag": semidiag::VERSION,
            "semidiag-cli": env!("CARGO_PKG_VERSION"),
            "csv_columns": output::COLUMNS,
        },
        "artifacts": artifacts,
        "rows": rows.len(),
        "violations": violations,
    });
    output::write_json(&dir.join(MANIFEST), &manifest)?;
    artifacts.push(MANIFEST.to_string());
    Ok(RunSummary { rows: rows.len(), violations, artifacts })
}

