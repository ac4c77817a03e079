use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    #[error("invalid psi function: {0}")]
    InvalidPsi(String),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("tuple entries do not commute: residual {residual:.3e} exceeds {allowed:.3e}")]
    NonCommuting { residual: f64, allowed: f64 },

    #[error("joint diagonalization failed: residual {residual:.3e} exceeds {allowed:.3e}")]
    DiagonalizationFailed { residual: f64, allowed: f64 },

    #[error("eigenvalue {value} on axis {axis} lies outside [0, 1); rescale the tuple to the unit cube first")]
    OutsideUnitCube { axis: usize, value: f64 },

    #[error("no level m <= {m_cap} reaches 2^-{k}: bound at the cap is {bound_at_cap:.6e}")]
    UnreachableLevel { k: u32, m_cap: u32, bound_at_cap: f64 },

    #[error("space is embedded in L_{{{n},1}} on the tested window (ratios {ratios:?})")]
    Embedded { n: usize, ratios: Vec<f64> },

    #[error("certificate refused: {0}")]
    Refused(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}
