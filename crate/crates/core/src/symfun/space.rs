use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::norms;
use super::parse;
use super::psi::PsiFunction;
use super::step::StepFunction;
use crate::{Error, Result};

/// A symmetric function space on `(0, ∞)` with a computable norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpaceSpec {
    Lorentz(PsiFunction),
    LInfinity,
    /// `E ∩ L_∞` with norm `max{‖·‖_E, ‖·‖_∞}`.
    IntersectLInf(Box<SpaceSpec>),
    /// `L_{n,1} = Λ_{t^{1/n}}`.
    Ln1(u32),
}

impl SpaceSpec {
    pub fn cap_inf(self) -> Self {
        SpaceSpec::IntersectLInf(Box::new(self))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceSpec::Lorentz(psi) => psi.validate(),
            SpaceSpec::LInfinity => Ok(()),
            SpaceSpec::IntersectLInf(base) => base.validate(),
            SpaceSpec::Ln1(0) => Err(Error::InvalidPsi("L_{n,1} needs n >= 1".into())),
            SpaceSpec::Ln1(_) => Ok(()),
        }
    }

    pub fn norm(&self, f: &StepFunction) -> Result<f64> {
        norms::space_norm(f, self)
    }

    pub fn fundamental(&self, t: f64) -> f64 {
        norms::fundamental_function(self, t)
    }

    /// The Lorentz ψ behind this space, looking through `∩ L_∞`.
    pub fn lorentz_psi(&self) -> Option<PsiFunction> {
        match self {
            SpaceSpec::Lorentz(psi) => Some(psi.clone()),
            SpaceSpec::Ln1(n) => Some(PsiFunction::PowerRoot(*n as f64)),
            SpaceSpec::IntersectLInf(base) => base.lorentz_psi(),
            SpaceSpec::LInfinity => None,
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Lorentz(psi) => write!(f, "{psi}"),
            SpaceSpec::LInfinity => write!(f, "linf"),
            SpaceSpec::IntersectLInf(base) => write!(f, "cap_inf({base})"),
            SpaceSpec::Ln1(n) => write!(f, "ln1({n})"),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse::parse_space(s)
    }
}

impl FromStr for PsiFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse::parse_psi(s)
    }
}
