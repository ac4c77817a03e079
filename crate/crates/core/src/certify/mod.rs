//! Quasicentral modulus estimates: upper bounds from approximate units and
//! projected subgradient descent on finite models, lower bounds from trace
//! certificates on banded operators of `ℓ²(ℕ)`.

mod banded;
mod dual;
mod modulus;

pub use banded::{banded_trace, parse_banded, schur_band_bound, BandedOp, DecayCertificate, Seq, TailTerm, TraceValue};
pub use dual::{corner_trace, dual_certificate, dual_operator, psd_tail_certificate, DualCertificate, PsdTail};
pub use modulus::{
    grid_search_oracle, modulus_inf_optimize, modulus_inf_restricted, modulus_upper_schedule, Method, ModulusEstimate,
    OptimizeOptions, OptimizeResult, RestrictedProblem, RestrictedResult, StepSchedule, UpperPoint,
};
