//! Diagonalization modulo a symmetric ideal: dyadic approximate units,
//! generating hulls and the two constructions built from them.

mod appendix;
mod approx;
mod diag;
mod frame;
mod hull;
mod tuple;

pub use appendix::{kuroda_diagonalize_single, kuroda_diagonalize_single_capped, telescoping_defect, SingleReport, SingleSummary};
pub use approx::{
    build_approx_unit, level_bound, lorentz_commutator_report, midpoint_quantize, midpoint_values, select_mk,
    select_mk_sequence, ApproxUnitReport, ApproxUnitSummary, LorentzCommutatorReport, DEFAULT_M_CAP,
};
pub use diag::{DiagonalizationReport, DiagonalizationSummary, FamilyMember};
pub use frame::{Piece, SpectralProjection};
pub use hull::{generating_decomposition, generating_hull, GeneratingPair, EIGENSPACE_TOL};
pub use tuple::{kuroda_diagonalize_tuple, HullSummary, TupleReport, WindowReport};
