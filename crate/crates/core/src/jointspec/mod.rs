//! Joint spectral measure of a commuting Hermitian tuple: simultaneous
//! diagonalization, box projections, dyadic atoms, unit-cube rescaling.

mod boxes;
mod rescale;
mod spectrum;

pub use boxes::{atom_of, dyadic_floor, DyadicAtom, SpectralBox, MAX_LEVEL, SNAP_TOL};
pub use rescale::{rescale_to_unit_cube, AffineMap, MARGIN};
pub use spectrum::{joint_diagonalize, Basis, EigenTuple, JointSpectrum, DEFAULT_DTOL};
