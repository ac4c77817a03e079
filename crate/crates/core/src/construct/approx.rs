use std::collections::BTreeMap;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::frame::{frame_basis, range_basis, Piece, SpectralProjection};
use crate::jointspec::{atom_of, DyadicAtom, EigenTuple, JointSpectrum};
use crate::ncalg::{HermTuple, MatOp};
use crate::symfun::{PsiFunction, SpaceSpec};
use crate::{Error, Result, C64};

pub const DEFAULT_M_CAP: u32 = 60;

/// `p_m = Σ_A 𝔩(e^α(A) q)` together with the two bounds it must satisfy.
#[derive(Clone, Debug)]
pub struct ApproxUnitReport {
    pub m: u32,
    pub n: usize,
    pub p_m: SpectralProjection,
    /// `‖[p_m, α(j)]‖_∞` per axis.
    pub comm_per_axis: Vec<f64>,
    pub inf_comm: f64,
    pub tau_pm: f64,
    pub tau_q: f64,
    /// `2^{-m}`.
    pub bound_inf: f64,
    /// `2^{mn} τ(q)`.
    pub bound_tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxUnitSummary {
    pub m: u32,
    pub rank: usize,
    pub inf_comm: f64,
    pub tau_pm: f64,
    pub tau_q: f64,
    pub bound_inf: f64,
    pub bound_tau: f64,
}

impl ApproxUnitReport {
    /// Both bounds hold up to `1e-9` slack, relative to `‖α‖_∞` and `τ(q)`.
    pub fn bounds_hold(&self, alpha_norm: f64) -> bool {
        self.inf_comm <= self.bound_inf + 1e-9 * alpha_norm.max(1.0)
            && self.tau_pm <= self.bound_tau + 1e-9 * self.tau_q.max(f64::MIN_POSITIVE)
    }

    pub fn summary(&self) -> ApproxUnitSummary {
        ApproxUnitSummary {
            m: self.m,
            rank: self.p_m.rank(),
            inf_comm: self.inf_comm,
            tau_pm: self.tau_pm,
            tau_q: self.tau_q,
            bound_inf: self.bound_inf,
            bound_tau: self.bound_tau,
        }
    }

    /// `p_m` in original coordinates.
    pub fn materialize(&self, spectrum: &JointSpectrum) -> Result<MatOp> {
        self.p_m.materialize(spectrum)
    }
}

/// Frame pieces of `Σ_A 𝔩(e(A) q)` over the atoms of level `m` of the
/// points `lambda(t)`; tuples mapped to `None` are left out.
pub(crate) fn approx_unit_frame(
    spectrum: &JointSpectrum,
    w: &[Mat<C64>],
    m: u32,
    lambda: impl Fn(&EigenTuple) -> Option<Vec<f64>>,
) -> Result<SpectralProjection> {
    let alg = spectrum.algebra();
    let mut groups: BTreeMap<(DyadicAtom, usize), Vec<usize>> = BTreeMap::new();
    for t in spectrum.tuples() {
        if let Some(l) = lambda(t) {
            groups.entry((atom_of(&l, m), t.block)).or_default().push(t.col);
        }
    }
    let mut pieces = Vec::with_capacity(groups.len());
    for ((_, b), coords) in groups {
        let wb = &w[b];
        if wb.ncols() == 0 {
            continue;
        }
        let rows = Mat::from_fn(coords.len(), wb.ncols(), |r, k| wb[(coords[r], k)]);
        let tol = f64::EPSILON * alg.dim(b) as f64;
        let basis = range_basis(rows.as_ref(), tol)?;
        if basis.ncols() > 0 {
            pieces.push(Piece { block: b, coords, basis });
        }
    }
    SpectralProjection::new(alg.clone(), pieces)
}

fn check_cube(spectrum: &JointSpectrum) -> Result<()> {
    spectrum.atom_partition(0).map(|_| ())
}

/// Builds `p_m` for a spectrum inside `[0,1)^n` and a projection `q`.
pub fn build_approx_unit(spectrum: &JointSpectrum, q: &MatOp, m: u32) -> Result<ApproxUnitReport> {
    check_cube(spectrum)?;
    let w = frame_basis(spectrum, q)?;
    let p_m = approx_unit_frame(spectrum, &w, m, |t| Some(t.lambda.clone()))?;
    report(spectrum, p_m, q.trace().re, m)
}

pub(crate) fn report(spectrum: &JointSpectrum, p_m: SpectralProjection, tau_q: f64, m: u32) -> Result<ApproxUnitReport> {
    let n = spectrum.n();
    let comm_per_axis = (0..n)
        .map(|j| p_m.commutator_norm_inf(spectrum, j))
        .collect::<Result<Vec<_>>>()?;
    let inf_comm = comm_per_axis.iter().copied().fold(0.0, f64::max);
    Ok(ApproxUnitReport {
        m,
        n,
        tau_pm: p_m.trace(),
        p_m,
        comm_per_axis,
        inf_comm,
        tau_q,
        bound_inf: (-(m as f64)).exp2(),
        bound_tau: ((m as usize * n) as f64).exp2() * tau_q,
    })
}

/// Centre points of the level-`m` atoms, one tuple per eigen-tuple.
pub fn midpoint_values(spectrum: &JointSpectrum, m: u32) -> Result<Vec<Vec<f64>>> {
    check_cube(spectrum)?;
    Ok(spectrum.tuples().iter().map(|t| atom_of(&t.lambda, m).centre()).collect())
}

/// `α_m(j) = Σ_A c_A(j) e^α(A)`.
pub fn midpoint_quantize(spectrum: &JointSpectrum, m: u32) -> Result<HermTuple> {
    check_cube(spectrum)?;
    let entries = (0..spectrum.n())
        .map(|j| spectrum.frame_diagonal(|t| C64::new(atom_of(&t.lambda, m).centre()[j], 0.0)))
        .collect::<Result<Vec<_>>>()?;
    HermTuple::new(entries)
}

/// `max{2τ(q), 1} · 2^{-m} · φ(2^{mn})`.
pub fn level_bound(space: &SpaceSpec, tau_q: f64, m: u32, n: usize) -> f64 {
    let t = ((m as usize * n) as f64).exp2();
    let phi = if t.is_finite() { space.fundamental(t) } else { f64::INFINITY };
    (2.0 * tau_q).max(1.0) * (-(m as f64)).exp2() * phi
}

/// Smallest `m ≤ m_cap` with `max{2τ(q),1}·2^{-m}·φ(2^{mn}) ≤ 2^{-k}`, `φ`
/// the fundamental function of `space` (ψ itself for a Lorentz space).
pub fn select_mk(space: &SpaceSpec, tau_q: f64, k: u32, n: usize, m_cap: u32) -> Result<u32> {
    let target = (-(k as f64)).exp2();
    (0..=m_cap)
        .find(|&m| level_bound(space, tau_q, m, n) <= target)
        .ok_or_else(|| Error::UnreachableLevel { k, m_cap, bound_at_cap: level_bound(space, tau_q, m_cap, n) })
}

/// Levels `m_1 < m_2 < ... < m_{k_max}`, each the smallest admissible level
/// above its predecessor.
pub fn select_mk_sequence(space: &SpaceSpec, tau_q: f64, k_max: u32, n: usize, m_cap: u32) -> Result<Vec<u32>> {
    let mut out: Vec<u32> = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let m = select_mk(space, tau_q, k, n, m_cap)?;
        let m = match out.last() {
            Some(&prev) if m <= prev => prev + 1,
            _ => m,
        };
        if m > m_cap {
            return Err(Error::UnreachableLevel { k, m_cap, bound_at_cap: level_bound(space, tau_q, m_cap, n) });
        }
        out.push(m);
    }
    Ok(out)
}

/// Both sides of `‖[p_m, α(j)]‖_{Λψ} ≤ max{2τ(q),1}·2^{-m}ψ(2^{mn})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzCommutatorReport {
    pub m: u32,
    pub tau_q: f64,
    pub lhs: Vec<f64>,
    pub rhs: f64,
}

impl LorentzCommutatorReport {
    pub fn holds(&self, scale: f64) -> bool {
        self.lhs.iter().all(|&l| l <= self.rhs + 1e-9 * scale.max(1.0))
    }
}

pub fn lorentz_commutator_report(spectrum: &JointSpectrum, q: &MatOp, psi: &PsiFunction, m: u32) -> Result<LorentzCommutatorReport> {
    let unit = build_approx_unit(spectrum, q, m)?;
    let space = SpaceSpec::Lorentz(psi.clone());
    let lhs = (0..spectrum.n())
        .map(|j| unit.p_m.commutator_norm(spectrum, j, &space))
        .collect::<Result<Vec<_>>>()?;
    Ok(LorentzCommutatorReport { m, tau_q: unit.tau_q, lhs, rhs: level_bound(&space, unit.tau_q, m, spectrum.n()) })
}
