//! Single-operator diagonalization through a chain of dyadic approximate units.

use std::sync::Arc;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use super::approx::{approx_unit_frame, select_mk, DEFAULT_M_CAP};
use super::diag::{DiagonalizationReport, DiagonalizationSummary, FamilyMember};
use super::frame::{frame_basis, SpectralProjection};
use super::hull::EIGENSPACE_TOL;
use crate::jointspec::{joint_diagonalize, JointSpectrum, DEFAULT_DTOL};
use crate::ncalg::{dense, HermTuple, MatOp};
use crate::symfun::{embedding_test_space, space_norm, SpaceSpec, StepFunction};
use crate::{Error, Result, C64};

/// Outcome for one `k` of the single-operator construction.
#[derive(Clone, Debug)]
pub struct SingleReport {
    pub k: u32,
    pub m_k: u32,
    pub tau_qk: f64,
    /// `‖[a, q_k]‖_{E∩L_∞}` against `2^{-k}`.
    pub comm_norm: f64,
    pub comm_bound: f64,
    /// `‖a − a_k‖_{E∩L_∞}` against `2^{2-k}`.
    pub step1_residual: f64,
    pub step1_bound: f64,
    /// `max |(a − a_k) − (telescoped sum)|`.
    pub telescoping_defect: f64,
    /// Whether `q_k` increases to `1` (otherwise to the hull of `q`).
    pub generating: bool,
    /// `d_k` with `‖a − d_k‖_{E∩L_∞}` against `2^{3-k}`.
    pub report: DiagonalizationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleSummary {
    pub k: u32,
    pub m_k: u32,
    pub tau_qk: f64,
    pub comm_norm: f64,
    pub comm_bound: f64,
    pub step1_residual: f64,
    pub step1_bound: f64,
    pub telescoping_defect: f64,
    pub generating: bool,
    pub diagonal: DiagonalizationSummary,
}

impl SingleReport {
    pub fn summary(&self) -> SingleSummary {
        SingleSummary {
            k: self.k,
            m_k: self.m_k,
            tau_qk: self.tau_qk,
            comm_norm: self.comm_norm,
            comm_bound: self.comm_bound,
            step1_residual: self.step1_residual,
            step1_bound: self.step1_bound,
            telescoping_defect: self.telescoping_defect,
            generating: self.generating,
            diagonal: self.report.summary(),
        }
    }
}

/// `max |(a − a_k) − RHS|` for the telescoped form of `a − a_k` along a chain
/// `q_k ≤ q_{k+1} ≤ ... ≤ q_L = 1`, with `a_k = q_k a q_k + Σ r_l a r_l`.
pub fn telescoping_defect(a: &MatOp, chain: &[MatOp]) -> Result<f64> {
    let one = MatOp::identity(a.algebra().clone());
    let Some(qk) = chain.first() else { return Ok(0.0) };
    let r: Vec<MatOp> = chain.windows(2).map(|w| w[1].sub(&w[0])).collect::<Result<_>>()?;
    let mut ak = qk.mul(a)?.mul(qk)?;
    for rl in &r {
        ak = ak.add(&rl.mul(a)?.mul(rl)?)?;
    }
    let lhs = a.sub(&ak)?;
    let co = one.sub(qk)?;
    let mut rhs = qk.mul(a)?.mul(&co)?.add(&co.mul(a)?.mul(qk)?)?;
    for (l, rl) in r.iter().enumerate() {
        let tail = one.sub(&chain[l + 1])?;
        rhs = rhs.add(&tail.mul(a)?.mul(rl)?)?.add(&rl.mul(a)?.mul(&tail)?)?;
    }
    lhs.max_abs_diff(&rhs)
}

struct Compressed {
    matrix: Mat<C64>,
    members: Vec<(Mat<C64>, f64)>,
}

/// Diagonal approximation of `P D P` inside `P`: eigenvalues of the
/// compression rounded to the grid `2·tol·ℤ` (kept exact for `tol = None`).
fn compress(d: &[f64], p: MatRef<'_, C64>, tol: Option<f64>) -> Result<Compressed> {
    let dim = d.len();
    let (pv, pu) = dense::herm_eig(p)?;
    let cols: Vec<usize> = (0..dim).filter(|&i| pv[i] > 0.5).collect();
    let mut out = Compressed { matrix: Mat::zeros(dim, dim), members: Vec::new() };
    if cols.is_empty() {
        return Ok(out);
    }
    let v = Mat::from_fn(dim, cols.len(), |i, k| pu[(i, cols[k])]);
    let dv = Mat::from_fn(dim, cols.len(), |i, k| v[(i, k)] * d[i]);
    let c = v.adjoint() * &dv;
    let (vals, w) = dense::herm_eig(dense::hermitian_part(c.as_ref()).as_ref())?;
    let vw = &v * &w;
    let rounded: Vec<f64> = match tol {
        Some(t) => {
            let h = 2.0 * t;
            vals.iter().map(|&x| (x / h).round() * h).collect()
        }
        None => vals.clone(),
    };
    let mut start = 0;
    while start < rounded.len() {
        let mut end = start + 1;
        while end < rounded.len() && rounded[end] == rounded[start] {
            end += 1;
        }
        let g = vw.subcols(start, end - start).to_owned();
        let gg = dense::outer_projection(g.as_ref());
        for j in 0..dim {
            for i in 0..dim {
                out.matrix[(i, j)] += gg[(i, j)] * rounded[start];
            }
        }
        out.members.push((g, rounded[start]));
        start = end;
    }
    Ok(out)
}

fn mul3(a: &Mat<C64>, b: &Mat<C64>, c: &Mat<C64>) -> Mat<C64> {
    let ab = a * b;
    &ab * c
}

fn diag_mat(d: &[f64]) -> Mat<C64> {
    Mat::from_fn(d.len(), d.len(), |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) })
}

/// `‖x‖_{space}` for Hermitian frame blocks.
fn herm_norm(spectrum: &JointSpectrum, blocks: &[Mat<C64>], space: &SpaceSpec) -> Result<(f64, f64)> {
    let mut items = Vec::new();
    for (b, m) in blocks.iter().enumerate() {
        let w = spectrum.algebra().weight(b);
        for v in dense::herm_eigvals(dense::hermitian_part(m.as_ref()).as_ref())? {
            items.push((v.abs(), w));
        }
    }
    let mu = StepFunction::rearrange(items)?;
    Ok((space_norm(&mu, space)?, mu.sup()))
}

/// Runs the chain construction for `k = 1..=k_max`.
///
/// `a` must have spectrum in `[0,1)` and `space` must fail the `L_{1,1}`
/// embedding window. The chain `q_k = p_{m_k}` stops growing at the level
/// where every eigenvalue has its own atom, where it equals the hull `e_q`;
/// when `e_q ≠ 1` the compression of `a` to `1 − e_q` is added exactly.
pub fn kuroda_diagonalize_single(a: &MatOp, q: &MatOp, space: &SpaceSpec, k_max: u32) -> Result<Vec<SingleReport>> {
    kuroda_diagonalize_single_capped(a, q, space, k_max, DEFAULT_M_CAP)
}

pub fn kuroda_diagonalize_single_capped(
    a: &MatOp,
    q: &MatOp,
    space: &SpaceSpec,
    k_max: u32,
    m_cap: u32,
) -> Result<Vec<SingleReport>> {
    let spectrum = Arc::new(joint_diagonalize(&HermTuple::new(vec![a.clone()])?, DEFAULT_DTOL)?);
    spectrum.atom_partition(0)?;
    embedding_test_space(space, 1, 20)?.require_not_embedded()?;
    let cap = space.clone().cap_inf();
    let tau_q = q.trace().re;
    let w = frame_basis(&spectrum, q)?;
    let iso = spectrum.isolation_level(EIGENSPACE_TOL)?;

    let mut levels: Vec<u32> = Vec::new();
    let mut l = 1u32;
    loop {
        let m = match select_mk(&cap, tau_q, l, 1, m_cap) {
            Ok(m) => m.min(iso),
            Err(Error::UnreachableLevel { .. }) => iso,
            Err(e) => return Err(e),
        };
        let m = match levels.last() {
            Some(&prev) if m <= prev => (prev + 1).min(iso),
            _ => m,
        };
        levels.push(m);
        if l >= k_max && m == iso {
            break;
        }
        l += 1;
    }
    let chain: Vec<SpectralProjection> = levels
        .iter()
        .map(|&m| approx_unit_frame(&spectrum, &w, m, |t| Some(t.lambda.clone())))
        .collect::<Result<_>>()?;
    let top = chain.last().expect("chain is nonempty");
    let generating = top.rank() == spectrum.algebra().total_dim();

    let alg = spectrum.algebra().clone();
    let nb = alg.num_blocks();
    let lambdas: Vec<Vec<f64>> = (0..nb).map(|b| spectrum.block_lambdas(b).map(|l| l[0]).collect()).collect();
    let dmats: Vec<Mat<C64>> = lambdas.iter().map(|l| diag_mat(l)).collect();
    let qf: Vec<Vec<Mat<C64>>> = chain.iter().map(|p| (0..nb).map(|b| p.frame_block(b)).collect()).collect();
    let ff: Vec<Mat<C64>> = (0..nb)
        .map(|b| {
            let d = alg.dim(b);
            let id = Mat::<C64>::identity(d, d);
            &id - &qf[qf.len() - 1][b]
        })
        .collect();
    let rf: Vec<Vec<Mat<C64>>> = qf.windows(2).map(|pair| (0..nb).map(|b| &pair[1][b] - &pair[0][b]).collect()).collect();
    let trace_of = |blocks: &[Mat<C64>]| -> f64 {
        blocks
            .iter()
            .enumerate()
            .map(|(b, m)| (0..m.nrows()).map(|i| m[(i, i)].re).sum::<f64>() * alg.weight(b))
            .sum()
    };
    let tol_for = |l: u32, tau: f64| 1.0 / ((l as f64).exp2() * cap.fundamental(tau).max(1.0));

    let mut b_parts: Vec<Vec<Compressed>> = Vec::with_capacity(rf.len());
    for (idx, r) in rf.iter().enumerate() {
        let tol = tol_for(idx as u32 + 1, trace_of(r));
        b_parts.push((0..nb).map(|b| compress(&lambdas[b], r[b].as_ref(), Some(tol))).collect::<Result<_>>()?);
    }
    let f_parts: Vec<Compressed> = (0..nb).map(|b| compress(&lambdas[b], ff[b].as_ref(), None)).collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let ki = (k as usize - 1).min(chain.len() - 1);
        let qk = &qf[ki];
        let tau_qk = chain[ki].trace();
        let c_parts: Vec<Compressed> = (0..nb)
            .map(|b| compress(&lambdas[b], qk[b].as_ref(), Some(tol_for(k, tau_qk))))
            .collect::<Result<_>>()?;
        let mut ak = Vec::with_capacity(nb);
        let mut dk = Vec::with_capacity(nb);
        let mut tele = 0.0f64;
        let mut family = Vec::new();
        for b in 0..nb {
            let dm = &dmats[b];
            let mut a_b = mul3(&qk[b], dm, &qk[b]) + mul3(&ff[b], dm, &ff[b]);
            let mut d_b = &c_parts[b].matrix + &f_parts[b].matrix;
            for l in ki..rf.len() {
                a_b = &a_b + &mul3(&rf[l][b], dm, &rf[l][b]);
                d_b = &d_b + &b_parts[l][b].matrix;
            }
            let d = alg.dim(b);
            let id = Mat::<C64>::identity(d, d);
            let co = &id - &qk[b];
            let mut rhs = mul3(&qk[b], dm, &co) + mul3(&co, dm, &qk[b]);
            for l in ki..rf.len() {
                let tail = &id - &qf[l + 1][b];
                rhs = &rhs + &mul3(&tail, dm, &rf[l][b]) + mul3(&rf[l][b], dm, &tail);
            }
            let lhs = dm - &a_b;
            tele = tele.max(dense::max_abs_diff(lhs.as_ref(), rhs.as_ref()));
            let parts = std::iter::once(&c_parts[b])
                .chain(b_parts[ki..].iter().map(|p| &p[b]))
                .chain(std::iter::once(&f_parts[b]));
            for part in parts {
                for (g, v) in &part.members {
                    family.push(FamilyMember { block: b, coords: (0..d).collect(), basis: Some(g.clone()), value: vec![*v] });
                }
            }
            ak.push(dm - &a_b);
            dk.push(dm - &d_b);
        }
        let (step1, _) = herm_norm(&spectrum, &ak, &cap)?;
        let (res, res_inf) = herm_norm(&spectrum, &dk, &cap)?;
        let comm_norm = chain[ki].commutator_norm(&spectrum, 0, &cap)?;
        out.push(SingleReport {
            k,
            m_k: levels[ki],
            tau_qk,
            comm_norm,
            comm_bound: (-(k as f64)).exp2(),
            step1_residual: step1,
            step1_bound: (2.0 - k as f64).exp2(),
            telescoping_defect: tele,
            generating,
            report: DiagonalizationReport {
                spectrum: spectrum.clone(),
                family,
                space: space.clone(),
                residuals: vec![res],
                residuals_inf: vec![res_inf],
                bound: (3.0 - k as f64).exp2(),
            },
        });
    }
    Ok(out)
}
