//! Projections stored in the joint eigenbasis of a spectrum.

use std::sync::Arc;

use faer::{Mat, MatRef};

use crate::jointspec::{Basis, JointSpectrum};
use crate::ncalg::{dense, MatOp, TracedAlgebra};
use crate::symfun::{space_norm, SpaceSpec, StepFunction};
use crate::{Error, Result, C64};

/// `V V*` supported on the frame coordinates `coords` of one block, with
/// `V` having orthonormal columns.
#[derive(Clone, Debug)]
pub struct Piece {
    pub block: usize,
    pub coords: Vec<usize>,
    pub basis: Mat<C64>,
}

impl Piece {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// The piece's columns as full-length frame vectors.
    pub fn embedded(&self, d: usize) -> Mat<C64> {
        let mut out = Mat::zeros(d, self.rank());
        for (r, &c) in self.coords.iter().enumerate() {
            for k in 0..self.rank() {
                out[(c, k)] = self.basis[(r, k)];
            }
        }
        out
    }
}

/// A projection `Σ V_i V_i*` in the frame of a [`JointSpectrum`], built from
/// pieces with pairwise disjoint coordinate sets.
#[derive(Clone, Debug)]
pub struct SpectralProjection {
    algebra: Arc<TracedAlgebra>,
    pieces: Vec<Piece>,
}

impl SpectralProjection {
    pub fn new(algebra: Arc<TracedAlgebra>, pieces: Vec<Piece>) -> Result<Self> {
        let mut used: Vec<Vec<bool>> = algebra.blocks().iter().map(|b| vec![false; b.dim]).collect();
        for p in &pieces {
            if p.block >= algebra.num_blocks() || p.basis.nrows() != p.coords.len() {
                return Err(Error::InvalidOperator("malformed projection piece".into()));
            }
            for &c in &p.coords {
                if c >= used[p.block].len() || std::mem::replace(&mut used[p.block][c], true) {
                    return Err(Error::InvalidOperator(format!("piece coordinate {c} repeated or out of range")));
                }
            }
        }
        Ok(Self { algebra, pieces: pieces.into_iter().filter(|p| p.rank() > 0).collect() })
    }

    pub fn zero(algebra: Arc<TracedAlgebra>) -> Self {
        Self { algebra, pieces: Vec::new() }
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        &self.algebra
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn rank(&self) -> usize {
        self.pieces.iter().map(Piece::rank).sum()
    }

    /// `τ(P) = Σ weight_b · rank`.
    pub fn trace(&self) -> f64 {
        self.pieces.iter().map(|p| self.algebra.weight(p.block) * p.rank() as f64).sum()
    }

    /// `P v` for a frame vector `v` of block `b`.
    pub fn apply(&self, b: usize, v: MatRef<'_, C64>) -> Mat<C64> {
        let mut out = Mat::zeros(v.nrows(), v.ncols());
        for p in self.pieces.iter().filter(|p| p.block == b) {
            let local = Mat::from_fn(p.coords.len(), v.ncols(), |r, k| v[(p.coords[r], k)]);
            let coef = p.basis.adjoint() * &local;
            let back = &p.basis * &coef;
            for (r, &c) in p.coords.iter().enumerate() {
                for k in 0..v.ncols() {
                    out[(c, k)] = back[(r, k)];
                }
            }
        }
        out
    }

    /// Dense frame matrix of block `b`.
    pub fn frame_block(&self, b: usize) -> Mat<C64> {
        let d = self.algebra.dim(b);
        let mut out = Mat::zeros(d, d);
        for p in self.pieces.iter().filter(|p| p.block == b) {
            let vv = dense::outer_projection(p.basis.as_ref());
            for (r, &i) in p.coords.iter().enumerate() {
                for (s, &j) in p.coords.iter().enumerate() {
                    out[(i, j)] = vv[(r, s)];
                }
            }
        }
        out
    }

    /// The projection in original coordinates.
    pub fn materialize(&self, spectrum: &JointSpectrum) -> Result<MatOp> {
        if **spectrum.algebra() != *self.algebra {
            return Err(Error::AlgebraMismatch("projection and spectrum live in different algebras".into()));
        }
        let blocks = (0..self.algebra.num_blocks())
            .map(|b| spectrum.basis(b).conjugate(self.frame_block(b).as_ref()))
            .collect();
        Ok(MatOp::trusted_projection(self.algebra.clone(), blocks))
    }

    /// Singular values of `[P, D]` with their widths, `D` the frame diagonal
    /// with entries `values(block, coord)`.
    ///
    /// Each piece contributes the singular values of `X = V* D (1 − V V*)`,
    /// each twice, because `[P, D] = X' − X'*` with orthogonal ranges.
    pub fn commutator_singular_values(&self, values: impl Fn(usize, usize) -> f64) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let s = p.coords.len();
            if p.rank() == s {
                continue;
            }
            let dv: Vec<f64> = p.coords.iter().map(|&c| values(p.block, c)).collect();
            let vd = Mat::from_fn(p.rank(), s, |k, r| p.basis[(r, k)].conj() * dv[r]);
            let vdv = &vd * &p.basis;
            let x = &vd - &vdv * p.basis.adjoint();
            let w = self.algebra.weight(p.block);
            for sv in dense::singular_values(x.as_ref())? {
                out.push((sv, w));
                out.push((sv, w));
            }
        }
        Ok(out)
    }

    /// `μ([P, D])`.
    pub fn commutator_mu(&self, values: impl Fn(usize, usize) -> f64) -> Result<StepFunction> {
        StepFunction::rearrange(self.commutator_singular_values(values)?)
    }

    /// `‖[P, α(j)]‖_∞` computed in the frame.
    pub fn commutator_norm_inf(&self, spectrum: &JointSpectrum, j: usize) -> Result<f64> {
        Ok(self
            .commutator_singular_values(|b, c| spectrum.tuple_at(b, c).lambda[j])?
            .into_iter()
            .fold(0.0, |a, (s, _)| a.max(s)))
    }

    /// `‖[P, α(j)]‖_{E(𝓜)}` computed in the frame.
    pub fn commutator_norm(&self, spectrum: &JointSpectrum, j: usize, space: &SpaceSpec) -> Result<f64> {
        space_norm(&self.commutator_mu(|b, c| spectrum.tuple_at(b, c).lambda[j])?, space)
    }

    /// `max ‖(1 − Q) V‖` over the pieces `V` of `self`: zero iff `self ≤ other`.
    pub fn containment_defect(&self, other: &SpectralProjection) -> f64 {
        let mut worst = 0.0f64;
        for p in &self.pieces {
            let d = self.algebra.dim(p.block);
            let v = p.embedded(d);
            let qv = other.apply(p.block, v.as_ref());
            worst = worst.max(dense::max_abs_diff(v.as_ref(), qv.as_ref()));
        }
        worst
    }

    /// `max |P Q|` entrywise in the frame.
    pub fn overlap(&self, other: &SpectralProjection) -> f64 {
        let mut worst = 0.0f64;
        for p in &self.pieces {
            let d = self.algebra.dim(p.block);
            let v = p.embedded(d);
            let qv = other.apply(p.block, v.as_ref());
            worst = worst.max(dense::max_abs(qv.as_ref()));
        }
        worst
    }
}

/// Orthonormal basis of the range of a projection block.
///
/// Diagonal 0/1 blocks give coordinate vectors; otherwise columns are taken
/// in order of decreasing diagonal weight and orthonormalized (twice) until
/// the rank `round(tr Q)` is reached.
pub(crate) fn projection_range(q: MatRef<'_, C64>) -> Mat<C64> {
    let d = q.nrows();
    if dense::is_diagonal(q) {
        let cols: Vec<usize> = (0..d).filter(|&i| q[(i, i)].re > 0.5).collect();
        return Mat::from_fn(d, cols.len(), |i, k| if i == cols[k] { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    }
    let rank = (0..d).map(|i| q[(i, i)].re).sum::<f64>().round().max(0.0) as usize;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| q[(b, b)].re.total_cmp(&q[(a, a)].re).then(a.cmp(&b)));
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(rank);
    for &c in &order {
        if basis.len() == rank {
            break;
        }
        let mut v: Vec<C64> = (0..d).map(|i| q[(i, c)]).collect();
        for _ in 0..2 {
            for u in &basis {
                let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    Mat::from_fn(d, basis.len(), |i, k| basis[k][i])
}

/// Frame coordinates of an orthonormal basis of `q`, per block.
pub(crate) fn frame_basis(spectrum: &JointSpectrum, q: &MatOp) -> Result<Vec<Mat<C64>>> {
    if **spectrum.algebra() != **q.algebra() {
        return Err(Error::AlgebraMismatch("projection and spectrum live in different algebras".into()));
    }
    if !q.is_projection() {
        return Err(Error::InvalidOperator("q must be an orthogonal projection".into()));
    }
    Ok((0..q.algebra().num_blocks())
        .map(|b| {
            let v = projection_range(q.block(b));
            match spectrum.basis(b) {
                Basis::Identity(_) => v,
                basis => basis.apply_adjoint(v.as_ref()),
            }
        })
        .collect())
}

/// Orthonormal basis of the column space of `m`, singular values above `tol`.
pub(crate) fn range_basis(m: MatRef<'_, C64>, tol: f64) -> Result<Mat<C64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Mat::zeros(m.nrows(), 0));
    }
    if m.ncols() == 1 {
        let norm = (0..m.nrows()).map(|i| m[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
        if norm <= tol {
            return Ok(Mat::zeros(m.nrows(), 0));
        }
        return Ok(Mat::from_fn(m.nrows(), 1, |i, _| m[(i, 0)] / norm));
    }
    dense::column_space(m, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_range_recovers_rank() {
        let s = 0.5f64.sqrt();
        let v = Mat::from_fn(3, 1, |i, _| if i < 2 { C64::new(s, 0.0) } else { C64::new(0.0, 0.0) });
        let q = dense::outer_projection(v.as_ref());
        let r = projection_range(q.as_ref());
        assert_eq!(r.ncols(), 1);
        let back = dense::outer_projection(r.as_ref());
        assert!(dense::max_abs_diff(back.as_ref(), q.as_ref()) < 1e-14);
        let diag = Mat::from_fn(3, 3, |i, j| if i == j && i != 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        assert_eq!(projection_range(diag.as_ref()).ncols(), 2);
    }

    #[test]
    fn commutator_of_piece_matches_dense() {
        let alg = TracedAlgebra::single(3, 0.5).unwrap();
        let spec = JointSpectrum::from_diagonal(alg.clone(), vec![vec![vec![0.1], vec![0.4], vec![0.8]]]).unwrap();
        let v = Mat::from_fn(3, 1, |i, _| C64::new([0.6, 0.0, 0.8][i], 0.0));
        let p = SpectralProjection::new(alg.clone(), vec![Piece { block: 0, coords: vec![0, 1, 2], basis: v }]).unwrap();
        let dense_p = p.materialize(&spec).unwrap();
        let a = MatOp::from_real_diagonal(alg, &[vec![0.1, 0.4, 0.8]]).unwrap();
        let c = dense_p.commutator(&a).unwrap();
        let expect = c.singular_value_function().unwrap();
        let got = p.commutator_mu(|b, i| spec.tuple_at(b, i).lambda[0]).unwrap();
        assert!((expect.integral() - got.integral()).abs() < 1e-14);
        assert!((expect.sup() - got.sup()).abs() < 1e-14);
        assert!((p.commutator_norm_inf(&spec, 0).unwrap() - c.norm_inf().unwrap()).abs() < 1e-14);
    }

    #[test]
    fn rejects_overlapping_pieces() {
        let alg = TracedAlgebra::single(2, 1.0).unwrap();
        let e = Mat::from_fn(1, 1, |_, _| C64::new(1.0, 0.0));
        let p = |c| Piece { block: 0, coords: vec![c], basis: e.clone() };
        assert!(SpectralProjection::new(alg.clone(), vec![p(0), p(0)]).is_err());
        assert_eq!(SpectralProjection::new(alg, vec![p(0), p(1)]).unwrap().trace(), 2.0);
    }
}
