use faer::Mat;

use super::frame::{frame_basis, range_basis, Piece, SpectralProjection};
use crate::jointspec::{Basis, JointSpectrum};
use crate::ncalg::MatOp;
use crate::{Result, C64};

/// Tolerance for grouping eigen-tuples into joint eigenspaces.
pub const EIGENSPACE_TOL: f64 = 1e-10;
const COVERED_TOL: f64 = 1e-6;

/// `e_q = Σ_k 𝔩(E_k q)` over the joint eigenprojections `E_k`.
pub fn generating_hull(spectrum: &JointSpectrum, q: &MatOp) -> Result<SpectralProjection> {
    let w = frame_basis(spectrum, q)?;
    let mut pieces = Vec::new();
    for (b, spaces) in spectrum.eigenspaces(EIGENSPACE_TOL).into_iter().enumerate() {
        let wb = &w[b];
        if wb.ncols() == 0 {
            continue;
        }
        let tol = f64::EPSILON * spectrum.algebra().dim(b) as f64;
        for coords in spaces {
            let rows = Mat::from_fn(coords.len(), wb.ncols(), |r, k| wb[(coords[r], k)]);
            let basis = range_basis(rows.as_ref(), tol)?;
            if basis.ncols() > 0 {
                pieces.push(Piece { block: b, coords, basis });
            }
        }
    }
    SpectralProjection::new(spectrum.algebra().clone(), pieces)
}

/// A rank-one generating projection `q = v v*` and its hull `e_q`.
#[derive(Clone, Debug)]
pub struct GeneratingPair {
    pub block: usize,
    /// Unit vector of `q` in frame coordinates.
    pub vector: Vec<C64>,
    pub hull: SpectralProjection,
}

impl GeneratingPair {
    /// `q` as a frame projection.
    pub fn q_frame(&self, spectrum: &JointSpectrum) -> Result<SpectralProjection> {
        let d = self.vector.len();
        let basis = Mat::from_fn(d, 1, |i, _| self.vector[i]);
        SpectralProjection::new(spectrum.algebra().clone(), vec![Piece { block: self.block, coords: (0..d).collect(), basis }])
    }

    /// `q` in original coordinates.
    pub fn q_op(&self, spectrum: &JointSpectrum) -> Result<MatOp> {
        self.q_frame(spectrum)?.materialize(spectrum)
    }

    pub fn hull_op(&self, spectrum: &JointSpectrum) -> Result<MatOp> {
        self.hull.materialize(spectrum)
    }
}

/// Greedy decomposition `1 = Σ_k e_{q_k}` into pairwise orthogonal hulls.
///
/// Standard basis vectors are visited in order; the part of each one not yet
/// covered (if its norm exceeds `1e-6`) becomes the next `q_k`. The hull of a
/// rank-one `q` has one direction in every joint eigenspace it meets.
pub fn generating_decomposition(spectrum: &JointSpectrum) -> Result<Vec<GeneratingPair>> {
    let alg = spectrum.algebra().clone();
    let mut out = Vec::new();
    for (b, spaces) in spectrum.eigenspaces(EIGENSPACE_TOL).into_iter().enumerate() {
        let d = alg.dim(b);
        let mut covered: Vec<Vec<Vec<C64>>> = vec![Vec::new(); spaces.len()];
        let mut filled = 0;
        for i in 0..d {
            if filled == d {
                break;
            }
            let w: Vec<C64> = match spectrum.basis(b) {
                Basis::Identity(_) => (0..d).map(|c| if c == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect(),
                Basis::Dense(u) => (0..d).map(|c| u[(i, c)].conj()).collect(),
            };
            let mut parts: Vec<Vec<C64>> = Vec::with_capacity(spaces.len());
            let mut total = 0.0;
            for (s, coords) in spaces.iter().enumerate() {
                let mut v: Vec<C64> = coords.iter().map(|&c| w[c]).collect();
                for _ in 0..2 {
                    for u in &covered[s] {
                        let dot: C64 = u.iter().zip(&v).map(|(a, x)| a.conj() * x).sum();
                        v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
                    }
                }
                total += v.iter().map(|x| x.norm_sqr()).sum::<f64>();
                parts.push(v);
            }
            let total = total.sqrt();
            if total <= COVERED_TOL {
                continue;
            }
            let mut vector = vec![C64::new(0.0, 0.0); d];
            let mut pieces = Vec::new();
            let mut kept = 0.0;
            for (s, (coords, v)) in spaces.iter().zip(parts).enumerate() {
                let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                if norm <= 1e-10 * total {
                    continue;
                }
                kept += norm * norm;
                for (&c, x) in coords.iter().zip(&v) {
                    vector[c] = *x;
                }
                let unit: Vec<C64> = v.iter().map(|x| x / norm).collect();
                let basis = Mat::from_fn(coords.len(), 1, |r, _| unit[r]);
                covered[s].push(unit);
                filled += 1;
                pieces.push(Piece { block: b, coords: coords.clone(), basis });
            }
            let kept = kept.sqrt();
            vector.iter_mut().for_each(|x| *x /= kept);
            out.push(GeneratingPair { block: b, vector, hull: SpectralProjection::new(alg.clone(), pieces)? });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalg::TracedAlgebra;

    fn spectrum(vals: &[f64]) -> JointSpectrum {
        let alg = TracedAlgebra::single(vals.len(), 1.0).unwrap();
        JointSpectrum::from_diagonal(alg, vec![vals.iter().map(|&v| vec![v]).collect()]).unwrap()
    }

    #[test]
    fn identity_hull() {
        let j = spectrum(&[0.1, 0.2, 0.2]);
        let h = generating_hull(&j, &MatOp::identity(j.algebra().clone())).unwrap();
        assert_eq!(h.rank(), 3);
    }

    #[test]
    fn cyclic_vector_hull_is_everything() {
        let d = 5;
        let j = spectrum(&[0.0, 0.1, 0.2, 0.3, 0.4]);
        let q = MatOp::projection(j.algebra().clone(), vec![Mat::from_fn(d, d, |_, _| C64::new(0.2, 0.0))]).unwrap();
        let h = generating_hull(&j, &q).unwrap();
        assert_eq!(h.rank(), d);
        let dec = generating_decomposition(&j).unwrap();
        assert_eq!(dec.len(), 5);
    }

    #[test]
    fn scalar_decomposes_into_rank_ones() {
        let j = spectrum(&[0.3; 4]);
        let dec = generating_decomposition(&j).unwrap();
        assert_eq!(dec.len(), 4);
        assert!(dec.iter().all(|p| p.hull.rank() == 1));
    }

    #[test]
    fn hull_inside_eigenspace() {
        let j = spectrum(&[0.3, 0.3, 0.7]);
        let s = 0.5f64.sqrt();
        let q = MatOp::projection(
            j.algebra().clone(),
            vec![Mat::from_fn(3, 3, |i, k| if i < 2 && k < 2 { C64::new(0.5, 0.0) } else { C64::new(0.0, 0.0) })],
        )
        .unwrap();
        let h = generating_hull(&j, &q).unwrap();
        assert_eq!(h.rank(), 1);
        assert!((h.pieces()[0].basis[(0, 0)].norm() - s).abs() < 1e-15);
    }
}
