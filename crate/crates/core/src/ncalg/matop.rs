use std::fmt;
use std::sync::{Arc, OnceLock};

use faer::{Mat, MatRef};

use super::algebra::{same_algebra, TracedAlgebra};
use super::dense;
use crate::symfun::{space_norm, SpaceSpec, StepFunction};
use crate::{Error, Result, C64};

const HERMITIAN_TOL: f64 = 1e-12;
const PROJECTION_TOL: f64 = 1e-10;

/// An element of a [`TracedAlgebra`]: one dense complex matrix per block.
///
/// Hermiticity is decided once at construction. An operator accepted as
/// Hermitian is stored exactly symmetrized, so every later spectral routine
/// sees a self-adjoint matrix.
#[derive(Clone)]
pub struct MatOp {
    algebra: Arc<TracedAlgebra>,
    blocks: Vec<Mat<C64>>,
    hermitian: bool,
    projection: OnceLock<bool>,
}

impl fmt::Debug for MatOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatOp")
            .field("blocks", &self.algebra.blocks())
            .field("hermitian", &self.hermitian)
            .field("projection", &self.projection.get())
            .finish()
    }
}

/// Cheap lower bound for `‖m‖_∞`.
fn norm_lower_bound(m: MatRef<'_, C64>) -> f64 {
    let fro = m.norm_l2();
    let r = m.nrows().min(m.ncols()).max(1) as f64;
    dense::max_abs(m).max(fro / r.sqrt())
}

impl MatOp {
    pub fn new(algebra: Arc<TracedAlgebra>, blocks: Vec<Mat<C64>>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::AlgebraMismatch(format!(
                "{} matrices for {} blocks",
                blocks.len(),
                algebra.num_blocks()
            )));
        }
        for (b, m) in blocks.iter().enumerate() {
            let d = algebra.dim(b);
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::AlgebraMismatch(format!(
                    "block {b} is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !m.as_ref().is_all_finite() {
                return Err(Error::InvalidOperator(format!("block {b} has non-finite entries")));
            }
        }
        let hermitian = blocks.iter().all(|m| {
            let asym = dense::hermitian_defect(m.as_ref());
            asym == 0.0 || asym <= HERMITIAN_TOL * norm_lower_bound(m.as_ref())
        });
        let blocks = if hermitian {
            blocks.iter().map(|m| dense::hermitian_part(m.as_ref())).collect()
        } else {
            blocks
        };
        Ok(Self { algebra, blocks, hermitian, projection: OnceLock::new() })
    }

    /// Like [`MatOp::new`] but fails unless the input is Hermitian.
    pub fn hermitian(algebra: Arc<TracedAlgebra>, blocks: Vec<Mat<C64>>) -> Result<Self> {
        let x = Self::new(algebra, blocks)?;
        if !x.hermitian {
            return Err(Error::InvalidOperator("operator is not hermitian".into()));
        }
        Ok(x)
    }

    /// Like [`MatOp::new`] but fails unless the input is an orthogonal projection.
    pub fn projection(algebra: Arc<TracedAlgebra>, blocks: Vec<Mat<C64>>) -> Result<Self> {
        let x = Self::new(algebra, blocks)?;
        if !x.is_projection() {
            return Err(Error::InvalidOperator("operator is not a projection".into()));
        }
        Ok(x)
    }

    /// Hermitian blocks already known to be a projection (e.g. `V V*` with
    /// orthonormal `V`); symmetrized but not re-verified.
    pub(crate) fn trusted_projection(algebra: Arc<TracedAlgebra>, blocks: Vec<Mat<C64>>) -> Self {
        let blocks = blocks.iter().map(|m| dense::hermitian_part(m.as_ref())).collect();
        let projection = OnceLock::new();
        let _ = projection.set(true);
        Self { algebra, blocks, hermitian: true, projection }
    }

    /// Rank-one projection onto `span(v)` inside block `b`, zero elsewhere.
    pub fn vector_projection(algebra: Arc<TracedAlgebra>, b: usize, v: &[C64]) -> Result<Self> {
        if b >= algebra.num_blocks() || v.len() != algebra.dim(b) {
            return Err(Error::AlgebraMismatch(format!("vector of length {} for block {b}", v.len())));
        }
        let norm_sq: f64 = v.iter().map(C64::norm_sqr).sum();
        if !(norm_sq.is_finite() && norm_sq > 0.0) {
            return Err(Error::InvalidOperator("projection onto a zero vector".into()));
        }
        let blocks = algebra
            .blocks()
            .iter()
            .enumerate()
            .map(|(c, blk)| {
                if c == b {
                    Mat::from_fn(blk.dim, blk.dim, |i, j| v[i] * v[j].conj() / norm_sq)
                } else {
                    Mat::zeros(blk.dim, blk.dim)
                }
            })
            .collect();
        Ok(Self::trusted_projection(algebra, blocks))
    }

    pub fn zero(algebra: Arc<TracedAlgebra>) -> Self {
        let blocks = algebra.blocks().iter().map(|b| Mat::zeros(b.dim, b.dim)).collect();
        Self::trusted_projection(algebra, blocks)
    }

    pub fn identity(algebra: Arc<TracedAlgebra>) -> Self {
        let blocks = algebra.blocks().iter().map(|b| Mat::identity(b.dim, b.dim)).collect();
        Self::trusted_projection(algebra, blocks)
    }

    /// Diagonal operator with the given complex diagonal per block.
    pub fn from_diagonal(algebra: Arc<TracedAlgebra>, diag: &[Vec<C64>]) -> Result<Self> {
        if diag.len() != algebra.num_blocks() {
            return Err(Error::AlgebraMismatch(format!("{} diagonals for {} blocks", diag.len(), algebra.num_blocks())));
        }
        let blocks = diag
            .iter()
            .map(|d| Mat::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { C64::new(0.0, 0.0) }))
            .collect();
        Self::new(algebra, blocks)
    }

    /// Real diagonal operator, convenient for multiplication operators.
    pub fn from_real_diagonal(algebra: Arc<TracedAlgebra>, diag: &[Vec<f64>]) -> Result<Self> {
        let diag: Vec<Vec<C64>> = diag.iter().map(|d| d.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_diagonal(algebra, &diag)
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        &self.algebra
    }

    pub fn block(&self, b: usize) -> MatRef<'_, C64> {
        self.blocks[b].as_ref()
    }

    pub fn blocks(&self) -> &[Mat<C64>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Mat<C64>> {
        self.blocks
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Hermitian with `max |x² − x| ≤ 1e-10`; decided on first call.
    pub fn is_projection(&self) -> bool {
        *self.projection.get_or_init(|| {
            self.hermitian
                && self.blocks.iter().all(|m| {
                    if dense::is_diagonal(m.as_ref()) {
                        return (0..m.nrows()).all(|i| {
                            let v = m[(i, i)];
                            (v * v - v).norm() <= PROJECTION_TOL
                        });
                    }
                    let sq = m * m;
                    dense::max_abs_diff(sq.as_ref(), m.as_ref()) <= PROJECTION_TOL
                })
        })
    }

    pub fn is_diagonal(&self) -> bool {
        self.blocks.iter().all(|m| dense::is_diagonal(m.as_ref()))
    }

    fn zip(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        same_algebra(&self.algebra, &other.algebra)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| Mat::from_fn(a.nrows(), a.ncols(), |i, j| f(a[(i, j)], b[(i, j)])))
            .collect();
        Self::new(self.algebra.clone(), blocks)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_algebra(&self.algebra, &other.algebra)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect();
        Self::new(self.algebra.clone(), blocks)
    }

    pub fn scale(&self, c: C64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|a| Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * c))
            .collect();
        Self::new(self.algebra.clone(), blocks).expect("scaling preserves block shapes")
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// `x + c·1`.
    pub fn shift(&self, c: f64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|a| Mat::from_fn(a.nrows(), a.ncols(), |i, j| if i == j { a[(i, j)] + c } else { a[(i, j)] }))
            .collect();
        Self::new(self.algebra.clone(), blocks).expect("shifting preserves block shapes")
    }

    pub fn adjoint(&self) -> Self {
        if self.hermitian {
            return self.clone();
        }
        let blocks = self.blocks.iter().map(|a| a.adjoint().to_owned()).collect();
        Self::new(self.algebra.clone(), blocks).expect("adjoint preserves block shapes")
    }

    /// `[x, y] = xy − yx`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        same_algebra(&self.algebra, &other.algebra)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| {
                let ab = a * b;
                let ba = b * a;
                &ab - &ba
            })
            .collect();
        Self::new(self.algebra.clone(), blocks)
    }

    /// `τ(x) = Σ_b weight_b · tr(x_b)`.
    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .enumerate()
            .map(|(b, m)| {
                let tr: C64 = (0..m.nrows()).map(|i| m[(i, i)]).sum();
                tr * self.algebra.weight(b)
            })
            .sum()
    }

    /// Singular values of each block, nonincreasing.
    pub fn block_singular_values(&self) -> Result<Vec<Vec<f64>>> {
        self.blocks
            .iter()
            .map(|m| {
                let mut s: Vec<f64> = if dense::is_diagonal(m.as_ref()) {
                    (0..m.nrows()).map(|i| m[(i, i)].norm()).collect()
                } else if self.hermitian {
                    dense::herm_eigvals(m.as_ref())?.into_iter().map(f64::abs).collect()
                } else {
                    dense::singular_values(m.as_ref())?
                };
                s.sort_by(|a, b| b.total_cmp(a));
                Ok(s)
            })
            .collect()
    }

    /// `‖x‖_∞`, the largest singular value.
    pub fn norm_inf(&self) -> Result<f64> {
        Ok(self
            .block_singular_values()?
            .iter()
            .filter_map(|s| s.first().copied())
            .fold(0.0, f64::max))
    }

    /// Generalized singular value function `μ(x)` with respect to τ.
    pub fn singular_value_function(&self) -> Result<StepFunction> {
        let sv = self.block_singular_values()?;
        StepFunction::rearrange(
            sv.iter()
                .enumerate()
                .flat_map(|(b, s)| s.iter().map(move |&v| (v, self.algebra.weight(b)))),
        )
    }

    /// `‖x‖_{E(𝓜)} = ‖μ(x)‖_E`.
    pub fn symmetric_norm(&self, space: &SpaceSpec) -> Result<f64> {
        space_norm(&self.singular_value_function()?, space)
    }

    /// Default rank tolerance: machine epsilon · max block dimension · `‖x‖_∞`.
    pub fn default_rank_tol(&self) -> Result<f64> {
        let maxdim = self.algebra.blocks().iter().map(|b| b.dim).max().unwrap_or(1);
        Ok(f64::EPSILON * maxdim as f64 * self.norm_inf()?)
    }

    /// Left support `𝔩(x)`: projection onto the column space, singular values
    /// above `rank_tol` (default [`MatOp::default_rank_tol`]).
    pub fn range_projection(&self, rank_tol: Option<f64>) -> Result<Self> {
        let tol = match rank_tol {
            Some(t) if t >= 0.0 => t,
            Some(t) => return Err(Error::InvalidOperator(format!("rank tolerance {t} is negative"))),
            None => self.default_rank_tol()?,
        };
        let blocks = self
            .blocks
            .iter()
            .map(|m| {
                if dense::is_diagonal(m.as_ref()) {
                    let n = m.nrows();
                    return Ok(Mat::from_fn(n, n, |i, j| {
                        if i == j && m[(i, i)].norm() > tol {
                            C64::new(1.0, 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }));
                }
                let v = dense::column_space(m.as_ref(), tol)?;
                Ok(dense::outer_projection(v.as_ref()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::trusted_projection(self.algebra.clone(), blocks))
    }

    pub fn left_support(&self) -> Result<Self> {
        self.range_projection(None)
    }

    /// Right support `𝔯(x) = 𝔩(x*)`.
    pub fn right_support(&self) -> Result<Self> {
        self.adjoint().range_projection(None)
    }

    /// `|x| = (x*x)^{1/2}`.
    pub fn abs(&self) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|m| {
                let g = m.adjoint() * m;
                let (vals, u) = dense::herm_eig(dense::hermitian_part(g.as_ref()).as_ref())?;
                let n = vals.len();
                let scaled = Mat::from_fn(n, n, |i, j| u[(i, j)] * vals[j].max(0.0).sqrt());
                Ok(&scaled * u.adjoint())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.algebra.clone(), blocks)
    }

    /// Entrywise `max |x − y|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        same_algebra(&self.algebra, &other.algebra)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| dense::max_abs_diff(a.as_ref(), b.as_ref()))
            .fold(0.0, f64::max))
    }
}
