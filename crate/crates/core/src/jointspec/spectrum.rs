use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::boxes::{atom_of, check_unit_cube, DyadicAtom, SpectralBox, MAX_LEVEL};
use crate::ncalg::{dense, HermTuple, MatOp, TracedAlgebra};
use crate::{Error, Result, C64};

pub const DEFAULT_DTOL: f64 = 1e-8;
const CLUSTER_GAP: f64 = 1e-7;
const ATTEMPTS: u64 = 3;
const SEED: u64 = 0x6a6f_696e_7473_7063;

/// Eigenbasis of one block: either the standard basis or a dense unitary.
#[derive(Clone, Debug)]
pub enum Basis {
    Identity(usize),
    Dense(Mat<C64>),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::Identity(d) => *d,
            Basis::Dense(u) => u.nrows(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Basis::Identity(_))
    }

    pub fn to_dense(&self) -> Mat<C64> {
        match self {
            Basis::Identity(d) => Mat::identity(*d, *d),
            Basis::Dense(u) => u.clone(),
        }
    }

    /// `U x`, mapping frame coordinates to original coordinates.
    pub fn apply(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        match self {
            Basis::Identity(_) => x.to_owned(),
            Basis::Dense(u) => u * x,
        }
    }

    /// `U* x`, mapping original coordinates to frame coordinates.
    pub fn apply_adjoint(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        match self {
            Basis::Identity(_) => x.to_owned(),
            Basis::Dense(u) => u.adjoint() * x,
        }
    }

    /// `U x U*`.
    pub fn conjugate(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        match self {
            Basis::Identity(_) => x.to_owned(),
            Basis::Dense(u) => {
                let ux = u * x;
                &ux * u.adjoint()
            }
        }
    }

    /// `U* x U`.
    pub fn conjugate_adjoint(&self, x: MatRef<'_, C64>) -> Mat<C64> {
        match self {
            Basis::Identity(_) => x.to_owned(),
            Basis::Dense(u) => {
                let ux = u.adjoint() * x;
                &ux * u
            }
        }
    }
}

/// One joint eigenvector: its eigenvalues, block and column in that block's basis.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenTuple {
    pub lambda: Vec<f64>,
    pub block: usize,
    pub col: usize,
}

/// Joint spectral data of a commuting Hermitian tuple.
///
/// Operators that are diagonal in the joint eigenbasis (the *frame*) are
/// handled through their eigen-tuples alone; only materialization goes
/// back through the bases.
#[derive(Clone, Debug)]
pub struct JointSpectrum {
    algebra: Arc<TracedAlgebra>,
    n: usize,
    bases: Vec<Basis>,
    tuples: Vec<EigenTuple>,
    /// Index into `tuples` of each (block, col).
    lookup: Vec<Vec<usize>>,
    residual: f64,
}

fn cluster(vals: &[f64]) -> Vec<std::ops::Range<usize>> {
    if vals.is_empty() {
        return Vec::new();
    }
    let spread = vals[vals.len() - 1] - vals[0];
    let gap = CLUSTER_GAP * spread;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..vals.len() {
        if vals[i] - vals[i - 1] > gap {
            out.push(start..i);
            start = i;
        }
    }
    out.push(start..vals.len());
    out
}

fn refine(mats: &[MatRef<'_, C64>], v: Mat<C64>, axis: usize) -> Result<Mat<C64>> {
    if axis == mats.len() || v.ncols() <= 1 {
        return Ok(v);
    }
    let ca = v.adjoint() * mats[axis];
    let c = &ca * &v;
    let (vals, w) = dense::herm_eig(dense::hermitian_part(c.as_ref()).as_ref())?;
    let vw = &v * &w;
    let mut cols = Vec::new();
    for range in cluster(&vals) {
        let sub = vw.subcols(range.start, range.len()).to_owned();
        cols.push(refine(mats, sub, axis + 1)?);
    }
    let d = v.nrows();
    let total: usize = cols.iter().map(|c| c.ncols()).sum();
    let mut out = Mat::zeros(d, total);
    let mut at = 0;
    for c in cols {
        out.subcols_mut(at, c.ncols()).copy_from(&c);
        at += c.ncols();
    }
    Ok(out)
}

struct BlockFrame {
    basis: Basis,
    lambdas: Vec<Vec<f64>>,
    residual: f64,
}

fn offdiag_mass(m: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn diagonalize_block(mats: &[MatRef<'_, C64>], attempt: u64) -> Result<BlockFrame> {
    let d = mats[0].nrows();
    if mats.iter().all(|m| dense::is_diagonal(*m)) {
        let lambdas = (0..d).map(|i| mats.iter().map(|m| m[(i, i)].re).collect()).collect();
        return Ok(BlockFrame { basis: Basis::Identity(d), lambdas, residual: 0.0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED.wrapping_add(attempt));
    let mut c: Vec<f64> = (0..mats.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    c.iter_mut().for_each(|x| *x /= norm);
    let combo = Mat::from_fn(d, d, |i, j| mats.iter().zip(&c).map(|(m, &w)| m[(i, j)] * w).sum::<C64>());
    let (vals, u) = dense::herm_eig(dense::hermitian_part(combo.as_ref()).as_ref())?;
    let mut cols = Vec::new();
    for range in cluster(&vals) {
        let sub = u.subcols(range.start, range.len()).to_owned();
        cols.push(refine(mats, sub, 0)?);
    }
    let mut basis = Mat::zeros(d, d);
    let mut at = 0;
    for c in cols {
        basis.subcols_mut(at, c.ncols()).copy_from(&c);
        at += c.ncols();
    }
    let mut lambdas = vec![vec![0.0; mats.len()]; d];
    let mut residual = 0.0f64;
    for (j, m) in mats.iter().enumerate() {
        let um = basis.adjoint() * *m;
        let f = &um * &basis;
        for (i, l) in lambdas.iter_mut().enumerate() {
            l[j] = f[(i, i)].re;
        }
        residual = residual.max(offdiag_mass(f.as_ref()));
    }
    Ok(BlockFrame { basis: Basis::Dense(basis), lambdas, residual })
}

/// Simultaneously diagonalizes a commuting tuple.
///
/// A seeded random combination `Σ c_j α(j)` is diagonalized, its eigenvalues
/// clustered, and each cluster refined by every `α(j)` in turn. The largest
/// off-diagonal Frobenius mass of `U* α(j) U` over blocks and axes is the
/// residual; up to three seeds are tried before giving up.
pub fn joint_diagonalize(alpha: &HermTuple, dtol: f64) -> Result<JointSpectrum> {
    let alg = alpha.algebra().clone();
    let allowed = dtol * (1.0 + alpha.max_norm());
    let mut frames = Vec::with_capacity(alg.num_blocks());
    for b in 0..alg.num_blocks() {
        let mats: Vec<MatRef<'_, C64>> = alpha.entries().iter().map(|a| a.block(b)).collect();
        let mut worst = f64::INFINITY;
        let mut found = None;
        for attempt in 0..ATTEMPTS {
            let f = diagonalize_block(&mats, attempt)?;
            if f.residual <= allowed {
                found = Some(f);
                break;
            }
            worst = worst.min(f.residual);
        }
        match found {
            Some(f) => frames.push(f),
            None => return Err(Error::NonCommuting { residual: worst, allowed }),
        }
    }
    let mut tuples = Vec::new();
    let mut lookup = Vec::new();
    let mut bases = Vec::new();
    let mut residual = 0.0f64;
    for (b, f) in frames.into_iter().enumerate() {
        let mut idx = Vec::with_capacity(f.lambdas.len());
        for (col, lambda) in f.lambdas.into_iter().enumerate() {
            idx.push(tuples.len());
            tuples.push(EigenTuple { lambda, block: b, col });
        }
        lookup.push(idx);
        bases.push(f.basis);
        residual = residual.max(f.residual);
    }
    Ok(JointSpectrum { algebra: alg, n: alpha.len(), bases, tuples, lookup, residual })
}

impl JointSpectrum {
    /// A spectrum given directly in the standard basis: `lambdas[b][i]` is the
    /// eigen-tuple of coordinate `i` of block `b`.
    pub fn from_diagonal(algebra: Arc<TracedAlgebra>, lambdas: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if lambdas.len() != algebra.num_blocks() {
            return Err(Error::AlgebraMismatch("eigenvalue lists do not match blocks".into()));
        }
        let n = lambdas.iter().flatten().map(Vec::len).next().unwrap_or(0);
        let mut tuples = Vec::new();
        let mut lookup = Vec::new();
        let mut bases = Vec::new();
        for (b, ls) in lambdas.into_iter().enumerate() {
            if ls.len() != algebra.dim(b) {
                return Err(Error::AlgebraMismatch(format!("block {b}: {} tuples for dim {}", ls.len(), algebra.dim(b))));
            }
            let mut idx = Vec::new();
            for (col, lambda) in ls.into_iter().enumerate() {
                if lambda.len() != n {
                    return Err(Error::InvalidOperator("eigen-tuples differ in length".into()));
                }
                idx.push(tuples.len());
                tuples.push(EigenTuple { lambda, block: b, col });
            }
            lookup.push(idx);
            bases.push(Basis::Identity(algebra.dim(b)));
        }
        Ok(Self { algebra, n, bases, tuples, lookup, residual: 0.0 })
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        &self.algebra
    }

    /// Number of operators in the tuple.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self, b: usize) -> &Basis {
        &self.bases[b]
    }

    pub fn tuples(&self) -> &[EigenTuple] {
        &self.tuples
    }

    pub fn tuple_at(&self, block: usize, col: usize) -> &EigenTuple {
        &self.tuples[self.lookup[block][col]]
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Tuples per block, in column order.
    pub fn block_lambdas(&self, b: usize) -> impl Iterator<Item = &[f64]> {
        self.lookup[b].iter().map(move |&i| self.tuples[i].lambda.as_slice())
    }

    /// Operator that is diagonal in the frame with the given values per tuple.
    pub fn frame_diagonal(&self, values: impl Fn(&EigenTuple) -> C64) -> Result<MatOp> {
        let blocks = (0..self.algebra.num_blocks())
            .map(|b| {
                let d = self.algebra.dim(b);
                let diag = Mat::from_fn(d, d, |i, j| {
                    if i == j {
                        values(self.tuple_at(b, i))
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                self.bases[b].conjugate(diag.as_ref())
            })
            .collect();
        MatOp::new(self.algebra.clone(), blocks)
    }

    /// Sum of the rank-one eigenprojectors of the selected tuples.
    pub fn projection_where(&self, select: impl Fn(&EigenTuple) -> bool) -> MatOp {
        let blocks = (0..self.algebra.num_blocks())
            .map(|b| {
                let d = self.algebra.dim(b);
                let cols: Vec<usize> = (0..d).filter(|&i| select(self.tuple_at(b, i))).collect();
                match &self.bases[b] {
                    Basis::Identity(_) => Mat::from_fn(d, d, |i, j| {
                        if i == j && cols.binary_search(&i).is_ok() {
                            C64::new(1.0, 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }),
                    Basis::Dense(u) => {
                        let v = Mat::from_fn(d, cols.len(), |i, k| u[(i, cols[k])]);
                        dense::outer_projection(v.as_ref())
                    }
                }
            })
            .collect();
        MatOp::trusted_projection(self.algebra.clone(), blocks)
    }

    /// `e^α(B)`.
    pub fn spectral_projection(&self, bx: &SpectralBox) -> MatOp {
        self.projection_where(|t| bx.contains(&t.lambda))
    }

    /// Occupied atoms of level `m` with the tuple indices inside each.
    pub fn atom_partition(&self, m: u32) -> Result<BTreeMap<DyadicAtom, Vec<usize>>> {
        let mut out: BTreeMap<DyadicAtom, Vec<usize>> = BTreeMap::new();
        for (i, t) in self.tuples.iter().enumerate() {
            check_unit_cube(&t.lambda)?;
            out.entry(atom_of(&t.lambda, m)).or_default().push(i);
        }
        Ok(out)
    }

    /// `e^α(A)` for an atom.
    pub fn atom_projection(&self, atom: &DyadicAtom) -> MatOp {
        self.projection_where(|t| atom_of(&t.lambda, atom.level) == *atom)
    }

    /// Clusters the tuples of each block into joint eigenspaces; returns
    /// lists of columns per block.
    pub fn eigenspaces(&self, tol: f64) -> Vec<Vec<Vec<usize>>> {
        (0..self.algebra.num_blocks())
            .map(|b| {
                let d = self.algebra.dim(b);
                let mut cols: Vec<usize> = (0..d).collect();
                cols.sort_by(|&x, &y| {
                    let (lx, ly) = (&self.tuple_at(b, x).lambda, &self.tuple_at(b, y).lambda);
                    lx.iter().zip(ly).map(|(a, c)| a.total_cmp(c)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
                });
                let scale = 1.0 + self.block_lambdas(b).flatten().fold(0.0f64, |a, x| a.max(x.abs()));
                let close = |x: usize, y: usize| {
                    let (lx, ly) = (&self.tuple_at(b, x).lambda, &self.tuple_at(b, y).lambda);
                    lx.iter().zip(ly).all(|(a, c)| (a - c).abs() <= tol * scale)
                };
                let mut groups: Vec<Vec<usize>> = Vec::new();
                for &c in &cols {
                    match groups.iter_mut().find(|g| close(g[0], c)) {
                        Some(g) => g.push(c),
                        None => groups.push(vec![c]),
                    }
                }
                for g in &mut groups {
                    g.sort_unstable();
                }
                groups.sort();
                groups
            })
            .collect()
    }

    /// Smallest level `m ≤ MAX_LEVEL` at which no atom meets two different
    /// joint eigenspaces of the same block.
    pub fn isolation_level(&self, tol: f64) -> Result<u32> {
        let spaces = self.eigenspaces(tol);
        for m in 0..=MAX_LEVEL {
            let mut ok = true;
            'blocks: for (b, groups) in spaces.iter().enumerate() {
                let mut seen: BTreeMap<DyadicAtom, usize> = BTreeMap::new();
                for (g, cols) in groups.iter().enumerate() {
                    for &c in cols {
                        let t = self.tuple_at(b, c);
                        check_unit_cube(&t.lambda)?;
                        if let Some(&other) = seen.get(&atom_of(&t.lambda, m)) {
                            if other != g {
                                ok = false;
                                break 'blocks;
                            }
                        } else {
                            seen.insert(atom_of(&t.lambda, m), g);
                        }
                    }
                }
            }
            if ok {
                return Ok(m);
            }
        }
        Ok(MAX_LEVEL)
    }

    /// Eigen-tuples as CSV (`block,col,lambda_1,...`), for debugging dumps.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("block,col");
        for j in 0..self.n {
            let _ = write!(s, ",lambda_{}", j + 1);
        }
        s.push('\n');
        for t in &self.tuples {
            let _ = write!(s, "{},{}", t.block, t.col);
            for v in &t.lambda {
                let _ = write!(s, ",{v:e}");
            }
            s.push('\n');
        }
        s
    }
}
