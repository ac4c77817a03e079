use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::jointspec::JointSpectrum;
use crate::ncalg::{dense, HermTuple, MatOp};
use crate::symfun::SpaceSpec;
use crate::{Result, C64};

/// One projection of a diagonal family and the point `δ` takes on it.
///
/// The projection lives in the frame of one block: `basis` has orthonormal
/// columns indexed by `coords`, or is absent when the projection is spanned
/// by the coordinate vectors themselves.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub block: usize,
    pub coords: Vec<usize>,
    pub basis: Option<Mat<C64>>,
    pub value: Vec<f64>,
}

impl FamilyMember {
    pub fn rank(&self) -> usize {
        self.basis.as_ref().map_or(self.coords.len(), |b| b.ncols())
    }

    fn add_to(&self, out: &mut Mat<C64>, scale: f64) {
        match &self.basis {
            None => {
                for &c in &self.coords {
                    out[(c, c)] += C64::new(scale, 0.0);
                }
            }
            Some(v) => {
                let vv = dense::outer_projection(v.as_ref());
                for (r, &i) in self.coords.iter().enumerate() {
                    for (s, &j) in self.coords.iter().enumerate() {
                        out[(i, j)] += vv[(r, s)] * scale;
                    }
                }
            }
        }
    }
}

/// A diagonal tuple `δ = Σ_i value_i P_i` exhibited through its projection
/// family, with the residuals `‖α(j) − δ(j)‖` it achieves.
#[derive(Clone, Debug)]
pub struct DiagonalizationReport {
    pub spectrum: Arc<JointSpectrum>,
    pub family: Vec<FamilyMember>,
    pub space: SpaceSpec,
    /// `‖α(j) − δ(j)‖_{(E∩L_∞)(𝓜)}` per axis.
    pub residuals: Vec<f64>,
    /// `‖α(j) − δ(j)‖_∞` per axis.
    pub residuals_inf: Vec<f64>,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalizationSummary {
    pub space: String,
    pub residuals: Vec<f64>,
    pub residuals_inf: Vec<f64>,
    pub bound: f64,
    pub family_size: usize,
    pub family_defect: f64,
    pub joint_residual: f64,
}

impl DiagonalizationReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Frame matrix of `Σ_i w(value_i) P_i` on block `b`.
    pub fn frame_block(&self, b: usize, w: impl Fn(&[f64]) -> f64) -> Mat<C64> {
        let d = self.spectrum.algebra().dim(b);
        let mut out = Mat::zeros(d, d);
        for f in self.family.iter().filter(|f| f.block == b) {
            f.add_to(&mut out, w(&f.value));
        }
        out
    }

    /// `max |Σ_i P_i − 1|`: the family is an orthogonal resolution of the
    /// identity iff this vanishes (ranks add up to the dimension).
    pub fn family_defect(&self) -> f64 {
        let alg = self.spectrum.algebra();
        (0..alg.num_blocks())
            .map(|b| {
                let s = self.frame_block(b, |_| 1.0);
                let id = Mat::<C64>::identity(s.nrows(), s.ncols());
                let rank: usize = self.family.iter().filter(|f| f.block == b).map(FamilyMember::rank).sum();
                let excess = (rank as f64 - alg.dim(b) as f64).abs();
                dense::max_abs_diff(s.as_ref(), id.as_ref()).max(excess)
            })
            .fold(0.0, f64::max)
    }

    /// `δ` in original coordinates.
    pub fn delta(&self) -> Result<HermTuple> {
        let alg = self.spectrum.algebra().clone();
        let n = self.spectrum.n();
        let entries = (0..n)
            .map(|j| {
                let blocks = (0..alg.num_blocks())
                    .map(|b| self.spectrum.basis(b).conjugate(self.frame_block(b, |v| v[j]).as_ref()))
                    .collect();
                MatOp::new(alg.clone(), blocks)
            })
            .collect::<Result<Vec<_>>>()?;
        HermTuple::new(entries)
    }

    /// Every family projection in original coordinates.
    pub fn family_projections(&self) -> Vec<MatOp> {
        let alg = self.spectrum.algebra().clone();
        self.family
            .iter()
            .map(|f| {
                let blocks = (0..alg.num_blocks())
                    .map(|b| {
                        let d = alg.dim(b);
                        let mut m = Mat::zeros(d, d);
                        if b == f.block {
                            f.add_to(&mut m, 1.0);
                        }
                        self.spectrum.basis(b).conjugate(m.as_ref())
                    })
                    .collect();
                MatOp::trusted_projection(alg.clone(), blocks)
            })
            .collect()
    }

    pub fn summary(&self) -> DiagonalizationSummary {
        DiagonalizationSummary {
            space: self.space.to_string(),
            residuals: self.residuals.clone(),
            residuals_inf: self.residuals_inf.clone(),
            bound: self.bound,
            family_size: self.family.len(),
            family_defect: self.family_defect(),
            joint_residual: self.spectrum.residual(),
        }
    }
}
