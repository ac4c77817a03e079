use std::sync::Arc;

use super::algebra::{same_algebra, TracedAlgebra};
use super::dense;
use super::matop::MatOp;
use crate::{Error, Result};

pub const DEFAULT_CTOL: f64 = 1e-10;

/// A commuting tuple `(α(1), ..., α(n))` of Hermitian operators.
#[derive(Clone, Debug)]
pub struct HermTuple {
    entries: Vec<MatOp>,
    commutation_residual: f64,
    max_norm: f64,
}

impl HermTuple {
    pub fn new(entries: Vec<MatOp>) -> Result<Self> {
        Self::with_ctol(entries, DEFAULT_CTOL)
    }

    /// Accepts the tuple when `max_{i<j} ‖[α(i), α(j)]‖_∞ ≤ ctol·(1 + max ‖α(j)‖_∞)²`.
    pub fn with_ctol(entries: Vec<MatOp>, ctol: f64) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::InvalidOperator("tuple needs at least one entry".into()))?;
        for (j, a) in entries.iter().enumerate() {
            same_algebra(first.algebra(), a.algebra())?;
            if !a.is_hermitian() {
                return Err(Error::InvalidOperator(format!("entry {j} is not hermitian")));
            }
        }
        let max_norm = entries
            .iter()
            .map(MatOp::norm_inf)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let commutation_residual = if entries.iter().all(MatOp::is_diagonal) {
            0.0
        } else {
            let mut worst = 0.0f64;
            for i in 0..entries.len() {
                for j in i + 1..entries.len() {
                    let c = entries[i].commutator(&entries[j])?;
                    for m in c.blocks() {
                        worst = worst.max(dense::normal_norm(m.as_ref(), true)?);
                    }
                }
            }
            worst
        };
        let allowed = ctol * (1.0 + max_norm).powi(2);
        if commutation_residual > allowed {
            return Err(Error::NonCommuting { residual: commutation_residual, allowed });
        }
        Ok(Self { entries, commutation_residual, max_norm })
    }

    pub fn entries(&self) -> &[MatOp] {
        &self.entries
    }

    pub fn get(&self, j: usize) -> &MatOp {
        &self.entries[j]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        self.entries[0].algebra()
    }

    pub fn commutation_residual(&self) -> f64 {
        self.commutation_residual
    }

    /// `max_j ‖α(j)‖_∞`.
    pub fn max_norm(&self) -> f64 {
        self.max_norm
    }
}
