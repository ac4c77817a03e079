use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One full matrix block `M_dim(ℂ)` with trace `weight · tr`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

/// Finite direct sum of matrix blocks with a faithful weighted trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TracedAlgebra {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
}

impl TracedAlgebra {
    pub fn new(blocks: Vec<Block>) -> Result<Arc<Self>> {
        if blocks.is_empty() {
            return Err(Error::InvalidOperator("algebra needs at least one block".into()));
        }
        for (b, blk) in blocks.iter().enumerate() {
            if blk.dim == 0 {
                return Err(Error::InvalidOperator(format!("block {b} has dimension 0")));
            }
            if !(blk.weight > 0.0 && blk.weight.is_finite()) {
                return Err(Error::InvalidOperator(format!("block {b} has weight {}", blk.weight)));
            }
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut acc = 0;
        for blk in &blocks {
            offsets.push(acc);
            acc += blk.dim;
        }
        Ok(Arc::new(Self { blocks, offsets }))
    }

    /// A single block `M_d` with trace `weight · tr`.
    pub fn single(dim: usize, weight: f64) -> Result<Arc<Self>> {
        Self::new(vec![Block { dim, weight }])
    }

    /// `M_d` with weight `1/d`, so that `τ(1) = 1`.
    pub fn unit(dim: usize) -> Result<Arc<Self>> {
        Self::single(dim, 1.0 / dim as f64)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self, b: usize) -> usize {
        self.blocks[b].dim
    }

    pub fn weight(&self, b: usize) -> f64 {
        self.blocks[b].weight
    }

    /// Offset of block `b` in the flattened coordinate list.
    pub fn offset(&self, b: usize) -> usize {
        self.offsets[b]
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// `τ(1) = Σ dim_b · weight_b`.
    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.dim as f64 * b.weight).sum()
    }

    /// Block and local index of a flattened coordinate.
    pub fn locate(&self, flat: usize) -> (usize, usize) {
        let b = self.offsets.partition_point(|&o| o <= flat) - 1;
        (b, flat - self.offsets[b])
    }
}

pub(crate) fn same_algebra(a: &Arc<TracedAlgebra>, b: &Arc<TracedAlgebra>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.blocks == b.blocks {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch(format!("{:?} vs {:?}", a.blocks, b.blocks)))
    }
}
