//! JSON exchange format for operators.
//!
//! ```json
//! {"blocks": [{"dim": 2, "weight": 0.5}],
//!  "entries": [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]]}
//! ```
//!
//! `entries[b]` lists block `b` row-major as `[re, im]` pairs.

use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::algebra::{Block, TracedAlgebra};
use super::matop::MatOp;
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub blocks: Vec<Block>,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl OperatorFile {
    pub fn from_op(x: &MatOp) -> Self {
        let entries = x
            .blocks()
            .iter()
            .map(|m| {
                let mut out = Vec::with_capacity(m.nrows() * m.ncols());
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        let z = m[(i, j)];
                        out.push([z.re, z.im]);
                    }
                }
                out
            })
            .collect();
        Self { blocks: x.algebra().blocks().to_vec(), entries }
    }

    pub fn to_op(&self) -> Result<MatOp> {
        let alg = TracedAlgebra::new(self.blocks.clone())?;
        self.to_op_in(&alg)
    }

    /// Rebuilds the operator inside an existing algebra with the same blocks.
    pub fn to_op_in(&self, alg: &Arc<TracedAlgebra>) -> Result<MatOp> {
        if alg.blocks() != self.blocks.as_slice() {
            return Err(Error::AlgebraMismatch("operator file header differs from algebra".into()));
        }
        if self.entries.len() != self.blocks.len() {
            return Err(Error::InvalidOperator(format!(
                "{} entry lists for {} blocks",
                self.entries.len(),
                self.blocks.len()
            )));
        }
        let mats = self
            .blocks
            .iter()
            .zip(&self.entries)
            .map(|(blk, e)| {
                if e.len() != blk.dim * blk.dim {
                    return Err(Error::InvalidOperator(format!(
                        "block of dim {} has {} entries",
                        blk.dim,
                        e.len()
                    )));
                }
                Ok(Mat::from_fn(blk.dim, blk.dim, |i, j| {
                    let [re, im] = e[i * blk.dim + j];
                    C64::new(re, im)
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        MatOp::new(alg.clone(), mats)
    }
}

pub fn to_json(x: &MatOp) -> Result<String> {
    Ok(serde_json::to_string(&OperatorFile::from_op(x))?)
}

pub fn from_json(src: &str) -> Result<MatOp> {
    serde_json::from_str::<OperatorFile>(src)?.to_op()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let alg = TracedAlgebra::new(vec![Block { dim: 2, weight: 0.5 }, Block { dim: 1, weight: 3.0 }]).unwrap();
        let m0 = Mat::from_fn(2, 2, |i, j| C64::new(i as f64 + 0.1, j as f64 - 1.0 / 3.0));
        let m1 = Mat::from_fn(1, 1, |_, _| C64::new(std::f64::consts::PI, 0.0));
        let x = MatOp::new(alg, vec![m0, m1]).unwrap();
        let y = from_json(&to_json(&x).unwrap()).unwrap();
        assert_eq!(x.max_abs_diff(&y).unwrap(), 0.0);
        assert_eq!(x.algebra().blocks(), y.algebra().blocks());
    }

    #[test]
    fn rejects_bad_shapes() {
        let bad = r#"{"blocks":[{"dim":2,"weight":1.0}],"entries":[[[1,0],[0,0],[0,0]]]}"#;
        assert!(from_json(bad).is_err());
        assert!(from_json("{").is_err());
    }
}
