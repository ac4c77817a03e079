use serde::{Deserialize, Serialize};

use crate::ncalg::{HermTuple, MatOp};
use crate::Result;

/// Headroom below 1 kept by [`rescale_to_unit_cube`].
pub const MARGIN: f64 = 1.0 / (1u64 << 40) as f64;

/// `x ↦ (x + offset) / scale` on one axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub offset: f64,
    pub scale: f64,
}

impl AffineMap {
    pub fn forward(&self, x: f64) -> f64 {
        (x + self.offset) / self.scale
    }

    pub fn inverse(&self, y: f64) -> f64 {
        y * self.scale - self.offset
    }

    pub fn forward_op(&self, x: &MatOp) -> MatOp {
        x.shift(self.offset).scale_real(1.0 / self.scale)
    }

    pub fn inverse_op(&self, y: &MatOp) -> MatOp {
        y.scale_real(self.scale).shift(-self.offset)
    }
}

fn spectrum_range(x: &MatOp) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for m in x.blocks() {
        let vals = if crate::ncalg::dense::is_diagonal(m.as_ref()) {
            (0..m.nrows()).map(|i| m[(i, i)].re).collect()
        } else {
            crate::ncalg::dense::herm_eigvals(m.as_ref())?
        };
        for v in vals {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok((lo, hi))
}

/// Shifts and shrinks each axis so its spectrum lies in `[0, 1 − 2^{-40}]`.
///
/// The offset is `max(0, −λ_min)` and the scale `max(1, (λ_max + offset)/(1 − 2^{-40}))`,
/// so an axis already inside the cube is left alone.
pub fn rescale_to_unit_cube(alpha: &HermTuple) -> Result<(Vec<AffineMap>, HermTuple)> {
    let mut maps = Vec::with_capacity(alpha.len());
    let mut entries = Vec::with_capacity(alpha.len());
    for a in alpha.entries() {
        let (lo, hi) = spectrum_range(a)?;
        let offset = (-lo).max(0.0);
        let scale = ((hi + offset) / (1.0 - MARGIN)).max(1.0);
        let map = AffineMap { offset, scale };
        entries.push(map.forward_op(a));
        maps.push(map);
    }
    Ok((maps, HermTuple::new(entries)?))
}
