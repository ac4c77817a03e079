use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Distance to a dyadic cut below which an eigenvalue is snapped onto it.
pub const SNAP_TOL: f64 = 1.0 / (1u64 << 45) as f64;

/// Finest level at which dyadic atoms are resolved.
pub const MAX_LEVEL: u32 = 40;

/// A product of intervals `I_1 × ... × I_n`, half-open `[lo, hi)` by default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub lo_closed: Vec<bool>,
    pub hi_closed: Vec<bool>,
}

impl SpectralBox {
    pub fn half_open(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::InvalidOperator("box corners differ in length".into()));
        }
        if let Some(j) = (0..lo.len()).find(|&j| !(lo[j] <= hi[j])) {
            return Err(Error::InvalidOperator(format!("box axis {j} has lo {} > hi {}", lo[j], hi[j])));
        }
        let n = lo.len();
        Ok(Self { lo, hi, lo_closed: vec![true; n], hi_closed: vec![false; n] })
    }

    /// All of `ℝⁿ`.
    pub fn everything(n: usize) -> Self {
        Self {
            lo: vec![f64::NEG_INFINITY; n],
            hi: vec![f64::INFINITY; n],
            lo_closed: vec![true; n],
            hi_closed: vec![true; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(j, &v)| {
            let above = if self.lo_closed[j] { v >= self.lo[j] } else { v > self.lo[j] };
            let below = if self.hi_closed[j] { v <= self.hi[j] } else { v < self.hi[j] };
            above && below
        })
    }
}

/// The cube `Π_j [k_j/2^m, (k_j+1)/2^m)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicAtom {
    pub level: u32,
    pub index: Vec<i64>,
}

impl DyadicAtom {
    pub fn width(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn to_box(&self) -> SpectralBox {
        let w = self.width();
        SpectralBox::half_open(
            self.index.iter().map(|&k| k as f64 * w).collect(),
            self.index.iter().map(|&k| (k + 1) as f64 * w).collect(),
        )
        .expect("atom corners are ordered")
    }

    /// Centre point `c_A`.
    pub fn centre(&self) -> Vec<f64> {
        let w = self.width();
        self.index.iter().map(|&k| (k as f64 + 0.5) * w).collect()
    }

    /// The atom one level up containing this one.
    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self {
            level: self.level - 1,
            index: self.index.iter().map(|&k| k.div_euclid(2)).collect(),
        })
    }
}

/// `floor(2^m x)`, except that values within [`SNAP_TOL`] of a cut are
/// first moved onto the cut, so they land in the atom starting there.
pub fn dyadic_floor(x: f64, m: u32) -> i64 {
    let scale = (m as f64).exp2();
    let y = x * scale;
    let r = y.round();
    if (x - r / scale).abs() <= SNAP_TOL {
        r as i64
    } else {
        y.floor() as i64
    }
}

/// Atom index of a point at level `m`.
pub fn atom_of(lambda: &[f64], m: u32) -> DyadicAtom {
    DyadicAtom { level: m, index: lambda.iter().map(|&x| dyadic_floor(x, m)).collect() }
}

/// Checks that a point lies in the unit cube `[0,1)^n` after snapping.
pub(crate) fn check_unit_cube(lambda: &[f64]) -> Result<()> {
    for (axis, &value) in lambda.iter().enumerate() {
        let k = dyadic_floor(value, 0);
        if k != 0 {
            return Err(Error::OutsideUnitCube { axis, value });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping_moves_to_the_cut() {
        assert_eq!(dyadic_floor(0.5, 1), 1);
        assert_eq!(dyadic_floor(0.5 - 1e-15, 1), 1);
        assert_eq!(dyadic_floor(0.5 - 1e-9, 1), 0);
        assert_eq!(dyadic_floor(-1e-16, 3), 0);
        assert_eq!(dyadic_floor(0.3, 2), 1);
        assert_eq!(dyadic_floor(-0.25, 0), -1);
    }

    #[test]
    fn atoms_and_boxes() {
        let a = atom_of(&[0.1, 0.6], 1);
        assert_eq!(a.index, vec![0, 1]);
        assert_eq!(a.centre(), vec![0.25, 0.75]);
        assert!(a.to_box().contains(&[0.1, 0.6]));
        assert!(!a.to_box().contains(&[0.5, 0.6]));
        assert_eq!(a.parent().unwrap(), DyadicAtom { level: 0, index: vec![0, 0] });
        assert!(SpectralBox::everything(2).contains(&[1e300, -1e300]));
        assert!(SpectralBox::half_open(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn unit_cube_check() {
        assert!(check_unit_cube(&[0.0, 0.999]).is_ok());
        assert!(matches!(check_unit_cube(&[0.2, 1.0]), Err(Error::OutsideUnitCube { axis: 1, .. })));
        assert!(check_unit_cube(&[-0.1]).is_err());
    }
}
