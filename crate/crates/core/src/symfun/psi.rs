use std::fmt;

use serde::{Deserialize, Serialize};

use super::step::StepFunction;
use crate::{Error, Result};

/// Increasing concave function on `[0, ∞)` with `ψ(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PsiFunction {
    /// `t^{1/p}`, `p ≥ 1`.
    PowerRoot(f64),
    /// Linear interpolation through `(t, ψ(t))` breakpoints starting at `(0, 0)`;
    /// continued with the last slope beyond the final breakpoint.
    PiecewiseLinear(Vec<(f64, f64)>),
    /// `min{ψ(t), t}`.
    MinWithIdentity(Box<PsiFunction>),
    /// `c·ψ(t)`, `c > 0`.
    Scaled(f64, Box<PsiFunction>),
}

/// Closed form of ψ on one interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum PieceKind {
    /// `slope·t + intercept`
    Affine { slope: f64, intercept: f64 },
    /// `coef·t^exp`, `0 < exp < 1`
    Power { coef: f64, exp: f64 },
}

impl PieceKind {
    fn eval(self, t: f64) -> f64 {
        match self {
            PieceKind::Affine { slope, intercept } => slope * t + intercept,
            PieceKind::Power { coef, exp } => {
                if t == 0.0 {
                    0.0
                } else {
                    coef * t.powf(exp)
                }
            }
        }
    }

    fn scaled(self, c: f64) -> Self {
        match self {
            PieceKind::Affine { slope, intercept } => PieceKind::Affine { slope: c * slope, intercept: c * intercept },
            PieceKind::Power { coef, exp } => PieceKind::Power { coef: c * coef, exp },
        }
    }

    /// Solutions of `piece(t) = t` other than `t = 0`.
    fn identity_crossing(self) -> Option<f64> {
        match self {
            PieceKind::Affine { slope, intercept } => {
                if slope == 1.0 {
                    None
                } else {
                    Some(intercept / (1.0 - slope))
                }
            }
            PieceKind::Power { coef, exp } => Some(coef.powf(1.0 / (1.0 - exp))),
        }
    }
}

/// ψ restricted to `[start, end]` (`end` may be `+∞`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Piece {
    pub start: f64,
    pub end: f64,
    pub kind: PieceKind,
}

impl PsiFunction {
    pub fn power_root(p: f64) -> Self {
        PsiFunction::PowerRoot(p)
    }

    /// `t ↦ t`, the ψ of `L_1`.
    pub fn identity() -> Self {
        PsiFunction::PowerRoot(1.0)
    }

    pub fn piecewise_linear(points: Vec<(f64, f64)>) -> Result<Self> {
        let psi = PsiFunction::PiecewiseLinear(points);
        psi.validate()?;
        Ok(psi)
    }

    /// Piecewise-linear interpolation of `log(1 + t)` at `t = 0, 2^0, ..., 2^max_exp`.
    pub fn log_like(max_exp: u32) -> Self {
        let mut pts = vec![(0.0, 0.0)];
        pts.extend((0..=max_exp).map(|e| {
            let t = (e as f64).exp2();
            (t, t.ln_1p())
        }));
        PsiFunction::PiecewiseLinear(pts)
    }

    pub fn min_with_identity(self) -> Self {
        PsiFunction::MinWithIdentity(Box::new(self))
    }

    pub fn scaled(self, c: f64) -> Self {
        PsiFunction::Scaled(c, Box::new(self))
    }

    /// Checks `ψ(0) = 0`, monotonicity and concavity.
    pub fn validate(&self) -> Result<()> {
        match self {
            PsiFunction::PowerRoot(p) => {
                if !(p.is_finite() && *p >= 1.0) {
                    return Err(Error::InvalidPsi(format!("power root index {p} must be finite and >= 1")));
                }
            }
            PsiFunction::PiecewiseLinear(pts) => {
                if pts.len() < 2 {
                    return Err(Error::InvalidPsi("piecewise-linear psi needs at least two breakpoints".into()));
                }
                if pts[0] != (0.0, 0.0) {
                    return Err(Error::InvalidPsi(format!("first breakpoint must be (0, 0), got {:?}", pts[0])));
                }
                let mut prev_slope = f64::INFINITY;
                for w in pts.windows(2) {
                    let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                    if !(t1.is_finite() && v1.is_finite()) || t1 <= t0 {
                        return Err(Error::InvalidPsi(format!("breakpoints must be finite with increasing t at t = {t1}")));
                    }
                    let slope = (v1 - v0) / (t1 - t0);
                    if slope < 0.0 {
                        return Err(Error::InvalidPsi(format!("psi decreases on [{t0}, {t1}]")));
                    }
                    if slope > prev_slope * (1.0 + 1e-12) + 1e-15 {
                        return Err(Error::InvalidPsi(format!(
                            "concavity violated at t = {t0}: slope {slope} exceeds previous slope {prev_slope}"
                        )));
                    }
                    prev_slope = slope;
                }
            }
            PsiFunction::MinWithIdentity(inner) => inner.validate()?,
            PsiFunction::Scaled(c, inner) => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::InvalidPsi(format!("scale {c} must be positive and finite")));
                }
                inner.validate()?;
            }
        }
        Ok(())
    }

    /// Closed-form pieces covering `[0, ∞)`.
    pub(crate) fn pieces(&self) -> Vec<Piece> {
        match self {
            PsiFunction::PowerRoot(p) => {
                let kind = if *p == 1.0 {
                    PieceKind::Affine { slope: 1.0, intercept: 0.0 }
                } else {
                    PieceKind::Power { coef: 1.0, exp: 1.0 / p }
                };
                vec![Piece { start: 0.0, end: f64::INFINITY, kind }]
            }
            PsiFunction::PiecewiseLinear(pts) => {
                let n = pts.len();
                pts.windows(2)
                    .enumerate()
                    .map(|(i, w)| {
                        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                        let slope = (v1 - v0) / (t1 - t0);
                        Piece {
                            start: t0,
                            end: if i + 2 == n { f64::INFINITY } else { t1 },
                            kind: PieceKind::Affine { slope, intercept: v0 - slope * t0 },
                        }
                    })
                    .collect()
            }
            PsiFunction::Scaled(c, inner) => inner
                .pieces()
                .into_iter()
                .map(|p| Piece { kind: p.kind.scaled(*c), ..p })
                .collect(),
            PsiFunction::MinWithIdentity(inner) => {
                let ident = PieceKind::Affine { slope: 1.0, intercept: 0.0 };
                let mut out: Vec<Piece> = Vec::new();
                for p in inner.pieces() {
                    let mut cuts = vec![p.start];
                    if let Some(x) = p.kind.identity_crossing() {
                        if x > p.start && x < p.end {
                            cuts.push(x);
                        }
                    }
                    cuts.push(p.end);
                    for w in cuts.windows(2) {
                        let (a, b) = (w[0], w[1]);
                        let probe = if b.is_finite() { 0.5 * (a + b) } else { 2.0 * a + 1.0 };
                        let kind = if p.kind.eval(probe) <= probe { p.kind } else { ident };
                        match out.last_mut() {
                            Some(last) if last.kind == kind && last.end == a => last.end = b,
                            _ => out.push(Piece { start: a, end: b, kind }),
                        }
                    }
                }
                out
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            PsiFunction::PowerRoot(p) => {
                if *p == 1.0 {
                    t
                } else {
                    t.powf(1.0 / p)
                }
            }
            PsiFunction::MinWithIdentity(inner) => inner.eval(t).min(t),
            PsiFunction::Scaled(c, inner) => c * inner.eval(t),
            PsiFunction::PiecewiseLinear(pts) => {
                // index of the segment [pts[i], pts[i+1]] holding t, last one extended
                let i = pts.partition_point(|&(ti, _)| ti <= t).clamp(1, pts.len() - 1) - 1;
                let ((t0, v0), (t1, v1)) = (pts[i], pts[i + 1]);
                v0 + (v1 - v0) / (t1 - t0) * (t - t0)
            }
        }
    }

    /// `lim_{t→0+} t/ψ(t)`; `None` when ψ vanishes near zero.
    pub(crate) fn t_over_psi_at_zero(&self) -> Option<f64> {
        match self.pieces().first()?.kind {
            PieceKind::Affine { slope, .. } => (slope > 0.0).then(|| 1.0 / slope),
            PieceKind::Power { .. } => Some(0.0),
        }
    }

    /// Exact Stieltjes integral `∫_0^∞ f dψ` for a nonincreasing step function.
    pub fn stieltjes(&self, f: &StepFunction) -> f64 {
        let mut left = 0.0;
        let mut psi_left = 0.0;
        let mut total = 0.0;
        for s in f.steps() {
            let right = left + s.width;
            let psi_right = self.eval(right);
            total += s.value * (psi_right - psi_left);
            left = right;
            psi_left = psi_right;
        }
        total
    }
}

impl fmt::Display for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiFunction::PowerRoot(p) => {
                if *p == 1.0 {
                    write!(f, "pow(1)")
                } else if p.fract() == 0.0 {
                    write!(f, "pow(1/{})", *p as u64)
                } else {
                    write!(f, "pow({})", 1.0 / p)
                }
            }
            PsiFunction::PiecewiseLinear(pts) => {
                write!(f, "pwl[")?;
                for (i, (t, v)) in pts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "({t},{v})")?;
                }
                write!(f, "]")
            }
            PsiFunction::MinWithIdentity(inner) => write!(f, "min_id({inner})"),
            PsiFunction::Scaled(c, inner) => write!(f, "scale({c},{inner})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_root_values() {
        let psi = PsiFunction::power_root(2.0);
        assert_eq!(psi.eval(9.0), 3.0);
        assert_eq!(psi.eval(0.0), 0.0);
    }

    #[test]
    fn pwl_extends_with_last_slope() {
        let psi = PsiFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (10.0, 2.0)]).unwrap();
        assert!((psi.eval(0.5) - 0.5).abs() < 1e-15);
        assert!((psi.eval(5.5) - 1.5).abs() < 1e-15);
        assert!((psi.eval(19.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn pwl_validation() {
        assert!(PsiFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)]).is_err());
        assert!(PsiFunction::piecewise_linear(vec![(0.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(PsiFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(PsiFunction::PowerRoot(0.5).validate().is_err());
        assert!(PsiFunction::log_like(60).validate().is_ok());
    }

    #[test]
    fn min_with_identity_pieces_switch_at_crossing() {
        let psi = PsiFunction::power_root(2.0).min_with_identity();
        let pieces = psi.pieces();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].end, 1.0);
        assert_eq!(psi.eval(0.25), 0.25);
        assert_eq!(psi.eval(4.0), 2.0);
        // 2t already dominates t everywhere
        let psi = PsiFunction::identity().scaled(2.0).min_with_identity();
        for t in [0.1, 1.0, 7.0, 1e6] {
            assert_eq!(psi.eval(t), t);
        }
    }

    #[test]
    fn pieces_agree_with_eval() {
        let cases = [
            PsiFunction::power_root(3.0).scaled(0.7).min_with_identity(),
            PsiFunction::log_like(20).min_with_identity(),
            PsiFunction::piecewise_linear(vec![(0.0, 0.0), (0.5, 2.0), (4.0, 3.0)]).unwrap().min_with_identity(),
        ];
        for psi in &cases {
            let pieces = psi.pieces();
            for t in [1e-3, 0.3, 0.9, 1.7, 3.2, 50.0, 1e5] {
                let p = pieces.iter().find(|p| t <= p.end).unwrap();
                assert!((p.kind.eval(t) - psi.eval(t)).abs() <= 1e-12 * psi.eval(t).max(1.0), "{psi} at {t}");
            }
        }
    }

    #[test]
    fn display_round_trips_through_names() {
        assert_eq!(PsiFunction::power_root(2.0).to_string(), "pow(1/2)");
        assert_eq!(PsiFunction::identity().min_with_identity().to_string(), "min_id(pow(1))");
    }
}
