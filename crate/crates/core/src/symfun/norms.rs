use super::psi::{PieceKind, PsiFunction};
use super::space::SpaceSpec;
use super::step::StepFunction;
use crate::{Error, Result};

/// `‖f‖_{Λψ} = ∫_0^∞ f dψ`, exact for every [`PsiFunction`] form.
pub fn lorentz_norm(f: &StepFunction, psi: &PsiFunction) -> Result<f64> {
    psi.validate()?;
    Ok(psi.stieltjes(f))
}

/// `‖f‖_{Mψ} = sup_{t>0} ψ(t)^{-1} ∫_0^t f`.
///
/// The running integral `F` is piecewise affine and ψ is piecewise affine or a
/// power on known pieces, so the supremum is attained on a finite candidate
/// set: the step boundaries of `f`, the piece boundaries of ψ, the interior
/// stationary points of `F/ψ` on pieces where ψ is a power, and the limit at
/// `0+`. Beyond the support `F` is constant and `F/ψ` nonincreasing. On affine
/// ψ-pieces `F/ψ` is monotone. The result is exact up to rounding.
pub fn marcinkiewicz_norm(f: &StepFunction, psi: &PsiFunction) -> Result<f64> {
    psi.validate()?;
    let at_zero = psi
        .t_over_psi_at_zero()
        .ok_or_else(|| Error::InvalidPsi("psi vanishes identically".into()))?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let ratio = |t: f64| f.integral_to(t) / psi.eval(t);
    let mut best = f.sup() * at_zero;

    let support = f.support();
    let pieces = psi.pieces();
    let mut candidates = f.breakpoints();
    candidates.extend(pieces.iter().map(|p| p.end).filter(|&e| e < support));

    let mut left = 0.0;
    for (s, right) in f.steps().iter().zip(f.breakpoints()) {
        // on [left, right] the running integral is v·t + b
        let v = s.value;
        let b = f.integral_to(left) - v * left;
        for p in &pieces {
            if let PieceKind::Power { exp, .. } = p.kind {
                if b > 0.0 {
                    let t = exp * b / (v * (1.0 - exp));
                    if t > left.max(p.start) && t < right.min(p.end) {
                        candidates.push(t);
                    }
                }
            }
        }
        left = right;
    }
    for t in candidates {
        if t > 0.0 {
            best = best.max(ratio(t));
        }
    }
    Ok(best)
}

/// `φ_E(t) = ‖χ_(0,t)‖_E`.
pub fn fundamental_function(space: &SpaceSpec, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    match space {
        SpaceSpec::Lorentz(psi) => psi.eval(t),
        SpaceSpec::Ln1(n) => t.powf(1.0 / *n as f64),
        SpaceSpec::LInfinity => 1.0,
        SpaceSpec::IntersectLInf(base) => fundamental_function(base, t).max(1.0),
    }
}

/// `ψ₁ = min{ψ, t}`, the ψ-function of `Λψ + L_1`.
pub fn psi_plus_l1(psi: &PsiFunction) -> PsiFunction {
    psi.clone().min_with_identity()
}

/// `‖f‖_E` for every implemented space.
pub fn space_norm(f: &StepFunction, space: &SpaceSpec) -> Result<f64> {
    match space {
        SpaceSpec::Lorentz(psi) => lorentz_norm(f, psi),
        SpaceSpec::Ln1(n) => {
            if *n == 0 {
                return Err(Error::InvalidPsi("L_{n,1} needs n >= 1".into()));
            }
            Ok(PsiFunction::PowerRoot(*n as f64).stieltjes(f))
        }
        SpaceSpec::LInfinity => Ok(f.sup()),
        SpaceSpec::IntersectLInf(base) => Ok(space_norm(f, base)?.max(f.sup())),
    }
}
