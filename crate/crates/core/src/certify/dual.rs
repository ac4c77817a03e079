//! Trace lower bounds for the quasicentral modulus.

use serde::{Deserialize, Serialize};

use super::banded::{banded_trace, BandedOp, DecayCertificate, Seq, TraceValue};
use crate::ncalg::dense;
use crate::symfun::PsiFunction;
use crate::{Error, Result, C64};

const MAX_TAIL_ROW: usize = 1 << 16;

/// Gershgorin check that `y` restricted to indices `≥ corner` is positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdTail {
    pub corner: usize,
    /// Rows checked one by one before the asymptotic bound took over.
    pub rows_checked: usize,
    /// Sum of the negative eigenvalues of the leading corner.
    pub corner_negative: f64,
}

fn tail_split(s: &Seq, t: usize) -> (C64, f64, bool) {
    let mut constant = C64::new(0.0, 0.0);
    let mut rest = 0.0;
    let mut growing = false;
    for term in &s.tail {
        let r = term.ratio.norm();
        if term.ratio == C64::new(1.0, 0.0) {
            constant += term.coef;
        } else if r < 1.0 {
            rest += term.coef.norm() * r.powi(t as i32);
        } else if r == 1.0 {
            rest += term.coef.norm();
        } else {
            growing = true;
        }
    }
    (constant, rest, growing)
}

/// Certifies `P_N^⊥ y P_N^⊥ ≥ 0` for `N = corner` by diagonal dominance, so
/// the negative part of `y` has rank at most `N`.
pub fn psd_tail_certificate(y: &BandedOp, corner: usize) -> Result<PsdTail> {
    if !y.is_hermitian() {
        return Err(Error::Refused("operator is not hermitian".into()));
    }
    let zero = Seq::zero();
    let scale = y.bands().values().map(Seq::sup_bound).fold(1.0, f64::max);
    let tol = 1e-14 * scale;
    let row_ok = |i: usize| {
        let d = y.band(0).unwrap_or(&zero).value(i).re;
        let off: f64 = y
            .bands()
            .iter()
            .filter(|(&k, _)| k != 0 && i as i64 + k >= corner as i64)
            .map(|(_, s)| s.value(i).norm())
            .sum();
        d + tol >= off
    };
    let heads = y.bands().values().map(|s| s.head.len()).max().unwrap_or(0);
    let mut end = corner.max(heads + y.bandwidth()) + 64;
    let mut checked = corner;
    loop {
        if let Some(bad) = (checked..end).find(|&i| !row_ok(i)) {
            return Err(Error::Refused(format!("row {bad} beyond the corner {corner} is not diagonally dominant")));
        }
        checked = end;
        let (c0, r0, g0) = tail_split(y.band(0).unwrap_or(&zero), end - y.band(0).map_or(0, |s| s.head.len()));
        let lower = c0.re - r0;
        let mut upper = 0.0;
        let mut growing = g0;
        for (&k, s) in y.bands() {
            if k == 0 {
                continue;
            }
            let (c, r, g) = tail_split(s, end - s.head.len());
            upper += c.norm() + r;
            growing |= g;
        }
        if growing {
            return Err(Error::Refused("a band grows geometrically".into()));
        }
        if lower + tol >= upper {
            break;
        }
        if end >= MAX_TAIL_ROW {
            return Err(Error::Refused(format!("diagonal dominance not certified up to row {end}")));
        }
        end *= 2;
    }
    let corner_negative = if corner == 0 {
        0.0
    } else {
        let m = y.corner(corner);
        dense::herm_eigvals(dense::hermitian_part(m.as_ref()).as_ref())?.into_iter().filter(|v| *v < 0.0).sum()
    };
    Ok(PsdTail { corner, rows_checked: checked, corner_negative })
}

/// `|τ(y)| / Σ_j bound_j` for `y = i Σ_j [α(j), γ(j)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub psi: String,
    pub trace: TraceValue,
    pub decay: DecayCertificate,
    pub psd_tail: PsdTail,
    pub denominator: f64,
    /// `max{|τ(y)| − tail, 0} / denominator`.
    pub value: f64,
}

/// `y(α, γ) = i Σ_j [α(j), γ(j)]`.
pub fn dual_operator(alpha: &[BandedOp], gamma: &[BandedOp]) -> Result<BandedOp> {
    if alpha.len() != gamma.len() || alpha.is_empty() {
        return Err(Error::InvalidOperator(format!("need equal nonempty tuples, got {} and {}", alpha.len(), gamma.len())));
    }
    if let Some(j) = alpha.iter().chain(gamma).position(|x| !x.is_hermitian()) {
        return Err(Error::InvalidOperator(format!("entry {j} of the concatenated tuples is not hermitian")));
    }
    let sum = alpha.iter().zip(gamma).fold(BandedOp::zero(), |acc, (a, g)| acc.add(&a.commutator(g)));
    Ok(sum.scale(C64::new(0.0, 1.0)))
}

/// Lower bound on the quasicentral modulus relative to `Λψ` from a dual
/// tuple `γ` with caller-certified `‖γ(j)‖_{Mψ} ≤ gamma_m_bounds[j]`.
///
/// Refuses when the diagonal of `y(α, γ)` has no decay certificate or when
/// positivity beyond the corner of size `4 × bandwidth` cannot be certified.
pub fn dual_certificate(
    alpha: &[BandedOp],
    gamma: &[BandedOp],
    psi: &PsiFunction,
    gamma_m_bounds: &[f64],
) -> Result<DualCertificate> {
    psi.validate()?;
    if gamma_m_bounds.len() != gamma.len() || gamma_m_bounds.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(Error::InvalidOperator("one positive finite M_psi bound per entry of gamma".into()));
    }
    let y = dual_operator(alpha, gamma)?;
    let decay = DecayCertificate::infer(&y)
        .ok_or_else(|| Error::Refused("diagonal of y(alpha, gamma) has no decay certificate".into()))?;
    let bandwidth = alpha.iter().chain(gamma).map(BandedOp::bandwidth).max().unwrap_or(0);
    let psd_tail = psd_tail_certificate(&y, 4 * bandwidth.max(1))?;
    let trace = banded_trace(&y, Some(&decay))?;
    let denominator: f64 = gamma_m_bounds.iter().sum();
    let value = (trace.value.abs() - trace.tail_bound).max(0.0) / denominator;
    Ok(DualCertificate { psi: psi.to_string(), trace, decay, psd_tail, denominator, value })
}

/// `tr(i[a_N, c_N])` for the leading `N × N` corners: zero for every `N`.
pub fn corner_trace(a: &BandedOp, c: &BandedOp, n: usize) -> f64 {
    let (a, c) = (a.corner(n), c.corner(n));
    let comm = &a * &c - &c * &a;
    (0..n).map(|i| (C64::new(0.0, 1.0) * comm[(i, i)]).re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_certificate() {
        let cert = dual_certificate(&[BandedOp::re_shift()], &[BandedOp::im_shift()], &PsiFunction::identity(), &[1.0]).unwrap();
        assert!((cert.trace.value - 0.5).abs() < 1e-12);
        assert!(cert.value >= 0.5 - 1e-12);
        assert_eq!(corner_trace(&BandedOp::re_shift(), &BandedOp::im_shift(), 200).abs() < 1e-12, true);
    }

    #[test]
    fn homogeneous_in_gamma() {
        let a = [BandedOp::re_shift()];
        let psi = PsiFunction::identity();
        let base = dual_certificate(&a, &[BandedOp::im_shift()], &psi, &[1.0]).unwrap().value;
        for c in [0.25, 3.0, 17.0] {
            let g = [BandedOp::im_shift().scale(C64::new(c, 0.0))];
            let v = dual_certificate(&a, &g, &psi, &[c]).unwrap().value;
            assert!((v - base).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_gamma() {
        let cert = dual_certificate(&[BandedOp::re_shift()], &[BandedOp::zero()], &PsiFunction::identity(), &[1.0]).unwrap();
        assert_eq!(cert.value, 0.0);
    }

    #[test]
    fn negative_tail_is_refused() {
        let a = BandedOp::diagonal(Seq::finite(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]));
        let neg = BandedOp::diagonal(Seq::constant(C64::new(-1.0, 0.0)));
        assert!(matches!(psd_tail_certificate(&neg, 4), Err(Error::Refused(_))));
        assert!(psd_tail_certificate(&a, 0).is_ok());
    }
}
