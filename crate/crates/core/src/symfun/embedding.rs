use serde::{Deserialize, Serialize};

use super::psi::PsiFunction;
use super::space::SpaceSpec;
use crate::{Error, Result};

/// Windowed verdict on whether `Λψ ∩ L_∞ ⊂ L_{n,1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EmbeddingVerdict {
    Embedded,
    /// Levels `m` whose ratio fell below the decay threshold.
    NotEmbedded { witness: Vec<u32> },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub n: usize,
    /// `r_m = φ(2^{mn}) / 2^m` for `m = 0..=m_max`.
    pub ratios: Vec<f64>,
    pub verdict: EmbeddingVerdict,
}

impl EmbeddingReport {
    pub fn is_not_embedded(&self) -> bool {
        matches!(self.verdict, EmbeddingVerdict::NotEmbedded { .. })
    }

    /// Passes only a `NotEmbedded` verdict; an inconclusive window is refused.
    pub fn require_not_embedded(self) -> Result<Self> {
        match self.verdict {
            EmbeddingVerdict::NotEmbedded { .. } => Ok(self),
            EmbeddingVerdict::Embedded => Err(Error::Embedded { n: self.n, ratios: self.ratios }),
            EmbeddingVerdict::Inconclusive => Err(Error::Refused(format!(
                "L_{{{},1}} embedding test is inconclusive on m = 0..={} (last ratio {:.3e})",
                self.n,
                self.ratios.len() - 1,
                self.ratios.last().copied().unwrap_or(f64::NAN)
            ))),
        }
    }
}

/// Thresholds of the windowed test: decay below `1e-3·max(r_0, 1)` with the
/// last three ratios strictly decreasing means "not embedded"; staying above
/// `0.5·r_0` without that trend means "embedded".
fn classify(n: usize, ratios: Vec<f64>) -> EmbeddingReport {
    let r0 = ratios[0];
    let low = 1e-3 * r0.max(1.0);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let k = ratios.len();
    let falling = ratios[k - 3] > ratios[k - 2] && ratios[k - 2] > ratios[k - 1];
    let verdict = if min < low && falling {
        let witness = (0..k as u32).filter(|&m| ratios[m as usize] < low).collect();
        EmbeddingVerdict::NotEmbedded { witness }
    } else if min >= 0.5 * r0 && !falling {
        EmbeddingVerdict::Embedded
    } else {
        EmbeddingVerdict::Inconclusive
    };
    EmbeddingReport { n, ratios, verdict }
}

fn window(n: usize, m_max: u32, phi: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    if m_max < 4 {
        return Err(Error::InvalidPsi(format!("embedding window m_max = {m_max} must be at least 4")));
    }
    if n == 0 {
        return Err(Error::InvalidPsi("embedding test needs n >= 1".into()));
    }
    Ok((0..=m_max)
        .map(|m| phi(((m as usize * n) as f64).exp2()) / (m as f64).exp2())
        .collect())
}

/// Tests `liminf_m ψ(2^{mn})/2^m = 0` on the window `m = 0..=m_max`.
pub fn embedding_test_ln1(psi: &PsiFunction, n: usize, m_max: u32) -> Result<EmbeddingReport> {
    psi.validate()?;
    Ok(classify(n, window(n, m_max, |t| psi.eval(t))?))
}

/// Same test driven by the fundamental function of `E ∩ L_∞`, so it applies
/// to every [`SpaceSpec`] (for Lorentz spaces the verdicts coincide with the
/// ψ version since `max{ψ, 1}` and ψ share their behaviour at infinity).
pub fn embedding_test_space(space: &SpaceSpec, n: usize, m_max: u32) -> Result<EmbeddingReport> {
    space.validate()?;
    let cap = space.clone().cap_inf();
    Ok(classify(n, window(n, m_max, |t| cap.fundamental(t))?))
}
