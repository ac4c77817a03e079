//! Windowed diagonalization of commuting tuples.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::approx::{approx_unit_frame, report, ApproxUnitSummary};
use super::diag::{DiagonalizationReport, FamilyMember};
use super::hull::{generating_decomposition, EIGENSPACE_TOL};
use crate::jointspec::{atom_of, dyadic_floor, joint_diagonalize, DyadicAtom, JointSpectrum, DEFAULT_DTOL, MAX_LEVEL};
use crate::ncalg::HermTuple;
use crate::symfun::{embedding_test_space, space_norm, SpaceSpec, StepFunction};
use crate::{Error, Result, C64};

/// Per-window summary of the construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    /// `k ∈ ℤⁿ` of the window `k + [0,1)ⁿ`.
    pub index: Vec<i64>,
    /// `ε · 2^{-|k|₁}`.
    pub budget: f64,
    pub level: u32,
    /// Eigenvalues used exactly because the level reached isolation.
    pub exact: bool,
    pub tau: f64,
    /// `‖(α(j) − δ(j)) e^α(window)‖_{E∩L_∞}` per axis.
    pub residuals: Vec<f64>,
    pub hulls: Vec<HullSummary>,
}

/// The dyadic approximate unit of one generating hull inside a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullSummary {
    pub tau_hull: f64,
    pub unit: ApproxUnitSummary,
    pub bounds_hold: bool,
}

#[derive(Clone, Debug)]
pub struct TupleReport {
    pub report: DiagonalizationReport,
    pub windows: Vec<WindowReport>,
    /// `Σ_k ε 2^{-|k|₁}` over occupied windows.
    pub budget_sum: f64,
    pub epsilon: f64,
}

fn window_of(lambda: &[f64]) -> Vec<i64> {
    lambda.iter().map(|&x| dyadic_floor(x, 0)).collect()
}

fn shifted(lambda: &[f64], k: &[i64]) -> Vec<f64> {
    lambda.iter().zip(k).map(|(x, &k)| x - k as f64).collect()
}

/// Diagonalizes `α` modulo `(E ∩ L_∞)(𝓜)` with total error at most `3ⁿ ε`.
///
/// The spectrum is cut into unit windows `k + [0,1)ⁿ`. In each window the
/// tuple is replaced by the centres of the dyadic atoms at the smallest level
/// `m` with `2^{-m-1} max{1, φ_E(τ(window))} ≤ ε 2^{-|k|₁}`; once that level
/// separates every joint eigenvalue, the eigenvalues themselves are used.
pub fn kuroda_diagonalize_tuple(alpha: &HermTuple, space: &SpaceSpec, epsilon: f64) -> Result<TupleReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidOperator(format!("epsilon {epsilon} must be positive")));
    }
    let n = alpha.len();
    embedding_test_space(space, n, 20)?.require_not_embedded()?;
    let spectrum = Arc::new(joint_diagonalize(alpha, DEFAULT_DTOL)?);
    let cap = space.clone().cap_inf();
    let alg = spectrum.algebra().clone();

    let mut cluster_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (b, groups) in spectrum.eigenspaces(EIGENSPACE_TOL).into_iter().enumerate() {
        for (g, cols) in groups.into_iter().enumerate() {
            for c in cols {
                cluster_of.insert((b, c), g);
            }
        }
    }

    let mut windows: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (i, t) in spectrum.tuples().iter().enumerate() {
        windows.entry(window_of(&t.lambda)).or_default().push(i);
    }

    let pairs = generating_decomposition(&spectrum)?;
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); spectrum.tuples().len()];
    let mut family = Vec::new();
    let mut window_reports = Vec::with_capacity(windows.len());
    let mut budget_sum = 0.0;

    for (k, members) in &windows {
        let budget = epsilon * (-(k.iter().map(|x| x.abs()).sum::<i64>() as f64)).exp2();
        budget_sum += budget;
        let tau: f64 = members.iter().map(|&i| alg.weight(spectrum.tuples()[i].block)).sum();
        let iso = (0..=MAX_LEVEL)
            .find(|&m| {
                let mut seen: BTreeMap<(usize, DyadicAtom), usize> = BTreeMap::new();
                members.iter().all(|&i| {
                    let t = &spectrum.tuples()[i];
                    let g = cluster_of[&(t.block, t.col)];
                    *seen.entry((t.block, atom_of(&shifted(&t.lambda, k), m))).or_insert(g) == g
                })
            })
            .unwrap_or(MAX_LEVEL);
        let scale = cap.fundamental(tau).max(1.0);
        let wanted = (0..=MAX_LEVEL).find(|&m| (-(m as f64) - 1.0).exp2() * scale <= budget);
        let (level, exact) = match wanted {
            Some(m) if m < iso => (m, false),
            _ => (iso, true),
        };

        let mut groups: BTreeMap<(usize, Vec<i64>, usize), Vec<usize>> = BTreeMap::new();
        for &i in members {
            let t = &spectrum.tuples()[i];
            let key = if exact {
                (t.block, Vec::new(), cluster_of[&(t.block, t.col)])
            } else {
                (t.block, atom_of(&shifted(&t.lambda, k), level).index, 0)
            };
            groups.entry(key).or_default().push(i);
        }
        for ((block, atom, _), idx) in groups {
            let value: Vec<f64> = if exact {
                spectrum.tuples()[idx[0]].lambda.clone()
            } else {
                let a = DyadicAtom { level, index: atom };
                a.centre().iter().zip(k).map(|(c, &kk)| c + kk as f64).collect()
            };
            for &i in &idx {
                values[i] = if exact { spectrum.tuples()[i].lambda.clone() } else { value.clone() };
            }
            if exact {
                for &i in &idx {
                    let t = &spectrum.tuples()[i];
                    family.push(FamilyMember { block, coords: vec![t.col], basis: None, value: t.lambda.clone() });
                }
            } else {
                let coords = idx.iter().map(|&i| spectrum.tuples()[i].col).collect();
                family.push(FamilyMember { block, coords, basis: None, value });
            }
        }

        let residuals = (0..n)
            .map(|j| {
                let mu = StepFunction::rearrange(members.iter().map(|&i| {
                    let t = &spectrum.tuples()[i];
                    ((t.lambda[j] - values[i][j]).abs(), alg.weight(t.block))
                }))?;
                space_norm(&mu, &cap)
            })
            .collect::<Result<Vec<_>>>()?;

        let in_window: BTreeSet<usize> = members.iter().copied().collect();
        let mut hulls = Vec::new();
        for pair in &pairs {
            let d = alg.dim(pair.block);
            let mut w: Vec<Mat<C64>> = (0..alg.num_blocks()).map(|b| Mat::zeros(alg.dim(b), 0)).collect();
            let cols: Vec<usize> = (0..d)
                .filter(|&c| in_window.contains(&index_of(&spectrum, pair.block, c)))
                .collect();
            let norm = cols.iter().map(|&c| pair.vector[c].norm_sqr()).sum::<f64>().sqrt();
            if norm <= 1e-12 {
                continue;
            }
            w[pair.block] = Mat::from_fn(d, 1, |c, _| {
                if cols.binary_search(&c).is_ok() {
                    pair.vector[c] / norm
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let m = level.min(iso);
            let p_m = approx_unit_frame(&spectrum, &w, m, |t| {
                in_window.contains(&index_of(&spectrum, t.block, t.col)).then(|| shifted(&t.lambda, k))
            })?;
            let unit = report(&spectrum, p_m, alg.weight(pair.block), m)?;
            let tau_hull = pair
                .hull
                .pieces()
                .iter()
                .filter(|p| p.coords.iter().all(|&c| in_window.contains(&index_of(&spectrum, p.block, c))))
                .map(|p| alg.weight(p.block) * p.rank() as f64)
                .sum();
            hulls.push(HullSummary { tau_hull, bounds_hold: unit.bounds_hold(spectrum_scale(&spectrum)), unit: unit.summary() });
        }

        window_reports.push(WindowReport { index: k.clone(), budget, level, exact, tau, residuals, hulls });
    }

    let mut residuals = Vec::with_capacity(n);
    let mut residuals_inf = Vec::with_capacity(n);
    for j in 0..n {
        let mu = StepFunction::rearrange(
            spectrum
                .tuples()
                .iter()
                .zip(&values)
                .map(|(t, v)| ((t.lambda[j] - v[j]).abs(), alg.weight(t.block))),
        )?;
        residuals.push(space_norm(&mu, &cap)?);
        residuals_inf.push(mu.sup());
    }
    Ok(TupleReport {
        report: DiagonalizationReport {
            spectrum,
            family,
            space: space.clone(),
            residuals,
            residuals_inf,
            bound: 3f64.powi(n as i32) * epsilon,
        },
        windows: window_reports,
        budget_sum,
        epsilon,
    })
}

fn index_of(spectrum: &JointSpectrum, block: usize, col: usize) -> usize {
    let t = spectrum.tuple_at(block, col);
    spectrum.tuples().iter().position(|u| std::ptr::eq(u, t)).expect("tuple belongs to spectrum")
}

fn spectrum_scale(spectrum: &JointSpectrum) -> f64 {
    spectrum.tuples().iter().flat_map(|t| t.lambda.iter()).fold(0.0f64, |a, x| a.max(x.abs()))
}
