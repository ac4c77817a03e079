//! Upper estimates of the quasicentral modulus on finite models.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::construct::{build_approx_unit, EIGENSPACE_TOL};
use crate::jointspec::{joint_diagonalize, JointSpectrum, DEFAULT_DTOL};
use crate::ncalg::{dense, HermTuple, MatOp};
use crate::symfun::SpaceSpec;
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperPoint {
    pub m: u32,
    pub rank: usize,
    pub value: f64,
}

/// Commutator norms of a schedule of approximate units, and optionally a
/// certified lower bound for the same space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub space: String,
    pub points: Vec<UpperPoint>,
    /// Running minimum of `points[..].value`.
    pub upper: Vec<f64>,
    pub lower: Option<f64>,
    pub iterations: usize,
    pub schedule: String,
}

impl ModulusEstimate {
    pub fn best_upper(&self) -> Option<f64> {
        self.upper.last().copied()
    }

    /// `lower ≤ upper + 1e-6 · scale` whenever both are present.
    pub fn consistent(&self, scale: f64) -> bool {
        match (self.lower, self.best_upper()) {
            (Some(l), Some(u)) => l <= u + 1e-6 * scale.max(1.0),
            _ => true,
        }
    }
}

/// `max_j ‖[p_m, α(j)]‖_E` for each `m` in `m_list`.
pub fn modulus_upper_schedule(alpha: &HermTuple, q: &MatOp, space: &SpaceSpec, m_list: &[u32]) -> Result<ModulusEstimate> {
    space.validate()?;
    let spectrum = joint_diagonalize(alpha, DEFAULT_DTOL)?;
    let mut points = Vec::with_capacity(m_list.len());
    let mut upper = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let unit = build_approx_unit(&spectrum, q, m)?;
        let value = (0..alpha.len())
            .map(|j| unit.p_m.commutator_norm(&spectrum, j, space))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let best = upper.last().map_or(value, |&u: &f64| u.min(value));
        upper.push(best);
        points.push(UpperPoint { m, rank: unit.p_m.rank(), value });
    }
    Ok(ModulusEstimate {
        space: space.to_string(),
        points,
        upper,
        lower: None,
        iterations: m_list.len(),
        schedule: format!("{m_list:?}"),
    })
}

/// Step size rule of the projected subgradient method.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    /// `scale · diam / √(k+1)` along the normalized subgradient.
    InvSqrt { scale: f64 },
    /// `(f(r_k) − target) / ‖g_k‖²`.
    Polyak { target: f64 },
}

/// Descent direction of `modulus_inf_optimize`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Subgradient of `r ↦ max_j ‖[r, α(j)]‖_E` from the singular value
    /// decomposition of the commutator and the step weights of the norm.
    Subgradient { step: StepSchedule },
    /// Polyak steps for `r ↦ ‖r − E_α(r)‖₂`, the distance to the commutant of
    /// `α`, which vanishes exactly where the objective does; each step is the
    /// projection `E_α` onto the commutant. The order interval is restored
    /// by one round of clippings per step; every `20` steps the iterate is
    /// projected exactly and the objective is evaluated there.
    CommutantPolyak,
}

const FEASIBLE_EVERY: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub iters: usize,
    pub method: Method,
    pub dykstra_rounds: usize,
    pub dykstra_tol: f64,
    /// Stop as soon as the objective is at most this.
    pub stop_below: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            iters: 1000,
            method: Method::CommutantPolyak,
            dykstra_rounds: 50,
            dykstra_tol: 1e-8,
            stop_below: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub value: f64,
    pub r: MatOp,
    pub iterations: usize,
    /// Best value after each iteration.
    pub history: Vec<f64>,
    /// Largest `‖(a0 − r)_+‖₂` left by the projections.
    pub projection_residual: f64,
}

/// `r ↦ max_j ‖[r, α(j)]‖_E` in the joint eigenbasis, where the commutator
/// is an entrywise product.
struct FrameObjective {
    lambdas: Vec<Vec<Vec<f64>>>,
    weights: Vec<f64>,
    n: usize,
    space: SpaceSpec,
}

impl FrameObjective {
    fn new(spectrum: &JointSpectrum, space: &SpaceSpec) -> Self {
        let alg = spectrum.algebra();
        FrameObjective {
            lambdas: (0..alg.num_blocks()).map(|b| spectrum.block_lambdas(b).map(<[f64]>::to_vec).collect()).collect(),
            weights: (0..alg.num_blocks()).map(|b| alg.weight(b)).collect(),
            n: spectrum.n(),
            space: space.clone(),
        }
    }

    fn gap(&self, b: usize, j: usize, i: usize, k: usize) -> f64 {
        self.lambdas[b][k][j] - self.lambdas[b][i][j]
    }

    /// Value and a Hermitian subgradient.
    fn eval(&self, r: &[Mat<C64>]) -> Result<(f64, Vec<Mat<C64>>)> {
        let mut best: Option<(f64, Vec<Mat<C64>>)> = None;
        for j in 0..self.n {
            let mut svds = Vec::with_capacity(r.len());
            let mut items = Vec::new();
            for (b, rb) in r.iter().enumerate() {
                let x = Mat::from_fn(rb.nrows(), rb.ncols(), |i, k| rb[(i, k)] * self.gap(b, j, i, k));
                let svd = dense::thin_svd(x.as_ref())?;
                for (idx, &s) in svd.1.iter().enumerate() {
                    items.push((s, self.weights[b], b, idx));
                }
                svds.push(svd);
            }
            items.sort_by(|a, b| b.0.total_cmp(&a.0));
            let (value, coef) = norm_coefficients(&self.space, &items)?;
            if best.as_ref().is_some_and(|(v, _)| *v >= value) {
                continue;
            }
            let mut grad: Vec<Mat<C64>> = r.iter().map(|rb| Mat::zeros(rb.nrows(), rb.ncols())).collect();
            for (&(_, _, b, idx), &c) in items.iter().zip(&coef) {
                if c == 0.0 {
                    continue;
                }
                let (u, _, v) = &svds[b];
                let g = &mut grad[b];
                for k in 0..g.ncols() {
                    let vk = v[(k, idx)].conj() * c;
                    for i in 0..g.nrows() {
                        g[(i, k)] += u[(i, idx)] * vk;
                    }
                }
            }
            for (b, g) in grad.iter_mut().enumerate() {
                let h = Mat::from_fn(g.nrows(), g.ncols(), |i, k| g[(i, k)] * self.gap(b, j, i, k));
                *g = dense::hermitian_part(h.as_ref());
            }
            best = Some((value, grad));
        }
        Ok(best.unwrap_or_else(|| (0.0, r.iter().map(|rb| Mat::zeros(rb.nrows(), rb.ncols())).collect())))
    }
}

/// `‖μ‖_E` and the weights `c_i ≥ 0` with `‖μ‖_E = Σ c_i s_i` for singular
/// values `s_i` sorted nonincreasingly with trace weights `w_i`.
fn norm_coefficients(space: &SpaceSpec, items: &[(f64, f64, usize, usize)]) -> Result<(f64, Vec<f64>)> {
    let mut coef = vec![0.0; items.len()];
    match space {
        SpaceSpec::LInfinity => {
            if let Some(first) = items.first() {
                coef[0] = 1.0;
                return Ok((first.0, coef));
            }
            Ok((0.0, coef))
        }
        SpaceSpec::IntersectLInf(base) => {
            let (v, c) = norm_coefficients(base, items)?;
            let (vi, ci) = norm_coefficients(&SpaceSpec::LInfinity, items)?;
            Ok(if v >= vi { (v, c) } else { (vi, ci) })
        }
        SpaceSpec::Lorentz(_) | SpaceSpec::Ln1(_) => {
            let psi = space.lorentz_psi().ok_or_else(|| Error::InvalidPsi(space.to_string()))?;
            let mut t = 0.0;
            let mut prev = 0.0;
            let mut value = 0.0;
            for (c, item) in coef.iter_mut().zip(items) {
                t += item.1;
                let next = psi.eval(t);
                *c = next - prev;
                value += item.0 * *c;
                prev = next;
            }
            Ok((value, coef))
        }
    }
}

fn frob_sq(blocks: &[Mat<C64>]) -> f64 {
    blocks.iter().map(|m| m.norm_l2().powi(2)).sum()
}

/// `f(x)` for Hermitian `x`.
fn spectral_map(x: &Mat<C64>, f: impl Fn(f64) -> f64) -> Result<Mat<C64>> {
    let (vals, u) = dense::herm_eig(dense::hermitian_part(x.as_ref()).as_ref())?;
    let scaled = Mat::from_fn(u.nrows(), u.ncols(), |i, k| u[(i, k)] * f(vals[k]));
    Ok(&scaled * u.adjoint())
}

fn positive_part(x: &Mat<C64>) -> Result<Mat<C64>> {
    spectral_map(x, |v| v.max(0.0))
}



/// Projection onto `{a0 ≤ r ≤ 1}` by Dykstra's alternating clippings.
fn project_interval(x: &Mat<C64>, a0: &Mat<C64>, rounds: usize, tol: f64) -> Result<(Mat<C64>, f64)> {
    let d = x.nrows();
    let id = Mat::<C64>::identity(d, d);
    let mut cur = x.clone();
    let mut p = Mat::<C64>::zeros(d, d);
    let mut q = Mat::<C64>::zeros(d, d);
    let mut residual = f64::INFINITY;
    for _ in 0..rounds.max(1) {
        let xp = &cur + &p;
        let y = a0 + &positive_part(&(&xp - a0))?;
        p = &xp - &y;
        let yq = &y + &q;
        cur = &id - &positive_part(&(&id - &yq))?;
        q = &yq - &cur;
        let lower_gap = positive_part(&(a0 - &cur))?;
        residual = lower_gap.norm_l2();
        if residual <= tol {
            break;
        }
    }
    Ok((cur, residual))
}

fn check_contraction(a0: &MatOp) -> Result<()> {
    if !a0.is_hermitian() {
        return Err(Error::InvalidOperator("a0 must be hermitian".into()));
    }
    for b in 0..a0.algebra().num_blocks() {
        for v in dense::herm_eigvals(a0.block(b))? {
            if !(-1e-10..=1.0 + 1e-10).contains(&v) {
                return Err(Error::InvalidOperator(format!("a0 has eigenvalue {v} outside [0, 1]")));
            }
        }
    }
    Ok(())
}

/// Minimizes `r ↦ max_j ‖[r, α(j)]‖_E` over `{a0 ≤ r ≤ 1}` starting from
/// `r = a0`; every iterate is projected back onto the order interval.
pub fn modulus_inf_optimize(alpha: &HermTuple, a0: &MatOp, space: &SpaceSpec, opts: &OptimizeOptions) -> Result<OptimizeResult> {
    space.validate()?;
    crate::ncalg::algebra::same_algebra(alpha.algebra(), a0.algebra())?;
    check_contraction(a0)?;
    let spectrum = joint_diagonalize(alpha, DEFAULT_DTOL)?;
    let objective = FrameObjective::new(&spectrum, space);
    let nb = spectrum.algebra().num_blocks();
    let a0f: Vec<Mat<C64>> = (0..nb).map(|b| spectrum.basis(b).conjugate_adjoint(a0.block(b))).collect();
    let diam = a0f
        .iter()
        .map(|m| (&Mat::<C64>::identity(m.nrows(), m.ncols()) - m).norm_l2().powi(2))
        .sum::<f64>()
        .sqrt()
        .max(1e-12);
    let labels: Vec<Vec<usize>> = spectrum
        .eigenspaces(EIGENSPACE_TOL)
        .into_iter()
        .enumerate()
        .map(|(b, groups)| {
            let mut l = vec![0; spectrum.algebra().dim(b)];
            for (g, cols) in groups.into_iter().enumerate() {
                cols.into_iter().for_each(|c| l[c] = g);
            }
            l
        })
        .collect();

    let mut r = a0f.clone();
    let (mut value, mut grad) = objective.eval(&r)?;
    let mut best = (value, r.clone());
    let mut history = Vec::with_capacity(opts.iters);
    let mut projection_residual = 0.0f64;
    let mut it = 0;
    while it < opts.iters && best.0 > opts.stop_below {
        match opts.method {
            Method::Subgradient { step } => {
                let g2 = frob_sq(&grad);
                if g2 == 0.0 {
                    break;
                }
                let eta = match step {
                    StepSchedule::InvSqrt { scale } => scale * diam / ((it + 1) as f64).sqrt() / g2.sqrt(),
                    StepSchedule::Polyak { target } => (value - target).max(0.0) / g2,
                };
                for b in 0..nb {
                    let moved = &r[b] - &(&grad[b] * faer::Scale(C64::new(eta, 0.0)));
                    let (p, res) = project_interval(&moved, &a0f[b], opts.dykstra_rounds, opts.dykstra_tol)?;
                    projection_residual = projection_residual.max(res);
                    r[b] = p;
                }
                (value, grad) = objective.eval(&r)?;
                if value < best.0 {
                    best = (value, r.clone());
                }
            }
            Method::CommutantPolyak => {
                for (b, l) in labels.iter().enumerate() {
                    let rb = &r[b];
                    let kept = Mat::from_fn(rb.nrows(), rb.ncols(), |i, k| if l[i] == l[k] { rb[(i, k)] } else { C64::new(0.0, 0.0) });
                    let above = &a0f[b] + &positive_part(&(&kept - &a0f[b]))?;
                    let id = Mat::<C64>::identity(rb.nrows(), rb.ncols());
                    r[b] = &id - &positive_part(&(&id - &above))?;
                }
                if (it + 1) % FEASIBLE_EVERY == 0 || it + 1 == opts.iters {
                    let mut feasible = Vec::with_capacity(nb);
                    for b in 0..nb {
                        let (p, res) = project_interval(&r[b], &a0f[b], opts.dykstra_rounds, opts.dykstra_tol)?;
                        projection_residual = projection_residual.max(res);
                        feasible.push(p);
                    }
                    let (v, _) = objective.eval(&feasible)?;
                    if v < best.0 {
                        best = (v, feasible);
                    }
                }
            }
        }
        history.push(best.0);
        it += 1;
    }
    let blocks = (0..nb).map(|b| spectrum.basis(b).conjugate(best.1[b].as_ref())).collect();
    Ok(OptimizeResult {
        value: best.0,
        r: MatOp::hermitian(spectrum.algebra().clone(), blocks)?,
        iterations: it,
        history,
        projection_residual,
    })
}

/// `r = a0 + Σ_i c_i B_i` with `c` in a box.
#[derive(Clone, Debug)]
pub struct RestrictedProblem {
    pub a0: MatOp,
    pub directions: Vec<MatOp>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl RestrictedProblem {
    /// Directions `E_ik + E_ki` of the joint eigenbasis of `α` for pairs of
    /// distinct joint eigenvalues, so no direction commutes with `α`; the box
    /// is `[−half_width, half_width]` in every coordinate.
    pub fn off_commutant(alpha: &HermTuple, a0: MatOp, half_width: f64) -> Result<Self> {
        let spectrum = joint_diagonalize(alpha, DEFAULT_DTOL)?;
        let alg = spectrum.algebra().clone();
        let mut directions = Vec::new();
        for b in 0..alg.num_blocks() {
            let lam: Vec<&[f64]> = spectrum.block_lambdas(b).collect();
            for i in 0..lam.len() {
                for k in i + 1..lam.len() {
                    if lam[i].iter().zip(lam[k]).all(|(x, y)| (x - y).abs() <= 1e-10) {
                        continue;
                    }
                    let d = alg.dim(b);
                    let e = Mat::from_fn(d, d, |r, c| {
                        if (r, c) == (i, k) || (r, c) == (k, i) {
                            C64::new(1.0, 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    });
                    let blocks = (0..alg.num_blocks())
                        .map(|bb| if bb == b { spectrum.basis(b).conjugate(e.as_ref()) } else { Mat::zeros(alg.dim(bb), alg.dim(bb)) })
                        .collect();
                    directions.push(MatOp::hermitian(alg.clone(), blocks)?);
                }
            }
        }
        let k = directions.len();
        Ok(RestrictedProblem { a0, directions, lo: vec![-half_width; k], hi: vec![half_width; k] })
    }

    pub fn point(&self, c: &[f64]) -> Result<MatOp> {
        self.directions
            .iter()
            .zip(c)
            .try_fold(self.a0.clone(), |acc, (d, &ci)| acc.add(&d.scale_real(ci)))
    }

    fn clamp(&self, c: &mut [f64]) {
        for ((x, lo), hi) in c.iter_mut().zip(&self.lo).zip(&self.hi) {
            *x = x.clamp(*lo, *hi);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedResult {
    pub value: f64,
    pub coords: Vec<f64>,
    pub evaluations: usize,
}

struct RestrictedFrame {
    objective: FrameObjective,
    a0: Vec<Mat<C64>>,
    dirs: Vec<Vec<Mat<C64>>>,
}

impl RestrictedFrame {
    fn new(alpha: &HermTuple, problem: &RestrictedProblem, space: &SpaceSpec) -> Result<Self> {
        space.validate()?;
        if problem.lo.len() != problem.directions.len() || problem.hi.len() != problem.directions.len() {
            return Err(Error::InvalidOperator("box and directions differ in length".into()));
        }
        if problem.lo.iter().zip(&problem.hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidOperator("empty box".into()));
        }
        let spectrum = joint_diagonalize(alpha, DEFAULT_DTOL)?;
        let nb = spectrum.algebra().num_blocks();
        let to_frame = |x: &MatOp| -> Vec<Mat<C64>> { (0..nb).map(|b| spectrum.basis(b).conjugate_adjoint(x.block(b))).collect() };
        Ok(RestrictedFrame {
            a0: to_frame(&problem.a0),
            dirs: problem.directions.iter().map(to_frame).collect(),
            objective: FrameObjective::new(&spectrum, space),
        })
    }

    fn at(&self, c: &[f64]) -> Vec<Mat<C64>> {
        let mut r = self.a0.clone();
        for (d, &ci) in self.dirs.iter().zip(c) {
            for (rb, db) in r.iter_mut().zip(d) {
                *rb = &*rb + &(db * faer::Scale(C64::new(ci, 0.0)));
            }
        }
        r
    }

    fn eval(&self, c: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (v, h) = self.objective.eval(&self.at(c))?;
        let g = self
            .dirs
            .iter()
            .map(|d| {
                d.iter()
                    .zip(&h)
                    .map(|(db, hb)| {
                        let mut s = 0.0;
                        for k in 0..db.ncols() {
                            for i in 0..db.nrows() {
                                s += (hb[(i, k)].conj() * db[(i, k)]).re;
                            }
                        }
                        s
                    })
                    .sum()
            })
            .collect();
        Ok((v, g))
    }
}

/// Projected subgradient descent over the coordinate box of `problem`,
/// starting from its centre.
pub fn modulus_inf_restricted(
    alpha: &HermTuple,
    problem: &RestrictedProblem,
    space: &SpaceSpec,
    iters: usize,
    step: StepSchedule,
) -> Result<RestrictedResult> {
    let frame = RestrictedFrame::new(alpha, problem, space)?;
    let diam = problem.lo.iter().zip(&problem.hi).map(|(l, h)| (h - l).powi(2)).sum::<f64>().sqrt().max(1e-12);
    let mut c: Vec<f64> = problem.lo.iter().zip(&problem.hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let (mut value, mut grad) = frame.eval(&c)?;
    let mut best = RestrictedResult { value, coords: c.clone(), evaluations: 1 };
    for it in 0..iters {
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if g2 == 0.0 {
            break;
        }
        let eta = match step {
            StepSchedule::InvSqrt { scale } => scale * diam / ((it + 1) as f64).sqrt() / g2.sqrt(),
            StepSchedule::Polyak { target } => (value - target).max(0.0) / g2,
        };
        c.iter_mut().zip(&grad).for_each(|(x, g)| *x -= eta * g);
        problem.clamp(&mut c);
        (value, grad) = frame.eval(&c)?;
        best.evaluations += 1;
        if value < best.value {
            best.value = value;
            best.coords = c.clone();
        }
    }
    Ok(best)
}

/// Zooming grid search: `points` values per coordinate around the current
/// best, spacing halved after each of `rounds` passes.
pub fn grid_search_oracle(
    alpha: &HermTuple,
    problem: &RestrictedProblem,
    space: &SpaceSpec,
    points: usize,
    rounds: usize,
) -> Result<RestrictedResult> {
    if points < 2 {
        return Err(Error::InvalidOperator("grid needs at least two points per coordinate".into()));
    }
    let frame = RestrictedFrame::new(alpha, problem, space)?;
    let k = problem.directions.len();
    let mut centre: Vec<f64> = problem.lo.iter().zip(&problem.hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let mut half: Vec<f64> = problem.lo.iter().zip(&problem.hi).map(|(l, h)| 0.5 * (h - l)).collect();
    let mut best = RestrictedResult { value: frame.eval(&centre)?.0, coords: centre.clone(), evaluations: 1 };
    let total = points.checked_pow(k as u32).ok_or_else(|| Error::InvalidOperator("grid too large".into()))?;
    for _ in 0..rounds {
        for idx in 0..total {
            let mut rest = idx;
            let mut c = vec![0.0; k];
            for (i, x) in c.iter_mut().enumerate() {
                let p = rest % points;
                rest /= points;
                *x = centre[i] + half[i] * (2.0 * p as f64 / (points - 1) as f64 - 1.0);
            }
            problem.clamp(&mut c);
            let v = frame.eval(&c)?.0;
            best.evaluations += 1;
            if v < best.value {
                best.value = v;
                best.coords = c;
            }
        }
        centre.clone_from(&best.coords);
        half.iter_mut().for_each(|h| *h *= 0.5);
    }
    Ok(best)
}
