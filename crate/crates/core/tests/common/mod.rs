//! Property checks shared by the property tests and the acceptance harness.
#![allow(dead_code)]

use std::sync::Arc;

use faer::{Mat, Side};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semidiag::construct::{build_approx_unit, generating_decomposition, generating_hull};
use semidiag::jointspec::{joint_diagonalize, DyadicAtom, JointSpectrum, DEFAULT_DTOL};
use semidiag::ncalg::{Block, HermTuple, MatOp, TracedAlgebra};
use semidiag::symfun::{marcinkiewicz_norm, PsiFunction, SpaceSpec, StepFunction};
use semidiag::C64;

pub const CASES: u32 = 1000;

pub fn psi_strategy() -> impl Strategy<Value = PsiFunction> {
    let pow = || (1.0f64..6.0).prop_map(PsiFunction::power_root);
    let pwl = prop::collection::vec((0.05f64..5.0, 0.01f64..3.0), 1..6).prop_map(|v| {
        let mut slopes: Vec<f64> = v.iter().map(|x| x.1).collect();
        slopes.sort_by(|a, b| b.total_cmp(a));
        let (mut t, mut y) = (0.0, 0.0);
        let mut pts = vec![(0.0, 0.0)];
        for (w, s) in v.iter().map(|x| x.0).zip(slopes) {
            t += w;
            y += w * s;
            pts.push((t, y));
        }
        PsiFunction::piecewise_linear(pts).unwrap()
    });
    prop_oneof![
        pow(),
        Just(PsiFunction::identity()),
        (1u32..24).prop_map(PsiFunction::log_like),
        pwl,
        pow().prop_map(PsiFunction::min_with_identity),
        (0.1f64..5.0, pow()).prop_map(|(c, p)| p.scaled(c)),
    ]
}

pub fn space_strategy() -> impl Strategy<Value = SpaceSpec> {
    prop_oneof![
        psi_strategy().prop_map(SpaceSpec::Lorentz),
        (1u32..5).prop_map(SpaceSpec::Ln1),
        Just(SpaceSpec::LInfinity),
        psi_strategy().prop_map(|p| SpaceSpec::Lorentz(p).cap_inf()),
    ]
}

pub fn step_strategy() -> impl Strategy<Value = StepFunction> {
    prop::collection::vec((0.01f64..10.0, 0.01f64..5.0), 0..8).prop_map(|v| StepFunction::rearrange(v).unwrap())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_algebra(rng: &mut ChaCha8Rng) -> Arc<TracedAlgebra> {
    let nb = rng.random_range(1..=3);
    let blocks = (0..nb)
        .map(|_| Block { dim: rng.random_range(1..=4), weight: rng.random_range(0.1..2.0) })
        .collect();
    TracedAlgebra::new(blocks).unwrap()
}

fn gaussian_like(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat<C64> {
    Mat::from_fn(r, c, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Random operator; each block has a random rank.
pub fn random_op(rng: &mut ChaCha8Rng, alg: &Arc<TracedAlgebra>) -> MatOp {
    let blocks = alg
        .blocks()
        .iter()
        .map(|b| {
            let r = rng.random_range(0..=b.dim);
            let a = gaussian_like(rng, b.dim, r);
            let c = gaussian_like(rng, r, b.dim);
            &a * &c
        })
        .collect();
    MatOp::new(alg.clone(), blocks).unwrap()
}

pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> Mat<C64> {
    gaussian_like(rng, d, d).qr().compute_Q()
}

pub fn norm_axioms(space: &SpaceSpec, psi: &PsiFunction, f: &StepFunction, g: &StepFunction, c: f64) -> Result<(), TestCaseError> {
    let n = |x: &StepFunction| space.norm(x).unwrap();
    let (nf, ng) = (n(f), n(g));
    ensure(close(n(&f.scale(c)), c * nf, 1e-10), || format!("homogeneity: {} vs {}", n(&f.scale(c)), c * nf))?;
    ensure(n(&f.add(g)) <= nf + ng + 1e-10 * (1.0 + nf + ng), || "triangle inequality".into())?;
    ensure(nf <= n(&f.max(g)) * (1.0 + 1e-12) + 1e-12, || "monotonicity".into())?;
    ensure((nf == 0.0) == f.is_zero(), || format!("definiteness: norm {nf}"))?;

    let m = |x: &StepFunction| marcinkiewicz_norm(x, psi).unwrap();
    let (mf, mg) = (m(f), m(g));
    ensure(close(m(&f.scale(c)), c * mf, 1e-10), || "marcinkiewicz homogeneity".into())?;
    ensure(m(&f.add(g)) <= mf + mg + 1e-10 * (1.0 + mf + mg), || "marcinkiewicz triangle".into())?;
    ensure(mf <= m(&f.max(g)) * (1.0 + 1e-12) + 1e-12, || "marcinkiewicz monotonicity".into())?;
    Ok(())
}

/// `μ(t; x) = inf{s ≥ 0 : d_x(s) ≤ t}` from the eigenvalues of `x*x`.
pub fn mu_inversion(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = rng(seed);
    let alg = random_algebra(&mut rng);
    let x = random_op(&mut rng, &alg);
    let mu = x.singular_value_function().unwrap();
    let mut sv: Vec<(f64, f64)> = Vec::new();
    for (b, blk) in x.blocks().iter().enumerate() {
        let xx = blk.adjoint() * blk;
        for l in xx.self_adjoint_eigenvalues(Side::Lower).unwrap() {
            sv.push((l.max(0.0).sqrt(), alg.weight(b)));
        }
    }
    let smax = sv.iter().map(|p| p.0).fold(0.0, f64::max);
    let dist = |s: f64| sv.iter().filter(|p| p.0 > s).map(|p| p.1).sum::<f64>();
    let mut cands: Vec<f64> = sv.iter().map(|p| p.0).collect();
    cands.push(0.0);
    let cuts: Vec<f64> = cands.iter().map(|&c| dist(c)).collect();
    let total = alg.total_trace();
    for _ in 0..8 {
        let t = rng.random_range(0.0..1.2 * total);
        if t == 0.0 || cuts.iter().any(|&d| (d - t).abs() < 1e-6) {
            continue;
        }
        let oracle = cands.iter().copied().filter(|&c| dist(c) <= t).fold(f64::INFINITY, f64::min);
        let got = mu.eval(t);
        ensure((got - oracle).abs() <= 1e-6 * (1.0 + smax), || format!("mu({t}) = {got}, oracle {oracle}"))?;
    }
    let l1: f64 = sv.iter().map(|(s, w)| s * w).sum();
    ensure(close(mu.integral(), l1, 1e-6), || format!("integral of mu {} vs {l1}", mu.integral()))
}

/// `|τ(p y)| ≤ ∫_0^{τ(p)} μ(y)`.
pub fn trace_projection_bound(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = rng(seed);
    let alg = random_algebra(&mut rng);
    let p = random_op(&mut rng, &alg).range_projection(None).unwrap();
    let y = random_op(&mut rng, &alg);
    let lhs = p.mul(&y).unwrap().trace().norm();
    let rhs = y.singular_value_function().unwrap().integral_to(p.trace().re);
    ensure(lhs <= rhs + 1e-9 * (1.0 + rhs), || format!("|tau(py)| = {lhs} > {rhs}"))
}

pub fn trace_cyclic(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = rng(seed);
    let alg = random_algebra(&mut rng);
    let x = random_op(&mut rng, &alg);
    let y = random_op(&mut rng, &alg);
    let (a, b) = (x.mul(&y).unwrap().trace(), y.mul(&x).unwrap().trace());
    let scale = x.norm_inf().unwrap() * y.norm_inf().unwrap() * alg.total_trace();
    ensure((a - b).norm() <= 1e-12 * (1.0 + scale) * 16.0, || format!("tau(xy) = {a}, tau(yx) = {b}"))
}

/// `‖a‖_E ≤ ‖a‖_∞ φ_E(τ(𝔩(a)))`.
pub fn support_norm_bound(seed: u64, space: &SpaceSpec) -> Result<(), TestCaseError> {
    let mut rng = rng(seed);
    let alg = random_algebra(&mut rng);
    let a = random_op(&mut rng, &alg);
    let lhs = a.symmetric_norm(space).unwrap();
    let rhs = a.norm_inf().unwrap() * space.fundamental(a.left_support().unwrap().trace().re);
    ensure(lhs <= rhs * (1.0 + 1e-9) + 1e-12, || format!("{lhs} > {rhs} for {space}"))
}

/// `φ(θt) ≤ max{θ, 1} φ(t)`.
pub fn fundamental_dilation(space: &SpaceSpec, theta: f64, t: f64) -> Result<(), TestCaseError> {
    let lhs = space.fundamental(theta * t);
    let rhs = theta.max(1.0) * space.fundamental(t);
    ensure(lhs <= rhs * (1.0 + 1e-12) + 1e-15, || format!("phi({theta}·{t}) = {lhs} > {rhs} for {space}"))
}

/// Diagonal tuple conjugated blockwise by random unitaries; returns the tuple,
/// the generating eigen-tuples and the unitaries.
pub fn random_commuting_tuple(rng: &mut ChaCha8Rng) -> (HermTuple, Vec<Vec<Vec<f64>>>, Vec<Mat<C64>>) {
    let alg = random_algebra(rng);
    let n = rng.random_range(1..=3);
    let coarse = rng.random_bool(0.5);
    let lambdas: Vec<Vec<Vec<f64>>> = alg
        .blocks()
        .iter()
        .map(|b| {
            (0..b.dim)
                .map(|_| {
                    (0..n)
                        .map(|_| if coarse { rng.random_range(0..16) as f64 / 16.0 } else { rng.random_range(0.0..1.0) })
                        .collect()
                })
                .collect()
        })
        .collect();
    let us: Vec<Mat<C64>> = alg.blocks().iter().map(|b| random_unitary(rng, b.dim)).collect();
    let entries = (0..n)
        .map(|j| {
            let blocks = lambdas
                .iter()
                .zip(&us)
                .map(|(ls, u)| {
                    let d = Mat::from_fn(ls.len(), ls.len(), |i, k| if i == k { C64::new(ls[i][j], 0.0) } else { C64::new(0.0, 0.0) });
                    let m = u * &d * u.adjoint();
                    Mat::from_fn(m.nrows(), m.ncols(), |i, k| (m[(i, k)] + m[(k, i)].conj()) * 0.5)
                })
                .collect();
            MatOp::hermitian(alg.clone(), blocks).unwrap()
        })
        .collect();
    (HermTuple::new(entries).unwrap(), lambdas, us)
}

fn oracle_atom(alg: &Arc<TracedAlgebra>, lambdas: &[Vec<Vec<f64>>], us: &[Mat<C64>], atom: &DyadicAtom) -> MatOp {
    let blocks = lambdas
        .iter()
        .zip(us)
        .map(|(ls, u)| {
            let sel: Vec<f64> = ls.iter().map(|l| if semidiag::jointspec::atom_of(l, atom.level) == *atom { 1.0 } else { 0.0 }).collect();
            let d = Mat::from_fn(ls.len(), ls.len(), |i, k| if i == k { C64::new(sel[i], 0.0) } else { C64::new(0.0, 0.0) });
            u * &d * u.adjoint()
        })
        .collect();
    MatOp::new(alg.clone(), blocks).unwrap()
}

/// Joint diagonalization recovers the eigen-tuples; atom projections agree
/// with the generating unitaries, are orthogonal, sum to 1 and split into
/// their children; approximate units increase with `m` and stay below their
/// bounds; generating hulls are orthogonal and cover the algebra.
pub fn atoms_and_projections(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = rng(seed);
    let (tuple, lambdas, us) = random_commuting_tuple(&mut rng);
    let alg = tuple.get(0).algebra().clone();
    let spectrum = joint_diagonalize(&tuple, DEFAULT_DTOL).map_err(|e| TestCaseError::fail(e.to_string()))?;

    for (b, ls) in lambdas.iter().enumerate() {
        let mut got: Vec<Vec<f64>> = spectrum.block_lambdas(b).map(<[f64]>::to_vec).collect();
        ensure(got.len() == ls.len(), || format!("block {b}: {} tuples for {}", got.len(), ls.len()))?;
        for w in ls {
            let dist = |g: &Vec<f64>| g.iter().zip(w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let (i, err) = got.iter().map(dist).enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
            ensure(err < 1e-9, || format!("eigen-tuple {w:?} off by {err}"))?;
            got.swap_remove(i);
        }
    }

    let one = MatOp::identity(alg.clone());
    for m in 0..4u32 {
        let atoms: Vec<DyadicAtom> = spectrum.atom_partition(m).unwrap().into_keys().collect();
        let projs: Vec<MatOp> = atoms.iter().map(|a| spectrum.atom_projection(a)).collect();
        let sum = projs.iter().fold(MatOp::zero(alg.clone()), |acc, p| acc.add(p).unwrap());
        ensure(sum.max_abs_diff(&one).unwrap() < 1e-9, || format!("atoms of level {m} do not sum to 1"))?;
        for (i, a) in atoms.iter().enumerate() {
            let oracle = oracle_atom(&alg, &lambdas, &us, a);
            ensure(projs[i].max_abs_diff(&oracle).unwrap() < 1e-8, || format!("atom {a:?} differs from oracle"))?;
            for pj in &projs[i + 1..] {
                let prod = projs[i].mul(pj).unwrap();
                ensure(prod.norm_inf().unwrap() < 1e-9, || "atoms not orthogonal".into())?;
            }
            let children = spectrum
                .atom_partition(m + 1)
                .unwrap()
                .into_keys()
                .filter(|c| c.parent().as_ref() == Some(a))
                .fold(MatOp::zero(alg.clone()), |acc, c| acc.add(&spectrum.atom_projection(&c)).unwrap());
            ensure(children.max_abs_diff(&projs[i]).unwrap() < 1e-9, || "children do not add up to their parent".into())?;
        }
    }

    approx_units_and_hulls(&mut rng, &spectrum)
}

fn approx_units_and_hulls(rng: &mut ChaCha8Rng, spectrum: &JointSpectrum) -> Result<(), TestCaseError> {
    let alg = spectrum.algebra().clone();
    let b = rng.random_range(0..alg.num_blocks());
    let v: Vec<C64> = (0..alg.dim(b)).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let q = MatOp::vector_projection(alg.clone(), b, &v).unwrap();
    let tau_q = q.trace().re;
    let mut prev = None;
    for m in 0..5u32 {
        let unit = build_approx_unit(spectrum, &q, m).unwrap();
        ensure(unit.inf_comm <= (-(m as f64)).exp2() + 1e-9, || format!("commutator {} at m = {m}", unit.inf_comm))?;
        ensure(unit.tau_pm <= ((m as usize * spectrum.n()) as f64).exp2() * tau_q * (1.0 + 1e-9), || "trace bound".into())?;
        let p = unit.materialize(spectrum).unwrap();
        ensure(p.is_projection(), || "p_m is not a projection".into())?;
        ensure(p.mul(&q).unwrap().max_abs_diff(&q).unwrap() < 1e-8, || "q is not below p_m".into())?;
        if let Some(prev) = &prev {
            let defect = semidiag::construct::SpectralProjection::containment_defect(prev, &unit.p_m);
            ensure(defect < 1e-8, || format!("p_{} is not below p_{m}: {defect}", m - 1))?;
        }
        prev = Some(unit.p_m);
    }

    let hull = generating_hull(spectrum, &q).unwrap();
    ensure(hull.trace() <= alg.total_trace() + 1e-12, || "hull trace".into())?;
    let pairs = generating_decomposition(spectrum).unwrap();
    let total: usize = pairs.iter().map(|p| p.hull.rank()).sum();
    ensure(total == (0..alg.num_blocks()).map(|b| alg.dim(b)).sum::<usize>(), || format!("hull ranks sum to {total}"))?;
    for (i, p) in pairs.iter().enumerate() {
        let q = p.q_op(spectrum).unwrap();
        let h = p.hull_op(spectrum).unwrap();
        ensure(h.mul(&q).unwrap().max_abs_diff(&q).unwrap() < 1e-8, || "q_k not below its hull".into())?;
        for o in &pairs[i + 1..] {
            ensure(p.hull.overlap(&o.hull) < 1e-8, || "hulls overlap".into())?;
        }
    }
    Ok(())
}

/// Runs a suite over `cases` deterministic cases.
pub fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), TestError<S::Value>> {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test)
}

/// The named property suites with `cases` cases each.
pub fn suites(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    vec![
        (
            "norm axioms and monotonicity",
            (run(cases, (space_strategy(), psi_strategy(), step_strategy(), step_strategy(), 0.01f64..100.0), |(s, p, f, g, c)| {
                norm_axioms(&s, &p, &f, &g, c)
            })
            .map_err(|e| e.to_string())),
        ),
        ("mu inversion oracle", (run(cases, any::<u64>(), mu_inversion).map_err(|e| e.to_string()))),
        ("trace of p y bounded by integral of mu", (run(cases, any::<u64>(), trace_projection_bound).map_err(|e| e.to_string()))),
        ("trace is cyclic", (run(cases, any::<u64>(), trace_cyclic).map_err(|e| e.to_string()))),
        (
            "support norm bound",
            (run(cases, (any::<u64>(), space_strategy()), |(seed, s)| support_norm_bound(seed, &s)).map_err(|e| e.to_string())),
        ),
        ("atoms, projections and hulls", (run(cases, any::<u64>(), atoms_and_projections).map_err(|e| e.to_string()))),
        (
            "fundamental function dilation",
            (run(cases, (space_strategy(), 1e-3f64..1e3, 1e-3f64..1e3), |(s, th, t)| fundamental_dilation(&s, th, t))
                .map_err(|e| e.to_string())),
        ),
    ]
}
