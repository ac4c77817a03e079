mod common;

use faer::Mat;
use proptest::prelude::*;
use rand::Rng;

use common::{run, CASES};
use semidiag::certify::BandedOp;
use semidiag::construct::telescoping_defect;
use semidiag::ncalg::{MatOp, TracedAlgebra};
use semidiag::C64;

fn check<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) {
    if let Err(e) = r {
        panic!("{e}");
    }
}

#[test]
fn norm_axioms_and_monotonicity() {
    let s = (common::space_strategy(), common::psi_strategy(), common::step_strategy(), common::step_strategy(), 0.01f64..100.0);
    check(run(CASES, s, |(s, p, f, g, c)| common::norm_axioms(&s, &p, &f, &g, c)));
}

#[test]
fn mu_matches_distribution_inverse() {
    check(run(CASES, any::<u64>(), common::mu_inversion));
}

#[test]
fn trace_against_projection_is_bounded() {
    check(run(CASES, any::<u64>(), common::trace_projection_bound));
}

#[test]
fn trace_is_cyclic() {
    check(run(CASES, any::<u64>(), common::trace_cyclic));
}

#[test]
fn norm_bounded_by_support() {
    check(run(CASES, (any::<u64>(), common::space_strategy()), |(seed, s)| common::support_norm_bound(seed, &s)));
}

#[test]
fn fundamental_function_dilation() {
    check(run(CASES, (common::space_strategy(), 1e-3f64..1e3, 1e-3f64..1e3), |(s, th, t)| {
        common::fundamental_dilation(&s, th, t)
    }));
}

#[test]
fn atoms_projections_and_hulls() {
    check(run(CASES, any::<u64>(), common::atoms_and_projections));
}

/// Nested projections `q_1 ≤ ... ≤ q_L = 1` from a random flag.
fn random_chain(seed: u64, d: usize) -> (MatOp, Vec<MatOp>) {
    let mut rng = common::rng(seed);
    let alg = TracedAlgebra::single(d, 1.0 / d as f64).unwrap();
    let u = common::random_unitary(&mut rng, d);
    let mut ranks: Vec<usize> = (0..rng.random_range(1..5)).map(|_| rng.random_range(0..=d)).collect();
    ranks.push(d);
    ranks.sort_unstable();
    let chain = ranks
        .iter()
        .map(|&r| {
            let p = Mat::from_fn(d, d, |i, k| (0..r).map(|c| u[(i, c)] * u[(k, c)].conj()).sum::<C64>());
            MatOp::new(alg.clone(), vec![p]).unwrap()
        })
        .collect();
    let g = Mat::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let a = MatOp::hermitian(alg, vec![Mat::from_fn(d, d, |i, k| (g[(i, k)] + g[(k, i)].conj()) * 0.5)]).unwrap();
    (a, chain)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn telescoping_identity(seed in any::<u64>(), d in 1usize..9) {
        let (a, chain) = random_chain(seed, d);
        let defect = telescoping_defect(&a, &chain).unwrap();
        prop_assert!(defect <= 1e-10 * a.norm_inf().unwrap().max(1.0), "defect {defect}");
    }

    #[test]
    fn banded_product_matches_dense_corner(seed in any::<u64>(), d in 1usize..6, n in 4usize..16) {
        let mut rng = common::rng(seed);
        let mut dense = || Mat::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let (ma, mb) = (dense(), dense());
        let x = BandedOp::from_dense(ma.as_ref()).add(&BandedOp::shift().scale(C64::new(0.5, -1.0)));
        let y = BandedOp::from_dense(mb.as_ref()).add(&BandedOp::re_shift());
        let big = n + x.bandwidth().max(y.bandwidth());
        let (xc, yc) = (x.corner(big), y.corner(big));
        let dense_prod = &xc * &yc;
        let corner = x.mul(&y).corner(n);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((corner[(i, j)] - dense_prod[(i, j)]).norm() < 1e-12);
            }
        }
        let comm = x.commutator(&y).corner(n);
        let dense_comm = &dense_prod - &yc * &xc;
        for i in 0..n {
            for j in 0..n {
                prop_assert!((comm[(i, j)] - dense_comm[(i, j)]).norm() < 1e-12);
            }
        }
    }
}
