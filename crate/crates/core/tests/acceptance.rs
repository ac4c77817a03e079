//! Acceptance checks, one line per criterion.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use semidiag::certify::{
    corner_trace, dual_certificate, dual_operator, grid_search_oracle, modulus_inf_optimize, modulus_inf_restricted,
    modulus_upper_schedule, banded_trace, BandedOp, DecayCertificate, OptimizeOptions, RestrictedProblem, StepSchedule,
};
use semidiag::construct::{build_approx_unit, kuroda_diagonalize_single, lorentz_commutator_report};
use semidiag::jointspec::JointSpectrum;
use semidiag::ncalg::{HermTuple, MatOp, TracedAlgebra};
use semidiag::symfun::{embedding_test_ln1, EmbeddingVerdict, PsiFunction, SpaceSpec};
use semidiag::C64;

type Outcome = Result<String, String>;

/// Grid model on `side^n` points in `[0,1)^n` with trace weight `weight`.
struct Grid {
    side: usize,
    spectrum: JointSpectrum,
    q: MatOp,
}

impl Grid {
    fn new(side: usize, n: usize, weight: f64) -> Self {
        let d = side.pow(n as u32);
        let alg = TracedAlgebra::single(d, weight).unwrap();
        let points = (0..d)
            .map(|i| (0..n).rev().map(|j| ((i / side.pow(j as u32)) % side) as f64 / side as f64).collect())
            .collect();
        let spectrum = JointSpectrum::from_diagonal(alg.clone(), vec![points]).unwrap();
        let q = MatOp::vector_projection(alg, 0, &vec![C64::new(1.0, 0.0); d]).unwrap();
        Self { side, spectrum, q }
    }

    /// Standard deviation of one coordinate over the points of a level-`m`
    /// atom: `N` equally spaced points with spacing `1/side`.
    fn atom_sigma(&self, m: u32) -> f64 {
        let pts = (self.side >> m).max(1) as f64;
        ((pts * pts - 1.0) / 12.0).sqrt() / self.side as f64
    }
}

fn slack_ok(measured: f64, bound: f64) -> bool {
    bound - measured >= -1e-9
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for (side, n, m_max) in [(1024usize, 1usize, 10u32), (32, 2, 5)] {
        let d = side.pow(n as u32);
        let g = Grid::new(side, n, 1.0 / d as f64);
        let tau_q = 1.0 / d as f64;
        for m in 0..=m_max {
            let u = build_approx_unit(&g.spectrum, &g.q, m).map_err(|e| e.to_string())?;
            let (b_inf, b_tau) = ((-(m as f64)).exp2(), ((m as usize * n) as f64).exp2() * tau_q);
            if !slack_ok(u.inf_comm, b_inf) || !slack_ok(u.tau_pm, b_tau) {
                return Err(format!("n = {n}, m = {m}: comm {} vs {b_inf}, tau {} vs {b_tau}", u.inf_comm, u.tau_pm));
            }
            // One uniform vector per atom: the commutator with each axis is the
            // standard deviation of that coordinate inside an atom.
            let sigma = g.atom_sigma(m);
            if (u.inf_comm - sigma).abs() > 1e-12 || (u.tau_pm - b_tau).abs() > 1e-12 {
                return Err(format!("n = {n}, m = {m}: comm {} vs oracle {sigma}, tau {} vs oracle {b_tau}", u.inf_comm, u.tau_pm));
            }
            worst = worst.min((b_inf - u.inf_comm).min(b_tau - u.tau_pm));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 10.0 {
        return Err(format!("runtime {secs:.1} s"));
    }
    Ok(format!("d = 1024 m <= 10 and 32x32 m <= 5, min slack {worst:.3e}, {secs:.2} s"))
}

fn criterion_2() -> Outcome {
    let psis = [("pow(1/2)", PsiFunction::power_root(2.0)), ("log_pwl(20)", PsiFunction::log_like(20))];
    let mut checked = 0;
    for (side, n, m_max) in [(1024usize, 1usize, 10u32), (32, 2, 5)] {
        let d = side.pow(n as u32);
        let g = Grid::new(side, n, 1.0 / d as f64);
        for (name, psi) in &psis {
            for m in 0..=m_max {
                let r = lorentz_commutator_report(&g.spectrum, &g.q, psi, m).map_err(|e| e.to_string())?;
                // Each atom contributes a rank-two commutator with both singular
                // values equal to the atom's standard deviation.
                let atoms = (g.side.min(1 << m)).pow(n as u32) as f64;
                let oracle = g.atom_sigma(m) * psi.eval(2.0 * atoms / d as f64);
                for &lhs in &r.lhs {
                    if !slack_ok(lhs, r.rhs) {
                        return Err(format!("{name}, n = {n}, m = {m}: {lhs} > {}", r.rhs));
                    }
                    if (lhs - oracle).abs() > 1e-10 * (1.0 + oracle) {
                        return Err(format!("{name}, n = {n}, m = {m}: {lhs} vs oracle {oracle}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} commutator norms within the level bound"))
}

fn criterion_3() -> Outcome {
    let d = 256;
    let alg = TracedAlgebra::single(d, 1.0 / d as f64).unwrap();
    let a = MatOp::from_real_diagonal(alg.clone(), &[(0..d).map(|i| i as f64 / d as f64).collect()]).unwrap();
    let q = MatOp::vector_projection(alg, 0, &vec![C64::new(1.0, 0.0); d]).unwrap();
    let reports = kuroda_diagonalize_single(&a, &q, &SpaceSpec::Ln1(2), 5).map_err(|e| e.to_string())?;
    let a_norm = a.norm_inf().unwrap();
    let mut line = Vec::new();
    for r in reports.iter().filter(|r| r.k <= 5) {
        let bound = (3.0 - r.k as f64).exp2();
        let res = r.report.max_residual();
        if !slack_ok(res, bound) {
            return Err(format!("k = {}: residual {res} > {bound}", r.k));
        }
        if r.telescoping_defect > 1e-10 * a_norm {
            return Err(format!("k = {}: telescoping defect {}", r.k, r.telescoping_defect));
        }
        line.push(format!("{res:.2e}"));
    }
    if line.len() != 5 {
        return Err(format!("expected k = 1..5, got {} steps", line.len()));
    }
    Ok(format!("residuals [{}] against 2^(3-k)", line.join(", ")))
}

fn criterion_4() -> Outcome {
    let (a, c) = (BandedOp::re_shift(), BandedOp::im_shift());
    let y = dual_operator(&[a.clone()], &[c.clone()]).map_err(|e| e.to_string())?;
    let cert = DecayCertificate::infer(&y).ok_or("no decay certificate")?;
    let trace = banded_trace(&y, Some(&cert)).map_err(|e| e.to_string())?.value;
    let corner = corner_trace(&a, &c, 200);
    let dual = dual_certificate(&[a], &[c], &PsiFunction::identity(), &[1.0]).map_err(|e| e.to_string())?.value;
    if (trace - 0.5).abs() > 1e-12 || corner.abs() > 1e-12 || dual < 0.5 - 1e-12 {
        return Err(format!("trace {trace}, corner {corner}, certificate {dual}"));
    }
    Ok(format!("trace {trace}, 200x200 corner {corner:.1e}, certificate {dual}"))
}

fn criterion_5() -> Outcome {
    let mut cases = 0;
    for n in 1..=3usize {
        let families = [
            (format!("pow(1/{n})"), PsiFunction::power_root(n as f64), true),
            (format!("pow(1/{})", 2 * n), PsiFunction::power_root(2.0 * n as f64), false),
            (format!("log_pwl({})", 20 * n), PsiFunction::log_like(20 * n as u32), false),
        ];
        for (name, psi, embedded) in families {
            let r = embedding_test_ln1(&psi, n, 20).map_err(|e| e.to_string())?;
            let ok = match r.verdict {
                EmbeddingVerdict::Embedded => embedded,
                EmbeddingVerdict::NotEmbedded { .. } => !embedded,
                EmbeddingVerdict::Inconclusive => false,
            };
            if !ok {
                return Err(format!("{name}, n = {n}: {:?}", r.verdict));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} verdicts match the analytic liminf"))
}

/// `min_{m < log2 d} ‖[p_m, a]‖` on the counting-trace grid.
fn scaling_minimum(d: usize, space: &SpaceSpec) -> Result<f64, String> {
    let alg = TracedAlgebra::single(d, 1.0).unwrap();
    let a = MatOp::from_real_diagonal(alg.clone(), &[(0..d).map(|i| i as f64 / d as f64).collect()]).unwrap();
    let q = MatOp::vector_projection(alg, 0, &vec![C64::new(1.0, 0.0); d]).unwrap();
    let full = d.trailing_zeros();
    let m_list: Vec<u32> = (0..full).collect();
    let est = modulus_upper_schedule(&HermTuple::new(vec![a]).unwrap(), &q, space, &m_list).map_err(|e| e.to_string())?;
    Ok(est.points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let dims = [256usize, 512, 1024, 2048];
    let ln = SpaceSpec::Ln1(2).cap_inf();
    let l1 = SpaceSpec::Lorentz(PsiFunction::identity()).cap_inf();
    let ln_min: Vec<f64> = dims.iter().map(|&d| scaling_minimum(d, &ln)).collect::<Result<_, _>>()?;
    let l1_min: Vec<f64> = dims.iter().map(|&d| scaling_minimum(d, &l1)).collect::<Result<_, _>>()?;
    let decreasing = ln_min.windows(2).all(|w| w[1] <= 1.05 * w[0]) && ln_min[dims.len() - 1] < ln_min[0];
    let (lo, hi) = l1_min.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let flat = lo > 0.0 && hi <= 1.1 * lo;
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("ln1(2) minima {ln_min:.4?}, L1 minima {l1_min:.4?}, {secs:.1} s");
    if decreasing && flat && secs < 120.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7() -> Outcome {
    let mut names = Vec::new();
    for (name, r) in common::suites(common::CASES) {
        r.map_err(|e| format!("{name}: {e}"))?;
        names.push(name);
    }
    Ok(format!("{} suites x {} cases", names.len(), common::CASES))
}

fn mult(d: usize) -> HermTuple {
    let alg = TracedAlgebra::unit(d).unwrap();
    HermTuple::new(vec![MatOp::from_real_diagonal(alg, &[(0..d).map(|i| i as f64 / d as f64).collect()]).unwrap()]).unwrap()
}

fn random_contraction(alpha: &HermTuple, seed: u64) -> MatOp {
    use faer::Mat;
    use rand::Rng;
    let alg = alpha.algebra();
    let d = alg.dim(0);
    let mut rng = common::rng(seed);
    let v = common::random_unitary(&mut rng, d);
    let u: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let s = Mat::from_fn(d, d, |i, k| v[(i, k)] * u[k]);
    MatOp::hermitian(alg.clone(), vec![&s * v.adjoint()]).unwrap()
}

fn criterion_8() -> Outcome {
    let mut worst = 0.0f64;
    for (d, seed) in [(4usize, 1u64), (16, 2), (64, 3)] {
        let alpha = mult(d);
        for (a0, label) in [(random_contraction(&alpha, seed), "random"), (MatOp::zero(alpha.algebra().clone()), "zero")] {
            let out = modulus_inf_optimize(&alpha, &a0, &SpaceSpec::Ln1(2).cap_inf(), &OptimizeOptions::default())
                .map_err(|e| e.to_string())?;
            if out.value > 1e-3 {
                return Err(format!("d = {d}, {label} a0: value {}", out.value));
            }
            worst = worst.max(out.value);
        }
    }
    let alpha = mult(4);
    let problem = RestrictedProblem::off_commutant(&alpha, random_contraction(&alpha, 11), 0.1).map_err(|e| e.to_string())?;
    let space = SpaceSpec::Ln1(2);
    let sg = modulus_inf_restricted(&alpha, &problem, &space, 2000, StepSchedule::InvSqrt { scale: 1.0 }).map_err(|e| e.to_string())?;
    let grid = grid_search_oracle(&alpha, &problem, &space, 3, 12).map_err(|e| e.to_string())?;
    let gap = (sg.value - grid.value).abs();
    if gap > 2e-2 {
        return Err(format!("restricted {} vs grid {}", sg.value, grid.value));
    }
    Ok(format!("worst optimizer value {worst:.2e} on d <= 64; restricted vs grid gap {gap:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("approximate unit bounds", criterion_1),
        ("Lorentz commutator step", criterion_2),
        ("single-operator residuals", criterion_3),
        ("shift certificate", criterion_4),
        ("embedding verdicts", criterion_5),
        ("scaling sweep", criterion_6),
        ("property suites", criterion_7),
        ("optimizer sanity", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}) [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({detail}) [{secs:.1} s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
