use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use semidiag::certify::{corner_trace, dual_certificate, BandedOp};
use semidiag::construct::{build_approx_unit, kuroda_diagonalize_single_capped, kuroda_diagonalize_tuple, select_mk};
use semidiag::jointspec::JointSpectrum;
use semidiag::ncalg::{HermTuple, MatOp, TracedAlgebra};
use semidiag::symfun::{embedding_test_space, PsiFunction, SpaceSpec};
use semidiag::{Error, C64};

use crate::bounds;
use crate::config::{Scenario, ScenarioConfig};
use crate::error::CliError;
use crate::output::{Measured, Row};

/// Window of the embedding test in `sweep_psi`.
pub const EMBEDDING_WINDOW: u32 = 20;

pub struct ScenarioOutput {
    pub rows: Vec<Row>,
    pub reports: Value,
    /// Extra JSON artifacts as `(file name, content)`.
    pub extra: Vec<(String, Value)>,
}

struct Model {
    points: Vec<Vec<f64>>,
    algebra: Arc<TracedAlgebra>,
    q: MatOp,
}

impl Model {
    fn new(cfg: &ScenarioConfig) -> Result<Self, CliError> {
        let side = if cfg.n == 1 { cfg.d } else { cfg.side()? };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut points = Vec::with_capacity(cfg.d);
        for i in 0..cfg.d {
            let mut rest = i;
            let mut p = Vec::with_capacity(cfg.n);
            for _ in 0..cfg.n {
                let digit = (rest % side) as f64;
                rest /= side;
                let u: f64 = if cfg.jitter > 0.0 { cfg.jitter * rng.random::<f64>() } else { 0.0 };
                p.push((digit + u) / side as f64);
            }
            p.reverse();
            points.push(p);
        }
        let algebra = TracedAlgebra::single(cfg.d, cfg.point_weight())?;
        let q = MatOp::vector_projection(algebra.clone(), 0, &vec![C64::new(1.0, 0.0); cfg.d])?;
        Ok(Self { points, algebra, q })
    }

    fn spectrum(&self) -> Result<JointSpectrum, CliError> {
        Ok(JointSpectrum::from_diagonal(self.algebra.clone(), vec![self.points.clone()])?)
    }

    fn axis(&self, j: usize) -> Result<MatOp, CliError> {
        let diag: Vec<f64> = self.points.iter().map(|p| p[j]).collect();
        Ok(MatOp::from_real_diagonal(self.algebra.clone(), &[diag])?)
    }

    fn tuple(&self, n: usize) -> Result<HermTuple, CliError> {
        Ok(HermTuple::new((0..n).map(|j| self.axis(j)).collect::<Result<Vec<_>, _>>()?)?)
    }
}

struct RowFactory<'a> {
    cfg: &'a ScenarioConfig,
}

impl RowFactory<'_> {
    #[allow(clippy::too_many_arguments)]
    fn row(&self, key: (usize, u32, usize), space: &str, metric: String, measured: f64, bound: Option<f64>, wall_ms: u64) -> Row {
        Row {
            scenario: self.cfg.scenario.name(),
            d: self.cfg.d,
            n: self.cfg.n,
            index: key.1,
            space: space.to_string(),
            metric,
            measured: Measured::from_f64(measured),
            bound,
            wall_ms: if self.cfg.timing { wall_ms } else { 0 },
            key,
        }
    }
}

fn axis_metric(name: &str, n: usize, j: usize) -> String {
    if n == 1 {
        name.to_string()
    } else {
        format!("{name}[{j}]")
    }
}

fn elapsed_ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

pub fn run(cfg: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    match cfg.scenario {
        Scenario::Mult1d | Scenario::MultNd => run_mult(cfg),
        Scenario::AppendixA => run_appendix(cfg),
        Scenario::ShiftCertificate => run_shift(cfg),
        Scenario::SweepPsi => run_sweep(cfg),
    }
}

fn run_mult(cfg: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let model = Model::new(cfg)?;
    let spectrum = model.spectrum()?;
    let spaces = cfg.parsed_spaces()?;
    let metrics = cfg.metrics();
    let has = |m: &str| metrics.iter().any(|x| x == m);
    let tau_q = model.q.trace().re;
    let n = cfg.n;
    let rf = RowFactory { cfg };
    let s_len = spaces.len();

    let per_m: Vec<(Vec<Row>, Value)> = (cfg.m.min..=cfg.m.max)
        .into_par_iter()
        .map(|m| -> Result<_, CliError> {
            let start = Instant::now();
            let unit = build_approx_unit(&spectrum, &model.q, m)?;
            let mut rows = Vec::new();
            let mut space_norms = Vec::new();
            if has("comm_space") {
                for s in &spaces {
                    space_norms.push((0..n).map(|j| unit.p_m.commutator_norm(&spectrum, j, s)).collect::<Result<Vec<_>, _>>()?);
                }
            }
            let ms = elapsed_ms(start);
            if has("comm_inf") {
                for (j, &v) in unit.comm_per_axis.iter().enumerate() {
                    rows.push(rf.row((0, m, j), "linf", axis_metric("comm_inf", n, j), v, Some(bounds::comm_inf(m)), ms));
                }
            }
            if has("tau") {
                rows.push(rf.row((1, m, 0), "trace", "tau".into(), unit.tau_pm, Some(bounds::trace(m, n, tau_q)), ms));
            }
            for (si, norms) in space_norms.iter().enumerate() {
                let bound = bounds::comm_space(&spaces[si], m, n, tau_q);
                for (j, &v) in norms.iter().enumerate() {
                    rows.push(rf.row((2 + si, m, j), &cfg.spaces[si], axis_metric("comm_space", n, j), v, Some(bound), ms));
                }
            }
            let report = json!({ "unit": unit.summary(), "space_norms": space_norms });
            Ok((rows, report))
        })
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    let mut units = Vec::new();
    for (r, v) in per_m {
        rows.extend(r);
        units.push(v);
    }

    let mut tuples = Vec::new();
    if has("tuple_residual") {
        let tuple = model.tuple(n)?;
        let results: Vec<(Row, Value)> = spaces
            .par_iter()
            .enumerate()
            .map(|(si, s)| -> Result<_, CliError> {
                let start = Instant::now();
                let t = kuroda_diagonalize_tuple(&tuple, s, cfg.epsilon)?;
                let measured = t.report.max_residual();
                let row = rf.row(
                    (2 + s_len + si, 0, 0),
                    &cfg.spaces[si],
                    "tuple_residual".into(),
                    measured,
                    Some(bounds::tuple_residual(n, cfg.epsilon)),
                    elapsed_ms(start),
                );
                let windows: Vec<Value> = t
                    .windows
                    .iter()
                    .map(|w| json!({ "index": w.index, "budget": w.budget, "level": w.level, "exact": w.exact, "tau": w.tau, "residuals": w.residuals, "hulls": w.hulls }))
                    .collect();
                Ok((row, json!({ "space": cfg.spaces[si], "report": t.report.summary(), "windows": windows, "budget_sum": t.budget_sum })))
            })
            .collect::<Result<_, _>>()?;
        for (r, v) in results {
            rows.push(r);
            tuples.push(v);
        }
    }

    Ok(ScenarioOutput { rows, reports: json!({ "tau_q": tau_q, "levels": units, "tuples": tuples }), extra: vec![] })
}

fn run_appendix(cfg: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let model = Model::new(cfg)?;
    let a = model.axis(0)?;
    let a_norm = a.norm_inf()?;
    let spaces = cfg.parsed_spaces()?;
    let metrics = cfg.metrics();
    let rf = RowFactory { cfg };
    let order = |name: &str| crate::config::APPENDIX_METRICS.iter().position(|m| *m == name).unwrap_or(usize::MAX);

    let per_space: Vec<(Vec<Row>, Value)> = spaces
        .par_iter()
        .enumerate()
        .map(|(si, s)| -> Result<_, CliError> {
            let start = Instant::now();
            let reports = kuroda_diagonalize_single_capped(&a, &model.q, s, cfg.k_max, cfg.m_cap)?;
            let ms = elapsed_ms(start);
            let mut rows = Vec::new();
            for r in reports.iter().filter(|r| r.k <= cfg.k_max) {
                for metric in &metrics {
                    let (measured, bound) = match metric.as_str() {
                        "comm" => (r.comm_norm, bounds::appendix_comm(r.k)),
                        "step1" => (r.step1_residual, bounds::appendix_step1(r.k)),
                        "residual" => (r.report.max_residual(), bounds::appendix_residual(r.k)),
                        _ => (r.telescoping_defect, 1e-10 * a_norm),
                    };
                    rows.push(rf.row((si, r.k, order(metric)), &cfg.spaces[si], metric.clone(), measured, Some(bound), ms));
                }
            }
            let summaries: Vec<_> = reports.iter().map(|r| r.summary()).collect();
            Ok((rows, json!({ "space": cfg.spaces[si], "steps": summaries })))
        })
        .collect::<Result<_, _>>()?;

    let (rows, reports): (Vec<Vec<Row>>, Vec<Value>) = per_space.into_iter().unzip();
    Ok(ScenarioOutput { rows: rows.concat(), reports: json!({ "norm_inf": a_norm, "spaces": reports }), extra: vec![] })
}

fn run_shift(cfg: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let start = Instant::now();
    let (a, c) = (BandedOp::re_shift(), BandedOp::im_shift());
    let cert = dual_certificate(&[a.clone()], &[c.clone()], &PsiFunction::identity(), &[1.0])?;
    let corner = corner_trace(&a, &c, cfg.d);
    let ms = elapsed_ms(start);
    let rf = RowFactory { cfg };
    let space = SpaceSpec::Lorentz(PsiFunction::identity()).to_string();
    let rows = vec![
        rf.row((0, 0, 0), &space, "trace".into(), cert.trace.value, None, ms),
        rf.row((0, 0, 1), &space, "corner_trace".into(), corner, None, ms),
        rf.row((0, 0, 2), &space, "certificate".into(), cert.value, None, ms),
    ];
    let summary = json!({
        "trace": cert.trace.value,
        "corner_trace": corner,
        "certificate": cert.value,
        "corner": cfg.d,
        "alpha": a.to_string(),
        "gamma": c.to_string(),
        "details": cert,
    });
    Ok(ScenarioOutput { rows, reports: summary.clone(), extra: vec![("certificate.json".into(), summary)] })
}

fn run_sweep(cfg: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let spaces = cfg.parsed_spaces()?;
    let tau_q = cfg.point_weight();
    let n = cfg.n;
    let rf = RowFactory { cfg };

    let per_space: Vec<(Vec<Row>, Value)> = spaces
        .par_iter()
        .enumerate()
        .map(|(si, s)| -> Result<_, CliError> {
            let start = Instant::now();
            let emb = embedding_test_space(s, n, EMBEDDING_WINDOW)?;
            let mut levels = Vec::new();
            for k in 1..=cfg.k_max {
                match select_mk(s, tau_q, k, n, cfg.m_cap) {
                    Ok(m) => levels.push((k, Some(m))),
                    Err(Error::UnreachableLevel { .. }) => levels.push((k, None)),
                    Err(e) => return Err(e.into()),
                }
            }
            let ms = elapsed_ms(start);
            let name = &cfg.spaces[si];
            let mut rows = Vec::new();
            for (m, &r) in emb.ratios.iter().enumerate() {
                rows.push(rf.row((si, m as u32, 0), name, "embedding_ratio".into(), r, None, ms));
            }
            for &(k, m) in &levels {
                rows.push(rf.row((si, k, 1), name, "m_k".into(), m.map_or(f64::INFINITY, f64::from), None, ms));
                if let Some(m) = m {
                    rows.push(rf.row(
                        (si, k, 2),
                        name,
                        "level_bound".into(),
                        bounds::comm_space(s, m, n, tau_q),
                        Some(bounds::appendix_comm(k)),
                        ms,
                    ));
                }
            }
            let m_k: Vec<Option<u32>> = levels.iter().map(|l| l.1).collect();
            Ok((rows, json!({ "space": name, "embedding": emb, "m_k": m_k })))
        })
        .collect::<Result<_, _>>()?;

    let (rows, reports): (Vec<Vec<Row>>, Vec<Value>) = per_space.into_iter().unzip();
    Ok(ScenarioOutput { rows: rows.concat(), reports: json!({ "tau_q": tau_q, "spaces": reports }), extra: vec![] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(src: &str) -> ScenarioConfig {
        ScenarioConfig::from_json(src).unwrap()
    }

    #[test]
    fn grid_points_lie_in_cells() {
        let c = cfg(r#"{"scenario": "multnd", "d": 16, "n": 2, "seed": 3, "jitter": 0.5, "output": "o", "spaces": ["ln1(2)"]}"#);
        let m = Model::new(&c).unwrap();
        for (i, p) in m.points.iter().enumerate() {
            let (hi, lo) = (i / 4, i % 4);
            assert!(p[0] >= hi as f64 / 4.0 && p[0] < (hi as f64 + 0.5) / 4.0 + 1e-15);
            assert!(p[1] >= lo as f64 / 4.0 && p[1] < (lo as f64 + 0.5) / 4.0 + 1e-15);
        }
        assert!((m.q.trace().re - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn mult1d_rows_meet_bounds() {
        let c = cfg(r#"{"scenario": "mult1d", "d": 64, "seed": 0, "output": "o", "spaces": ["ln1(2)", "pow(1/3)"],
            "m": {"min": 0, "max": 6}, "metrics": ["comm_inf", "tau", "comm_space"]}"#);
        let out = run(&c).unwrap();
        assert_eq!(out.rows.len(), 7 * 4);
        assert!(out.rows.iter().all(|r| !r.violates()));
    }

    #[test]
    fn shift_values() {
        let c = cfg(r#"{"scenario": "shift_certificate", "d": 200, "seed": 0, "output": "o"}"#);
        let out = run(&c).unwrap();
        let cert = &out.extra[0].1;
        assert!((cert["trace"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!(cert["corner_trace"].as_f64().unwrap().abs() < 1e-12);
        assert!(cert["certificate"].as_f64().unwrap() >= 0.5 - 1e-12);
    }

    #[test]
    fn sweep_marks_unreachable_levels() {
        let c = cfg(r#"{"scenario": "sweep_psi", "seed": 0, "output": "o", "spaces": ["pow(1)", "pow(1/2)"], "k_max": 3, "m_cap": 30}"#);
        let out = run(&c).unwrap();
        let m_k: Vec<&Row> = out.rows.iter().filter(|r| r.metric == "m_k").collect();
        assert_eq!(m_k.len(), 6);
        assert!(m_k.iter().filter(|r| r.space == "pow(1)").all(|r| r.measured == Measured::Infinite));
        assert!(m_k.iter().filter(|r| r.space == "pow(1/2)").all(|r| matches!(r.measured, Measured::Value(_))));
    }

    #[test]
    fn appendix_refuses_embedded_space() {
        let c = cfg(r#"{"scenario": "appendixA", "d": 16, "seed": 0, "output": "o", "spaces": ["ln1(1)"]}"#);
        assert!(matches!(run(&c), Err(CliError::Precondition(Error::Embedded { .. }))));
    }
}
