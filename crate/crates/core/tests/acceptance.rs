//! Acceptance suite: one test per criterion, each writing a PASS/FAIL line
//! straight to stdout (bypassing capture) before asserting.

use std::f64::consts::TAU;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use spinlab::cauchy::{evolve_dirac, plane_wave_solution, EvolutionConfig};
use spinlab::cli::{run, Context, Profile, RunConfig};
use spinlab::clifford::{spin_lift_along, CMatrix, GammaRep};
use spinlab::edm::{
    calibration, clifford_symbol, constraint_residual, edm_residual, el_consistency, lagrangian_derivative, principal_symbol, pullback_symbol_report, wave_gauge_residual, Direction, EdmFields,
    EdmParams, InitialData, QuadraticForm, CALIBRATION_DIRECTIONS, CALIBRATION_GRID, CALIBRATION_SEED,
};
use spinlab::grid::{MetricField, OneFormField, TorusGrid};
use spinlab::metric::{comparison_b, joinable, root_residual, BilinearForm, JOIN_SAMPLES};
use spinlab::random::FieldSampler;
use spinlab::spinor::{
    beta_residuals, conjugated_dirac, dirac, dirac_pullback, dirac_spectrum, SpinGeometry, SpinStructureTwist,
    SpinorField,
};

const CLIFFORD_TOL: f64 = 1e-12;
const CLIFFORD_BUDGET: Duration = Duration::from_secs(10);
const DOUBLE_COVER_TOL: f64 = 1e-10;
const ROOT_TOL: f64 = 1e-12;
const ROOT_PAIRS: usize = 1000;
const ROOT_BUDGET: Duration = Duration::from_secs(30);
const BETA_TOL: f64 = 1e-9;
const BETA_GRID: usize = 32;
const CIRCLE_TOL: f64 = 5e-3;
const CIRCLE_WINDOW: f64 = 10.5;
const CONVERGENCE_RATIO: f64 = 14.0;
const TORUS_TOL: f64 = 5e-3;
const TORUS_COUNT: usize = 40;
const TORUS_GRID: usize = 32;
const SPECTRUM_BUDGET: Duration = Duration::from_secs(120);
const PULLBACK_TOL: f64 = 1e-3;
const PULLBACK_GRID: usize = 64;
const EL_TOL: f64 = 1e-3;
const EL_DIRECTIONS: usize = 50;
const EL_CONFIGURATIONS: usize = 3;
const EL_GRID: usize = 32;
const EL_STEP: f64 = 1e-3;
/// `2^1.8`: observed order at least 1.8 when the differencing step halves.
const EL_STEP_RATIO: f64 = 3.48;
const EL_BUDGET: Duration = Duration::from_secs(300);
const TRIVIAL_TOL: f64 = 1e-13;
const EVOLUTION_TOL: f64 = 1e-6;
const CHARGE_TOL: f64 = 1e-6;
const DIRAC_SYMBOL_TOL: f64 = 1e-8;
const PULLBACK_SYMBOL_TOL: f64 = 1e-6;
const SYMBOL_GRID: usize = 64;

fn verdict(criterion: u32, passed: bool, detail: &str) {
    let line = format!(
        "criterion {criterion:2}: {} {detail}\n",
        if passed { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stdout().write_all(line.as_bytes());
    assert!(passed, "criterion {criterion} failed: {detail}");
}

fn cmax(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

#[test]
fn criterion_01_clifford_suite() {
    let start = Instant::now();
    let (mut anti, mut adj) = (0.0f64, 0.0f64);
    let mut count = 0;
    for m in 1..=6 {
        for s in 0..=m {
            let rep = GammaRep::new(m - s, s).unwrap();
            anti = anti.max(rep.anticommutator_residual());
            adj = adj.max(rep.adjoint_residual());
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        anti <= CLIFFORD_TOL && adj <= CLIFFORD_TOL && elapsed < CLIFFORD_BUDGET,
        &format!("{count} signatures, anticommutator {anti:.1e}, adjoint {adj:.1e}, {elapsed:.2?}"),
    );
}

fn plane_rotation(m: usize, i: usize, j: usize, angle: f64) -> DMatrix<f64> {
    let mut o = DMatrix::identity(m, m);
    let (s, c) = angle.sin_cos();
    o[(i, i)] = c;
    o[(j, j)] = c;
    o[(i, j)] = -s;
    o[(j, i)] = s;
    o
}

#[test]
fn criterion_02_double_cover() {
    let mut worst = 0.0f64;
    for m in [2, 3] {
        let rep = GammaRep::new(m, 0).unwrap();
        let n = rep.spinor_dim();
        for (i, j) in (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))) {
            let lift = spin_lift_along(&rep, |t| Ok(plane_rotation(m, i, j, TAU * t))).unwrap();
            worst = worst.max(cmax(&(lift.lambda + CMatrix::identity(n, n))));
        }
    }
    verdict(2, worst <= DOUBLE_COVER_TOL, &format!("full-turn lift deviates from -I by {worst:.1e}"));
}

#[test]
fn criterion_03_root_maps() {
    let start = Instant::now();
    let mut rng = FieldSampler::new(0xB0B);
    let mut defining = 0.0f64;
    let mut round = 0.0f64;
    for sig in [(2, 0), (3, 0), (1, 1), (3, 1)] {
        let m = sig.0 + sig.1;
        let mut accepted = 0;
        while accepted < ROOT_PAIRS {
            let g = rng.form(sig, 0.3);
            let h = rng.form(sig, 0.3);
            if !joinable(&g, &h, JOIN_SAMPLES) {
                continue;
            }
            let b = comparison_b(&g, &h).unwrap().matrix;
            let back = comparison_b(&h, &g).unwrap().matrix;
            defining = defining.max(root_residual(&g, &h, &b));
            round = round.max((&back * &b - DMatrix::<f64>::identity(m, m)).amax());
            accepted += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        3,
        defining <= ROOT_TOL && round <= ROOT_TOL && elapsed < ROOT_BUDGET,
        &format!("{ROOT_PAIRS} pairs x 4 signatures, defining {defining:.1e}, round trip {round:.1e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_04_beta_suite() {
    let grid = TorusGrid::uniform(2, BETA_GRID).unwrap();
    let mut rng = FieldSampler::new(0xBE7A);
    let mut worst = [0.0f64; 3];
    for sig in [(2, 0), (2, 0), (1, 1), (1, 1)] {
        let rep = GammaRep::new(sig.0, sig.1).unwrap();
        let (g, h) = rng.metric_pair(&grid, sig, 2, 0.25).unwrap();
        let psi = rng.spinor(&grid, &SpinStructureTwist::new(&[0.5, 0.0]).unwrap(), 2, 2, 1.0).unwrap();
        let r = beta_residuals(&rep, &g, &h, &psi).unwrap();
        for (w, x) in worst.iter_mut().zip([r.round_trip, r.isometry, r.intertwining]) {
            *w = w.max(x);
        }
    }
    verdict(
        4,
        worst.iter().all(|w| *w <= BETA_TOL),
        &format!("round trip {:.1e}, isometry {:.1e}, intertwining {:.1e}", worst[0], worst[1], worst[2]),
    );
}

fn circle_error(n: usize) -> (f64, usize) {
    let grid = TorusGrid::new(&[n]).unwrap();
    let geom = SpinGeometry::new(&GammaRep::new(1, 0).unwrap(), &MetricField::flat(&grid, 1, 0).unwrap()).unwrap();
    // 22 resolved eigenvalues in the window plus the doublers below it
    let spec = dirac_spectrum(&geom, &SpinStructureTwist::antiperiodic(1), 48).unwrap();
    let window: Vec<f64> = spec.resolved().into_iter().filter(|l| l.abs() <= CIRCLE_WINDOW + 0.25).collect();
    let mut expected: Vec<f64> = (-11..11).map(|k| k as f64 + 0.5).collect();
    expected.sort_by(f64::total_cmp);
    if window.len() != expected.len() {
        return (f64::INFINITY, window.len());
    }
    let err = window.iter().zip(&expected).fold(0.0f64, |a, (l, e)| a.max((l - e).abs()));
    (err, window.len())
}

fn torus_error() -> f64 {
    let grid = TorusGrid::uniform(2, TORUS_GRID).unwrap();
    let geom = SpinGeometry::new(&GammaRep::new(2, 0).unwrap(), &MetricField::flat(&grid, 2, 0).unwrap()).unwrap();
    let spec = dirac_spectrum(&geom, &SpinStructureTwist::antiperiodic(2), 200).unwrap();
    let got = spec.resolved();
    // eigenvalues come in pairs ±|k|, so compare magnitudes and check the pairing
    let mut positive: Vec<f64> = got.iter().copied().filter(|l| *l > 0.0).collect();
    let mut negative: Vec<f64> = got.iter().filter(|l| **l < 0.0).map(|l| -l).collect();
    positive.sort_by(f64::total_cmp);
    negative.sort_by(f64::total_cmp);
    if positive.len() != negative.len() || got.len() < TORUS_COUNT {
        return f64::INFINITY;
    }
    let pairing = positive.iter().zip(&negative).fold(0.0f64, |a, (p, n)| a.max((p - n).abs()));
    let mut magnitudes: Vec<f64> = got.iter().map(|l| l.abs()).collect();
    magnitudes.sort_by(f64::total_cmp);
    let mut oracle: Vec<f64> = (-6..6)
        .flat_map(|a| (-6..6).map(move |b| ((a as f64 + 0.5).powi(2) + (b as f64 + 0.5).powi(2)).sqrt()))
        .flat_map(|k| [k, k])
        .collect();
    oracle.sort_by(f64::total_cmp);
    let spectrum = magnitudes[..TORUS_COUNT]
        .iter()
        .zip(&oracle[..TORUS_COUNT])
        .fold(0.0f64, |a, (l, e)| a.max((l - e).abs()));
    spectrum.max(pairing)
}

#[test]
fn criterion_05_flat_spectra() {
    let start = Instant::now();
    let (coarse, _) = circle_error(128);
    let (fine, found) = circle_error(256);
    let ratio = coarse / fine;
    let torus = torus_error();
    let elapsed = start.elapsed();
    verdict(
        5,
        fine <= CIRCLE_TOL && ratio >= CONVERGENCE_RATIO && torus <= TORUS_TOL && elapsed < SPECTRUM_BUDGET,
        &format!(
            "circle n=256: {found} eigenvalues, error {fine:.2e}, ratio {ratio:.1}; torus n={TORUS_GRID}: {TORUS_COUNT} eigenvalues, error {torus:.2e}; {elapsed:.2?}"
        ),
    );
}

fn pullback_gap(n: usize, anisotropic: bool) -> f64 {
    let grid = TorusGrid::uniform(2, n).unwrap();
    let rep = GammaRep::new(2, 0).unwrap();
    let g = MetricField::conformal(&grid, 2, 0, |x| 0.2 * x[0].sin() + 0.1 * x[1].cos()).unwrap();
    let h = if anisotropic {
        MetricField::constant(&grid, &BilinearForm::new(DMatrix::from_row_slice(2, 2, &[1.5, 0.2, 0.2, 0.8])).unwrap())
            .unwrap()
    } else {
        MetricField::conformal(&grid, 2, 0, |x| 0.15 * (x[0] + x[1]).cos()).unwrap()
    };
    let psi = FieldSampler::new(5).spinor(&grid, &SpinStructureTwist::periodic(2), 2, 1, 1.0).unwrap();
    let direct = dirac_pullback(&SpinGeometry::new(&rep, &g).unwrap(), &h, &psi).unwrap();
    let oracle = conjugated_dirac(&rep, &g, &h, &psi).unwrap();
    direct.sub(&oracle).unwrap().max_abs() / oracle.max_abs()
}

#[test]
fn criterion_06_pullback_equivalence() {
    let mut passed = true;
    let mut detail = Vec::new();
    for (name, anisotropic) in [("conformal", false), ("anisotropic", true)] {
        let fine = pullback_gap(PULLBACK_GRID, anisotropic);
        let coarse = pullback_gap(PULLBACK_GRID / 2, anisotropic);
        let ratio = coarse / fine;
        passed &= fine <= PULLBACK_TOL && ratio >= CONVERGENCE_RATIO;
        detail.push(format!("{name}: gap {fine:.2e}, ratio {ratio:.1}"));
    }
    verdict(6, passed, &detail.join("; "));
}

#[test]
fn criterion_07_euler_lagrange() {
    let start = Instant::now();
    let cal = calibration().unwrap();
    let grid = TorusGrid::uniform(2, EL_GRID).unwrap();
    let rep = GammaRep::new(2, 0).unwrap();
    let params = EdmParams::single(0.7, 0.4);
    let mut rng = FieldSampler::new(0xE1_0007);
    let mut worst = 0.0f64;
    let mut worst_ratio = f64::INFINITY;
    for _ in 0..EL_CONFIGURATIONS {
        let fields = EdmFields {
            metric: rng.metric(&grid, (2, 0), 1, 0.15).unwrap(),
            spinors: vec![rng.spinor(&grid, &SpinStructureTwist::periodic(2), 2, 1, 0.5).unwrap()],
            potential: rng.one_form(&grid, 1, 0.4),
        };
        for k in 0..EL_DIRECTIONS {
            let dir = Direction::random(&mut rng, &fields, (0.1, 0.3, 0.3)).unwrap();
            let r = el_consistency(&rep, &params, &fields, &dir, EL_STEP).unwrap();
            worst = worst.max(r.relative_gap);
            if k == 0 {
                // successive differences of the central difference shrink fourfold per halving
                let wide = lagrangian_derivative(&rep, &params, &fields, &dir, 8.0 * EL_STEP).unwrap();
                let narrow = lagrangian_derivative(&rep, &params, &fields, &dir, 4.0 * EL_STEP).unwrap();
                worst_ratio = worst_ratio.min((wide.coarse - wide.fine).abs() / (narrow.coarse - narrow.fine).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        7,
        worst <= EL_TOL && worst_ratio >= EL_STEP_RATIO && elapsed < EL_BUDGET,
        &format!(
            "calibration c = [{:.4}, {:.4}, {:.4}] (seed {CALIBRATION_SEED:#x}, {CALIBRATION_GRID}^2, {CALIBRATION_DIRECTIONS} directions, misfit {:.3}); max relative gap {worst:.3e} over {} directions; step ratio {worst_ratio:.2}; {elapsed:.1?}",
            cal.c[0],
            cal.c[1],
            cal.c[2],
            cal.misfit,
            EL_DIRECTIONS * EL_CONFIGURATIONS
        ),
    );
}

#[test]
fn criterion_08_trivial_residuals() {
    let mut worst = 0.0f64;
    for sig in [(2, 0), (3, 0), (1, 1), (3, 1)] {
        let m = sig.0 + sig.1;
        let grid = TorusGrid::uniform(m, 8).unwrap();
        let rep = GammaRep::new(sig.0, sig.1).unwrap();
        let fields = EdmFields {
            metric: MetricField::flat(&grid, sig.0, sig.1).unwrap(),
            spinors: vec![SpinorField::zeros(&grid, &SpinStructureTwist::periodic(m), rep.spinor_dim())],
            potential: OneFormField::zeros(&grid),
        };
        let (e, d, mx) = edm_residual(&rep, &EdmParams::single(0.3, 1.0), &fields).unwrap().norms();
        worst = worst.max(e).max(d).max(mx);
    }
    let grid = TorusGrid::uniform(3, 8).unwrap();
    let data = InitialData::vacuum(MetricField::flat(&grid, 3, 0).unwrap(), 1).unwrap();
    let (h, mo) = constraint_residual(&data, &EdmParams::single(0.3, 1.0)).unwrap().norms();
    worst = worst.max(h).max(mo);
    let mut gauge = 0.0f64;
    let mut rng = FieldSampler::new(88);
    for sig in [(3, 0), (2, 1)] {
        let g = rng.metric(&grid, sig, 1, 0.2).unwrap();
        gauge = gauge.max(wave_gauge_residual(&g, &g).unwrap().max_abs());
    }
    verdict(
        8,
        worst <= TRIVIAL_TOL && gauge == 0.0,
        &format!("edm and constraint residuals {worst:.1e}, wave gauge (g, g) {gauge:e}"),
    );
}

fn plane_wave_run(k: f64, twist: f64, left: bool, periods: usize) -> (f64, f64) {
    let n = 256;
    let dt = 0.5 * TAU / n as f64;
    let steps = (periods as f64 * TAU / dt).round() as usize;
    let cfg = EvolutionConfig::new(n, 0.5, steps, twist);
    let grid = cfg.grid().unwrap();
    let tw = cfg.spin_structure().unwrap();
    let traj = evolve_dirac(&cfg, &plane_wave_solution(&grid, &tw, k, left, 0.0).unwrap()).unwrap();
    let t = *traj.times.last().unwrap();
    let err = traj.final_state.sub(&plane_wave_solution(&grid, &tw, k, left, t).unwrap()).unwrap().max_abs();
    let q0 = traj.charge[0];
    let drift = traj.charge.iter().fold(0.0f64, |a, q| a.max((q - q0).abs() / q0.abs()));
    (err, drift)
}

#[test]
fn criterion_09_evolution() {
    let (e1, _) = plane_wave_run(1.0, 0.0, true, 1);
    let (e2, _) = plane_wave_run(1.5, 0.5, false, 1);
    let (_, drift) = plane_wave_run(1.0, 0.0, true, 10);
    verdict(
        9,
        e1.max(e2) <= EVOLUTION_TOL && drift <= CHARGE_TOL,
        &format!("one-period error {e1:.2e} (k=1), {e2:.2e} (k=3/2); ten-period charge drift {drift:.1e}"),
    );
}

#[test]
fn criterion_10_symbol_report() {
    let grid = TorusGrid::uniform(2, SYMBOL_GRID).unwrap();
    let mut rng = FieldSampler::new(0x5_1A);
    let omega = [0.7, -1.3];
    let base = grid.flat_index(&[20, 36]);
    let twist = SpinStructureTwist::periodic(2);
    let mut dirac_dev = 0.0f64;
    for sig in [(2, 0), (1, 1)] {
        let rep = GammaRep::new(sig.0, sig.1).unwrap();
        let g = rng.metric(&grid, sig, 1, 0.2).unwrap();
        let geom = SpinGeometry::new(&rep, &g).unwrap();
        let emp = principal_symbol(|p| dirac(&geom, p), 1, &grid, &twist, 2, &omega, base).unwrap();
        dirac_dev = dirac_dev.max(cmax(&(emp - clifford_symbol(&geom, base, &omega))));
    }
    let rep = GammaRep::new(2, 0).unwrap();
    let (g, h) = rng.metric_pair(&grid, (2, 0), 1, 0.2).unwrap();
    let r = pullback_symbol_report(&rep, &g, &h, &omega, base, PULLBACK_SYMBOL_TOL).unwrap();
    let best = r.g_deviation.min(r.h_deviation);
    verdict(
        10,
        dirac_dev <= DIRAC_SYMBOL_TOL && best <= PULLBACK_SYMBOL_TOL && r.matches != QuadraticForm::Neither,
        &format!(
            "Dirac symbol deviation {dirac_dev:.1e}; pulled-back square matches {:?} (g-form off by {:.2e}, h-form off by {:.2e})",
            r.matches, r.g_deviation, r.h_deviation
        ),
    );
}

fn suite_configs() -> Vec<(&'static str, &'static str)> {
    vec![
        ("clifford-check", r#"{"dimension": 4, "signature": [3, 1], "grid": [8, 8, 8, 8]}"#),
        ("dirac-spectrum", r#"{"dimension": 1, "signature": [1, 0], "grid": [64], "twist": [0.5], "options": {"count": 12}}"#),
        ("dirac-apply", r#"{"dimension": 2, "signature": [2, 0], "grid": [16, 16], "metric": {"kind": "random", "seed": 1, "amplitude": 0.1},
            "spinors": [{"kind": "random", "seed": 2, "amplitude": 1.0}], "potential": {"kind": "random", "seed": 3, "amplitude": 0.3},
            "params": {"lambda": [0.5], "q": [1.0]}}"#),
        ("dirac-pullback", r#"{"dimension": 2, "signature": [2, 0], "grid": [16, 16], "metric": {"kind": "conformal", "factor": "0.1*sin(x1)"},
            "spinors": [{"kind": "random", "seed": 2, "amplitude": 1.0}],
            "options": {"target_metric": {"kind": "constant", "matrix": [[1.5, 0.2], [0.2, 0.8]]}}}"#),
        ("beta-transport", r#"{"dimension": 2, "signature": [1, 1], "grid": [16, 16], "metric": {"kind": "random", "seed": 4, "amplitude": 0.1},
            "spinors": [{"kind": "random", "seed": 2, "amplitude": 1.0}],
            "options": {"target_metric": {"kind": "conformal", "factor": "0.1*cos(x2)"}}}"#),
        ("edm-residual", r#"{"dimension": 3, "signature": [3, 0], "grid": [8, 8, 8], "metric": {"kind": "random", "seed": 5, "amplitude": 0.1},
            "spinors": [{"kind": "random", "seed": 6, "amplitude": 0.5}], "params": {"lambda": [0.2], "q": [0.5]}}"#),
        ("lagrangian", r#"{"dimension": 2, "signature": [2, 0], "grid": [16, 16], "metric": {"kind": "random", "seed": 5, "amplitude": 0.1},
            "spinors": [{"kind": "random", "seed": 6, "amplitude": 0.5}], "potential": {"kind": "random", "seed": 7, "amplitude": 0.3},
            "params": {"lambda": [0.2], "q": [0.5]}}"#),
        ("el-check", r#"{"dimension": 2, "signature": [2, 0], "grid": [16, 16], "metric": {"kind": "random", "seed": 5, "amplitude": 0.1},
            "spinors": [{"kind": "random", "seed": 6, "amplitude": 0.5}], "potential": {"kind": "random", "seed": 7, "amplitude": 0.3},
            "params": {"lambda": [0.2], "q": [0.5]}, "options": {"directions": 2, "seed": 9}}"#),
        ("constraints", r#"{"dimension": 3, "signature": [3, 0], "grid": [8, 8, 8], "metric": {"kind": "conformal", "factor": "0.1*sin(x3)"},
            "spinors": [{"kind": "random", "seed": 6, "amplitude": 0.5}], "params": {"lambda": [0.2], "q": [0.5]},
            "options": {"extrinsic": [["0.1*cos(x1)", "0", "0"], ["0", "0", "0"], ["0", "0", "0.05"]], "normal_potential": "sin(x2)"}}"#),
        ("wave-gauge", r#"{"dimension": 3, "signature": [2, 1], "grid": [8, 8, 8], "metric": {"kind": "random", "seed": 8, "amplitude": 0.1}}"#),
        ("symbol", r#"{"dimension": 2, "signature": [2, 0], "grid": [32, 32], "metric": {"kind": "random", "seed": 8, "amplitude": 0.1},
            "options": {"omega": [1, 0.5], "target_metric": {"kind": "conformal", "factor": "0.1*sin(x1)"}}}"#),
        ("evolve", r#"{"dimension": 1, "signature": [1, 0], "grid": [64], "twist": [0.5],
            "spinors": [{"kind": "plane-wave", "momentum": [1.5], "amplitude": [[1, 0], [0, 1]]}],
            "options": {"steps": 50, "stride": 25, "scale": "1 + 0.1*sin(x1)"}}"#),
    ]
}

fn suite_outputs() -> Vec<String> {
    let ctx = Context {
        profile: Profile::Default,
        base: PathBuf::from("."),
        signature: None,
    };
    let mut out = Vec::new();
    for (command, text) in suite_configs() {
        let cfg = RunConfig::from_json(text).unwrap();
        let o = run(command, Some(&cfg), &ctx).unwrap_or_else(|e| panic!("{command}: {e}"));
        out.push(o.report.to_json());
        for (name, contents) in o.files {
            out.push(format!("{command}/{name}\n{contents}"));
        }
    }
    out
}

#[test]
fn criterion_11_determinism() {
    let first = suite_outputs();
    let second = suite_outputs();
    let identical = first == second;
    let bytes: usize = first.iter().map(String::len).sum();
    verdict(
        11,
        identical,
        &format!("{} commands, {} documents, {bytes} bytes, byte-identical: {identical}", suite_configs().len(), first.len()),
    );
}
