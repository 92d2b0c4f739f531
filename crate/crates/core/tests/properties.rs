use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use spinlab::cauchy::{evolution_rhs, evolve_dirac, EvolutionConfig};
use spinlab::cli::RunConfig;
use spinlab::clifford::{spin_lift, CMatrix, GammaRep};
use spinlab::grid::{MetricField, TorusGrid};
use spinlab::metric::{comparison_b, joinable, root_residual, JOIN_SAMPLES};
use spinlab::random::FieldSampler;
use spinlab::spinor::{beta_transport, dirac, MetricPath, SpinGeometry, SpinStructureTwist, SpinorField};

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn signature() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=5).prop_flat_map(|m| (0..=m).prop_map(move |s| (m - s, s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clifford_square_is_minus_norm(sig in signature(), seed in any::<u64>()) {
        let rep = GammaRep::new(sig.0, sig.1).unwrap();
        let v = FieldSampler::new(seed).vector(sig.0 + sig.1);
        let c = rep.clifford(&v);
        let norm: f64 = v.iter().zip(rep.epsilon()).map(|(x, e)| e * x * x).sum();
        let n = rep.spinor_dim();
        let defect = max_abs(&(&c * &c + CMatrix::identity(n, n) * Complex64::new(norm, 0.0)));
        prop_assert!(defect <= 1e-12 * (1.0 + norm.abs()));
    }

    #[test]
    fn root_map_relations(sig in signature(), seed in any::<u64>()) {
        let mut rng = FieldSampler::new(seed);
        let g = rng.form(sig, 0.3);
        let h = rng.form(sig, 0.3);
        prop_assume!(joinable(&g, &h, JOIN_SAMPLES));
        let b = comparison_b(&g, &h).unwrap().matrix;
        let back = comparison_b(&h, &g).unwrap().matrix;
        let m = sig.0 + sig.1;
        prop_assert!(root_residual(&g, &h, &b) <= 1e-12);
        prop_assert!((&back * &b - DMatrix::<f64>::identity(m, m)).amax() <= 1e-12);
    }

    #[test]
    fn spin_lift_covers_its_transformation(sig in signature(), seed in any::<u64>()) {
        let rep = GammaRep::new(sig.0, sig.1).unwrap();
        let m = sig.0 + sig.1;
        let mut rng = FieldSampler::new(seed);
        let eta = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(rep.epsilon()));
        let mut w = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i + 1..m {
                let x = rng.uniform(-0.8, 0.8);
                w[(i, j)] = x;
                w[(j, i)] = -x;
            }
        }
        let o = (&eta * w).exp();
        let lift = spin_lift(&rep, &o).unwrap();
        prop_assert!(lift.covariance_residual(&rep) <= 1e-10);
    }

    #[test]
    fn dirac_operator_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let grid = TorusGrid::uniform(2, 8).unwrap();
        let rep = GammaRep::new(2, 0).unwrap();
        let mut rng = FieldSampler::new(seed);
        let g = rng.metric(&grid, (2, 0), 1, 0.2).unwrap();
        let twist = SpinStructureTwist::new(&[0.5, 0.0]).unwrap();
        let psi = rng.spinor(&grid, &twist, 2, 1, 1.0).unwrap();
        let phi = rng.spinor(&grid, &twist, 2, 1, 1.0).unwrap();
        let geom = SpinGeometry::new(&rep, &g).unwrap();
        let (ca, cb) = (Complex64::new(a, 0.3), Complex64::new(b, -0.2));
        let lhs = dirac(&geom, &psi.scale(ca).add(&phi.scale(cb)).unwrap()).unwrap();
        let rhs = dirac(&geom, &psi).unwrap().scale(ca).add(&dirac(&geom, &phi).unwrap().scale(cb)).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn beta_is_isometric(seed in any::<u64>(), lorentzian in any::<bool>()) {
        let grid = TorusGrid::uniform(2, 8).unwrap();
        let sig = if lorentzian { (1, 1) } else { (2, 0) };
        let rep = GammaRep::new(sig.0, sig.1).unwrap();
        let mut rng = FieldSampler::new(seed);
        let (g, h) = rng.metric_pair(&grid, sig, 1, 0.2).unwrap();
        let psi = rng.spinor(&grid, &SpinStructureTwist::periodic(2), 2, 1, 1.0).unwrap();
        let moved = beta_transport(&rep, &MetricPath::new(&g, &h).unwrap(), &psi).unwrap();
        let before = psi.inner_pointwise(&rep, &psi).unwrap();
        let after = moved.inner_pointwise(&rep, &moved).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).norm() <= 1e-10 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn config_round_trip(half_n in 4usize..20, seed in any::<u64>(), amp in 0.0f64..0.5, half in any::<bool>()) {
        let n = 2 * half_n;
        let twist = if half { 0.5 } else { 0.0 };
        let text = format!(
            r#"{{"dimension": 1, "signature": [1, 0], "grid": [{n}], "twist": [{twist}],
                "metric": {{"kind": "random", "seed": {seed}, "amplitude": {amp}}},
                "spinors": [{{"kind": "random", "seed": {seed}, "amplitude": 1.0}}],
                "options": {{"steps": 3, "cfl": 0.4}}}}"#
        );
        let cfg = RunConfig::from_json(&text).unwrap();
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(&cfg, &again);
        prop_assert_eq!(cfg.hash(), again.hash());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn evolution_is_linear(seed in any::<u64>(), a in -2.0f64..2.0) {
        let mut cfg = EvolutionConfig::new(32, 0.5, 6, 0.5);
        cfg.lambda = 0.3;
        let grid = cfg.grid().unwrap();
        let twist = cfg.spin_structure().unwrap();
        let mut rng = FieldSampler::new(seed);
        let psi = rng.spinor(&grid, &twist, 2, 2, 1.0).unwrap();
        let phi = rng.spinor(&grid, &twist, 2, 2, 1.0).unwrap();
        let c = Complex64::new(a, 0.5);
        let combined = evolve_dirac(&cfg, &psi.add(&phi.scale(c)).unwrap()).unwrap().final_state;
        let separate = evolve_dirac(&cfg, &psi).unwrap().final_state
            .add(&evolve_dirac(&cfg, &phi).unwrap().final_state.scale(c)).unwrap();
        prop_assert!(combined.sub(&separate).unwrap().max_abs() <= 1e-12 * (1.0 + separate.max_abs()));
    }

    #[test]
    fn flat_evolution_commutes_with_translation(seed in any::<u64>(), shift in 1isize..31) {
        let cfg = EvolutionConfig::new(32, 0.5, 5, 0.0);
        let grid = cfg.grid().unwrap();
        let twist = cfg.spin_structure().unwrap();
        let psi = FieldSampler::new(seed).spinor(&grid, &twist, 2, 2, 1.0).unwrap();
        let moved_first = evolve_dirac(&cfg, &psi.shifted(&[shift])).unwrap().final_state;
        let moved_after = evolve_dirac(&cfg, &psi).unwrap().final_state.shifted(&[shift]);
        prop_assert!(moved_first.sub(&moved_after).unwrap().max_abs() <= 1e-13);
    }

    #[test]
    fn support_grows_by_at_most_eight_cells_per_step(start in 0usize..64, width in 1usize..6, steps in 1usize..4) {
        // RK4 applies the five-point stencil four times per step
        let n = 64;
        let cfg = EvolutionConfig::new(n, 0.5, steps, 0.0);
        let grid = cfg.grid().unwrap();
        let twist = cfg.spin_structure().unwrap();
        let mut values = vec![Complex64::new(0.0, 0.0); 2 * n];
        for k in 0..width {
            let p = (start + k) % n;
            values[2 * p] = Complex64::new(1.0, 0.0);
            values[2 * p + 1] = Complex64::new(0.0, -0.5);
        }
        let psi = SpinorField::from_values(&grid, &twist, 2, values).unwrap();
        let out = evolve_dirac(&cfg, &psi).unwrap().final_state;
        let reach = 8 * steps;
        for p in 0..n {
            let d = (0..width)
                .map(|k| {
                    let q = (start + k) % n;
                    let d = p.abs_diff(q);
                    d.min(n - d)
                })
                .min()
                .unwrap();
            if d > reach {
                prop_assert!(out.at(p).iter().all(|z| *z == Complex64::new(0.0, 0.0)), "point {p} at distance {d}");
            }
        }
    }

    #[test]
    fn rhs_of_zero_is_zero(t in 0.0f64..3.0) {
        let cfg = EvolutionConfig::new(16, 0.5, 1, 0.5);
        let zero = SpinorField::zeros(&cfg.grid().unwrap(), &cfg.spin_structure().unwrap(), 2);
        prop_assert_eq!(evolution_rhs(&cfg, t, &zero).unwrap().max_abs(), 0.0);
    }
}

#[test]
fn flat_metric_field_is_its_own_pair() {
    let grid = TorusGrid::uniform(2, 8).unwrap();
    let g = MetricField::flat(&grid, 1, 1).unwrap();
    let rep = GammaRep::new(1, 1).unwrap();
    let psi = FieldSampler::new(1).spinor(&grid, &SpinStructureTwist::periodic(2), 2, 1, 1.0).unwrap();
    let same = beta_transport(&rep, &MetricPath::new(&g, &g).unwrap(), &psi).unwrap();
    assert_eq!(same.sub(&psi).unwrap().max_abs(), 0.0);
}
