//! Dirac evolution on a fixed 1+1 background `a(t,x)² dx² − α(t,x)² dt²`
//! over the circle, by the method of lines with classical Runge–Kutta.
//!
//! Spinors live in the `(1,1)` representation; generator 0 is `∂_x / a`
//! and generator 1 is the unit normal `∂_t / α`. Solving `D ψ = λ ψ` for
//! the time derivative gives
//! `∂_t ψ = (α/a) M ∂_x ψ − (∂_t a / 2a) ψ − (∂_x α / 2a) γ₀γ₁ ψ − α λ γ₁ ψ`
//! with the hermitian involution `M = γ₁γ₀`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::clifford::{CMatrix, GammaRep};
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::spinor::{mat_vec_add_pub as mat_vec_add, SpinStructureTwist, SpinorField};

/// Largest admissible CFL fraction.
pub const MAX_CFL: f64 = 0.9;
/// Step of the central differences used on the background closures.
const CLOSURE_STEP: f64 = 1e-3;

type Profile = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Spatial scale `a(t, x)` and lapse `α(t, x)` of the background.
#[derive(Clone)]
pub struct Background {
    scale: Profile,
    lapse: Profile,
}

impl fmt::Debug for Background {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Background").finish_non_exhaustive()
    }
}

impl Background {
    pub fn new(
        scale: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lapse: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            scale: Arc::new(scale),
            lapse: Arc::new(lapse),
        }
    }

    /// The flat cylinder `dx² − dt²`.
    pub fn minkowski() -> Self {
        Self::new(|_, _| 1.0, |_, _| 1.0)
    }

    pub fn scale(&self, t: f64, x: f64) -> f64 {
        (self.scale)(t, x)
    }

    pub fn lapse(&self, t: f64, x: f64) -> f64 {
        (self.lapse)(t, x)
    }

    fn central(f: &Profile, t: f64, x: f64, along_t: bool) -> f64 {
        let h = CLOSURE_STEP;
        let at = |s: f64| if along_t { f(t + s, x) } else { f(t, x + s) };
        (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
    }
}

/// Setup of one evolution run.
#[derive(Clone, Debug)]
pub struct EvolutionConfig {
    pub points: usize,
    pub background: Background,
    /// Time step as a fraction of `h / max(α/a)` at the initial time.
    pub cfl: f64,
    pub steps: usize,
    /// Boundary twist of the circle: 0 or ½.
    pub twist: f64,
    pub lambda: f64,
    /// Keep every `stride`-th state (and the last one).
    pub stride: usize,
}

impl EvolutionConfig {
    pub fn new(points: usize, cfl: f64, steps: usize, twist: f64) -> Self {
        Self {
            points,
            background: Background::minkowski(),
            cfl,
            steps,
            twist,
            lambda: 0.0,
            stride: 0,
        }
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(&[self.points])
    }

    pub fn spin_structure(&self) -> Result<SpinStructureTwist> {
        SpinStructureTwist::new(&[self.twist])
    }

    fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= MAX_CFL) {
            return Err(Error::Config(format!("CFL fraction {} outside (0, {MAX_CFL}]", self.cfl)));
        }
        self.spin_structure()?;
        Ok(())
    }
}

/// Time series and sampled states of an evolution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    /// `Q(t) = ∫ ⟨ν·ψ, ψ⟩ a dx`.
    pub charge: Vec<f64>,
    pub max_norm: Vec<f64>,
    pub samples: Vec<(f64, SpinorField)>,
    pub final_state: SpinorField,
}

struct Stepper {
    rep: GammaRep,
    /// `γ₁γ₀`.
    transport: CMatrix,
    /// `γ₀γ₁`.
    rotation: CMatrix,
    background: Background,
    lambda: f64,
    grid: TorusGrid,
}

impl Stepper {
    fn rhs(&self, t: f64, psi: &SpinorField) -> Result<SpinorField> {
        let dx = psi.partial(0)?;
        let mut out = psi.clone();
        let bg = &self.background;
        let g1 = self.rep.gamma(1);
        for p in 0..self.grid.len() {
            let x = self.grid.point(p)[0];
            let a = bg.scale(t, x);
            let alpha = bg.lapse(t, x);
            let da_dt = Background::central(&bg.scale, t, x, true);
            let dalpha_dx = Background::central(&bg.lapse, t, x, false);
            let mut acc = vec![Complex64::new(0.0, 0.0); 2];
            let v: Vec<Complex64> = dx.at(p).iter().map(|z| z * (alpha / a)).collect();
            mat_vec_add(&self.transport, &v, &mut acc);
            let w: Vec<Complex64> = psi.at(p).iter().map(|z| z * (-dalpha_dx / (2.0 * a))).collect();
            mat_vec_add(&self.rotation, &w, &mut acc);
            let w: Vec<Complex64> = psi.at(p).iter().map(|z| z * (-alpha * self.lambda)).collect();
            mat_vec_add(g1, &w, &mut acc);
            for (y, z) in acc.iter_mut().zip(psi.at(p)) {
                *y -= z * (da_dt / (2.0 * a));
            }
            out.at_mut(p).copy_from_slice(&acc);
        }
        Ok(out)
    }

    fn max_speed(&self, t: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in 0..self.grid.len() {
            let x = self.grid.point(p)[0];
            let (a, alpha) = (self.background.scale(t, x), self.background.lapse(t, x));
            if !(a > 0.0 && alpha > 0.0) {
                return Err(Error::Config(format!(
                    "background not globally hyperbolic at t = {t}, x = {x}: a = {a}, α = {alpha}"
                )));
            }
            worst = worst.max(alpha / a);
        }
        Ok(worst)
    }

    fn charge(&self, t: f64, psi: &SpinorField) -> f64 {
        let h = self.grid.spacing(0);
        let nu = self.rep.gamma(1);
        (0..self.grid.len())
            .map(|p| {
                let mut buf = vec![Complex64::new(0.0, 0.0); 2];
                mat_vec_add(nu, psi.at(p), &mut buf);
                self.rep.inner_unchecked(&buf, psi.at(p)).re * self.background.scale(t, self.grid.point(p)[0])
            })
            .sum::<f64>()
            * h
    }

    fn rk4(&self, t: f64, dt: f64, psi: &SpinorField) -> Result<SpinorField> {
        let c = |x: f64| Complex64::new(x, 0.0);
        let k1 = self.rhs(t, psi)?;
        let k2 = self.rhs(t + 0.5 * dt, &psi.add(&k1.scale(c(0.5 * dt)))?)?;
        let k3 = self.rhs(t + 0.5 * dt, &psi.add(&k2.scale(c(0.5 * dt)))?)?;
        let k4 = self.rhs(t + dt, &psi.add(&k3.scale(c(dt)))?)?;
        let incr = k1.add(&k2.scale(c(2.0)))?.add(&k3.scale(c(2.0)))?.add(&k4)?;
        psi.add(&incr.scale(c(dt / 6.0)))
    }
}

/// Right-hand side `∂_t ψ` of the evolution at time `t`.
pub fn evolution_rhs(cfg: &EvolutionConfig, t: f64, psi: &SpinorField) -> Result<SpinorField> {
    stepper(cfg, psi)?.rhs(t, psi)
}

fn stepper(cfg: &EvolutionConfig, psi: &SpinorField) -> Result<Stepper> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    grid.check_same(&psi.grid)?;
    if psi.twist != cfg.spin_structure()? {
        return Err(Error::TwistMismatch);
    }
    let rep = GammaRep::new(1, 1)?;
    if psi.spinor_dim != rep.spinor_dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.spinor_dim(),
            found: psi.spinor_dim,
        });
    }
    Ok(Stepper {
        transport: rep.gamma(1) * rep.gamma(0),
        rotation: rep.gamma(0) * rep.gamma(1),
        rep,
        background: cfg.background.clone(),
        lambda: cfg.lambda,
        grid,
    })
}

/// Integrates the Dirac equation from `psi0` at `t = 0`.
///
/// Aborts with [`Error::Evolution`] when the charge exceeds twice its
/// initial value, becomes non-finite, or the step leaves the CFL bound.
pub fn evolve_dirac(cfg: &EvolutionConfig, psi0: &SpinorField) -> Result<Trajectory> {
    let st = stepper(cfg, psi0)?;
    let h = st.grid.spacing(0);
    let dt = cfg.cfl * h / st.max_speed(0.0)?;
    let q0 = st.charge(0.0, psi0);
    let mut psi = psi0.clone();
    let mut out = Trajectory {
        dt,
        times: vec![0.0],
        charge: vec![q0],
        max_norm: vec![psi.max_abs()],
        samples: vec![(0.0, psi.clone())],
        final_state: psi0.clone(),
    };
    for step in 1..=cfg.steps {
        let t = (step - 1) as f64 * dt;
        if st.max_speed(t)? * dt > MAX_CFL * h {
            return Err(Error::Evolution {
                step,
                reason: format!("CFL bound {MAX_CFL} exceeded"),
            });
        }
        psi = st.rk4(t, dt, &psi)?;
        let tn = step as f64 * dt;
        let q = st.charge(tn, &psi);
        if !q.is_finite() || q.abs() > 2.0 * q0.abs().max(f64::MIN_POSITIVE) && q0 != 0.0 {
            return Err(Error::Evolution {
                step,
                reason: format!("charge blow-up: {q:e} against initial {q0:e}"),
            });
        }
        out.times.push(tn);
        out.charge.push(q);
        out.max_norm.push(psi.max_abs());
        if (cfg.stride > 0 && step % cfg.stride == 0) || step == cfg.steps {
            out.samples.push((tn, psi.clone()));
        }
    }
    out.final_state = psi;
    Ok(out)
}

/// Eigenvectors of `γ₁γ₀` for the eigenvalues `+1` and `−1`: data moving
/// left and right at unit speed on the flat cylinder.
pub fn characteristic_vectors() -> Result<[Vec<Complex64>; 2]> {
    let rep = GammaRep::new(1, 1)?;
    let m = rep.gamma(1) * rep.gamma(0);
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..2)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok([pairs[0].1.clone(), pairs[1].1.clone()])
}

/// `e^{ik(x + t)} v₊` or `e^{ik(x − t)} v₋` on the flat cylinder.
pub fn plane_wave_solution(
    grid: &TorusGrid,
    twist: &SpinStructureTwist,
    k: f64,
    left_moving: bool,
    t: f64,
) -> Result<SpinorField> {
    let [plus, minus] = characteristic_vectors()?;
    let (v, sign) = if left_moving { (plus, 1.0) } else { (minus, -1.0) };
    let phase = Complex64::from_polar(1.0, sign * k * t);
    let v: Vec<Complex64> = v.iter().map(|z| z * phase).collect();
    SpinorField::plane_wave(grid, twist, &[k], &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::MetricField;
    use crate::spinor::SpinGeometry;
    use nalgebra::DMatrix;

    #[test]
    fn zero_data_stays_zero() {
        let cfg = EvolutionConfig::new(32, 0.5, 20, 0.5);
        let psi = SpinorField::zeros(&cfg.grid().unwrap(), &cfg.spin_structure().unwrap(), 2);
        let tr = evolve_dirac(&cfg, &psi).unwrap();
        assert_eq!(tr.final_state.max_abs(), 0.0);
        assert!(tr.charge.iter().all(|q| *q == 0.0));
    }

    #[test]
    fn characteristic_vectors_are_eigenvectors() {
        let rep = GammaRep::new(1, 1).unwrap();
        let m = rep.gamma(1) * rep.gamma(0);
        let [p, q] = characteristic_vectors().unwrap();
        let p = nalgebra::DVector::from_vec(p);
        let q = nalgebra::DVector::from_vec(q);
        assert!((&m * &p - &p).norm() < 1e-14);
        assert!((&m * &q + &q).norm() < 1e-14);
    }

    #[test]
    fn cfl_above_bound_is_rejected() {
        let cfg = EvolutionConfig::new(32, 0.95, 1, 0.0);
        let psi = SpinorField::zeros(&cfg.grid().unwrap(), &cfg.spin_structure().unwrap(), 2);
        assert!(matches!(evolve_dirac(&cfg, &psi), Err(Error::Config(_))));
    }

    /// The right-hand side equals `∂_t ψ + α γ₁ (D ψ − λ ψ)` for the
    /// two-dimensional Dirac operator of the background.
    #[test]
    fn rhs_matches_spacetime_dirac_operator() {
        let n = 128;
        let scale = |t: f64, x: f64| 1.0 + 0.2 * (x + t).sin();
        let lapse = |t: f64, x: f64| 1.1 + 0.15 * (2.0 * x).cos() * t.cos();
        let lambda = 0.35;
        let grid = TorusGrid::new(&[n, n]).unwrap();
        let metric = MetricField::from_fn(&grid, |y| {
            let (x, t) = (y[0], y[1]);
            DMatrix::from_row_slice(2, 2, &[scale(t, x).powi(2), 0.0, 0.0, -lapse(t, x).powi(2)])
        })
        .unwrap();
        let rep = GammaRep::new(1, 1).unwrap();
        let geom = SpinGeometry::new(&rep, &metric).unwrap();
        let twist = SpinStructureTwist::periodic(2);
        let psi = SpinorField::from_fn(&grid, &twist, 2, |y| {
            vec![
                Complex64::new((y[0] + 2.0 * y[1]).cos(), 0.3 * y[1].sin()),
                Complex64::new(0.5 * (2.0 * y[0]).sin(), (y[0] - y[1]).cos()),
            ]
        })
        .unwrap();
        let d = geom.dirac_operator(None).unwrap().apply(&psi).unwrap();
        let dt = psi.partial(1).unwrap();

        let mut cfg = EvolutionConfig::new(n, 0.5, 1, 0.0);
        cfg.background = Background::new(scale, lapse);
        cfg.lambda = lambda;
        let slice = cfg.grid().unwrap();
        let row = 5;
        let t = grid.point(grid.flat_index(&[0, row]))[1];
        let mut psi_t = SpinorField::zeros(&slice, &cfg.spin_structure().unwrap(), 2);
        for i in 0..n {
            psi_t.at_mut(i).copy_from_slice(psi.at(grid.flat_index(&[i, row])));
        }
        let rhs = evolution_rhs(&cfg, t, &psi_t).unwrap();
        let mut worst = 0.0f64;
        for i in 0..n {
            let p = grid.flat_index(&[i, row]);
            let x = grid.point(p)[0];
            let r: Vec<Complex64> = d.at(p).iter().zip(psi.at(p)).map(|(a, b)| a - b * lambda).collect();
            let mut expected = dt.at(p).to_vec();
            let scaled: Vec<Complex64> = r.iter().map(|z| z * lapse(t, x)).collect();
            mat_vec_add(rep.gamma(1), &scaled, &mut expected);
            for (a, b) in expected.iter().zip(rhs.at(i)) {
                worst = worst.max((a - b).norm());
            }
        }
        assert!(worst < 2e-6, "{worst}");
    }
}
