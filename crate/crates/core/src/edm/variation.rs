use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::fields::{
    dirac_current, edm_residual_with, einstein_tensor, lagrangian_density_with, maxwell_stress, spinor_stress,
    EdmFields, EdmParams,
};
use crate::clifford::GammaRep;
use crate::error::{Error, Result};
use crate::grid::{
    codifferential, exterior_d, pair_one_forms, pair_tensors, volume_integrate, OneFormField, ScalarField,
    TensorField, TorusGrid,
};
use crate::random::FieldSampler;
use crate::spinor::{beta_transport, MetricPath, SpinGeometry, SpinStructureTwist, SpinorField};

/// A variation `(k, φ_i, a)` of metric, spinors and potential.
#[derive(Clone, Debug)]
pub struct Direction {
    pub metric: TensorField,
    pub spinors: Vec<SpinorField>,
    pub potential: OneFormField,
}

impl Direction {
    /// A smooth random direction with the given amplitudes.
    pub fn random(
        rng: &mut FieldSampler,
        fields: &EdmFields,
        amplitudes: (f64, f64, f64),
    ) -> Result<Self> {
        let grid = &fields.metric.grid;
        Ok(Self {
            metric: rng.symmetric_tensor(grid, 1, amplitudes.0),
            spinors: fields
                .spinors
                .iter()
                .map(|psi| rng.spinor(grid, &psi.twist, psi.spinor_dim, 1, amplitudes.1))
                .collect::<Result<_>>()?,
            potential: rng.one_form(grid, 1, amplitudes.2),
        })
    }

    fn check(&self, fields: &EdmFields) -> Result<()> {
        if self.spinors.len() != fields.spinors.len() {
            return Err(Error::DimensionMismatch {
                expected: fields.spinors.len(),
                found: self.spinors.len(),
            });
        }
        for (phi, psi) in self.spinors.iter().zip(&fields.spinors) {
            phi.check_compatible(psi)?;
        }
        fields.metric.grid.check_same(&self.metric.grid)?;
        fields.metric.grid.check_same(&self.potential.grid)
    }
}

/// `L(g + t k, β_{g,g+tk} ψ_i + t φ_i, A + t a)`.
pub fn varied_lagrangian(
    rep: &GammaRep,
    params: &EdmParams,
    fields: &EdmFields,
    dir: &Direction,
    t: f64,
) -> Result<f64> {
    let metric = fields.metric.perturbed(&dir.metric, t)?;
    let path = MetricPath::new(&fields.metric, &metric)?;
    let spinors = fields
        .spinors
        .iter()
        .zip(&dir.spinors)
        .map(|(psi, phi)| beta_transport(rep, &path, psi)?.add(&phi.scale(Complex64::new(t, 0.0))))
        .collect::<Result<Vec<_>>>()?;
    let varied = EdmFields {
        potential: fields.potential.add(&dir.potential.scale(t))?,
        metric,
        spinors,
    };
    let geom = SpinGeometry::new(rep, &varied.metric)?;
    volume_integrate(&varied.metric, &lagrangian_density_with(&geom, params, &varied)?)
}

/// Central differences of the varied action at steps `τ` and `τ/2`, and their
/// Richardson combination `(4 D(τ/2) − D(τ)) / 3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivative {
    pub richardson: f64,
    pub coarse: f64,
    pub fine: f64,
}

pub fn lagrangian_derivative(
    rep: &GammaRep,
    params: &EdmParams,
    fields: &EdmFields,
    dir: &Direction,
    step: f64,
) -> Result<Derivative> {
    fields.check(rep, params)?;
    dir.check(fields)?;
    let central = |tau: f64| -> Result<f64> {
        Ok((varied_lagrangian(rep, params, fields, dir, tau)? - varied_lagrangian(rep, params, fields, dir, -tau)?)
            / (2.0 * tau))
    };
    let coarse = central(step)?;
    let fine = central(0.5 * step)?;
    Ok(Derivative {
        richardson: (4.0 * fine - coarse) / 3.0,
        coarse,
        fine,
    })
}

/// `[∫⟨G − T, k⟩, ∫ Σ Re⟨R_i, φ_i⟩, ∫ g(Re R_A, a)]`, integrated against `dv^g`,
/// with `R_i` the Dirac residuals and `R_A` the Maxwell residual.
pub fn pairing_terms(rep: &GammaRep, params: &EdmParams, fields: &EdmFields, dir: &Direction) -> Result<[f64; 3]> {
    fields.check(rep, params)?;
    dir.check(fields)?;
    let g = &fields.metric;
    let geom = SpinGeometry::new(rep, g)?;
    let res = edm_residual_with(&geom, params, fields)?;
    let einstein = volume_integrate(g, &pair_tensors(g, &res.einstein, &dir.metric))?;
    let mut dirac = ScalarField::zeros(&g.grid);
    for (r, phi) in res.dirac.iter().zip(&dir.spinors) {
        let ip = r.inner_pointwise(rep, phi)?;
        for (d, z) in dirac.values.iter_mut().zip(ip) {
            *d += z.re;
        }
    }
    let dirac = volume_integrate(g, &dirac)?;
    let maxwell = volume_integrate(g, &pair_one_forms(g, &res.maxwell.re, &dir.potential))?;
    Ok([einstein, dirac, maxwell])
}

/// Normalization constants `(c₁, c₂, c₃)` relating the residual pairing to
/// the derivative of the action.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration {
    pub c: [f64; 3],
    /// Relative root-mean-square misfit of the least-squares fit.
    pub misfit: f64,
    pub directions: usize,
}

/// Seed, grid size and direction count of the calibration run.
pub const CALIBRATION_SEED: u64 = 0x5EED_CA1B;
pub const CALIBRATION_GRID: usize = 16;
pub const CALIBRATION_DIRECTIONS: usize = 9;
const STEP: f64 = 1e-3;

fn calibration_fields(rng: &mut FieldSampler, grid: &TorusGrid, rep: &GammaRep) -> Result<EdmFields> {
    let twist = SpinStructureTwist::periodic(grid.dim());
    Ok(EdmFields {
        metric: rng.metric(grid, rep.signature(), 1, 0.15)?,
        spinors: vec![rng.spinor(grid, &twist, rep.spinor_dim(), 1, 0.5)?],
        potential: rng.one_form(grid, 1, 0.4),
    })
}

/// Least-squares fit of `(c₁, c₂, c₃)` over random directions at one random
/// Riemannian configuration on a 16×16 torus.
pub fn calibrate() -> Result<Calibration> {
    let rep = GammaRep::new(2, 0)?;
    let grid = TorusGrid::uniform(2, CALIBRATION_GRID)?;
    let mut rng = FieldSampler::new(CALIBRATION_SEED);
    let params = EdmParams::single(0.7, 0.4);
    let fields = calibration_fields(&mut rng, &grid, &rep)?;
    let mut a = DMatrix::zeros(CALIBRATION_DIRECTIONS, 3);
    let mut b = DVector::zeros(CALIBRATION_DIRECTIONS);
    for row in 0..CALIBRATION_DIRECTIONS {
        let dir = Direction::random(&mut rng, &fields, (0.1, 0.3, 0.3))?;
        let terms = pairing_terms(&rep, &params, &fields, &dir)?;
        for (col, t) in terms.iter().enumerate() {
            a[(row, col)] = *t;
        }
        b[row] = lagrangian_derivative(&rep, &params, &fields, &dir, STEP)?.richardson;
    }
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::Config(format!("calibration solve failed: {e}")))?;
    let misfit = (&a * &c - &b).norm() / b.norm().max(f64::MIN_POSITIVE);
    Ok(Calibration {
        c: [c[0], c[1], c[2]],
        misfit,
        directions: CALIBRATION_DIRECTIONS,
    })
}

/// The calibration, computed once per process.
pub fn calibration() -> Result<Calibration> {
    static CACHE: OnceLock<std::result::Result<Calibration, String>> = OnceLock::new();
    CACHE
        .get_or_init(|| calibrate().map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::Config)
}

/// Outcome of one Euler–Lagrange consistency check.
#[derive(Clone, Debug, PartialEq)]
pub struct ElReport {
    pub dl: f64,
    pub derivative: Derivative,
    pub terms: [f64; 3],
    pub pairing: f64,
    pub gap: f64,
    /// `gap / max(|dL|, |pairing|)`, or 0 when both vanish.
    pub relative_gap: f64,
}

pub fn el_consistency(
    rep: &GammaRep,
    params: &EdmParams,
    fields: &EdmFields,
    dir: &Direction,
    step: f64,
) -> Result<ElReport> {
    let cal = calibration()?;
    let derivative = lagrangian_derivative(rep, params, fields, dir, step)?;
    let terms = pairing_terms(rep, params, fields, dir)?;
    let pairing: f64 = terms.iter().zip(&cal.c).map(|(t, c)| t * c).sum();
    let dl = derivative.richardson;
    let gap = (dl - pairing).abs();
    let scale = dl.abs().max(pairing.abs());
    Ok(ElReport {
        dl,
        derivative,
        terms,
        pairing,
        gap,
        relative_gap: if scale > 0.0 { gap / scale } else { 0.0 },
    })
}

/// Integrated building blocks of the exact first variation:
/// `[⟨G,k⟩, ⟨ΣT¹,k⟩, ⟨T²,k⟩, tr_g k · Σ Re⟨R_i,ψ_i⟩, Σ Re⟨R_i,φ_i⟩, g(δF,a), Σ q_i Im j_i(a)]`.
pub fn variation_terms(
    rep: &GammaRep,
    params: &EdmParams,
    fields: &EdmFields,
    dir: &Direction,
) -> Result<[f64; 7]> {
    let g = &fields.metric;
    let grid = &g.grid;
    let geom = SpinGeometry::new(rep, g)?;
    let res = edm_residual_with(&geom, params, fields)?;
    let a = &fields.potential;
    let k = &dir.metric;
    let mut t1 = TensorField::zeros(grid);
    for (psi, &q) in fields.spinors.iter().zip(&params.q) {
        t1 = t1.add(&spinor_stress(&geom, a, q, psi)?)?;
    }
    let f = exterior_d(a);
    let t2 = maxwell_stress(g, &f)?;
    let einstein = einstein_tensor(g)?;
    let m = g.dim();
    let trace = ScalarField {
        grid: grid.clone(),
        values: (0..grid.len())
            .map(|p| (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| g.inv(p, i, j) * k.at(p)[i * m + j]).sum())
            .collect(),
    };
    let mut on_shell = ScalarField::zeros(grid);
    let mut along = ScalarField::zeros(grid);
    let mut current = ScalarField::zeros(grid);
    for (i, psi) in fields.spinors.iter().enumerate() {
        let r = &res.dirac[i];
        for (p, z) in r.inner_pointwise(rep, psi)?.into_iter().enumerate() {
            on_shell.values[p] += trace.values[p] * z.re;
        }
        for (p, z) in r.inner_pointwise(rep, &dir.spinors[i])?.into_iter().enumerate() {
            along.values[p] += z.re;
        }
        let j = dirac_current(&geom, psi)?;
        let ja = pair_one_forms(g, &j.im, &dir.potential);
        for (c, v) in current.values.iter_mut().zip(ja.values) {
            *c += params.q[i] * v;
        }
    }
    let delta = codifferential(g, &f)?;
    Ok([
        volume_integrate(g, &pair_tensors(g, &einstein, k))?,
        volume_integrate(g, &pair_tensors(g, &t1, k))?,
        volume_integrate(g, &pair_tensors(g, &t2, k))?,
        volume_integrate(g, &on_shell)?,
        volume_integrate(g, &along)?,
        volume_integrate(g, &pair_one_forms(g, &delta, &dir.potential))?,
        volume_integrate(g, &current)?,
    ])
}

/// Coefficients of [`variation_terms`] in the exact first variation.
pub(crate) const VARIATION_COEFFICIENTS: [f64; 7] = [-1.0, 0.5, 1.0, -0.5, -2.0, -2.0, -1.0];

/// Exact first variation of the action along a direction, assembled from
/// the residual building blocks (Riemannian signature).
pub fn first_variation(rep: &GammaRep, params: &EdmParams, fields: &EdmFields, dir: &Direction) -> Result<f64> {
    fields.check(rep, params)?;
    dir.check(fields)?;
    let (r, s) = fields.metric.signature();
    if s != 0 {
        return Err(Error::NotRiemannian { r, s });
    }
    let terms = variation_terms(rep, params, fields, dir)?;
    Ok(terms.iter().zip(&VARIATION_COEFFICIENTS).map(|(t, c)| t * c).sum())
}

