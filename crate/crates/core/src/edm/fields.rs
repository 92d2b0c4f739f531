use num_complex::Complex64;

use crate::clifford::{CMatrix, GammaRep};
use crate::error::{Error, Result};
use crate::grid::{
    codifferential, curvature, exterior_d, pair_two_forms, raise_two, volume_integrate, MetricField, OneFormField,
    ScalarField, TensorField, TwoFormField, VectorField,
};
use crate::spinor::{SpinGeometry, SpinorField};

/// Masses `λ_i` and charges `q_i` of a system of spinor fields.
#[derive(Clone, Debug, PartialEq)]
pub struct EdmParams {
    pub lambda: Vec<f64>,
    pub q: Vec<f64>,
}

impl EdmParams {
    pub fn new(lambda: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if lambda.len() != q.len() {
            return Err(Error::DimensionMismatch {
                expected: lambda.len(),
                found: q.len(),
            });
        }
        Ok(Self { lambda, q })
    }

    pub fn single(lambda: f64, q: f64) -> Self {
        Self {
            lambda: vec![lambda],
            q: vec![q],
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// A metric, spinor fields over it and a potential.
#[derive(Clone, Debug)]
pub struct EdmFields {
    pub metric: MetricField,
    pub spinors: Vec<SpinorField>,
    pub potential: OneFormField,
}

impl EdmFields {
    pub(crate) fn check(&self, rep: &GammaRep, params: &EdmParams) -> Result<()> {
        if self.spinors.len() != params.len() {
            return Err(Error::DimensionMismatch {
                expected: params.len(),
                found: self.spinors.len(),
            });
        }
        self.metric.grid.check_same(&self.potential.grid)?;
        for psi in &self.spinors {
            self.metric.grid.check_same(&psi.grid)?;
            if psi.spinor_dim != rep.spinor_dim() {
                return Err(Error::DimensionMismatch {
                    expected: rep.spinor_dim(),
                    found: psi.spinor_dim,
                });
            }
        }
        Ok(())
    }
}

/// A complex-valued one-form in coordinate components.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOneForm {
    pub re: OneFormField,
    pub im: OneFormField,
}

impl ComplexOneForm {
    pub fn max_abs(&self) -> f64 {
        self.re
            .values
            .iter()
            .zip(&self.im.values)
            .fold(0.0, |a, (x, y)| a.max(x.hypot(*y)))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            re: self.re.scale(c),
            im: self.im.scale(c),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            re: self.re.add(&other.re)?,
            im: self.im.add(&other.im)?,
        })
    }
}

/// Clifford multiplication by `∂_k` at point `p`.
fn coordinate_clifford(geom: &SpinGeometry, p: usize, k: usize) -> CMatrix {
    let m = geom.dim();
    let mut v = vec![0.0; m];
    v[k] = 1.0;
    geom.clifford_at(p, &v)
}

fn coordinate_derivatives(
    geom: &SpinGeometry,
    potential: Option<(&OneFormField, f64)>,
    psi: &SpinorField,
) -> Result<Vec<SpinorField>> {
    let m = geom.dim();
    (0..m)
        .map(|k| {
            let x = VectorField::from_fn(geom.grid(), |_| {
                let mut v = vec![0.0; m];
                v[k] = 1.0;
                v
            });
            geom.covariant_derivative(potential, psi, &x)
        })
        .collect()
}

/// `j_ψ(∂_k) = ⟨∂_k · ψ, ψ⟩`.
pub fn dirac_current(geom: &SpinGeometry, psi: &SpinorField) -> Result<ComplexOneForm> {
    let grid = geom.grid();
    grid.check_same(&psi.grid)?;
    let m = geom.dim();
    let mut re = OneFormField::zeros(grid);
    let mut im = OneFormField::zeros(grid);
    let mut buf = vec![Complex64::new(0.0, 0.0); psi.spinor_dim];
    for p in 0..grid.len() {
        for k in 0..m {
            let c = coordinate_clifford(geom, p, k);
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            crate::spinor::mat_vec_add_pub(&c, psi.at(p), &mut buf);
            let j = geom.rep.inner_unchecked(&buf, psi.at(p));
            re.values[p * m + k] = j.re;
            im.values[p * m + k] = j.im;
        }
    }
    Ok(ComplexOneForm { re, im })
}

/// `T¹_ab = ½ Re⟨∂_a · ∇_b ψ + ∂_b · ∇_a ψ, ψ⟩` for `∇ = ∇^{g,qA}`.
pub fn spinor_stress(geom: &SpinGeometry, potential: &OneFormField, q: f64, psi: &SpinorField) -> Result<TensorField> {
    let grid = geom.grid();
    let m = geom.dim();
    let n = psi.spinor_dim;
    let nabla = coordinate_derivatives(geom, Some((potential, q)), psi)?;
    let mut out = TensorField::zeros(grid);
    for p in 0..grid.len() {
        let cl: Vec<CMatrix> = (0..m).map(|k| coordinate_clifford(geom, p, k)).collect();
        // ⟨∂_a · ∇_b ψ, ψ⟩
        let mut pair = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                crate::spinor::mat_vec_add_pub(&cl[a], nabla[b].at(p), &mut buf);
                pair[a * m + b] = geom.rep.inner_unchecked(&buf, psi.at(p)).re;
            }
        }
        for a in 0..m {
            for b in 0..m {
                out.values[p * m * m + a * m + b] = 0.5 * (pair[a * m + b] + pair[b * m + a]);
            }
        }
    }
    Ok(out)
}

/// `T²_ab = g^cd F_ac F_bd − ¼ F_cd F^cd g_ab`.
pub fn maxwell_stress(g: &MetricField, f: &TwoFormField) -> Result<TensorField> {
    g.grid.check_same(&f.grid)?;
    let m = g.dim();
    let mut out = TensorField::zeros(&g.grid);
    for p in 0..g.grid.len() {
        let fp = f.at(p);
        let up = raise_two(g, fp, p);
        let square: f64 = fp.iter().zip(&up).map(|(a, b)| a * b).sum();
        for a in 0..m {
            for b in 0..m {
                let mut v = 0.0;
                for c in 0..m {
                    for d in 0..m {
                        v += g.inv(p, c, d) * fp[a * m + c] * fp[b * m + d];
                    }
                }
                out.values[p * m * m + a * m + b] = v - 0.25 * square * g.get(p, a, b);
            }
        }
    }
    Ok(out)
}

/// `Σ_i T¹(q_i, ψ_i) + T²`.
pub fn energy_momentum(
    geom: &SpinGeometry,
    params: &EdmParams,
    spinors: &[SpinorField],
    potential: &OneFormField,
) -> Result<TensorField> {
    if spinors.len() != params.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            found: spinors.len(),
        });
    }
    let mut total = maxwell_stress(&geom.metric, &exterior_d(potential))?;
    for (psi, &q) in spinors.iter().zip(&params.q) {
        total = total.add(&spinor_stress(geom, potential, q, psi)?)?;
    }
    Ok(total)
}

/// `Ric − ½ scal g`.
pub fn einstein_tensor(g: &MetricField) -> Result<TensorField> {
    let (ric, scal) = curvature(g)?;
    let m = g.dim();
    let mut out = ric;
    for p in 0..g.grid.len() {
        for a in 0..m {
            for b in 0..m {
                out.values[p * m * m + a * m + b] -= 0.5 * scal.values[p] * g.get(p, a, b);
            }
        }
    }
    Ok(out)
}

/// The three residual components: Einstein, one Dirac residual per field,
/// and Maxwell (complex, since the current is).
#[derive(Clone, Debug)]
pub struct EdmResidual {
    pub einstein: TensorField,
    pub dirac: Vec<SpinorField>,
    pub maxwell: ComplexOneForm,
}

impl EdmResidual {
    /// Maximal pointwise magnitudes `(einstein, dirac, maxwell)`.
    pub fn norms(&self) -> (f64, f64, f64) {
        (
            self.einstein.max_abs(),
            self.dirac.iter().map(SpinorField::max_abs).fold(0.0, f64::max),
            self.maxwell.max_abs(),
        )
    }
}

pub(crate) fn edm_residual_with(
    geom: &SpinGeometry,
    params: &EdmParams,
    fields: &EdmFields,
) -> Result<EdmResidual> {
    let g = &fields.metric;
    let a = &fields.potential;
    let einstein = einstein_tensor(g)?.sub(&energy_momentum(geom, params, &fields.spinors, a)?)?;
    let mut dirac = Vec::with_capacity(params.len());
    let mut current = ComplexOneForm {
        re: OneFormField::zeros(&g.grid),
        im: OneFormField::zeros(&g.grid),
    };
    for ((psi, &lambda), &q) in fields.spinors.iter().zip(&params.lambda).zip(&params.q) {
        let d = geom.dirac_operator(Some((a, q)))?.apply(psi)?;
        dirac.push(d.sub(&psi.scale(Complex64::new(lambda, 0.0)))?);
        current = current.add(&dirac_current(geom, psi)?.scale(q))?;
    }
    let delta = codifferential(g, &exterior_d(a))?;
    let maxwell = ComplexOneForm {
        re: delta.sub(&current.re)?,
        im: current.im.scale(-1.0),
    };
    Ok(EdmResidual {
        einstein,
        dirac,
        maxwell,
    })
}

/// `(G − Σ T¹_i − T², D^{g,q_i A} ψ_i − λ_i ψ_i, δF − Σ q_i j_{ψ_i})`.
pub fn edm_residual(rep: &GammaRep, params: &EdmParams, fields: &EdmFields) -> Result<EdmResidual> {
    fields.check(rep, params)?;
    let geom = SpinGeometry::new(rep, &fields.metric)?;
    edm_residual_with(&geom, params, fields)
}

/// `scal + Σ_i (λ_i ⟨ψ_i, ψ_i⟩ − Re⟨D^{g,q_i A} ψ_i, ψ_i⟩) − ½ F_cd F^cd`.
pub fn lagrangian_density(rep: &GammaRep, params: &EdmParams, fields: &EdmFields) -> Result<ScalarField> {
    fields.check(rep, params)?;
    let geom = SpinGeometry::new(rep, &fields.metric)?;
    lagrangian_density_with(&geom, params, fields)
}

pub(crate) fn lagrangian_density_with(
    geom: &SpinGeometry,
    params: &EdmParams,
    fields: &EdmFields,
) -> Result<ScalarField> {
    let g = &fields.metric;
    let (_, scal) = curvature(g)?;
    let f = exterior_d(&fields.potential);
    let mut density = scal.sub(&pair_two_forms(g, &f, &f))?;
    for ((psi, &lambda), &q) in fields.spinors.iter().zip(&params.lambda).zip(&params.q) {
        let d = geom.dirac_operator(Some((&fields.potential, q)))?.apply(psi)?;
        let mass = psi.inner_pointwise(&geom.rep, psi)?;
        let kinetic = d.inner_pointwise(&geom.rep, psi)?;
        for p in 0..g.grid.len() {
            density.values[p] += lambda * mass[p].re - kinetic[p].re;
        }
    }
    Ok(density)
}

/// The action: [`lagrangian_density`] integrated against `dv^g`.
pub fn lagrangian(rep: &GammaRep, params: &EdmParams, fields: &EdmFields) -> Result<f64> {
    volume_integrate(&fields.metric, &lagrangian_density(rep, params, fields)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::spinor::SpinStructureTwist;

    #[test]
    fn trivial_data_has_zero_residual() {
        let grid = TorusGrid::uniform(2, 8).unwrap();
        for sig in [(2, 0), (1, 1)] {
            let rep = GammaRep::new(sig.0, sig.1).unwrap();
            let fields = EdmFields {
                metric: MetricField::flat(&grid, sig.0, sig.1).unwrap(),
                spinors: vec![SpinorField::zeros(&grid, &SpinStructureTwist::periodic(2), 2)],
                potential: OneFormField::zeros(&grid),
            };
            let res = edm_residual(&rep, &EdmParams::single(0.7, -1.2), &fields).unwrap();
            assert_eq!(res.norms(), (0.0, 0.0, 0.0));
            assert_eq!(lagrangian(&rep, &EdmParams::single(0.7, -1.2), &fields).unwrap(), 0.0);
        }
    }

    #[test]
    fn params_lengths_must_agree() {
        assert!(EdmParams::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn constant_field_strength_stress() {
        let grid = TorusGrid::uniform(2, 8).unwrap();
        let g = MetricField::flat(&grid, 2, 0).unwrap();
        let c = 1.7;
        let f = TwoFormField::from_fn(&grid, |_| nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, c, -c, 0.0]));
        let t = maxwell_stress(&g, &f).unwrap();
        // F_ac F_bc − ¼ (2c²) δ_ab = c² δ_ab − ½ c² δ_ab
        for p in 0..grid.len() {
            let tp = t.at(p);
            assert!((tp[0] - 0.5 * c * c).abs() < 1e-14);
            assert!((tp[3] - 0.5 * c * c).abs() < 1e-14);
            assert!(tp[1].abs() < 1e-14);
        }
    }
}
