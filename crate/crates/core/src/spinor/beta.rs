use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::dirac::{dirac, FirstOrderOperator, SpinGeometry};
use super::SpinorField;
use crate::clifford::{spin_lift_along, CMatrix, GammaRep};
use crate::error::{Error, Result};
use crate::grid::{christoffels, row_major, MetricField};
use crate::metric::{comparison_b, identification_rotation, joinable, BilinearForm, JOIN_SAMPLES};

/// The straight line `t ↦ g + t (h − g)` between two metric fields.
#[derive(Clone, Debug)]
pub struct MetricPath {
    pub g: MetricField,
    pub h: MetricField,
    pub samples: usize,
}

impl MetricPath {
    /// Checks sampled joinability at every grid point.
    pub fn new(g: &MetricField, h: &MetricField) -> Result<Self> {
        Self::with_samples(g, h, JOIN_SAMPLES)
    }

    pub fn with_samples(g: &MetricField, h: &MetricField, samples: usize) -> Result<Self> {
        g.grid.check_same(&h.grid)?;
        if g.signature() != h.signature() {
            let ((er, es), (r, s)) = (g.signature(), h.signature());
            return Err(Error::SignatureMismatch {
                expected_r: er,
                expected_s: es,
                r,
                s,
            });
        }
        if let Some(p) = (0..g.grid.len())
            .into_par_iter()
            .find_first(|&p| !joinable(&g.form(p), &h.form(p), samples))
        {
            return Err(Error::NotJoinable(format!("at grid point {p}")));
        }
        Ok(Self {
            g: g.clone(),
            h: h.clone(),
            samples,
        })
    }

    pub fn at(&self, t: f64) -> Result<MetricField> {
        self.g.lerp(&self.h, t)
    }

    pub fn reversed(&self) -> Self {
        Self {
            g: self.h.clone(),
            h: self.g.clone(),
            samples: self.samples,
        }
    }
}

/// The pointwise spin transformations realizing `β_{g,h}` in the fixed
/// frame trivializations of `g` and `h`.
#[derive(Clone, Debug)]
pub struct BetaField {
    pub lambdas: Vec<CMatrix>,
    pub rotations: Vec<DMatrix<f64>>,
}

impl BetaField {
    pub fn apply(&self, psi: &SpinorField) -> SpinorField {
        psi.map_matrices(&self.lambdas)
    }
}

/// Lifts `x ↦ O_t(x) = b_{η,g_t}⁻¹ b_{g,g_t} b_{η,g}` continuously in `t`
/// from `O_0 = I` at every grid point.
pub fn lift_field(rep: &GammaRep, path: &MetricPath) -> Result<BetaField> {
    let (r, s) = path.g.signature();
    if rep.signature() != (r, s) {
        return Err(Error::InvalidSignature { r, s });
    }
    let eta = BilinearForm::flat(r, s);
    let pairs: Vec<(CMatrix, DMatrix<f64>)> = (0..path.g.grid.len())
        .into_par_iter()
        .map(|p| {
            let g = path.g.form(p);
            let h = path.h.form(p);
            let lift = spin_lift_along(rep, |t| {
                identification_rotation(&eta, &g, &g.lerp(&h, t))
                    .map(|o| o.matrix)
                    .map_err(|e| match e {
                        Error::NotJoinable(why) => Error::NotJoinable(format!(
                            "intermediate metric at grid point {p}, t = {t:.3}, has no frame relative to the flat reference ({why})"
                        )),
                        other => other,
                    })
            })?;
            Ok((lift.lambda, lift.rotation))
        })
        .collect::<Result<_>>()?;
    let (lambdas, rotations) = pairs.into_iter().unzip();
    Ok(BetaField { lambdas, rotations })
}

/// `β_{g,h} ψ` for a spinor field over the start of `path`.
pub fn beta_transport(rep: &GammaRep, path: &MetricPath, psi: &SpinorField) -> Result<SpinorField> {
    path.g.grid.check_same(&psi.grid)?;
    Ok(lift_field(rep, path)?.apply(psi))
}

/// The pulled-back operator `β_{h,g} ∘ D^h ∘ β_{g,h}` written in the frame
/// of `g`: with `f_i = b_{g,h} e_i`,
///
/// `Σ ε_i e_i · ∇^g_{f_i} + ¼ Σ ε_i ε_j e_i · e_j · W_ij ·`,
/// `W_ij = b_{h,g}(∇^h_{f_i} f_j) − ∇^g_{f_i} e_j`.
pub fn pullback_operator(geom: &SpinGeometry, h: &MetricField) -> Result<FirstOrderOperator> {
    let g = &geom.metric;
    let grid = g.grid.clone();
    MetricPath::new(g, h)?;
    let m = g.dim();
    let n = geom.spinor_dim();
    let len = grid.len();
    let eps = geom.rep.epsilon().to_vec();
    let gamma_h = christoffels(h)?;
    let roots: Vec<(DMatrix<f64>, DMatrix<f64>)> = (0..len)
        .map(|p| {
            let (gp, hp) = (g.form(p), h.form(p));
            Ok((comparison_b(&gp, &hp)?.matrix, comparison_b(&hp, &gp)?.matrix))
        })
        .collect::<Result<_>>()?;
    let pushed: Vec<DMatrix<f64>> = (0..len).map(|p| &roots[p].0 * geom.frame(p)).collect();
    let flat_e: Vec<f64> = (0..len).flat_map(|p| row_major(geom.frame(p))).collect();
    let flat_f: Vec<f64> = pushed.iter().flat_map(row_major).collect();
    let de: Vec<Vec<f64>> = (0..m).map(|k| grid.derivative(&flat_e, m * m, k)).collect();
    let df: Vec<Vec<f64>> = (0..m).map(|k| grid.derivative(&flat_f, m * m, k)).collect();

    let mut first = Vec::with_capacity(len * m);
    let mut zeroth = Vec::with_capacity(len);
    for p in 0..len {
        let e = geom.frame(p);
        let f = &pushed[p];
        let mut sym = Vec::with_capacity(m);
        for k in 0..m {
            let mut c = CMatrix::zeros(n, n);
            for i in 0..m {
                c += geom.rep.gamma(i) * Complex64::new(eps[i] * f[(k, i)], 0.0);
            }
            sym.push(c);
        }
        let mut z = CMatrix::zeros(n, n);
        for (k, c) in sym.iter().enumerate() {
            z += c * geom.spinor_connection(p, k);
        }
        for i in 0..m {
            for j in 0..m {
                let mut nabla_h = vec![0.0; m];
                let mut nabla_g = vec![0.0; m];
                for a in 0..m {
                    for k in 0..m {
                        let fik = f[(k, i)];
                        let mut vh = df[k][p * m * m + a * m + j];
                        let mut vg = de[k][p * m * m + a * m + j];
                        for c in 0..m {
                            vh += gamma_h.get(p, a, k, c) * f[(c, j)];
                            vg += geom.christoffels.get(p, a, k, c) * e[(c, j)];
                        }
                        nabla_h[a] += fik * vh;
                        nabla_g[a] += fik * vg;
                    }
                }
                let back = &roots[p].1;
                let w: Vec<f64> = (0..m)
                    .map(|a| (0..m).map(|b| back[(a, b)] * nabla_h[b]).sum::<f64>() - nabla_g[a])
                    .collect();
                let cw = geom.clifford_at(p, &w);
                z += geom.rep.gamma_product(i, j) * cw * Complex64::new(0.25 * eps[i] * eps[j], 0.0);
            }
        }
        first.extend(sym);
        zeroth.push(z);
    }
    Ok(FirstOrderOperator {
        grid,
        spinor_dim: n,
        first,
        zeroth,
    })
}

/// `D^h_g ψ` through the local formula of [`pullback_operator`].
pub fn dirac_pullback(geom: &SpinGeometry, h: &MetricField, psi: &SpinorField) -> Result<SpinorField> {
    pullback_operator(geom, h)?.apply(psi)
}

/// Defects of `β_{g,h}` on a spinor field: round trip through `β_{h,g}`,
/// pointwise isometry, and intertwining `β(X·ψ) = (b_{g,h}X)·βψ` for each
/// coordinate vector `X`. All are maxima over the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaResiduals {
    pub round_trip: f64,
    pub isometry: f64,
    pub intertwining: f64,
}

pub fn beta_residuals(rep: &GammaRep, g: &MetricField, h: &MetricField, psi: &SpinorField) -> Result<BetaResiduals> {
    let path = MetricPath::new(g, h)?;
    let forward = beta_transport(rep, &path, psi)?;
    let back = beta_transport(rep, &path.reversed(), &forward)?;
    let round_trip = back.sub(psi)?.max_abs();
    let before = psi.inner_pointwise(rep, psi)?;
    let after = forward.inner_pointwise(rep, &forward)?;
    let isometry = before.iter().zip(&after).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
    let geom_g = SpinGeometry::new(rep, g)?;
    let geom_h = SpinGeometry::new(rep, h)?;
    let m = g.dim();
    let mut intertwining = 0.0f64;
    for k in 0..m {
        let mut x = vec![0.0; m];
        x[k] = 1.0;
        let left_mats: Vec<CMatrix> = (0..g.grid.len()).map(|p| geom_g.clifford_at(p, &x)).collect();
        let left = beta_transport(rep, &path, &psi.map_matrices(&left_mats))?;
        let right_mats = (0..g.grid.len())
            .map(|p| {
                let b = comparison_b(&g.form(p), &h.form(p))?.matrix;
                let bx: Vec<f64> = b.column(k).iter().copied().collect();
                Ok(geom_h.clifford_at(p, &bx))
            })
            .collect::<Result<Vec<_>>>()?;
        let right = forward.map_matrices(&right_mats);
        intertwining = intertwining.max(left.sub(&right)?.max_abs());
    }
    Ok(BetaResiduals {
        round_trip,
        isometry,
        intertwining,
    })
}

/// `β_{h,g} D^h β_{g,h} ψ` by transporting, differentiating over `h` and
/// transporting back; the composite route to [`dirac_pullback`].
pub fn conjugated_dirac(rep: &GammaRep, g: &MetricField, h: &MetricField, psi: &SpinorField) -> Result<SpinorField> {
    let forward = MetricPath::new(g, h)?;
    let over_h = beta_transport(rep, &forward, psi)?;
    let d = dirac(&SpinGeometry::new(rep, h)?, &over_h)?;
    beta_transport(rep, &forward.reversed(), &d)
}

/// `∇_{∂t} ψ_t` at `t`: the derivative of `s ↦ β_{g_s, g_t} ψ_s` at `s = t`,
/// by central differences with steps `step` and `step/2` combined by
/// Richardson extrapolation.
pub fn vertical_derivative<F>(rep: &GammaRep, path: &MetricPath, psi: F, t: f64, step: f64) -> Result<SpinorField>
where
    F: Fn(f64) -> Result<SpinorField>,
{
    let target = path.at(t)?;
    let central = |eps: f64| -> Result<SpinorField> {
        let fwd_metric = path.at(t + eps)?;
        let bwd_metric = path.at(t - eps)?;
        let fwd = beta_transport(rep, &MetricPath::new(&fwd_metric, &target)?, &psi(t + eps)?)?;
        let bwd = beta_transport(rep, &MetricPath::new(&bwd_metric, &target)?, &psi(t - eps)?)?;
        Ok(fwd.sub(&bwd)?.scale(Complex64::new(0.5 / eps, 0.0)))
    };
    let coarse = central(step)?;
    let fine = central(0.5 * step)?;
    fine.scale(Complex64::new(4.0 / 3.0, 0.0))
        .sub(&coarse.scale(Complex64::new(1.0 / 3.0, 0.0)))
}
