use num_complex::Complex64;

use super::fields::EdmParams;
use crate::clifford::{CMatrix, GammaRep};
use crate::error::{Error, Result};
use crate::grid::{
    christoffels, curvature, exterior_d, pair_two_forms, MetricField, OneFormField, ScalarField, TensorField,
    VectorField,
};
use crate::spinor::{mat_vec_add_pub as mat_vec_add, SpinGeometry, SpinorField};

/// A spacetime one-form along a hypersurface: its tangential part and its
/// value on the unit normal.
#[derive(Clone, Debug)]
pub struct SpacetimeOneForm {
    pub spatial: OneFormField,
    pub normal: ScalarField,
}

impl SpacetimeOneForm {
    pub fn zeros(grid: &crate::grid::TorusGrid) -> Self {
        Self {
            spatial: OneFormField::zeros(grid),
            normal: ScalarField::zeros(grid),
        }
    }
}

/// Initial data on a Riemannian torus slice.
///
/// `k` is the second fundamental form `K(X, Y) = g(∇_X ν, Y)`, `psi0` are
/// spacetime spinors restricted to the slice (spinor dimension of the
/// Lorentzian representation one dimension up), `a0` is the restricted
/// potential and `a1` its covariant normal derivative `∇_ν A`.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub g0: MetricField,
    pub k: TensorField,
    pub psi0: Vec<SpinorField>,
    pub a0: SpacetimeOneForm,
    pub a1: SpacetimeOneForm,
}

impl InitialData {
    pub fn new(
        g0: MetricField,
        k: TensorField,
        psi0: Vec<SpinorField>,
        a0: SpacetimeOneForm,
        a1: SpacetimeOneForm,
    ) -> Result<Self> {
        let (r, s) = g0.signature();
        if s != 0 {
            return Err(Error::NotRiemannian { r, s });
        }
        let grid = &g0.grid;
        grid.check_same(&k.grid)?;
        for f in [&a0, &a1] {
            grid.check_same(&f.spatial.grid)?;
            grid.check_same(&f.normal.grid)?;
        }
        let n = GammaRep::new(g0.dim(), 1)?.spinor_dim();
        for psi in &psi0 {
            grid.check_same(&psi.grid)?;
            if psi.spinor_dim != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: psi.spinor_dim,
                });
            }
        }
        if k.symmetry_defect() > 1e-12 * (1.0 + k.max_abs()) {
            return Err(Error::Config(format!(
                "second fundamental form is not symmetric (defect {:e})",
                k.symmetry_defect()
            )));
        }
        Ok(Self { g0, k, psi0, a0, a1 })
    }

    /// Time-symmetric vacuum data on a metric.
    pub fn vacuum(g0: MetricField, fields: usize) -> Result<Self> {
        let grid = g0.grid.clone();
        let n = GammaRep::new(g0.dim(), 1)?.spinor_dim();
        let twist = crate::spinor::SpinStructureTwist::periodic(g0.dim());
        Self::new(
            g0,
            TensorField::zeros(&grid),
            vec![SpinorField::zeros(&grid, &twist, n); fields],
            SpacetimeOneForm::zeros(&grid),
            SpacetimeOneForm::zeros(&grid),
        )
    }

    /// The Lorentzian representation carrying `psi0`; the normal is its last generator.
    pub fn spacetime_rep(&self) -> Result<GammaRep> {
        GammaRep::new(self.g0.dim(), 1)
    }
}

/// Hamiltonian and momentum constraint residuals.
#[derive(Clone, Debug)]
pub struct ConstraintResidual {
    /// `scal + (tr K)² − |K|² − 16π T(ν, ν)`.
    pub hamiltonian: ScalarField,
    /// `div K − d tr K − 8π T(ν, ·)`.
    pub momentum: OneFormField,
}

impl ConstraintResidual {
    pub fn norms(&self) -> (f64, f64) {
        (self.hamiltonian.max_abs(), self.momentum.max_abs())
    }
}

/// Normal–normal and normal–tangential parts of the energy-momentum tensor
/// on the slice.
pub(crate) struct SliceStress {
    pub normal: ScalarField,
    pub mixed: OneFormField,
}

/// Spatial gauged spinor derivatives `∇_l ψ` of the ambient connection:
/// the intrinsic connection plus `½ Σ_a K(∂_l, e_a) e_a · ν ·` plus `i q A_l`.
fn spatial_derivatives(
    data: &InitialData,
    slice: &SpinGeometry,
    rep: &GammaRep,
    q: f64,
    psi: &SpinorField,
) -> Result<Vec<SpinorField>> {
    let ms = data.g0.dim();
    let n = rep.spinor_dim();
    let grid = &data.g0.grid;
    let nu = rep.gamma(ms);
    let coeffs = slice.connection_coefficients();
    (0..ms)
        .map(|l| {
            let mut out = psi.partial(l)?;
            for p in 0..grid.len() {
                let e = slice.frame(p);
                let c = slice.coframe(p);
                let kp = data.k.at(p);
                let mut z = CMatrix::zeros(n, n);
                for a in 0..ms {
                    for b in 0..ms {
                        if a == b {
                            continue;
                        }
                        let w: f64 = (0..ms).map(|k| c[(k, l)] * coeffs.get(p, k, a, b)).sum();
                        z += rep.gamma_product(a, b) * Complex64::new(0.25 * w, 0.0);
                    }
                    let kla: f64 = (0..ms).map(|j| kp[l * ms + j] * e[(j, a)]).sum();
                    z += rep.gamma(a) * nu * Complex64::new(0.5 * kla, 0.0);
                }
                let phase = Complex64::new(0.0, q * data.a0.spatial.at(p)[l]);
                for i in 0..n {
                    z[(i, i)] += phase;
                }
                let mut acc = out.at(p).to_vec();
                mat_vec_add(&z, psi.at(p), &mut acc);
                out.at_mut(p).copy_from_slice(&acc);
            }
            Ok(out)
        })
        .collect()
}

/// `∇_ν ψ` forced by the Dirac equation `D ψ = λ ψ`: `ν · (Σ_a e_a · ∇_{e_a} ψ − λ ψ)`.
fn normal_derivative(
    slice: &SpinGeometry,
    rep: &GammaRep,
    lambda: f64,
    psi: &SpinorField,
    nabla: &[SpinorField],
) -> SpinorField {
    let ms = nabla.len();
    let n = rep.spinor_dim();
    let nu = rep.gamma(ms);
    let mut out = psi.clone();
    for p in 0..psi.grid.len() {
        let e = slice.frame(p);
        let mut inner = vec![Complex64::new(0.0, 0.0); n];
        for a in 0..ms {
            let mut da = vec![Complex64::new(0.0, 0.0); n];
            for l in 0..ms {
                let w = e[(l, a)];
                for (x, y) in da.iter_mut().zip(nabla[l].at(p)) {
                    *x += y * w;
                }
            }
            mat_vec_add(rep.gamma(a), &da, &mut inner);
        }
        for (x, y) in inner.iter_mut().zip(psi.at(p)) {
            *x -= y * lambda;
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        mat_vec_add(nu, &inner, &mut acc);
        out.at_mut(p).copy_from_slice(&acc);
    }
    out
}

/// Slice stress from the data; `normal_derivatives` overrides the
/// Dirac-implied `∇_ν ψ_i` when given.
pub(crate) fn slice_stress(
    data: &InitialData,
    params: &EdmParams,
    normal_derivatives: Option<&[SpinorField]>,
) -> Result<SliceStress> {
    if data.psi0.len() != params.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            found: data.psi0.len(),
        });
    }
    let g = &data.g0;
    let grid = &g.grid;
    let ms = g.dim();
    let rep = data.spacetime_rep()?;
    let slice = SpinGeometry::new(&GammaRep::new(ms, 0)?, g)?;
    let nu = rep.gamma(ms);
    let n = rep.spinor_dim();
    let mut normal = ScalarField::zeros(grid);
    let mut mixed = OneFormField::zeros(grid);

    for (i, psi) in data.psi0.iter().enumerate() {
        let nabla = spatial_derivatives(data, &slice, &rep, params.q[i], psi)?;
        let dnu = match normal_derivatives {
            Some(d) => d[i].clone(),
            None => normal_derivative(&slice, &rep, params.lambda[i], psi, &nabla),
        };
        for p in 0..grid.len() {
            let c = slice.coframe(p);
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            mat_vec_add(nu, dnu.at(p), &mut buf);
            normal.values[p] += rep.inner_unchecked(&buf, psi.at(p)).re;
            for b in 0..ms {
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                mat_vec_add(nu, nabla[b].at(p), &mut buf);
                let mut cb = CMatrix::zeros(n, n);
                for a in 0..ms {
                    cb += rep.gamma(a) * Complex64::new(c[(a, b)], 0.0);
                }
                mat_vec_add(&cb, dnu.at(p), &mut buf);
                mixed.values[p * ms + b] += 0.5 * rep.inner_unchecked(&buf, psi.at(p)).re;
            }
        }
    }

    // Maxwell part: E_i = F(ν, ∂_i) = (∇_ν A)_i + K_i^j A_j − ∂_i A(ν).
    let fs = exterior_d(&data.a0.spatial);
    let fs_square = pair_two_forms(g, &fs, &fs).scale(2.0);
    let grad_normal = OneFormField::gradient(&data.a0.normal);
    for p in 0..grid.len() {
        let kp = data.k.at(p);
        let a = data.a0.spatial.at(p);
        let e: Vec<f64> = (0..ms)
            .map(|i| {
                let mut v = data.a1.spatial.at(p)[i] - grad_normal.at(p)[i];
                for j in 0..ms {
                    for l in 0..ms {
                        v += kp[i * ms + l] * g.inv(p, l, j) * a[j];
                    }
                }
                v
            })
            .collect();
        let mut e2 = 0.0;
        for i in 0..ms {
            for j in 0..ms {
                e2 += g.inv(p, i, j) * e[i] * e[j];
            }
        }
        normal.values[p] += 0.5 * e2 + 0.25 * fs_square.values[p];
        let f = fs.at(p);
        for b in 0..ms {
            let mut v = 0.0;
            for i in 0..ms {
                for j in 0..ms {
                    v += g.inv(p, i, j) * e[i] * f[b * ms + j];
                }
            }
            mixed.values[p * ms + b] += v;
        }
    }
    Ok(SliceStress { normal, mixed })
}

/// Geometric sides `(scal + (tr K)² − |K|², div K − d tr K)` of the constraints.
pub(crate) fn constraint_geometry(g: &MetricField, k: &TensorField) -> Result<(ScalarField, OneFormField)> {
    let grid = &g.grid;
    let m = g.dim();
    let (_, scal) = curvature(g)?;
    let gamma = christoffels(g)?;
    let parts: Vec<TensorField> = (0..m).map(|a| k.partial(a)).collect::<Result<_>>()?;
    let mut trace = ScalarField::zeros(grid);
    let mut ham = scal;
    for p in 0..grid.len() {
        let kp = k.at(p);
        let mut tr = 0.0;
        let mut sq = 0.0;
        for a in 0..m {
            for b in 0..m {
                tr += g.inv(p, a, b) * kp[a * m + b];
                for c in 0..m {
                    for d in 0..m {
                        sq += g.inv(p, a, c) * g.inv(p, b, d) * kp[a * m + b] * kp[c * m + d];
                    }
                }
            }
        }
        trace.values[p] = tr;
        ham.values[p] += tr * tr - sq;
    }
    let dtr = OneFormField::gradient(&trace);
    let mut mom = OneFormField::zeros(grid);
    for p in 0..grid.len() {
        let kp = k.at(p);
        for c in 0..m {
            let mut div = 0.0;
            for a in 0..m {
                for b in 0..m {
                    // ∇_a K_bc
                    let mut nabla = parts[a].at(p)[b * m + c];
                    for d in 0..m {
                        nabla -= gamma.get(p, d, a, b) * kp[d * m + c] + gamma.get(p, d, a, c) * kp[b * m + d];
                    }
                    div += g.inv(p, a, b) * nabla;
                }
            }
            mom.values[p * m + c] = div - dtr.at(p)[c];
        }
    }
    Ok((ham, mom))
}

/// Hamiltonian and momentum constraint residuals of initial data, with
/// the normal derivatives of the spinors taken from the Dirac equation.
pub fn constraint_residual(data: &InitialData, params: &EdmParams) -> Result<ConstraintResidual> {
    let (ham, mom) = constraint_geometry(&data.g0, &data.k)?;
    let t = slice_stress(data, params, None)?;
    let pi = std::f64::consts::PI;
    Ok(ConstraintResidual {
        hamiltonian: ham.sub(&t.normal.scale(16.0 * pi))?,
        momentum: mom.sub(&t.mixed.scale(8.0 * pi))?,
    })
}

/// `Q^k = h^ij (Γ(g)^k_ij − Γ(h)^k_ij)`.
pub fn wave_gauge_residual(h: &MetricField, g: &MetricField) -> Result<VectorField> {
    h.grid.check_same(&g.grid)?;
    if h.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: g.dim(),
        });
    }
    let m = h.dim();
    let gg = christoffels(g)?;
    let gh = christoffels(h)?;
    let mut out = VectorField::zeros(&h.grid);
    for p in 0..h.grid.len() {
        for k in 0..m {
            let mut v = 0.0;
            for i in 0..m {
                for j in 0..m {
                    v += h.inv(p, i, j) * (gg.get(p, k, i, j) - gh.get(p, k, i, j));
                }
            }
            out.values[p * m + k] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edm::fields::{einstein_tensor, energy_momentum};
    use crate::grid::TorusGrid;
    use crate::random::FieldSampler;
    use crate::spinor::SpinStructureTwist;
    use nalgebra::DMatrix;

    #[test]
    fn flat_vacuum_is_exact() {
        let grid = TorusGrid::uniform(3, 8).unwrap();
        let data = InitialData::vacuum(MetricField::flat(&grid, 3, 0).unwrap(), 1).unwrap();
        let res = constraint_residual(&data, &EdmParams::single(1.0, 1.0)).unwrap();
        assert_eq!(res.norms(), (0.0, 0.0));
    }

    #[test]
    fn hamiltonian_reduces_to_scalar_curvature() {
        let grid = TorusGrid::uniform(2, 16).unwrap();
        let g = MetricField::conformal(&grid, 2, 0, |x| 0.3 * x[0].sin() * x[1].cos()).unwrap();
        let data = InitialData::vacuum(g.clone(), 0).unwrap();
        let res = constraint_residual(&data, &EdmParams::new(vec![], vec![]).unwrap()).unwrap();
        let (_, scal) = curvature(&g).unwrap();
        assert!(res.hamiltonian.sub(&scal).unwrap().max_abs() < 1e-15);
        assert!(res.momentum.max_abs() == 0.0);
    }

    /// Slice `t = 0` of `g0(x) + 2 sin t K(x) − dt²` on a spatial 2-torus
    /// times a periodic time circle.
    struct Slab {
        grid: TorusGrid,
        slice: TorusGrid,
        metric: MetricField,
        g0: MetricField,
        k: TensorField,
    }

    fn slab(n: usize, nt: usize) -> Slab {
        let grid = TorusGrid::new(&[n, n, nt]).unwrap();
        let slice = TorusGrid::uniform(2, n).unwrap();
        let base = |x: &[f64]| {
            DMatrix::from_row_slice(
                2,
                2,
                &[1.0 + 0.2 * x[0].sin(), 0.1 * (x[0] + x[1]).cos(), 0.1 * (x[0] + x[1]).cos(), 1.0 - 0.15 * x[1].cos()],
            )
        };
        let kf = |x: &[f64]| {
            DMatrix::from_row_slice(
                2,
                2,
                &[0.1 * x[1].cos(), 0.06 * x[0].sin(), 0.06 * x[0].sin(), -0.08 + 0.03 * x[0].cos()],
            )
        };
        let metric = MetricField::from_fn(&grid, |x| {
            let mut g = DMatrix::zeros(3, 3);
            let s = base(x) + kf(x) * (2.0 * x[2].sin());
            g.view_mut((0, 0), (2, 2)).copy_from(&s);
            g[(2, 2)] = -1.0;
            g
        })
        .unwrap();
        let g0 = MetricField::from_fn(&slice, base).unwrap();
        let k = TensorField::from_fn(&slice, kf);
        Slab { grid, slice, metric, g0, k }
    }

    fn at_slice(grid: &TorusGrid, slice: &TorusGrid, p: usize) -> usize {
        let idx = slice.multi_index(p);
        grid.flat_index(&[idx[0], idx[1], 0])
    }

    #[test]
    fn geometry_matches_ambient_einstein_tensor() {
        let s = slab(24, 64);
        let einstein = einstein_tensor(&s.metric).unwrap();
        let (ham, mom) = constraint_geometry(&s.g0, &s.k).unwrap();
        let mut worst = 0.0f64;
        for p in 0..s.slice.len() {
            let q = at_slice(&s.grid, &s.slice, p);
            let gp = einstein.at(q);
            worst = worst.max((ham.values[p] - 2.0 * gp[8]).abs());
            for c in 0..2 {
                worst = worst.max((mom.at(p)[c] - gp[2 * 3 + c]).abs());
            }
        }
        assert!(worst < 5e-4, "{worst}");
    }

    #[test]
    fn matter_matches_ambient_stress() {
        let s = slab(16, 64);
        let rep = GammaRep::new(2, 1).unwrap();
        let mut rng = FieldSampler::new(11);
        let twist = SpinStructureTwist::periodic(3);
        let psi = rng.spinor(&s.grid, &twist, rep.spinor_dim(), 1, 0.5).unwrap();
        let a = rng.one_form(&s.grid, 1, 0.4);
        let params = EdmParams::single(0.6, 0.7);
        let geom = SpinGeometry::new(&rep, &s.metric).unwrap();
        let t = energy_momentum(&geom, &params, std::slice::from_ref(&psi), &a).unwrap();

        // Restrict to the slice, feeding the ambient normal derivative.
        let e_t = VectorField::from_fn(&s.grid, |_| vec![0.0, 0.0, 1.0]);
        let dnu = geom.covariant_derivative(Some((&a, 0.7)), &psi, &e_t).unwrap();
        let restrict = |f: &SpinorField| {
            let mut out = SpinorField::zeros(&s.slice, &SpinStructureTwist::periodic(2), f.spinor_dim);
            for p in 0..s.slice.len() {
                out.at_mut(p).copy_from_slice(f.at(at_slice(&s.grid, &s.slice, p)));
            }
            out
        };
        let dt_a: Vec<OneFormField> = (0..1).map(|_| a.partial(2).unwrap()).collect();
        let gamma = christoffels(&s.metric).unwrap();
        let mut a0 = SpacetimeOneForm::zeros(&s.slice);
        let mut a1 = SpacetimeOneForm::zeros(&s.slice);
        for p in 0..s.slice.len() {
            let q = at_slice(&s.grid, &s.slice, p);
            for i in 0..2 {
                a0.spatial.values[p * 2 + i] = a.at(q)[i];
                let mut v = dt_a[0].at(q)[i];
                for mu in 0..3 {
                    v -= gamma.get(q, mu, 2, i) * a.at(q)[mu];
                }
                a1.spatial.values[p * 2 + i] = v;
            }
            a0.normal.values[p] = a.at(q)[2];
        }
        let data = InitialData::new(s.g0.clone(), s.k.clone(), vec![restrict(&psi)], a0, a1).unwrap();
        let st = slice_stress(&data, &params, Some(&[restrict(&dnu)])).unwrap();
        let mut worst = 0.0f64;
        for p in 0..s.slice.len() {
            let tp = t.at(at_slice(&s.grid, &s.slice, p));
            worst = worst.max((st.normal.values[p] - tp[8]).abs());
            for c in 0..2 {
                worst = worst.max((st.mixed.at(p)[c] - tp[2 * 3 + c]).abs());
            }
        }
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn wave_gauge_vanishes_on_equal_metrics() {
        let grid = TorusGrid::uniform(2, 8).unwrap();
        let g = FieldSampler::new(3).metric(&grid, (2, 0), 1, 0.2).unwrap();
        assert_eq!(wave_gauge_residual(&g, &g).unwrap().max_abs(), 0.0);
    }
}
