use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{SpinStructureTwist, SpinorField};
use crate::clifford::{CMatrix, GammaRep};
use crate::error::{Error, Result};
use crate::grid::{christoffels, Christoffels, MetricField, OneFormField, TorusGrid, VectorField};
use crate::metric::{comparison_b, BilinearForm};

/// `e_i = b_{η,g}(∂_i)` at every point, as matrices whose columns are the
/// coordinate components of the frame vectors.
pub fn frame_field(g: &MetricField) -> Result<Vec<DMatrix<f64>>> {
    let (r, s) = g.signature();
    let eta = BilinearForm::flat(r, s);
    (0..g.grid.len())
        .map(|p| comparison_b(&eta, &g.form(p)).map(|b| b.matrix))
        .collect()
}

/// Connection coefficients `ω_ij(e_k) = g(∇_{e_k} e_i, e_j)` of the frame
/// field, stored at `[k][i][j]` per point.
#[derive(Clone, Debug)]
pub struct SpinConnection {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
}

impl SpinConnection {
    pub fn get(&self, p: usize, k: usize, i: usize, j: usize) -> f64 {
        let m = self.grid.dim();
        self.values[p * m * m * m + (k * m + i) * m + j]
    }

    /// `max |ω_ij + ω_ji|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let m = self.grid.dim();
        let mut worst = 0.0f64;
        for p in 0..self.grid.len() {
            for k in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        worst = worst.max((self.get(p, k, i, j) + self.get(p, k, j, i)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// A first-order operator `Σ_k C_k(x) ∂_k + Z(x)` on spinor fields.
#[derive(Clone, Debug)]
pub struct FirstOrderOperator {
    pub grid: TorusGrid,
    pub spinor_dim: usize,
    /// `C_k` at index `p * m + k`.
    pub first: Vec<CMatrix>,
    /// `Z` at index `p`.
    pub zeroth: Vec<CMatrix>,
}

impl FirstOrderOperator {
    pub fn apply(&self, psi: &SpinorField) -> Result<SpinorField> {
        self.grid.check_same(&psi.grid)?;
        if psi.spinor_dim != self.spinor_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spinor_dim,
                found: psi.spinor_dim,
            });
        }
        let m = self.grid.dim();
        let n = self.spinor_dim;
        let parts: Vec<SpinorField> = (0..m).map(|k| psi.partial(k)).collect::<Result<_>>()?;
        let mut out = psi.clone();
        for p in 0..self.grid.len() {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for (k, part) in parts.iter().enumerate() {
                mat_vec_add(&self.first[p * m + k], part.at(p), &mut acc);
            }
            mat_vec_add(&self.zeroth[p], psi.at(p), &mut acc);
            out.at_mut(p).copy_from_slice(&acc);
        }
        Ok(out)
    }

    /// Dense matrix of the discretized operator on `grid.len() · N`
    /// unknowns, point-major.
    pub fn dense(&self, twist: &SpinStructureTwist) -> CMatrix {
        let m = self.grid.dim();
        let n = self.spinor_dim;
        let size = self.grid.len() * n;
        let mut out = CMatrix::zeros(size, size);
        for p in 0..self.grid.len() {
            for k in 0..m {
                let inv_h = 1.0 / self.grid.spacing(k);
                let c = &self.first[p * m + k];
                for &(o, w) in &crate::grid::STENCIL {
                    let (q, wraps) = self.grid.neighbor(p, k, o);
                    let coef = w * inv_h * twist.phase(k, wraps);
                    for a in 0..n {
                        for b in 0..n {
                            out[(p * n + a, q * n + b)] += c[(a, b)] * coef;
                        }
                    }
                }
            }
            let z = &self.zeroth[p];
            for a in 0..n {
                for b in 0..n {
                    out[(p * n + a, p * n + b)] += z[(a, b)];
                }
            }
        }
        out
    }
}

pub(crate) fn mat_vec_add(m: &CMatrix, v: &[Complex64], acc: &mut [Complex64]) {
    for a in 0..m.nrows() {
        let mut s = Complex64::new(0.0, 0.0);
        for b in 0..m.ncols() {
            s += m[(a, b)] * v[b];
        }
        acc[a] += s;
    }
}

/// Everything needed to differentiate spinors over a fixed metric: the
/// frame field, its connection coefficients and their spinor lift.
#[derive(Clone, Debug)]
pub struct SpinGeometry {
    pub rep: GammaRep,
    pub metric: MetricField,
    pub christoffels: Christoffels,
    frames: Vec<DMatrix<f64>>,
    coframes: Vec<DMatrix<f64>>,
    coefficients: SpinConnection,
    /// `Ω_k = ¼ Σ ε_i ε_j ω_ij(∂_k) γ_i γ_j` at `p * m + k`.
    lifted: Vec<CMatrix>,
    /// `Σ_i ε_i e_i^k γ_i` at `p * m + k`.
    symbols: Vec<CMatrix>,
}

impl SpinGeometry {
    pub fn new(rep: &GammaRep, g: &MetricField) -> Result<Self> {
        let (r, s) = g.signature();
        if rep.signature() != (r, s) {
            let (er, es) = rep.signature();
            return Err(Error::SignatureMismatch {
                expected_r: er,
                expected_s: es,
                r,
                s,
            });
        }
        let grid = &g.grid;
        let m = g.dim();
        let n = rep.spinor_dim();
        let len = grid.len();
        let gamma = christoffels(g)?;
        let frames = frame_field(g)?;
        let coframes: Vec<DMatrix<f64>> = frames
            .iter()
            .map(|e| {
                e.clone().try_inverse().ok_or(Error::Degenerate {
                    min_abs: 0.0,
                    floor: 0.0,
                })
            })
            .collect::<Result<_>>()?;
        let flat_frames: Vec<f64> = frames.iter().flat_map(crate::grid::row_major).collect();
        let d_frames: Vec<Vec<f64>> = (0..m).map(|k| grid.derivative(&flat_frames, m * m, k)).collect();
        let eps = rep.epsilon();

        // ω_ij(∂_k)
        let mut coord = vec![0.0; len * m * m * m];
        for p in 0..len {
            let e = &frames[p];
            for k in 0..m {
                for i in 0..m {
                    let nabla: Vec<f64> = (0..m)
                        .map(|a| {
                            let mut v = d_frames[k][p * m * m + a * m + i];
                            for c in 0..m {
                                v += gamma.get(p, a, k, c) * e[(c, i)];
                            }
                            v
                        })
                        .collect();
                    for j in 0..m {
                        let ej: Vec<f64> = e.column(j).iter().copied().collect();
                        coord[p * m * m * m + (k * m + i) * m + j] = g.eval(p, &nabla, &ej);
                    }
                }
            }
        }
        let mut lifted = Vec::with_capacity(len * m);
        let mut symbols = Vec::with_capacity(len * m);
        let mut frame_coeffs = vec![0.0; len * m * m * m];
        for p in 0..len {
            let e = &frames[p];
            for k in 0..m {
                let mut om = CMatrix::zeros(n, n);
                for i in 0..m {
                    for j in 0..m {
                        if i == j {
                            continue;
                        }
                        let c = 0.25 * eps[i] * eps[j] * coord[p * m * m * m + (k * m + i) * m + j];
                        om += rep.gamma_product(i, j) * Complex64::new(c, 0.0);
                    }
                }
                lifted.push(om);
                let mut sym = CMatrix::zeros(n, n);
                for i in 0..m {
                    sym += rep.gamma(i) * Complex64::new(eps[i] * e[(k, i)], 0.0);
                }
                symbols.push(sym);
                for i in 0..m {
                    for j in 0..m {
                        frame_coeffs[p * m * m * m + (k * m + i) * m + j] = (0..m)
                            .map(|l| e[(l, k)] * coord[p * m * m * m + (l * m + i) * m + j])
                            .sum();
                    }
                }
            }
        }
        Ok(Self {
            rep: rep.clone(),
            metric: g.clone(),
            christoffels: gamma,
            frames,
            coframes,
            coefficients: SpinConnection {
                grid: grid.clone(),
                values: frame_coeffs,
            },
            lifted,
            symbols,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.metric.grid
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn spinor_dim(&self) -> usize {
        self.rep.spinor_dim()
    }

    /// Frame at point `p`; column `i` is `e_i`.
    pub fn frame(&self, p: usize) -> &DMatrix<f64> {
        &self.frames[p]
    }

    /// Inverse of [`Self::frame`]; row `i` is the dual covector `e^i`.
    pub fn coframe(&self, p: usize) -> &DMatrix<f64> {
        &self.coframes[p]
    }

    pub fn connection_coefficients(&self) -> &SpinConnection {
        &self.coefficients
    }

    /// `Ω_k` at point `p`.
    pub fn spinor_connection(&self, p: usize, k: usize) -> &CMatrix {
        &self.lifted[p * self.dim() + k]
    }

    /// `Σ_i ε_i e_i^k γ_i` at point `p`.
    pub fn symbol_matrix(&self, p: usize, k: usize) -> &CMatrix {
        &self.symbols[p * self.dim() + k]
    }

    /// Frame components `e^i(v)` of a coordinate vector at `p`.
    pub fn frame_components(&self, p: usize, v: &[f64]) -> Vec<f64> {
        let c = &self.coframes[p];
        let m = self.dim();
        (0..m).map(|i| (0..m).map(|a| c[(i, a)] * v[a]).sum()).collect()
    }

    /// Clifford multiplication by a coordinate vector at `p`.
    pub fn clifford_at(&self, p: usize, v: &[f64]) -> CMatrix {
        self.rep.clifford(&self.frame_components(p, v))
    }

    /// Clifford multiplication by a vector field.
    pub fn clifford_field(&self, x: &VectorField, psi: &SpinorField) -> Result<SpinorField> {
        self.check_spinor(psi)?;
        let mats: Vec<CMatrix> = (0..self.grid().len()).map(|p| self.clifford_at(p, x.at(p))).collect();
        Ok(psi.map_matrices(&mats))
    }

    /// Levi-Civita derivative `∇_X Y` of vector fields.
    pub fn covariant_derivative_vector(&self, x: &VectorField, y: &VectorField) -> Result<VectorField> {
        let grid = self.grid();
        grid.check_same(&x.grid)?;
        grid.check_same(&y.grid)?;
        let m = self.dim();
        let parts: Vec<VectorField> = (0..m).map(|k| y.partial(k)).collect::<Result<_>>()?;
        let mut out = VectorField::zeros(grid);
        for p in 0..grid.len() {
            let (xp, yp) = (x.at(p), y.at(p));
            for a in 0..m {
                let mut v = 0.0;
                for k in 0..m {
                    v += xp[k] * parts[k].at(p)[a];
                    for c in 0..m {
                        v += self.christoffels.get(p, a, k, c) * xp[k] * yp[c];
                    }
                }
                out.values[p * m + a] = v;
            }
        }
        Ok(out)
    }

    fn check_spinor(&self, psi: &SpinorField) -> Result<()> {
        self.grid().check_same(&psi.grid)?;
        if psi.spinor_dim != self.spinor_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.spinor_dim(),
                found: psi.spinor_dim,
            });
        }
        Ok(())
    }

    /// `∇^{g,qA}_X ψ = Σ_k X^k (∂_k ψ + Ω_k ψ + i q A_k ψ)`.
    pub fn covariant_derivative(
        &self,
        potential: Option<(&OneFormField, f64)>,
        psi: &SpinorField,
        x: &VectorField,
    ) -> Result<SpinorField> {
        self.check_spinor(psi)?;
        self.grid().check_same(&x.grid)?;
        if let Some((a, _)) = potential {
            self.grid().check_same(&a.grid)?;
        }
        let m = self.dim();
        let n = self.spinor_dim();
        let parts: Vec<SpinorField> = (0..m).map(|k| psi.partial(k)).collect::<Result<_>>()?;
        let mut out = psi.clone();
        for p in 0..self.grid().len() {
            let xp = x.at(p);
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            let mut zeroth = CMatrix::zeros(n, n);
            for k in 0..m {
                for a in 0..n {
                    acc[a] += parts[k].at(p)[a] * xp[k];
                }
                zeroth += self.spinor_connection(p, k) * Complex64::new(xp[k], 0.0);
                if let Some((pot, q)) = potential {
                    let c = Complex64::new(0.0, q * pot.at(p)[k] * xp[k]);
                    for a in 0..n {
                        zeroth[(a, a)] += c;
                    }
                }
            }
            mat_vec_add(&zeroth, psi.at(p), &mut acc);
            out.at_mut(p).copy_from_slice(&acc);
        }
        Ok(out)
    }

    /// `Σ_i ε_i e_i · ∇^{g,qA}_{e_i}` as a first-order operator.
    pub fn dirac_operator(&self, potential: Option<(&OneFormField, f64)>) -> Result<FirstOrderOperator> {
        if let Some((a, _)) = potential {
            self.grid().check_same(&a.grid)?;
        }
        let m = self.dim();
        let n = self.spinor_dim();
        let len = self.grid().len();
        let mut zeroth = Vec::with_capacity(len);
        for p in 0..len {
            let mut z = CMatrix::zeros(n, n);
            for k in 0..m {
                let c = self.symbol_matrix(p, k);
                z += c * self.spinor_connection(p, k);
                if let Some((pot, q)) = potential {
                    z += c * Complex64::new(0.0, q * pot.at(p)[k]);
                }
            }
            zeroth.push(z);
        }
        Ok(FirstOrderOperator {
            grid: self.grid().clone(),
            spinor_dim: n,
            first: self.symbols.clone(),
            zeroth,
        })
    }
}

/// Connection coefficients of the frame field of `g`.
pub fn spin_connection(g: &MetricField) -> Result<SpinConnection> {
    let (r, s) = g.signature();
    Ok(SpinGeometry::new(&GammaRep::new(r, s)?, g)?.coefficients)
}

pub fn covariant_derivative(
    geom: &SpinGeometry,
    potential: Option<&OneFormField>,
    q: f64,
    psi: &SpinorField,
    x: &VectorField,
) -> Result<SpinorField> {
    geom.covariant_derivative(potential.map(|a| (a, q)), psi, x)
}

/// `D^g ψ`.
pub fn dirac(geom: &SpinGeometry, psi: &SpinorField) -> Result<SpinorField> {
    geom.dirac_operator(None)?.apply(psi)
}

/// `D^{g,qA} ψ = Σ ε_i e_i · ∇^{g,qA}_{e_i} ψ`.
pub fn dirac_potential(geom: &SpinGeometry, a: &OneFormField, q: f64, psi: &SpinorField) -> Result<SpinorField> {
    geom.dirac_operator(Some((a, q)))?.apply(psi)
}

/// A metric together with a spinor field over it.
#[derive(Clone, Debug)]
pub struct UniversalSection {
    pub metric: MetricField,
    pub spinor: SpinorField,
}

/// `(g, φ) ↦ (g, D^g φ)`.
pub fn universal_dirac(rep: &GammaRep, phi: &UniversalSection) -> Result<UniversalSection> {
    let geom = SpinGeometry::new(rep, &phi.metric)?;
    Ok(UniversalSection {
        metric: phi.metric.clone(),
        spinor: dirac(&geom, &phi.spinor)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn flat_frame_is_coordinate_frame() {
        let grid = TorusGrid::uniform(2, 8).unwrap();
        let g = MetricField::flat(&grid, 1, 1).unwrap();
        for e in frame_field(&g).unwrap() {
            assert!(crate::linalg::max_abs(&(e - DMatrix::identity(2, 2))) < 1e-15);
        }
        assert_eq!(spin_connection(&g).unwrap().values.iter().fold(0.0f64, |a, v| a.max(v.abs())), 0.0);
    }

    #[test]
    fn conformal_frame_scales() {
        let grid = TorusGrid::uniform(2, 16).unwrap();
        let u = |x: &[f64]| 0.2 * x[0].sin() + 0.1 * x[1].cos();
        let g = MetricField::conformal(&grid, 2, 0, u).unwrap();
        let frames = frame_field(&g).unwrap();
        for (p, e) in frames.iter().enumerate() {
            let want = DMatrix::identity(2, 2) * (-u(&grid.point(p))).exp();
            assert!(crate::linalg::max_abs(&(e - want)) < 1e-13);
        }
    }

    #[test]
    fn flat_circle_plane_wave_is_eigenvector() {
        let grid = TorusGrid::new(&[128]).unwrap();
        let rep = GammaRep::new(1, 0).unwrap();
        let g = MetricField::flat(&grid, 1, 0).unwrap();
        let geom = SpinGeometry::new(&rep, &g).unwrap();
        let twist = SpinStructureTwist::antiperiodic(1);
        let psi = SpinorField::plane_wave(&grid, &twist, &[2.5], &[one()]).unwrap();
        let d = dirac(&geom, &psi).unwrap();
        // γ = i, so D e^{ikx} = i · ik e^{ikx} = −k e^{ikx}
        let want = psi.scale(Complex64::new(-2.5, 0.0));
        assert!(d.sub(&want).unwrap().max_abs() < 1e-4);
    }

    #[test]
    fn zero_potential_matches_plain_operator() {
        let grid = TorusGrid::uniform(2, 16).unwrap();
        let rep = GammaRep::new(2, 0).unwrap();
        let g = MetricField::conformal(&grid, 2, 0, |x| 0.1 * x[0].cos()).unwrap();
        let geom = SpinGeometry::new(&rep, &g).unwrap();
        let twist = SpinStructureTwist::periodic(2);
        let psi = SpinorField::from_fn(&grid, &twist, 2, |x| {
            vec![Complex64::new(x[0].sin(), x[1].cos()), Complex64::new(1.0, (x[0] + x[1]).sin())]
        })
        .unwrap();
        let a = OneFormField::zeros(&grid);
        let d0 = dirac(&geom, &psi).unwrap();
        let d1 = dirac_potential(&geom, &a, 2.0, &psi).unwrap();
        assert_eq!(d0, d1);
    }

    #[test]
    fn universal_operator_keeps_metric() {
        let grid = TorusGrid::uniform(2, 8).unwrap();
        let rep = GammaRep::new(2, 0).unwrap();
        let g = MetricField::flat(&grid, 2, 0).unwrap();
        let phi = UniversalSection {
            metric: g.clone(),
            spinor: SpinorField::zeros(&grid, &SpinStructureTwist::periodic(2), 2),
        };
        let out = universal_dirac(&rep, &phi).unwrap();
        assert_eq!(out.metric, g);
        assert_eq!(out.spinor.max_abs(), 0.0);
    }

    #[test]
    fn signature_mismatch_is_rejected() {
        let grid = TorusGrid::uniform(2, 8).unwrap();
        let g = MetricField::flat(&grid, 1, 1).unwrap();
        assert!(SpinGeometry::new(&GammaRep::new(2, 0).unwrap(), &g).is_err());
    }
}
