//! Finite-difference calculus on the flat-coordinate torus `[0, 2π)^m`.
//!
//! Fields are stored point-major in coordinate components: point `p`
//! owns the contiguous block `values[p * c .. (p + 1) * c]` where `c` is the
//! component count (`1`, `m`, `m²`, `m³`). Points are ordered row-major over
//! the multi-index, the last coordinate running fastest. Derivatives use the
//! fourth-order central stencil `(−f₊₂ + 8f₊₁ − 8f₋₁ + f₋₂) / 12h`.

use nalgebra::DMatrix;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::metric::{comparison_a, signature, BilinearForm};

/// Offsets and weights of the derivative stencil, before division by `h`.
pub const STENCIL: [(isize, f64); 4] = [
    (-2, 1.0 / 12.0),
    (-1, -8.0 / 12.0),
    (1, 8.0 / 12.0),
    (2, -1.0 / 12.0),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusGrid {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl TorusGrid {
    /// Each size must be even and at least 8.
    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidGrid("no directions".into()));
        }
        if let Some(&n) = sizes.iter().find(|&&n| n < 8 || n % 2 != 0) {
            return Err(Error::InvalidGrid(format!(
                "size {n} must be even and at least 8"
            )));
        }
        let m = sizes.len();
        let mut strides = vec![1; m];
        for i in (0..m - 1).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            strides,
            len: sizes.iter().product(),
        })
    }

    /// Same number of points `n` in each of `m` directions.
    pub fn uniform(m: usize, n: usize) -> Result<Self> {
        Self::new(&vec![n; m])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spacing(&self, dir: usize) -> f64 {
        2.0 * PI / self.sizes[dir] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.spacing(i)).product()
    }

    pub fn multi_index(&self, p: usize) -> Vec<usize> {
        (0..self.dim())
            .map(|i| (p / self.strides[i]) % self.sizes[i])
            .collect()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.strides)
            .zip(&self.sizes)
            .map(|((&k, &s), &n)| (k % n) * s)
            .sum()
    }

    /// Coordinates `x_i = k_i h_i` of point `p`.
    pub fn point(&self, p: usize) -> Vec<f64> {
        self.multi_index(p)
            .iter()
            .enumerate()
            .map(|(i, &k)| k as f64 * self.spacing(i))
            .collect()
    }

    /// Index of the point `offset` steps away along `dir`, and the signed
    /// number of times the periodic boundary was crossed.
    pub fn neighbor(&self, p: usize, dir: usize, offset: isize) -> (usize, i32) {
        let n = self.sizes[dir] as isize;
        let k = ((p / self.strides[dir]) % self.sizes[dir]) as isize;
        let raw = k + offset;
        let wraps = raw.div_euclid(n) as i32;
        let kk = raw.rem_euclid(n);
        (
            (p as isize + (kk - k) * self.strides[dir] as isize) as usize,
            wraps,
        )
    }

    /// Index of `p` shifted cyclically by `offsets`.
    pub fn shifted(&self, p: usize, offsets: &[isize]) -> usize {
        offsets
            .iter()
            .enumerate()
            .fold(p, |q, (dir, &o)| self.neighbor(q, dir, o).0)
    }

    /// `∂_dir` of a real field with `comps` components per point.
    ///
    /// Evaluated as `(8(f₊₁ − f₋₁) − (f₊₂ − f₋₂)) / 12h`, which is exactly
    /// zero on constants.
    pub fn derivative(&self, f: &[f64], comps: usize, dir: usize) -> Vec<f64> {
        let scale = 1.0 / (12.0 * self.spacing(dir));
        let mut out = vec![0.0; f.len()];
        for p in 0..self.len {
            let (m2, m1, p1, p2) = (
                self.neighbor(p, dir, -2).0,
                self.neighbor(p, dir, -1).0,
                self.neighbor(p, dir, 1).0,
                self.neighbor(p, dir, 2).0,
            );
            for a in 0..comps {
                let near = f[p1 * comps + a] - f[m1 * comps + a];
                let far = f[p2 * comps + a] - f[m2 * comps + a];
                out[p * comps + a] = (8.0 * near - far) * scale;
            }
        }
        out
    }

    pub(crate) fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(Error::InvalidGrid(format!(
                "grid mismatch: {:?} versus {:?}",
                self.sizes, other.sizes
            )));
        }
        Ok(())
    }
}

fn check_dir(grid: &TorusGrid, dir: usize) -> Result<()> {
    if dir >= grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: dir,
        });
    }
    Ok(())
}

macro_rules! field_type {
    ($(#[$doc:meta])* $name:ident, $comps:expr) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            pub grid: TorusGrid,
            pub values: Vec<f64>,
        }

        impl $name {
            pub fn components_per_point(grid: &TorusGrid) -> usize {
                let m = grid.dim();
                let f: fn(usize) -> usize = $comps;
                f(m)
            }

            pub fn zeros(grid: &TorusGrid) -> Self {
                Self {
                    grid: grid.clone(),
                    values: vec![0.0; grid.len() * Self::components_per_point(grid)],
                }
            }

            pub fn from_values(grid: &TorusGrid, values: Vec<f64>) -> Result<Self> {
                let expected = grid.len() * Self::components_per_point(grid);
                if values.len() != expected {
                    return Err(Error::DimensionMismatch {
                        expected,
                        found: values.len(),
                    });
                }
                Ok(Self {
                    grid: grid.clone(),
                    values,
                })
            }

            /// Components at point `p`.
            pub fn at(&self, p: usize) -> &[f64] {
                let c = Self::components_per_point(&self.grid);
                &self.values[p * c..(p + 1) * c]
            }

            /// Coordinate derivative along `dir`.
            pub fn partial(&self, dir: usize) -> Result<Self> {
                check_dir(&self.grid, dir)?;
                let c = Self::components_per_point(&self.grid);
                Ok(Self {
                    grid: self.grid.clone(),
                    values: self.grid.derivative(&self.values, c, dir),
                })
            }

            pub fn scale(&self, c: f64) -> Self {
                Self {
                    grid: self.grid.clone(),
                    values: self.values.iter().map(|v| v * c).collect(),
                }
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.grid.check_same(&other.grid)?;
                Ok(Self {
                    grid: self.grid.clone(),
                    values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
                })
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.add(&other.scale(-1.0))
            }

            /// `max |value|` over points and components.
            pub fn max_abs(&self) -> f64 {
                self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
            }

            /// Cyclic shift: the result at `x` is the input at `x + offsets·h`.
            pub fn shifted(&self, offsets: &[isize]) -> Self {
                let c = Self::components_per_point(&self.grid);
                let mut values = vec![0.0; self.values.len()];
                for p in 0..self.grid.len() {
                    let q = self.grid.shifted(p, offsets);
                    values[p * c..(p + 1) * c].copy_from_slice(&self.values[q * c..(q + 1) * c]);
                }
                Self {
                    grid: self.grid.clone(),
                    values,
                }
            }
        }
    };
}

field_type!(
    /// A real function on the grid.
    ScalarField,
    |_| 1
);
field_type!(
    /// Covector field `A_i`.
    OneFormField,
    |m| m
);
field_type!(
    /// Tangent vector field `X^i`.
    VectorField,
    |m| m
);
field_type!(
    /// Rank-two covariant tensor `T_ij`, stored row-major per point.
    TensorField,
    |m| m * m
);
field_type!(
    /// Antisymmetric `F_ij`, stored as a full matrix per point.
    TwoFormField,
    |m| m * m
);
field_type!(
    /// Connection coefficients `Γ^k_ij` at `[k][i][j]`.
    Christoffels,
    |m| m * m * m
);

impl ScalarField {
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self {
            grid: grid.clone(),
            values: (0..grid.len()).map(|p| f(&grid.point(p))).collect(),
        }
    }

    pub fn constant(grid: &TorusGrid, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn value(&self, p: usize) -> f64 {
        self.values[p]
    }
}

impl OneFormField {
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let m = grid.dim();
        let mut values = Vec::with_capacity(grid.len() * m);
        for p in 0..grid.len() {
            let v = f(&grid.point(p));
            assert_eq!(v.len(), m, "one-form needs {m} components");
            values.extend(v);
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// `df`.
    pub fn gradient(f: &ScalarField) -> Self {
        let grid = &f.grid;
        let m = grid.dim();
        let parts: Vec<Vec<f64>> = (0..m).map(|i| grid.derivative(&f.values, 1, i)).collect();
        let mut values = vec![0.0; grid.len() * m];
        for p in 0..grid.len() {
            for i in 0..m {
                values[p * m + i] = parts[i][p];
            }
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn component(&self, i: usize) -> ScalarField {
        let m = self.grid.dim();
        ScalarField {
            grid: self.grid.clone(),
            values: (0..self.grid.len()).map(|p| self.values[p * m + i]).collect(),
        }
    }
}

impl VectorField {
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let m = grid.dim();
        let mut values = Vec::with_capacity(grid.len() * m);
        for p in 0..grid.len() {
            let v = f(&grid.point(p));
            assert_eq!(v.len(), m, "vector field needs {m} components");
            values.extend(v);
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }
}

impl TensorField {
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> DMatrix<f64>) -> Self {
        let m = grid.dim();
        let mut values = Vec::with_capacity(grid.len() * m * m);
        for p in 0..grid.len() {
            values.extend(row_major(&f(&grid.point(p))));
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn matrix(&self, p: usize) -> DMatrix<f64> {
        let m = self.grid.dim();
        DMatrix::from_row_slice(m, m, self.at(p))
    }

    /// `max |T_ij − T_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|p| {
                let t = self.matrix(p);
                crate::linalg::max_abs(&(&t - t.transpose()))
            })
            .fold(0.0, f64::max)
    }
}

impl TwoFormField {
    /// Antisymmetrizes the returned matrices.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> DMatrix<f64>) -> Self {
        let m = grid.dim();
        let mut values = Vec::with_capacity(grid.len() * m * m);
        for p in 0..grid.len() {
            let a = f(&grid.point(p));
            values.extend(row_major(&((&a - a.transpose()) * 0.5)));
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn matrix(&self, p: usize) -> DMatrix<f64> {
        let m = self.grid.dim();
        DMatrix::from_row_slice(m, m, self.at(p))
    }
}

impl Christoffels {
    /// `Γ^k_ij` at point `p`.
    pub fn get(&self, p: usize, k: usize, i: usize, j: usize) -> f64 {
        let m = self.grid.dim();
        self.values[p * m * m * m + (k * m + i) * m + j]
    }
}

pub(crate) fn row_major(a: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.push(a[(i, j)]);
        }
    }
    out
}

/// A grid-sampled metric of constant signature, with cached inverse and
/// volume density.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    pub grid: TorusGrid,
    values: Vec<f64>,
    inverse: Vec<f64>,
    density: Vec<f64>,
    signature: (usize, usize),
}

impl MetricField {
    /// Validates every point: nondegenerate, of the signature of the first
    /// point, and with `a_{η,g}` positive for `η = diag(ε)`.
    pub fn from_values(grid: &TorusGrid, values: Vec<f64>) -> Result<Self> {
        let m = grid.dim();
        if values.len() != grid.len() * m * m {
            return Err(Error::DimensionMismatch {
                expected: grid.len() * m * m,
                found: values.len(),
            });
        }
        let mut inverse = Vec::with_capacity(values.len());
        let mut density = Vec::with_capacity(grid.len());
        let mut sig = None;
        for p in 0..grid.len() {
            let g = BilinearForm::new(DMatrix::from_row_slice(m, m, &values[p * m * m..(p + 1) * m * m]))?;
            let here = signature(&g)?;
            let expected = *sig.get_or_insert(here);
            if here != expected {
                return Err(Error::SignatureMismatch {
                    expected_r: expected.0,
                    expected_s: expected.1,
                    r: here.0,
                    s: here.1,
                });
            }
            let eta = BilinearForm::flat(expected.0, expected.1);
            let a = comparison_a(&eta, &g)?.matrix;
            let eig = crate::linalg::general_eigenvalues(&a).unwrap_or_default();
            if eig.is_empty() || eig.iter().any(|z| z.re <= 0.0 || z.im.abs() > 1e-6 * z.norm()) {
                return Err(Error::NotJoinable(format!(
                    "metric at grid point {p} is not joinable to the flat reference"
                )));
            }
            inverse.extend(row_major(&g.inverse()?));
            density.push(g.matrix().determinant().abs().sqrt());
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            inverse,
            density,
            signature: sig.unwrap_or((m, 0)),
        })
    }

    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> DMatrix<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * grid.dim() * grid.dim());
        for p in 0..grid.len() {
            values.extend(row_major(&f(&grid.point(p))));
        }
        Self::from_values(grid, values)
    }

    /// `diag(ε)` everywhere.
    pub fn flat(grid: &TorusGrid, r: usize, s: usize) -> Result<Self> {
        check_signature_dim(grid, r, s)?;
        let eta = BilinearForm::flat(r, s);
        Self::from_fn(grid, |_| eta.matrix().clone())
    }

    /// The same matrix at every point.
    pub fn constant(grid: &TorusGrid, g: &BilinearForm) -> Result<Self> {
        if g.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: g.dim(),
            });
        }
        Self::from_fn(grid, |_| g.matrix().clone())
    }

    /// `e^{2u} diag(ε)`.
    pub fn conformal(grid: &TorusGrid, r: usize, s: usize, u: impl Fn(&[f64]) -> f64) -> Result<Self> {
        check_signature_dim(grid, r, s)?;
        let eta = BilinearForm::flat(r, s);
        Self::from_fn(grid, |x| eta.matrix() * (2.0 * u(x)).exp())
    }

    /// `g + t (h − g)`; fails if the result leaves the admissible set.
    pub fn lerp(&self, other: &Self, t: f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + t * (b - a))
            .collect();
        Self::from_values(&self.grid, values)
    }

    /// `g + k` for a symmetric tensor `k`.
    pub fn perturbed(&self, k: &TensorField, t: f64) -> Result<Self> {
        self.grid.check_same(&k.grid)?;
        let values = self.values.iter().zip(&k.values).map(|(a, b)| a + t * b).collect();
        Self::from_values(&self.grid, values)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn epsilon(&self) -> Vec<f64> {
        let (r, s) = self.signature;
        (0..r + s).map(|i| if i < r { 1.0 } else { -1.0 }).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn form(&self, p: usize) -> BilinearForm {
        BilinearForm::from_symmetric(self.matrix(p))
    }

    pub fn matrix(&self, p: usize) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_row_slice(m, m, &self.values[p * m * m..(p + 1) * m * m])
    }

    /// `g_ij` at point `p`.
    pub fn get(&self, p: usize, i: usize, j: usize) -> f64 {
        let m = self.dim();
        self.values[p * m * m + i * m + j]
    }

    /// `g^ij` at point `p`.
    pub fn inv(&self, p: usize, i: usize, j: usize) -> f64 {
        let m = self.dim();
        self.inverse[p * m * m + i * m + j]
    }

    pub fn inverse_matrix(&self, p: usize) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_row_slice(m, m, &self.inverse[p * m * m..(p + 1) * m * m])
    }

    /// `√|det g|` at point `p`.
    pub fn density(&self, p: usize) -> f64 {
        self.density[p]
    }

    pub fn as_tensor(&self) -> TensorField {
        TensorField {
            grid: self.grid.clone(),
            values: self.values.clone(),
        }
    }

    /// `∂_dir g_ij`.
    pub fn partial(&self, dir: usize) -> Result<TensorField> {
        self.as_tensor().partial(dir)
    }

    /// `g(u, v)` for vectors at point `p`.
    pub fn eval(&self, p: usize, u: &[f64], v: &[f64]) -> f64 {
        let m = self.dim();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                acc += u[i] * self.get(p, i, j) * v[j];
            }
        }
        acc
    }

    pub fn shifted(&self, offsets: &[isize]) -> Result<Self> {
        Self::from_values(&self.grid, self.as_tensor().shifted(offsets).values)
    }
}

fn check_signature_dim(grid: &TorusGrid, r: usize, s: usize) -> Result<()> {
    if r + s != grid.dim() {
        return Err(Error::InvalidSignature { r, s });
    }
    Ok(())
}

/// `Γ^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
pub fn christoffels(g: &MetricField) -> Result<Christoffels> {
    let m = g.dim();
    let grid = &g.grid;
    let dg: Vec<TensorField> = (0..m).map(|i| g.partial(i)).collect::<Result<_>>()?;
    let d = |p: usize, i: usize, j: usize, l: usize| dg[i].values[p * m * m + j * m + l];
    let mut values = vec![0.0; grid.len() * m * m * m];
    for p in 0..grid.len() {
        for k in 0..m {
            for i in 0..m {
                for j in i..m {
                    let mut acc = 0.0;
                    for l in 0..m {
                        acc += g.inv(p, k, l) * (d(p, i, j, l) + d(p, j, i, l) - d(p, l, i, j));
                    }
                    let base = p * m * m * m + k * m * m;
                    values[base + i * m + j] = 0.5 * acc;
                    values[base + j * m + i] = 0.5 * acc;
                }
            }
        }
    }
    Ok(Christoffels {
        grid: grid.clone(),
        values,
    })
}

/// Ricci tensor and scalar curvature.
///
/// `Ric_σν = ∂_ρ Γ^ρ_νσ − ∂_ν Γ^ρ_ρσ + Γ^ρ_ρλ Γ^λ_νσ − Γ^ρ_νλ Γ^λ_ρσ`,
/// symmetrized to remove the discretization-level asymmetry of the second
/// term.
pub fn curvature(g: &MetricField) -> Result<(TensorField, ScalarField)> {
    let gamma = christoffels(g)?;
    ricci_from(g, &gamma)
}

pub(crate) fn ricci_from(g: &MetricField, gamma: &Christoffels) -> Result<(TensorField, ScalarField)> {
    let m = g.dim();
    let grid = &g.grid;
    let n = grid.len();
    let m3 = m * m * m;
    // Σ_ρ ∂_ρ Γ^ρ_νσ
    let mut div = vec![0.0; n * m * m];
    for rho in 0..m {
        let slice: Vec<f64> = (0..n)
            .flat_map(|p| gamma.values[p * m3 + rho * m * m..p * m3 + (rho + 1) * m * m].to_vec())
            .collect();
        let d = grid.derivative(&slice, m * m, rho);
        for (acc, v) in div.iter_mut().zip(d) {
            *acc += v;
        }
    }
    // c_σ = Γ^ρ_ρσ and its gradient
    let trace: Vec<f64> = (0..n)
        .flat_map(|p| (0..m).map(move |s| (p, s)))
        .map(|(p, s)| (0..m).map(|r| gamma.get(p, r, r, s)).sum())
        .collect();
    let dtrace: Vec<Vec<f64>> = (0..m).map(|nu| grid.derivative(&trace, m, nu)).collect();
    let mut ric = vec![0.0; n * m * m];
    let mut scal = vec![0.0; n];
    for p in 0..n {
        let mut r = DMatrix::<f64>::zeros(m, m);
        for s in 0..m {
            for nu in 0..m {
                let mut v = div[p * m * m + nu * m + s] - dtrace[nu][p * m + s];
                for l in 0..m {
                    v += trace[p * m + l] * gamma.get(p, l, nu, s);
                    for rho in 0..m {
                        v -= gamma.get(p, rho, nu, l) * gamma.get(p, l, rho, s);
                    }
                }
                r[(s, nu)] = v;
            }
        }
        let r = (&r + r.transpose()) * 0.5;
        let mut sc = 0.0;
        for i in 0..m {
            for j in 0..m {
                ric[p * m * m + i * m + j] = r[(i, j)];
                sc += g.inv(p, i, j) * r[(i, j)];
            }
        }
        scal[p] = sc;
    }
    Ok((
        TensorField {
            grid: grid.clone(),
            values: ric,
        },
        ScalarField {
            grid: grid.clone(),
            values: scal,
        },
    ))
}

/// `F_ij = ∂_i A_j − ∂_j A_i`.
pub fn exterior_d(a: &OneFormField) -> TwoFormField {
    let grid = &a.grid;
    let m = grid.dim();
    let parts: Vec<Vec<f64>> = (0..m).map(|i| grid.derivative(&a.values, m, i)).collect();
    let mut values = vec![0.0; grid.len() * m * m];
    for p in 0..grid.len() {
        for i in 0..m {
            for j in 0..m {
                values[p * m * m + i * m + j] = parts[i][p * m + j] - parts[j][p * m + i];
            }
        }
    }
    TwoFormField {
        grid: grid.clone(),
        values,
    }
}

/// `F^ij = g^ik g^jl F_kl` as a row-major block per point.
pub(crate) fn raise_two(g: &MetricField, f: &[f64], p: usize) -> Vec<f64> {
    let m = g.dim();
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                for l in 0..m {
                    acc += g.inv(p, i, k) * g.inv(p, j, l) * f[k * m + l];
                }
            }
            out[i * m + j] = acc;
        }
    }
    out
}

/// `(δF)_j = −g_jk |g|^{−1/2} ∂_i(|g|^{1/2} F^ik)`, the formal adjoint of `d`
/// for the pairing `½ F_ij G^ij`.
pub fn codifferential(g: &MetricField, f: &TwoFormField) -> Result<OneFormField> {
    g.grid.check_same(&f.grid)?;
    let grid = &g.grid;
    let m = g.dim();
    let n = grid.len();
    let mut weighted = vec![0.0; n * m * m];
    for p in 0..n {
        let up = raise_two(g, f.at(p), p);
        for (w, u) in weighted[p * m * m..(p + 1) * m * m].iter_mut().zip(up) {
            *w = g.density(p) * u;
        }
    }
    let mut upper = vec![0.0; n * m];
    for i in 0..m {
        let d = grid.derivative(&weighted, m * m, i);
        for p in 0..n {
            for k in 0..m {
                upper[p * m + k] -= d[p * m * m + i * m + k] / g.density(p);
            }
        }
    }
    let mut values = vec![0.0; n * m];
    for p in 0..n {
        for j in 0..m {
            values[p * m + j] = (0..m).map(|k| g.get(p, j, k) * upper[p * m + k]).sum();
        }
    }
    Ok(OneFormField {
        grid: grid.clone(),
        values,
    })
}

/// `Σ_p f(p) √|det g(p)| Π h_i`, summed in grid order.
pub fn volume_integrate(g: &MetricField, f: &ScalarField) -> Result<f64> {
    g.grid.check_same(&f.grid)?;
    let mut acc = 0.0;
    for p in 0..g.grid.len() {
        acc += f.values[p] * g.density(p);
    }
    Ok(acc * g.grid.cell_volume())
}

/// `g^ij a_i b_j` pointwise.
pub fn pair_one_forms(g: &MetricField, a: &OneFormField, b: &OneFormField) -> ScalarField {
    let m = g.dim();
    ScalarField {
        grid: g.grid.clone(),
        values: (0..g.grid.len())
            .map(|p| {
                let (x, y) = (a.at(p), b.at(p));
                let mut acc = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        acc += g.inv(p, i, j) * x[i] * y[j];
                    }
                }
                acc
            })
            .collect(),
    }
}

/// `½ F_ij G^ij` pointwise.
pub fn pair_two_forms(g: &MetricField, f: &TwoFormField, h: &TwoFormField) -> ScalarField {
    ScalarField {
        grid: g.grid.clone(),
        values: (0..g.grid.len())
            .map(|p| {
                let up = raise_two(g, h.at(p), p);
                0.5 * f.at(p).iter().zip(&up).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect(),
    }
}

/// `g^ik g^jl S_ij T_kl` pointwise.
pub fn pair_tensors(g: &MetricField, s: &TensorField, t: &TensorField) -> ScalarField {
    let m = g.dim();
    ScalarField {
        grid: g.grid.clone(),
        values: (0..g.grid.len())
            .map(|p| {
                let up = raise_two(g, t.at(p), p);
                let sp = s.at(p);
                (0..m * m).map(|a| sp[a] * up[a]).sum()
            })
            .collect(),
    }
}
