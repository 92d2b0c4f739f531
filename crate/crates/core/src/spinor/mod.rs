//! Spinor fields on the torus and first-order operators acting on them.
//!
//! A spinor field over a metric `g` stores, at each grid point, the
//! components with respect to the spin frame over the `g`-pseudo-orthonormal
//! frame `e_i = b_{η,g}(∂_i)`. Spin structures are encoded by a boundary
//! phase `e^{2πiδ_k}` picked up when crossing the periodic boundary in
//! direction `k`, with `δ_k ∈ {0, ½}`.

mod beta;
mod dirac;
mod spectrum;

pub use beta::{
    beta_residuals, beta_transport, conjugated_dirac, dirac_pullback, lift_field, pullback_operator, vertical_derivative, BetaField, BetaResiduals, MetricPath,
};
pub use dirac::{
    covariant_derivative, dirac, dirac_potential, frame_field, spin_connection, universal_dirac, FirstOrderOperator,
    SpinConnection, SpinGeometry, UniversalSection,
};
pub(crate) use dirac::mat_vec_add as mat_vec_add_pub;
pub use spectrum::{dirac_spectrum, operator_spectrum, SpectrumReport, MAX_DENSE_DIM, RESOLVED_SMOOTHNESS};

use num_complex::Complex64;

use crate::clifford::{CMatrix, GammaRep};
use crate::error::{Error, Result};
use crate::grid::TorusGrid;

/// Boundary phase exponents, one per direction, each `0` or `½`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinStructureTwist {
    delta: Vec<f64>,
}

impl SpinStructureTwist {
    pub fn new(delta: &[f64]) -> Result<Self> {
        if let Some(&bad) = delta.iter().find(|&&d| d != 0.0 && d != 0.5) {
            return Err(Error::InvalidTwist(bad));
        }
        Ok(Self {
            delta: delta.to_vec(),
        })
    }

    pub fn periodic(m: usize) -> Self {
        Self { delta: vec![0.0; m] }
    }

    pub fn antiperiodic(m: usize) -> Self {
        Self { delta: vec![0.5; m] }
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// `e^{2πiδ·wraps}`, exactly `±1`.
    pub fn phase(&self, dir: usize, wraps: i32) -> f64 {
        if self.delta[dir] == 0.5 && wraps.rem_euclid(2) == 1 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Complex spinor components on a grid, `N` per point.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    pub grid: TorusGrid,
    pub twist: SpinStructureTwist,
    pub spinor_dim: usize,
    pub values: Vec<Complex64>,
}

impl SpinorField {
    pub fn zeros(grid: &TorusGrid, twist: &SpinStructureTwist, spinor_dim: usize) -> Self {
        Self {
            grid: grid.clone(),
            twist: twist.clone(),
            spinor_dim,
            values: vec![Complex64::new(0.0, 0.0); grid.len() * spinor_dim],
        }
    }

    pub fn from_values(
        grid: &TorusGrid,
        twist: &SpinStructureTwist,
        spinor_dim: usize,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        check_twist(grid, twist)?;
        if values.len() != grid.len() * spinor_dim {
            return Err(Error::DimensionMismatch {
                expected: grid.len() * spinor_dim,
                found: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            twist: twist.clone(),
            spinor_dim,
            values,
        })
    }

    /// Samples `f` at the grid points. The caller is responsible for `f`
    /// obeying the boundary phases of `twist`.
    pub fn from_fn(
        grid: &TorusGrid,
        twist: &SpinStructureTwist,
        spinor_dim: usize,
        f: impl Fn(&[f64]) -> Vec<Complex64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * spinor_dim);
        for p in 0..grid.len() {
            let v = f(&grid.point(p));
            if v.len() != spinor_dim {
                return Err(Error::DimensionMismatch {
                    expected: spinor_dim,
                    found: v.len(),
                });
            }
            values.extend(v);
        }
        Self::from_values(grid, twist, spinor_dim, values)
    }

    /// `e^{i k·x} v`; each `k_i − δ_i` must be an integer.
    pub fn plane_wave(grid: &TorusGrid, twist: &SpinStructureTwist, k: &[f64], v: &[Complex64]) -> Result<Self> {
        check_twist(grid, twist)?;
        if k.len() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: k.len(),
            });
        }
        for (i, (&ki, &d)) in k.iter().zip(twist.delta()).enumerate() {
            let shifted = ki - d;
            if (shifted - shifted.round()).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "momentum {ki} in direction {i} is incompatible with twist {d}"
                )));
            }
        }
        Self::from_fn(grid, twist, v.len(), |x| {
            let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
            let e = Complex64::from_polar(1.0, phase);
            v.iter().map(|c| c * e).collect()
        })
    }

    pub fn at(&self, p: usize) -> &[Complex64] {
        &self.values[p * self.spinor_dim..(p + 1) * self.spinor_dim]
    }

    pub fn at_mut(&mut self, p: usize) -> &mut [Complex64] {
        &mut self.values[p * self.spinor_dim..(p + 1) * self.spinor_dim]
    }

    /// Twisted fourth-order derivative of the components along `dir`.
    pub fn partial(&self, dir: usize) -> Result<Self> {
        if dir >= self.grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.dim(),
                found: dir,
            });
        }
        let n = self.spinor_dim;
        let grid = &self.grid;
        let scale = 1.0 / (12.0 * grid.spacing(dir));
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for p in 0..grid.len() {
            let nb = |o: isize| {
                let (q, w) = grid.neighbor(p, dir, o);
                (q, self.twist.phase(dir, w))
            };
            let ((m2, s_m2), (m1, s_m1), (p1, s_p1), (p2, s_p2)) = (nb(-2), nb(-1), nb(1), nb(2));
            for a in 0..n {
                let near = self.values[p1 * n + a] * s_p1 - self.values[m1 * n + a] * s_m1;
                let far = self.values[p2 * n + a] * s_p2 - self.values[m2 * n + a] * s_m2;
                out[p * n + a] = (near * 8.0 - far) * scale;
            }
        }
        Ok(Self {
            values: out,
            ..self.clone()
        })
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.twist != other.twist {
            return Err(Error::TwistMismatch);
        }
        if self.spinor_dim != other.spinor_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spinor_dim,
                found: other.spinor_dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    /// Pointwise multiplication by a real or complex function.
    pub fn mul_pointwise(&self, f: &[Complex64]) -> Self {
        let n = self.spinor_dim;
        Self {
            values: self.values.iter().enumerate().map(|(i, v)| v * f[i / n]).collect(),
            ..self.clone()
        }
    }

    /// Applies a matrix at each point.
    pub fn map_matrices(&self, mats: &[CMatrix]) -> Self {
        let n = self.spinor_dim;
        let mut out = self.clone();
        for p in 0..self.grid.len() {
            let v = self.at(p);
            let m = &mats[p];
            for a in 0..n {
                out.values[p * n + a] = (0..n).map(|b| m[(a, b)] * v[b]).sum();
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// Coefficient-wise Euclidean norm over all points.
    pub fn l2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨ψ(p), φ(p)⟩` at every point.
    pub fn inner_pointwise(&self, rep: &GammaRep, other: &Self) -> Result<Vec<Complex64>> {
        self.check_compatible(other)?;
        Ok((0..self.grid.len())
            .map(|p| rep.inner_unchecked(self.at(p), other.at(p)))
            .collect())
    }

    /// Cyclic shift by whole cells, applying boundary phases so that the
    /// result samples the translated twisted field.
    pub fn shifted(&self, offsets: &[isize]) -> Self {
        let n = self.spinor_dim;
        let mut out = self.clone();
        for p in 0..self.grid.len() {
            let mut q = p;
            let mut sign = 1.0;
            for (dir, &o) in offsets.iter().enumerate() {
                let (qq, w) = self.grid.neighbor(q, dir, o);
                sign *= self.twist.phase(dir, w);
                q = qq;
            }
            for a in 0..n {
                out.values[p * n + a] = self.values[q * n + a] * sign;
            }
        }
        out
    }
}

fn check_twist(grid: &TorusGrid, twist: &SpinStructureTwist) -> Result<()> {
    if twist.delta().len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: twist.delta().len(),
        });
    }
    Ok(())
}
