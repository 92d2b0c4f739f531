use num_complex::Complex64;

use super::dirac::{FirstOrderOperator, SpinGeometry};
use super::{SpinStructureTwist, SpinorField};
use crate::error::{Error, Result};
use crate::grid::MetricField;
use crate::linalg::max_abs;

/// Upper bound on `points · N` for dense spectra.
pub const MAX_DENSE_DIM: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// The requested eigenvalues of smallest magnitude, ascending.
    pub eigenvalues: Vec<f64>,
    /// Per eigenvalue, `1 − Σ_d Σ|ψ(x + h e_d) − ψ(x)|² / 4Σ|ψ|²` over its
    /// eigenvector: `1 − Σ_d sin²(k_d h/2)` for a plane wave, near 1 for
    /// resolved modes and at most about 0 once any direction sits at the
    /// grid Nyquist momentum.
    pub smoothness: Vec<f64>,
    /// `max |M − M†| / max |M|` for the density-weighted operator matrix `M`
    /// before its hermitian part is taken.
    pub hermiticity_defect: f64,
    pub matrix_dim: usize,
}

/// Smoothness above which a mode counts as resolved.
pub const RESOLVED_SMOOTHNESS: f64 = 0.5;

impl SpectrumReport {
    /// Eigenvalues of resolved modes, ascending.
    pub fn resolved(&self) -> Vec<f64> {
        self.partition(true)
    }

    /// Eigenvalues of the central-stencil doubler modes, ascending.
    pub fn doublers(&self) -> Vec<f64> {
        self.partition(false)
    }

    fn partition(&self, resolved: bool) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.smoothness)
            .filter(|(_, s)| (**s > RESOLVED_SMOOTHNESS) == resolved)
            .map(|(l, _)| *l)
            .collect()
    }
}

fn smoothness(psi: &SpinorField) -> f64 {
    let total: f64 = psi.values.iter().map(|z| z.norm_sqr()).sum();
    let rough: f64 = (0..psi.grid.dim())
        .map(|d| {
            let next = psi.shifted(&unit(psi.grid.dim(), d));
            next.values.iter().zip(&psi.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
        })
        .sum();
    1.0 - rough / (4.0 * total)
}

fn unit(m: usize, d: usize) -> Vec<isize> {
    let mut e = vec![0; m];
    e[d] = 1;
    e
}

/// Smoothness of an orthonormal basis of a degenerate eigenspace after
/// rotating it to diagonalize the roughness `Σ_d |ψ(x + h e_d) − ψ(x)|²`,
/// so resolved and doubler modes that share an eigenvalue come apart.
fn cluster_smoothness(basis: &[SpinorField]) -> Vec<f64> {
    if basis.len() == 1 {
        return vec![smoothness(&basis[0])];
    }
    let m = basis[0].grid.dim();
    let diffs: Vec<Vec<Vec<Complex64>>> = basis
        .iter()
        .map(|psi| {
            (0..m)
                .map(|d| psi.shifted(&unit(m, d)).values.iter().zip(&psi.values).map(|(a, b)| a - b).collect())
                .collect()
        })
        .collect();
    let k = basis.len();
    let rough = nalgebra::DMatrix::from_fn(k, k, |i, j| {
        (0..m)
            .map(|d| diffs[i][d].iter().zip(&diffs[j][d]).map(|(a, b)| a.conj() * b).sum::<Complex64>())
            .sum::<Complex64>()
    });
    let eig = rough.symmetric_eigen();
    (0..k)
        .map(|c| {
            let mut psi = basis[0].scale(eig.eigenvectors[(0, c)]);
            for (i, b) in basis.iter().enumerate().skip(1) {
                psi = psi.add(&b.scale(eig.eigenvectors[(i, c)])).expect("same layout");
            }
            smoothness(&psi)
        })
        .collect()
}

/// Spectrum of a first-order operator that is formally self-adjoint for
/// `∫ ⟨ψ, φ⟩ dv^g` in Riemannian signature.
///
/// The matrix is conjugated by `√(√|det g|)` so the volume weight becomes
/// the plain Euclidean product; its hermitian part is diagonalized.
pub fn operator_spectrum(
    op: &FirstOrderOperator,
    metric: &MetricField,
    twist: &SpinStructureTwist,
    count: usize,
) -> Result<SpectrumReport> {
    let (r, s) = metric.signature();
    if s != 0 {
        return Err(Error::NotRiemannian { r, s });
    }
    let n = op.spinor_dim;
    let size = op.grid.len() * n;
    if size > MAX_DENSE_DIM {
        return Err(Error::TooLarge {
            size,
            limit: MAX_DENSE_DIM,
        });
    }
    let mut mat = op.dense(twist);
    let w: Vec<f64> = (0..op.grid.len()).map(|p| metric.density(p).sqrt()).collect();
    for i in 0..size {
        for j in 0..size {
            mat[(i, j)] *= w[i / n] / w[j / n];
        }
    }
    let adj = mat.adjoint();
    let scale = max_abs(&mat).max(f64::MIN_POSITIVE);
    let hermiticity_defect = max_abs(&(&mat - &adj)) / scale;
    let herm = faer::Mat::<Complex64>::from_fn(size, size, |i, j| 0.5 * (mat[(i, j)] + adj[(i, j)]));
    let eig = herm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let values: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()).then(values[a].total_cmp(&values[b])));
    let tol = 1e-8 * values.iter().fold(1.0f64, |a, l| a.max(l.abs()));
    // keep whole degenerate clusters so their rotation sees the full eigenspace
    if count < size {
        let edge = if count == 0 { 0.0 } else { values[order[count - 1]].abs() + tol };
        let keep = order.iter().take_while(|&&i| count > 0 && values[i].abs() <= edge).count();
        order.truncate(keep.max(count));
    }
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let u = eig.U();
    let vectors: Vec<SpinorField> = order
        .iter()
        .map(|&i| SpinorField::from_values(&op.grid, twist, n, (0..size).map(|r| u[(r, i)]).collect()))
        .collect::<Result<_>>()?;
    let mut smooth = Vec::with_capacity(order.len());
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] - values[order[end - 1]] <= tol {
            end += 1;
        }
        smooth.extend(cluster_smoothness(&vectors[start..end]));
        start = end;
    }
    Ok(SpectrumReport {
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
        smoothness: smooth,
        hermiticity_defect,
        matrix_dim: size,
    })
}

/// The `count` eigenvalues of `D^g` of smallest magnitude.
///
/// Central stencils barely see modes near the grid Nyquist momentum, so
/// each direction contributes spurious doubler eigenvalues (near
/// `(5/3)(k − n/2)` along a circle of `n` points); [`SpectrumReport::resolved`]
/// separates them.
pub fn dirac_spectrum(geom: &SpinGeometry, twist: &SpinStructureTwist, count: usize) -> Result<SpectrumReport> {
    operator_spectrum(&geom.dirac_operator(None)?, &geom.metric, twist, count)
}
