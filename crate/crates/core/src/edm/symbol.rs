use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::clifford::{CMatrix, GammaRep};
use crate::error::{Error, Result};
use crate::grid::{MetricField, TorusGrid};
use crate::metric::comparison_b;
use crate::spinor::{pullback_operator, SpinGeometry, SpinStructureTwist, SpinorField};

/// Default base scale of the probe frequencies.
const PROBE_SCALE: f64 = 1e-2;

const EXTRA_DEGREES: usize = 2;

/// Leading coefficient in `s` of `P(e^{isφ} v)` at a base point, where `φ`
/// is the affine function with differential `omega` vanishing at the base
/// point. Columns of the result are indexed by the basis vectors `v`.
///
/// The fit interpolates the response at `order + 3` probe frequencies
/// `s_j = j·s₀` and is repeated at `s₀/2`; disagreement beyond `1e-6`
/// relative is a fit failure.
pub fn principal_symbol<F>(
    operator: F,
    order: usize,
    grid: &TorusGrid,
    twist: &SpinStructureTwist,
    spinor_dim: usize,
    omega: &[f64],
    base: usize,
) -> Result<CMatrix>
where
    F: Fn(&SpinorField) -> Result<SpinorField>,
{
    if omega.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: omega.len(),
        });
    }
    let coarse = fit(&operator, order, grid, twist, spinor_dim, omega, base, PROBE_SCALE)?;
    let fine = fit(&operator, order, grid, twist, spinor_dim, omega, base, 0.5 * PROBE_SCALE)?;
    let scale = crate::linalg::max_abs(&coarse).max(1.0);
    let defect = crate::linalg::max_abs(&(&coarse - &fine));
    if defect > 1e-6 * scale {
        return Err(Error::SymbolFit(format!(
            "leading coefficient unstable under probe refinement (defect {defect:e})"
        )));
    }
    Ok(fine)
}

#[allow(clippy::too_many_arguments)]
fn fit<F>(
    operator: &F,
    order: usize,
    grid: &TorusGrid,
    twist: &SpinStructureTwist,
    spinor_dim: usize,
    omega: &[f64],
    base: usize,
    s0: f64,
) -> Result<CMatrix>
where
    F: Fn(&SpinorField) -> Result<SpinorField>,
{
    let m = grid.dim();
    let x0 = grid.point(base);
    let lengths: Vec<f64> = (0..m).map(|d| grid.spacing(d) * grid.sizes()[d] as f64).collect();
    let phase: Vec<f64> = (0..grid.len())
        .map(|p| {
            let x = grid.point(p);
            (0..m)
                .map(|d| {
                    let mut dx = x[d] - x0[d];
                    dx -= lengths[d] * (dx / lengths[d]).round();
                    omega[d] * dx
                })
                .sum()
        })
        .collect();
    // The discrete response is polynomial in `s` only up to stencil
    // corrections, so interpolate two degrees beyond `order` on the nodes
    // j·s₀ and keep the coefficient of `s^order`.
    let degree = order + EXTRA_DEGREES;
    let vander = DMatrix::from_fn(degree + 1, degree + 1, |j, k| (j as f64).powi(k as i32));
    let inverse = vander
        .try_inverse()
        .ok_or_else(|| Error::SymbolFit("singular probe interpolation".into()))?;
    let nodes: Vec<f64> = (0..=degree).map(|j| j as f64 * s0).collect();
    let weights: Vec<f64> = (0..=degree).map(|j| inverse[(order, j)] / s0.powi(order as i32)).collect();
    let mut out = CMatrix::zeros(spinor_dim, spinor_dim);
    for col in 0..spinor_dim {
        for (s, w) in nodes.iter().zip(&weights) {
            let mut psi = SpinorField::zeros(grid, twist, spinor_dim);
            for p in 0..grid.len() {
                psi.at_mut(p)[col] = Complex64::from_polar(1.0, s * phase[p]);
            }
            let image = operator(&psi)?;
            for row in 0..spinor_dim {
                out[(row, col)] += image.at(base)[row] * *w;
            }
        }
    }
    Ok(out)
}

/// `i Σ_i ε_i ω(e_i) γ_i` at point `p`.
pub fn clifford_symbol(geom: &SpinGeometry, p: usize, omega: &[f64]) -> CMatrix {
    let n = geom.spinor_dim();
    let mut s = CMatrix::zeros(n, n);
    for (k, w) in omega.iter().enumerate() {
        s += geom.symbol_matrix(p, k) * Complex64::new(0.0, *w);
    }
    s
}

/// Which closed form an empirical symbol matches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum QuadraticForm {
    /// `g⁻¹(ω, ω) I`.
    G,
    /// `h⁻¹(ω, ω) I`.
    H,
    Neither,
}

/// Empirical symbol of the square of the pulled-back operator against
/// three closed-form candidates.
#[derive(Clone, Debug)]
pub struct SymbolReport {
    pub empirical: CMatrix,
    pub g_quadratic: f64,
    pub h_quadratic: f64,
    /// `h(b_{h,g} ω^h, b_{h,g} ω^h)`.
    pub chain_value: f64,
    pub g_deviation: f64,
    pub h_deviation: f64,
    pub chain_deviation: f64,
    pub matches: QuadraticForm,
}

fn scalar_deviation(m: &CMatrix, c: f64) -> f64 {
    let id = CMatrix::identity(m.nrows(), m.ncols()) * Complex64::new(c, 0.0);
    crate::linalg::max_abs(&(m - id))
}

/// Symbol report for `(D^h_g)²` at a base point, with tolerance `tol` for
/// declaring a match.
pub fn pullback_symbol_report(
    rep: &GammaRep,
    g: &MetricField,
    h: &MetricField,
    omega: &[f64],
    base: usize,
    tol: f64,
) -> Result<SymbolReport> {
    let geom = SpinGeometry::new(rep, g)?;
    let op = pullback_operator(&geom, h)?;
    let twist = SpinStructureTwist::periodic(g.dim());
    let square = |psi: &SpinorField| op.apply(&op.apply(psi)?);
    let empirical = principal_symbol(square, 2, &g.grid, &twist, rep.spinor_dim(), omega, base)?;

    let w = nalgebra::DVector::from_column_slice(omega);
    let gi = g.inverse_matrix(base);
    let hi = h.inverse_matrix(base);
    let g_quadratic = w.dot(&(&gi * &w));
    let h_quadratic = w.dot(&(&hi * &w));
    let raised = &hi * &w;
    let b = comparison_b(&h.form(base), &g.form(base))?.matrix;
    let v: DMatrix<f64> = &b * DMatrix::from_column_slice(raised.len(), 1, raised.as_slice());
    let chain_value = h.eval(base, v.as_slice(), v.as_slice());

    let g_deviation = scalar_deviation(&empirical, g_quadratic);
    let h_deviation = scalar_deviation(&empirical, h_quadratic);
    let chain_deviation = scalar_deviation(&empirical, chain_value);
    let matches = if g_deviation <= tol && g_deviation <= h_deviation {
        QuadraticForm::G
    } else if h_deviation <= tol {
        QuadraticForm::H
    } else {
        QuadraticForm::Neither
    };
    Ok(SymbolReport {
        empirical,
        g_quadratic,
        h_quadratic,
        chain_value,
        g_deviation,
        h_deviation,
        chain_deviation,
        matches,
    })
}
