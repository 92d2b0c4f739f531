//! Pointwise linear algebra of nondegenerate symmetric bilinear forms.
//!
//! For two forms `g`, `h` on the same space, `a_{g,h} = G⁻¹H` is the
//! `g`-self-adjoint operator with `g(a X, Y) = h(X, Y)` and
//! `b_{g,h} = a_{g,h}^{−1/2}` is the positive square root satisfying
//! `h(b X, b Y) = g(X, Y)`. Two forms are joinable when `a_{g,g_t}` stays
//! positive along the straight line `g_t = g + t(h − g)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{general_eigenvalues, max_abs, sorted_sym_eigen, sqrt_and_inv_sqrt};

/// Relative eigenvalue magnitude below which a form counts as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-10;

/// Default number of sample points for [`joinable`].
pub const JOIN_SAMPLES: usize = 33;

/// A real symmetric nondegenerate `m × m` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearForm {
    g: DMatrix<f64>,
}

impl BilinearForm {
    /// Accepts a square matrix that is symmetric up to rounding and
    /// stores its symmetric part. Degeneracy is checked by [`signature`].
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        if g.nrows() != g.ncols() || g.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: g.nrows(),
                found: g.ncols(),
            });
        }
        let asym = max_abs(&(&g - g.transpose()));
        if asym > 1e-12 * max_abs(&g).max(1.0) {
            return Err(Error::Config(format!(
                "bilinear form is not symmetric (defect {asym:e})"
            )));
        }
        Ok(Self {
            g: (&g + g.transpose()) * 0.5,
        })
    }

    pub(crate) fn from_symmetric(g: DMatrix<f64>) -> Self {
        Self { g }
    }

    pub fn identity(m: usize) -> Self {
        Self::from_symmetric(DMatrix::identity(m, m))
    }

    /// `diag(+1, …, +1, −1, …, −1)` with `r` plus and `s` minus signs.
    pub fn flat(r: usize, s: usize) -> Self {
        let d: Vec<f64> = (0..r + s).map(|i| if i < r { 1.0 } else { -1.0 }).collect();
        Self::diagonal(&d)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_symmetric(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// `g(u, v)` for coordinate vectors.
    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        let m = self.dim();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                acc += u[i] * self.g[(i, j)] * v[j];
            }
        }
        acc
    }

    /// `g + t (h − g)`.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        Self::from_symmetric(&self.g + (&other.g - &self.g) * t)
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let m = self.dim();
        self.g
            .clone()
            .lu()
            .solve(&DMatrix::identity(m, m))
            .ok_or(Error::Degenerate {
                min_abs: 0.0,
                floor: 0.0,
            })
    }
}

/// Counts of positive and negative eigenvalues.
pub fn signature(g: &BilinearForm) -> Result<(usize, usize)> {
    let eig = g.matrix().clone().symmetric_eigenvalues();
    let scale = eig.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let min_abs = eig.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
    let floor = DEGENERACY_FLOOR * scale;
    if scale == 0.0 || min_abs < floor {
        return Err(Error::Degenerate { min_abs, floor });
    }
    let r = eig.iter().filter(|&&x| x > 0.0).count();
    Ok((r, eig.len() - r))
}

/// A basis of the model space, stored as matrix columns, together with the
/// sign pattern `g(b_i, b_j) = δ_ij ε_i` it realizes.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    basis: DMatrix<f64>,
    eps: Vec<f64>,
}

impl Frame {
    pub fn new(basis: DMatrix<f64>, eps: Vec<f64>) -> Result<Self> {
        if basis.nrows() != eps.len() || basis.ncols() != eps.len() {
            return Err(Error::DimensionMismatch {
                expected: eps.len(),
                found: basis.ncols(),
            });
        }
        Ok(Self { basis, eps })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn epsilon(&self) -> &[f64] {
        &self.eps
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.basis.column(i).iter().copied().collect()
    }

    /// `max |g(b_i, b_j) − δ_ij ε_i|`.
    pub fn orthonormality_residual(&self, g: &BilinearForm) -> f64 {
        let gram = self.basis.transpose() * g.matrix() * &self.basis;
        max_abs(&(gram - eta_matrix(&self.eps)))
    }

    /// The unique form for which this frame is pseudo-orthonormal,
    /// `G = B⁻ᵀ η B⁻¹`.
    pub fn metric(&self) -> Result<BilinearForm> {
        let inv = self.basis.clone().try_inverse().ok_or(Error::Degenerate {
            min_abs: 0.0,
            floor: 0.0,
        })?;
        let g = inv.transpose() * eta_matrix(&self.eps) * inv;
        Ok(BilinearForm::from_symmetric((&g + g.transpose()) * 0.5))
    }
}

pub(crate) fn eta_matrix(eps: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(eps))
}

/// Positive pseudo-orthonormal frame, positive directions first.
///
/// Eigenvectors of `G` scaled by `|λ|^{−1/2}`, in descending eigenvalue
/// order with ties broken lexicographically; the last vector is negated
/// if the determinant would be negative.
pub fn pseudo_onb(g: &BilinearForm) -> Result<Frame> {
    signature(g)?;
    let (vals, vecs) = sorted_sym_eigen(g.matrix());
    let m = g.dim();
    let mut basis = DMatrix::from_fn(m, m, |i, j| vecs[(i, j)] / vals[j].abs().sqrt());
    if basis.determinant() < 0.0 {
        let mut last = basis.column_mut(m - 1);
        last.neg_mut();
    }
    let eps = vals.iter().map(|&l| l.signum()).collect();
    Ok(Frame { basis, eps })
}

/// Which comparison a [`ComparisonMap`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapRole {
    /// `a_{g,h}`
    Stretch,
    /// `b_{g,h}`
    Root,
    /// a special pseudo-orthogonal identification
    Rotation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonMap {
    pub matrix: DMatrix<f64>,
    pub role: MapRole,
}

fn check_pair(g: &BilinearForm, h: &BilinearForm) -> Result<()> {
    if g.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: h.dim(),
        });
    }
    signature(g)?;
    signature(h)?;
    Ok(())
}

fn stretch(g: &BilinearForm, h: &BilinearForm) -> Result<DMatrix<f64>> {
    g.matrix().clone().lu().solve(h.matrix()).ok_or(Error::Degenerate {
        min_abs: 0.0,
        floor: 0.0,
    })
}

/// `a_{g,h} = G⁻¹ H`.
pub fn comparison_a(g: &BilinearForm, h: &BilinearForm) -> Result<ComparisonMap> {
    check_pair(g, h)?;
    Ok(ComparisonMap {
        matrix: stretch(g, h)?,
        role: MapRole::Stretch,
    })
}

/// Whether every eigenvalue of `a` is real and positive, within rounding.
fn spectrum_positive(a: &DMatrix<f64>) -> std::result::Result<(), String> {
    let eig = general_eigenvalues(a).ok_or_else(|| "eigenvalue iteration did not converge".to_string())?;
    let scale = eig.iter().fold(0.0f64, |acc, z| acc.max(z.norm())).max(f64::MIN_POSITIVE);
    for z in eig.iter() {
        if z.im.abs() > 1e-6 * scale {
            return Err(format!("complex eigenvalue {z}"));
        }
        if z.re <= DEGENERACY_FLOOR * scale {
            return Err(format!("non-positive eigenvalue {}", z.re));
        }
    }
    Ok(())
}

/// `b_{g,h} = a_{g,h}^{−1/2}`.
///
/// For definite `g` the root comes from a symmetric eigendecomposition of
/// `|G|^{−1/2} (±H) |G|^{−1/2}`; otherwise from the Denman–Beavers iteration
/// applied to `a_{g,h}` itself.
pub fn comparison_b(g: &BilinearForm, h: &BilinearForm) -> Result<ComparisonMap> {
    check_pair(g, h)?;
    let a = stretch(g, h)?;
    spectrum_positive(&a).map_err(Error::NotJoinable)?;
    let (r, s) = signature(g)?;
    let matrix = if r == 0 || s == 0 {
        let sign = if s == 0 { 1.0 } else { -1.0 };
        let (pv, pw) = sorted_sym_eigen(&(g.matrix() * sign));
        let half = DMatrix::from_diagonal(&DVector::from_iterator(pv.len(), pv.iter().map(|l| l.sqrt())));
        let inv_half = half.map(|x| if x != 0.0 { 1.0 / x } else { 0.0 });
        let p_half = &pw * &half * pw.transpose();
        let p_inv_half = &pw * &inv_half * pw.transpose();
        let sym = &p_inv_half * (h.matrix() * sign) * &p_inv_half;
        let (sv, sw) = sorted_sym_eigen(&sym);
        if let Some(&bad) = sv.iter().find(|&&l| l <= 0.0) {
            return Err(Error::NotJoinable(format!("non-positive eigenvalue {bad}")));
        }
        let s_inv_half = &sw
            * DMatrix::from_diagonal(&DVector::from_iterator(sv.len(), sv.iter().map(|l| 1.0 / l.sqrt())))
            * sw.transpose();
        p_inv_half * s_inv_half * p_half
    } else {
        sqrt_and_inv_sqrt(&a)
            .map_err(|e| Error::NotJoinable(e.to_string()))?
            .1
    };
    Ok(ComparisonMap {
        matrix,
        role: MapRole::Root,
    })
}

/// `max |AᵀG − H|`, the defining relation of `a_{g,h}`.
pub fn stretch_residual(g: &BilinearForm, h: &BilinearForm, a: &DMatrix<f64>) -> f64 {
    max_abs(&(a.transpose() * g.matrix() - h.matrix()))
}

/// `max |BᵀHB − G|`, the defining relation of `b_{g,h}`.
pub fn root_residual(g: &BilinearForm, h: &BilinearForm, b: &DMatrix<f64>) -> f64 {
    max_abs(&(b.transpose() * h.matrix() * b - g.matrix()))
}

/// Sample parameters of the straight line between two forms, clustered
/// towards the endpoints (Chebyshev–Lobatto nodes on `[0, 1]`).
pub fn join_nodes(samples: usize) -> Vec<f64> {
    let n = samples.max(2) - 1;
    (0..=n)
        .map(|k| 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / n as f64).cos()))
        .collect()
}

/// Sampled joinability test along `g_t = g + t (h − g)`.
pub fn joinable(g: &BilinearForm, h: &BilinearForm, samples: usize) -> bool {
    if g.dim() != h.dim() {
        return false;
    }
    let Ok(sig) = signature(g) else {
        return false;
    };
    join_nodes(samples).into_iter().all(|t| {
        let gt = g.lerp(h, t);
        signature(&gt).is_ok_and(|x| x == sig)
            && stretch(g, &gt).is_ok_and(|a| spectrum_positive(&a).is_ok())
    })
}

/// `O = b_{η,h}⁻¹ b_{g,h} b_{η,g}`, which maps `η`-pseudo-orthonormal
/// frames to `η`-pseudo-orthonormal frames.
pub fn identification_rotation(
    eta: &BilinearForm,
    g: &BilinearForm,
    h: &BilinearForm,
) -> Result<ComparisonMap> {
    let b_eta_g = comparison_b(eta, g)?.matrix;
    let b_g_h = comparison_b(g, h)?.matrix;
    let b_eta_h = comparison_b(eta, h)?.matrix;
    let back = b_eta_h.try_inverse().ok_or(Error::Degenerate {
        min_abs: 0.0,
        floor: 0.0,
    })?;
    let o = back * b_g_h * b_eta_g;
    let residual = max_abs(&(o.transpose() * eta.matrix() * &o - eta.matrix()));
    let det = o.determinant();
    if residual > 1e-10 * max_abs(&o).max(1.0).powi(2) || det <= 0.0 {
        return Err(Error::NotPseudoOrthogonal { residual, det });
    }
    Ok(ComparisonMap {
        matrix: o,
        role: MapRole::Rotation,
    })
}

/// `M† = η Mᵀ η` for `η = diag(ε)`.
pub fn pseudo_adjoint(m: &DMatrix<f64>, eps: &[f64]) -> DMatrix<f64> {
    let n = eps.len();
    DMatrix::from_fn(n, n, |i, j| eps[i] * eps[j] * m[(j, i)])
}

/// Splits `M` into its pseudo-self-adjoint and pseudo-skew parts.
pub fn sym_asym_project(m: &DMatrix<f64>, signature: (usize, usize)) -> (DMatrix<f64>, DMatrix<f64>) {
    let (r, s) = signature;
    let eps: Vec<f64> = (0..r + s).map(|i| if i < r { 1.0 } else { -1.0 }).collect();
    let adj = pseudo_adjoint(m, &eps);
    ((m + &adj) * 0.5, (m - adj) * 0.5)
}

/// `⟨A, B⟩ = tr(A† B)`.
pub fn pseudo_trace_pairing(a: &DMatrix<f64>, b: &DMatrix<f64>, eps: &[f64]) -> f64 {
    (pseudo_adjoint(a, eps) * b).trace()
}

/// Outcome of integrating the horizontal frame equation from `g` to `h`.
#[derive(Clone, Debug)]
pub struct TransportReport {
    /// The transported frame at `t = 1`.
    pub frame: DMatrix<f64>,
    /// `b_{g,h}` applied to the starting frame.
    pub root_frame: DMatrix<f64>,
    /// `max |frame − root_frame|`.
    pub gap: f64,
    /// Pseudo-orthonormality defect of the transported frame for `h`.
    pub h_residual: f64,
}

/// Transports a `g`-pseudo-orthonormal frame along `g_t = g + t (h − g)` by
/// the horizontal equation `Ḟ = −½ G_t⁻¹ (H − G) F`, using classical RK4
/// with `steps` uniform steps.
///
/// The velocity `−½ G_t⁻¹ Ġ_t` is `g_t`-self-adjoint, so the transported
/// frame stays pseudo-orthonormal for `g_t` up to integration error. The
/// exact solution is `b_{g,g_t}` applied to the starting frame, so `gap`
/// measures integration error only.
pub fn horizontal_transport(g: &BilinearForm, h: &BilinearForm, steps: usize) -> Result<TransportReport> {
    let b = comparison_b(g, h)?.matrix;
    let start = pseudo_onb(g)?;
    let delta = h.matrix() - g.matrix();
    let rhs = |t: f64, f: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let gt = g.lerp(h, t);
        let v = gt.matrix().clone().lu().solve(&(&delta * f)).ok_or(Error::Degenerate {
            min_abs: 0.0,
            floor: 0.0,
        })?;
        Ok(v * -0.5)
    };
    let steps = steps.max(1);
    let dt = 1.0 / steps as f64;
    let mut f = start.basis().clone();
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = rhs(t, &f)?;
        let k2 = rhs(t + 0.5 * dt, &(&f + &k1 * (0.5 * dt)))?;
        let k3 = rhs(t + 0.5 * dt, &(&f + &k2 * (0.5 * dt)))?;
        let k4 = rhs(t + dt, &(&f + &k3 * dt))?;
        f += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    let root_frame = b * start.basis();
    let gap = max_abs(&(&f - &root_frame));
    let h_residual = Frame::new(f.clone(), start.epsilon().to_vec())?.orthonormality_residual(h);
    Ok(TransportReport {
        frame: f,
        root_frame,
        gap,
        h_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(rows: &[&[f64]]) -> BilinearForm {
        let m = rows.len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        BilinearForm::new(DMatrix::from_row_slice(m, m, &flat)).unwrap()
    }

    #[test]
    fn signature_examples() {
        assert_eq!(signature(&BilinearForm::diagonal(&[1.0, 1.0, -1.0])).unwrap(), (2, 1));
        assert!(matches!(
            signature(&BilinearForm::diagonal(&[1.0, 0.0])),
            Err(Error::Degenerate { .. })
        ));
        assert_eq!(signature(&form(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap(), (2, 0));
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        assert!(BilinearForm::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
    }

    #[test]
    fn identity_frame() {
        let f = pseudo_onb(&BilinearForm::identity(3)).unwrap();
        assert!(max_abs(&(f.basis() - DMatrix::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn diagonal_indefinite_frame() {
        let f = pseudo_onb(&BilinearForm::diagonal(&[4.0, -9.0])).unwrap();
        assert_eq!(f.epsilon(), &[1.0, -1.0]);
        assert!((f.basis()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((f.basis()[(1, 1)] - 1.0 / 3.0).abs() < 1e-15);
        assert!(f.basis()[(0, 1)].abs() < 1e-15 && f.basis()[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn frame_of_coupled_form() {
        let g = form(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let f = pseudo_onb(&g).unwrap();
        assert!(f.orthonormality_residual(&g) < 1e-14);
        assert!(f.basis().determinant() > 0.0);
        let back = f.metric().unwrap();
        assert!(max_abs(&(back.matrix() - g.matrix())) < 1e-14);
    }

    #[test]
    fn stretch_examples() {
        let h = form(&[&[3.0, 0.5], &[0.5, 1.0]]);
        let a = comparison_a(&BilinearForm::identity(2), &h).unwrap();
        assert!(max_abs(&(&a.matrix - h.matrix())) < 1e-15);
        let a = comparison_a(&h, &h).unwrap();
        assert!(max_abs(&(a.matrix - DMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn root_examples() {
        let b = comparison_b(&BilinearForm::identity(2), &BilinearForm::diagonal(&[4.0, 1.0])).unwrap();
        assert!(max_abs(&(b.matrix - DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 1.0])))) < 1e-15);
        let g = BilinearForm::diagonal(&[2.0, -1.0]);
        let b = comparison_b(&g, &g).unwrap();
        assert!(max_abs(&(b.matrix - DMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn root_of_indefinite_pair() {
        let g = form(&[&[1.0, 0.2], &[0.2, -1.0]]);
        let h = form(&[&[1.5, -0.1], &[-0.1, -0.8]]);
        let b = comparison_b(&g, &h).unwrap().matrix;
        assert!(root_residual(&g, &h, &b) < 1e-13);
        let back = comparison_b(&h, &g).unwrap().matrix;
        assert!(max_abs(&(back * b - DMatrix::identity(2, 2))) < 1e-13);
    }

    #[test]
    fn opposite_signatures_are_not_joinable() {
        let g = BilinearForm::diagonal(&[1.0, -1.0]);
        let h = BilinearForm::diagonal(&[-1.0, 1.0]);
        assert!(!joinable(&g, &h, JOIN_SAMPLES));
        assert!(matches!(comparison_b(&g, &h), Err(Error::NotJoinable(_))));
        assert!(joinable(&BilinearForm::identity(2), &BilinearForm::diagonal(&[4.0, 1.0]), JOIN_SAMPLES));
    }

    #[test]
    fn joinability_terminates_where_plain_qr_cycles() {
        let g = BilinearForm::new(DMatrix::from_column_slice(4, 4, &[
            1.194862780076708, 0.11791614373488551, 0.12601187331644054, -0.2102127620608079,
            0.11791614373488551, 1.1299073985352388, 0.09441801993006904, 0.11112178863995575,
            0.12601187331644054, 0.09441801993006904, 0.8484200900168389, 0.18526032312103924,
            -0.2102127620608079, 0.11112178863995575, 0.18526032312103924, -0.756818134206036,
        ]))
        .unwrap();
        let h = BilinearForm::new(DMatrix::from_column_slice(4, 4, &[
            0.8978311259490089, -0.2921297130137632, 0.08118615287452441, -0.19413113265065235,
            -0.2921297130137632, 0.7691707408109458, 0.11161781389379272, -0.03199613715010252,
            0.08118615287452441, 0.11161781389379272, 0.972227393823618, 0.19004431518384385,
            -0.19413113265065235, -0.03199613715010252, 0.19004431518384385, -0.7645497493599858,
        ]))
        .unwrap();
        if joinable(&g, &h, JOIN_SAMPLES) {
            let b = comparison_b(&g, &h).unwrap().matrix;
            assert!(root_residual(&g, &h, &b) < 1e-12);
        }
    }

    #[test]
    fn join_nodes_include_endpoints() {
        let t = join_nodes(JOIN_SAMPLES);
        assert_eq!(t.len(), 33);
        assert_eq!(t[0], 0.0);
        assert!((t[32] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_of_conformal_pair_is_identity() {
        let eta = BilinearForm::identity(2);
        let g = BilinearForm::diagonal(&[2.0, 2.0]);
        let h = BilinearForm::diagonal(&[0.3, 0.3]);
        let o = identification_rotation(&eta, &g, &h).unwrap();
        assert!(max_abs(&(o.matrix - DMatrix::identity(2, 2))) < 1e-14);
        let o = identification_rotation(&eta, &g, &g).unwrap();
        assert!(max_abs(&(o.matrix - DMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn projection_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let (sym, asym) = sym_asym_project(&m, (1, 1));
        assert_eq!(sym, DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]));
        assert_eq!(asym, DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]));
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        let (sym, asym) = sym_asym_project(&s, (2, 0));
        assert_eq!(sym, s);
        assert_eq!(asym, DMatrix::zeros(2, 2));
    }

    #[test]
    fn transport_lands_on_root_frame() {
        let g = form(&[&[1.0, 0.3], &[0.3, 2.0]]);
        let h = form(&[&[2.0, -0.4], &[-0.4, 0.7]]);
        let coarse = horizontal_transport(&g, &h, 8).unwrap();
        let fine = horizontal_transport(&g, &h, 16).unwrap();
        assert!(fine.gap < 1e-5);
        assert!(fine.h_residual < 1e-5);
        assert!(coarse.gap / fine.gap > 12.0);
    }
}
