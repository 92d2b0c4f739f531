//! Complex spinor representations of the Clifford algebra in signature `(r, s)`.
//!
//! Conventions: `ε_i = +1` for `i < r` and `−1` otherwise, the Clifford
//! relation is `γ_iγ_j + γ_jγ_i = −2 ε_i δ_ij`, and the spinor inner product
//! is `⟨ψ, φ⟩ = ψ† B φ` with `γ_i† B = (−1)^{s+1} B γ_i`.
//!
//! The spacelike generators are `i·E_a`, the timelike ones `−E_a`, where the
//! `E_a` are hermitian, mutually anticommuting and square to the identity.
//! They come from the usual tensor-product recursion over Pauli blocks; for
//! odd `m` the last generator is the chirality product, which fixes one of
//! the two inequivalent irreducible representations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{log_near_identity, log_real, max_abs};
use crate::metric::{pseudo_onb, BilinearForm};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest supported dimension `r + s`.
pub const MAX_DIM: usize = 12;

fn pauli(k: usize) -> CMatrix {
    match k {
        1 => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        3 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => CMatrix::identity(2, 2),
    }
}

fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Hermitian, anticommuting generators squaring to the identity.
fn euclidean_generators(m: usize) -> Vec<CMatrix> {
    let k = m / 2;
    let mut out = Vec::with_capacity(m);
    for j in 0..k {
        for p in [1, 2] {
            let factors: Vec<CMatrix> = (0..k)
                .map(|l| match l.cmp(&j) {
                    std::cmp::Ordering::Less => pauli(3),
                    std::cmp::Ordering::Equal => pauli(p),
                    std::cmp::Ordering::Greater => pauli(0),
                })
                .collect();
            out.push(kron_all(&factors));
        }
    }
    if m % 2 == 1 {
        let factors: Vec<CMatrix> = (0..k).map(|_| pauli(3)).collect();
        out.push(kron_all(&factors));
    }
    out
}

/// A concrete complex spinor representation of signature `(r, s)`.
#[derive(Clone, Debug)]
pub struct GammaRep {
    r: usize,
    s: usize,
    gammas: Vec<CMatrix>,
    inner: CMatrix,
    eps: Vec<f64>,
    products: Vec<CMatrix>,
}

impl GammaRep {
    pub fn new(r: usize, s: usize) -> Result<Self> {
        let m = r + s;
        if m == 0 || m > MAX_DIM {
            return Err(Error::InvalidSignature { r, s });
        }
        let eps: Vec<f64> = (0..m).map(|i| if i < r { 1.0 } else { -1.0 }).collect();
        let gammas: Vec<CMatrix> = euclidean_generators(m)
            .into_iter()
            .enumerate()
            .map(|(i, e)| if i < r { e * I } else { -e })
            .collect();
        let n = gammas[0].nrows();
        let mut inner = CMatrix::identity(n, n);
        for g in &gammas[r..] {
            inner *= g;
        }
        // the reversed product picks up (−1)^{s(s−1)/2} under the adjoint
        if (s * s.saturating_sub(1) / 2) % 2 == 1 {
            inner *= I;
        }
        let products = (0..m * m)
            .map(|ij| &gammas[ij / m] * &gammas[ij % m])
            .collect();
        Ok(Self {
            r,
            s,
            gammas,
            inner,
            eps,
            products,
        })
    }

    pub fn dim(&self) -> usize {
        self.r + self.s
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.r, self.s)
    }

    /// Spinor dimension `2^⌊m/2⌋`.
    pub fn spinor_dim(&self) -> usize {
        self.gammas[0].nrows()
    }

    pub fn epsilon(&self) -> &[f64] {
        &self.eps
    }

    pub fn gamma(&self, i: usize) -> &CMatrix {
        &self.gammas[i]
    }

    pub fn gammas(&self) -> &[CMatrix] {
        &self.gammas
    }

    /// `γ_i γ_j`.
    pub fn gamma_product(&self, i: usize, j: usize) -> &CMatrix {
        &self.products[i * self.dim() + j]
    }

    /// Gram matrix `B` of the spinor inner product.
    pub fn inner_matrix(&self) -> &CMatrix {
        &self.inner
    }

    /// `(−1)^{s+1}`, the sign in `⟨V·ψ, φ⟩ = ±⟨ψ, V·φ⟩`.
    pub fn hermiticity_sign(&self) -> f64 {
        if self.s.is_multiple_of(2) {
            -1.0
        } else {
            1.0
        }
    }

    /// `Σ v^i γ_i` for frame components `v`.
    pub fn clifford(&self, v: &[f64]) -> CMatrix {
        let n = self.spinor_dim();
        let mut out = CMatrix::zeros(n, n);
        for (g, &c) in self.gammas.iter().zip(v) {
            if c != 0.0 {
                out += g * Complex64::new(c, 0.0);
            }
        }
        out
    }

    /// Clifford multiplication by a vector given in frame components.
    pub fn multiply(&self, v: &[f64], psi: &CVector) -> Result<CVector> {
        self.check_vector(v.len())?;
        self.check_spinor(psi.len())?;
        Ok(self.clifford(v) * psi)
    }

    /// `⟨ψ, φ⟩ = ψ† B φ`, conjugate-linear in the first slot.
    pub fn inner(&self, psi: &CVector, phi: &CVector) -> Result<Complex64> {
        self.check_spinor(psi.len())?;
        self.check_spinor(phi.len())?;
        Ok(self.inner_unchecked(psi.as_slice(), phi.as_slice()))
    }

    pub(crate) fn inner_unchecked(&self, psi: &[Complex64], phi: &[Complex64]) -> Complex64 {
        let n = psi.len();
        let mut acc = ZERO;
        for a in 0..n {
            let mut row = ZERO;
            for b in 0..n {
                let w = self.inner[(a, b)];
                if w != ZERO {
                    row += w * phi[b];
                }
            }
            acc += psi[a].conj() * row;
        }
        acc
    }

    /// The spin-algebra element `¼ Σ_{i,k} ε_i A_{ki} γ_i γ_k` covering an
    /// element `A` of the pseudo-orthogonal Lie algebra, in the sense that
    /// `[X, γ_i] = Σ_k A_{ki} γ_k`.
    pub fn spin_algebra(&self, a: &DMatrix<f64>) -> CMatrix {
        let m = self.dim();
        let n = self.spinor_dim();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..m {
            for k in 0..m {
                if i == k {
                    continue;
                }
                let c = 0.25 * self.eps[i] * a[(k, i)];
                if c != 0.0 {
                    out += self.gamma_product(i, k) * Complex64::new(c, 0.0);
                }
            }
        }
        out
    }

    /// Maximal entry of `γ_iγ_j + γ_jγ_i + 2ε_iδ_ij I` over all pairs.
    pub fn anticommutator_residual(&self) -> f64 {
        let m = self.dim();
        let n = self.spinor_dim();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let mut ac = self.gamma_product(i, j) + self.gamma_product(j, i);
                if i == j {
                    ac += CMatrix::identity(n, n) * Complex64::new(2.0 * self.eps[i], 0.0);
                }
                worst = worst.max(max_abs(&ac));
            }
        }
        worst
    }

    /// Maximal entry of `γ_i† B − (−1)^{s+1} B γ_i` over all `i`.
    pub fn adjoint_residual(&self) -> f64 {
        let sign = Complex64::new(self.hermiticity_sign(), 0.0);
        self.gammas
            .iter()
            .map(|g| max_abs(&(g.adjoint() * &self.inner - &self.inner * g * sign)))
            .fold(0.0, f64::max)
    }

    /// Maximal entry of `B − B†`.
    pub fn inner_hermitian_residual(&self) -> f64 {
        max_abs(&(&self.inner - self.inner.adjoint()))
    }

    fn check_vector(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }

    fn check_spinor(&self, len: usize) -> Result<()> {
        if len != self.spinor_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.spinor_dim(),
                found: len,
            });
        }
        Ok(())
    }
}

/// Clifford multiplication `V ·_g ψ` for a vector given in coordinates.
///
/// The vector is expressed in the `g`-pseudo-orthonormal frame returned by
/// [`pseudo_onb`] and multiplied through the gamma matrices; `ψ` is read as
/// components with respect to the spin frame over that frame.
pub fn clifford_apply(rep: &GammaRep, g: &BilinearForm, v: &[f64], psi: &CVector) -> Result<CVector> {
    if g.dim() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            found: g.dim(),
        });
    }
    rep.check_vector(v.len())?;
    let frame = pseudo_onb(g)?;
    let inv = frame
        .basis()
        .clone()
        .try_inverse()
        .ok_or(Error::Degenerate {
            min_abs: 0.0,
            floor: 0.0,
        })?;
    let comps = inv * DVector::from_column_slice(v);
    rep.multiply(comps.as_slice(), psi)
}

/// A spin-group element together with the transformation it covers.
#[derive(Clone, Debug)]
pub struct SpinLift {
    pub lambda: CMatrix,
    pub rotation: DMatrix<f64>,
}

impl SpinLift {
    /// `max_i ‖Λγ_iΛ⁻¹ − Σ_j O_{ji} γ_j‖`.
    pub fn covariance_residual(&self, rep: &GammaRep) -> f64 {
        covariance_residual(rep, &self.lambda, &self.rotation)
    }
}

pub fn covariance_residual(rep: &GammaRep, lambda: &CMatrix, o: &DMatrix<f64>) -> f64 {
    let m = rep.dim();
    let Some(inv) = lambda.clone().try_inverse() else {
        return f64::INFINITY;
    };
    (0..m)
        .map(|i| {
            let lhs = lambda * rep.gamma(i) * &inv;
            let col: Vec<f64> = (0..m).map(|j| o[(j, i)]).collect();
            max_abs(&(lhs - rep.clifford(&col)))
        })
        .fold(0.0, f64::max)
}

fn eta(rep: &GammaRep) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(rep.epsilon()))
}

/// Checks `OᵀηO = η` and `det O = +1`.
pub fn check_special_pseudo_orthogonal(rep: &GammaRep, o: &DMatrix<f64>) -> Result<()> {
    let m = rep.dim();
    if o.nrows() != m || o.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: o.nrows(),
        });
    }
    let eta = eta(rep);
    let residual = max_abs(&(o.transpose() * &eta * o - &eta));
    let det = o.determinant();
    let scale = max_abs(o).max(1.0).powi(2);
    if residual > 1e-10 * scale || det <= 0.0 {
        return Err(Error::NotPseudoOrthogonal { residual, det });
    }
    Ok(())
}

fn lift_algebra(rep: &GammaRep, a: &DMatrix<f64>) -> CMatrix {
    rep.spin_algebra(a).exp()
}

/// Lift of `O` through the principal logarithm, normalized so that the
/// identity lifts to `+I`.
///
/// Fails when the square-root iteration behind the logarithm does not
/// converge; such elements must be lifted along a path with
/// [`spin_lift_along`]. Near a rotation by π the principal branch is
/// ill-conditioned and the sign of the lift is only meaningful along a path.
pub fn spin_lift(rep: &GammaRep, o: &DMatrix<f64>) -> Result<SpinLift> {
    check_special_pseudo_orthogonal(rep, o)?;
    let a = log_real(o)?;
    Ok(SpinLift {
        lambda: lift_algebra(rep, &a),
        rotation: o.clone(),
    })
}

/// Inverse of a pseudo-orthogonal matrix, `η Oᵀ η`.
pub(crate) fn pseudo_orthogonal_inverse(eps: &[f64], o: &DMatrix<f64>) -> DMatrix<f64> {
    let m = eps.len();
    DMatrix::from_fn(m, m, |i, j| eps[i] * o[(j, i)] * eps[j])
}

/// Continuous lift of a path `t ↦ O(t)`, `t ∈ [0, 1]`, of special
/// pseudo-orthogonal matrices.
///
/// The path is subdivided adaptively until successive samples differ by an
/// element inside the logarithm chart of the identity; the lift starts at the
/// principal lift of `O(0)`, which is `+I` when the path starts at the identity.
pub fn spin_lift_along<F>(rep: &GammaRep, path: F) -> Result<SpinLift>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    let start = path(0.0)?;
    let mut lambda = spin_lift(rep, &start)?.lambda;
    let mut prev = start;
    let mut t = 0.0f64;
    let mut dt = 0.125f64;
    let id = DMatrix::<f64>::identity(rep.dim(), rep.dim());
    while t < 1.0 {
        let step = dt.min(1.0 - t);
        let next = path(t + step)?;
        let delta = pseudo_orthogonal_inverse(rep.epsilon(), &prev) * &next;
        if max_abs(&(&delta - &id)) > 0.25 {
            dt *= 0.5;
            if dt < 1e-9 {
                return Err(Error::Logarithm(format!(
                    "path is not continuous near t = {t}"
                )));
            }
            continue;
        }
        let a = log_near_identity(&delta)?;
        lambda *= lift_algebra(rep, &a);
        prev = next;
        t += step;
        dt = (dt * 2.0).min(0.125);
    }
    check_special_pseudo_orthogonal(rep, &prev)?;
    Ok(SpinLift {
        lambda,
        rotation: prev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn one_dimensional_rep_is_imaginary_unit() {
        let rep = GammaRep::new(1, 0).unwrap();
        assert_eq!(rep.spinor_dim(), 1);
        assert_eq!(rep.gamma(0)[(0, 0)], I);
        assert_eq!((rep.gamma(0) * rep.gamma(0))[(0, 0)], c(-1.0));
    }

    #[test]
    fn two_dimensional_euclidean_relations() {
        let rep = GammaRep::new(2, 0).unwrap();
        assert_eq!(rep.spinor_dim(), 2);
        for i in 0..2 {
            for j in 0..2 {
                let ac = rep.gamma(i) * rep.gamma(j) + rep.gamma(j) * rep.gamma(i);
                let expected = if i == j { -2.0 } else { 0.0 };
                let want = CMatrix::identity(2, 2) * c(expected);
                assert!(max_abs(&(ac - want)) < 1e-15);
            }
        }
    }

    #[test]
    fn lorentzian_plane_squares() {
        let rep = GammaRep::new(1, 1).unwrap();
        let id = CMatrix::identity(2, 2);
        assert!(max_abs(&(rep.gamma(0) * rep.gamma(0) + &id)) < 1e-15);
        assert!(max_abs(&(rep.gamma(1) * rep.gamma(1) - &id)) < 1e-15);
    }

    #[test]
    fn construction_is_deterministic() {
        let a = GammaRep::new(3, 2).unwrap();
        let b = GammaRep::new(3, 2).unwrap();
        for i in 0..5 {
            assert_eq!(a.gamma(i), b.gamma(i));
        }
        assert_eq!(a.inner_matrix(), b.inner_matrix());
    }

    #[test]
    fn all_small_signatures_satisfy_invariants() {
        for m in 1..=6 {
            for s in 0..=m {
                let rep = GammaRep::new(m - s, s).unwrap();
                assert_eq!(rep.spinor_dim(), 1 << (m / 2));
                assert!(rep.anticommutator_residual() <= 1e-12);
                assert!(rep.adjoint_residual() <= 1e-12, "({}, {s})", m - s);
                assert!(rep.inner_hermitian_residual() <= 1e-12);
                assert!(rep.inner_matrix().determinant().norm() > 0.5);
            }
        }
    }

    #[test]
    fn empty_signature_is_rejected() {
        assert!(GammaRep::new(0, 0).is_err());
    }

    #[test]
    fn riemannian_inner_product_is_positive() {
        let rep = GammaRep::new(4, 0).unwrap();
        let eig = rep.inner_matrix().clone().symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn indefinite_inner_product_has_null_vector() {
        let rep = GammaRep::new(1, 1).unwrap();
        let eig = rep.inner_matrix().clone().symmetric_eigen();
        let (pos, neg) = if eig.eigenvalues[0] > 0.0 { (0, 1) } else { (1, 0) };
        let lp = eig.eigenvalues[pos];
        let ln = eig.eigenvalues[neg];
        let v = eig.eigenvectors.column(pos) * c((-ln).sqrt()) + eig.eigenvectors.column(neg) * c(lp.sqrt());
        let v = CVector::from_column_slice(v.as_slice());
        assert!(v.norm() > 0.1);
        assert!(rep.inner(&v, &v).unwrap().norm() < 1e-14);
    }

    #[test]
    fn inner_product_is_hermitian_symmetric() {
        let rep = GammaRep::new(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rv = || {
            CVector::from_fn(rep.spinor_dim(), |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
        };
        let (a, b) = (rv(), rv());
        let ab = rep.inner(&a, &b).unwrap();
        let ba = rep.inner(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-14);
        assert_eq!(rep.inner(&CVector::zeros(2), &b).unwrap(), ZERO);
    }

    #[test]
    fn clifford_square_is_minus_norm() {
        let rep = GammaRep::new(2, 2).unwrap();
        let g = BilinearForm::flat(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let psi = CVector::from_fn(rep.spinor_dim(), |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let once = clifford_apply(&rep, &g, &v, &psi).unwrap();
        let twice = clifford_apply(&rep, &g, &v, &once).unwrap();
        let norm = g.eval(&v, &v);
        assert!(max_abs(&(twice + psi * c(norm))) < 1e-13);
    }

    #[test]
    fn clifford_apply_on_basis_vector() {
        let rep = GammaRep::new(2, 0).unwrap();
        let g = BilinearForm::identity(2);
        let psi = CVector::from_vec(vec![ONE, ZERO]);
        let out = clifford_apply(&rep, &g, &[1.0, 0.0], &psi).unwrap();
        let want = rep.gamma(0) * &psi;
        assert_eq!(out, want);
        let zero = clifford_apply(&rep, &g, &[0.3, -0.2], &CVector::zeros(2)).unwrap();
        assert_eq!(zero, CVector::zeros(2));
    }

    #[test]
    fn clifford_apply_rejects_wrong_dimension() {
        let rep = GammaRep::new(2, 0).unwrap();
        let g = BilinearForm::identity(2);
        assert!(clifford_apply(&rep, &g, &[1.0, 0.0, 0.0], &CVector::zeros(2)).is_err());
        assert!(rep.multiply(&[1.0, 0.0], &CVector::zeros(3)).is_err());
    }

    #[test]
    fn identity_lifts_to_identity() {
        let rep = GammaRep::new(3, 1).unwrap();
        let lift = spin_lift(&rep, &DMatrix::identity(4, 4)).unwrap();
        assert!(max_abs(&(lift.lambda - CMatrix::identity(4, 4))) < 1e-15);
    }

    fn rotation2(theta: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
    }

    #[test]
    fn full_turn_lifts_to_minus_identity() {
        let rep = GammaRep::new(2, 0).unwrap();
        let lift = spin_lift_along(&rep, |t| Ok(rotation2(2.0 * std::f64::consts::PI * t))).unwrap();
        assert!(max_abs(&(lift.lambda + CMatrix::identity(2, 2))) < 1e-10);
    }

    #[test]
    fn lift_covariance_for_rotation_and_boost() {
        let rep = GammaRep::new(2, 0).unwrap();
        let lift = spin_lift(&rep, &rotation2(0.7)).unwrap();
        assert!(lift.covariance_residual(&rep) < 1e-12);
        let rep = GammaRep::new(1, 1).unwrap();
        let (ch, sh) = (1.3f64.cosh(), 1.3f64.sinh());
        let boost = DMatrix::from_row_slice(2, 2, &[ch, sh, sh, ch]);
        let lift = spin_lift(&rep, &boost).unwrap();
        assert!(lift.covariance_residual(&rep) < 1e-12);
    }

    #[test]
    fn lift_rejects_non_orthogonal_and_reflections() {
        let rep = GammaRep::new(2, 0).unwrap();
        let stretch = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        assert!(matches!(
            spin_lift(&rep, &stretch),
            Err(Error::NotPseudoOrthogonal { .. })
        ));
        let reflection = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(spin_lift(&rep, &reflection).is_err());
    }

    #[test]
    fn lift_preserves_inner_product() {
        let rep = GammaRep::new(2, 1).unwrap();
        let (ch, sh) = (0.8f64.cosh(), 0.8f64.sinh());
        let o = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, ch, sh, 0.0, sh, ch]);
        let lift = spin_lift(&rep, &o).unwrap();
        let b = rep.inner_matrix();
        assert!(max_abs(&(lift.lambda.adjoint() * b * &lift.lambda - b)) < 1e-12);
    }
}
