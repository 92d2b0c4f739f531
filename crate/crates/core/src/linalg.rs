//! Small dense helpers shared by the pointwise modules.

use nalgebra::{ComplexField, DMatrix, Dim, Matrix, RawStorage};

use crate::error::{Error, Result};

pub(crate) fn max_abs<T, R, C, S>(m: &Matrix<T, R, C, S>) -> f64
where
    T: ComplexField,
    T::RealField: Into<f64>,
    R: Dim,
    C: Dim,
    S: RawStorage<T, R, C>,
{
    m.iter().fold(0.0, |acc, x| acc.max(x.clone().modulus().into()))
}

/// Eigenvalues of a general real matrix from a bounded Schur iteration.
///
/// The unshifted-restart QR iteration can cycle on some inputs, so a
/// non-converged attempt is retried on fixed similarity transforms of `a`.
pub(crate) fn general_eigenvalues(a: &DMatrix<f64>) -> Option<Vec<num_complex::Complex64>> {
    let n = a.nrows();
    let max_iter = 200 * n.max(1);
    for k in 0..4 {
        let conj = if k == 0 {
            a.clone()
        } else {
            let p = DMatrix::from_fn(n, n, |i, j| {
                let d = if i == j { 1.0 } else { 0.0 };
                d + 0.05 * k as f64 * (((i * 7 + j * 3 + k) % 5) as f64 - 2.0) / 2.0
            });
            let inv = p.clone().try_inverse()?;
            inv * a * p
        };
        if let Some(schur) = conj.try_schur(f64::EPSILON, max_iter) {
            return Some(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    None
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues descending.
///
/// Eigenvectors are sign-normalized (first component with magnitude above
/// 1e-12 is positive); ties in the eigenvalue are broken by descending
/// lexicographic order of the normalized eigenvectors.
pub(crate) fn sorted_sym_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12) {
                if first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            (eig.eigenvalues[k], v)
        })
        .collect();
    let scale = pairs.iter().fold(0.0f64, |acc, p| acc.max(p.0.abs())).max(1.0);
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= 1e-12 * scale {
            b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal)
        } else {
            b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal)
        }
    });
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| pairs[j].1[i]);
    (values, vectors)
}

/// Principal square root and its inverse by the Denman–Beavers iteration.
///
/// Valid when no eigenvalue lies on the closed negative real axis.
pub(crate) fn sqrt_and_inv_sqrt(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let y_inv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Logarithm("singular iterate in square root".into()))?;
        let z_inv = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Logarithm("singular iterate in square root".into()))?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let delta = max_abs(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if !delta.is_finite() {
            break;
        }
        if delta <= 4.0 * f64::EPSILON * max_abs(&y).max(1.0) {
            return Ok((y, z));
        }
    }
    Err(Error::Logarithm(
        "square root iteration did not converge (eigenvalue on the negative real axis?)".into(),
    ))
}

/// Logarithm of a real matrix close to the identity (‖A − I‖ well below 1),
/// through the series 2·atanh((A − I)(A + I)⁻¹).
pub(crate) fn log_near_identity(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let plus = (a + &id)
        .try_inverse()
        .ok_or_else(|| Error::Logarithm("A + I singular".into()))?;
    let z = (a - &id) * plus;
    let zn = max_abs(&z) * n as f64;
    if zn >= 0.5 {
        return Err(Error::Logarithm(format!(
            "argument too far from identity (‖Z‖ ≈ {zn:.3})"
        )));
    }
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    for k in 1..200 {
        term = &term * &z2;
        let contrib = &term / (2 * k + 1) as f64;
        let size = max_abs(&contrib);
        sum += contrib;
        if size < 1e-18 {
            break;
        }
    }
    Ok(sum * 2.0)
}

/// Principal real logarithm by inverse scaling and squaring.
pub(crate) fn log_real(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut root = a.clone();
    let mut halvings = 0u32;
    while max_abs(&(&root - &id)) > 0.1 {
        if halvings > 60 {
            return Err(Error::Logarithm("too many square roots".into()));
        }
        root = sqrt_and_inv_sqrt(&root)?.0;
        halvings += 1;
    }
    Ok(log_near_identity(&root)? * 2f64.powi(halvings as i32))
}
