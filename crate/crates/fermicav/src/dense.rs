//! Dense complex linear algebra used by the oracles and the exact evolutions.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

pub fn identity(dim: usize) -> CMat {
    Array2::eye(dim)
}

/// Kronecker product, `a` on the slow (high-order) index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|v| v.conj())
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    let (r, c) = a.dim();
    if r != c {
        return false;
    }
    max_abs_diff(a, &dagger(a)) <= tol
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending, columns of
/// the returned matrix are the matching orthonormal eigenvectors.
pub fn eigh_hermitian(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    if !is_hermitian(a, 1e-9) {
        return Err(Error::NonHermitian {
            what: "eigh input",
            detail: format!("max |A - A^dag| element = {:.3e}", {
                let d = dagger(a);
                max_abs_diff(a, &d)
            }),
        });
    }
    // LAPACK reads the buffer column-major; a row-major complex matrix would
    // be decomposed as its transpose and the eigenvectors would come back
    // conjugated. Feeding an F-order clone sidesteps the layout trap.
    let dim = a.dim().0;
    let mut af = CMat::zeros((dim, dim).f());
    af.assign(a);
    let (vals, vecs) = af
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Eigen(format!("{e}")))?;
    Ok((vals.to_vec(), vecs))
}

/// exp(-i t H) for Hermitian H via eigendecomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    let (vals, vecs) = eigh_hermitian(h)?;
    let dim = h.dim().0;
    let mut phases = CMat::zeros((dim, dim));
    for (k, &e) in vals.iter().enumerate() {
        phases[(k, k)] = Complex64::new(0.0, -e * t).exp();
    }
    Ok(vecs.dot(&phases).dot(&dagger(&vecs)))
}

/// Largest singular value by power iteration on A^dag A; adequate for the
/// small operator-norm checks in the tests.
pub fn op_norm_2(a: &CMat) -> f64 {
    let (r, c) = a.dim();
    if r == 0 || c == 0 {
        return 0.0;
    }
    let ata = dagger(a).dot(a);
    let mut v = CVec::from_elem(c, Complex64::new(1.0, 0.0));
    let mut prev = 0.0f64;
    for _ in 0..200 {
        let w = ata.dot(&v);
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w.mapv(|x| x / norm);
        if (norm - prev).abs() <= 1e-13 * norm.max(1.0) {
            prev = norm;
            break;
        }
        prev = norm;
    }
    prev.sqrt()
}

pub fn mat_vec(a: &CMat, v: &CVec) -> CVec {
    a.dot(v)
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &CVec, b: &CVec) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> CMat {
        let mut m = CMat::zeros((2, 2));
        m[(0, 1)] = c(1.0, 0.0);
        m[(1, 0)] = c(1.0, 0.0);
        m
    }

    fn pauli_z() -> CMat {
        let mut m = CMat::zeros((2, 2));
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(-1.0, 0.0);
        m
    }

    #[test]
    fn kron_shape_and_values() {
        let k = kron(&pauli_z(), &pauli_x());
        assert_eq!(k.dim(), (4, 4));
        assert_eq!(k[(0, 1)], c(1.0, 0.0));
        assert_eq!(k[(2, 3)], c(-1.0, 0.0));
    }

    #[test]
    fn eigh_on_pauli_x() {
        let (vals, vecs) = eigh_hermitian(&pauli_x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        // Columns are eigenvectors.
        let v0 = vecs.column(0).to_owned();
        let av = pauli_x().dot(&v0);
        for i in 0..2 {
            assert!((av[i] - v0[i] * vals[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let mut m = CMat::zeros((2, 2));
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            eigh_hermitian(&m),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn expm_x_half_pi() {
        // exp(-i (pi/2) X) = -i X.
        let u = expm_hermitian(&pauli_x(), std::f64::consts::FRAC_PI_2).unwrap();
        let expect = pauli_x().mapv(|v| v * c(0.0, -1.0));
        assert!(max_abs_diff(&u, &expect) < 1e-12);
    }

    #[test]
    fn expm_is_unitary() {
        let h = pauli_z() + pauli_x();
        let u = expm_hermitian(&h, 0.37).unwrap();
        let prod = dagger(&u).dot(&u);
        assert!(max_abs_diff(&prod, &identity(2)) < 1e-12);
    }

    #[test]
    fn op_norm_of_scaled_unitary() {
        let m = pauli_x().mapv(|v| v * c(2.5, 0.0));
        assert!((op_norm_2(&m) - 2.5).abs() < 1e-9);
    }

    #[test]
    fn eigh_pairs_vectors_for_complex_entries() {
        // Row-major complex input must not come back with conjugated
        // eigenvectors; Y is the smallest matrix that exposes it.
        let y = ndarray::arr2(&[[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]);
        let (vals, vecs) = eigh_hermitian(&y).unwrap();
        for (k, &e) in vals.iter().enumerate() {
            for r in 0..2 {
                let hv: Complex64 = (0..2).map(|j| y[(r, j)] * vecs[(j, k)]).sum();
                assert!((hv - vecs[(r, k)] * e).norm() < 1e-12);
            }
        }
    }
}
