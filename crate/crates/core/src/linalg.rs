//! Small dense Hermitian helpers shared by the solver and beamforming code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// `v v^H`.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Real part of `Tr(A B)`; for Hermitian `A`, `B` the imaginary part vanishes.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    debug_assert!(
        acc.im.abs() <= 1e-10 * (1.0 + acc.re.abs()),
        "trace of Hermitian product has imaginary residue {}",
        acc.im
    );
    acc.re
}

/// Real trace.
pub fn trace(a: &CMatrix) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// Largest entrywise `|A - A^H|`.
pub fn hermitian_residual(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut r = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            r = r.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    r
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// `(A + A^H) / 2`.
pub fn symmetrize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigenvalues in descending order with matching eigenvector columns.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = symmetrize(a).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Largest eigenvalue and its unit eigenvector.
pub fn principal_eigenpair(a: &CMatrix) -> (f64, CVector) {
    let (values, vectors) = hermitian_eigen(a);
    (values[0], vectors.column(0).into_owned())
}

/// Rotates `w` so its first non-negligible entry is real and non-negative.
pub fn normalize_phase(w: &CVector) -> CVector {
    let scale = w.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    match w
        .iter()
        .find(|z| z.norm() > 1e-12 * scale.max(f64::MIN_POSITIVE))
    {
        Some(z) => {
            let rot = z.conj() / z.norm();
            w.map(|v| v * rot)
        }
        None => w.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigen_is_sorted_and_reconstructs() {
        let v = CVector::from_vec(vec![c(1.0, 0.5), c(-0.3, 0.2), c(0.0, 1.0)]);
        let u = CVector::from_vec(vec![c(0.2, 0.0), c(1.0, -1.0), c(0.4, 0.1)]);
        let a = outer(&v) * c(3.0, 0.0) + outer(&u);
        let (vals, vecs) = hermitian_eigen(&a);
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
        let mut rebuilt = CMatrix::zeros(3, 3);
        for (i, &val) in vals.iter().enumerate() {
            rebuilt += outer(&vecs.column(i).into_owned()) * c(val, 0.0);
        }
        assert!(max_abs(&(rebuilt - &a)) < 1e-12);
        assert!((trace(&a) - vals.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn phase_normalization() {
        let w = CVector::from_vec(vec![c(0.0, 0.0), c(0.0, -2.0), c(1.0, 1.0)]);
        let n = normalize_phase(&w);
        assert!(n[1].im.abs() < 1e-15 && n[1].re > 0.0);
        assert!((n.norm() - w.norm()).abs() < 1e-14);
        assert!((n.dotc(&w).norm() - w.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn hermitian_checks() {
        let mut a = outer(&CVector::from_vec(vec![c(1.0, 2.0), c(3.0, -1.0)]));
        assert!(hermitian_residual(&a) < 1e-15);
        a[(0, 1)] += c(0.0, 1e-3);
        assert!(hermitian_residual(&a) > 1e-4);
        assert!(hermitian_residual(&symmetrize(&a)) < 1e-15);
    }
}
