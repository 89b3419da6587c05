//! Dense Hermitian helpers and the structured block-tridiagonal eigensolver.

mod band;
mod blocktri;

pub use band::BandLu;
pub use blocktri::{BlockLdl, BlockTridiagonal, EigenPair, SolverOptions};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::scalar::{cabs, cr, CMat, CVec, Real};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Eigenvectors are returned as columns with the gauge fixed by [`fix_gauge`].
pub fn hermitian_eigen<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let n = m.nrows();
    let herm = (m + m.adjoint()).map(|z| z * cr(crate::scalar::lit::<T>(0.5)));
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::<T>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v: CVec<T> = eig.eigenvectors.column(i).into_owned();
        fix_gauge(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending,
/// largest-magnitude component of every eigenvector made positive.
pub fn symmetric_eigen<T: Real>(m: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let n = m.nrows();
    let half = crate::scalar::lit::<T>(0.5);
    let sym = (m + m.transpose()) * half;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<T>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let mut best = 0;
        for k in 0..n {
            if v[k].abs() > v[best].abs() {
                best = k;
            }
        }
        if v[best] < T::zero() {
            v.neg_mut();
        }
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Rotates a vector by a global phase so that its largest-magnitude
/// component is real and positive.
pub fn fix_gauge<T: Real>(v: &mut CVec<T>) {
    let mut best = 0;
    let mut best_abs = T::zero();
    for (k, z) in v.iter().enumerate() {
        let a = cabs(*z);
        // ties resolved towards the lower index for determinism
        if a > best_abs * (T::one() + crate::scalar::lit(1e-12)) {
            best = k;
            best_abs = a;
        }
    }
    if best_abs == T::zero() {
        return;
    }
    let z = v[best];
    let rot = z.conj() / cr(best_abs);
    for x in v.iter_mut() {
        *x *= rot;
    }
    v[best] = cr(v[best].re);
}

/// Largest absolute entry of `m - m^H`.
pub fn hermiticity_error<T: Real>(m: &CMat<T>) -> T {
    let mut err = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = cabs(m[(i, j)] - m[(j, i)].conj());
            if d > err {
                err = d;
            }
        }
    }
    err
}
