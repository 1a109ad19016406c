//! Dense complex matrix helpers.

use nalgebra::{DMatrix, DVector};

use crate::scalar::{cabs, Cplx, Real};

pub type CMatrix<T> = DMatrix<Cplx<T>>;
pub type CVector<T> = DVector<Cplx<T>>;

/// Largest entry modulus.
pub fn max_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
}

pub fn max_norm_real<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.magnitude()))
}

pub fn hermitian_residual<T: Real>(m: &CMatrix<T>) -> T {
    max_norm(&(m - m.adjoint()))
}

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

/// Matrix exponential by Padé scaling-and-squaring.
pub fn expm<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    if m.nrows() == 0 {
        return m.clone();
    }
    m.clone().exp()
}

pub fn expm_real<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    m.clone().exp()
}

/// Eigen-decomposition of a hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), m.clone());
    }
    // symmetrize so the solver sees an exactly hermitian input
    let sym = (m + m.adjoint()).scale(T::lit(0.5));
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen<T: Real>(m: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), m.clone());
    }
    let sym = (m + m.transpose()).scale(T::lit(0.5));
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Groups sorted values into clusters whose consecutive gaps are within `tol`.
///
/// Returns `(representative value, member indices)` per cluster; the
/// representative is the mean of the members.
pub fn cluster_sorted<T: Real>(values: &[T], tol: T) -> Vec<(T, Vec<usize>)> {
    let mut out: Vec<(T, Vec<usize>)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some((_, members)) if (v - values[*members.last().unwrap()]).magnitude() <= tol => {
                members.push(i)
            }
            _ => out.push((v, vec![i])),
        }
    }
    for (rep, members) in out.iter_mut() {
        let sum = members.iter().fold(T::zero(), |acc, &i| acc + values[i]);
        *rep = sum / T::from_usize_lossy(members.len());
    }
    out
}

/// `⟨v|A|v⟩` for a dense matrix.
pub fn expectation<T: Real>(a: &CMatrix<T>, v: &CVector<T>) -> Cplx<T> {
    v.dotc(&(a * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn eigen_sorted_and_orthonormal() {
        let m = CMatrix::<f64>::from_row_slice(
            2,
            2,
            &[
                cplx(2.0, 0.0),
                cplx(0.0, -1.0),
                cplx(0.0, 1.0),
                cplx(2.0, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let gram = vecs.adjoint() * &vecs;
        assert!(max_norm(&(gram - CMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn clusters_merge_close_values() {
        let c = cluster_sorted(&[0.0f64, 1e-10, 1.0, 1.0 + 5e-9, 4.0], 1e-8);
        assert_eq!(c.len(), 3);
        assert_eq!(c[1].1, vec![2, 3]);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.3f64;
        let g = CMatrix::from_row_slice(
            2,
            2,
            &[cplx(0.0, 0.0), cplx(-t, 0.0), cplx(t, 0.0), cplx(0.0, 0.0)],
        );
        let e = expm(&g);
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-14);
    }
}
