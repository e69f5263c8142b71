//! Dense complex matrix helpers. Matrix functions go through the Hermitian
//! eigendecomposition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Eigendecomposition of the Hermitian part of `m`, eigenvalues sorted in
/// descending order with eigenvectors as matching columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 1 {
        return (vec![m[(0, 0)].re], identity(1));
    }
    if is_diagonal(m) {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| m[(b, b)].re.total_cmp(&m[(a, a)].re).then(a.cmp(&b)));
        let values = order.iter().map(|&i| m[(i, i)].re).collect();
        let mut vecs = CMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vecs[(i, col)] = ONE;
        }
        return (values, vecs);
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vecs)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    let mut v: Vec<f64> = if is_diagonal(m) {
        (0..n).map(|i| m[(i, i)].re).collect()
    } else {
        hermitian_part(m).symmetric_eigenvalues().iter().copied().collect()
    };
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn is_diagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != ZERO {
                return false;
            }
        }
    }
    true
}

/// `V diag(f(λ)) V†` for Hermitian `m`.
pub fn spectral_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let s = f(l);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    &scaled * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix; negative eigenvalues are
/// treated as zero.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    spectral_map(m, |l| l.max(0.0).sqrt())
}

/// Pseudo-inverse square root restricted to eigenvalues above `cutoff`.
pub fn inv_sqrt_psd(m: &CMatrix, cutoff: f64) -> CMatrix {
    spectral_map(m, |l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 })
}

/// Trace norm of a Hermitian matrix: sum of absolute eigenvalues.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|l| l.abs()).sum()
}

/// Trace norm of an arbitrary matrix: sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// `v v†`.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Mixed-radix strides (row-major, first factor most significant).
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Index map for reordering tensor factors: `result[new] = old` where the
/// new factor order is `perm` (factor `perm[k]` of the old space becomes
/// factor `k`).
pub fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut map = vec![0usize; total];
    let mut digits = vec![0usize; dims.len()];
    for (new_idx, slot) in map.iter_mut().enumerate() {
        let mut rem = new_idx;
        for k in (0..new_dims.len()).rev() {
            digits[k] = rem % new_dims[k];
            rem /= new_dims[k];
        }
        *slot = perm
            .iter()
            .zip(&digits)
            .map(|(&p, &d)| d * old_strides[p])
            .sum();
    }
    map
}

pub fn permute_matrix(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let map = permutation_index_map(dims, perm);
    let n = map.len();
    CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])])
}

pub fn permute_vector(v: &CVector, dims: &[usize], perm: &[usize]) -> CVector {
    let map = permutation_index_map(dims, perm);
    CVector::from_fn(map.len(), |i, _| v[map[i]])
}

/// Partial trace of a matrix on a factorised index space, keeping the factors
/// at positions `keep` (ascending).
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();
    if traced_dim == 1 {
        return m.clone();
    }
    let mut perm = keep.to_vec();
    perm.extend(&traced);
    let map = permutation_index_map(dims, &perm);
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for r in 0..kept_dim {
        for col in 0..kept_dim {
            let mut acc = ZERO;
            for t in 0..traced_dim {
                acc += m[(map[r * traced_dim + t], map[col * traced_dim + t])];
            }
            out[(r, col)] = acc;
        }
    }
    out
}

/// Orthonormalises the columns of `x` via `x (x†x)^{-1/2}`.
pub fn polar_isometry(x: &CMatrix) -> CMatrix {
    let gram = x.adjoint() * x;
    x * inv_sqrt_psd(&gram, 1e-300)
}
