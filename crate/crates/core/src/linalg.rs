//! Small dense complex kernels on row-major slices.
//!
//! Spinor values are `2 × n` matrices, `SU(n)` links are `n × n` matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::spin::Mat2;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// `out = psi · v†` for `psi: 2×n`, `v: n×n`.
#[inline]
pub(crate) fn hom_mul_adj(psi: &[C64], v: &[C64], n: usize, out: &mut [C64]) {
    for r in 0..2 {
        for c in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += psi[r * n + k] * v[c * n + k].conj();
            }
            out[r * n + c] = acc;
        }
    }
}

/// `out = psi · v` for `psi: 2×n`, `v: n×n`.
#[inline]
pub(crate) fn hom_mul(psi: &[C64], v: &[C64], n: usize, out: &mut [C64]) {
    for r in 0..2 {
        for c in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += psi[r * n + k] * v[k * n + c];
            }
            out[r * n + c] = acc;
        }
    }
}

/// `out = m · psi` for `m: 2×2`, `psi: 2×n`.
#[inline]
pub(crate) fn mat2_mul_hom(m: &Mat2, psi: &[C64], n: usize, out: &mut [C64]) {
    let m = &m.0;
    for c in 0..n {
        let p0 = psi[c];
        let p1 = psi[n + c];
        out[c] = m[0][0] * p0 + m[0][1] * p1;
        out[n + c] = m[1][0] * p0 + m[1][1] * p1;
    }
}

/// `Re tr(a b*)` for equally shaped slices.
#[inline]
pub(crate) fn re_inner(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

/// `tr(a b*)` for equally shaped slices.
#[inline]
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// `Σ |a_i|²` with compensated summation.
#[inline]
pub(crate) fn norm_sq(a: &[C64]) -> f64 {
    neumaier_sum(a.iter().map(|x| x.norm_sqr()))
}

/// Neumaier-compensated sum.
pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if f64::abs(sum) >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `μ(ψ) = ψψ* − ½|ψ|² id` for a `2×n` slice.
#[inline]
pub(crate) fn moment_map_slice(psi: &[C64], n: usize) -> Mat2 {
    let mut m = [[ZERO; 2]; 2];
    for (r, row) in m.iter_mut().enumerate() {
        for (s, entry) in row.iter_mut().enumerate() {
            *entry = (0..n).map(|k| psi[r * n + k] * psi[s * n + k].conj()).sum();
        }
    }
    let half = 0.5 * (m[0][0].re + m[1][1].re);
    m[0][0] -= half;
    m[1][1] -= half;
    Mat2(m)
}

/// `n × n` matrix product.
pub(crate) fn matmul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub(crate) fn adjoint(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

pub(crate) fn identity(n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        out[i * n + i] = ONE;
    }
    out
}

pub(crate) fn to_dmatrix(a: &[C64], rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(rows, cols, a)
}

pub(crate) fn from_dmatrix(m: &DMatrix<C64>) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub(crate) fn determinant(a: &[C64], n: usize) -> C64 {
    to_dmatrix(a, n, n).determinant()
}

/// Matrix exponential of an `n × n` matrix.
pub(crate) fn expm(a: &[C64], n: usize) -> Vec<C64> {
    from_dmatrix(&to_dmatrix(a, n, n).exp())
}

/// Traceless anti-Hermitian part of `q`, the first-order logarithm of a
/// unitary matrix close to the identity.
pub(crate) fn su_generator(q: &[C64], n: usize) -> Vec<C64> {
    let mut g = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = 0.5 * (q[i * n + j] - q[j * n + i].conj());
        }
    }
    let tr: C64 = (0..n).map(|i| g[i * n + i]).sum::<C64>() / n as f64;
    for i in 0..n {
        g[i * n + i] -= tr;
    }
    g
}

/// Largest eigen-angle `|θ|` of a unitary matrix, assuming all angles are
/// below `π/2`.
pub(crate) fn max_unitary_angle(q: &[C64], n: usize) -> f64 {
    let mut k = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // (q − q†) / 2i is Hermitian with eigenvalues sin θ.
            k[(i, j)] = (q[i * n + j] - q[j * n + i].conj()) / C64::new(0.0, 2.0);
        }
    }
    let eig = nalgebra::SymmetricEigen::new(k);
    eig.eigenvalues
        .iter()
        .map(|s| s.abs().min(1.0).asin())
        .fold(0.0, f64::max)
}
