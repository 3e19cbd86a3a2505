//! Cyclic Jacobi kernels for complex Hermitian eigenproblems and SVD.
//!
//! Both kernels use the same 2x2 step: a diagonal phase that makes the
//! off-diagonal pivot real, followed by a real Givens rotation.

use num_traits::{One, Zero};

use crate::scalar::{Cx, Real};
use crate::tensor::UnfoldedMatrix;

const MAX_SWEEPS: usize = 100;

/// Unitary 2x2 factor `G` acting on columns `(p, q)`, stored as
/// `[[g_pp, g_pq], [g_qp, g_qq]]`.
struct Rotation<T: Real> {
    pp: Cx<T>,
    pq: Cx<T>,
    qp: Cx<T>,
    qq: Cx<T>,
}

impl<T: Real> Rotation<T> {
    /// Rotation that diagonalizes the Hermitian 2x2 block `[[alpha, gamma], [conj(gamma), beta]]`
    /// under `G^H M G`.
    fn diagonalizing(alpha: T, beta: T, gamma: Cx<T>) -> Self {
        let r = gamma.norm();
        let phase = if r > T::zero() { (gamma / Cx::new(r, T::zero())).conj() } else { Cx::one() };
        let zeta = (beta - alpha) / (T::lit(2.0) * r);
        let t = if zeta.is_infinite() {
            T::zero()
        } else {
            let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
            sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt())
        };
        let c = T::one() / (T::one() + t * t).sqrt();
        let s = c * t;
        let c_cx = Cx::new(c, T::zero());
        let s_cx = Cx::new(s, T::zero());
        Self { pp: c_cx, pq: s_cx, qp: -s_cx * phase, qq: c_cx * phase }
    }

    fn apply_columns(&self, m: &mut UnfoldedMatrix<T>, p: usize, q: usize) {
        for r in 0..m.rows() {
            let a = m.get(r, p);
            let b = m.get(r, q);
            m.set(r, p, a * self.pp + b * self.qp);
            m.set(r, q, a * self.pq + b * self.qq);
        }
    }

    /// Left-multiply rows `(p, q)` by `G^H`.
    fn apply_rows_adjoint(&self, m: &mut UnfoldedMatrix<T>, p: usize, q: usize) {
        let (pp, pq, qp, qq) = (self.pp.conj(), self.qp.conj(), self.pq.conj(), self.qq.conj());
        for c in 0..m.cols() {
            let a = m.get(p, c);
            let b = m.get(q, c);
            m.set(p, c, pp * a + pq * b);
            m.set(q, c, qp * a + qq * b);
        }
    }
}

/// Eigenvalues (unsorted, in Jacobi output order) and eigenvector columns of a
/// Hermitian matrix. The input is assumed Hermitian; only that part is used.
pub(crate) fn hermitian_eig<T: Real>(h: &UnfoldedMatrix<T>) -> (Vec<T>, UnfoldedMatrix<T>) {
    let n = h.rows();
    let mut a = h.clone();
    // Enforce exact Hermitian symmetry so rounding in the input does not bias the sweep.
    for r in 0..n {
        a.set(r, r, Cx::new(a.get(r, r).re, T::zero()));
        for c in r + 1..n {
            let avg = (a.get(r, c) + a.get(c, r).conj()) * Cx::new(T::lit(0.5), T::zero());
            a.set(r, c, avg);
            a.set(c, r, avg.conj());
        }
    }
    let mut v = UnfoldedMatrix::identity(n);
    let scale = a.max_abs();
    if scale > T::zero() {
        let eps = T::epsilon();
        for _ in 0..MAX_SWEEPS {
            let off: T = (0..n)
                .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
                .fold(T::zero(), |s, (r, c)| s + a.get(r, c).norm_sqr());
            if off.sqrt() <= eps * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let g = a.get(p, q);
                    let app = a.get(p, p).re;
                    let aqq = a.get(q, q).re;
                    if g.norm() <= eps * T::lit(0.01) * (app.abs() + aqq.abs()).max(eps * scale) {
                        a.set(p, q, Cx::zero());
                        a.set(q, p, Cx::zero());
                        continue;
                    }
                    let rot = Rotation::diagonalizing(app, aqq, g);
                    rot.apply_columns(&mut a, p, q);
                    rot.apply_rows_adjoint(&mut a, p, q);
                    rot.apply_columns(&mut v, p, q);
                    a.set(p, q, Cx::zero());
                    a.set(q, p, Cx::zero());
                    a.set(p, p, Cx::new(a.get(p, p).re, T::zero()));
                    a.set(q, q, Cx::new(a.get(q, q).re, T::zero()));
                }
            }
        }
    }
    ((0..n).map(|i| a.get(i, i).re).collect(), v)
}

/// Thin SVD of a matrix with `rows >= cols` by one-sided (Hestenes) Jacobi.
/// Returns `(sigma, left, right)` with `left` rows x cols, `right` cols x cols,
/// singular values sorted descending.
fn svd_tall<T: Real>(m: &UnfoldedMatrix<T>) -> (Vec<T>, UnfoldedMatrix<T>, UnfoldedMatrix<T>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut v = UnfoldedMatrix::identity(cols);
    let eps = T::epsilon();
    let col_norm2 = |a: &UnfoldedMatrix<T>, c: usize| (0..rows).fold(T::zero(), |s, r| s + a.get(r, c).norm_sqr());
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = col_norm2(&a, p);
                let beta = col_norm2(&a, q);
                let gamma = (0..rows).fold(Cx::zero(), |s, r| s + a.get(r, p).conj() * a.get(r, q));
                if gamma.norm() <= eps * (alpha * beta).sqrt() || gamma.is_zero() {
                    continue;
                }
                rotated = true;
                let rot = Rotation::diagonalizing(alpha, beta, gamma);
                rot.apply_columns(&mut a, p, q);
                rot.apply_columns(&mut v, p, q);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<T> = (0..cols).map(|c| col_norm2(&a, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));

    let mut sigma = Vec::with_capacity(cols);
    let mut left = UnfoldedMatrix::zeros(rows, cols);
    let mut right = UnfoldedMatrix::zeros(cols, cols);
    let tiny = eps * norms.iter().copied().fold(T::zero(), T::max) * T::lit(rows.max(1) as f64);
    let mut missing = Vec::new();
    for (k, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        for r in 0..cols {
            right.set(r, k, v.get(r, src));
        }
        if s > tiny && s > T::zero() {
            let inv = Cx::new(T::one() / s, T::zero());
            for r in 0..rows {
                left.set(r, k, a.get(r, src) * inv);
            }
        } else {
            missing.push(k);
        }
    }
    complete_orthonormal(&mut left, &missing);
    (sigma, left, right)
}

/// Fill the listed columns with unit vectors orthogonal to every other column
/// (modified Gram-Schmidt against the canonical basis).
fn complete_orthonormal<T: Real>(q: &mut UnfoldedMatrix<T>, missing: &[usize]) {
    let rows = q.rows();
    let mut filled: Vec<usize> = (0..q.cols()).filter(|c| !missing.contains(c)).collect();
    let mut candidate = 0;
    for &k in missing {
        loop {
            assert!(candidate < rows, "orthonormal completion exhausted the basis");
            let mut w: Vec<Cx<T>> = (0..rows).map(|r| if r == candidate { Cx::one() } else { Cx::zero() }).collect();
            candidate += 1;
            for _ in 0..2 {
                for &c in &filled {
                    let proj = (0..rows).fold(Cx::zero(), |s, r| s + q.get(r, c).conj() * w[r]);
                    for (r, wr) in w.iter_mut().enumerate() {
                        *wr = *wr - q.get(r, c) * proj;
                    }
                }
            }
            let norm = w.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt();
            if norm > T::lit(0.5) {
                let inv = Cx::new(T::one() / norm, T::zero());
                for (r, wr) in w.into_iter().enumerate() {
                    q.set(r, k, wr * inv);
                }
                filled.push(k);
                break;
            }
        }
    }
}

/// Thin SVD of any matrix: `m = left * diag(sigma) * right^H`,
/// `p = min(rows, cols)` singular values descending.
pub(crate) fn svd<T: Real>(m: &UnfoldedMatrix<T>) -> (Vec<T>, UnfoldedMatrix<T>, UnfoldedMatrix<T>) {
    if m.rows() >= m.cols() {
        svd_tall(m)
    } else {
        let (s, l, r) = svd_tall(&m.adjoint());
        (s, r, l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, v: &[(f64, f64)]) -> UnfoldedMatrix<f64> {
        UnfoldedMatrix::new(rows, cols, v.iter().map(|&(a, b)| Cx::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn eig_of_complex_2x2() {
        // [[2, 1-i], [1+i, 3]] has eigenvalues 1 and 4.
        let h = mat(2, 2, &[(2., 0.), (1., -1.), (1., 1.), (3., 0.)]);
        let (mut ev, _) = hermitian_eig(&h);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn svd_reconstructs_rank_deficient() {
        let m = mat(3, 2, &[(1., 0.), (2., 0.), (2., 0.), (4., 0.), (3., 0.), (6., 0.)]);
        let (s, l, r) = svd(&m);
        assert!(s[1].abs() < 1e-14);
        let lh = l.adjoint().matmul(&l).unwrap();
        assert!(lh.max_abs_diff(&UnfoldedMatrix::identity(2)).unwrap() < 1e-14);
        let diag: Vec<_> = s.iter().map(|&x| Cx::new(x, 0.)).collect();
        let rec = l.matmul(&UnfoldedMatrix::from_diagonal(&diag)).unwrap().matmul(&r.adjoint()).unwrap();
        assert!(rec.max_abs_diff(&m).unwrap() < 1e-13);
    }

    #[test]
    fn svd_of_zero_has_orthonormal_factors() {
        let m = UnfoldedMatrix::<f64>::zeros(2, 3);
        let (s, l, _) = svd(&m);
        assert_eq!(s, vec![0.0, 0.0]);
        let lh = l.adjoint().matmul(&l).unwrap();
        assert!(lh.max_abs_diff(&UnfoldedMatrix::identity(2)).unwrap() < 1e-15);
    }
}
