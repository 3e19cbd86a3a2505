use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Dense complex matrix in row-major order.
///
/// This is the unfolded view of a [`DenseTensor`](super::DenseTensor): rows
/// enumerate the row multi-indices, columns the column multi-indices, with the
/// same flat layout, so unfolding and folding never touch the entries.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedMatrix<T: Real> {
    rows: usize,
    cols: usize,
    entries: Vec<Cx<T>>,
}

impl<T: Real> UnfoldedMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Cx<T>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::LengthMismatch(entries.len(), rows * cols));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Cx::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Cx::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[Cx<T>]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * n + i] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Cx<T>] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Cx<T>> {
        self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Cx<T> {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Cx<T>) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<Cx<T>> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", rhs.rows, rhs.cols),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let row = &self.entries[i * self.cols..(i + 1) * self.cols];
            let dst = &mut out.entries[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let src = &rhs.entries[k * rhs.cols..(k + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d = *d + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.rows.min(self.cols)).fold(Cx::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Max-abs entrywise distance; `None` on dimension mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> Option<T> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        Some(
            self.entries
                .iter()
                .zip(&other.entries)
                .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm())),
        )
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::NotSquare(format!("{}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        let scale = self.max_abs();
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let floor = T::epsilon() * T::lit(n as f64) * scale;
        let mut min_pivot = T::infinity();
        for col in 0..n {
            let (piv, piv_abs) = (col..n)
                .map(|r| (r, a.get(r, col).norm()))
                .fold((col, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
            min_pivot = min_pivot.min(piv_abs);
            if !(piv_abs > floor) || scale.is_zero() {
                let condition = if piv_abs.is_zero() { f64::INFINITY } else { (scale / piv_abs).as_f64() };
                return Err(Error::Singular { condition });
            }
            if piv != col {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            let p = a.get(col, col).inv();
            for c in 0..n {
                a.set(col, c, a.get(col, c) * p);
                inv.set(col, c, inv.get(col, c) * p);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f.is_zero() {
                    continue;
                }
                for c in 0..n {
                    a.set(r, c, a.get(r, c) - f * a.get(col, c));
                    inv.set(r, c, inv.get(r, c) - f * inv.get(col, c));
                }
            }
        }
        let condition = self.norm_one() * inv.norm_one();
        if !(condition * T::epsilon() < T::one()) {
            return Err(Error::Singular { condition: condition.as_f64() });
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|c| (0..self.rows).fold(T::zero(), |s, r| s + self.get(r, c).norm()))
            .fold(T::zero(), T::max)
    }
}
