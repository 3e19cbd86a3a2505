use std::ops::{Add, Sub};

use num_traits::Zero;

use super::{TensorShape, UnfoldedMatrix};
use crate::error::{Error, Result};
use crate::scalar::{is_finite_cx, Cx, Real};

/// Structural tolerance for Hermitian/unitary predicates, relative to
/// `1 + max|entry|`.
pub fn structural_tol<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e3))
}

/// Complex tensor with a row index group and a column index group.
///
/// Entries are stored flat in the unfolding order: the flat position of
/// `(i_1..i_M; j_1..j_N)` is `row_offset(i) * col_size + col_offset(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T: Real> {
    shape: TensorShape,
    entries: Vec<Cx<T>>,
}

impl<T: Real> DenseTensor<T> {
    /// Checked constructor: length must match the shape and every entry must be finite.
    pub fn new(shape: TensorShape, entries: Vec<Cx<T>>) -> Result<Self> {
        if entries.len() != shape.len() {
            return Err(Error::LengthMismatch(entries.len(), shape.len()));
        }
        if let Some(pos) = entries.iter().position(|z| !is_finite_cx(*z)) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { shape, entries })
    }

    pub fn from_real(shape: TensorShape, values: &[T]) -> Result<Self> {
        Self::new(shape, values.iter().map(|&v| Cx::new(v, T::zero())).collect())
    }

    pub fn zeros(shape: TensorShape) -> Self {
        let n = shape.len();
        Self { shape, entries: vec![Cx::zero(); n] }
    }

    /// Identity tensor over `dims x dims`: entry is the product of Kronecker deltas.
    pub fn identity(dims: &[usize]) -> Result<Self> {
        let shape = TensorShape::square(dims)?;
        let n = shape.row_size();
        Ok(Self { shape, entries: UnfoldedMatrix::identity(n).into_entries() })
    }

    /// Square tensor with the given diagonal in unfolded coordinates.
    pub fn from_diagonal(dims: &[usize], diag: &[T]) -> Result<Self> {
        let shape = TensorShape::square(dims)?;
        if diag.len() != shape.row_size() {
            return Err(Error::LengthMismatch(diag.len(), shape.row_size()));
        }
        let d: Vec<_> = diag.iter().map(|&v| Cx::new(v, T::zero())).collect();
        Self::new(shape, UnfoldedMatrix::from_diagonal(&d).into_entries())
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn entries(&self) -> &[Cx<T>] {
        &self.entries
    }

    pub fn get(&self, row: &[usize], col: &[usize]) -> Option<Cx<T>> {
        let r = self.shape.row_offset(row)?;
        let c = self.shape.col_offset(col)?;
        Some(self.entries[r * self.shape.col_size() + c])
    }

    pub fn is_square(&self) -> bool {
        self.shape.is_square()
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch { left: self.shape.to_string(), right: other.shape.to_string() });
        }
        Ok(())
    }

    fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare(self.shape.to_string()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(Self { shape: self.shape.clone(), entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(Self { shape: self.shape.clone(), entries })
    }

    pub fn scale(&self, c: Cx<T>) -> Self {
        Self { shape: self.shape.clone(), entries: self.entries.iter().map(|z| z * c).collect() }
    }

    pub fn scale_real(&self, c: T) -> Self {
        self.scale(Cx::new(c, T::zero()))
    }

    /// Einstein product: contracts the column group of `self` against the row
    /// group of `other`. Result shape is `(self.row_dims, other.col_dims)`.
    pub fn einstein_product(&self, other: &Self) -> Result<Self> {
        if self.shape.col_dims() != other.shape.row_dims() {
            return Err(Error::ContractionMismatch {
                left: format!("{:?}", self.shape.col_dims()),
                right: format!("{:?}", other.shape.row_dims()),
            });
        }
        let shape = TensorShape::new(self.shape.row_dims().to_vec(), other.shape.col_dims().to_vec())?;
        let prod = self.unfold().matmul(&other.unfold())?;
        Ok(Self { shape, entries: prod.into_entries() })
    }

    /// Swap index groups and conjugate every entry.
    pub fn conjugate_transpose(&self) -> Self {
        let adj = self.unfold().adjoint();
        Self { shape: self.shape.transposed(), entries: adj.into_entries() }
    }

    /// Entrywise complex conjugate (no index swap).
    pub fn conj(&self) -> Self {
        Self { shape: self.shape.clone(), entries: self.entries.iter().map(|z| z.conj()).collect() }
    }

    pub fn trace(&self) -> Result<Cx<T>> {
        self.require_square()?;
        Ok(self.unfold().trace())
    }

    /// `<A, B> = Tr(A^H * B)`, computed entrywise.
    pub fn inner_product(&self, other: &Self) -> Result<Cx<T>> {
        self.same_shape(other)?;
        Ok(self.entries.iter().zip(&other.entries).fold(Cx::zero(), |acc, (a, b)| acc + a.conj() * b))
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.same_shape(other)?;
        Ok(self.entries.iter().zip(&other.entries).fold(T::zero(), |m, (a, b)| m.max((a - b).norm())))
    }

    pub fn unfold(&self) -> UnfoldedMatrix<T> {
        UnfoldedMatrix::new(self.shape.row_size(), self.shape.col_size(), self.entries.clone())
            .expect("shape length invariant")
    }

    pub fn fold(matrix: UnfoldedMatrix<T>, shape: TensorShape) -> Result<Self> {
        if matrix.rows() != shape.row_size() || matrix.cols() != shape.col_size() {
            return Err(Error::FoldMismatch { rows: matrix.rows(), cols: matrix.cols(), shape: shape.to_string() });
        }
        Self::new(shape, matrix.into_entries())
    }

    /// Largest entrywise deviation from Hermitian symmetry, `max|A - A^H|`.
    pub fn hermitian_residual(&self) -> Result<T> {
        self.require_square()?;
        let n = self.shape.row_size();
        let mut worst = T::zero();
        for r in 0..n {
            for c in r..n {
                let d = self.entries[r * n + c] - self.entries[c * n + r].conj();
                worst = worst.max(d.norm());
            }
        }
        Ok(worst)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        match self.hermitian_residual() {
            Ok(res) => res <= tol * (T::one() + self.max_abs()),
            Err(_) => false,
        }
    }

    /// `max|U^H U - I|` and `max|U U^H - I|` both within `tol`.
    pub fn is_unitary(&self, tol: T) -> bool {
        if !self.is_square() {
            return false;
        }
        let u = self.unfold();
        let uh = u.adjoint();
        let id = UnfoldedMatrix::identity(u.rows());
        let left = uh.matmul(&u).ok().and_then(|p| p.max_abs_diff(&id));
        let right = u.matmul(&uh).ok().and_then(|p| p.max_abs_diff(&id));
        matches!((left, right), (Some(a), Some(b)) if a <= tol && b <= tol)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.require_square()?;
        let inv = self.unfold().inverse()?;
        Self::fold(inv, self.shape.clone())
    }

    /// `A^j` under the Einstein product; `j = 0` gives the identity.
    pub fn power(&self, j: u32) -> Result<Self> {
        self.require_square()?;
        if j == 0 {
            return Self::identity(self.shape.row_dims());
        }
        let mut base = self.unfold();
        let mut acc: Option<UnfoldedMatrix<T>> = None;
        let mut e = j;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.matmul(&base)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.matmul(&base)?;
        }
        Self::fold(acc.expect("j >= 1"), self.shape.clone())
    }

    /// `(A + A^H) / 2`.
    pub fn hermitian_part(&self) -> Result<Self> {
        self.require_square()?;
        let half = T::lit(0.5);
        Ok(self.add(&self.conjugate_transpose())?.scale_real(half))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| z.is_zero())
    }

    pub fn identity_like(&self) -> Result<Self> {
        self.require_square()?;
        Self::identity(self.shape.row_dims())
    }
}

impl<T: Real> Add for &DenseTensor<T> {
    type Output = DenseTensor<T>;

    /// Panics on shape mismatch; use [`DenseTensor::add`] for the checked form.
    fn add(self, rhs: Self) -> DenseTensor<T> {
        DenseTensor::add(self, rhs).expect("tensor shapes must match")
    }
}

impl<T: Real> Sub for &DenseTensor<T> {
    type Output = DenseTensor<T>;

    fn sub(self, rhs: Self) -> DenseTensor<T> {
        DenseTensor::sub(self, rhs).expect("tensor shapes must match")
    }
}

/// Sum of equally shaped tensors; `None` for an empty iterator.
pub fn sum_tensors<'a, T: Real, I>(items: I) -> Result<Option<DenseTensor<T>>>
where
    I: IntoIterator<Item = &'a DenseTensor<T>>,
{
    let mut acc: Option<DenseTensor<T>> = None;
    for t in items {
        acc = Some(match acc {
            None => t.clone(),
            Some(a) => a.add(t)?,
        });
    }
    Ok(acc)
}
