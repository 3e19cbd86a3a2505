//! Singular values, Ky Fan norms, Hermitian eigendecomposition and spectral
//! functions of tensors, all computed on the unfolded matrix.

mod jacobi;

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};
use crate::tensor::{structural_tol, DenseTensor, TensorShape, UnfoldedMatrix};

/// Slack used by the inequality checkers.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Thin SVD of the unfolded tensor.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<T: Real> {
    /// Singular values, descending, length `min(row_size, col_size)`.
    pub sigma: Vec<T>,
    pub left: UnfoldedMatrix<T>,
    pub right: UnfoldedMatrix<T>,
}

impl<T: Real> SpectralDecomposition<T> {
    /// `left * diag(sigma) * right^H`.
    pub fn reconstruct(&self) -> UnfoldedMatrix<T> {
        let d: Vec<_> = self.sigma.iter().map(|&s| Cx::new(s, T::zero())).collect();
        self.left
            .matmul(&UnfoldedMatrix::from_diagonal(&d))
            .and_then(|m| m.matmul(&self.right.adjoint()))
            .expect("factor shapes agree")
    }
}

/// `H = sum_i lambda_i U_i * U_i^H` with orthonormal eigentensors.
#[derive(Debug, Clone)]
pub struct EigDecomposition<T: Real> {
    /// Real eigenvalues, descending.
    pub lambdas: Vec<T>,
    /// Column tensors of shape `(dims) x ()`, matching `lambdas`.
    pub eigentensors: Vec<DenseTensor<T>>,
    /// Eigenvectors as columns of the unfolded unitary factor.
    pub basis: UnfoldedMatrix<T>,
    shape: TensorShape,
}

impl<T: Real> EigDecomposition<T> {
    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    /// `sum_i g(lambda_i) U_i U_i^H`.
    pub fn rebuild_with(&self, values: &[T]) -> DenseTensor<T> {
        let n = self.basis.rows();
        let mut out = UnfoldedMatrix::zeros(n, n);
        for (k, &val) in values.iter().enumerate() {
            for r in 0..n {
                let u = self.basis.get(r, k) * Cx::new(val, T::zero());
                for c in 0..n {
                    out.set(r, c, out.get(r, c) + u * self.basis.get(c, k).conj());
                }
            }
        }
        DenseTensor::fold(out, self.shape.clone()).expect("square fold")
    }

    pub fn reconstruct(&self) -> DenseTensor<T> {
        self.rebuild_with(&self.lambdas)
    }
}

fn check_finite<T: Real>(a: &DenseTensor<T>) -> Result<()> {
    match a.entries().iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        Some(p) => Err(Error::NonFinite(p)),
        None => Ok(()),
    }
}

pub fn svd<T: Real>(a: &DenseTensor<T>) -> Result<SpectralDecomposition<T>> {
    check_finite(a)?;
    let (sigma, left, right) = jacobi::svd(&a.unfold());
    Ok(SpectralDecomposition { sigma, left, right })
}

pub fn singular_values<T: Real>(a: &DenseTensor<T>) -> Result<Vec<T>> {
    Ok(svd(a)?.sigma)
}

/// Sum of the `k` largest singular values.
pub fn ky_fan_norm<T: Real>(a: &DenseTensor<T>, k: usize) -> Result<T> {
    let max = a.shape().row_size().min(a.shape().col_size());
    if k == 0 || k > max {
        return Err(Error::KOutOfRange { k, max });
    }
    let sigma = singular_values(a)?;
    Ok(sigma[..k].iter().fold(T::zero(), |s, &x| s + x))
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(a: &DenseTensor<T>) -> Result<T> {
    ky_fan_norm(a, 1)
}

/// `b` is weakly majorized by `a`: prefix sums of descending-sorted `b` never
/// exceed those of `a` by more than `slack`.
pub fn weakly_majorizes_with<T: Real>(a: &[T], b: &[T], slack: T) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let desc = |v: &[T]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
        v
    };
    let (a, b) = (desc(a), desc(b));
    let (mut sa, mut sb) = (T::zero(), T::zero());
    for (x, y) in a.iter().zip(&b) {
        sa = sa + *x;
        sb = sb + *y;
        if sb > sa + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn weakly_majorizes<T: Real>(a: &[T], b: &[T]) -> Result<bool> {
    weakly_majorizes_with(a, b, T::lit(1e-12))
}

fn require_hermitian<T: Real>(h: &DenseTensor<T>) -> Result<()> {
    if !h.is_square() {
        return Err(Error::NotSquare(h.shape().to_string()));
    }
    check_finite(h)?;
    if !h.is_hermitian(structural_tol()) {
        return Err(Error::NotHermitian { asymmetry: h.hermitian_residual()?.as_f64() });
    }
    Ok(())
}

/// Hermitian eigendecomposition, eigenvalues descending with stable ties.
pub fn herm_eig<T: Real>(h: &DenseTensor<T>) -> Result<EigDecomposition<T>> {
    require_hermitian(h)?;
    let (vals, vecs) = jacobi::hermitian_eig(&h.unfold());
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap_or(std::cmp::Ordering::Equal));
    let n = vals.len();
    let mut basis = UnfoldedMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        for r in 0..n {
            basis.set(r, k, vecs.get(r, src));
        }
    }
    let col_shape = TensorShape::new(h.shape().row_dims().to_vec(), vec![])?;
    let eigentensors = (0..n)
        .map(|k| DenseTensor::new(col_shape.clone(), basis.column(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EigDecomposition {
        lambdas: order.iter().map(|&i| vals[i]).collect(),
        eigentensors,
        basis,
        shape: h.shape().clone(),
    })
}

pub fn eigenvalues<T: Real>(h: &DenseTensor<T>) -> Result<Vec<T>> {
    Ok(herm_eig(h)?.lambdas)
}

pub fn max_eigenvalue<T: Real>(h: &DenseTensor<T>) -> Result<T> {
    Ok(eigenvalues(h)?[0])
}

pub fn min_eigenvalue<T: Real>(h: &DenseTensor<T>) -> Result<T> {
    Ok(*eigenvalues(h)?.last().expect("non-empty spectrum"))
}

/// `f(H) = U f(Lambda) U^H`. Fails with a domain error if `f` is not finite at
/// some eigenvalue.
pub fn spectral_function<T: Real, F>(h: &DenseTensor<T>, f: F) -> Result<DenseTensor<T>>
where
    F: Fn(T) -> T,
{
    let eig = herm_eig(h)?;
    let mapped = eig
        .lambdas
        .iter()
        .map(|&l| {
            let v = f(l);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Domain(l.as_f64()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(eig.rebuild_with(&mapped))
}

pub fn is_positive_definite<T: Real>(h: &DenseTensor<T>, tol: T) -> Result<bool> {
    Ok(min_eigenvalue(h)? > tol)
}

/// Loewner order `A >= B`: the smallest eigenvalue of `A - B` is at least `-tol`.
pub fn loewner_geq<T: Real>(a: &DenseTensor<T>, b: &DenseTensor<T>, tol: T) -> Result<bool> {
    require_hermitian(a)?;
    require_hermitian(b)?;
    Ok(min_eigenvalue(&a.sub(b)?)? >= -tol)
}

/// `||(A+B)^n||_(k)^(1/n) <= ||A^n||_(k)^(1/n) + ||B^n||_(k)^(1/n) + slack`
/// for positive definite `A`, `B`.
pub fn power_norm_subadditivity_check<T: Real>(
    a: &DenseTensor<T>,
    b: &DenseTensor<T>,
    n: u32,
    k: usize,
) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidParameter("power n must be >= 1".into()));
    }
    for t in [a, b] {
        let min = min_eigenvalue(t)?;
        if !(min > T::zero()) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min.as_f64() });
        }
    }
    let root = T::one() / T::lit(n as f64);
    let lhs = ky_fan_norm(&a.add(b)?.power(n)?, k)?.powf(root);
    let ra = ky_fan_norm(&a.power(n)?, k)?.powf(root);
    let rb = ky_fan_norm(&b.power(n)?, k)?.powf(root);
    Ok(lhs <= ra + rb + T::lit(INEQUALITY_SLACK))
}
