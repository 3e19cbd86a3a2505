//! Block vectors and block matrices of tensors, the quadratic form
//! `sum_{i,j} X_i * A_ij * X_j`, its diagonal/coupling split and the
//! polynomial image.

mod assumptions;

pub use assumptions::{check_assumptions, default_t_grid, AssumptionReport};

use serde::{Deserialize, Serialize};

use crate::ensembles::conjugate_diagonal;
use crate::error::{Error, Result};
use crate::tensor::{structural_tol, sum_tensors, TensorShape};
use crate::{Matrix, Tensor};

/// `n` square tensors over one base shape.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    blocks: Vec<Tensor>,
}

impl BlockVector {
    pub fn new(blocks: Vec<Tensor>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::InvalidShape("block vector needs n >= 1".into()))?;
        if !first.is_square() {
            return Err(Error::NotSquare(first.shape().to_string()));
        }
        if let Some(bad) = blocks.iter().find(|b| b.shape() != first.shape()) {
            return Err(Error::ShapeMismatch { left: first.shape().to_string(), right: bad.shape().to_string() });
        }
        Ok(Self { blocks })
    }

    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Tensor] {
        &self.blocks
    }

    pub fn get(&self, i: usize) -> &Tensor {
        &self.blocks[i]
    }

    pub fn base_shape(&self) -> &TensorShape {
        self.blocks[0].shape()
    }
}

/// `n x n` grid of Hermitian tensors over one base shape, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    n: usize,
    blocks: Vec<Tensor>,
}

impl BlockMatrix {
    pub fn new(n: usize, blocks: Vec<Tensor>) -> Result<Self> {
        if n == 0 || blocks.len() != n * n {
            return Err(Error::InvalidShape(format!("block matrix needs n*n = {} blocks, got {}", n * n, blocks.len())));
        }
        let shape = blocks[0].shape();
        if !shape.is_square() {
            return Err(Error::NotSquare(shape.to_string()));
        }
        for b in &blocks {
            if b.shape() != shape {
                return Err(Error::ShapeMismatch { left: shape.to_string(), right: b.shape().to_string() });
            }
            if !b.is_hermitian(structural_tol()) {
                return Err(Error::NotHermitian { asymmetry: b.hermitian_residual()? });
            }
        }
        Ok(Self { n, blocks })
    }

    /// Blocks `A_il = U diag(weights[i][l]) U^H` sharing the unitary `basis`.
    pub fn from_shared_basis(basis: &Matrix, shape: &TensorShape, weights: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n = weights.len();
        let mut blocks = Vec::with_capacity(n * n);
        for row in weights {
            if row.len() != n {
                return Err(Error::InvalidShape(format!("weight grid row has {} entries, expected {n}", row.len())));
            }
            for w in row {
                if w.len() != shape.row_size() {
                    return Err(Error::LengthMismatch(w.len(), shape.row_size()));
                }
                blocks.push(conjugate_diagonal(basis, w, shape));
            }
        }
        Self::new(n, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Tensor {
        &self.blocks[i * self.n + j]
    }

    pub fn blocks(&self) -> &[Tensor] {
        &self.blocks
    }

    pub fn base_shape(&self) -> &TensorShape {
        self.blocks[0].shape()
    }
}

/// Exact split of the quadratic form into diagonal and coupling terms.
#[derive(Debug, Clone)]
pub struct QuadDecomposition {
    /// `D_i = X_i * A_ii * X_i`.
    pub diagonal_terms: Vec<Tensor>,
    /// `C = X_i * A_ij * X_j` for ordered pairs `i != j`, lexicographic.
    pub coupling_terms: Vec<Tensor>,
    pub coupling_pairs: Vec<(usize, usize)>,
    /// The direct double sum over all `(i, j)`.
    pub total: Tensor,
}

impl QuadDecomposition {
    pub fn diagonal_sum(&self) -> Tensor {
        sum_tensors(&self.diagonal_terms).ok().flatten().expect("n >= 1 diagonal terms of equal shape")
    }

    /// Sum of coupling terms, the zero tensor when `n = 1`.
    pub fn coupling_sum(&self) -> Tensor {
        sum_tensors(&self.coupling_terms)
            .ok()
            .flatten()
            .unwrap_or_else(|| Tensor::zeros(self.total.shape().clone()))
    }

    /// `max|total - sum D - sum C|`.
    pub fn residual(&self) -> f64 {
        let split = &self.diagonal_sum() + &self.coupling_sum();
        self.total.max_abs_diff(&split).expect("shapes agree")
    }

    /// Residual relative to `1 + max|entry|` of the terms involved.
    pub fn relative_residual(&self) -> f64 {
        let scale = self
            .diagonal_terms
            .iter()
            .chain(&self.coupling_terms)
            .map(Tensor::max_abs)
            .fold(self.total.max_abs(), f64::max);
        self.residual() / (1.0 + scale)
    }
}

pub fn quadratic_form(x: &BlockVector, a: &BlockMatrix) -> Result<QuadDecomposition> {
    let n = x.n();
    if a.n() != n {
        return Err(Error::LengthMismatch(a.n(), n));
    }
    if a.base_shape() != x.base_shape() {
        return Err(Error::ShapeMismatch { left: x.base_shape().to_string(), right: a.base_shape().to_string() });
    }
    let left: Vec<Vec<Tensor>> = (0..n)
        .map(|i| (0..n).map(|j| x.get(i).einstein_product(a.get(i, j))).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let term = |i: usize, j: usize| left[i][j].einstein_product(x.get(j));

    let mut total = Tensor::zeros(x.base_shape().clone());
    let mut diagonal_terms = Vec::with_capacity(n);
    let mut coupling_terms = Vec::with_capacity(n * n - n);
    let mut coupling_pairs = Vec::with_capacity(n * n - n);
    for i in 0..n {
        for j in 0..n {
            let t = term(i, j)?;
            total = total.add(&t)?;
            if i == j {
                diagonal_terms.push(t);
            } else {
                coupling_terms.push(t);
                coupling_pairs.push((i, j));
            }
        }
    }
    Ok(QuadDecomposition { diagonal_terms, coupling_terms, coupling_pairs, total })
}

/// `a_0 I + a_1 T + ... + a_m T^m` by Horner's rule.
pub fn poly_apply(coeffs: &[f64], t: &Tensor) -> Result<Tensor> {
    let id = t.identity_like()?;
    let Some((&lead, rest)) = coeffs.split_last() else {
        return Ok(Tensor::zeros(t.shape().clone()));
    };
    let mut acc = id.scale_real(lead);
    for &c in rest.iter().rev() {
        acc = acc.einstein_product(t)?.add(&id.scale_real(c))?;
    }
    Ok(acc)
}

/// Scalar polynomial `a_0 + a_1 x + ... + a_m x^m`.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaPolicy {
    #[default]
    Equal,
    Proportional,
}

/// Split `Theta - |a_0| k` over the active degrees `j = 1..m`.
///
/// Degrees with `a_j = 0` get `theta_j = 0` and drop out of the bound. The
/// last active share absorbs rounding so the shares sum to the budget exactly.
pub fn theta_split(theta_total: f64, coeffs: &[f64], k: usize, policy: ThetaPolicy) -> Result<Vec<f64>> {
    if coeffs.len() < 2 {
        return Err(Error::InvalidParameter("polynomial needs degree >= 1".into()));
    }
    let floor = coeffs[0].abs() * k as f64;
    if !(theta_total > floor) {
        return Err(Error::InfeasibleSplit { theta: theta_total, floor });
    }
    let budget = theta_total - floor;
    let higher = &coeffs[1..];
    let active: Vec<usize> = (0..higher.len()).filter(|&j| higher[j] != 0.0).collect();
    let Some(&last) = active.last() else {
        return Err(Error::InvalidParameter("all coefficients a_1..a_m are zero".into()));
    };
    let weight = |j: usize| match policy {
        ThetaPolicy::Equal => 1.0,
        ThetaPolicy::Proportional => higher[j].abs(),
    };
    let total_weight: f64 = active.iter().map(|&j| weight(j)).sum();
    let mut out = vec![0.0; higher.len()];
    let mut assigned = 0.0;
    for &j in &active[..active.len() - 1] {
        out[j] = budget * weight(j) / total_weight;
        assigned += out[j];
    }
    out[last] = budget - assigned;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::DenseTensor;

    fn diag(v: &[f64]) -> Tensor {
        DenseTensor::from_diagonal(&[v.len()], v).unwrap()
    }

    #[test]
    fn single_block_has_no_coupling() {
        let x = BlockVector::new(vec![diag(&[2.0, 3.0])]).unwrap();
        let a = BlockMatrix::new(1, vec![diag(&[1.0, 1.0])]).unwrap();
        let q = quadratic_form(&x, &a).unwrap();
        assert!(q.coupling_terms.is_empty());
        assert_eq!(q.total, diag(&[4.0, 9.0]));
        assert_eq!(q.residual(), 0.0);
    }

    #[test]
    fn coupling_pairs_are_lexicographic() {
        let x = BlockVector::new(vec![diag(&[1.0, 1.0]); 3]).unwrap();
        let a = BlockMatrix::new(3, vec![diag(&[1.0, 0.0]); 9]).unwrap();
        let q = quadratic_form(&x, &a).unwrap();
        assert_eq!(q.coupling_pairs, vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
    }

    #[test]
    fn zero_off_diagonal_blocks() {
        let zero = diag(&[0.0, 0.0]);
        let one = diag(&[1.0, 2.0]);
        let a = BlockMatrix::new(2, vec![one.clone(), zero.clone(), zero.clone(), one]).unwrap();
        let x = BlockVector::new(vec![diag(&[1.0, 2.0]), diag(&[3.0, 1.0])]).unwrap();
        let q = quadratic_form(&x, &a).unwrap();
        assert!(q.coupling_terms.iter().all(Tensor::is_zero));
    }

    #[test]
    fn rejects_mismatched_sizes() {
        let x = BlockVector::new(vec![diag(&[1.0, 1.0]); 2]).unwrap();
        let a = BlockMatrix::new(1, vec![diag(&[1.0, 1.0])]).unwrap();
        assert!(quadratic_form(&x, &a).is_err());
        assert!(BlockVector::new(vec![]).is_err());
        assert!(BlockVector::new(vec![diag(&[1.0]), diag(&[1.0, 1.0])]).is_err());
    }

    #[test]
    fn polynomial_image() {
        let t = diag(&[2.0, 3.0]);
        assert_eq!(poly_apply(&[1.0], &t).unwrap(), diag(&[1.0, 1.0]));
        assert_eq!(poly_apply(&[0.0, 0.0, 1.0], &t).unwrap(), diag(&[4.0, 9.0]));
        assert_eq!(poly_eval(&[1.0, 2.0, 1.0], 3.0), 16.0);
    }

    #[test]
    fn split_policies() {
        assert_eq!(theta_split(5.0, &[1.0, 2.0], 1, ThetaPolicy::Equal).unwrap(), vec![4.0]);
        assert_eq!(theta_split(6.0, &[1.0, 1.0, 1.0], 2, ThetaPolicy::Equal).unwrap(), vec![2.0, 2.0]);
        assert_eq!(theta_split(4.0, &[0.0, 1.0, 3.0], 1, ThetaPolicy::Proportional).unwrap(), vec![1.0, 3.0]);
        assert_eq!(theta_split(4.0, &[0.0, 0.0, 3.0], 1, ThetaPolicy::Equal).unwrap(), vec![0.0, 4.0]);
        assert_eq!(
            theta_split(2.0, &[1.0, 1.0], 2, ThetaPolicy::Equal),
            Err(Error::InfeasibleSplit { theta: 2.0, floor: 2.0 })
        );
    }
}
