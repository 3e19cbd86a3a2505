use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::seeds::{SeedPolicy, Stream, StreamRng};
use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, TensorShape, UnfoldedMatrix};
use crate::{Matrix, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `U diag(lambda) U^H` with one shared unitary `U` for every draw.
    Commuting,
    /// `V diag(lambda) V^H` with a fresh Haar unitary `V` per draw.
    GenericHermitian,
    /// `lambda * I`.
    Scalar,
}

/// Distribution of each eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EigenLaw {
    /// Uniform on `[eig_low, eig_high]`.
    #[default]
    Uniform,
    /// `eig_low` or `eig_high` with probability 1/2 each.
    TwoPoint,
}

/// Random Hermitian tensors over a square base shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    /// Base dimensions `I_1..I_M`; each tensor has shape `dims x dims`.
    pub dims: Vec<usize>,
    /// Number of independent tensors in one sequence.
    pub n: usize,
    pub family: Family,
    pub eig_low: f64,
    pub eig_high: f64,
    #[serde(default)]
    pub law: EigenLaw,
    #[serde(default)]
    pub shared_unitary_seed: u64,
    /// Subtract the analytic mean `E[lambda] * I` from every draw.
    #[serde(default)]
    pub mean_zero: bool,
}

impl EnsembleSpec {
    pub fn shape(&self) -> Result<TensorShape> {
        TensorShape::square(&self.dims)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape()?;
        if self.n == 0 {
            return Err(Error::InvalidParameter("ensemble needs n >= 1".into()));
        }
        if !(self.eig_low.is_finite() && self.eig_high.is_finite() && self.eig_low <= self.eig_high) {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue bounds [{}, {}] invalid",
                self.eig_low, self.eig_high
            )));
        }
        Ok(())
    }

    /// Eigenvalues drawn strictly positive and the draws are not recentred.
    pub fn is_positive_definite(&self) -> bool {
        self.eig_low > 0.0 && !self.mean_zero
    }

    /// `E[lambda^q]` under the eigenvalue law.
    pub fn eigen_raw_moment(&self, q: i32) -> f64 {
        let (a, b) = (self.eig_low, self.eig_high);
        match self.law {
            EigenLaw::TwoPoint => 0.5 * (a.powi(q) + b.powi(q)),
            EigenLaw::Uniform if (b - a).abs() < f64::EPSILON * (1.0 + a.abs()) => a.powi(q),
            EigenLaw::Uniform => (b.powi(q + 1) - a.powi(q + 1)) / (f64::from(q + 1) * (b - a)),
        }
    }

    pub fn eigen_mean(&self) -> f64 {
        self.eigen_raw_moment(1)
    }

    fn draw_eigenvalue(&self, rng: &mut StreamRng) -> f64 {
        let (a, b) = (self.eig_low, self.eig_high);
        match self.law {
            EigenLaw::Uniform => a + (b - a) * rng.random::<f64>(),
            EigenLaw::TwoPoint => {
                if rng.random::<bool>() {
                    b
                } else {
                    a
                }
            }
        }
    }
}

/// Haar-distributed unitary: Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut StreamRng) -> Matrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
        for _ in 0..2 {
            for q in &cols {
                let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= qi * proj;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut m = UnfoldedMatrix::zeros(n, n);
    for (c, col) in cols.iter().enumerate() {
        for (r, &z) in col.iter().enumerate() {
            m.set(r, c, z);
        }
    }
    m
}

/// Standard complex normal: independent `N(0, 1/2)` real and imaginary parts.
fn complex_normal(rng: &mut StreamRng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `basis * diag(values) * basis^H` folded into `shape`.
pub fn conjugate_diagonal(basis: &Matrix, values: &[f64], shape: &TensorShape) -> Tensor {
    let n = basis.rows();
    let mut out = UnfoldedMatrix::zeros(n, n);
    for (k, &val) in values.iter().enumerate() {
        for r in 0..n {
            let u = basis.get(r, k) * val;
            for c in 0..n {
                out.set(r, c, out.get(r, c) + u * basis.get(c, k).conj());
            }
        }
    }
    // Exact Hermitian symmetry regardless of rounding order.
    for r in 0..n {
        out.set(r, r, Complex64::new(out.get(r, r).re, 0.0));
        for c in r + 1..n {
            out.set(c, r, out.get(r, c).conj());
        }
    }
    DenseTensor::fold(out, shape.clone()).expect("square basis")
}

/// GUE-style Hermitian tensor `(G + G^H) / 2` with complex Gaussian `G` on the
/// unfolded matrix. Mean zero.
pub fn sample_hermitian(shape: &TensorShape, rng: &mut StreamRng) -> Result<Tensor> {
    if !shape.is_square() {
        return Err(Error::NotSquare(shape.to_string()));
    }
    let entries = (0..shape.len()).map(|_| complex_normal(rng)).collect();
    DenseTensor::new(shape.clone(), entries)?.hermitian_part()
}

/// A validated ensemble with its shared unitary precomputed.
#[derive(Debug, Clone)]
pub struct Ensemble {
    spec: EnsembleSpec,
    shape: TensorShape,
    shared: Matrix,
}

impl Ensemble {
    pub fn new(spec: EnsembleSpec) -> Result<Self> {
        spec.validate()?;
        let shape = spec.shape()?;
        let size = shape.row_size();
        let shared = match spec.family {
            Family::Commuting => {
                let mut rng = SeedPolicy::new(spec.shared_unitary_seed).rng(Stream::Structure, 0);
                random_unitary(size, &mut rng)
            }
            _ => UnfoldedMatrix::identity(size),
        };
        Ok(Self { spec, shape, shared })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    /// The common eigenbasis of a commuting family (identity otherwise).
    pub fn shared_basis(&self) -> &Matrix {
        &self.shared
    }

    pub fn draw_eigenvalues(&self, rng: &mut StreamRng) -> Vec<f64> {
        (0..self.shape.row_size()).map(|_| self.spec.draw_eigenvalue(rng)).collect()
    }

    /// One tensor of the ensemble.
    pub fn sample(&self, rng: &mut StreamRng) -> Tensor {
        let size = self.shape.row_size();
        let offset = if self.spec.mean_zero { self.spec.eigen_mean() } else { 0.0 };
        let values: Vec<f64> = match self.spec.family {
            Family::Scalar => vec![self.spec.draw_eigenvalue(rng) - offset; size],
            _ => self.draw_eigenvalues(rng).into_iter().map(|l| l - offset).collect(),
        };
        match self.spec.family {
            Family::Commuting | Family::Scalar => conjugate_diagonal(&self.shared, &values, &self.shape),
            Family::GenericHermitian => {
                let v = random_unitary(size, rng);
                conjugate_diagonal(&v, &values, &self.shape)
            }
        }
    }

    /// A full sequence `X_1..X_n`.
    pub fn sample_sequence(&self, rng: &mut StreamRng) -> Vec<Tensor> {
        (0..self.spec.n).map(|_| self.sample(rng)).collect()
    }

    /// Positive definite draw with eigenvalues in `[eig_low, eig_high]`.
    pub fn sample_pd_bounded(&self, rng: &mut StreamRng) -> Result<Tensor> {
        if !self.spec.is_positive_definite() {
            return Err(Error::InvalidParameter(format!(
                "positive definite sampling needs 0 < eig_low and no recentring (eig_low = {})",
                self.spec.eig_low
            )));
        }
        Ok(self.sample(rng))
    }

    /// Family whose members commute pairwise under the Einstein product.
    pub fn sample_commuting_family(&self, rng: &mut StreamRng) -> Result<Vec<Tensor>> {
        if self.spec.family == Family::GenericHermitian {
            return Err(Error::InvalidParameter("commuting family requested from a generic ensemble".into()));
        }
        Ok(self.sample_sequence(rng))
    }

    /// `count` independent copies of the sequence for trial `trial`; copy `j`
    /// is driven by its own substream.
    pub fn independent_copies(&self, count: usize, seeds: &SeedPolicy, trial: u64) -> Result<Vec<Vec<Tensor>>> {
        if count == 0 {
            return Err(Error::InvalidParameter("need at least one copy".into()));
        }
        Ok((0..count)
            .map(|j| {
                let mut rng = seeds.rng(Stream::Copy(j as u32), trial);
                self.sample_sequence(&mut rng)
            })
            .collect())
    }
}

/// Convenience wrapper around [`Ensemble::sample_pd_bounded`].
pub fn sample_pd_bounded(spec: &EnsembleSpec, rng: &mut StreamRng) -> Result<Tensor> {
    Ensemble::new(spec.clone())?.sample_pd_bounded(rng)
}

/// Convenience wrapper around [`Ensemble::sample_commuting_family`].
pub fn sample_commuting_family(spec: &EnsembleSpec, rng: &mut StreamRng) -> Result<Vec<Tensor>> {
    Ensemble::new(spec.clone())?.sample_commuting_family(rng)
}

/// Convenience wrapper around [`Ensemble::independent_copies`].
pub fn independent_copies(spec: &EnsembleSpec, count: usize, seeds: &SeedPolicy, trial: u64) -> Result<Vec<Vec<Tensor>>> {
    Ensemble::new(spec.clone())?.independent_copies(count, seeds, trial)
}

/// Independent symmetric Bernoulli signs as `+1.0` / `-1.0`.
pub fn sample_symmetric_bernoulli(count: usize, rng: &mut StreamRng) -> Vec<f64> {
    (0..count).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}
