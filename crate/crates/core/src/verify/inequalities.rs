//! Checkers for the auxiliary inequalities behind decoupling: symmetrization,
//! the Paley-Zygmund type functional bound, the Bernoulli chaos lower bound,
//! and the classical scalar Hanson-Wright bound.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tail::{clopper_pearson, CONFIDENCE};
use crate::bounds::scalar_hw_reference;
use crate::ensembles::{sample_symmetric_bernoulli, Ensemble, SeedPolicy, Stream};
use crate::error::{Error, Result};
use crate::quadform::{quadratic_form, BlockMatrix, BlockVector};
use crate::spectral::{self, INEQUALITY_SLACK};
use crate::tensor::{structural_tol, DenseTensor, TensorShape, UnfoldedMatrix};
use crate::Tensor;

/// Exhaustive enumeration of a finite law or a seeded Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Enumeration {
    Exact,
    MonteCarlo { trials: usize },
}

/// One grid point of `Pr(||X||_(k) >= theta) <= 3 Pr(||X + Y||_(k) >= 2 theta / 3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationRow {
    pub theta: f64,
    pub lhs: f64,
    pub lhs_ci_low: f64,
    /// `Pr(||X + Y||_(k) >= 2 theta / 3)` before the factor 3.
    pub rhs: f64,
    pub rhs_ci_high: f64,
    /// `lhs_ci_low <= 3 rhs_ci_high`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationReport {
    pub k: usize,
    pub trials: usize,
    pub rows: Vec<SymmetrizationRow>,
    pub all_hold: bool,
}

fn symmetrization_rows(
    lhs_count: impl Fn(f64) -> (f64, f64),
    rhs_count: impl Fn(f64) -> (f64, f64),
    theta_grid: &[f64],
) -> Vec<SymmetrizationRow> {
    theta_grid
        .iter()
        .map(|&theta| {
            let (lhs, lhs_ci_low) = lhs_count(theta);
            let (rhs, rhs_ci_high) = rhs_count(2.0 * theta / 3.0);
            SymmetrizationRow { theta, lhs, lhs_ci_low, rhs, rhs_ci_high, holds: lhs_ci_low <= 3.0 * rhs_ci_high + INEQUALITY_SLACK }
        })
        .collect()
}

/// Monte Carlo symmetrization check for a mean-zero ensemble. `X` and `Y` come
/// from the first two copy streams of each trial.
pub fn check_symmetrization(
    ensemble: &Ensemble,
    k: usize,
    theta_grid: &[f64],
    trials: usize,
    seeds: &SeedPolicy,
) -> Result<SymmetrizationReport> {
    let spec = ensemble.spec();
    if !(spec.mean_zero || spec.eigen_mean().abs() <= 1e-12) {
        return Err(Error::InvalidParameter("symmetrization needs a mean-zero ensemble".into()));
    }
    let pairs: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let x = ensemble.sample(&mut seeds.rng(Stream::Copy(0), i));
            let y = ensemble.sample(&mut seeds.rng(Stream::Copy(1), i));
            Ok((spectral::ky_fan_norm(&x, k)?, spectral::ky_fan_norm(&x.add(&y)?, k)?))
        })
        .collect::<Result<_>>()?;
    let n = pairs.len();
    let tail = |pick: fn(&(f64, f64)) -> f64, level: f64| pairs.iter().filter(|p| pick(p) >= level).count();
    let rows = symmetrization_rows(
        |t| {
            let h = tail(|p| p.0, t);
            (h as f64 / n as f64, clopper_pearson(h, n, CONFIDENCE).0)
        },
        |t| {
            let h = tail(|p| p.1, t);
            (h as f64 / n as f64, clopper_pearson(h, n, CONFIDENCE).1)
        },
        theta_grid,
    );
    let all_hold = rows.iter().all(|r| r.holds);
    Ok(SymmetrizationReport { k, trials, rows, all_hold })
}

/// Exact symmetrization check for a finitely supported law `(tensor, probability)`.
pub fn check_symmetrization_exact(support: &[(Tensor, f64)], k: usize, theta_grid: &[f64]) -> Result<SymmetrizationReport> {
    let first = &support.first().ok_or_else(|| Error::InvalidParameter("empty support".into()))?.0;
    let mut mean = Tensor::zeros(first.shape().clone());
    for (t, p) in support {
        mean = mean.add(&t.scale_real(*p))?;
    }
    if mean.max_abs() > 1e-12 * (1.0 + first.max_abs()) {
        return Err(Error::InvalidParameter("symmetrization needs a mean-zero law".into()));
    }
    let single: Vec<(f64, f64)> =
        support.iter().map(|(t, p)| Ok((spectral::ky_fan_norm(t, k)?, *p))).collect::<Result<_>>()?;
    let mut sums = Vec::with_capacity(support.len() * support.len());
    for (x, px) in support {
        for (y, py) in support {
            sums.push((spectral::ky_fan_norm(&x.add(y)?, k)?, px * py));
        }
    }
    let prob = |law: &[(f64, f64)], level: f64| law.iter().filter(|(v, _)| *v >= level).map(|(_, p)| p).sum::<f64>();
    let rows = symmetrization_rows(
        |t| {
            let p = prob(&single, t);
            (p, p)
        },
        |t| {
            let p = prob(&sums, t);
            (p, p)
        },
        theta_grid,
    );
    let all_hold = rows.iter().all(|r| r.holds);
    Ok(SymmetrizationReport { k, trials: 0, rows, all_hold })
}

/// `Pr(x >= 0) >= (E|x|)^2 / (4 E x^2)` on empirical moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaleyZygmundReport {
    pub draws: usize,
    pub mean: f64,
    pub std_error: f64,
    pub pr_nonneg: f64,
    pub pr_ci_high: f64,
    pub mean_abs: f64,
    pub mean_sq: f64,
    pub rhs: f64,
    /// The interval for `Pr(x >= 0)` reaches the right-hand side.
    pub holds: bool,
}

/// Empirical check; rejects samples whose mean is more than three standard
/// errors from zero.
pub fn check_paley_zygmund(samples: &[f64]) -> Result<PaleyZygmundReport> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two draws".into()));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let std_error = (var / nf).sqrt();
    if (mean.abs() > 3.0 * std_error) && mean.abs() > f64::EPSILON {
        return Err(Error::InvalidParameter(format!("sample mean {mean:e} is not within 3 standard errors ({std_error:e}) of 0")));
    }
    let hits = samples.iter().filter(|&&x| x >= 0.0).count();
    let mean_abs = samples.iter().map(|x| x.abs()).sum::<f64>() / nf;
    let mean_sq = samples.iter().map(|x| x * x).sum::<f64>() / nf;
    let rhs = if mean_sq > 0.0 { 0.25 * mean_abs * mean_abs / mean_sq } else { 0.0 };
    let pr_nonneg = hits as f64 / nf;
    let pr_ci_high = clopper_pearson(hits, n, CONFIDENCE).1;
    Ok(PaleyZygmundReport {
        draws: n,
        mean,
        std_error,
        pr_nonneg,
        pr_ci_high,
        mean_abs,
        mean_sq,
        rhs,
        holds: pr_ci_high + INEQUALITY_SLACK >= rhs,
    })
}

/// Zero-mean scalar laws for the Paley-Zygmund check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroMeanFamily {
    Rademacher,
    CenteredExponential,
    Normal,
    CenteredUniform,
    /// `9` with probability 0.1, `-1` otherwise.
    SkewedTwoPoint,
}

impl ZeroMeanFamily {
    pub const ALL: [ZeroMeanFamily; 5] = [
        ZeroMeanFamily::Rademacher,
        ZeroMeanFamily::CenteredExponential,
        ZeroMeanFamily::Normal,
        ZeroMeanFamily::CenteredUniform,
        ZeroMeanFamily::SkewedTwoPoint,
    ];

    fn draw<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            ZeroMeanFamily::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            ZeroMeanFamily::CenteredExponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
            ZeroMeanFamily::Normal => StandardNormal.sample(rng),
            ZeroMeanFamily::CenteredUniform => rng.random_range(-1.0..1.0),
            ZeroMeanFamily::SkewedTwoPoint => {
                if rng.random::<f64>() < 0.1 {
                    9.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// `count` draws in fixed chunks of 1024, one substream per chunk.
    pub fn draws(self, count: usize, seeds: &SeedPolicy) -> Vec<f64> {
        const CHUNK: usize = 1024;
        let chunks = count.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = seeds.rng(Stream::Custom(self as u32), c as u64);
                let len = CHUNK.min(count - c * CHUNK);
                (0..len).map(move |_| self.draw(&mut rng)).collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Norming functional of `a` for the Ky Fan `k`-norm: `W = sum_{i <= k} u_i v_i^H`
/// from the top singular pairs, so `Re <W, a> = ||a||_(k)` and `sigma_1(W) = 1`.
pub fn norming_functional(a: &Tensor, k: usize) -> Result<Tensor> {
    spectral::ky_fan_norm(a, k)?;
    let svd = spectral::svd(a)?;
    let (rows, cols) = (svd.left.rows(), svd.right.rows());
    let mut w = UnfoldedMatrix::zeros(rows, cols);
    for i in 0..k {
        for r in 0..rows {
            for c in 0..cols {
                w.set(r, c, w.get(r, c) + svd.left.get(r, i) * svd.right.get(c, i).conj());
            }
        }
    }
    DenseTensor::fold(w, a.shape().clone())
}

/// `f(X) = Re <W, X> = Re tr(W^H X)`.
pub fn apply_functional(w: &Tensor, x: &Tensor) -> Result<f64> {
    Ok(w.inner_product(x)?.re)
}

/// One chaos coefficient `A_{i_1..i_j}` attached to distinct sign indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosTerm {
    pub indices: Vec<usize>,
    pub tensor: Tensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosRow {
    pub b_norm: f64,
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosReport {
    pub signs: usize,
    pub rows: Vec<ChaosRow>,
    /// Smallest probability over the supplied `B` instances.
    pub c_hat: f64,
}

/// Estimate `Pr(||B + sum A_I beta_I||_(k) >= ||B||_(k))` for each `B`.
pub fn check_bernoulli_chaos(
    terms: &[ChaosTerm],
    b_instances: &[Tensor],
    k: usize,
    mode: Enumeration,
    seeds: &SeedPolicy,
) -> Result<ChaosReport> {
    let first = b_instances.first().ok_or_else(|| Error::InvalidParameter("need at least one B".into()))?;
    for t in b_instances.iter().chain(terms.iter().map(|t| &t.tensor)) {
        if t.shape() != first.shape() {
            return Err(Error::ShapeMismatch { left: first.shape().to_string(), right: t.shape().to_string() });
        }
        if !t.is_hermitian(structural_tol()) {
            return Err(Error::NotHermitian { asymmetry: t.hermitian_residual()? });
        }
    }
    for t in terms {
        let mut idx = t.indices.clone();
        idx.sort_unstable();
        idx.dedup();
        if idx.len() != t.indices.len() || idx.is_empty() {
            return Err(Error::InvalidParameter(format!("chaos indices {:?} must be distinct and non-empty", t.indices)));
        }
    }
    let signs = terms.iter().flat_map(|t| t.indices.iter()).max().map_or(0, |m| m + 1);
    let chaos = |beta: &[f64]| -> Result<Tensor> {
        let mut acc = Tensor::zeros(first.shape().clone());
        for t in terms {
            let s: f64 = t.indices.iter().map(|&i| beta[i]).product();
            acc = acc.add(&t.tensor.scale_real(s))?;
        }
        Ok(acc)
    };
    let patterns: Vec<Tensor> = match mode {
        Enumeration::Exact => {
            if signs > 20 {
                return Err(Error::InvalidParameter(format!("exact enumeration over {signs} signs is too large")));
            }
            (0..1u64 << signs)
                .map(|mask| {
                    let beta: Vec<f64> = (0..signs).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
                    chaos(&beta)
                })
                .collect::<Result<_>>()?
        }
        Enumeration::MonteCarlo { trials } => (0..trials as u64)
            .into_par_iter()
            .map(|i| chaos(&sample_symmetric_bernoulli(signs, &mut seeds.rng(Stream::Custom(u32::MAX), i))))
            .collect::<Result<_>>()?,
    };
    let total = patterns.len();
    let mut rows = Vec::with_capacity(b_instances.len());
    for b in b_instances {
        let b_norm = spectral::ky_fan_norm(b, k)?;
        let tol = 1e-12 * (1.0 + b_norm);
        let hits = patterns
            .iter()
            .map(|x| Ok(spectral::ky_fan_norm(&b.add(x)?, k)? >= b_norm - tol))
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .filter(|&h| h)
            .count();
        let probability = hits as f64 / total as f64;
        let (ci_low, ci_high) = match mode {
            Enumeration::Exact => (probability, probability),
            Enumeration::MonteCarlo { .. } => clopper_pearson(hits, total, CONFIDENCE),
        };
        rows.push(ChaosRow { b_norm, probability, ci_low, ci_high });
    }
    let c_hat = rows.iter().map(|r| r.probability).fold(f64::INFINITY, f64::min);
    Ok(ChaosReport { signs, rows, c_hat })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarHwRow {
    pub theta: f64,
    pub probability: f64,
    /// Reference bound with `C = 1`.
    pub reference_c1: f64,
    /// Reference bound with the tuned constant.
    pub reference: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarHwReport {
    pub beta: f64,
    /// Smallest `C >= 1` for which every grid tail is under the reference.
    pub c_hat: f64,
    pub rows: Vec<ScalarHwRow>,
    pub all_hold: bool,
}

/// Tail of `|sum_ij a_ij (Y_i Y_j - E Y_i Y_j)|` for independent signs `Y_i`,
/// computed through the order-2 embedding (every dimension 1), against the
/// scalar reference bound.
pub fn check_scalar_hanson_wright(
    a: &[Vec<f64>],
    beta: f64,
    theta_grid: &[f64],
    mode: Enumeration,
    seeds: &SeedPolicy,
) -> Result<ScalarHwReport> {
    let n = a.len();
    if n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(Error::NotSquare(format!("{n} rows")));
    }
    let scalar_shape = TensorShape::square(&[1])?;
    let scalar = |v: f64| DenseTensor::new(scalar_shape.clone(), vec![Complex64::new(v, 0.0)]);
    let blocks = a.iter().flatten().map(|&v| scalar(v)).collect::<Result<Vec<_>>>()?;
    let block_matrix = BlockMatrix::new(n, blocks)?;
    let trace: f64 = (0..n).map(|i| a[i][i]).sum();
    let statistic = |signs: &[f64]| -> Result<f64> {
        let x = BlockVector::new(signs.iter().map(|&s| scalar(s)).collect::<Result<_>>()?)?;
        Ok((quadratic_form(&x, &block_matrix)?.total.entries()[0].re - trace).abs())
    };
    let values: Vec<f64> = match mode {
        Enumeration::Exact => (0..1u64 << n)
            .map(|mask| statistic(&(0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect::<Vec<_>>()))
            .collect::<Result<_>>()?,
        Enumeration::MonteCarlo { trials } => (0..trials as u64)
            .into_par_iter()
            .map(|i| statistic(&sample_symmetric_bernoulli(n, &mut seeds.rng(Stream::Evaluation, i))))
            .collect::<Result<_>>()?,
    };
    let probs: Vec<f64> = theta_grid
        .iter()
        .map(|&t| values.iter().filter(|&&v| v >= t).count() as f64 / values.len() as f64)
        .collect();

    let hs = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let op = spectral::spectral_norm(&DenseTensor::from_real(
        TensorShape::square(&[n])?,
        &a.iter().flatten().copied().collect::<Vec<_>>(),
    )?)?;
    let mut c_hat = 1.0_f64;
    for (&theta, &p) in theta_grid.iter().zip(&probs) {
        if p > 0.0 && hs > 0.0 {
            let exponent = (theta * theta / (beta.powi(4) * hs)).min(theta / (beta * beta * op));
            c_hat = c_hat.max(exponent / (2.0 / p).ln());
        }
    }
    let rows = theta_grid
        .iter()
        .zip(&probs)
        .map(|(&theta, &probability)| {
            let reference = scalar_hw_reference(a, beta, theta, c_hat)?;
            Ok(ScalarHwRow {
                theta,
                probability,
                reference_c1: scalar_hw_reference(a, beta, theta, 1.0)?,
                reference,
                holds: probability <= reference * (1.0 + 1e-12),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_hold = rows.iter().all(|r| r.holds);
    Ok(ScalarHwReport { beta, c_hat, rows, all_hold })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Tensor {
        DenseTensor::from_real(TensorShape::square(&[1]).unwrap(), &[v]).unwrap()
    }

    #[test]
    fn symmetrization_sign_case() {
        let support = vec![(scalar(1.0), 0.5), (scalar(-1.0), 0.5)];
        let r = check_symmetrization_exact(&support, 1, &[0.5]).unwrap();
        assert_eq!(r.rows[0].lhs, 1.0);
        assert_eq!(r.rows[0].rhs, 0.5);
        assert!(r.all_hold);
        assert!(check_symmetrization_exact(&[(scalar(1.0), 1.0)], 1, &[0.5]).is_err());
    }

    #[test]
    fn paley_zygmund_exact_sign_moments() {
        let r = check_paley_zygmund(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!((r.pr_nonneg, r.rhs), (0.5, 0.25));
        assert!(r.holds);
        assert!(check_paley_zygmund(&[1.0, 1.01, 0.99, 1.0]).is_err());
    }

    #[test]
    fn norming_functional_attains_norm() {
        let a = DenseTensor::from_diagonal(&[3], &[3.0, -2.0, 1.0]).unwrap();
        for k in 1..=3 {
            let w = norming_functional(&a, k).unwrap();
            let norm = spectral::ky_fan_norm(&a, k).unwrap();
            assert!((apply_functional(&w, &a).unwrap() - norm).abs() < 1e-12);
            assert!((spectral::spectral_norm(&w).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chaos_enumeration() {
        let seeds = SeedPolicy::new(0);
        let zero = check_bernoulli_chaos(&[], &[scalar(2.0)], 1, Enumeration::Exact, &seeds).unwrap();
        assert_eq!(zero.c_hat, 1.0);
        let terms = vec![ChaosTerm { indices: vec![0], tensor: scalar(1.0) }, ChaosTerm { indices: vec![1], tensor: scalar(1.0) }];
        let r = check_bernoulli_chaos(&terms, &[scalar(2.0), scalar(0.0)], 1, Enumeration::Exact, &seeds).unwrap();
        assert_eq!(r.rows[0].probability, 0.75);
        assert_eq!(r.rows[1].probability, 1.0);
        assert_eq!(r.c_hat, 0.75);
        let bad = vec![ChaosTerm { indices: vec![0, 0], tensor: scalar(1.0) }];
        assert!(check_bernoulli_chaos(&bad, &[scalar(0.0)], 1, Enumeration::Exact, &seeds).is_err());
    }

    #[test]
    fn skewed_two_point_is_tight() {
        let seeds = SeedPolicy::new(5);
        let d = ZeroMeanFamily::SkewedTwoPoint.draws(3000, &seeds);
        assert_eq!(d.len(), 3000);
        assert_eq!(d, ZeroMeanFamily::SkewedTwoPoint.draws(3000, &seeds));
    }
}
