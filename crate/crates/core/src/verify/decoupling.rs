//! Empirical decoupling constants for sums over distinct index tuples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tail::{clopper_pearson, TailEstimate, CONFIDENCE};
use crate::ensembles::{Ensemble, SeedPolicy};
use crate::error::{Error, Result};
use crate::quadform::BlockMatrix;
use crate::spectral;
use crate::tensor::TensorShape;
use crate::Tensor;

/// A family `f_{i_1..i_m}` of tensor-valued functions of `m` tensors.
pub trait Kernel: Sync {
    fn order(&self) -> usize;
    fn eval(&self, indices: &[usize], args: &[&Tensor]) -> Result<Tensor>;
}

/// `f_{i_1..i_m}(X_1, .., X_m) = X_1 * X_2 * .. * X_m` (Einstein products).
#[derive(Debug, Clone, Copy)]
pub struct ProductKernel {
    pub order: usize,
}

impl Kernel for ProductKernel {
    fn order(&self) -> usize {
        self.order
    }

    fn eval(&self, _indices: &[usize], args: &[&Tensor]) -> Result<Tensor> {
        let (first, rest) = args.split_first().ok_or_else(|| Error::InvalidParameter("kernel needs arguments".into()))?;
        rest.iter().try_fold((*first).clone(), |acc, x| acc.einstein_product(x))
    }
}

/// `f_{ij}(X, Y) = X * A_ij * Y`.
#[derive(Debug, Clone)]
pub struct CouplingKernel(pub BlockMatrix);

impl Kernel for CouplingKernel {
    fn order(&self) -> usize {
        2
    }

    fn eval(&self, indices: &[usize], args: &[&Tensor]) -> Result<Tensor> {
        args[0].einstein_product(self.0.get(indices[0], indices[1]))?.einstein_product(args[1])
    }
}

/// The zero kernel over a fixed shape.
#[derive(Debug, Clone)]
pub struct ZeroKernel {
    pub order: usize,
    pub shape: TensorShape,
}

impl Kernel for ZeroKernel {
    fn order(&self) -> usize {
        self.order
    }

    fn eval(&self, _indices: &[usize], _args: &[&Tensor]) -> Result<Tensor> {
        Ok(Tensor::zeros(self.shape.clone()))
    }
}

/// Ordered tuples of `m` distinct indices from `0..n`, lexicographic.
pub fn distinct_tuples(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                rec(n, m, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, m, &mut cur, &mut out);
    out
}

/// `||sum_I f_I(X^(c_1)_{i_1}, .., X^(c_m)_{i_m})||_(k)` where `copies[c]` is a
/// sequence and `pick(slot)` selects the copy feeding argument `slot`.
fn chaos_norm<K: Kernel + ?Sized>(
    kernel: &K,
    tuples: &[Vec<usize>],
    copies: &[Vec<Tensor>],
    decoupled: bool,
    k: usize,
) -> Result<f64> {
    let mut acc: Option<Tensor> = None;
    for idx in tuples {
        let args: Vec<&Tensor> =
            idx.iter().enumerate().map(|(slot, &i)| &copies[if decoupled { slot } else { 0 }][i]).collect();
        let term = kernel.eval(idx, &args)?;
        acc = Some(match acc {
            Some(a) => a.add(&term)?,
            None => term,
        });
    }
    match acc {
        Some(t) => spectral::ky_fan_norm(&t, k),
        None => Ok(0.0),
    }
}

/// Estimates of both sides of the decoupling inequality and the smallest
/// constant `D >= 1` with `lhs(theta) <= D Pr(D R > theta)` on the grid.
/// The constant is lower evidence from the sample, not a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub m_order: usize,
    pub k: usize,
    /// Number of trials, or the number of enumerated outcomes.
    pub trials: usize,
    pub exact: bool,
    pub theta_grid: Vec<f64>,
    /// `Pr(||coupled sum||_(k) > theta)`.
    pub lhs: Vec<TailEstimate>,
    /// `Pr(||decoupled sum||_(k) > theta)`.
    pub rhs: Vec<TailEstimate>,
    /// `None` when no finite constant works.
    pub d_hat: Option<f64>,
    /// Constant from the optimistic ends of both intervals.
    pub d_ci_low: Option<f64>,
    /// Constant from the pessimistic ends of both intervals.
    pub d_ci_high: Option<f64>,
    /// Every left-hand tail is 0 or 1.
    pub uninformative: bool,
    pub c_m: Option<f64>,
    pub e_m: Option<f64>,
}

/// Step law of `R`: distinct positive values in descending order with
/// `Pr(R >= v_q)` as counts.
struct StepLaw {
    levels: Vec<(f64, usize)>,
    total: usize,
}

impl StepLaw {
    fn new(values: &[f64]) -> Self {
        let mut sorted: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut levels: Vec<(f64, usize)> = Vec::new();
        for (idx, v) in sorted.iter().enumerate() {
            match levels.last_mut() {
                Some(last) if last.0 == *v => last.1 = idx + 1,
                _ => levels.push((*v, idx + 1)),
            }
        }
        Self { levels, total: values.len() }
    }

    fn count_above(&self, theta: f64) -> usize {
        self.levels.iter().take_while(|(v, _)| *v > theta).last().map_or(0, |l| l.1)
    }

    /// Smallest `D >= 1` with `D * P(R > theta / D) >= lhs`, where `prob`
    /// turns a count into the probability used (point or interval end).
    fn min_constant(&self, theta: f64, lhs: f64, prob: impl Fn(usize) -> f64) -> Option<f64> {
        if lhs <= 0.0 || prob(self.count_above(theta)) >= lhs {
            return Some(1.0);
        }
        for (q, &(v, count)) in self.levels.iter().enumerate() {
            let p = prob(count);
            if p <= 0.0 {
                continue;
            }
            let upper = self.levels.get(q + 1).map_or(f64::INFINITY, |next| theta / next.0);
            if upper < 1.0 {
                continue;
            }
            let cand = (theta / v).max(lhs / p);
            if cand <= upper {
                return Some(cand.max(1.0));
            }
        }
        None
    }
}

fn grid_constant(
    grid: &[f64],
    lhs: &[TailEstimate],
    law: &StepLaw,
    pick_lhs: impl Fn(&TailEstimate) -> f64,
    prob: impl Fn(usize) -> f64 + Copy,
) -> Option<f64> {
    grid.iter().zip(lhs).try_fold(1.0_f64, |d, (&theta, l)| law.min_constant(theta, pick_lhs(l), prob).map(|c| d.max(c)))
}

fn strict_tails(values: &[f64], grid: &[f64]) -> Vec<TailEstimate> {
    grid.iter()
        .map(|&t| TailEstimate::from_counts(t, values.iter().filter(|&&v| v > t).count(), values.len()))
        .collect()
}

fn build_report(m: usize, k: usize, grid: &[f64], lhs_values: &[f64], rhs_values: &[f64], exact: bool) -> DecouplingReport {
    let trials = lhs_values.len();
    let mut lhs = strict_tails(lhs_values, grid);
    let mut rhs = strict_tails(rhs_values, grid);
    if exact {
        for t in lhs.iter_mut().chain(rhs.iter_mut()) {
            (t.ci_low, t.ci_high) = (t.p_hat, t.p_hat);
        }
    }
    let law = StepLaw::new(rhs_values);
    let total = law.total as f64;
    let d_hat = grid_constant(grid, &lhs, &law, |l| l.p_hat, |c| c as f64 / total);
    let (d_ci_low, d_ci_high) = if exact {
        (d_hat, d_hat)
    } else {
        (
            grid_constant(grid, &lhs, &law, |l| l.ci_low, |c| clopper_pearson(c, law.total, CONFIDENCE).1),
            grid_constant(grid, &lhs, &law, |l| l.ci_high, |c| clopper_pearson(c, law.total, CONFIDENCE).0),
        )
    };
    let uninformative = lhs.iter().all(|l| l.p_hat == 0.0 || l.p_hat == 1.0);
    DecouplingReport {
        m_order: m,
        k,
        trials,
        exact,
        theta_grid: grid.to_vec(),
        lhs,
        rhs,
        d_hat,
        d_ci_low,
        d_ci_high,
        uninformative,
        c_m: None,
        e_m: None,
    }
}

fn check_order<K: Kernel + ?Sized>(kernel: &K, n: usize) -> Result<usize> {
    let m = kernel.order();
    if !(2..=3).contains(&m) || m > n {
        return Err(Error::InvalidParameter(format!("decoupling order m = {m} must be 2 or 3 and at most n = {n}")));
    }
    Ok(m)
}

/// Monte Carlo decoupling estimate. Trial `i` draws `m` independent copies of
/// the sequence; the coupled sum uses copy 0 only.
pub fn estimate_decoupling<K: Kernel + ?Sized>(
    ensemble: &Ensemble,
    kernel: &K,
    k: usize,
    theta_grid: &[f64],
    trials: usize,
    seeds: &SeedPolicy,
) -> Result<DecouplingReport> {
    let n = ensemble.spec().n;
    let m = check_order(kernel, n)?;
    let tuples = distinct_tuples(n, m);
    let pairs: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let copies = ensemble.independent_copies(m, seeds, trial)?;
            Ok((chaos_norm(kernel, &tuples, &copies, false, k)?, chaos_norm(kernel, &tuples, &copies, true, k)?))
        })
        .collect::<Result<_>>()?;
    let (lhs, rhs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(build_report(m, k, theta_grid, &lhs, &rhs, false))
}

/// Exact decoupling constant when each `X_i` is uniform on `support`.
/// Enumerates `|support|^n` coupled and `|support|^(n m)` decoupled outcomes.
pub fn decoupling_exact<K: Kernel + ?Sized>(
    support: &[Tensor],
    n: usize,
    kernel: &K,
    k: usize,
    theta_grid: &[f64],
) -> Result<DecouplingReport> {
    let m = check_order(kernel, n)?;
    let s = support.len();
    if s == 0 || (s as f64).powi((n * m) as i32) > 1e6 {
        return Err(Error::InvalidParameter("support empty or enumeration too large".into()));
    }
    let tuples = distinct_tuples(n, m);
    let sequence = |mut code: usize| -> Vec<Tensor> {
        (0..n)
            .map(|_| {
                let t = support[code % s].clone();
                code /= s;
                t
            })
            .collect()
    };
    let per_copy = s.pow(n as u32);
    let lhs: Vec<f64> = (0..per_copy)
        .map(|c| chaos_norm(kernel, &tuples, &[sequence(c)], false, k))
        .collect::<Result<_>>()?;
    let rhs: Vec<f64> = (0..per_copy.pow(m as u32))
        .map(|mut code| {
            let copies: Vec<Vec<Tensor>> = (0..m)
                .map(|_| {
                    let seq = sequence(code % per_copy);
                    code /= per_copy;
                    seq
                })
                .collect();
            chaos_norm(kernel, &tuples, &copies, true, k)
        })
        .collect::<Result<_>>()?;
    // Weight each coupled outcome equally against the larger decoupled space.
    let repeat = rhs.len() / lhs.len();
    let lhs_weighted: Vec<f64> = lhs.iter().flat_map(|&v| std::iter::repeat_n(v, repeat)).collect();
    Ok(build_report(m, k, theta_grid, &lhs_weighted, &rhs, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::DenseTensor;

    fn scalar(v: f64) -> Tensor {
        DenseTensor::from_real(TensorShape::square(&[1]).unwrap(), &[v]).unwrap()
    }

    #[test]
    fn tuples_are_distinct_and_ordered() {
        assert_eq!(distinct_tuples(3, 2).len(), 6);
        assert_eq!(distinct_tuples(3, 3).len(), 6);
        assert_eq!(distinct_tuples(2, 2), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn scalar_sign_case_gives_two() {
        let support = [scalar(1.0), scalar(-1.0)];
        let r = decoupling_exact(&support, 2, &ProductKernel { order: 2 }, 1, &[0.5, 1.0, 1.5]).unwrap();
        assert_eq!(r.d_hat, Some(2.0));
        assert_eq!(r.lhs[0].p_hat, 1.0);
        assert_eq!(r.rhs[0].p_hat, 0.5);
        assert!(r.uninformative);
    }

    #[test]
    fn zero_kernel_needs_no_constant() {
        let support = [scalar(1.0), scalar(-1.0)];
        let zero = ZeroKernel { order: 2, shape: TensorShape::square(&[1]).unwrap() };
        let r = decoupling_exact(&support, 2, &zero, 1, &[0.5]).unwrap();
        assert_eq!(r.d_hat, Some(1.0));
    }

    #[test]
    fn step_law_constant() {
        // R is 2 or 0 with equal weight; lhs 1 at theta 1 needs D = 2.
        let law = StepLaw::new(&[2.0, 0.0]);
        assert_eq!(law.min_constant(1.0, 1.0, |c| c as f64 / 2.0), Some(2.0));
        // R = 1 always: D P(R > theta / D) = D once D > theta, so theta = 3 needs D = 3.
        let law = StepLaw::new(&[1.0]);
        assert_eq!(law.min_constant(3.0, 0.5, |c| c as f64), Some(3.0));
        assert_eq!(StepLaw::new(&[0.0]).min_constant(1.0, 0.5, |c| c as f64), None);
    }
}
