use serde::{Deserialize, Serialize};

use super::{quadratic_form, BlockMatrix, BlockVector};
use crate::bounds::BoundInputs;
use crate::error::Result;
use crate::spectral::{self, INEQUALITY_SLACK};
use crate::tensor::structural_tol;
use crate::tensor::sum_tensors;
use crate::Tensor;

const COMMUTE_TOL: f64 = 1e-8;
/// Exponent arguments above this are not probed (double overflow guard).
const MAX_EXPONENT: f64 = 700.0;

/// Sampled certification of the structural hypotheses of the main bound.
/// Margins are worst cases over every realization merged into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub samples: usize,
    /// `X_i` commutes with `S_i = sum_{l != i} A_il X_l`.
    pub commute_ok: bool,
    pub commute_residual: f64,
    /// `exp(tS)^j >= exp(t S^j)` for every `S_i` and for `sum_i D_i`.
    pub exp_domination_ok: bool,
    /// Smallest eigenvalue of `exp(tS)^j - exp(t S^j)` relative to its scale.
    pub exp_domination_margin: f64,
    pub t_grid: Vec<f64>,
    pub j_range: Vec<u32>,
    /// Grid points skipped because `j t lambda_max` exceeded the overflow guard.
    pub skipped_grid_points: usize,
    /// Every `X_i`, `D_i` and coupling term is positive definite.
    pub pd_ok: bool,
    pub pd_margin: f64,
    /// Largest entrywise asymmetry of the quadratic form.
    pub hermitian_residual: f64,
    pub r_d_declared: f64,
    pub r_d_observed: f64,
    pub r_d_ok: bool,
    pub r_c_declared: f64,
    pub r_c_observed: f64,
    pub r_c_ok: bool,
    /// `K_{i,j,k}` indexed `[i][j - 1]`.
    pub k_declared: Vec<Vec<f64>>,
    pub k_observed: Vec<Vec<f64>>,
    pub k_ok: bool,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.commute_ok && self.exp_domination_ok && self.pd_ok && self.r_d_ok && self.r_c_ok && self.k_ok
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        [
            (self.commute_ok, "commutation"),
            (self.exp_domination_ok, "exponential domination"),
            (self.pd_ok, "positive definiteness"),
            (self.r_d_ok, "R_d bound"),
            (self.r_c_ok, "R_c bound"),
            (self.k_ok, "Ky Fan power bound"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }

    /// Fold another realization's report into this one.
    pub fn merge(&mut self, other: &AssumptionReport) {
        self.samples += other.samples;
        self.commute_residual = self.commute_residual.max(other.commute_residual);
        self.commute_ok &= other.commute_ok;
        self.exp_domination_margin = self.exp_domination_margin.min(other.exp_domination_margin);
        self.exp_domination_ok &= other.exp_domination_ok;
        self.skipped_grid_points += other.skipped_grid_points;
        self.pd_margin = self.pd_margin.min(other.pd_margin);
        self.pd_ok &= other.pd_ok;
        self.hermitian_residual = self.hermitian_residual.max(other.hermitian_residual);
        self.r_d_observed = self.r_d_observed.max(other.r_d_observed);
        self.r_d_ok &= other.r_d_ok;
        self.r_c_observed = self.r_c_observed.max(other.r_c_observed);
        self.r_c_ok &= other.r_c_ok;
        for (mine, theirs) in self.k_observed.iter_mut().zip(&other.k_observed) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a = a.max(*b);
            }
        }
        self.k_ok &= other.k_ok;
    }
}

/// `count` log-spaced points in `[1e-3, t_max]`.
pub fn default_t_grid(t_max: f64, count: usize) -> Vec<f64> {
    let lo = 1e-3_f64.min(t_max);
    if count <= 1 {
        return vec![t_max];
    }
    let ratio = (t_max / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (ratio * i as f64).exp()).collect()
}

/// Largest eigenvalue for a Hermitian tensor, the spectral norm otherwise.
fn top_of(t: &Tensor) -> Result<f64> {
    if t.is_hermitian(structural_tol()) {
        spectral::max_eigenvalue(t)
    } else {
        spectral::spectral_norm(t)
    }
}

/// Smallest eigenvalue, or minus the asymmetry when the tensor is not Hermitian.
fn bottom_of(t: &Tensor) -> Result<f64> {
    if t.is_hermitian(structural_tol()) {
        spectral::min_eigenvalue(t)
    } else {
        Ok(-t.hermitian_residual()?)
    }
}

/// Worst margin of `exp(tS)^j >= exp(t S^j)` over the grid, plus skipped points.
fn exp_domination(s: &Tensor, t_grid: &[f64], j_range: &[u32]) -> Result<(f64, usize)> {
    if !s.is_hermitian(structural_tol()) {
        return Ok((-s.hermitian_residual()?, 0));
    }
    let top = spectral::eigenvalues(s)?.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let mut worst = f64::INFINITY;
    let mut skipped = 0;
    for &j in j_range {
        let s_j = s.power(j)?.hermitian_part()?;
        let top_j = top.powi(j as i32);
        for &t in t_grid {
            if t * f64::from(j) * top > MAX_EXPONENT || t * top_j > MAX_EXPONENT {
                skipped += 1;
                continue;
            }
            let lhs = spectral::spectral_function(s, |l| (t * l).exp())?.power(j)?.hermitian_part()?;
            let rhs = spectral::spectral_function(&s_j, |l| (t * l).exp())?;
            let scale = 1.0 + lhs.max_abs().max(rhs.max_abs());
            worst = worst.min(spectral::min_eigenvalue(&lhs.sub(&rhs)?.hermitian_part()?)? / scale);
        }
    }
    Ok((worst, skipped))
}

/// Check every hypothesis of the main bound on one realization `x`.
pub fn check_assumptions(
    x: &BlockVector,
    a: &BlockMatrix,
    inputs: &BoundInputs,
    t_grid: &[f64],
    j_range: &[u32],
) -> Result<AssumptionReport> {
    let n = x.n();
    let q = quadratic_form(x, a)?;

    let mut commute_residual = 0.0_f64;
    let mut exp_margin = f64::INFINITY;
    let mut skipped = 0;
    let mut r_c_observed = 0.0_f64;
    for i in 0..n {
        let products: Vec<Tensor> = (0..n)
            .filter(|&l| l != i)
            .map(|l| a.get(i, l).einstein_product(x.get(l)))
            .collect::<Result<_>>()?;
        for p in &products {
            r_c_observed = r_c_observed.max(top_of(p)?);
        }
        let Some(s) = sum_tensors(&products)? else { continue };
        let xs = x.get(i).einstein_product(&s)?;
        let sx = s.einstein_product(x.get(i))?;
        let scale = 1.0 + x.get(i).max_abs() * s.max_abs() * x.base_shape().row_size() as f64;
        commute_residual = commute_residual.max(xs.max_abs_diff(&sx)? / scale);
        let (m, sk) = exp_domination(&s, t_grid, j_range)?;
        exp_margin = exp_margin.min(m);
        skipped += sk;
    }
    let (m, sk) = exp_domination(&q.diagonal_sum(), t_grid, j_range)?;
    exp_margin = exp_margin.min(m);
    skipped += sk;

    let mut pd_margin = f64::INFINITY;
    for t in x.blocks().iter().chain(&q.diagonal_terms).chain(&q.coupling_terms) {
        pd_margin = pd_margin.min(bottom_of(t)?);
    }
    let r_d_observed = q.diagonal_terms.iter().map(top_of).try_fold(0.0_f64, |m, v| v.map(|v| m.max(v)))?;

    let mut k_observed = Vec::with_capacity(n);
    for xi in x.blocks() {
        let row = j_range
            .iter()
            .map(|&j| spectral::ky_fan_norm(&xi.power(j)?, inputs.k))
            .collect::<Result<Vec<_>>>()?;
        k_observed.push(row);
    }
    let k_declared: Vec<Vec<f64>> = (0..n)
        .map(|i| j_range.iter().map(|&j| inputs.k_bound(i, j as usize)).collect())
        .collect();
    let k_ok = k_observed
        .iter()
        .flatten()
        .zip(k_declared.iter().flatten())
        .all(|(obs, dec)| *obs <= dec * (1.0 + INEQUALITY_SLACK));

    Ok(AssumptionReport {
        samples: 1,
        commute_ok: commute_residual <= COMMUTE_TOL,
        commute_residual,
        exp_domination_ok: exp_margin >= -INEQUALITY_SLACK,
        exp_domination_margin: exp_margin,
        t_grid: t_grid.to_vec(),
        j_range: j_range.to_vec(),
        skipped_grid_points: skipped,
        pd_ok: pd_margin > 0.0,
        pd_margin,
        hermitian_residual: q.total.hermitian_residual()?,
        r_d_declared: inputs.r_d,
        r_d_observed,
        r_d_ok: r_d_observed <= inputs.r_d * (1.0 + INEQUALITY_SLACK),
        r_c_declared: inputs.r_c,
        r_c_observed,
        r_c_ok: n == 1 || r_c_observed <= inputs.r_c * (1.0 + INEQUALITY_SLACK),
        k_declared,
        k_observed,
        k_ok,
    })
}
