//! Dominance experiments: empirical tails of `||f(X^T A X)||_(k)` (or of
//! `||g(sum_j X_j)||_(k)`) against the evaluated bound, row by row.

use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tail::{draw_statistic, tails_from_values, TailEstimate, MIN_TRIALS};
use crate::bounds::{chernoff_bound, hanson_wright_bound, BoundInputs, BoundValue, ChernoffParams, TSearch, TermStats};
use crate::ensembles::{xi_from_samples, Ensemble, EnsembleSpec, SeedPolicy, Stream, StreamRng};
use crate::error::{Error, Result};
use crate::quadform::{
    check_assumptions, default_t_grid, poly_apply, poly_eval, quadratic_form, AssumptionReport, BlockMatrix, BlockVector,
    ThetaPolicy,
};
use crate::spectral::{self, INEQUALITY_SLACK};
use crate::tensor::fixture::read_fixture;
use crate::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DominanceMode {
    /// `||f(X^T A X)||_(k)` against the full quadratic-form bound.
    #[default]
    HansonWright,
    /// `||g(sum_j X_j)||_(k)` against the generalized Chernoff bound.
    Chernoff,
}

/// Random diagonal weights for blocks sharing the ensemble's eigenbasis.
/// `w_il = w_li`, so `A_il = A_li`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightGenerator {
    pub diag_low: f64,
    pub diag_high: f64,
    pub off_low: f64,
    pub off_high: f64,
}

impl WeightGenerator {
    /// Weights `[i][l][eigen index]`, drawn from `rng`.
    pub fn weights(&self, n: usize, size: usize, rng: &mut StreamRng) -> Result<Vec<Vec<Vec<f64>>>> {
        if !(self.diag_low <= self.diag_high && self.off_low <= self.off_high) {
            return Err(Error::InvalidParameter("weight ranges must satisfy low <= high".into()));
        }
        let mut w = vec![vec![Vec::new(); n]; n];
        for i in 0..n {
            for l in i..n {
                let (lo, hi) = if i == l { (self.diag_low, self.diag_high) } else { (self.off_low, self.off_high) };
                let v: Vec<f64> = (0..size).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
                w[l][i] = v.clone();
                w[i][l] = v;
            }
        }
        Ok(w)
    }
}

/// Where the block matrix comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSource {
    Generator(WeightGenerator),
    /// `n * n` fixture files, row-major.
    Fixtures(Vec<PathBuf>),
}

impl BlockSource {
    pub fn build(&self, ensemble: &Ensemble) -> Result<BlockMatrix> {
        let n = ensemble.spec().n;
        match self {
            BlockSource::Generator(g) => {
                let mut rng = SeedPolicy::new(ensemble.spec().shared_unitary_seed).rng(Stream::Structure, 1);
                let w = g.weights(n, ensemble.shape().row_size(), &mut rng)?;
                BlockMatrix::from_shared_basis(ensemble.shared_basis(), ensemble.shape(), &w)
            }
            BlockSource::Fixtures(paths) => {
                let blocks = paths.iter().map(read_fixture::<f64>).collect::<Result<Vec<_>>>()?;
                let a = BlockMatrix::new(n, blocks)?;
                if a.base_shape() != ensemble.shape() {
                    return Err(Error::ShapeMismatch { left: a.base_shape().to_string(), right: ensemble.shape().to_string() });
                }
                Ok(a)
            }
        }
    }
}

/// Explicit replacements for the derived almost-sure constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DeclaredOverrides {
    pub r_d: Option<f64>,
    pub r_c: Option<f64>,
    /// Chernoff-mode bound on `lambda_max(X_j)`.
    pub r: Option<f64>,
    pub k_table: Option<Vec<Vec<f64>>>,
}

fn default_pilot_trials() -> usize {
    2000
}
fn default_one() -> f64 {
    1.0
}
fn default_d2() -> f64 {
    8.0
}
fn default_grid_points() -> usize {
    10
}
fn default_assumption_t_max() -> f64 {
    50.0
}
fn default_assumption_t_points() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceConfig {
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub mode: DominanceMode,
    /// Required in Hanson-Wright mode.
    #[serde(default)]
    pub block: Option<BlockSource>,
    /// `a_0..a_m` of `f` (or of `g` before the power `s`).
    pub poly: Vec<f64>,
    /// Chernoff-mode power `s`.
    #[serde(default = "default_one")]
    pub s: f64,
    pub k: usize,
    /// Explicit grid; otherwise evenly spaced from the pilot median to the pilot maximum.
    #[serde(default)]
    pub theta_grid: Option<Vec<f64>>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub theta_policy: ThetaPolicy,
    pub trials: usize,
    #[serde(default = "default_pilot_trials")]
    pub pilot_trials: usize,
    #[serde(default = "default_one")]
    pub c_cher: f64,
    #[serde(default = "default_d2")]
    pub d2: f64,
    #[serde(default)]
    pub search: TSearch,
    pub master_seed: u64,
    #[serde(default)]
    pub declared: DeclaredOverrides,
    #[serde(default = "default_assumption_t_max")]
    pub assumption_t_max: f64,
    #[serde(default = "default_assumption_t_points")]
    pub assumption_t_points: usize,
}

impl DominanceConfig {
    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.poly.len() < 2 {
            return bad("polynomial needs degree >= 1");
        }
        if self.k == 0 || self.k > self.ensemble.shape()?.row_size() {
            return Err(Error::KOutOfRange { k: self.k, max: self.ensemble.shape()?.row_size() });
        }
        if self.trials < MIN_TRIALS || self.pilot_trials < 2 {
            return bad("need trials >= 100 and pilot_trials >= 2");
        }
        if let Some(g) = &self.theta_grid {
            if g.is_empty() || g.iter().any(|t| !t.is_finite()) {
                return bad("theta grid must be non-empty and finite");
            }
        } else if self.grid_points == 0 {
            return bad("grid_points must be >= 1");
        }
        if self.mode == DominanceMode::HansonWright && self.block.is_none() {
            return bad("Hanson-Wright mode needs a block matrix");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Violation,
    Refused,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Violation => "violation",
            Verdict::Refused => "refused",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceRow {
    pub theta: f64,
    pub tail: TailEstimate,
    pub bound: Option<BoundValue>,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl DominanceRow {
    /// `ci_low <= min(bound, 1)` when a bound exists and assumptions hold.
    pub fn recompute(&self, assumptions_ok: bool) -> Verdict {
        match (&self.bound, assumptions_ok) {
            (Some(b), true) if self.tail.ci_low <= b.clamped() => Verdict::Pass,
            (Some(_), true) => Verdict::Violation,
            _ => Verdict::Refused,
        }
    }
}

/// Hypotheses of the Chernoff-only mode, worst case over the pilot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernoffAssumptionReport {
    pub samples: usize,
    pub pd_ok: bool,
    pub pd_margin: f64,
    pub r_declared: f64,
    pub r_observed: f64,
    pub r_ok: bool,
    /// `g(exp(t S)) >= exp(t g(S))` on the grid, in the log domain.
    pub condition_ok: bool,
    pub condition_margin: f64,
    pub t_grid: Vec<f64>,
    pub skipped_grid_points: usize,
}

impl ChernoffAssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.pd_ok && self.r_ok && self.condition_ok
    }

    pub fn failures(&self) -> Vec<&'static str> {
        [(self.pd_ok, "positive definiteness"), (self.r_ok, "R bound"), (self.condition_ok, "exponential condition")]
            .into_iter()
            .filter(|(ok, _)| !ok)
            .map(|(_, n)| n)
            .collect()
    }
}

/// Pilot-based bound evaluation over the grid, before any tail is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub mode: DominanceMode,
    pub master_seed: u64,
    pub pilot_trials: usize,
    pub k: usize,
    pub poly: Vec<f64>,
    pub theta_policy: ThetaPolicy,
    /// Bound constants with `theta` left empty; rows re-split it per grid point.
    pub bound_inputs: Option<BoundInputs>,
    pub chernoff_params: Option<ChernoffParams>,
    pub assumption_report: Option<AssumptionReport>,
    pub chernoff_assumptions: Option<ChernoffAssumptionReport>,
    pub assumptions_ok: bool,
    pub rows: Vec<BoundRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub theta: f64,
    /// `None` when the threshold split is infeasible.
    pub bound: Option<BoundValue>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    /// Bound setup; its rows are moved into `rows`.
    pub setup: BoundReport,
    pub trials: usize,
    pub excluded_trials: usize,
    pub rows: Vec<DominanceRow>,
}

impl DominanceReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.rows.iter().filter(|r| r.verdict == v).count()
    }

    pub fn all_pass(&self) -> bool {
        self.count(Verdict::Pass) == self.rows.len()
    }
}

fn term_stats(samples: &[Tensor]) -> Result<TermStats> {
    let mut sigma = 0.0;
    for s in samples {
        sigma += spectral::spectral_norm(s)?;
    }
    Ok(TermStats { mean_sigma1: sigma / samples.len() as f64, xi: xi_from_samples(samples)?.xi })
}

/// `min(k, size) * high^j` with `high` the largest eigenvalue magnitude.
fn default_k_table(spec: &EnsembleSpec, k: usize, m: usize, size: usize) -> Vec<Vec<f64>> {
    let high = spec.eig_high.abs().max(spec.eig_low.abs());
    let row: Vec<f64> = (1..=m).map(|j| k.min(size) as f64 * high.powi(j as i32)).collect();
    vec![row; spec.n]
}

fn hw_statistic(x: &[Tensor], a: &BlockMatrix, poly: &[f64], k: usize) -> Result<f64> {
    let q = quadratic_form(&BlockVector::new(x.to_vec())?, a)?;
    spectral::ky_fan_norm(&poly_apply(poly, &q.total)?, k)
}

fn chernoff_statistic(x: &[Tensor], poly: &[f64], s: f64, k: usize) -> Result<f64> {
    let sum = x.iter().skip(1).try_fold(x[0].clone(), |acc, t| acc.add(t))?.hermitian_part()?;
    let g = spectral::spectral_function(&sum, |l| poly_eval(poly, l).powf(s))?;
    spectral::ky_fan_norm(&g, k)
}

/// Build the pilot-based bound inputs (with an empty split) for a block matrix.
fn hw_inputs(cfg: &DominanceConfig, a: &BlockMatrix, pilot: &[Vec<Tensor>]) -> Result<BoundInputs> {
    let spec = &cfg.ensemble;
    let n = spec.n;
    let m = cfg.poly.len() - 1;
    let size = a.base_shape().row_size();
    let high = spec.eig_high.abs().max(spec.eig_low.abs());
    let mut r_d = 0.0_f64;
    let mut r_c = 0.0_f64;
    for i in 0..n {
        for l in 0..n {
            let norm = spectral::spectral_norm(a.get(i, l))?;
            if i == l {
                r_d = r_d.max(norm * high * high);
            } else {
                r_c = r_c.max(norm * high);
            }
        }
    }
    let mut diag_stats = Vec::with_capacity(n);
    let mut coupling_stats = Vec::with_capacity(n);
    for i in 0..n {
        let d: Vec<Tensor> = pilot
            .iter()
            .map(|x| x[i].einstein_product(a.get(i, i))?.einstein_product(&x[i]))
            .collect::<Result<_>>()?;
        diag_stats.push(term_stats(&d)?);
        let mut row = Vec::with_capacity(n.saturating_sub(1));
        for l in (0..n).filter(|&l| l != i) {
            let c: Vec<Tensor> = pilot.iter().map(|x| a.get(i, l).einstein_product(&x[l])).collect::<Result<_>>()?;
            row.push(term_stats(&c)?);
        }
        coupling_stats.push(row);
    }
    Ok(BoundInputs {
        n,
        a: cfg.poly.clone(),
        k: cfg.k,
        theta_total: f64::NAN,
        theta: Vec::new(),
        r_d: cfg.declared.r_d.unwrap_or(r_d),
        r_c: cfg.declared.r_c.unwrap_or(if n == 1 { 1.0 } else { r_c }),
        k_table: cfg.declared.k_table.clone().unwrap_or_else(|| default_k_table(spec, cfg.k, m, size)),
        c_cher: cfg.c_cher,
        d2: cfg.d2,
        diag_stats,
        coupling_stats,
        search: cfg.search,
    })
}

fn hw_assumptions(
    cfg: &DominanceConfig,
    a: &BlockMatrix,
    inputs: &BoundInputs,
    pilot: &[Vec<Tensor>],
) -> Result<AssumptionReport> {
    let t_grid = default_t_grid(cfg.assumption_t_max, cfg.assumption_t_points);
    let j_range: Vec<u32> = (1..=inputs.m() as u32).collect();
    let reports: Vec<AssumptionReport> = pilot
        .par_iter()
        .map(|x| check_assumptions(&BlockVector::new(x.clone())?, a, inputs, &t_grid, &j_range))
        .collect::<Result<_>>()?;
    let mut iter = reports.into_iter();
    let mut merged = iter.next().ok_or_else(|| Error::InvalidParameter("empty pilot".into()))?;
    for r in iter {
        merged.merge(&r);
    }
    Ok(merged)
}

fn chernoff_assumptions(cfg: &DominanceConfig, r: f64, pilot: &[Vec<Tensor>]) -> Result<ChernoffAssumptionReport> {
    let t_grid = default_t_grid(cfg.assumption_t_max, cfg.assumption_t_points);
    let mut pd_margin = f64::INFINITY;
    let mut r_observed = 0.0_f64;
    let mut condition_margin = f64::INFINITY;
    let mut skipped = 0;
    for x in pilot {
        for t in x {
            let eig = spectral::eigenvalues(t)?;
            pd_margin = pd_margin.min(*eig.last().unwrap_or(&0.0));
            r_observed = r_observed.max(eig[0]);
        }
        let sum = x.iter().skip(1).try_fold(x[0].clone(), |acc, t| acc.add(t))?.hermitian_part()?;
        for lambda in spectral::eigenvalues(&sum)? {
            for &t in &t_grid {
                let rhs = t * poly_eval(&cfg.poly, lambda).powf(cfg.s);
                if t * lambda.abs() > 700.0 || rhs > 700.0 {
                    skipped += 1;
                    continue;
                }
                let lhs = poly_eval(&cfg.poly, (t * lambda).exp()).powf(cfg.s).ln();
                condition_margin = condition_margin.min((lhs - rhs) / (1.0 + rhs.abs()));
            }
        }
    }
    Ok(ChernoffAssumptionReport {
        samples: pilot.len(),
        pd_ok: pd_margin > 0.0,
        pd_margin,
        r_declared: r,
        r_observed,
        r_ok: r_observed <= r * (1.0 + INEQUALITY_SLACK),
        condition_ok: condition_margin >= -INEQUALITY_SLACK,
        condition_margin,
        t_grid,
        skipped_grid_points: skipped,
    })
}

/// `points` values evenly spaced from the median to the maximum of `values`.
fn pilot_grid(values: &[f64], points: usize) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let (lo, hi) = (v[v.len() / 2], v[v.len() - 1]);
    if points == 1 {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

struct Prepared {
    ensemble: Ensemble,
    block: Option<BlockMatrix>,
    report: BoundReport,
}

impl Prepared {
    fn statistic(&self, cfg: &DominanceConfig, x: &[Tensor]) -> Result<f64> {
        match &self.block {
            Some(a) => hw_statistic(x, a, &cfg.poly, cfg.k),
            None => chernoff_statistic(x, &cfg.poly, cfg.s, cfg.k),
        }
    }
}

fn prepare(cfg: &DominanceConfig) -> Result<Prepared> {
    cfg.validate()?;
    let ensemble = Ensemble::new(cfg.ensemble.clone())?;
    let seeds = SeedPolicy::new(cfg.master_seed);
    let block = match (cfg.mode, &cfg.block) {
        (DominanceMode::HansonWright, Some(src)) => Some(src.build(&ensemble)?),
        _ => None,
    };
    let pilot: Vec<Vec<Tensor>> = (0..cfg.pilot_trials as u64)
        .into_par_iter()
        .map(|i| ensemble.sample_sequence(&mut seeds.rng(Stream::Pilot, i)))
        .collect();
    let mut prepared = Prepared {
        ensemble,
        block,
        report: BoundReport {
            mode: cfg.mode,
            master_seed: cfg.master_seed,
            pilot_trials: cfg.pilot_trials,
            k: cfg.k,
            poly: cfg.poly.clone(),
            theta_policy: cfg.theta_policy,
            bound_inputs: None,
            chernoff_params: None,
            assumption_report: None,
            chernoff_assumptions: None,
            assumptions_ok: false,
            rows: Vec::new(),
        },
    };
    let theta_grid = match &cfg.theta_grid {
        Some(g) => g.clone(),
        None => {
            let values = pilot.par_iter().map(|x| prepared.statistic(cfg, x)).collect::<Result<Vec<_>>>()?;
            pilot_grid(&values, cfg.grid_points)
        }
    };

    let report = &mut prepared.report;
    let bound_at: Box<dyn Fn(f64) -> Result<BoundValue>> = match &prepared.block {
        Some(a) => {
            let inputs = hw_inputs(cfg, a, &pilot)?;
            let assumptions = hw_assumptions(cfg, a, &inputs, &pilot)?;
            report.assumptions_ok = assumptions.all_ok();
            report.assumption_report = Some(assumptions);
            report.bound_inputs = Some(inputs.clone());
            let policy = cfg.theta_policy;
            Box::new(move |theta| hanson_wright_bound(&inputs.with_theta(theta, policy)?))
        }
        None => {
            let r = cfg.declared.r.unwrap_or(cfg.ensemble.eig_high);
            let stats = (0..cfg.ensemble.n)
                .map(|j| term_stats(&pilot.iter().map(|x| x[j].clone()).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?;
            let params = ChernoffParams {
                s: cfg.s,
                a: cfg.poly.clone(),
                k: cfg.k,
                r,
                c_cher: cfg.c_cher,
                stats,
                search: cfg.search,
            };
            params.validate()?;
            let assumptions = chernoff_assumptions(cfg, r, &pilot)?;
            report.assumptions_ok = assumptions.all_ok();
            report.chernoff_assumptions = Some(assumptions);
            report.chernoff_params = Some(params.clone());
            Box::new(move |theta| chernoff_bound(&params, theta))
        }
    };
    let refusal_note = (!report.assumptions_ok).then(|| {
        let failures = match (&report.assumption_report, &report.chernoff_assumptions) {
            (Some(a), _) => a.failures(),
            (_, Some(c)) => c.failures(),
            _ => Vec::new(),
        };
        format!("assumption check failed: {}", failures.join(", "))
    });
    for theta in theta_grid {
        let row = match bound_at(theta) {
            Ok(b) => BoundRow { theta, bound: Some(b), note: refusal_note.clone() },
            Err(e @ Error::InfeasibleSplit { .. }) => BoundRow { theta, bound: None, note: Some(e.to_string()) },
            Err(e) => return Err(e),
        };
        report.rows.push(row);
    }
    Ok(prepared)
}

/// Pilot statistics, assumption checks and bound values over the grid.
pub fn evaluate_bounds(cfg: &DominanceConfig) -> Result<BoundReport> {
    Ok(prepare(cfg)?.report)
}

/// Run a dominance experiment. Bound statistics come from the pilot stream,
/// tails from the evaluation stream; both are keyed by `master_seed`.
pub fn run_dominance_experiment(cfg: &DominanceConfig) -> Result<DominanceReport> {
    let mut prepared = prepare(cfg)?;
    let seeds = SeedPolicy::new(cfg.master_seed);
    let draws = draw_statistic(
        |rng| prepared.statistic(cfg, &prepared.ensemble.sample_sequence(rng)),
        cfg.trials,
        &seeds,
        Stream::Evaluation,
    )?;
    let bound_rows = std::mem::take(&mut prepared.report.rows);
    let grid: Vec<f64> = bound_rows.iter().map(|r| r.theta).collect();
    let ok = prepared.report.assumptions_ok;
    let rows = tails_from_values(&draws.values, &grid)
        .into_iter()
        .zip(bound_rows)
        .map(|(tail, b)| {
            let mut row = DominanceRow { theta: b.theta, tail, bound: b.bound, verdict: Verdict::Refused, note: b.note };
            row.verdict = row.recompute(ok);
            row
        })
        .collect();
    Ok(DominanceReport { setup: prepared.report, trials: cfg.trials, excluded_trials: draws.excluded, rows })
}
