//! Evaluators for the Chernoff-type tail bounds. Every bound carries an
//! infimum over the Chernoff parameter `t`, found by [`minimize_log_over_t`]
//! with all exponentials handled in the log domain.

mod minimize;

pub use minimize::{minimize_log_over_t, minimize_over_t, Minimum};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadform::{theta_split, ThetaPolicy};
use crate::spectral;
use crate::tensor::{DenseTensor, TensorShape};

/// Per-summand statistics entering a Chernoff bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TermStats {
    /// `E[sigma_1(X)]`.
    pub mean_sigma1: f64,
    /// The six-term moment statistic of `X`.
    pub xi: f64,
}

/// Search interval for `t`: `[t_min, max_exponent / rate]` where `rate` is the
/// largest coefficient multiplying `t` inside an exponential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TSearch {
    pub t_min: f64,
    pub max_exponent: f64,
    /// Golden-section stopping width in `ln t`.
    pub tol: f64,
}

impl Default for TSearch {
    fn default() -> Self {
        Self { t_min: 1e-6, max_exponent: 700.0, tol: 1e-10 }
    }
}

impl TSearch {
    pub fn t_max(&self, rate: f64) -> f64 {
        self.max_exponent / rate
    }
}

/// One contribution to a summed bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTerm {
    /// `"diag"`, `"coupling"` or `"chernoff"`.
    pub part: String,
    pub j: usize,
    /// Row index `i` of a per-row coupling infimum.
    pub i: Option<usize>,
    pub value: f64,
    pub t_star: f64,
    pub at_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    /// Raw bound, possibly above 1.
    pub value: f64,
    /// Minimizer of a single infimum; for sums, that of the largest term.
    pub t_star: f64,
    pub trace: Vec<BoundTerm>,
    pub at_boundary: bool,
    pub overflow: bool,
}

impl BoundValue {
    fn zero() -> Self {
        Self { value: 0.0, t_star: f64::NAN, trace: Vec::new(), at_boundary: false, overflow: false }
    }

    fn from_terms(trace: Vec<BoundTerm>, overflow: bool) -> Self {
        let value = trace.iter().map(|t| t.value).sum();
        let (t_star, at_boundary) = trace
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .map_or((f64::NAN, false), |t| (t.t_star, t.at_boundary));
        Self { value, t_star, trace, at_boundary, overflow }
    }

    /// `min(value, 1)`.
    pub fn clamped(&self) -> f64 {
        self.value.min(1.0)
    }
}

/// `ln(1 + (e^x - 1) w)` for `x >= 0`, `w >= 0`, without overflow.
fn ln_bracket(x: f64, w: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let u = x.exp_m1() * w;
    if u.is_finite() {
        u.ln_1p()
    } else {
        x + w.ln() + ((1.0 - w) * (-x).exp() / w).ln_1p()
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY || top == f64::INFINITY {
        return top;
    }
    top + terms.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// `e^{ln_pre - rate t} * (e^{ln_const} + sum_p e^{lw_p} [1 + (e^{c_p t} - 1) w_p])`.
#[derive(Debug, Clone)]
struct ChernoffObjective {
    ln_pre: f64,
    rate: f64,
    ln_const: Option<f64>,
    /// `(ln weight, exponent coefficient, bracket weight)`.
    pieces: Vec<(f64, f64, f64)>,
}

impl ChernoffObjective {
    fn ln_eval(&self, t: f64) -> f64 {
        let mut terms: Vec<f64> = self.pieces.iter().map(|&(lw, c, w)| lw + ln_bracket(c * t, w)).collect();
        terms.extend(self.ln_const);
        self.ln_pre - self.rate * t + log_sum_exp(&terms)
    }

    fn max_coefficient(&self) -> f64 {
        self.pieces.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    fn minimize(&self, search: &TSearch) -> Result<Minimum> {
        let c = self.max_coefficient();
        let t_max = if c > 0.0 { search.t_max(c) } else { search.t_max(self.rate.max(1e-300)) };
        let t_min = search.t_min.min(0.5 * t_max);
        minimize_log_over_t(|t| self.ln_eval(t), t_min, t_max, search.tol)
    }
}

fn check_stats(stats: &[TermStats]) -> Result<()> {
    for s in stats {
        if !(s.mean_sigma1 >= 0.0 && s.xi >= 0.0 && s.mean_sigma1.is_finite() && s.xi.is_finite()) {
            return Err(Error::InvalidParameter(format!("term statistics must be finite and >= 0, got {s:?}")));
        }
    }
    Ok(())
}

/// Parameters of the Chernoff bound for `g(sum_j X_j)` with
/// `g(x) = (a_0 + a_1 x + ... + a_n x^n)^s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernoffParams {
    pub s: f64,
    /// Nonnegative `a_0..a_n`.
    pub a: Vec<f64>,
    pub k: usize,
    /// Almost-sure bound on `lambda_max(X_j)`.
    pub r: f64,
    pub c_cher: f64,
    /// One entry per summand `X_1..X_m`.
    pub stats: Vec<TermStats>,
    #[serde(default)]
    pub search: TSearch,
}

impl ChernoffParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if !(self.s >= 1.0) {
            return bad("s must be >= 1");
        }
        if self.a.len() < 2 || self.a.iter().any(|&a| !(a >= 0.0)) {
            return bad("need nonnegative coefficients a_0..a_n with n >= 1");
        }
        if self.k == 0 || !(self.r > 0.0) || !(self.c_cher >= 0.0) || self.stats.is_empty() {
            return bad("need k >= 1, R > 0, C_Cher >= 0 and at least one summand");
        }
        check_stats(&self.stats)
    }
}

/// Generalized Chernoff bound on `Pr(||g(sum_j X_j)||_(k) >= theta)`:
///
/// `(n+1)^(s-1) inf_t e^{-theta t} { k a_0^s + sum_{l,j} (k a_l^{ls} / m)
///  [1 + (e^{mlsRt} - 1) E sigma_1(X_j) + C (e^{mlsRt} - 1) Xi(X_j)] }`.
pub fn chernoff_bound(p: &ChernoffParams, theta: f64) -> Result<BoundValue> {
    p.validate()?;
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!("theta must be > 0, got {theta}")));
    }
    let n_g = p.a.len() - 1;
    let m = p.stats.len() as f64;
    let k = p.k as f64;
    let mut pieces = Vec::new();
    for (l, &a_l) in p.a.iter().enumerate().skip(1) {
        if a_l == 0.0 {
            continue;
        }
        let ls = l as f64 * p.s;
        for st in &p.stats {
            let lw = (k / m).ln() + ls * a_l.ln();
            pieces.push((lw, m * ls * p.r, st.mean_sigma1 + p.c_cher * st.xi));
        }
    }
    let ln_const = (p.a[0] > 0.0).then(|| k.ln() + p.s * p.a[0].ln());
    let obj = ChernoffObjective { ln_pre: (p.s - 1.0) * ((n_g + 1) as f64).ln(), rate: theta, ln_const, pieces };
    let min = obj.minimize(&p.search)?;
    let term = BoundTerm {
        part: "chernoff".into(),
        j: 0,
        i: None,
        value: min.value,
        t_star: min.t_star,
        at_boundary: min.at_boundary,
    };
    Ok(BoundValue { value: min.value, t_star: min.t_star, at_boundary: min.at_boundary, overflow: min.overflow, trace: vec![term] })
}

/// Every constant of the main bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    /// Real coefficients `a_0..a_m` of `f`.
    pub a: Vec<f64>,
    pub k: usize,
    pub theta_total: f64,
    /// `theta_1..theta_m`, summing to `Theta - |a_0| k`.
    pub theta: Vec<f64>,
    pub r_d: f64,
    pub r_c: f64,
    /// `K_{i,j,k}` indexed `[i][j - 1]`.
    pub k_table: Vec<Vec<f64>>,
    pub c_cher: f64,
    pub d2: f64,
    /// Statistics of `D_i`, one per `i`.
    pub diag_stats: Vec<TermStats>,
    /// Statistics of `A_il * X_l`: row `i` lists `l != i` in increasing order.
    pub coupling_stats: Vec<Vec<TermStats>>,
    #[serde(default)]
    pub search: TSearch,
}

impl BoundInputs {
    /// Polynomial degree `m`.
    pub fn m(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    pub fn k_bound(&self, i: usize, j: usize) -> f64 {
        self.k_table.get(i).and_then(|row| row.get(j.wrapping_sub(1))).copied().unwrap_or(f64::NAN)
    }

    /// Copy with `Theta` replaced and the split recomputed under `policy`.
    pub fn with_theta(&self, theta_total: f64, policy: ThetaPolicy) -> Result<Self> {
        let theta = theta_split(theta_total, &self.a, self.k, policy)?;
        Ok(Self { theta_total, theta, ..self.clone() })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let (n, m) = (self.n, self.m());
        if n == 0 || m == 0 || self.k == 0 {
            return bad(format!("need n >= 1, degree m >= 1, k >= 1 (n = {n}, m = {m}, k = {})", self.k));
        }
        if self.theta.len() != m {
            return Err(Error::LengthMismatch(self.theta.len(), m));
        }
        for (j, (&t, &a)) in self.theta.iter().zip(&self.a[1..]).enumerate() {
            if a != 0.0 && !(t > 0.0) {
                return bad(format!("theta_{} must be > 0", j + 1));
            }
        }
        let budget = self.theta_total - self.a[0].abs() * self.k as f64;
        if !(budget > 0.0) {
            return Err(Error::InfeasibleSplit { theta: self.theta_total, floor: self.a[0].abs() * self.k as f64 });
        }
        let sum: f64 = self.theta.iter().sum();
        if (sum - budget).abs() > 1e-12 * budget.max(1.0) {
            return bad(format!("theta split sums to {sum}, expected {budget}"));
        }
        if !(self.r_d > 0.0) || (n > 1 && !(self.r_c > 0.0)) || !(self.d2 > 0.0) || !(self.c_cher >= 0.0) {
            return bad("need R_d > 0, R_c > 0, D_2 > 0, C_Cher >= 0".into());
        }
        if self.k_table.len() != n || self.k_table.iter().any(|r| r.len() != m || r.iter().any(|&v| !(v > 0.0))) {
            return bad(format!("K table must be {n} x {m} with positive entries"));
        }
        if self.diag_stats.len() != n {
            return Err(Error::LengthMismatch(self.diag_stats.len(), n));
        }
        if self.coupling_stats.len() != n || self.coupling_stats.iter().any(|r| r.len() != n - 1) {
            return bad(format!("coupling statistics must be {n} rows of {} entries", n - 1));
        }
        check_stats(&self.diag_stats)?;
        self.coupling_stats.iter().try_for_each(|r| check_stats(r))
    }

    fn check_j(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.m() {
            return Err(Error::InvalidParameter(format!("degree j = {j} outside 1..={}", self.m())));
        }
        Ok(())
    }
}

/// Tail bound for `||(sum_i D_i)^j||_(k) >= theta_j / (2^j |a_j|)`:
/// `inf_t e^{-theta_j t / (2^j |a_j|)} sum_i (k/n) [1 + (e^{n R_d t} - 1)(E sigma_1(D_i) + C Xi(D_i))]`.
/// Zero (with an empty trace) when `a_j = 0`.
pub fn diag_bound(inputs: &BoundInputs, j: usize) -> Result<BoundValue> {
    inputs.validate()?;
    inputs.check_j(j)?;
    let a_j = inputs.a[j].abs();
    if a_j == 0.0 {
        return Ok(BoundValue::zero());
    }
    let n = inputs.n as f64;
    let k = inputs.k as f64;
    let rate = inputs.theta[j - 1] / (2f64.powi(j as i32) * a_j);
    let pieces = inputs
        .diag_stats
        .iter()
        .map(|s| ((k / n).ln(), n * inputs.r_d, s.mean_sigma1 + inputs.c_cher * s.xi))
        .collect();
    let obj = ChernoffObjective { ln_pre: 0.0, rate, ln_const: None, pieces };
    let min = obj.minimize(&inputs.search)?;
    let term = BoundTerm { part: "diag".into(), j, i: None, value: min.value, t_star: min.t_star, at_boundary: min.at_boundary };
    Ok(BoundValue::from_terms(vec![term], min.overflow))
}

/// Tail bound for the coupling part at degree `j`:
/// `D_2 sum_i inf_t e^{-theta_j t / (2^j n^{j-1} |a_j| D_2 K_{i,j,k})}
///  sum_{l != i} (k/(n-1)) [1 + (e^{(n-1) R_c t} - 1)(E sigma_1(A_il X_l) + C Xi(A_il X_l))]`,
/// with one infimum per row `i`. Zero when `n = 1` or `a_j = 0`.
pub fn coupling_bound(inputs: &BoundInputs, j: usize) -> Result<BoundValue> {
    inputs.validate()?;
    inputs.check_j(j)?;
    let a_j = inputs.a[j].abs();
    if inputs.n == 1 || a_j == 0.0 {
        return Ok(BoundValue::zero());
    }
    let n = inputs.n as f64;
    let k = inputs.k as f64;
    let mut trace = Vec::with_capacity(inputs.n);
    let mut overflow = false;
    for (i, row) in inputs.coupling_stats.iter().enumerate() {
        let denom = 2f64.powi(j as i32) * n.powi(j as i32 - 1) * a_j * inputs.d2 * inputs.k_bound(i, j);
        let pieces = row
            .iter()
            .map(|s| ((k / (n - 1.0)).ln(), (n - 1.0) * inputs.r_c, s.mean_sigma1 + inputs.c_cher * s.xi))
            .collect();
        let obj = ChernoffObjective { ln_pre: inputs.d2.ln(), rate: inputs.theta[j - 1] / denom, ln_const: None, pieces };
        let min = obj.minimize(&inputs.search)?;
        overflow |= min.overflow;
        trace.push(BoundTerm {
            part: "coupling".into(),
            j,
            i: Some(i),
            value: min.value,
            t_star: min.t_star,
            at_boundary: min.at_boundary,
        });
    }
    Ok(BoundValue::from_terms(trace, overflow))
}

/// The main bound: `sum_j [diag_bound(j) + coupling_bound(j)]`.
pub fn hanson_wright_bound(inputs: &BoundInputs) -> Result<BoundValue> {
    inputs.validate()?;
    let mut trace = Vec::new();
    let mut overflow = false;
    for j in 1..=inputs.m() {
        for part in [diag_bound(inputs, j)?, coupling_bound(inputs, j)?] {
            overflow |= part.overflow;
            trace.extend(part.trace);
        }
    }
    Ok(BoundValue::from_terms(trace, overflow))
}

/// Classical scalar reference
/// `2 exp(-(1/C) min{theta^2 / (beta^4 ||A||_HS), theta / (beta^2 ||A||_op)})`
/// for a real symmetric matrix `A` given by rows.
pub fn scalar_hw_reference(a: &[Vec<f64>], beta: f64, theta: f64, c: f64) -> Result<f64> {
    if !(theta > 0.0 && beta > 0.0 && c > 0.0) {
        return Err(Error::InvalidParameter("theta, beta and C must be > 0".into()));
    }
    let n = a.len();
    if n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(Error::NotSquare(format!("{n} rows")));
    }
    let flat: Vec<f64> = a.iter().flatten().copied().collect();
    let tensor = DenseTensor::from_real(TensorShape::square(&[n])?, &flat)?;
    let hs = flat.iter().map(|v| v * v).sum::<f64>().sqrt();
    let op = spectral::spectral_norm(&tensor)?;
    if hs == 0.0 {
        return Ok(0.0);
    }
    let exponent = (theta * theta / (beta.powi(4) * hs)).min(theta / (beta * beta * op));
    Ok(2.0 * (-exponent / c).exp())
}
