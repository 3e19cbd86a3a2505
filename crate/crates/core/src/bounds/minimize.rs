use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRID_POINTS: usize = 512;
const MAX_GOLDEN_STEPS: usize = 200;

/// Result of a one-dimensional search over the Chernoff parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub t_star: f64,
    /// Natural log of the minimal objective value.
    pub log_value: f64,
    pub value: f64,
    /// The minimizer sits on an end of the search interval.
    pub at_boundary: bool,
    /// No probed point had a finite objective.
    pub overflow: bool,
    pub evaluations: usize,
}

/// Minimize `exp(log_objective(t))` over `[t_min, t_max]`.
///
/// A 512-point log-spaced grid locates the basin, then golden-section search
/// (in `ln t`) refines between the neighbours of the best grid point. The
/// returned value never exceeds the objective at any probed point. NaN and
/// `+inf` evaluations count as `+inf`.
pub fn minimize_log_over_t<F>(log_objective: F, t_min: f64, t_max: f64, tol: f64) -> Result<Minimum>
where
    F: Fn(f64) -> f64,
{
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("t search interval [{t_min}, {t_max}] invalid")));
    }
    let mut evaluations = 0;
    let mut eval = |t: f64| {
        evaluations += 1;
        let v = log_objective(t);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (lo, hi) = (t_min.ln(), t_max.ln());
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid_t = |i: usize| if i == GRID_POINTS - 1 { t_max } else { (lo + step * i as f64).exp() };

    let mut best_t = t_min;
    let mut best_v = f64::INFINITY;
    let mut best_i = 0;
    for i in 0..GRID_POINTS {
        let t = grid_t(i);
        let v = eval(t);
        if v < best_v {
            (best_t, best_v, best_i) = (t, v, i);
        }
    }

    if best_v.is_finite() {
        let mut a = grid_t(best_i.saturating_sub(1)).ln();
        let mut b = grid_t((best_i + 1).min(GRID_POINTS - 1)).ln();
        let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let mut fc = eval(c.exp());
        let mut fd = eval(d.exp());
        for _ in 0..MAX_GOLDEN_STEPS {
            if (b - a) <= tol {
                break;
            }
            if fc <= fd {
                b = d;
                (d, fd) = (c, fc);
                c = b - phi * (b - a);
                fc = eval(c.exp());
            } else {
                a = c;
                (c, fc) = (d, fd);
                d = a + phi * (b - a);
                fd = eval(d.exp());
            }
            for (x, fx) in [(c, fc), (d, fd)] {
                if fx < best_v {
                    (best_t, best_v) = (x.exp().clamp(t_min, t_max), fx);
                }
            }
        }
    }

    let overflow = !best_v.is_finite();
    if overflow {
        best_t = t_max;
    }
    Ok(Minimum {
        t_star: best_t,
        log_value: best_v,
        value: best_v.exp(),
        at_boundary: best_t == t_min || best_t == t_max,
        overflow,
        evaluations,
    })
}

/// Linear-domain convenience wrapper around [`minimize_log_over_t`].
pub fn minimize_over_t<F>(objective: F, t_min: f64, t_max: f64, tol: f64) -> Result<Minimum>
where
    F: Fn(f64) -> f64,
{
    minimize_log_over_t(|t| objective(t).ln(), t_min, t_max, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decreasing_objective_hits_upper_boundary() {
        let m = minimize_over_t(|t| (-t).exp(), 0.01, 50.0, 1e-10).unwrap();
        assert_eq!(m.t_star, 50.0);
        assert!(m.at_boundary);
        assert!((m.value - (-50.0_f64).exp()).abs() <= 1e-12 * (-50.0_f64).exp());
    }

    #[test]
    fn interior_minimum_is_refined() {
        // (t - 2)^2 + 1 has its minimum 1 at t = 2.
        let m = minimize_over_t(|t| (t - 2.0).powi(2) + 1.0, 1e-3, 100.0, 1e-12).unwrap();
        assert!((m.t_star - 2.0).abs() < 1e-6);
        assert!(!m.at_boundary);
    }

    #[test]
    fn all_infinite_is_flagged() {
        let m = minimize_log_over_t(|_| f64::INFINITY, 1.0, 2.0, 1e-9).unwrap();
        assert!(m.overflow && m.at_boundary);
        assert!(minimize_over_t(|t| t, 2.0, 1.0, 1e-9).is_err());
    }
}
