//! The six-term moment statistic of a random tensor.
//!
//! With `x_ij` the centred entries of the unfolded real part and `y_ij` those
//! of the unfolded imaginary part,
//! `Xi = max_i (sum_j E x_ij^2)^(1/2) + max_j (sum_i E x_ij^2)^(1/2) + (sum E x_ij^4)^(1/4)`
//! plus the same three terms for `y`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{EigenLaw, EnsembleSpec, Family};
use super::seeds::{SeedPolicy, Stream, StreamRng};
use crate::error::{Error, Result};
use crate::{Matrix, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiStatistic {
    pub xi: f64,
    /// `[row_x, col_x, quartic_x, row_y, col_y, quartic_y]`.
    pub components: [f64; 6],
}

impl XiStatistic {
    fn from_components(components: [f64; 6]) -> Self {
        Self { xi: components.iter().sum(), components }
    }

    pub fn zero() -> Self {
        Self::from_components([0.0; 6])
    }
}

/// Monte Carlo estimate together with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiEstimate {
    pub statistic: XiStatistic,
    pub std_error: f64,
    pub trials: usize,
}

/// Per-entry second and fourth central moments of the real and imaginary parts.
#[derive(Debug, Clone)]
struct EntryMoments {
    rows: usize,
    cols: usize,
    x2: Vec<f64>,
    x4: Vec<f64>,
    y2: Vec<f64>,
    y4: Vec<f64>,
}

impl EntryMoments {
    fn statistic(&self) -> XiStatistic {
        let half = |m: &[f64]| -> [f64; 3] {
            let row = (0..self.rows)
                .map(|r| (0..self.cols).map(|c| m[r * self.cols + c]).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            let col = (0..self.cols)
                .map(|c| (0..self.rows).map(|r| m[r * self.cols + c]).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            [row, col, 0.0]
        };
        let [rx, cx, _] = half(&self.x2);
        let [ry, cy, _] = half(&self.y2);
        let qx = self.x4.iter().sum::<f64>().max(0.0).powf(0.25);
        let qy = self.y4.iter().sum::<f64>().max(0.0).powf(0.25);
        XiStatistic::from_components([rx, cx, qx, ry, cy, qy])
    }
}

fn empirical_moments(samples: &[Tensor]) -> Result<EntryMoments> {
    let first = samples.first().ok_or_else(|| Error::InvalidParameter("need at least one sample".into()))?;
    let shape = first.shape().clone();
    let len = shape.len();
    if let Some(bad) = samples.iter().find(|s| s.shape() != &shape) {
        return Err(Error::ShapeMismatch { left: shape.to_string(), right: bad.shape().to_string() });
    }
    let n = samples.len() as f64;
    let mut mean_re = vec![0.0; len];
    let mut mean_im = vec![0.0; len];
    for s in samples {
        for (i, z) in s.entries().iter().enumerate() {
            mean_re[i] += z.re;
            mean_im[i] += z.im;
        }
    }
    mean_re.iter_mut().chain(mean_im.iter_mut()).for_each(|m| *m /= n);
    let mut out = EntryMoments {
        rows: shape.row_size(),
        cols: shape.col_size(),
        x2: vec![0.0; len],
        x4: vec![0.0; len],
        y2: vec![0.0; len],
        y4: vec![0.0; len],
    };
    for s in samples {
        for (i, z) in s.entries().iter().enumerate() {
            let dx = z.re - mean_re[i];
            let dy = z.im - mean_im[i];
            out.x2[i] += dx * dx;
            out.x4[i] += dx.powi(4);
            out.y2[i] += dy * dy;
            out.y4[i] += dy.powi(4);
        }
    }
    for v in [&mut out.x2, &mut out.x4, &mut out.y2, &mut out.y4] {
        v.iter_mut().for_each(|m| *m /= n);
    }
    Ok(out)
}

/// Plug-in statistic from an i.i.d. sample set (moments centred at the
/// sample mean).
pub fn xi_from_samples(samples: &[Tensor]) -> Result<XiStatistic> {
    Ok(empirical_moments(samples)?.statistic())
}

const BATCHES: usize = 20;

/// Monte Carlo statistic of `sample`, one substream of `stream` per trial.
/// The standard error comes from the spread of the statistic over 20 batches.
pub fn xi_monte_carlo<F>(sample: F, trials: usize, seeds: &SeedPolicy, stream: Stream) -> Result<XiEstimate>
where
    F: Fn(&mut StreamRng) -> Tensor + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("xi needs trials >= 1".into()));
    }
    let samples: Vec<Tensor> = (0..trials as u64)
        .into_par_iter()
        .map(|i| sample(&mut seeds.rng(stream, i)))
        .collect();
    let statistic = xi_from_samples(&samples)?;
    let std_error = if trials >= 2 * BATCHES {
        let size = trials / BATCHES;
        let batch: Vec<f64> = samples
            .chunks_exact(size)
            .take(BATCHES)
            .map(|c| xi_from_samples(c).map(|s| s.xi))
            .collect::<Result<_>>()?;
        let mean = batch.iter().sum::<f64>() / BATCHES as f64;
        let var = batch.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        // A batch of `size` draws has variance about `trials / size` times the full one.
        (var * size as f64 / trials as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(XiEstimate { statistic, std_error, trials })
}

/// Exact statistic of `basis * diag(h) * basis^H` where the coordinates
/// `h_r = scale_r * (lambda_r - shift)^power` are independent and the
/// `lambda_r` follow the ensemble's eigenvalue law. With `shared` set, one
/// eigenvalue drives every coordinate (the scalar family).
pub fn xi_closed_form_diagonal(
    spec: &EnsembleSpec,
    basis: &Matrix,
    scale: &[f64],
    power: i32,
    shared: bool,
) -> Result<XiStatistic> {
    let size = basis.rows();
    if basis.cols() != size || scale.len() != size {
        return Err(Error::LengthMismatch(scale.len(), size));
    }
    let shift = if spec.mean_zero { spec.eigen_mean() } else { 0.0 };
    let (var, mu4) = central_moments_of_power(spec, shift, power);
    let mut m = EntryMoments {
        rows: size,
        cols: size,
        x2: vec![0.0; size * size],
        x4: vec![0.0; size * size],
        y2: vec![0.0; size * size],
        y4: vec![0.0; size * size],
    };
    for a in 0..size {
        for b in 0..size {
            let coeffs: Vec<(f64, f64)> = (0..size)
                .map(|r| {
                    let z = basis.get(a, r) * basis.get(b, r).conj() * scale[r];
                    (z.re, z.im)
                })
                .collect();
            let moments = |c: &mut dyn Iterator<Item = f64>| -> (f64, f64) {
                let c: Vec<f64> = c.collect();
                if shared {
                    let s: f64 = c.iter().sum();
                    (s * s * var, s.powi(4) * mu4)
                } else {
                    let s2: f64 = c.iter().map(|v| v * v).sum();
                    let s4: f64 = c.iter().map(|v| v.powi(4)).sum();
                    (s2 * var, s4 * (mu4 - 3.0 * var * var) + 3.0 * (s2 * var).powi(2))
                }
            };
            let idx = a * size + b;
            (m.x2[idx], m.x4[idx]) = moments(&mut coeffs.iter().map(|c| c.0));
            (m.y2[idx], m.y4[idx]) = moments(&mut coeffs.iter().map(|c| c.1));
        }
    }
    Ok(m.statistic())
}

/// Closed-form statistic of one draw of a commuting or scalar ensemble.
pub fn xi_closed_form(spec: &EnsembleSpec, basis: &Matrix) -> Result<XiStatistic> {
    let shared = match spec.family {
        Family::Commuting => false,
        Family::Scalar => true,
        Family::GenericHermitian => {
            return Err(Error::InvalidParameter("no closed form for the generic Hermitian family".into()))
        }
    };
    xi_closed_form_diagonal(spec, basis, &vec![1.0; basis.rows()], 1, shared)
}

/// Variance and fourth central moment of `(lambda - shift)^power`.
fn central_moments_of_power(spec: &EnsembleSpec, shift: f64, power: i32) -> (f64, f64) {
    let (a, b) = (spec.eig_low - shift, spec.eig_high - shift);
    let raw = |q: i32| -> f64 {
        match spec.law {
            EigenLaw::TwoPoint => 0.5 * (a.powi(q) + b.powi(q)),
            EigenLaw::Uniform if b - a <= f64::EPSILON * (1.0 + a.abs()) => a.powi(q),
            EigenLaw::Uniform => (b.powi(q + 1) - a.powi(q + 1)) / (f64::from(q + 1) * (b - a)),
        }
    };
    let m1 = raw(power);
    let m2 = raw(2 * power);
    let m3 = raw(3 * power);
    let m4 = raw(4 * power);
    let var = (m2 - m1 * m1).max(0.0);
    let mu4 = (m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.powi(4)).max(0.0);
    (var, mu4)
}
