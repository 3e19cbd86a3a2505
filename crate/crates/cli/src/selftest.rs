//! Seeded invariant suite over the tensor, spectral and quadratic-form layers.

use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use tensor_hw::ensembles::{sample_hermitian, SeedPolicy, Stream, StreamRng};
use tensor_hw::quadform::{quadratic_form, BlockMatrix, BlockVector};
use tensor_hw::spectral::{self, INEQUALITY_SLACK};
use tensor_hw::tensor::fixture::{parse_fixture, read_fixture, to_fixture_string};
use tensor_hw::tensor::{DenseTensor, TensorShape};
use tensor_hw::{Cx, Result, Tensor};

const CASES: u64 = 100;

/// Outcome of one invariant over all its cases.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantResult {
    pub name: &'static str,
    pub cases: u64,
    /// Worst observed error or slack use.
    pub worst: f64,
    pub passed: bool,
}

impl InvariantResult {
    pub fn line(&self) -> String {
        let tag = if self.passed { "ok  " } else { "FAIL" };
        format!("{tag} {:<28} cases={:<4} worst={:.6e}", self.name, self.cases, self.worst)
    }
}

#[derive(Debug, Clone)]
pub struct SelftestOutcome {
    pub results: Vec<InvariantResult>,
    pub lines: Vec<String>,
    pub digest: String,
}

impl SelftestOutcome {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

fn dims_for(case: u64) -> Vec<usize> {
    const SHAPES: [&[usize]; 5] = [&[1], &[2], &[3], &[2, 2], &[1, 3]];
    SHAPES[case as usize % SHAPES.len()].to_vec()
}

/// General square tensor `H_1 + i H_2`.
fn general(shape: &TensorShape, rng: &mut StreamRng) -> Result<Tensor> {
    let h1 = sample_hermitian(shape, rng)?;
    let h2 = sample_hermitian(shape, rng)?;
    h1.add(&h2.scale(Cx::new(0.0, 1.0)))
}

fn positive_definite(shape: &TensorShape, rng: &mut StreamRng) -> Result<Tensor> {
    let b = general(shape, rng)?;
    let g = b.einstein_product(&b.conjugate_transpose())?.hermitian_part()?;
    g.add(&g.identity_like()?.scale_real(0.1))
}

fn run_invariant<F>(name: &'static str, seeds: &SeedPolicy, stream: u32, tol: f64, check: F) -> Result<InvariantResult>
where
    F: Fn(&TensorShape, &mut StreamRng) -> Result<f64> + Sync,
{
    let errs = (0..CASES)
        .into_par_iter()
        .map(|c| {
            let shape = TensorShape::square(&dims_for(c))?;
            check(&shape, &mut seeds.rng(Stream::Custom(stream), c))
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Ok(InvariantResult { name, cases: CASES, worst, passed: worst <= tol })
}

fn invariants(seeds: &SeedPolicy) -> Result<Vec<InvariantResult>> {
    Ok(vec![
        run_invariant("unfolding homomorphism", seeds, 100, 1e-10, |s, rng| {
            let (a, b) = (general(s, rng)?, general(s, rng)?);
            let lhs = a.einstein_product(&b)?.unfold();
            Ok(lhs.max_abs_diff(&a.unfold().matmul(&b.unfold())?).unwrap_or(f64::INFINITY))
        })?,
        run_invariant("fold round trip", seeds, 101, 0.0, |s, rng| {
            let a = general(s, rng)?;
            DenseTensor::fold(a.unfold(), s.clone())?.max_abs_diff(&a)
        })?,
        run_invariant("svd reconstruction", seeds, 102, 1e-9, |s, rng| {
            let a = general(s, rng)?;
            Ok(spectral::svd(&a)?.reconstruct().max_abs_diff(&a.unfold()).unwrap_or(f64::INFINITY))
        })?,
        run_invariant("ky fan triangle", seeds, 103, INEQUALITY_SLACK, |s, rng| {
            let (a, b) = (general(s, rng)?, general(s, rng)?);
            let mut worst = 0.0_f64;
            for k in 1..=s.row_size() {
                let gap = spectral::ky_fan_norm(&a.add(&b)?, k)?
                    - spectral::ky_fan_norm(&a, k)?
                    - spectral::ky_fan_norm(&b, k)?;
                worst = worst.max(gap);
            }
            Ok(worst)
        })?,
        run_invariant("weak majorization", seeds, 104, 0.0, |s, rng| {
            let (a, b) = (general(s, rng)?, general(s, rng)?);
            let sum: Vec<f64> = spectral::singular_values(&a)?
                .iter()
                .zip(spectral::singular_values(&b)?)
                .map(|(x, y)| x + y)
                .collect();
            let ok = spectral::weakly_majorizes_with(&sum, &spectral::singular_values(&a.add(&b)?)?, INEQUALITY_SLACK)?;
            Ok(if ok { 0.0 } else { 1.0 })
        })?,
        run_invariant("spectral mapping", seeds, 105, 1e-8, |s, rng| {
            let h = sample_hermitian(s, rng)?;
            let lambdas = spectral::eigenvalues(&h)?;
            let fs: [fn(f64) -> f64; 3] = [|x| x * x, f64::exp, |x| 1.0 + 2.0 * x + x * x];
            let mut worst = 0.0_f64;
            for f in fs {
                let mapped = spectral::eigenvalues(&spectral::spectral_function(&h, f)?)?;
                let mut expected: Vec<f64> = lambdas.iter().map(|&l| f(l)).collect();
                expected.sort_by(|a, b| b.total_cmp(a));
                for (x, y) in mapped.iter().zip(&expected) {
                    worst = worst.max((x - y).abs() / (1.0 + y.abs()));
                }
            }
            Ok(worst)
        })?,
        run_invariant("power mean subadditivity", seeds, 106, 0.0, |s, rng| {
            let (a, b) = (positive_definite(s, rng)?, positive_definite(s, rng)?);
            let mut bad = 0.0;
            for n in 1..=3 {
                for k in 1..=s.row_size() {
                    if !spectral::power_norm_subadditivity_check(&a, &b, n, k)? {
                        bad = 1.0;
                    }
                }
            }
            Ok(bad)
        })?,
        run_invariant("quadratic decomposition", seeds, 107, 1e-9, |s, rng| {
            let n = 1 + (s.len() % 4);
            let x = (0..n).map(|_| sample_hermitian(s, rng)).collect::<Result<Vec<_>>>()?;
            let a = (0..n * n).map(|_| sample_hermitian(s, rng)).collect::<Result<Vec<_>>>()?;
            Ok(quadratic_form(&BlockVector::new(x)?, &BlockMatrix::new(n, a)?)?.relative_residual())
        })?,
        run_invariant("fixture round trip", seeds, 108, 0.0, |s, rng| {
            let a = general(s, rng)?;
            parse_fixture::<f64>(&to_fixture_string(&a))?.max_abs_diff(&a)
        })?,
    ])
}

/// Run the suite; an optional fixture is parsed first and must be valid.
pub fn selftest(seed: u64, fixture: Option<&Path>) -> std::result::Result<SelftestOutcome, crate::CliError> {
    let mut lines = Vec::new();
    if let Some(path) = fixture {
        let t = read_fixture::<f64>(path).map_err(|e| crate::CliError::Config(format!("fixture {}: {e}", path.display())))?;
        lines.push(format!("ok   fixture {} shape {}", path.display(), t.shape()));
    }
    let results = invariants(&SeedPolicy::new(seed))?;
    lines.extend(results.iter().map(InvariantResult::line));
    let mut h = Sha256::new();
    for l in &lines {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    let digest = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok(SelftestOutcome { results, lines, digest })
}
