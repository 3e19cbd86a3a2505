mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use tensor_hw::bounds::{BoundInputs, TSearch, TermStats};
use tensor_hw::ensembles::{EigenLaw, Ensemble, EnsembleSpec, Family, SeedPolicy, Stream};
use tensor_hw::quadform::{
    check_assumptions, poly_apply, poly_eval, quadratic_form, theta_split, BlockMatrix, BlockVector, ThetaPolicy,
};
use tensor_hw::{spectral, Matrix, Tensor};

/// `[X_1 .. X_n] * A * [X_1; ..; X_n]` on assembled block matrices.
fn assembled(x: &[Tensor], a: &[Tensor], n: usize) -> Matrix {
    let d = x[0].shape().row_size();
    let row = Matrix::new(d, n * d, {
        let mut e = vec![Complex64::new(0.0, 0.0); d * n * d];
        for (b, xb) in x.iter().enumerate() {
            let u = xb.unfold();
            for r in 0..d {
                for c in 0..d {
                    e[r * n * d + b * d + c] = u.get(r, c);
                }
            }
        }
        e
    })
    .unwrap();
    let mut big = Matrix::zeros(n * d, n * d);
    for i in 0..n {
        for j in 0..n {
            let u = a[i * n + j].unfold();
            for r in 0..d {
                for c in 0..d {
                    big.set(i * d + r, j * d + c, u.get(r, c));
                }
            }
        }
    }
    row.matmul(&big).unwrap().matmul(&row.adjoint()).unwrap()
}

fn instance() -> impl Strategy<Value = (Vec<Tensor>, Vec<Tensor>, usize)> {
    (1usize..=4, prop::collection::vec(1usize..=2, 1..=2)).prop_flat_map(|(n, dims)| {
        (
            prop::collection::vec(hermitian(dims.clone()), n),
            prop::collection::vec(hermitian(dims), n * n),
            Just(n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn block_form_matches_assembled_product((x, a, n) in instance()) {
        let q = quadratic_form(&BlockVector::new(x.clone()).unwrap(), &BlockMatrix::new(n, a.clone()).unwrap()).unwrap();
        let oracle = assembled(&x, &a, n);
        prop_assert!(q.total.unfold().max_abs_diff(&oracle).unwrap() <= 1e-9 * (1.0 + oracle.max_abs()));
        prop_assert!(q.relative_residual() <= 1e-9);
        prop_assert_eq!(q.coupling_terms.len(), n * n - n);
    }

    #[test]
    fn polynomial_commutes_with_spectrum(h in small_dims().prop_flat_map(hermitian), c in prop::collection::vec(-2.0..2.0f64, 1..=4)) {
        let direct = poly_apply(&c, &h).unwrap();
        let mapped = spectral::spectral_function(&h, |l| poly_eval(&c, l)).unwrap();
        prop_assert!(direct.max_abs_diff(&mapped).unwrap() <= 1e-8 * (1.0 + mapped.max_abs()));
    }

    #[test]
    fn theta_split_exhausts_budget(theta in 0.5..50.0f64, c in prop::collection::vec(0.0..3.0f64, 2..=5), k in 1usize..=3) {
        let mut c = c;
        c[0] = 0.0;
        if c[1..].iter().all(|&v| v == 0.0) { c[1] = 1.0; }
        for policy in [ThetaPolicy::Equal, ThetaPolicy::Proportional] {
            let s = theta_split(theta, &c, k, policy).unwrap();
            prop_assert!((s.iter().sum::<f64>() - theta).abs() <= 1e-12 * theta);
            prop_assert!(s.iter().zip(&c[1..]).all(|(t, a)| (*a == 0.0) == (*t == 0.0)));
        }
    }
}

#[test]
fn scalar_quadratic_form_by_hand() {
    // x = (1, 2), A = [[1, 3], [3, 2]]: x^T A x = 1 + 12 + 8 = 21.
    let s = |v: f64| Tensor::from_real(tensor_hw::tensor::TensorShape::square(&[1]).unwrap(), &[v]).unwrap();
    let q = quadratic_form(
        &BlockVector::new(vec![s(1.0), s(2.0)]).unwrap(),
        &BlockMatrix::new(2, vec![s(1.0), s(3.0), s(3.0), s(2.0)]).unwrap(),
    )
    .unwrap();
    assert_eq!(q.total.entries()[0].re, 21.0);
    assert_eq!(q.diagonal_sum().entries()[0].re, 9.0);
    assert_eq!(q.coupling_pairs, vec![(0, 1), (1, 0)]);
}

fn inputs(n: usize, r_d: f64, r_c: f64, k_bound: f64) -> BoundInputs {
    BoundInputs {
        n,
        a: vec![0.0, 1.0],
        k: 1,
        theta_total: 1.0,
        theta: vec![1.0],
        r_d,
        r_c,
        k_table: vec![vec![k_bound]; n],
        c_cher: 1.0,
        d2: 8.0,
        diag_stats: vec![TermStats::default(); n],
        coupling_stats: vec![vec![TermStats::default(); n - 1]; n],
        search: TSearch::default(),
    }
}

#[test]
fn scaled_identity_meets_exact_constants() {
    // X_i = c I, A = all-ones identities: D_i = c^2 I, A_il X_l = c I.
    let c = 0.7;
    let id = Tensor::identity(&[2]).unwrap();
    let x = BlockVector::new(vec![id.scale_real(c); 2]).unwrap();
    let a = BlockMatrix::new(2, vec![id.clone(); 4]).unwrap();
    let report = check_assumptions(&x, &a, &inputs(2, c * c, c, c), &[0.1, 1.0], &[1]).unwrap();
    assert!(report.all_ok(), "{:?}", report.failures());
    assert!((report.r_d_observed - c * c).abs() < 1e-12);
    assert!((report.r_c_observed - c).abs() < 1e-12);
    let tight = check_assumptions(&x, &a, &inputs(2, 0.9 * c * c, c, c), &[0.1], &[1]).unwrap();
    assert!(!tight.r_d_ok && tight.failures() == vec!["R_d bound"]);
}

#[test]
fn commuting_family_passes_and_generic_fails() {
    let spec = |family| EnsembleSpec {
        dims: vec![2],
        n: 3,
        family,
        eig_low: 0.1,
        eig_high: 1.0,
        law: EigenLaw::Uniform,
        shared_unitary_seed: 4,
        mean_zero: false,
    };
    let seeds = SeedPolicy::new(8);
    for (family, expect) in [(Family::Commuting, true), (Family::GenericHermitian, false)] {
        let e = Ensemble::new(spec(family)).unwrap();
        let basis = e.shared_basis().clone();
        let w = vec![vec![vec![0.3, 0.2]; 3]; 3];
        let a = BlockMatrix::from_shared_basis(&basis, e.shape(), &w).unwrap();
        let x = BlockVector::new(e.sample_sequence(&mut seeds.rng(Stream::Pilot, 0))).unwrap();
        let r = check_assumptions(&x, &a, &inputs(3, 10.0, 10.0, 10.0), &[0.01, 0.5, 5.0], &[1, 2]).unwrap();
        assert_eq!(r.commute_ok, expect, "{family:?}: residual {}", r.commute_residual);
    }
}
