mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use tensor_hw::spectral::{self, INEQUALITY_SLACK};
use tensor_hw::Tensor;

fn to_nalgebra(t: &Tensor) -> DMatrix<num_complex::Complex64> {
    let m = t.unfold();
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m.get(r, c))
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn pair(dims: Vec<usize>) -> impl Strategy<Value = (Tensor, Tensor)> {
    (square_tensor(dims.clone()), square_tensor(dims))
}

fn pd_pair(dims: Vec<usize>) -> impl Strategy<Value = (Tensor, Tensor)> {
    (positive_definite(dims.clone()), positive_definite(dims))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn singular_values_match_reference(t in small_dims().prop_flat_map(square_tensor)) {
        let ours = spectral::singular_values(&t).unwrap();
        let reference = sorted_desc(to_nalgebra(&t).svd(false, false).singular_values.iter().copied().collect());
        for (a, b) in ours.iter().zip(&reference) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b));
        }
    }

    #[test]
    fn eigenvalues_match_reference(h in small_dims().prop_flat_map(hermitian)) {
        let ours = spectral::eigenvalues(&h).unwrap();
        let reference = sorted_desc(to_nalgebra(&h).symmetric_eigen().eigenvalues.iter().copied().collect());
        for (a, b) in ours.iter().zip(&reference) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn svd_reconstructs(t in small_dims().prop_flat_map(square_tensor)) {
        let s = spectral::svd(&t).unwrap();
        prop_assert!(s.reconstruct().max_abs_diff(&t.unfold()).unwrap() <= 1e-9);
    }

    #[test]
    fn ky_fan_triangle_and_majorization((a, b) in small_dims().prop_flat_map(pair)) {
        let sum = a.add(&b).unwrap();
        let size = a.shape().row_size();
        for k in 1..=size {
            let lhs = spectral::ky_fan_norm(&sum, k).unwrap();
            let rhs = spectral::ky_fan_norm(&a, k).unwrap() + spectral::ky_fan_norm(&b, k).unwrap();
            prop_assert!(lhs <= rhs + INEQUALITY_SLACK);
        }
        let sa = spectral::singular_values(&a).unwrap();
        let sb = spectral::singular_values(&b).unwrap();
        let combined: Vec<f64> = sa.iter().zip(&sb).map(|(x, y)| x + y).collect();
        prop_assert!(spectral::weakly_majorizes_with(&combined, &spectral::singular_values(&sum).unwrap(), INEQUALITY_SLACK).unwrap());
    }

    #[test]
    fn power_mean_subadditivity((a, b) in small_dims().prop_flat_map(pd_pair), n in 1u32..=3) {
        for k in 1..=a.shape().row_size() {
            prop_assert!(spectral::power_norm_subadditivity_check(&a, &b, n, k).unwrap());
        }
    }

    #[test]
    fn spectral_mapping(h in small_dims().prop_flat_map(hermitian)) {
        let lambdas = spectral::eigenvalues(&h).unwrap();
        let fs: [fn(f64) -> f64; 3] = [|x| x * x, f64::exp, |x| 1.0 + 2.0 * x + x * x];
        for f in fs {
            let mapped = spectral::eigenvalues(&spectral::spectral_function(&h, f).unwrap()).unwrap();
            let expected = sorted_desc(lambdas.iter().map(|&l| f(l)).collect());
            for (a, b) in mapped.iter().zip(&expected) {
                prop_assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn loewner_order_of_square(h in small_dims().prop_flat_map(hermitian)) {
        // H^2 + I >= 2H because (H - I)^2 >= 0.
        let id = h.identity_like().unwrap();
        let lhs = h.power(2).unwrap().hermitian_part().unwrap().add(&id).unwrap();
        prop_assert!(spectral::loewner_geq(&lhs, &h.scale_real(2.0), 1e-9).unwrap());
    }
}

#[test]
fn two_by_two_eigenvalues_from_characteristic_polynomial() {
    // [[a, b], [b, d]] has eigenvalues (a + d)/2 +- sqrt(((a - d)/2)^2 + b^2).
    let (a, b, d) = (1.5, -0.7, -0.25);
    let h = Tensor::from_real(tensor_hw::tensor::TensorShape::square(&[2]).unwrap(), &[a, b, b, d]).unwrap();
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let ev = spectral::eigenvalues(&h).unwrap();
    assert!((ev[0] - (mid + rad)).abs() < 1e-13 && (ev[1] - (mid - rad)).abs() < 1e-13);
}

#[test]
fn nuclear_norm_of_rank_one() {
    // u v^T with |u| = 3, |v| = 2 has a single singular value 6.
    let t = Tensor::from_real(tensor_hw::tensor::TensorShape::new(vec![2], vec![2]).unwrap(), &[0.0, 0.0, 6.0, 0.0]).unwrap();
    assert!((spectral::ky_fan_norm(&t, 2).unwrap() - 6.0).abs() < 1e-14);
}
