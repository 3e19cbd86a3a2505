#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use tensor_hw::tensor::{DenseTensor, TensorShape};
use tensor_hw::Tensor;

pub fn entry() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

pub fn dims_group() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=2)
}

pub fn tensor_of(shape: TensorShape) -> impl Strategy<Value = Tensor> {
    prop::collection::vec(entry(), shape.len()).prop_map(move |e| DenseTensor::new(shape.clone(), e).unwrap())
}

/// Square tensor over `dims`.
pub fn square_tensor(dims: Vec<usize>) -> impl Strategy<Value = Tensor> {
    tensor_of(TensorShape::square(&dims).unwrap())
}

pub fn hermitian(dims: Vec<usize>) -> impl Strategy<Value = Tensor> {
    square_tensor(dims).prop_map(|t| t.hermitian_part().unwrap())
}

/// `B B^H + eps I`, positive definite.
pub fn positive_definite(dims: Vec<usize>) -> impl Strategy<Value = Tensor> {
    square_tensor(dims).prop_map(|b| {
        let g = b.einstein_product(&b.conjugate_transpose()).unwrap().hermitian_part().unwrap();
        g.add(&g.identity_like().unwrap().scale_real(0.1)).unwrap()
    })
}

pub fn small_dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=2).prop_filter("size", |d| d.iter().product::<usize>() <= 6)
}
