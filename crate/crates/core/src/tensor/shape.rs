use std::fmt;

use crate::error::{Error, Result};

/// Grouped index shape `(I_1..I_M) x (J_1..J_N)`.
///
/// Either group may be empty (a column or row "vector" tensor) but not both.
/// Multi-indices within a group map to a flat position in row-major
/// lexicographic order, last index fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorShape {
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
}

impl TensorShape {
    pub fn new(row_dims: Vec<usize>, col_dims: Vec<usize>) -> Result<Self> {
        if row_dims.is_empty() && col_dims.is_empty() {
            return Err(Error::InvalidShape("both index groups are empty".into()));
        }
        if let Some(d) = row_dims.iter().chain(&col_dims).find(|&&d| d == 0) {
            return Err(Error::InvalidShape(format!("dimension {d} must be >= 1")));
        }
        let checked = |dims: &[usize]| dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match (checked(&row_dims), checked(&col_dims)) {
            (Some(r), Some(c)) if r.checked_mul(c).is_some() => {}
            _ => return Err(Error::InvalidShape("entry count overflows".into())),
        }
        Ok(Self { row_dims, col_dims })
    }

    /// Square shape `dims x dims`.
    pub fn square(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("square shape needs at least one dimension".into()));
        }
        Self::new(dims.to_vec(), dims.to_vec())
    }

    pub fn row_dims(&self) -> &[usize] {
        &self.row_dims
    }

    pub fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    pub fn row_size(&self) -> usize {
        self.row_dims.iter().product()
    }

    pub fn col_size(&self) -> usize {
        self.col_dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.row_size() * self.col_size()
    }

    pub fn is_square(&self) -> bool {
        self.row_dims == self.col_dims
    }

    /// Shape with the two index groups swapped.
    pub fn transposed(&self) -> Self {
        Self { row_dims: self.col_dims.clone(), col_dims: self.row_dims.clone() }
    }

    pub fn row_offset(&self, idx: &[usize]) -> Option<usize> {
        flat_offset(&self.row_dims, idx)
    }

    pub fn col_offset(&self, idx: &[usize]) -> Option<usize> {
        flat_offset(&self.col_dims, idx)
    }
}

fn flat_offset(dims: &[usize], idx: &[usize]) -> Option<usize> {
    if dims.len() != idx.len() {
        return None;
    }
    let mut off = 0;
    for (&d, &i) in dims.iter().zip(idx) {
        if i >= d {
            return None;
        }
        off = off * d + i;
    }
    Some(off)
}

/// Inverse of the flat-offset bijection for one index group.
pub fn multi_index(dims: &[usize], mut offset: usize) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for (slot, &d) in idx.iter_mut().zip(dims).rev() {
        *slot = offset % d;
        offset /= d;
    }
    idx
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}x{:?}", self.row_dims, self.col_dims)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate() {
        assert!(TensorShape::new(vec![], vec![]).is_err());
        assert!(TensorShape::new(vec![2, 0], vec![1]).is_err());
        assert!(TensorShape::new(vec![], vec![3]).is_ok());
    }

    #[test]
    fn offsets_are_row_major() {
        let s = TensorShape::new(vec![2, 3], vec![4]).unwrap();
        assert_eq!(s.row_offset(&[1, 2]), Some(5));
        assert_eq!(s.row_offset(&[2, 0]), None);
        assert_eq!(multi_index(&[2, 3], 5), vec![1, 2]);
        for off in 0..6 {
            assert_eq!(s.row_offset(&multi_index(&[2, 3], off)), Some(off));
        }
    }
}
