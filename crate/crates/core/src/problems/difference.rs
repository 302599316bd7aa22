use crate::blocks::CscMatrix;
use crate::error::{Result, SmartcdError};

/// Shape of a signal stored in row-major order (last axis fastest).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridDims {
    D1(usize),
    D2(usize, usize),
    D3(usize, usize, usize),
}

impl GridDims {
    pub fn shape(&self) -> Vec<usize> {
        match *self {
            GridDims::D1(a) => vec![a],
            GridDims::D2(a, b) => vec![a, b],
            GridDims::D3(a, b, c) => vec![a, b, c],
        }
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Anisotropic forward-difference operator: one row `x[idx + stride] − x[idx]`
/// per interior pair along each axis, axes in order.
pub fn difference_operator(dims: GridDims) -> Result<CscMatrix> {
    let shape = dims.shape();
    if shape.contains(&0) {
        return Err(SmartcdError::InvalidParameter(format!("empty grid {shape:?}")));
    }
    let total: usize = shape.iter().product();
    let mut strides = vec![1usize; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    let mut triplets = Vec::new();
    let mut row = 0;
    for (&extent, &stride) in shape.iter().zip(&strides) {
        for idx in 0..total {
            let coord = (idx / stride) % extent;
            if coord + 1 < extent {
                triplets.push((row, idx, -1.0));
                triplets.push((row, idx + stride, 1.0));
                row += 1;
            }
        }
    }
    CscMatrix::from_triplets(row, total, &triplets)
}
