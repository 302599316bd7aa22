//! Block partitions of the variable space and column-block sparse matrices.
//!
//! Every solver access pattern reads "all nonzeros of one column block", so
//! matrices are stored in compressed sparse column (CSC) form and the block
//! structure is a thin view over column ranges.

use std::ops::Range;

use crate::error::{check_len, Result, SmartcdError};

const POWER_MAX_ITERS: usize = 1000;
const POWER_REL_TOL: f64 = 1e-10;
/// Blocks wider than this run power iteration through the sparse columns
/// instead of forming the dense Gram matrix.
const GRAM_MAX_WIDTH: usize = 512;

/// Cache hint for `v[at]`; no-op when out of bounds or off x86-64.
#[inline(always)]
pub(crate) fn prefetch<T>(v: &[T], at: usize) {
    #[cfg(target_arch = "x86_64")]
    if let Some(x) = v.get(at) {
        use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
        // SAFETY: SSE is baseline on x86-64; a prefetch never dereferences.
        unsafe { _mm_prefetch::<_MM_HINT_T0>((x as *const T).cast()) };
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = (v, at);
}

/// Split of `p` coordinates into `n` contiguous blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    dim: usize,
}

impl BlockPartition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(SmartcdError::InvalidPartition("no blocks".into()));
        }
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return Err(SmartcdError::InvalidPartition(format!("block {i} is empty")));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in &sizes {
            offsets.push(acc);
            acc += s;
        }
        Ok(Self {
            sizes,
            offsets,
            dim: acc,
        })
    }

    /// One coordinate per block.
    pub fn scalar(p: usize) -> Result<Self> {
        Self::new(vec![1; p])
    }

    /// A single block spanning all `p` coordinates.
    pub fn single(p: usize) -> Result<Self> {
        Self::new(vec![p])
    }

    /// Blocks of `width` coordinates, the last one possibly shorter.
    pub fn uniform(p: usize, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(SmartcdError::InvalidPartition("zero block width".into()));
        }
        let mut sizes = vec![width; p / width];
        if !p.is_multiple_of(width) {
            sizes.push(p % width);
        }
        Self::new(sizes)
    }

    /// Number of blocks `n`.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Total dimension `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn size(&self, i: usize) -> usize {
        self.sizes[i]
    }

    /// Coordinate range of block `i`.
    pub fn range(&self, i: usize) -> Range<usize> {
        let start = self.offsets[i];
        start..start + self.sizes[i]
    }

    /// Cache hint for the bookkeeping of block `i`.
    #[inline]
    pub(crate) fn prefetch_block(&self, i: usize) {
        prefetch(&self.offsets, i);
        prefetch(&self.sizes, i);
    }

    pub fn check_block(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(SmartcdError::IndexOutOfRange {
                what: "block",
                index: i,
                len: self.len(),
            })
        }
    }

    /// Block that owns coordinate `j`.
    pub fn block_of(&self, j: usize) -> Option<usize> {
        if j >= self.dim {
            return None;
        }
        Some(self.offsets.partition_point(|&o| o <= j) - 1)
    }
}

/// Compressed sparse column matrix with sorted, duplicate-free row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            col_ptr: vec![0; cols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets in any order. Duplicates are
    /// summed and exact zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= rows {
                return Err(SmartcdError::IndexOutOfRange {
                    what: "row",
                    index: r,
                    len: rows,
                });
            }
            if c >= cols {
                return Err(SmartcdError::IndexOutOfRange {
                    what: "column",
                    index: c,
                    len: cols,
                });
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(row, col, _)| (col, row));

        let mut col_ptr = vec![0usize; cols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_idx.push(r);
            values.push(v);
            col_ptr[c + 1] += 1;
            last = Some((r, c));
        }
        for c in 0..cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut m = Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        };
        m.drop_zeros();
        Ok(m)
    }

    /// Builds from a dense row-major matrix.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            check_len("dense row", p, row.len())?;
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(m, p, &triplets)
    }

    fn drop_zeros(&mut self) {
        let mut col_ptr = vec![0usize; self.cols + 1];
        let mut row_idx = Vec::with_capacity(self.row_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for c in 0..self.cols {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                if self.values[k] != 0.0 {
                    row_idx.push(self.row_idx[k]);
                    values.push(self.values[k]);
                }
            }
            col_ptr[c + 1] = row_idx.len();
        }
        self.col_ptr = col_ptr;
        self.row_idx = row_idx;
        self.values = values;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values of column `j`.
    #[inline]
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    /// Cache hint for the start and end of column `j`'s pointer pair.
    #[inline]
    pub(crate) fn prefetch_col_ptr(&self, j: usize) {
        prefetch(&self.col_ptr, j);
        prefetch(&self.col_ptr, j + 1);
    }

    /// Cache hint for the nonzeros of column `j`; reads its pointers.
    #[inline]
    pub(crate) fn prefetch_col(&self, j: usize) {
        let (start, end) = (self.col_ptr[j], self.col_ptr[j + 1]);
        if start < end {
            prefetch(&self.row_idx, start);
            prefetch(&self.row_idx, end - 1);
            prefetch(&self.values, start);
            prefetch(&self.values, end - 1);
        }
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    #[inline]
    pub fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        let (idx, val) = self.col(j);
        idx.iter().zip(val).map(|(&r, &v)| v * y[r]).sum()
    }

    /// `y += alpha * A[:, j]`
    #[inline]
    pub fn col_axpy(&self, j: usize, alpha: f64, y: &mut [f64]) {
        let (idx, val) = self.col(j);
        for (&r, &v) in idx.iter().zip(val) {
            y[r] += alpha * v;
        }
    }

    pub fn col_norm_sq(&self, j: usize) -> f64 {
        self.col(j).1.iter().map(|v| v * v).sum()
    }

    /// `out = A x`
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("matrix-vector operand", self.cols, x.len())?;
        check_len("matrix-vector output", self.rows, out.len())?;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                self.col_axpy(j, xj, out);
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec(x, &mut out)?;
        Ok(out)
    }

    /// `out = Aᵀ y`
    pub fn tr_mul_vec(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("transpose operand", self.rows, y.len())?;
        check_len("transpose output", self.cols, out.len())?;
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.col_dot(j, y);
        }
        Ok(())
    }

    pub fn apply_tr(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cols];
        self.tr_mul_vec(y, &mut out)?;
        Ok(out)
    }

    /// Multiplies column `j` by `scales[j]`.
    pub fn scale_columns(&mut self, scales: &[f64]) -> Result<()> {
        check_len("column scales", self.cols, scales.len())?;
        for (j, &s) in scales.iter().enumerate() {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                self.values[k] *= s;
            }
        }
        self.drop_zeros();
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
        self.drop_zeros();
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for c in 0..self.cols {
            let (idx, val) = self.col(c);
            out.extend(idx.iter().zip(val).map(|(&r, &v)| (r, c, v)));
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    pub fn frobenius_sq_cols(&self, cols: Range<usize>) -> f64 {
        cols.map(|j| self.col_norm_sq(j)).sum()
    }

    /// Dot product of two columns with sorted row indices.
    fn col_col_dot(&self, a: usize, b: usize) -> f64 {
        let (ia, va) = self.col(a);
        let (ib, vb) = self.col(b);
        let (mut x, mut y, mut acc) = (0, 0, 0.0);
        while x < ia.len() && y < ib.len() {
            match ia[x].cmp(&ib[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    acc += va[x] * vb[y];
                    x += 1;
                    y += 1;
                }
            }
        }
        acc
    }

    /// Spectral norm of the column range `cols`.
    pub fn spectral_norm_cols(&self, cols: Range<usize>) -> f64 {
        let width = cols.len();
        if width == 0 {
            return 0.0;
        }
        if width == 1 {
            return self.col_norm_sq(cols.start).sqrt();
        }
        let frob = self.frobenius_sq_cols(cols.clone()).sqrt();
        if frob == 0.0 {
            return 0.0;
        }
        let lambda = if width <= GRAM_MAX_WIDTH {
            let mut gram = vec![0.0; width * width];
            for a in 0..width {
                for b in a..width {
                    let g = self.col_col_dot(cols.start + a, cols.start + b);
                    gram[a * width + b] = g;
                    gram[b * width + a] = g;
                }
            }
            power_iteration(width, |v, out| {
                for (a, o) in out.iter_mut().enumerate() {
                    *o = gram[a * width..(a + 1) * width]
                        .iter()
                        .zip(v)
                        .map(|(g, x)| g * x)
                        .sum();
                }
            })
        } else {
            let mut image = vec![0.0; self.rows];
            power_iteration(width, |v, out| {
                image.iter_mut().for_each(|x| *x = 0.0);
                for (a, &va) in v.iter().enumerate() {
                    self.col_axpy(cols.start + a, va, &mut image);
                }
                for (a, o) in out.iter_mut().enumerate() {
                    *o = self.col_dot(cols.start + a, &image);
                }
            })
        };
        lambda.max(0.0).sqrt().min(frob)
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite operator.
fn power_iteration(dim: usize, mut apply: impl FnMut(&[f64], &mut [f64])) -> f64 {
    // Deterministic start with a nonconstant tail so it is not orthogonal to
    // the leading eigenvector of structured operators.
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    normalize(&mut v);
    let mut w = vec![0.0; dim];
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        apply(&v, &mut w);
        let next: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().zip(&w).for_each(|(a, b)| *a = b / norm);
        let done = (next - lambda).abs() <= POWER_REL_TOL * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    // Final Rayleigh quotient on the converged direction.
    apply(&v, &mut w);
    let rq: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
    rq.max(lambda)
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Sparse matrix with a block partition over its columns and cached
/// per-block operator norms `‖A_i‖`.
#[derive(Debug, Clone)]
pub struct BlockSparseMatrix {
    matrix: CscMatrix,
    partition: BlockPartition,
    block_norms: Vec<f64>,
}

impl BlockSparseMatrix {
    pub fn new(matrix: CscMatrix, partition: BlockPartition) -> Result<Self> {
        check_len("matrix columns vs partition", partition.dim(), matrix.cols())?;
        let block_norms = (0..partition.len())
            .map(|i| matrix.spectral_norm_cols(partition.range(i)))
            .collect();
        Ok(Self {
            matrix,
            partition,
            block_norms,
        })
    }

    /// Same matrix under a different column partition.
    pub fn repartition(&self, partition: BlockPartition) -> Result<Self> {
        Self::new(self.matrix.clone(), partition)
    }

    pub fn matrix(&self) -> &CscMatrix {
        &self.matrix
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    /// `‖A_i‖`, the spectral norm of column block `i`.
    pub fn block_norm(&self, i: usize) -> Result<f64> {
        self.partition.check_block(i)?;
        Ok(self.block_norms[i])
    }

    pub fn block_norms(&self) -> &[f64] {
        &self.block_norms
    }

    pub fn block_nnz(&self, i: usize) -> usize {
        self.partition.range(i).map(|j| self.matrix.col_nnz(j)).sum()
    }

    /// `out = A_iᵀ y`
    #[inline]
    pub fn block_tr_mul(&self, i: usize, y: &[f64], out: &mut [f64]) {
        for (o, j) in out.iter_mut().zip(self.partition.range(i)) {
            *o = self.matrix.col_dot(j, y);
        }
    }

    /// `y += alpha * A_i t`
    #[inline]
    pub fn block_axpy(&self, i: usize, alpha: f64, t: &[f64], y: &mut [f64]) {
        for (&tj, j) in t.iter().zip(self.partition.range(i)) {
            if tj != 0.0 {
                self.matrix.col_axpy(j, alpha * tj, y);
            }
        }
    }
}

/// `Σ_i L_i^α ‖x_i‖²` with identity block metrics.
pub fn weighted_norm_sq(x: &[f64], partition: &BlockPartition, lipschitz: &[f64], alpha: f64) -> Result<f64> {
    check_len("vector", partition.dim(), x.len())?;
    check_len("per-block constants", partition.len(), lipschitz.len())?;
    if let Some(&bad) = lipschitz.iter().find(|&&l| l <= 0.0 || !l.is_finite()) {
        return Err(SmartcdError::InvalidParameter(format!(
            "block constants must be positive, got {bad}"
        )));
    }
    Ok((0..partition.len())
        .map(|i| {
            let sq: f64 = x[partition.range(i)].iter().map(|v| v * v).sum();
            let w = if alpha == 0.0 { 1.0 } else { lipschitz[i].powf(alpha) };
            w * sq
        })
        .sum())
}
