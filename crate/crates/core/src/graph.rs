//! Sparse graph storage and the shifted symmetric Laplacian.
//!
//! Everything here is immutable once built. [`ShiftedLaplacian`] is the
//! operator all polynomial filters are evaluated on; its spectrum lies in
//! `[-1, 1]`.

use std::collections::BTreeSet;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};

use crate::error::{AopfError, Result};

/// Square sparse matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from raw CSR arrays, checking structural invariants.
    pub fn from_parts(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n + 1 || row_offsets[0] != 0 {
            return Err(AopfError::shape("csr", "row_offsets must have n+1 entries starting at 0"));
        }
        if row_offsets[n] != col_indices.len() || col_indices.len() != values.len() {
            return Err(AopfError::shape("csr", "row_offsets[n], col_indices and values disagree"));
        }
        for i in 0..n {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(AopfError::shape("csr", format!("row_offsets decrease at row {i}")));
            }
            let row = &col_indices[lo..hi];
            for (idx, &c) in row.iter().enumerate() {
                if c >= n {
                    return Err(AopfError::IndexOutOfRange { index: c, len: n });
                }
                if idx > 0 && row[idx - 1] >= c {
                    return Err(AopfError::shape(
                        "csr",
                        format!("columns of row {i} not strictly increasing"),
                    ));
                }
            }
        }
        Ok(Self {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            row_offsets: vec![0; n + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(col, value)` over the stored entries of one row.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        self.col_indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        self.col_indices[lo..hi]
            .binary_search(&j)
            .ok()
            .map(|p| self.values[lo + p])
    }

    /// First `(i, j)` whose mirror entry is missing or carries a different value.
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if self.get(j, i) != Some(v) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[[i, j]] = v;
            }
        }
        out
    }

    /// `self · x` for a dense block `x` with `dim()` rows.
    pub fn mul_dense(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.n {
            return Err(AopfError::shape(
                "spmm",
                format!("matrix is {}x{}, features have {} rows", self.n, self.n, x.nrows()),
            ));
        }
        let mut out = Array2::zeros((self.n, x.ncols()));
        for i in 0..self.n {
            let mut dst = out.row_mut(i);
            for (j, v) in self.row(i) {
                dst.scaled_add(v, &x.row(j));
            }
        }
        Ok(out)
    }

    /// `selfᵀ · x`; used for the adjoint in reverse mode.
    pub fn mul_dense_transposed(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.n {
            return Err(AopfError::shape(
                "spmm_t",
                format!("matrix is {}x{}, block has {} rows", self.n, self.n, x.nrows()),
            ));
        }
        let mut out = Array2::zeros((self.n, x.ncols()));
        for i in 0..self.n {
            let src = x.row(i);
            for (j, v) in self.row(i) {
                out.row_mut(j).scaled_add(v, &src);
            }
        }
        Ok(out)
    }
}

/// Undirected, unweighted simple graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    adjacency: CsrMatrix,
}

impl SparseGraph {
    /// Builds a graph from `(src, dst)` pairs. Duplicates collapse to one
    /// unit-weight edge; self-loops are rejected.
    pub fn from_edge_list(
        edges: &[(usize, usize)],
        num_nodes: usize,
        symmetrize: bool,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(s, d) in edges {
            for idx in [s, d] {
                if idx >= num_nodes {
                    return Err(AopfError::IndexOutOfRange {
                        index: idx,
                        len: num_nodes,
                    });
                }
            }
            if s == d {
                return Err(AopfError::SelfLoopInInput(s));
            }
            set.insert((s, d));
            if symmetrize {
                set.insert((d, s));
            }
        }
        let mut row_offsets = vec![0usize; num_nodes + 1];
        for &(s, _) in &set {
            row_offsets[s + 1] += 1;
        }
        for i in 0..num_nodes {
            row_offsets[i + 1] += row_offsets[i];
        }
        // BTreeSet iterates in (row, col) order, which is exactly CSR order.
        let col_indices: Vec<usize> = set.iter().map(|&(_, d)| d).collect();
        let values = vec![1.0; col_indices.len()];
        Ok(Self {
            adjacency: CsrMatrix {
                n: num_nodes,
                row_offsets,
                col_indices,
                values,
            },
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.n
    }

    /// Number of stored directed entries (twice the undirected edge count
    /// for a symmetric graph).
    pub fn num_entries(&self) -> usize {
        self.adjacency.nnz()
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency.row_offsets[i + 1] - self.adjacency.row_offsets[i]
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency.asymmetry().is_none()
    }
}

/// `L_sym - I = -D̃^{-1/2} Ã D̃^{-1/2}`, spectrum in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedLaplacian {
    matrix: Arc<CsrMatrix>,
}

impl ShiftedLaplacian {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Shared handle, as consumed by tape operations.
    pub fn shared(&self) -> &Arc<CsrMatrix> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.n
    }

    pub fn to_dense(&self) -> Array2<f64> {
        self.matrix.to_dense()
    }

    /// Wraps an arbitrary symmetric matrix as a propagation operator. Used
    /// by tests and examples that need operators other than a graph
    /// Laplacian (for instance the zero matrix).
    pub fn from_matrix(matrix: CsrMatrix) -> Result<Self> {
        if let Some((row, col)) = matrix.asymmetry() {
            return Err(AopfError::AsymmetricInput { row, col });
        }
        Ok(Self {
            matrix: Arc::new(matrix),
        })
    }
}

/// Builds the shifted Laplacian of `g`, optionally adding self-loops first.
/// Nodes with zero degree (and no self-loop) get all-zero rows and columns.
pub fn shifted_laplacian(g: &SparseGraph, add_self_loops: bool) -> Result<ShiftedLaplacian> {
    let a = &g.adjacency;
    if let Some((row, col)) = a.asymmetry() {
        return Err(AopfError::AsymmetricInput { row, col });
    }
    let n = a.n;
    let degree: Vec<f64> = (0..n)
        .map(|i| a.row(i).map(|(_, v)| v).sum::<f64>() + if add_self_loops { 1.0 } else { 0.0 })
        .collect();
    // -w / sqrt(d_i d_j); the product commutes, so (i,j) and (j,i) agree
    // bitwise. Zero-degree nodes never appear here.
    let entry = |i: usize, j: usize, w: f64| -w / (degree[i] * degree[j]).sqrt();

    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(a.nnz() + if add_self_loops { n } else { 0 });
    let mut values = Vec::with_capacity(col_indices.capacity());
    row_offsets.push(0);
    for i in 0..n {
        let mut diag_pending = add_self_loops;
        for (j, w) in a.row(i) {
            if diag_pending && j > i {
                col_indices.push(i);
                values.push(entry(i, i, 1.0));
                diag_pending = false;
            }
            col_indices.push(j);
            values.push(entry(i, j, w));
        }
        if diag_pending {
            col_indices.push(i);
            values.push(entry(i, i, 1.0));
        }
        row_offsets.push(col_indices.len());
    }
    Ok(ShiftedLaplacian {
        matrix: Arc::new(CsrMatrix {
            n,
            row_offsets,
            col_indices,
            values,
        }),
    })
}
