//! Compressed sparse row storage for square complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(dim: usize) -> Self {
        CsrMatrix { dim, indptr: vec![0; dim + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        CsrMatrix {
            dim,
            indptr: (0..=dim).collect(),
            indices: (0..dim).collect(),
            data: vec![C64::new(1.0, 0.0); dim],
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        let mut m = CsrMatrix { dim, indptr, indices, data };
        m.prune();
        m
    }

    pub fn from_dense(dense: &DMatrix<C64>) -> Self {
        assert_eq!(dense.nrows(), dense.ncols());
        let n = dense.nrows();
        let mut triplets = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = dense[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(n, triplets)
    }

    fn prune(&mut self) {
        let zero = C64::new(0.0, 0.0);
        if self.data.iter().all(|&v| v != zero) {
            return;
        }
        let mut indptr = vec![0usize; self.dim + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.dim {
            for p in self.indptr[r]..self.indptr[r + 1] {
                if self.data[p] != zero {
                    indices.push(self.indices[p]);
                    data.push(self.data[p]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |p| (r, self.indices[p], self.data[p]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match row.binary_search(&c) {
            Ok(p) => self.data[self.indptr[r] + p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= s);
        m.prune();
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()).collect())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut triplets = Vec::new();
        for (r, k, a) in self.triplets() {
            for p in other.indptr[k]..other.indptr[k + 1] {
                triplets.push((r, other.indices[p], a * other.data[p]));
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `y += s * A x`.
    pub fn mul_vec_acc(&self, s: C64, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[p] * x[self.indices[p]];
            }
            y[r] += s * acc;
        }
    }

    /// `Y += s * A X` for column-major `X` with `ncols` columns.
    pub fn mul_cols_acc(&self, s: C64, x: &[C64], ncols: usize, y: &mut [C64]) {
        let n = self.dim;
        for c in 0..ncols {
            let (xc, yc) = (&x[c * n..(c + 1) * n], &mut y[c * n..(c + 1) * n]);
            self.mul_vec_acc(s, xc, yc);
        }
    }

    /// `Y += s * X A` for column-major square `X` of the same dimension.
    pub fn left_mul_cols_acc(&self, s: C64, x: &[C64], y: &mut [C64]) {
        let n = self.dim;
        // (X A)[i, c] = sum_r X[i, r] A[r, c]
        for r in 0..n {
            let xr = &x[r * n..(r + 1) * n];
            for p in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[p];
                let a = s * self.data[p];
                let yc = &mut y[c * n..(c + 1) * n];
                for (yi, &xi) in yc.iter_mut().zip(xr) {
                    *yi += a * xi;
                }
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
            .data
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}
