/// Square matrix in compressed-row layout with a fixed sparsity pattern.
///
/// Column indices are strictly increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a zero matrix from per-row column lists (duplicates allowed).
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut cols in rows {
            cols.sort_unstable();
            cols.dedup();
            debug_assert!(cols.last().map_or(true, |&c| c < n));
            col_idx.extend_from_slice(&cols);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    /// Builds a matrix from a dense row-major array, keeping structural nonzeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let pattern = rows.iter().map(|r| (0..n).filter(|&j| r[j] != 0.0).collect()).collect();
        let mut m = Self::from_rows(n, pattern);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    m.add(i, j, v);
                }
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_rows(n, (0..n).map(|i| vec![i]).collect());
        m.values.fill(1.0);
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Storage position of `(row, col)` if it is in the pattern.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[lo..hi].binary_search(&col).ok().map(|k| lo + k)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |k| self.values[k])
    }

    /// Adds to an entry of the pattern.
    ///
    /// Panics if `(row, col)` is not structurally present.
    #[inline]
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let k = self
            .position(row, col)
            .unwrap_or_else(|| panic!("entry ({row}, {col}) outside sparsity pattern"));
        self.values[k] += v;
    }

    pub fn clear(&mut self) {
        self.values.fill(0.0);
    }

    /// Replaces a row by the corresponding row of the identity.
    pub fn set_identity_row(&mut self, row: usize) {
        for k in self.row_ptr[row]..self.row_ptr[row + 1] {
            self.values[k] = if self.col_idx[k] == row { 1.0 } else { 0.0 };
        }
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[row]..self.row_ptr[row + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn same_pattern(&self, other: &SparseMatrix) -> bool {
        self.n == other.n && self.row_ptr == other.row_ptr && self.col_idx == other.col_idx
    }

    /// `self += a * other` for matrices sharing one pattern.
    pub fn axpy(&mut self, a: f64, other: &SparseMatrix) {
        assert!(self.same_pattern(other), "axpy requires identical sparsity patterns");
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - Aᵀ|` over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_is_sorted_and_unique() {
        let m = SparseMatrix::from_rows(3, vec![vec![2, 0, 2], vec![1], vec![0, 2, 1]]);
        assert_eq!(m.col_idx(), &[0, 2, 1, 0, 1, 2]);
        assert_eq!(m.row_ptr(), &[0, 2, 3, 6]);
    }

    #[test]
    fn identity_row_and_product() {
        let mut m = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![3.0, 3.0]);
        assert_eq!(m.max_asymmetry(), 0.0);
        m.set_identity_row(0);
        assert_eq!(m.row(0).collect::<Vec<_>>(), vec![(0, 1.0), (1, 0.0)]);
        assert_eq!(m.max_asymmetry(), 1.0);
    }

    #[test]
    #[should_panic]
    fn add_outside_pattern_panics() {
        let mut m = SparseMatrix::identity(2);
        m.add(0, 1, 1.0);
    }
}
