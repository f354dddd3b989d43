//! Small dense matrices over the prime field F_q.

use super::poly::inv_mod;

/// Row-major matrix with entries in [0, q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u32>,
}

impl BaseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Submatrix made of the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out.set(i, k, self.get(i, j));
            }
        }
        out
    }

    pub fn rank(&self, q: u32) -> usize {
        let mut m = self.clone();
        m.row_reduce(q)
    }

    /// In-place reduced row echelon form; returns the rank.
    fn row_reduce(&mut self, q: u32) -> usize {
        let q64 = q as u64;
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(pivot) = (rank..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            self.swap_rows(rank, pivot);
            let inv = inv_mod(self.get(rank, col) as u64, q64);
            for j in 0..self.cols {
                let v = self.get(rank, j) as u64 * inv % q64;
                self.set(rank, j, v as u32);
            }
            for r in 0..self.rows {
                if r == rank {
                    continue;
                }
                let f = self.get(r, col) as u64;
                if f == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let v = (self.get(r, j) as u64 + q64 - f * self.get(rank, j) as u64 % q64) % q64;
                    self.set(r, j, v as u32);
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self, q: u32) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, 1);
        }
        aug.row_reduce(q);
        for i in 0..n {
            if aug.get(i, i) != 1 {
                return None;
            }
        }
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, aug.get(i, n + j));
            }
        }
        Some(out)
    }

    pub fn mul(&self, other: &Self, q: u32) -> Self {
        assert_eq!(self.cols, other.rows);
        let q64 = q as u64;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = (out.get(i, j) as u64 + a * other.get(k, j) as u64) % q64;
                    out.set(i, j, v as u32);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_inverse() {
        let m = BaseMatrix::from_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.rank(5), 1);
        assert!(m.inverse(5).is_none());

        let v = BaseMatrix::from_rows(&[vec![1, 0, 0], vec![1, 1, 1], vec![1, 2, 4]]);
        assert_eq!(v.rank(7), 3);
        let inv = v.inverse(7).unwrap();
        let id = v.mul(&inv, 7);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(id.get(i, j), u32::from(i == j));
            }
        }
    }
}
