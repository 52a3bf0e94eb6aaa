//! Dense GF(2) linear algebra on u64-packed rows.

/// A binary matrix; rows are packed in 64-bit words.
#[derive(Clone, Debug)]
pub struct BitMatrix {
    nrows: usize,
    ncols: usize,
    wpr: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        let wpr = ncols.div_ceil(64).max(1);
        BitMatrix { nrows, ncols, wpr, data: vec![0; nrows * wpr] }
    }

    pub fn from_rows(rows: &[Vec<u8>], ncols: usize) -> Self {
        let mut m = BitMatrix::zeros(rows.len(), ncols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols);
            for (j, &b) in row.iter().enumerate() {
                if b != 0 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.data[i * self.wpr + j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = &mut self.data[i * self.wpr + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    pub fn push_row(&mut self, row: &[u8]) {
        assert_eq!(row.len(), self.ncols);
        self.data.extend(std::iter::repeat(0).take(self.wpr));
        self.nrows += 1;
        for (j, &b) in row.iter().enumerate() {
            if b != 0 {
                self.set(self.nrows - 1, j, true);
            }
        }
    }

    pub fn row(&self, i: usize) -> Vec<u8> {
        (0..self.ncols).map(|j| self.get(i, j) as u8).collect()
    }

    fn xor_row_into(&mut self, dst: usize, src: usize) {
        let (d, s) = (dst * self.wpr, src * self.wpr);
        for k in 0..self.wpr {
            let v = self.data[s + k];
            self.data[d + k] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.wpr {
            self.data.swap(a * self.wpr + k, b * self.wpr + k);
        }
    }

    /// In-place reduced row echelon form. Returns the pivot column of each
    /// nonzero row, in order.
    pub fn echelonize(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.ncols {
            if r == self.nrows {
                break;
            }
            let Some(p) = (r..self.nrows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            for i in 0..self.nrows {
                if i != r && self.get(i, c) {
                    self.xor_row_into(i, r);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().echelonize().len()
    }

    /// One solution of `self * x = rhs` with free variables set to zero.
    /// On inconsistency reports (rank, index of the first bad input row).
    pub fn solve(&self, rhs: &[u8]) -> Result<Vec<u8>, (usize, usize)> {
        assert_eq!(rhs.len(), self.nrows);
        // augment with rhs and one tracking column per row to recover which
        // original rows combine into an inconsistent zero row
        let aug_cols = self.ncols + 1 + self.nrows;
        let mut m = BitMatrix::zeros(self.nrows, aug_cols);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                if self.get(i, j) {
                    m.set(i, j, true);
                }
            }
            if rhs[i] != 0 {
                m.set(i, self.ncols, true);
            }
            m.set(i, self.ncols + 1 + i, true);
        }
        // eliminate on the coefficient columns only
        let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
        let mut r = 0;
        for c in 0..self.ncols {
            if r == m.nrows {
                break;
            }
            let Some(p) = (r..m.nrows).find(|&i| m.get(i, c)) else {
                continue;
            };
            m.swap_rows(r, p);
            for i in 0..m.nrows {
                if i != r && m.get(i, c) {
                    m.xor_row_into(i, r);
                }
            }
            pivots.push((r, c));
            r += 1;
        }
        // inconsistent iff a zero coefficient row has rhs bit set
        for i in r..m.nrows {
            if m.get(i, self.ncols) {
                let bad = (0..self.nrows)
                    .find(|&k| m.get(i, self.ncols + 1 + k))
                    .unwrap_or(i);
                return Err((pivots.len(), bad));
            }
        }
        let mut x = vec![0u8; self.ncols];
        for &(row, col) in &pivots {
            if m.get(row, self.ncols) {
                x[col] = 1;
            }
        }
        Ok(x)
    }

    /// A basis of the right nullspace.
    pub fn nullspace(&self) -> Vec<Vec<u8>> {
        let mut m = self.clone();
        let pivots = m.echelonize();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.ncols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![0u8; self.ncols];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                if m.get(r, free) {
                    v[pc] = 1;
                }
            }
            basis.push(v);
        }
        basis
    }
}

/// Row space of a set of generators, for fast membership tests.
pub struct RowSpace {
    echelon: BitMatrix,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(rows: &[Vec<u8>], ncols: usize) -> Self {
        let mut echelon = BitMatrix::from_rows(rows, ncols);
        let pivots = echelon.echelonize();
        RowSpace { echelon, pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        let mut w = v.to_vec();
        for (r, &pc) in self.pivots.iter().enumerate() {
            if w[pc] != 0 {
                for j in 0..w.len() {
                    w[j] ^= self.echelon.get(r, j) as u8;
                }
            }
        }
        w.iter().all(|&b| b == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_echelon() {
        let m = BitMatrix::from_rows(
            &[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]],
            3,
        );
        assert_eq!(m.rank(), 2); // rows sum to zero
        let id = BitMatrix::from_rows(&[vec![1, 0], vec![0, 1]], 2);
        assert_eq!(id.rank(), 2);
    }

    #[test]
    fn solve_consistent_and_not() {
        let m = BitMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1]], 3);
        let x = m.solve(&[1, 0]).unwrap();
        // check m*x = rhs
        let r0 = x[0] ^ x[1];
        let r1 = x[1] ^ x[2];
        assert_eq!((r0, r1), (1, 0));

        let bad = BitMatrix::from_rows(&[vec![1, 0], vec![1, 0]], 2);
        let err = bad.solve(&[1, 0]).unwrap_err();
        assert_eq!(err.0, 1); // rank 1
    }

    #[test]
    fn nullspace_is_orthogonal_complement() {
        let m = BitMatrix::from_rows(&[vec![1, 1, 0, 0], vec![0, 0, 1, 1]], 4);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for i in 0..m.nrows() {
                let dot: u8 = (0..4).map(|j| (m.get(i, j) as u8) & v[j]).fold(0, |a, b| a ^ b);
                assert_eq!(dot, 0);
            }
        }
    }

    #[test]
    fn row_space_membership() {
        let rs = RowSpace::new(&[vec![1, 1, 0], vec![0, 1, 1]], 3);
        assert_eq!(rs.rank(), 2);
        assert!(rs.contains(&[1, 0, 1])); // sum of the two rows
        assert!(rs.contains(&[0, 0, 0]));
        assert!(!rs.contains(&[1, 0, 0]));
    }

    #[test]
    fn solve_wide_system_with_tail_words() {
        // more than 64 columns exercises multi-word rows
        let n = 70;
        let mut rows = Vec::new();
        for i in 0..3 {
            let mut r = vec![0u8; n];
            r[i] = 1;
            r[69] = 1;
            rows.push(r);
        }
        let m = BitMatrix::from_rows(&rows, n);
        let x = m.solve(&[1, 1, 0]).unwrap();
        for (i, want) in [1u8, 1, 0].iter().enumerate() {
            let dot: u8 = (0..n).map(|j| (m.get(i, j) as u8) & x[j]).fold(0, |a, b| a ^ b);
            assert_eq!(dot, *want);
        }
    }
}
