//! Exact integer matrices, column-style Hermite normal form and lattice
//! membership.
//!
//! All entries are arbitrary-precision integers; there is no floating point
//! anywhere in this crate. The Hermite normal form used throughout is the
//! column-style one: columns are combined by unimodular operations on the
//! right, pivots sit on a lower-triangular echelon staircase, pivots are
//! positive and the entries left of a pivot in its row are reduced into
//! `[0, pivot)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl std::fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{} ", self.get(r, c))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let entries = rows.iter().flat_map(|row| row.iter().map(|&x| BigInt::from(x))).collect();
        IntMatrix { rows: r, cols: c, entries }
    }

    pub fn from_big_rows(rows: &[Vec<BigInt>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let entries = rows.iter().flat_map(|row| row.iter().cloned()).collect();
        IntMatrix { rows: r, cols: c, entries }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<BigInt>], rows: usize) -> Self {
        let c = cols.len();
        let mut m = IntMatrix::zero(rows, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn diagonal(diag: &[BigInt]) -> Self {
        let mut m = IntMatrix::zero(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, d.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn col_is_zero(&self, j: usize) -> bool {
        (0..self.rows).all(|i| self.get(i, j).is_zero())
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hconcat(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows, "hconcat row mismatch");
        let mut m = IntMatrix::zero(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).clone());
            }
            for c in 0..other.cols {
                m.set(r, self.cols + c, other.get(r, c).clone());
            }
        }
        m
    }

    /// Vertical concatenation `[self; other]`.
    pub fn vconcat(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols, "vconcat col mismatch");
        let mut m = IntMatrix::zero(self.rows + other.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).clone());
            }
        }
        for r in 0..other.rows {
            for c in 0..self.cols {
                m.set(self.rows + r, c, other.get(r, c).clone());
            }
        }
        m
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * other.get(k, j);
                    let cur = out.get(i, j) + add;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn neg_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, j).clone();
            self.set(i, j, v);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `col_dst -= q * col_src`
    fn sub_col_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, dst) - q * self.get(i, src);
            self.set(i, dst, v);
        }
    }

    /// Column-style Hermite normal form.
    ///
    /// Returns `(h, u)` with `u` unimodular, `self * u = h`, `h` in
    /// lower-triangular echelon form with positive pivots and entries left of
    /// each pivot reduced into `[0, pivot)`. Zero columns, if any, are pushed
    /// to the right.
    pub fn hnf(&self) -> (IntMatrix, IntMatrix) {
        let mut h = self.clone();
        let mut u = IntMatrix::identity(self.cols);
        let mut pivot_col = 0usize;
        for row in 0..self.rows {
            if pivot_col >= self.cols {
                break;
            }
            loop {
                // Column with smallest nonzero magnitude in this row.
                let mut jmin: Option<usize> = None;
                for j in pivot_col..self.cols {
                    if !h.get(row, j).is_zero() {
                        match jmin {
                            None => jmin = Some(j),
                            Some(m) if h.get(row, j).abs() < h.get(row, m).abs() => jmin = Some(j),
                            _ => {}
                        }
                    }
                }
                let Some(jmin) = jmin else { break };
                let mut clean = true;
                for j in pivot_col..self.cols {
                    if j == jmin || h.get(row, j).is_zero() {
                        continue;
                    }
                    // Truncating quotient keeps |remainder| < |pivot|.
                    let q = h.get(row, j) / h.get(row, jmin);
                    h.sub_col_multiple(j, jmin, &q);
                    u.sub_col_multiple(j, jmin, &q);
                    if !h.get(row, j).is_zero() {
                        clean = false;
                    }
                }
                if clean {
                    h.swap_cols(jmin, pivot_col);
                    u.swap_cols(jmin, pivot_col);
                    if h.get(row, pivot_col).is_negative() {
                        h.neg_col(pivot_col);
                        u.neg_col(pivot_col);
                    }
                    // Reduce the entries left of the pivot into [0, pivot).
                    for j in 0..pivot_col {
                        let q = h.get(row, j).div_floor(h.get(row, pivot_col));
                        h.sub_col_multiple(j, pivot_col, &q);
                        u.sub_col_multiple(j, pivot_col, &q);
                    }
                    pivot_col += 1;
                    break;
                }
            }
        }
        (h, u)
    }

    /// Pivot positions `(row, col)` of an echelon matrix as produced by
    /// [`IntMatrix::hnf`].
    pub fn echelon_pivots(&self) -> Vec<(usize, usize)> {
        let mut pivots = Vec::new();
        let mut col = 0usize;
        for row in 0..self.rows {
            if col >= self.cols {
                break;
            }
            if !self.get(row, col).is_zero() {
                pivots.push((row, col));
                col += 1;
            }
        }
        pivots
    }

    /// Rank of the column lattice.
    pub fn rank(&self) -> usize {
        let (h, _) = self.hnf();
        h.echelon_pivots().len()
    }

    /// Basis of the right kernel `{x : self * x = 0}`, as matrix columns.
    pub fn kernel(&self) -> IntMatrix {
        let (h, u) = self.hnf();
        let zero_cols: Vec<usize> = (0..self.cols).filter(|&j| h.col_is_zero(j)).collect();
        let cols: Vec<Vec<BigInt>> = zero_cols.iter().map(|&j| u.column(j)).collect();
        IntMatrix::from_columns(&cols, self.cols)
    }

    /// Determinant by fraction-free (Bareiss) elimination. Square only.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                let Some(swap) = (k + 1..n).find(|&i| !a.get(i, k).is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..n {
                    let x = a.get(k, j).clone();
                    let y = a.get(swap, j).clone();
                    a.set(k, j, y);
                    a.set(swap, j, x);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            for i in k + 1..n {
                a.set(i, k, BigInt::zero());
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1).clone()
    }

    /// Drops zero columns (used to turn an HNF into a lattice basis).
    pub fn drop_zero_columns(&self) -> IntMatrix {
        let cols: Vec<Vec<BigInt>> =
            (0..self.cols).filter(|&j| !self.col_is_zero(j)).map(|j| self.column(j)).collect();
        IntMatrix::from_columns(&cols, self.rows)
    }
}

/// Solves `basis * x = v` over the integers.
///
/// Returns the coordinates when `v` lies in the column lattice of `basis`,
/// `None` otherwise. The basis columns need not be independent.
pub fn lattice_member(basis: &IntMatrix, v: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    if v.len() != basis.rows() {
        return Err(Error::DimensionMismatch {
            expected: basis.rows(),
            got: v.len(),
            context: "lattice_member",
        });
    }
    let (h, u) = basis.hnf();
    Ok(solve_echelon(&h, v).map(|y| u.mul_vec(&y)))
}

/// Solves `h * y = v` for an echelon `h` (as produced by `hnf`), exactly.
pub fn solve_echelon(h: &IntMatrix, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let pivots = h.echelon_pivots();
    let mut y = vec![BigInt::zero(); h.cols()];
    let mut residual: Vec<BigInt> = v.to_vec();
    for &(r, c) in &pivots {
        let p = h.get(r, c);
        let (q, rem) = residual[r].div_rem(p);
        if !rem.is_zero() {
            return None;
        }
        y[c] = q;
        if !y[c].is_zero() {
            for i in 0..h.rows() {
                let sub = h.get(i, c) * &y[c];
                residual[i] -= sub;
            }
        }
    }
    if residual.iter().all(|x| x.is_zero()) {
        Some(y)
    } else {
        None
    }
}

/// Membership test without coordinates.
pub fn in_lattice(basis: &IntMatrix, v: &[BigInt]) -> Result<bool> {
    Ok(lattice_member(basis, v)?.is_some())
}
