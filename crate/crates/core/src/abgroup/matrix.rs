//! Dense integer matrices and the Smith normal form.
//!
//! Entries are arbitrary-precision: intermediate values in a Smith
//! reduction can overflow machine words even for small inputs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

pub type Int = BigInt;

/// Row-major dense matrix over Z. Rows index target coordinates,
/// columns index source generators.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Int::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Int>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: Vec<Vec<i64>>) -> Self {
        Matrix::from_rows(
            rows.into_iter().map(|r| r.into_iter().map(Int::from).collect()).collect(),
        )
    }

    pub fn diagonal(entries: &[Int]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// Column vector from a coefficient slice.
    pub fn column(entries: &[Int]) -> Self {
        Matrix { rows: entries.len(), cols: 1, data: entries.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Int] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col_vec(&self, c: usize) -> Vec<Int> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let t = a * b;
                        out[(i, j)] += t;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        let mut out = vec![Int::zero(); self.rows];
        for (k, vk) in v.iter().enumerate() {
            if vk.is_zero() {
                continue;
            }
            for i in 0..self.rows {
                let a = &self[(i, k)];
                if !a.is_zero() {
                    out[i] += a * vk;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }

    /// Horizontal concatenation [self | other].
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Matrix { rows: self.rows, cols: self.cols + other.cols, data }
    }

    /// Block-diagonal concatenation diag(self, other).
    pub fn block_diag(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)].clone();
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out[(self.rows + r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        out
    }

    pub fn submatrix_cols(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for r in 0..self.rows {
                out[(r, j)] = self[(r, c)].clone();
            }
        }
        out
    }

    pub fn submatrix_rows(&self, rows: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            for c in 0..self.cols {
                out[(i, c)] = self[(r, c)].clone();
            }
        }
        out
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let v = -&self[(i, c)];
            self[(i, c)] = v;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for r in 0..self.rows {
            let v = -&self[(r, j)];
            self[(r, j)] = v;
        }
    }

    /// row_i += q * row_j
    fn row_add(&mut self, i: usize, j: usize, q: &Int) {
        for c in 0..self.cols {
            let t = q * &self[(j, c)];
            self[(i, c)] += t;
        }
    }

    /// col_i += q * col_j
    fn col_add(&mut self, i: usize, j: usize, q: &Int) {
        for r in 0..self.rows {
            let t = q * &self[(r, j)];
            self[(r, i)] += t;
        }
    }

    /// Replace rows (i, j) by (a*row_i + b*row_j, c*row_i + d*row_j).
    fn row_transform(&mut self, i: usize, j: usize, a: &Int, b: &Int, c: &Int, d: &Int) {
        for col in 0..self.cols {
            let x = self[(i, col)].clone();
            let y = self[(j, col)].clone();
            self[(i, col)] = a * &x + b * &y;
            self[(j, col)] = c * &x + d * &y;
        }
    }

    /// Replace cols (i, j) by (a*col_i + b*col_j, c*col_i + d*col_j).
    fn col_transform(&mut self, i: usize, j: usize, a: &Int, b: &Int, c: &Int, d: &Int) {
        for row in 0..self.rows {
            let x = self[(row, i)].clone();
            let y = self[(row, j)].clone();
            self[(row, i)] = a * &x + b * &y;
            self[(row, j)] = c * &x + d * &y;
        }
    }

    /// Determinant by fraction-free Gaussian elimination (Bareiss).
    pub fn determinant(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !a[(r, k)].is_zero()) else {
                    return Int::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[(k, k)] * &a[(i, j)] - &a[(i, k)] * &a[(k, j)];
                    let (q, r) = num.div_rem(&prev);
                    debug_assert!(r.is_zero(), "Bareiss division must be exact");
                    a[(i, j)] = q;
                }
                a[(i, k)] = Int::zero();
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Int;
    fn index(&self, (r, c): (usize, usize)) -> &Int {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Int {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r).iter().map(|x| x.to_string()).collect::<Vec<_>>())?;
        }
        Ok(())
    }
}

/// Smith normal form `u * m * v = d` with unimodular `u`, `v` and their
/// inverses. `d` is diagonal, non-negative, each entry dividing the next.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub d: Matrix,
    pub u: Matrix,
    pub v: Matrix,
    pub u_inv: Matrix,
    pub v_inv: Matrix,
    pub rank: usize,
}

impl SmithForm {
    pub fn diagonal_entry(&self, k: usize) -> &Int {
        &self.d[(k, k)]
    }
}

pub fn smith_form(m: &Matrix) -> SmithForm {
    let rows = m.rows();
    let cols = m.cols();
    let mut d = m.clone();
    let mut u = Matrix::identity(rows);
    let mut u_inv = Matrix::identity(rows);
    let mut v = Matrix::identity(cols);
    let mut v_inv = Matrix::identity(cols);

    // Row ops act on d and u on the left; u_inv absorbs the inverse op on
    // the right so that u * u_inv stays the identity. Symmetrically for v.
    macro_rules! rswap {
        ($i:expr, $j:expr) => {{
            d.swap_rows($i, $j);
            u.swap_rows($i, $j);
            u_inv.swap_cols($i, $j);
        }};
    }
    macro_rules! cswap {
        ($i:expr, $j:expr) => {{
            d.swap_cols($i, $j);
            v.swap_cols($i, $j);
            v_inv.swap_rows($i, $j);
        }};
    }
    macro_rules! radd {
        ($i:expr, $j:expr, $q:expr) => {{
            let q = $q;
            d.row_add($i, $j, &q);
            u.row_add($i, $j, &q);
            let nq = -q;
            u_inv.col_add($j, $i, &nq);
        }};
    }
    macro_rules! cadd {
        ($i:expr, $j:expr, $q:expr) => {{
            let q = $q;
            d.col_add($i, $j, &q);
            v.col_add($i, $j, &q);
            let nq = -q;
            v_inv.row_add($j, $i, &nq);
        }};
    }

    let bound = rows.min(cols);
    let mut k = 0;
    while k < bound {
        // Pivot: nonzero entry of minimal absolute value in the submatrix,
        // ties broken by position for determinism.
        let mut pivot: Option<(usize, usize)> = None;
        for r in k..rows {
            for c in k..cols {
                if d[(r, c)].is_zero() {
                    continue;
                }
                match pivot {
                    Some((pr, pc)) if d[(pr, pc)].abs() <= d[(r, c)].abs() => {}
                    _ => pivot = Some((r, c)),
                }
            }
        }
        let Some((pr, pc)) = pivot else { break };
        rswap!(k, pr);
        cswap!(k, pc);

        'reduce: loop {
            // Clear column k.
            for r in k + 1..rows {
                if d[(r, k)].is_zero() {
                    continue;
                }
                let a = d[(k, k)].clone();
                let b = d[(r, k)].clone();
                let (q, rem) = b.div_rem(&a);
                if rem.is_zero() {
                    radd!(r, k, -q);
                } else {
                    let e = a.extended_gcd(&b);
                    let g = e.gcd;
                    let ad = &a / &g;
                    let bd = &b / &g;
                    // [[s, t], [-bd, ad]] has determinant 1.
                    d.row_transform(k, r, &e.x, &e.y, &-&bd, &ad);
                    u.row_transform(k, r, &e.x, &e.y, &-&bd, &ad);
                    // Inverse transform on columns of u_inv: [[ad, -t], [bd, s]].
                    u_inv.col_transform(k, r, &ad, &bd, &-&e.y, &e.x);
                }
            }
            // Clear row k; may refill the column, hence the loop.
            let mut col_dirty = false;
            for c in k + 1..cols {
                if d[(k, c)].is_zero() {
                    continue;
                }
                let a = d[(k, k)].clone();
                let b = d[(k, c)].clone();
                let (q, rem) = b.div_rem(&a);
                if rem.is_zero() {
                    cadd!(c, k, -q);
                } else {
                    let e = a.extended_gcd(&b);
                    let g = e.gcd;
                    let ad = &a / &g;
                    let bd = &b / &g;
                    d.col_transform(k, c, &e.x, &e.y, &-&bd, &ad);
                    v.col_transform(k, c, &e.x, &e.y, &-&bd, &ad);
                    v_inv.row_transform(k, c, &ad, &bd, &-&e.y, &e.x);
                    col_dirty = true;
                }
            }
            if col_dirty && (k + 1..rows).any(|r| !d[(r, k)].is_zero()) {
                continue 'reduce;
            }
            // Pivot must divide every entry of the remaining submatrix so the
            // diagonal forms a divisibility chain.
            let mut fixed = true;
            'scan: for r in k + 1..rows {
                for c in k + 1..cols {
                    if !(&d[(r, c)] % &d[(k, k)]).is_zero() {
                        radd!(k, r, Int::one());
                        fixed = false;
                        break 'scan;
                    }
                }
            }
            if fixed {
                break 'reduce;
            }
        }

        if d[(k, k)].is_negative() {
            d.negate_row(k);
            u.negate_row(k);
            u_inv.negate_col(k);
        }
        k += 1;
    }

    let rank = (0..bound).take_while(|&i| !d[(i, i)].is_zero()).count();
    SmithForm { d, u, v, u_inv, v_inv, rank }
}
