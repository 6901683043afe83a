use std::fmt;

use num_traits::{One, Zero};

use super::ring::{format_scalar, int, Ring, Scalar};
use crate::error::{Error, Result};

/// Dense matrix with exact entries over a [`Ring`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    ring: Ring,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl ExactMatrix {
    pub fn zeros(ring: Ring, rows: usize, cols: usize) -> Self {
        Self { ring, rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(ring: Ring, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_fn(ring: Ring, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(ring.normalize(f(r, c)));
            }
        }
        Self { ring, rows, cols, data }
    }

    /// Builds from integer rows. Panics on ragged input.
    pub fn from_i64(ring: Ring, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(ring, r, c, |i, j| int(rows[i][j]))
    }

    /// Builds from entry rows, checking that every entry lies in the ring.
    pub fn from_rows(ring: Ring, rows: Vec<Vec<Scalar>>, cols: usize) -> Result<Self> {
        let mut m = Self::zeros(ring, rows.len(), cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape(format!("row {i} has {} entries, expected {cols}", row.len())));
            }
            for (j, x) in row.into_iter().enumerate() {
                let x = match ring {
                    Ring::PrimeField(_) => ring.normalize(x),
                    _ => x,
                };
                if !ring.contains(&x) {
                    return Err(Error::InvalidRing(format!("entry ({i},{j}) = {} is not in {ring}", format_scalar(&x))));
                }
                m.set(i, j, x);
            }
        }
        Ok(m)
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: Scalar) {
        let x = self.ring.normalize(x);
        self.data[r * self.cols + c] = x;
    }

    pub fn add_to(&mut self, r: usize, c: usize, x: &Scalar) {
        let i = r * self.cols + c;
        self.data[i] = self.ring.add(&self.data[i], x);
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn column_matrix(ring: Ring, v: &[Scalar]) -> Self {
        Self::from_fn(ring, v.len(), 1, |i, _| v[i].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self.get(r, c).is_zero()))
    }

    pub fn with_ring(&self, ring: Ring) -> Self {
        Self::from_fn(ring, self.rows, self.cols, |r, c| self.get(r, c).clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ring, self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch {:?} * {:?}", self.shape(), other.shape());
        let mut out = Self::zeros(self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out.renormalize();
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let s = self
                    .row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Scalar::zero(), |acc, (a, b)| acc + a * b);
                self.ring.normalize(s)
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "matrix sum shape mismatch");
        Self::from_fn(self.ring, self.rows, self.cols, |r, c| self.get(r, c) + other.get(r, c))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "matrix difference shape mismatch");
        Self::from_fn(self.ring, self.rows, self.cols, |r, c| self.get(r, c) - other.get(r, c))
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.ring, self.rows, self.cols, |r, c| -self.get(r, c))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Self::from_fn(self.ring, self.rows, self.cols, |r, c| self.get(r, c) * s)
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        Self::from_fn(self.ring, self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                other.get(r, c - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        Self::from_fn(self.ring, self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows {
                self.get(r, c).clone()
            } else {
                other.get(r - self.rows, c).clone()
            }
        })
    }

    pub fn block_diag(blocks: &[&Self], ring: Ring) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(ring, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                let x = b.get(r, c);
                if !x.is_zero() {
                    self.set(r0 + r, c0 + c, x.clone());
                }
            }
        }
    }

    /// Kronecker product; row index `i*other.rows + k`, column index `j*other.cols + l`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.ring, self.rows * other.rows, self.cols * other.cols, |r, c| {
            self.get(r / other.rows, c / other.cols) * other.get(r % other.rows, c % other.cols)
        })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.ring, idx.len(), self.cols, |r, c| self.get(idx[r], c).clone())
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.ring, self.rows, idx.len(), |r, c| self.get(r, idx[c]).clone())
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let (r0, c0) = (rows.start, cols.start);
        Self::from_fn(self.ring, rows.len(), cols.len(), |r, c| self.get(r0 + r, c0 + c).clone())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] += s * row[src]
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = self.get(src, c).clone();
            if !v.is_zero() {
                self.add_to(dst, c, &(s * v));
            }
        }
    }

    /// col[dst] += s * col[src]
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = self.get(r, src).clone();
            if !v.is_zero() {
                self.add_to(r, dst, &(s * v));
            }
        }
    }

    pub fn scale_row(&mut self, r: usize, s: &Scalar) {
        for c in 0..self.cols {
            let v = self.get(r, c) * s;
            self.set(r, c, v);
        }
    }

    pub fn scale_col(&mut self, c: usize, s: &Scalar) {
        for r in 0..self.rows {
            let v = self.get(r, c) * s;
            self.set(r, c, v);
        }
    }

    fn renormalize(&mut self) {
        if let Ring::PrimeField(_) = self.ring {
            for x in self.data.iter_mut() {
                *x = self.ring.normalize(std::mem::take(x));
            }
        }
    }

    /// Rank over the fraction field (over the integers: rank over the rationals).
    pub fn rank(&self) -> usize {
        let ring = if self.ring == Ring::Integers { Ring::Rationals } else { self.ring };
        let mut m = self.with_ring(ring);
        let mut rank = 0;
        for c in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| !m.get(r, c).is_zero()) else { continue };
            m.swap_rows(rank, p);
            let inv = ring.inverse(m.get(rank, c)).expect("nonzero pivot");
            for r in 0..m.rows {
                if r != rank && !m.get(r, c).is_zero() {
                    let f = -(m.get(r, c) * &inv);
                    m.add_row_multiple(r, rank, &f);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Determinant by elimination over the fraction field.
    pub fn determinant(&self) -> Scalar {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let ring = if self.ring == Ring::Integers { Ring::Rationals } else { self.ring };
        let mut m = self.with_ring(ring);
        let mut det = Scalar::one();
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&r| !m.get(r, c).is_zero()) else { return Scalar::zero() };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det = ring.mul(&det, &piv);
            let inv = ring.inverse(&piv).expect("nonzero pivot");
            for r in c + 1..m.rows {
                if !m.get(r, c).is_zero() {
                    let f = -(m.get(r, c) * &inv);
                    m.add_row_multiple(r, c, &f);
                }
            }
        }
        det
    }

    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|r| self.row(r).iter().map(format_scalar).collect()).collect()
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactMatrix[{}; {}x{}]", self.ring, self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "\n  [")?;
            for (c, x) in self.row(r).iter().enumerate() {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", format_scalar(x))?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_kron() {
        let z = Ring::Integers;
        let a = ExactMatrix::from_i64(z, &[&[1, 2], &[3, 4]]);
        let i = ExactMatrix::identity(z, 2);
        assert_eq!(a.mul(&i), a);
        let k = i.kron(&a);
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k.get(2, 3), &int(2));
        assert_eq!(a.determinant(), int(-2));
        assert_eq!(a.rank(), 2);
    }

    #[test]
    fn entries_checked_against_ring() {
        let half = Scalar::new(1.into(), 2.into());
        assert!(ExactMatrix::from_rows(Ring::Integers, vec![vec![half.clone()]], 1).is_err());
        assert!(ExactMatrix::from_rows(Ring::Rationals, vec![vec![half]], 1).is_ok());
    }
}
