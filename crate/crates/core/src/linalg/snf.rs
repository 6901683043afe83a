//! Smith normal form by unimodular row and column operations.
//!
//! Pivoting picks the nonzero entry of smallest norm in the active submatrix, ties broken by
//! (row, col) order, so `U` and `V` are reproducible. Over a field the same routine yields a
//! rank normal form with unit pivots.

use num_traits::Zero;

use super::matrix::ExactMatrix;
use super::ring::{Ring, Scalar};
use crate::error::{Error, Result};

/// `d = u * m * v` with `d` diagonal, `u_inv * u = 1`, and `d[i][i] | d[i+1][i+1]`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: ExactMatrix,
    pub u_inv: ExactMatrix,
    pub d: ExactMatrix,
    pub v: ExactMatrix,
    pub rank: usize,
}

impl SmithForm {
    /// The nonzero diagonal entries `d_1 | d_2 | ... | d_rank`.
    pub fn invariant_factors(&self) -> Vec<Scalar> {
        (0..self.rank).map(|i| self.d.get(i, i).clone()).collect()
    }
}

/// Smith normal form of an integer matrix.
pub fn snf(m: &ExactMatrix) -> Result<SmithForm> {
    if m.ring() != Ring::Integers || !m.is_integral() {
        return Err(Error::InvalidRing("smith normal form needs an integer matrix over ZZ".into()));
    }
    Ok(diagonalize(m))
}

/// Diagonal normal form over any supported ring (Smith form over ZZ).
pub fn diagonalize(m: &ExactMatrix) -> SmithForm {
    let ring = m.ring();
    let (rows, cols) = m.shape();
    let mut d = m.clone();
    let mut u = ExactMatrix::identity(ring, rows);
    let mut u_inv = ExactMatrix::identity(ring, rows);
    let mut v = ExactMatrix::identity(ring, cols);
    let mut k = 0;

    while k < rows.min(cols) {
        let Some(mut pivot) = smallest_nonzero(&d, k) else { break };
        loop {
            let (pi, pj) = pivot;
            d.swap_rows(k, pi);
            u.swap_rows(k, pi);
            u_inv.swap_cols(k, pi);
            d.swap_cols(k, pj);
            v.swap_cols(k, pj);

            let mut dirty = false;
            let p = d.get(k, k).clone();
            for i in k + 1..rows {
                if d.get(i, k).is_zero() {
                    continue;
                }
                let (q, r) = ring.div_rem(d.get(i, k), &p);
                let nq = ring.neg(&q);
                d.add_row_multiple(i, k, &nq);
                u.add_row_multiple(i, k, &nq);
                u_inv.add_col_multiple(k, i, &q);
                dirty |= !r.is_zero();
            }
            for j in k + 1..cols {
                if d.get(k, j).is_zero() {
                    continue;
                }
                let (q, r) = ring.div_rem(d.get(k, j), &p);
                let nq = ring.neg(&q);
                d.add_col_multiple(j, k, &nq);
                v.add_col_multiple(j, k, &nq);
                dirty |= !r.is_zero();
            }
            if dirty {
                pivot = smallest_nonzero(&d, k).expect("pivot region is nonzero");
                continue;
            }

            if ring == Ring::Integers {
                let bad = (k + 1..rows)
                    .flat_map(|i| (k + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| !ring.div_rem(d.get(i, j), &p).1.is_zero());
                if let Some((i, _)) = bad {
                    let one = super::ring::int(1);
                    d.add_row_multiple(k, i, &one);
                    u.add_row_multiple(k, i, &one);
                    u_inv.add_col_multiple(i, k, &super::ring::int(-1));
                    pivot = (k, k);
                    continue;
                }
            }

            let s = ring.unit_normal_factor(&p);
            let s_inv = ring.inverse(&s).expect("unit");
            d.scale_row(k, &s);
            u.scale_row(k, &s);
            u_inv.scale_col(k, &s_inv);
            break;
        }
        k += 1;
    }

    SmithForm { u, u_inv, d, v, rank: k }
}

fn smallest_nonzero(d: &ExactMatrix, k: usize) -> Option<(usize, usize)> {
    let ring = d.ring();
    let mut best: Option<((usize, usize), num_bigint::BigInt)> = None;
    for i in k..d.rows() {
        for j in k..d.cols() {
            let x = d.get(i, j);
            if x.is_zero() {
                continue;
            }
            let n = ring.norm(x);
            if best.as_ref().is_none_or(|(_, b)| n < *b) {
                best = Some(((i, j), n));
            }
        }
    }
    best.map(|(p, _)| p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ring::int;

    fn check(m: &ExactMatrix) -> SmithForm {
        let s = snf(m).unwrap();
        assert_eq!(s.u.mul(m).mul(&s.v), s.d);
        assert_eq!(s.u.mul(&s.u_inv), ExactMatrix::identity(Ring::Integers, m.rows()));
        assert!(s.d.is_diagonal());
        let f = s.invariant_factors();
        for w in f.windows(2) {
            assert!(Ring::Integers.div_rem(&w[1], &w[0]).1.is_zero());
        }
        s
    }

    #[test]
    fn zero_matrix_is_its_own_form() {
        let m = ExactMatrix::zeros(Ring::Integers, 2, 3);
        let s = check(&m);
        assert_eq!(s.rank, 0);
        assert_eq!(s.u, ExactMatrix::identity(Ring::Integers, 2));
        assert_eq!(s.v, ExactMatrix::identity(Ring::Integers, 3));
    }

    #[test]
    fn identity_is_its_own_form() {
        let m = ExactMatrix::identity(Ring::Integers, 3);
        assert_eq!(check(&m).d, m);
    }

    #[test]
    fn two_by_two_example() {
        let m = ExactMatrix::from_i64(Ring::Integers, &[&[2, 4], &[6, 8]]);
        let s = check(&m);
        assert_eq!(s.invariant_factors(), vec![int(2), int(4)]);
    }

    #[test]
    fn divisibility_fix_up() {
        let m = ExactMatrix::from_i64(Ring::Integers, &[&[2, 0], &[0, 3]]);
        assert_eq!(check(&m).invariant_factors(), vec![int(1), int(6)]);
    }

    #[test]
    fn rejects_fractions() {
        let m = ExactMatrix::from_i64(Ring::Rationals, &[&[1]]);
        assert!(snf(&m).is_err());
    }

    #[test]
    fn field_rank_form() {
        let m = ExactMatrix::from_i64(Ring::Rationals, &[&[1, 1], &[2, 2]]);
        let s = diagonalize(&m);
        assert_eq!(s.rank, 1);
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
    }
}
