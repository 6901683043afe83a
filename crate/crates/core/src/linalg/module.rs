use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::ExactMatrix;
use super::ring::{from_big, Ring, Scalar};
use super::snf::diagonalize;

/// Finitely generated module `R^rank ⊕ R/d_1 ⊕ ... ⊕ R/d_k` with `d_1 | d_2 | ... | d_k`, each `d_i > 1`.
///
/// Always stored in canonical form, so structural equality is isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FgModule {
    pub ring: Ring,
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

/// Isomorphism-class fingerprint `(ring, rank, invariant factors)`.
pub type ModuleDescriptor = (Ring, usize, Vec<BigInt>);

impl FgModule {
    pub fn zero(ring: Ring) -> Self {
        Self { ring, rank: 0, torsion: vec![] }
    }

    pub fn free(ring: Ring, rank: usize) -> Self {
        Self { ring, rank, torsion: vec![] }
    }

    /// The module `⊕ R/o_i`, where an order of 0 contributes a free summand and an order of 1 nothing.
    pub fn from_orders(ring: Ring, orders: &[BigInt]) -> Self {
        let rank = orders.iter().filter(|o| o.is_zero()).count();
        let tors: Vec<&BigInt> = orders.iter().filter(|o| !o.is_zero() && !o.abs().is_one()).collect();
        if tors.is_empty() || ring.is_field() {
            return Self { ring, rank, torsion: vec![] };
        }
        let diag = ExactMatrix::from_fn(ring, tors.len(), tors.len(), |r, c| {
            if r == c {
                from_big(tors[r].abs())
            } else {
                Scalar::zero()
            }
        });
        let torsion = diagonalize(&diag)
            .invariant_factors()
            .into_iter()
            .map(|d| d.to_integer())
            .filter(|d| !d.is_one())
            .collect();
        Self { ring, rank, torsion }
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn is_free(&self) -> bool {
        self.torsion.is_empty()
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut orders: Vec<BigInt> = vec![BigInt::zero(); self.rank + other.rank];
        orders.extend(self.torsion.iter().cloned());
        orders.extend(other.torsion.iter().cloned());
        Self::from_orders(self.ring, &orders)
    }

    pub fn descriptor(&self) -> ModuleDescriptor {
        (self.ring, self.rank, self.torsion.clone())
    }

    /// Number of cyclic summands in the canonical decomposition.
    pub fn num_generators(&self) -> usize {
        self.rank + self.torsion.len()
    }
}

impl fmt::Display for FgModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = vec![];
        if self.rank > 0 {
            parts.push(if self.rank == 1 { format!("{}", self.ring) } else { format!("{}^{}", self.ring, self.rank) });
        }
        for d in &self.torsion {
            parts.push(format!("{}/{}", self.ring, d));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

pub fn module_invariants(m: &FgModule) -> ModuleDescriptor {
    m.descriptor()
}

/// `R^rows / im(M)`.
pub fn cokernel(m: &ExactMatrix) -> FgModule {
    let s = diagonalize(m);
    let mut orders: Vec<BigInt> = vec![BigInt::zero(); m.rows() - s.rank];
    if m.ring() == Ring::Integers {
        orders.extend(s.invariant_factors().into_iter().map(|d| d.to_integer()));
    }
    FgModule::from_orders(m.ring(), &orders)
}

/// Columns form a basis of `ker M` (over ZZ a basis of the kernel lattice).
pub fn kernel_basis(m: &ExactMatrix) -> ExactMatrix {
    let s = diagonalize(m);
    let idx: Vec<usize> = (s.rank..m.cols()).collect();
    s.v.select_cols(&idx)
}

/// Basis of the column span (over ZZ: of the lattice generated by the columns).
pub fn column_span_basis(m: &ExactMatrix) -> ExactMatrix {
    let s = diagonalize(m);
    let idx: Vec<usize> = (0..s.rank).collect();
    m.mul(&s.v).select_cols(&idx)
}

/// One solution `x` of `a * x = b` (column by column), or `None` if some column is not in the span.
pub fn solve(a: &ExactMatrix, b: &ExactMatrix) -> Option<ExactMatrix> {
    assert_eq!(a.rows(), b.rows(), "solve: row mismatch");
    let ring = a.ring();
    let s = diagonalize(a);
    let ub = s.u.mul(b);
    let mut y = ExactMatrix::zeros(ring, a.cols(), b.cols());
    for c in 0..b.cols() {
        for r in 0..a.rows() {
            let t = ub.get(r, c);
            if r < s.rank {
                let (q, rem) = ring.div_rem(t, s.d.get(r, r));
                if !rem.is_zero() {
                    return None;
                }
                y.set(r, c, q);
            } else if !t.is_zero() {
                return None;
            }
        }
    }
    Some(s.v.mul(&y))
}

/// A presentation `R^n / im(relations)` rewritten as `⊕ R/orders[i]`.
#[derive(Clone, Debug)]
pub struct ReducedPresentation {
    pub orders: Vec<BigInt>,
    /// `k x n`: old coordinates to new generators.
    pub projection: ExactMatrix,
    /// `n x k`: a lift of each new generator.
    pub lift: ExactMatrix,
}

pub fn reduce_presentation(relations: &ExactMatrix) -> ReducedPresentation {
    let ring = relations.ring();
    let s = diagonalize(relations);
    let n = relations.rows();
    let mut keep = vec![];
    let mut orders = vec![];
    for i in 0..n {
        if i < s.rank {
            let d = s.d.get(i, i);
            if ring.is_unit(d) {
                continue;
            }
            keep.push(i);
            orders.push(d.to_integer());
        } else {
            keep.push(i);
            orders.push(BigInt::zero());
        }
    }
    ReducedPresentation { orders, projection: s.u.select_rows(&keep), lift: s.u_inv.select_cols(&keep) }
}

/// Reduces each row `i` of `m` modulo `orders[i]` (no-op for order 0).
pub fn reduce_rows_mod(m: &mut ExactMatrix, orders: &[BigInt]) {
    assert_eq!(m.rows(), orders.len());
    for (r, o) in orders.iter().enumerate() {
        if o.is_zero() {
            continue;
        }
        let o = from_big(o.clone());
        for c in 0..m.cols() {
            let x = m.get(r, c);
            if !x.is_zero() {
                let (_, rem) = m.ring().div_rem(x, &o);
                m.set(r, c, rem);
            }
        }
    }
}

/// `span(basis) / span(gens)` where `gens ⊆ span(basis)` and `basis` has independent columns.
pub fn subquotient(basis: &ExactMatrix, gens: &ExactMatrix) -> Option<(FgModule, ExactMatrix)> {
    let coords = solve(basis, gens)?;
    Some((cokernel(&coords), coords))
}

/// The relation matrix `diag(orders)` restricted to nonzero orders.
pub fn order_relations(ring: Ring, orders: &[BigInt]) -> ExactMatrix {
    let idx: Vec<usize> = (0..orders.len()).filter(|&i| !orders[i].is_zero()).collect();
    ExactMatrix::from_fn(ring, orders.len(), idx.len(), |r, c| {
        if r == idx[c] {
            from_big(orders[r].clone())
        } else {
            Scalar::zero()
        }
    })
}

pub fn is_one(x: &Scalar) -> bool {
    x.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ring::int;

    #[test]
    fn cokernel_examples() {
        let z = Ring::Integers;
        let m = cokernel(&ExactMatrix::from_i64(z, &[&[2]]));
        assert_eq!(m, FgModule { ring: z, rank: 0, torsion: vec![2.into()] });
        let m = cokernel(&ExactMatrix::from_i64(z, &[&[2, 0], &[0, 3]]));
        assert_eq!(m.torsion, vec![BigInt::from(6)]);
        // generators x, y with relation 2y
        let m = cokernel(&ExactMatrix::from_i64(z, &[&[0], &[2]]));
        assert_eq!(m.descriptor(), (z, 1, vec![BigInt::from(2)]));
        let m = cokernel(&ExactMatrix::from_i64(z, &[&[2, 0], &[0, 4]]));
        assert_eq!(m.descriptor(), (z, 0, vec![BigInt::from(2), BigInt::from(4)]));
    }

    #[test]
    fn kernel_examples() {
        let q = Ring::Rationals;
        assert_eq!(kernel_basis(&ExactMatrix::identity(q, 2)).cols(), 0);
        assert_eq!(kernel_basis(&ExactMatrix::zeros(q, 2, 2)).cols(), 2);
        let k = kernel_basis(&ExactMatrix::from_i64(q, &[&[1, 1]]));
        assert_eq!(k.cols(), 1);
        assert_eq!(k.get(0, 0), &-k.get(1, 0).clone());
        assert!(!k.get(0, 0).is_zero());
    }

    #[test]
    fn orders_canonicalize() {
        let m = FgModule::from_orders(Ring::Integers, &[2.into(), 3.into(), 0.into(), 1.into()]);
        assert_eq!(m.descriptor(), (Ring::Integers, 1, vec![BigInt::from(6)]));
        assert_eq!(FgModule::free(Ring::Rationals, 3).descriptor(), (Ring::Rationals, 3, vec![]));
    }

    #[test]
    fn solve_lattice() {
        let z = Ring::Integers;
        let a = ExactMatrix::from_i64(z, &[&[2], &[0]]);
        assert!(solve(&a, &ExactMatrix::from_i64(z, &[&[1], &[0]])).is_none());
        let x = solve(&a, &ExactMatrix::from_i64(z, &[&[4], &[0]])).unwrap();
        assert_eq!(x.get(0, 0), &int(2));
    }
}
