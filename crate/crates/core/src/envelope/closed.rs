//! Closed-form components of enveloping operads for the builtin operads, used as oracles.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::algebra::OAlgebra;
use crate::complex::{advance_odometer, quotient, tensor_many, ChainComplex};
use crate::error::{Error, Result};
use crate::linalg::ExactMatrix;
use crate::operad::FreeOperad;
use crate::tree::{enumerate_trees, LeafKind, PlanarTree, TreeSpec};

#[derive(Clone, Debug)]
pub enum ClosedFormKind {
    /// `A` is the initial algebra: `O_A(n) = O(n)`.
    Initial,
    /// Unital associative: `O_A(n) = A^{⊗(n+1)}`.
    Uass,
    /// Associative without unit: `O_A(n) = (A ⊕ k)^{⊗(n+1)}` for `n ≥ 1`, `O_A(0) = A`.
    Ass,
    /// Concentrated in arity 1: `O_A(0) = A`, `O_A(1) = O(1)`, zero above.
    Arity1,
    /// Triple products vanish: `A`, `k ⊕ A/A² ⊕ A/A²`, `k`, then zero.
    A3zero,
    /// Free operad: trees without a vertex all of whose inputs are straight leaves.
    Free(Arc<FreeOperad>),
}

impl ClosedFormKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Initial => "initial",
            Self::Uass => "uass",
            Self::Ass => "ass",
            Self::Arity1 => "arity1",
            Self::A3zero => "a3zero",
            Self::Free(_) => "free",
        }
    }
}

/// `A / A²`, the cokernel of the binary operations.
pub fn square_quotient(alg: &OAlgebra) -> Result<ChainComplex> {
    let a = alg.carrier();
    let ring = alg.ring();
    let op = alg.operad();
    let mut rel: BTreeMap<i64, Vec<Vec<crate::linalg::Scalar>>> = BTreeMap::new();
    let rank = alg.rank();
    let ops = op.component(2).total_rank();
    for o in 0..ops {
        for x in 0..rank {
            for y in 0..rank {
                let v = alg.act(2, o, &[x, y]);
                if v.is_empty() {
                    continue;
                }
                let (d, _) = a.flat_to_local(*v.keys().next().unwrap());
                let off = a.flat_offset(d);
                let mut col = vec![crate::linalg::Scalar::zero(); a.rank(d)];
                for (f, c) in v {
                    col[f - off] = c;
                }
                rel.entry(d).or_default().push(col);
            }
        }
    }
    let rel: BTreeMap<i64, ExactMatrix> = rel
        .into_iter()
        .map(|(d, cols)| {
            let rows = a.rank(d);
            (d, ExactMatrix::from_fn(ring, rows, cols.len(), |r, c| cols[c][r].clone()))
        })
        .collect();
    Ok((*quotient(a, &rel)?.complex).clone())
}

/// Components `0..=max_arity` of `O_A` according to the closed form for `kind`.
pub fn closed_form(kind: &ClosedFormKind, alg: &OAlgebra, max_arity: usize) -> Result<BTreeMap<usize, ChainComplex>> {
    let ring = alg.ring();
    let a = alg.carrier();
    let op = alg.operad();
    let mut out = BTreeMap::new();
    match kind {
        ClosedFormKind::Initial => {
            if a.invariants() != op.component(0).invariants() {
                return Err(Error::InvalidInput("the initial closed form needs the initial algebra".into()));
            }
            for n in 0..=max_arity {
                out.insert(n, (*op.component(n)).clone());
            }
        }
        ClosedFormKind::Uass => {
            for n in 0..=max_arity {
                let factors = vec![a; n + 1];
                out.insert(n, tensor_many(&factors)?.complex);
            }
        }
        ClosedFormKind::Ass => {
            let plus = ChainComplex::direct_sum(&[a, &ChainComplex::unit(ring)], ring)?;
            out.insert(0, a.clone());
            for n in 1..=max_arity {
                let factors = vec![&plus; n + 1];
                out.insert(n, tensor_many(&factors)?.complex);
            }
        }
        ClosedFormKind::Arity1 => {
            for n in 0..=max_arity {
                let c = match n {
                    0 => a.clone(),
                    1 => (*op.component(1)).clone(),
                    _ => ChainComplex::zero(ring),
                };
                out.insert(n, c);
            }
        }
        ClosedFormKind::A3zero => {
            let q = square_quotient(alg)?;
            for n in 0..=max_arity {
                let c = match n {
                    0 => a.clone(),
                    1 => ChainComplex::direct_sum(&[&ChainComplex::unit(ring), &q, &q], ring)?,
                    2 => ChainComplex::unit(ring),
                    _ => ChainComplex::zero(ring),
                };
                out.insert(n, c);
            }
        }
        ClosedFormKind::Free(f) => {
            let gens = f.generators();
            let has_d = gens.values().any(|v| v.degrees().into_iter().any(|d| !v.differential(d).is_zero()))
                || a.degrees().into_iter().any(|d| !a.differential(d).is_zero());
            if has_d {
                return Err(Error::InvalidInput("the reduced-tree closed form needs zero differentials".into()));
            }
            for n in 0..=max_arity {
                out.insert(n, reduced_tree_complex(f, alg, n)?);
            }
        }
    }
    Ok(out)
}

/// Whether no vertex has only straight leaves as inputs (a cork has none, so it never passes).
pub fn is_reduced(t: &PlanarTree) -> bool {
    match t {
        PlanarTree::Leaf(_) => true,
        PlanarTree::Vertex(kids) => {
            let all_straight = kids.iter().all(|k| *k == PlanarTree::Leaf(LeafKind::Straight));
            !all_straight && kids.iter().all(is_reduced)
        }
    }
}

fn reduced_tree_complex(f: &FreeOperad, alg: &OAlgebra, n: usize) -> Result<ChainComplex> {
    let ring = alg.ring();
    let gens = f.generators();
    let max_a = gens.keys().copied().max().unwrap_or(0);
    let bound = f.size_bound();
    let max_leaves = 1 + bound * max_a.saturating_sub(1);
    let spec = TreeSpec::new(n)
        .straight(max_leaves.saturating_sub(n))
        .vertices(0, bound)
        .arities(gens.keys().copied().collect());
    let adeg = alg.degrees();
    let mut ranks: BTreeMap<i64, usize> = BTreeMap::new();
    for t in enumerate_trees(&spec)? {
        if !is_reduced(&t) {
            continue;
        }
        // vertex labels from V, straight labels from A; only degrees matter
        let mut slots: Vec<Vec<i64>> = vec![];
        collect_slots(&t, gens, &adeg, &mut slots);
        if slots.iter().any(Vec::is_empty) {
            continue;
        }
        let radix: Vec<usize> = slots.iter().map(Vec::len).collect();
        let mut idx = vec![0; radix.len()];
        loop {
            let d: i64 = idx.iter().zip(&slots).map(|(&i, s)| s[i]).sum();
            *ranks.entry(d).or_insert(0) += 1;
            if !advance_odometer(&mut idx, &radix) {
                break;
            }
        }
    }
    let mut c = ChainComplex::zero(ring);
    for (d, r) in ranks {
        c.set_degree(d, vec![BigInt::zero(); r], (0..r).map(|i| format!("t{d}_{i}")).collect());
    }
    Ok(c)
}

fn collect_slots(t: &PlanarTree, gens: &crate::operad::SequenceV, adeg: &[i64], out: &mut Vec<Vec<i64>>) {
    match t {
        PlanarTree::Leaf(LeafKind::Straight) => out.push(adeg.to_vec()),
        PlanarTree::Leaf(_) => {}
        PlanarTree::Vertex(kids) => {
            out.push(gens[&kids.len()].flat_basis().into_iter().map(|(d, _)| d).collect());
            for k in kids {
                collect_slots(k, gens, adeg, out);
            }
        }
    }
}
