use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::{full_composite, Action, OAlgebra};
use crate::complex::{sign, tensor_many, ChainComplex, ChainMap};
use crate::error::Result;
use crate::linalg::sparse::{add_entry, sv_single};
use crate::linalg::{int, Ring, SVec};
use crate::operad::OperadRef;

/// A carrier basis element `o ⊗ x_1 ⊗ … ⊗ x_n` as `(n, o, [x_i])` in flat coordinates.
pub type FreeWord = (usize, usize, Vec<usize>);

#[derive(Debug)]
struct FreeAction {
    op: OperadRef,
    ring: Ring,
    max_weight: usize,
    words: Vec<FreeWord>,
    index: HashMap<FreeWord, usize>,
    x_degrees: Vec<i64>,
    o_degrees: Vec<Vec<i64>>,
}

impl Action for FreeAction {
    fn act(&self, p: usize, o: usize, args: &[usize]) -> SVec {
        let words: Vec<&FreeWord> = args.iter().map(|&a| &self.words[a]).collect();
        let total: usize = words.iter().map(|w| w.0).sum();
        if total > self.max_weight {
            return SVec::new();
        }
        // move each o_j left past the x's of earlier arguments
        let mut exponent = 0;
        let mut x_before = 0;
        for w in &words {
            exponent += self.o_degrees[w.0][w.1] * x_before;
            x_before += w.2.iter().map(|&x| self.x_degrees[x]).sum::<i64>();
        }
        let parts: Vec<(usize, SVec)> = words.iter().map(|w| (w.0, sv_single(w.1, int(1)))).collect();
        let composite = full_composite(&*self.op, p, &sv_single(o, int(1)), &parts);
        let xs: Vec<usize> = words.iter().flat_map(|w| w.2.iter().copied()).collect();
        let s = sign(exponent);
        let mut out = SVec::new();
        for (g, c) in composite {
            let key = (total, g, xs.clone());
            add_entry(self.ring, &mut out, self.index[&key], &(c * &s));
        }
        out
    }
}

/// `⊕_{n ≤ N} O(n) ⊗ X^{⊗n}`, the free algebra on `X` truncated at weight `N`. Products of total
/// weight above `N` vanish, so this is the quotient by an ideal and still an algebra.
#[derive(Clone, Debug)]
pub struct FreeAlgebra {
    algebra: OAlgebra,
    generators: Arc<ChainComplex>,
    max_weight: usize,
    truncated: bool,
    words: Vec<FreeWord>,
    index: HashMap<FreeWord, usize>,
}

pub fn free_algebra(op: OperadRef, x: &ChainComplex, max_weight: usize) -> Result<FreeAlgebra> {
    let ring = op.ring();
    let comps: Vec<Arc<ChainComplex>> = (0..=max_weight).map(|n| op.component(n)).collect();
    let mut tensors = Vec::with_capacity(max_weight + 1);
    for (n, on) in comps.iter().enumerate() {
        let mut factors: Vec<&ChainComplex> = vec![on];
        factors.extend(std::iter::repeat_n(x, n));
        tensors.push(tensor_many(&factors)?);
    }
    let parts: Vec<&ChainComplex> = tensors.iter().map(|t| &t.complex).collect();
    let carrier = ChainComplex::direct_sum(&parts, ring)?;

    let mut words = vec![(0, 0, vec![]); carrier.total_rank()];
    let mut weights = vec![0; carrier.total_rank()];
    for d in carrier.degrees() {
        let offsets = ChainComplex::sum_offsets(&parts, d);
        for (n, t) in tensors.iter().enumerate() {
            for i in 0..t.complex.rank(d) {
                let tuple = t.tuple(d, i);
                let o = comps[n].flat_index(tuple[0].0, tuple[0].1);
                let xs = tuple[1..].iter().map(|&(e, j)| x.flat_index(e, j)).collect();
                let f = carrier.flat_index(d, offsets[n] + i);
                words[f] = (n, o, xs);
                weights[f] = n;
            }
        }
    }
    let index: HashMap<FreeWord, usize> = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let action = FreeAction {
        op: op.clone(),
        ring,
        max_weight,
        words: words.clone(),
        index: index.clone(),
        x_degrees: x.flat_basis().into_iter().map(|(d, _)| d).collect(),
        o_degrees: comps.iter().map(|c| c.flat_basis().into_iter().map(|(d, _)| d).collect()).collect(),
    };
    let truncated = op.arity_bound().is_none_or(|b| b > max_weight) && !x.is_zero();
    let name = format!("F_{}(rank {}, ≤{max_weight})", op.name(), x.total_rank());
    let algebra = OAlgebra::new(op, carrier, Arc::new(action), name).with_weights(weights);
    Ok(FreeAlgebra { algebra, generators: Arc::new(x.clone()), max_weight, truncated, words, index })
}

impl FreeAlgebra {
    pub fn algebra(&self) -> &OAlgebra {
        &self.algebra
    }

    pub fn into_algebra(self) -> OAlgebra {
        self.algebra
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    /// Whether higher weights were cut off.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn word(&self, f: usize) -> &FreeWord {
        &self.words[f]
    }

    pub fn index_of(&self, w: &FreeWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// The inclusion `X -> F(X)`, `x ↦ u ⊗ x`.
    pub fn generator_map(&self) -> ChainMap {
        let unit = self.algebra.operad().unit();
        let carrier = self.algebra.carrier_arc();
        let x = self.generators.clone();
        let ring = self.algebra.ring();
        ChainMap::from_fn(x.clone(), carrier.clone(), |n, j| {
            let xf = x.flat_index(n, j);
            let off = carrier.flat_offset(n);
            let mut out = SVec::new();
            if self.max_weight >= 1 {
                for (u, c) in &unit {
                    if let Some(&f) = self.index.get(&(1, *u, vec![xf])) {
                        add_entry(ring, &mut out, f - off, c);
                    }
                }
            }
            out
        })
    }

    /// Ranks of the carrier per weight.
    pub fn weight_ranks(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for w in &self.words {
            *out.entry(w.0).or_insert(0) += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::check_algebra_axioms;
    use crate::linalg::{ExactMatrix, Ring};
    use crate::operad::{builtin_a3zero, builtin_uass, free_operad};

    #[test]
    fn free_unital_on_one_generator() {
        let q = Ring::Rationals;
        let f = free_algebra(builtin_uass(q), &ChainComplex::unit(q), 6).unwrap();
        assert_eq!(f.algebra().rank(), 7);
        assert!(f.is_truncated());
        check_algebra_axioms(f.algebra(), 3).unwrap();
        f.generator_map().validate().unwrap();
    }

    #[test]
    fn free_on_nilpotent_operad() {
        let z = Ring::Integers;
        let f = free_algebra(builtin_a3zero(z), &ChainComplex::unit(z), 4).unwrap();
        assert_eq!(f.algebra().rank(), 2);
        assert!(!f.is_truncated());
        check_algebra_axioms(f.algebra(), 3).unwrap();
    }

    #[test]
    fn free_on_zero_is_initial() {
        let q = Ring::Rationals;
        let f = free_algebra(builtin_uass(q), &ChainComplex::zero(q), 3).unwrap();
        assert_eq!(f.algebra().rank(), 1);
    }

    #[test]
    fn graded_generators_and_free_operad() {
        // X = k·a (degree 0) ⊕ k·b (degree 1) with db = a, over the free operad on a degree-1
        // binary operation
        let q = Ring::Rationals;
        let mut x = ChainComplex::zero(q);
        x.set_free(0, 1);
        x.set_free(1, 1);
        x.set_differential(1, ExactMatrix::identity(q, 1));
        let v = [(2, ChainComplex::concentrated(q, 1, 1))].into_iter().collect();
        let op = free_operad(q, v, 2).unwrap();
        let f = free_algebra(op, &x, 3).unwrap();
        check_algebra_axioms(f.algebra(), 3).unwrap();
    }
}
