//! Nonsymmetric operads in chain complexes.
//!
//! Elements of `O(n)` are sparse vectors over the flat basis of the component complex
//! (degrees ascending, then local index). Partial compositions `∘_i` are 1-based.

mod builtin;
mod explicit;
mod free;

pub use builtin::{builtin_a3zero, builtin_arity1, builtin_ass, builtin_initial, builtin_uass, Arity1Operad, MonoidData};
pub use explicit::ExplicitOperad;
pub use free::{free_operad, FTree, FreeOperad, SequenceV};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::complex::{sign, tensor_many, ChainComplex, ChainMap};
use crate::error::{Error, Result};
use crate::linalg::sparse::{add_entry, sv_add_scaled};
use crate::linalg::{Ring, SVec, Scalar};

pub trait Operad: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn ring(&self) -> Ring;

    /// `O(n)`; zero beyond [`Operad::arity_bound`].
    fn component(&self, n: usize) -> Arc<ChainComplex>;

    /// `a ∘_i b` for basis elements `a ∈ O(p)`, `b ∈ O(q)`, as a vector in `O(p+q-1)`.
    fn compose(&self, p: usize, q: usize, i: usize, a: usize, b: usize) -> SVec;

    /// The unit of `O(1)`.
    fn unit(&self) -> SVec;

    /// `O(n) = 0` for every `n` above the bound.
    fn arity_bound(&self) -> Option<usize>;

    /// Display label of a flat basis element of `O(n)`.
    fn label(&self, n: usize, flat: usize) -> String {
        let c = self.component(n);
        let (d, i) = c.flat_to_local(flat);
        c.labels(d)[i].clone()
    }
}

pub type OperadRef = Arc<dyn Operad>;

pub fn rank(op: &dyn Operad, n: usize) -> usize {
    op.component(n).total_rank()
}

/// Degree of every flat basis element of `O(n)`.
pub fn basis_degrees(op: &dyn Operad, n: usize) -> Vec<i64> {
    op.component(n).flat_basis().into_iter().map(|(d, _)| d).collect()
}

/// Bilinear extension of `∘_i`.
pub fn compose_vec(op: &dyn Operad, p: usize, q: usize, i: usize, x: &SVec, y: &SVec) -> SVec {
    let ring = op.ring();
    let mut out = SVec::new();
    for (a, s) in x {
        for (b, t) in y {
            sv_add_scaled(ring, &mut out, &op.compose(p, q, i, *a, *b), &(s * t));
        }
    }
    out
}

/// The differential of `O(n)` applied to a flat vector.
pub fn differential_vec(c: &ChainComplex, x: &SVec) -> SVec {
    c.d_flat(x)
}

/// `∘_i` as a chain map `O(p) ⊗ O(q) -> O(p+q-1)`.
pub fn composition_map(op: &dyn Operad, p: usize, q: usize, i: usize) -> Result<ChainMap> {
    let (cp, cq, cr) = (op.component(p), op.component(q), op.component(p + q - 1));
    let t = tensor_many(&[&cp, &cq])?;
    let source = Arc::new(t.complex.clone());
    let map = ChainMap::from_fn(source, cr.clone(), |n, j| {
        let tuple = t.tuple(n, j);
        let a = cp.flat_index(tuple[0].0, tuple[0].1);
        let b = cq.flat_index(tuple[1].0, tuple[1].1);
        let off = cr.flat_offset(n);
        op.compose(p, q, i, a, b).into_iter().map(|(f, x)| (f - off, x)).collect()
    });
    map.validate()?;
    Ok(map)
}

fn fmt_vec(op: &dyn Operad, n: usize, v: &SVec) -> String {
    if v.is_empty() {
        return "0".into();
    }
    v.iter()
        .map(|(f, x)| format!("{}*{}", crate::linalg::ring::format_scalar(x), op.label(n, *f)))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn violation(what: &str, detail: String) -> Error {
    Error::AxiomViolation(format!("{what}: {detail}"))
}

/// Unit, associativity (nested and disjoint) and differential compatibility for all arities up
/// to `max_arity` whose composites stay within that bound.
pub fn check_operad_axioms(op: &dyn Operad, max_arity: usize) -> Result<()> {
    let ring = op.ring();
    let unit = op.unit();
    let comps: Vec<Arc<ChainComplex>> = (0..=max_arity).map(|n| op.component(n)).collect();
    let degs: Vec<Vec<i64>> = comps.iter().map(|c| c.flat_basis().into_iter().map(|(d, _)| d).collect()).collect();
    let basis = |n: usize| 0..degs[n].len();
    let single = |f: usize| -> SVec { [(f, Scalar::from_integer(1.into()))].into_iter().collect() };

    if max_arity >= 1 {
        if unit.keys().any(|f| degs[1][*f] != 0) {
            return Err(violation("unit", "the unit is not in degree 0".into()));
        }
        if !differential_vec(&comps[1], &unit).is_empty() {
            return Err(violation("unit", "the unit is not a cycle".into()));
        }
    }
    for n in 0..=max_arity {
        for a in basis(n) {
            let x = single(a);
            if max_arity >= 1 && compose_vec(op, 1, n, 1, &unit, &x) != x {
                return Err(violation("left unit", format!("u ∘_1 {} ≠ itself", op.label(n, a))));
            }
            for i in 1..=n {
                if compose_vec(op, n, 1, i, &x, &unit) != x {
                    return Err(violation("right unit", format!("{} ∘_{i} u ≠ itself", op.label(n, a))));
                }
            }
        }
    }

    for p in 1..=max_arity {
        for q in 0..=max_arity {
            if p + q - 1 > max_arity {
                continue;
            }
            for a in basis(p) {
                for b in basis(q) {
                    for i in 1..=p {
                        let ab = op.compose(p, q, i, a, b);
                        if ab.keys().any(|f| degs[p + q - 1][*f] != degs[p][a] + degs[q][b]) {
                            return Err(violation(
                                "degree",
                                format!("{} ∘_{i} {} leaves degree {}", op.label(p, a), op.label(q, b), degs[p][a] + degs[q][b]),
                            ));
                        }
                        // d(a ∘ b) = da ∘ b + (-1)^|a| a ∘ db
                        let lhs = differential_vec(&comps[p + q - 1], &ab);
                        let mut rhs = compose_vec(op, p, q, i, &differential_vec(&comps[p], &single(a)), &single(b));
                        let t = compose_vec(op, p, q, i, &single(a), &differential_vec(&comps[q], &single(b)));
                        sv_add_scaled(ring, &mut rhs, &t, &sign(degs[p][a]));
                        if lhs != rhs {
                            return Err(violation(
                                "differential",
                                format!("d({} ∘_{i} {}) differs from the Leibniz rule", op.label(p, a), op.label(q, b)),
                            ));
                        }
                    }
                }
            }
        }
    }

    for p in 1..=max_arity {
        for q in 0..=max_arity {
            for r in 0..=max_arity {
                let total = p + q + r;
                // every intermediate composite must stay within the checked range
                if total < 2 || total - 2 > max_arity || p + q - 1 > max_arity {
                    continue;
                }
                let nested = q >= 1 && q + r - 1 <= max_arity;
                let parallel = p + r - 1 <= max_arity;
                for a in basis(p) {
                    for b in basis(q) {
                        for c in basis(r) {
                            let (db, dc) = (degs[q][b], degs[r][c]);
                            let (xa, xb, xc) = (single(a), single(b), single(c));
                            for i in 1..=p {
                                let ab = op.compose(p, q, i, a, b);
                                // nested: (a ∘_i b) ∘_{i+j-1} c = a ∘_i (b ∘_j c)
                                if nested {
                                    for j in 1..=q {
                                        let lhs = compose_vec(op, p + q - 1, r, i + j - 1, &ab, &xc);
                                        let bc = op.compose(q, r, j, b, c);
                                        let rhs = compose_vec(op, p, q + r - 1, i, &xa, &bc);
                                        if lhs != rhs {
                                            return Err(violation(
                                                "sequential associativity",
                                                format!(
                                                    "a={}, b={}, c={}, i={i}, j={j}: {} vs {}",
                                                    op.label(p, a),
                                                    op.label(q, b),
                                                    op.label(r, c),
                                                    fmt_vec(op, total - 2, &lhs),
                                                    fmt_vec(op, total - 2, &rhs)
                                                ),
                                            ));
                                        }
                                    }
                                }
                                // disjoint: for i < j, (a ∘_j c) ∘_i b = (-1)^{|b||c|} (a ∘_i b) ∘_{j+q-1} c
                                for j in (i + 1..=p).filter(|_| parallel) {
                                    let lhs = compose_vec(op, p + r - 1, q, i, &op.compose(p, r, j, a, c), &xb);
                                    let rhs = compose_vec(op, p + q - 1, r, j + q - 1, &ab, &xc);
                                    let mut diff = lhs.clone();
                                    sv_add_scaled(ring, &mut diff, &rhs, &-sign(db * dc));
                                    if !diff.is_empty() {
                                        return Err(violation(
                                            "parallel associativity",
                                            format!(
                                                "a={}, b={}, c={}, i={i}, j={j}",
                                                op.label(p, a),
                                                op.label(q, b),
                                                op.label(r, c)
                                            ),
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// A morphism of operads given by chain maps in arities `0..=max_arity`.
#[derive(Clone, Debug)]
pub struct OperadMorphism {
    pub source: OperadRef,
    pub target: OperadRef,
    pub components: BTreeMap<usize, ChainMap>,
    pub max_arity: usize,
}

impl OperadMorphism {
    pub fn identity(op: OperadRef, max_arity: usize) -> Self {
        let components = (0..=max_arity).map(|n| (n, ChainMap::identity_arc(op.component(n)))).collect();
        Self { source: op.clone(), target: op, components, max_arity }
    }

    fn apply(&self, n: usize, x: &SVec) -> SVec {
        let m = &self.components[&n];
        let (s, t) = (m.source(), m.target());
        let mut out = SVec::new();
        for (f, c) in x {
            let (d, i) = s.flat_to_local(*f);
            let off = t.flat_offset(d);
            for (r, y) in m.apply_generator(d, i) {
                add_entry(self.source.ring(), &mut out, off + r, &(y * c));
            }
        }
        out
    }

    /// Checks the chain-map property, the unit and compatibility with every `∘_i` in range.
    pub fn check(&self) -> Result<()> {
        for m in self.components.values() {
            m.validate()?;
        }
        if self.max_arity >= 1 && self.apply(1, &self.source.unit()) != self.target.unit() {
            return Err(violation("morphism", "unit is not preserved".into()));
        }
        for p in 1..=self.max_arity {
            for q in 0..=self.max_arity {
                if p + q - 1 > self.max_arity {
                    continue;
                }
                for a in 0..rank(&*self.source, p) {
                    for b in 0..rank(&*self.source, q) {
                        let sa: SVec = [(a, Scalar::from_integer(1.into()))].into_iter().collect();
                        let sb: SVec = [(b, Scalar::from_integer(1.into()))].into_iter().collect();
                        for i in 1..=p {
                            let lhs = self.apply(p + q - 1, &self.source.compose(p, q, i, a, b));
                            let rhs = compose_vec(&*self.target, p, q, i, &self.apply(p, &sa), &self.apply(q, &sb));
                            if lhs != rhs {
                                return Err(violation("morphism", format!("∘_{i} not preserved on arities ({p}, {q})")));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ExactMatrix;

    #[test]
    fn builtins_satisfy_the_axioms() {
        let q = Ring::Rationals;
        check_operad_axioms(&*builtin_uass(q), 4).unwrap();
        check_operad_axioms(&*builtin_ass(q), 4).unwrap();
        check_operad_axioms(&*builtin_a3zero(Ring::Integers), 4).unwrap();
        check_operad_axioms(&*builtin_initial(q), 4).unwrap();
    }

    #[test]
    fn corrupted_uass_is_caught() {
        let q = Ring::Rationals;
        let mut e = ExplicitOperad::snapshot(&*builtin_uass(q), 3);
        e.set_composition(2, 2, 1, 0, 0, [(0, crate::linalg::ring::int(-1))].into_iter().collect());
        assert!(matches!(check_operad_axioms(&e, 3), Err(Error::AxiomViolation(_))));
    }

    #[test]
    fn a3zero_products_vanish() {
        let o = builtin_a3zero(Ring::Integers);
        assert!(o.compose(2, 2, 1, 0, 0).is_empty());
        assert!(o.compose(2, 2, 2, 0, 0).is_empty());
        assert!(o.component(3).is_zero());
        assert_eq!(o.component(2).total_rank(), 1);
    }

    #[test]
    fn composition_maps_are_chain_maps() {
        let q = Ring::Rationals;
        let o = builtin_uass(q);
        let m = composition_map(&*o, 2, 3, 2).unwrap();
        assert!(m.is_iso());
    }

    #[test]
    fn inclusion_of_ass_into_uass() {
        let q = Ring::Rationals;
        let (ass, uass) = (builtin_ass(q), builtin_uass(q));
        let mut components = BTreeMap::new();
        for n in 0..=3 {
            let (s, t) = (ass.component(n), uass.component(n));
            let mut comps = BTreeMap::new();
            if n > 0 {
                comps.insert(0, ExactMatrix::identity(q, 1));
            }
            components.insert(n, ChainMap::new_unchecked(s, t, comps));
        }
        let m = OperadMorphism { source: ass, target: uass.clone(), components, max_arity: 3 };
        m.check().unwrap();
        OperadMorphism::identity(uass, 3).check().unwrap();
    }
}
