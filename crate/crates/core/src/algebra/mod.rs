//! Algebras over operads. Elements of the carrier are flat coordinate vectors.

mod builtin;
mod free;
mod pushout;

pub use builtin::{
    cycle_square_algebra, cycle_square_map, dual_numbers, ground_algebra, initial_algebra, module_algebra,
    product_algebra, square_zero_line, torsion_square_algebra, trivial_algebra, zero_algebra, ModuleAction, ProductAction, TableAction,
    ZeroAction,
};
pub use free::{free_algebra, FreeAlgebra};
pub use pushout::{
    coproduct_with_free_unit, kprime_map, pushout_along_free_corrected, pushout_along_free_original_wrong, rank_one_test_algebras,
    universal_property_counts, CoproductWithFreeUnit, FreeAttachment, KPrimeKind, PushoutTrace, UniversalCount,
};

use std::fmt;
use std::sync::Arc;

use crate::complex::{advance_odometer, sign, ChainComplex, ChainMap};
use crate::error::{Error, Result};
use crate::linalg::sparse::{sv_add_scaled, sv_single};
use crate::linalg::{int, Ring, SVec};
use crate::operad::{compose_vec, differential_vec, Operad, OperadRef};

/// Structure maps `θ: O(n) ⊗ A^{⊗n} -> A` on basis elements.
pub trait Action: Send + Sync + fmt::Debug {
    fn act(&self, n: usize, o: usize, args: &[usize]) -> SVec;
}

#[derive(Clone)]
pub struct OAlgebra {
    operad: OperadRef,
    carrier: Arc<ChainComplex>,
    action: Arc<dyn Action>,
    name: String,
    weights: Option<Vec<usize>>,
}

impl fmt::Debug for OAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OAlgebra")
            .field("name", &self.name)
            .field("operad", &self.operad.name())
            .field("rank", &self.carrier.total_rank())
            .finish()
    }
}

impl OAlgebra {
    pub fn new(operad: OperadRef, carrier: ChainComplex, action: Arc<dyn Action>, name: impl Into<String>) -> Self {
        Self { operad, carrier: Arc::new(carrier), action, name: name.into(), weights: None }
    }

    /// Attaches a weight grading on carrier basis elements, additive under the action.
    pub fn with_weights(mut self, w: Vec<usize>) -> Self {
        assert_eq!(w.len(), self.carrier.total_rank());
        self.weights = Some(w);
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn operad(&self) -> &OperadRef {
        &self.operad
    }

    pub fn ring(&self) -> Ring {
        self.carrier.ring()
    }

    pub fn carrier(&self) -> &ChainComplex {
        &self.carrier
    }

    pub fn carrier_arc(&self) -> Arc<ChainComplex> {
        self.carrier.clone()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.carrier.total_rank()
    }

    pub fn weights(&self) -> Option<&[usize]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, f: usize) -> usize {
        self.weights.as_ref().map_or(0, |w| w[f])
    }

    /// Degree of every flat basis element of the carrier.
    pub fn degrees(&self) -> Vec<i64> {
        self.carrier.flat_basis().into_iter().map(|(d, _)| d).collect()
    }

    /// `θ(o; a_1, …, a_n)` on basis elements, reduced modulo the carrier orders.
    pub fn act(&self, n: usize, o: usize, args: &[usize]) -> SVec {
        let mut v = self.action.act(n, o, args);
        self.carrier.reduce_flat(&mut v);
        v
    }

    /// Multilinear extension of [`OAlgebra::act`]; no Koszul signs arise since arguments keep
    /// their order.
    pub fn act_vec(&self, n: usize, o: &SVec, args: &[SVec]) -> SVec {
        let ring = self.ring();
        let mut out = SVec::new();
        if args.iter().any(|a| a.is_empty()) {
            return out;
        }
        let supports: Vec<Vec<(&usize, &crate::linalg::Scalar)>> = args.iter().map(|a| a.iter().collect()).collect();
        let radix: Vec<usize> = supports.iter().map(Vec::len).collect();
        for (oi, oc) in o {
            let mut idx = vec![0; n];
            loop {
                let mut coeff = oc.clone();
                let mut basis = Vec::with_capacity(n);
                for (k, &i) in idx.iter().enumerate() {
                    let (b, c) = supports[k][i];
                    coeff *= c;
                    basis.push(*b);
                }
                sv_add_scaled(ring, &mut out, &self.act(n, *oi, &basis), &coeff);
                if !advance_odometer(&mut idx, &radix) {
                    break;
                }
            }
        }
        self.carrier.reduce_flat(&mut out);
        out
    }
}

fn tuples(len: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let radix = vec![rank; len];
    let mut idx = Some(vec![0; len]);
    if rank == 0 && len > 0 {
        idx = None;
    }
    std::iter::from_fn(move || {
        let cur = idx.clone()?;
        let mut next = cur.clone();
        idx = if advance_odometer(&mut next, &radix) { Some(next) } else { None };
        Some(cur)
    })
}

fn violation(alg: &OAlgebra, what: &str, detail: String) -> Error {
    Error::AxiomViolation(format!("{} ({what}): {detail}", alg.name))
}

fn fmt_args(alg: &OAlgebra, args: &[usize]) -> String {
    let c = alg.carrier();
    let names: Vec<String> = args
        .iter()
        .map(|f| {
            let (d, i) = c.flat_to_local(*f);
            c.labels(d)[i].clone()
        })
        .collect();
    names.join(", ")
}

/// Chain-map condition on every `θ` with `n ≤ arity_bound`, the unit law, and compatibility with
/// `∘_i` for composites of arity at most `arity_bound`.
pub fn check_algebra_axioms(alg: &OAlgebra, arity_bound: usize) -> Result<()> {
    let op = alg.operad();
    let ring = alg.ring();
    if op.ring() != ring {
        return Err(Error::RingMismatch(op.ring().label(), ring.label()));
    }
    alg.carrier().validate()?;
    let carrier = alg.carrier();
    let rank = alg.rank();
    let degs = alg.degrees();
    let unit = op.unit();

    for f in 0..rank {
        let got = alg.act_vec(1, &unit, &[sv_single(f, int(1))]);
        let mut want = sv_single(f, int(1));
        carrier.reduce_flat(&mut want);
        if got != want {
            return Err(violation(alg, "unit", format!("u({}) ≠ itself", fmt_args(alg, &[f]))));
        }
    }

    for n in 0..=arity_bound {
        let on = op.component(n);
        let odeg: Vec<i64> = on.flat_basis().into_iter().map(|(d, _)| d).collect();
        for o in 0..odeg.len() {
            for args in tuples(n, rank) {
                let got = alg.act(n, o, &args);
                if got.keys().any(|&f| degs[f] != odeg[o] + args.iter().map(|&a| degs[a]).sum::<i64>()) {
                    return Err(violation(alg, "degree", format!("{}({})", op.label(n, o), fmt_args(alg, &args))));
                }
                // d θ(o; a) = θ(do; a) + (-1)^|o| Σ_k (-1)^{|a_1..a_{k-1}|} θ(o; …, da_k, …)
                let lhs = differential_vec(carrier, &got);
                let argv: Vec<SVec> = args.iter().map(|&a| sv_single(a, int(1))).collect();
                let mut rhs = alg.act_vec(n, &differential_vec(&on, &sv_single(o, int(1))), &argv);
                let mut before = odeg[o];
                for k in 0..n {
                    let mut a2 = argv.clone();
                    a2[k] = differential_vec(carrier, &argv[k]);
                    let t = alg.act_vec(n, &sv_single(o, int(1)), &a2);
                    sv_add_scaled(ring, &mut rhs, &t, &sign(before));
                    before += degs[args[k]];
                }
                carrier.reduce_flat(&mut rhs);
                if lhs != rhs {
                    return Err(violation(
                        alg,
                        "differential",
                        format!("{}({})", op.label(n, o), fmt_args(alg, &args)),
                    ));
                }
            }
        }
    }

    // θ(o ∘_i o'; a) = (-1)^{|o'|·|a_1..a_{i-1}|} θ(o; a_1, …, θ(o'; a_i, …), …)
    for p in 1..=arity_bound {
        for q in 0..=arity_bound + 1 - p {
            let (cp, cq) = (op.component(p), op.component(q));
            let dq: Vec<i64> = cq.flat_basis().into_iter().map(|(d, _)| d).collect();
            for a in 0..cp.total_rank() {
                for b in 0..dq.len() {
                    for i in 1..=p {
                        let ab = op.compose(p, q, i, a, b);
                        for args in tuples(p + q - 1, rank) {
                            let lhs = alg.act_vec(p + q - 1, &ab, &args.iter().map(|&x| sv_single(x, int(1))).collect::<Vec<_>>());
                            let inner = alg.act(q, b, &args[i - 1..i - 1 + q]);
                            let mut outer: Vec<SVec> = args[..i - 1].iter().map(|&x| sv_single(x, int(1))).collect();
                            outer.push(inner);
                            outer.extend(args[i - 1 + q..].iter().map(|&x| sv_single(x, int(1))));
                            let s = sign(dq[b] * args[..i - 1].iter().map(|&x| degs[x]).sum::<i64>());
                            let mut rhs = SVec::new();
                            sv_add_scaled(ring, &mut rhs, &alg.act_vec(p, &sv_single(a, int(1)), &outer), &s);
                            if lhs != rhs {
                                return Err(violation(
                                    alg,
                                    "associativity",
                                    format!(
                                        "({} ∘_{i} {})({})",
                                        op.label(p, a),
                                        op.label(q, b),
                                        fmt_args(alg, &args)
                                    ),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// A map of algebras over the same operad.
#[derive(Clone, Debug)]
pub struct AlgebraMap {
    pub source: OAlgebra,
    pub target: OAlgebra,
    pub map: ChainMap,
}

impl AlgebraMap {
    /// Validates the chain map and compatibility with every `θ` of arity at most `arity_bound`.
    pub fn new(source: OAlgebra, target: OAlgebra, map: ChainMap, arity_bound: usize) -> Result<Self> {
        let m = Self { source, target, map };
        m.check(arity_bound)?;
        Ok(m)
    }

    pub fn identity(a: &OAlgebra) -> Self {
        Self { source: a.clone(), target: a.clone(), map: ChainMap::identity_arc(a.carrier_arc()) }
    }

    pub fn apply(&self, v: &SVec) -> SVec {
        self.map.apply_flat(v)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &AlgebraMap) -> Result<AlgebraMap> {
        Ok(AlgebraMap { source: self.source.clone(), target: other.target.clone(), map: other.map.compose(&self.map)? })
    }

    pub fn check(&self, arity_bound: usize) -> Result<()> {
        self.map.validate()?;
        let op = self.source.operad();
        let rank = self.source.rank();
        for n in 0..=arity_bound {
            for o in 0..op.component(n).total_rank() {
                for args in tuples(n, rank) {
                    let lhs = self.apply(&self.source.act(n, o, &args));
                    let images: Vec<SVec> = args.iter().map(|&a| self.apply(&sv_single(a, int(1)))).collect();
                    let rhs = self.target.act_vec(n, &sv_single(o, int(1)), &images);
                    if lhs != rhs {
                        return Err(Error::AxiomViolation(format!(
                            "algebra map fails on {}({})",
                            op.label(n, o),
                            fmt_args(&self.source, &args)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Composite `γ(o; o_1, …, o_k)` computed left to right, for `o ∈ O(p)` and `o_j ∈ O(n_j)`.
pub fn full_composite(op: &dyn Operad, p: usize, o: &SVec, parts: &[(usize, SVec)]) -> SVec {
    let mut cur = o.clone();
    let (mut arity, mut pos) = (p, 1);
    for (n, v) in parts {
        cur = compose_vec(op, arity, *n, pos, &cur, v);
        arity = arity + n - 1;
        pos += n;
    }
    cur
}
