//! The property suites, each a function of its case count.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use opalg::algebra::{
    dual_numbers, ground_algebra, initial_algebra, product_algebra, trivial_algebra, zero_algebra,
    OAlgebra,
};
use opalg::complex::{coequalizer, cube_latching_map, pushout, pushout_product, pushout_product_power, quotient, ChainComplex, ChainMap, CubeFactor};
use opalg::envelope::{split_coequalizer_witness, SplitKind, SplitWitness};
use opalg::linalg::sparse::sv_single;
use opalg::linalg::{int, snf, ExactMatrix, Ring, SVec};
use opalg::operad::{
    builtin_a3zero, builtin_arity1, builtin_ass, builtin_initial, builtin_uass, free_operad, MonoidData, OperadRef,
};

use super::*;

pub const D_SQUARED_CASES: u32 = 200;
pub const SNF_CASES: u32 = 200;
pub const KUNNETH_CASES: u32 = 50;
pub const CUBE_CASES: u32 = 24;
pub const MAX_POWER: usize = 3;

fn checked(what: &str, c: &ChainComplex) -> Result<(), TestCaseError> {
    c.validate().map_err(|e| fail(format!("{what}: {e}")))?;
    check_d_squared(c).map_err(|e| fail(format!("{what}: {e}")))
}

fn checked_map(what: &str, f: &ChainMap) -> Result<(), TestCaseError> {
    checked(&format!("{what} source"), f.source())?;
    checked(&format!("{what} target"), f.target())?;
    check_chain_map(f).map_err(|e| fail(format!("{what}: {e}")))
}

fn homology_is(what: &str, c: &ChainComplex, expected: &BTreeMap<i64, FgModule>) -> Result<(), TestCaseError> {
    let got = homology_of(c);
    if &got != expected {
        return Err(fail(format!("{what}: homology {got:?}, expected {expected:?}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
struct ClosureInput {
    a: Blueprint,
    x: Blueprint,
    y: Blueprint,
    h1: Vec<i64>,
    h2: Vec<i64>,
    h3: Vec<i64>,
}

fn closure_input() -> impl Strategy<Value = ClosureInput> {
    any_ring().prop_flat_map(|ring| {
        let h = || prop::collection::vec(-2i64..=2, 1..12);
        (blueprint(ring, 3), blueprint(ring, 3), blueprint(ring, 2), h(), h(), h())
            .prop_map(|(a, x, y, h1, h2, h3)| ClosureInput { a, x, y, h1, h2, h3 })
    })
}

/// Every constructor returns a complex with `d² = 0`, and the ones with predictable homology
/// agree with the cell count.
pub fn d_squared_closure(cases: u32) -> Result<(), String> {
    run_property(cases, closure_input(), |inp| {
        let ring = inp.a.ring;
        let (a, x, y) = (inp.a.build(), inp.x.build(), inp.y.build());
        checked("generated", &a)?;
        homology_is("generated", &a, &inp.a.homology())?;

        let sum = ChainComplex::direct_sum(&[&a, &x], ring).map_err(|e| fail(e.to_string()))?;
        checked("direct sum", &sum)?;
        homology_is("direct sum", &sum, &inp.a.concat(&inp.x).homology())?;

        let t = a.tensor(&x).map_err(|e| fail(e.to_string()))?;
        checked("tensor", &t)?;

        let f = graph_map_between(&a, &x, &inp.h1);
        let g = graph_map_between(&a, &y, &inp.h2);
        checked_map("graph map", &f)?;

        // (C ⊕ D) / graph(φ) ≅ D
        let rel = f.target().degrees().into_iter().map(|n| (n, f.component(n))).collect();
        let q = quotient(f.target(), &rel).map_err(|e| fail(e.to_string()))?;
        checked("quotient", &q.complex)?;
        checked_map("projection", &q.projection)?;
        homology_is("quotient", &q.complex, &inp.x.homology())?;

        // both legs are graphs, so the push-out is C ⊕ D ⊕ E
        let p = pushout(&f, &g).map_err(|e| fail(e.to_string()))?;
        checked("push-out", &p.complex)?;
        checked_map("push-out leg", &p.leg_a)?;
        checked_map("push-out leg", &p.leg_y)?;
        homology_is("push-out", &p.complex, &inp.a.concat(&inp.x).concat(&inp.y).homology())?;
        if !same_map(&p.leg_a.compose(&f).unwrap(), &p.leg_y.compose(&g).unwrap()) {
            return Err(fail("push-out square does not commute"));
        }

        let f2 = graph_map_between(&a, &x, &inp.h3);
        let ce = coequalizer(&f, &f2, None).map_err(|e| fail(e.to_string()))?;
        checked("coequalizer", &ce.complex)?;
        let diff = f.sub(&f2).unwrap();
        for n in f.target().degrees() {
            let expected = f.target().rank(n) - rank_oracle(&diff.component(n));
            if ce.complex.module(n).rank != expected {
                return Err(fail(format!("coequalizer free rank in degree {n}: {} vs {expected}", ce.complex.module(n).rank)));
            }
        }

        let box_map = pushout_product(&f, &g).map_err(|e| fail(e.to_string()))?;
        checked_map("pushout-product", &box_map)?;
        Ok(())
    })
}

/// `D = U M V` diagonal with `d_i | d_{i+1}`, `U` and `V` unimodular, and the invariant factors
/// equal to quotients of determinantal divisors.
pub fn snf_contract(cases: u32) -> Result<(), String> {
    let matrix = (0usize..=5, 0usize..=5)
        .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-9i64..=9, c), r).prop_map(move |m| (c, m)));
    run_property(cases, matrix, |(cols, rows)| {
        let ring = Ring::Integers;
        let m = ExactMatrix::from_fn(ring, rows.len(), cols, |i, j| int(rows[i][j]));
        let s = snf(&m).map_err(|e| fail(e.to_string()))?;
        if s.u.mul(&m).mul(&s.v) != s.d {
            return Err(fail("D ≠ U·M·V"));
        }
        if !is_unimodular_integer(&s.u) || !is_unimodular_integer(&s.v) {
            return Err(fail("U or V is not unimodular"));
        }
        if s.u.mul(&s.u_inv) != ExactMatrix::identity(ring, m.rows()) {
            return Err(fail("U·U⁻¹ ≠ 1"));
        }
        if !s.d.is_diagonal() {
            return Err(fail("D is not diagonal"));
        }
        let diag: Vec<BigInt> = (0..m.rows().min(cols)).map(|i| s.d.get(i, i).to_integer()).collect();
        let rank = diag.iter().take_while(|x| !x.is_zero()).count();
        if rank != s.rank || diag[rank..].iter().any(|x| !x.is_zero()) || rank != rank_oracle(&m) {
            return Err(fail(format!("rank {} against diagonal {diag:?}", s.rank)));
        }
        if diag[..rank].iter().any(|x| !x.is_positive()) {
            return Err(fail("negative invariant factor"));
        }
        for w in diag[..rank].windows(2) {
            if !(&w[1] % &w[0]).is_zero() {
                return Err(fail(format!("{} does not divide {}", w[0], w[1])));
            }
        }
        let mut prev = BigInt::one();
        for k in 1..=rank {
            let dk = determinantal_divisor(&rows, k);
            if &dk / &prev != diag[k - 1] || !(&dk % &prev).is_zero() {
                return Err(fail(format!("d_{k} = {} but the minors give {dk}/{prev}", diag[k - 1])));
            }
            prev = dk;
        }
        Ok(())
    })
}

/// Every builtin operad over several rings.
pub fn builtin_operads() -> Vec<OperadRef> {
    let mut out = vec![];
    for ring in [Ring::Integers, Ring::Rationals, Ring::PrimeField(2), Ring::PrimeField(3)] {
        out.push(builtin_uass(ring));
        out.push(builtin_ass(ring));
        out.push(builtin_a3zero(ring));
        out.push(builtin_initial(ring));
        out.push(builtin_arity1(MonoidData::ground(ring)).unwrap());
        out.push(builtin_arity1(MonoidData::truncated_polynomial(ring, 2)).unwrap());
        out.push(builtin_arity1(MonoidData::truncated_polynomial(ring, 3)).unwrap());
        let binary = [(2, ChainComplex::unit(ring))].into_iter().collect();
        out.push(free_operad(ring, binary, 3).unwrap().as_operad());
        let mixed = [(2, ChainComplex::unit(ring)), (3, ChainComplex::concentrated(ring, 1, 1))].into_iter().collect();
        out.push(free_operad(ring, mixed, 2).unwrap().as_operad());
    }
    out
}

pub const OPERAD_MAX_ARITY: usize = 4;

/// Unit, associativity and Leibniz laws of every builtin up to arity 4.
pub fn operad_suite() -> Result<(), String> {
    for op in builtin_operads() {
        operad_laws(&*op, OPERAD_MAX_ARITY).map_err(|e| format!("{} over {}: {e}", op.name(), op.ring()))?;
    }
    Ok(())
}

fn ass_square_zero(ring: Ring) -> OAlgebra {
    let mut c = ChainComplex::zero(ring);
    c.set_free(0, 2);
    let mut mult = vec![vec![SVec::new(); 2]; 2];
    mult[0][0] = sv_single(1, int(1));
    product_algebra(builtin_ass(ring), c, mult, None, "x,x²").unwrap()
}

/// `(kind, algebra, arity, straight bound, vertex bound)` for every splitting the library offers.
pub fn split_instances() -> Vec<(SplitKind, OAlgebra, usize, usize, usize)> {
    let q = Ring::Rationals;
    let mut out = vec![];
    for ring in [Ring::Rationals, Ring::Integers] {
        for op in [builtin_uass(ring), builtin_a3zero(ring), builtin_ass(ring)] {
            for n in 0..=2 {
                out.push((SplitKind::Initial, initial_algebra(op.clone()), n, 2, 3));
            }
        }
        for alg in [ground_algebra(ring), dual_numbers(ring), zero_algebra(builtin_uass(ring))] {
            for n in 0..=2 {
                out.push((SplitKind::Uass, alg.clone(), n, n + 1, n + 2));
            }
        }
        for n in 0..=2 {
            out.push((SplitKind::Ass, ass_square_zero(ring), n, n + 2, n + 3));
        }
    }
    for bound in [1, 2] {
        let v = [(2, ChainComplex::unit(q))].into_iter().collect();
        let f = free_operad(q, v, bound).unwrap();
        let alg = trivial_algebra(f.as_operad(), ChainComplex::unit(q), "x").unwrap();
        for n in 0..=2 {
            out.push((SplitKind::Free(Arc::clone(&f)), alg.clone(), n, 3, 4));
        }
    }
    out.push((SplitKind::Initial, initial_algebra(builtin_a3zero(Ring::Integers)), 3, 2, 3));
    out
}

fn component_identity(name: &str, lhs: &ChainMap, rhs: &ChainMap) -> Result<(), String> {
    let mut degrees = lhs.source().degrees();
    degrees.extend(rhs.source().degrees());
    for n in degrees {
        if lhs.component(n) != rhs.component(n) {
            return Err(format!("{name} fails in degree {n}"));
        }
    }
    Ok(())
}

/// The four split-coequalizer identities, recomputed from the component matrices.
pub fn split_identities(w: &SplitWitness) -> Result<(), String> {
    let mul = |a: &ChainMap, b: &ChainMap| -> ChainMap { a.compose(b).expect("composable") };
    component_identity("ef = eg", &mul(&w.e, &w.f), &mul(&w.e, &w.g))?;
    component_identity("es = id", &mul(&w.e, &w.s), &ChainMap::identity_arc(w.w.clone()))?;
    component_identity("ft = id", &mul(&w.f, &w.t), &ChainMap::identity(w.f.target()))?;
    component_identity("se = gt", &mul(&w.s, &w.e), &mul(&w.g, &w.t))?;
    for (name, m) in [("e", &w.e), ("s", &w.s), ("f", &w.f), ("g", &w.g), ("t", &w.t)] {
        check_chain_map(m).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(())
}

pub fn split_suite() -> Result<usize, String> {
    let instances = split_instances();
    for (kind, alg, n, s, v) in &instances {
        let w = split_coequalizer_witness(kind, alg, *n, *s, *v).map_err(|e| format!("{} arity {n}: {e}", alg.name()))?;
        w.check().map_err(|e| format!("{} arity {n}: {e}", alg.name()))?;
        split_identities(&w).map_err(|e| format!("{} arity {n}: {e}", alg.name()))?;
    }
    Ok(instances.len())
}

/// Over a field the Betti numbers of `C ⊗ D` are the convolution of those of `C` and `D`.
pub fn kunneth(cases: u32) -> Result<(), String> {
    let input = any_field().prop_flat_map(|ring| (blueprint(ring, 4), blueprint(ring, 4)));
    run_property(cases, input, |(a, b)| {
        let t = a.build().tensor(&b.build()).map_err(|e| fail(e.to_string()))?;
        checked("tensor", &t)?;
        let expected = convolve(&a.betti(), &b.betti());
        let got: BTreeMap<i64, usize> = t.betti().into_iter().filter(|(_, r)| *r > 0).collect();
        if got != expected {
            return Err(fail(format!("betti {got:?}, expected {expected:?}")));
        }
        Ok(())
    })
}

/// `f^{□t}` by iterated binary pushout-products against the latching map of the `t`-cube, for
/// split injections `f`; the cokernel must be `coker(f)^{⊗t}`. The empty cube cannot know the
/// ring, so `t = 0` is only checked against `0 -> unit`.
pub fn power_vs_cube(cases: u32) -> Result<(), String> {
    let input = any_ring().prop_flat_map(|ring| graph_map(ring, 2, 1));
    run_property(cases, input, |gm| {
        let f = gm.build();
        let ring = gm.source.ring;
        let cok = nonzero_ranks(&gm.extra.build());
        let mut expected: BTreeMap<i64, usize> = [(0, 1)].into_iter().collect();
        for t in 0..=MAX_POWER {
            let power = pushout_product_power(&f, t).map_err(|e| fail(e.to_string()))?;
            checked_map("power", &power)?;
            let cube = if t == 0 {
                power.clone()
            } else {
                cube_latching_map(&vec![CubeFactor::Arrow(f.clone()); t]).map_err(|e| fail(e.to_string()))?
            };
            checked_map("cube", &cube)?;
            if power.source().invariants() != cube.source().invariants() || power.target().invariants() != cube.target().invariants() {
                return Err(fail(format!("t = {t}: the latching objects differ")));
            }
            let mut degrees = power.target().degrees();
            degrees.extend(power.source().degrees());
            for n in degrees {
                let (k1, c1) = power.kernel_cokernel(n);
                let (k2, c2) = cube.kernel_cokernel(n);
                if (&k1, &c1) != (&k2, &c2) {
                    return Err(fail(format!("t = {t}, degree {n}: ({k1}, {c1}) vs ({k2}, {c2})")));
                }
                let want = FgModule { ring, rank: expected.get(&n).copied().unwrap_or(0), torsion: vec![] };
                if !k1.is_zero() || c1 != want {
                    return Err(fail(format!("t = {t}, degree {n}: kernel {k1}, cokernel {c1}, expected 0 and {want}")));
                }
            }
            expected = convolve(&expected, &cok);
        }
        Ok(())
    })
}
