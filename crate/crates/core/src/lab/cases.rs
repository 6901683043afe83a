//! Verification cases: the counterexamples, the closed-form cross-checks and generic
//! computations on user input.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde_json::{json, Value};

use super::report::{Case, Provenance, VerificationReport};
use super::schema::{operad_summary, ComplexDoc, InvariantsDoc, Key, ModuleDoc};
use crate::algebra::{
    coproduct_with_free_unit, cycle_square_map, dual_numbers, ground_algebra, initial_algebra, module_algebra,
    pushout_along_free_corrected, pushout_along_free_original_wrong, torsion_square_algebra, zero_algebra, FreeAttachment,
    OAlgebra, PushoutTrace,
};
use crate::complex::{is_quasi_iso, ChainComplex};
use crate::envelope::{closed_form, induced_map, square_quotient, ClosedFormKind, EnvelopingOperad, TruncationBounds};
use crate::error::{Error, Result};
use crate::linalg::sparse::sv_single;
use crate::linalg::{int, Ring, SVec};
use crate::operad::{builtin_a3zero, builtin_arity1, builtin_uass, MonoidData};

use Provenance::{Derived, Input, Published, Trivial};

fn inv(c: &ChainComplex) -> InvariantsDoc {
    InvariantsDoc::from_invariants(&c.invariants())
}

fn module0(c: &ChainComplex) -> ModuleDoc {
    inv(c).modules.get(&Key(0)).cloned().unwrap_or(ModuleDoc { rank: 0, torsion: vec![] })
}

fn ranks(c: &ChainComplex) -> BTreeMap<i64, usize> {
    c.degrees().into_iter().map(|n| (n, c.rank(n))).filter(|(_, r)| *r > 0).collect()
}

fn h_dim(c: &ChainComplex, n: i64) -> usize {
    c.homology(n).rank
}

fn stage_summary(trace: &PushoutTrace) -> Value {
    let stages: Vec<Value> = trace
        .stages
        .iter()
        .map(|s| {
            json!({
                "t": s.t,
                "invariants": inv(&s.complex),
                "phi_is_iso": s.phi.is_iso(),
                "cells": s.cells.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "initial": inv(&trace.b0), "stages": stages, "result": inv(&trace.result), "stabilized": trace.stabilized })
}

/// The unital associative zero algebra under a free generator: the corrected push-out is zero
/// and the naive construction grows by one dimension per stage.
pub fn verify_yau(bound: usize, ring: Ring) -> Vec<VerificationReport> {
    let inputs = json!({ "bound": bound, "ring": ring.label() });
    if bound == 0 {
        let err = Error::InvalidInput("the bound must be at least 1".into());
        return vec![Case::new("yau/corrected", inputs).run(|_| Err(err))];
    }
    let alg = zero_algebra(builtin_uass(ring));
    let att = FreeAttachment::from_zero(&ChainComplex::unit(ring), &alg);
    let bounds = TruncationBounds::default().stages(bound);

    let corrected = Case::new("yau/corrected", inputs.clone()).run(|case| {
        let trace = pushout_along_free_corrected(&alg, &att, &bounds)?;
        case.check("total dimension of the push-out", Published, 0, trace.result.total_rank());
        let all_zero = (0..=bound).all(|t| trace.b(t).is_zero());
        case.check("every stage is zero", Trivial, true, all_zero);
        if !trace.stabilized {
            case.unstable("corrected push-out");
        }
        case.record("trace", stage_summary(&trace));
        Ok(())
    });

    let original = Case::new("yau/original", inputs).run(|case| {
        let trace = pushout_along_free_original_wrong(&alg, &att, &bounds)?;
        let expected: BTreeMap<i64, usize> = [(0, bound)].into_iter().collect();
        case.check("graded dimension of the naive construction", Derived, expected, ranks(&trace.result));
        case.check("disagrees with the corrected push-out", Published, true, trace.result.total_rank() > 0);
        case.check("naive construction still growing at the bound", Derived, false, trace.stabilized);
        case.record("trace", stage_summary(&trace));
        Ok(())
    });
    vec![corrected, original]
}

/// `x² = 2y` over ℤ for the operad whose triple products vanish: the map into the coproduct
/// with a free unit generator has a cokernel with torsion.
pub fn verify_a3zero(ring: Ring) -> VerificationReport {
    let bounds = TruncationBounds::default();
    Case::new("a3zero", json!({ "ring": ring.label(), "bounds": bounds })).run(|case| {
        if ring != Ring::Integers {
            return Err(Error::InvalidRing(format!("this case is defined over ZZ, not {ring}")));
        }
        let alg = torsion_square_algebra();
        let sq = square_quotient(&alg)?;
        case.check("A/A²", Published, ModuleDoc { rank: 1, torsion: vec![2] }, module0(&sq));

        let env = EnvelopingOperad::new(&alg, bounds);
        let mut components = BTreeMap::new();
        for n in 0..=bounds.max_arity {
            let c = env.component(n)?;
            if !c.is_stabilized() {
                case.unstable(format!("O_A({n})"));
            }
            components.insert(n, InvariantsDoc::from_invariants(&c.invariants()));
        }
        let m = |n: usize| components[&n].modules.get(&Key(0)).cloned().unwrap_or(ModuleDoc { rank: 0, torsion: vec![] });
        case.check("O_A(1)", Derived, ModuleDoc { rank: 3, torsion: vec![2, 2] }, m(1));
        case.check("O_A(2) on unit inputs", Published, ModuleDoc { rank: 1, torsion: vec![] }, m(2));
        let closed = closed_form(&ClosedFormKind::A3zero, &alg, bounds.max_arity)?;
        for (n, c) in &closed {
            case.check(&format!("O_A({n}) against the closed form"), Derived, inv(c), components[n].clone());
        }

        let cop = coproduct_with_free_unit(&alg, &bounds)?;
        let (_, coker) = cop.f_prime.kernel_cokernel(0);
        let twos = coker.torsion.iter().filter(|t| **t == BigInt::from(2)).count();
        case.check("multiplicity of the invariant factor 2 in coker f′", Derived, 2, twos);
        case.check("coker f′ is free", Derived, false, coker.torsion.is_empty());
        case.record("components", &components);
        case.record("cokernel", ModuleDoc::from_module(&coker));
        case.record("coproduct_truncated", cop.truncated);
        Ok(())
    })
}

/// A quasi-isomorphism of algebras whose enveloping operads differ in homology in arity 1.
pub fn verify_quasi_iso(ring: Ring) -> VerificationReport {
    let bounds = TruncationBounds::default();
    Case::new("quasi-iso", json!({ "ring": ring.label(), "bounds": bounds })).run(|case| {
        if ring != Ring::Rationals {
            return Err(Error::InvalidRing(format!("this case is defined over QQ, not {ring}")));
        }
        let phi = cycle_square_map();
        case.check("φ is a quasi-isomorphism", Published, true, is_quasi_iso(&phi.map).is_quasi_iso);
        case.check("dim H₁(A/A²)", Published, 1, h_dim(&square_quotient(&phi.source)?, 1));
        let src = EnvelopingOperad::new(&phi.source, bounds);
        let tgt = EnvelopingOperad::new(&phi.target, bounds);
        for (name, env) in [("O_A(1)", &src), ("O_B(1)", &tgt)] {
            if !env.component(1)?.is_stabilized() {
                case.unstable(name);
            }
        }
        let (oa1, ob1) = (src.complex(1)?, tgt.complex(1)?);
        case.check("dim H₁(O_A(1))", Derived, 2, h_dim(&oa1, 1));
        case.check("dim H₁(O_B(1))", Published, 0, h_dim(&ob1, 1));
        let induced = induced_map(&phi, &src, &tgt, 1)?;
        case.check("O_φ(1) is a quasi-isomorphism", Derived, false, is_quasi_iso(&induced).is_quasi_iso);
        case.record("O_A(1)", inv(&oa1));
        case.record("O_B(1)", inv(&ob1));
        Ok(())
    })
}

/// `M = k[t]/t²` as a module over itself, for the operad concentrated in arity 1.
fn self_module(ring: Ring) -> Result<OAlgebra> {
    let op = builtin_arity1(MonoidData::truncated_polynomial(ring, 2))?;
    let mut c = ChainComplex::zero(ring);
    c.set_degree(0, vec![BigInt::from(0); 2], vec!["1".into(), "t".into()]);
    let one = vec![sv_single(0, int(1)), sv_single(1, int(1))];
    let t = vec![sv_single(1, int(1)), SVec::new()];
    module_algebra(op, c, vec![one, t], "k[t]/t²")
}

/// The instances on which enveloping operads are compared with their closed forms.
pub fn crosscheck_instances() -> Result<Vec<(ClosedFormKind, OAlgebra, Provenance)>> {
    let q = Ring::Rationals;
    let z = Ring::Integers;
    Ok(vec![
        (ClosedFormKind::Initial, initial_algebra(builtin_uass(q)), Published),
        (ClosedFormKind::Initial, initial_algebra(builtin_a3zero(z)), Published),
        (ClosedFormKind::Initial, initial_algebra(builtin_arity1(MonoidData::truncated_polynomial(q, 2))?), Published),
        (ClosedFormKind::Uass, ground_algebra(q), Derived),
        (ClosedFormKind::Uass, dual_numbers(q), Derived),
        (ClosedFormKind::A3zero, torsion_square_algebra(), Derived),
        (ClosedFormKind::Arity1, self_module(q)?, Derived),
    ])
}

/// Enveloping components against closed forms for every instance, one report each.
pub fn crosscheck(bounds: &TruncationBounds) -> Vec<VerificationReport> {
    let instances = match crosscheck_instances() {
        Ok(i) => i,
        Err(e) => return vec![Case::new("crosscheck", json!({ "bounds": bounds })).run(|_| Err(e))],
    };
    instances
        .into_iter()
        .map(|(kind, alg, prov)| {
            let id = format!("crosscheck/{}/{}", kind.name(), alg.name());
            let inputs = json!({
                "closed_form": kind.name(),
                "algebra": alg.name(),
                "operad": operad_summary(&**alg.operad(), bounds.max_arity),
                "ring": alg.ring().label(),
                "bounds": bounds,
            });
            Case::new(id, inputs).run(|case| {
                let env = EnvelopingOperad::new(&alg, *bounds);
                let closed = closed_form(&kind, &alg, bounds.max_arity)?;
                for (n, c) in &closed {
                    let comp = env.component(*n)?;
                    if !comp.is_stabilized() {
                        case.unstable(format!("O_A({n})"));
                    }
                    let got = InvariantsDoc::from_invariants(&comp.invariants());
                    case.check(&format!("O_A({n})"), prov, inv(c), got);
                }
                case.check("O_A(0) = A", Trivial, inv(alg.carrier()), inv(&*env.complex(0)?));
                Ok(())
            })
        })
        .collect()
}

/// Enveloping operad of `alg`, per arity and per straight-leaf window, with optional expected
/// invariants.
pub fn envelope(
    id: &str,
    alg: &OAlgebra,
    bounds: &TruncationBounds,
    expect: Option<&BTreeMap<Key<usize>, InvariantsDoc>>,
    inputs: Value,
) -> VerificationReport {
    Case::new(id, inputs).run(|case| {
        let env = EnvelopingOperad::new(alg, *bounds);
        let mut arities = BTreeMap::new();
        for n in 0..=bounds.max_arity {
            let c = env.component(n)?;
            if !c.is_stabilized() {
                case.unstable(format!("O_A({n})"));
            }
            let history: Vec<Value> =
                c.history.iter().map(|(s, i)| json!({ "straight_leaves": s, "invariants": InvariantsDoc::from_invariants(i) })).collect();
            let got = InvariantsDoc::from_invariants(&c.invariants());
            if let Some(e) = expect.and_then(|m| m.get(&Key(n))) {
                case.check_with(&format!("O_A({n})"), Input, json!(e), json!(got), e.matches(&got));
            }
            arities.insert(
                n,
                json!({
                    "invariants": got,
                    "stabilized": c.is_stabilized(),
                    "stabilized_at": c.stabilized_at,
                    "exact": c.exact,
                    "straight_leaves": c.straight_bound(),
                    "history": history,
                    "basis": env.surviving_codes(n)?,
                }),
            );
        }
        if let Some(m) = expect {
            for (Key(n), e) in m.iter().filter(|(n, _)| n.0 > bounds.max_arity) {
                case.check_with(&format!("O_A({n})"), Input, json!(e), Value::Null, false);
            }
        }
        case.record("arities", arities);
        Ok(())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Corrected,
    Original,
}

impl Construction {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(Self::Corrected),
            "original" | "naive" => Ok(Self::Original),
            other => Err(Error::InvalidInput(format!("unknown construction `{other}`, expected corrected or original"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Corrected => "corrected",
            Self::Original => "original",
        }
    }
}

/// Push-out of `alg` along a free map, with optional expected invariants of the result.
pub fn pushout(
    id: &str,
    alg: &OAlgebra,
    att: &FreeAttachment,
    bounds: &TruncationBounds,
    construction: Construction,
    expect: Option<&InvariantsDoc>,
    inputs: Value,
) -> VerificationReport {
    Case::new(id, inputs).run(|case| {
        let trace = match construction {
            Construction::Corrected => pushout_along_free_corrected(alg, att, bounds)?,
            Construction::Original => pushout_along_free_original_wrong(alg, att, bounds)?,
        };
        if !trace.stabilized {
            case.unstable(format!("{} push-out after {} stages", construction.name(), trace.stages.len()));
        }
        let got = inv(&trace.result);
        if let Some(e) = expect {
            case.check_with("push-out", Input, json!(e), json!(got), e.matches(&got));
        }
        case.record("trace", stage_summary(&trace));
        case.record("result", ComplexDoc::from_complex(&trace.result));
        case.record("f_prime_is_iso", trace.f_prime.is_iso());
        Ok(())
    })
}

/// Module and homology invariants of a complex.
pub fn homology(id: &str, c: &ChainComplex, expect: Option<&InvariantsDoc>, inputs: Value) -> VerificationReport {
    Case::new(id, inputs).run(|case| {
        let got = inv(c);
        if let Some(e) = expect {
            case.check_with("invariants", Input, json!(e), json!(got), e.matches(&got));
        }
        case.record("invariants", got);
        case.record("betti", c.betti());
        Ok(())
    })
}
