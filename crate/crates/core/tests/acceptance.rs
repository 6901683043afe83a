//! One line per acceptance criterion, with its time limit; exits nonzero if any line fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use common::{instances, props};
use opalg::algebra::{
    coproduct_with_free_unit, cycle_square_map, pushout_along_free_corrected, pushout_along_free_original_wrong,
    torsion_square_algebra, zero_algebra, FreeAttachment,
};
use opalg::complex::{is_quasi_iso, ChainComplex};
use opalg::envelope::{induced_map, square_quotient, EnvelopingOperad, TruncationBounds};
use opalg::lab::{cases, Status, VerificationReport};
use opalg::linalg::{FgModule, Ring};
use opalg::operad::builtin_uass;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_pass(reports: &[VerificationReport]) -> Result<(), String> {
    for r in reports {
        ensure(r.status == Status::Pass, || format!("report {} is {}", r.case, r.status.label()))?;
    }
    Ok(())
}

fn text(e: opalg::Error) -> String {
    e.to_string()
}

const YAU_BOUND: usize = 6;

fn yau() -> Outcome {
    let q = Ring::Rationals;
    let alg = zero_algebra(builtin_uass(q));
    let att = FreeAttachment::from_zero(&ChainComplex::unit(q), &alg);
    let bounds = TruncationBounds::default().stages(YAU_BOUND);
    let good = pushout_along_free_corrected(&alg, &att, &bounds).map_err(text)?;
    ensure(good.result.is_zero(), || format!("corrected push-out is {}", good.result.invariants()))?;
    ensure(good.stabilized, || "corrected push-out did not stabilize".into())?;
    let naive = pushout_along_free_original_wrong(&alg, &att, &bounds).map_err(text)?;
    let dims: BTreeMap<i64, usize> = naive.result.degrees().into_iter().map(|n| (n, naive.result.rank(n))).collect();
    let expected: BTreeMap<i64, usize> = [(0, YAU_BOUND)].into_iter().collect();
    ensure(dims == expected, || format!("naive construction has dimensions {dims:?}"))?;
    all_pass(&cases::verify_yau(YAU_BOUND, q))?;
    Ok(format!("corrected push-out is 0; the naive one has dimension {YAU_BOUND} at bound {YAU_BOUND}"))
}

fn a3zero() -> Outcome {
    let z = Ring::Integers;
    let two = BigInt::from(2);
    let alg = torsion_square_algebra();
    let sq = square_quotient(&alg).map_err(text)?;
    let want = FgModule { ring: z, rank: 1, torsion: vec![two.clone()] };
    ensure(sq.module(0) == want && sq.degrees() == [0], || format!("A/A² = {}", sq.invariants()))?;
    let bounds = TruncationBounds::default();
    let env = EnvelopingOperad::new(&alg, bounds);
    let c = env.component(1).map_err(text)?;
    ensure(c.is_stabilized(), || "O_A(1) did not stabilize".into())?;
    let want = FgModule { ring: z, rank: 3, torsion: vec![two.clone(), two.clone()] };
    ensure(c.complex().module(0) == want && c.complex().degrees() == [0], || format!("O_A(1) = {}", c.invariants()))?;
    let cop = coproduct_with_free_unit(&alg, &bounds).map_err(text)?;
    let (_, coker) = cop.f_prime.kernel_cokernel(0);
    ensure(coker.torsion.contains(&two), || format!("coker f′ = {coker}"))?;
    all_pass(&[cases::verify_a3zero(z)])?;
    Ok(format!("A/A² = Z ⊕ Z/2, O_A(1) = Z³ ⊕ (Z/2)², coker f′ = {coker}"))
}

fn quasi_iso() -> Outcome {
    let phi = cycle_square_map();
    ensure(is_quasi_iso(&phi.map).is_quasi_iso, || "φ is not a quasi-isomorphism".into())?;
    let bounds = TruncationBounds::default();
    let (src, tgt) = (EnvelopingOperad::new(&phi.source, bounds), EnvelopingOperad::new(&phi.target, bounds));
    let (oa, ob) = (src.complex(1).map_err(text)?, tgt.complex(1).map_err(text)?);
    let (ha, hb) = (oa.homology(1), ob.homology(1));
    ensure(ha == FgModule::free(Ring::Rationals, 2), || format!("H₁(O_A(1)) = {ha}"))?;
    ensure(hb.is_zero(), || format!("H₁(O_B(1)) = {hb}"))?;
    let induced = induced_map(&phi, &src, &tgt, 1).map_err(text)?;
    ensure(!is_quasi_iso(&induced).is_quasi_iso, || "O_φ(1) is a quasi-isomorphism".into())?;
    all_pass(&[cases::verify_quasi_iso(Ring::Rationals)])?;
    Ok("φ is a quasi-isomorphism, dim H₁ O_A(1) = 2, dim H₁ O_B(1) = 0".into())
}

fn closed_forms() -> Outcome {
    let b = TruncationBounds::default();
    ensure((b.max_arity, b.max_straight_leaves, b.stabilization_window) == (4, 6, 2), || format!("default bounds {b:?}"))?;
    let reports = cases::crosscheck(&b);
    ensure(reports.len() == 7, || format!("{} instances", reports.len()))?;
    all_pass(&reports)?;
    Ok(format!("{} instances agree up to arity {}", reports.len(), b.max_arity))
}

fn free_counts() -> Outcome {
    let lines = instances::free_operad_counts()?;
    Ok(format!("F(V)(3) = 2; reduced-tree counts agree ({})", lines.join(", ")))
}

fn filtration() -> Outcome {
    instances::filtration_coherence()?;
    Ok(format!(
        "arities 0..={} agree after {} stages",
        instances::FILTRATION_MAX_ARITY,
        instances::FILTRATION_STAGES
    ))
}

fn properties() -> Outcome {
    props::d_squared_closure(props::D_SQUARED_CASES).map_err(|e| format!("d² closure: {e}"))?;
    props::snf_contract(props::SNF_CASES).map_err(|e| format!("smith form: {e}"))?;
    props::operad_suite().map_err(|e| format!("operad laws: {e}"))?;
    let witnesses = props::split_suite().map_err(|e| format!("split coequalizers: {e}"))?;
    props::kunneth(props::KUNNETH_CASES).map_err(|e| format!("künneth: {e}"))?;
    props::power_vs_cube(props::CUBE_CASES).map_err(|e| format!("pushout-product powers: {e}"))?;
    Ok(format!(
        "d² {} cases, smith form {} cases, {} operads, {witnesses} split witnesses, künneth {} cases, cube t ≤ {} on {} maps",
        props::D_SQUARED_CASES,
        props::SNF_CASES,
        props::builtin_operads().len(),
        props::KUNNETH_CASES,
        props::MAX_POWER,
        props::CUBE_CASES
    ))
}

struct Criterion {
    title: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { title: "unital zero algebra push-out", limit: secs(5), run: yau },
        Criterion { title: "torsion in the nilpotent example over Z", limit: secs(5), run: a3zero },
        Criterion { title: "quasi-isomorphism not preserved in arity 1", limit: secs(5), run: quasi_iso },
        Criterion { title: "closed forms against the coequalizer", limit: secs(60), run: closed_forms },
        Criterion { title: "free operad counts", limit: secs(10), run: free_counts },
        Criterion { title: "filtration coherence", limit: secs(30), run: filtration },
        Criterion { title: "property suites", limit: None, run: properties },
    ];
    let mut failures = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took longer than {} s", limit.as_secs())),
            (o, _) => o,
        };
        let limit = c.limit.map_or("no limit".to_string(), |l| format!("limit {} s", l.as_secs()));
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(e) => {
                failures += 1;
                ("FAIL", e)
            }
        };
        println!("criterion {} {status} ({:.2} s, {limit}) {}: {detail}", i + 1, elapsed.as_secs_f64(), c.title);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
