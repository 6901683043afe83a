//! The split coequalizer presenting an envelope component, checked identity by identity.
//! For the unital associative splitting the vertex bound has to exceed the straight-leaf bound by one.

use opalg::algebra::dual_numbers;
use opalg::envelope::{split_coequalizer_witness, SplitKind};
use opalg::linalg::Ring;

fn main() -> opalg::Result<()> {
    let alg = dual_numbers(Ring::Rationals);
    for n in 0..=2 {
        let w = split_coequalizer_witness(&SplitKind::Uass, &alg, n, n + 1, n + 2)?;
        w.check()?;
        println!(
            "arity {n}: Y = {}, X = {}, W = {}",
            w.f.source().invariants(),
            w.f.target().invariants(),
            w.w.invariants()
        );
    }
    Ok(())
}
