//! Built-in operads, their component ranks, and the axiom checker.

use std::collections::BTreeMap;

use opalg::complex::ChainComplex;
use opalg::operad::{builtin_a3zero, builtin_ass, builtin_uass, check_operad_axioms, free_operad, rank};
use opalg::linalg::Ring;

fn main() -> opalg::Result<()> {
    let z = Ring::Integers;
    for op in [builtin_uass(z), builtin_ass(z), builtin_a3zero(z)] {
        check_operad_axioms(op.as_ref(), 4)?;
        let ranks: Vec<usize> = (0..=4).map(|n| rank(op.as_ref(), n)).collect();
        println!("{:<8} ranks {ranks:?}", op.name());
    }
    let gens = BTreeMap::from([(2, ChainComplex::concentrated(z, 0, 1))]);
    let free = free_operad(z, gens, 3)?;
    let op = free.as_operad();
    check_operad_axioms(op.as_ref(), 4)?;
    for n in 1..=4 {
        let trees: Vec<String> = free.trees(n).iter().map(|t| t.render(free.generators())).collect();
        println!("F(V)({n}): {}", trees.join(", "));
    }
    Ok(())
}
