//! Enveloping operads of small algebras, including torsion over Z.

use opalg::algebra::{dual_numbers, torsion_square_algebra};
use opalg::envelope::{enveloping_operad, square_quotient, EnvelopingOperad, TruncationBounds};
use opalg::linalg::Ring;

fn main() -> opalg::Result<()> {
    let alg = dual_numbers(Ring::Rationals);
    let env = enveloping_operad(&alg, &TruncationBounds::default().arity(3))?;
    for n in 0..=3 {
        println!("{}: O(n = {n}) = {}", alg.name(), env.complex(n).invariants());
    }

    let alg = torsion_square_algebra();
    println!("{}: A/A² = {}", alg.name(), square_quotient(&alg)?.invariants());
    let env = EnvelopingOperad::new(&alg, TruncationBounds::default());
    for n in 0..=3 {
        let c = env.component(n)?;
        println!("{}: O(n = {n}) = {} (stable: {})", alg.name(), c.invariants(), c.is_stabilized());
    }
    Ok(())
}
