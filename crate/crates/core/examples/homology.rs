//! Homology over Z and over a prime field, and the Künneth formula on a small example.

use opalg::complex::ChainComplex;
use opalg::linalg::{ExactMatrix, Ring};

/// The cellular chains of the real projective plane: Z <-2- Z <-0- Z.
fn rp2(ring: Ring) -> ChainComplex {
    let mut c = ChainComplex::zero(ring);
    for n in 0..=2 {
        c.set_free(n, 1);
    }
    c.set_differential(2, ExactMatrix::from_i64(ring, &[&[2]]));
    c
}

fn main() -> opalg::Result<()> {
    for ring in [Ring::Integers, Ring::Rationals, Ring::prime_field(2)?] {
        let c = rp2(ring);
        println!("{ring}: H(RP²) = {}", c.invariants());
    }
    let c = rp2(Ring::Integers);
    let cc = c.tensor(&c)?;
    println!("ZZ: H(RP² × RP²) = {}", cc.invariants());
    Ok(())
}
