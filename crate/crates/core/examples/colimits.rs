//! Push-outs of chain complexes and iterated push-out products.

use std::collections::BTreeMap;

use opalg::complex::{pushout, pushout_product_power, ChainComplex, ChainMap};
use opalg::linalg::{ExactMatrix, Ring};

fn main() -> opalg::Result<()> {
    let q = Ring::Rationals;
    // the boundary inclusion S⁰ -> D¹ : k in degree 0 into k <-1- k
    let sphere = ChainComplex::concentrated(q, 0, 1);
    let mut disk = ChainComplex::zero(q);
    disk.set_free(0, 1);
    disk.set_free(1, 1);
    disk.set_differential(1, ExactMatrix::from_i64(q, &[&[1]]));
    let i = ChainMap::new(sphere.clone(), disk.clone(), BTreeMap::from([(0, ExactMatrix::from_i64(q, &[&[1]]))]))?;

    let glued = pushout(&i, &i)?;
    println!("D¹ ∪_S⁰ D¹: {}", glued.complex.invariants());

    for t in 1..=3 {
        let p = pushout_product_power(&i, t)?;
        println!("□^{t}: source {} -> target {}", p.source().invariants(), p.target().invariants());
    }
    Ok(())
}
