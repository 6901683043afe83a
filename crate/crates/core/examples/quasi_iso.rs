//! A quasi-isomorphism of algebras whose enveloping operads differ in arity 1.

use opalg::algebra::cycle_square_map;
use opalg::complex::is_quasi_iso;
use opalg::envelope::{induced_map, EnvelopingOperad, TruncationBounds};

fn main() -> opalg::Result<()> {
    let phi = cycle_square_map();
    println!("{} -> {}: quasi-iso {}", phi.source.name(), phi.target.name(), is_quasi_iso(&phi.map).is_quasi_iso);
    let bounds = TruncationBounds::default();
    let src = EnvelopingOperad::new(&phi.source, bounds);
    let tgt = EnvelopingOperad::new(&phi.target, bounds);
    println!("H(O_A(1)) = {}", src.complex(1)?.invariants());
    println!("H(O_B(1)) = {}", tgt.complex(1)?.invariants());
    let induced = induced_map(&phi, &src, &tgt, 1)?;
    println!("O_φ(1) quasi-iso: {}", is_quasi_iso(&induced).is_quasi_iso);
    Ok(())
}
