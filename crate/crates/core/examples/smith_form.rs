//! Smith normal form of an integer matrix, with the unimodular change of basis.

use opalg::linalg::{snf, ExactMatrix, Ring};

fn main() -> opalg::Result<()> {
    let m = ExactMatrix::from_i64(Ring::Integers, &[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
    let s = snf(&m)?;
    println!("M =\n{m}");
    println!("D =\n{}", s.d);
    let factors: Vec<String> = s.invariant_factors().iter().map(|x| x.to_string()).collect();
    println!("invariant factors: {}", factors.join(" | "));
    assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
    assert_eq!(s.u.mul(&s.u_inv), ExactMatrix::identity(Ring::Integers, 3));
    Ok(())
}
