//! Enumerating planar trees and working with their string codes.

use opalg::tree::{decode, enumerate_trees, TreeSpec};

fn main() -> opalg::Result<()> {
    for n in 1..=5 {
        let binary = enumerate_trees(&TreeSpec::new(n).arities(vec![2]))?.len();
        let reduced = enumerate_trees(&TreeSpec::new(n).arities((2..=n.max(2)).collect()))?.len();
        println!("{n} leaves: {binary} binary trees, {reduced} reduced trees");
    }
    for t in enumerate_trees(&TreeSpec::new(2).straight(1).arities(vec![2]))? {
        println!("{t}  code {}", t.code());
    }
    let t = decode("(~(|())^)")?;
    println!("{} has arity {} and {} vertices", t.code(), t.arity(), t.num_vertices());
    let g = t.graft(1, &decode("(~~)")?)?;
    println!("grafting (~~) at the first leaf gives {}", g.code());
    Ok(())
}
