//! Fixed instances checked both by the integration tests and by the acceptance run.

use opalg::algebra::{free_algebra, ground_algebra, trivial_algebra, zero_algebra, FreeAttachment};
use opalg::complex::ChainComplex;
use opalg::envelope::{filtration_algebra_pushout, EnvelopingOperad, TruncationBounds};
use opalg::linalg::Ring;
use opalg::operad::{builtin_uass, free_operad, rank};
use opalg::tree::{enumerate_trees, LeafKind, PlanarTree, TreeSpec};

use super::{catalan, reduced_binary_trees};

fn reduced(t: &PlanarTree) -> bool {
    match t {
        PlanarTree::Leaf(_) => true,
        PlanarTree::Vertex(kids) => {
            !kids.iter().all(|k| *k == PlanarTree::Leaf(LeafKind::Straight)) && kids.iter().all(reduced)
        }
    }
}

pub const FREE_SIZE_BOUNDS: [usize; 2] = [2, 3];
pub const FREE_MAX_ARITY: usize = 3;

/// For `V = k` in arity 2: the enveloping basis of `F(V)` over the trivial algebra `k` against
/// the enumerated reduced trees and a recursive count, and `F(V)(3)` against Catalan.
pub fn free_operad_counts() -> Result<Vec<String>, String> {
    let q = Ring::Rationals;
    let mut lines = vec![];
    for size in FREE_SIZE_BOUNDS {
        let v = [(2, ChainComplex::unit(q))].into_iter().collect();
        let f = free_operad(q, v, size).map_err(|e| e.to_string())?;
        let dim3 = rank(&*f.as_operad(), 3);
        if dim3 != catalan(2) || dim3 != 2 {
            return Err(format!("F(V)(3) has dimension {dim3}"));
        }
        let alg = trivial_algebra(f.as_operad(), ChainComplex::unit(q), "k").map_err(|e| e.to_string())?;
        let env = EnvelopingOperad::new(&alg, TruncationBounds::default().arity(FREE_MAX_ARITY));
        for n in 0..=FREE_MAX_ARITY {
            let c = env.component(n).map_err(|e| e.to_string())?;
            if !c.is_stabilized() {
                return Err(format!("size {size}, arity {n} did not stabilize"));
            }
            let got = c.complex().total_rank();
            let (enumerated, recursive) = if n == 0 {
                (1, 1)
            } else {
                let spec = TreeSpec::new(n).straight(size + 1).vertices(0, size).arities(vec![2]);
                let trees = enumerate_trees(&spec).map_err(|e| e.to_string())?;
                let enumerated = trees.iter().filter(|t| reduced(t)).count();
                (enumerated, (0..=size).map(|v| reduced_binary_trees(v, n)).sum())
            };
            if got != enumerated || got != recursive {
                return Err(format!("size {size}, arity {n}: basis {got}, enumerated {enumerated}, counted {recursive}"));
            }
            lines.push(format!("size {size} arity {n}: {got}"));
        }
    }
    Ok(lines)
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub const FILTRATION_STAGES: usize = 3;
pub const FILTRATION_MAX_ARITY: usize = 3;

/// Push-out of the ground `uass`-algebra `k` along `0 -> k`: per arity, the last filtration stage
/// against the enveloping operad of the push-out algebra `k[z]` (weight-truncated the same way),
/// and the unital zero algebra whose stages all vanish.
pub fn filtration_coherence() -> Result<(), String> {
    let q = Ring::Rationals;
    let t = FILTRATION_STAGES;
    let alg = ground_algebra(q);
    let att = FreeAttachment::from_zero(&ChainComplex::unit(q), &alg);
    let bounds = TruncationBounds::default().stages(t);
    let free = free_algebra(builtin_uass(q), &ChainComplex::unit(q), t).map_err(|e| e.to_string())?;
    let env = EnvelopingOperad::new(free.algebra(), TruncationBounds::default().arity(FILTRATION_MAX_ARITY).weight(t));
    for n in 0..=FILTRATION_MAX_ARITY {
        let f = filtration_algebra_pushout(&alg, &att, n, &bounds).map_err(|e| e.to_string())?;
        let direct = env.complex(n).map_err(|e| e.to_string())?;
        if f.last().invariants() != direct.invariants() {
            return Err(format!("arity {n}: filtration {} against direct {}", f.last().invariants(), direct.invariants()));
        }
        for s in 0..=t {
            let want = binom(s + n + 1, n + 1);
            if f.stage_complex(s).total_rank() != want {
                return Err(format!("arity {n}, stage {s}: rank {} instead of {want}", f.stage_complex(s).total_rank()));
            }
        }
    }
    let zero = zero_algebra(builtin_uass(q));
    let att = FreeAttachment::from_zero(&ChainComplex::unit(q), &zero);
    for n in 0..=FILTRATION_MAX_ARITY {
        let f = filtration_algebra_pushout(&zero, &att, n, &bounds).map_err(|e| e.to_string())?;
        if !f.stabilized || f.last().total_rank() != 0 {
            return Err(format!("zero algebra, arity {n}: {} after {} stages", f.last().invariants(), f.stages.len()));
        }
    }
    Ok(())
}
