//! Attaching a free cell to the zero algebra: the filtered construction against the naive one.

use opalg::algebra::{pushout_along_free_corrected, pushout_along_free_original_wrong, zero_algebra, FreeAttachment};
use opalg::complex::ChainComplex;
use opalg::envelope::TruncationBounds;
use opalg::linalg::Ring;
use opalg::operad::builtin_uass;

fn main() -> opalg::Result<()> {
    let q = Ring::Rationals;
    let alg = zero_algebra(builtin_uass(q));
    let att = FreeAttachment::from_zero(&ChainComplex::unit(q), &alg);
    for bound in [2, 4, 6] {
        let bounds = TruncationBounds::default().stages(bound);
        let good = pushout_along_free_corrected(&alg, &att, &bounds)?;
        let naive = pushout_along_free_original_wrong(&alg, &att, &bounds)?;
        println!(
            "t ≤ {bound}: filtered {} (stable: {}), naive {}",
            good.result.invariants(),
            good.stabilized,
            naive.result.invariants()
        );
    }
    Ok(())
}
