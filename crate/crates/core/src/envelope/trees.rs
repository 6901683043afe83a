//! The two stages of the coequalizer as explicit tree-block complexes: corollas (`O_A⁰`) and
//! trees of height at most three whose level-2 vertices carry only straight leaves (`O_A¹`),
//! with the corolla contraction, the inner-edge contraction and the subdivision section.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::sync::Arc;

use num_traits::Zero;

use super::corolla::{corolla_basis, patterns, CorollaElem, Ctx};
use crate::algebra::{full_composite, OAlgebra};
use crate::complex::{coequalizer, sign, ChainComplex, ChainMap, Coequalizer};
use crate::error::{Error, Result};
use crate::linalg::sparse::{add_entry, sv_single};
use crate::linalg::{int, ExactMatrix, SVec, Scalar};
use crate::tree::{LeafKind, PlanarTree};

/// A level-2 edge of a height-3 tree: a snaky leaf, or a vertex `o ∈ O(q)` with `q` straight
/// leaves labelled `a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level2 {
    Snaky,
    Vertex { o: usize, a: Vec<usize> },
}

/// `root ⊗ (o_1 ⊗ a_1) ⊗ … ` on a tree whose root has the given level-2 children.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeightThreeElem {
    pub root: usize,
    pub children: Vec<Level2>,
}

impl HeightThreeElem {
    pub fn shape(&self) -> PlanarTree {
        PlanarTree::Vertex(
            self.children
                .iter()
                .map(|c| match c {
                    Level2::Snaky => PlanarTree::snaky(),
                    Level2::Vertex { a, .. } => PlanarTree::corolla(&vec![LeafKind::Straight; a.len()]),
                })
                .collect(),
        )
    }

    pub fn num_vertices(&self) -> usize {
        1 + self.children.iter().filter(|c| matches!(c, Level2::Vertex { .. })).count()
    }

    pub fn straight(&self) -> usize {
        self.children.iter().map(|c| if let Level2::Vertex { a, .. } = c { a.len() } else { 0 }).sum()
    }
}

fn corolla_shape(e: &CorollaElem) -> PlanarTree {
    PlanarTree::corolla(&e.pattern.iter().map(|s| if *s { LeafKind::Straight } else { LeafKind::Snaky }).collect::<Vec<_>>())
}

/// A complex that is a direct sum of tree blocks, with the labelled tree behind each generator.
#[derive(Clone, Debug)]
pub struct TreeBlockComplex<E> {
    pub complex: Arc<ChainComplex>,
    /// Generators in flat order.
    pub elems: Vec<E>,
    index: HashMap<E, usize>,
}

impl<E: Clone + Eq + Hash> TreeBlockComplex<E> {
    pub(crate) fn assemble(ctx: &Ctx, by_degree: BTreeMap<i64, Vec<E>>, label: impl Fn(&E) -> String, boundary: impl Fn(&E) -> Vec<(E, Scalar)>) -> Result<Self> {
        let ring = ctx.ring;
        let mut c = ChainComplex::zero(ring);
        let mut elems = vec![];
        for (d, v) in &by_degree {
            c.set_degree(*d, vec![Zero::zero(); v.len()], v.iter().map(&label).collect());
            elems.extend(v.iter().cloned());
        }
        let index: HashMap<E, usize> = elems.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        for (d, v) in &by_degree {
            let Some(below) = by_degree.get(&(d - 1)) else { continue };
            let off = c.flat_offset(d - 1);
            let mut m = ExactMatrix::zeros(ring, below.len(), v.len());
            for (j, e) in v.iter().enumerate() {
                for (t, x) in boundary(e) {
                    let r = index.get(&t).ok_or_else(|| Error::BoundMismatch("a boundary leaves the tree family".into()))?;
                    m.add_to(r - off, j, &x);
                }
            }
            c.set_differential(*d, m);
        }
        c.validate()?;
        Ok(Self { complex: Arc::new(c), elems, index })
    }

    pub fn index_of(&self, e: &E) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// A linear map into this complex defined on the generators of `source`; images outside the
    /// family are a bound mismatch.
    pub(crate) fn map_from<S>(&self, ring: crate::linalg::Ring, source: &TreeBlockComplex<S>, f: impl Fn(&S) -> Vec<(E, Scalar)>) -> Result<ChainMap> {
        let mut err = None;
        let map = ChainMap::from_fn(source.complex.clone(), self.complex.clone(), |d, j| {
            let e = &source.elems[source.complex.flat_index(d, j)];
            let off = self.complex.flat_offset(d);
            let mut out = SVec::new();
            for (t, x) in f(e) {
                match self.index.get(&t) {
                    Some(&i) => add_entry(ring, &mut out, i - off, &x),
                    None => {
                        err.get_or_insert(Error::BoundMismatch("a contraction leaves the truncation window".into()));
                    }
                }
            }
            out
        });
        match err {
            Some(e) => Err(e),
            None => Ok(map),
        }
    }
}

fn require_free(ctx: &Ctx, max_arity: usize) -> Result<()> {
    let torsion = ctx.aorders.iter().any(|o| !o.is_zero()) || (0..=max_arity).any(|m| ctx.comp(m).orders.iter().any(|o| !o.is_zero()));
    if torsion {
        return Err(Error::InvalidInput("tree blocks need free operad components and a free carrier".into()));
    }
    Ok(())
}

/// `⊕ O(n+s) ⊗ A^{⊗s}` over corollas with `n` snaky and at most `max_straight` straight leaves.
pub fn build_oa0(alg: &OAlgebra, n: usize, max_straight: usize) -> Result<TreeBlockComplex<CorollaElem>> {
    let ctx = Ctx::new(alg);
    build_oa0_ctx(&ctx, n, max_straight)
}

pub(crate) fn build_oa0_ctx(ctx: &Ctx, n: usize, max_straight: usize) -> Result<TreeBlockComplex<CorollaElem>> {
    require_free(ctx, n + max_straight)?;
    let by_degree = corolla_basis(ctx, n, max_straight, None);
    TreeBlockComplex::assemble(ctx, by_degree, |e| format!("{} {}", corolla_shape(e).code(), ctx.label(e)), |e| ctx.boundary(e))
}

/// Level-2 arity lists with `m` vertices and total arity at most `budget`.
fn arity_lists(m: usize, budget: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for q in 0..=budget {
        for mut rest in arity_lists(m - 1, budget - q) {
            rest.insert(0, q);
            out.push(rest);
        }
    }
    out
}

/// Height-≤3 trees with `n` snaky leaves in level 2, straight leaves only in level 3, at most
/// `max_straight` straight leaves and `max_vertices` inner vertices.
pub fn build_oa1(alg: &OAlgebra, n: usize, max_straight: usize, max_vertices: usize) -> Result<TreeBlockComplex<HeightThreeElem>> {
    let ctx = Ctx::new(alg);
    build_oa1_ctx(&ctx, n, max_straight, max_vertices)
}

pub(crate) fn build_oa1_ctx(ctx: &Ctx, n: usize, max_straight: usize, max_vertices: usize) -> Result<TreeBlockComplex<HeightThreeElem>> {
    let max_m = max_vertices.saturating_sub(1);
    require_free(ctx, n + max_m.max(max_straight))?;
    let mut by_degree: BTreeMap<i64, Vec<HeightThreeElem>> = BTreeMap::new();
    for m in 0..=max_m {
        let root_rank = ctx.rank_o(n + m);
        if root_rank == 0 {
            continue;
        }
        for arities in arity_lists(m, max_straight) {
            // labels per vertex: (o_j, a_j)
            let mut per_vertex: Vec<Vec<(usize, Vec<usize>)>> = vec![];
            for &q in &arities {
                let tuples = ctx.tuples(q, None);
                per_vertex.push((0..ctx.rank_o(q)).flat_map(|o| tuples.iter().map(move |a| (o, a.clone()))).collect());
            }
            if per_vertex.iter().any(Vec::is_empty) {
                continue;
            }
            let radix: Vec<usize> = per_vertex.iter().map(Vec::len).collect();
            for pattern in patterns(n, m) {
                for root in 0..root_rank {
                    let mut idx = vec![0; m];
                    loop {
                        let mut vs = idx.iter().zip(&per_vertex).map(|(&i, v)| &v[i]);
                        let children = pattern
                            .iter()
                            .map(|&is_vertex| {
                                if is_vertex {
                                    let (o, a) = vs.next().expect("one label per vertex");
                                    Level2::Vertex { o: *o, a: a.clone() }
                                } else {
                                    Level2::Snaky
                                }
                            })
                            .collect();
                        let e = HeightThreeElem { root, children };
                        by_degree.entry(height_three_degree(ctx, &e)).or_default().push(e);
                        if !crate::complex::advance_odometer(&mut idx, &radix) {
                            break;
                        }
                    }
                }
            }
        }
    }
    for v in by_degree.values_mut() {
        v.sort();
    }
    TreeBlockComplex::assemble(ctx, by_degree, |e| format!("{} {}", e.shape().code(), height_three_label(ctx, e)), |e| height_three_boundary(ctx, e))
}

fn height_three_degree(ctx: &Ctx, e: &HeightThreeElem) -> i64 {
    let mut d = ctx.comp(e.children.len()).deg[e.root];
    for c in &e.children {
        if let Level2::Vertex { o, a } = c {
            d += ctx.comp(a.len()).deg[*o] + a.iter().map(|&x| ctx.adeg[x]).sum::<i64>();
        }
    }
    d
}

fn height_three_label(ctx: &Ctx, e: &HeightThreeElem) -> String {
    let carrier = ctx.alg.carrier();
    let name = |x: usize| {
        let (d, i) = carrier.flat_to_local(x);
        carrier.labels(d)[i].clone()
    };
    let kids: Vec<String> = e
        .children
        .iter()
        .map(|c| match c {
            Level2::Snaky => "~".into(),
            Level2::Vertex { o, a } => {
                format!("{}({})", ctx.op.label(a.len(), *o), a.iter().map(|&x| name(x)).collect::<Vec<_>>().join(","))
            }
        })
        .collect();
    format!("{}({})", ctx.op.label(e.children.len(), e.root), kids.join(","))
}

/// Koszul boundary in the tensor order root, o_1, a_1, o_2, a_2, ….
fn height_three_boundary(ctx: &Ctx, e: &HeightThreeElem) -> Vec<(HeightThreeElem, Scalar)> {
    let mut out = vec![];
    let k = e.children.len();
    let root_comp = ctx.comp(k);
    for (r, c) in root_comp.complex.d_flat(&sv_single(e.root, int(1))) {
        out.push((HeightThreeElem { root: r, children: e.children.clone() }, c));
    }
    let mut before = root_comp.deg[e.root];
    let carrier = ctx.alg.carrier();
    for (j, child) in e.children.iter().enumerate() {
        let Level2::Vertex { o, a } = child else { continue };
        let comp = ctx.comp(a.len());
        for (o2, c) in comp.complex.d_flat(&sv_single(*o, int(1))) {
            let mut children = e.children.clone();
            children[j] = Level2::Vertex { o: o2, a: a.clone() };
            out.push((HeightThreeElem { root: e.root, children }, c * sign(before)));
        }
        before += comp.deg[*o];
        for l in 0..a.len() {
            for (x, c) in carrier.d_flat(&sv_single(a[l], int(1))) {
                let mut a2 = a.clone();
                a2[l] = x;
                let mut children = e.children.clone();
                children[j] = Level2::Vertex { o: *o, a: a2 };
                out.push((HeightThreeElem { root: e.root, children }, c * sign(before)));
            }
            before += ctx.adeg[a[l]];
        }
    }
    out
}

/// The parallel pair `O_A¹ ⇉ O_A⁰` and the common section.
#[derive(Clone, Debug)]
pub struct CoequalizerArrows {
    pub oa0: TreeBlockComplex<CorollaElem>,
    pub oa1: TreeBlockComplex<HeightThreeElem>,
    /// Replaces every level-2 vertex and its leaves by one straight leaf carrying the action.
    pub d_corolla: ChainMap,
    /// Composes every level-2 vertex into the root.
    pub d_edge: ChainMap,
    /// Subdivides every straight leaf by the operad unit.
    pub s: ChainMap,
}

impl CoequalizerArrows {
    /// `d_corolla ∘ s = d_edge ∘ s = id`.
    pub fn check_reflexive(&self) -> Result<()> {
        let id = ChainMap::identity_arc(self.oa0.complex.clone());
        for (name, f) in [("corolla contraction", &self.d_corolla), ("edge contraction", &self.d_edge)] {
            if !f.compose(&self.s)?.same_as(&id) {
                return Err(Error::BadSection(format!("{name} after subdivision is not the identity")));
            }
        }
        Ok(())
    }

    pub fn coequalizer(&self) -> Result<Coequalizer> {
        coequalizer(&self.d_corolla, &self.d_edge, Some(&self.s))
    }
}

/// The two contractions and the subdivision section in arity `n`. Subdivision adds one vertex per
/// straight leaf, so `max_vertices` must exceed `max_straight`.
pub fn coequalizer_arrows(alg: &OAlgebra, n: usize, max_straight: usize, max_vertices: usize) -> Result<CoequalizerArrows> {
    coequalizer_arrows_ctx(&Ctx::new(alg), n, max_straight, max_vertices)
}

pub(crate) fn coequalizer_arrows_ctx(ctx: &Ctx, n: usize, max_straight: usize, max_vertices: usize) -> Result<CoequalizerArrows> {
    if max_vertices <= max_straight {
        return Err(Error::BoundMismatch(format!(
            "subdividing {max_straight} straight leaves needs {} vertices, only {max_vertices} allowed",
            max_straight + 1
        )));
    }
    let oa0 = build_oa0_ctx(ctx, n, max_straight)?;
    let oa1 = build_oa1_ctx(ctx, n, max_straight, max_vertices)?;
    let ring = ctx.ring;
    let d_corolla = oa0.map_from(ring, &oa1, |e| contract_corollas(ctx, e))?;
    let d_edge = oa0.map_from(ring, &oa1, |e| contract_edges(ctx, e))?;
    let s = oa1.map_from(ring, &oa0, |e| subdivide(ctx, e))?;
    for m in [&d_corolla, &d_edge, &s] {
        m.validate()?;
    }
    Ok(CoequalizerArrows { oa0, oa1, d_corolla, d_edge, s })
}

fn contract_corollas(ctx: &Ctx, e: &HeightThreeElem) -> Vec<(CorollaElem, Scalar)> {
    let pattern: Vec<bool> = e.children.iter().map(|c| matches!(c, Level2::Vertex { .. })).collect();
    let mut partial: Vec<(Vec<usize>, Scalar)> = vec![(vec![], int(1))];
    for c in &e.children {
        let Level2::Vertex { o, a } = c else { continue };
        let value = ctx.alg.act(a.len(), *o, a);
        let mut next = vec![];
        for (pre, c0) in &partial {
            for (x, c1) in &value {
                let mut v = pre.clone();
                v.push(*x);
                next.push((v, c0 * c1));
            }
        }
        partial = next;
    }
    partial.into_iter().map(|(a, c)| (CorollaElem { pattern: pattern.clone(), o: e.root, a }, c)).collect()
}

fn contract_edges(ctx: &Ctx, e: &HeightThreeElem) -> Vec<(CorollaElem, Scalar)> {
    let unit = ctx.op.unit();
    let mut parts = vec![];
    let mut pattern = vec![];
    let mut a = vec![];
    let mut exponent = 0;
    let mut a_before = 0;
    for c in &e.children {
        match c {
            Level2::Snaky => {
                parts.push((1, unit.clone()));
                pattern.push(false);
            }
            Level2::Vertex { o, a: aj } => {
                // o_j moves left past the labels of earlier vertices
                exponent += ctx.comp(aj.len()).deg[*o] * a_before;
                a_before += aj.iter().map(|&x| ctx.adeg[x]).sum::<i64>();
                parts.push((aj.len(), sv_single(*o, int(1))));
                pattern.extend(std::iter::repeat_n(true, aj.len()));
                a.extend_from_slice(aj);
            }
        }
    }
    let s = sign(exponent);
    full_composite(&*ctx.op, e.children.len(), &sv_single(e.root, int(1)), &parts)
        .into_iter()
        .map(|(o, c)| (CorollaElem { pattern: pattern.clone(), o, a: a.clone() }, c * &s))
        .collect()
}

fn subdivide(ctx: &Ctx, e: &CorollaElem) -> Vec<(HeightThreeElem, Scalar)> {
    let unit = ctx.op.unit();
    let mut partial: Vec<(Vec<Level2>, Scalar)> = vec![(vec![], int(1))];
    let mut labels = e.a.iter();
    for &straight in &e.pattern {
        let mut next = vec![];
        for (pre, c0) in &partial {
            if straight {
                let x = *labels.next().expect("labels match pattern");
                for (u, c1) in &unit {
                    let mut v = pre.clone();
                    v.push(Level2::Vertex { o: *u, a: vec![x] });
                    next.push((v, c0 * c1));
                }
            } else {
                let mut v = pre.clone();
                v.push(Level2::Snaky);
                next.push((v, c0.clone()));
            }
        }
        partial = next;
    }
    partial.into_iter().map(|(children, c)| (HeightThreeElem { root: e.o, children }, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{cycle_square_algebra, dual_numbers, initial_algebra, torsion_square_algebra, zero_algebra};
    use crate::envelope::{EnvelopingOperad, TruncationBounds};
    use crate::linalg::Ring;
    use crate::operad::{builtin_initial, builtin_uass};

    #[test]
    fn corolla_blocks_for_nilpotent_operad() {
        // only arities 1 and 2 carry blocks: u(~), μ(~,|), μ(|,~) with |A| = 3
        let oa0 = build_oa0(&cycle_square_algebra(), 1, 2).unwrap();
        assert_eq!(oa0.complex.total_rank(), 1 + 2 * 3);
    }

    #[test]
    fn zero_algebra_keeps_only_snaky_corollas() {
        let oa0 = build_oa0(&zero_algebra(builtin_uass(Ring::Rationals)), 2, 3).unwrap();
        assert_eq!(oa0.complex.total_rank(), 1);
        let oa1 = build_oa1(&zero_algebra(builtin_uass(Ring::Rationals)), 2, 3, 4).unwrap();
        // corks are the only level-2 vertices without straight leaves
        assert!(oa1.elems.iter().all(|e| e.children.iter().all(|c| match c {
            Level2::Vertex { a, .. } => a.is_empty(),
            Level2::Snaky => true,
        })));
    }

    #[test]
    fn initial_operad_has_no_arity_two_block() {
        let alg = initial_algebra(builtin_initial(Ring::Rationals));
        assert_eq!(build_oa0(&alg, 2, 2).unwrap().complex.total_rank(), 0);
    }

    #[test]
    fn height_three_figure_is_in_the_family() {
        // root O(4) with level-2 vertices O(3) and a cork O(0), n = 2
        let alg = dual_numbers(Ring::Rationals);
        let oa1 = build_oa1(&alg, 2, 3, 3).unwrap();
        let e = HeightThreeElem {
            root: 0,
            children: vec![Level2::Snaky, Level2::Vertex { o: 0, a: vec![1, 0, 1] }, Level2::Snaky, Level2::Vertex { o: 0, a: vec![] }],
        };
        let i = oa1.index_of(&e).unwrap();
        assert_eq!(oa1.complex.flat_basis()[i].0, 0);
        assert_eq!(e.shape().code(), "(~(|||)~())");
    }

    #[test]
    fn arrows_are_reflexive_chain_maps() {
        for alg in [dual_numbers(Ring::Rationals), cycle_square_algebra()] {
            let arrows = coequalizer_arrows(&alg, 1, 2, 3).unwrap();
            arrows.check_reflexive().unwrap();
        }
    }

    #[test]
    fn arrows_agree_without_level_two_vertices() {
        let alg = dual_numbers(Ring::Rationals);
        let arrows = coequalizer_arrows(&alg, 2, 2, 3).unwrap();
        let n_snaky = arrows.oa1.elems.iter().position(|e| e.num_vertices() == 1).unwrap();
        let v = sv_single(n_snaky, int(1));
        assert_eq!(arrows.d_corolla.apply_flat(&v), arrows.d_edge.apply_flat(&v));
        // arity-1 level-2 vertices labelled by the unit contract the same way both times
        for (i, e) in arrows.oa1.elems.iter().enumerate() {
            let all_units = e.children.iter().all(|c| match c {
                Level2::Vertex { o, a } => a.len() == 1 && *o == 0,
                Level2::Snaky => true,
            });
            if all_units {
                let v = sv_single(i, int(1));
                assert_eq!(arrows.d_corolla.apply_flat(&v), arrows.d_edge.apply_flat(&v));
            }
        }
    }

    #[test]
    fn tree_coequalizer_matches_the_window() {
        let cases = [
            (dual_numbers(Ring::Rationals), 1, 3),
            (cycle_square_algebra(), 1, 3),
            (torsion_square_algebra(), 1, 3),
        ];
        for (alg, n, s) in cases {
            let env = EnvelopingOperad::new(&alg, TruncationBounds::default());
            let w = env.window(n, s).unwrap();
            let q = coequalizer_arrows(&alg, n, s, s + 1).unwrap().coequalizer().unwrap();
            assert_eq!(q.complex.invariants(), w.complex.invariants(), "{}", alg.name());
        }
    }

    #[test]
    fn window_too_small_for_subdivision() {
        let alg = dual_numbers(Ring::Rationals);
        assert!(matches!(coequalizer_arrows(&alg, 1, 2, 2), Err(Error::BoundMismatch(_))));
    }
}
