//! Explicit splittings of the coequalizer for algebras whose enveloping operad has a closed form.

use std::collections::HashMap;
use std::sync::Arc;

use super::corolla::{CorollaElem, Ctx};
use super::trees::{coequalizer_arrows_ctx, CoequalizerArrows, HeightThreeElem, Level2, TreeBlockComplex};
use crate::algebra::{full_composite, OAlgebra};
use crate::complex::{tensor_many, ChainComplex, ChainMap};
use crate::error::{Error, Result};
use crate::linalg::sparse::{add_entry, sv_add_scaled, sv_single};
use crate::linalg::{int, Ring, SVec, Scalar};
use crate::operad::{FTree, FreeOperad};

#[derive(Clone, Debug)]
pub enum SplitKind {
    /// `A` is the initial algebra; `W = O(n)`.
    Initial,
    /// Unital associative; `W = A^{⊗(n+1)}`.
    Uass,
    /// Associative without unit; `W = (A ⊕ k)^{⊗(n+1)}` for `n ≥ 1` and `W = A` for `n = 0`.
    Ass,
    /// Free operad with generators in degree 0; `W` is spanned by the reduced trees.
    Free(Arc<FreeOperad>),
}

/// `X ⇉ Y -> W` with `f, g : X -> Y`, `e : Y -> W` and the backwards maps `s : W -> Y`,
/// `t : Y -> X`.
#[derive(Clone, Debug)]
pub struct SplitWitness {
    pub arrows: CoequalizerArrows,
    pub w: Arc<ChainComplex>,
    pub f: ChainMap,
    pub g: ChainMap,
    pub e: ChainMap,
    pub s: ChainMap,
    pub t: ChainMap,
}

impl SplitWitness {
    /// `ef = eg`, `es = id_W`, `ft = id_Y` and `se = gt`, each by exact matrix equality.
    pub fn check(&self) -> Result<()> {
        let id_w = ChainMap::identity_arc(self.w.clone());
        let id_y = ChainMap::identity_arc(self.arrows.oa0.complex.clone());
        let identities = [
            ("ef = eg", self.e.compose(&self.f)?, self.e.compose(&self.g)?),
            ("es = id", self.e.compose(&self.s)?, id_w),
            ("ft = id", self.f.compose(&self.t)?, id_y),
            ("se = gt", self.s.compose(&self.e)?, self.g.compose(&self.t)?),
        ];
        for (name, lhs, rhs) in identities {
            if let Some(w) = first_difference(&lhs, &rhs) {
                return Err(Error::SplitIdentity { identity: name.into(), witness: w });
            }
        }
        Ok(())
    }
}

fn first_difference(a: &ChainMap, b: &ChainMap) -> Option<String> {
    let src = a.source();
    for (f, (d, j)) in src.flat_basis().into_iter().enumerate() {
        if a.apply_generator(d, j) != b.apply_generator(d, j) {
            return Some(format!("{} (flat {f})", src.labels(d)[j]));
        }
    }
    None
}

fn map_into_flat<S>(source: &TreeBlockComplex<S>, target: Arc<ChainComplex>, f: impl Fn(&S) -> Result<SVec>) -> Result<ChainMap> {
    let mut err = None;
    let map = ChainMap::from_fn(source.complex.clone(), target.clone(), |d, j| {
        let e = &source.elems[source.complex.flat_index(d, j)];
        match f(e) {
            Ok(v) => {
                let off = target.flat_offset(d);
                v.into_iter().map(|(i, x)| (i - off, x)).collect()
            }
            Err(e) => {
                err.get_or_insert(e);
                SVec::new()
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(map),
    }
}

fn map_from_flat<E: Clone + Eq + std::hash::Hash>(
    ring: Ring,
    source: Arc<ChainComplex>,
    target: &TreeBlockComplex<E>,
    f: impl Fn(usize) -> Vec<(E, Scalar)>,
) -> Result<ChainMap> {
    let mut err = None;
    let map = ChainMap::from_fn(source.clone(), target.complex.clone(), |d, j| {
        let off = target.complex.flat_offset(d);
        let mut out = SVec::new();
        for (e, x) in f(source.flat_index(d, j)) {
            match target.index_of(&e) {
                Some(i) => add_entry(ring, &mut out, i - off, &x),
                None => {
                    err.get_or_insert(Error::BoundMismatch("a backwards map leaves the truncation window".into()));
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

/// Straight labels of a corolla grouped by the snaky leaves: `n + 1` groups.
fn groups(e: &CorollaElem) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut labels = e.a.iter();
    for &straight in &e.pattern {
        if straight {
            out.last_mut().unwrap().push(*labels.next().expect("labels match pattern"));
        } else {
            out.push(vec![]);
        }
    }
    out
}

/// Tensor products of flat vectors, looked up in a tensor complex by factor indices.
fn tensor_lookup(ring: Ring, index: &HashMap<Vec<usize>, usize>, factors: &[SVec]) -> SVec {
    let mut partial: Vec<(Vec<usize>, Scalar)> = vec![(vec![], int(1))];
    for v in factors {
        let mut next = vec![];
        for (pre, c0) in &partial {
            for (x, c1) in v {
                let mut p = pre.clone();
                p.push(*x);
                next.push((p, c0 * c1));
            }
        }
        partial = next;
    }
    let mut out = SVec::new();
    for (k, c) in partial {
        add_entry(ring, &mut out, index[&k], &c);
    }
    out
}

fn tensor_power(c: &ChainComplex, k: usize) -> Result<(Arc<ChainComplex>, HashMap<Vec<usize>, usize>)> {
    let t = tensor_many(&vec![c; k])?;
    let mut index = HashMap::new();
    for (f, (d, i)) in t.complex.flat_basis().into_iter().enumerate() {
        let key = t.tuple(d, i).iter().map(|&(e, j)| c.flat_index(e, j)).collect();
        index.insert(key, f);
    }
    Ok((Arc::new(t.complex), index))
}

/// The splitting for `kind` in arity `n`, on corollas with at most `max_straight` straight leaves
/// and trees with at most `max_vertices` vertices.
pub fn split_coequalizer_witness(kind: &SplitKind, alg: &OAlgebra, n: usize, max_straight: usize, max_vertices: usize) -> Result<SplitWitness> {
    let ctx = Ctx::new(alg);
    let arrows = coequalizer_arrows_ctx(&ctx, n, max_straight, max_vertices)?;
    let ring = ctx.ring;
    let (oa0, oa1) = (&arrows.oa0, &arrows.oa1);
    let op = &ctx.op;
    let unit = op.unit();
    let carrier = alg.carrier();
    let (w, e, s, t, edge_first) = match kind {
        SplitKind::Initial => {
            let w = op.component(n);
            if carrier.invariants() != op.component(0).invariants() || carrier.total_rank() != op.component(0).total_rank() {
                return Err(Error::InvalidInput("the initial splitting needs the initial algebra".into()));
            }
            // carrier basis = O(0) basis; every straight leaf becomes a cork
            let e = map_into_flat(oa0, w.clone(), |c| {
                let parts: Vec<(usize, SVec)> = {
                    let mut labels = c.a.iter();
                    c.pattern
                        .iter()
                        .map(|&st| if st { (0, sv_single(*labels.next().unwrap(), int(1))) } else { (1, unit.clone()) })
                        .collect()
                };
                Ok(full_composite(&**op, c.arity(), &sv_single(c.o, int(1)), &parts))
            })?;
            let s = map_from_flat(ring, w.clone(), oa0, |o| vec![(CorollaElem { pattern: vec![false; n], o, a: vec![] }, int(1))])?;
            let t = oa1.map_from(ring, oa0, |c| {
                let mut labels = c.a.iter();
                let children =
                    c.pattern.iter().map(|&st| if st { Level2::Vertex { o: *labels.next().unwrap(), a: vec![] } } else { Level2::Snaky }).collect();
                vec![(HeightThreeElem { root: c.o, children }, int(1))]
            })?;
            (w, e, s, t, false)
        }
        SplitKind::Uass => {
            let (w, index) = tensor_power(carrier, n + 1)?;
            let e = map_into_flat(oa0, w.clone(), |c| {
                let factors: Vec<SVec> = groups(c).iter().map(|g| alg.act(g.len(), 0, g)).collect();
                Ok(tensor_lookup(ring, &index, &factors))
            })?;
            let keys: Vec<Vec<usize>> = {
                let mut k: Vec<(usize, Vec<usize>)> = index.iter().map(|(k, v)| (*v, k.clone())).collect();
                k.sort();
                k.into_iter().map(|(_, k)| k).collect()
            };
            let s = map_from_flat(ring, w.clone(), oa0, |f| {
                let xs = &keys[f];
                let mut pattern = vec![true];
                for _ in 0..n {
                    pattern.extend([false, true]);
                }
                vec![(CorollaElem { pattern, o: 0, a: xs.clone() }, int(1))]
            })?;
            let t = oa1.map_from(ring, oa0, |c| {
                let mut children = vec![];
                for (k, g) in groups(c).into_iter().enumerate() {
                    if k > 0 {
                        children.push(Level2::Snaky);
                    }
                    children.push(Level2::Vertex { o: 0, a: g });
                }
                vec![(HeightThreeElem { root: 0, children }, int(1))]
            })?;
            (w, e, s, t, true)
        }
        SplitKind::Ass => {
            let plus = ChainComplex::direct_sum(&[carrier, &ChainComplex::unit(ring)], ring)?;
            let one = plus.flat_index(0, carrier.rank(0));
            let (w, index) = if n == 0 {
                let w = Arc::new(carrier.clone());
                let index = (0..carrier.total_rank()).map(|x| (vec![x], x)).collect();
                (w, index)
            } else {
                tensor_power(&plus, n + 1)?
            };
            // A sits first in A ⊕ k, so flat indices agree degree by degree
            let to_plus = |v: SVec| -> SVec {
                v.into_iter()
                    .map(|(x, c)| {
                        let (d, i) = carrier.flat_to_local(x);
                        (plus.flat_index(d, i), c)
                    })
                    .collect()
            };
            let e = map_into_flat(oa0, w.clone(), |c| {
                let factors: Vec<SVec> = groups(c)
                    .iter()
                    .map(|g| if g.is_empty() { sv_single(one, int(1)) } else if n == 0 { alg.act(g.len(), 0, g) } else { to_plus(alg.act(g.len(), 0, g)) })
                    .collect();
                Ok(tensor_lookup(ring, &index, &factors))
            })?;
            let mut keys: Vec<(usize, Vec<usize>)> = index.iter().map(|(k, v)| (*v, k.clone())).collect();
            keys.sort();
            let from_plus = |x: usize| -> Option<usize> {
                if n == 0 {
                    return Some(x);
                }
                let (d, i) = plus.flat_to_local(x);
                (x != one).then(|| carrier.flat_index(d, i))
            };
            let s = map_from_flat(ring, w.clone(), oa0, |f| {
                let mut pattern = vec![];
                let mut a = vec![];
                for (k, &x) in keys[f].1.iter().enumerate() {
                    if k > 0 {
                        pattern.push(false);
                    }
                    if let Some(y) = from_plus(x) {
                        pattern.push(true);
                        a.push(y);
                    }
                }
                vec![(CorollaElem { pattern, o: 0, a }, int(1))]
            })?;
            let t = oa1.map_from(ring, oa0, |c| {
                let mut children = vec![];
                for (k, g) in groups(c).into_iter().enumerate() {
                    if k > 0 {
                        children.push(Level2::Snaky);
                    }
                    if !g.is_empty() {
                        children.push(Level2::Vertex { o: 0, a: g });
                    }
                }
                vec![(HeightThreeElem { root: 0, children }, int(1))]
            })?;
            (w, e, s, t, true)
        }
        SplitKind::Free(fo) => free_splitting(&ctx, fo, oa0, oa1)?,
    };
    let (f, g) = if edge_first {
        (arrows.d_edge.clone(), arrows.d_corolla.clone())
    } else {
        (arrows.d_corolla.clone(), arrows.d_edge.clone())
    };
    for m in [&e, &s, &t] {
        m.validate()?;
    }
    Ok(SplitWitness { arrows, w, f, g, e, s, t })
}

enum RootLeaf {
    Snaky,
    /// An all-straight subtree cut off at a root leaf.
    Piece(FTree),
}

enum Pruned {
    /// Every leaf below is straight (vacuously so for a cork).
    Straight(FTree),
    /// What stays at the root, and what each of its leaves stands for, in order.
    Mixed(FTree, Vec<RootLeaf>),
}

fn prune(t: &FTree, kinds: &mut impl Iterator<Item = bool>) -> Pruned {
    match t {
        FTree::Leaf => {
            if kinds.next().expect("one kind per leaf") {
                Pruned::Straight(FTree::Leaf)
            } else {
                Pruned::Mixed(FTree::Leaf, vec![RootLeaf::Snaky])
            }
        }
        FTree::Node { gen, children } => {
            let parts: Vec<Pruned> = children.iter().map(|c| prune(c, kinds)).collect();
            if parts.iter().all(|p| matches!(p, Pruned::Straight(_))) {
                return Pruned::Straight(t.clone());
            }
            let mut kids = vec![];
            let mut leaves = vec![];
            for p in parts {
                match p {
                    Pruned::Straight(s) => {
                        kids.push(FTree::Leaf);
                        leaves.push(RootLeaf::Piece(s));
                    }
                    Pruned::Mixed(r, ls) => {
                        kids.push(r);
                        leaves.extend(ls);
                    }
                }
            }
            Pruned::Mixed(FTree::Node { gen: *gen, children: kids }, leaves)
        }
    }
}

/// The pruned root, its leaf pattern, and each cut-off piece with its straight labels.
fn decompose(fo: &FreeOperad, c: &CorollaElem) -> (FTree, Vec<bool>, Vec<(FTree, Vec<usize>)>) {
    let tree = &fo.trees(c.arity())[c.o];
    let (root, leaves) = match prune(tree, &mut c.pattern.iter().copied()) {
        Pruned::Straight(s) => (FTree::Leaf, vec![RootLeaf::Piece(s)]),
        Pruned::Mixed(r, ls) => (r, ls),
    };
    let mut pattern = vec![];
    let mut pieces = vec![];
    let mut labels = c.a.iter().copied();
    for l in leaves {
        match l {
            RootLeaf::Snaky => pattern.push(false),
            RootLeaf::Piece(p) => {
                let q = p.num_leaves();
                pieces.push((p, labels.by_ref().take(q).collect()));
                pattern.push(true);
            }
        }
    }
    (root, pattern, pieces)
}

fn free_splitting(
    ctx: &Ctx,
    fo: &Arc<FreeOperad>,
    oa0: &TreeBlockComplex<CorollaElem>,
    oa1: &TreeBlockComplex<HeightThreeElem>,
) -> Result<(Arc<ChainComplex>, ChainMap, ChainMap, ChainMap, bool)> {
    let ring = ctx.ring;
    if fo.generators().values().any(|v| v.degrees().iter().any(|&d| d != 0)) {
        return Err(Error::InvalidInput("the free splitting needs generators in degree 0".into()));
    }
    let index = |m: usize, t: &FTree| {
        fo.tree_index(m, t).ok_or_else(|| Error::BoundMismatch("a pruned tree exceeds the size bound".into()))
    };
    // W: the corollas that prune to themselves
    let mut reduced: std::collections::BTreeMap<i64, Vec<CorollaElem>> = std::collections::BTreeMap::new();
    for (f, c) in oa0.elems.iter().enumerate() {
        let (_, _, pieces) = decompose(fo, c);
        if pieces.iter().all(|(p, _)| *p == FTree::Leaf) {
            let d = oa0.complex.flat_basis()[f].0;
            reduced.entry(d).or_default().push(c.clone());
        }
    }
    let w = TreeBlockComplex::assemble(ctx, reduced, |c| ctx.label(c), |c| ctx.boundary(c))?;
    let wc = w.complex.clone();
    let e = map_into_flat(oa0, wc.clone(), |c| {
        let (root, pattern, pieces) = decompose(fo, c);
        let o = index(pattern.len(), &root)?;
        let mut partial: Vec<(Vec<usize>, Scalar)> = vec![(vec![], int(1))];
        for (p, a) in &pieces {
            let value = ctx.alg.act(p.num_leaves(), index(p.num_leaves(), p)?, a);
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
        let mut out = SVec::new();
        for (a, x) in partial {
            let elem = CorollaElem { pattern: pattern.clone(), o, a };
            let f = w.index_of(&elem).ok_or_else(|| Error::BoundMismatch("a pruned corolla leaves the window".into()))?;
            sv_add_scaled(ring, &mut out, &sv_single(f, int(1)), &x);
        }
        Ok(out)
    })?;
    let s = map_from_flat(ring, wc.clone(), oa0, |f| vec![(w.elems[f].clone(), int(1))])?;
    let err = std::cell::RefCell::new(None);
    let t = oa1.map_from(ring, oa0, |c| {
        let (root, pattern, pieces) = decompose(fo, c);
        let mut pieces = pieces.into_iter();
        let mut children = vec![];
        for st in pattern.iter() {
            if *st {
                let (p, a) = pieces.next().expect("a piece per straight root leaf");
                match index(p.num_leaves(), &p) {
                    Ok(o) => children.push(Level2::Vertex { o, a }),
                    Err(e) => {
                        err.borrow_mut().get_or_insert(e);
                        return vec![];
                    }
                }
            } else {
                children.push(Level2::Snaky);
            }
        }
        match index(pattern.len(), &root) {
            Ok(r) => vec![(HeightThreeElem { root: r, children }, int(1))],
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                vec![]
            }
        }
    })?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok((wc, e, s, t, true))
}
