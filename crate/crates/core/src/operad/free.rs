use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Operad, OperadRef};
use crate::complex::{advance_odometer, sign, ChainComplex};
use crate::error::{Error, Result};
use crate::linalg::sparse::{add_entry, sv_single};
use crate::linalg::{int, ExactMatrix, Ring, SVec};
use crate::tree::{enumerate_trees, PlanarTree, TreeSpec};

/// Generators of a free operad: `V(a)` for each arity `a` in the support.
pub type SequenceV = BTreeMap<usize, ChainComplex>;

/// A planar tree whose vertices carry basis elements `(degree, index)` of `V(arity)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FTree {
    Leaf,
    Node { gen: (i64, usize), children: Vec<FTree> },
}

impl FTree {
    pub fn num_leaves(&self) -> usize {
        match self {
            FTree::Leaf => 1,
            FTree::Node { children, .. } => children.iter().map(FTree::num_leaves).sum(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        match self {
            FTree::Leaf => 0,
            FTree::Node { children, .. } => 1 + children.iter().map(FTree::num_vertices).sum::<usize>(),
        }
    }

    pub fn degree(&self) -> i64 {
        match self {
            FTree::Leaf => 0,
            FTree::Node { gen, children } => gen.0 + children.iter().map(FTree::degree).sum::<i64>(),
        }
    }

    /// The underlying planar tree with snaky leaves.
    pub fn shape(&self) -> PlanarTree {
        match self {
            FTree::Leaf => PlanarTree::snaky(),
            FTree::Node { children, .. } => PlanarTree::Vertex(children.iter().map(FTree::shape).collect()),
        }
    }

    /// Vertices in preorder as `(gen, arity)`.
    pub fn vertices(&self) -> Vec<((i64, usize), usize)> {
        let mut out = vec![];
        self.walk(&mut out);
        out
    }

    fn walk(&self, out: &mut Vec<((i64, usize), usize)>) {
        if let FTree::Node { gen, children } = self {
            out.push((*gen, children.len()));
            for c in children {
                c.walk(out);
            }
        }
    }

    /// Labels the vertices of `shape` in preorder.
    pub fn from_shape(shape: &PlanarTree, labels: &[(i64, usize)]) -> FTree {
        let mut it = labels.iter();
        let t = Self::label_rec(shape, &mut it);
        debug_assert!(it.next().is_none());
        t
    }

    fn label_rec<'a>(shape: &PlanarTree, it: &mut impl Iterator<Item = &'a (i64, usize)>) -> FTree {
        match shape {
            PlanarTree::Leaf(_) => FTree::Leaf,
            PlanarTree::Vertex(kids) => {
                let gen = *it.next().expect("enough labels");
                FTree::Node { gen, children: kids.iter().map(|k| Self::label_rec(k, it)).collect() }
            }
        }
    }

    fn relabel(&self, k: usize, gen: (i64, usize)) -> FTree {
        let mut seen = 0;
        self.relabel_rec(k, gen, &mut seen)
    }

    fn relabel_rec(&self, k: usize, new: (i64, usize), seen: &mut usize) -> FTree {
        match self {
            FTree::Leaf => FTree::Leaf,
            FTree::Node { gen, children } => {
                let here = *seen;
                *seen += 1;
                let gen = if here == k { new } else { *gen };
                FTree::Node { gen, children: children.iter().map(|c| c.relabel_rec(k, new, seen)).collect() }
            }
        }
    }

    /// Grafts `other` onto leaf `i` (1-based). Also returns the total label degree of the
    /// vertices that come after that leaf in preorder.
    pub fn graft(&self, i: usize, other: &FTree) -> (FTree, i64) {
        let mut leaf = 0;
        let mut after = 0;
        let mut done = false;
        let t = self.graft_rec(i, other, &mut leaf, &mut after, &mut done);
        (t, after)
    }

    fn graft_rec(&self, i: usize, other: &FTree, leaf: &mut usize, after: &mut i64, done: &mut bool) -> FTree {
        match self {
            FTree::Leaf => {
                *leaf += 1;
                if *leaf == i {
                    *done = true;
                    other.clone()
                } else {
                    FTree::Leaf
                }
            }
            FTree::Node { gen, children } => {
                if *done {
                    *after += gen.0;
                }
                let children = children.iter().map(|c| c.graft_rec(i, other, leaf, after, done)).collect();
                FTree::Node { gen: *gen, children }
            }
        }
    }

    pub fn render(&self, v: &SequenceV) -> String {
        match self {
            FTree::Leaf => "|".into(),
            FTree::Node { gen, children } => {
                let name = v[&children.len()].labels(gen.0)[gen.1].clone();
                if children.is_empty() {
                    name
                } else {
                    let kids: Vec<String> = children.iter().map(|c| c.render(v)).collect();
                    format!("{name}({})", kids.join(","))
                }
            }
        }
    }
}

struct Component {
    complex: Arc<ChainComplex>,
    trees: Vec<FTree>,
    index: HashMap<FTree, usize>,
}

/// The free operad on `V`, truncated to trees with at most `size_bound` vertices. Composites
/// exceeding the bound are zero.
pub struct FreeOperad {
    ring: Ring,
    gens: SequenceV,
    size_bound: usize,
    cache: RwLock<HashMap<usize, Arc<Component>>>,
}

impl fmt::Debug for FreeOperad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FreeOperad")
            .field("arities", &self.gens.keys().collect::<Vec<_>>())
            .field("size_bound", &self.size_bound)
            .finish()
    }
}

pub fn free_operad(ring: Ring, gens: SequenceV, size_bound: usize) -> Result<Arc<FreeOperad>> {
    for (a, c) in &gens {
        if c.ring() != ring {
            return Err(Error::RingMismatch(ring.label(), c.ring().label()));
        }
        if !c.is_free() {
            return Err(Error::InvalidInput(format!("generators in arity {a} must be free")));
        }
    }
    let gens = gens.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    Ok(Arc::new(FreeOperad { ring, gens, size_bound, cache: RwLock::new(HashMap::new()) }))
}

impl FreeOperad {
    pub fn generators(&self) -> &SequenceV {
        &self.gens
    }

    pub fn size_bound(&self) -> usize {
        self.size_bound
    }

    pub fn as_operad(self: &Arc<Self>) -> OperadRef {
        self.clone()
    }

    /// Basis trees of arity `n` in flat order.
    pub fn trees(&self, n: usize) -> Vec<FTree> {
        self.get(n).trees.clone()
    }

    pub fn tree_index(&self, n: usize, t: &FTree) -> Option<usize> {
        self.get(n).index.get(t).copied()
    }

    fn get(&self, n: usize) -> Arc<Component> {
        if let Some(c) = self.cache.read().unwrap().get(&n) {
            return c.clone();
        }
        let built = Arc::new(self.build(n));
        // a concurrent builder produces the same value, so whichever lands first wins
        self.cache.write().unwrap().entry(n).or_insert(built).clone()
    }

    fn build(&self, n: usize) -> Component {
        let arities: Vec<usize> = self.gens.keys().copied().collect();
        let spec = TreeSpec::new(n).vertices(0, self.size_bound).arities(arities);
        let shapes = enumerate_trees(&spec).expect("bounded");
        let mut by_degree: BTreeMap<i64, Vec<FTree>> = BTreeMap::new();
        for shape in shapes {
            let verts = shape_arities(&shape);
            let choices: Vec<Vec<(i64, usize)>> = verts
                .iter()
                .map(|a| {
                    let v = &self.gens[a];
                    v.flat_basis()
                })
                .collect();
            let radix: Vec<usize> = choices.iter().map(Vec::len).collect();
            let mut idx = vec![0; radix.len()];
            loop {
                let labels: Vec<(i64, usize)> = idx.iter().zip(&choices).map(|(&k, c)| c[k]).collect();
                let t = FTree::from_shape(&shape, &labels);
                by_degree.entry(t.degree()).or_default().push(t);
                if !advance_odometer(&mut idx, &radix) {
                    break;
                }
            }
        }
        let mut complex = ChainComplex::zero(self.ring);
        for (d, ts) in &by_degree {
            let labels = ts.iter().map(|t| t.render(&self.gens)).collect();
            complex.set_degree(*d, vec![BigInt::zero(); ts.len()], labels);
        }
        let local: HashMap<&FTree, usize> =
            by_degree.values().flat_map(|ts| ts.iter().enumerate().map(|(i, t)| (t, i))).collect();
        for (d, ts) in &by_degree {
            let Some(lower) = by_degree.get(&(d - 1)) else { continue };
            let mut m = ExactMatrix::zeros(self.ring, lower.len(), ts.len());
            for (j, t) in ts.iter().enumerate() {
                let mut before = 0;
                for (k, (gen, a)) in t.vertices().into_iter().enumerate() {
                    let v = &self.gens[&a];
                    let dv = v.differential(gen.0);
                    let s = sign(before);
                    for r in 0..dv.rows() {
                        let c = dv.get(r, gen.1);
                        if !c.is_zero() {
                            let image = t.relabel(k, (gen.0 - 1, r));
                            m.add_to(local[&image], j, &(c * &s));
                        }
                    }
                    before += gen.0;
                }
            }
            complex.set_differential(*d, m);
        }
        let trees: Vec<FTree> = by_degree.into_values().flatten().collect();
        let index = trees.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Component { complex: Arc::new(complex), trees, index }
    }
}

fn shape_arities(t: &PlanarTree) -> Vec<usize> {
    let mut out = vec![];
    fn rec(t: &PlanarTree, out: &mut Vec<usize>) {
        if let PlanarTree::Vertex(k) = t {
            out.push(k.len());
            for c in k {
                rec(c, out);
            }
        }
    }
    rec(t, &mut out);
    out
}

impl Operad for FreeOperad {
    fn name(&self) -> String {
        let arities: Vec<String> = self.gens.keys().map(|a| a.to_string()).collect();
        format!("free[{}; ≤{}]", arities.join(","), self.size_bound)
    }

    fn ring(&self) -> Ring {
        self.ring
    }

    fn component(&self, n: usize) -> Arc<ChainComplex> {
        self.get(n).complex.clone()
    }

    fn compose(&self, p: usize, q: usize, i: usize, a: usize, b: usize) -> SVec {
        let (cp, cq) = (self.get(p), self.get(q));
        let (s, t) = (&cp.trees[a], &cq.trees[b]);
        if s.num_vertices() + t.num_vertices() > self.size_bound {
            return SVec::new();
        }
        let (g, after) = s.graft(i, t);
        let target = self.get(p + q - 1);
        let mut out = SVec::new();
        add_entry(self.ring, &mut out, target.index[&g], &sign(after * t.degree()));
        out
    }

    fn unit(&self) -> SVec {
        sv_single(self.get(1).index[&FTree::Leaf], int(1))
    }

    fn arity_bound(&self) -> Option<usize> {
        let max = self.gens.keys().copied().max().unwrap_or(0);
        Some(1 + self.size_bound * max.saturating_sub(1))
    }

    fn label(&self, n: usize, flat: usize) -> String {
        self.get(n).trees[flat].render(&self.gens)
    }
}
