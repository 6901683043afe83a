//! Cell-by-cell filtrations along free attachments.
//!
//! Stage `t` attaches blocks `C ⊗ f^{□t}`: fixed factors carry elements of an enveloping operad
//! and the `t` cube coordinates carry `f`. A punctured vertex of a block's cube has some
//! coordinate at the source of `f`; it is sent to blocks with fewer coordinates by corking that
//! coordinate and composing, and from there into the current stage through the characteristic
//! maps attached earlier. The vertex maps have to agree along the cube edges, which is checked
//! when they are glued into a map out of the latching object.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use super::{CorollaElem, EnvelopingOperad, TruncationBounds};
use crate::algebra::{FreeAttachment, OAlgebra};
use crate::complex::{pushout, sign, tensor_cube, tensor_many, ChainComplex, ChainMap, CubeFactor, TensorComplex, TensorCube};
use crate::error::{Error, Result};
use crate::linalg::sparse::{sv_add_scaled, sv_single};
use crate::linalg::{int, Ring, SVec, Scalar};

pub(crate) type Tuple = Vec<(i64, usize)>;

/// A generator of some vertex of some block, with a coefficient.
pub(crate) struct Term<K> {
    pub key: K,
    pub vertex: usize,
    pub tuple: Tuple,
    pub coeff: Scalar,
}

pub(crate) trait CellFamily {
    type Key: Clone + Eq + Hash + fmt::Debug;

    fn ring(&self) -> Ring;

    /// The complex the filtration starts from.
    fn initial(&self) -> Result<Arc<ChainComplex>>;

    /// Blocks with `t` cube coordinates.
    fn keys(&self, t: usize) -> Result<Vec<Self::Key>>;

    fn label(&self, key: &Self::Key) -> String;

    fn factors(&self, key: &Self::Key) -> Result<Vec<CubeFactor>>;

    /// Image of a generator of a punctured vertex in blocks with fewer coordinates.
    fn contract(&self, key: &Self::Key, vertex: usize, tuple: &[(i64, usize)]) -> Result<Vec<Term<Self::Key>>>;

    /// Image of a generator of a block without coordinates in the initial complex (flat).
    fn base(&self, key: &Self::Key, tuple: &[(i64, usize)]) -> Result<SVec>;

    /// Whether stage `t` and every later one is known to attach nothing new.
    fn tail_trivial(&self, t: usize) -> bool;
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub label: String,
    /// Latching map of the block's cube.
    pub latching: ChainMap,
    /// Attaching map from the latching object into the previous stage.
    pub attaching: ChainMap,
    /// Map from the block into the stage it was attached in.
    pub characteristic: ChainMap,
}

#[derive(Clone, Debug)]
pub struct CellStage {
    pub t: usize,
    pub complex: Arc<ChainComplex>,
    /// The map from the previous stage.
    pub phi: ChainMap,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug)]
pub struct CellFiltration {
    pub initial: Arc<ChainComplex>,
    pub stages: Vec<CellStage>,
    /// From the initial complex to the last stage.
    pub to_last: ChainMap,
    /// The last maps were isomorphisms and no later stage can attach anything.
    pub stabilized: bool,
}

impl CellFiltration {
    pub fn last(&self) -> Arc<ChainComplex> {
        self.to_last.target_arc()
    }

    /// Complex after stage `t`, with `t = 0` the initial one.
    pub fn stage_complex(&self, t: usize) -> Arc<ChainComplex> {
        if t == 0 {
            self.initial.clone()
        } else {
            self.stages[t - 1].complex.clone()
        }
    }

    pub fn require_stable(self) -> Result<Self> {
        if self.stabilized {
            Ok(self)
        } else {
            Err(Error::NotStabilized(format!("the filtration still changes after {} stages", self.stages.len())))
        }
    }
}

struct Eval<'a, F: CellFamily> {
    fam: &'a F,
    cubes: HashMap<F::Key, Arc<TensorCube>>,
    chars: HashMap<F::Key, ChainMap>,
    to_cur: ChainMap,
    memo: HashMap<(F::Key, usize, Tuple), SVec>,
}

impl<F: CellFamily> Eval<'_, F> {
    fn cube(&mut self, key: &F::Key) -> Result<Arc<TensorCube>> {
        if let Some(c) = self.cubes.get(key) {
            return Ok(c.clone());
        }
        let c = Arc::new(tensor_cube(&self.fam.factors(key)?)?);
        self.cubes.insert(key.clone(), c.clone());
        Ok(c)
    }

    /// Image in the current stage, as a flat vector.
    fn eval(&mut self, key: &F::Key, vertex: usize, tuple: &[(i64, usize)]) -> Result<SVec> {
        let memo_key = (key.clone(), vertex, tuple.to_vec());
        if let Some(v) = self.memo.get(&memo_key) {
            return Ok(v.clone());
        }
        let cube = self.cube(key)?;
        let cur = self.to_cur.target_arc();
        let mut out = SVec::new();
        if cube.cube.dim() == 0 {
            out = self.to_cur.apply_flat(&self.fam.base(key, tuple)?);
        } else if vertex == cube.cube.full() {
            let Some(ch) = self.chars.get(key) else {
                return Err(Error::BoundMismatch(format!("block {} is needed but was never attached", self.fam.label(key))));
            };
            let (d, i) = cube.tensors[vertex]
                .index_of(tuple)
                .ok_or_else(|| Error::InvalidInput(format!("no generator {tuple:?} in block {}", self.fam.label(key))))?;
            let off = cur.flat_offset(d);
            out = ch.apply_generator(d, i).into_iter().map(|(r, x)| (off + r, x)).collect();
        } else {
            let ring = self.fam.ring();
            for term in self.fam.contract(key, vertex, tuple)? {
                let v = self.eval(&term.key, term.vertex, &term.tuple)?;
                sv_add_scaled(ring, &mut out, &v, &term.coeff);
            }
        }
        cur.reduce_flat(&mut out);
        self.memo.insert(memo_key, out.clone());
        Ok(out)
    }

    fn vertex_map(&mut self, key: &F::Key, vertex: usize) -> Result<ChainMap> {
        let cube = self.cube(key)?;
        let src = cube.cube.vertex_arc(vertex);
        let tgt = self.to_cur.target_arc();
        let err = RefCell::new(None);
        let this = RefCell::new(self);
        let map = ChainMap::from_fn(src, tgt.clone(), |d, j| {
            let tuple = cube.tensors[vertex].tuple(d, j).to_vec();
            match this.borrow_mut().eval(key, vertex, &tuple) {
                Ok(v) => {
                    let off = tgt.flat_offset(d);
                    let mut local = SVec::new();
                    for (f, x) in v {
                        if tgt.flat_to_local(f).0 != d {
                            err.borrow_mut().get_or_insert(Error::Shape(format!("image of {tuple:?} is not homogeneous")));
                        } else {
                            local.insert(f - off, x);
                        }
                    }
                    local
                }
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    SVec::new()
                }
            }
        });
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(map),
        }
    }
}

/// Runs `stages` stages, declaring stability once the last `window` maps are isomorphisms and the
/// family reports that nothing more gets attached.
pub(crate) fn run_cells<F: CellFamily>(fam: &F, stages: usize, window: usize) -> Result<CellFiltration> {
    let ring = fam.ring();
    let initial = fam.initial()?;
    let mut ev = Eval {
        fam,
        cubes: HashMap::new(),
        chars: HashMap::new(),
        to_cur: ChainMap::identity_arc(initial.clone()),
        memo: HashMap::new(),
    };
    let mut out: Vec<CellStage> = vec![];
    for t in 1..=stages {
        let prev = ev.to_cur.target_arc();
        let mut keys = vec![];
        let mut latchings = vec![];
        let mut attachings = vec![];
        for key in fam.keys(t)? {
            let factors = fam.factors(&key)?;
            if factors.iter().any(|f| matches!(f, CubeFactor::Fixed(c) if c.total_rank() == 0)) {
                continue;
            }
            let cube = ev.cube(&key)?;
            let lat = cube.cube.latching()?;
            let mut vmaps = BTreeMap::new();
            for v in 0..cube.cube.full() {
                vmaps.insert(v, ev.vertex_map(&key, v)?);
            }
            let psi = lat.map_out(&vmaps, prev.clone()).map_err(|e| match e {
                Error::Descent(m) => Error::Descent(format!("attaching map of {}: {m}", fam.label(&key))),
                e => e,
            })?;
            keys.push(key);
            latchings.push(lat.map().clone());
            attachings.push(psi);
        }
        let mut cells = vec![];
        let phi = if keys.is_empty() {
            ChainMap::identity_arc(prev.clone())
        } else {
            let psi = ChainMap::copair(&attachings, prev.clone())?;
            let lat = ChainMap::block_diagonal(&latchings, ring)?;
            let po = pushout(&psi, &lat)?;
            let blocks: Vec<&ChainComplex> = latchings.iter().map(|l| l.target()).collect();
            for (k, key) in keys.iter().enumerate() {
                let ch = po.leg_y.compose(&ChainMap::inclusion(&blocks, k, ring)?)?;
                cells.push(Cell {
                    label: fam.label(key),
                    latching: latchings[k].clone(),
                    attaching: attachings[k].clone(),
                    characteristic: ch.clone(),
                });
            }
            po.leg_a
        };
        ev.to_cur = phi.compose(&ev.to_cur)?;
        for c in ev.chars.values_mut() {
            *c = phi.compose(c)?;
        }
        for (key, cell) in keys.into_iter().zip(&cells) {
            ev.chars.insert(key, cell.characteristic.clone());
        }
        ev.memo.clear();
        out.push(CellStage { t, complex: phi.target_arc(), phi, cells });
    }
    let tail_iso = window > 0 && out.len() >= window && out[out.len() - window..].iter().all(|s| s.phi.is_iso());
    let stabilized = tail_iso && fam.tail_trivial(stages + 1);
    Ok(CellFiltration { initial, stages: out, to_last: ev.to_cur, stabilized })
}

fn drop_bit(v: usize, i: usize) -> usize {
    (v & ((1 << i) - 1)) | ((v >> (i + 1)) << i)
}

fn lowest_zero_bit(v: usize) -> usize {
    (!v).trailing_zeros() as usize
}

/// Blocks `O_A(t+n) ⊗ f^{⊗t}` indexed by the positions of the `t` bumpy leaves among `t+n`.
pub(crate) struct AlgebraCells<'a> {
    env: &'a EnvelopingOperad,
    f: ChainMap,
    /// `Y -> A -> O_A(0)`.
    corked: ChainMap,
    n: usize,
    /// For `n = 0`, start from `A` itself through `O_A(0) -> A`.
    to_algebra: Option<ChainMap>,
}

impl<'a> AlgebraCells<'a> {
    pub(crate) fn new(env: &'a EnvelopingOperad, att: &FreeAttachment, n: usize, land_in_algebra: bool) -> Result<Self> {
        let carrier = env.algebra().carrier();
        if att.gbar.target().invariants() != carrier.invariants() {
            return Err(Error::InvalidInput("ḡ does not land in the carrier of the algebra".into()));
        }
        let corked = env.from_algebra()?.compose(&att.gbar)?;
        let to_algebra = if land_in_algebra && n == 0 { Some(env.to_algebra()?) } else { None };
        Ok(Self { env, f: att.f.clone(), corked, n, to_algebra })
    }
}

impl CellFamily for AlgebraCells<'_> {
    type Key = Vec<bool>;

    fn ring(&self) -> Ring {
        self.env.algebra().ring()
    }

    fn initial(&self) -> Result<Arc<ChainComplex>> {
        match &self.to_algebra {
            Some(m) => Ok(m.target_arc()),
            None => self.env.complex(self.n),
        }
    }

    fn keys(&self, t: usize) -> Result<Vec<Vec<bool>>> {
        Ok(super::patterns(self.n, t))
    }

    fn label(&self, key: &Vec<bool>) -> String {
        let inner: String = key.iter().map(|b| if *b { '*' } else { '~' }).collect();
        format!("({inner})")
    }

    fn factors(&self, key: &Vec<bool>) -> Result<Vec<CubeFactor>> {
        let mut out = vec![CubeFactor::Fixed((*self.env.complex(key.len())?).clone())];
        for _ in key.iter().filter(|b| **b) {
            out.push(CubeFactor::Arrow(self.f.clone()));
        }
        Ok(out)
    }

    fn contract(&self, key: &Vec<bool>, vertex: usize, tuple: &[(i64, usize)]) -> Result<Vec<Term<Vec<bool>>>> {
        let m = key.len();
        let i0 = lowest_zero_bit(vertex);
        let slot = key.iter().enumerate().filter(|(_, b)| **b).nth(i0).map(|(k, _)| k).expect("coordinate in range");
        let c = self.env.complex(m)?;
        let (dx, jx) = tuple[1 + i0];
        let y = self.f.source().flat_index(dx, jx);
        let corked = self.corked.apply_flat(&sv_single(y, int(1)));
        let (dc, jc) = tuple[0];
        let comp = self.env.compose_vec(m, 0, slot + 1, &sv_single(c.flat_index(dc, jc), int(1)), &corked)?;
        let before: i64 = tuple[1..1 + i0].iter().map(|(d, _)| d).sum();
        let s = sign(dx * before);
        let mut new_key = key.clone();
        new_key.remove(slot);
        let new_vertex = drop_bit(vertex, i0);
        let target = self.env.complex(m - 1)?;
        Ok(comp
            .into_iter()
            .map(|(g, x)| {
                let mut t = vec![target.flat_to_local(g)];
                t.extend(tuple[1..].iter().enumerate().filter(|(i, _)| *i != i0).map(|(_, p)| *p));
                Term { key: new_key.clone(), vertex: new_vertex, tuple: t, coeff: x * &s }
            })
            .collect())
    }

    fn base(&self, key: &Vec<bool>, tuple: &[(i64, usize)]) -> Result<SVec> {
        let c = self.env.complex(key.len())?;
        let g = sv_single(c.flat_index(tuple[0].0, tuple[0].1), int(1));
        Ok(match &self.to_algebra {
            Some(m) => m.apply_flat(&g),
            None => g,
        })
    }

    fn tail_trivial(&self, t: usize) -> bool {
        self.f.is_iso() || self.env.complex(self.n + t).is_ok_and(|c| c.total_rank() == 0)
    }
}

/// Stages `O_{B,t}(n)` of the enveloping operad of the push-out `B` of `A` along a free map, for
/// `bounds.max_stages` stages; the blocks are corollas with `t` bumpy and `n` snaky leaves.
pub fn filtration_algebra_pushout(alg: &OAlgebra, att: &FreeAttachment, n: usize, bounds: &TruncationBounds) -> Result<CellFiltration> {
    let env = EnvelopingOperad::new(alg, *bounds);
    let cells = AlgebraCells::new(&env, att, n, false)?;
    run_cells(&cells, bounds.max_stages, bounds.stabilization_window)
}

/// Trees whose vertices alternate between odd levels (labelled by `O_A`) and even levels
/// (labelled by the free generators). Leaves are snaky and sit at even levels, so they hang from
/// odd vertices; a childless odd vertex is an element of `O_A(0) = A`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LevelTree {
    Snaky,
    Odd(Vec<LevelTree>),
    Even(Vec<LevelTree>),
}

struct Node {
    even: bool,
    arity: usize,
    /// Parent vertex and the 0-based slot there.
    parent: Option<(usize, usize)>,
    children: Vec<usize>,
}

impl LevelTree {
    /// `~` for a snaky leaf, `(…)` around the children of an odd vertex and `[…]` for an even one.
    pub fn code(&self) -> String {
        match self {
            Self::Snaky => "~".into(),
            Self::Odd(k) => format!("({})", k.iter().map(Self::code).collect::<String>()),
            Self::Even(k) => format!("[{}]", k.iter().map(Self::code).collect::<String>()),
        }
    }

    pub fn parse(code: &str) -> Result<Self> {
        let malformed = |reason: String| Error::MalformedCode { code: code.to_string(), reason };
        fn rec(s: &[u8], pos: &mut usize, bad: &dyn Fn(usize) -> Error) -> Result<LevelTree> {
            let c = *s.get(*pos).ok_or_else(|| bad(*pos))?;
            *pos += 1;
            let close = match c {
                b'~' => return Ok(LevelTree::Snaky),
                b'(' => b')',
                b'[' => b']',
                _ => return Err(bad(*pos - 1)),
            };
            let mut kids = vec![];
            while s.get(*pos) != Some(&close) {
                if *pos >= s.len() {
                    return Err(bad(*pos));
                }
                kids.push(rec(s, pos, bad)?);
            }
            *pos += 1;
            Ok(if close == b')' { LevelTree::Odd(kids) } else { LevelTree::Even(kids) })
        }
        let bytes: Vec<u8> = code.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        let mut pos = 0;
        let t = rec(&bytes, &mut pos, &|p| malformed(format!("unexpected input at byte {p}")))?;
        if pos != bytes.len() {
            return Err(malformed(format!("trailing input after byte {pos}")));
        }
        Ok(t)
    }

    pub fn snaky(&self) -> usize {
        match self {
            Self::Snaky => 1,
            Self::Odd(k) | Self::Even(k) => k.iter().map(Self::snaky).sum(),
        }
    }

    pub fn even_vertices(&self) -> usize {
        match self {
            Self::Snaky => 0,
            Self::Odd(k) => k.iter().map(Self::even_vertices).sum(),
            Self::Even(k) => 1 + k.iter().map(Self::even_vertices).sum::<usize>(),
        }
    }

    /// Root odd, levels alternating, and no even vertex all of whose children are elements of `A`
    /// (that includes every even vertex without children).
    pub fn is_admissible(&self) -> bool {
        fn odd_ok(k: &[LevelTree]) -> bool {
            k.iter().all(|c| match c {
                LevelTree::Snaky => true,
                LevelTree::Even(g) => even_ok(g),
                LevelTree::Odd(_) => false,
            })
        }
        fn even_ok(k: &[LevelTree]) -> bool {
            let all_corks = k.iter().all(|c| matches!(c, LevelTree::Odd(g) if g.is_empty()));
            !all_corks
                && k.iter().all(|c| match c {
                    LevelTree::Odd(g) => odd_ok(g),
                    _ => false,
                })
        }
        matches!(self, Self::Odd(k) if odd_ok(k))
    }

    fn nodes(&self) -> Vec<Node> {
        fn rec(t: &LevelTree, parent: Option<(usize, usize)>, out: &mut Vec<Node>) -> Option<usize> {
            let (even, kids) = match t {
                LevelTree::Snaky => return None,
                LevelTree::Odd(k) => (false, k),
                LevelTree::Even(k) => (true, k),
            };
            let me = out.len();
            out.push(Node { even, arity: kids.len(), parent, children: vec![] });
            for (slot, k) in kids.iter().enumerate() {
                if let Some(c) = rec(k, Some((me, slot)), out) {
                    out[me].children.push(c);
                }
            }
            Some(me)
        }
        let mut out = vec![];
        rec(self, None, &mut out);
        out
    }

    /// Replaces the even vertex with preorder index `pe` and its children by the grandchildren.
    fn splice(&self, pe: usize) -> LevelTree {
        fn rec(t: &LevelTree, counter: &mut usize, pe: usize) -> LevelTree {
            match t {
                LevelTree::Snaky => LevelTree::Snaky,
                LevelTree::Odd(k) | LevelTree::Even(k) => {
                    *counter += 1;
                    let mut kids = vec![];
                    for c in k {
                        match c {
                            LevelTree::Even(g) if *counter == pe => {
                                *counter += 1;
                                for odd in g {
                                    *counter += 1;
                                    if let LevelTree::Odd(h) = odd {
                                        kids.extend(h.iter().map(|x| rec(x, counter, pe)));
                                    }
                                }
                            }
                            _ => kids.push(rec(c, counter, pe)),
                        }
                    }
                    if matches!(t, LevelTree::Odd(_)) {
                        LevelTree::Odd(kids)
                    } else {
                        LevelTree::Even(kids)
                    }
                }
            }
        }
        rec(self, &mut 0, pe)
    }
}

/// All admissible level trees with `n` snaky leaves and `t` even vertices whose arities lie in
/// `arities`.
pub fn level_trees(n: usize, t: usize, arities: &[usize]) -> Vec<LevelTree> {
    let mut memo = HashMap::new();
    odd_trees(n, t, arities, &mut memo).into_iter().filter(LevelTree::is_admissible).collect()
}

type Memo = HashMap<(u8, usize, usize), Vec<Vec<LevelTree>>>;

fn odd_trees(s: usize, e: usize, arities: &[usize], memo: &mut Memo) -> Vec<LevelTree> {
    odd_children(s, e, arities, memo).into_iter().map(LevelTree::Odd).collect()
}

/// Child sequences of an odd vertex using exactly `s` snaky leaves and `e` even vertices.
fn odd_children(s: usize, e: usize, arities: &[usize], memo: &mut Memo) -> Vec<Vec<LevelTree>> {
    if let Some(v) = memo.get(&(0, s, e)) {
        return v.clone();
    }
    let mut out = vec![];
    if s == 0 && e == 0 {
        out.push(vec![]);
    }
    if s > 0 {
        for rest in odd_children(s - 1, e, arities, memo) {
            let mut v = vec![LevelTree::Snaky];
            v.extend(rest);
            out.push(v);
        }
    }
    for e1 in 1..=e {
        for s1 in 0..=s {
            let heads = even_trees(s1, e1, arities, memo);
            if heads.is_empty() {
                continue;
            }
            let rests = odd_children(s - s1, e - e1, arities, memo);
            for h in &heads {
                for r in &rests {
                    let mut v = vec![h[0].clone()];
                    v.extend(r.iter().cloned());
                    out.push(v);
                }
            }
        }
    }
    memo.insert((0, s, e), out.clone());
    out
}

/// Even vertices (wrapped in a one-element vector) with `s` snaky leaves and `e` even vertices
/// including themselves.
fn even_trees(s: usize, e: usize, arities: &[usize], memo: &mut Memo) -> Vec<Vec<LevelTree>> {
    if let Some(v) = memo.get(&(1, s, e)) {
        return v.clone();
    }
    let mut out = vec![];
    if e >= 1 {
        for &a in arities {
            for kids in odd_sequences(a, s, e - 1, arities, memo) {
                out.push(vec![LevelTree::Even(kids)]);
            }
        }
    }
    memo.insert((1, s, e), out.clone());
    out
}

/// Sequences of `a` odd vertices sharing `s` snaky leaves and `e` even vertices.
fn odd_sequences(a: usize, s: usize, e: usize, arities: &[usize], memo: &mut Memo) -> Vec<Vec<LevelTree>> {
    if a == 0 {
        return if s == 0 && e == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = vec![];
    for s1 in 0..=s {
        for e1 in 0..=e {
            let heads = odd_trees(s1, e1, arities, memo);
            if heads.is_empty() {
                continue;
            }
            let rests = odd_sequences(a - 1, s - s1, e - e1, arities, memo);
            for h in &heads {
                for r in &rests {
                    let mut v = vec![h.clone()];
                    v.extend(r.iter().cloned());
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Data of an operad push-out `O ⊔_{F(U)} F(V)` along a free map `F(f)`, together with the extra
/// structure making an `O`-algebra into an algebra over the push-out.
#[derive(Clone, Debug)]
pub struct OperadAttachment {
    /// `f(a): U(a) -> V(a)` for every arity `a` where `U` or `V` is nonzero.
    pub f: BTreeMap<usize, ChainMap>,
    /// `ḡ(a): U(a) -> O(a)`.
    pub gbar: BTreeMap<usize, ChainMap>,
    /// `V(a) ⊗ A^{⊗a} -> A`.
    pub v_action: BTreeMap<usize, ChainMap>,
}

struct OperadCells<'a> {
    env: &'a EnvelopingOperad,
    att: &'a OperadAttachment,
    n: usize,
    /// `U(a) -> O(a) -> O_A(a)`.
    gbar_env: BTreeMap<usize, ChainMap>,
    v_action: BTreeMap<usize, (TensorComplex, ChainMap)>,
    from_alg: ChainMap,
    to_alg: ChainMap,
    arities: Vec<usize>,
}

impl<'a> OperadCells<'a> {
    fn new(env: &'a EnvelopingOperad, att: &'a OperadAttachment, n: usize) -> Result<Self> {
        let alg = env.algebra();
        let op = alg.operad();
        let mut gbar_env = BTreeMap::new();
        for (&a, f) in &att.f {
            let g = att.gbar.get(&a).ok_or_else(|| Error::InvalidInput(format!("no ḡ in arity {a}")))?;
            if g.source().invariants() != f.source().invariants() || g.target().invariants() != op.component(a).invariants() {
                return Err(Error::InvalidInput(format!("ḡ in arity {a} does not go from U({a}) to O({a})")));
            }
            let target = env.complex(a)?;
            let mut err = None;
            let m = ChainMap::from_fn(g.source_arc(), target.clone(), |d, j| {
                let mut terms = vec![];
                for (o, c) in g.apply_generator(d, j) {
                    terms.push((CorollaElem { pattern: vec![false; a], o: g.target().flat_index(d, o), a: vec![] }, c));
                }
                match env.project(a, &terms) {
                    Ok(v) => {
                        let off = target.flat_offset(d);
                        v.into_iter().map(|(k, x)| (k - off, x)).collect()
                    }
                    Err(e) => {
                        err.get_or_insert(e);
                        SVec::new()
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            gbar_env.insert(a, m);
        }
        let carrier = alg.carrier();
        let mut v_action = BTreeMap::new();
        for (&a, act) in &att.v_action {
            let f = att.f.get(&a).ok_or_else(|| Error::InvalidInput(format!("action of V({a}) without V({a})")))?;
            let mut factors = vec![f.target()];
            factors.extend(std::iter::repeat_n(carrier, a));
            let t = tensor_many(&factors)?;
            if act.source().total_rank() != t.complex.total_rank() || act.target().invariants() != carrier.invariants() {
                return Err(Error::InvalidInput(format!("action of V({a}) has the wrong shape")));
            }
            v_action.insert(a, (t, act.clone()));
        }
        let arities = att.f.iter().filter(|(a, f)| **a > 0 && f.target().total_rank() > 0).map(|(a, _)| *a).collect();
        Ok(Self { env, att, n, gbar_env, v_action, from_alg: env.from_algebra()?, to_alg: env.to_algebra()?, arities })
    }

    /// `v ⊗ a_1 ⊗ … ⊗ a_k ↦ v(a_1, …, a_k)` in `O_A(0)`, for `a_i` given in `O_A(0)`.
    fn act_v(&self, a: usize, v: (i64, usize), corks: &[SVec]) -> Result<SVec> {
        let ring = self.env.algebra().ring();
        let Some((t, act)) = self.v_action.get(&a) else {
            if corks.iter().all(|c| self.to_alg.apply_flat(c).is_empty()) {
                return Ok(SVec::new());
            }
            return Err(Error::InvalidInput(format!("no action of V({a}) on the algebra")));
        };
        let carrier = self.env.algebra().carrier();
        let args: Vec<Vec<(usize, Scalar)>> = corks.iter().map(|c| self.to_alg.apply_flat(c).into_iter().collect()).collect();
        let mut out = SVec::new();
        let mut partial: Vec<(Tuple, Scalar)> = vec![(vec![v], int(1))];
        for arg in &args {
            let mut next = vec![];
            for (tu, x) in &partial {
                for (g, y) in arg {
                    let mut tu = tu.clone();
                    tu.push(carrier.flat_to_local(*g));
                    next.push((tu, x * y));
                }
            }
            partial = next;
        }
        for (tu, x) in partial {
            let (d, i) = t.index_of(&tu).expect("tensor generator");
            let off = carrier.flat_offset(d);
            let img: SVec = act.apply_generator(d, i).into_iter().map(|(r, y)| (off + r, y)).collect();
            sv_add_scaled(ring, &mut out, &img, &x);
        }
        Ok(self.from_alg.apply_flat(&out))
    }

    /// Contracts the even vertex `pe` into its parent, together with its children.
    fn merge(&self, tree: &LevelTree, vertex: usize, tuple: &[(i64, usize)], coeff: &Scalar, pe: usize) -> Result<Vec<Term<LevelTree>>> {
        let nodes = tree.nodes();
        let (pp, slot) = nodes[pe].parent.expect("even vertices have parents");
        let kids = &nodes[pe].children;
        let a = kids.len();
        let coord = nodes[..pe].iter().filter(|x| x.even).count();
        let at_target = vertex & (1 << coord) != 0;
        let env = self.env;
        let elem = |i: usize, arity: usize| -> Result<SVec> {
            let c = env.complex(arity)?;
            Ok(sv_single(c.flat_index(tuple[i].0, tuple[i].1), int(1)))
        };
        let (inner, inner_arity) = if at_target {
            if kids.iter().any(|&c| nodes[c].arity > 0) {
                return Err(Error::InvalidInput("a generator of V only contracts against elements of A".into()));
            }
            let corks = kids.iter().map(|&c| elem(c, 0)).collect::<Result<Vec<_>>>()?;
            (self.act_v(a, tuple[pe], &corks)?, 0)
        } else {
            let u = self.att.f[&a].source().flat_index(tuple[pe].0, tuple[pe].1);
            let mut cur = self.gbar_env[&a].apply_flat(&sv_single(u, int(1)));
            let (mut arity, mut pos) = (a, 1);
            for &c in kids {
                let k = nodes[c].arity;
                cur = env.compose_vec(arity, k, pos, &cur, &elem(c, k)?)?;
                arity = arity + k - 1;
                pos += k;
            }
            (cur, arity)
        };
        let kp = nodes[pp].arity;
        let z = env.compose_vec(kp, inner_arity, slot + 1, &elem(pp, kp)?, &inner)?;
        let new_arity = kp - 1 + inner_arity;

        let gathered: Vec<usize> = std::iter::once(pe).chain(kids.iter().copied()).collect();
        let mut exponent = 0;
        for &g in &gathered {
            for r in pp + 1..g {
                if !gathered.contains(&r) {
                    exponent += tuple[g].0 * tuple[r].0;
                }
            }
        }
        let s = sign(exponent) * coeff;
        let new_tree = tree.splice(pe);
        let new_vertex = drop_bit(vertex, coord);
        let target = env.complex(new_arity)?;
        let parent_even = nodes[pp].parent.map(|(q, _)| q);
        let mut out = vec![];
        for (g, x) in z {
            let mut t: Tuple = vec![];
            for (i, p) in tuple.iter().enumerate() {
                if i == pp {
                    t.push(target.flat_to_local(g));
                } else if !gathered.contains(&i) {
                    t.push(*p);
                }
            }
            let c = x * &s;
            // a vertex that became an element of `A` may leave its parent with only such children
            if let (0, Some(q)) = (new_arity, parent_even) {
                let new_nodes = new_tree.nodes();
                if new_nodes[q].children.iter().all(|&ch| new_nodes[ch].arity == 0) {
                    out.extend(self.merge(&new_tree, new_vertex, &t, &c, q)?);
                    continue;
                }
            }
            out.push(Term { key: new_tree.clone(), vertex: new_vertex, tuple: t, coeff: c });
        }
        Ok(out)
    }
}

impl CellFamily for OperadCells<'_> {
    type Key = LevelTree;

    fn ring(&self) -> Ring {
        self.env.algebra().ring()
    }

    fn initial(&self) -> Result<Arc<ChainComplex>> {
        self.env.complex(self.n)
    }

    fn keys(&self, t: usize) -> Result<Vec<LevelTree>> {
        Ok(level_trees(self.n, t, &self.arities))
    }

    fn label(&self, key: &LevelTree) -> String {
        key.code()
    }

    fn factors(&self, key: &LevelTree) -> Result<Vec<CubeFactor>> {
        key.nodes()
            .iter()
            .map(|x| {
                Ok(if x.even {
                    CubeFactor::Arrow(self.att.f[&x.arity].clone())
                } else {
                    CubeFactor::Fixed((*self.env.complex(x.arity)?).clone())
                })
            })
            .collect()
    }

    fn contract(&self, key: &LevelTree, vertex: usize, tuple: &[(i64, usize)]) -> Result<Vec<Term<LevelTree>>> {
        let coord = lowest_zero_bit(vertex);
        let nodes = key.nodes();
        let pe = nodes.iter().enumerate().filter(|(_, x)| x.even).nth(coord).map(|(i, _)| i).expect("coordinate in range");
        self.merge(key, vertex, tuple, &int(1), pe)
    }

    fn base(&self, key: &LevelTree, tuple: &[(i64, usize)]) -> Result<SVec> {
        let c = self.env.complex(key.snaky())?;
        Ok(sv_single(c.flat_index(tuple[0].0, tuple[0].1), int(1)))
    }

    fn tail_trivial(&self, t: usize) -> bool {
        self.att.f.values().all(ChainMap::is_iso)
            || level_trees(self.n, t, &self.arities).iter().all(|k| {
                k.nodes().iter().any(|x| !x.even && self.env.complex(x.arity).is_ok_and(|c| c.total_rank() == 0))
            })
    }
}

/// Stages `P_{A,t}(n)` of the enveloping operad of `A` over the operad push-out, starting from
/// `O_A(n)`; the blocks are admissible level trees with `t` even vertices.
pub fn filtration_operad_pushout(att: &OperadAttachment, alg: &OAlgebra, n: usize, bounds: &TruncationBounds) -> Result<CellFiltration> {
    let env = EnvelopingOperad::new(alg, *bounds);
    let cells = OperadCells::new(&env, att, n)?;
    run_cells(&cells, bounds.max_stages, bounds.stabilization_window)
}
