//! Corollas with snaky and straight leaves: the generators of the first stage of the
//! coequalizer, and the quotient by the elementary relations inside a straight-leaf window.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::algebra::OAlgebra;
use crate::complex::{sign, ChainComplex};
use crate::error::{Error, Result};
use crate::linalg::ring::{format_scalar, from_big};
use crate::linalg::sparse::{add_entry, sv_single};
use crate::linalg::{int, ExactMatrix, Ring, SVec, Scalar, SparseQuotient, SparseReducer};
use crate::operad::OperadRef;

/// `o ⊗ a_1 ⊗ … ⊗ a_s` on a corolla whose slots are snaky (`false`) or straight (`true`); the
/// `a_i` label the straight slots from left to right.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorollaElem {
    pub pattern: Vec<bool>,
    pub o: usize,
    pub a: Vec<usize>,
}

impl CorollaElem {
    pub fn arity(&self) -> usize {
        self.pattern.len()
    }

    pub fn snaky(&self) -> usize {
        self.pattern.iter().filter(|s| !**s).count()
    }

    pub fn straight(&self) -> usize {
        self.a.len()
    }

    /// The tree code, `~` for snaky and `|` for straight slots.
    pub fn code(&self) -> String {
        let inner: String = self.pattern.iter().map(|s| if *s { '|' } else { '~' }).collect();
        format!("({inner})")
    }

    /// Absolute slot (0-based) of the `i`-th snaky leaf (1-based).
    pub fn snaky_slot(&self, i: usize) -> Option<usize> {
        self.pattern.iter().enumerate().filter(|(_, s)| !**s).nth(i.checked_sub(1)?).map(|(k, _)| k)
    }

    /// Number of straight slots before absolute slot `k`.
    pub fn straight_before(&self, k: usize) -> usize {
        self.pattern[..k].iter().filter(|s| **s).count()
    }
}

pub(crate) struct OComp {
    pub complex: Arc<ChainComplex>,
    pub deg: Vec<i64>,
    pub orders: Vec<BigInt>,
}

/// Cached data about an algebra and its operad.
pub(crate) struct Ctx {
    pub alg: OAlgebra,
    pub op: OperadRef,
    pub ring: Ring,
    pub adeg: Vec<i64>,
    pub aorders: Vec<BigInt>,
    comps: RwLock<HashMap<usize, Arc<OComp>>>,
}

impl Ctx {
    pub fn new(alg: &OAlgebra) -> Self {
        let c = alg.carrier();
        let aorders = c.flat_basis().into_iter().map(|(d, i)| c.orders(d)[i].clone()).collect();
        Self {
            op: alg.operad().clone(),
            ring: alg.ring(),
            adeg: alg.degrees(),
            aorders,
            alg: alg.clone(),
            comps: RwLock::new(HashMap::new()),
        }
    }

    pub fn comp(&self, m: usize) -> Arc<OComp> {
        if let Some(c) = self.comps.read().unwrap().get(&m) {
            return c.clone();
        }
        let complex = self.op.component(m);
        let basis = complex.flat_basis();
        let deg = basis.iter().map(|(d, _)| *d).collect();
        let orders = basis.iter().map(|(d, i)| complex.orders(*d)[*i].clone()).collect();
        let c = Arc::new(OComp { complex, deg, orders });
        self.comps.write().unwrap().entry(m).or_insert(c).clone()
    }

    pub fn rank_o(&self, m: usize) -> usize {
        self.comp(m).deg.len()
    }

    pub fn weight(&self, a: &[usize]) -> usize {
        a.iter().map(|&x| self.alg.weight(x)).sum()
    }

    pub fn degree(&self, e: &CorollaElem) -> i64 {
        self.comp(e.arity()).deg[e.o] + e.a.iter().map(|&x| self.adeg[x]).sum::<i64>()
    }

    /// The order of the generator (0 when free).
    pub fn order(&self, e: &CorollaElem) -> BigInt {
        let mut g = self.comp(e.arity()).orders[e.o].clone();
        for &x in &e.a {
            g = g.gcd(&self.aorders[x]);
        }
        g
    }

    pub fn label(&self, e: &CorollaElem) -> String {
        let mut it = e.a.iter();
        let slots: Vec<String> = e
            .pattern
            .iter()
            .map(|s| {
                if *s {
                    let x = *it.next().expect("labels match pattern");
                    let c = self.alg.carrier();
                    let (d, i) = c.flat_to_local(x);
                    c.labels(d)[i].clone()
                } else {
                    "~".into()
                }
            })
            .collect();
        format!("{}({})", self.op.label(e.arity(), e.o), slots.join(","))
    }

    /// `∂(o ⊗ a) = ∂o ⊗ a + (-1)^{|o|} Σ_l (-1)^{|a_1..a_{l-1}|} o ⊗ … ∂a_l …`.
    pub fn boundary(&self, e: &CorollaElem) -> Vec<(CorollaElem, Scalar)> {
        let comp = self.comp(e.arity());
        let mut out = vec![];
        for (o2, c) in comp.complex.d_flat(&sv_single(e.o, int(1))) {
            out.push((CorollaElem { pattern: e.pattern.clone(), o: o2, a: e.a.clone() }, c));
        }
        let mut before = comp.deg[e.o];
        let carrier = self.alg.carrier();
        for l in 0..e.a.len() {
            for (x, c) in carrier.d_flat(&sv_single(e.a[l], int(1))) {
                let mut a = e.a.clone();
                a[l] = x;
                out.push((CorollaElem { pattern: e.pattern.clone(), o: e.o, a }, c * sign(before)));
            }
            before += self.adeg[e.a[l]];
        }
        out
    }

    /// Tuples of carrier basis elements of length `len` with total weight at most `budget`.
    pub fn tuples(&self, len: usize, budget: Option<usize>) -> Vec<Vec<usize>> {
        let rank = self.adeg.len();
        let mut out = vec![];
        let mut cur = vec![];
        fn rec(ctx: &Ctx, len: usize, rank: usize, budget: Option<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == len {
                out.push(cur.clone());
                return;
            }
            for x in 0..rank {
                let w = ctx.alg.weight(x);
                if budget.is_some_and(|b| w > b) {
                    continue;
                }
                cur.push(x);
                rec(ctx, len, rank, budget.map(|b| b - w), cur, out);
                cur.pop();
            }
        }
        rec(self, len, rank, budget, &mut cur, &mut out);
        out
    }
}

/// All arrangements of `snaky` snaky and `straight` straight slots.
pub fn patterns(snaky: usize, straight: usize) -> Vec<Vec<bool>> {
    let mut out = vec![];
    let mut cur = vec![];
    fn rec(sn: usize, st: usize, cur: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if sn == 0 && st == 0 {
            out.push(cur.clone());
            return;
        }
        if sn > 0 {
            cur.push(false);
            rec(sn - 1, st, cur, out);
            cur.pop();
        }
        if st > 0 {
            cur.push(true);
            rec(sn, st - 1, cur, out);
            cur.pop();
        }
    }
    rec(snaky, straight, &mut cur, &mut out);
    out
}

/// Generators of the first coequalizer stage in arity `n` with at most `s_bound` straight leaves
/// (and straight labels of total weight at most `weight`), sorted by degree, then straight
/// count, then pattern, operation and labels.
pub(crate) fn corolla_basis(ctx: &Ctx, n: usize, s_bound: usize, weight: Option<usize>) -> BTreeMap<i64, Vec<CorollaElem>> {
    let mut by_degree: BTreeMap<i64, Vec<CorollaElem>> = BTreeMap::new();
    for s in 0..=s_bound {
        let m = n + s;
        let rank = ctx.rank_o(m);
        if rank == 0 || (s > 0 && ctx.adeg.is_empty()) {
            continue;
        }
        let tuples = ctx.tuples(s, weight);
        for pattern in patterns(n, s) {
            for o in 0..rank {
                for a in &tuples {
                    let e = CorollaElem { pattern: pattern.clone(), o, a: a.clone() };
                    by_degree.entry(ctx.degree(&e)).or_default().push(e);
                }
            }
        }
    }
    for v in by_degree.values_mut() {
        v.sort_by(|x, y| (x.a.len(), &x.pattern, x.o, &x.a).cmp(&(y.a.len(), &y.pattern, y.o, &y.a)));
    }
    by_degree
}

/// One elementary relation: a root `o` whose special slot `j` carries `(o_j; a_j)`.
pub(crate) struct Elementary {
    pub root: CorollaElem,
    pub special: usize,
    pub q: usize,
    pub oj: usize,
    pub aj: Vec<usize>,
}

impl Ctx {
    /// `corolla(θ(o_j; a_j) at j)` and `corolla(o ∘_j o_j)` with the labels spliced in.
    /// The root pattern has `special` marked as straight and its label omitted from `root.a`.
    pub fn relation_sides(&self, r: &Elementary) -> (Vec<(CorollaElem, Scalar)>, Vec<(CorollaElem, Scalar)>) {
        let k = r.root.straight_before(r.special);
        let (before, after) = r.root.a.split_at(k);
        let mut dc = vec![];
        for (b, c) in self.alg.act(r.q, r.oj, &r.aj) {
            let mut a = before.to_vec();
            a.push(b);
            a.extend_from_slice(after);
            dc.push((CorollaElem { pattern: r.root.pattern.clone(), o: r.root.o, a }, c));
        }
        let deg_oj = self.comp(r.q).deg[r.oj];
        let s = sign(deg_oj * before.iter().map(|&x| self.adeg[x]).sum::<i64>());
        let mut pattern = r.root.pattern[..r.special].to_vec();
        pattern.extend(std::iter::repeat_n(true, r.q));
        pattern.extend_from_slice(&r.root.pattern[r.special + 1..]);
        let mut a = before.to_vec();
        a.extend_from_slice(&r.aj);
        a.extend_from_slice(after);
        let mut de = vec![];
        for (g, c) in self.op.compose(r.root.arity(), r.q, r.special + 1, r.root.o, r.oj) {
            de.push((CorollaElem { pattern: pattern.clone(), o: g, a: a.clone() }, c * &s));
        }
        (dc, de)
    }

    /// Calls `f` on every elementary relation whose two sides have at most `s_bound` straight
    /// leaves and weight at most `weight`.
    pub fn for_each_elementary(&self, n: usize, s_bound: usize, weight: Option<usize>, mut f: impl FnMut(&Elementary)) {
        let has_a = !self.adeg.is_empty();
        for s1 in 0..s_bound {
            if s1 > 0 && !has_a {
                break;
            }
            let m = n + s1 + 1;
            let rank_root = self.rank_o(m);
            if rank_root == 0 {
                continue;
            }
            for q in 0..=s_bound - s1 {
                if q > 0 && !has_a {
                    break;
                }
                let rank_q = self.rank_o(q);
                if rank_q == 0 {
                    continue;
                }
                let unit_is_basis = q == 1 && self.op.unit().len() == 1;
                for aj in self.tuples(q, weight) {
                    let budget = weight.map(|w| w - self.weight(&aj));
                    let outer = self.tuples(s1, budget);
                    for oj in 0..rank_q {
                        if unit_is_basis && self.op.unit().get(&oj).is_some_and(|c| c.is_one()) {
                            // both sides agree by the unit laws
                            continue;
                        }
                        for base in patterns(n, s1) {
                            for special in 0..m {
                                let mut pattern = base[..special].to_vec();
                                pattern.push(true);
                                pattern.extend_from_slice(&base[special..]);
                                for o in 0..rank_root {
                                    for a in &outer {
                                        let root = CorollaElem { pattern: pattern.clone(), o, a: a.clone() };
                                        f(&Elementary { root, special, q, oj, aj: aj.clone() });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// The quotient of the corolla complex in arity `n` by the elementary relations inside a
/// straight-leaf window.
pub(crate) struct Window {
    pub n: usize,
    pub s_bound: usize,
    pub weight: Option<usize>,
    pub columns: BTreeMap<i64, Vec<CorollaElem>>,
    pub index: HashMap<CorollaElem, (i64, usize)>,
    pub quotients: BTreeMap<i64, SparseQuotient>,
    pub complex: Arc<ChainComplex>,
}

impl std::fmt::Debug for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Window").field("n", &self.n).field("s_bound", &self.s_bound).field("rank", &self.complex.total_rank()).finish()
    }
}

impl Window {
    pub fn compute(ctx: &Ctx, n: usize, s_bound: usize, weight: Option<usize>) -> Result<Window> {
        let ring = ctx.ring;
        let columns = corolla_basis(ctx, n, s_bound, weight);
        let mut index = HashMap::new();
        for (d, v) in &columns {
            for (i, e) in v.iter().enumerate() {
                index.insert(e.clone(), (*d, i));
            }
        }
        let mut reducers: BTreeMap<i64, SparseReducer> =
            columns.iter().map(|(d, v)| (*d, SparseReducer::new(ring, v.len()))).collect();
        for (d, v) in &columns {
            let r = reducers.get_mut(d).unwrap();
            for (i, e) in v.iter().enumerate() {
                let ord = ctx.order(e);
                if !ord.is_zero() {
                    r.add_relation(&sv_single(i, from_big(ord)));
                }
            }
        }
        let mut missing = None;
        ctx.for_each_elementary(n, s_bound, weight, |rel| {
            let (dc, de) = ctx.relation_sides(rel);
            let mut row = SVec::new();
            let mut degree = None;
            for (e, c) in dc.iter().map(|(e, c)| (e, c.clone())).chain(de.iter().map(|(e, c)| (e, -c))) {
                match index.get(e) {
                    Some(&(d, i)) => {
                        degree = Some(d);
                        add_entry(ring, &mut row, i, &c);
                    }
                    None => {
                        if ctx.weight(&e.a) <= weight.unwrap_or(usize::MAX) && missing.is_none() {
                            missing = Some(ctx.label(e));
                        }
                    }
                }
            }
            if let (Some(d), false) = (degree, row.is_empty()) {
                reducers.get_mut(&d).unwrap().add_relation(&row);
            }
        });
        if let Some(m) = missing {
            return Err(Error::BoundMismatch(format!("relation side {m} lies outside the window")));
        }
        let quotients: BTreeMap<i64, SparseQuotient> = reducers.into_iter().map(|(d, r)| (d, r.finish())).collect();

        let mut complex = ChainComplex::zero(ring);
        for (d, q) in &quotients {
            if q.num_generators() == 0 {
                continue;
            }
            let labels = (0..q.num_generators()).map(|g| lift_label(ctx, &columns[d], &q.lift(g))).collect();
            complex.set_degree(*d, q.orders().to_vec(), labels);
        }
        for (d, q) in &quotients {
            let Some(lower) = quotients.get(&(d - 1)) else { continue };
            if q.num_generators() == 0 || lower.num_generators() == 0 {
                continue;
            }
            let mut m = ExactMatrix::zeros(ring, lower.num_generators(), q.num_generators());
            for g in 0..q.num_generators() {
                let mut image = SVec::new();
                for (c, x) in q.lift(g) {
                    for (e, y) in ctx.boundary(&columns[d][c]) {
                        let (_, i) = index[&e];
                        add_entry(ring, &mut image, i, &(x.clone() * y));
                    }
                }
                for (r, y) in lower.project(&image) {
                    m.add_to(r, g, &y);
                }
            }
            let mut v = m;
            crate::linalg::module::reduce_rows_mod(&mut v, lower.orders());
            complex.set_differential(*d, v);
        }
        complex.validate()?;
        Ok(Window { n, s_bound, weight, columns, index, quotients, complex: Arc::new(complex) })
    }

    /// Generator coordinates (flat in the quotient complex) of a combination of corollas.
    pub fn project(&self, ctx: &Ctx, terms: &[(CorollaElem, Scalar)]) -> Result<SVec> {
        let mut by_degree: BTreeMap<i64, SVec> = BTreeMap::new();
        for (e, c) in terms {
            match self.index.get(e) {
                Some(&(d, i)) => add_entry(ctx.ring, by_degree.entry(d).or_default(), i, c),
                None => {
                    if ctx.rank_o(e.arity()) > 0 && self.weight.is_none_or(|w| ctx.weight(&e.a) <= w) {
                        return Err(Error::BoundMismatch(format!(
                            "{} has {} straight leaves, window is {}",
                            ctx.label(e),
                            e.straight(),
                            self.s_bound
                        )));
                    }
                }
            }
        }
        let mut out = SVec::new();
        for (d, v) in by_degree {
            let off = self.complex.flat_offset(d);
            for (g, x) in self.quotients[&d].project(&v) {
                add_entry(ctx.ring, &mut out, off + g, &x);
            }
        }
        self.complex.reduce_flat(&mut out);
        Ok(out)
    }

    /// A representative of generator `g` (flat) as a combination of corollas.
    pub fn lift(&self, g: usize) -> Vec<(CorollaElem, Scalar)> {
        let (d, i) = self.complex.flat_to_local(g);
        self.quotients[&d].lift(i).into_iter().map(|(c, x)| (self.columns[&d][c].clone(), x)).collect()
    }

    /// Codes of the corollas that survive as generators.
    pub fn surviving_codes(&self, ctx: &Ctx) -> Vec<String> {
        (0..self.complex.total_rank())
            .map(|g| {
                self.lift(g).iter().map(|(e, _)| ctx.label(e)).collect::<Vec<_>>().join("+")
            })
            .collect()
    }
}

fn lift_label(ctx: &Ctx, cols: &[CorollaElem], v: &SVec) -> String {
    if v.len() == 1 {
        let (c, x) = v.iter().next().unwrap();
        if x.is_one() {
            return ctx.label(&cols[*c]);
        }
    }
    let parts: Vec<String> = v.iter().map(|(c, x)| format!("{}*{}", format_scalar(x), ctx.label(&cols[*c]))).collect();
    format!("[{}]", parts.join(" + "))
}
