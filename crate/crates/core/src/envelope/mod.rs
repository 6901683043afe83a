//! Enveloping operads of algebras, computed as truncated coequalizers of corolla complexes.
//!
//! `O_A(n)` is presented by corollas with `n` snaky leaves and any number of straight leaves
//! labelled by `A`, modulo the relations identifying a level-2 vertex whose children are straight
//! leaves with the straight leaf carrying its value under the algebra action. Only finitely many
//! straight leaves fit in a window; a component counts as computed once its invariants stop
//! changing as the window grows.

mod closed;
mod corolla;
mod filtration;
mod split;
mod trees;

pub use closed::{closed_form, square_quotient, ClosedFormKind};
pub use corolla::{patterns, CorollaElem};
pub use filtration::{
    filtration_algebra_pushout, filtration_operad_pushout, Cell, CellFiltration, CellStage, LevelTree, OperadAttachment,
};
pub use split::{split_coequalizer_witness, SplitKind, SplitWitness};
pub use trees::{build_oa0, build_oa1, coequalizer_arrows, CoequalizerArrows, HeightThreeElem, Level2, TreeBlockComplex};
pub(crate) use corolla::{Ctx, Window};
pub(crate) use filtration::{run_cells, AlgebraCells, CellFamily, Term};
pub use filtration::level_trees;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::algebra::{AlgebraMap, OAlgebra};
use crate::complex::{sign, tensor_many, ChainComplex, ChainMap, ComplexInvariants};
use crate::error::{Error, Result};
use crate::linalg::sparse::{add_entry, sv_add_scaled, sv_single};
use crate::linalg::{int, SVec, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationBounds {
    /// Vertex bound for tree families (height-3 blocks and filtration stages).
    pub max_inner_vertices: usize,
    pub max_straight_leaves: usize,
    pub max_arity: usize,
    /// Number of consecutive windows that must agree.
    pub stabilization_window: usize,
    /// Bound on the total weight of straight labels, for weight-graded algebras.
    pub max_weight: Option<usize>,
    /// Number of cell stages attached by the push-out filtrations.
    pub max_stages: usize,
}

impl Default for TruncationBounds {
    fn default() -> Self {
        Self { max_inner_vertices: 3, max_straight_leaves: 6, max_arity: 4, stabilization_window: 2, max_weight: None, max_stages: 3 }
    }
}

impl TruncationBounds {
    pub fn straight(mut self, s: usize) -> Self {
        self.max_straight_leaves = s;
        self
    }

    pub fn arity(mut self, n: usize) -> Self {
        self.max_arity = n;
        self
    }

    pub fn window(mut self, w: usize) -> Self {
        self.stabilization_window = w.max(1);
        self
    }

    pub fn vertices(mut self, v: usize) -> Self {
        self.max_inner_vertices = v;
        self
    }

    pub fn weight(mut self, w: usize) -> Self {
        self.max_weight = Some(w);
        self
    }

    pub fn stages(mut self, t: usize) -> Self {
        self.max_stages = t;
        self
    }
}

/// Extra straight leaves allowed beyond the stabilized window when composing, so that
/// composites of lifted representatives still fit.
pub const COMPOSITION_HEADROOM: usize = 2;

/// One arity of an enveloping operad together with how it was obtained.
#[derive(Clone, Debug)]
pub struct EnvelopingComponent {
    pub arity: usize,
    /// Smallest window at which the invariants had stopped changing.
    pub stabilized_at: Option<usize>,
    /// Whether the window was large enough to contain every generator and relation.
    pub exact: bool,
    pub history: Vec<(usize, ComplexInvariants)>,
    window: Arc<Window>,
}

impl EnvelopingComponent {
    pub fn complex(&self) -> Arc<ChainComplex> {
        self.window.complex.clone()
    }

    pub fn invariants(&self) -> ComplexInvariants {
        self.window.complex.invariants()
    }

    pub fn is_stabilized(&self) -> bool {
        self.stabilized_at.is_some()
    }

    pub fn straight_bound(&self) -> usize {
        self.window.s_bound
    }

    /// Number of corolla generators before quotienting.
    pub fn presentation_size(&self) -> usize {
        self.window.columns.values().map(Vec::len).sum()
    }
}

#[derive(Clone, Debug)]
pub struct EnvelopingResult {
    pub components: BTreeMap<usize, Arc<EnvelopingComponent>>,
    pub bounds: TruncationBounds,
}

impl EnvelopingResult {
    pub fn stabilized(&self) -> bool {
        self.components.values().all(|c| c.is_stabilized())
    }

    pub fn complex(&self, n: usize) -> Arc<ChainComplex> {
        self.components[&n].complex()
    }
}

/// `O_A` with lazily computed components and compositions.
pub struct EnvelopingOperad {
    ctx: Arc<Ctx>,
    bounds: TruncationBounds,
    windows: RwLock<HashMap<(usize, usize), Arc<Window>>>,
    components: RwLock<HashMap<usize, Arc<EnvelopingComponent>>>,
}

impl std::fmt::Debug for EnvelopingOperad {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnvelopingOperad").field("algebra", &self.ctx.alg.name()).field("bounds", &self.bounds).finish()
    }
}

/// All components up to `bounds.max_arity`; components that did not stabilize are flagged,
/// not dropped.
pub fn enveloping_operad(alg: &OAlgebra, bounds: &TruncationBounds) -> Result<EnvelopingResult> {
    let env = EnvelopingOperad::new(alg, *bounds);
    let mut components = BTreeMap::new();
    for n in 0..=bounds.max_arity {
        components.insert(n, env.component(n)?);
    }
    Ok(EnvelopingResult { components, bounds: *bounds })
}

impl EnvelopingOperad {
    pub fn new(alg: &OAlgebra, bounds: TruncationBounds) -> Self {
        Self {
            ctx: Arc::new(Ctx::new(alg)),
            bounds,
            windows: RwLock::new(HashMap::new()),
            components: RwLock::new(HashMap::new()),
        }
    }

    pub fn algebra(&self) -> &OAlgebra {
        &self.ctx.alg
    }

    pub fn bounds(&self) -> &TruncationBounds {
        &self.bounds
    }

    pub(crate) fn window(&self, n: usize, s: usize) -> Result<Arc<Window>> {
        if let Some(w) = self.windows.read().unwrap().get(&(n, s)) {
            return Ok(w.clone());
        }
        let w = Arc::new(Window::compute(&self.ctx, n, s, self.bounds.max_weight)?);
        Ok(self.windows.write().unwrap().entry((n, s)).or_insert(w).clone())
    }

    /// Straight-leaf count from which the window holds every generator and relation. With
    /// operations of arity at most `b`, generators need `b - n` straight leaves and a relation
    /// through a vertex of arity `q ≤ b` needs `q - 1` more.
    fn exact_from(&self, n: usize) -> Option<usize> {
        if self.ctx.adeg.is_empty() {
            return Some(1);
        }
        self.ctx.op.arity_bound().map(|b| (2 * b).saturating_sub(n + 1))
    }

    pub fn component(&self, n: usize) -> Result<Arc<EnvelopingComponent>> {
        if let Some(c) = self.components.read().unwrap().get(&n) {
            return Ok(c.clone());
        }
        let exact_from = self.exact_from(n);
        let window = self.bounds.stabilization_window.max(1);
        let mut history: Vec<(usize, ComplexInvariants)> = vec![];
        let mut last = None;
        let mut stabilized_at = None;
        let mut exact = false;
        for s in 0..=self.bounds.max_straight_leaves {
            let w = self.window(n, s)?;
            history.push((s, w.complex.invariants()));
            last = Some(w);
            if exact_from.is_some_and(|e| s >= e) {
                exact = true;
                stabilized_at = Some(s);
                break;
            }
            if history.len() >= window && history[history.len() - window..].windows(2).all(|p| p[0].1 == p[1].1) {
                stabilized_at = Some(s);
                break;
            }
        }
        let c = Arc::new(EnvelopingComponent { arity: n, stabilized_at, exact, history, window: last.expect("at least one window") });
        Ok(self.components.write().unwrap().entry(n).or_insert(c).clone())
    }

    /// The window used for compositions in arity `n`: the stabilized window plus headroom,
    /// checked to have the same invariants.
    pub(crate) fn reference(&self, n: usize) -> Result<Arc<Window>> {
        let c = self.component(n)?;
        let Some(s) = c.stabilized_at else {
            return Err(Error::NotStabilized(format!(
                "arity {n} of the enveloping operad of {} did not stabilize within {} straight leaves",
                self.ctx.alg.name(),
                self.bounds.max_straight_leaves
            )));
        };
        let w = self.window(n, s + COMPOSITION_HEADROOM)?;
        if w.complex.invariants() != c.invariants() {
            return Err(Error::NotStabilized(format!("arity {n} changes again at {} straight leaves", s + COMPOSITION_HEADROOM)));
        }
        Ok(w)
    }

    /// `O_A(n)` in the basis used by compositions.
    pub fn complex(&self, n: usize) -> Result<Arc<ChainComplex>> {
        Ok(self.reference(n)?.complex.clone())
    }

    /// A representative of a generator of [`EnvelopingOperad::complex`] as corollas.
    pub fn lift(&self, n: usize, g: usize) -> Result<Vec<(CorollaElem, Scalar)>> {
        Ok(self.reference(n)?.lift(g))
    }

    /// Class of a combination of corollas of arity `n`.
    pub fn project(&self, n: usize, terms: &[(CorollaElem, Scalar)]) -> Result<SVec> {
        self.reference(n)?.project(&self.ctx, terms)
    }

    /// Grafts `h` onto the `i`-th snaky leaf of `g` and composes the two operations.
    pub fn graft(&self, g: &CorollaElem, i: usize, h: &CorollaElem) -> Result<Vec<(CorollaElem, Scalar)>> {
        let ctx = &self.ctx;
        let k = g.snaky_slot(i).ok_or(Error::SlotOutOfRange { slot: i, leaves: g.snaky() })?;
        let nb = g.straight_before(k);
        let (a1, a2) = g.a.split_at(nb);
        let dh = ctx.comp(h.arity()).deg[h.o];
        let deg = |xs: &[usize]| xs.iter().map(|&x| ctx.adeg[x]).sum::<i64>();
        let s = sign((dh + deg(&h.a)) * deg(a2) + dh * deg(a1));
        let mut pattern = g.pattern[..k].to_vec();
        pattern.extend_from_slice(&h.pattern);
        pattern.extend_from_slice(&g.pattern[k + 1..]);
        let mut a = a1.to_vec();
        a.extend_from_slice(&h.a);
        a.extend_from_slice(a2);
        Ok(ctx
            .op
            .compose(g.arity(), h.arity(), k + 1, g.o, h.o)
            .into_iter()
            .map(|(o, c)| (CorollaElem { pattern: pattern.clone(), o, a: a.clone() }, c * &s))
            .collect())
    }

    fn graft_terms(
        &self,
        g: &[(CorollaElem, Scalar)],
        i: usize,
        h: &[(CorollaElem, Scalar)],
    ) -> Result<Vec<(CorollaElem, Scalar)>> {
        let mut out = vec![];
        for (x, c) in g {
            for (y, d) in h {
                for (e, s) in self.graft(x, i, y)? {
                    out.push((e, s * c * d));
                }
            }
        }
        Ok(out)
    }

    /// `g ∘_i h` for generators of [`EnvelopingOperad::complex`].
    pub fn compose_flat(&self, p: usize, q: usize, i: usize, g: usize, h: usize) -> Result<SVec> {
        let terms = self.graft_terms(&self.lift(p, g)?, i, &self.lift(q, h)?)?;
        self.project(p + q - 1, &terms)
    }

    pub fn compose_vec(&self, p: usize, q: usize, i: usize, x: &SVec, y: &SVec) -> Result<SVec> {
        let ring = self.ctx.ring;
        let mut out = SVec::new();
        for (g, c) in x {
            for (h, d) in y {
                sv_add_scaled(ring, &mut out, &self.compose_flat(p, q, i, *g, *h)?, &(c * d));
            }
        }
        self.complex(p + q - 1)?.reduce_flat(&mut out);
        Ok(out)
    }

    /// `∘_i: O_A(p) ⊗ O_A(q) -> O_A(p+q-1)` as a chain map.
    pub fn composition(&self, p: usize, q: usize, i: usize) -> Result<ChainMap> {
        let (cp, cq, cr) = (self.complex(p)?, self.complex(q)?, self.complex(p + q - 1)?);
        let t = tensor_many(&[&cp, &cq])?;
        let mut err = None;
        let map = ChainMap::from_fn(Arc::new(t.complex.clone()), cr.clone(), |n, j| {
            let tuple = t.tuple(n, j);
            let (g, h) = (cp.flat_index(tuple[0].0, tuple[0].1), cq.flat_index(tuple[1].0, tuple[1].1));
            match self.compose_flat(p, q, i, g, h) {
                Ok(v) => {
                    let off = cr.flat_offset(n);
                    v.into_iter().map(|(f, x)| (f - off, x)).collect()
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
        map.validate()?;
        Ok(map)
    }

    /// Checks that composing with a relation of the window in arity `p` (or `q`) gives zero,
    /// for up to `limit` relations on each side.
    pub fn check_composition_descent(&self, p: usize, q: usize, i: usize, limit: usize) -> Result<()> {
        let ctx = &self.ctx;
        let (wp, wq) = (self.reference(p)?, self.reference(q)?);
        let (lp, lq) = ((0..wp.complex.total_rank()).map(|g| wp.lift(g)).collect::<Vec<_>>(), (0..wq.complex.total_rank()).map(|g| wq.lift(g)).collect::<Vec<_>>());
        let mut failures = vec![];
        let mut check = |rel: &[(CorollaElem, Scalar)], left: bool| -> Result<()> {
            let others = if left { &lq } else { &lp };
            for other in others {
                let terms = if left { self.graft_terms(rel, i, other)? } else { self.graft_terms(other, i, rel)? };
                let v = self.project(p + q - 1, &terms)?;
                if !v.is_empty() && failures.len() < 3 {
                    failures.push(rel.iter().map(|(e, _)| ctx.label(e)).collect::<Vec<_>>().join(" + "));
                }
            }
            Ok(())
        };
        for (w, left, n) in [(&wp, true, p), (&wq, false, q)] {
            let mut rels = vec![];
            ctx.for_each_elementary(n, w.s_bound, w.weight, |r| {
                if rels.len() < limit {
                    let (dc, de) = ctx.relation_sides(r);
                    let mut terms = dc;
                    terms.extend(de.into_iter().map(|(e, c)| (e, -c)));
                    rels.push(terms);
                }
            });
            for r in rels {
                // composites leaving the target window cannot be judged, so skip them
                match check(&r, left) {
                    Ok(()) | Err(Error::BoundMismatch(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::Descent(format!("composition does not descend: {}", failures.join("; "))))
        }
    }

    /// The unit of `O_A(1)`.
    pub fn unit(&self) -> Result<SVec> {
        let terms: Vec<(CorollaElem, Scalar)> = self
            .ctx
            .op
            .unit()
            .into_iter()
            .map(|(o, c)| (CorollaElem { pattern: vec![false], o, a: vec![] }, c))
            .collect();
        self.project(1, &terms)
    }

    /// `A -> O_A(0)`, `x ↦ u(x)`.
    pub fn from_algebra(&self) -> Result<ChainMap> {
        let a = self.ctx.alg.carrier_arc();
        let target = self.complex(0)?;
        let unit = self.ctx.op.unit();
        let mut err = None;
        let map = ChainMap::from_fn(a.clone(), target.clone(), |n, j| {
            let x = a.flat_index(n, j);
            let terms: Vec<(CorollaElem, Scalar)> =
                unit.iter().map(|(o, c)| (CorollaElem { pattern: vec![true], o: *o, a: vec![x] }, c.clone())).collect();
            match self.project(0, &terms) {
                Ok(v) => {
                    let off = target.flat_offset(n);
                    v.into_iter().map(|(f, y)| (f - off, y)).collect()
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
        map.validate()?;
        Ok(map)
    }

    /// `O_A(0) -> A`, applying the action to every all-straight corolla.
    pub fn to_algebra(&self) -> Result<ChainMap> {
        let src = self.complex(0)?;
        let a = self.ctx.alg.carrier_arc();
        let w = self.reference(0)?;
        let map = ChainMap::from_fn(src.clone(), a.clone(), |n, j| {
            let mut out = SVec::new();
            for (e, c) in w.lift(src.flat_index(n, j)) {
                sv_add_scaled(self.ctx.ring, &mut out, &self.ctx.alg.act(e.arity(), e.o, &e.a), &c);
            }
            let off = a.flat_offset(n);
            out.into_iter().map(|(f, y)| (f - off, y)).collect()
        });
        map.validate()?;
        Ok(map)
    }

    /// Codes of the corollas representing the generators of arity `n` at the stabilized window.
    pub fn surviving_codes(&self, n: usize) -> Result<Vec<String>> {
        Ok(self.component(n)?.window.surviving_codes(&self.ctx))
    }
}

/// The map `O_φ: O_A(n) -> O_C(n)` induced by an algebra map, on reference windows.
pub fn induced_map(phi: &AlgebraMap, src: &EnvelopingOperad, tgt: &EnvelopingOperad, n: usize) -> Result<ChainMap> {
    let (cs, ct) = (src.complex(n)?, tgt.complex(n)?);
    let ring = src.ctx.ring;
    let ws = src.reference(n)?;
    let mut err = None;
    let map = ChainMap::from_fn(cs.clone(), ct.clone(), |d, j| {
        let mut terms = vec![];
        for (e, c) in ws.lift(cs.flat_index(d, j)) {
            // expand φ on every straight label
            let mut partial: Vec<(Vec<usize>, Scalar)> = vec![(vec![], c)];
            for &x in &e.a {
                let img = phi.apply(&sv_single(x, int(1)));
                let mut next = vec![];
                for (pre, c0) in &partial {
                    for (y, c1) in &img {
                        let mut v = pre.clone();
                        v.push(*y);
                        next.push((v, c0 * c1));
                    }
                }
                partial = next;
            }
            for (a, c) in partial {
                terms.push((CorollaElem { pattern: e.pattern.clone(), o: e.o, a }, c));
            }
        }
        match tgt.project(n, &terms) {
            Ok(v) => {
                let off = ct.flat_offset(d);
                let mut out = SVec::new();
                for (f, x) in v {
                    add_entry(ring, &mut out, f - off, &x);
                }
                out
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
    map.validate()?;
    Ok(map)
}
