//! Sparse vectors and a sparse quotient reducer for large, very sparse relation systems.
//!
//! The enveloping coequalizers produce tens of thousands of relations with two or three
//! terms each. They are reduced here by eliminating unit pivots; whatever survives over ZZ
//! (non-unit relations) is handed to the dense Smith form on the small remaining block.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::Zero;

use super::matrix::ExactMatrix;
use super::module::{reduce_presentation, FgModule};
use super::ring::{Ring, Scalar};

/// Sparse vector: index to nonzero coefficient.
pub type SVec = BTreeMap<usize, Scalar>;

pub fn sv_single(i: usize, x: Scalar) -> SVec {
    let mut v = SVec::new();
    if !x.is_zero() {
        v.insert(i, x);
    }
    v
}

/// `acc += s * v`
pub fn sv_add_scaled(ring: Ring, acc: &mut SVec, v: &SVec, s: &Scalar) {
    if s.is_zero() {
        return;
    }
    for (i, x) in v {
        add_entry(ring, acc, *i, &(x * s));
    }
}

pub fn add_entry(ring: Ring, acc: &mut SVec, i: usize, x: &Scalar) {
    let x = ring.normalize(x.clone());
    if x.is_zero() {
        return;
    }
    let e = acc.entry(i).or_insert_with(Scalar::zero);
    *e = ring.add(e, &x);
    if e.is_zero() {
        acc.remove(&i);
    }
}

pub fn sv_scale(ring: Ring, v: &SVec, s: &Scalar) -> SVec {
    let mut out = SVec::new();
    sv_add_scaled(ring, &mut out, v, s);
    out
}

pub fn sv_to_dense(v: &SVec, len: usize) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); len];
    for (i, x) in v {
        out[*i] = x.clone();
    }
    out
}

pub fn dense_to_sv(v: &[Scalar]) -> SVec {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

/// Incremental quotient `R^ncols / span(relations)`.
#[derive(Debug)]
pub struct SparseReducer {
    ring: Ring,
    ncols: usize,
    /// pivot column -> expression in non-pivot columns
    pivots: HashMap<usize, SVec>,
    /// column -> pivots whose expression mentions it
    uses: HashMap<usize, HashSet<usize>>,
    hard: Vec<SVec>,
}

impl SparseReducer {
    pub fn new(ring: Ring, ncols: usize) -> Self {
        Self { ring, ncols, pivots: HashMap::new(), uses: HashMap::new(), hard: vec![] }
    }

    fn reduce(&self, row: &SVec) -> SVec {
        let mut out = SVec::new();
        for (c, x) in row {
            match self.pivots.get(c) {
                Some(expr) => sv_add_scaled(self.ring, &mut out, expr, x),
                None => add_entry(self.ring, &mut out, *c, x),
            }
        }
        out
    }

    /// Adds a relation; returns false when it was already implied by earlier ones.
    pub fn add_relation(&mut self, row: &SVec) -> bool {
        let r = self.reduce(row);
        if r.is_empty() {
            return false;
        }
        if !self.try_pivot(r.clone()) {
            self.hard.push(r);
        }
        true
    }

    fn try_pivot(&mut self, r: SVec) -> bool {
        let ring = self.ring;
        let Some((&c, a)) = r.iter().rev().find(|(_, x)| ring.is_unit(x)) else { return false };
        let inv = ring.inverse(a).expect("unit");
        let factor = ring.neg(&inv);
        let mut expr = SVec::new();
        for (j, x) in &r {
            if *j != c {
                add_entry(ring, &mut expr, *j, &(x * &factor));
            }
        }
        // substitute c into every expression that mentions it
        if let Some(users) = self.uses.remove(&c) {
            for p in users {
                let Some(pe) = self.pivots.get_mut(&p) else { continue };
                let Some(beta) = pe.remove(&c) else { continue };
                for (j, x) in &expr {
                    add_entry(ring, pe, *j, &(x * &beta));
                    if pe.contains_key(j) {
                        self.uses.entry(*j).or_default().insert(p);
                    }
                }
            }
        }
        for j in expr.keys() {
            self.uses.entry(*j).or_default().insert(c);
        }
        self.pivots.insert(c, expr);
        true
    }

    pub fn finish(mut self) -> SparseQuotient {
        let ring = self.ring;
        loop {
            let hard = std::mem::take(&mut self.hard);
            let mut progressed = false;
            for h in hard {
                let r = self.reduce(&h);
                if r.is_empty() {
                    continue;
                }
                if self.try_pivot(r.clone()) {
                    progressed = true;
                } else {
                    self.hard.push(r);
                }
            }
            if !progressed {
                break;
            }
        }
        let hard: Vec<SVec> = self.hard.iter().map(|h| self.reduce(h)).filter(|h| !h.is_empty()).collect();

        let involved: BTreeSet<usize> = hard.iter().flat_map(|h| h.keys().copied()).collect();
        let mut gens: Vec<GenSource> = vec![];
        let mut orders: Vec<BigInt> = vec![];
        let mut free_map: HashMap<usize, usize> = HashMap::new();
        for c in 0..self.ncols {
            if !self.pivots.contains_key(&c) && !involved.contains(&c) {
                free_map.insert(c, gens.len());
                gens.push(GenSource::Column(c));
                orders.push(BigInt::zero());
            }
        }
        let involved: Vec<usize> = involved.into_iter().collect();
        let inv_pos: HashMap<usize, usize> = involved.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let block_offset = gens.len();
        let (block_projection, block_lift) = if involved.is_empty() {
            (ExactMatrix::zeros(ring, 0, 0), ExactMatrix::zeros(ring, 0, 0))
        } else {
            let mut rel = ExactMatrix::zeros(ring, involved.len(), hard.len());
            for (j, h) in hard.iter().enumerate() {
                for (c, x) in h {
                    rel.set(inv_pos[c], j, x.clone());
                }
            }
            let red = reduce_presentation(&rel);
            for (k, o) in red.orders.iter().enumerate() {
                gens.push(GenSource::Block(k));
                orders.push(o.clone());
            }
            (red.projection, red.lift)
        };

        SparseQuotient {
            ring,
            ncols: self.ncols,
            pivots: self.pivots,
            free_map,
            involved,
            inv_pos,
            block_offset,
            block_projection,
            block_lift,
            gens,
            orders,
        }
    }
}

#[derive(Clone, Debug)]
enum GenSource {
    Column(usize),
    Block(usize),
}

/// Result of [`SparseReducer::finish`]: the quotient as `⊕ R/orders[g]` with projection and lift.
#[derive(Clone, Debug)]
pub struct SparseQuotient {
    ring: Ring,
    ncols: usize,
    pivots: HashMap<usize, SVec>,
    free_map: HashMap<usize, usize>,
    involved: Vec<usize>,
    inv_pos: HashMap<usize, usize>,
    block_offset: usize,
    block_projection: ExactMatrix,
    block_lift: ExactMatrix,
    gens: Vec<GenSource>,
    orders: Vec<BigInt>,
}

impl SparseQuotient {
    pub fn num_generators(&self) -> usize {
        self.gens.len()
    }

    pub fn num_columns(&self) -> usize {
        self.ncols
    }

    pub fn orders(&self) -> &[BigInt] {
        &self.orders
    }

    pub fn module(&self) -> FgModule {
        FgModule::from_orders(self.ring, &self.orders)
    }

    /// Image of an original-coordinate vector, in generator coordinates (not reduced mod orders).
    pub fn project(&self, v: &SVec) -> SVec {
        let ring = self.ring;
        let mut free = SVec::new();
        for (c, x) in v {
            match self.pivots.get(c) {
                Some(expr) => sv_add_scaled(ring, &mut free, expr, x),
                None => add_entry(ring, &mut free, *c, x),
            }
        }
        let mut out = SVec::new();
        for (c, x) in &free {
            if let Some(g) = self.free_map.get(c) {
                add_entry(ring, &mut out, *g, x);
            } else {
                let p = self.inv_pos[c];
                for k in 0..self.block_projection.rows() {
                    let y = self.block_projection.get(k, p);
                    if !y.is_zero() {
                        add_entry(ring, &mut out, self.block_offset + k, &(x * y));
                    }
                }
            }
        }
        out
    }

    pub fn project_column(&self, c: usize) -> SVec {
        self.project(&sv_single(c, Scalar::from_integer(1.into())))
    }

    /// A representative of generator `g` in original coordinates.
    pub fn lift(&self, g: usize) -> SVec {
        match &self.gens[g] {
            GenSource::Column(c) => sv_single(*c, Scalar::from_integer(1.into())),
            GenSource::Block(k) => {
                let mut out = SVec::new();
                for (p, c) in self.involved.iter().enumerate() {
                    add_entry(self.ring, &mut out, *c, self.block_lift.get(p, *k));
                }
                out
            }
        }
    }

    pub fn is_pivot(&self, c: usize) -> bool {
        self.pivots.contains_key(&c)
    }
}
