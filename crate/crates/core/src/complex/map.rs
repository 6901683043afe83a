use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use super::{tensor_many, ChainComplex, TensorComplex};
use crate::error::{Error, Result};
use crate::linalg::module::{cokernel, column_span_basis, kernel_basis, reduce_rows_mod, solve, subquotient};
use crate::linalg::ring::from_big;
use crate::linalg::{ExactMatrix, FgModule, SVec, Scalar};

/// A degree-0 chain map; components are matrices in the generator bases.
#[derive(Clone, Debug)]
pub struct ChainMap {
    source: Arc<ChainComplex>,
    target: Arc<ChainComplex>,
    comps: BTreeMap<i64, ExactMatrix>,
}

/// Kernel and cokernel of a map of modules presented as `R^m / im(rel_src) -> R^k / im(rel_tgt)`.
pub(crate) fn presented_kernel_cokernel(
    rel_src: &ExactMatrix,
    rel_tgt: &ExactMatrix,
    f: &ExactMatrix,
) -> (FgModule, FgModule) {
    let ring = f.ring();
    let (k, m) = f.shape();
    let stacked = f.hstack(rel_tgt);
    let coker = cokernel(&stacked);
    if m == 0 {
        return (FgModule::zero(ring), coker);
    }
    let kb = kernel_basis(&stacked);
    let pre = column_span_basis(&kb.submatrix(0..m, 0..kb.cols()));
    let ker = if pre.cols() == 0 {
        FgModule::zero(ring)
    } else {
        subquotient(&pre, rel_src).expect("source relations lie in the preimage").0
    };
    let _ = k;
    (ker, coker)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeReport {
    pub source: FgModule,
    pub target: FgModule,
    pub kernel: FgModule,
    pub cokernel: FgModule,
}

/// Degreewise behaviour of a chain map on homology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasiIsoReport {
    pub degrees: BTreeMap<i64, DegreeReport>,
    pub is_quasi_iso: bool,
}

pub fn is_quasi_iso(f: &ChainMap) -> QuasiIsoReport {
    f.quasi_iso_report()
}

impl ChainMap {
    pub fn new(source: ChainComplex, target: ChainComplex, comps: BTreeMap<i64, ExactMatrix>) -> Result<Self> {
        let m = Self::new_unchecked(Arc::new(source), Arc::new(target), comps);
        m.validate()?;
        Ok(m)
    }

    pub fn new_unchecked(
        source: Arc<ChainComplex>,
        target: Arc<ChainComplex>,
        comps: BTreeMap<i64, ExactMatrix>,
    ) -> Self {
        let ring = source.ring();
        let mut out = BTreeMap::new();
        for (n, mut c) in comps {
            if source.rank(n) == 0 || target.rank(n) == 0 {
                continue;
            }
            c = c.with_ring(ring);
            reduce_rows_mod(&mut c, target.orders(n));
            if !c.is_zero() {
                out.insert(n, c);
            }
        }
        Self { source, target, comps: out }
    }

    /// Builds a map from the image of every generator, given as a sparse vector in the target degree.
    pub fn from_fn(
        source: Arc<ChainComplex>,
        target: Arc<ChainComplex>,
        mut f: impl FnMut(i64, usize) -> SVec,
    ) -> Self {
        let ring = source.ring();
        let mut comps = BTreeMap::new();
        for n in source.degrees() {
            let mut m = ExactMatrix::zeros(ring, target.rank(n), source.rank(n));
            for j in 0..source.rank(n) {
                for (i, x) in f(n, j) {
                    m.add_to(i, j, &x);
                }
            }
            comps.insert(n, m);
        }
        Self::new_unchecked(source, target, comps)
    }

    pub fn identity(c: &ChainComplex) -> Self {
        let c = Arc::new(c.clone());
        Self::identity_arc(c)
    }

    pub fn identity_arc(c: Arc<ChainComplex>) -> Self {
        let comps = c.degrees().into_iter().map(|n| (n, ExactMatrix::identity(c.ring(), c.rank(n)))).collect();
        Self::new_unchecked(c.clone(), c, comps)
    }

    pub fn zero(source: &ChainComplex, target: &ChainComplex) -> Self {
        Self::new_unchecked(Arc::new(source.clone()), Arc::new(target.clone()), BTreeMap::new())
    }

    pub fn zero_arc(source: Arc<ChainComplex>, target: Arc<ChainComplex>) -> Self {
        Self::new_unchecked(source, target, BTreeMap::new())
    }

    pub fn source(&self) -> &ChainComplex {
        &self.source
    }

    pub fn target(&self) -> &ChainComplex {
        &self.target
    }

    pub fn source_arc(&self) -> Arc<ChainComplex> {
        self.source.clone()
    }

    pub fn target_arc(&self) -> Arc<ChainComplex> {
        self.target.clone()
    }

    pub fn component(&self, n: i64) -> ExactMatrix {
        self.comps
            .get(&n)
            .cloned()
            .unwrap_or_else(|| ExactMatrix::zeros(self.source.ring(), self.target.rank(n), self.source.rank(n)))
    }

    pub fn component_ref(&self, n: i64) -> Option<&ExactMatrix> {
        self.comps.get(&n)
    }

    /// Image of generator `j` of degree `n`, as a sparse vector.
    pub fn apply_generator(&self, n: i64, j: usize) -> SVec {
        let mut out = SVec::new();
        if let Some(c) = self.comps.get(&n) {
            for i in 0..c.rows() {
                let x = c.get(i, j);
                if !x.is_zero() {
                    out.insert(i, x.clone());
                }
            }
        }
        out
    }

    pub fn apply(&self, n: i64, v: &SVec) -> SVec {
        let ring = self.source.ring();
        let mut out = SVec::new();
        if let Some(c) = self.comps.get(&n) {
            for (j, x) in v {
                for i in 0..c.rows() {
                    let y = c.get(i, *j);
                    if !y.is_zero() {
                        crate::linalg::sparse::add_entry(ring, &mut out, i, &(y * x));
                    }
                }
            }
        }
        self.target.reduce_vec(n, &mut out);
        out
    }

    /// Applies the map to a flat coordinate vector of the source.
    pub fn apply_flat(&self, v: &SVec) -> SVec {
        let ring = self.source.ring();
        let mut out = SVec::new();
        for (f, x) in v {
            let (n, j) = self.source.flat_to_local(*f);
            let off = self.target.flat_offset(n);
            for (i, y) in self.apply_generator(n, j) {
                crate::linalg::sparse::add_entry(ring, &mut out, off + i, &(y * x));
            }
        }
        self.target.reduce_flat(&mut out);
        out
    }

    pub fn validate(&self) -> Result<()> {
        let (s, t) = (&*self.source, &*self.target);
        if s.ring() != t.ring() {
            return Err(Error::RingMismatch(s.ring().label(), t.ring().label()));
        }
        for (n, c) in &self.comps {
            if c.shape() != (t.rank(*n), s.rank(*n)) {
                return Err(Error::NotAChainMap {
                    degree: *n,
                    reason: format!("component has shape {:?}, expected {:?}", c.shape(), (t.rank(*n), s.rank(*n))),
                });
            }
        }
        let mut degrees = s.degrees();
        degrees.extend(s.degrees().iter().map(|n| n + 1));
        degrees.sort_unstable();
        degrees.dedup();
        for n in degrees {
            let mut diff = t.differential(n).mul(&self.component(n)).sub(&self.component(n - 1).mul(&s.differential(n)));
            reduce_rows_mod(&mut diff, t.orders(n - 1));
            if !diff.is_zero() {
                return Err(Error::NotAChainMap { degree: n, reason: "does not commute with the differentials".into() });
            }
            for (j, o) in s.orders(n).iter().enumerate() {
                if o.is_zero() {
                    continue;
                }
                let mut col = self.component(n).select_cols(&[j]).scale(&from_big(o.clone()));
                reduce_rows_mod(&mut col, t.orders(n));
                if !col.is_zero() {
                    return Err(Error::NotAChainMap {
                        degree: n,
                        reason: format!("not well defined on torsion generator {j}"),
                    });
                }
            }
        }
        Ok(())
    }

    fn check_composable(&self, first: &ChainMap) -> Result<()> {
        let (a, b) = (&*first.target, &*self.source);
        let same = Arc::ptr_eq(&first.target, &self.source)
            || (a.degrees() == b.degrees() && a.degrees().iter().all(|n| a.orders(*n) == b.orders(*n)));
        if same {
            Ok(())
        } else {
            Err(Error::Shape("composed maps do not share the middle complex".into()))
        }
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &ChainMap) -> Result<ChainMap> {
        self.check_composable(first)?;
        let comps = first
            .comps
            .iter()
            .filter_map(|(n, f)| self.comps.get(n).map(|g| (*n, g.mul(f))))
            .collect();
        Ok(Self::new_unchecked(first.source.clone(), self.target.clone(), comps))
    }

    fn check_parallel(&self, other: &ChainMap) -> Result<()> {
        let ok = |x: &ChainComplex, y: &ChainComplex| {
            x.degrees() == y.degrees() && x.degrees().iter().all(|n| x.orders(*n) == y.orders(*n))
        };
        if ok(&self.source, &other.source) && ok(&self.target, &other.target) {
            Ok(())
        } else {
            Err(Error::NotParallel("sources or targets differ".into()))
        }
    }

    pub fn add(&self, other: &ChainMap) -> Result<ChainMap> {
        self.check_parallel(other)?;
        let mut degrees: Vec<i64> = self.comps.keys().chain(other.comps.keys()).copied().collect();
        degrees.sort_unstable();
        degrees.dedup();
        let comps = degrees.into_iter().map(|n| (n, self.component(n).add(&other.component(n)))).collect();
        Ok(Self::new_unchecked(self.source.clone(), self.target.clone(), comps))
    }

    pub fn scale(&self, s: &Scalar) -> ChainMap {
        let comps = self.comps.iter().map(|(n, c)| (*n, c.scale(s))).collect();
        Self::new_unchecked(self.source.clone(), self.target.clone(), comps)
    }

    pub fn neg(&self) -> ChainMap {
        self.scale(&crate::linalg::ring::int(-1))
    }

    pub fn sub(&self, other: &ChainMap) -> Result<ChainMap> {
        self.add(&other.neg())
    }

    /// Equality of components modulo the target orders.
    pub fn same_as(&self, other: &ChainMap) -> bool {
        self.sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Kernel and cokernel of the degree-`n` component as a map of modules.
    pub fn kernel_cokernel(&self, n: i64) -> (FgModule, FgModule) {
        presented_kernel_cokernel(&self.source.order_relations(n), &self.target.order_relations(n), &self.component(n))
    }

    pub fn is_iso(&self) -> bool {
        let mut degrees = self.source.degrees();
        degrees.extend(self.target.degrees());
        degrees.sort_unstable();
        degrees.dedup();
        degrees.into_iter().all(|n| {
            let (k, c) = self.kernel_cokernel(n);
            k.is_zero() && c.is_zero()
        })
    }

    /// The induced map on `H_n`, in the cycle coordinates of both homology presentations.
    pub fn induced_homology(&self, n: i64) -> (super::HomologyPresentation, super::HomologyPresentation, ExactMatrix) {
        let hs = self.source.homology_presentation(n);
        let ht = self.target.homology_presentation(n);
        let image = self.component(n).mul(&hs.cycles);
        let m = if ht.cycles.cols() == 0 || image.cols() == 0 {
            ExactMatrix::zeros(self.source.ring(), ht.cycles.cols(), hs.cycles.cols())
        } else {
            solve(&ht.cycles, &image).expect("cycles map to cycles")
        };
        (hs, ht, m)
    }

    pub fn quasi_iso_report(&self) -> QuasiIsoReport {
        let mut degrees = self.source.degrees();
        degrees.extend(self.target.degrees());
        degrees.sort_unstable();
        degrees.dedup();
        let mut out = BTreeMap::new();
        let mut ok = true;
        for n in degrees {
            let (hs, ht, m) = self.induced_homology(n);
            let (kernel, cokernel) = presented_kernel_cokernel(&hs.relations, &ht.relations, &m);
            ok &= kernel.is_zero() && cokernel.is_zero();
            out.insert(n, DegreeReport { source: hs.module, target: ht.module, kernel, cokernel });
        }
        QuasiIsoReport { degrees: out, is_quasi_iso: ok }
    }

    /// Tensor product of maps between precomputed tensor complexes.
    pub fn tensor_between(source: &TensorComplex, target: &TensorComplex, maps: &[&ChainMap]) -> ChainMap {
        let ring = source.complex.ring();
        let mut comps = BTreeMap::new();
        for (&n, list) in &source.tuples {
            let mut m = ExactMatrix::zeros(ring, target.complex.rank(n), list.len());
            for (col, tuple) in list.iter().enumerate() {
                // expand ⊗_k f_k(x_k)
                let mut partial: Vec<(Vec<(i64, usize)>, Scalar)> = vec![(vec![], crate::linalg::ring::int(1))];
                for (k, &(deg, i)) in tuple.iter().enumerate() {
                    let img = maps[k].apply_generator(deg, i);
                    let mut next = Vec::with_capacity(partial.len() * img.len());
                    for (t, x) in &partial {
                        for (r, y) in &img {
                            let mut t2 = t.clone();
                            t2.push((deg, *r));
                            next.push((t2, x * y));
                        }
                    }
                    partial = next;
                    if partial.is_empty() {
                        break;
                    }
                }
                for (t, x) in partial {
                    if let Some((_, row)) = target.index_of(&t) {
                        m.add_to(row, col, &x);
                    }
                }
            }
            comps.insert(n, m);
        }
        Self::new_unchecked(Arc::new(source.complex.clone()), Arc::new(target.complex.clone()), comps)
    }

    /// `⊕ f_i : ⊕ A_i -> ⊕ B_i`.
    pub fn block_diagonal(maps: &[ChainMap], ring: crate::linalg::Ring) -> Result<ChainMap> {
        let sources: Vec<&ChainComplex> = maps.iter().map(|m| m.source()).collect();
        let targets: Vec<&ChainComplex> = maps.iter().map(|m| m.target()).collect();
        let s = Arc::new(ChainComplex::direct_sum(&sources, ring)?);
        let t = Arc::new(ChainComplex::direct_sum(&targets, ring)?);
        let mut comps = BTreeMap::new();
        for n in s.degrees() {
            let (so, to) = (ChainComplex::sum_offsets(&sources, n), ChainComplex::sum_offsets(&targets, n));
            let mut m = ExactMatrix::zeros(ring, t.rank(n), s.rank(n));
            for (k, f) in maps.iter().enumerate() {
                if let Some(c) = f.component_ref(n) {
                    m.set_block(to[k], so[k], c);
                }
            }
            comps.insert(n, m);
        }
        Ok(Self::new_unchecked(s, t, comps))
    }

    /// `(f_1, …, f_k) : ⊕ A_i -> B` for maps with a common target.
    pub fn copair(maps: &[ChainMap], target: Arc<ChainComplex>) -> Result<ChainMap> {
        let ring = target.ring();
        let sources: Vec<&ChainComplex> = maps.iter().map(|m| m.source()).collect();
        let s = Arc::new(ChainComplex::direct_sum(&sources, ring)?);
        let mut comps = BTreeMap::new();
        for n in s.degrees() {
            let so = ChainComplex::sum_offsets(&sources, n);
            let mut m = ExactMatrix::zeros(ring, target.rank(n), s.rank(n));
            for (k, f) in maps.iter().enumerate() {
                if f.target().rank(n) != target.rank(n) {
                    return Err(Error::Shape(format!("copair component {k} has a different target")));
                }
                if let Some(c) = f.component_ref(n) {
                    m.set_block(0, so[k], c);
                }
            }
            comps.insert(n, m);
        }
        Ok(Self::new_unchecked(s, target, comps))
    }

    /// Inclusion of the `k`-th summand into `⊕ parts`.
    pub fn inclusion(parts: &[&ChainComplex], k: usize, ring: crate::linalg::Ring) -> Result<ChainMap> {
        let s = Arc::new(ChainComplex::direct_sum(parts, ring)?);
        let src = Arc::new(parts[k].clone());
        let mut comps = BTreeMap::new();
        for n in src.degrees() {
            let off = ChainComplex::sum_offsets(parts, n)[k];
            let mut m = ExactMatrix::zeros(ring, s.rank(n), src.rank(n));
            m.set_block(off, 0, &ExactMatrix::identity(ring, src.rank(n)));
            comps.insert(n, m);
        }
        Ok(Self::new_unchecked(src, s, comps))
    }

    pub fn tensor_many_maps(maps: &[&ChainMap]) -> Result<ChainMap> {
        let sources: Vec<&ChainComplex> = maps.iter().map(|m| m.source()).collect();
        let targets: Vec<&ChainComplex> = maps.iter().map(|m| m.target()).collect();
        let s = tensor_many(&sources)?;
        let t = tensor_many(&targets)?;
        Ok(Self::tensor_between(&s, &t, maps))
    }
}
