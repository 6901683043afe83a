//! Bounded chain complexes over an exact ring.
//!
//! A degree is presented as `⊕ R/o_i`: every generator carries an order `o_i`, with 0 meaning a
//! free generator. Complexes built from free data stay free; quotients (push-outs, coequalizers)
//! may produce torsion generators, and the differential is then only meaningful modulo the
//! orders of its target degree.

mod colimit;
mod cube;
mod map;

pub use colimit::{coequalizer, pushout, quotient, sequential_colimit, Coequalizer, Pushout, Quotient, SequentialColimit};
pub use cube::{
    cube_latching_map, pushout_product, pushout_product_power, tensor_cube, ComplexCube, CubeFactor, Latching,
    TensorCube,
};
pub use map::{is_quasi_iso, ChainMap, DegreeReport, QuasiIsoReport};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::module::{
    column_span_basis, kernel_basis, order_relations, reduce_rows_mod, subquotient,
};
use crate::linalg::ring::{from_big, int};
use crate::linalg::sparse::add_entry;
use crate::linalg::{ExactMatrix, FgModule, Ring, SVec, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub(crate) struct DegreeData {
    pub orders: Vec<BigInt>,
    pub labels: Vec<String>,
}

#[derive(Clone, PartialEq, Eq)]
pub struct ChainComplex {
    ring: Ring,
    degrees: BTreeMap<i64, DegreeData>,
    /// `d_n : C_n -> C_{n-1}`; absent entries are zero.
    diffs: BTreeMap<i64, ExactMatrix>,
}

/// Per-degree module and homology invariants; equality is the notion of "same complex" used in checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexInvariants {
    pub modules: BTreeMap<i64, FgModule>,
    pub homology: BTreeMap<i64, FgModule>,
}

impl ComplexInvariants {
    pub fn is_zero(&self) -> bool {
        self.modules.is_empty()
    }

    pub fn total_rank(&self) -> usize {
        self.modules.values().map(|m| m.rank).sum()
    }
}

impl fmt::Display for ComplexInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.modules.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .modules
            .iter()
            .map(|(n, m)| {
                let h = self.homology.get(n).map(|h| h.to_string()).unwrap_or_else(|| "0".into());
                format!("[{n}] {m} (H = {h})")
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Homology in one degree, presented on a basis of the cycle lattice.
#[derive(Clone, Debug)]
pub struct HomologyPresentation {
    /// Columns: a basis of the cycles `Z_n` (in carrier coordinates).
    pub cycles: ExactMatrix,
    /// Columns: boundaries and order relations, in cycle coordinates.
    pub relations: ExactMatrix,
    pub module: FgModule,
}

impl ChainComplex {
    pub fn zero(ring: Ring) -> Self {
        Self { ring, degrees: BTreeMap::new(), diffs: BTreeMap::new() }
    }

    /// The ground ring in degree 0.
    pub fn unit(ring: Ring) -> Self {
        Self::concentrated(ring, 0, 1)
    }

    pub fn concentrated(ring: Ring, degree: i64, rank: usize) -> Self {
        let mut c = Self::zero(ring);
        c.set_free(degree, rank);
        c
    }

    /// Builds and validates a free complex from ranks and differentials.
    pub fn from_parts(
        ring: Ring,
        ranks: BTreeMap<i64, usize>,
        diffs: BTreeMap<i64, ExactMatrix>,
    ) -> Result<Self> {
        let mut c = Self::zero(ring);
        for (n, r) in ranks {
            c.set_free(n, r);
        }
        for (n, d) in diffs {
            c.set_differential(n, d);
        }
        c.validate()?;
        Ok(c)
    }

    pub(crate) fn from_raw(ring: Ring, degrees: BTreeMap<i64, DegreeData>, diffs: BTreeMap<i64, ExactMatrix>) -> Self {
        let mut c = Self { ring, degrees, diffs };
        c.prune();
        c
    }

    /// Sets degree `n` to `rank` free generators with default labels; clears adjacent differentials.
    pub fn set_free(&mut self, n: i64, rank: usize) {
        let labels = (0..rank).map(|i| format!("e{n}_{i}")).collect();
        self.set_degree(n, vec![BigInt::zero(); rank], labels);
    }

    pub fn set_degree(&mut self, n: i64, orders: Vec<BigInt>, labels: Vec<String>) {
        assert_eq!(orders.len(), labels.len());
        self.diffs.remove(&n);
        self.diffs.remove(&(n + 1));
        if orders.is_empty() {
            self.degrees.remove(&n);
        } else {
            self.degrees.insert(n, DegreeData { orders, labels });
        }
    }

    pub fn set_labels(&mut self, n: i64, labels: Vec<String>) {
        let d = self.degrees.get_mut(&n).expect("degree present");
        assert_eq!(d.labels.len(), labels.len());
        d.labels = labels;
    }

    pub fn set_differential(&mut self, n: i64, d: ExactMatrix) {
        if d.is_zero() {
            self.diffs.remove(&n);
        } else {
            self.diffs.insert(n, d.with_ring(self.ring));
        }
    }

    fn prune(&mut self) {
        self.degrees.retain(|_, d| !d.orders.is_empty());
        let keep: Vec<i64> = self
            .diffs
            .iter()
            .filter(|(n, d)| self.degrees.contains_key(n) && self.degrees.contains_key(&(*n - 1)) && !d.is_zero())
            .map(|(n, _)| *n)
            .collect();
        self.diffs.retain(|n, _| keep.contains(n));
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn rank(&self, n: i64) -> usize {
        self.degrees.get(&n).map_or(0, |d| d.orders.len())
    }

    pub fn orders(&self, n: i64) -> &[BigInt] {
        self.degrees.get(&n).map_or(&[], |d| &d.orders)
    }

    pub fn labels(&self, n: i64) -> &[String] {
        self.degrees.get(&n).map_or(&[], |d| &d.labels)
    }

    /// Degrees with at least one generator, ascending.
    pub fn degrees(&self) -> Vec<i64> {
        self.degrees.keys().copied().collect()
    }

    pub fn differential(&self, n: i64) -> ExactMatrix {
        self.diffs
            .get(&n)
            .cloned()
            .unwrap_or_else(|| ExactMatrix::zeros(self.ring, self.rank(n - 1), self.rank(n)))
    }

    pub fn is_zero(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn is_free(&self) -> bool {
        self.degrees.values().all(|d| d.orders.iter().all(|o| o.is_zero()))
    }

    pub fn total_rank(&self) -> usize {
        self.degrees.values().map(|d| d.orders.len()).sum()
    }

    /// Offset of degree `n` in the flat basis (degrees ascending).
    pub fn flat_offset(&self, n: i64) -> usize {
        self.degrees.range(..n).map(|(_, d)| d.orders.len()).sum()
    }

    pub fn flat_index(&self, n: i64, i: usize) -> usize {
        self.flat_offset(n) + i
    }

    pub fn flat_to_local(&self, mut f: usize) -> (i64, usize) {
        for (n, d) in &self.degrees {
            if f < d.orders.len() {
                return (*n, f);
            }
            f -= d.orders.len();
        }
        panic!("flat index out of range")
    }

    /// `(degree, local index)` for every generator in flat order.
    pub fn flat_basis(&self) -> Vec<(i64, usize)> {
        self.degrees.iter().flat_map(|(n, d)| (0..d.orders.len()).map(move |i| (*n, i))).collect()
    }

    /// Reduces a local coordinate vector of degree `n` modulo the generator orders.
    pub fn reduce_vec(&self, n: i64, v: &mut SVec) {
        let orders = self.orders(n);
        v.retain(|i, x| {
            let o = &orders[*i];
            if !o.is_zero() {
                *x = self.ring.div_rem(x, &from_big(o.clone())).1;
            }
            !x.is_zero()
        });
    }

    /// Reduces a flat coordinate vector modulo the generator orders.
    pub fn reduce_flat(&self, v: &mut SVec) {
        let mut off = 0;
        let mut bounds = vec![];
        for d in self.degrees.values() {
            bounds.push((off, &d.orders));
            off += d.orders.len();
        }
        v.retain(|f, x| {
            let k = bounds.partition_point(|(o, _)| *o <= *f) - 1;
            let o = &bounds[k].1[*f - bounds[k].0];
            if !o.is_zero() {
                *x = self.ring.div_rem(x, &from_big(o.clone())).1;
            }
            !x.is_zero()
        });
    }

    /// The differential on a flat coordinate vector, reduced modulo the orders.
    pub fn d_flat(&self, v: &SVec) -> SVec {
        let mut out = SVec::new();
        for (f, s) in v {
            let (n, i) = self.flat_to_local(*f);
            let Some(dm) = self.diffs.get(&n) else { continue };
            let off = self.flat_offset(n - 1);
            for r in 0..dm.rows() {
                let y = dm.get(r, i);
                if !y.is_zero() {
                    add_entry(self.ring, &mut out, off + r, &(y * s));
                }
            }
        }
        self.reduce_flat(&mut out);
        out
    }

    pub fn module(&self, n: i64) -> FgModule {
        FgModule::from_orders(self.ring, self.orders(n))
    }

    pub fn order_relations(&self, n: i64) -> ExactMatrix {
        order_relations(self.ring, self.orders(n))
    }

    /// Checks shapes, ring membership, `d∘d ≡ 0` and compatibility of `d` with the orders.
    pub fn validate(&self) -> Result<()> {
        for (n, d) in &self.diffs {
            let (r, c) = (self.rank(n - 1), self.rank(*n));
            if d.shape() != (r, c) {
                return Err(Error::NotAComplex {
                    degree: *n,
                    reason: format!("differential has shape {:?}, expected ({r}, {c})", d.shape()),
                });
            }
            if d.ring() != self.ring {
                return Err(Error::NotAComplex { degree: *n, reason: "differential over a different ring".into() });
            }
            for (j, o) in self.orders(*n).iter().enumerate() {
                if o.is_zero() {
                    continue;
                }
                let mut col = d.select_cols(&[j]).scale(&from_big(o.clone()));
                reduce_rows_mod(&mut col, self.orders(n - 1));
                if !col.is_zero() {
                    return Err(Error::NotAComplex {
                        degree: *n,
                        reason: format!("differential does not respect the order of generator {j}"),
                    });
                }
            }
        }
        for n in self.degrees() {
            let mut dd = self.differential(n - 1).mul(&self.differential(n));
            reduce_rows_mod(&mut dd, self.orders(n - 2));
            if !dd.is_zero() {
                return Err(Error::NotAComplex { degree: n, reason: "d∘d is not zero".into() });
            }
        }
        Ok(())
    }

    /// Basis (columns) of the cycle lattice `{x : d x ∈ K_{n-1}}`.
    pub fn cycles(&self, n: i64) -> ExactMatrix {
        let r = self.rank(n);
        let stacked = self.differential(n).hstack(&self.order_relations(n - 1));
        let k = kernel_basis(&stacked);
        let top = k.submatrix(0..r, 0..k.cols());
        column_span_basis(&top)
    }

    pub fn homology_presentation(&self, n: i64) -> HomologyPresentation {
        let z = self.cycles(n);
        let b = self.differential(n + 1).hstack(&self.order_relations(n));
        let (module, relations) = if z.cols() == 0 {
            (FgModule::zero(self.ring), ExactMatrix::zeros(self.ring, 0, b.cols()))
        } else {
            let (m, coords) = subquotient(&z, &b).expect("boundaries are cycles");
            (m, coords)
        };
        HomologyPresentation { cycles: z, relations, module }
    }

    pub fn homology(&self, n: i64) -> FgModule {
        self.homology_presentation(n).module
    }

    pub fn invariants(&self) -> ComplexInvariants {
        let mut modules = BTreeMap::new();
        let mut homology = BTreeMap::new();
        for n in self.degrees() {
            let m = self.module(n);
            if !m.is_zero() {
                modules.insert(n, m);
            }
            let h = self.homology(n);
            if !h.is_zero() {
                homology.insert(n, h);
            }
        }
        ComplexInvariants { modules, homology }
    }

    /// Ranks of homology in every supported degree (field Betti numbers over a field).
    pub fn betti(&self) -> BTreeMap<i64, usize> {
        self.degrees().into_iter().map(|n| (n, self.homology(n).rank)).collect()
    }

    /// Degreewise direct sum; generators of the i-th summand follow those of earlier summands.
    pub fn direct_sum(parts: &[&ChainComplex], ring: Ring) -> Result<ChainComplex> {
        for p in parts {
            if p.ring != ring {
                return Err(Error::RingMismatch(p.ring.label(), ring.label()));
            }
        }
        let mut degrees: BTreeMap<i64, DegreeData> = BTreeMap::new();
        for p in parts {
            for (n, d) in &p.degrees {
                let e = degrees.entry(*n).or_default();
                e.orders.extend(d.orders.iter().cloned());
                e.labels.extend(d.labels.iter().cloned());
            }
        }
        let mut diffs = BTreeMap::new();
        for n in degrees.keys().copied().collect::<Vec<_>>() {
            let blocks: Vec<ExactMatrix> = parts.iter().map(|p| p.differential(n)).collect();
            let refs: Vec<&ExactMatrix> = blocks.iter().collect();
            diffs.insert(n, ExactMatrix::block_diag(&refs, ring));
        }
        Ok(Self::from_raw(ring, degrees, diffs))
    }

    /// Offsets of each summand's degree-`n` block inside `direct_sum(parts)`.
    pub fn sum_offsets(parts: &[&ChainComplex], n: i64) -> Vec<usize> {
        let mut acc = 0;
        parts
            .iter()
            .map(|p| {
                let o = acc;
                acc += p.rank(n);
                o
            })
            .collect()
    }

    pub fn tensor(&self, other: &ChainComplex) -> Result<ChainComplex> {
        Ok(tensor_many(&[self, other])?.complex)
    }

    pub fn map_labels(&mut self, f: impl Fn(i64, usize, &str) -> String) {
        for (n, d) in self.degrees.iter_mut() {
            d.labels = d.labels.iter().enumerate().map(|(i, l)| f(*n, i, l)).collect();
        }
    }
}

impl fmt::Debug for ChainComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ChainComplex over {}", self.ring)?;
        for (n, d) in &self.degrees {
            writeln!(f, "  [{n}] {} generators, orders {:?}", d.orders.len(), d.orders)?;
        }
        for (n, d) in &self.diffs {
            writeln!(f, "  d_{n} = {:?}", d.to_string_rows())?;
        }
        Ok(())
    }
}

/// `(-1)^k` as a scalar.
pub fn sign(k: i64) -> Scalar {
    if k.rem_euclid(2) == 0 {
        int(1)
    } else {
        int(-1)
    }
}

/// A tensor product together with the factor tuple behind every generator.
#[derive(Clone, Debug)]
pub struct TensorComplex {
    pub complex: ChainComplex,
    /// Per total degree: for each generator, the `(degree, local index)` of every factor.
    pub tuples: BTreeMap<i64, Vec<Vec<(i64, usize)>>>,
    lookup: HashMap<Vec<(i64, usize)>, (i64, usize)>,
}

impl TensorComplex {
    pub fn index_of(&self, tuple: &[(i64, usize)]) -> Option<(i64, usize)> {
        self.lookup.get(tuple).copied()
    }

    pub fn tuple(&self, n: i64, i: usize) -> &[(i64, usize)] {
        &self.tuples[&n][i]
    }
}

/// Degree tuples summing to `total`, lexicographic, one entry per factor drawn from its degrees.
fn degree_tuples(factor_degrees: &[Vec<i64>], total: i64) -> Vec<Vec<i64>> {
    fn rec(fd: &[Vec<i64>], k: usize, remaining: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>, mins: &[i64], maxs: &[i64]) {
        if k == fd.len() {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for &d in &fd[k] {
            let rest = remaining - d;
            if rest < mins[k + 1] || rest > maxs[k + 1] {
                continue;
            }
            cur.push(d);
            rec(fd, k + 1, rest, cur, out, mins, maxs);
            cur.pop();
        }
    }
    let m = factor_degrees.len();
    let mut mins = vec![0i64; m + 1];
    let mut maxs = vec![0i64; m + 1];
    for k in (0..m).rev() {
        let lo = factor_degrees[k].iter().min().copied().unwrap_or(0);
        let hi = factor_degrees[k].iter().max().copied().unwrap_or(0);
        mins[k] = mins[k + 1] + lo;
        maxs[k] = maxs[k + 1] + hi;
    }
    let mut out = vec![];
    rec(factor_degrees, 0, total, &mut vec![], &mut out, &mins, &maxs);
    out
}

/// Advances a mixed-radix counter; false once it wraps around.
pub(crate) fn advance_odometer(idx: &mut [usize], radix: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < radix[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

fn gcd_orders(orders: &[&BigInt]) -> BigInt {
    orders.iter().fold(BigInt::zero(), |acc, o| acc.gcd(o))
}

/// Tensor product of several complexes with the Koszul sign rule.
///
/// Generators of a total degree are ordered by degree tuple, then index tuple, both
/// lexicographically. A tuple whose orders have gcd 1 spans the zero module and is dropped.
pub fn tensor_many(factors: &[&ChainComplex]) -> Result<TensorComplex> {
    let ring = factors.first().map(|c| c.ring).unwrap_or(Ring::Rationals);
    for c in factors {
        if c.ring != ring {
            return Err(Error::RingMismatch(c.ring.label(), ring.label()));
        }
    }
    if factors.is_empty() {
        let complex = ChainComplex::unit(ring);
        let mut tuples = BTreeMap::new();
        tuples.insert(0, vec![vec![]]);
        let mut lookup = HashMap::new();
        lookup.insert(vec![], (0, 0));
        let mut complex = complex;
        complex.set_labels(0, vec!["1".into()]);
        return Ok(TensorComplex { complex, tuples, lookup });
    }
    if factors.iter().any(|c| c.is_zero()) {
        return Ok(TensorComplex { complex: ChainComplex::zero(ring), tuples: BTreeMap::new(), lookup: HashMap::new() });
    }
    let fd: Vec<Vec<i64>> = factors.iter().map(|c| c.degrees()).collect();
    let lo: i64 = fd.iter().map(|d| d[0]).sum();
    let hi: i64 = fd.iter().map(|d| *d.last().unwrap()).sum();

    let mut degrees = BTreeMap::new();
    let mut tuples: BTreeMap<i64, Vec<Vec<(i64, usize)>>> = BTreeMap::new();
    let mut lookup = HashMap::new();
    for total in lo..=hi {
        let mut data = DegreeData::default();
        let mut list = vec![];
        for dt in degree_tuples(&fd, total) {
            let ranks: Vec<usize> = dt.iter().zip(factors).map(|(d, c)| c.rank(*d)).collect();
            let mut idx = vec![0usize; dt.len()];
            loop {
                let ords: Vec<&BigInt> = dt.iter().zip(&idx).zip(factors).map(|((d, i), c)| &c.orders(*d)[*i]).collect();
                let g = gcd_orders(&ords);
                if !g.is_one() {
                    let tuple: Vec<(i64, usize)> = dt.iter().copied().zip(idx.iter().copied()).collect();
                    let label = tuple
                        .iter()
                        .zip(factors)
                        .map(|((d, i), c)| c.labels(*d)[*i].clone())
                        .collect::<Vec<_>>()
                        .join("⊗");
                    lookup.insert(tuple.clone(), (total, list.len()));
                    list.push(tuple);
                    data.orders.push(g);
                    data.labels.push(label);
                }
                if !advance_odometer(&mut idx, &ranks) {
                    break;
                }
            }
        }
        if !list.is_empty() {
            degrees.insert(total, data);
            tuples.insert(total, list);
        }
    }

    let mut diffs = BTreeMap::new();
    for (&total, list) in &tuples {
        let Some(below) = tuples.get(&(total - 1)) else { continue };
        let mut d = ExactMatrix::zeros(ring, below.len(), list.len());
        for (col, tuple) in list.iter().enumerate() {
            let mut prefix = 0i64;
            for (k, &(deg, i)) in tuple.iter().enumerate() {
                let dk = factors[k].differential(deg);
                let s = sign(prefix);
                for r in 0..dk.rows() {
                    let x = dk.get(r, i);
                    if x.is_zero() {
                        continue;
                    }
                    let mut t = tuple.clone();
                    t[k] = (deg - 1, r);
                    if let Some(&(_, row)) = lookup.get(&t) {
                        d.add_to(row, col, &(x * &s));
                    }
                }
                prefix += deg;
            }
        }
        let orders = &degrees[&(total - 1)].orders;
        reduce_rows_mod(&mut d, orders);
        diffs.insert(total, d);
    }
    Ok(TensorComplex { complex: ChainComplex::from_raw(ring, degrees, diffs), tuples, lookup })
}

pub use self::tensor_many as tensor_product;
