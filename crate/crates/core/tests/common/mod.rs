//! Generators and independent oracles shared by the integration tests and the acceptance run.
//!
//! Random complexes are sums of spheres and disks followed by random unimodular base changes, so
//! their homology is known before anything is computed.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use opalg::complex::{ChainComplex, ChainMap};
use opalg::linalg::{int, ExactMatrix, FgModule, Ring, SVec};
use opalg::operad::Operad;

pub fn fail(msg: impl Into<String>) -> TestCaseError {
    TestCaseError::fail(msg.into())
}

/// Runs `test` on `cases` inputs drawn from a fixed seed.
pub fn run_property<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

pub fn any_ring() -> impl Strategy<Value = Ring> {
    prop_oneof![
        Just(Ring::Integers),
        Just(Ring::Rationals),
        Just(Ring::PrimeField(2)),
        Just(Ring::PrimeField(3)),
        Just(Ring::PrimeField(5)),
    ]
}

pub fn any_field() -> impl Strategy<Value = Ring> {
    prop_oneof![Just(Ring::Rationals), Just(Ring::PrimeField(2)), Just(Ring::PrimeField(3)), Just(Ring::PrimeField(7))]
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    /// One cycle in degree `n`.
    Sphere(i64),
    /// `x` in degree `n` with `dx = c·y`.
    Disk(i64, i64),
}

/// A complex described by its cells and the elementary base changes applied afterwards.
#[derive(Clone, Debug)]
pub struct Blueprint {
    pub ring: Ring,
    pub cells: Vec<Cell>,
    /// `(degree, dst, src, s)`: replace basis vector `src` by `src + s·dst`, indices taken mod the rank.
    pub moves: Vec<(i64, usize, usize, i64)>,
}

pub fn blueprint(ring: Ring, max_cells: usize) -> impl Strategy<Value = Blueprint> {
    let cell = (any::<bool>(), -1i64..=2, prop::sample::select(vec![1i64, -1, 2, -2, 3, 4, 6])).prop_map(
        move |(sphere, n, c)| {
            if sphere {
                return Cell::Sphere(n);
            }
            let p = ring.characteristic() as i64;
            let c = if ring == Ring::Integers || p == 0 || c % p != 0 { c } else { 1 };
            Cell::Disk(n, c)
        },
    );
    let moves = prop::collection::vec((-2i64..=2, 0usize..6, 0usize..6, -2i64..=2), 0..10);
    (prop::collection::vec(cell, 0..=max_cells), moves).prop_map(move |(cells, moves)| Blueprint { ring, cells, moves })
}

impl Blueprint {
    pub fn concat(&self, other: &Blueprint) -> Blueprint {
        let cells = self.cells.iter().chain(&other.cells).cloned().collect();
        Blueprint { ring: self.ring, cells, moves: vec![] }
    }

    pub fn ranks(&self) -> BTreeMap<i64, usize> {
        let mut r = BTreeMap::new();
        for c in &self.cells {
            match c {
                Cell::Sphere(n) => *r.entry(*n).or_default() += 1,
                Cell::Disk(n, _) => {
                    *r.entry(*n).or_default() += 1;
                    *r.entry(n - 1).or_default() += 1;
                }
            }
        }
        r
    }

    pub fn build(&self) -> ChainComplex {
        let ring = self.ring;
        let ranks = self.ranks();
        let rank = |n: i64| ranks.get(&n).copied().unwrap_or(0);
        let mut diffs: BTreeMap<i64, ExactMatrix> = ranks
            .keys()
            .filter(|&&n| rank(n - 1) > 0)
            .map(|&n| (n, ExactMatrix::zeros(ring, rank(n - 1), rank(n))))
            .collect();
        let mut next: BTreeMap<i64, usize> = BTreeMap::new();
        let mut slot = |n: i64| {
            let s = next.entry(n).or_default();
            *s += 1;
            *s - 1
        };
        for c in &self.cells {
            match c {
                Cell::Sphere(n) => {
                    slot(*n);
                }
                Cell::Disk(n, k) => {
                    let (top, bottom) = (slot(*n), slot(n - 1));
                    diffs.get_mut(n).unwrap().set(bottom, top, ring.normalize(int(*k)));
                }
            }
        }
        for &(n, dst, src, s) in &self.moves {
            let r = rank(n);
            if r < 2 || dst % r == src % r {
                continue;
            }
            let (dst, src) = (dst % r, src % r);
            if let Some(d) = diffs.get_mut(&n) {
                d.add_col_multiple(src, dst, &ring.normalize(int(-s)));
            }
            if let Some(d) = diffs.get_mut(&(n + 1)) {
                d.add_row_multiple(dst, src, &ring.normalize(int(s)));
            }
        }
        ChainComplex::from_parts(ring, ranks, diffs).expect("sphere and disk sums are complexes")
    }

    /// Homology predicted from the cells alone; zero modules are left out.
    pub fn homology(&self) -> BTreeMap<i64, FgModule> {
        let mut free: BTreeMap<i64, usize> = BTreeMap::new();
        let mut orders: BTreeMap<i64, Vec<u64>> = BTreeMap::new();
        for c in &self.cells {
            match c {
                Cell::Sphere(n) => *free.entry(*n).or_default() += 1,
                Cell::Disk(n, k) if self.ring == Ring::Integers && k.abs() > 1 => {
                    orders.entry(n - 1).or_default().push(k.unsigned_abs())
                }
                Cell::Disk(..) => {}
            }
        }
        let mut out = BTreeMap::new();
        for n in free.keys().chain(orders.keys()).copied().collect::<std::collections::BTreeSet<_>>() {
            let torsion = invariant_factors(orders.get(&n).map_or(&[][..], |v| v.as_slice()));
            out.insert(n, FgModule { ring: self.ring, rank: free.get(&n).copied().unwrap_or(0), torsion });
        }
        out
    }

    pub fn betti(&self) -> BTreeMap<i64, usize> {
        self.homology().into_iter().filter(|(_, m)| m.rank > 0).map(|(n, m)| (n, m.rank)).collect()
    }
}

/// Nonzero homology modules of `c` over every degree it occupies (and one below).
pub fn homology_of(c: &ChainComplex) -> BTreeMap<i64, FgModule> {
    let mut degrees = c.degrees();
    if let Some(&lo) = degrees.first() {
        degrees.insert(0, lo - 1);
    }
    degrees
        .into_iter()
        .map(|n| (n, c.homology(n)))
        .filter(|(_, m)| m.rank > 0 || !m.torsion.is_empty())
        .collect()
}

fn prime_powers(mut n: u64) -> Vec<(u64, u64)> {
    let mut out = vec![];
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut q = 1;
            while n.is_multiple_of(p) {
                n /= p;
                q *= p;
            }
            out.push((p, q));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, n));
    }
    out
}

/// Invariant factors `d_1 | ... | d_k` of `⊕ Z/o_i`, computed from the elementary divisors.
pub fn invariant_factors(orders: &[u64]) -> Vec<BigInt> {
    let mut by_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &o in orders {
        for (p, q) in prime_powers(o) {
            by_prime.entry(p).or_default().push(q);
        }
    }
    let len = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![BigInt::one(); len];
    for powers in by_prime.values_mut() {
        powers.sort_unstable_by(|a, b| b.cmp(a));
        for (i, q) in powers.iter().enumerate() {
            out[len - 1 - i] *= BigInt::from(*q);
        }
    }
    out
}

fn entry_i64(m: &ExactMatrix, r: usize, c: usize) -> i64 {
    m.get(r, c).to_integer().to_i64().expect("small integer entry")
}

/// Rank by Gaussian elimination: over `F_p` for prime fields, over `Q` otherwise.
pub fn rank_oracle(m: &ExactMatrix) -> usize {
    let (rows, cols) = m.shape();
    match m.ring() {
        Ring::PrimeField(p) => {
            let p = p as i64;
            let mut a: Vec<Vec<i64>> =
                (0..rows).map(|r| (0..cols).map(|c| entry_i64(m, r, c).rem_euclid(p)).collect()).collect();
            let mut rank = 0;
            for c in 0..cols {
                let Some(piv) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
                a.swap(rank, piv);
                let inv = (1..p).find(|x| x * a[rank][c] % p == 1).unwrap();
                for r in 0..rows {
                    if r != rank && a[r][c] != 0 {
                        let f = a[r][c] * inv % p;
                        for k in 0..cols {
                            a[r][k] = (a[r][k] - f * a[rank][k]).rem_euclid(p);
                        }
                    }
                }
                rank += 1;
            }
            rank
        }
        _ => {
            let mut a: Vec<Vec<BigRational>> = (0..rows).map(|r| m.row(r).to_vec()).collect();
            let mut rank = 0;
            for c in 0..cols {
                let Some(piv) = (rank..rows).find(|&r| !a[r][c].is_zero()) else { continue };
                a.swap(rank, piv);
                for r in 0..rows {
                    if r != rank && !a[r][c].is_zero() {
                        let f = &a[r][c] / &a[rank][c];
                        for k in 0..cols {
                            let t = &f * &a[rank][k];
                            a[r][k] -= t;
                        }
                    }
                }
                rank += 1;
            }
            rank
        }
    }
}

/// Fraction-free determinant of a square integer matrix.
pub fn det_oracle(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else { return BigInt::zero() };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// gcd of all `k × k` minors; the product of the first `k` invariant factors.
pub fn determinantal_divisor(m: &[Vec<i64>], k: usize) -> BigInt {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut g = BigInt::zero();
    for rs in subsets(rows, k) {
        for cs in subsets(cols, k) {
            let minor: Vec<Vec<BigInt>> = rs.iter().map(|&r| cs.iter().map(|&c| BigInt::from(m[r][c])).collect()).collect();
            g = g.gcd(&det_oracle(&minor));
        }
    }
    g
}

pub fn to_bigint_rows(m: &ExactMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows()).map(|r| m.row(r).iter().map(|x| x.to_integer()).collect()).collect()
}

/// Whether every entry of row `i` is divisible by `orders[i]` (order 0 meaning a free generator).
fn zero_mod_orders(m: &ExactMatrix, orders: &[BigInt]) -> bool {
    (0..m.rows()).all(|r| {
        let o = &orders[r];
        m.row(r).iter().all(|x| if o.is_zero() { x.is_zero() } else { x.is_integer() && (x.to_integer() % o).is_zero() })
    })
}

/// `d_{n-1} d_n = 0` in every degree, modulo the torsion orders of the target degree.
pub fn check_d_squared(c: &ChainComplex) -> Result<(), String> {
    for n in c.degrees() {
        let d = c.differential(n);
        if d.shape() != (c.rank(n - 1), c.rank(n)) {
            return Err(format!("d_{n} has shape {:?}", d.shape()));
        }
        let dd = c.differential(n - 1).mul(&d);
        if !zero_mod_orders(&dd, c.orders(n - 2)) {
            return Err(format!("d_{} d_{n} ≠ 0", n - 1));
        }
    }
    Ok(())
}

/// `f d = d f` in every degree, modulo the orders of the target.
pub fn check_chain_map(f: &ChainMap) -> Result<(), String> {
    let (s, t) = (f.source(), f.target());
    let mut degrees = s.degrees();
    degrees.extend(t.degrees());
    degrees.sort_unstable();
    degrees.dedup();
    for n in degrees {
        let lhs = f.component(n - 1).mul(&s.differential(n));
        let rhs = t.differential(n).mul(&f.component(n));
        if !zero_mod_orders(&lhs.sub(&rhs), t.orders(n - 1)) {
            return Err(format!("f d ≠ d f in degree {n}"));
        }
    }
    Ok(())
}

/// The chain map `C -> C ⊕ D`, `x ↦ (x, (dh + hd) x)` for a random degree-one map `h: C -> D`.
#[derive(Clone, Debug)]
pub struct GraphMap {
    pub source: Blueprint,
    pub extra: Blueprint,
    pub h: Vec<i64>,
}

pub fn graph_map(ring: Ring, source_cells: usize, extra_cells: usize) -> impl Strategy<Value = GraphMap> {
    (blueprint(ring, source_cells), blueprint(ring, extra_cells), prop::collection::vec(-2i64..=2, 1..16))
        .prop_map(|(source, extra, h)| GraphMap { source, extra, h })
}

impl GraphMap {
    pub fn with_h(&self, h: Vec<i64>) -> GraphMap {
        GraphMap { h, ..self.clone() }
    }

    pub fn build(&self) -> ChainMap {
        let c = self.source.build();
        let d = self.extra.build();
        graph_map_between(&c, &d, &self.h)
    }
}

pub fn graph_map_between(c: &ChainComplex, d: &ChainComplex, h: &[i64]) -> ChainMap {
    let ring = c.ring();
    let mut k = 0;
    let mut homotopy: BTreeMap<i64, ExactMatrix> = BTreeMap::new();
    let mut degrees = c.degrees();
    degrees.extend(d.degrees().iter().map(|n| n - 1));
    degrees.sort_unstable();
    degrees.dedup();
    for &n in &degrees {
        let m = ExactMatrix::from_fn(ring, d.rank(n + 1), c.rank(n), |_, _| {
            k += 1;
            int(h[k % h.len()])
        });
        homotopy.insert(n, m);
    }
    let hom = |n: i64| homotopy.get(&n).cloned().unwrap_or_else(|| ExactMatrix::zeros(ring, d.rank(n + 1), c.rank(n)));
    let target = ChainComplex::direct_sum(&[c, d], ring).unwrap();
    let comps = c
        .degrees()
        .into_iter()
        .map(|n| {
            let phi = d.differential(n + 1).mul(&hom(n)).add(&hom(n - 1).mul(&c.differential(n)));
            (n, ExactMatrix::identity(ring, c.rank(n)).vstack(&phi))
        })
        .collect();
    ChainMap::new(c.clone(), target, comps).expect("graph of a null-homotopic map")
}

/// `Σ_{i+j=n} a_i b_j`.
pub fn convolve(a: &BTreeMap<i64, usize>, b: &BTreeMap<i64, usize>) -> BTreeMap<i64, usize> {
    let mut out = BTreeMap::new();
    for (i, x) in a {
        for (j, y) in b {
            if x * y > 0 {
                *out.entry(i + j).or_default() += x * y;
            }
        }
    }
    out
}

pub fn nonzero_ranks(c: &ChainComplex) -> BTreeMap<i64, usize> {
    c.degrees().into_iter().map(|n| (n, c.rank(n))).filter(|(_, r)| *r > 0).collect()
}

fn add_scaled(ring: Ring, acc: &mut SVec, v: &SVec, s: &BigRational) {
    for (k, x) in v {
        let e = acc.entry(*k).or_insert_with(BigRational::zero);
        *e = ring.normalize(&*e + x * s);
    }
    acc.retain(|_, x| !x.is_zero());
}

fn compose(op: &dyn Operad, p: usize, q: usize, i: usize, x: &SVec, y: &SVec) -> SVec {
    let ring = op.ring();
    let mut out = SVec::new();
    for (a, s) in x {
        for (b, t) in y {
            add_scaled(ring, &mut out, &op.compose(p, q, i, *a, *b), &(s * t));
        }
    }
    out
}

fn single(i: usize) -> SVec {
    [(i, BigRational::one())].into_iter().collect()
}

/// Unit laws, both associativity laws (with the Koszul sign on the parallel one) and the Leibniz
/// rule, on every triple of basis elements whose composites stay in arity `≤ max`.
pub fn operad_laws(op: &dyn Operad, max: usize) -> Result<(), String> {
    let ring = op.ring();
    let comps: Vec<_> = (0..=max).map(|n| op.component(n)).collect();
    let degs: Vec<Vec<i64>> = comps.iter().map(|c| c.flat_basis().into_iter().map(|(d, _)| d).collect()).collect();
    let unit = op.unit();
    let name = op.name();
    let d = |n: usize, x: &SVec| comps[n].d_flat(x);
    for n in 0..=max {
        for a in 0..degs[n].len() {
            let x = single(a);
            if n <= max && compose(op, 1, n, 1, &unit, &x) != x {
                return Err(format!("{name}: left unit fails on O({n})[{a}]"));
            }
            for i in 1..=n {
                if compose(op, n, 1, i, &x, &unit) != x {
                    return Err(format!("{name}: right unit fails on O({n})[{a}] at {i}"));
                }
            }
        }
    }
    for p in 1..=max {
        for q in 0..=max + 1 - p {
            for a in 0..degs[p].len() {
                for b in 0..degs[q].len() {
                    for i in 1..=p {
                        let lhs = d(p + q - 1, &compose(op, p, q, i, &single(a), &single(b)));
                        let mut rhs = compose(op, p, q, i, &d(p, &single(a)), &single(b));
                        let sign = if degs[p][a] % 2 == 0 { BigRational::one() } else { -BigRational::one() };
                        add_scaled(ring, &mut rhs, &compose(op, p, q, i, &single(a), &d(q, &single(b))), &sign);
                        if lhs != rhs {
                            return Err(format!("{name}: Leibniz rule fails for {p},{q},{i}"));
                        }
                    }
                }
            }
        }
    }
    for p in 1..=max {
        for q in 0..=max {
            for r in 0..=max {
                if p + q + r < 2 || p + q + r - 2 > max || p + q - 1 > max {
                    continue;
                }
                for a in 0..degs[p].len() {
                    for b in 0..degs[q].len() {
                        for c in 0..degs[r].len() {
                            let (xa, xb, xc) = (single(a), single(b), single(c));
                            for i in 1..=p {
                                let ab = compose(op, p, q, i, &xa, &xb);
                                if q >= 1 && q + r - 1 <= max {
                                    for j in 1..=q {
                                        let lhs = compose(op, p + q - 1, r, i + j - 1, &ab, &xc);
                                        let rhs = compose(op, p, q + r - 1, i, &xa, &compose(op, q, r, j, &xb, &xc));
                                        if lhs != rhs {
                                            return Err(format!("{name}: sequential associativity fails ({p},{q},{r},{i},{j})"));
                                        }
                                    }
                                }
                                if p + r - 1 <= max {
                                    for k in i + 1..=p {
                                        let lhs = compose(op, p + q - 1, r, k + q - 1, &ab, &xc);
                                        let ac = compose(op, p, r, k, &xa, &xc);
                                        let mut rhs = compose(op, p + r - 1, q, i, &ac, &xb);
                                        if (degs[q][b] * degs[r][c]) % 2 != 0 {
                                            rhs.values_mut().for_each(|x| *x = ring.normalize(-x.clone()));
                                        }
                                        if lhs != rhs {
                                            return Err(format!("{name}: parallel associativity fails ({p},{q},{r},{i},{k})"));
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
    Ok(())
}

pub fn same_map(a: &ChainMap, b: &ChainMap) -> bool {
    let mut degrees = a.source().degrees();
    degrees.extend(b.source().degrees());
    degrees.into_iter().all(|n| a.component(n) == b.component(n))
}

pub fn catalan(n: usize) -> usize {
    (0..n).fold(1usize, |c, k| c * 2 * (2 * k + 1) / (k + 2))
}

pub fn is_unimodular_integer(m: &ExactMatrix) -> bool {
    m.is_square() && m.is_integral() && det_oracle(&to_bigint_rows(m)).abs().is_one()
}

/// Binary planar trees with `v` vertices and `n` snaky leaves (the other leaves straight) in which
/// no vertex has two straight leaves as inputs.
pub fn reduced_binary_trees(v: usize, n: usize) -> usize {
    if v == 0 {
        return usize::from(n <= 1);
    }
    let mut total = 0;
    for v1 in 0..v {
        for n1 in 0..=n {
            total += reduced_binary_trees(v1, n1) * reduced_binary_trees(v - 1 - v1, n - n1);
        }
    }
    // both inputs straight leaves
    total - usize::from(v == 1 && n == 0)
}

pub mod instances;
pub mod props;
