use std::sync::Arc;

use num_bigint::BigInt;

use super::{Operad, OperadRef};
use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::linalg::sparse::{sv_add_scaled, sv_single};
use crate::linalg::{int, Ring, SVec};

fn labelled(ring: Ring, labels: Vec<String>) -> Arc<ChainComplex> {
    let mut c = ChainComplex::zero(ring);
    c.set_degree(0, vec![BigInt::from(0); labels.len()], labels);
    Arc::new(c)
}

/// `O(n) = k` for every `n` (or every `n ≥ 1`) with all compositions the canonical identification.
#[derive(Debug)]
struct Associative {
    ring: Ring,
    unital: bool,
    zero: Arc<ChainComplex>,
}

impl Operad for Associative {
    fn name(&self) -> String {
        if self.unital { "uass" } else { "ass" }.into()
    }

    fn ring(&self) -> Ring {
        self.ring
    }

    fn component(&self, n: usize) -> Arc<ChainComplex> {
        if n == 0 && !self.unital {
            return self.zero.clone();
        }
        labelled(self.ring, vec![format!("m{n}")])
    }

    fn compose(&self, _p: usize, q: usize, _i: usize, _a: usize, _b: usize) -> SVec {
        if q == 0 && !self.unital {
            return SVec::new();
        }
        sv_single(0, int(1))
    }

    fn unit(&self) -> SVec {
        sv_single(0, int(1))
    }

    fn arity_bound(&self) -> Option<usize> {
        None
    }
}

pub fn builtin_uass(ring: Ring) -> OperadRef {
    Arc::new(Associative { ring, unital: true, zero: Arc::new(ChainComplex::zero(ring)) })
}

pub fn builtin_ass(ring: Ring) -> OperadRef {
    Arc::new(Associative { ring, unital: false, zero: Arc::new(ChainComplex::zero(ring)) })
}

/// `O(1) = k·u`, `O(2) = k·μ`, zero otherwise; `μ ∘_i μ = 0`.
#[derive(Debug)]
struct A3Zero {
    ring: Ring,
    unit: Arc<ChainComplex>,
    mu: Arc<ChainComplex>,
    zero: Arc<ChainComplex>,
}

impl Operad for A3Zero {
    fn name(&self) -> String {
        "a3zero".into()
    }

    fn ring(&self) -> Ring {
        self.ring
    }

    fn component(&self, n: usize) -> Arc<ChainComplex> {
        match n {
            1 => self.unit.clone(),
            2 => self.mu.clone(),
            _ => self.zero.clone(),
        }
    }

    fn compose(&self, p: usize, q: usize, _i: usize, _a: usize, _b: usize) -> SVec {
        match (p, q) {
            (1, 1) | (1, 2) | (2, 1) => sv_single(0, int(1)),
            _ => SVec::new(),
        }
    }

    fn unit(&self) -> SVec {
        sv_single(0, int(1))
    }

    fn arity_bound(&self) -> Option<usize> {
        Some(2)
    }
}

pub fn builtin_a3zero(ring: Ring) -> OperadRef {
    Arc::new(A3Zero {
        ring,
        unit: labelled(ring, vec!["u".into()]),
        mu: labelled(ring, vec!["μ".into()]),
        zero: Arc::new(ChainComplex::zero(ring)),
    })
}

/// A unital associative monoid on a free module concentrated in degree 0, given by structure
/// constants: `table[a][b]` is the product of basis elements `a` and `b`.
#[derive(Clone, Debug)]
pub struct MonoidData {
    pub ring: Ring,
    pub labels: Vec<String>,
    pub table: Vec<Vec<SVec>>,
    pub unit: SVec,
}

impl MonoidData {
    /// The ground ring itself.
    pub fn ground(ring: Ring) -> Self {
        Self { ring, labels: vec!["id".into()], table: vec![vec![sv_single(0, int(1))]], unit: sv_single(0, int(1)) }
    }

    /// `k[t]/t^m` with basis `1, t, …, t^{m-1}`.
    pub fn truncated_polynomial(ring: Ring, m: usize) -> Self {
        let labels = (0..m).map(|i| if i == 0 { "1".to_string() } else { format!("t^{i}") }).collect();
        let table = (0..m)
            .map(|a| (0..m).map(|b| if a + b < m { sv_single(a + b, int(1)) } else { SVec::new() }).collect())
            .collect();
        Self { ring, labels, table, unit: sv_single(0, int(1)) }
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn mul(&self, x: &SVec, y: &SVec) -> SVec {
        let mut out = SVec::new();
        for (a, s) in x {
            for (b, t) in y {
                sv_add_scaled(self.ring, &mut out, &self.table[*a][*b], &(s * t));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rank();
        if self.table.len() != n || self.table.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("monoid table must be {n}×{n}")));
        }
        if self.table.iter().flatten().chain(std::iter::once(&self.unit)).any(|v| v.keys().any(|&k| k >= n)) {
            return Err(Error::Shape("monoid entries out of range".into()));
        }
        for a in 0..n {
            let x = sv_single(a, int(1));
            if self.mul(&self.unit, &x) != x || self.mul(&x, &self.unit) != x {
                return Err(Error::AxiomViolation(format!("monoid unit fails on {}", self.labels[a])));
            }
            for b in 0..n {
                for c in 0..n {
                    let (y, z) = (sv_single(b, int(1)), sv_single(c, int(1)));
                    if self.mul(&self.mul(&x, &y), &z) != self.mul(&x, &self.mul(&y, &z)) {
                        return Err(Error::AxiomViolation(format!(
                            "monoid associativity fails on ({}, {}, {})",
                            self.labels[a], self.labels[b], self.labels[c]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The operad concentrated in arity 1 on a monoid.
#[derive(Debug)]
pub struct Arity1Operad {
    monoid: MonoidData,
    name: String,
    one: Arc<ChainComplex>,
    zero: Arc<ChainComplex>,
}

impl Arity1Operad {
    pub fn monoid(&self) -> &MonoidData {
        &self.monoid
    }
}

impl Operad for Arity1Operad {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn ring(&self) -> Ring {
        self.monoid.ring
    }

    fn component(&self, n: usize) -> Arc<ChainComplex> {
        if n == 1 { self.one.clone() } else { self.zero.clone() }
    }

    fn compose(&self, p: usize, q: usize, _i: usize, a: usize, b: usize) -> SVec {
        if p == 1 && q == 1 { self.monoid.table[a][b].clone() } else { SVec::new() }
    }

    fn unit(&self) -> SVec {
        self.monoid.unit.clone()
    }

    fn arity_bound(&self) -> Option<usize> {
        Some(1)
    }
}

pub fn builtin_arity1(monoid: MonoidData) -> Result<OperadRef> {
    monoid.validate()?;
    let ring = monoid.ring;
    let name = if monoid.rank() == 1 { "initial".into() } else { format!("arity1[{}]", monoid.labels.join(",")) };
    Ok(Arc::new(Arity1Operad {
        one: labelled(ring, monoid.labels.clone()),
        zero: Arc::new(ChainComplex::zero(ring)),
        monoid,
        name,
    }))
}

/// The initial operad: `k` in arity 1, zero elsewhere.
pub fn builtin_initial(ring: Ring) -> OperadRef {
    builtin_arity1(MonoidData::ground(ring)).expect("the ground ring is a monoid")
}
