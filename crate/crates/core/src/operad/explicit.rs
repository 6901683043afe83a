use std::collections::HashMap;
use std::sync::Arc;

use super::Operad;
use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::linalg::{Ring, SVec};

type Key = (usize, usize, usize, usize, usize);

/// An operad stored as finitely many components and a full composition table. Arities above
/// `max_arity` are zero.
#[derive(Clone, Debug)]
pub struct ExplicitOperad {
    name: String,
    ring: Ring,
    components: Vec<Arc<ChainComplex>>,
    table: HashMap<Key, SVec>,
    unit: SVec,
    zero: Arc<ChainComplex>,
}

impl ExplicitOperad {
    /// Components and compositions are checked for shape only; use
    /// [`check_operad_axioms`](super::check_operad_axioms) for the rest.
    pub fn new(
        name: impl Into<String>,
        ring: Ring,
        components: Vec<ChainComplex>,
        table: HashMap<Key, SVec>,
        unit: SVec,
    ) -> Result<Self> {
        let components: Vec<Arc<ChainComplex>> = components.into_iter().map(Arc::new).collect();
        let max = components.len().saturating_sub(1);
        for c in &components {
            if c.ring() != ring {
                return Err(Error::RingMismatch(ring.label(), c.ring().label()));
            }
            c.validate()?;
        }
        let rank = |n: usize| components.get(n).map_or(0, |c| c.total_rank());
        for (&(p, q, i, a, b), v) in &table {
            let r = p + q - 1;
            if i == 0 || i > p || a >= rank(p) || b >= rank(q) || r > max || v.keys().any(|&k| k >= rank(r)) {
                return Err(Error::Shape(format!("composition entry ({p},{q},{i},{a},{b}) out of range")));
            }
        }
        if unit.keys().any(|&k| k >= rank(1)) {
            return Err(Error::Shape("unit out of range".into()));
        }
        Ok(Self { name: name.into(), ring, components, table, unit, zero: Arc::new(ChainComplex::zero(ring)) })
    }

    /// Copies arities `0..=max_arity` of `op` together with every composition between them.
    pub fn snapshot(op: &dyn Operad, max_arity: usize) -> Self {
        let components: Vec<Arc<ChainComplex>> = (0..=max_arity).map(|n| op.component(n)).collect();
        let mut table = HashMap::new();
        for p in 1..=max_arity {
            for q in 0..=max_arity + 1 - p {
                for a in 0..components[p].total_rank() {
                    for b in 0..components[q].total_rank() {
                        for i in 1..=p {
                            let v = op.compose(p, q, i, a, b);
                            if !v.is_empty() {
                                table.insert((p, q, i, a, b), v);
                            }
                        }
                    }
                }
            }
        }
        let ring = op.ring();
        Self { name: op.name(), ring, components, table, unit: op.unit(), zero: Arc::new(ChainComplex::zero(ring)) }
    }

    pub fn max_arity(&self) -> usize {
        self.components.len().saturating_sub(1)
    }

    pub fn set_composition(&mut self, p: usize, q: usize, i: usize, a: usize, b: usize, v: SVec) {
        if v.is_empty() {
            self.table.remove(&(p, q, i, a, b));
        } else {
            self.table.insert((p, q, i, a, b), v);
        }
    }

    pub fn rename(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    /// Nonzero table entries in a deterministic order.
    pub fn entries(&self) -> Vec<(Key, SVec)> {
        let mut v: Vec<(Key, SVec)> = self.table.iter().map(|(k, v)| (*k, v.clone())).collect();
        v.sort_by_key(|a| a.0);
        v
    }
}

impl Operad for ExplicitOperad {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn ring(&self) -> Ring {
        self.ring
    }

    fn component(&self, n: usize) -> Arc<ChainComplex> {
        self.components.get(n).cloned().unwrap_or_else(|| self.zero.clone())
    }

    fn compose(&self, p: usize, q: usize, i: usize, a: usize, b: usize) -> SVec {
        self.table.get(&(p, q, i, a, b)).cloned().unwrap_or_default()
    }

    fn unit(&self) -> SVec {
        self.unit.clone()
    }

    fn arity_bound(&self) -> Option<usize> {
        Some(self.max_arity())
    }
}
