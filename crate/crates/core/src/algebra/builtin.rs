use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;

use super::{check_algebra_axioms, free_algebra, Action, AlgebraMap, OAlgebra};
use crate::complex::{ChainComplex, ChainMap};
use crate::error::{Error, Result};
use crate::linalg::sparse::{sv_add_scaled, sv_single};
use crate::linalg::{int, ExactMatrix, Ring, SVec};
use crate::operad::{builtin_a3zero, builtin_uass, OperadRef};

/// Iterated products `a_1 ⋯ a_n` from a multiplication table, with an optional unit for `n = 0`.
/// Fits any operad with one basis element per arity acting as the canonical product.
#[derive(Debug)]
pub struct ProductAction {
    ring: Ring,
    mult: Vec<Vec<SVec>>,
    unit: Option<SVec>,
}

impl Action for ProductAction {
    fn act(&self, n: usize, _o: usize, args: &[usize]) -> SVec {
        match n {
            0 => self.unit.clone().unwrap_or_default(),
            _ => {
                let mut cur = sv_single(args[0], int(1));
                for &b in &args[1..] {
                    let mut next = SVec::new();
                    for (a, c) in &cur {
                        sv_add_scaled(self.ring, &mut next, &self.mult[*a][b], c);
                    }
                    cur = next;
                }
                cur
            }
        }
    }
}

/// The action of an arity-1 operad: `act[m][a]` is `m · a`.
#[derive(Debug)]
pub struct ModuleAction {
    act: Vec<Vec<SVec>>,
}

impl Action for ModuleAction {
    fn act(&self, n: usize, o: usize, args: &[usize]) -> SVec {
        if n == 1 { self.act[o][args[0]].clone() } else { SVec::new() }
    }
}

/// Explicit structure constants keyed by `(n, o, args)`; missing entries are zero.
#[derive(Debug, Default)]
pub struct TableAction {
    pub table: HashMap<(usize, usize, Vec<usize>), SVec>,
}

impl Action for TableAction {
    fn act(&self, n: usize, o: usize, args: &[usize]) -> SVec {
        self.table.get(&(n, o, args.to_vec())).cloned().unwrap_or_default()
    }
}

#[derive(Debug)]
pub struct ZeroAction;

impl Action for ZeroAction {
    fn act(&self, _n: usize, _o: usize, _args: &[usize]) -> SVec {
        SVec::new()
    }
}

const CHECK_ARITY: usize = 3;

/// An algebra whose operations are iterated products from `mult`, checked up to arity 3.
pub fn product_algebra(
    op: OperadRef,
    carrier: ChainComplex,
    mult: Vec<Vec<SVec>>,
    unit: Option<SVec>,
    name: &str,
) -> Result<OAlgebra> {
    let r = carrier.total_rank();
    if mult.len() != r || mult.iter().any(|row| row.len() != r) {
        return Err(Error::Shape(format!("multiplication table must be {r}×{r}")));
    }
    if mult.iter().flatten().chain(unit.iter()).any(|v| v.keys().any(|&k| k >= r)) {
        return Err(Error::Shape("multiplication entries out of range".into()));
    }
    if unit.is_none() && !op.component(0).is_zero() {
        return Err(Error::InvalidInput(format!("{} algebras need a unit", op.name())));
    }
    let ring = carrier.ring();
    let alg = OAlgebra::new(op, carrier, Arc::new(ProductAction { ring, mult, unit }), name);
    check_algebra_axioms(&alg, CHECK_ARITY)?;
    Ok(alg)
}

/// A module over the monoid of an arity-1 operad.
pub fn module_algebra(op: OperadRef, carrier: ChainComplex, act: Vec<Vec<SVec>>, name: &str) -> Result<OAlgebra> {
    let (m, r) = (op.component(1).total_rank(), carrier.total_rank());
    if act.len() != m || act.iter().any(|row| row.len() != r) {
        return Err(Error::Shape(format!("module action must be {m}×{r}")));
    }
    let alg = OAlgebra::new(op, carrier, Arc::new(ModuleAction { act }), name);
    check_algebra_axioms(&alg, 2)?;
    Ok(alg)
}

pub fn zero_algebra(op: OperadRef) -> OAlgebra {
    let ring = op.ring();
    OAlgebra::new(op, ChainComplex::zero(ring), Arc::new(ZeroAction), "zero")
}

/// The initial algebra, with carrier `O(0)`.
pub fn initial_algebra(op: OperadRef) -> OAlgebra {
    let ring = op.ring();
    free_algebra(op, &ChainComplex::zero(ring), 0).expect("free on zero").into_algebra().renamed("initial")
}

fn degree0(ring: Ring, labels: &[&str]) -> ChainComplex {
    let mut c = ChainComplex::zero(ring);
    c.set_degree(0, vec![BigInt::from(0); labels.len()], labels.iter().map(|s| s.to_string()).collect());
    c
}

/// The ground ring as a unital associative algebra.
pub fn ground_algebra(ring: Ring) -> OAlgebra {
    let mult = vec![vec![sv_single(0, int(1))]];
    product_algebra(builtin_uass(ring), degree0(ring, &["1"]), mult, Some(sv_single(0, int(1))), "k")
        .expect("k is an algebra")
}

/// `k[x]/x²` as a unital associative algebra.
pub fn dual_numbers(ring: Ring) -> OAlgebra {
    let mult = vec![vec![sv_single(0, int(1)), sv_single(1, int(1))], vec![sv_single(1, int(1)), SVec::new()]];
    product_algebra(builtin_uass(ring), degree0(ring, &["1", "x"]), mult, Some(sv_single(0, int(1))), "k[x]/x²")
        .expect("dual numbers are an algebra")
}

/// Over ℤ with all triple products zero: generators `x, y` in degree 0 with `x² = 2y` and every
/// other product zero.
pub fn torsion_square_algebra() -> OAlgebra {
    let ring = Ring::Integers;
    let mut mult = vec![vec![SVec::new(); 2]; 2];
    mult[0][0] = sv_single(1, int(2));
    product_algebra(builtin_a3zero(ring), degree0(ring, &["x", "y"]), mult, None, "x²=2y").expect("valid fixture")
}

/// Over ℚ with all triple products zero: `y, w` in degree 0, `z` in degree 1, `dz = w`, `y² = w`
/// and every other product zero.
pub fn cycle_square_algebra() -> OAlgebra {
    let ring = Ring::Rationals;
    let mut c = degree0(ring, &["y", "w"]);
    c.set_degree(1, vec![BigInt::from(0)], vec!["z".into()]);
    c.set_differential(1, ExactMatrix::from_i64(ring, &[&[0], &[1]]));
    let mut mult = vec![vec![SVec::new(); 3]; 3];
    mult[0][0] = sv_single(1, int(1));
    product_algebra(builtin_a3zero(ring), c, mult, None, "dz=y²").expect("valid fixture")
}

/// `k·x` with `x² = 0`, over the operad whose triple products vanish.
pub fn square_zero_line(ring: Ring) -> OAlgebra {
    let mult = vec![vec![SVec::new()]];
    product_algebra(builtin_a3zero(ring), degree0(ring, &["x"]), mult, None, "x²=0").expect("valid fixture")
}

/// `y ↦ x`, `w, z ↦ 0` from [`cycle_square_algebra`] to [`square_zero_line`].
pub fn cycle_square_map() -> AlgebraMap {
    let a = cycle_square_algebra();
    let b = square_zero_line(Ring::Rationals);
    let comps: BTreeMap<i64, ExactMatrix> = [(0, ExactMatrix::from_i64(Ring::Rationals, &[&[1, 0]]))].into_iter().collect();
    let map = ChainMap::new_unchecked(a.carrier_arc(), b.carrier_arc(), comps);
    AlgebraMap::new(a, b, map, CHECK_ARITY).expect("valid fixture")
}

/// `carrier` with the unit of `op` acting as the identity and every other operation as zero.
/// Only an algebra when no composite of non-units is a multiple of the unit, as for operads
/// with `O(0) = 0` and no invertible operations in arity 1.
pub fn trivial_algebra(op: OperadRef, carrier: ChainComplex, name: &str) -> Result<OAlgebra> {
    let mut table = HashMap::new();
    let unit = op.unit();
    for a in 0..carrier.total_rank() {
        for (u, c) in &unit {
            table.insert((1, *u, vec![a]), sv_single(a, c.clone()));
        }
    }
    let alg = OAlgebra::new(op, carrier, Arc::new(TableAction { table }), name);
    check_algebra_axioms(&alg, CHECK_ARITY)?;
    Ok(alg)
}
