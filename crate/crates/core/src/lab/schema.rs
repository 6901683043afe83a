//! JSON documents for complexes, operads and algebras.
//!
//! Scalars are written either as JSON integers or as strings such as `"-3/4"`. Sparse vectors are
//! objects from flat basis index to scalar. Differentials are row-major: `d_n` has one row per
//! generator in degree `n - 1` and one column per generator in degree `n`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::marker::PhantomData;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Unexpected, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::algebra::{
    check_algebra_axioms, cycle_square_algebra, dual_numbers, ground_algebra, initial_algebra, module_algebra,
    product_algebra, square_zero_line, torsion_square_algebra, zero_algebra, OAlgebra, TableAction,
};
use crate::complex::{ChainComplex, ChainMap, ComplexInvariants};
use crate::envelope::TruncationBounds;
use crate::error::{Error, Result};
use crate::linalg::ring::{format_scalar, parse_scalar};
use crate::linalg::{ExactMatrix, FgModule, Ring, SVec, Scalar};
use crate::operad::{
    builtin_a3zero, builtin_arity1, builtin_ass, builtin_initial, builtin_uass, check_operad_axioms, free_operad,
    ExplicitOperad, MonoidData, Operad, OperadRef,
};

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), message: message.into() }
}

// Separates a relative path from the message in errors raised inside nested documents.
const NESTED: char = '\u{1f}';

fn render_path(path: &serde_path_to_error::Path, skip: usize) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter().skip(skip) {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("[{index}]")),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                if !out.is_empty() {
                    out.push('.');
                }
                out.push_str(key);
            }
            Segment::Unknown => out.push_str(if out.is_empty() { "?" } else { ".?" }),
        }
    }
    out
}

fn join_path(outer: &str, inner: &str) -> String {
    match (outer.is_empty(), inner.is_empty()) {
        (true, _) => inner.to_string(),
        (_, true) => outer.to_string(),
        _ if inner.starts_with('[') => format!("{outer}{inner}"),
        _ => format!("{outer}.{inner}"),
    }
}

/// Splits an error message into the path it carries from nested documents and the rest.
fn nested_parts(message: &str) -> (&str, &str) {
    message.split_once(NESTED).unwrap_or(("", message))
}

fn tracked_error<E: std::fmt::Display>(e: serde_path_to_error::Error<E>, skip: usize) -> (String, String) {
    let outer = render_path(e.path(), skip);
    let message = e.inner().to_string();
    let (inner, rest) = nested_parts(&message);
    (join_path(&outer, inner), rest.to_string())
}

fn schema_error<E: std::fmt::Display>(e: serde_path_to_error::Error<E>) -> Error {
    let (path, message) = tracked_error(e, 0);
    schema(if path.is_empty() { "$".into() } else { path }, message)
}

/// Deserializes `value`, reporting the JSON path of the first mismatch.
pub fn from_value<T: serde::de::DeserializeOwned>(value: &Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(schema_error)
}

/// Parses JSON text, reporting the JSON path of the first mismatch.
pub fn from_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(schema_error)
}

/// An enum written as an object whose `kind` field names the variant, e.g.
/// `{"kind": "builtin", "name": "uass"}` for the externally tagged `{"builtin": {"name": "uass"}}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kinded<T>(pub T);

impl<T: Serialize> Serialize for Kinded<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let v = serde_json::to_value(&self.0).map_err(S::Error::custom)?;
        let out = match v {
            Value::String(kind) => serde_json::json!({ "kind": kind }),
            Value::Object(m) if m.len() == 1 => {
                let (kind, body) = m.into_iter().next().expect("one entry");
                let mut body = match body {
                    Value::Object(b) => b,
                    _ => return Err(S::Error::custom("variant bodies must be objects")),
                };
                body.insert("kind".into(), Value::String(kind));
                Value::Object(body)
            }
            _ => return Err(S::Error::custom("expected an externally tagged enum")),
        };
        out.serialize(s)
    }
}

impl<'de, T: serde::de::DeserializeOwned> Deserialize<'de> for Kinded<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = Value::deserialize(d)?;
        let Value::Object(mut body) = v else {
            return Err(D::Error::custom("expected an object with a `kind` field"));
        };
        let kind = match body.remove("kind") {
            Some(Value::String(k)) => k,
            Some(_) => return Err(D::Error::custom(format!("kind{NESTED}expected a string"))),
            None => return Err(D::Error::missing_field("kind")),
        };
        let tagged = Value::Object([(kind, Value::Object(body))].into_iter().collect());
        serde_path_to_error::deserialize(&tagged).map(Kinded).map_err(|e| {
            // the first segment is the variant name
            let (path, message) = tracked_error(e, 1);
            D::Error::custom(format!("{path}{NESTED}{message}"))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarDoc {
    Int(i64),
    Text(String),
}

impl ScalarDoc {
    pub fn from_scalar(x: &Scalar) -> Self {
        if x.is_integer() {
            if let Some(n) = x.to_integer().to_i64() {
                return Self::Int(n);
            }
        }
        Self::Text(format_scalar(x))
    }

    pub fn to_scalar(&self, ring: Ring, path: &str) -> Result<Scalar> {
        let x = match self {
            Self::Int(n) => Scalar::from_integer(BigInt::from(*n)),
            Self::Text(s) => parse_scalar(s).ok_or_else(|| schema(path, format!("`{s}` is not a scalar")))?,
        };
        if !ring.contains(&ring.normalize(x.clone())) || (!ring.is_field() && !x.is_integer()) {
            return Err(schema(path, format!("{} is not an element of {ring}", format_scalar(&x))));
        }
        Ok(ring.normalize(x))
    }
}

/// A sparse vector, flat index to coefficient.
pub type SparseDoc = BTreeMap<Key<usize>, ScalarDoc>;

fn sparse(doc: &SparseDoc, ring: Ring, len: usize, path: &str) -> Result<SVec> {
    let mut v = SVec::new();
    for (&Key(i), x) in doc {
        if i >= len {
            return Err(schema(format!("{path}.{i}"), format!("index out of range for a basis of size {len}")));
        }
        let x = x.to_scalar(ring, &format!("{path}.{i}"))?;
        if !x.is_zero() {
            v.insert(i, x);
        }
    }
    Ok(v)
}

fn sparse_doc(v: &SVec) -> SparseDoc {
    v.iter().map(|(i, x)| (Key(*i), ScalarDoc::from_scalar(x))).collect()
}

/// A map key written either as a JSON number or as a string holding one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Key<T>(pub T);

impl<'de, T> Deserialize<'de> for Key<T>
where
    T: FromStr + TryFrom<i64> + TryFrom<u64>,
{
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct KeyVisitor<T>(PhantomData<T>);

        impl<T> Visitor<'_> for KeyVisitor<T>
        where
            T: FromStr + TryFrom<i64> + TryFrom<u64>,
        {
            type Value = Key<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer key")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<Key<T>, E> {
                s.trim().parse().map(Key).map_err(|_| E::invalid_value(Unexpected::Str(s), &self))
            }

            fn visit_u64<E: de::Error>(self, n: u64) -> std::result::Result<Key<T>, E> {
                T::try_from(n).map(Key).map_err(|_| E::invalid_value(Unexpected::Unsigned(n), &self))
            }

            fn visit_i64<E: de::Error>(self, n: i64) -> std::result::Result<Key<T>, E> {
                T::try_from(n).map(Key).map_err(|_| E::invalid_value(Unexpected::Signed(n), &self))
            }
        }

        d.deserialize_any(KeyVisitor(PhantomData))
    }
}

pub fn parse_ring(s: &str, path: &str) -> Result<Ring> {
    Ring::parse(s).map_err(|e| schema(path, e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeDoc {
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// Additive order of each generator, `0` for free ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub ring: String,
    #[serde(default)]
    pub degrees: BTreeMap<Key<i64>, DegreeDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub differentials: BTreeMap<Key<i64>, MatrixDoc>,
}

pub type MatrixDoc = Vec<Vec<ScalarDoc>>;

fn matrix(doc: &MatrixDoc, ring: Ring, rows: usize, cols: usize, path: &str) -> Result<ExactMatrix> {
    if doc.len() != rows {
        return Err(schema(path, format!("expected {rows} rows, found {}", doc.len())));
    }
    let mut out = Vec::with_capacity(rows);
    for (r, row) in doc.iter().enumerate() {
        if row.len() != cols {
            return Err(schema(format!("{path}[{r}]"), format!("expected {cols} entries, found {}", row.len())));
        }
        let row = row.iter().enumerate().map(|(c, x)| x.to_scalar(ring, &format!("{path}[{r}][{c}]"))).collect::<Result<_>>()?;
        out.push(row);
    }
    ExactMatrix::from_rows(ring, out, cols)
}

fn matrix_doc(m: &ExactMatrix) -> MatrixDoc {
    (0..m.rows()).map(|r| m.row(r).iter().map(ScalarDoc::from_scalar).collect()).collect()
}

impl ComplexDoc {
    pub fn to_complex(&self, path: &str) -> Result<ChainComplex> {
        let ring = parse_ring(&self.ring, &format!("{path}.ring"))?;
        self.to_complex_over(ring, path)
    }

    fn to_complex_over(&self, ring: Ring, path: &str) -> Result<ChainComplex> {
        let mut c = ChainComplex::zero(ring);
        for (&Key(n), d) in &self.degrees {
            let p = format!("{path}.degrees.{n}");
            let labels = match &d.labels {
                Some(l) if l.len() != d.rank => {
                    return Err(schema(format!("{p}.labels"), format!("expected {} labels, found {}", d.rank, l.len())))
                }
                Some(l) => l.clone(),
                None => (0..d.rank).map(|i| format!("e{n}_{i}")).collect(),
            };
            let orders = match &d.orders {
                Some(o) if o.len() != d.rank => {
                    return Err(schema(format!("{p}.orders"), format!("expected {} orders, found {}", d.rank, o.len())))
                }
                Some(o) if ring.is_field() && o.iter().any(|&x| x != 0) => {
                    return Err(schema(format!("{p}.orders"), "torsion generators need ZZ coefficients"))
                }
                Some(o) => o.iter().map(|&x| BigInt::from(x)).collect(),
                None => vec![BigInt::zero(); d.rank],
            };
            c.set_degree(n, orders, labels);
        }
        for (&Key(n), m) in &self.differentials {
            let p = format!("{path}.differentials.{n}");
            let d = matrix(m, ring, c.rank(n - 1), c.rank(n), &p)?;
            c.set_differential(n, d);
        }
        c.validate().map_err(|e| schema(format!("{path}.differentials"), e.to_string()))?;
        Ok(c)
    }

    pub fn from_complex(c: &ChainComplex) -> Self {
        let mut degrees = BTreeMap::new();
        let mut differentials = BTreeMap::new();
        for n in c.degrees() {
            let orders: Vec<u64> = c.orders(n).iter().map(|o| o.to_u64().unwrap_or(0)).collect();
            let free = orders.iter().all(|&o| o == 0);
            degrees.insert(
                Key(n),
                DegreeDoc { rank: c.rank(n), labels: Some(c.labels(n).to_vec()), orders: (!free).then_some(orders) },
            );
            let d = c.differential(n);
            if !d.is_zero() {
                differentials.insert(Key(n), matrix_doc(&d));
            }
        }
        Self { ring: c.ring().label(), degrees, differentials }
    }
}

/// A chain map given by its matrix in each degree; absent degrees are zero.
pub type ChainMapDoc = BTreeMap<Key<i64>, MatrixDoc>;

pub fn chain_map(doc: &ChainMapDoc, source: &ChainComplex, target: &ChainComplex, path: &str) -> Result<ChainMap> {
    let ring = source.ring();
    let mut comps = BTreeMap::new();
    for (&Key(n), m) in doc {
        comps.insert(n, matrix(m, ring, target.rank(n), source.rank(n), &format!("{path}.{n}"))?);
    }
    ChainMap::new(source.clone(), target.clone(), comps).map_err(|e| schema(path, e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MonoidDoc {
    /// `k[t]/t^m`.
    Truncated { truncated_polynomial: usize },
    Table { labels: Vec<String>, table: Vec<Vec<SparseDoc>>, unit: SparseDoc },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionDoc {
    pub p: usize,
    pub q: usize,
    /// 1-based slot.
    pub i: usize,
    pub a: usize,
    pub b: usize,
    pub value: SparseDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperadDoc {
    /// One of `uass`, `ass`, `a3zero`, `initial`, `arity1`.
    Builtin {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ring: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        monoid: Option<MonoidDoc>,
    },
    /// Planar trees labelled by generators, up to `size_bound` inner vertices.
    #[serde(alias = "free-on-V", alias = "free-on-v")]
    Free { ring: String, generators: BTreeMap<Key<usize>, ComplexDoc>, size_bound: usize },
    /// Components in arities `0..components.len()` and a full composition table; zero above.
    Explicit {
        #[serde(default)]
        name: Option<String>,
        ring: String,
        components: Vec<ComplexDoc>,
        unit: SparseDoc,
        #[serde(default)]
        compositions: Vec<CompositionDoc>,
    },
}

/// Arity bound used to check the axioms of operads read from a file.
const AXIOM_ARITY: usize = 4;

impl OperadDoc {
    /// `default_ring` is used when a builtin names no ring.
    pub fn to_operad(&self, default_ring: Option<Ring>, path: &str) -> Result<OperadRef> {
        match self {
            Self::Builtin { name, ring, monoid } => {
                let ring = match ring {
                    Some(r) => parse_ring(r, &format!("{path}.ring"))?,
                    None => default_ring.ok_or_else(|| schema(format!("{path}.ring"), "missing ring"))?,
                };
                if monoid.is_some() && name != "arity1" {
                    return Err(schema(format!("{path}.monoid"), "only arity1 takes a monoid"));
                }
                match name.as_str() {
                    "uass" => Ok(builtin_uass(ring)),
                    "ass" => Ok(builtin_ass(ring)),
                    "a3zero" => Ok(builtin_a3zero(ring)),
                    "initial" => Ok(builtin_initial(ring)),
                    "arity1" => {
                        let m = match monoid {
                            None => MonoidData::ground(ring),
                            Some(MonoidDoc::Truncated { truncated_polynomial }) => {
                                if *truncated_polynomial == 0 {
                                    return Err(schema(format!("{path}.monoid"), "k[t]/t^0 has no unit"));
                                }
                                MonoidData::truncated_polynomial(ring, *truncated_polynomial)
                            }
                            Some(MonoidDoc::Table { labels, table, unit }) => {
                                let r = labels.len();
                                let p = format!("{path}.monoid");
                                if table.len() != r || table.iter().any(|row| row.len() != r) {
                                    return Err(schema(format!("{p}.table"), format!("expected a {r}×{r} table")));
                                }
                                let table = table
                                    .iter()
                                    .enumerate()
                                    .map(|(a, row)| {
                                        row.iter()
                                            .enumerate()
                                            .map(|(b, v)| sparse(v, ring, r, &format!("{p}.table[{a}][{b}]")))
                                            .collect::<Result<Vec<_>>>()
                                    })
                                    .collect::<Result<Vec<_>>>()?;
                                let unit = sparse(unit, ring, r, &format!("{p}.unit"))?;
                                MonoidData { ring, labels: labels.clone(), table, unit }
                            }
                        };
                        builtin_arity1(m).map_err(|e| schema(format!("{path}.monoid"), e.to_string()))
                    }
                    other => Err(schema(format!("{path}.name"), format!("unknown builtin operad `{other}`"))),
                }
            }
            Self::Free { ring, generators, size_bound } => {
                let ring = parse_ring(ring, &format!("{path}.ring"))?;
                let mut gens = BTreeMap::new();
                for (&Key(a), c) in generators {
                    let p = format!("{path}.generators.{a}");
                    let c = c.to_complex(&p)?;
                    if c.ring() != ring {
                        return Err(schema(format!("{p}.ring"), "generator ring differs from the operad ring"));
                    }
                    gens.insert(a, c);
                }
                Ok(free_operad(ring, gens, *size_bound).map_err(|e| schema(path, e.to_string()))?.as_operad())
            }
            Self::Explicit { name, ring, components, unit, compositions } => {
                let ring = parse_ring(ring, &format!("{path}.ring"))?;
                let comps = components
                    .iter()
                    .enumerate()
                    .map(|(n, c)| c.to_complex_over(ring, &format!("{path}.components[{n}]")))
                    .collect::<Result<Vec<_>>>()?;
                let rank = |n: usize| comps.get(n).map_or(0, |c| c.total_rank());
                let mut table = HashMap::new();
                for (k, e) in compositions.iter().enumerate() {
                    let p = format!("{path}.compositions[{k}]");
                    let r = (e.p + e.q).checked_sub(1).ok_or_else(|| schema(format!("{p}.p"), "p + q must be positive"))?;
                    table.insert((e.p, e.q, e.i, e.a, e.b), sparse(&e.value, ring, rank(r), &format!("{p}.value"))?);
                }
                let unit = sparse(unit, ring, rank(1), &format!("{path}.unit"))?;
                let name = name.clone().unwrap_or_else(|| "explicit".into());
                let op = ExplicitOperad::new(name, ring, comps, table, unit).map_err(|e| schema(path, e.to_string()))?;
                let bound = components.len().saturating_sub(1).min(AXIOM_ARITY);
                check_operad_axioms(&op, bound).map_err(|e| schema(path, e.to_string()))?;
                Ok(Arc::new(op))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    /// Flat index of the operation in `O(arity)`.
    pub op: usize,
    pub args: Vec<usize>,
    pub value: SparseDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum StructureDoc {
    /// Iterated products from a multiplication table, with a unit when `O(0) ≠ 0`.
    Product {
        mult: Vec<Vec<SparseDoc>>,
        #[serde(default)]
        unit: Option<SparseDoc>,
    },
    /// A module over an arity-1 operad: `act[m][a] = m · a`.
    Module { act: Vec<Vec<SparseDoc>> },
    /// Structure constants per arity; missing entries are zero and the operad unit acts as the
    /// identity unless arity 1 lists it.
    Tables { tables: BTreeMap<Key<usize>, Vec<ActionEntry>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub operad: Kinded<OperadDoc>,
    pub carrier: ComplexDoc,
    pub structure: Kinded<StructureDoc>,
}

/// Either a bundled fixture name or a full algebra document.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AlgebraRef {
    Fixture(String),
    Doc(Box<AlgebraDoc>),
}

impl<'de> Deserialize<'de> for AlgebraRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RefVisitor;

        impl<'de> Visitor<'de> for RefVisitor {
            type Value = AlgebraRef;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a fixture name or an algebra document")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<AlgebraRef, E> {
                Ok(AlgebraRef::Fixture(s.to_string()))
            }

            fn visit_map<A: de::MapAccess<'de>>(self, map: A) -> std::result::Result<AlgebraRef, A::Error> {
                AlgebraDoc::deserialize(de::value::MapAccessDeserializer::new(map)).map(|d| AlgebraRef::Doc(Box::new(d)))
            }
        }

        d.deserialize_any(RefVisitor)
    }
}

/// Names accepted by [`fixture_algebra`].
pub const FIXTURES: &[&str] = &[
    "k",
    "dual-numbers",
    "torsion-square",
    "cycle-square",
    "square-zero-line",
    "zero-uass",
    "initial-uass",
    "initial-a3zero",
];

/// A bundled algebra. `ring` applies to the fixtures not tied to one ring.
pub fn fixture_algebra(name: &str, ring: Option<Ring>) -> Result<OAlgebra> {
    let q = ring.unwrap_or(Ring::Rationals);
    let fixed = |r: Ring| match ring {
        Some(x) if x != r => Err(Error::InvalidRing(format!("fixture `{name}` is defined over {r} only"))),
        _ => Ok(()),
    };
    Ok(match name {
        "k" => ground_algebra(q),
        "dual-numbers" => dual_numbers(q),
        "torsion-square" => {
            fixed(Ring::Integers)?;
            torsion_square_algebra()
        }
        "cycle-square" => {
            fixed(Ring::Rationals)?;
            cycle_square_algebra()
        }
        "square-zero-line" => square_zero_line(q),
        "zero-uass" => zero_algebra(builtin_uass(q)),
        "initial-uass" => initial_algebra(builtin_uass(q)),
        "initial-a3zero" => initial_algebra(builtin_a3zero(q)),
        other => return Err(Error::InvalidInput(format!("unknown fixture `{other}`, expected one of {FIXTURES:?}"))),
    })
}

fn table_rows(rows: &[Vec<SparseDoc>], ring: Ring, n_rows: usize, len: usize, path: &str) -> Result<Vec<Vec<SVec>>> {
    if rows.len() != n_rows || rows.iter().any(|r| r.len() != len) {
        return Err(schema(path, format!("expected a {n_rows}×{len} table")));
    }
    rows.iter()
        .enumerate()
        .map(|(a, row)| row.iter().enumerate().map(|(b, v)| sparse(v, ring, len, &format!("{path}[{a}][{b}]"))).collect())
        .collect()
}

impl AlgebraRef {
    pub fn to_algebra(&self, ring: Option<Ring>, path: &str) -> Result<OAlgebra> {
        match self {
            Self::Fixture(name) => fixture_algebra(name, ring).map_err(|e| schema(path, e.to_string())),
            Self::Doc(doc) => doc.to_algebra(path),
        }
    }
}

impl AlgebraDoc {
    pub fn to_algebra(&self, path: &str) -> Result<OAlgebra> {
        let carrier = self.carrier.to_complex(&format!("{path}.carrier"))?;
        let ring = carrier.ring();
        let op = self.operad.0.to_operad(Some(ring), &format!("{path}.operad"))?;
        if op.ring() != ring {
            return Err(schema(format!("{path}.operad"), format!("operad over {} but carrier over {ring}", op.ring())));
        }
        let r = carrier.total_rank();
        let name = self.name.clone().unwrap_or_else(|| "A".into());
        let p = format!("{path}.structure");
        let wrap = |e: Error| schema(p.clone(), e.to_string());
        match &self.structure.0 {
            StructureDoc::Product { mult, unit } => {
                let mult = table_rows(mult, ring, r, r, &format!("{p}.mult"))?;
                let unit = unit.as_ref().map(|u| sparse(u, ring, r, &format!("{p}.unit"))).transpose()?;
                product_algebra(op, carrier, mult, unit, &name).map_err(wrap)
            }
            StructureDoc::Module { act } => {
                let m = op.component(1).total_rank();
                let act = table_rows(act, ring, m, r, &format!("{p}.act"))?;
                module_algebra(op, carrier, act, &name).map_err(wrap)
            }
            StructureDoc::Tables { tables } => {
                let mut table = HashMap::new();
                for (&Key(n), entries) in tables {
                    let ops = op.component(n).total_rank();
                    for (k, e) in entries.iter().enumerate() {
                        let ep = format!("{p}.tables.{n}[{k}]");
                        if e.op >= ops {
                            return Err(schema(format!("{ep}.op"), format!("O({n}) has rank {ops}")));
                        }
                        if e.args.len() != n || e.args.iter().any(|&a| a >= r) {
                            return Err(schema(format!("{ep}.args"), format!("expected {n} indices below {r}")));
                        }
                        table.insert((n, e.op, e.args.clone()), sparse(&e.value, ring, r, &format!("{ep}.value"))?);
                    }
                }
                let unit = op.unit();
                if !tables.contains_key(&Key(1)) && unit.len() == 1 {
                    let (&u, c) = unit.iter().next().expect("one entry");
                    for a in 0..r {
                        table.insert((1, u, vec![a]), [(a, c.clone())].into_iter().collect());
                    }
                }
                let alg = OAlgebra::new(op, carrier, Arc::new(TableAction { table }), name);
                check_algebra_axioms(&alg, 3).map_err(wrap)?;
                Ok(alg)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsDoc {
    #[serde(default)]
    pub max_arity: Option<usize>,
    #[serde(default)]
    pub max_straight_leaves: Option<usize>,
    #[serde(default)]
    pub max_inner_vertices: Option<usize>,
    #[serde(default)]
    pub window: Option<usize>,
    #[serde(default)]
    pub max_weight: Option<usize>,
    #[serde(default)]
    pub max_stages: Option<usize>,
}

impl BoundsDoc {
    pub fn apply(&self, mut b: TruncationBounds) -> TruncationBounds {
        if let Some(n) = self.max_arity {
            b = b.arity(n);
        }
        if let Some(s) = self.max_straight_leaves {
            b = b.straight(s);
        }
        if let Some(v) = self.max_inner_vertices {
            b = b.vertices(v);
        }
        if let Some(w) = self.window {
            b = b.window(w);
        }
        if let Some(w) = self.max_weight {
            b = b.weight(w);
        }
        if let Some(t) = self.max_stages {
            b = b.stages(t);
        }
        b
    }
}

/// Rank and invariant factors of a finitely generated module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDoc {
    pub rank: usize,
    #[serde(default)]
    pub torsion: Vec<u64>,
}

impl ModuleDoc {
    pub fn from_module(m: &FgModule) -> Self {
        // invariant factors that overflow u64 do not occur for the sizes computed here
        Self { rank: m.rank, torsion: m.torsion.iter().map(|t| t.to_u64().unwrap_or(u64::MAX)).collect() }
    }
}

/// Per-degree invariants of a complex. `homology` is compared only when present.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantsDoc {
    #[serde(default)]
    pub modules: BTreeMap<Key<i64>, ModuleDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homology: Option<BTreeMap<Key<i64>, ModuleDoc>>,
}

impl InvariantsDoc {
    pub fn from_invariants(inv: &ComplexInvariants) -> Self {
        let conv = |m: &BTreeMap<i64, FgModule>| -> BTreeMap<Key<i64>, ModuleDoc> {
            m.iter().filter(|(_, x)| x.rank > 0 || !x.torsion.is_empty()).map(|(n, x)| (Key(*n), ModuleDoc::from_module(x))).collect()
        };
        Self { modules: conv(&inv.modules), homology: Some(conv(&inv.homology)) }
    }

    /// Whether `computed` has these modules, and this homology if any is given.
    pub fn matches(&self, computed: &InvariantsDoc) -> bool {
        self.modules == computed.modules && self.homology.as_ref().is_none_or(|h| Some(h) == computed.homology.as_ref())
    }
}

pub fn sparse_vector_doc(v: &SVec) -> SparseDoc {
    sparse_doc(v)
}

/// A description of an operad for reports: name and ranks of the first components.
pub fn operad_summary(op: &dyn Operad, max_arity: usize) -> Value {
    let ranks: BTreeMap<usize, usize> = (0..=max_arity).map(|n| (n, op.component(n).total_rank())).collect();
    serde_json::json!({ "name": op.name(), "ring": op.ring().label(), "ranks": ranks })
}
