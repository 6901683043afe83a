use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use super::{ChainComplex, ChainMap, DegreeData};
use crate::error::{Error, Result};
use crate::linalg::module::{reduce_presentation, reduce_rows_mod, solve};
use crate::linalg::ring::format_scalar;
use crate::linalg::ExactMatrix;

/// `Y / span(relations)` with projection `Y -> Q` and a chosen lift of every generator of `Q`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub complex: Arc<ChainComplex>,
    pub projection: ChainMap,
    lifts: BTreeMap<i64, ExactMatrix>,
    relations: BTreeMap<i64, ExactMatrix>,
}

fn lift_label(y: &ChainComplex, n: i64, col: &[crate::linalg::Scalar]) -> String {
    let terms: Vec<(usize, &crate::linalg::Scalar)> = col.iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
    let labels = y.labels(n);
    match terms.as_slice() {
        [(i, x)] if x.is_one() => labels[*i].clone(),
        _ => {
            let parts: Vec<String> = terms
                .iter()
                .map(|(i, x)| if x.is_one() { labels[*i].clone() } else { format!("{}*{}", format_scalar(x), labels[*i]) })
                .collect();
            format!("[{}]", parts.join("+"))
        }
    }
}

/// Quotient of `y` by the subcomplex spanned (degreewise) by the columns of `relations`.
pub fn quotient(y: &ChainComplex, relations: &BTreeMap<i64, ExactMatrix>) -> Result<Quotient> {
    let ring = y.ring();
    let rel = |n: i64| -> ExactMatrix {
        relations.get(&n).cloned().unwrap_or_else(|| ExactMatrix::zeros(ring, y.rank(n), 0)).with_ring(ring)
    };
    for (n, r) in relations {
        if r.rows() != y.rank(*n) {
            return Err(Error::Shape(format!("relations in degree {n} have {} rows, expected {}", r.rows(), y.rank(*n))));
        }
    }
    let mut degrees = BTreeMap::new();
    let mut proj = BTreeMap::new();
    let mut lifts = BTreeMap::new();
    for n in y.degrees() {
        let r = rel(n);
        let image = y.differential(n).mul(&r);
        if image.cols() > 0 && !image.is_zero() {
            let span = rel(n - 1).hstack(&y.order_relations(n - 1));
            if solve(&span, &image).is_none() {
                return Err(Error::NotAComplex { degree: n, reason: "relations are not closed under the differential".into() });
            }
        }
        let red = reduce_presentation(&r.hstack(&y.order_relations(n)));
        if red.orders.is_empty() {
            continue;
        }
        let labels = (0..red.lift.cols()).map(|k| lift_label(y, n, &red.lift.col(k))).collect();
        degrees.insert(n, DegreeData { orders: red.orders.clone(), labels });
        proj.insert(n, red.projection);
        lifts.insert(n, red.lift);
    }
    let mut diffs = BTreeMap::new();
    for (&n, l) in &lifts {
        if let Some(p) = proj.get(&(n - 1)) {
            let mut d = p.mul(&y.differential(n)).mul(l);
            reduce_rows_mod(&mut d, &degrees[&(n - 1)].orders);
            diffs.insert(n, d);
        }
    }
    let complex = Arc::new(ChainComplex::from_raw(ring, degrees, diffs));
    let projection = ChainMap::new_unchecked(Arc::new(y.clone()), complex.clone(), proj);
    let relations = y.degrees().into_iter().map(|n| (n, rel(n))).collect();
    Ok(Quotient { complex, projection, lifts, relations })
}

impl Quotient {
    pub fn lift(&self, n: i64) -> ExactMatrix {
        self.lifts
            .get(&n)
            .cloned()
            .unwrap_or_else(|| ExactMatrix::zeros(self.complex.ring(), self.projection.source().rank(n), 0))
    }

    /// The map `Q -> W` induced by `h : Y -> W`, after checking that `h` kills the relations.
    pub fn induced(&self, h: &ChainMap) -> Result<ChainMap> {
        let target = h.target_arc();
        for (n, r) in &self.relations {
            if r.cols() == 0 {
                continue;
            }
            let mut img = h.component(*n).mul(r);
            reduce_rows_mod(&mut img, target.orders(*n));
            if !img.is_zero() {
                return Err(Error::Descent(format!("map does not vanish on the relations in degree {n}")));
            }
        }
        let comps = self.lifts.iter().map(|(n, l)| (*n, h.component(*n).mul(l))).collect();
        Ok(ChainMap::new_unchecked(self.complex.clone(), target, comps))
    }
}

#[derive(Clone, Debug)]
pub struct Pushout {
    pub complex: Arc<ChainComplex>,
    /// `A -> P`
    pub leg_a: ChainMap,
    /// `Y -> P`
    pub leg_y: ChainMap,
    pub quotient: Quotient,
}

impl Pushout {
    /// The map `P -> W` determined by `a : A -> W` and `y : Y -> W`; fails unless the square commutes.
    pub fn map_out(&self, a: &ChainMap, y: &ChainMap) -> Result<ChainMap> {
        let sum = self.quotient.projection.source_arc();
        let comps = sum
            .degrees()
            .into_iter()
            .map(|n| (n, a.component(n).hstack(&y.component(n))))
            .collect();
        let h = ChainMap::new_unchecked(sum, a.target_arc(), comps);
        self.quotient.induced(&h)
    }
}

/// Push-out of `A <-f- X -g-> Y`, computed as `(A ⊕ Y) / im(f, -g)`.
pub fn pushout(f: &ChainMap, g: &ChainMap) -> Result<Pushout> {
    let (a, y) = (f.target(), g.target());
    let ring = a.ring();
    let sum = ChainComplex::direct_sum(&[a, y], ring)?;
    let mut rel = BTreeMap::new();
    for n in sum.degrees() {
        rel.insert(n, f.component(n).vstack(&g.component(n).neg()));
    }
    let quotient = quotient(&sum, &rel)?;
    let p = quotient.complex.clone();
    let proj = &quotient.projection;
    let leg_a = ChainMap::new_unchecked(
        f.target_arc(),
        p.clone(),
        sum.degrees()
            .into_iter()
            .map(|n| (n, proj.component(n).select_cols(&(0..a.rank(n)).collect::<Vec<_>>())))
            .collect(),
    );
    let leg_y = ChainMap::new_unchecked(
        g.target_arc(),
        p.clone(),
        sum.degrees()
            .into_iter()
            .map(|n| (n, proj.component(n).select_cols(&(a.rank(n)..a.rank(n) + y.rank(n)).collect::<Vec<_>>())))
            .collect(),
    );
    Ok(Pushout { complex: p, leg_a, leg_y, quotient })
}

#[derive(Clone, Debug)]
pub struct Coequalizer {
    pub complex: Arc<ChainComplex>,
    pub projection: ChainMap,
    pub quotient: Quotient,
}

/// Coequalizer `Y / im(f - g)` of parallel maps `X => Y`; a common section, if given, is checked.
pub fn coequalizer(f: &ChainMap, g: &ChainMap, section: Option<&ChainMap>) -> Result<Coequalizer> {
    let diff = f.sub(g)?;
    if let Some(s) = section {
        let id = ChainMap::identity_arc(s.source_arc());
        let fs = f.compose(s).map_err(|e| Error::BadSection(e.to_string()))?;
        let gs = g.compose(s).map_err(|e| Error::BadSection(e.to_string()))?;
        if !fs.same_as(&id) || !gs.same_as(&id) {
            return Err(Error::BadSection("f∘s or g∘s differs from the identity".into()));
        }
    }
    let y = f.target();
    let rel = y.degrees().into_iter().map(|n| (n, diff.component(n))).collect();
    let quotient = quotient(y, &rel)?;
    Ok(Coequalizer { complex: quotient.complex.clone(), projection: quotient.projection.clone(), quotient })
}

#[derive(Clone, Debug, Serialize)]
pub struct SequentialColimit {
    #[serde(skip)]
    pub colimit: Arc<ChainComplex>,
    /// Index of the first map from which every later map is an isomorphism, when that tail
    /// has at least `window` maps.
    pub stabilized_at: Option<usize>,
    pub window: usize,
}

impl SequentialColimit {
    pub fn is_stabilized(&self) -> bool {
        self.stabilized_at.is_some()
    }
}

/// Colimit of `X_0 -> X_1 -> ...`, declared stable once the last `window` maps are isomorphisms.
pub fn sequential_colimit(maps: &[ChainMap], window: usize) -> Result<SequentialColimit> {
    let last = maps.last().ok_or_else(|| Error::InvalidInput("a sequence needs at least one map".into()))?;
    for w in maps.windows(2) {
        w[1].compose(&w[0])?;
    }
    let mut start = maps.len();
    while start > 0 && maps[start - 1].is_iso() {
        start -= 1;
    }
    let tail = maps.len() - start;
    let stabilized_at = (window > 0 && tail >= window).then_some(start);
    Ok(SequentialColimit { colimit: last.target_arc(), stabilized_at, window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{FgModule, Ring};
    use num_bigint::BigInt;

    fn z() -> Ring {
        Ring::Integers
    }

    #[test]
    fn quotient_by_twice_a_generator() {
        let u = ChainComplex::unit(z());
        let mut rel = BTreeMap::new();
        rel.insert(0, ExactMatrix::from_i64(z(), &[&[2]]));
        let q = quotient(&u, &rel).unwrap();
        assert_eq!(q.complex.module(0).torsion, vec![BigInt::from(2)]);
        let id = ChainMap::identity(&u);
        assert!(matches!(q.induced(&id), Err(Error::Descent(_))));
    }

    #[test]
    fn non_subcomplex_relations_are_rejected() {
        let mut c = ChainComplex::zero(z());
        c.set_free(0, 1);
        c.set_free(1, 1);
        c.set_differential(1, ExactMatrix::from_i64(z(), &[&[1]]));
        let mut rel = BTreeMap::new();
        rel.insert(1, ExactMatrix::from_i64(z(), &[&[1]]));
        assert!(quotient(&c, &rel).is_err());
    }

    #[test]
    fn pushout_of_two_inclusions_of_a_point() {
        let q = Ring::Rationals;
        let pt = ChainComplex::unit(q);
        let mut two = ChainComplex::zero(q);
        two.set_free(0, 2);
        let mut comps = BTreeMap::new();
        comps.insert(0, ExactMatrix::from_i64(q, &[&[1], &[0]]));
        let f = ChainMap::new(pt.clone(), two.clone(), comps.clone()).unwrap();
        let g = ChainMap::new(pt, two, comps).unwrap();
        let p = pushout(&f, &g).unwrap();
        assert_eq!(p.complex.module(0), FgModule::free(q, 3));
        let pf = p.leg_a.compose(&f).unwrap();
        let pg = p.leg_y.compose(&g).unwrap();
        assert!(pf.same_as(&pg));
    }

    #[test]
    fn coequalizer_checks_its_section() {
        let q = Ring::Rationals;
        let u = ChainComplex::unit(q);
        let id = ChainMap::identity(&u);
        let zero = ChainMap::zero(&u, &u);
        assert!(matches!(coequalizer(&id, &zero, Some(&id)), Err(Error::BadSection(_))));
        let c = coequalizer(&id, &zero, None).unwrap();
        assert!(c.complex.is_zero());
    }

    #[test]
    fn sequential_colimit_detects_a_stable_tail() {
        let q = Ring::Rationals;
        let u = ChainComplex::unit(q);
        let id = ChainMap::identity(&u);
        let r = sequential_colimit(&[ChainMap::zero(&u, &u), id.clone(), id], 2).unwrap();
        assert_eq!(r.stabilized_at, Some(1));
        let r = sequential_colimit(&[ChainMap::zero(&u, &u)], 1).unwrap();
        assert!(!r.is_stabilized());
    }
}
