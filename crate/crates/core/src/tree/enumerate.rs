use std::collections::HashMap;
use std::sync::Arc;

use super::{LeafKind, PlanarTree};
use crate::error::{Error, Result};

pub type LeafRule = Arc<dyn Fn(usize, LeafKind) -> bool + Send + Sync>;

/// Bounds for [`enumerate_trees`]. Levels count from 1 at the root vertex; a leaf hanging off a
/// vertex of level `l` sits at level `l + 1`.
#[derive(Clone)]
pub struct TreeSpec {
    pub snaky: usize,
    pub bumpy: usize,
    pub max_straight: usize,
    pub min_vertices: usize,
    /// Required unless every allowed arity is at least 2.
    pub max_vertices: Option<usize>,
    pub max_height: Option<usize>,
    /// Allowed vertex arities; `None` allows all.
    pub arities: Option<Vec<usize>>,
    pub leaf_rule: Option<LeafRule>,
}

impl TreeSpec {
    pub fn new(snaky: usize) -> Self {
        Self {
            snaky,
            bumpy: 0,
            max_straight: 0,
            min_vertices: 0,
            max_vertices: None,
            max_height: None,
            arities: None,
            leaf_rule: None,
        }
    }

    pub fn straight(mut self, max: usize) -> Self {
        self.max_straight = max;
        self
    }

    pub fn vertices(mut self, min: usize, max: usize) -> Self {
        self.min_vertices = min;
        self.max_vertices = Some(max);
        self
    }

    pub fn height(mut self, max: usize) -> Self {
        self.max_height = Some(max);
        self
    }

    pub fn arities(mut self, a: Vec<usize>) -> Self {
        self.arities = Some(a);
        self
    }

    pub fn leaf_rule(mut self, rule: impl Fn(usize, LeafKind) -> bool + Send + Sync + 'static) -> Self {
        self.leaf_rule = Some(Arc::new(rule));
        self
    }
}

type Key = (usize, usize, usize, usize, usize);

struct Gen<'a> {
    spec: &'a TreeSpec,
    trees: HashMap<Key, Vec<PlanarTree>>,
    forests: HashMap<(usize, usize, Key), Vec<Vec<PlanarTree>>>,
}

impl Gen<'_> {
    fn arity_ok(&self, a: usize) -> bool {
        self.spec.arities.as_ref().is_none_or(|v| v.contains(&a))
    }

    fn level_ok(&self, level: usize) -> bool {
        self.spec.max_height.is_none_or(|h| level <= h)
    }

    /// Trees rooted at `level` with exactly `v` vertices and the given leaf counts.
    fn trees(&mut self, key: Key) -> Vec<PlanarTree> {
        if let Some(t) = self.trees.get(&key) {
            return t.clone();
        }
        let (level, v, sn, bu, st) = key;
        let mut out = vec![];
        if self.level_ok(level) {
            if v == 0 {
                let kind = match (sn, bu, st) {
                    (1, 0, 0) => Some(LeafKind::Snaky),
                    (0, 1, 0) => Some(LeafKind::Bumpy),
                    (0, 0, 1) => Some(LeafKind::Straight),
                    _ => None,
                };
                if let Some(k) = kind {
                    if self.spec.leaf_rule.as_ref().is_none_or(|r| r(level, k)) {
                        out.push(PlanarTree::Leaf(k));
                    }
                }
            } else {
                let max_arity = v - 1 + sn + bu + st;
                for a in 0..=max_arity {
                    if !self.arity_ok(a) {
                        continue;
                    }
                    for kids in self.forest(level + 1, a, (level + 1, v - 1, sn, bu, st)) {
                        out.push(PlanarTree::Vertex(kids));
                    }
                }
            }
        }
        self.trees.insert(key, out.clone());
        out
    }

    /// Ordered lists of `a` trees at `level` sharing the budget in `key` exactly.
    fn forest(&mut self, level: usize, a: usize, key: Key) -> Vec<Vec<PlanarTree>> {
        let memo = (level, a, key);
        if let Some(f) = self.forests.get(&memo) {
            return f.clone();
        }
        let (_, v, sn, bu, st) = key;
        let mut out = vec![];
        if a == 0 {
            if v == 0 && sn == 0 && bu == 0 && st == 0 {
                out.push(vec![]);
            }
        } else {
            for v1 in 0..=v {
                for s1 in 0..=sn {
                    for b1 in 0..=bu {
                        for t1 in 0..=st {
                            // each remaining child needs a vertex or a leaf
                            if (v - v1) + (sn - s1) + (bu - b1) + (st - t1) < a - 1 {
                                continue;
                            }
                            let firsts = self.trees((level, v1, s1, b1, t1));
                            if firsts.is_empty() {
                                continue;
                            }
                            let rests = self.forest(level, a - 1, (level, v - v1, sn - s1, bu - b1, st - t1));
                            for f in &firsts {
                                for r in &rests {
                                    let mut kids = Vec::with_capacity(a);
                                    kids.push(f.clone());
                                    kids.extend(r.iter().cloned());
                                    out.push(kids);
                                }
                            }
                        }
                    }
                }
            }
        }
        self.forests.insert(memo, out.clone());
        out
    }
}

/// All trees meeting `spec`, sorted by canonical code, without duplicates.
pub fn enumerate_trees(spec: &TreeSpec) -> Result<Vec<PlanarTree>> {
    let leaves = spec.snaky + spec.bumpy + spec.max_straight;
    let max_vertices = match spec.max_vertices {
        Some(v) => v,
        None => match &spec.arities {
            Some(a) if a.iter().all(|&x| x >= 2) => leaves.saturating_sub(1),
            _ => return Err(Error::Unbounded("trees need a vertex bound when arities 0 or 1 are allowed".into())),
        },
    };
    let mut gen = Gen { spec, trees: HashMap::new(), forests: HashMap::new() };
    let mut out = vec![];
    for v in spec.min_vertices..=max_vertices {
        for st in 0..=spec.max_straight {
            out.extend(gen.trees((1, v, spec.snaky, spec.bumpy, st)));
        }
    }
    let mut coded: Vec<(String, PlanarTree)> = out.into_iter().map(|t| (t.code(), t)).collect();
    coded.sort_by(|a, b| a.0.cmp(&b.0));
    coded.dedup_by(|a, b| a.0 == b.0);
    Ok(coded.into_iter().map(|(_, t)| t).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corollas_with_one_snaky_leaf() {
        let spec = TreeSpec::new(1).straight(2).vertices(1, 1);
        assert_eq!(enumerate_trees(&spec).unwrap().len(), 6);
    }

    #[test]
    fn binary_trees_are_catalan() {
        let spec = TreeSpec::new(3).arities(vec![2]);
        let trees = enumerate_trees(&spec).unwrap();
        assert_eq!(trees.iter().map(|t| t.code()).collect::<Vec<_>>(), vec!["((~~)~)", "(~(~~))"]);
        let spec = TreeSpec::new(5).arities(vec![2]);
        assert_eq!(enumerate_trees(&spec).unwrap().len(), 14);
    }

    #[test]
    fn lone_cork() {
        let spec = TreeSpec::new(0).vertices(0, 1);
        let trees = enumerate_trees(&spec).unwrap();
        assert_eq!(trees.iter().map(|t| t.code()).collect::<Vec<_>>(), vec!["()"]);
    }

    #[test]
    fn unbounded_spec_is_rejected() {
        assert!(matches!(enumerate_trees(&TreeSpec::new(1)), Err(Error::Unbounded(_))));
    }

    #[test]
    fn output_is_strictly_sorted() {
        let spec = TreeSpec::new(2).straight(1).vertices(0, 3);
        let codes: Vec<String> = enumerate_trees(&spec).unwrap().iter().map(|t| t.code()).collect();
        assert!(codes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn height_and_level_rules() {
        // height ≤ 3 trees whose level-2 leaves are snaky and level-3 leaves straight
        let spec = TreeSpec::new(1)
            .straight(2)
            .vertices(1, 3)
            .height(3)
            .leaf_rule(|level, kind| (level == 2) == (kind == LeafKind::Snaky));
        for t in enumerate_trees(&spec).unwrap() {
            assert!(t.height() <= 3);
            for c in t.children() {
                match c {
                    PlanarTree::Leaf(k) => assert_eq!(*k, LeafKind::Snaky),
                    // a level-3 cork is a vertex, which leaf rules cannot exclude
                    PlanarTree::Vertex(g) => {
                        assert!(g.iter().all(|x| *x == PlanarTree::straight() || *x == PlanarTree::Vertex(vec![])))
                    }
                }
            }
        }
    }
}
