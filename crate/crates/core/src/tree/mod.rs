//! Planted planar trees with typed leaves.
//!
//! Code syntax: a vertex is `(` followed by its children and `)`; leaves are `|` (straight),
//! `~` (snaky) and `^` (bumpy). A cork is `()`.

mod enumerate;

pub use enumerate::{enumerate_trees, TreeSpec};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LeafKind {
    Straight,
    Snaky,
    Bumpy,
}

impl LeafKind {
    pub fn symbol(self) -> char {
        match self {
            LeafKind::Straight => '|',
            LeafKind::Snaky => '~',
            LeafKind::Bumpy => '^',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '|' => Some(LeafKind::Straight),
            '~' => Some(LeafKind::Snaky),
            '^' => Some(LeafKind::Bumpy),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum PlanarTree {
    Leaf(LeafKind),
    Vertex(Vec<PlanarTree>),
}

/// An edge is named by the path of child indices from the root vertex to the node sitting on top
/// of it; the empty path names the root edge.
pub type EdgePath = Vec<usize>;

impl PlanarTree {
    pub fn leaf(kind: LeafKind) -> Self {
        PlanarTree::Leaf(kind)
    }

    pub fn snaky() -> Self {
        PlanarTree::Leaf(LeafKind::Snaky)
    }

    pub fn straight() -> Self {
        PlanarTree::Leaf(LeafKind::Straight)
    }

    /// One vertex whose children are the given leaves.
    pub fn corolla(leaves: &[LeafKind]) -> Self {
        PlanarTree::Vertex(leaves.iter().map(|k| PlanarTree::Leaf(*k)).collect())
    }

    /// Corolla with `n` snaky leaves.
    pub fn snaky_corolla(n: usize) -> Self {
        Self::corolla(&vec![LeafKind::Snaky; n])
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, PlanarTree::Leaf(_))
    }

    pub fn children(&self) -> &[PlanarTree] {
        match self {
            PlanarTree::Leaf(_) => &[],
            PlanarTree::Vertex(c) => c,
        }
    }

    pub fn arity(&self) -> usize {
        self.children().len()
    }

    /// Leaf kinds from left to right.
    pub fn leaves(&self) -> Vec<LeafKind> {
        let mut out = vec![];
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<LeafKind>) {
        match self {
            PlanarTree::Leaf(k) => out.push(*k),
            PlanarTree::Vertex(c) => c.iter().for_each(|t| t.collect_leaves(out)),
        }
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            PlanarTree::Leaf(_) => 1,
            PlanarTree::Vertex(c) => c.iter().map(|t| t.num_leaves()).sum(),
        }
    }

    pub fn count_leaves(&self, kind: LeafKind) -> usize {
        self.leaves().into_iter().filter(|k| *k == kind).count()
    }

    pub fn num_vertices(&self) -> usize {
        match self {
            PlanarTree::Leaf(_) => 0,
            PlanarTree::Vertex(c) => 1 + c.iter().map(|t| t.num_vertices()).sum::<usize>(),
        }
    }

    /// Number of levels: a single leaf has height 1, a corolla height 2.
    pub fn height(&self) -> usize {
        match self {
            PlanarTree::Leaf(_) => 1,
            PlanarTree::Vertex(c) => 1 + c.iter().map(|t| t.height()).max().unwrap_or(0),
        }
    }

    /// Replaces the `i`-th leaf (1-based, left to right) by `other`.
    pub fn graft(&self, i: usize, other: &PlanarTree) -> Result<PlanarTree> {
        let leaves = self.num_leaves();
        if i == 0 || i > leaves {
            return Err(Error::SlotOutOfRange { slot: i, leaves });
        }
        let mut count = i;
        Ok(self.graft_rec(&mut count, other))
    }

    fn graft_rec(&self, count: &mut usize, other: &PlanarTree) -> PlanarTree {
        match self {
            PlanarTree::Leaf(_) => {
                *count -= 1;
                if *count == 0 {
                    other.clone()
                } else {
                    self.clone()
                }
            }
            PlanarTree::Vertex(c) => PlanarTree::Vertex(
                c.iter()
                    .map(|t| if *count == 0 { t.clone() } else { t.graft_rec(count, other) })
                    .collect(),
            ),
        }
    }

    pub fn node(&self, path: &[usize]) -> Result<&PlanarTree> {
        let mut cur = self;
        for &k in path {
            cur = cur.children().get(k).ok_or_else(|| Error::InvalidPath(path.to_vec()))?;
        }
        Ok(cur)
    }

    fn node_mut(&mut self, path: &[usize]) -> Result<&mut PlanarTree> {
        let mut cur = self;
        for &k in path {
            cur = match cur {
                PlanarTree::Vertex(c) if k < c.len() => &mut c[k],
                _ => return Err(Error::InvalidPath(path.to_vec())),
            };
        }
        Ok(cur)
    }

    /// Merges the vertex on top of the edge into the vertex below it.
    pub fn contract_inner_edge(&self, path: &[usize]) -> Result<PlanarTree> {
        let Some((&last, parent_path)) = path.split_last() else {
            return Err(Error::NotInnerEdge("the root edge has no vertex below it".into()));
        };
        let upper = self.node(path)?;
        let PlanarTree::Vertex(grand) = upper else {
            return Err(Error::NotInnerEdge(format!("edge {path:?} ends in a leaf")));
        };
        let grand = grand.clone();
        let mut out = self.clone();
        let PlanarTree::Vertex(siblings) = out.node_mut(parent_path)? else { unreachable!() };
        siblings.splice(last..=last, grand);
        Ok(out)
    }

    /// Inserts an arity-1 vertex in the middle of the edge.
    pub fn subdivide_edge(&self, path: &[usize]) -> Result<PlanarTree> {
        let mut out = self.clone();
        let node = out.node_mut(path)?;
        let old = std::mem::replace(node, PlanarTree::Vertex(vec![]));
        *node = PlanarTree::Vertex(vec![old]);
        Ok(out)
    }

    /// Paths of all inner edges (both ends are vertices), in preorder.
    pub fn inner_edges(&self) -> Vec<EdgePath> {
        let mut out = vec![];
        fn rec(t: &PlanarTree, path: &mut Vec<usize>, out: &mut Vec<EdgePath>) {
            for (k, c) in t.children().iter().enumerate() {
                path.push(k);
                if !c.is_leaf() {
                    out.push(path.clone());
                    rec(c, path, out);
                }
                path.pop();
            }
        }
        rec(self, &mut vec![], &mut out);
        out
    }

    /// Paths of all edges in preorder, the root edge first.
    pub fn edges(&self) -> Vec<EdgePath> {
        let mut out = vec![vec![]];
        fn rec(t: &PlanarTree, path: &mut Vec<usize>, out: &mut Vec<EdgePath>) {
            for (k, c) in t.children().iter().enumerate() {
                path.push(k);
                out.push(path.clone());
                rec(c, path, out);
                path.pop();
            }
        }
        rec(self, &mut vec![], &mut out);
        out
    }

    pub fn code(&self) -> String {
        let mut s = String::new();
        self.write_code(&mut s);
        s
    }

    fn write_code(&self, s: &mut String) {
        match self {
            PlanarTree::Leaf(k) => s.push(k.symbol()),
            PlanarTree::Vertex(c) => {
                s.push('(');
                c.iter().for_each(|t| t.write_code(s));
                s.push(')');
            }
        }
    }

    pub fn decode(code: &str) -> Result<PlanarTree> {
        let chars: Vec<char> = code.chars().collect();
        let bad = |reason: &str| Error::MalformedCode { code: code.to_string(), reason: reason.to_string() };
        let mut pos = 0;
        fn parse(chars: &[char], pos: &mut usize) -> std::result::Result<PlanarTree, &'static str> {
            let Some(&c) = chars.get(*pos) else { return Err("unexpected end") };
            *pos += 1;
            if let Some(k) = LeafKind::from_symbol(c) {
                return Ok(PlanarTree::Leaf(k));
            }
            if c != '(' {
                return Err("unexpected symbol");
            }
            let mut children = vec![];
            loop {
                match chars.get(*pos) {
                    None => return Err("unclosed vertex"),
                    Some(')') => {
                        *pos += 1;
                        return Ok(PlanarTree::Vertex(children));
                    }
                    Some(_) => children.push(parse(chars, pos)?),
                }
            }
        }
        let t = parse(&chars, &mut pos).map_err(bad)?;
        if pos != chars.len() {
            return Err(bad("trailing symbols"));
        }
        Ok(t)
    }
}

impl fmt::Debug for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

impl fmt::Display for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

pub fn canonical_code(t: &PlanarTree) -> String {
    t.code()
}

pub fn decode(code: &str) -> Result<PlanarTree> {
    PlanarTree::decode(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(code: &str) -> PlanarTree {
        PlanarTree::decode(code).unwrap()
    }

    #[test]
    fn graft_examples() {
        let g = PlanarTree::snaky_corolla(2).graft(1, &PlanarTree::snaky_corolla(3)).unwrap();
        assert_eq!(g.code(), "((~~~)~)");
        assert_eq!(g.num_leaves(), 4);
        let c = t("(~|~)");
        assert_eq!(c.graft(2, &PlanarTree::straight()).unwrap(), c);
        let cork = PlanarTree::snaky_corolla(2).graft(2, &t("()")).unwrap();
        assert_eq!(cork.code(), "(~())");
        assert_eq!(cork.num_leaves(), 1);
        assert!(matches!(c.graft(4, &c), Err(Error::SlotOutOfRange { slot: 4, leaves: 3 })));
    }

    #[test]
    fn contraction_examples() {
        let g = PlanarTree::snaky_corolla(4).graft(3, &PlanarTree::snaky_corolla(3)).unwrap();
        assert_eq!(g.contract_inner_edge(&[2]).unwrap(), PlanarTree::snaky_corolla(6));
        assert!(matches!(g.contract_inner_edge(&[0]), Err(Error::NotInnerEdge(_))));
        assert!(matches!(g.contract_inner_edge(&[]), Err(Error::NotInnerEdge(_))));
        let sides = t("(|(~^)~)").contract_inner_edge(&[1]).unwrap();
        assert_eq!(sides.code(), "(|~^~)");
    }

    #[test]
    fn subdivision_examples() {
        assert_eq!(PlanarTree::snaky().subdivide_edge(&[]).unwrap().code(), "(~)");
        let c = t("(~|)");
        let s = c.subdivide_edge(&[1]).unwrap();
        assert_eq!(s.code(), "(~(|))");
        assert_eq!(s.contract_inner_edge(&[1]).unwrap(), c);
        let s2 = s.subdivide_edge(&[0]).unwrap();
        assert_eq!(s2.num_vertices(), c.num_vertices() + 2);
        assert_eq!(s2.leaves(), c.leaves());
    }

    #[test]
    fn codes_round_trip_and_reject_garbage() {
        for code in ["~", "(~~)", "((~())|^)", "()"] {
            assert_eq!(t(code).code(), code);
        }
        for bad in ["", "(", "(~))", "x", "~~"] {
            assert!(matches!(PlanarTree::decode(bad), Err(Error::MalformedCode { .. })));
        }
    }

    #[test]
    fn heights_and_edges() {
        let tr = t("((~)|)");
        assert_eq!(tr.height(), 3);
        assert_eq!(tr.inner_edges(), vec![vec![0]]);
        assert_eq!(tr.edges(), vec![vec![], vec![0], vec![0, 0], vec![1]]);
    }
}
