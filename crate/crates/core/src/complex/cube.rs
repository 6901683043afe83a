use std::collections::BTreeMap;
use std::sync::Arc;

use super::{quotient, tensor_many, ChainComplex, ChainMap, Quotient, TensorComplex};
use crate::error::{Error, Result};
use crate::linalg::{ExactMatrix, Ring};

/// A commuting cube of complexes indexed by subsets of `{0, .., dim-1}` (bitmasks).
/// The edge `(v, i)` goes from `v` to `v | 1 << i` for `i` not in `v`.
#[derive(Clone, Debug)]
pub struct ComplexCube {
    dim: usize,
    ring: Ring,
    vertices: Vec<Arc<ChainComplex>>,
    edges: BTreeMap<(usize, usize), ChainMap>,
}

impl ComplexCube {
    pub fn new(ring: Ring, dim: usize, vertices: Vec<ChainComplex>, edges: BTreeMap<(usize, usize), ChainMap>) -> Result<Self> {
        let cube = Self::new_unchecked(ring, dim, vertices.into_iter().map(Arc::new).collect(), edges)?;
        cube.validate()?;
        Ok(cube)
    }

    fn new_unchecked(
        ring: Ring,
        dim: usize,
        vertices: Vec<Arc<ChainComplex>>,
        edges: BTreeMap<(usize, usize), ChainMap>,
    ) -> Result<Self> {
        if vertices.len() != 1 << dim {
            return Err(Error::Shape(format!("a {dim}-cube needs {} vertices", 1usize << dim)));
        }
        for v in 0..1usize << dim {
            for i in 0..dim {
                if v & (1 << i) == 0 && !edges.contains_key(&(v, i)) {
                    return Err(Error::Shape(format!("missing edge ({v}, {i})")));
                }
            }
        }
        Ok(Self { dim, ring, vertices, edges })
    }

    /// Every square must commute.
    pub fn validate(&self) -> Result<()> {
        for v in 0..self.num_vertices() {
            for i in 0..self.dim {
                for j in i + 1..self.dim {
                    if v & (1 << i) != 0 || v & (1 << j) != 0 {
                        continue;
                    }
                    let a = self.edge(v | 1 << i, j).compose(self.edge(v, i))?;
                    let b = self.edge(v | 1 << j, i).compose(self.edge(v, j))?;
                    if !a.same_as(&b) {
                        return Err(Error::NonCommutingCube(format!("square at vertex {v} in directions {i}, {j}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        1 << self.dim
    }

    pub fn full(&self) -> usize {
        self.num_vertices() - 1
    }

    pub fn vertex(&self, v: usize) -> &ChainComplex {
        &self.vertices[v]
    }

    pub fn vertex_arc(&self, v: usize) -> Arc<ChainComplex> {
        self.vertices[v].clone()
    }

    pub fn edge(&self, v: usize, i: usize) -> &ChainMap {
        &self.edges[&(v, i)]
    }

    /// Composite `v -> w` for `v ⊆ w`, adding the missing coordinates in increasing order.
    pub fn path(&self, v: usize, w: usize) -> Result<ChainMap> {
        if v & !w != 0 {
            return Err(Error::Shape(format!("{v} is not below {w}")));
        }
        let mut map = ChainMap::identity_arc(self.vertices[v].clone());
        let mut cur = v;
        for i in 0..self.dim {
            if w & (1 << i) != 0 && cur & (1 << i) == 0 {
                map = self.edge(cur, i).compose(&map)?;
                cur |= 1 << i;
            }
        }
        Ok(map)
    }

    /// Colimit over the punctured cube together with the latching map into the terminal vertex.
    pub fn latching(&self) -> Result<Latching> {
        let full = self.full();
        let punctured: Vec<usize> = (0..full).collect();
        let parts: Vec<&ChainComplex> = punctured.iter().map(|v| &*self.vertices[*v]).collect();
        let sum = Arc::new(ChainComplex::direct_sum(&parts, self.ring)?);
        let degrees = sum.degrees();
        let offsets: BTreeMap<i64, Vec<usize>> =
            degrees.iter().map(|n| (*n, ChainComplex::sum_offsets(&parts, *n))).collect();

        let mut rel: BTreeMap<i64, ExactMatrix> = BTreeMap::new();
        for &n in &degrees {
            let mut cols: Vec<ExactMatrix> = vec![];
            for &v in &punctured {
                for i in 0..self.dim {
                    let w = v | 1 << i;
                    if v & (1 << i) != 0 || w == full {
                        continue;
                    }
                    let rv = self.vertices[v].rank(n);
                    if rv == 0 {
                        continue;
                    }
                    let mut block = ExactMatrix::zeros(self.ring, sum.rank(n), rv);
                    block.set_block(offsets[&n][v], 0, &ExactMatrix::identity(self.ring, rv));
                    block.set_block(offsets[&n][w], 0, &self.edge(v, i).component(n).neg());
                    cols.push(block);
                }
            }
            let m = cols
                .into_iter()
                .fold(ExactMatrix::zeros(self.ring, sum.rank(n), 0), |acc, b| acc.hstack(&b));
            rel.insert(n, m);
        }
        let quotient = quotient(&sum, &rel)?;

        let mut paths = BTreeMap::new();
        for &v in &punctured {
            paths.insert(v, self.path(v, full)?);
        }
        let latch = Latching { quotient, sum, offsets, punctured, map: None };
        let map = latch.map_out(&paths, self.vertex_arc(full))?;
        Ok(Latching { map: Some(map), ..latch })
    }
}

#[derive(Clone, Debug)]
pub struct Latching {
    pub quotient: Quotient,
    sum: Arc<ChainComplex>,
    offsets: BTreeMap<i64, Vec<usize>>,
    punctured: Vec<usize>,
    map: Option<ChainMap>,
}

impl Latching {
    pub fn object(&self) -> &ChainComplex {
        &self.quotient.complex
    }

    pub fn object_arc(&self) -> Arc<ChainComplex> {
        self.quotient.complex.clone()
    }

    /// The latching map into the terminal vertex.
    pub fn map(&self) -> &ChainMap {
        self.map.as_ref().expect("latching map is built with the object")
    }

    /// Induced map out of the latching object from maps on every punctured vertex; they must form
    /// a cocone (checked through descent).
    pub fn map_out(&self, vertex_maps: &BTreeMap<usize, ChainMap>, target: Arc<ChainComplex>) -> Result<ChainMap> {
        let ring = self.sum.ring();
        let mut comps = BTreeMap::new();
        for n in self.sum.degrees() {
            let mut m = ExactMatrix::zeros(ring, target.rank(n), self.sum.rank(n));
            for &v in &self.punctured {
                let Some(h) = vertex_maps.get(&v) else {
                    return Err(Error::InvalidInput(format!("no map given on vertex {v}")));
                };
                if let Some(c) = h.component_ref(n) {
                    m.set_block(0, self.offsets[&n][v], c);
                }
            }
            comps.insert(n, m);
        }
        let h = ChainMap::new_unchecked(self.sum.clone(), target, comps);
        self.quotient.induced(&h)
    }
}

#[derive(Clone, Debug)]
pub enum CubeFactor {
    Fixed(ChainComplex),
    Arrow(ChainMap),
}

/// A cube whose vertices are tensor products, with the tensor data of every vertex kept.
#[derive(Clone, Debug)]
pub struct TensorCube {
    pub cube: ComplexCube,
    pub tensors: Vec<TensorComplex>,
    /// For each cube coordinate, the position of its arrow in the factor list.
    pub arrow_positions: Vec<usize>,
}

/// The cube `⊗_k F_k` where each `Arrow` factor contributes one coordinate.
pub fn tensor_cube(factors: &[CubeFactor]) -> Result<TensorCube> {
    let ring = match factors.first() {
        Some(CubeFactor::Fixed(c)) => c.ring(),
        Some(CubeFactor::Arrow(f)) => f.source().ring(),
        None => Ring::Rationals,
    };
    let arrow_positions: Vec<usize> =
        factors.iter().enumerate().filter(|(_, f)| matches!(f, CubeFactor::Arrow(_))).map(|(i, _)| i).collect();
    let dim = arrow_positions.len();
    let identities: Vec<Option<(ChainMap, ChainMap)>> = factors
        .iter()
        .map(|f| match f {
            CubeFactor::Fixed(_) => None,
            CubeFactor::Arrow(a) => {
                Some((ChainMap::identity_arc(a.source_arc()), ChainMap::identity_arc(a.target_arc())))
            }
        })
        .collect();
    let fixed_ids: Vec<Option<ChainMap>> = factors
        .iter()
        .map(|f| match f {
            CubeFactor::Fixed(c) => Some(ChainMap::identity(c)),
            CubeFactor::Arrow(_) => None,
        })
        .collect();

    let choose = |v: usize| -> Vec<&ChainComplex> {
        let mut k = 0;
        factors
            .iter()
            .map(|f| match f {
                CubeFactor::Fixed(c) => c,
                CubeFactor::Arrow(a) => {
                    let bit = v & (1 << k) != 0;
                    k += 1;
                    if bit {
                        a.target()
                    } else {
                        a.source()
                    }
                }
            })
            .collect()
    };
    let mut tensors = vec![];
    for v in 0..1usize << dim {
        tensors.push(tensor_many(&choose(v))?);
    }
    let mut edges = BTreeMap::new();
    for v in 0..1usize << dim {
        for i in 0..dim {
            if v & (1 << i) != 0 {
                continue;
            }
            let mut maps: Vec<&ChainMap> = vec![];
            let mut k = 0;
            for (pos, f) in factors.iter().enumerate() {
                match f {
                    CubeFactor::Fixed(_) => maps.push(fixed_ids[pos].as_ref().unwrap()),
                    CubeFactor::Arrow(a) => {
                        let (ids, idt) = identities[pos].as_ref().unwrap();
                        maps.push(if k == i {
                            a
                        } else if v & (1 << k) != 0 {
                            idt
                        } else {
                            ids
                        });
                        k += 1;
                    }
                }
            }
            edges.insert((v, i), ChainMap::tensor_between(&tensors[v], &tensors[v | 1 << i], &maps));
        }
    }
    let vertices = tensors.iter().map(|t| Arc::new(t.complex.clone())).collect();
    let cube = ComplexCube::new_unchecked(ring, dim, vertices, edges)?;
    Ok(TensorCube { cube, tensors, arrow_positions })
}

/// Latching map of the tensor cube of `factors`.
pub fn cube_latching_map(factors: &[CubeFactor]) -> Result<ChainMap> {
    let tc = tensor_cube(factors)?;
    Ok(tc.cube.latching()?.map().clone())
}

/// `f □ g`, the map from `B⊗C ∪_{A⊗C} A⊗D` to `B⊗D`.
pub fn pushout_product(f: &ChainMap, g: &ChainMap) -> Result<ChainMap> {
    cube_latching_map(&[CubeFactor::Arrow(f.clone()), CubeFactor::Arrow(g.clone())])
}

/// `f^{□t}` by iterated pushout-products; `t = 0` gives `0 -> unit`.
pub fn pushout_product_power(f: &ChainMap, t: usize) -> Result<ChainMap> {
    let ring = f.source().ring();
    if t == 0 {
        return Ok(ChainMap::zero(&ChainComplex::zero(ring), &ChainComplex::unit(ring)));
    }
    let mut h = f.clone();
    for _ in 1..t {
        h = pushout_product(&h, f)?;
    }
    Ok(h)
}
