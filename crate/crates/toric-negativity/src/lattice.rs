//! Square-lattice graphs with one qubit per edge.
//!
//! Edge indexing on the torus: edge id `2·(y·Lx + x) + o`, where `o = 0` is the
//! horizontal edge from vertex `(x, y)` to `(x+1, y)` and `o = 1` the vertical
//! edge from `(x, y)` to `(x, y+1)`. Planar lattices use the same ordering with
//! the missing edges of the last column/row skipped.
//!
//! Face `(x, y)` has corners `(x, y)` and `(x+1, y+1)`; its boundary is
//! `h(x,y), h(x,y+1), v(x,y), v(x+1,y)`. Star `(x, y)` is
//! `h(x,y), h(x-1,y), v(x,y), v(x,y-1)`.

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// Bit vector over edges (or vertices/faces), one bit per index.
pub type Bits = BitVec<u64, Lsb0>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    /// Degenerate wrap would double-cover edges.
    #[error("invalid lattice {lx}x{ly}: both dimensions must be at least 2")]
    InvalidDimensions { lx: usize, ly: usize },
    #[error("edge {edge} out of range for a lattice with {n} edges")]
    EdgeOutOfRange { edge: usize, n: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Torus,
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub tail: Vertex,
    pub head: Vertex,
    pub orientation: Orientation,
}

#[derive(Debug, Clone)]
pub struct Lattice {
    topology: Topology,
    lx: usize,
    ly: usize,
    edges: Vec<Edge>,
    /// Raw slot `2·(y·Lx+x)+o` to compact edge id.
    slots: Vec<Option<usize>>,
    stars: Vec<Vec<usize>>,
    faces: Vec<Vec<usize>>,
    face_coords: Vec<(usize, usize)>,
    edge_faces: Vec<Vec<Face>>,
}

impl Lattice {
    pub fn build_torus(lx: usize, ly: usize) -> Result<Self, LatticeError> {
        Self::build(Topology::Torus, lx, ly)
    }

    pub fn build_planar(lx: usize, ly: usize) -> Result<Self, LatticeError> {
        Self::build(Topology::Planar, lx, ly)
    }

    pub fn build(topology: Topology, lx: usize, ly: usize) -> Result<Self, LatticeError> {
        if lx < 2 || ly < 2 {
            return Err(LatticeError::InvalidDimensions { lx, ly });
        }
        let torus = topology == Topology::Torus;
        let mut edges = Vec::new();
        let mut slots = vec![None; 2 * lx * ly];
        for y in 0..ly {
            for x in 0..lx {
                let v = Vertex(y * lx + x);
                if torus || x + 1 < lx {
                    slots[2 * (y * lx + x)] = Some(edges.len());
                    let head = Vertex(y * lx + (x + 1) % lx);
                    edges.push(Edge { tail: v, head, orientation: Orientation::Horizontal });
                }
                if torus || y + 1 < ly {
                    slots[2 * (y * lx + x) + 1] = Some(edges.len());
                    let head = Vertex(((y + 1) % ly) * lx + x);
                    edges.push(Edge { tail: v, head, orientation: Orientation::Vertical });
                }
            }
        }
        let mut lat = Lattice {
            topology,
            lx,
            ly,
            edges,
            slots,
            stars: Vec::new(),
            faces: Vec::new(),
            face_coords: Vec::new(),
            edge_faces: Vec::new(),
        };
        let (x, y) = (lx as isize, ly as isize);
        lat.stars = (0..y)
            .flat_map(|j| (0..x).map(move |i| (i, j)))
            .map(|(i, j)| {
                [lat.h(i, j), lat.h(i - 1, j), lat.v(i, j), lat.v(i, j - 1)]
                    .into_iter()
                    .flatten()
                    .collect()
            })
            .collect();
        let (fx, fy) = if torus { (x, y) } else { (x - 1, y - 1) };
        for j in 0..fy {
            for i in 0..fx {
                let support = [lat.h(i, j), lat.h(i, j + 1), lat.v(i, j), lat.v(i + 1, j)];
                lat.faces.push(support.into_iter().flatten().collect());
                lat.face_coords.push((i as usize, j as usize));
            }
        }
        lat.edge_faces = vec![Vec::new(); lat.edges.len()];
        for (f, support) in lat.faces.iter().enumerate() {
            for &e in support {
                lat.edge_faces[e].push(Face(f));
            }
        }
        Ok(lat)
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    /// Number of edges (qubits).
    pub fn n(&self) -> usize {
        self.edges.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.lx * self.ly
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Number of independent non-contractible loop directions (2 on the torus).
    pub fn kappa(&self) -> usize {
        match self.topology {
            Topology::Torus => 2,
            Topology::Planar => 0,
        }
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_coords(&self, v: Vertex) -> (usize, usize) {
        (v.0 % self.lx, v.0 / self.lx)
    }

    pub fn face_coords(&self, f: Face) -> (usize, usize) {
        self.face_coords[f.0]
    }

    fn slot(&self, x: isize, y: isize, o: usize) -> Option<usize> {
        let (lx, ly) = (self.lx as isize, self.ly as isize);
        let (x, y) = match self.topology {
            Topology::Torus => (x.rem_euclid(lx), y.rem_euclid(ly)),
            Topology::Planar if (0..lx).contains(&x) && (0..ly).contains(&y) => (x, y),
            Topology::Planar => return None,
        };
        self.slots[2 * (y * lx + x) as usize + o]
    }

    /// Horizontal edge from `(x, y)` to `(x+1, y)`, wrapping on the torus.
    pub fn h(&self, x: isize, y: isize) -> Option<usize> {
        self.slot(x, y, 0)
    }

    /// Vertical edge from `(x, y)` to `(x, y+1)`, wrapping on the torus.
    pub fn v(&self, x: isize, y: isize) -> Option<usize> {
        self.slot(x, y, 1)
    }

    /// Edges incident to `v`.
    pub fn star_support(&self, v: Vertex) -> &[usize] {
        &self.stars[v.0]
    }

    /// Boundary edges of face `p`.
    pub fn plaquette_support(&self, p: Face) -> &[usize] {
        &self.faces[p.0]
    }

    /// Faces whose boundary contains `e` (2 on the torus, at most 2 on planar).
    pub fn faces_of_edge(&self, e: usize) -> &[Face] {
        &self.edge_faces[e]
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        (0..self.num_vertices()).map(Vertex)
    }

    pub fn face_ids(&self) -> impl Iterator<Item = Face> {
        (0..self.num_faces()).map(Face)
    }

    /// All edges of vertex column `x`: `h(x, y)` and `v(x, y)` for every `y`.
    pub fn column(&self, x: isize) -> Vec<usize> {
        (0..self.ly as isize)
            .flat_map(|y| [self.h(x, y), self.v(x, y)])
            .flatten()
            .collect()
    }

    /// All edges incident to any vertex in `vertices`.
    pub fn star_union(&self, vertices: &[(isize, isize)]) -> BTreeSet<usize> {
        vertices
            .iter()
            .flat_map(|&(x, y)| {
                [self.h(x, y), self.h(x - 1, y), self.v(x, y), self.v(x, y - 1)]
            })
            .flatten()
            .collect()
    }

    pub fn check_edge(&self, e: usize) -> Result<(), LatticeError> {
        if e < self.n() {
            Ok(())
        } else {
            Err(LatticeError::EdgeOutOfRange { edge: e, n: self.n() })
        }
    }

    /// Direct-lattice step of an edge: (tail, head, displacement).
    fn direct_step(&self, e: usize) -> (usize, usize, (i64, i64)) {
        let edge = self.edges[e];
        let d = match edge.orientation {
            Orientation::Horizontal => (1, 0),
            Orientation::Vertical => (0, 1),
        };
        (edge.tail.0, edge.head.0, d)
    }

    /// Dual-lattice step across an edge, between its two faces. `None` when the
    /// edge has fewer than two faces (planar rim).
    fn dual_step(&self, e: usize) -> Option<(usize, usize, (i64, i64))> {
        if self.topology != Topology::Torus {
            return None;
        }
        let (x, y) = self.vertex_coords(self.edges[e].tail);
        let face = |i: usize, j: usize| (j % self.ly) * self.lx + (i % self.lx);
        Some(match self.edges[e].orientation {
            Orientation::Horizontal => (face(x, y + self.ly - 1), face(x, y), (0, 1)),
            Orientation::Vertical => (face(x + self.lx - 1, y), face(x, y), (1, 0)),
        })
    }
}

/// A labelled set of edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub label: String,
    pub edges: BTreeSet<usize>,
}

impl Region {
    pub fn new(label: impl Into<String>, edges: impl IntoIterator<Item = usize>) -> Self {
        Region { label: label.into(), edges: edges.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.contains(&e)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().copied()
    }

    pub fn to_bits(&self, n: usize) -> Bits {
        let mut b = bitvec![u64, Lsb0; 0; n];
        for &e in &self.edges {
            b.set(e, true);
        }
        b
    }

    /// Complement within a lattice.
    pub fn complement(&self, lat: &Lattice, label: impl Into<String>) -> Region {
        Region::new(label, (0..lat.n()).filter(|e| !self.contains(*e)))
    }

    pub fn union(&self, other: &Region, label: impl Into<String>) -> Region {
        Region::new(label, self.edges.union(&other.edges).copied())
    }
}

/// Pairwise disjoint regions covering every edge. Empty regions are allowed.
#[derive(Debug, Clone)]
pub struct Partition {
    regions: Vec<Region>,
    owner: Vec<usize>,
}

impl Partition {
    pub fn new(lat: &Lattice, regions: Vec<Region>) -> Result<Self, LatticeError> {
        let mut owner = vec![usize::MAX; lat.n()];
        let mut labels = BTreeSet::new();
        for (i, r) in regions.iter().enumerate() {
            if !labels.insert(r.label.as_str()) {
                return Err(LatticeError::InvalidPartition(format!(
                    "duplicate region label {:?}",
                    r.label
                )));
            }
            for e in r.iter() {
                lat.check_edge(e)?;
                if owner[e] != usize::MAX {
                    return Err(LatticeError::InvalidPartition(format!(
                        "edge {e} is in both {:?} and {:?}",
                        regions[owner[e]].label, r.label
                    )));
                }
                owner[e] = i;
            }
        }
        if let Some(e) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(LatticeError::InvalidPartition(format!("edge {e} is in no region")));
        }
        Ok(Partition { regions, owner })
    }

    /// Bipartition `A` vs everything else (labelled `B`).
    pub fn bipartition(lat: &Lattice, a: &Region) -> Result<Self, LatticeError> {
        Self::new(lat, vec![a.clone(), a.complement(lat, "B")])
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, label: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.label == label)
    }

    /// Index of the region holding `e`.
    pub fn owner(&self, e: usize) -> usize {
        self.owner[e]
    }

    fn regions_touching(&self, support: &[usize]) -> BTreeSet<usize> {
        support.iter().map(|&e| self.owner[e]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Star,
    Plaquette,
}

/// A stabilizer whose support meets three or more regions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: OperatorKind,
    pub index: usize,
    pub regions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryComponent {
    pub plaquette_count: usize,
    pub faces: Vec<usize>,
}

/// Boundary plaquettes between one unordered pair of regions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairBoundary {
    pub regions: (String, String),
    pub components: Vec<BoundaryComponent>,
    pub total_boundary_plaquettes: usize,
}

impl PairBoundary {
    pub fn counts(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.plaquette_count).collect()
    }

    pub fn faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.iter().flat_map(|c| c.faces.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub pairs: Vec<PairBoundary>,
    pub star_violations: Vec<Violation>,
    pub plaquette_violations: Vec<Violation>,
}

impl BoundaryReport {
    /// Boundary between two labelled regions, in either order.
    pub fn between(&self, a: &str, b: &str) -> Option<&PairBoundary> {
        self.pairs.iter().find(|p| {
            (p.regions.0 == a && p.regions.1 == b) || (p.regions.0 == b && p.regions.1 == a)
        })
    }

    pub fn n_between(&self, a: &str, b: &str) -> usize {
        self.between(a, b).map_or(0, |p| p.total_boundary_plaquettes)
    }
}

/// Groups faces into components under the shares-an-edge relation.
fn face_components(lat: &Lattice, faces: &BTreeSet<usize>) -> Vec<BoundaryComponent> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in faces {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            for &e in lat.plaquette_support(Face(f)) {
                for &Face(g) in lat.faces_of_edge(e) {
                    if faces.contains(&g) && seen.insert(g) {
                        comp.push(g);
                        queue.push_back(g);
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(BoundaryComponent { plaquette_count: comp.len(), faces: comp });
    }
    out
}

/// Boundary plaquettes (faces meeting both regions) for every region pair,
/// plus stabilizers touching three or more regions.
pub fn boundary_report(lat: &Lattice, partition: &Partition) -> BoundaryReport {
    let regions = partition.regions();
    let mut per_pair: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    let mut plaquette_violations = Vec::new();
    for f in lat.face_ids() {
        let touched: Vec<usize> =
            partition.regions_touching(lat.plaquette_support(f)).into_iter().collect();
        for (i, &a) in touched.iter().enumerate() {
            for &b in &touched[i + 1..] {
                per_pair.entry((a, b)).or_default().insert(f.0);
            }
        }
        if touched.len() >= 3 {
            plaquette_violations.push(Violation {
                kind: OperatorKind::Plaquette,
                index: f.0,
                regions: touched.iter().map(|&r| regions[r].label.clone()).collect(),
            });
        }
    }
    let star_violations = lat
        .vertices()
        .filter_map(|v| {
            let touched = partition.regions_touching(lat.star_support(v));
            (touched.len() >= 3).then(|| Violation {
                kind: OperatorKind::Star,
                index: v.0,
                regions: touched.iter().map(|&r| regions[r].label.clone()).collect(),
            })
        })
        .collect();
    let pairs = per_pair
        .into_iter()
        .map(|((a, b), faces)| PairBoundary {
            regions: (regions[a].label.clone(), regions[b].label.clone()),
            total_boundary_plaquettes: faces.len(),
            components: face_components(lat, &faces),
        })
        .collect();
    BoundaryReport { pairs, star_violations, plaquette_violations }
}

/// Boundary plaquettes between two disjoint regions that need not cover the lattice.
pub fn boundary_between(lat: &Lattice, a: &Region, b: &Region) -> PairBoundary {
    let faces: BTreeSet<usize> = lat
        .face_ids()
        .filter(|&f| {
            let s = lat.plaquette_support(f);
            s.iter().any(|&e| a.contains(e)) && s.iter().any(|&e| b.contains(e))
        })
        .map(|f| f.0)
        .collect();
    PairBoundary {
        regions: (a.label.clone(), b.label.clone()),
        total_boundary_plaquettes: faces.len(),
        components: face_components(lat, &faces),
    }
}

/// Ok iff no star or plaquette acts on three or more regions.
pub fn validate_two_region_rule(
    lat: &Lattice,
    partition: &Partition,
) -> Result<(), Vec<Violation>> {
    let report = boundary_report(lat, partition);
    let mut v = report.star_violations;
    v.extend(report.plaquette_violations);
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Which homology classes (mod 2) the cycles of a graph span.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Winding {
    pub horizontal: bool,
    pub vertical: bool,
    /// The class winding once in each direction.
    pub diagonal: bool,
}

impl Winding {
    pub fn any(&self) -> bool {
        self.horizontal || self.vertical || self.diagonal
    }

    /// Mod-2 span of the winding numbers of a set of cycles.
    fn from_cycles(cycles: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let classes: BTreeSet<(bool, bool)> = cycles
            .into_iter()
            .map(|(wx, wy)| (wx.rem_euclid(2) == 1, wy.rem_euclid(2) == 1))
            .filter(|&(h, v)| h || v)
            .collect();
        if classes.len() >= 2 {
            return Winding { horizontal: true, vertical: true, diagonal: true };
        }
        let has = |c| classes.contains(&c);
        Winding { horizontal: has((true, false)), vertical: has((false, true)), diagonal: has((true, true)) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contractibility {
    /// No cycle of the region's edges winds the torus.
    pub contractible: bool,
    /// Winding classes of cycles built from the region's edges.
    pub direct: Winding,
    /// Winding classes of dual cycles crossing only the region's edges.
    pub dual: Winding,
}

impl Contractibility {
    /// Neither direct nor dual cycles wind.
    pub fn fully_contractible(&self) -> bool {
        !self.direct.any() && !self.dual.any()
    }
}

/// Union-find over graph nodes tracking integer displacement to the root.
struct DisplacementForest {
    parent: Vec<usize>,
    offset: Vec<(i64, i64)>,
}

impl DisplacementForest {
    fn new(n: usize) -> Self {
        DisplacementForest { parent: (0..n).collect(), offset: vec![(0, 0); n] }
    }

    fn find(&mut self, u: usize) -> (usize, (i64, i64)) {
        let p = self.parent[u];
        if p == u {
            return (u, (0, 0));
        }
        let (root, d) = self.find(p);
        let o = self.offset[u];
        self.offset[u] = (o.0 + d.0, o.1 + d.1);
        self.parent[u] = root;
        (root, self.offset[u])
    }

    /// Adds a step `u -> w` with displacement `d`. Returns the winding numbers of
    /// the fundamental cycle it closes, if any.
    fn add(&mut self, u: usize, w: usize, d: (i64, i64), period: (i64, i64)) -> Option<(i64, i64)> {
        let (ru, pu) = self.find(u);
        let (rw, pw) = self.find(w);
        if ru != rw {
            self.parent[rw] = ru;
            self.offset[rw] = (pu.0 + d.0 - pw.0, pu.1 + d.1 - pw.1);
            None
        } else {
            let dx = pu.0 + d.0 - pw.0;
            let dy = pu.1 + d.1 - pw.1;
            Some((dx / period.0, dy / period.1))
        }
    }
}

/// Contractibility and winding classes of a region.
pub fn is_contractible(lat: &Lattice, r: &Region) -> Contractibility {
    let period = (lat.lx() as i64, lat.ly() as i64);
    let mut forest = DisplacementForest::new(lat.num_vertices());
    let direct: Vec<(i64, i64)> = r
        .iter()
        .filter_map(|e| {
            let (u, w, d) = lat.direct_step(e);
            forest.add(u, w, d, period)
        })
        .collect();
    let mut dual_forest = DisplacementForest::new(lat.num_faces());
    let dual: Vec<(i64, i64)> = r
        .iter()
        .filter_map(|e| lat.dual_step(e))
        .filter_map(|(u, w, d)| dual_forest.add(u, w, d, period))
        .collect();
    let direct = Winding::from_cycles(direct);
    let dual = Winding::from_cycles(dual);
    Contractibility { contractible: !direct.any(), direct, dual }
}

/// Mod-2 vertex boundary of an edge set: vertices of odd degree.
pub fn vertex_boundary(lat: &Lattice, edges: impl IntoIterator<Item = usize>) -> Bits {
    let mut b = bitvec![u64, Lsb0; 0; lat.num_vertices()];
    for e in edges {
        let edge = lat.edge(e);
        let t = !b[edge.tail.0];
        b.set(edge.tail.0, t);
        let h = !b[edge.head.0];
        b.set(edge.head.0, h);
    }
    b
}
