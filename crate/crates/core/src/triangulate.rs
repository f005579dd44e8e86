//! Incremental (Bowyer–Watson) Delaunay triangulation.
//!
//! Points are inserted in input order. The outside of the convex hull is
//! represented by "ghost" triangles that share a symbolic vertex at infinity,
//! so every hull edge has a neighbour and the cavity search never needs a
//! finite bounding triangle. A ghost triangle `(a, b, ∞)` conflicts with a new
//! point when the point lies strictly beyond the hull edge `a→b`, or on the
//! open segment `ab`.
//!
//! After insertion, edges whose quadrilateral is exactly cocircular are
//! flipped towards the diagonal with the smaller lowest endpoint index, so
//! the output does not depend on insertion history for those ties.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{incircle_raw, orient2d_raw, Edge, EdgeKey, GeometryError, PointCloud, Triangle};

const GHOST: usize = usize::MAX;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TriangulationError {
    #[error("need at least 3 distinct points, got {found}")]
    TooFewPoints { found: usize },
    #[error("all points are collinear")]
    Collinear,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
}

/// A 2D triangulation with counter-clockwise triangles and an edge index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Triangulation {
    vertices: PointCloud,
    triangles: Vec<Triangle>,
    edge_index: BTreeMap<EdgeKey, Vec<usize>>,
}

/// An undirected edge and the number of triangles it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeIncidence {
    pub edge: Edge,
    pub count: usize,
}

impl Triangulation {
    /// Wraps an externally supplied triangle list. Triangles are reoriented
    /// counter-clockwise; an edge shared by more than two triangles or a
    /// degenerate triangle is rejected.
    pub fn from_triangles(
        vertices: PointCloud,
        triangles: impl IntoIterator<Item = [usize; 3]>,
    ) -> Result<Self, TriangulationError> {
        let xy = vertices.xy()?;
        let mut tris = Vec::new();
        for [a, b, c] in triangles {
            if [a, b, c].iter().any(|&v| v >= xy.len()) {
                return Err(TriangulationError::InvalidComplex(format!(
                    "triangle ({a}, {b}, {c}) references a missing vertex"
                )));
            }
            let o = orient2d_raw(xy[a], xy[b], xy[c]);
            if o == 0.0 {
                return Err(TriangulationError::InvalidComplex(format!(
                    "triangle ({a}, {b}, {c}) is degenerate"
                )));
            }
            tris.push(if o > 0.0 { Triangle([a, b, c]) } else { Triangle([a, c, b]) });
        }
        let tri = Self::assemble(vertices, tris);
        if let Some((k, ts)) = tri.edge_index.iter().find(|(_, ts)| ts.len() > 2) {
            return Err(TriangulationError::InvalidComplex(format!(
                "edge {k} belongs to {} triangles",
                ts.len()
            )));
        }
        Ok(tri)
    }

    fn assemble(vertices: PointCloud, triangles: Vec<Triangle>) -> Self {
        let mut edge_index: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for e in tri.edges() {
                edge_index.entry(e).or_default().push(t);
            }
        }
        Triangulation {
            vertices,
            triangles,
            edge_index,
        }
    }

    pub fn vertices(&self) -> &PointCloud {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edge_index(&self) -> &BTreeMap<EdgeKey, Vec<usize>> {
        &self.edge_index
    }

    pub fn edge_length(&self, e: EdgeKey) -> f64 {
        self.vertices.point(e.0).distance(self.vertices.point(e.1))
    }

    /// Every distinct edge once, in ascending endpoint order, with its
    /// triangle count.
    pub fn edges_of(&self) -> Vec<EdgeIncidence> {
        self.edge_index
            .iter()
            .map(|(&k, ts)| EdgeIncidence {
                edge: Edge::new(k.0, k.1, self.edge_length(k)),
                count: ts.len(),
            })
            .collect()
    }

    /// Sorted adjacency lists of the edge graph.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for k in self.edge_index.keys() {
            adj[k.0].push(k.1);
            adj[k.1].push(k.0);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Delaunay triangulation of the whole cloud.
pub fn triangulate(cloud: &PointCloud) -> Result<Triangulation, TriangulationError> {
    let pts = cloud.xy()?;
    if pts.len() < 3 {
        return Err(TriangulationError::TooFewPoints { found: pts.len() });
    }
    let third = (2..pts.len())
        .find(|&k| orient2d_raw(pts[0], pts[1], pts[k]) != 0.0)
        .ok_or(TriangulationError::Collinear)?;

    let mut mesh = Mesh::new(&pts, [0, 1, third]);
    for v in (2..pts.len()).filter(|&v| v != third) {
        mesh.insert(v);
    }
    mesh.resolve_cocircular_ties();

    let triangles = mesh
        .tris
        .iter()
        .zip(&mesh.alive)
        .filter(|(t, &alive)| alive && t[2] != GHOST)
        .map(|(t, _)| Triangle(*t))
        .collect();
    Ok(Triangulation::assemble(cloud.clone(), triangles))
}

struct Mesh<'a> {
    pts: &'a [[f64; 2]],
    /// Vertex triples, counter-clockwise; ghosts keep `GHOST` in slot 2.
    tris: Vec<[usize; 3]>,
    /// `nbr[t][i]` is the triangle across the edge opposite `tris[t][i]`.
    nbr: Vec<[usize; 3]>,
    alive: Vec<bool>,
    free: Vec<usize>,
    /// Per-triangle visit stamp for cavity searches: `2 * epoch + in_conflict`.
    stamp: Vec<u64>,
    epoch: u64,
    last: usize,
}

struct CavityEdge {
    a: usize,
    b: usize,
    outside: usize,
}

impl<'a> Mesh<'a> {
    fn new(pts: &'a [[f64; 2]], seed: [usize; 3]) -> Self {
        let [a, mut b, mut c] = seed;
        if orient2d_raw(pts[a], pts[b], pts[c]) < 0.0 {
            std::mem::swap(&mut b, &mut c);
        }
        let tris = vec![[a, b, c], [b, a, GHOST], [c, b, GHOST], [a, c, GHOST]];
        let mut directed = HashMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for i in 0..3 {
                directed.insert((tri[(i + 1) % 3], tri[(i + 2) % 3]), t);
            }
        }
        let nbr = tris
            .iter()
            .map(|tri| {
                let mut n = [NONE; 3];
                for (i, slot) in n.iter_mut().enumerate() {
                    *slot = directed[&(tri[(i + 2) % 3], tri[(i + 1) % 3])];
                }
                n
            })
            .collect();
        Mesh {
            pts,
            tris,
            nbr,
            alive: vec![true; 4],
            free: Vec::new(),
            stamp: vec![0; 4],
            epoch: 0,
            last: 0,
        }
    }

    fn is_ghost(&self, t: usize) -> bool {
        self.tris[t][2] == GHOST
    }

    fn in_conflict(&self, t: usize, p: [f64; 2]) -> bool {
        let [a, b, c] = self.tris[t];
        if c == GHOST {
            let (pa, pb) = (self.pts[a], self.pts[b]);
            let o = orient2d_raw(pa, pb, p);
            o > 0.0 || (o == 0.0 && strictly_between(pa, pb, p))
        } else {
            incircle_raw(self.pts[a], self.pts[b], self.pts[c], p) > 0.0
        }
    }

    /// Visibility walk to a triangle containing `p`, or to the ghost beyond
    /// the first hull edge that separates `p` from the hull.
    fn locate(&self, p: [f64; 2]) -> usize {
        let mut t = self.last;
        if !self.alive[t] || self.is_ghost(t) {
            t = (0..self.tris.len())
                .find(|&t| self.alive[t] && !self.is_ghost(t))
                .expect("mesh always has a real triangle");
        }
        'walk: loop {
            let tri = self.tris[t];
            for i in 0..3 {
                let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                if orient2d_raw(self.pts[a], self.pts[b], p) < 0.0 {
                    t = self.nbr[t][i];
                    if self.is_ghost(t) {
                        return t;
                    }
                    continue 'walk;
                }
            }
            return t;
        }
    }

    fn insert(&mut self, v: usize) {
        let p = self.pts[v];
        let seed = self.locate(p);
        self.epoch += 1;
        let conflict_mark = 2 * self.epoch + 1;
        let clear_mark = 2 * self.epoch;

        let mut cavity = Vec::new();
        let mut boundary = Vec::new();
        let mut stack = vec![seed];
        self.stamp[seed] = conflict_mark;
        while let Some(t) = stack.pop() {
            cavity.push(t);
            for i in 0..3 {
                let n = self.nbr[t][i];
                let status = if self.stamp[n] == conflict_mark || self.stamp[n] == clear_mark {
                    self.stamp[n]
                } else {
                    let s = if self.in_conflict(n, p) { conflict_mark } else { clear_mark };
                    self.stamp[n] = s;
                    if s == conflict_mark {
                        stack.push(n);
                    }
                    s
                };
                if status == clear_mark {
                    let tri = self.tris[t];
                    boundary.push(CavityEdge {
                        a: tri[(i + 1) % 3],
                        b: tri[(i + 2) % 3],
                        outside: n,
                    });
                }
            }
        }

        for &t in &cavity {
            self.alive[t] = false;
            self.free.push(t);
        }

        // One new triangle (a, b, v) per cavity edge. The cavity boundary is a
        // simple cycle, so each vertex starts and ends exactly one edge.
        let ids: Vec<usize> = boundary.iter().map(|_| self.alloc()).collect();
        let by_start: HashMap<usize, usize> =
            boundary.iter().zip(&ids).map(|(e, &t)| (e.a, t)).collect();
        let by_end: HashMap<usize, usize> =
            boundary.iter().zip(&ids).map(|(e, &t)| (e.b, t)).collect();

        for (e, &t) in boundary.iter().zip(&ids) {
            let mut tri = [e.a, e.b, v];
            let mut nb = [by_start[&e.b], by_end[&e.a], e.outside];
            // keep the ghost vertex in the last slot
            let shift = tri.iter().position(|&x| x == GHOST).map_or(0, |i| (i + 1) % 3);
            tri.rotate_left(shift);
            nb.rotate_left(shift);
            self.tris[t] = tri;
            self.nbr[t] = nb;
            self.alive[t] = true;
            self.replace_neighbor(e.outside, e.a, e.b, t);
        }
        self.last = *ids
            .iter()
            .find(|&&t| !self.is_ghost(t))
            .unwrap_or(&ids[0]);
    }

    fn alloc(&mut self) -> usize {
        if let Some(t) = self.free.pop() {
            t
        } else {
            self.tris.push([NONE; 3]);
            self.nbr.push([NONE; 3]);
            self.alive.push(false);
            self.stamp.push(0);
            self.tris.len() - 1
        }
    }

    /// In triangle `t`, point the slot facing edge `{a, b}` at `to`.
    fn replace_neighbor(&mut self, t: usize, a: usize, b: usize, to: usize) {
        let tri = self.tris[t];
        for i in 0..3 {
            let (x, y) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
            if (x == a && y == b) || (x == b && y == a) {
                self.nbr[t][i] = to;
                return;
            }
        }
        unreachable!("triangle {t} does not contain edge {a}-{b}");
    }

    /// Flip exactly-cocircular interior edges towards the diagonal whose
    /// lowest endpoint index is smaller. Each flip strictly lowers the sum of
    /// edge minima, so the loop terminates.
    fn resolve_cocircular_ties(&mut self) {
        loop {
            let mut flipped = false;
            for t in 0..self.tris.len() {
                if !self.alive[t] || self.is_ghost(t) {
                    continue;
                }
                for i in 0..3 {
                    if self.try_flip(t, i) {
                        flipped = true;
                        break;
                    }
                }
            }
            if !flipped {
                break;
            }
        }
    }

    fn try_flip(&mut self, t: usize, i: usize) -> bool {
        let n = self.nbr[t][i];
        if self.is_ghost(n) {
            return false;
        }
        let tri = self.tris[t];
        let (v0, v1, v2) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
        let ntri = self.tris[n];
        let j = (0..3).find(|&j| self.nbr[n][j] == t).expect("symmetric adjacency");
        let w = ntri[j];
        if v0.min(w) >= v1.min(v2) {
            return false;
        }
        let pts = self.pts;
        if incircle_raw(pts[v0], pts[v1], pts[v2], pts[w]) != 0.0 {
            return false;
        }
        let a = self.nbr[t][(i + 2) % 3];
        let b = self.nbr[t][(i + 1) % 3];
        let c = self.nbr[n][(j + 1) % 3];
        let d = self.nbr[n][(j + 2) % 3];
        self.tris[t] = [v0, v1, w];
        self.nbr[t] = [c, n, a];
        self.tris[n] = [w, v2, v0];
        self.nbr[n] = [b, t, d];
        self.replace_neighbor(c, v1, w, t);
        self.replace_neighbor(b, v2, v0, n);
        true
    }
}

/// `p` is collinear with `a`, `b`; test whether it lies strictly inside the segment.
fn strictly_between(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    let axis = if a[0] != b[0] { 0 } else { 1 };
    let (lo, hi) = if a[axis] < b[axis] { (a[axis], b[axis]) } else { (b[axis], a[axis]) };
    lo < p[axis] && p[axis] < hi
}
