//! Edge-statistics clustering on a Delaunay triangulation and boundary
//! extraction.
//!
//! Edges are labelled short, long or other against the global mean and
//! population standard deviation of all edge lengths. Short edges always
//! join their endpoints; long edges never do; an other edge `(u, v)` joins
//! them when some common neighbour `w` is reached from both `u` and `v` by
//! non-long edges. A triangle survives into its cluster only if none of its
//! edges is long, and a cluster's boundary is the set of surviving-triangle
//! edges used by exactly one surviving triangle.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{orient2d_raw, Edge, EdgeKey, PointCloud, Triangle};
use crate::triangulate::Triangulation;

/// Default number of standard deviations separating short/long from other.
pub const DEFAULT_M: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("edge statistics need at least one edge")]
    NoEdges,
    #[error("deviation multiplier m must be finite and non-negative, got {0}")]
    InvalidMultiplier(f64),
    #[error("boundary vertex {vertex} has odd degree {degree}")]
    NonManifoldBoundary { vertex: usize, degree: usize },
    #[error("face {face:?} belongs to {count} tetrahedra")]
    InvalidComplex { face: [usize; 3], count: usize },
    #[error("tetrahedron {tet} references missing vertex {vertex}")]
    MissingVertex { tet: usize, vertex: usize },
    #[error("tetrahedron {0} repeats a vertex")]
    RepeatedVertex(usize),
}

/// Mean and population standard deviation of edge lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeStats {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

pub fn edge_stats<I>(lengths: I) -> Result<EdgeStats, ClusterError>
where
    I: IntoIterator<Item = f64>,
{
    let lengths: Vec<f64> = lengths.into_iter().collect();
    if lengths.is_empty() {
        return Err(ClusterError::NoEdges);
    }
    let n = lengths.len() as f64;
    let mean = lengths.iter().sum::<f64>() / n;
    let var = lengths.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n;
    Ok(EdgeStats {
        mean,
        std: var.sqrt(),
        count: lengths.len(),
    })
}

/// Statistics over every edge of a triangulation.
pub fn triangulation_edge_stats(tri: &Triangulation) -> Result<EdgeStats, ClusterError> {
    edge_stats(tri.edges_of().iter().map(|e| e.edge.length))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeLabel {
    Short,
    Long,
    Other,
}

/// Relative width of the band around each threshold that still counts as
/// `Other`. Lengths that agree up to rounding (a regular grid, say) would
/// otherwise be split into short and long by a standard deviation made of
/// rounding error alone.
pub const THRESHOLD_TOLERANCE: f64 = 1e-12;

impl EdgeLabel {
    /// Strict comparison against `mean ± m·std`, widened by
    /// [`THRESHOLD_TOLERANCE`]` · mean`; lengths on a threshold are `Other`.
    pub fn classify(length: f64, stats: &EdgeStats, m: f64) -> Self {
        let slack = THRESHOLD_TOLERANCE * stats.mean;
        if length < stats.mean - m * stats.std - slack {
            EdgeLabel::Short
        } else if length > stats.mean + m * stats.std + slack {
            EdgeLabel::Long
        } else {
            EdgeLabel::Other
        }
    }
}

/// Per-edge labels for one triangulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeClass {
    pub m: f64,
    pub stats: EdgeStats,
    labels: BTreeMap<EdgeKey, EdgeLabel>,
}

impl EdgeClass {
    pub fn label(&self, e: EdgeKey) -> Option<EdgeLabel> {
        self.labels.get(&e).copied()
    }

    pub fn labels(&self) -> &BTreeMap<EdgeKey, EdgeLabel> {
        &self.labels
    }

    pub fn count(&self, label: EdgeLabel) -> usize {
        self.labels.values().filter(|&&l| l == label).count()
    }

    fn is_long(&self, u: usize, v: usize) -> bool {
        self.labels.get(&EdgeKey::new(u, v)) == Some(&EdgeLabel::Long)
    }

    /// Incident edges of `v` grouped by label, each group ordered by length.
    pub fn at_vertex(&self, tri: &Triangulation, v: usize) -> BTreeMap<EdgeLabel, Vec<EdgeKey>> {
        let mut groups: BTreeMap<EdgeLabel, Vec<EdgeKey>> = BTreeMap::new();
        for (&k, &l) in self.labels.iter().filter(|(k, _)| k.contains(v)) {
            groups.entry(l).or_default().push(k);
        }
        for list in groups.values_mut() {
            list.sort_by(|a, b| tri.edge_length(*a).total_cmp(&tri.edge_length(*b)));
        }
        groups
    }
}

pub fn classify_edges(tri: &Triangulation, stats: &EdgeStats, m: f64) -> Result<EdgeClass, ClusterError> {
    if !(m.is_finite() && m >= 0.0) {
        return Err(ClusterError::InvalidMultiplier(m));
    }
    let labels = tri
        .edges_of()
        .iter()
        .map(|e| (e.edge.key(), EdgeLabel::classify(e.edge.length, stats, m)))
        .collect();
    Ok(EdgeClass {
        m,
        stats: *stats,
        labels,
    })
}

/// One cluster: its vertices and the triangles that survived clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub vertices: Vec<usize>,
    pub triangles: Vec<Triangle>,
}

impl Cluster {
    /// Fewer than three points or no surviving triangle: no boundary to fit.
    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3 || self.triangles.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPartition {
    /// Cluster id of every vertex.
    pub labels: Vec<usize>,
    pub clusters: Vec<Cluster>,
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so representatives are deterministic
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Connected components under the short/other/long joining rules. Cluster
/// ids follow the smallest vertex index in each component.
pub fn form_clusters(tri: &Triangulation, classes: &EdgeClass) -> ClusterPartition {
    let n = tri.vertices().len();
    let adj = tri.vertex_neighbors();
    let mut sets = DisjointSets::new(n);

    for (&k, &label) in classes.labels() {
        let joins = match label {
            EdgeLabel::Short => true,
            EdgeLabel::Long => false,
            EdgeLabel::Other => shares_non_long_neighbor(&adj, classes, k.0, k.1),
        };
        if joins {
            sets.union(k.0, k.1);
        }
    }

    let mut ids = vec![usize::MAX; n];
    let mut labels = vec![0; n];
    let mut clusters: Vec<Cluster> = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for v in 0..n {
        let root = sets.find(v);
        if ids[root] == usize::MAX {
            ids[root] = clusters.len();
            clusters.push(Cluster {
                id: clusters.len(),
                vertices: Vec::new(),
                triangles: Vec::new(),
            });
        }
        labels[v] = ids[root];
        clusters[ids[root]].vertices.push(v);
    }

    for t in tri.triangles() {
        let [a, b, c] = t.0;
        let intra = labels[a] == labels[b] && labels[b] == labels[c];
        let no_long = t.edges().iter().all(|e| !classes.is_long(e.0, e.1));
        if intra && no_long {
            clusters[labels[a]].triangles.push(*t);
        }
    }
    ClusterPartition { labels, clusters }
}

fn shares_non_long_neighbor(adj: &[Vec<usize>], classes: &EdgeClass, u: usize, v: usize) -> bool {
    // both lists are sorted; merge-intersect
    let (mut i, mut j) = (0, 0);
    let (au, av) = (&adj[u], &adj[v]);
    while i < au.len() && j < av.len() {
        match au[i].cmp(&av[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let w = au[i];
                if !classes.is_long(u, w) && !classes.is_long(v, w) {
                    return true;
                }
                i += 1;
                j += 1;
            }
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    /// Cluster has fewer than three points or no surviving triangle.
    DegenerateCluster,
    /// Boundary loop has too few vertices for the requested spline order.
    LoopTooShort,
    /// The fit was rank deficient and used fewer control points than asked.
    ReducedControls,
    /// A quadrature node hit a point with a degenerate tangent plane.
    SingularPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdges {
    pub edges: Vec<Edge>,
    pub diagnostic: Option<Diagnostic>,
}

/// Edges used by exactly one of `triangles`.
pub fn extract_boundary_edges(triangles: &[Triangle], points: &PointCloud) -> BoundaryEdges {
    if triangles.is_empty() {
        return BoundaryEdges {
            edges: Vec::new(),
            diagnostic: Some(Diagnostic::DegenerateCluster),
        };
    }
    let mut counts: BTreeMap<EdgeKey, usize> = BTreeMap::new();
    for t in triangles {
        for e in t.edges() {
            *counts.entry(e).or_default() += 1;
        }
    }
    let edges = counts
        .into_iter()
        .filter(|&(_, c)| c == 1)
        .map(|(k, _)| Edge::new(k.0, k.1, points.point(k.0).distance(points.point(k.1))))
        .collect();
    BoundaryEdges {
        edges,
        diagnostic: None,
    }
}

/// A user-supplied tetrahedral complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetraComplex {
    pub vertices: Vec<[f64; 3]>,
    pub tetrahedra: Vec<[usize; 4]>,
}

/// Triangular faces that belong to exactly one tetrahedron, as sorted
/// vertex triples in ascending order.
pub fn extract_boundary_faces_3d(complex: &TetraComplex) -> Result<Vec<Triangle>, ClusterError> {
    let mut counts: BTreeMap<[usize; 3], usize> = BTreeMap::new();
    for (t, tet) in complex.tetrahedra.iter().enumerate() {
        if let Some(&v) = tet.iter().find(|&&v| v >= complex.vertices.len()) {
            return Err(ClusterError::MissingVertex { tet: t, vertex: v });
        }
        let distinct: BTreeSet<usize> = tet.iter().copied().collect();
        if distinct.len() != 4 {
            return Err(ClusterError::RepeatedVertex(t));
        }
        for skip in 0..4 {
            let mut face = [0; 3];
            let mut k = 0;
            for (i, &v) in tet.iter().enumerate() {
                if i != skip {
                    face[k] = v;
                    k += 1;
                }
            }
            face.sort_unstable();
            *counts.entry(face).or_default() += 1;
        }
    }
    if let Some((&face, &count)) = counts.iter().find(|(_, &c)| c > 2) {
        return Err(ClusterError::InvalidComplex { face, count });
    }
    Ok(counts
        .into_iter()
        .filter(|&(_, c)| c == 1)
        .map(|(f, _)| Triangle(f))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

/// A closed boundary cycle. The closing edge from the last vertex back to
/// the first is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub vertices: Vec<usize>,
    pub signed_area: f64,
    /// Number of other loops of the same boundary that enclose this one.
    pub depth: usize,
}

impl BoundaryLoop {
    pub fn orientation(&self) -> Orientation {
        if self.signed_area > 0.0 {
            Orientation::CounterClockwise
        } else {
            Orientation::Clockwise
        }
    }

    pub fn is_hole(&self) -> bool {
        self.depth % 2 == 1
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn positions(&self, points: &PointCloud) -> Vec<[f64; 2]> {
        self.vertices
            .iter()
            .map(|&v| {
                let p = points.point(v);
                [p.x(), p.y()]
            })
            .collect()
    }
}

/// Splits undirected boundary edges into closed cycles and orients them:
/// loops at even nesting depth counter-clockwise, holes clockwise.
///
/// At a vertex with more than two unused edges the walk takes the sharpest
/// clockwise turn relative to its direction of travel.
pub fn orient_cycles(boundary: &[EdgeKey], points: &PointCloud) -> Result<Vec<BoundaryLoop>, ClusterError> {
    let mut sorted: Vec<EdgeKey> = boundary.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let arcs: Vec<(usize, usize)> = sorted.iter().map(|k| (k.0, k.1)).collect();
    let cycles = trace_cycles(&arcs, points, false)?;
    Ok(orient_by_nesting(cycles, points))
}

/// Boundary loops of a set of counter-clockwise triangles.
///
/// Triangles may be given in either orientation. Boundary edges inherit
/// their direction from the single triangle that owns them, once that
/// triangle is made counter-clockwise, which keeps the interior on a known
/// side. Each cycle is traced
/// against that direction (interior on the right) so the sharpest clockwise
/// turn at a pinch vertex stays inside the same wedge of the region.
pub fn boundary_loops(triangles: &[Triangle], points: &PointCloud) -> Result<Vec<BoundaryLoop>, ClusterError> {
    let mut directed: BTreeMap<EdgeKey, Vec<(usize, usize)>> = BTreeMap::new();
    for t in triangles {
        let [a, mut b, mut c] = t.0;
        let (pa, pb, pc) = (points.point(a), points.point(b), points.point(c));
        if orient2d_raw([pa.x(), pa.y()], [pb.x(), pb.y()], [pc.x(), pc.y()]) < 0.0 {
            std::mem::swap(&mut b, &mut c);
        }
        for (u, v) in [(a, b), (b, c), (c, a)] {
            directed.entry(EdgeKey::new(u, v)).or_default().push((u, v));
        }
    }
    let arcs: Vec<(usize, usize)> = directed
        .values()
        .filter(|d| d.len() == 1)
        .map(|d| (d[0].1, d[0].0))
        .collect();
    let cycles = trace_cycles(&arcs, points, true)?;
    Ok(orient_by_nesting(cycles, points))
}

/// Walks edge-disjoint closed cycles. With `directed`, arc `(u, v)` may
/// only be traversed from `u` to `v`.
fn trace_cycles(arcs: &[(usize, usize)], points: &PointCloud, directed: bool) -> Result<Vec<Vec<usize>>, ClusterError> {
    // vertex -> (neighbour, arc id) for every traversal direction allowed
    let mut out: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    let mut degree: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (id, &(u, v)) in arcs.iter().enumerate() {
        out.entry(u).or_default().push((v, id));
        if !directed {
            out.entry(v).or_default().push((u, id));
        }
        degree.entry(u).or_default().0 += 1;
        degree.entry(v).or_default().1 += 1;
    }
    for (&v, &(o, i)) in &degree {
        let bad = if directed { o != i } else { (o + i) % 2 == 1 };
        if bad {
            return Err(ClusterError::NonManifoldBoundary { vertex: v, degree: o + i });
        }
    }

    let pos = |v: usize| {
        let p = points.point(v);
        [p.x(), p.y()]
    };
    let mut used = vec![false; arcs.len()];
    let mut cycles = Vec::new();
    for start_arc in 0..arcs.len() {
        if used[start_arc] {
            continue;
        }
        used[start_arc] = true;
        let (start, mut cur) = arcs[start_arc];
        let mut prev = start;
        let mut cycle = vec![start];
        while cur != start {
            cycle.push(cur);
            let back = sub(pos(prev), pos(cur));
            let next = out[&cur]
                .iter()
                .filter(|(_, id)| !used[*id])
                .map(|&(w, id)| (ccw_angle(back, sub(pos(w), pos(cur))), w, id))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .expect("balanced degrees guarantee an unused exit");
            used[next.2] = true;
            prev = cur;
            cur = next.1;
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Counter-clockwise angle from `from` to `to`, in (0, 2π].
fn ccw_angle(from: [f64; 2], to: [f64; 2]) -> f64 {
    let a = to[1].atan2(to[0]) - from[1].atan2(from[0]);
    let a = a.rem_euclid(2.0 * PI);
    if a == 0.0 {
        2.0 * PI
    } else {
        a
    }
}

pub fn signed_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

/// Crossing-number test; points on the polygon boundary are not handled.
pub fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn orient_by_nesting(cycles: Vec<Vec<usize>>, points: &PointCloud) -> Vec<BoundaryLoop> {
    let polys: Vec<Vec<[f64; 2]>> = cycles
        .iter()
        .map(|c| {
            c.iter()
                .map(|&v| {
                    let p = points.point(v);
                    [p.x(), p.y()]
                })
                .collect()
        })
        .collect();
    cycles
        .into_iter()
        .enumerate()
        .map(|(i, mut vertices)| {
            // an edge midpoint is never on another loop of a triangulation boundary
            let probe = {
                let (a, b) = (polys[i][0], polys[i][1]);
                [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
            };
            let depth = polys
                .iter()
                .enumerate()
                .filter(|&(j, poly)| j != i && point_in_polygon(probe, poly))
                .count();
            let mut area = signed_area(&polys[i]);
            let want_ccw = depth % 2 == 0;
            if (area > 0.0) != want_ccw {
                vertices[1..].reverse();
                area = -area;
            }
            BoundaryLoop {
                vertices,
                signed_area: area,
                depth,
            }
        })
        .collect()
}
