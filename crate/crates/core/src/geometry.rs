//! Point types and exact-sign predicates.
//!
//! Orientation and in-circle tests are evaluated with Shewchuk's adaptive
//! arithmetic, so the returned sign is exact for every pair of representable
//! `f64` inputs. Everything downstream (Delaunay insertion, boundary walking,
//! hole nesting) only ever branches on these signs.

use std::collections::HashMap;
use std::fmt;

use robust::Coord;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("expected {expected}-dimensional input, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("unsupported dimension {0}; only 2 and 3 are allowed")]
    UnsupportedDimension(usize),
    #[error("non-finite coordinate in point {index}")]
    NonFinite { index: usize },
    #[error("triangle is degenerate (collinear vertices)")]
    DegenerateTriangle,
}

/// Sign of a geometric determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(value: f64) -> Self {
        if value > 0.0 {
            Sign::Positive
        } else if value < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// A 2D or 3D point together with its row in the original input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: Vec<f64>,
    /// Position of the point in the input cloud.
    pub index: usize,
}

impl Point {
    pub fn new(coords: Vec<f64>, index: usize) -> Result<Self, GeometryError> {
        if coords.len() != 2 && coords.len() != 3 {
            return Err(GeometryError::UnsupportedDimension(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite { index });
        }
        Ok(Point { coords, index })
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Point {
            coords: vec![x, y],
            index: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    fn coord2(&self) -> Result<Coord<f64>, GeometryError> {
        if self.dim() != 2 {
            return Err(GeometryError::Dimension {
                expected: 2,
                found: self.dim(),
            });
        }
        Ok(Coord {
            x: self.coords[0],
            y: self.coords[1],
        })
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Undirected edge between two vertices, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, length: f64) -> Self {
        debug_assert_ne!(u, v);
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        Edge { a, b, length }
    }

    pub fn key(&self) -> EdgeKey {
        EdgeKey(self.a, self.b)
    }
}

/// Hashable endpoint pair of an undirected edge, smaller index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey(pub usize, pub usize);

impl EdgeKey {
    pub fn new(u: usize, v: usize) -> Self {
        if u < v {
            EdgeKey(u, v)
        } else {
            EdgeKey(v, u)
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0 == v || self.1 == v
    }

    pub fn other(&self, v: usize) -> usize {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// Three vertex indices. In a triangulation they are stored counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triangle(pub [usize; 3]);

impl Triangle {
    pub fn edges(&self) -> [EdgeKey; 3] {
        let [a, b, c] = self.0;
        [EdgeKey::new(a, b), EdgeKey::new(b, c), EdgeKey::new(c, a)]
    }

    /// Vertex indices in ascending order.
    pub fn sorted(&self) -> [usize; 3] {
        let mut v = self.0;
        v.sort_unstable();
        v
    }
}

/// Sign of the signed area of `abc`: positive when counter-clockwise.
pub fn orient2d(a: &Point, b: &Point, c: &Point) -> Result<Sign, GeometryError> {
    Ok(Sign::of(robust::orient2d(a.coord2()?, b.coord2()?, c.coord2()?)))
}

/// Positive if `p` lies strictly inside the circumcircle of `abc`, whichever
/// way `abc` is oriented.
///
/// Returns the sign for the counter-clockwise ordering; swapping the
/// orientation of `abc` negates the raw determinant, so the raw value is
/// multiplied by the orientation sign.
pub fn in_circumcircle(a: &Point, b: &Point, c: &Point, p: &Point) -> Result<Sign, GeometryError> {
    let (ca, cb, cc, cp) = (a.coord2()?, b.coord2()?, c.coord2()?, p.coord2()?);
    let orient = robust::orient2d(ca, cb, cc);
    if orient == 0.0 {
        return Err(GeometryError::DegenerateTriangle);
    }
    let det = robust::incircle(ca, cb, cc, cp);
    Ok(Sign::of(det * orient.signum()))
}

#[inline]
pub(crate) fn orient2d_raw(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    robust::orient2d(
        Coord { x: a[0], y: a[1] },
        Coord { x: b[0], y: b[1] },
        Coord { x: c[0], y: c[1] },
    )
}

/// Raw in-circle determinant; positive when `d` is inside the circle through
/// the counter-clockwise triangle `abc`.
#[inline]
pub(crate) fn incircle_raw(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    robust::incircle(
        Coord { x: a[0], y: a[1] },
        Coord { x: b[0], y: b[1] },
        Coord { x: c[0], y: c[1] },
        Coord { x: d[0], y: d[1] },
    )
}

/// An ordered, deduplicated point set.
///
/// `origins[v]` lists every input row that collapsed onto vertex `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Point>,
    origins: Vec<Vec<usize>>,
}

impl PointCloud {
    /// Builds a cloud from raw rows, merging rows with bit-identical
    /// coordinates. Row numbers become the point indices.
    pub fn from_rows<I, R>(rows: I) -> Result<Self, GeometryError>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[f64]>,
    {
        let mut dim = None;
        let mut points: Vec<Point> = Vec::new();
        let mut origins: Vec<Vec<usize>> = Vec::new();
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        for (row, coords) in rows.into_iter().enumerate() {
            let coords = coords.as_ref();
            match dim {
                None => dim = Some(coords.len()),
                Some(d) if d != coords.len() => {
                    return Err(GeometryError::Dimension {
                        expected: d,
                        found: coords.len(),
                    })
                }
                _ => {}
            }
            let point = Point::new(coords.to_vec(), row)?;
            // -0.0 and 0.0 compare equal, so normalise before hashing bits.
            let key: Vec<u64> = coords
                .iter()
                .map(|&c| if c == 0.0 { 0u64 } else { c.to_bits() })
                .collect();
            match seen.get(&key) {
                Some(&v) => origins[v].push(row),
                None => {
                    seen.insert(key, points.len());
                    points.push(point);
                    origins.push(vec![row]);
                }
            }
        }
        Ok(PointCloud {
            dim: dim.unwrap_or(2),
            points,
            origins,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, v: usize) -> &Point {
        &self.points[v]
    }

    /// Input rows merged into vertex `v`.
    pub fn origins(&self, v: usize) -> &[usize] {
        &self.origins[v]
    }

    /// Number of input rows, duplicates included.
    pub fn input_len(&self) -> usize {
        self.origins.iter().map(Vec::len).sum()
    }

    /// Applies `f` to every coordinate vector, keeping indices and duplicate
    /// bookkeeping.
    pub fn map_coords<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let points = self
            .points
            .iter()
            .map(|p| Point {
                coords: f(&p.coords),
                index: p.index,
            })
            .collect();
        PointCloud {
            dim: self.dim,
            points,
            origins: self.origins.clone(),
        }
    }

    pub(crate) fn xy(&self) -> Result<Vec<[f64; 2]>, GeometryError> {
        if self.dim != 2 {
            return Err(GeometryError::Dimension {
                expected: 2,
                found: self.dim,
            });
        }
        Ok(self.points.iter().map(|p| [p.x(), p.y()]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::xy(x, y)
    }

    #[test]
    fn orient2d_examples() {
        assert_eq!(orient2d(&p(0., 0.), &p(1., 0.), &p(0., 1.)).unwrap(), Sign::Positive);
        assert_eq!(orient2d(&p(0., 0.), &p(1., 1.), &p(2., 2.)).unwrap(), Sign::Zero);
        assert_eq!(orient2d(&p(0., 0.), &p(0., 1.), &p(1., 0.)).unwrap(), Sign::Negative);
    }

    #[test]
    fn orient2d_rejects_3d() {
        let q = Point::new(vec![0., 0., 1.], 0).unwrap();
        assert!(matches!(
            orient2d(&q, &p(1., 0.), &p(0., 1.)),
            Err(GeometryError::Dimension { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn in_circumcircle_examples() {
        let (a, b, c) = (p(0., 0.), p(2., 0.), p(0., 2.));
        assert_eq!(in_circumcircle(&a, &b, &c, &p(0.5, 0.5)).unwrap(), Sign::Positive);
        assert_eq!(in_circumcircle(&a, &b, &c, &p(100., 100.)).unwrap(), Sign::Negative);
        assert_eq!(in_circumcircle(&a, &b, &c, &p(2., 2.)).unwrap(), Sign::Zero);
        // clockwise input gives the same answer
        assert_eq!(in_circumcircle(&a, &c, &b, &p(0.5, 0.5)).unwrap(), Sign::Positive);
    }

    #[test]
    fn in_circumcircle_collinear_is_error() {
        let r = in_circumcircle(&p(0., 0.), &p(1., 1.), &p(2., 2.), &p(0., 1.));
        assert_eq!(r, Err(GeometryError::DegenerateTriangle));
    }

    #[test]
    fn dedup_merges_identical_rows() {
        let cloud = PointCloud::from_rows(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![-0.0, 0.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.origins(0), &[0, 2]);
        assert_eq!(cloud.point(2).index, 3);
        assert_eq!(cloud.input_len(), 4);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = PointCloud::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0, 2.0]]).unwrap_err();
        assert_eq!(err, GeometryError::Dimension { expected: 2, found: 3 });
    }

    #[test]
    fn non_finite_rejected() {
        assert_eq!(
            Point::new(vec![f64::NAN, 0.0], 7),
            Err(GeometryError::NonFinite { index: 7 })
        );
    }
}
