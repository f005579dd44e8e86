//! Reading point clouds, tetrahedral complexes and surface control grids.
//!
//! CSV: optional header line, 2 or 3 numeric columns per row, `.` decimal
//! separator. Blank lines are skipped.
//!
//! JSON points: either a bare array of rows or `{"points": [...]}`.
//!
//! Tetra-complex text: `v x y z` lines for vertices followed by
//! `t i j k l` lines for tetrahedra, with 0-based vertex indices. Blank
//! lines and lines starting with `#` are ignored.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::TetraComplex;
use crate::geometry::{GeometryError, PointCloud};
use crate::spline::{KnotVector, SplineError, SplineSurface, Vector};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("rows have {expected} and {found} coordinates")]
    InconsistentDimension { expected: usize, found: usize },
    #[error("need at least 3 distinct points, got {found}")]
    TooFewPoints { found: usize },
    #[error("unknown input format {0:?}; expected csv, json or tetra")]
    UnknownFormat(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Spline(#[from] SplineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    TetraComplex,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" | "txt" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "tet" | "tetra" => Some(Format::TetraComplex),
            _ => None,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "tetra" | "tetra-complex" | "tet" => Ok(Format::TetraComplex),
            other => Err(IngestError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Cloud(PointCloud),
    Complex(TetraComplex),
}

pub fn read_to_string(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads `path` as `format`, or guesses the format from the extension.
pub fn ingest(path: &Path, format: Option<Format>) -> Result<Input, IngestError> {
    let format = match format.or_else(|| Format::from_path(path)) {
        Some(f) => f,
        None => return Err(IngestError::UnknownFormat(path.display().to_string())),
    };
    let text = read_to_string(path)?;
    match format {
        Format::Csv => parse_csv(&text).map(Input::Cloud),
        Format::Json => parse_json_points(&text).map(Input::Cloud),
        Format::TetraComplex => parse_tetra(&text).map(Input::Complex),
    }
}

fn finish(rows: Vec<Vec<f64>>) -> Result<PointCloud, IngestError> {
    let cloud = PointCloud::from_rows(rows)?;
    if cloud.len() < 3 {
        return Err(IngestError::TooFewPoints { found: cloud.len() });
    }
    Ok(cloud)
}

pub fn parse_csv(text: &str) -> Result<PointCloud, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| IngestError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let coords = match parsed {
            Ok(c) => c,
            // a non-numeric first row is a header
            Err(_) if rows.is_empty() && width.is_none() => {
                width = Some(record.len());
                continue;
            }
            Err(e) => {
                return Err(IngestError::Parse {
                    line,
                    message: format!("not a number: {e}"),
                })
            }
        };
        if !(2..=3).contains(&coords.len()) {
            return Err(IngestError::Parse {
                line,
                message: format!("expected 2 or 3 columns, found {}", coords.len()),
            });
        }
        let expected = *width.get_or_insert(coords.len());
        if coords.len() != expected {
            return Err(IngestError::Parse {
                line,
                message: format!("expected {expected} columns, found {}", coords.len()),
            });
        }
        if let Some(c) = coords.iter().position(|c| !c.is_finite()) {
            return Err(IngestError::Parse {
                line,
                message: format!("column {} is not finite", c + 1),
            });
        }
        rows.push(coords);
    }
    finish(rows)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonPoints {
    Bare(Vec<Vec<f64>>),
    Wrapped { points: Vec<Vec<f64>> },
}

pub fn parse_json_points(text: &str) -> Result<PointCloud, IngestError> {
    let rows = match serde_json::from_str::<JsonPoints>(text)? {
        JsonPoints::Bare(r) | JsonPoints::Wrapped { points: r } => r,
    };
    if let Some(first) = rows.first() {
        if let Some(bad) = rows.iter().find(|r| r.len() != first.len()) {
            return Err(IngestError::InconsistentDimension {
                expected: first.len(),
                found: bad.len(),
            });
        }
    }
    finish(rows)
}

pub fn parse_tetra(text: &str) -> Result<TetraComplex, IngestError> {
    let mut vertices = Vec::new();
    let mut tetrahedra = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut fields = content.split_whitespace();
        let tag = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();
        let err = |message: String| IngestError::Parse { line, message };
        match tag {
            "v" => {
                if !tetrahedra.is_empty() {
                    return Err(err("vertex after the first tetrahedron".into()));
                }
                if rest.len() != 3 {
                    return Err(err(format!("vertex needs 3 coordinates, found {}", rest.len())));
                }
                let mut c = [0.0; 3];
                for (slot, f) in c.iter_mut().zip(&rest) {
                    *slot = f.parse::<f64>().map_err(|e| err(format!("{f:?}: {e}")))?;
                    if !slot.is_finite() {
                        return Err(err(format!("{f:?} is not finite")));
                    }
                }
                vertices.push(c);
            }
            "t" => {
                if rest.len() != 4 {
                    return Err(err(format!("tetrahedron needs 4 indices, found {}", rest.len())));
                }
                let mut t = [0usize; 4];
                for (slot, f) in t.iter_mut().zip(&rest) {
                    *slot = f.parse::<usize>().map_err(|e| err(format!("{f:?}: {e}")))?;
                }
                tetrahedra.push(t);
            }
            other => return Err(err(format!("unknown record {other:?}; expected v or t"))),
        }
    }
    Ok(TetraComplex { vertices, tetrahedra })
}

/// Control-grid description of a (possibly rational) tensor-product surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceInput {
    /// Rows × columns of `[x, y, z]`; rows run along `u`.
    pub grid: Vec<Vec<[f64; 3]>>,
    /// Same shape as `grid`; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<f64>>>,
    pub knots_u: Vec<f64>,
    pub knots_v: Vec<f64>,
    pub order_u: usize,
    pub order_v: usize,
}

impl SurfaceInput {
    pub fn to_surface(&self) -> Result<SplineSurface, SplineError> {
        let grid: Vec<Vec<Vector<3>>> = self
            .grid
            .iter()
            .map(|row| row.iter().map(|p| Vector::<3>::from(*p)).collect())
            .collect();
        let weights = match &self.weights {
            Some(w) => w.clone(),
            None => grid.iter().map(|r| vec![1.0; r.len()]).collect(),
        };
        SplineSurface::new(
            grid,
            weights,
            KnotVector::new(self.knots_u.clone())?,
            KnotVector::new(self.knots_v.clone())?,
            self.order_u,
            self.order_v,
        )
    }
}

pub fn parse_surface(text: &str) -> Result<SplineSurface, IngestError> {
    let input: SurfaceInput = serde_json::from_str(text)?;
    Ok(input.to_surface()?)
}
