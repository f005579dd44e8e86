//! End-to-end scoring of a 2D point cloud.
//!
//! normalize → triangulate → classify edges → cluster → boundary loops →
//! fit → score. Clusters are fitted and scored in parallel and merged back in
//! cluster-id order, so the report is identical from run to run.

use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{
    boundary_loops, classify_edges, form_clusters, triangulation_edge_stats, BoundaryLoop, Cluster, ClusterError,
    Diagnostic, EdgeLabel, DEFAULT_M,
};
use crate::curvature::{shape_score_curve, CurvatureError};
use crate::fit::{fit_loop, normalize_unit_volume, ControlCount, FitConfig, FitError, FitResult};
use crate::geometry::{GeometryError, PointCloud};
use crate::quadrature::DEFAULT_QUADRATURE_ORDER;
use crate::spline::{KnotVector, SplineCurve, SplineError, Vector, DEFAULT_ORDER, MAX_ORDER};
use crate::triangulate::{triangulate, TriangulationError};

/// JSON Schema for [`ShapeReport`].
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

/// Largest accepted number of Gauss–Legendre nodes per span.
pub const MAX_QUADRATURE_ORDER: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Standard deviations from the mean edge length that separate short
    /// and long edges from the rest. Finite, non-negative.
    pub m: f64,
    /// Spline order, `3..=16`.
    pub order: usize,
    pub control_count: ControlCount,
    /// Gauss–Legendre nodes per knot span, `1..=128`.
    pub quadrature_order: usize,
    /// Weight of the control-polygon smoothing term; 0 disables it.
    pub regularization: f64,
    /// Scale the cloud to unit bounding-box area before anything else.
    pub normalize: bool,
    /// Record wall-clock stage timings in the report. Off by default because
    /// timings make otherwise identical reports differ.
    pub timing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            m: DEFAULT_M,
            order: DEFAULT_ORDER,
            control_count: ControlCount::default(),
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
            regularization: 0.0,
            normalize: true,
            timing: false,
            input: None,
            output: None,
            svg: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.m.is_finite() && self.m >= 0.0) {
            return Err(format!("m must be finite and non-negative, got {}", self.m));
        }
        if !(3..=MAX_ORDER).contains(&self.order) {
            return Err(format!("order must be in 3..={MAX_ORDER}, got {}", self.order));
        }
        if !(1..=MAX_QUADRATURE_ORDER).contains(&self.quadrature_order) {
            return Err(format!(
                "quadrature_order must be in 1..={MAX_QUADRATURE_ORDER}, got {}",
                self.quadrature_order
            ));
        }
        if !(self.regularization.is_finite() && self.regularization >= 0.0) {
            return Err(format!(
                "regularization must be finite and non-negative, got {}",
                self.regularization
            ));
        }
        match self.control_count {
            ControlCount::Fixed(c) if c < self.order => {
                Err(format!("control_count {c} is below the order {}", self.order))
            }
            ControlCount::PerPoints { ratio: 0, .. } => Err("control ratio must be positive".into()),
            ControlCount::PerPoints { min, .. } if min < self.order => {
                Err(format!("control minimum {min} is below the order {}", self.order))
            }
            _ => Ok(()),
        }
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            control_count: self.control_count,
            order: self.order,
            regularization: self.regularization,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Normalize,
    Triangulate,
    Classify,
    Boundary,
    Fit,
    Score,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Normalize => "normalize",
            Stage::Triangulate => "triangulate",
            Stage::Classify => "classify",
            Stage::Boundary => "boundary",
            Stage::Fit => "fit",
            Stage::Score => "score",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StageError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

/// Broad failure classes, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input or configuration.
    Input,
    /// The geometry admits no answer: too few points, collinear input,
    /// coincident vertices and the like.
    Degenerate,
    /// A linear solve or curvature evaluation broke down.
    Numerical,
}

impl StageError {
    pub fn kind(&self) -> ErrorKind {
        use ErrorKind::*;
        match self {
            StageError::Config(_) => Input,
            StageError::Triangulation(e) => match e {
                TriangulationError::Geometry(GeometryError::DegenerateTriangle) => Degenerate,
                TriangulationError::Geometry(_) => Input,
                _ => Degenerate,
            },
            StageError::Cluster(e) => match e {
                ClusterError::InvalidMultiplier(_) | ClusterError::MissingVertex { .. } => Input,
                _ => Degenerate,
            },
            StageError::Fit(e) => match e {
                FitError::InvalidRegularization(_) => Input,
                FitError::RankDeficient { .. } | FitError::Spline(_) => Numerical,
                _ => Degenerate,
            },
            StageError::Curvature(e) => match e {
                CurvatureError::InvalidDomain { .. } => Input,
                _ => Numerical,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct PipelineError {
    pub stage: Stage,
    pub cluster: Option<usize>,
    #[source]
    pub source: StageError,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cluster {
            Some(c) => write!(f, "{} stage, cluster {}: {}", self.stage, c, self.source),
            None => write!(f, "{} stage: {}", self.stage, self.source),
        }
    }
}

impl PipelineError {
    fn at(stage: Stage, cluster: Option<usize>) -> impl FnOnce(StageError) -> Self {
        move |source| PipelineError { stage, cluster, source }
    }

    pub fn kind(&self) -> ErrorKind {
        self.source.kind()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeStatsReport {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
    pub short: usize,
    pub long: usize,
    pub other: usize,
}

/// A fitted periodic B-spline in report coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedCurve {
    pub order: usize,
    /// One period of breakpoints.
    pub breakpoints: Vec<f64>,
    pub control_points: Vec<[f64; 2]>,
    pub rms: f64,
}

impl FittedCurve {
    fn from_curve(curve: &SplineCurve<2>, rms: f64) -> Self {
        FittedCurve {
            order: curve.order(),
            breakpoints: curve.knots().knots().to_vec(),
            control_points: curve.control_points().iter().map(|p| [p.x, p.y]).collect(),
            rms,
        }
    }

    pub fn to_curve(&self) -> Result<SplineCurve<2>, SplineError> {
        let controls = self.control_points.iter().map(|&[x, y]| Vector::<2>::new(x, y)).collect();
        SplineCurve::bspline(controls, KnotVector::periodic(self.breakpoints.clone())?, self.order)
    }

    /// `count` points at uniform parameter steps over one period.
    pub fn sample(&self, count: usize) -> Result<Vec<[f64; 2]>, SplineError> {
        let curve = self.to_curve()?;
        let (lo, hi) = curve.domain();
        (0..count)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / count as f64;
                curve.eval(t).map(|p| [p.x, p.y])
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopReport {
    /// Input row numbers of the loop vertices, in traversal order.
    pub vertices: Vec<usize>,
    /// Vertex positions in report coordinates.
    pub positions: Vec<[f64; 2]>,
    pub depth: usize,
    pub hole: bool,
    pub signed_area: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FittedCurve>,
    pub score: f64,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub id: usize,
    /// Number of input rows in the cluster, duplicates included.
    pub point_count: usize,
    /// Sorted input row numbers.
    pub members: Vec<usize>,
    pub loops: Vec<LoopReport>,
    pub score: f64,
    pub estimated_error: f64,
    pub quadrature_order: usize,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub triangulate_ms: f64,
    pub cluster_ms: f64,
    pub fit_score_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub config: PipelineConfig,
    pub dim: usize,
    /// Factor applied to input coordinates; scores, positions and fitted
    /// curves are all in the scaled frame. A curve score `S` in that frame
    /// corresponds to `S * scale` in input units.
    pub scale: f64,
    pub input_points: usize,
    pub distinct_points: usize,
    pub edge_stats: EdgeStatsReport,
    pub clusters: Vec<ClusterReport>,
    pub total_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl ShapeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes to JSON")
    }
}

fn millis(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

pub fn run_pipeline(cloud: &PointCloud, cfg: &PipelineConfig) -> Result<ShapeReport, PipelineError> {
    let start = Instant::now();
    cfg.validate()
        .map_err(|e| PipelineError::at(Stage::Config, None)(StageError::Config(e)))?;
    if cloud.dim() != 2 {
        return Err(PipelineError::at(Stage::Triangulate, None)(
            TriangulationError::Geometry(GeometryError::UnsupportedDimension(cloud.dim())).into(),
        ));
    }

    let (cloud, scale) = if cfg.normalize {
        normalize_unit_volume(cloud).map_err(|e| PipelineError::at(Stage::Normalize, None)(e.into()))?
    } else {
        (cloud.clone(), 1.0)
    };

    let t0 = Instant::now();
    let tri = triangulate(&cloud).map_err(|e| PipelineError::at(Stage::Triangulate, None)(e.into()))?;
    let triangulate_ms = millis(t0);

    let t0 = Instant::now();
    let classify_err = |e: ClusterError| PipelineError::at(Stage::Classify, None)(e.into());
    let stats = triangulation_edge_stats(&tri).map_err(classify_err)?;
    let classes = classify_edges(&tri, &stats, cfg.m).map_err(classify_err)?;
    let partition = form_clusters(&tri, &classes);
    let cluster_ms = millis(t0);

    let t0 = Instant::now();
    let clusters = partition
        .clusters
        .par_iter()
        .map(|c| cluster_report(c, &cloud, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let fit_score_ms = millis(t0);

    let total_score = clusters.iter().map(|c| c.score).sum();
    Ok(ShapeReport {
        config: cfg.clone(),
        dim: 2,
        scale,
        input_points: cloud.input_len(),
        distinct_points: cloud.len(),
        edge_stats: EdgeStatsReport {
            mean: stats.mean,
            std: stats.std,
            count: stats.count,
            short: classes.count(EdgeLabel::Short),
            long: classes.count(EdgeLabel::Long),
            other: classes.count(EdgeLabel::Other),
        },
        clusters,
        total_score,
        timing: cfg.timing.then(|| Timing {
            triangulate_ms,
            cluster_ms,
            fit_score_ms,
            total_ms: millis(start),
        }),
    })
}

fn loop_is_short(lp: &BoundaryLoop, cfg: &PipelineConfig) -> bool {
    lp.len() < cfg.order || cfg.control_count.resolve(lp.len()) > lp.len()
}

fn cluster_report(cluster: &Cluster, cloud: &PointCloud, cfg: &PipelineConfig) -> Result<ClusterReport, PipelineError> {
    let id = Some(cluster.id);
    let mut members: Vec<usize> = cluster.vertices.iter().flat_map(|&v| cloud.origins(v).to_vec()).collect();
    members.sort_unstable();
    let mut report = ClusterReport {
        id: cluster.id,
        point_count: members.len(),
        members,
        loops: Vec::new(),
        score: 0.0,
        estimated_error: 0.0,
        quadrature_order: cfg.quadrature_order,
        diagnostics: Vec::new(),
    };
    if cluster.is_degenerate() {
        report.diagnostics.push(Diagnostic::DegenerateCluster);
        return Ok(report);
    }

    let loops =
        boundary_loops(&cluster.triangles, cloud).map_err(|e| PipelineError::at(Stage::Boundary, id)(e.into()))?;
    let fit_cfg = cfg.fit_config();
    let mut curves = Vec::new();
    for lp in &loops {
        let mut lr = LoopReport {
            vertices: lp.vertices.iter().map(|&v| cloud.point(v).index).collect(),
            positions: lp.positions(cloud),
            depth: lp.depth,
            hole: lp.is_hole(),
            signed_area: lp.signed_area,
            fit: None,
            score: 0.0,
            diagnostics: Vec::new(),
        };
        if loop_is_short(lp, cfg) {
            lr.diagnostics.push(Diagnostic::LoopTooShort);
        } else {
            let fit = fit_with_fallback(lp, cloud, &fit_cfg, &mut lr.diagnostics)
                .map_err(|e| PipelineError::at(Stage::Fit, id)(e.into()))?;
            lr.fit = Some(FittedCurve::from_curve(&fit.curve, fit.rms));
            curves.push((report.loops.len(), fit.curve));
        }
        report.loops.push(lr);
    }
    for d in [Diagnostic::LoopTooShort, Diagnostic::ReducedControls] {
        if report.loops.iter().any(|l| l.diagnostics.contains(&d)) {
            report.diagnostics.push(d);
        }
    }

    let only: Vec<SplineCurve<2>> = curves.iter().map(|(_, c)| c.clone()).collect();
    let score = shape_score_curve(&only, cfg.quadrature_order)
        .map_err(|e| PipelineError::at(Stage::Score, id)(e.into()))?;
    for ((slot, _), part) in curves.iter().zip(&score.contributions) {
        report.loops[*slot].score = *part;
    }
    report.score = score.value;
    report.estimated_error = score.diagnostics.estimated_error;
    Ok(report)
}

/// Long chords can leave knot spans without data. Rather than fail, drop
/// control points one at a time until the system is solvable.
fn fit_with_fallback(
    lp: &BoundaryLoop,
    cloud: &PointCloud,
    cfg: &FitConfig,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<FitResult<2>, FitError> {
    let mut controls = cfg.control_count.resolve(lp.len());
    loop {
        let attempt = FitConfig { control_count: ControlCount::Fixed(controls), ..*cfg };
        match fit_loop(lp, cloud, &attempt) {
            Err(FitError::RankDeficient { .. }) if controls > cfg.order => {
                controls -= 1;
                if !diagnostics.contains(&Diagnostic::ReducedControls) {
                    diagnostics.push(Diagnostic::ReducedControls);
                }
            }
            other => return other,
        }
    }
}
