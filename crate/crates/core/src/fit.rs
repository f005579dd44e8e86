//! Least-squares fitting of closed boundary loops and unit-volume
//! normalization of point clouds.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::BoundaryLoop;
use crate::geometry::PointCloud;
use crate::spline::{Axis, KnotVector, SplineCurve, SplineError, Vector, DEFAULT_ORDER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {required} distinct points, got {found}")]
    TooFewPoints { required: usize, found: usize },
    #[error("bounding box has zero extent along axis {axis}")]
    DegenerateExtent { axis: usize },
    #[error("loop vertices {first} and {second} coincide")]
    RepeatedVertex { first: usize, second: usize },
    #[error("{controls} control points requested for only {points} data points")]
    Overdetermined { controls: usize, points: usize },
    #[error("{controls} control points is fewer than the spline order {order}")]
    ControlsBelowOrder { controls: usize, order: usize },
    #[error("regularization must be finite and non-negative, got {0}")]
    InvalidRegularization(f64),
    #[error("normal equations are rank deficient with {controls} control points; try fewer")]
    RankDeficient { controls: usize },
    #[error(transparent)]
    Spline(#[from] SplineError),
}

/// How many control points a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlCount {
    Fixed(usize),
    /// `max(min, ceil(points / ratio))`, capped at the number of points.
    PerPoints { ratio: usize, min: usize },
}

impl Default for ControlCount {
    fn default() -> Self {
        ControlCount::PerPoints { ratio: 3, min: 8 }
    }
}

impl ControlCount {
    pub fn resolve(&self, points: usize) -> usize {
        match *self {
            ControlCount::Fixed(c) => c,
            ControlCount::PerPoints { ratio, min } => points.div_ceil(ratio.max(1)).max(min).min(points),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub control_count: ControlCount,
    pub order: usize,
    /// Weight of the squared second differences of the control polygon.
    pub regularization: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            control_count: ControlCount::default(),
            order: DEFAULT_ORDER,
            regularization: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FitResult<const D: usize> {
    pub curve: SplineCurve<D>,
    /// Parameter assigned to each data point.
    pub parameters: Vec<f64>,
    /// Distance from each data point to the curve at its parameter.
    pub residuals: Vec<f64>,
    pub rms: f64,
}

/// Uniformly scales the cloud about the origin so that its axis-aligned
/// bounding box has unit volume (unit area in 2D). Returns the scale applied.
pub fn normalize_unit_volume(cloud: &PointCloud) -> Result<(PointCloud, f64), FitError> {
    if cloud.len() < 2 {
        return Err(FitError::TooFewPoints {
            required: 2,
            found: cloud.len(),
        });
    }
    let d = cloud.dim();
    let mut volume = 1.0;
    for axis in 0..d {
        let (lo, hi) = cloud
            .points()
            .iter()
            .map(|p| p.coords()[axis])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c), hi.max(c)));
        let extent = hi - lo;
        if !(extent > 0.0) {
            return Err(FitError::DegenerateExtent { axis });
        }
        volume *= extent;
    }
    let scale = volume.powf(-1.0 / d as f64);
    Ok((cloud.map_coords(|c| c.iter().map(|x| x * scale).collect()), scale))
}

/// Cumulative chord length of the closed polygon, divided by its perimeter.
/// The first point gets 0; the closing chord accounts for the gap before 1.
pub fn chord_parametrize<const D: usize>(points: &[Vector<D>]) -> Result<Vec<f64>, FitError> {
    let n = points.len();
    if n < 3 {
        return Err(FitError::TooFewPoints { required: 3, found: n });
    }
    let mut params = Vec::with_capacity(n);
    let mut total = 0.0;
    for i in 0..n {
        params.push(total);
        let chord = (points[(i + 1) % n] - points[i]).norm();
        if chord == 0.0 {
            return Err(FitError::RepeatedVertex {
                first: i,
                second: (i + 1) % n,
            });
        }
        total += chord;
    }
    for p in &mut params {
        *p /= total;
    }
    Ok(params)
}

/// Fits a periodic, uniformly weighted B-spline with uniform knots to the
/// closed polygon `points` by linear least squares at fixed chord-length
/// parameters.
pub fn fit_closed_curve<const D: usize>(points: &[Vector<D>], cfg: &FitConfig) -> Result<FitResult<D>, FitError> {
    if !(cfg.regularization.is_finite() && cfg.regularization >= 0.0) {
        return Err(FitError::InvalidRegularization(cfg.regularization));
    }
    let n = points.len();
    let controls = cfg.control_count.resolve(n);
    if controls > n {
        return Err(FitError::Overdetermined { controls, points: n });
    }
    if controls < cfg.order {
        return Err(FitError::ControlsBelowOrder {
            controls,
            order: cfg.order,
        });
    }
    let params = chord_parametrize(points)?;
    let knots = KnotVector::periodic_uniform(controls)?;
    let axis = Axis::new(knots.clone(), cfg.order, controls)?;

    let reg_rows = if cfg.regularization > 0.0 { controls } else { 0 };
    let mut design = DMatrix::<f64>::zeros(n + reg_rows, controls);
    for (p, &t) in params.iter().enumerate() {
        let row = axis.row(t)?;
        for o in 0..cfg.order {
            design[(p, (row.first + o) % controls)] += row.values[o];
        }
    }
    if reg_rows > 0 {
        let w = cfg.regularization.sqrt();
        for j in 0..controls {
            design[(n + j, (j + controls - 1) % controls)] += w;
            design[(n + j, j)] -= 2.0 * w;
            design[(n + j, (j + 1) % controls)] += w;
        }
    }

    let qr = design.qr();
    let r = qr.r();
    let largest = r.diagonal().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if r.diagonal().iter().any(|x| x.abs() <= 1e-12 * largest) {
        return Err(FitError::RankDeficient { controls });
    }
    let qt = qr.q().transpose();

    let mut coords = vec![Vector::<D>::zeros(); controls];
    for axis_idx in 0..D {
        let mut rhs = DVector::<f64>::zeros(n + reg_rows);
        for (p, x) in points.iter().enumerate() {
            rhs[p] = x[axis_idx];
        }
        let sol = r
            .solve_upper_triangular(&(&qt * rhs))
            .ok_or(FitError::RankDeficient { controls })?;
        for (c, v) in coords.iter_mut().zip(sol.iter()) {
            c[axis_idx] = *v;
        }
    }

    let curve = SplineCurve::bspline(coords, knots, cfg.order)?;
    let residuals = params
        .iter()
        .zip(points)
        .map(|(&t, x)| curve.eval(t).map(|c| (c - x).norm()))
        .collect::<Result<Vec<_>, _>>()?;
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
    Ok(FitResult {
        curve,
        parameters: params,
        residuals,
        rms,
    })
}

/// Positions of a 2D boundary loop, in loop order.
pub fn loop_positions(lp: &BoundaryLoop, cloud: &PointCloud) -> Vec<Vector<2>> {
    lp.positions(cloud).into_iter().map(|[x, y]| Vector::<2>::new(x, y)).collect()
}

pub fn fit_loop(lp: &BoundaryLoop, cloud: &PointCloud, cfg: &FitConfig) -> Result<FitResult<2>, FitError> {
    fit_closed_curve(&loop_positions(lp, cloud), cfg)
}
