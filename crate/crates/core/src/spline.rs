//! B-spline and NURBS evaluation.
//!
//! Two evaluation paths are provided. [`basis`], [`basis_derivative`] and
//! [`basis_second_derivative`] are the plain recursive Cox–de Boor
//! definitions, useful for inspection and testing. Curves and surfaces use a
//! span-local triangular table that computes the `k` non-zero basis values
//! and their first two derivatives in one pass with the same recurrences.
//!
//! Terms of the form `x / 0` that arise from repeated knots are taken as 0.
//!
//! Periodic knot vectors store one period of breakpoints `τ_0 < … < τ_n`
//! for `n` control points; evaluation unrolls them into an equivalent open
//! knot vector with the first `k - 1` control points repeated.

use nalgebra::SVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported spline order (degree + 1).
pub const MAX_ORDER: usize = 16;

/// Default order: cubic, twice continuously differentiable.
pub const DEFAULT_ORDER: usize = 4;

pub type Vector<const D: usize> = SVector<f64, D>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplineError {
    #[error("knot vector must be finite and non-decreasing")]
    NonMonotoneKnots,
    #[error("periodic breakpoints must be finite and strictly increasing, at least two")]
    InvalidPeriod,
    #[error("order {order} is outside 1..={MAX_ORDER}")]
    InvalidOrder { order: usize },
    #[error("order {order} too low; at least {required} needed")]
    OrderTooLow { order: usize, required: usize },
    #[error("expected {expected} knots for {controls} control points of order {order}, got {found}")]
    KnotCount {
        expected: usize,
        found: usize,
        controls: usize,
        order: usize,
    },
    #[error("basis index {index} out of range for {count} basis functions")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("parameter {t} outside domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("{points} control points but {weights} weights")]
    WeightCount { points: usize, weights: usize },
    #[error("weight {index} is not a positive finite number")]
    InvalidWeight { index: usize },
    #[error("periodic spline of order {order} needs at least {order} control points, got {found}")]
    TooFewControls { order: usize, found: usize },
    #[error("rational denominator vanished at parameter {t}")]
    ZeroDenominator { t: f64 },
    #[error("control grid is not rectangular")]
    NonRectangularGrid,
}

/// Non-decreasing knots, or one period of breakpoints when `periodic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    knots: Vec<f64>,
    periodic: bool,
}

impl KnotVector {
    pub fn new(knots: Vec<f64>) -> Result<Self, SplineError> {
        if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(SplineError::NonMonotoneKnots);
        }
        Ok(KnotVector {
            knots,
            periodic: false,
        })
    }

    /// One period of strictly increasing breakpoints.
    pub fn periodic(breakpoints: Vec<f64>) -> Result<Self, SplineError> {
        if breakpoints.len() < 2
            || breakpoints.iter().any(|k| !k.is_finite())
            || breakpoints.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(SplineError::InvalidPeriod);
        }
        Ok(KnotVector {
            knots: breakpoints,
            periodic: true,
        })
    }

    /// Knots `0, 1, …, count - 1`.
    pub fn uniform(count: usize) -> Self {
        KnotVector {
            knots: (0..count).map(|i| i as f64).collect(),
            periodic: false,
        }
    }

    /// Clamped knots on `[0, 1]` with uniformly spaced interior knots.
    pub fn clamped_uniform(controls: usize, order: usize) -> Result<Self, SplineError> {
        if order == 0 || order > MAX_ORDER {
            return Err(SplineError::InvalidOrder { order });
        }
        if controls < order {
            return Err(SplineError::TooFewControls { order, found: controls });
        }
        let spans = controls - order + 1;
        let mut knots = vec![0.0; order];
        knots.extend((1..spans).map(|i| i as f64 / spans as f64));
        knots.extend(std::iter::repeat_n(1.0, order));
        Ok(KnotVector {
            knots,
            periodic: false,
        })
    }

    /// Breakpoints `j / n` for `j = 0..=n`.
    pub fn periodic_uniform(controls: usize) -> Result<Self, SplineError> {
        Self::periodic((0..=controls).map(|j| j as f64 / controls as f64).collect())
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    fn period(&self) -> f64 {
        self.knots[self.knots.len() - 1] - self.knots[0]
    }

    /// Open knot vector equivalent to a periodic one for order `k`:
    /// `n + 2k - 1` knots describing `n + k - 1` basis functions whose
    /// valid span is exactly one period.
    fn unrolled(&self, k: usize) -> Vec<f64> {
        let n = self.knots.len() - 1;
        let period = self.period();
        let lead = k as isize - 1;
        (0..(n + 2 * k - 1) as isize)
            .map(|j| {
                let s = j - lead;
                let wraps = s.div_euclid(n as isize);
                let r = s.rem_euclid(n as isize) as usize;
                self.knots[r] + wraps as f64 * period
            })
            .collect()
    }

    fn wrap(&self, t: f64) -> f64 {
        let lo = self.knots[0];
        let period = self.period();
        let w = lo + (t - lo).rem_euclid(period);
        if w >= lo + period {
            lo
        } else {
            w
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn order_one(knots: &[f64], i: usize, t: f64) -> f64 {
    let (a, b) = (knots[i], knots[i + 1]);
    let last = knots[knots.len() - 1];
    // close the last non-empty span so the right end of the domain is covered
    if (a <= t && t < b) || (t == last && b == last && a < b) {
        1.0
    } else {
        0.0
    }
}

fn rec_value(knots: &[f64], i: usize, k: usize, t: f64) -> f64 {
    if k == 1 {
        return order_one(knots, i, t);
    }
    let left = ratio(t - knots[i], knots[i + k - 1] - knots[i]);
    let right = ratio(knots[i + k] - t, knots[i + k] - knots[i + 1]);
    left * rec_value(knots, i, k - 1, t) + right * rec_value(knots, i + 1, k - 1, t)
}

fn rec_first(knots: &[f64], i: usize, k: usize, t: f64) -> f64 {
    if k == 1 {
        return 0.0;
    }
    let d1 = knots[i + k - 1] - knots[i];
    let d2 = knots[i + k] - knots[i + 1];
    ratio(1.0, d1) * rec_value(knots, i, k - 1, t) + ratio(t - knots[i], d1) * rec_first(knots, i, k - 1, t)
        - ratio(1.0, d2) * rec_value(knots, i + 1, k - 1, t)
        + ratio(knots[i + k] - t, d2) * rec_first(knots, i + 1, k - 1, t)
}

fn rec_second(knots: &[f64], i: usize, k: usize, t: f64) -> f64 {
    if k == 1 {
        return 0.0;
    }
    let d1 = knots[i + k - 1] - knots[i];
    let d2 = knots[i + k] - knots[i + 1];
    ratio(2.0, d1) * rec_first(knots, i, k - 1, t) + ratio(t - knots[i], d1) * rec_second(knots, i, k - 1, t)
        - ratio(2.0, d2) * rec_first(knots, i + 1, k - 1, t)
        + ratio(knots[i + k] - t, d2) * rec_second(knots, i + 1, k - 1, t)
}

/// Resolves (knots, index, parameter) for the recursive evaluators; periodic
/// functions are sums of the unrolled functions congruent to `i`.
fn recursive<F>(i: usize, k: usize, t: f64, knots: &KnotVector, f: F) -> Result<f64, SplineError>
where
    F: Fn(&[f64], usize, usize, f64) -> f64,
{
    if k == 0 || k > MAX_ORDER {
        return Err(SplineError::InvalidOrder { order: k });
    }
    if knots.periodic {
        let n = knots.len() - 1;
        if i >= n {
            return Err(SplineError::IndexOutOfRange { index: i, count: n });
        }
        let ext = knots.unrolled(k);
        let t = knots.wrap(t);
        let count = n + k - 1;
        Ok((i..count).step_by(n).map(|j| f(&ext, j, k, t)).sum())
    } else {
        let kn = &knots.knots;
        let count = kn.len().saturating_sub(k);
        if i >= count {
            return Err(SplineError::IndexOutOfRange { index: i, count });
        }
        let (lo, hi) = (kn[0], kn[kn.len() - 1]);
        if !(lo <= t && t <= hi) {
            return Err(SplineError::OutOfDomain { t, lo, hi });
        }
        Ok(f(kn, i, k, t))
    }
}

/// `N_{i,k}(t)` by direct recursion.
pub fn basis(i: usize, k: usize, t: f64, knots: &KnotVector) -> Result<f64, SplineError> {
    recursive(i, k, t, knots, rec_value)
}

/// First derivative of `N_{i,k}` by the differentiated recursion.
pub fn basis_derivative(i: usize, k: usize, t: f64, knots: &KnotVector) -> Result<f64, SplineError> {
    if k < 2 {
        return Err(SplineError::OrderTooLow { order: k, required: 2 });
    }
    recursive(i, k, t, knots, rec_first)
}

/// Second derivative of `N_{i,k}`, the first-derivative recursion applied twice.
pub fn basis_second_derivative(i: usize, k: usize, t: f64, knots: &KnotVector) -> Result<f64, SplineError> {
    if k < 3 {
        return Err(SplineError::OrderTooLow { order: k, required: 3 });
    }
    recursive(i, k, t, knots, rec_second)
}

/// Non-zero basis values at one parameter: functions `first..first + k`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BasisRow {
    pub first: usize,
    pub values: [f64; MAX_ORDER],
    pub d1: [f64; MAX_ORDER],
    pub d2: [f64; MAX_ORDER],
}

/// One parametric direction of a curve or surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Axis {
    knots: KnotVector,
    order: usize,
    controls: usize,
    /// Knots actually used for evaluation (unrolled if periodic).
    eval_knots: Vec<f64>,
}

impl Axis {
    pub(crate) fn new(knots: KnotVector, order: usize, controls: usize) -> Result<Self, SplineError> {
        if order == 0 || order > MAX_ORDER {
            return Err(SplineError::InvalidOrder { order });
        }
        let eval_knots = if knots.periodic {
            if knots.len() != controls + 1 {
                return Err(SplineError::KnotCount {
                    expected: controls + 1,
                    found: knots.len(),
                    controls,
                    order,
                });
            }
            if controls < order {
                return Err(SplineError::TooFewControls { order, found: controls });
            }
            knots.unrolled(order)
        } else {
            if knots.len() != controls + order {
                return Err(SplineError::KnotCount {
                    expected: controls + order,
                    found: knots.len(),
                    controls,
                    order,
                });
            }
            if knots.knots[order - 1] >= knots.knots[controls] {
                return Err(SplineError::NonMonotoneKnots);
            }
            knots.knots.clone()
        };
        Ok(Axis {
            knots,
            order,
            controls,
            eval_knots,
        })
    }

    fn eval_count(&self) -> usize {
        self.eval_knots.len() - self.order
    }

    fn domain(&self) -> (f64, f64) {
        let k = self.order;
        (self.eval_knots[k - 1], self.eval_knots[self.eval_count()])
    }

    /// Distinct knot values inside the domain, ends included.
    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.domain();
        let mut b: Vec<f64> = self
            .eval_knots
            .iter()
            .copied()
            .filter(|&x| lo <= x && x <= hi)
            .collect();
        b.dedup();
        b
    }

    fn control(&self, j: usize) -> usize {
        j % self.controls
    }

    fn locate(&self, t: f64) -> Result<(usize, f64), SplineError> {
        let t = if self.knots.periodic {
            self.knots.wrap(t)
        } else {
            let (lo, hi) = self.domain();
            if !(lo <= t && t <= hi) {
                return Err(SplineError::OutOfDomain { t, lo, hi });
            }
            t
        };
        let k = self.order;
        let last = self.eval_count() - 1;
        let mut span = self.eval_knots.partition_point(|&x| x <= t).saturating_sub(1);
        span = span.clamp(k - 1, last);
        while span > k - 1 && self.eval_knots[span] == self.eval_knots[span + 1] {
            span -= 1;
        }
        Ok((span, t))
    }

    /// Triangular Cox–de Boor table with derivatives on the span containing `t`.
    pub(crate) fn row(&self, t: f64) -> Result<BasisRow, SplineError> {
        let (span, t) = self.locate(t)?;
        let k = self.order;
        let kn = &self.eval_knots;
        let first = span + 1 - k;
        // slot `o` holds function `first + o`
        let mut n = [0.0; MAX_ORDER];
        let mut d1 = [0.0; MAX_ORDER];
        let mut d2 = [0.0; MAX_ORDER];
        n[k - 1] = 1.0;
        for r in 2..=k {
            let mut nn = [0.0; MAX_ORDER];
            let mut nd1 = [0.0; MAX_ORDER];
            let mut nd2 = [0.0; MAX_ORDER];
            for o in (k - r)..k {
                let i = first + o;
                let (lv, l1, l2) = (n[o], d1[o], d2[o]);
                let (rv, r1, r2) = if o + 1 < k { (n[o + 1], d1[o + 1], d2[o + 1]) } else { (0.0, 0.0, 0.0) };
                let da = kn[i + r - 1] - kn[i];
                let db = kn[i + r] - kn[i + 1];
                let (ia, ib) = (ratio(1.0, da), ratio(1.0, db));
                let (wa, wb) = ((t - kn[i]) * ia, (kn[i + r] - t) * ib);
                nn[o] = wa * lv + wb * rv;
                nd1[o] = ia * lv + wa * l1 - ib * rv + wb * r1;
                nd2[o] = 2.0 * ia * l1 + wa * l2 - 2.0 * ib * r1 + wb * r2;
            }
            n = nn;
            d1 = nd1;
            d2 = nd2;
        }
        Ok(BasisRow {
            first,
            values: n,
            d1,
            d2,
        })
    }
}

/// Position and first two parametric derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveDerivatives<const D: usize> {
    pub point: Vector<D>,
    pub first: Vector<D>,
    pub second: Vector<D>,
}

/// A rational B-spline curve in `D` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SplineCurve<const D: usize> {
    control_points: Vec<Vector<D>>,
    weights: Vec<f64>,
    axis: Axis,
}

fn check_weights(weights: &[f64]) -> Result<(), SplineError> {
    match weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        Some(index) => Err(SplineError::InvalidWeight { index }),
        None => Ok(()),
    }
}

impl<const D: usize> SplineCurve<D> {
    pub fn new(
        control_points: Vec<Vector<D>>,
        weights: Vec<f64>,
        knots: KnotVector,
        order: usize,
    ) -> Result<Self, SplineError> {
        if weights.len() != control_points.len() {
            return Err(SplineError::WeightCount {
                points: control_points.len(),
                weights: weights.len(),
            });
        }
        check_weights(&weights)?;
        let axis = Axis::new(knots, order, control_points.len())?;
        Ok(SplineCurve {
            control_points,
            weights,
            axis,
        })
    }

    /// Non-rational curve (all weights 1).
    pub fn bspline(control_points: Vec<Vector<D>>, knots: KnotVector, order: usize) -> Result<Self, SplineError> {
        let w = vec![1.0; control_points.len()];
        Self::new(control_points, w, knots, order)
    }

    pub fn control_points(&self) -> &[Vector<D>] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn knots(&self) -> &KnotVector {
        &self.axis.knots
    }

    pub fn order(&self) -> usize {
        self.axis.order
    }

    pub fn is_periodic(&self) -> bool {
        self.axis.knots.periodic
    }

    pub fn is_rational(&self) -> bool {
        self.weights.iter().any(|&w| w != self.weights[0])
    }

    pub fn domain(&self) -> (f64, f64) {
        self.axis.domain()
    }

    /// Knot values bounding the polynomial pieces of the curve.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.axis.breakpoints()
    }

    pub fn eval(&self, t: f64) -> Result<Vector<D>, SplineError> {
        Ok(self.derivatives(t)?.point)
    }

    pub fn derivatives(&self, t: f64) -> Result<CurveDerivatives<D>, SplineError> {
        let row = self.axis.row(t)?;
        let mut a = [Vector::<D>::zeros(); 3];
        let mut w = [0.0; 3];
        for o in 0..self.axis.order {
            let j = self.axis.control(row.first + o);
            let (p, wt) = (self.control_points[j], self.weights[j]);
            for (d, b) in [row.values[o], row.d1[o], row.d2[o]].into_iter().enumerate() {
                a[d] += p * (wt * b);
                w[d] += wt * b;
            }
        }
        if !(w[0] > 0.0) {
            return Err(SplineError::ZeroDenominator { t });
        }
        let point = a[0] / w[0];
        let first = (a[1] - point * w[1]) / w[0];
        let second = (a[2] - first * (2.0 * w[1]) - point * w[2]) / w[0];
        Ok(CurveDerivatives { point, first, second })
    }

    /// Applies `f` to every control point.
    pub fn map_points<F>(&self, f: F) -> Self
    where
        F: Fn(&Vector<D>) -> Vector<D>,
    {
        SplineCurve {
            control_points: self.control_points.iter().map(f).collect(),
            weights: self.weights.clone(),
            axis: self.axis.clone(),
        }
    }
}

impl SplineCurve<2> {
    /// Exact rational circle of order 3 (nine control points).
    pub fn circle(center: Vector<2>, radius: f64) -> Self {
        let (xs, ys, ws) = unit_circle_net();
        let pts = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| center + Vector::<2>::new(x, y) * radius)
            .collect();
        SplineCurve::new(pts, ws, circle_knots(), 3).expect("valid circle net")
    }
}

fn unit_circle_net() -> ([f64; 9], [f64; 9], Vec<f64>) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (
        [1., 1., 0., -1., -1., -1., 0., 1., 1.],
        [0., 1., 1., 1., 0., -1., -1., -1., 0.],
        vec![1., s, 1., s, 1., s, 1., s, 1.],
    )
}

fn circle_knots() -> KnotVector {
    KnotVector::new(vec![0., 0., 0., 0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1., 1., 1.]).expect("sorted")
}

/// Position and partial derivatives of a surface at one parameter pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePartials {
    pub s: Vector<3>,
    pub su: Vector<3>,
    pub sv: Vector<3>,
    pub suu: Vector<3>,
    pub suv: Vector<3>,
    pub svv: Vector<3>,
}

/// Tensor-product rational B-spline surface in 3D. Control point `(i, j)`
/// pairs the `i`-th `u` basis function with the `j`-th `v` one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineSurface {
    grid: Vec<Vec<Vector<3>>>,
    weights: Vec<Vec<f64>>,
    u: Axis,
    v: Axis,
}

impl SplineSurface {
    pub fn new(
        grid: Vec<Vec<Vector<3>>>,
        weights: Vec<Vec<f64>>,
        knots_u: KnotVector,
        knots_v: KnotVector,
        order_u: usize,
        order_v: usize,
    ) -> Result<Self, SplineError> {
        let rows = grid.len();
        let cols = grid.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || grid.iter().any(|r| r.len() != cols) {
            return Err(SplineError::NonRectangularGrid);
        }
        if weights.len() != rows || weights.iter().any(|r| r.len() != cols) {
            return Err(SplineError::WeightCount {
                points: rows * cols,
                weights: weights.iter().map(Vec::len).sum(),
            });
        }
        for (r, row) in weights.iter().enumerate() {
            check_weights(row).map_err(|_| {
                let c = row.iter().position(|w| !(w.is_finite() && *w > 0.0)).unwrap_or(0);
                SplineError::InvalidWeight { index: r * cols + c }
            })?;
        }
        let u = Axis::new(knots_u, order_u, rows)?;
        let v = Axis::new(knots_v, order_v, cols)?;
        Ok(SplineSurface { grid, weights, u, v })
    }

    pub fn bspline(
        grid: Vec<Vec<Vector<3>>>,
        knots_u: KnotVector,
        knots_v: KnotVector,
        order_u: usize,
        order_v: usize,
    ) -> Result<Self, SplineError> {
        let weights = grid.iter().map(|r| vec![1.0; r.len()]).collect();
        Self::new(grid, weights, knots_u, knots_v, order_u, order_v)
    }

    pub fn grid(&self) -> &[Vec<Vector<3>>] {
        &self.grid
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn knots_u(&self) -> &KnotVector {
        &self.u.knots
    }

    pub fn knots_v(&self) -> &KnotVector {
        &self.v.knots
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.u.order, self.v.order)
    }

    pub fn domain(&self) -> ((f64, f64), (f64, f64)) {
        (self.u.domain(), self.v.domain())
    }

    pub fn breakpoints(&self) -> (Vec<f64>, Vec<f64>) {
        (self.u.breakpoints(), self.v.breakpoints())
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<Vector<3>, SplineError> {
        Ok(self.partials(u, v)?.s)
    }

    /// `S`, `S_u`, `S_v`, `S_uu`, `S_uv`, `S_vv` via the quotient rule.
    pub fn partials(&self, u: f64, v: f64) -> Result<SurfacePartials, SplineError> {
        let ru = self.u.row(u)?;
        let rv = self.v.row(v)?;
        // index: 0 = value, 1 = d/du, 2 = d/dv, 3 = uu, 4 = uv, 5 = vv
        let mut a = [Vector::<3>::zeros(); 6];
        let mut w = [0.0; 6];
        for ou in 0..self.u.order {
            let i = self.u.control(ru.first + ou);
            let (nu, nu1, nu2) = (ru.values[ou], ru.d1[ou], ru.d2[ou]);
            for ov in 0..self.v.order {
                let j = self.v.control(rv.first + ov);
                let (nv, nv1, nv2) = (rv.values[ov], rv.d1[ov], rv.d2[ov]);
                let wt = self.weights[i][j];
                let p = self.grid[i][j];
                let terms = [nu * nv, nu1 * nv, nu * nv1, nu2 * nv, nu1 * nv1, nu * nv2];
                for (d, b) in terms.into_iter().enumerate() {
                    a[d] += p * (wt * b);
                    w[d] += wt * b;
                }
            }
        }
        if !(w[0] > 0.0) {
            return Err(SplineError::ZeroDenominator { t: u });
        }
        let s = a[0] / w[0];
        let su = (a[1] - s * w[1]) / w[0];
        let sv = (a[2] - s * w[2]) / w[0];
        let suu = (a[3] - su * (2.0 * w[1]) - s * w[3]) / w[0];
        let suv = (a[4] - su * w[2] - sv * w[1] - s * w[4]) / w[0];
        let svv = (a[5] - sv * (2.0 * w[2]) - s * w[5]) / w[0];
        Ok(SurfacePartials {
            s,
            su,
            sv,
            suu,
            suv,
            svv,
        })
    }

    pub fn map_points<F>(&self, f: F) -> Self
    where
        F: Fn(&Vector<3>) -> Vector<3>,
    {
        SplineSurface {
            grid: self.grid.iter().map(|r| r.iter().map(&f).collect()).collect(),
            weights: self.weights.clone(),
            u: self.u.clone(),
            v: self.v.clone(),
        }
    }

    /// Exact sphere: a rational circle in `u` swept along a rational
    /// half-circle meridian in `v`, from the south pole to the north pole.
    pub fn sphere(center: Vector<3>, radius: f64) -> Self {
        let (cx, cy, cw) = unit_circle_net();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mer_r = [0., 1., 1., 1., 0.];
        let mer_z = [-1., -1., 0., 1., 1.];
        let mer_w = [1., s, 1., s, 1.];
        let grid = (0..9)
            .map(|i| {
                (0..5)
                    .map(|j| center + Vector::<3>::new(mer_r[j] * cx[i], mer_r[j] * cy[i], mer_z[j]) * radius)
                    .collect()
            })
            .collect();
        let weights = (0..9).map(|i| (0..5).map(|j| cw[i] * mer_w[j]).collect()).collect();
        let kv = KnotVector::new(vec![0., 0., 0., 0.5, 0.5, 1., 1., 1.]).expect("sorted");
        SplineSurface::new(grid, weights, circle_knots(), kv, 3, 3).expect("valid sphere net")
    }

    /// Exact open cylinder of the given radius and height along `z`.
    pub fn cylinder(radius: f64, height: f64) -> Self {
        let (cx, cy, cw) = unit_circle_net();
        let grid = (0..9)
            .map(|i| {
                [0.0, height]
                    .iter()
                    .map(|&z| Vector::<3>::new(radius * cx[i], radius * cy[i], z))
                    .collect()
            })
            .collect();
        let weights = (0..9).map(|i| vec![cw[i]; 2]).collect();
        let kv = KnotVector::new(vec![0., 0., 1., 1.]).expect("sorted");
        SplineSurface::new(grid, weights, circle_knots(), kv, 3, 2).expect("valid cylinder net")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v2(x: f64, y: f64) -> Vector<2> {
        Vector::<2>::new(x, y)
    }

    #[test]
    fn order_one_is_indicator() {
        let kv = KnotVector::uniform(5);
        assert_eq!(basis(1, 1, 1.0, &kv).unwrap(), 1.0);
        assert_eq!(basis(1, 1, 1.5, &kv).unwrap(), 1.0);
        assert_eq!(basis(1, 1, 2.0, &kv).unwrap(), 0.0);
        assert_eq!(basis(1, 1, 0.5, &kv).unwrap(), 0.0);
    }

    #[test]
    fn cubic_uniform_values() {
        let kv = KnotVector::uniform(8);
        assert!((basis(0, 4, 2.0, &kv).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((basis(0, 4, 1.0, &kv).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(basis(0, 4, 4.0, &kv).unwrap(), 0.0);
    }

    #[test]
    fn hat_function_slope() {
        let kv = KnotVector::new(vec![0., 0.5, 1.0, 1.5, 2.0]).unwrap();
        // N_{1,2} rises on [0.5, 1)
        assert!((basis_derivative(1, 2, 0.7, &kv).unwrap() - 2.0).abs() < 1e-14);
        assert!((basis_derivative(1, 2, 1.2, &kv).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn basis_errors() {
        let kv = KnotVector::uniform(6);
        assert!(matches!(basis(0, 4, 7.0, &kv), Err(SplineError::OutOfDomain { .. })));
        assert!(matches!(basis(3, 4, 1.0, &kv), Err(SplineError::IndexOutOfRange { .. })));
        assert!(matches!(basis_derivative(0, 1, 1.0, &kv), Err(SplineError::OrderTooLow { .. })));
        assert!(matches!(basis_second_derivative(0, 2, 1.0, &kv), Err(SplineError::OrderTooLow { .. })));
        assert!(KnotVector::new(vec![0., 1., 0.5]).is_err());
        assert!(KnotVector::periodic(vec![0., 0.]).is_err());
    }

    #[test]
    fn periodic_basis_wraps() {
        let kv = KnotVector::periodic_uniform(6).unwrap();
        let a = basis(2, 4, 0.3, &kv).unwrap();
        let b = basis(2, 4, 1.3, &kv).unwrap();
        let c = basis(2, 4, -0.7, &kv).unwrap();
        assert!((a - b).abs() < 1e-14 && (a - c).abs() < 1e-14);
        let total: f64 = (0..6).map(|i| basis(i, 4, 0.123, &kv).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn table_matches_recursion() {
        let kv = KnotVector::new(vec![0., 0., 0., 0., 0.3, 0.5, 0.5, 0.8, 1., 1., 1., 1.]).unwrap();
        let axis = Axis::new(kv.clone(), 4, 8).unwrap();
        for &t in &[0.0, 0.1, 0.3, 0.45, 0.5, 0.77, 0.99, 1.0] {
            let row = axis.row(t).unwrap();
            for o in 0..4 {
                let i = row.first + o;
                assert!((row.values[o] - basis(i, 4, t, &kv).unwrap()).abs() < 1e-14, "t={t} i={i}");
                assert!((row.d1[o] - basis_derivative(i, 4, t, &kv).unwrap()).abs() < 1e-11);
                assert!((row.d2[o] - basis_second_derivative(i, 4, t, &kv).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_control_points() {
        let p = v2(3.0, -1.0);
        let curve = SplineCurve::bspline(vec![p; 6], KnotVector::clamped_uniform(6, 4).unwrap(), 4).unwrap();
        for i in 0..=10 {
            assert!((curve.eval(i as f64 / 10.0).unwrap() - p).norm() < 1e-14);
        }
    }

    #[test]
    fn quadratic_bezier_derivatives() {
        let kv = KnotVector::clamped_uniform(3, 3).unwrap();
        let curve = SplineCurve::bspline(vec![v2(0., 0.), v2(1., 1.), v2(2., 0.)], kv, 3).unwrap();
        let d = curve.derivatives(0.5).unwrap();
        assert!((d.point - v2(1.0, 0.5)).norm() < 1e-15);
        assert!((d.first - v2(2.0, 0.0)).norm() < 1e-14);
        assert!((d.second - v2(0.0, -4.0)).norm() < 1e-13);
    }

    #[test]
    fn straight_line_has_no_normal_acceleration() {
        let pts: Vec<_> = [0.0, 0.3, 1.1, 2.0, 2.2].iter().map(|&s| v2(s, 2.0 * s + 1.0)).collect();
        let curve = SplineCurve::bspline(pts, KnotVector::clamped_uniform(5, 4).unwrap(), 4).unwrap();
        let normal = v2(-2.0, 1.0).normalize();
        for i in 0..20 {
            let d = curve.derivatives(i as f64 / 19.0).unwrap();
            assert!(d.second.dot(&normal).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_circle() {
        let c = SplineCurve::circle(v2(1.0, 2.0), 3.0);
        for i in 0..50 {
            let p = c.eval(i as f64 / 49.0).unwrap();
            assert!(((p - v2(1.0, 2.0)).norm() - 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn curve_domain_errors() {
        let c = SplineCurve::bspline(vec![v2(0., 0.); 4], KnotVector::clamped_uniform(4, 4).unwrap(), 4).unwrap();
        assert!(matches!(c.eval(1.5), Err(SplineError::OutOfDomain { .. })));
        let bad = SplineCurve::new(vec![v2(0., 0.); 4], vec![1., 0., 1., 1.], KnotVector::clamped_uniform(4, 4).unwrap(), 4);
        assert_eq!(bad.unwrap_err(), SplineError::InvalidWeight { index: 1 });
        let short = SplineCurve::bspline(vec![v2(0., 0.); 3], KnotVector::periodic_uniform(3).unwrap(), 4);
        assert!(matches!(short, Err(SplineError::TooFewControls { .. })));
    }

    #[test]
    fn plane_surface_has_zero_second_partials() {
        let grid: Vec<Vec<Vector<3>>> = (0..4)
            .map(|i| (0..4).map(|j| Vector::<3>::new(i as f64, j as f64, 0.0)).collect())
            .collect();
        let kv = KnotVector::clamped_uniform(4, 4).unwrap();
        let s = SplineSurface::bspline(grid, kv.clone(), kv, 4, 4).unwrap();
        let p = s.partials(0.3, 0.6).unwrap();
        assert!(p.suu.norm() < 1e-12 && p.suv.norm() < 1e-12 && p.svv.norm() < 1e-12);
        assert!(p.s.z.abs() < 1e-15);
    }

    #[test]
    fn paraboloid_patch_partials() {
        let a = [0.0, 0.0, 1.0];
        let grid: Vec<Vec<Vector<3>>> = (0..3)
            .map(|i| (0..3).map(|j| Vector::<3>::new(i as f64 / 2.0, j as f64 / 2.0, a[i] + a[j])).collect())
            .collect();
        let kv = KnotVector::clamped_uniform(3, 3).unwrap();
        let s = SplineSurface::bspline(grid, kv.clone(), kv, 3, 3).unwrap();
        for &(u, v) in &[(0.0, 0.0), (0.25, 0.8), (1.0, 0.5)] {
            let p = s.partials(u, v).unwrap();
            assert!((p.s - Vector::<3>::new(u, v, u * u + v * v)).norm() < 1e-14);
            assert!((p.suu - Vector::<3>::new(0., 0., 2.)).norm() < 1e-12);
            assert!(p.suv.norm() < 1e-12);
            assert!((p.svv - Vector::<3>::new(0., 0., 2.)).norm() < 1e-12);
        }
    }

    #[test]
    fn exact_sphere_and_cylinder() {
        let c = Vector::<3>::new(0.5, -1.0, 2.0);
        let s = SplineSurface::sphere(c, 2.0);
        for i in 0..=10 {
            for j in 0..=10 {
                let p = s.eval(i as f64 / 10.0, j as f64 / 10.0).unwrap();
                assert!(((p - c).norm() - 2.0).abs() < 1e-13);
            }
        }
        let cyl = SplineSurface::cylinder(1.5, 3.0);
        let p = cyl.eval(0.3, 0.25).unwrap();
        assert!((p.xy().norm() - 1.5).abs() < 1e-13 && (p.z - 0.75).abs() < 1e-14);
    }

    #[test]
    fn ragged_grid_rejected() {
        let grid = vec![vec![Vector::<3>::zeros(); 3], vec![Vector::<3>::zeros(); 2]];
        let kv = KnotVector::clamped_uniform(2, 2).unwrap();
        let kv3 = KnotVector::clamped_uniform(3, 2).unwrap();
        assert_eq!(
            SplineSurface::bspline(grid, kv, kv3, 2, 2).unwrap_err(),
            SplineError::NonRectangularGrid
        );
    }
}
