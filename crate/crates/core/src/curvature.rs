//! Curvature of fitted curves and surfaces, and the shape score.
//!
//! For a closed curve the score is `∫ κ² ds`. For a surface patch it is
//! `½ ∬ (κ₁² + κ₂²) dσ`, evaluated through the identity
//! `(κ₁² + κ₂²) / 2 = 2H² − K` from the first and second fundamental forms.
//! Both integrals use composite Gauss–Legendre quadrature on every knot span
//! (every span rectangle for surfaces), and report the change obtained by
//! doubling the rule as an error estimate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{clip_breaks, spans, Rule};
use crate::spline::{SplineCurve, SplineError, SplineSurface, SurfacePartials, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error("curve has zero speed at t = {t}")]
    SingularParametrization { t: f64 },
    #[error("tangent plane is degenerate at (u, v) = ({u}, {v})")]
    SingularPoint { u: f64, v: f64 },
    #[error("first fundamental form is not positive definite (det = {det})")]
    InvalidForms { det: f64 },
    #[error("integration domain [{lo}, {hi}] lies outside the surface domain")]
    InvalidDomain { lo: f64, hi: f64 },
    #[error(transparent)]
    Spline(#[from] SplineError),
}

/// Entries of the first (`E`, `F`, `G`) and second (`L`, `M`, `N`)
/// fundamental forms, with the unit normal used for the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub normal: Vector<3>,
}

impl FundamentalForms {
    pub fn det_first(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    pub fn det_second(&self) -> f64 {
        self.l * self.n - self.m * self.m
    }

    fn checked_det(&self) -> Result<f64, CurvatureError> {
        let det = self.det_first();
        if det > 0.0 && self.e > 0.0 && self.g > 0.0 {
            Ok(det)
        } else {
            Err(CurvatureError::InvalidForms { det })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub gaussian: f64,
    pub mean: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl CurvatureSample {
    /// `2H² − K`, the mean of the squared principal curvatures.
    pub fn shape_density(&self) -> f64 {
        2.0 * self.mean * self.mean - self.gaussian
    }
}

/// Curvature of a curve at `t`. Planar curves use the signed-area form
/// `|x′y″ − y′x″| / |r′|³`; other dimensions use the Gram form.
pub fn plane_curvature<const D: usize>(curve: &SplineCurve<D>, t: f64) -> Result<f64, CurvatureError> {
    let d = curve.derivatives(t)?;
    curvature_from_derivatives(&d.first, &d.second).ok_or(CurvatureError::SingularParametrization { t })
}

fn curvature_from_derivatives<const D: usize>(r1: &Vector<D>, r2: &Vector<D>) -> Option<f64> {
    let speed2 = r1.norm_squared();
    if !(speed2 > 0.0) {
        return None;
    }
    let cross2 = cross_norm_squared(r1, r2);
    Some(cross2.sqrt() / (speed2 * speed2.sqrt()))
}

/// `|a × b|²` generalised to any dimension.
fn cross_norm_squared<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> f64 {
    if D == 2 {
        let c = a[0] * b[1] - a[1] * b[0];
        c * c
    } else {
        (a.norm_squared() * b.norm_squared() - a.dot(b).powi(2)).max(0.0)
    }
}

/// `κ² |r′|` at `t`, the integrand of the curve score.
fn curve_density<const D: usize>(curve: &SplineCurve<D>, t: f64) -> Result<f64, CurvatureError> {
    let d = curve.derivatives(t)?;
    let speed2 = d.first.norm_squared();
    if !(speed2 > 0.0) {
        return Err(CurvatureError::SingularParametrization { t });
    }
    Ok(cross_norm_squared(&d.first, &d.second) / (speed2 * speed2 * speed2.sqrt()))
}

pub fn forms_from_partials(p: &SurfacePartials) -> Option<FundamentalForms> {
    let cross = p.su.cross(&p.sv);
    let len = cross.norm();
    let scale = p.su.norm() * p.sv.norm();
    if !(len > 1e-14 * scale) || scale == 0.0 {
        return None;
    }
    let normal = cross / len;
    Some(FundamentalForms {
        e: p.su.dot(&p.su),
        f: p.su.dot(&p.sv),
        g: p.sv.dot(&p.sv),
        l: p.suu.dot(&normal),
        m: p.suv.dot(&normal),
        n: p.svv.dot(&normal),
        normal,
    })
}

pub fn fundamental_forms(surface: &SplineSurface, u: f64, v: f64) -> Result<FundamentalForms, CurvatureError> {
    forms_from_partials(&surface.partials(u, v)?).ok_or(CurvatureError::SingularPoint { u, v })
}

/// `K = det II / det I` and `H = ½ tr(II · I⁻¹)`.
pub fn gaussian_mean(forms: &FundamentalForms) -> Result<(f64, f64), CurvatureError> {
    let det = forms.checked_det()?;
    let k = forms.det_second() / det;
    let h = (forms.e * forms.n - 2.0 * forms.f * forms.m + forms.g * forms.l) / (2.0 * det);
    Ok((k, h))
}

/// Roots of `det(II − κ I) = 0`, largest first.
///
/// Solved as the eigenvalues of the shape operator `I⁻¹ II`.
pub fn principal_curvatures(forms: &FundamentalForms) -> Result<(f64, f64), CurvatureError> {
    let det = forms.checked_det()?;
    let (e, f, g) = (forms.e, forms.f, forms.g);
    let (l, m, n) = (forms.l, forms.m, forms.n);
    // I⁻¹ = [g, -f; -f, e] / det
    let w11 = (g * l - f * m) / det;
    let w12 = (g * m - f * n) / det;
    let w21 = (e * m - f * l) / det;
    let w22 = (e * n - f * m) / det;
    let half_trace = 0.5 * (w11 + w22);
    let half_gap = 0.5 * (w11 - w22);
    // discriminant written as a sum that stays non-negative for symmetric pencils
    let disc = (half_gap * half_gap + w12 * w21).max(0.0).sqrt();
    Ok((half_trace + disc, half_trace - disc))
}

pub fn curvature_sample(forms: &FundamentalForms) -> Result<CurvatureSample, CurvatureError> {
    let (gaussian, mean) = gaussian_mean(forms)?;
    let (kappa1, kappa2) = principal_curvatures(forms)?;
    Ok(CurvatureSample {
        gaussian,
        mean,
        kappa1,
        kappa2,
    })
}

/// Gaussian and mean curvature of a graph `z = f(u, v)` from its partial
/// derivatives (Monge patch form).
pub fn monge_curvatures(fu: f64, fv: f64, fuu: f64, fuv: f64, fvv: f64) -> (f64, f64) {
    let w = 1.0 + fu * fu + fv * fv;
    let k = (fuu * fvv - fuv * fuv) / (w * w);
    let h = ((1.0 + fv * fv) * fuu - 2.0 * fu * fv * fuv + (1.0 + fu * fu) * fvv) / (2.0 * w.powf(1.5));
    (k, h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureDiagnostics {
    /// Nodes per span.
    pub order: usize,
    /// `|I(2·order) − I(order)|`.
    pub estimated_error: f64,
    /// Parameter locations where the integrand was undefined and skipped.
    pub singular_points: Vec<[f64; 2]>,
}

impl QuadratureDiagnostics {
    pub fn reliable(&self) -> bool {
        self.singular_points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeScore {
    pub value: f64,
    /// Per-loop (curves) or per-span-rectangle (surfaces) parts of `value`.
    pub contributions: Vec<f64>,
    pub diagnostics: QuadratureDiagnostics,
}

impl ShapeScore {
    pub fn zero(order: usize) -> Self {
        ShapeScore {
            value: 0.0,
            contributions: Vec::new(),
            diagnostics: QuadratureDiagnostics {
                order,
                estimated_error: 0.0,
                singular_points: Vec::new(),
            },
        }
    }
}

fn curve_integral<const D: usize>(curve: &SplineCurve<D>, rule: &Rule) -> Result<f64, CurvatureError> {
    let mut total = 0.0;
    for (a, b) in spans(&curve.breakpoints()) {
        for (t, w) in rule.on(a, b) {
            total += w * curve_density(curve, t)?;
        }
    }
    Ok(total)
}

/// `Σ_loops ∫ κ² |r′| dt`, one Gauss–Legendre rule per knot span.
pub fn shape_score_curve<const D: usize>(loops: &[SplineCurve<D>], order: usize) -> Result<ShapeScore, CurvatureError> {
    let rule = Rule::new(order);
    let fine = Rule::new(2 * order);
    let parts: Vec<(f64, f64)> = loops
        .par_iter()
        .map(|c| Ok((curve_integral(c, &rule)?, curve_integral(c, &fine)?)))
        .collect::<Result<_, CurvatureError>>()?;
    let contributions: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let value = contributions.iter().sum();
    let refined: f64 = parts.iter().map(|p| p.1).sum();
    Ok(ShapeScore {
        value,
        contributions,
        diagnostics: QuadratureDiagnostics {
            order: rule.order(),
            estimated_error: (refined - value).abs(),
            singular_points: Vec::new(),
        },
    })
}

/// Rectangle of parameter space to integrate over.
pub type SurfaceDomain = ((f64, f64), (f64, f64));

struct PatchSum {
    value: f64,
    singular: Vec<[f64; 2]>,
}

fn patch_integral(surface: &SplineSurface, rule: &Rule, us: (f64, f64), vs: (f64, f64)) -> Result<PatchSum, CurvatureError> {
    let mut value = 0.0;
    let mut singular = Vec::new();
    for (u, wu) in rule.on(us.0, us.1) {
        for (v, wv) in rule.on(vs.0, vs.1) {
            let p = surface.partials(u, v)?;
            match forms_from_partials(&p).map(|f| curvature_sample(&f).map(|s| (f, s))) {
                Some(Ok((forms, sample))) => {
                    value += wu * wv * sample.shape_density() * forms.det_first().sqrt();
                }
                _ => singular.push([u, v]),
            }
        }
    }
    Ok(PatchSum { value, singular })
}

/// `½ ∬ (κ₁² + κ₂²) √(EG − F²) du dv` over `domain` (the whole surface
/// when `None`). Nodes with a degenerate tangent plane are skipped and
/// listed in the diagnostics.
pub fn shape_score_surface(
    surface: &SplineSurface,
    domain: Option<SurfaceDomain>,
    order: usize,
) -> Result<ShapeScore, CurvatureError> {
    let (full_u, full_v) = surface.domain();
    let ((u0, u1), (v0, v1)) = domain.unwrap_or((full_u, full_v));
    for (lo, hi, full) in [(u0, u1, full_u), (v0, v1, full_v)] {
        if !(lo < hi) || lo < full.0 || hi > full.1 {
            return Err(CurvatureError::InvalidDomain { lo, hi });
        }
    }
    let (bu, bv) = surface.breakpoints();
    let bu = clip_breaks(&bu, u0, u1);
    let bv = clip_breaks(&bv, v0, v1);
    let patches: Vec<((f64, f64), (f64, f64))> =
        spans(&bu).flat_map(|us| spans(&bv).map(move |vs| (us, vs))).collect();

    let rule = Rule::new(order);
    let fine = Rule::new(2 * order);
    let parts: Vec<(PatchSum, PatchSum)> = patches
        .par_iter()
        .map(|&(us, vs)| Ok((patch_integral(surface, &rule, us, vs)?, patch_integral(surface, &fine, us, vs)?)))
        .collect::<Result<_, CurvatureError>>()?;

    let contributions: Vec<f64> = parts.iter().map(|p| p.0.value).collect();
    let value = contributions.iter().sum();
    let refined: f64 = parts.iter().map(|p| p.1.value).sum();
    let singular_points = parts.iter().flat_map(|p| p.0.singular.iter().copied()).collect();
    Ok(ShapeScore {
        value,
        contributions,
        diagnostics: QuadratureDiagnostics {
            order: rule.order(),
            estimated_error: (refined - value).abs(),
            singular_points,
        },
    })
}
