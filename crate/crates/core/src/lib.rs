//! Shape-complexity scoring for point-cloud clusters.
//!
//! The pipeline triangulates a 2D point set, splits it into clusters using
//! Delaunay edge-length statistics, extracts and orients each cluster's
//! boundary, fits a closed cubic B-spline to every boundary loop and
//! integrates squared curvature along the fitted curves. Surface scoring for
//! user-supplied NURBS control grids is available through [`curvature`].

// `!(a < b)` is used on purpose so that NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod curvature;
pub mod fit;
pub mod geometry;
pub mod ingest;
pub mod pipeline;
pub mod quadrature;
pub mod spline;
pub mod svg;
pub mod triangulate;
