//! SVG rendering of a [`ShapeReport`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::pipeline::ShapeReport;
use crate::spline::SplineError;

/// Points sampled along each fitted curve.
pub const SAMPLES_PER_LOOP: usize = 256;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("only 2D reports can be drawn, got dimension {0}")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

struct Frame {
    x0: f64,
    y1: f64,
    k: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = [f64; 2]>) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        if !lo[0].is_finite() {
            return Frame { x0: 0.0, y1: 1.0, k: 1.0 };
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let k = if extent > 0.0 { (CANVAS - 2.0 * MARGIN) / extent } else { 1.0 };
        Frame { x0: lo[0], y1: hi[1], k }
    }

    // SVG's y axis points down
    fn map(&self, [x, y]: [f64; 2]) -> (f64, f64) {
        (MARGIN + (x - self.x0) * self.k, MARGIN + (self.y1 - y) * self.k)
    }
}

pub fn render_svg(report: &ShapeReport) -> Result<String, SvgError> {
    if report.dim != 2 {
        return Err(SvgError::UnsupportedDimension(report.dim));
    }
    let mut curves = Vec::new();
    for c in &report.clusters {
        let mut per_loop = Vec::new();
        for lp in &c.loops {
            per_loop.push(match &lp.fit {
                Some(f) => Some(f.sample(SAMPLES_PER_LOOP)?),
                None => None,
            });
        }
        curves.push(per_loop);
    }
    let frame = Frame::fit(
        report
            .clusters
            .iter()
            .flat_map(|c| c.loops.iter().flat_map(|l| l.positions.iter().copied()))
            .chain(curves.iter().flatten().flatten().flatten().copied()),
    );

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (c, sampled) in report.clusters.iter().zip(&curves) {
        let color = PALETTE[c.id % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<g id="cluster-{}" class="cluster" stroke="{color}" fill="{color}">"#,
            c.id
        );
        for (lp, samples) in c.loops.iter().zip(sampled) {
            if let Some(samples) = samples {
                let mut d = String::new();
                for (i, &p) in samples.iter().enumerate() {
                    let (x, y) = frame.map(p);
                    let _ = write!(d, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
                }
                d.push('Z');
                let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke-width="1.5"/>"#);
            }
            for &p in &lp.positions {
                let (x, y) = frame.map(p);
                let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.5" stroke="none"/>"#);
            }
        }
        if let Some(anchor) = c.loops.iter().find(|l| !l.hole).and_then(|l| l.positions.first()) {
            let (x, y) = frame.map(*anchor);
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="12" stroke="none">#{} {:.4}</text>"#,
                y - 6.0,
                c.id,
                c.score
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_svg(report: &ShapeReport, path: &Path) -> Result<(), SvgError> {
    let svg = render_svg(report)?;
    fs::write(path, svg).map_err(|source| SvgError::Io {
        path: path.display().to_string(),
        source,
    })
}
