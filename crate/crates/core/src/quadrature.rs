//! Composite Gauss–Legendre rules over knot spans.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

/// Default number of nodes per span.
pub const DEFAULT_QUADRATURE_ORDER: usize = 16;

/// A Gauss–Legendre rule with nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(order: usize) -> Self {
        let order = NonZeroUsize::new(order.max(1)).expect("non-zero");
        let mut nodes: Vec<(f64, f64)> = GaussLegendre::new(order).as_node_weight_pairs().to_vec();
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        Rule { nodes }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Mapped `(abscissa, weight)` pairs on `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
        self.nodes.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }
}

/// Consecutive pairs of `breaks` with positive length.
pub fn spans(breaks: &[f64]) -> impl Iterator<Item = (f64, f64)> + '_ {
    breaks.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1]))
}

/// Breakpoints restricted to `[lo, hi]`, with both ends included.
pub fn clip_breaks(breaks: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![lo];
    out.extend(breaks.iter().copied().filter(|&b| lo < b && b < hi));
    out.push(hi);
    out
}
