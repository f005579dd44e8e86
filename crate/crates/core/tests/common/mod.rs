//! Exact-arithmetic oracles and random instance generators shared by the
//! integration tests.
#![allow(dead_code)]

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use clustershape::geometry::{Point, PointCloud, Sign};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn sign_of(x: &BigRational) -> Sign {
    match x.cmp(&BigRational::zero()) {
        Ordering::Less => Sign::Negative,
        Ordering::Equal => Sign::Zero,
        Ordering::Greater => Sign::Positive,
    }
}

// Relative bound far above the true rounding error of the plain determinant
// evaluations below; results inside it are recomputed exactly.
const FILTER: f64 = 1e-10;

fn filtered(det: f64, permanent: f64) -> Option<Sign> {
    (det.abs() > FILTER * permanent).then(|| Sign::of(det))
}

/// Exact sign of det[[bx-ax, by-ay], [cx-ax, cy-ay]].
pub fn exact_orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Sign {
    let (l, r) = ((b[0] - a[0]) * (c[1] - a[1]), (b[1] - a[1]) * (c[0] - a[0]));
    if let Some(s) = filtered(l - r, l.abs() + r.abs()) {
        return s;
    }
    let (ax, ay) = (q(a[0]), q(a[1]));
    let det = (q(b[0]) - &ax) * (q(c[1]) - &ay) - (q(b[1]) - &ay) * (q(c[0]) - &ax);
    sign_of(&det)
}

/// Exact sign of the lifted incircle determinant, positive when `d` is
/// inside the circle through counter-clockwise `a, b, c`.
pub fn exact_incircle_raw(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Sign {
    let f = |p: [f64; 2]| {
        let (x, y) = (p[0] - d[0], p[1] - d[1]);
        (x, y, x * x + y * y)
    };
    let ((ax, ay, al), (bx, by, bl), (cx, cy, cl)) = (f(a), f(b), f(c));
    let det = ax * (by * cl - bl * cy) - ay * (bx * cl - bl * cx) + al * (bx * cy - by * cx);
    let perm = ax.abs() * ((by * cl).abs() + (bl * cy).abs())
        + ay.abs() * ((bx * cl).abs() + (bl * cx).abs())
        + al * ((bx * cy).abs() + (by * cx).abs());
    if let Some(s) = filtered(det, perm) {
        return s;
    }
    let row = |p: [f64; 2]| {
        let x = q(p[0]) - q(d[0]);
        let y = q(p[1]) - q(d[1]);
        let l = &x * &x + &y * &y;
        (x, y, l)
    };
    let (ax, ay, al) = row(a);
    let (bx, by, bl) = row(b);
    let (cx, cy, cl) = row(c);
    let det = &ax * (&by * &cl - &bl * &cy) - &ay * (&bx * &cl - &bl * &cx) + &al * (&bx * &cy - &by * &cx);
    sign_of(&det)
}

/// Orientation-normalized incircle: positive strictly inside the circle
/// through `a, b, c` regardless of their order.
pub fn exact_in_circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Sign {
    let raw = exact_incircle_raw(a, b, c, d);
    match exact_orient(a, b, c) {
        Sign::Positive => raw,
        Sign::Negative => raw.flip(),
        Sign::Zero => panic!("collinear triangle"),
    }
}

/// Twice the exact signed area of a polygon.
pub fn exact_double_area(poly: &[[f64; 2]]) -> BigRational {
    let n = poly.len();
    let mut s = BigRational::zero();
    for i in 0..n {
        let (p, r) = (poly[i], poly[(i + 1) % n]);
        s += q(p[0]) * q(r[1]) - q(r[0]) * q(p[1]);
    }
    s
}

/// Convex hull by monotone chain with exact orientation, counter-clockwise,
/// collinear points dropped.
pub fn exact_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &x in &p {
        while lower.len() >= 2 && exact_orient(lower[lower.len() - 2], lower[lower.len() - 1], x) != Sign::Positive {
            lower.pop();
        }
        lower.push(x);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &x in p.iter().rev() {
        while upper.len() >= 2 && exact_orient(upper[upper.len() - 2], upper[upper.len() - 1], x) != Sign::Positive {
            upper.pop();
        }
        upper.push(x);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn abs(x: &BigRational) -> BigRational {
    x.abs()
}

pub fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn xy(p: &Point) -> [f64; 2] {
    [p.x(), p.y()]
}

pub fn cloud(rows: &[[f64; 2]]) -> PointCloud {
    PointCloud::from_rows(rows.iter().map(|r| r.to_vec())).unwrap()
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect()
}

/// Points on a small integer lattice: many exact collinear and cocircular
/// subsets.
pub fn lattice_points(rng: &mut ChaCha8Rng, n: usize, side: i32) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| [rng.random_range(0..side) as f64, rng.random_range(0..side) as f64])
        .collect()
}

/// Standard normal sample by Box–Muller.
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn circle_points(n: usize, r: f64, center: [f64; 2]) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        })
        .collect()
}

/// Every (triangle, vertex) pair checked with the exact incircle oracle.
/// Returns the first violation.
pub fn brute_force_delaunay(points: &[[f64; 2]], triangles: &[[usize; 3]]) -> Option<([usize; 3], usize)> {
    for t in triangles {
        let [a, b, c] = t.map(|i| points[i]);
        for (v, &p) in points.iter().enumerate() {
            if t.contains(&v) {
                continue;
            }
            if exact_in_circumcircle(a, b, c, p) == Sign::Positive {
                return Some((*t, v));
            }
        }
    }
    None
}
