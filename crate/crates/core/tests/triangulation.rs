mod common;

use std::collections::BTreeSet;

use clustershape::geometry::{EdgeKey, Sign};
use clustershape::triangulate::{triangulate, TriangulationError};
use common::*;
use num_traits::Zero;
use proptest::prelude::*;

/// Exact structural checks on a triangulation of `pts`.
fn check(pts: &[[f64; 2]]) -> Result<(), String> {
    let c = cloud(pts);
    let verts: Vec<[f64; 2]> = c.points().iter().map(xy).collect();
    let tri = triangulate(&c).map_err(|e| e.to_string())?;
    let tris: Vec<[usize; 3]> = tri.triangles().iter().map(|t| t.0).collect();

    for t in &tris {
        if exact_orient(verts[t[0]], verts[t[1]], verts[t[2]]) != Sign::Positive {
            return Err(format!("triangle {t:?} not strictly counter-clockwise"));
        }
    }
    if let Some((t, v)) = brute_force_delaunay(&verts, &tris) {
        return Err(format!("vertex {v} inside circumcircle of {t:?}"));
    }
    // union of triangles is the convex hull: equal exact areas, and every
    // edge is shared by at most two triangles
    let total = tris
        .iter()
        .map(|t| exact_double_area(&t.map(|i| verts[i])))
        .fold(num_rational::BigRational::zero(), |a, b| a + b);
    if total != exact_double_area(&exact_hull(&verts)) {
        return Err("triangle areas do not add up to the hull area".into());
    }
    for inc in tri.edges_of() {
        if inc.count > 2 || inc.count == 0 {
            return Err(format!("edge {} used {} times", inc.edge.key(), inc.count));
        }
    }
    let used: BTreeSet<usize> = tris.iter().flatten().copied().collect();
    if used.len() != verts.len() {
        return Err(format!("{} of {} vertices used", used.len(), verts.len()));
    }
    Ok(())
}

#[test]
fn random_clouds() {
    let mut r = rng(21);
    for n in [3, 4, 5, 10, 20, 40, 100, 500] {
        for _ in 0..5 {
            check(&uniform_points(&mut r, n)).unwrap();
        }
    }
}

#[test]
fn lattice_clouds() {
    let mut r = rng(22);
    for _ in 0..200 {
        let pts = lattice_points(&mut r, 30, 6);
        match check(&pts) {
            Ok(()) => {}
            Err(e) if e.contains("collinear") || e.contains("distinct") => {}
            Err(e) => panic!("{e} on {pts:?}"),
        }
    }
}

#[test]
fn cocircular_clouds() {
    for n in [4, 8, 16, 33, 100] {
        let pts = circle_points(n, 1.0, [0.0, 0.0]);
        check(&pts).unwrap();
        // exact cocircular octagon corners
        let s = 1.0;
        let oct = [[3., 1.], [1., 3.], [-1., 3.], [-3., 1.], [-3., -1.], [-1., -3.], [1., -3.], [3., -1.]];
        check(&oct.map(|[x, y]| [x * s, y * s])).unwrap();
    }
}

#[test]
fn unit_square_edges() {
    let tri = triangulate(&cloud(&[[0., 0.], [1., 0.], [1., 1.], [0., 1.]])).unwrap();
    let edges = tri.edges_of();
    assert_eq!(edges.len(), 5);
    let shared: Vec<EdgeKey> = edges.iter().filter(|e| e.count == 2).map(|e| e.edge.key()).collect();
    assert_eq!(shared, vec![EdgeKey::new(0, 2)]);
    assert_eq!(edges.iter().filter(|e| e.count == 1).count(), 4);
    assert!((tri.edge_length(EdgeKey::new(0, 2)) - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn degenerate_inputs() {
    assert_eq!(
        triangulate(&cloud(&[[0., 0.], [1., 1.]])).unwrap_err(),
        TriangulationError::TooFewPoints { found: 2 }
    );
    let line: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, 2.0 * i as f64]).collect();
    assert_eq!(triangulate(&cloud(&line)).unwrap_err(), TriangulationError::Collinear);
    // duplicates collapse before the count
    assert!(matches!(
        triangulate(&cloud(&[[0., 0.], [1., 0.], [0., 0.], [1., 0.]])),
        Err(TriangulationError::TooFewPoints { found: 2 })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn delaunay_invariants(pts in prop::collection::vec([-50i32..50, -50i32..50], 3..40)) {
        let pts: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] as f64 / 7.0, p[1] as f64 / 3.0]).collect();
        match check(&pts) {
            Ok(()) => {}
            Err(e) if e.contains("collinear") || e.contains("distinct") => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn insertion_order_does_not_change_the_triangulation(
        pts in prop::collection::vec([0i32..6, 0i32..6], 3..25),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let mut pts: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] as f64, p[1] as f64]).collect();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        let canon = |pts: &[[f64; 2]]| -> Option<BTreeSet<[u64; 6]>> {
            let tri = triangulate(&cloud(pts)).ok()?;
            Some(tri.triangles().iter().map(|t| {
                let mut v = t.0.map(|i| pts[i]);
                v.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
                [v[0][0].to_bits(), v[0][1].to_bits(), v[1][0].to_bits(), v[1][1].to_bits(), v[2][0].to_bits(), v[2][1].to_bits()]
            }).collect())
        };
        let before = canon(&pts);
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut rng(seed));
        let after = canon(&shuffled);
        prop_assert_eq!(before.is_some(), after.is_some());
        if let (Some(a), Some(b)) = (before, after) {
            // cocircular ties are broken by vertex index, so only compare when
            // the Delaunay triangulation is unique
            let unique = a.len() == b.len() && a == b;
            let tri = triangulate(&cloud(&pts)).unwrap();
            let verts = pts.clone();
            let ambiguous = tri.triangles().iter().any(|t| {
                verts.iter().enumerate().any(|(v, &p)| !t.0.contains(&v)
                    && exact_in_circumcircle(verts[t.0[0]], verts[t.0[1]], verts[t.0[2]], p) == Sign::Zero)
            });
            prop_assert!(unique || ambiguous);
        }
    }
}
