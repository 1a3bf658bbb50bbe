use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use tgeo_core::lorentz::boost;
use tgeo_core::vector_algebra::{gram_determinant, gram_matrix, Skeleton};
use tgeo_core::{Error, GeometryKind, PairVector, Point, WorldFunctionSpec};

fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec())
}

// Minkowski half-interval computed from scratch.
fn half_interval(p: &[f64], q: &[f64]) -> f64 {
    let d: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
    0.5 * (d[0] * d[0] - d[1..].iter().map(|x| x * x).sum::<f64>())
}

#[test]
fn sigma_examples() {
    let m = WorldFunctionSpec::minkowski(4);
    assert_eq!(m.sigma(&Point::origin(4), &Point::origin(4)).unwrap(), 0.0);
    let d = WorldFunctionSpec::distorted(4, 0.01);
    assert_eq!(d.sigma(&Point::origin(4), &pt(&[1.0, 0.0, 0.0, 0.0])).unwrap(), 0.51);
    assert_eq!(d.sigma(&Point::origin(4), &pt(&[1.0, 1.0, 0.0, 0.0])).unwrap(), 0.0);
    let e = WorldFunctionSpec::euclidean(2);
    assert_eq!(e.squared_length(&PairVector::new([0.0, 0.0], [3.0, 4.0])).unwrap(), 25.0);
    assert_eq!(m.squared_length(&PairVector::new([0.0; 4], [1.0, 2.0, 0.0, 0.0])).unwrap(), -3.0);
    let s: f64 = 1.7;
    let len = d.squared_length(&PairVector::new([0.0; 4], [s, 0.0, 0.0, 0.0])).unwrap();
    assert!((len - (s * s + 0.02)).abs() < 1e-15);
}

#[test]
fn spec_validation() {
    assert!(matches!(WorldFunctionSpec::euclidean(0).validated(), Err(Error::InvalidSpec(_))));
    assert!(WorldFunctionSpec::distorted(4, -0.1).validated().is_err());
    assert!(serde_json::from_str::<WorldFunctionSpec>(r#"{"kind":"euclidean","n":2,"bogus":1}"#).is_err());
    let parsed: WorldFunctionSpec = "distorted:4:0.01".parse().unwrap();
    assert_eq!(parsed.kind, GeometryKind::Distorted);
    assert_eq!(parsed.d, 0.01);
    let back: WorldFunctionSpec = parsed.to_string().parse().unwrap();
    assert_eq!(back, parsed);
    let e = WorldFunctionSpec::euclidean(3);
    assert!(matches!(
        e.sigma(&Point::origin(2), &Point::origin(3)),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(Point::try_new(vec![f64::NAN]).is_err());
}

#[test]
fn distortion_cancels_for_disjoint_timelike_pairs() {
    let d = WorldFunctionSpec::distorted(4, 0.01);
    let m = d.undistorted();
    let (p0, p1) = (pt(&[0.0; 4]), pt(&[1.0, 0.0, 0.0, 0.0]));
    let (q0, q1) = (pt(&[3.0, 0.5, 0.0, 0.0]), pt(&[4.1, 0.7, 0.1, 0.0]));
    let v = PairVector::new(p0.clone(), p1.clone());
    let w = PairVector::new(q0, q1.clone());
    assert_eq!(d.scalar_product(&v, &w).unwrap(), m.scalar_product(&v, &w).unwrap());
    // adjacent links lose one lambda0^2
    let w2 = PairVector::new(p1, q1);
    let dm = d.scalar_product(&v, &w2).unwrap() - m.scalar_product(&v, &w2).unwrap();
    assert!((dm + 0.01).abs() < 1e-15);
}

#[test]
fn gram_determinant_matches_coordinate_gram() {
    let e = WorldFunctionSpec::euclidean(3);
    let pts = [
        [0.3, -1.2, 0.7],
        [1.9, 0.4, -0.5],
        [-0.8, 2.2, 1.1],
        [0.5, 0.6, -2.4],
    ];
    let sk = Skeleton::new(pts.iter().map(|p| pt(p)).collect()).unwrap();
    let rows: Vec<DVector<f64>> = pts[1..]
        .iter()
        .map(|p| DVector::from_iterator(3, p.iter().zip(&pts[0]).map(|(a, b)| a - b)))
        .collect();
    let x = DMatrix::from_columns(&rows);
    let want = (x.transpose() * x).determinant();
    let got = gram_determinant(&e, &sk).unwrap();
    assert!((got - want).abs() <= 1e-10 * want.abs());
    let collinear = Skeleton::new(vec![pt(&[0.0, 0.0]), pt(&[1.0, 1.0]), pt(&[3.0, 3.0])]).unwrap();
    assert!(gram_determinant(&WorldFunctionSpec::euclidean(2), &collinear).unwrap().abs() < 1e-12);
    let ortho = Skeleton::new(vec![pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[0.0, 1.0])]).unwrap();
    assert_eq!(gram_matrix(&WorldFunctionSpec::euclidean(2), &ortho).unwrap().determinant(), 1.0);
}

fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

fn spec_strategy() -> impl Strategy<Value = WorldFunctionSpec> {
    prop_oneof![
        (1usize..5).prop_map(WorldFunctionSpec::euclidean),
        (2usize..5).prop_map(WorldFunctionSpec::minkowski),
        (2usize..5, 0.0f64..0.5).prop_map(|(n, d)| WorldFunctionSpec::distorted(n, d)),
    ]
}

proptest! {
    #[test]
    fn sigma_is_symmetric_and_vanishes_on_the_diagonal(
        (spec, p, q) in spec_strategy().prop_flat_map(|s| (Just(s), coords(s.n), coords(s.n)))
    ) {
        let (p, q) = (Point::new(p), Point::new(q));
        prop_assert_eq!(spec.sigma(&p, &q).unwrap(), spec.sigma(&q, &p).unwrap());
        prop_assert_eq!(spec.sigma(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn sigma_matches_the_closed_form(p in coords(4), q in coords(4), d in 0.0f64..0.5) {
        let spec = WorldFunctionSpec::distorted(4, d);
        let m = half_interval(&p, &q);
        let want = if m > 0.0 { m + d } else { m };
        let got = spec.sigma(&Point::new(p), &Point::new(q)).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn scalar_product_is_bilinear_in_flat_spaces(
        (spec, a, b, c, e) in prop_oneof![
            (1usize..5).prop_map(WorldFunctionSpec::euclidean),
            (2usize..5).prop_map(WorldFunctionSpec::minkowski),
        ].prop_flat_map(|s| (Just(s), coords(s.n), coords(s.n), coords(s.n), coords(s.n)))
    ) {
        // additivity in the second slot: CE = CM + ME through the midpoint M
        let (a, b, c, e) = (Point::new(a), Point::new(b), Point::new(c), Point::new(e));
        let mid = Point::new(c.coords().iter().zip(e.coords()).map(|(x, y)| 0.5 * (x + y)).collect::<Vec<_>>());
        let v = PairVector::new(a.clone(), b.clone());
        let whole = spec.scalar_product(&v, &PairVector::new(c.clone(), e.clone())).unwrap();
        let h1 = spec.scalar_product(&v, &PairVector::new(c, mid.clone())).unwrap();
        let h2 = spec.scalar_product(&v, &PairVector::new(mid, e)).unwrap();
        prop_assert!((whole - h1 - h2).abs() <= 1e-9 * (1.0 + whole.abs()));
        prop_assert!((spec.scalar_product(&v, &v).unwrap() - spec.squared_length(&v).unwrap()).abs() < 1e-9 * (1.0 + whole.abs()));
    }

    #[test]
    fn distortion_cancels_exactly(p0 in coords(4), t in prop::collection::vec(0.5f64..5.0, 3), d in 1e-4f64..0.1) {
        // three stacked timelike steps: P0 -> P1 -> Q0 -> Q1, every pair timelike
        let p0 = Point::new(p0);
        let step = |p: &Point, dt: f64| p.offset(&[dt, 0.1 * dt, -0.05 * dt, 0.0]);
        let p1 = step(&p0, t[0]);
        let q0 = step(&p1, t[1]);
        let q1 = step(&q0, t[2]);
        let spec = WorldFunctionSpec::distorted(4, d);
        let v = PairVector::new(p0, p1);
        let w = PairVector::new(q0, q1);
        let a = spec.scalar_product(&v, &w).unwrap();
        let b = spec.undistorted().scalar_product(&v, &w).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn poincare_invariance(
        p in coords(4), q in coords(4), shift in coords(4),
        rap in prop::collection::vec(-1.0f64..1.0, 3), d in 0.0f64..0.2
    ) {
        let spec = WorldFunctionSpec::distorted(4, d);
        let g = (1.0 + rap.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let b = boost(&[g, rap[0], rap[1], rap[2]]);
        let map = |x: &[f64]| {
            let y = &b * DVector::from_column_slice(x);
            Point::new(y.iter().zip(&shift).map(|(a, s)| a + s).collect::<Vec<_>>())
        };
        let m = half_interval(&p, &q);
        prop_assume!(m.abs() > 1e-6 * (1.0 + p.iter().chain(&q).map(|x| x * x).sum::<f64>()));
        let before = spec.sigma(&Point::new(p.clone()), &Point::new(q.clone())).unwrap();
        let after = spec.sigma(&map(&p), &map(&q)).unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * (1.0 + before.abs() * 100.0));
    }

    #[test]
    fn spec_json_round_trip(spec in spec_strategy()) {
        let json = serde_json::to_string(&spec).unwrap();
        prop_assert_eq!(serde_json::from_str::<WorldFunctionSpec>(&json).unwrap(), spec);
    }
}
