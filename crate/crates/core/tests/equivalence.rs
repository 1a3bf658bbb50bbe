use proptest::prelude::*;
use tgeo_core::equivalence::{
    equivalent_family, scalar_multiply, solve_equivalent_null, solve_equivalent_timelike, solve_skeleton_equivalence,
    vector_sum, ExistenceVerdict, FamilyKind, MultiplyVersion, SolutionFamily, SolverConfig, SumOrder, TimelikeCase,
};
use tgeo_core::vector_algebra::{equivalence_residuals, is_equivalent, Skeleton};
use tgeo_core::{Error, PairVector, Point, WorldFunctionSpec};

fn link(s: f64) -> PairVector {
    PairVector::new([0.0; 4], [s, 0.0, 0.0, 0.0])
}

#[test]
fn case_one_family_is_equivalent_everywhere() {
    let spec = WorldFunctionSpec::distorted_lambda(0.1);
    let sol = solve_equivalent_timelike(&spec, 1.0, 0.5, 0.2, [0.0, 0.0, 1.0], TimelikeCase::I).unwrap();
    assert_eq!(sol.family.dof, 2);
    for r in sol.family.sample_representatives(32) {
        let w = PairVector::new(sol.q0.clone(), r[0].clone());
        let res = equivalence_residuals(&spec, &link(1.0), &w).unwrap();
        assert!(res[0].abs() < 1e-12 && res[1].abs() < 1e-12, "{res:?}");
    }
}

#[test]
fn zero_distortion_collapses_to_translation() {
    let spec = WorldFunctionSpec::distorted(4, 0.0);
    let a = solve_equivalent_timelike(&spec, 1.0, 0.5, 0.2, [1.0, 0.0, 0.0], TimelikeCase::I).unwrap();
    let b = solve_equivalent_timelike(&spec, 1.0, 0.5, 0.2, [0.0, 1.0, 0.0], TimelikeCase::I).unwrap();
    assert_eq!(a.alpha0, 0.0);
    assert_eq!(a.gamma, [0.0; 3]);
    assert_eq!(a.q1, b.q1);
    assert_eq!(a.q1.coords(), &[1.5, 0.2, 0.0, 0.0]);
}

#[test]
fn timelike_preconditions() {
    let spec = WorldFunctionSpec::distorted_lambda(0.1);
    assert!(matches!(
        solve_equivalent_timelike(&spec, -1.0, 0.0, 0.0, [1.0, 0.0, 0.0], TimelikeCase::II),
        Err(Error::NonTimelike(_))
    ));
    // Q0 spacelike to P0
    assert!(matches!(
        solve_equivalent_timelike(&spec, 1.0, 0.1, 3.0, [1.0, 0.0, 0.0], TimelikeCase::I),
        Err(Error::NonTimelike(_))
    ));
    assert!(matches!(
        solve_equivalent_timelike(&WorldFunctionSpec::minkowski(4), 1.0, 0.5, 0.2, [1.0, 0.0, 0.0], TimelikeCase::I),
        Err(Error::InvalidSpec(_))
    ));
}

#[test]
fn null_continuation() {
    let spec = WorldFunctionSpec::distorted_lambda(0.1);
    let fam = solve_equivalent_null(&spec, 1.0).unwrap();
    let p1 = Point::from([1.0, 1.0, 0.0, 0.0]);
    let v = PairVector::new(Point::origin(4), p1.clone());
    let q2 = &fam.representative(&[vec![0.0]]).unwrap()[0];
    assert_eq!(q2.coords(), &[2.0, 2.0, 0.0, 0.0]);
    let q2 = &fam.representative(&[vec![0.7]]).unwrap()[0];
    assert_eq!(q2.coords(), &[2.7, 2.7, 0.0, 0.0]);
    let r = equivalence_residuals(&spec, &v, &PairVector::new(p1.clone(), q2.clone())).unwrap();
    assert_eq!(r, [0.0, 0.0]);
    // leaving the ray breaks the null condition
    let off = q2.offset(&[0.0, 0.0, 0.3, 0.0]);
    let r = equivalence_residuals(&spec, &v, &PairVector::new(p1, off)).unwrap();
    assert!(r[0].abs() > 1e-3);
}

#[test]
fn numeric_euclidean_is_rigid() {
    let spec = WorldFunctionSpec::euclidean(3);
    let sk = Skeleton::new(vec![
        Point::from([0.0, 0.0, 0.0]),
        Point::from([1.0, 0.5, 0.0]),
        Point::from([0.2, 1.0, 0.7]),
    ])
    .unwrap();
    let q0 = Point::from([3.0, -1.0, 2.0]);
    let (fam, report) = solve_skeleton_equivalence(&spec, &sk, &q0, &SolverConfig::default()).unwrap();
    assert_eq!(fam.kind, FamilyKind::Enumerated);
    assert_eq!(fam.solutions.len(), 1);
    assert_eq!(fam.dof, 0);
    assert_eq!(report.verdict, ExistenceVerdict::Balanced);
    // solutions hold Q1..Qn; Q0 is given
    for (p, q) in sk.points()[1..].iter().zip(&fam.solutions[0]) {
        let want = p.offset(&[3.0, -1.0, 2.0]);
        assert!(q.distance(&want) < 1e-6);
    }
}

#[test]
fn numeric_recovers_case_two_family() {
    let spec = WorldFunctionSpec::distorted(4, 0.01);
    let p1 = Point::from([1.0, 0.0, 0.0, 0.0]);
    let sk = Skeleton::new(vec![Point::origin(4), p1.clone()]).unwrap();
    let (fam, report) = solve_skeleton_equivalence(&spec, &sk, &p1, &SolverConfig::default()).unwrap();
    let closed = solve_equivalent_timelike(&spec, 1.0, 0.0, 0.0, [1.0, 0.0, 0.0], TimelikeCase::II).unwrap();
    for s in &fam.solutions {
        assert!(closed.family.distance_to(&s[0]).unwrap() < 1e-6);
    }
    assert_eq!(report.numeric_findings.unwrap().manifold_dim, Some(2));
    assert_eq!(report.verdict, ExistenceVerdict::Under);
}

#[test]
fn overdetermined_skeleton() {
    // five timelike-separated points, 20 equations against 16 unknowns
    let spec = WorldFunctionSpec::distorted(4, 0.01);
    let pts = vec![
        Point::origin(4),
        Point::from([1.0, 0.1, 0.0, 0.0]),
        Point::from([2.1, 0.0, 0.3, 0.0]),
        Point::from([3.0, 0.2, 0.1, 0.4]),
        Point::from([4.2, -0.3, 0.2, 0.1]),
    ];
    let sk = Skeleton::new(pts).unwrap();
    let q0 = sk.points()[1].clone();
    let out = solve_skeleton_equivalence(&spec, &sk, &q0, &SolverConfig::default());
    match out {
        Err(Error::NoSolutionFound { starts, .. }) => assert_eq!(starts, 32),
        Ok((fam, report)) => {
            assert_eq!(report.verdict, ExistenceVerdict::Over);
            assert!(fam.is_empty() || !fam.solutions.is_empty());
        }
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn spacelike_skeleton_rejected() {
    let spec = WorldFunctionSpec::minkowski(4);
    let sk = Skeleton::new(vec![Point::origin(4), Point::from([0.0, 1.0, 0.0, 0.0])]).unwrap();
    assert!(matches!(
        solve_skeleton_equivalence(&spec, &sk, &Point::origin(4), &SolverConfig::default()),
        Err(Error::SpacelikeUnsupported(_))
    ));
}

#[test]
fn distorted_sum_order() {
    let spec = WorldFunctionSpec::distorted_lambda(0.1);
    let v1 = link(1.0);
    let v2 = PairVector::new([0.0; 4], [2.0, 0.5, 0.0, 0.0]);
    let r0 = Point::from([5.0, 0.0, 0.0, 0.0]);
    let a = vector_sum(&spec, &v1, &v2, &r0, SumOrder::FirstSecond).unwrap();
    let b = vector_sum(&spec, &v1, &v2, &r0, SumOrder::SecondFirst).unwrap();
    assert_eq!(a.dof, 4);
    assert_eq!(b.dof, 4);
    assert!(a.order_dependent.is_some());
    for r in b.sample_representatives(8) {
        assert!(is_equivalent(&spec, &PairVector::new(r0.clone(), r[0].clone()), &v2, 1e-9).unwrap());
    }
}

#[test]
fn family_json_round_trip() {
    let spec = WorldFunctionSpec::distorted_lambda(0.1);
    let fam = equivalent_family(&spec, &link(1.0), &Point::from([0.0, 0.3, 0.0, 0.0])).unwrap();
    let back: SolutionFamily = serde_json::from_str(&serde_json::to_string(&fam).unwrap()).unwrap();
    assert_eq!(back, fam);
}

proptest! {
    #[test]
    fn scaled_vectors_have_scaled_length(alpha in prop_oneof![-4.0f64..-1.5, 1.5f64..4.0], s in 0.5f64..2.0) {
        let spec = WorldFunctionSpec::distorted_lambda(0.1);
        let v = link(s);
        let len = spec.squared_length(&v).unwrap();
        // far in the future of v, so every cross pair is timelike
        let p0 = Point::from([20.0, 1.0, 0.0, -0.5]);
        let fam = scalar_multiply(&spec, &v, alpha, &p0, MultiplyVersion::A).unwrap();
        for r in fam.sample_representatives(6) {
            let w = PairVector::new(p0.clone(), r[0].clone());
            let got = spec.squared_length(&w).unwrap();
            prop_assert!((got - alpha * alpha * len).abs() < 1e-9 * (1.0 + got));
        }
    }

    #[test]
    fn euclidean_sum_matches_coordinates(a in prop::array::uniform3(-5.0f64..5.0), b in prop::array::uniform3(-5.0f64..5.0)) {
        let spec = WorldFunctionSpec::euclidean(3);
        let r0 = Point::from([1.0, -1.0, 0.5]);
        let v1 = PairVector::new([0.0; 3], a);
        let v2 = PairVector::new([2.0; 3], [2.0 + b[0], 2.0 + b[1], 2.0 + b[2]]);
        for order in [SumOrder::FirstSecond, SumOrder::SecondFirst] {
            let fam = vector_sum(&spec, &v1, &v2, &r0, order).unwrap();
            let end = &fam.representative(&[]).unwrap()[1];
            for k in 0..3 {
                prop_assert!((end.coords()[k] - (r0.coords()[k] + a[k] + b[k])).abs() < 1e-9);
            }
            prop_assert_eq!(fam.order_dependent, Some(false));
        }
    }

    #[test]
    fn case_two_links_are_equivalent(s in 0.05f64..3.0, q in prop::array::uniform3(-1.0f64..1.0)) {
        prop_assume!(q.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let spec = WorldFunctionSpec::distorted_lambda(0.1);
        let sol = solve_equivalent_timelike(&spec, s, 0.0, 0.0, q, TimelikeCase::II).unwrap();
        let v = PairVector::new(sol.p0.clone(), sol.p1.clone());
        let w = PairVector::new(sol.q0.clone(), sol.q1.clone());
        let r = equivalence_residuals(&spec, &v, &w).unwrap();
        let scale = 1.0 + spec.squared_length(&v).unwrap();
        prop_assert!(r[0].abs() < 1e-12 * scale && r[1].abs() < 1e-12 * scale, "{:?}", r);
    }
}
