//! Invariants checked on generated inputs.

use beurling_core::beta::{beta1_curve, beta1_function, Interval, SampledFunction};
use beurling_core::decomposition::{big_distance, dyadic_arcs, Cell, DyadicSquare};
use beurling_core::geometry::{normal_from_slope, regular_polygon, Domain, LipschitzGraphDomain, PlanePoint};
use beurling_core::norms::besov_diff_line;
use beurling_core::transform::{beurling_difference, PVQuadratureSpec};
use proptest::prelude::*;

fn square() -> impl Strategy<Value = DyadicSquare> {
    (-3i32..6, -40i64..40, -40i64..40).prop_map(|(g, a, b)| DyadicSquare::new(g, a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn graph_normal_is_unit_and_points_down(s in -1.0f64..1.0) {
        let n = normal_from_slope(s);
        prop_assert!((n.n1 * n.n1 + n.n2 * n.n2 - 1.0).abs() < 1e-12);
        prop_assert!(n.n2 < 0.0);
    }

    #[test]
    fn big_distance_is_symmetric_and_dominates_sizes(q in square(), r in square()) {
        let (a, b) = (Cell::Square(q), Cell::Square(r));
        let d = big_distance(&a, &b);
        prop_assert_eq!(d, big_distance(&b, &a));
        prop_assert!(d >= q.side().max(r.side()));
    }

    #[test]
    fn big_distance_tracks_point_distance_for_separated_squares(q in square(), r in square(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let far = !q.dilate(2.0).intersects(&r.dilate(2.0));
        prop_assume!(far);
        let x = PlanePoint::new(q.rect().x0 + s * q.side(), q.rect().y0 + t * q.side());
        let y = PlanePoint::new(r.rect().x0 + t * r.side(), r.rect().y0 + s * r.side());
        let d = big_distance(&Cell::Square(q), &Cell::Square(r));
        let e = x.dist(y);
        prop_assert!(d / e <= 3.0 && e / d <= 3.0, "D = {d}, |x - y| = {e}");
    }

    #[test]
    fn boundary_points_are_outside(t in 0.0f64..1.0, k in 3usize..9) {
        let poly = regular_polygon(k, PlanePoint::new(0.2, -0.1), 1.3, 0.4);
        let d = Domain::Polygon(poly.clone());
        let v = poly.vertices();
        let i = (t * k as f64) as usize % k;
        for p in [v[i], v[(i + 1) % k]] {
            prop_assert!(!d.contains(p));
        }
        let disk = Domain::Disk(beurling_core::geometry::DiskDomain::unit());
        let z = PlanePoint::new((6.0 * t).cos(), (6.0 * t).sin());
        if disk.dist_to_boundary(z) == 0.0 {
            prop_assert!(!disk.contains(z));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn beta_function_affine_invariance_and_homogeneity(a in -3.0f64..3.0, b in -3.0f64..3.0, lam in 0.5f64..10.0, c in -0.5f64..0.5) {
        let base = SampledFunction::from_fn(-4.0, 4.0, 1601, |x| (x - c).abs() + 0.3 * (2.0 * x).sin());
        let moved = base.map(|x, v| v + a + b * x);
        let i = Interval::new(-1.0, 1.0);
        let r0 = beta1_function(&base, i, false).unwrap().value;
        let r1 = beta1_function(&moved, i, false).unwrap().value;
        let r2 = beta1_function(&base.scaled(lam), i, false).unwrap().value;
        prop_assert!((r1 - r0).abs() <= 1e-9 * r0.max(1e-12), "{r0} vs {r1}");
        prop_assert!((r2 - lam * r0).abs() <= 1e-9 * lam * r0);
    }

    #[test]
    fn besov_line_is_p_homogeneous(lam in 0.5f64..4.0, p in 1.0f64..3.0, alpha in 0.1f64..0.9) {
        let f = SampledFunction::from_fn(-1.0, 1.0, 201, |x| 1.0 - x.abs());
        let v = besov_diff_line(&f, alpha, p).value;
        let w = besov_diff_line(&f.scaled(lam), alpha, p).value;
        prop_assert!((w - lam.powf(p) * v).abs() <= 1e-9 * w);
    }

    #[test]
    fn beta_curve_is_invariant_under_rigid_motions(angle in 0.0f64..6.3, sx in -2.0f64..2.0, sy in -2.0f64..2.0) {
        let d = Domain::Polygon(regular_polygon(7, PlanePoint::ORIGIN, 1.0, 0.1));
        let moved = d.rigid_motion(angle, PlanePoint::new(sx, sy)).unwrap();
        let arcs = dyadic_arcs(&d, 1, 1);
        let arcs_moved = dyadic_arcs(&moved, 1, 1);
        for (p, q) in arcs.generation(1).iter().zip(arcs_moved.generation(1)).step_by(3) {
            let b0 = beta1_curve(&d, p).value;
            let b1 = beta1_curve(&moved, q).value;
            prop_assert!((b0 - b1).abs() <= 1e-6 * b0.max(1e-3), "{b0} vs {b1}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn difference_at_equal_points_is_exactly_zero(x in -0.9f64..0.9, y in 0.05f64..0.9) {
        let g = LipschitzGraphDomain::from_fn(1.0, 65, |t| 0.2 * beurling_core::geometry::bump(t)).unwrap();
        let d = Domain::Graph(g);
        let z = PlanePoint::new(x, 0.25 + y);
        let v = beurling_difference(&d, z, z, &PVQuadratureSpec::default()).unwrap();
        prop_assert_eq!(v.value.re, 0.0);
        prop_assert_eq!(v.value.im, 0.0);
    }
}
