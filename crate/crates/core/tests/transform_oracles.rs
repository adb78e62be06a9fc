use beurling_core::geometry::{regular_polygon, smoothed_square, DiskDomain, Domain, HalfPlaneDomain, PlanePoint};
use beurling_core::transform::{beurling_difference, d_beurling, pv_beurling, PVQuadratureSpec};
use num_complex::Complex64;

fn spec_eps(e: f64) -> PVQuadratureSpec {
    PVQuadratureSpec {
        epsilon: e,
        ..Default::default()
    }
}

#[test]
fn derivative_does_not_depend_on_epsilon() {
    let d = Domain::Polygon(regular_polygon(5, PlanePoint::ORIGIN, 1.0, 0.3));
    for z in [PlanePoint::new(0.1, 0.2), PlanePoint::new(-0.4, 0.1), PlanePoint::new(1.5, 0.4)] {
        let dist = d.dist_to_boundary(z);
        let a = d_beurling(&d, z, &spec_eps(dist / 4.0)).unwrap();
        let b = d_beurling(&d, z, &spec_eps(dist / 2.0)).unwrap();
        assert!((a.value - b.value).norm() <= a.est_error + b.est_error + 1e-12, "{z:?}: {a:?} vs {b:?}");
    }
}

#[test]
fn transform_is_analytic_inside() {
    let d = Domain::Polygon(smoothed_square(0.2, 64));
    let spec = PVQuadratureSpec::default();
    for z in [PlanePoint::new(0.5, 0.5), PlanePoint::new(0.2, 0.6)] {
        let h = d.dist_to_boundary(z) / 100.0;
        let at = |dx: f64, dy: f64| pv_beurling(&d, PlanePoint::new(z.x + dx, z.y + dy), &spec).unwrap();
        let (xp, xm, yp, ym) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
        let fx = (xp.value - xm.value) / (2.0 * h);
        let fy = (yp.value - ym.value) / (2.0 * h);
        let dbar = 0.5 * (fx + Complex64::i() * fy);
        let quad = xp.est_error + xm.est_error + yp.est_error + ym.est_error;
        // finite differences of an analytic function leave an O(h^2 |f'''|) residue
        assert!(dbar.norm() <= 10.0 * quad / h + 1e-6, "{z:?}: {dbar} (quadrature {quad:e})");
        // and the derivative agrees with the direct ∂ integral
        let direct = d_beurling(&d, z, &spec_eps(d.dist_to_boundary(z) / 2.0)).unwrap();
        let fz = 0.5 * (fx - Complex64::i() * fy);
        assert!((fz - direct.value).norm() <= 1e-3 * (1.0 + direct.value.norm()), "{fz} vs {:?}", direct.value);
    }
}

#[test]
fn half_plane_values_are_constant_in_the_component() {
    let h = Domain::HalfPlane(HalfPlaneDomain::upper());
    let spec = PVQuadratureSpec::default();
    let a = pv_beurling(&h, PlanePoint::new(0.0, 1.0), &spec).unwrap();
    let b = pv_beurling(&h, PlanePoint::new(0.0, 2.0), &spec).unwrap();
    assert!((a.value - b.value).norm() <= 2e-3);
    let diff = beurling_difference(&h, PlanePoint::new(0.0, 1.0), PlanePoint::new(3.0, 2.0), &spec).unwrap();
    assert!(diff.value.norm() <= 1e-3, "{diff:?}");
}

#[test]
fn disk_interior_difference_vanishes() {
    let d = Domain::Disk(DiskDomain::unit());
    let spec = PVQuadratureSpec::default();
    let v = beurling_difference(&d, PlanePoint::new(0.2, 0.0), PlanePoint::new(-0.3, 0.0), &spec).unwrap();
    assert!(v.value.norm() <= v.est_error.max(1e-9), "{v:?}");
    let dz = d_beurling(&d, PlanePoint::new(2.0, 0.0), &spec_eps(0.5)).unwrap();
    // ∂(-1/z^2) = 2/z^3
    assert!((dz.value - Complex64::new(0.25, 0.0)).norm() <= 1e-3 * 0.25, "{dz:?}");
    let inside = d_beurling(&d, PlanePoint::new(0.5, 0.0), &spec_eps(0.25)).unwrap();
    assert!(inside.value.norm() <= 1e-3);
}
