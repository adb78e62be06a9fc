use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::domain::PolygonDomain;
use super::point::{PlanePoint, UnitNormal};

/// Unit square `[0,1]^2` with its corners replaced by quarter circles of
/// radius `r`, each sampled at `points_per_arc + 1` vertices carrying the
/// exact circle normal. `r = 0` gives the sharp square.
pub fn smoothed_square(r: f64, points_per_arc: usize) -> PolygonDomain {
    assert!((0.0..=0.5).contains(&r), "rounding radius must lie in [0, 1/2]");
    if r == 0.0 {
        return PolygonDomain::new(vec![
            PlanePoint::new(0.0, 0.0),
            PlanePoint::new(1.0, 0.0),
            PlanePoint::new(1.0, 1.0),
            PlanePoint::new(0.0, 1.0),
        ])
        .expect("unit square");
    }
    let m = points_per_arc.max(1);
    let centers = [
        (PlanePoint::new(1.0 - r, r), -FRAC_PI_2),
        (PlanePoint::new(1.0 - r, 1.0 - r), 0.0),
        (PlanePoint::new(r, 1.0 - r), FRAC_PI_2),
        (PlanePoint::new(r, r), PI),
    ];
    let mut vertices = Vec::with_capacity(4 * (m + 1));
    let mut normals = Vec::with_capacity(4 * (m + 1));
    for (c, theta0) in centers {
        for k in 0..=m {
            // r = 1/2 makes neighbouring arcs share their end vertices
            if r == 0.5 && k == m {
                continue;
            }
            let theta = theta0 + FRAC_PI_2 * k as f64 / m as f64;
            let u = UnitNormal::from_angle(theta);
            vertices.push(c + u.as_point() * r);
            normals.push(Some(u));
        }
    }
    PolygonDomain::with_normals(vertices, normals).expect("smoothed square is simple")
}

/// Regular `n`-gon inscribed in the circle of radius `radius` about
/// `center`, first vertex at angle `phase`.
pub fn regular_polygon(n: usize, center: PlanePoint, radius: f64, phase: f64) -> PolygonDomain {
    let vertices = (0..n)
        .map(|k| {
            let t = phase + TAU * k as f64 / n as f64;
            center + PlanePoint::new(t.cos(), t.sin()) * radius
        })
        .collect();
    PolygonDomain::new(vertices).expect("regular polygon")
}

/// Smooth bump supported on `(-1, 1)` with `bump(0) = 1`.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothed_square_perimeter() {
        for r in [0.0, 0.05, 0.2, 0.4] {
            let p = smoothed_square(r, 64);
            // the inscribed chain is slightly shorter than the true curve
            let exact = 4.0 - 8.0 * r + TAU * r;
            let chord = 2.0 * r * (FRAC_PI_2 / 128.0).sin() * 64.0 * 4.0;
            let expected = 4.0 - 8.0 * r + chord;
            assert!((p.perimeter() - expected).abs() < 1e-12, "r={r}");
            assert!(p.perimeter() <= exact + 1e-12);
        }
    }

    #[test]
    fn bump_values() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert!(bump(0.5) > 0.0 && bump(0.5) < 1.0);
    }
}
