//! The Beurling transform of characteristic functions and its derivative.

mod closed;
mod engine;
mod green;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use closed::{beurling_disk, beurling_halfplane, d_beurling_disk};
pub use engine::{beurling_difference, d_beurling, integrate_square_kernel, pv_beurling};
pub use green::{gauss_rule, Annulus, Kernel, Region};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PVQuadratureSpec {
    /// Truncation radius for `d_beurling`.
    pub epsilon: f64,
    /// Smallest half-width of the integration square on unbounded domains.
    pub outer_radius: f64,
    /// Maximum kernel evaluations.
    pub budget: u64,
    pub target_tol: f64,
}

impl Default for PVQuadratureSpec {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            outer_radius: 8.0,
            budget: 1_000_000,
            target_tol: 1e-7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformValue {
    pub value: Complex64,
    pub est_error: f64,
    pub evals: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("point is on the boundary (distance {dist:e})")]
    OnBoundary { dist: f64 },
    #[error("evaluation budget exhausted; best value {:?}", .best.value)]
    BudgetExhausted { best: TransformValue },
    #[error("epsilon {epsilon} is not below the boundary distance {dist}")]
    EpsilonTooLarge { epsilon: f64, dist: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DiskDomain, Domain, HalfPlaneDomain, PlanePoint, UnitNormal};

    #[test]
    fn disk_inside_and_outside() {
        let d = Domain::Disk(DiskDomain::unit());
        let s = PVQuadratureSpec::default();
        for (x, y) in [(0.5, 0.0), (2.0, 0.0), (0.0, 2.0), (-0.3, 0.9), (1.1, -0.4)] {
            let z = PlanePoint::new(x, y);
            let v = pv_beurling(&d, z, &s).unwrap();
            let exact = beurling_disk(&DiskDomain::unit(), z).unwrap();
            assert!((v.value - exact).norm() < 1e-5, "{z:?} {} {exact} evals {}", v.value, v.evals);
            let dv = d_beurling(&d, z, &PVQuadratureSpec { epsilon: 0.01, ..s }).unwrap();
            let de = d_beurling_disk(&DiskDomain::unit(), z).unwrap();
            assert!((dv.value - de).norm() < 1e-5, "{z:?} {} {de}", dv.value);
        }
    }

    #[test]
    fn half_plane_constant_and_flat_derivative() {
        let s = PVQuadratureSpec::default();
        for phi in [0.0, 0.7] {
            let h = HalfPlaneDomain::new(PlanePoint::new(0.3, -0.2), UnitNormal::from_angle(PI_2 + phi)).unwrap();
            let d = Domain::HalfPlane(h.clone());
            for z in [PlanePoint::new(0.0, 1.0), PlanePoint::new(3.0, 2.0), PlanePoint::new(-1.0, -3.0)] {
                let v = pv_beurling(&d, z, &s).unwrap();
                let exact = beurling_halfplane(&h, z).unwrap();
                assert!((v.value - exact).norm() < 1e-5, "{phi} {z:?} {} {exact}", v.value);
                let dv = d_beurling(&d, z, &PVQuadratureSpec { epsilon: 0.05, ..s }).unwrap();
                assert!(dv.value.norm() < 1e-5, "{}", dv.value);
            }
        }
    }

    #[test]
    fn epsilon_too_large() {
        let d = Domain::Disk(DiskDomain::unit());
        let s = PVQuadratureSpec {
            epsilon: 0.6,
            ..Default::default()
        };
        assert!(matches!(
            d_beurling(&d, PlanePoint::new(0.5, 0.0), &s),
            Err(TransformError::EpsilonTooLarge { .. })
        ));
    }

    const PI_2: f64 = std::f64::consts::FRAC_PI_2;
}
