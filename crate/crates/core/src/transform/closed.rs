use num_complex::Complex64;

use super::TransformError;
use crate::geometry::{DiskDomain, HalfPlaneDomain, PlanePoint};

fn off_circle(disk: &DiskDomain, z: PlanePoint) -> Result<Complex64, TransformError> {
    let d = z.dist(disk.center) - disk.radius;
    if d.abs() <= 1e-12 * disk.radius {
        return Err(TransformError::OnBoundary { dist: d.abs() });
    }
    Ok(if d < 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        (z - disk.center).to_complex()
    })
}

/// `B χ_D(z)`: zero inside, `-r² / (z - c)²` outside (the mean value
/// property of `w -> (z - w)^-2` on the disk).
pub fn beurling_disk(disk: &DiskDomain, z: PlanePoint) -> Result<Complex64, TransformError> {
    let u = off_circle(disk, z)?;
    if u == Complex64::new(0.0, 0.0) {
        return Ok(u);
    }
    Ok(-disk.radius * disk.radius / (u * u))
}

/// `∂B χ_D(z)`: zero inside, `2 r² / (z - c)³` outside.
pub fn d_beurling_disk(disk: &DiskDomain, z: PlanePoint) -> Result<Complex64, TransformError> {
    let u = off_circle(disk, z)?;
    if u == Complex64::new(0.0, 0.0) {
        return Ok(u);
    }
    Ok(2.0 * disk.radius * disk.radius / (u * u * u))
}

/// Anchored `B χ_H(z)` for a half-plane `H = anchor + e^{iφ} Π`, with the
/// anchor outside `H`: `-e^{-2iφ}` on `H`, zero off it.
pub fn beurling_halfplane(h: &HalfPlaneDomain, z: PlanePoint) -> Result<Complex64, TransformError> {
    let s = (z - h.anchor).dot(h.inward_normal.as_point());
    if s.abs() <= 1e-12 * 1f64.max(z.norm()) {
        return Err(TransformError::OnBoundary { dist: s.abs() });
    }
    if s < 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(-Complex64::from_polar(1.0, -2.0 * h.rotation_angle()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_values() {
        let d = DiskDomain::unit();
        assert_eq!(beurling_disk(&d, PlanePoint::new(0.5, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        let v = beurling_disk(&d, PlanePoint::new(2.0, 0.0)).unwrap();
        assert!((v - Complex64::new(-0.25, 0.0)).norm() < 1e-15);
        let v = beurling_disk(&d, PlanePoint::new(0.0, 2.0)).unwrap();
        assert!((v - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        let v = d_beurling_disk(&d, PlanePoint::new(2.0, 0.0)).unwrap();
        assert!((v - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!(beurling_disk(&d, PlanePoint::new(1.0, 0.0)).is_err());
    }
}
