use serde::Serialize;

use super::BetaError;

/// `x -> slope * x + intercept` with its weighted L1 residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    pub l1_residual: f64,
}

impl AffineFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Inputs up to this size are solved by enumerating all interpolating pairs.
pub const EXHAUSTIVE_LIMIT: usize = 64;

/// Global minimizer of `Σ w_i |y_i - a x_i - b|`.
pub fn affine_l1_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<AffineFit, BetaError> {
    validate(x, y, w)?;
    if x.len() <= EXHAUSTIVE_LIMIT {
        exhaustive_fit(x, y, w)
    } else {
        descent_fit(x, y, w)
    }
}

fn validate(x: &[f64], y: &[f64], w: &[f64]) -> Result<(), BetaError> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(BetaError::DegenerateInput("length mismatch".into()));
    }
    if x.len() < 2 {
        return Err(BetaError::DegenerateInput("need at least two samples".into()));
    }
    if x.iter().chain(y).chain(w).any(|v| !v.is_finite()) || w.iter().any(|&v| v < 0.0) {
        return Err(BetaError::DegenerateInput("non-finite value or negative weight".into()));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(BetaError::DegenerateInput("all x coincide".into()));
    }
    Ok(())
}

pub fn l1_residual(x: &[f64], y: &[f64], w: &[f64], slope: f64, intercept: f64) -> f64 {
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((&xi, &yi), &wi)| wi * (yi - slope * xi - intercept).abs())
        .sum()
}

/// Tries the line through every pair of samples with distinct `x`; some
/// optimal fit interpolates two samples.
pub fn exhaustive_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<AffineFit, BetaError> {
    validate(x, y, w)?;
    let n = x.len();
    let mut best: Option<AffineFit> = None;
    for i in 0..n {
        for j in i + 1..n {
            if x[i] == x[j] {
                continue;
            }
            let slope = (y[j] - y[i]) / (x[j] - x[i]);
            let intercept = y[i] - slope * x[i];
            let r = l1_residual(x, y, w, slope, intercept);
            if best.is_none_or(|b| r < b.l1_residual) {
                best = Some(AffineFit {
                    slope,
                    intercept,
                    l1_residual: r,
                });
            }
        }
    }
    Ok(best.expect("two distinct abscissae exist"))
}

/// Lower weighted median of `(value, weight)` pairs, by quickselect.
pub fn weighted_median(items: &mut [(f64, f64)]) -> f64 {
    assert!(!items.is_empty());
    let total: f64 = items.iter().map(|p| p.1).sum();
    if total <= 0.0 {
        let mid = (items.len() - 1) / 2;
        items.select_nth_unstable_by(mid, |a, b| a.0.total_cmp(&b.0));
        return items[mid].0;
    }
    let half = 0.5 * total;
    let mut lo = 0;
    let mut hi = items.len();
    let mut below = 0.0; // weight strictly left of `lo`
    loop {
        // rounding in the partial sums can push `lo` up to `hi`
        if hi - lo <= 1 {
            return items[lo.min(hi - 1)].0;
        }
        let mid = lo + (hi - lo) / 2;
        items[lo..hi].select_nth_unstable_by(mid - lo, |a, b| a.0.total_cmp(&b.0));
        let left: f64 = items[lo..mid].iter().map(|p| p.1).sum();
        if below + left >= half {
            hi = mid;
        } else if below + left + items[mid].1 >= half {
            return items[mid].0;
        } else {
            below += left + items[mid].1;
            lo = mid + 1;
        }
    }
}

/// Best line through sample `j` (exact: weighted median of slopes).
fn best_through(x: &[f64], y: &[f64], w: &[f64], j: usize, buf: &mut Vec<(f64, f64)>) -> (f64, f64) {
    buf.clear();
    for i in 0..x.len() {
        let dx = x[i] - x[j];
        if dx != 0.0 {
            buf.push(((y[i] - y[j]) / dx, w[i] * dx.abs()));
        }
    }
    let slope = weighted_median(buf);
    (slope, y[j] - slope * x[j])
}

/// Pivoting descent between interpolating lines. At each step the current
/// line is checked against rotations about every sample it passes
/// through; that family of checks is a complete optimality certificate,
/// so the loop stops only at a global minimizer.
pub fn descent_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<AffineFit, BetaError> {
    validate(x, y, w)?;
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut buf = Vec::with_capacity(n);
    let start = order[n / 2];
    let (mut slope, mut intercept) = best_through(x, y, w, start, &mut buf);
    let mut value = l1_residual(x, y, w, slope, intercept);
    let xs = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ys = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for _ in 0..10 * n + 10 {
        let scale = ys + slope.abs() * xs + intercept.abs();
        let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
        let resid: Vec<f64> = (0..n).map(|i| y[i] - slope * x[i] - intercept).collect();
        let zeros: Vec<usize> = (0..n).filter(|&i| resid[i].abs() <= tol).collect();
        let mut moved = false;
        for &j in &zeros {
            let mut pull = 0.0;
            let mut hold = 0.0;
            for i in 0..n {
                let dx = x[i] - x[j];
                if resid[i].abs() <= tol {
                    hold += w[i] * dx.abs();
                } else {
                    pull += w[i] * resid[i].signum() * dx;
                }
            }
            if pull.abs() <= hold * (1.0 + 1e-12) + 1e-300 {
                continue;
            }
            let (s, b) = best_through(x, y, w, j, &mut buf);
            let v = l1_residual(x, y, w, s, b);
            if v < value * (1.0 - 1e-15) {
                slope = s;
                intercept = b;
                value = v;
                moved = true;
                break;
            }
        }
        if !moved {
            break;
        }
    }
    Ok(AffineFit {
        slope,
        intercept,
        l1_residual: value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_data_is_fit_exactly() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let w = vec![1.0; 10];
        let f = affine_l1_fit(&x, &y, &w).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12 && (f.intercept + 2.0).abs() < 1e-12);
        assert!(f.l1_residual < 1e-12);
    }

    #[test]
    fn two_samples_interpolate() {
        let f = affine_l1_fit(&[0.0, 1.0], &[5.0, -1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(f.l1_residual, 0.0);
    }

    #[test]
    fn coincident_x_rejected() {
        assert!(matches!(
            affine_l1_fit(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0], &[1.0; 3]),
            Err(BetaError::DegenerateInput(_))
        ));
    }

    #[test]
    fn weighted_median_matches_sort() {
        let mut v = vec![(3.0, 1.0), (1.0, 1.0), (2.0, 5.0), (10.0, 1.0)];
        assert_eq!(weighted_median(&mut v), 2.0);
        let mut v = vec![(0.0, 1.0), (1.0, 1.0)];
        assert_eq!(weighted_median(&mut v), 0.0);
    }

    #[test]
    fn descent_handles_collinear_runs() {
        // |x| on a symmetric grid: long collinear runs on both sides
        let x: Vec<f64> = (-100..=100).map(|i| i as f64 * 0.03).collect();
        let y: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let w = vec![1.0; x.len()];
        let d = descent_fit(&x, &y, &w).unwrap();
        let e = exhaustive_fit(&x, &y, &w).unwrap();
        assert!((d.l1_residual - e.l1_residual).abs() <= 1e-9 * e.l1_residual);
    }
}
