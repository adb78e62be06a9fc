use serde::Serialize;

use super::l1fit::{affine_l1_fit, AffineFit};
use super::BetaError;

/// Piecewise-linear function through uniform samples `x0 + i h`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub x0: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> Self {
        assert!(h > 0.0 && values.len() >= 2);
        Self { x0, h, values }
    }

    /// Samples `f` at `n + 1` equispaced points of `[a, b]`.
    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = (b - a) / n as f64;
        Self::new(a, h, (0..=n).map(|i| f(a + i as f64 * h)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn x_end(&self) -> f64 {
        self.x_at(self.values.len() - 1)
    }

    /// Linear interpolation inside the sampled range, zero outside.
    pub fn value(&self, x: f64) -> f64 {
        if x < self.x0 || x > self.x_end() {
            return 0.0;
        }
        let u = (x - self.x0) / self.h;
        let i = (u.floor() as usize).min(self.values.len() - 2);
        let t = u - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self::new(self.x0, self.h, self.values.iter().map(|v| lambda * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..self.len()).map(|i| f(self.x_at(i), self.values[i])).collect();
        Self::new(self.x0, self.h, values)
    }

    /// Breakpoints and values on `[a, b]`: the window ends, every sample
    /// strictly inside, and (with zero extension) a doubled node at each end
    /// of the sampled range so a jump to zero is represented exactly.
    fn nodes(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>, usize) {
        let mut xs = vec![a];
        let mut ys = vec![self.value(a)];
        let last = self.len() - 1;
        let first = (((a - self.x0) / self.h).floor().max(-1.0) + 1.0) as usize;
        let mut inside = 0;
        for i in first..self.len() {
            let x = self.x_at(i);
            if x >= b {
                break;
            }
            if x <= a {
                continue;
            }
            if i == 0 {
                xs.push(x);
                ys.push(0.0);
            }
            xs.push(x);
            ys.push(self.values[i]);
            if i == last {
                xs.push(x);
                ys.push(0.0);
            }
            inside += 1;
        }
        xs.push(b);
        ys.push(self.value(b));
        (xs, ys, inside)
    }
}

/// `[a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn dyadic(j: i32, k: i64) -> Self {
        let l = 2f64.powi(-j);
        Self::new(k as f64 * l, (k + 1) as f64 * l)
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn triple(&self) -> Interval {
        let l = self.length();
        Interval::new(self.a - l, self.b + l)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Beta1Result<F> {
    pub value: f64,
    /// Parameter window the fit was computed on.
    pub window: (f64, f64),
    pub fit: F,
}

/// Samples of `3I` needed for a meaningful fit.
pub const MIN_WINDOW_SAMPLES: usize = 16;

/// `∫_a^b |g|` for `g` linear with end values `d0`, `d1`.
fn abs_linear_integral(len: f64, d0: f64, d1: f64) -> f64 {
    if (d0 >= 0.0) == (d1 >= 0.0) || d0 == 0.0 || d1 == 0.0 {
        0.5 * len * (d0.abs() + d1.abs())
    } else {
        0.5 * len * (d0 * d0 + d1 * d1) / (d0.abs() + d1.abs())
    }
}

/// `∫ |f - ρ|` over the node set, exact for piecewise-linear `f`.
pub fn continuum_residual(xs: &[f64], ys: &[f64], fit: &AffineFit) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| abs_linear_integral(x[1] - x[0], y[0] - fit.eval(x[0]), y[1] - fit.eval(x[1])))
        .sum()
}

fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|k| {
            let left = if k > 0 { xs[k] - xs[k - 1] } else { 0.0 };
            let right = if k + 1 < n { xs[k + 1] - xs[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// `β₁(f, I) = inf_ρ ℓ(I)^-2 ∫_{3I} |f - ρ|` over affine `ρ`. The fit
/// minimizes the trapezoid-weighted discrete residual; the reported value
/// uses the exact integral of the piecewise-linear residual.
pub fn beta1_function(
    f: &SampledFunction,
    interval: Interval,
    extend_by_zero: bool,
) -> Result<Beta1Result<AffineFit>, BetaError> {
    let w3 = interval.triple();
    let slack = 1e-9 * f.h;
    if !extend_by_zero && (w3.a < f.x0 - slack || w3.b > f.x_end() + slack) {
        return Err(BetaError::WindowOutOfRange {
            window: (w3.a, w3.b),
            support: (f.x0, f.x_end()),
        });
    }
    let (xs, ys, inside) = f.nodes(w3.a, w3.b);
    let samples_per_window = (w3.length() / f.h).floor() as usize;
    if inside < MIN_WINDOW_SAMPLES && samples_per_window < MIN_WINDOW_SAMPLES {
        return Err(BetaError::TooFewSamples {
            found: samples_per_window,
            needed: MIN_WINDOW_SAMPLES,
        });
    }
    let mut fit = if ys.iter().all(|&v| v == 0.0) {
        AffineFit {
            slope: 0.0,
            intercept: 0.0,
            l1_residual: 0.0,
        }
    } else {
        let w = trapezoid_weights(&xs);
        affine_l1_fit(&xs, &ys, &w)?
    };
    fit.l1_residual = continuum_residual(&xs, &ys, &fit);
    let l = interval.length();
    Ok(Beta1Result {
        value: fit.l1_residual / (l * l),
        window: (w3.a, w3.b),
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_value_example() {
        // |x| on [-3, 3]: optimal fit is the constant 3/2, residual 9/2
        let f = SampledFunction::from_fn(-3.0, 3.0, 6000, f64::abs);
        let r = beta1_function(&f, Interval::new(-1.0, 1.0), false).unwrap();
        assert!((r.fit.l1_residual - 4.5).abs() < 1e-6, "{}", r.fit.l1_residual);
        assert!((r.value - 1.125).abs() < 1e-6);
    }

    #[test]
    fn affine_gives_zero() {
        let f = SampledFunction::from_fn(-4.0, 4.0, 400, |x| 0.7 * x - 0.1);
        let r = beta1_function(&f, Interval::new(0.0, 1.0), false).unwrap();
        assert!(r.value <= 1e-10);
    }

    #[test]
    fn window_out_of_range() {
        let f = SampledFunction::from_fn(-1.0, 1.0, 200, |x| x * x);
        assert!(matches!(
            beta1_function(&f, Interval::new(0.0, 1.0), false),
            Err(BetaError::WindowOutOfRange { .. })
        ));
        assert!(beta1_function(&f, Interval::new(0.0, 1.0), true).is_ok());
    }

    #[test]
    fn zero_extension_keeps_jumps() {
        // constant 1 on [0, 1], zero elsewhere: residual of the best fit on
        // [-1, 2] is the measure of the set where f differs from the fit
        let f = SampledFunction::from_fn(0.0, 1.0, 100, |_| 1.0);
        let r = beta1_function(&f, Interval::new(0.0, 1.0), true).unwrap();
        assert!((r.fit.l1_residual - 1.0).abs() < 1e-9, "{}", r.fit.l1_residual);
    }

    #[test]
    fn residual_of_crossing_segment() {
        assert!((abs_linear_integral(2.0, -1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((abs_linear_integral(1.0, 1.0, 3.0) - 2.0).abs() < 1e-15);
    }
}
