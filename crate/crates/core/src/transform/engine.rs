use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use super::green::{cut_cell, rules, Kernel, Region};
use super::{PVQuadratureSpec, TransformError, TransformValue};
use crate::geometry::{Domain, LipschitzGraphDomain, PlanePoint, Rect};

const MAX_DEPTH: u32 = 40;

/// Integrates a kernel over `region` minus a square centred at the pole,
/// on rings of eight cells whose sizes grow by a factor 3.
pub(crate) struct Engine<'a, R: Region + ?Sized> {
    region: &'a R,
    kernel: Kernel,
    target_tol: f64,
    budget: u64,
    pub evals: u64,
    pub error: f64,
    pub exhausted: bool,
    cell_tol: f64,
}

impl<'a, R: Region + ?Sized> Engine<'a, R> {
    pub fn new(region: &'a R, kernel: Kernel, spec: &PVQuadratureSpec) -> Self {
        Self {
            region,
            kernel,
            target_tol: spec.target_tol,
            budget: spec.budget,
            evals: 0,
            error: 0.0,
            exhausted: false,
            cell_tol: spec.target_tol,
        }
    }

    fn pole(&self) -> PlanePoint {
        PlanePoint::from_complex(self.kernel.pole)
    }

    /// Integral over the region inside the square of half-width at least
    /// `outer` and outside the square of half-width `a`, both centred at
    /// the pole. Returns the sum and the half-width actually reached.
    pub fn rings(&mut self, a: f64, outer: f64) -> (Complex64, f64) {
        let count = ((outer / a).ln() / 3f64.ln()).ceil().max(1.0) as i32;
        // Σ area / dist² over all cells is about 2π ln 3 per ring
        self.cell_tol = self.target_tol / (2.0 * PI * count as f64);
        if self.kernel.power == 3 {
            // the cube kernel is a size 1/a larger near the pole; ask for
            // the same relative accuracy there
            self.cell_tol /= a.min(1.0);
        }
        let z = self.pole();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut h = a;
        for _ in 0..count {
            for i in -1..=1 {
                for j in -1..=1 {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    let c = z + PlanePoint::new(2.0 * h * i as f64, 2.0 * h * j as f64);
                    sum += self.cell(&Rect::square(c, h));
                }
            }
            h *= 3.0;
        }
        (sum, h)
    }

    pub fn cell(&mut self, rect: &Rect) -> Complex64 {
        if self.region.boundary_meets_rect(rect) {
            let c = cut_cell(self.region, rect, &self.kernel);
            self.evals += c.evals;
            self.error += c.error;
            c.value
        } else if self.region.contains(rect.center()) {
            self.interior(rect, 0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn gauss(&self, rect: &Rect, rule: &[(f64, f64)]) -> Complex64 {
        let c = rect.center();
        let (hx, hy) = (0.5 * rect.width(), 0.5 * rect.height());
        let mut s = Complex64::new(0.0, 0.0);
        for &(x, wx) in rule {
            for &(y, wy) in rule {
                let w = Complex64::new(c.x + hx * x, c.y + hy * y);
                s += self.kernel.eval(w) * (wx * wy);
            }
        }
        s * (hx * hy)
    }

    /// Adaptive product Gauss rule on a cell inside the region.
    fn interior(&mut self, rect: &Rect, depth: u32) -> Complex64 {
        let z = self.pole();
        let d = rect.dist_to_point(z);
        if rect.width() > d && depth < MAX_DEPTH && !self.exhausted {
            return self.split(rect, depth);
        }
        let r = rules();
        let hi = self.gauss(rect, &r.g8);
        let lo = self.gauss(rect, &r.g6);
        self.evals += (r.g8.len() * r.g8.len() + r.g6.len() * r.g6.len()) as u64;
        let diff = (hi - lo).norm();
        let dc = rect.center().dist(z);
        let tol = self.cell_tol * rect.area() / (dc * dc);
        if diff <= tol || depth >= MAX_DEPTH || self.exhausted {
            self.error += diff;
            return hi;
        }
        if self.evals > self.budget {
            self.exhausted = true;
            self.error += diff;
            return hi;
        }
        self.split(rect, depth)
    }

    fn split(&mut self, rect: &Rect, depth: u32) -> Complex64 {
        rect.quadrants()
            .iter()
            .map(|q| self.interior(q, depth + 1))
            .sum()
    }
}

fn check_spec(spec: &PVQuadratureSpec) -> Result<(), TransformError> {
    let ok = spec.epsilon > 0.0
        && spec.epsilon < spec.outer_radius
        && spec.budget >= 1000
        && spec.target_tol > 0.0
        && spec.outer_radius.is_finite();
    if ok {
        Ok(())
    } else {
        Err(TransformError::InvalidSpec(format!("{spec:?}")))
    }
}

fn boundary_distance(domain: &Domain, z: PlanePoint) -> Result<f64, TransformError> {
    if !z.is_finite() {
        return Err(TransformError::OnBoundary { dist: f64::NAN });
    }
    let d = domain.dist_to_boundary(z);
    let scale = match domain {
        Domain::Disk(k) => k.radius,
        _ => 1.0_f64.max(z.norm()),
    };
    if d <= 1e-12 * scale {
        Err(TransformError::OnBoundary { dist: d })
    } else {
        Ok(d)
    }
}

/// Half-width of a pole-centred square containing `rect`.
fn cover(z: PlanePoint, rect: &Rect) -> f64 {
    [z.x - rect.x0, rect.x1 - z.x, z.y - rect.y0, rect.y1 - z.y]
        .into_iter()
        .fold(0.0, f64::max)
}

/// A graph or half-plane in its canonical frame `{y > A(x)}`, with the
/// map back to the original frame `z -> e^{i phi} z + shift`.
struct Canonical {
    graph: Domain,
    phi: f64,
    shift: PlanePoint,
}

impl Canonical {
    fn of(domain: &Domain) -> Option<Self> {
        match domain {
            Domain::Graph(_) => Some(Self {
                graph: domain.clone(),
                phi: 0.0,
                shift: PlanePoint::ORIGIN,
            }),
            Domain::HalfPlane(h) => Some(Self {
                graph: Domain::Graph(LipschitzGraphDomain::flat(1.0)),
                phi: h.rotation_angle(),
                shift: h.anchor,
            }),
            _ => None,
        }
    }

    fn to_local(&self, z: PlanePoint) -> PlanePoint {
        (z - self.shift).rotate_about(PlanePoint::ORIGIN, -self.phi)
    }

    fn g(&self) -> &LipschitzGraphDomain {
        match &self.graph {
            Domain::Graph(g) => g,
            _ => unreachable!(),
        }
    }

    /// Half-width so the pole-centred square holds every non-flat part of
    /// the boundary with a margin of 1.
    fn needed(&self, z: PlanePoint, min: f64) -> f64 {
        let g = self.g();
        let (lo, hi) = g.x_range();
        let m = g.max_abs() + 1.0;
        cover(z, &Rect::new(lo - 1.0, -m, hi + 1.0, m)).max(min)
    }

    /// Default anchor, outside the closure of the canonical domain.
    fn anchor(&self) -> PlanePoint {
        PlanePoint::new(0.0, -1.0 - 2.0 * self.g().max_abs())
    }
}

/// `∫ w̄ K dw` along `a -> b` for a kernel of the given power at `z`.
fn seg(z: Complex64, power: u32, a: Complex64, b: Complex64) -> Complex64 {
    Kernel { pole: z, power }.segment(a, b, Complex64::new(0.0, 0.0))
}

/// The three edges of the outer square lying above the real axis,
/// traversed clockwise from `(x_l, 0)` to `(x_r, 0)`.
fn upper_edges(z: PlanePoint, r: f64) -> [(Complex64, Complex64); 3] {
    let (xl, xr, top) = (z.x - r, z.x + r, z.y + r);
    let a = Complex64::new(xl, 0.0);
    let b = Complex64::new(xl, top);
    let c = Complex64::new(xr, top);
    let d = Complex64::new(xr, 0.0);
    [(a, b), (b, c), (c, d)]
}

/// `∫∫_{Π ∖ S} [(z - w)^-2 - (z0 - w)^-2] dA` where `S` is the square of
/// half-width `r` around `z` and `Π` the upper half-plane.
fn tail_square(z: PlanePoint, z0: PlanePoint, r: f64) -> Complex64 {
    let (zc, z0c) = (z.to_complex(), z0.to_complex());
    let f = |p: Complex64, x: f64| {
        let d = p - x;
        d.ln() + p / d
    };
    let theta = |p: Complex64| if p.im < 0.0 { -PI } else { PI };
    let (xl, xr) = (z.x - r, z.x + r);
    let left = f(zc, xl) - f(z0c, xl);
    let right = Complex64::new(0.0, theta(zc) - theta(z0c)) - f(zc, xr) + f(z0c, xr);
    let edges: Complex64 = upper_edges(z, r)
        .iter()
        .map(|&(a, b)| seg(zc, 2, a, b) - seg(z0c, 2, a, b))
        .sum();
    (left + right + edges) / Complex64::new(0.0, 2.0)
}

/// `∫∫_{Π ∖ S} (z - w)^-3 dA`.
fn tail_cube(z: PlanePoint, r: f64) -> Complex64 {
    let zc = z.to_complex();
    let h = |x: f64| {
        let d = zc - x;
        zc / (2.0 * d * d) - d.inv()
    };
    let (xl, xr) = (z.x - r, z.x + r);
    let edges: Complex64 = upper_edges(z, r).iter().map(|&(a, b)| seg(zc, 3, a, b)).sum();
    (h(xl) - h(xr) + edges) / Complex64::new(0.0, 2.0)
}

fn finish<R: Region + ?Sized>(e: &Engine<R>, value: Complex64, factor: f64) -> Result<TransformValue, TransformError> {
    let v = TransformValue {
        value,
        est_error: e.error * factor.abs(),
        evals: e.evals,
    };
    if e.exhausted {
        Err(TransformError::BudgetExhausted { best: v })
    } else {
        Ok(v)
    }
}

/// Principal-value `B χ_Ω(z)`. The square of half-width
/// `0.99 dist(z, ∂Ω) / √2` around `z` lies in a disk where the kernel
/// integrates to zero, so it is left out. Unbounded domains are anchored
/// at `z0 = (0, -1 - 2 max|A|)` in their canonical frame.
pub fn pv_beurling(domain: &Domain, z: PlanePoint, spec: &PVQuadratureSpec) -> Result<TransformValue, TransformError> {
    check_spec(spec)?;
    let d = boundary_distance(domain, z)?;
    let a = 0.99 * d / SQRT_2;
    match Canonical::of(domain) {
        None => {
            let bbox = domain.bbox().expect("bounded domain");
            let mut e = Engine::new(domain, Kernel::square(z), spec);
            let (ring, _) = e.rings(a, cover(z, &bbox).max(a));
            finish(&e, -ring / PI, 1.0 / PI)
        }
        Some(c) => {
            let zl = c.to_local(z);
            let z0 = c.anchor();
            let mut e = Engine::new(&c.graph, Kernel::square(zl), spec);
            let (ring, r) = e.rings(a, c.needed(zl, spec.outer_radius));
            let outer = Rect::square(zl, r);
            let anchor_part = cut_cell(&c.graph, &outer, &Kernel::square(z0));
            e.evals += anchor_part.evals;
            let tail = tail_square(zl, z0, r);
            let value = -(ring - anchor_part.value + tail) / PI;
            let rot = Complex64::from_polar(1.0, -2.0 * c.phi);
            finish(&e, value * rot, 1.0 / PI)
        }
    }
}

/// `∂B χ_Ω(z) = (2/π) ∫_{|z-w|>ε} (z - w)^-3 χ_Ω(w) dm(w)`.
pub fn d_beurling(domain: &Domain, z: PlanePoint, spec: &PVQuadratureSpec) -> Result<TransformValue, TransformError> {
    check_spec(spec)?;
    let d = boundary_distance(domain, z)?;
    if spec.epsilon >= d {
        return Err(TransformError::EpsilonTooLarge {
            epsilon: spec.epsilon,
            dist: d,
        });
    }
    let a = spec.epsilon / SQRT_2;
    match Canonical::of(domain) {
        None => {
            let bbox = domain.bbox().expect("bounded domain");
            let mut e = Engine::new(domain, Kernel::cube(z), spec);
            let (ring, _) = e.rings(a, cover(z, &bbox).max(a));
            finish(&e, ring * (2.0 / PI), 2.0 / PI)
        }
        Some(c) => {
            let zl = c.to_local(z);
            let mut e = Engine::new(&c.graph, Kernel::cube(zl), spec);
            let (ring, r) = e.rings(a, c.needed(zl, spec.outer_radius));
            let value = (ring + tail_cube(zl, r)) * (2.0 / PI);
            let rot = Complex64::from_polar(1.0, -3.0 * c.phi);
            finish(&e, value * rot, 2.0 / PI)
        }
    }
}

/// `B χ_Ω(x) - B χ_Ω(y)`; on unbounded domains both values share the
/// anchor, which cancels.
pub fn beurling_difference(
    domain: &Domain,
    x: PlanePoint,
    y: PlanePoint,
    spec: &PVQuadratureSpec,
) -> Result<TransformValue, TransformError> {
    if x == y {
        check_spec(spec)?;
        boundary_distance(domain, x)?;
        return Ok(TransformValue {
            value: Complex64::new(0.0, 0.0),
            est_error: 0.0,
            evals: 0,
        });
    }
    let mut exhausted = false;
    let mut get = |p| match pv_beurling(domain, p, spec) {
        Ok(v) => Ok(v),
        Err(TransformError::BudgetExhausted { best }) => {
            exhausted = true;
            Ok(best)
        }
        Err(e) => Err(e),
    };
    let vx = get(x)?;
    let vy = get(y)?;
    let v = TransformValue {
        value: vx.value - vy.value,
        est_error: vx.est_error + vy.est_error,
        evals: vx.evals + vy.evals,
    };
    if exhausted {
        Err(TransformError::BudgetExhausted { best: v })
    } else {
        Ok(v)
    }
}

/// `∫∫ (z - w)^-2 dA` over a region, leaving out nothing: the region must
/// keep away from the pole. Used to check the annulus cancellation.
pub fn integrate_square_kernel<R: Region + ?Sized>(
    region: &R,
    z: PlanePoint,
    gap: f64,
    reach: f64,
    spec: &PVQuadratureSpec,
) -> Result<TransformValue, TransformError> {
    let mut e = Engine::new(region, Kernel::square(z), spec);
    let (v, _) = e.rings(gap / SQRT_2, reach);
    finish(&e, v, 1.0)
}
