use std::f64::consts::PI;

use serde::Serialize;

use super::function::Beta1Result;
use super::l1fit::weighted_median;
use crate::decomposition::BoundaryArc;
use crate::geometry::{Domain, Piece, PlanePoint};

/// The line `{z : <n, z> = c}` through `point` with unit `direction`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub point: PlanePoint,
    pub direction: [f64; 2],
    pub l1_residual: f64,
}

impl LineFit {
    pub fn normal(&self) -> PlanePoint {
        PlanePoint::new(-self.direction[1], self.direction[0])
    }

    pub fn distance(&self, z: PlanePoint) -> f64 {
        (z - self.point).dot(self.normal()).abs()
    }
}

/// Nodes used to discretize `3P`.
pub const CURVE_NODES: usize = 512;
const ANGLES: usize = 256;

/// `n` midpoint nodes of equal arclength along the concatenated pieces.
/// Returns the nodes and the common weight.
pub fn curve_nodes(pieces: &[Piece], n: usize) -> (Vec<PlanePoint>, f64) {
    let lengths: Vec<f64> = pieces.iter().map(Piece::length).collect();
    let total: f64 = lengths.iter().sum();
    let w = total / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut piece = 0;
    let mut before = 0.0;
    for k in 0..n {
        let s = (k as f64 + 0.5) * w;
        while piece + 1 < pieces.len() && s > before + lengths[piece] {
            before += lengths[piece];
            piece += 1;
        }
        let t = ((s - before) / lengths[piece]).clamp(0.0, 1.0);
        out.push(pieces[piece].point(t));
    }
    (out, w)
}

fn centroid(points: &[PlanePoint]) -> PlanePoint {
    let n = points.len() as f64;
    let s = points.iter().fold(PlanePoint::ORIGIN, |a, &p| a + p);
    s * (1.0 / n)
}

/// `min_c Σ w |<n_θ, x> - c|` and the minimizing offset.
fn angle_cost(points: &[PlanePoint], weight: f64, theta: f64, buf: &mut Vec<(f64, f64)>) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    buf.clear();
    buf.extend(points.iter().map(|p| (c * p.x + s * p.y, weight)));
    let off = weighted_median(buf);
    let cost = points
        .iter()
        .map(|p| (c * p.x + s * p.y - off).abs())
        .sum::<f64>()
        * weight;
    (cost, off)
}

fn golden(
    points: &[PlanePoint],
    weight: f64,
    mut a: f64,
    mut b: f64,
    iters: usize,
    buf: &mut Vec<(f64, f64)>,
) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = angle_cost(points, weight, x1, buf).0;
    let mut f2 = angle_cost(points, weight, x2, buf).0;
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = angle_cost(points, weight, x1, buf).0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = angle_cost(points, weight, x2, buf).0;
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn line_from(theta: f64, offset: f64, shift: PlanePoint, cost: f64) -> LineFit {
    let (s, c) = theta.sin_cos();
    let n = PlanePoint::new(c, s);
    LineFit {
        point: n * offset + shift,
        direction: [-s, c],
        l1_residual: cost,
    }
}

/// Best L1 line for equally weighted points: 256 directions, then two
/// golden-section passes around the best one; the offset is an exact
/// weighted median for every direction.
pub fn line_fit(points: &[PlanePoint], weight: f64) -> LineFit {
    let shift = centroid(points);
    let local: Vec<PlanePoint> = points.iter().map(|&p| p - shift).collect();
    let mut buf = Vec::with_capacity(points.len());
    let step = PI / ANGLES as f64;
    let mut best = (0.0, f64::INFINITY);
    for k in 0..ANGLES {
        let theta = k as f64 * step;
        let (c, _) = angle_cost(&local, weight, theta, &mut buf);
        if c < best.1 {
            best = (theta, c);
        }
    }
    let (t1, c1) = golden(&local, weight, best.0 - step, best.0 + step, 48, &mut buf);
    let (t2, c2) = golden(&local, weight, t1 - step / 32.0, t1 + step / 32.0, 48, &mut buf);
    let (theta, _) = [best, (t1, c1), (t2, c2)]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let (cost, off) = angle_cost(&local, weight, theta, &mut buf);
    line_from(theta, off, shift, cost)
}

/// Exhaustive search over lines through two of the points; some optimal
/// L1 line passes through two of them.
pub fn line_fit_pairs(points: &[PlanePoint], weight: f64) -> LineFit {
    let shift = centroid(points);
    let local: Vec<PlanePoint> = points.iter().map(|&p| p - shift).collect();
    let mut best: Option<LineFit> = None;
    for i in 0..local.len() {
        for j in i + 1..local.len() {
            let d = local[j] - local[i];
            let len = d.norm();
            if len == 0.0 {
                continue;
            }
            let n = PlanePoint::new(-d.y / len, d.x / len);
            let off = n.dot(local[i]);
            let cost = local.iter().map(|p| (n.dot(*p) - off).abs()).sum::<f64>() * weight;
            if best.is_none_or(|b| cost < b.l1_residual) {
                best = Some(LineFit {
                    point: local[i] + shift,
                    direction: [d.x / len, d.y / len],
                    l1_residual: cost,
                });
            }
        }
    }
    best.expect("at least two distinct points")
}

/// Nodes of `3P` (capped at one period on closed curves).
pub fn triple_arc_nodes(domain: &Domain, arc: &BoundaryArc, n: usize) -> (Vec<PlanePoint>, f64, (f64, f64)) {
    let (a, b) = arc.triple();
    let pieces = domain.pieces_between(a, b);
    let (nodes, w) = curve_nodes(&pieces, n);
    (nodes, w, (a, b))
}

/// `β₁(∂Ω, P) = inf_L ℓ(P)^-2 ∫_{3P} dist(x, L) dH¹(x)`.
pub fn beta1_curve(domain: &Domain, arc: &BoundaryArc) -> Beta1Result<LineFit> {
    let (nodes, w, window) = triple_arc_nodes(domain, arc, CURVE_NODES);
    let fit = line_fit(&nodes, w);
    let l = arc.length();
    Beta1Result {
        value: fit.l1_residual / (l * l),
        window,
        fit,
    }
}
