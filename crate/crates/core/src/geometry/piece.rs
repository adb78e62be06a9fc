//! Boundary primitives (straight segments and circular arcs) and the
//! axis-aligned rectangles they get clipped against.

use std::f64::consts::TAU;

use super::point::PlanePoint;

/// Closed axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Self { x0, y0, x1, y1 }
    }

    pub fn square(center: PlanePoint, half: f64) -> Self {
        Self::new(
            center.x - half,
            center.y - half,
            center.x + half,
            center.y + half,
        )
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> PlanePoint {
        PlanePoint::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.width().hypot(self.height())
    }

    pub fn contains(&self, p: PlanePoint) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// Euclidean distance from `p` to the rectangle (zero inside).
    pub fn dist_to_point(&self, p: PlanePoint) -> f64 {
        let dx = (self.x0 - p.x).max(0.0).max(p.x - self.x1);
        let dy = (self.y0 - p.y).max(0.0).max(p.y - self.y1);
        dx.hypot(dy)
    }

    /// Euclidean distance between two rectangles (zero when they meet).
    pub fn dist_to_rect(&self, o: &Rect) -> f64 {
        let dx = (o.x0 - self.x1).max(0.0).max(self.x0 - o.x1);
        let dy = (o.y0 - self.y1).max(0.0).max(self.y0 - o.y1);
        dx.hypot(dy)
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.x0 <= o.x1 && o.x0 <= self.x1 && self.y0 <= o.y1 && o.y0 <= self.y1
    }

    pub fn corners(&self) -> [PlanePoint; 4] {
        [
            PlanePoint::new(self.x0, self.y0),
            PlanePoint::new(self.x1, self.y0),
            PlanePoint::new(self.x1, self.y1),
            PlanePoint::new(self.x0, self.y1),
        ]
    }

    /// Edges in counterclockwise order, interior on the left.
    pub fn edges_ccw(&self) -> [(PlanePoint, PlanePoint); 4] {
        let c = self.corners();
        [(c[0], c[1]), (c[1], c[2]), (c[2], c[3]), (c[3], c[0])]
    }

    pub fn quadrants(&self) -> [Rect; 4] {
        let c = self.center();
        [
            Rect::new(self.x0, self.y0, c.x, c.y),
            Rect::new(c.x, self.y0, self.x1, c.y),
            Rect::new(self.x0, c.y, c.x, self.y1),
            Rect::new(c.x, c.y, self.x1, self.y1),
        ]
    }

    pub fn union(&self, o: &Rect) -> Rect {
        Rect::new(
            self.x0.min(o.x0),
            self.y0.min(o.y0),
            self.x1.max(o.x1),
            self.y1.max(o.y1),
        )
    }
}

/// An oriented piece of a boundary curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    Segment {
        a: PlanePoint,
        b: PlanePoint,
    },
    /// `center + radius * e^{i(start + sweep * t)}`, `t` in `[0, 1]`.
    Arc {
        center: PlanePoint,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl Piece {
    pub fn point(&self, t: f64) -> PlanePoint {
        match *self {
            Piece::Segment { a, b } => a.lerp(b, t),
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let (s, c) = (start + sweep * t).sin_cos();
                PlanePoint::new(center.x + radius * c, center.y + radius * s)
            }
        }
    }

    /// Derivative of `point` with respect to `t`.
    pub fn velocity(&self, t: f64) -> PlanePoint {
        match *self {
            Piece::Segment { a, b } => b - a,
            Piece::Arc {
                radius,
                start,
                sweep,
                ..
            } => {
                let (s, c) = (start + sweep * t).sin_cos();
                PlanePoint::new(-radius * sweep * s, radius * sweep * c)
            }
        }
    }

    pub fn start_point(&self) -> PlanePoint {
        self.point(0.0)
    }

    pub fn end_point(&self) -> PlanePoint {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { a, b } => a.dist(b),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Restriction to the parameter sub-interval `[t0, t1]`.
    pub fn sub(&self, t0: f64, t1: f64) -> Piece {
        match *self {
            Piece::Segment { a, b } => Piece::Segment {
                a: a.lerp(b, t0),
                b: a.lerp(b, t1),
            },
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => Piece::Arc {
                center,
                radius,
                start: start + sweep * t0,
                sweep: sweep * (t1 - t0),
            },
        }
    }

    pub fn reversed(&self) -> Piece {
        match *self {
            Piece::Segment { a, b } => Piece::Segment { a: b, b: a },
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => Piece::Arc {
                center,
                radius,
                start: start + sweep,
                sweep: -sweep,
            },
        }
    }

    pub fn bounding_rect(&self) -> Rect {
        match *self {
            Piece::Segment { a, b } => {
                Rect::new(a.x.min(b.x), a.y.min(b.y), a.x.max(b.x), a.y.max(b.y))
            }
            Piece::Arc { .. } => {
                let mut r = {
                    let p = self.point(0.0);
                    let q = self.point(1.0);
                    Rect::new(p.x.min(q.x), p.y.min(q.y), p.x.max(q.x), p.y.max(q.y))
                };
                for k in 0..4 {
                    let theta = k as f64 * 0.25 * TAU;
                    if let Some(t) = self.arc_param_of_angle(theta) {
                        let p = self.point(t);
                        r = r.union(&Rect::new(p.x, p.y, p.x, p.y));
                    }
                }
                r
            }
        }
    }

    /// Parameter `t` in `[0, 1]` at which the arc passes through polar angle
    /// `theta`, if it does.
    fn arc_param_of_angle(&self, theta: f64) -> Option<f64> {
        let Piece::Arc { start, sweep, .. } = *self else {
            return None;
        };
        if sweep == 0.0 {
            return None;
        }
        let mut delta = if sweep > 0.0 {
            theta - start
        } else {
            start - theta
        };
        delta = delta.rem_euclid(TAU);
        let t = delta / sweep.abs();
        if t <= 1.0 + 1e-12 {
            Some(t.min(1.0))
        } else if (TAU - delta) / sweep.abs() < 1e-12 {
            Some(0.0)
        } else {
            None
        }
    }

    pub fn dist_to_point(&self, p: PlanePoint) -> f64 {
        match *self {
            Piece::Segment { a, b } => point_segment_distance(p, a, b),
            Piece::Arc { center, radius, .. } => {
                let d = p - center;
                let r = d.norm();
                if r > 0.0 {
                    let theta = d.y.atan2(d.x);
                    if self.arc_param_of_angle(theta).is_some() {
                        return (r - radius).abs();
                    }
                }
                p.dist(self.point(0.0)).min(p.dist(self.point(1.0)))
            }
        }
    }

    /// Parts of the piece lying in the closed rectangle, in order.
    pub fn clip_to_rect(&self, rect: &Rect) -> Vec<Piece> {
        match *self {
            Piece::Segment { a, b } => clip_segment(a, b, rect)
                .map(|(t0, t1)| vec![self.sub(t0, t1)])
                .unwrap_or_default(),
            Piece::Arc {
                center, radius, ..
            } => {
                let mut ts = vec![0.0, 1.0];
                for (c, lo, hi, vertical) in [
                    (rect.x0, rect.y0, rect.y1, true),
                    (rect.x1, rect.y0, rect.y1, true),
                    (rect.y0, rect.x0, rect.x1, false),
                    (rect.y1, rect.x0, rect.x1, false),
                ] {
                    let off = if vertical { c - center.x } else { c - center.y };
                    if off.abs() > radius {
                        continue;
                    }
                    let base = (off / radius).clamp(-1.0, 1.0).acos();
                    let candidates = if vertical {
                        [base, -base]
                    } else {
                        // y = cy + r sin(theta)
                        let s = (off / radius).clamp(-1.0, 1.0).asin();
                        [s, std::f64::consts::PI - s]
                    };
                    for theta in candidates {
                        let q = PlanePoint::new(
                            center.x + radius * theta.cos(),
                            center.y + radius * theta.sin(),
                        );
                        let along = if vertical { q.y } else { q.x };
                        if along < lo - 1e-12 || along > hi + 1e-12 {
                            continue;
                        }
                        if let Some(t) = self.arc_param_of_angle(theta) {
                            ts.push(t);
                        }
                    }
                }
                ts.sort_by(|a, b| a.total_cmp(b));
                ts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
                let mut out: Vec<(f64, f64)> = Vec::new();
                for w in ts.windows(2) {
                    let (t0, t1) = (w[0], w[1]);
                    if t1 - t0 <= 0.0 {
                        continue;
                    }
                    if rect_contains_tol(rect, self.point(0.5 * (t0 + t1))) {
                        match out.last_mut() {
                            Some(last) if (last.1 - t0).abs() < 1e-14 => last.1 = t1,
                            _ => out.push((t0, t1)),
                        }
                    }
                }
                out.into_iter().map(|(t0, t1)| self.sub(t0, t1)).collect()
            }
        }
    }

    pub fn intersects_rect(&self, rect: &Rect) -> bool {
        match *self {
            Piece::Segment { a, b } => clip_segment(a, b, rect).is_some(),
            Piece::Arc { .. } => {
                if !self.bounding_rect().intersects(rect) {
                    return false;
                }
                !self.clip_to_rect(rect).is_empty()
                    || rect.contains(self.point(0.0))
            }
        }
    }

    /// Parameters along the segment `p -> q` (in `[0, 1]`) where it meets
    /// this piece. Collinear overlaps contribute their end parameters.
    pub fn crossings_with_segment(&self, p: PlanePoint, q: PlanePoint) -> Vec<f64> {
        let d = q - p;
        match *self {
            Piece::Segment { a, b } => {
                let e = b - a;
                let denom = d.cross(e);
                let scale = d.norm() * e.norm();
                if denom.abs() <= 1e-14 * scale {
                    // parallel; only collinear overlaps matter
                    if (a - p).cross(d).abs() > 1e-12 * d.norm() * (1.0 + (a - p).norm()) {
                        return Vec::new();
                    }
                    let dd = d.dot(d);
                    let ta = (a - p).dot(d) / dd;
                    let tb = (b - p).dot(d) / dd;
                    let (lo, hi) = (ta.min(tb).max(0.0), ta.max(tb).min(1.0));
                    if lo <= hi {
                        return vec![lo, hi];
                    }
                    return Vec::new();
                }
                let w = a - p;
                let t = w.cross(e) / denom;
                let s = w.cross(d) / denom;
                let tol = 1e-12;
                if (-tol..=1.0 + tol).contains(&t) && (-tol..=1.0 + tol).contains(&s) {
                    vec![t.clamp(0.0, 1.0)]
                } else {
                    Vec::new()
                }
            }
            Piece::Arc { center, radius, .. } => {
                // |p + t d - c|^2 = r^2
                let f = p - center;
                let qa = d.dot(d);
                let qb = 2.0 * f.dot(d);
                let qc = f.dot(f) - radius * radius;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc < 0.0 {
                    return Vec::new();
                }
                let sq = disc.sqrt();
                let mut out = Vec::new();
                for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
                    if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                        continue;
                    }
                    let x = p + d * t - center;
                    if self.arc_param_of_angle(x.y.atan2(x.x)).is_some() {
                        out.push(t.clamp(0.0, 1.0));
                    }
                }
                out
            }
        }
    }
}

fn rect_contains_tol(rect: &Rect, p: PlanePoint) -> bool {
    let tol = 1e-13 * (1.0 + rect.width().max(rect.height()));
    p.x >= rect.x0 - tol && p.x <= rect.x1 + tol && p.y >= rect.y0 - tol && p.y <= rect.y1 + tol
}

pub fn point_segment_distance(p: PlanePoint, a: PlanePoint, b: PlanePoint) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

/// Liang-Barsky clip of `a + t (b - a)`, `t` in `[0, 1]`, against a closed
/// rectangle. Returns the surviving parameter range.
pub fn clip_segment(a: PlanePoint, b: PlanePoint, rect: &Rect) -> Option<(f64, f64)> {
    clip_line(a, b - a, 0.0, 1.0, rect)
}

/// Liang-Barsky clip of the parametric line `a + t d` restricted to
/// `[t_lo, t_hi]` (infinite bounds allowed).
pub fn clip_line(
    a: PlanePoint,
    d: PlanePoint,
    t_lo: f64,
    t_hi: f64,
    rect: &Rect,
) -> Option<(f64, f64)> {
    let mut t0 = t_lo;
    let mut t1 = t_hi;
    for (pk, qk) in [
        (-d.x, a.x - rect.x0),
        (d.x, rect.x1 - a.x),
        (-d.y, a.y - rect.y0),
        (d.y, rect.y1 - a.y),
    ] {
        if pk == 0.0 {
            if qk < 0.0 {
                return None;
            }
        } else {
            let r = qk / pk;
            if pk < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 <= t1 && t0.is_finite() && t1.is_finite() {
        Some((t0, t1))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn segment_clip_partial() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        let p = Piece::Segment {
            a: PlanePoint::new(-1.0, 0.5),
            b: PlanePoint::new(3.0, 0.5),
        };
        let c = p.clip_to_rect(&r);
        assert_eq!(c.len(), 1);
        assert!((c[0].length() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn arc_clip_quarter() {
        let circle = Piece::Arc {
            center: PlanePoint::ORIGIN,
            radius: 1.0,
            start: 0.0,
            sweep: 2.0 * PI,
        };
        let r = Rect::new(0.0, 0.0, 2.0, 2.0);
        let c = circle.clip_to_rect(&r);
        let total: f64 = c.iter().map(|p| p.length()).sum();
        assert!((total - PI / 2.0).abs() < 1e-12, "{total}");
    }

    #[test]
    fn arc_clip_box_across_start_angle() {
        let circle = Piece::Arc {
            center: PlanePoint::ORIGIN,
            radius: 1.0,
            start: 0.0,
            sweep: 2.0 * PI,
        };
        // box around (1, 0) straddles the arc's start point
        let r = Rect::new(0.5, -0.5, 1.5, 0.5);
        let total: f64 = circle.clip_to_rect(&r).iter().map(|p| p.length()).sum();
        let expected = 2.0 * (0.5f64).asin();
        assert!((total - expected).abs() < 1e-12, "{total} vs {expected}");
    }

    #[test]
    fn arc_distance() {
        let arc = Piece::Arc {
            center: PlanePoint::ORIGIN,
            radius: 1.0,
            start: 0.0,
            sweep: PI / 2.0,
        };
        assert!((arc.dist_to_point(PlanePoint::new(2.0, 2.0)) - (8f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((arc.dist_to_point(PlanePoint::new(0.0, -2.0)) - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn crossings() {
        let seg = Piece::Segment {
            a: PlanePoint::new(0.5, -1.0),
            b: PlanePoint::new(0.5, 1.0),
        };
        let t = seg.crossings_with_segment(PlanePoint::new(0.0, 0.0), PlanePoint::new(1.0, 0.0));
        assert_eq!(t.len(), 1);
        assert!((t[0] - 0.5).abs() < 1e-15);
        let circle = Piece::Arc {
            center: PlanePoint::ORIGIN,
            radius: 1.0,
            start: 0.0,
            sweep: 2.0 * PI,
        };
        let t = circle.crossings_with_segment(PlanePoint::new(-2.0, 0.0), PlanePoint::new(2.0, 0.0));
        assert_eq!(t.len(), 2);
    }
}
