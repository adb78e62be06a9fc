use std::f64::consts::TAU;

use super::piece::{clip_line, point_segment_distance, Piece, Rect};
use super::point::{wrap_angle, PlanePoint, UnitNormal};
use super::GeometryError;

#[derive(Clone, Debug, PartialEq)]
pub struct DiskDomain {
    pub center: PlanePoint,
    pub radius: f64,
}

impl DiskDomain {
    pub fn new(center: PlanePoint, radius: f64) -> Result<Self, GeometryError> {
        if !center.is_finite() {
            return Err(GeometryError::NonFinite("center".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidField {
                field: "radius".into(),
                reason: format!("must be positive and finite, got {radius}"),
            });
        }
        Ok(Self { center, radius })
    }

    pub fn unit() -> Self {
        Self {
            center: PlanePoint::ORIGIN,
            radius: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalfPlaneDomain {
    pub anchor: PlanePoint,
    pub inward_normal: UnitNormal,
}

impl HalfPlaneDomain {
    pub fn new(anchor: PlanePoint, inward_normal: UnitNormal) -> Result<Self, GeometryError> {
        if !anchor.is_finite() {
            return Err(GeometryError::NonFinite("anchor".into()));
        }
        if !inward_normal.is_unit() {
            return Err(GeometryError::InvalidField {
                field: "inward_normal".into(),
                reason: "not a unit vector within 1e-12".into(),
            });
        }
        Ok(Self {
            anchor,
            inward_normal,
        })
    }

    pub fn upper() -> Self {
        Self {
            anchor: PlanePoint::ORIGIN,
            inward_normal: UnitNormal { n1: 0.0, n2: 1.0 },
        }
    }

    /// Direction of the boundary line with the half-plane on its left.
    pub fn direction(&self) -> PlanePoint {
        PlanePoint::new(self.inward_normal.n2, -self.inward_normal.n1)
    }

    /// Angle `phi` such that rotating the upper half-plane by `phi` gives
    /// this one's direction.
    pub fn rotation_angle(&self) -> f64 {
        let d = self.direction();
        d.y.atan2(d.x)
    }
}

/// `{y > A(x)}` with `A` piecewise linear on a uniform grid and zero
/// outside the sampled range.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzGraphDomain {
    x_first: f64,
    spacing: f64,
    values: Vec<f64>,
    lipschitz_bound: f64,
    support_radius: f64,
    max_abs: f64,
}

impl LipschitzGraphDomain {
    pub fn new(
        samples: &[(f64, f64)],
        lipschitz_bound: f64,
        support_radius: f64,
    ) -> Result<Self, GeometryError> {
        if samples.len() < 2 {
            return Err(GeometryError::InvalidField {
                field: "samples".into(),
                reason: "need at least two samples".into(),
            });
        }
        if !(lipschitz_bound >= 0.0 && lipschitz_bound.is_finite()) {
            return Err(GeometryError::InvalidField {
                field: "lipschitz_bound".into(),
                reason: format!("must be finite and >= 0, got {lipschitz_bound}"),
            });
        }
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(GeometryError::InvalidField {
                field: "support_radius".into(),
                reason: format!("must be finite and > 0, got {support_radius}"),
            });
        }
        for (i, &(x, a)) in samples.iter().enumerate() {
            if !x.is_finite() || !a.is_finite() {
                return Err(GeometryError::NonFinite(format!("samples[{i}]")));
            }
        }
        let x_first = samples[0].0;
        let n = samples.len();
        let spacing = (samples[n - 1].0 - x_first) / (n - 1) as f64;
        if spacing <= 0.0 {
            return Err(GeometryError::InvalidField {
                field: "samples".into(),
                reason: "x must be increasing".into(),
            });
        }
        for (i, &(x, _)) in samples.iter().enumerate() {
            let expected = x_first + i as f64 * spacing;
            if (x - expected).abs() > 1e-9 * spacing.max(expected.abs() * 1e-3) {
                return Err(GeometryError::InvalidField {
                    field: format!("samples[{i}]"),
                    reason: format!("grid is not uniform (x = {x}, expected {expected})"),
                });
            }
        }
        let slack = 1e-9 * spacing;
        if x_first > -support_radius + slack || samples[n - 1].0 < support_radius - slack {
            return Err(GeometryError::InvalidField {
                field: "samples".into(),
                reason: "sampled range must cover [-L, L]".into(),
            });
        }
        for (i, &(x, a)) in samples.iter().enumerate() {
            if x.abs() >= support_radius - slack && a.abs() > 1e-12 {
                return Err(GeometryError::InvalidField {
                    field: format!("samples[{i}]"),
                    reason: format!("A must vanish for |x| >= L, got A({x}) = {a}"),
                });
            }
        }
        let tol = 1e-9 * (1.0 + lipschitz_bound);
        for (i, w) in samples.windows(2).enumerate() {
            if (w[1].1 - w[0].1).abs() > lipschitz_bound * spacing + tol * spacing {
                return Err(GeometryError::InvalidField {
                    field: format!("samples[{}]", i + 1),
                    reason: format!(
                        "slope {} exceeds lipschitz_bound {lipschitz_bound}",
                        (w[1].1 - w[0].1) / spacing
                    ),
                });
            }
        }
        let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            x_first,
            spacing,
            values,
            lipschitz_bound,
            support_radius,
            max_abs,
        })
    }

    /// Samples `f` on `[-L, L]` with `n` intervals. The Lipschitz bound is
    /// taken from the data.
    pub fn from_fn(support_radius: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self, GeometryError> {
        let h = 2.0 * support_radius / n as f64;
        let samples: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let x = -support_radius + i as f64 * h;
                let v = if i == 0 || i == n { 0.0 } else { f(x) };
                (x, v)
            })
            .collect();
        let delta = samples
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / h).abs())
            .fold(0.0, f64::max);
        Self::new(&samples, delta, support_radius)
    }

    pub fn flat(support_radius: f64) -> Self {
        Self::from_fn(support_radius, 2, |_| 0.0).expect("flat graph is valid")
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x_last_knot(0), self.x_last_knot(self.values.len() - 1))
    }

    fn x_last_knot(&self, i: usize) -> f64 {
        self.x_first + i as f64 * self.spacing
    }

    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.x_last_knot(i), v))
            .collect()
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.values.len();
        let (lo, hi) = self.x_range();
        if x <= lo || x >= hi {
            return 0.0;
        }
        let u = (x - self.x_first) / self.spacing;
        let i = (u.floor() as usize).min(n - 2);
        let t = u - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Slope of `A` with the left-segment convention at knots.
    pub fn slope(&self, x: f64) -> f64 {
        let n = self.values.len();
        let (lo, hi) = self.x_range();
        if x <= lo || x > hi {
            return 0.0;
        }
        let u = (x - self.x_first) / self.spacing;
        let i = ((u.ceil() as usize).max(1) - 1).min(n - 2);
        (self.values[i + 1] - self.values[i]) / self.spacing
    }

    pub fn normal(&self, x: f64) -> UnitNormal {
        normal_from_slope(self.slope(x))
    }

    /// Boundary between parameters `xa < xb`, oriented in `+x`.
    pub fn pieces_between(&self, xa: f64, xb: f64) -> Vec<Piece> {
        let mut out = Vec::new();
        if xb <= xa {
            return out;
        }
        let (lo, hi) = self.x_range();
        if xa < lo {
            let e = xb.min(lo);
            out.push(Piece::Segment {
                a: PlanePoint::new(xa, 0.0),
                b: PlanePoint::new(e, 0.0),
            });
        }
        let a = xa.max(lo);
        let b = xb.min(hi);
        if a < b {
            let n = self.values.len();
            let i0 = (((a - self.x_first) / self.spacing).floor() as usize).min(n - 2);
            let i1 = (((b - self.x_first) / self.spacing).ceil() as usize).clamp(1, n - 1);
            for i in i0..i1 {
                let s0 = self.x_last_knot(i).max(a);
                let s1 = self.x_last_knot(i + 1).min(b);
                if s1 > s0 {
                    out.push(Piece::Segment {
                        a: PlanePoint::new(s0, self.value_on_segment(i, s0)),
                        b: PlanePoint::new(s1, self.value_on_segment(i, s1)),
                    });
                }
            }
        }
        if xb > hi {
            let s = xa.max(hi);
            out.push(Piece::Segment {
                a: PlanePoint::new(s, 0.0),
                b: PlanePoint::new(xb, 0.0),
            });
        }
        out
    }

    fn value_on_segment(&self, i: usize, x: f64) -> f64 {
        let t = (x - self.x_last_knot(i)) / self.spacing;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Boundary pieces within `[xa, xb]` tagged with their (constant)
    /// normal angle.
    pub fn normal_pieces_between(&self, xa: f64, xb: f64) -> Vec<NormalPiece> {
        let mut s = xa;
        self.pieces_between(xa, xb)
            .into_iter()
            .map(|p| {
                let a = p.start_point();
                let b = p.end_point();
                let mid = 0.5 * (a.x + b.x);
                let theta = self.normal(mid).angle();
                let len = p.length();
                let np = NormalPiece {
                    piece: p,
                    s0: s,
                    s1: s + len,
                    theta0: theta,
                    theta1: theta,
                };
                s += len;
                np
            })
            .collect()
    }

    pub fn rect_candidates(&self, rect: &Rect) -> Vec<Piece> {
        // every boundary point in the rect has x in [x0, x1]
        self.pieces_between(rect.x0, rect.x1)
    }
}

pub fn normal_from_slope(slope: f64) -> UnitNormal {
    let s = 1.0 / (1.0 + slope * slope).sqrt();
    UnitNormal {
        n1: slope * s,
        n2: -s,
    }
}

/// Bounded polygon, counterclockwise, with optional prescribed normals at
/// the vertices (used to represent smooth curves by their inscribed chain).
#[derive(Clone, Debug)]
pub struct PolygonDomain {
    vertices: Vec<PlanePoint>,
    normals: Vec<Option<UnitNormal>>,
    cumulative: Vec<f64>,
    chord_arc_constant: f64,
    diameter: f64,
    bbox: Rect,
    grid: SegmentGrid,
}

impl PartialEq for PolygonDomain {
    fn eq(&self, o: &Self) -> bool {
        self.vertices == o.vertices && self.normals == o.normals
    }
}

impl PolygonDomain {
    pub fn new(vertices: Vec<PlanePoint>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        Self::with_normals(vertices, vec![None; n])
    }

    pub fn with_normals(
        mut vertices: Vec<PlanePoint>,
        mut normals: Vec<Option<UnitNormal>>,
    ) -> Result<Self, GeometryError> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
            if normals.len() > vertices.len() {
                normals.pop();
            }
        }
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::InvalidField {
                field: "vertices".into(),
                reason: "a polygon needs at least three vertices".into(),
            });
        }
        if normals.len() != n {
            return Err(GeometryError::InvalidField {
                field: "normals".into(),
                reason: format!("expected {n} entries, got {}", normals.len()),
            });
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(GeometryError::NonFinite(format!("vertices[{i}]")));
            }
            if *v == vertices[(i + 1) % n] {
                return Err(GeometryError::InvalidField {
                    field: format!("vertices[{i}]"),
                    reason: "repeated vertex".into(),
                });
            }
        }
        for (i, nm) in normals.iter().enumerate() {
            if let Some(u) = nm {
                if !u.is_unit() {
                    return Err(GeometryError::InvalidField {
                        field: format!("normals[{i}]"),
                        reason: "not a unit vector within 1e-12".into(),
                    });
                }
            }
        }
        let area2: f64 = (0..n)
            .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
            .sum();
        if area2 <= 0.0 {
            return Err(GeometryError::InvalidField {
                field: "vertices".into(),
                reason: "chain must be counterclockwise".into(),
            });
        }
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for i in 0..n {
            let l = cumulative[i] + vertices[i].dist(vertices[(i + 1) % n]);
            cumulative.push(l);
        }
        let mut bbox = Rect::new(vertices[0].x, vertices[0].y, vertices[0].x, vertices[0].y);
        for v in &vertices {
            bbox = bbox.union(&Rect::new(v.x, v.y, v.x, v.y));
        }
        let grid = SegmentGrid::build(&vertices, bbox);
        let mut poly = Self {
            vertices,
            normals,
            cumulative,
            chord_arc_constant: 1.0,
            diameter: 0.0,
            bbox,
            grid,
        };
        if let Some((i, j)) = poly.find_self_intersection() {
            return Err(GeometryError::InvalidField {
                field: "vertices".into(),
                reason: format!("edges {i} and {j} intersect"),
            });
        }
        let (ca, diam) = poly.chord_arc_and_diameter();
        poly.chord_arc_constant = ca;
        poly.diameter = diam;
        Ok(poly)
    }

    pub fn vertices(&self) -> &[PlanePoint] {
        &self.vertices
    }

    pub fn prescribed_normals(&self) -> &[Option<UnitNormal>] {
        &self.normals
    }

    pub fn chord_arc_constant(&self) -> f64 {
        self.chord_arc_constant
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn perimeter(&self) -> f64 {
        self.cumulative[self.vertices.len()]
    }

    pub fn bbox(&self) -> Rect {
        self.bbox
    }

    pub fn edge(&self, i: usize) -> (PlanePoint, PlanePoint) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n]))
            .sum::<f64>()
    }

    fn find_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        for i in 0..n {
            let (a, b) = self.edge(i);
            let ri = Rect::new(a.x.min(b.x), a.y.min(b.y), a.x.max(b.x), a.y.max(b.y));
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (c, d) = self.edge(j);
                let rj = Rect::new(c.x.min(d.x), c.y.min(d.y), c.x.max(d.x), c.y.max(d.y));
                if !ri.intersects(&rj) {
                    continue;
                }
                if adjacent {
                    // adjacent edges may only share their common vertex
                    let (p, q, r) = if j == i + 1 { (a, b, d) } else { (c, a, b) };
                    let u = q - p;
                    let v = r - q;
                    if u.cross(v).abs() <= 1e-14 * u.norm() * v.norm() && u.dot(v) < 0.0 {
                        return Some((i, j));
                    }
                    continue;
                }
                if segments_intersect(a, b, c, d) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    fn chord_arc_and_diameter(&self) -> (f64, f64) {
        let n = self.vertices.len();
        let total = self.perimeter();
        let mut ca: f64 = 1.0;
        let mut diam: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let chord = self.vertices[i].dist(self.vertices[j]);
                let along = self.cumulative[j] - self.cumulative[i];
                let arc = along.min(total - along);
                diam = diam.max(chord);
                if chord > 0.0 {
                    ca = ca.max(arc / chord);
                }
            }
        }
        (ca, diam)
    }

    pub fn contains(&self, z: PlanePoint) -> bool {
        if !self.bbox.contains(z) {
            return false;
        }
        let g = &self.grid;
        let row = g.row_of(z.y);
        let col0 = g.col_of(z.x);
        let mut inside = false;
        for col in col0..g.cols {
            let (cx0, cx1) = g.col_range(col);
            for &e in g.cell(col, row) {
                let (a, b) = self.edge(e as usize);
                if point_segment_distance(z, a, b) == 0.0 {
                    return false;
                }
                if (a.y > z.y) != (b.y > z.y) {
                    let x = a.x + (z.y - a.y) / (b.y - a.y) * (b.x - a.x);
                    let in_cell = x >= cx0 && (x < cx1 || col + 1 == g.cols);
                    if x > z.x && in_cell {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }

    pub fn dist_to_boundary(&self, z: PlanePoint) -> f64 {
        let g = &self.grid;
        let mut best = f64::INFINITY;
        let cz = (g.col_of(z.x) as i64, g.row_of(z.y) as i64);
        let step = g.cell_w.min(g.cell_h);
        let outside = self.bbox.dist_to_point(z);
        let max_ring = g.cols.max(g.rows) as i64 + 1;
        for k in 0..=max_ring {
            // cells at Chebyshev distance k from the clamped home cell
            let ring_gap = outside + (k - 1).max(0) as f64 * step;
            if ring_gap > best {
                break;
            }
            for dc in -k..=k {
                for dr in -k..=k {
                    if dc.abs() != k && dr.abs() != k {
                        continue;
                    }
                    let (c, r) = (cz.0 + dc, cz.1 + dr);
                    if c < 0 || r < 0 || c >= g.cols as i64 || r >= g.rows as i64 {
                        continue;
                    }
                    for &e in g.cell(c as usize, r as usize) {
                        let (a, b) = self.edge(e as usize);
                        best = best.min(point_segment_distance(z, a, b));
                    }
                }
            }
        }
        best
    }

    /// Indices of edges whose bounding boxes meet `rect`.
    pub fn edges_near(&self, rect: &Rect) -> Vec<usize> {
        if !self.bbox.intersects(rect) {
            return Vec::new();
        }
        let g = &self.grid;
        let (c0, c1) = (g.col_of(rect.x0), g.col_of(rect.x1));
        let (r0, r1) = (g.row_of(rect.y0), g.row_of(rect.y1));
        let mut out: Vec<usize> = Vec::new();
        for c in c0..=c1 {
            for r in r0..=r1 {
                out.extend(g.cell(c, r).iter().map(|&e| e as usize));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Arclength position of vertex `i`.
    pub fn vertex_param(&self, i: usize) -> f64 {
        self.cumulative[i]
    }

    pub fn point_at(&self, s: f64) -> PlanePoint {
        let total = self.perimeter();
        let s = s.rem_euclid(total);
        let i = self.edge_at(s);
        let (a, b) = self.edge(i);
        let len = self.cumulative[i + 1] - self.cumulative[i];
        a.lerp(b, (s - self.cumulative[i]) / len)
    }

    fn edge_at(&self, s: f64) -> usize {
        let n = self.vertices.len();
        match self.cumulative[..n].binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// Normal angles at the two ends of edge `i`; prescribed vertex normals
    /// win over the edge normal.
    fn edge_normal_angles(&self, i: usize) -> (f64, f64) {
        let n = self.vertices.len();
        let (a, b) = self.edge(i);
        let d = b - a;
        let edge_angle = (-d.x).atan2(d.y);
        let t0 = self.normals[i].map_or(edge_angle, |u| u.angle());
        let t1 = self.normals[(i + 1) % n].map_or(edge_angle, |u| u.angle());
        // take the short way round, anchored at the edge normal
        let t0 = edge_angle + wrap_angle(t0 - edge_angle);
        let t1 = edge_angle + wrap_angle(t1 - edge_angle);
        (t0, t1)
    }

    fn closed_pieces(&self, s0: f64, s1: f64, with_normals: bool) -> Vec<NormalPiece> {
        let total = self.perimeter();
        let mut out = Vec::new();
        let span = (s1 - s0).min(total);
        if span <= 0.0 {
            return out;
        }
        let mut s = s0.rem_euclid(total);
        let mut remaining = span;
        let mut global = s0;
        let mut i = self.edge_at(s);
        while remaining > 1e-15 * total {
            let e_start = self.cumulative[i];
            let e_end = self.cumulative[i + 1];
            let len = e_end - e_start;
            let take = (e_end - s).min(remaining);
            let (a, b) = self.edge(i);
            let t0 = (s - e_start) / len;
            let t1 = (s + take - e_start) / len;
            let (th0, th1) = if with_normals {
                let (u0, u1) = self.edge_normal_angles(i);
                (u0 + (u1 - u0) * t0, u0 + (u1 - u0) * t1)
            } else {
                (0.0, 0.0)
            };
            if take > 0.0 {
                out.push(NormalPiece {
                    piece: Piece::Segment {
                        a: a.lerp(b, t0),
                        b: a.lerp(b, t1),
                    },
                    s0: global,
                    s1: global + take,
                    theta0: th0,
                    theta1: th1,
                });
            }
            remaining -= take;
            global += take;
            i = (i + 1) % self.vertices.len();
            s = self.cumulative[i];
        }
        out
    }
}

fn segments_intersect(a: PlanePoint, b: PlanePoint, c: PlanePoint, d: PlanePoint) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    let on = |p: PlanePoint, q: PlanePoint, r: PlanePoint, o: f64| {
        o == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

/// Uniform bucket grid over a polygon's bounding box.
#[derive(Clone, Debug)]
struct SegmentGrid {
    origin: PlanePoint,
    cell_w: f64,
    cell_h: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
}

impl SegmentGrid {
    fn build(vertices: &[PlanePoint], bbox: Rect) -> Self {
        let n = vertices.len();
        let side = ((n as f64).sqrt() * 1.5).ceil().clamp(2.0, 256.0) as usize;
        let w = bbox.width().max(1e-12);
        let h = bbox.height().max(1e-12);
        let mut g = Self {
            origin: PlanePoint::new(bbox.x0, bbox.y0),
            cell_w: w / side as f64,
            cell_h: h / side as f64,
            cols: side,
            rows: side,
            buckets: vec![Vec::new(); side * side],
        };
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let (c0, c1) = (g.col_of(a.x.min(b.x)), g.col_of(a.x.max(b.x)));
            let (r0, r1) = (g.row_of(a.y.min(b.y)), g.row_of(a.y.max(b.y)));
            for c in c0..=c1 {
                for r in r0..=r1 {
                    let cell = Rect::new(
                        g.origin.x + c as f64 * g.cell_w,
                        g.origin.y + r as f64 * g.cell_h,
                        g.origin.x + (c + 1) as f64 * g.cell_w,
                        g.origin.y + (r + 1) as f64 * g.cell_h,
                    );
                    let grown = Rect::new(
                        cell.x0 - 1e-9 * g.cell_w,
                        cell.y0 - 1e-9 * g.cell_h,
                        cell.x1 + 1e-9 * g.cell_w,
                        cell.y1 + 1e-9 * g.cell_h,
                    );
                    if super::piece::clip_segment(a, b, &grown).is_some() {
                        g.buckets[r * side + c].push(i as u32);
                    }
                }
            }
        }
        g
    }

    fn col_of(&self, x: f64) -> usize {
        let c = ((x - self.origin.x) / self.cell_w).floor();
        c.clamp(0.0, (self.cols - 1) as f64) as usize
    }

    fn row_of(&self, y: f64) -> usize {
        let r = ((y - self.origin.y) / self.cell_h).floor();
        r.clamp(0.0, (self.rows - 1) as f64) as usize
    }

    fn col_range(&self, c: usize) -> (f64, f64) {
        let x0 = self.origin.x + c as f64 * self.cell_w;
        (x0, x0 + self.cell_w)
    }

    fn cell(&self, c: usize, r: usize) -> &[u32] {
        &self.buckets[r * self.cols + c]
    }
}

/// A boundary piece together with its arclength range and the normal angle
/// at both ends (linear in arclength in between).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalPiece {
    pub piece: Piece,
    pub s0: f64,
    pub s1: f64,
    pub theta0: f64,
    pub theta1: f64,
}

impl NormalPiece {
    pub fn length(&self) -> f64 {
        self.s1 - self.s0
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        self.theta0 + (self.theta1 - self.theta0) * t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Disk(DiskDomain),
    HalfPlane(HalfPlaneDomain),
    Graph(LipschitzGraphDomain),
    Polygon(PolygonDomain),
}

impl Domain {
    pub fn kind(&self) -> &'static str {
        match self {
            Domain::Disk(_) => "disk",
            Domain::HalfPlane(_) => "halfplane",
            Domain::Graph(_) => "graph",
            Domain::Polygon(_) => "polygon",
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Domain::Disk(_) | Domain::Polygon(_))
    }

    pub fn contains(&self, z: PlanePoint) -> bool {
        match self {
            Domain::Disk(d) => z.dist(d.center) < d.radius,
            Domain::HalfPlane(h) => (z - h.anchor).dot(h.inward_normal.as_point()) > 0.0,
            Domain::Graph(g) => z.y > g.value(z.x),
            Domain::Polygon(p) => p.contains(z),
        }
    }

    pub fn dist_to_boundary(&self, z: PlanePoint) -> f64 {
        match self {
            Domain::Disk(d) => (z.dist(d.center) - d.radius).abs(),
            Domain::HalfPlane(h) => (z - h.anchor).dot(h.inward_normal.as_point()).abs(),
            Domain::Graph(g) => {
                let v = (z.y - g.value(z.x)).abs();
                if v == 0.0 {
                    return 0.0;
                }
                g.pieces_between(z.x - v, z.x + v)
                    .iter()
                    .map(|p| p.dist_to_point(z))
                    .fold(v, f64::min)
            }
            Domain::Polygon(p) => p.dist_to_boundary(z),
        }
    }

    /// Bounding box of the domain, if bounded.
    pub fn bbox(&self) -> Option<Rect> {
        match self {
            Domain::Disk(d) => Some(Rect::square(d.center, d.radius)),
            Domain::Polygon(p) => Some(p.bbox()),
            _ => None,
        }
    }

    /// Total boundary length for closed boundaries.
    pub fn boundary_length(&self) -> Option<f64> {
        match self {
            Domain::Disk(d) => Some(TAU * d.radius),
            Domain::Polygon(p) => Some(p.perimeter()),
            _ => None,
        }
    }

    /// Boundary point at parameter `s` (arclength for closed curves, `x`
    /// for graphs, signed length along the line for half-planes).
    pub fn boundary_point(&self, s: f64) -> PlanePoint {
        match self {
            Domain::Disk(d) => {
                let (sn, cs) = (s / d.radius).sin_cos();
                d.center + PlanePoint::new(cs, sn) * d.radius
            }
            Domain::HalfPlane(h) => h.anchor + h.direction() * s,
            Domain::Graph(g) => PlanePoint::new(s, g.value(s)),
            Domain::Polygon(p) => p.point_at(s),
        }
    }

    /// Inverse of `boundary_point` for a boundary point nearest to `z`
    /// (approximate for polygons and graphs: the nearest edge's projection).
    pub fn nearest_param(&self, z: PlanePoint) -> f64 {
        match self {
            Domain::Disk(d) => {
                let v = z - d.center;
                v.y.atan2(v.x).rem_euclid(TAU) * d.radius
            }
            Domain::HalfPlane(h) => (z - h.anchor).dot(h.direction()),
            Domain::Graph(_) => z.x,
            Domain::Polygon(p) => {
                let mut best = (f64::INFINITY, 0.0);
                let r = p.dist_to_boundary(z);
                let probe = Rect::square(z, r * (1.0 + 1e-9) + 1e-12);
                for e in p.edges_near(&probe) {
                    let (a, b) = p.edge(e);
                    let d = b - a;
                    let t = ((z - a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
                    let dist = z.dist(a + d * t);
                    if dist < best.0 {
                        let s = p.vertex_param(e) + t * d.norm();
                        best = (dist, s);
                    }
                }
                best.1
            }
        }
    }

    /// Boundary pieces between two parameters (see `boundary_point`),
    /// oriented with the domain on the left, with normal angles attached.
    pub fn normal_pieces_between(&self, s0: f64, s1: f64) -> Vec<NormalPiece> {
        match self {
            Domain::Disk(d) => {
                let span = (s1 - s0).min(TAU * d.radius);
                if span <= 0.0 {
                    return Vec::new();
                }
                let start = s0 / d.radius;
                vec![NormalPiece {
                    piece: Piece::Arc {
                        center: d.center,
                        radius: d.radius,
                        start,
                        sweep: span / d.radius,
                    },
                    s0,
                    s1: s0 + span,
                    theta0: start,
                    theta1: start + span / d.radius,
                }]
            }
            Domain::HalfPlane(h) => {
                if s1 <= s0 {
                    return Vec::new();
                }
                let theta = (-h.inward_normal.n2).atan2(-h.inward_normal.n1);
                vec![NormalPiece {
                    piece: Piece::Segment {
                        a: self.boundary_point(s0),
                        b: self.boundary_point(s1),
                    },
                    s0,
                    s1,
                    theta0: theta,
                    theta1: theta,
                }]
            }
            Domain::Graph(g) => g.normal_pieces_between(s0, s1),
            Domain::Polygon(p) => p.closed_pieces(s0, s1, true),
        }
    }

    pub fn pieces_between(&self, s0: f64, s1: f64) -> Vec<Piece> {
        match self {
            Domain::Graph(g) => g.pieces_between(s0, s1),
            Domain::Polygon(p) => p
                .closed_pieces(s0, s1, false)
                .into_iter()
                .map(|n| n.piece)
                .collect(),
            _ => self
                .normal_pieces_between(s0, s1)
                .into_iter()
                .map(|n| n.piece)
                .collect(),
        }
    }

    /// Whole boundary pieces (one period for closed curves; the graph
    /// restricted to `[-w, w]`; the line restricted to `[-w, w]`).
    pub fn normal_pieces(&self, w: f64) -> Vec<NormalPiece> {
        match self.boundary_length() {
            Some(len) => self.normal_pieces_between(0.0, len),
            None => self.normal_pieces_between(-w, w),
        }
    }

    /// Boundary parts lying in the closed rectangle, domain on the left.
    pub fn boundary_in_rect(&self, rect: &Rect) -> Vec<Piece> {
        match self {
            Domain::Disk(d) => {
                if rect.dist_to_point(d.center) > d.radius {
                    return Vec::new();
                }
                let far = rect
                    .corners()
                    .iter()
                    .map(|c| c.dist(d.center))
                    .fold(0.0, f64::max);
                if far < d.radius {
                    return Vec::new();
                }
                // start on the far side so a single visit is not split
                let away = d.center - rect.center();
                let start = if away.norm() > 0.0 { away.y.atan2(away.x) } else { 0.0 };
                Piece::Arc {
                    center: d.center,
                    radius: d.radius,
                    start,
                    sweep: TAU,
                }
                .clip_to_rect(rect)
            }
            Domain::HalfPlane(h) => {
                match clip_line(h.anchor, h.direction(), f64::NEG_INFINITY, f64::INFINITY, rect) {
                    Some((t0, t1)) if t1 > t0 => vec![Piece::Segment {
                        a: self.boundary_point(t0),
                        b: self.boundary_point(t1),
                    }],
                    _ => Vec::new(),
                }
            }
            Domain::Graph(g) => g
                .rect_candidates(rect)
                .iter()
                .flat_map(|p| p.clip_to_rect(rect))
                .filter(|p| p.length() > 0.0)
                .collect(),
            Domain::Polygon(p) => p
                .edges_near(rect)
                .into_iter()
                .filter_map(|e| {
                    let (a, b) = p.edge(e);
                    super::piece::clip_segment(a, b, rect).and_then(|(t0, t1)| {
                        (t1 > t0).then(|| Piece::Segment {
                            a: a.lerp(b, t0),
                            b: a.lerp(b, t1),
                        })
                    })
                })
                .collect(),
        }
    }

    /// True when the closed rectangle meets the boundary.
    pub fn boundary_meets_rect(&self, rect: &Rect) -> bool {
        match self {
            Domain::Disk(d) => {
                rect.dist_to_point(d.center) <= d.radius
                    && rect
                        .corners()
                        .iter()
                        .any(|c| c.dist(d.center) >= d.radius)
            }
            Domain::HalfPlane(h) => {
                let n = h.inward_normal.as_point();
                let vals: Vec<f64> = rect.corners().iter().map(|c| (*c - h.anchor).dot(n)).collect();
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            }
            Domain::Graph(g) => g
                .rect_candidates(rect)
                .iter()
                .any(|p| p.intersects_rect(rect)),
            Domain::Polygon(p) => p.edges_near(rect).into_iter().any(|e| {
                let (a, b) = p.edge(e);
                super::piece::clip_segment(a, b, rect).is_some()
            }),
        }
    }

    /// True when the closed rectangle lies inside the (open) domain.
    pub fn contains_rect(&self, rect: &Rect) -> bool {
        !self.boundary_meets_rect(rect) && self.contains(rect.center())
    }

    /// Image under the rigid motion `z -> e^{i angle} z + shift`.
    /// Graph domains are not closed under rotation, so only a pure
    /// translation by `(0, 0)` is accepted for them.
    pub fn rigid_motion(&self, angle: f64, shift: PlanePoint) -> Option<Domain> {
        let mv = |p: PlanePoint| p.rotate_about(PlanePoint::ORIGIN, angle) + shift;
        let rot = |u: UnitNormal| UnitNormal::from_angle(u.angle() + angle);
        Some(match self {
            Domain::Disk(d) => Domain::Disk(DiskDomain {
                center: mv(d.center),
                radius: d.radius,
            }),
            Domain::HalfPlane(h) => Domain::HalfPlane(HalfPlaneDomain {
                anchor: mv(h.anchor),
                inward_normal: rot(h.inward_normal),
            }),
            Domain::Polygon(p) => Domain::Polygon(
                PolygonDomain::with_normals(
                    p.vertices.iter().map(|&v| mv(v)).collect(),
                    p.normals.iter().map(|n| n.map(rot)).collect(),
                )
                .ok()?,
            ),
            Domain::Graph(_) => {
                if angle == 0.0 && shift == PlanePoint::ORIGIN {
                    self.clone()
                } else {
                    return None;
                }
            }
        })
    }

    /// Graph-normal convention: vertical component negative. For closed
    /// boundaries this is the outward normal at parameter `s`.
    pub fn normal_at(&self, s: f64) -> UnitNormal {
        match self {
            Domain::Graph(g) => g.normal(s),
            _ => {
                let eps = self.boundary_length().map_or(1e-9, |l| l * 1e-12);
                let pieces = self.normal_pieces_between(s, s + eps);
                UnitNormal::from_angle(pieces[0].theta0)
            }
        }
    }
}
