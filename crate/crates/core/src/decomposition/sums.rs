use serde::{Deserialize, Serialize};

use super::arcs::{ArcHierarchy, ArcLayout, BoundaryArc};
use super::whitney::DyadicSquare;
use super::DecompositionError;
use crate::geometry::{point_segment_distance, Domain, Piece, PlanePoint, Rect};

/// A square or a boundary arc, the two kinds of cell the big distance is
/// defined on.
#[derive(Clone, Debug)]
pub enum Cell {
    Square(DyadicSquare),
    Arc { arc: BoundaryArc, pieces: Vec<Piece> },
}

impl Cell {
    pub fn arc(domain: &Domain, arc: BoundaryArc) -> Self {
        Cell::Arc {
            arc,
            pieces: domain.pieces_between(arc.start, arc.end),
        }
    }

    pub fn size(&self) -> f64 {
        match self {
            Cell::Square(q) => q.side(),
            Cell::Arc { arc, .. } => arc.length(),
        }
    }
}

pub fn cell_distance(a: &Cell, b: &Cell) -> f64 {
    match (a, b) {
        (Cell::Square(p), Cell::Square(q)) => p.rect().dist_to_rect(&q.rect()),
        (Cell::Square(q), Cell::Arc { pieces, .. }) | (Cell::Arc { pieces, .. }, Cell::Square(q)) => {
            pieces_rect_distance(pieces, &q.rect())
        }
        (Cell::Arc { pieces: pa, .. }, Cell::Arc { pieces: pb, .. }) => {
            let mut best = f64::INFINITY;
            for x in pa {
                for y in pb {
                    best = best.min(piece_piece_distance(x, y));
                }
            }
            best
        }
    }
}

/// `ℓ(Q) + ℓ(R) + dist(Q, R)`.
pub fn big_distance(a: &Cell, b: &Cell) -> f64 {
    a.size() + b.size() + cell_distance(a, b)
}

/// Arc pieces are replaced by this many chords when measuring distances.
const ARC_CHORDS: usize = 64;

fn as_segments(p: &Piece) -> Vec<(PlanePoint, PlanePoint)> {
    match p {
        Piece::Segment { a, b } => vec![(*a, *b)],
        Piece::Arc { .. } => (0..ARC_CHORDS)
            .map(|i| {
                (
                    p.point(i as f64 / ARC_CHORDS as f64),
                    p.point((i + 1) as f64 / ARC_CHORDS as f64),
                )
            })
            .collect(),
    }
}

fn segment_segment_distance(a: PlanePoint, b: PlanePoint, c: PlanePoint, d: PlanePoint) -> f64 {
    let cross = |o: PlanePoint, p: PlanePoint, q: PlanePoint| (p - o).cross(q - o);
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0)) && d1 != 0.0 && d3 != 0.0 {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

pub fn piece_piece_distance(x: &Piece, y: &Piece) -> f64 {
    let mut best = f64::INFINITY;
    for (a, b) in as_segments(x) {
        for (c, d) in as_segments(y) {
            best = best.min(segment_segment_distance(a, b, c, d));
        }
    }
    best
}

pub fn pieces_rect_distance(pieces: &[Piece], r: &Rect) -> f64 {
    let mut best = f64::INFINITY;
    for p in pieces {
        if p.intersects_rect(r) {
            return 0.0;
        }
        for (a, b) in as_segments(p) {
            best = best.min(r.dist_to_point(a)).min(r.dist_to_point(b));
            for c in r.corners() {
                best = best.min(point_segment_distance(c, a, b));
            }
        }
    }
    best
}

/// Truncation of the sum over all dyadic arcs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumWindow {
    pub j_lo: i32,
    pub j_hi: i32,
    /// Half-width of the parameter range around `Q` (open boundaries).
    pub param_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometricSum {
    /// Sum over the arcs of the window.
    pub value: f64,
    pub terms: usize,
    /// `(generation, partial sum)`, coarse to fine.
    pub per_generation: Vec<(i32, f64)>,
    /// Estimated contribution of generations finer than `j_hi`.
    pub fine_tail: f64,
    /// Estimated contribution of generations coarser than `j_lo`.
    pub coarse_tail: f64,
    /// Estimated contribution of arcs beyond `param_radius`.
    pub far_tail: f64,
    /// Uncertainty of the three tail estimates together.
    pub tail_err: f64,
    pub window: SumWindow,
}

impl GeometricSum {
    /// Window sum plus the estimated tails.
    pub fn extrapolated(&self) -> f64 {
        self.value + self.fine_tail + self.coarse_tail + self.far_tail
    }
}

/// Tail `Σ_{k≥1} s r^k` of a geometric continuation from the last partial
/// sum `s`, and its spread against the ratio actually measured between the
/// last two partial sums.
fn geometric_tail(s: f64, prev: Option<f64>, r: f64) -> (f64, f64) {
    let tail = s * r / (1.0 - r);
    let err = match prev {
        Some(p) if p > 0.0 && s / p < 1.0 => {
            let m = s / p;
            (s * m / (1.0 - m) - tail).abs()
        }
        // no usable ratio: the estimate is all we have
        _ => tail,
    };
    (tail, err)
}

/// `Σ_R ℓ(R)^{1+η} / D(Q,R)^{1+τ}` over the arcs of the window.
///
/// Fine generations contribute about `2^{-jη}` each and coarse ones
/// `2^{j(τ-η)}`, so the tails are continued geometrically from the edge
/// generations. On open boundaries the arcs beyond the window start between
/// `P` and `P + ℓ(R)` from the midpoint of `Q`; on a flat stretch their sum
/// lies between `2ℓ^η / (τ (P + ℓ(Q)/2 + 2ℓ)^τ)` and `2ℓ^η / (τ (P + ℓ(Q)/2)^τ)`.
pub fn geometric_sum(
    domain: &Domain,
    layout: ArcLayout,
    q: &BoundaryArc,
    eta: f64,
    tau: f64,
    window: SumWindow,
) -> Result<GeometricSum, DecompositionError> {
    if !(eta > 0.0 && eta < tau) {
        return Err(DecompositionError::BadExponents { eta, tau });
    }
    let qc = Cell::arc(domain, *q);
    let lq = q.length();
    let mid = q.midpoint_param();
    let closed = matches!(layout, ArcLayout::Closed { .. });
    let j_lo = if closed { window.j_lo.max(0) } else { window.j_lo };
    let mut value = 0.0;
    let mut terms = 0;
    let mut per_generation = Vec::new();
    for j in j_lo..=window.j_hi {
        let level = ArcHierarchy::new(layout_for(layout, mid, window.param_radius), j, j);
        // per-generation partial sums keep the reduction order fixed
        let mut partial = 0.0;
        for r in level.generation(j) {
            let rc = Cell::arc(domain, *r);
            let d = big_distance(&qc, &rc);
            partial += r.length().powf(1.0 + eta) / d.powf(1.0 + tau);
            terms += 1;
        }
        value += partial;
        per_generation.push((j, partial));
    }
    let n = per_generation.len();
    let last = |k: usize| per_generation.get(n.wrapping_sub(k)).map(|g| g.1);
    let (fine_tail, fine_err) = geometric_tail(last(1).unwrap_or(0.0), last(2), 2f64.powf(-eta));
    let (coarse_tail, coarse_err, far_tail, far_err) = if closed {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let (c, ce) = geometric_tail(
            per_generation[0].1,
            per_generation.get(1).map(|g| g.1),
            2f64.powf(-(tau - eta)),
        );
        let p = window.param_radius;
        let (mut lo, mut hi) = (0.0, 0.0);
        for j in j_lo..=window.j_hi {
            let l = 2f64.powi(-j);
            lo += 2.0 * l.powf(eta) / (tau * (p + 0.5 * lq + 2.0 * l).powf(tau));
            hi += 2.0 * l.powf(eta) / (tau * (p + 0.5 * lq).powf(tau));
        }
        (c, ce, 0.5 * (lo + hi), 0.5 * (hi - lo))
    };
    Ok(GeometricSum {
        value,
        terms,
        per_generation,
        fine_tail,
        coarse_tail,
        far_tail,
        tail_err: fine_err + coarse_err + far_err,
        window: SumWindow { j_lo, ..window },
    })
}

fn layout_for(layout: ArcLayout, mid: f64, radius: f64) -> ArcLayout {
    match layout {
        ArcLayout::Closed { .. } => layout,
        ArcLayout::Open { .. } => ArcLayout::Open {
            lo: mid - radius,
            hi: mid + radius,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn big_distance_examples() {
        let q = Cell::Square(DyadicSquare::new(0, 0, 0));
        let r = Cell::Square(DyadicSquare::new(0, 4, 0));
        assert_eq!(big_distance(&q, &r), 5.0);
        assert_eq!(big_distance(&q, &q), 2.0);
    }

    #[test]
    fn segment_distances() {
        let a = Piece::Segment {
            a: PlanePoint::new(0.0, 0.0),
            b: PlanePoint::new(1.0, 0.0),
        };
        let b = Piece::Segment {
            a: PlanePoint::new(0.5, -1.0),
            b: PlanePoint::new(0.5, 1.0),
        };
        let c = Piece::Segment {
            a: PlanePoint::new(3.0, 4.0),
            b: PlanePoint::new(3.0, 5.0),
        };
        assert_eq!(piece_piece_distance(&a, &b), 0.0);
        assert!((piece_piece_distance(&a, &c) - 20f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bad_exponents() {
        let d = Domain::Graph(crate::geometry::LipschitzGraphDomain::flat(1.0));
        let q = BoundaryArc {
            gen: 0,
            index: 0,
            start: 0.0,
            end: 1.0,
        };
        let w = SumWindow {
            j_lo: -2,
            j_hi: 2,
            param_radius: 8.0,
        };
        let layout = ArcLayout::Open { lo: -4.0, hi: 4.0 };
        assert!(matches!(
            geometric_sum(&d, layout, &q, 0.25, 0.25, w),
            Err(DecompositionError::BadExponents { .. })
        ));
        assert!(geometric_sum(&d, layout, &q, 0.25, 0.75, w).unwrap().value > 0.0);
    }
}
