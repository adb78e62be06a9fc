use serde::{Deserialize, Serialize};

use super::whitney::default_window;
use crate::geometry::{Domain, Piece};

/// A dyadic boundary arc: the parameter interval `[start, end)` of the
/// boundary parameterization (arclength for closed curves, `x` for graphs).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub gen: i32,
    pub index: i64,
    pub start: f64,
    pub end: f64,
}

impl BoundaryArc {
    /// Parameter length, the `ℓ(P)` of the hierarchy.
    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn midpoint_param(&self) -> f64 {
        0.5 * (self.start + self.end)
    }

    /// Parameter window of the concentric arc with three times the length.
    pub fn triple(&self) -> (f64, f64) {
        let l = self.length();
        (self.start - l, self.end + l)
    }

    pub fn key(&self) -> (i32, i64) {
        (self.gen, self.index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArcLayout {
    /// Closed curve of length `total` split into `m0 2^j` equal arcs.
    Closed { total: f64, m0: u64 },
    /// Open boundary (graph or line) over the parameter window `[lo, hi)`,
    /// split into `[k 2^-j, (k+1) 2^-j)`.
    Open { lo: f64, hi: f64 },
}

/// Nested partitions of the boundary for generations `j_min..=j_max`.
#[derive(Clone, Debug)]
pub struct ArcHierarchy {
    pub layout: ArcLayout,
    pub j_min: i32,
    pub j_max: i32,
    levels: Vec<Vec<BoundaryArc>>,
}

pub fn dyadic_arcs(domain: &Domain, j_min: i32, j_max: i32) -> ArcHierarchy {
    let layout = match domain.boundary_length() {
        Some(total) => ArcLayout::Closed {
            total,
            m0: total.ceil().max(1.0) as u64,
        },
        None => {
            let w = default_window(domain);
            ArcLayout::Open { lo: w.x0, hi: w.x1 }
        }
    };
    ArcHierarchy::new(layout, j_min, j_max)
}

impl ArcHierarchy {
    pub fn new(layout: ArcLayout, j_min: i32, j_max: i32) -> Self {
        // a closed curve has no arcs coarser than generation 0
        let j_min = match layout {
            ArcLayout::Closed { .. } => j_min.max(0),
            ArcLayout::Open { .. } => j_min,
        };
        let j_max = j_max.max(j_min);
        let levels = (j_min..=j_max)
            .map(|j| {
                let (k0, k1) = index_range(&layout, j);
                (k0..k1).map(|k| arc_of(&layout, j, k)).collect()
            })
            .collect();
        Self {
            layout,
            j_min,
            j_max,
            levels,
        }
    }

    pub fn generation(&self, j: i32) -> &[BoundaryArc] {
        &self.levels[(j - self.j_min) as usize]
    }

    pub fn generations(&self) -> impl Iterator<Item = (i32, &[BoundaryArc])> {
        (self.j_min..=self.j_max).map(move |j| (j, self.generation(j)))
    }

    pub fn all(&self) -> impl Iterator<Item = &BoundaryArc> {
        self.levels.iter().flatten()
    }

    /// Nominal arc length at generation `j`.
    pub fn length_at(&self, j: i32) -> f64 {
        match self.layout {
            ArcLayout::Closed { total, m0 } => total / (m0 as f64 * 2f64.powi(j)),
            ArcLayout::Open { .. } => 2f64.powi(-j),
        }
    }

    /// Generation in range whose arc length is closest (in ratio) to `len`.
    pub fn nearest_generation(&self, len: f64) -> i32 {
        (self.j_min..=self.j_max)
            .min_by(|&a, &b| {
                let da = (self.length_at(a) / len).ln().abs();
                let db = (self.length_at(b) / len).ln().abs();
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .expect("non-empty range")
    }

    /// Arc with the given generation and index (indices wrap on closed
    /// curves).
    pub fn arc(&self, j: i32, k: i64) -> BoundaryArc {
        arc_of(&self.layout, j, k)
    }

    /// Index of the generation-`j` arc containing parameter `s`.
    pub fn index_at(&self, j: i32, s: f64) -> i64 {
        match self.layout {
            ArcLayout::Closed { total, .. } => {
                let l = self.length_at(j);
                let n = (total / l).round() as i64;
                ((s.rem_euclid(total) / l).floor() as i64).min(n - 1)
            }
            ArcLayout::Open { .. } => (s * 2f64.powi(j)).floor() as i64,
        }
    }

    pub fn parent(&self, a: &BoundaryArc) -> Option<BoundaryArc> {
        (a.gen > self.j_min).then(|| self.arc(a.gen - 1, a.index.div_euclid(2)))
    }

    pub fn children(&self, a: &BoundaryArc) -> Option<[BoundaryArc; 2]> {
        (a.gen < self.j_max).then(|| {
            [
                self.arc(a.gen + 1, 2 * a.index),
                self.arc(a.gen + 1, 2 * a.index + 1),
            ]
        })
    }

    pub fn contains(&self, outer: &BoundaryArc, inner: &BoundaryArc) -> bool {
        inner.gen >= outer.gen && inner.index >> (inner.gen - outer.gen) as u32 == outer.index
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.layout, ArcLayout::Closed { .. })
    }
}

fn index_range(layout: &ArcLayout, j: i32) -> (i64, i64) {
    match *layout {
        ArcLayout::Closed { m0, .. } => (0, (m0 as i64) << j),
        ArcLayout::Open { lo, hi } => {
            let scale = 2f64.powi(j);
            ((lo * scale).floor() as i64, (hi * scale).ceil() as i64)
        }
    }
}

fn arc_of(layout: &ArcLayout, j: i32, k: i64) -> BoundaryArc {
    match *layout {
        ArcLayout::Closed { total, m0 } => {
            let n = (m0 as i64) << j;
            let kk = k.rem_euclid(n);
            let l = total / n as f64;
            BoundaryArc {
                gen: j,
                index: kk,
                start: kk as f64 * l,
                end: if kk + 1 == n { total } else { (kk + 1) as f64 * l },
            }
        }
        ArcLayout::Open { .. } => {
            let l = 2f64.powi(-j);
            BoundaryArc {
                gen: j,
                index: k,
                start: k as f64 * l,
                end: (k + 1) as f64 * l,
            }
        }
    }
}

/// The boundary points of an arc, as oriented pieces.
pub fn arc_pieces(domain: &Domain, a: &BoundaryArc) -> Vec<Piece> {
    domain.pieces_between(a.start, a.end)
}

/// One-dimensional Hausdorff measure of an arc.
pub fn arc_measure(domain: &Domain, a: &BoundaryArc) -> f64 {
    arc_pieces(domain, a).iter().map(Piece::length).sum()
}
