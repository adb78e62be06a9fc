use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::DecompositionError;
use crate::geometry::{Domain, PlanePoint, Rect};

/// `[k1 2^-j, (k1+1) 2^-j) x [k2 2^-j, (k2+1) 2^-j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicSquare {
    pub gen: i32,
    pub k1: i64,
    pub k2: i64,
}

impl DyadicSquare {
    pub fn new(gen: i32, k1: i64, k2: i64) -> Self {
        Self { gen, k1, k2 }
    }

    /// The square of generation `gen` containing `p`.
    pub fn containing(gen: i32, p: PlanePoint) -> Self {
        let s = side_of(gen);
        Self::new(gen, (p.x / s).floor() as i64, (p.y / s).floor() as i64)
    }

    pub fn side(&self) -> f64 {
        side_of(self.gen)
    }

    pub fn rect(&self) -> Rect {
        let s = self.side();
        Rect::new(
            self.k1 as f64 * s,
            self.k2 as f64 * s,
            (self.k1 + 1) as f64 * s,
            (self.k2 + 1) as f64 * s,
        )
    }

    pub fn center(&self) -> PlanePoint {
        let s = self.side();
        PlanePoint::new((self.k1 as f64 + 0.5) * s, (self.k2 as f64 + 0.5) * s)
    }

    /// Concentric closed square of side `a * side()`.
    pub fn dilate(&self, a: f64) -> Rect {
        Rect::square(self.center(), 0.5 * a * self.side())
    }

    pub fn parent(&self) -> DyadicSquare {
        DyadicSquare::new(self.gen - 1, self.k1.div_euclid(2), self.k2.div_euclid(2))
    }

    pub fn children(&self) -> [DyadicSquare; 4] {
        let (g, a, b) = (self.gen + 1, 2 * self.k1, 2 * self.k2);
        [
            DyadicSquare::new(g, a, b),
            DyadicSquare::new(g, a + 1, b),
            DyadicSquare::new(g, a, b + 1),
            DyadicSquare::new(g, a + 1, b + 1),
        ]
    }

    pub fn contains_square(&self, o: &DyadicSquare) -> bool {
        if o.gen < self.gen {
            return false;
        }
        let shift = (o.gen - self.gen) as u32;
        o.k1 >> shift == self.k1 && o.k2 >> shift == self.k2
    }
}

pub fn side_of(gen: i32) -> f64 {
    2f64.powi(-gen)
}

/// Dilation factor used by the acceptance test `kappa Q ⊂ Ω`.
pub const CONTAINMENT_DILATION: f64 = 15.0;

/// Whitney squares of a domain, built top-down from a dyadic root grid.
#[derive(Clone, Debug)]
pub struct WhitneyDecomposition {
    pub squares: Vec<DyadicSquare>,
    /// Finest-generation squares meeting Ω that were not accepted.
    pub collar: Vec<DyadicSquare>,
    /// Root region the construction tiles; for unbounded domains this is
    /// the clipping window.
    pub window: Rect,
    pub j_max: i32,
    pub kappa: f64,
    /// Smallest `rho` with `rho Q ∩ Ω^c ≠ ∅` for every square.
    pub rho: f64,
    /// Largest neighbour count.
    pub d0: usize,
    neighbors: Vec<Vec<u32>>,
    index: HashMap<DyadicSquare, u32>,
}

/// Power of two at least `4 L` (and clear of the graph), centred at the
/// origin.
pub fn default_window(domain: &Domain) -> Rect {
    let need = match domain {
        Domain::Graph(g) => (4.0 * g.support_radius()).max(4.0 * (1.0 + g.max_abs())),
        Domain::HalfPlane(h) => 4.0 + 4.0 * h.anchor.x.abs().max(h.anchor.y.abs()),
        _ => {
            let b = domain.bbox().expect("bounded");
            b.x0.abs().max(b.x1.abs()).max(b.y0.abs()).max(b.y1.abs())
        }
    };
    let w = 2f64.powi(need.log2().ceil() as i32);
    Rect::new(-w, -w, w, w)
}

pub fn whitney_decompose(domain: &Domain, j_max: i32) -> Result<WhitneyDecomposition, DecompositionError> {
    let window = if domain.is_bounded() {
        domain.bbox().expect("bounded")
    } else {
        default_window(domain)
    };
    whitney_decompose_in(domain, j_max, window)
}

/// Decomposition restricted to the dyadic root squares meeting `window`.
pub fn whitney_decompose_in(
    domain: &Domain,
    j_max: i32,
    window: Rect,
) -> Result<WhitneyDecomposition, DecompositionError> {
    let extent = window.width().max(window.height());
    let root_gen = if domain.is_bounded() {
        -(extent.log2().ceil() as i32)
    } else {
        // four root squares per axis
        -(extent.log2().round() as i32) + 2
    };
    let j_max = j_max.max(root_gen);
    let s = side_of(root_gen);
    let k1_lo = (window.x0 / s).floor() as i64;
    let k2_lo = (window.y0 / s).floor() as i64;
    let mut k1_hi = (window.x1 / s).ceil() as i64;
    let mut k2_hi = (window.y1 / s).ceil() as i64;
    if domain.is_bounded() {
        k1_hi = k1_hi.max(k1_lo + 1);
        k2_hi = k2_hi.max(k2_lo + 1);
    }

    let mut squares = Vec::new();
    let mut collar = Vec::new();
    let mut frontier: Vec<DyadicSquare> = Vec::new();
    for k2 in k2_lo..k2_hi {
        for k1 in k1_lo..k1_hi {
            frontier.push(DyadicSquare::new(root_gen, k1, k2));
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for q in frontier {
            if domain.contains_rect(&q.dilate(CONTAINMENT_DILATION)) {
                squares.push(q);
                continue;
            }
            let r = q.rect();
            if !domain.boundary_meets_rect(&r) && !domain.contains(q.center()) {
                continue;
            }
            if q.gen >= j_max {
                collar.push(q);
            } else {
                next.extend(q.children());
            }
        }
        frontier = next;
    }
    if squares.is_empty() {
        return Err(DecompositionError::EmptyDomain { j_max });
    }

    let rho = squares
        .iter()
        .map(|q| escape_dilation(domain, q))
        .fold(0.0, f64::max);
    let neighbors = neighbor_lists(&squares);
    let d0 = neighbors.iter().map(Vec::len).max().unwrap_or(0);
    let index = squares
        .iter()
        .enumerate()
        .map(|(i, q)| (*q, i as u32))
        .collect();
    Ok(WhitneyDecomposition {
        squares,
        collar,
        window,
        j_max,
        kappa: CONTAINMENT_DILATION,
        rho,
        d0,
        neighbors,
        index,
    })
}

/// Smallest `rho` (to 1e-6 relative) with `rho Q` meeting the complement.
pub fn escape_dilation(domain: &Domain, q: &DyadicSquare) -> f64 {
    let meets = |a: f64| {
        let r = q.dilate(a);
        domain.boundary_meets_rect(&r) || !domain.contains(q.center())
    };
    let mut lo = 0.0;
    let mut hi = 2.0 * CONTAINMENT_DILATION + 2.0;
    while !meets(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return f64::INFINITY;
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if meets(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// For each square, the other squares `Q'` with `5Q ∩ 5Q' ≠ ∅`.
fn neighbor_lists(squares: &[DyadicSquare]) -> Vec<Vec<u32>> {
    let rects: Vec<Rect> = squares.iter().map(|q| q.dilate(5.0)).collect();
    let mut order: Vec<u32> = (0..squares.len() as u32).collect();
    order.sort_by(|&a, &b| rects[a as usize].x0.total_cmp(&rects[b as usize].x0));
    let mut out = vec![Vec::new(); squares.len()];
    for (pos, &i) in order.iter().enumerate() {
        let ri = rects[i as usize];
        for &j in &order[pos + 1..] {
            let rj = rects[j as usize];
            if rj.x0 > ri.x1 {
                break;
            }
            if ri.intersects(&rj) {
                out[i as usize].push(j);
                out[j as usize].push(i);
            }
        }
    }
    for l in &mut out {
        l.sort_unstable();
    }
    out
}

impl WhitneyDecomposition {
    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors[i].iter().map(|&j| j as usize)
    }

    pub fn find(&self, q: &DyadicSquare) -> Option<usize> {
        self.index.get(q).map(|&i| i as usize)
    }

    pub fn covered_area(&self) -> f64 {
        self.squares.iter().map(|q| q.side() * q.side()).sum()
    }

    pub fn collar_area(&self) -> f64 {
        self.collar.iter().map(|q| q.side() * q.side()).sum()
    }

    pub fn generation_range(&self) -> (i32, i32) {
        let lo = self.squares.iter().map(|q| q.gen).min().unwrap_or(0);
        let hi = self.squares.iter().map(|q| q.gen).max().unwrap_or(0);
        (lo, hi)
    }

    /// Checks the three Whitney properties on every square and returns a
    /// description of each violation.
    pub fn check(&self, domain: &Domain) -> Vec<String> {
        let mut bad = Vec::new();
        for (i, q) in self.squares.iter().enumerate() {
            if !domain.contains_rect(&q.dilate(5.0)) {
                bad.push(format!("{q:?}: 5Q not inside the domain"));
            }
            let r = q.dilate(self.rho * (1.0 + 1e-9));
            if !domain.boundary_meets_rect(&r) {
                bad.push(format!("{q:?}: rho Q does not reach the complement"));
            }
            for j in self.neighbors(i) {
                let o = &self.squares[j];
                if (o.gen - q.gen).abs() > 1 {
                    bad.push(format!("{q:?} and {o:?}: neighbours differ by more than 2x"));
                }
            }
            if self.neighbors[i].len() > self.d0 {
                bad.push(format!("{q:?}: more than D0 neighbours"));
            }
        }
        // disjointness: dyadic squares overlap only when nested
        let mut sorted = self.squares.clone();
        sorted.sort();
        let set: std::collections::HashSet<DyadicSquare> = sorted.iter().copied().collect();
        let coarsest = sorted.iter().map(|s| s.gen).min().unwrap_or(0);
        for q in &sorted {
            let mut p = *q;
            while p.gen > coarsest {
                p = p.parent();
                if set.contains(&p) {
                    bad.push(format!("{q:?} nested in {p:?}"));
                }
            }
        }
        bad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DiskDomain, LipschitzGraphDomain, PolygonDomain};

    fn unit_square() -> Domain {
        Domain::Polygon(
            PolygonDomain::new(vec![
                PlanePoint::new(0.0, 0.0),
                PlanePoint::new(1.0, 0.0),
                PlanePoint::new(1.0, 1.0),
                PlanePoint::new(0.0, 1.0),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn dyadic_square_geometry() {
        let q = DyadicSquare::new(1, 1, -1);
        assert_eq!(q.rect(), Rect::new(0.5, -0.5, 1.0, 0.0));
        assert_eq!(q.parent(), DyadicSquare::new(0, 0, -1));
        assert!(q.parent().contains_square(&q));
        for c in q.children() {
            assert_eq!(c.parent(), q);
        }
        assert_eq!(DyadicSquare::containing(2, PlanePoint::new(0.3, -0.1)), DyadicSquare::new(2, 1, -1));
    }

    #[test]
    fn unit_square_invariants() {
        let d = unit_square();
        let w = whitney_decompose(&d, 8).unwrap();
        assert!(w.check(&d).is_empty(), "{:?}", &w.check(&d)[..3.min(w.check(&d).len())]);
        assert!(w.rho > 20.0 && w.rho <= 2.0 * (CONTAINMENT_DILATION + 1.0));
        for q in &w.squares {
            assert!(d.contains_rect(&q.dilate(5.0)));
            assert!(d.boundary_meets_rect(&q.dilate(w.rho * 1.000001)));
        }
    }

    #[test]
    fn coarse_run_is_a_prefix() {
        let d = unit_square();
        let a = whitney_decompose(&d, 5).unwrap();
        let b = whitney_decompose(&d, 8).unwrap();
        let fine: std::collections::HashSet<_> = b.squares.iter().copied().collect();
        for q in &a.squares {
            assert!(fine.contains(q));
        }
        let coarse_in_b = b.squares.iter().filter(|q| q.gen <= 5).count();
        assert_eq!(coarse_in_b, a.squares.len());
    }

    #[test]
    fn graph_window_is_recorded() {
        let d = Domain::Graph(LipschitzGraphDomain::flat(1.0));
        let w = whitney_decompose(&d, 5).unwrap();
        assert_eq!(w.window, Rect::new(-4.0, -4.0, 4.0, 4.0));
        assert!(w.check(&d).is_empty());
        assert!(w.squares.iter().all(|q| q.rect().y0 >= 0.0));
    }

    #[test]
    fn tiny_disk_is_empty_at_coarse_resolution() {
        let d = Domain::Disk(DiskDomain::new(PlanePoint::ORIGIN, 1e-3).unwrap());
        assert!(matches!(
            whitney_decompose(&d, 3),
            Err(DecompositionError::EmptyDomain { .. })
        ));
    }
}
