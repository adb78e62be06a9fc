use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::arcs::{ArcHierarchy, ArcLayout, BoundaryArc};
use super::sums::{cell_distance, Cell};
use super::whitney::{side_of, DyadicSquare, WhitneyDecomposition};
use super::DecompositionError;
use crate::geometry::{Domain, PlanePoint};

/// Boundary arc assigned to a Whitney square: comparable length, meeting
/// `rho Q`, midpoint nearest to the square's centre.
pub fn phi_map(
    domain: &Domain,
    decomp: &WhitneyDecomposition,
    arcs: &ArcHierarchy,
    q: &DyadicSquare,
) -> BoundaryArc {
    let lq = q.side();
    let j = arcs.nearest_generation(lq);
    let lj = arcs.length_at(j);
    let zq = q.center();
    let reach = q.dilate(decomp.rho * (1.0 + 1e-9));
    let s_star = domain.nearest_param(zq);
    let k_star = arcs.index_at(j, s_star);
    let spread = match (domain, arcs.layout) {
        (Domain::Polygon(p), _) => p.chord_arc_constant(),
        (Domain::Graph(g), _) => (1.0 + g.lipschitz_bound().powi(2)).sqrt(),
        _ => 1.0,
    };
    let k_reach = (spread * decomp.rho * lq / lj).ceil() as i64 + 1;
    let candidates: Vec<i64> = match arcs.layout {
        ArcLayout::Closed { .. } => {
            let n = arcs.generation(j).len() as i64;
            if 2 * k_reach + 1 >= n {
                (0..n).collect()
            } else {
                (k_star - k_reach..=k_star + k_reach).collect()
            }
        }
        ArcLayout::Open { .. } => {
            let kx = arcs.index_at(j, zq.x);
            (kx - k_reach..=kx + k_reach).collect()
        }
    };
    let mut best: Option<(f64, f64, BoundaryArc)> = None;
    for k in candidates {
        let a = arcs.arc(j, k);
        let meets = domain
            .pieces_between(a.start, a.end)
            .iter()
            .any(|p| p.intersects_rect(&reach));
        if !meets {
            continue;
        }
        let d = domain.boundary_point(a.midpoint_param()).dist(zq);
        let better = match &best {
            None => true,
            Some((bd, bs, _)) => d < *bd || (d == *bd && a.start < *bs),
        };
        if better {
            best = Some((d, a.start, a));
        }
    }
    best.map(|b| b.2)
        .unwrap_or_else(|| arcs.arc(j, arcs.index_at(j, s_star)))
}

/// Spatial index of Whitney squares by generation.
pub struct SquareIndex<'a> {
    decomp: &'a WhitneyDecomposition,
    buckets: HashMap<(i32, i64, i64), Vec<u32>>,
}

const BUCKET_SIDES: f64 = 8.0;

impl<'a> SquareIndex<'a> {
    pub fn new(decomp: &'a WhitneyDecomposition) -> Self {
        let mut buckets: HashMap<(i32, i64, i64), Vec<u32>> = HashMap::new();
        for (i, q) in decomp.squares.iter().enumerate() {
            let b = BUCKET_SIDES * q.side();
            let c = q.center();
            buckets
                .entry((q.gen, (c.x / b).floor() as i64, (c.y / b).floor() as i64))
                .or_default()
                .push(i as u32);
        }
        Self { decomp, buckets }
    }

    /// Squares of generation `gen` whose centres lie within `r` of `p`.
    pub fn near(&self, gen: i32, p: PlanePoint, r: f64) -> Vec<usize> {
        let b = BUCKET_SIDES * side_of(gen);
        let (x0, x1) = (((p.x - r) / b).floor() as i64, ((p.x + r) / b).floor() as i64);
        let (y0, y1) = (((p.y - r) / b).floor() as i64, ((p.y + r) / b).floor() as i64);
        let mut out = Vec::new();
        for bx in x0..=x1 {
            for by in y0..=y1 {
                if let Some(v) = self.buckets.get(&(gen, bx, by)) {
                    for &i in v {
                        if self.decomp.squares[i as usize].center().dist(p) <= r {
                            out.push(i as usize);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Whitney square assigned to a boundary arc: side about `ℓ(P)/8`
/// (falling back to `ℓ(P)/4`, then `ℓ(P)/16`), centre nearest to the arc's
/// midpoint.
pub fn psi_map(
    domain: &Domain,
    index: &SquareIndex,
    p: &BoundaryArc,
) -> Result<DyadicSquare, DecompositionError> {
    let l = p.length();
    let m = domain.boundary_point(p.midpoint_param());
    let g8 = (8.0 / l).log2().round() as i32;
    for gen in [g8, g8 - 1, g8 + 1] {
        let found = index
            .near(gen, m, 8.0 * l)
            .into_iter()
            .map(|i| index.decomp.squares[i])
            .min_by(|a, b| {
                a.center()
                    .dist(m)
                    .total_cmp(&b.center().dist(m))
                    .then(a.cmp(b))
            });
        if let Some(q) = found {
            return Ok(q);
        }
    }
    Err(DecompositionError::UnresolvedScale {
        gen: p.gen,
        index: p.index,
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MapReport {
    pub max_multiplicity: usize,
    /// Comparability constant: every size/distance ratio lies in `[1/C, C]`.
    pub constant: f64,
    pub unresolved: usize,
}

/// φ on every Whitney square, with the multiplicity and diameter ratios.
pub fn phi_report(
    domain: &Domain,
    decomp: &WhitneyDecomposition,
    arcs: &ArcHierarchy,
) -> (Vec<BoundaryArc>, MapReport) {
    let images: Vec<BoundaryArc> = decomp
        .squares
        .iter()
        .map(|q| phi_map(domain, decomp, arcs, q))
        .collect();
    let mut counts: BTreeMap<(i32, i64), usize> = BTreeMap::new();
    let mut constant: f64 = 1.0;
    for (q, a) in decomp.squares.iter().zip(&images) {
        *counts.entry(a.key()).or_default() += 1;
        let diam = arc_diameter(domain, a);
        constant = constant.max(q.side() / diam).max(diam / q.side());
    }
    let report = MapReport {
        max_multiplicity: counts.values().copied().max().unwrap_or(0),
        constant,
        unresolved: 0,
    };
    (images, report)
}

/// ψ on every arc of generations `j_lo..=j_hi`.
pub fn psi_report(
    domain: &Domain,
    decomp: &WhitneyDecomposition,
    arcs: &ArcHierarchy,
    j_lo: i32,
    j_hi: i32,
) -> (Vec<(BoundaryArc, Option<DyadicSquare>)>, MapReport) {
    let index = SquareIndex::new(decomp);
    let mut out = Vec::new();
    let mut counts: BTreeMap<DyadicSquare, usize> = BTreeMap::new();
    let mut constant: f64 = 1.0;
    let mut unresolved = 0;
    for j in j_lo.max(arcs.j_min)..=j_hi.min(arcs.j_max) {
        for a in arcs.generation(j) {
            match psi_map(domain, &index, a) {
                Ok(q) => {
                    *counts.entry(q).or_default() += 1;
                    let l = a.length();
                    let diam = std::f64::consts::SQRT_2 * q.side();
                    let dist = cell_distance(&Cell::arc(domain, *a), &Cell::Square(q));
                    for ratio in [diam / l, l / diam, dist / l, l / dist] {
                        constant = constant.max(ratio);
                    }
                    out.push((*a, Some(q)));
                }
                Err(_) => {
                    unresolved += 1;
                    out.push((*a, None));
                }
            }
        }
    }
    let report = MapReport {
        max_multiplicity: counts.values().copied().max().unwrap_or(0),
        constant,
        unresolved,
    };
    (out, report)
}

/// Diameter of an arc, from its piece endpoints (and arc samples).
pub fn arc_diameter(domain: &Domain, a: &BoundaryArc) -> f64 {
    let mut pts = Vec::new();
    for p in domain.pieces_between(a.start, a.end) {
        match p {
            crate::geometry::Piece::Segment { a, b } => {
                pts.push(a);
                pts.push(b);
            }
            arc => {
                for i in 0..=32 {
                    pts.push(arc.point(i as f64 / 32.0));
                }
            }
        }
    }
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(pts[i].dist(pts[j]));
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{dyadic_arcs, whitney_decompose};
    use crate::geometry::LipschitzGraphDomain;

    #[test]
    fn flat_graph_phi_and_psi() {
        let d = Domain::Graph(LipschitzGraphDomain::flat(1.0));
        let w = whitney_decompose(&d, 6).unwrap();
        let h = dyadic_arcs(&d, -1, 6);
        // a square of side 1 is not Whitney here, but phi is defined on any
        // dyadic square
        let q = DyadicSquare::new(0, 0, 1);
        let a = phi_map(&d, &w, &h, &q);
        assert!((a.length() - 1.0).abs() < 1e-15);
        let dist = cell_distance(&Cell::Square(q), &Cell::arc(&d, a));
        assert!(dist <= 20.0 * std::f64::consts::SQRT_2);

        let idx = SquareIndex::new(&w);
        let p = h.arc(0, 0);
        let s = psi_map(&d, &idx, &p).unwrap();
        let side = s.side();
        let dist = cell_distance(&Cell::Square(s), &Cell::arc(&d, p));
        assert!((1.0 / 8.0..=8.0).contains(&side));
        assert!((1.0 / 8.0..=8.0).contains(&dist), "{dist}");
        assert!(d.contains(s.center()));
    }
}
