//! Whitney squares of a domain, dyadic arcs of its boundary, the maps
//! between them, and the big-distance sums.

mod arcs;
mod maps;
mod sums;
mod whitney;

pub use arcs::{arc_measure, arc_pieces, dyadic_arcs, ArcHierarchy, ArcLayout, BoundaryArc};
pub use maps::{arc_diameter, phi_map, phi_report, psi_map, psi_report, MapReport, SquareIndex};
pub use sums::{
    big_distance, cell_distance, geometric_sum, piece_piece_distance, pieces_rect_distance, Cell,
    GeometricSum, SumWindow,
};
pub use whitney::{
    default_window, escape_dilation, side_of, whitney_decompose, whitney_decompose_in, DyadicSquare,
    WhitneyDecomposition, CONTAINMENT_DILATION,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecompositionError {
    #[error("domain has no Whitney square up to generation {j_max}")]
    EmptyDomain { j_max: i32 },
    #[error("no Whitney square of comparable scale near arc ({gen}, {index})")]
    UnresolvedScale { gen: i32, index: i64 },
    #[error("need 0 < eta < tau, got eta = {eta}, tau = {tau}")]
    BadExponents { eta: f64, tau: f64 },
}
