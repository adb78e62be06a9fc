//! Planar domains, their boundaries, and the primitives shared by the
//! other modules.

mod domain;
mod family;
mod io;
mod piece;
mod point;

pub use domain::{
    normal_from_slope, DiskDomain, Domain, HalfPlaneDomain, LipschitzGraphDomain, NormalPiece,
    PolygonDomain,
};
pub use family::{bump, regular_polygon, smoothed_square};
pub use io::{domain_from_json, domain_to_json, DomainSpec, LoadError};
pub use piece::{clip_line, clip_segment, point_segment_distance, Piece, Rect};
pub use point::{wrap_angle, PlanePoint, UnitNormal};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("field `{0}` is not finite")]
    NonFinite(String),
    #[error("field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },
}
