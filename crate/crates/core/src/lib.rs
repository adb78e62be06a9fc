//! Beurling transform of characteristic functions of planar Lipschitz
//! domains, the multiscale geometry of their boundaries, and the Besov and
//! Sobolev seminorms that control it.

pub mod geometry;
pub mod decomposition;
pub mod beta;
pub mod transform;
pub mod norms;
pub mod harness;
