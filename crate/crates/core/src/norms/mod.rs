//! Besov and fractional Sobolev seminorms of sampled functions, boundary
//! normals and the Beurling transform field.

mod cache;
mod curve;
mod domain;
mod line;

use serde::{Deserialize, Serialize};

use crate::decomposition::DecompositionError;
use crate::transform::TransformError;

pub use cache::{FieldCache, CacheStats};
pub use curve::{besov_normal_curve, CURVE_ELEMENTS};
pub use domain::{
    besov_diff_domain, domain_seminorms, grad_beurling_lp, grad_lp_of_field, pair_kernel_integral,
    pair_kernel_integrals, sample_beurling_field,
    sobolev_frac_seminorm, square_self_integral, BeurlingField, FieldNode,
};
pub use line::besov_diff_line;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeminormKind {
    BesovDiffLine,
    BesovDiffCurve,
    BesovDiffDomain,
    SobolevFrac,
    SobolevGradLp,
    Dorronsoro,
}

impl SeminormKind {
    pub fn name(self) -> &'static str {
        match self {
            SeminormKind::BesovDiffLine => "besov_diff_line",
            SeminormKind::BesovDiffCurve => "besov_diff_curve",
            SeminormKind::BesovDiffDomain => "besov_diff_domain",
            SeminormKind::SobolevFrac => "sobolev_frac",
            SeminormKind::SobolevGradLp => "sobolev_grad_lp",
            SeminormKind::Dorronsoro => "dorronsoro",
        }
    }
}

/// What was integrated and how.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeta {
    pub nodes: usize,
    /// Off-diagonal node pairs (domain functionals).
    pub pairs: usize,
    pub spacing: f64,
    /// Integration window `(lo, hi)` along the line, if any.
    pub window: (f64, f64),
    /// Part of the value coming from the closed-form tail or the collar.
    pub tail: f64,
    pub err_est: f64,
    /// Kernel evaluations spent on the field.
    pub evals: u64,
}

/// A seminorm raised to the power `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormResult {
    pub value: f64,
    pub kind: SeminormKind,
    pub alpha: f64,
    pub p: f64,
    pub meta: QuadratureMeta,
}

#[derive(Debug, thiserror::Error)]
pub enum NormsError {
    #[error("evaluation budget exhausted at node ({x}, {y})")]
    BudgetExhausted { x: f64, y: f64 },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error("cache: {0}")]
    Cache(#[from] std::io::Error),
}
