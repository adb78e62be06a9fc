//! β₁ flatness coefficients and Dorronsoro sums.

mod curve;
mod dorronsoro;
mod function;
mod l1fit;

pub use curve::{beta1_curve, curve_nodes, line_fit, line_fit_pairs, triple_arc_nodes, LineFit, CURVE_NODES};
pub use dorronsoro::{dorronsoro_sum_curve, dorronsoro_sum_function, dorronsoro_sums_function, ArcTerm, DorronsoroSum, ScaleWindow};
pub use function::{beta1_function, continuum_residual, Beta1Result, Interval, SampledFunction, MIN_WINDOW_SAMPLES};
pub use l1fit::{
    affine_l1_fit, descent_fit, exhaustive_fit, l1_residual, weighted_median, AffineFit, EXHAUSTIVE_LIMIT,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BetaError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("window [{}, {}] leaves the sampled range [{}, {}]", .window.0, .window.1, .support.0, .support.1)]
    WindowOutOfRange { window: (f64, f64), support: (f64, f64) },
    #[error("window holds {found} samples, need {needed}")]
    TooFewSamples { found: usize, needed: usize },
}
