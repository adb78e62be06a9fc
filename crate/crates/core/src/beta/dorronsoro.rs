use serde::Serialize;

use super::curve::beta1_curve;
use super::function::{beta1_function, Interval, SampledFunction};
use super::BetaError;
use crate::decomposition::{ArcHierarchy, BoundaryArc};
use crate::geometry::Domain;

/// Dyadic generations `j_lo..=j_hi` (interval length `2^-j`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaleWindow {
    pub j_lo: i32,
    pub j_hi: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DorronsoroSum {
    /// The p-th power sum.
    pub value: f64,
    /// `(generation, partial sum)`, coarse to fine.
    pub per_generation: Vec<(i32, f64)>,
    pub terms: usize,
}

/// One arc's contribution to the curve sum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcTerm {
    pub arc: BoundaryArc,
    pub beta: f64,
    pub contribution: f64,
}

/// `Σ_I (β₁(f, I) / ℓ(I)^{α-1})^p ℓ(I)` over the dyadic intervals of the
/// window, with `f` extended by zero. Intervals whose tripling misses the
/// sampled range contribute nothing and are skipped.
pub fn dorronsoro_sum_function(
    f: &SampledFunction,
    alpha: f64,
    p: f64,
    window: ScaleWindow,
) -> Result<DorronsoroSum, BetaError> {
    Ok(dorronsoro_sums_function(f, alpha, &[p], window)?.remove(0))
}

/// [`dorronsoro_sum_function`] for several exponents from one pass of fits.
pub fn dorronsoro_sums_function(
    f: &SampledFunction,
    alpha: f64,
    ps: &[f64],
    window: ScaleWindow,
) -> Result<Vec<DorronsoroSum>, BetaError> {
    let mut out: Vec<DorronsoroSum> = ps
        .iter()
        .map(|_| DorronsoroSum {
            value: 0.0,
            per_generation: Vec::new(),
            terms: 0,
        })
        .collect();
    for j in window.j_lo..=window.j_hi {
        let l = 2f64.powi(-j);
        let k0 = (f.x0 / l).floor() as i64 - 1;
        let k1 = (f.x_end() / l).ceil() as i64 + 1;
        let mut partial = vec![0.0; ps.len()];
        for k in k0..=k1 {
            let b = beta1_function(f, Interval::dyadic(j, k), true)?;
            let scaled = b.value / l.powf(alpha - 1.0);
            for (acc, &p) in partial.iter_mut().zip(ps) {
                *acc += scaled.powf(p) * l;
            }
        }
        for (s, v) in out.iter_mut().zip(partial) {
            s.value += v;
            s.terms += (k1 - k0 + 1) as usize;
            s.per_generation.push((j, v));
        }
    }
    Ok(out)
}

/// `Σ_P (β₁(∂Ω, P) / ℓ(P)^α)^p ℓ(P)` over every arc of the hierarchy,
/// summed in arc-key order.
pub fn dorronsoro_sum_curve(
    domain: &Domain,
    arcs: &ArcHierarchy,
    alpha: f64,
    p: f64,
) -> (DorronsoroSum, Vec<ArcTerm>) {
    let mut rows = Vec::new();
    let mut per_generation = Vec::new();
    let mut value = 0.0;
    for (j, level) in arcs.generations() {
        let mut partial = 0.0;
        for a in level {
            let beta = beta1_curve(domain, a).value;
            let l = a.length();
            let contribution = (beta / l.powf(alpha)).powf(p) * l;
            partial += contribution;
            rows.push(ArcTerm {
                arc: *a,
                beta,
                contribution,
            });
        }
        value += partial;
        per_generation.push((j, partial));
    }
    let terms = rows.len();
    (
        DorronsoroSum {
            value,
            per_generation,
            terms,
        },
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::dyadic_arcs;
    use crate::geometry::LipschitzGraphDomain;

    #[test]
    fn zero_function_and_homogeneity() {
        let w = ScaleWindow { j_lo: 0, j_hi: 3 };
        let z = SampledFunction::from_fn(-1.0, 1.0, 512, |_| 0.0);
        assert_eq!(dorronsoro_sum_function(&z, 1.5, 2.0, w).unwrap().value, 0.0);
        let f = SampledFunction::from_fn(-1.0, 1.0, 512, |x| 1.0 - x * x);
        let s = dorronsoro_sum_function(&f, 1.5, 2.0, w).unwrap();
        let t = dorronsoro_sum_function(&f.scaled(3.0), 1.5, 2.0, w).unwrap();
        assert!(s.value > 0.0);
        assert!((t.value / s.value - 9.0).abs() < 1e-9);
        assert_eq!(s.per_generation.len(), 4);
    }

    #[test]
    fn flat_graph_curve_sum_is_zero() {
        let d = Domain::Graph(LipschitzGraphDomain::flat(1.0));
        let h = dyadic_arcs(&d, 0, 3);
        let (s, rows) = dorronsoro_sum_curve(&d, &h, 0.5, 2.0);
        assert!(s.value <= 1e-12);
        assert_eq!(rows.len(), s.terms);
    }
}
