use std::f64::consts::FRAC_PI_4;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;

use super::cache::{FieldCache, NodeValue};
use super::{NormsError, QuadratureMeta, SeminormKind, SeminormResult};
use crate::decomposition::WhitneyDecomposition;
use crate::geometry::{Domain, PlanePoint};
use crate::transform::{d_beurling, gauss_rule, pv_beurling, PVQuadratureSpec, TransformError};

/// One quadrature node of the field: a Whitney square centre (weight = its
/// area) or a collar cell represented by its inside part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldNode {
    pub point: PlanePoint,
    pub weight: f64,
    pub side: f64,
    pub collar: bool,
    /// `B χ_Ω` at the node.
    pub b: Complex64,
    /// `∂B χ_Ω` at the node.
    pub db: Complex64,
    pub b_err: f64,
    pub db_err: f64,
}

/// `B χ_Ω` and `∂B χ_Ω` sampled on a Whitney decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct BeurlingField {
    pub nodes: Vec<FieldNode>,
    pub evals: u64,
    pub j_max: i32,
}

impl BeurlingField {
    pub fn collar_weight(&self) -> f64 {
        self.nodes.iter().filter(|n| n.collar).map(|n| n.weight).sum()
    }
}

struct Site {
    point: PlanePoint,
    weight: f64,
    side: f64,
    collar: bool,
}

/// Smallest depth of a collar sample, in cell sides.
const COLLAR_DEPTH: f64 = 1.0 / 16.0;

/// Whitney centres, then collar cells with their inside fraction from an
/// 8x8 subsample. A collar cell is sampled at the centroid of its inside
/// subsamples (or the deepest of them if the centroid falls outside),
/// moved inward to depth `COLLAR_DEPTH * side` when shallower so that
/// polygon vertices far below the cell scale do not dominate the sample.
fn sites(domain: &Domain, decomp: &WhitneyDecomposition) -> Vec<Site> {
    const SUB: usize = 8;
    let mut out: Vec<Site> = decomp
        .squares
        .iter()
        .map(|q| Site {
            point: q.center(),
            weight: q.side() * q.side(),
            side: q.side(),
            collar: false,
        })
        .collect();
    for q in &decomp.collar {
        let r = q.rect();
        let s = q.side();
        let inside: Vec<PlanePoint> = (0..SUB * SUB)
            .map(|k| {
                let (i, j) = ((k % SUB) as f64 + 0.5, (k / SUB) as f64 + 0.5);
                PlanePoint::new(r.x0 + i * s / SUB as f64, r.y0 + j * s / SUB as f64)
            })
            .filter(|&p| domain.contains(p) && decomp.window.contains(p))
            .collect();
        if inside.is_empty() {
            continue;
        }
        let n = inside.len() as f64;
        let mean = inside.iter().fold(PlanePoint::new(0.0, 0.0), |a, &b| a + b) * (1.0 / n);
        let mut point = mean;
        if !domain.contains(mean) {
            point = inside
                .iter()
                .copied()
                .max_by(|a, b| domain.dist_to_boundary(*a).total_cmp(&domain.dist_to_boundary(*b)))
                .expect("non-empty");
        }
        let depth = domain.dist_to_boundary(point);
        if depth <= 1e-9 * s {
            continue;
        }
        if depth < COLLAR_DEPTH * s {
            let foot = domain.boundary_point(domain.nearest_param(point));
            let deeper = point + (point - foot) * ((COLLAR_DEPTH * s - depth) / depth);
            if domain.contains(deeper) && domain.dist_to_boundary(deeper) > depth {
                point = deeper;
            }
        }
        out.push(Site {
            point,
            weight: s * s * n / (SUB * SUB) as f64,
            side: s,
            collar: true,
        });
    }
    out
}

fn evaluate(domain: &Domain, z: PlanePoint, spec: &PVQuadratureSpec) -> Result<NodeValue, NormsError> {
    let wrap = |e: TransformError| match e {
        TransformError::BudgetExhausted { .. } => NormsError::BudgetExhausted { x: z.x, y: z.y },
        e => NormsError::Transform(e),
    };
    let b = pv_beurling(domain, z, spec).map_err(wrap)?;
    let dist = domain.dist_to_boundary(z);
    let ds = PVQuadratureSpec {
        epsilon: 0.5 * dist,
        ..*spec
    };
    let db = d_beurling(domain, z, &ds).map_err(wrap)?;
    Ok([
        b.value.re,
        b.value.im,
        db.value.re,
        db.value.im,
        b.est_error,
        db.est_error,
        (b.evals + db.evals) as f64,
    ])
}

/// Samples `B χ_Ω` and `∂B χ_Ω` at every node of the decomposition using
/// `jobs` worker threads. Values come from the cache when present; the
/// node order (and so every later reduction) is that of the decomposition.
pub fn sample_beurling_field(
    domain: &Domain,
    decomp: &WhitneyDecomposition,
    spec: &PVQuadratureSpec,
    cache: &FieldCache,
    jobs: usize,
) -> Result<BeurlingField, NormsError> {
    let sites = sites(domain, decomp);
    let ctx = FieldCache::context(domain, spec);
    let points: Vec<PlanePoint> = sites.iter().map(|s| s.point).collect();
    let key = FieldCache::blob_key(&ctx, &points);
    let values = match cache.load_blob(&key, points.len()) {
        Some(v) => v,
        None => {
            let slots: Vec<Mutex<Option<Result<NodeValue, NormsError>>>> =
                points.iter().map(|_| Mutex::new(None)).collect();
            let next = AtomicUsize::new(0);
            let work = || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= points.len() {
                    break;
                }
                let r = match cache.get(&ctx, points[i]) {
                    Some(v) => Ok(v),
                    None => evaluate(domain, points[i], spec).inspect(|v| cache.put(&ctx, points[i], *v)),
                };
                *slots[i].lock().expect("slot") = Some(r);
            };
            std::thread::scope(|s| {
                for _ in 1..jobs.max(1) {
                    s.spawn(work);
                }
                work();
            });
            let values = slots
                .into_iter()
                .map(|m| m.into_inner().expect("slot").expect("every node visited"))
                .collect::<Result<Vec<_>, _>>()?;
            cache.store_blob(&key, domain, spec, &values)?;
            values
        }
    };
    let mut evals = 0;
    let nodes = sites
        .iter()
        .zip(&values)
        .map(|(s, v)| {
            evals += v[6] as u64;
            FieldNode {
                point: s.point,
                weight: s.weight,
                side: s.side,
                collar: s.collar,
                b: Complex64::new(v[0], v[1]),
                db: Complex64::new(v[2], v[3]),
                b_err: v[4],
                db_err: v[5],
            }
        })
        .collect();
    Ok(BeurlingField {
        nodes,
        evals,
        j_max: decomp.j_max,
    })
}

/// `∫_Ω |∂B χ_Ω|^p` on the sampled field; the collar part is reported as
/// the tail.
pub fn grad_lp_of_field(field: &BeurlingField, p: f64) -> SeminormResult {
    let mut value = 0.0;
    let mut tail = 0.0;
    let mut err = 0.0;
    for n in &field.nodes {
        let a = n.db.norm();
        let v = n.weight * a.powf(p);
        value += v;
        if n.collar {
            tail += v;
        }
        err += n.weight * p * a.powf(p - 1.0) * n.db_err;
    }
    SeminormResult {
        value,
        kind: SeminormKind::SobolevGradLp,
        alpha: 1.0,
        p,
        meta: QuadratureMeta {
            nodes: field.nodes.len(),
            tail,
            err_est: err,
            evals: field.evals,
            ..Default::default()
        },
    }
}

/// `‖∂B χ_Ω‖^p_{L^p(Ω)}` over the decomposition (clipped to its window
/// for unbounded domains), sampling through the process-wide cache.
pub fn grad_beurling_lp(
    domain: &Domain,
    p: f64,
    decomp: &WhitneyDecomposition,
    spec: &PVQuadratureSpec,
) -> Result<SeminormResult, NormsError> {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let field = sample_beurling_field(domain, decomp, spec, FieldCache::global(), jobs)?;
    Ok(grad_lp_of_field(&field, p))
}

/// `∫∫_{[0,1]²×[0,1]²} |x - y|^s dx dy` for `s > -2`. The difference has
/// density `(1 - |u|)(1 - |v|)` on `[-1, 1]²`; polar coordinates on the
/// half of the positive quadrant below the diagonal leave a polynomial in
/// `r` times `r^{s+1}`.
pub fn square_self_integral(s: f64) -> f64 {
    let g = gauss_rule(16);
    let mut total = 0.0;
    for &(x, w) in g {
        let phi = FRAC_PI_4 * 0.5 * (x + 1.0);
        let (sn, cs) = phi.sin_cos();
        let r = 1.0 / cs;
        let inner = r.powf(s + 2.0) / (s + 2.0) - (cs + sn) * r.powf(s + 3.0) / (s + 3.0)
            + cs * sn * r.powf(s + 4.0) / (s + 4.0);
        total += w * inner;
    }
    8.0 * FRAC_PI_4 * 0.5 * total
}

/// Off-diagonal sums `Σ_{j≠i} w_j |b_i - b_j|^e / |x_i - x_j|^{2+σ}` per
/// node, with their first-order error propagation.
pub fn pair_kernel_integral(field: &BeurlingField, e: f64, sigma: f64) -> Vec<(f64, f64)> {
    pair_kernel_integrals(field, &[(e, sigma)]).pop().expect("one combination")
}

/// `pair_kernel_integral` for several `(e, σ)` in one pass over the pairs.
pub fn pair_kernel_integrals(field: &BeurlingField, combos: &[(f64, f64)]) -> Vec<Vec<(f64, f64)>> {
    let nodes = &field.nodes;
    let n = nodes.len();
    let k = combos.len();
    let halves: Vec<f64> = combos.iter().map(|&(_, s)| 0.5 * (2.0 + s)).collect();
    // node-major so each pair touches two contiguous blocks
    let mut acc = vec![(0.0, 0.0); n * k];
    for i in 0..n {
        let a = &nodes[i];
        for j in i + 1..n {
            let b = &nodes[j];
            let d2 = (a.point - b.point).dot(a.point - b.point);
            let diff = (a.b - b.b).norm();
            if diff == 0.0 {
                continue;
            }
            let (ld, l2) = (diff.ln(), d2.ln());
            let rel_err = (a.b_err + b.b_err) / diff;
            for c in 0..k {
                let e = combos[c].0;
                let v = (e * ld - halves[c] * l2).exp();
                let dv = e * v * rel_err;
                let ai = &mut acc[i * k + c];
                ai.0 += b.weight * v;
                ai.1 += b.weight * dv;
                let bj = &mut acc[j * k + c];
                bj.0 += a.weight * v;
                bj.1 += a.weight * dv;
            }
        }
    }
    (0..k).map(|c| (0..n).map(|i| acc[i * k + c]).collect()).collect()
}

/// Same-cell contribution of node `n` to `∫_Q |f(x) - f(y)|^e / |x - y|^{2+σ} dy`
/// averaged over `x ∈ Q`, with the local model `|f(x) - f(y)| ≈ |∂f| |x - y|`.
fn self_term(n: &FieldNode, e: f64, sigma: f64, k: f64) -> f64 {
    let s = e - 2.0 - sigma;
    n.db.norm().powf(e) * n.weight * n.side.powf(s) * k
}

fn meta(field: &BeurlingField, tail: f64, err_est: f64) -> QuadratureMeta {
    QuadratureMeta {
        nodes: field.nodes.len(),
        pairs: field.nodes.len() * field.nodes.len().saturating_sub(1),
        tail,
        err_est,
        evals: field.evals,
        ..Default::default()
    }
}

fn finish_besov(field: &BeurlingField, alpha: f64, p: f64, rows: &[(f64, f64)]) -> SeminormResult {
    let sigma = alpha * p;
    let k = square_self_integral(p - 2.0 - sigma);
    let mut value = 0.0;
    let mut err = 0.0;
    let mut tail = 0.0;
    for (n, &(v, dv)) in field.nodes.iter().zip(rows) {
        let t = n.weight * (v + self_term(n, p, sigma, k));
        value += t;
        err += n.weight * dv;
        if n.collar {
            tail += t;
        }
    }
    SeminormResult {
        value,
        kind: SeminormKind::BesovDiffDomain,
        alpha,
        p,
        meta: meta(field, tail, err),
    }
}

fn finish_sobolev(field: &BeurlingField, alpha: f64, p: f64, rows: &[(f64, f64)]) -> SeminormResult {
    let sigma = 2.0 * alpha;
    let k = square_self_integral(-sigma);
    let mut value = 0.0;
    let mut err = 0.0;
    let mut tail = 0.0;
    for (n, &(v, dv)) in field.nodes.iter().zip(rows) {
        let inner = v + self_term(n, 2.0, sigma, k);
        let t = n.weight * inner.powf(0.5 * p);
        value += t;
        if inner > 0.0 {
            err += n.weight * 0.5 * p * inner.powf(0.5 * p - 1.0) * dv;
        }
        if n.collar {
            tail += t;
        }
    }
    SeminormResult {
        value,
        kind: SeminormKind::SobolevFrac,
        alpha,
        p,
        meta: meta(field, tail, err),
    }
}

/// `∬_{Ω²} |f(x) - f(y)|^p / |x - y|^{2+αp}` for the sampled `B χ_Ω`.
pub fn besov_diff_domain(field: &BeurlingField, alpha: f64, p: f64) -> SeminormResult {
    finish_besov(field, alpha, p, &pair_kernel_integral(field, p, alpha * p))
}

/// `‖D^α f‖^p_{L^p(Ω)}` with `D^α f(x)² = ∫_Ω |f(x) - f(y)|² / |x - y|^{2+2α} dy`
/// for the sampled `B χ_Ω`.
pub fn sobolev_frac_seminorm(field: &BeurlingField, alpha: f64, p: f64) -> SeminormResult {
    finish_sobolev(field, alpha, p, &pair_kernel_integral(field, 2.0, 2.0 * alpha))
}

/// `(sobolev_frac_seminorm, besov_diff_domain)` for each `(α, p)`, sharing
/// one pass over the node pairs.
pub fn domain_seminorms(field: &BeurlingField, exponents: &[(f64, f64)]) -> Vec<(SeminormResult, SeminormResult)> {
    let mut combos: Vec<(f64, f64)> = Vec::new();
    let mut slot = |c: (f64, f64)| match combos.iter().position(|&d| d == c) {
        Some(i) => i,
        None => {
            combos.push(c);
            combos.len() - 1
        }
    };
    let idx: Vec<(usize, usize)> = exponents
        .iter()
        .map(|&(a, p)| (slot((2.0, 2.0 * a)), slot((p, a * p))))
        .collect();
    let sums = pair_kernel_integrals(field, &combos);
    exponents
        .iter()
        .zip(idx)
        .map(|(&(a, p), (si, bi))| (finish_sobolev(field, a, p, &sums[si]), finish_besov(field, a, p, &sums[bi])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::whitney_decompose;
    use crate::geometry::DiskDomain;

    #[test]
    fn self_integral_matches_known_values() {
        // s = 0: volume 1; s = 2: 2 * Var * 2 = 1/3
        assert!((square_self_integral(0.0) - 1.0).abs() < 1e-12);
        assert!((square_self_integral(2.0) - 1.0 / 3.0).abs() < 1e-12);
        // s = 1: mean distance between two points of the unit square
        let mean = (2.0 + 2f64.sqrt() + 5.0 * (1.0 + 2f64.sqrt()).ln()) / 15.0;
        assert!((square_self_integral(1.0) - mean).abs() < 1e-9);
    }

    #[test]
    fn disk_field_vanishes() {
        let d = Domain::Disk(DiskDomain::unit());
        let w = whitney_decompose(&d, 4).unwrap();
        let cache = FieldCache::in_memory();
        let f = sample_beurling_field(&d, &w, &PVQuadratureSpec::default(), &cache, 2).unwrap();
        assert!(grad_lp_of_field(&f, 2.0).value < 1e-8);
        assert!(besov_diff_domain(&f, 0.75, 2.0).value < 1e-8);
        assert!(sobolev_frac_seminorm(&f, 0.75, 2.0).value < 1e-6);
        let again = sample_beurling_field(&d, &w, &PVQuadratureSpec::default(), &cache, 1).unwrap();
        assert_eq!(f, again);
        assert_eq!(cache.stats().hits, f.nodes.len() as u64);
    }
}
