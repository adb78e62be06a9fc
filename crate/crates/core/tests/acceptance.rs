//! One line per acceptance criterion. Criterion 1 is checked against the
//! stated closed form, which is off by a factor of π; its literal check is
//! printed and kept in `criterion_1_literal` (ignored), and the companion
//! line checks the correctly normalized form.

use std::path::PathBuf;
use std::time::Instant;

use beurling_core::beta::{beta1_function, exhaustive_fit, Interval, SampledFunction};
use beurling_core::decomposition::{arc_measure, dyadic_arcs, whitney_decompose, ArcLayout};
use beurling_core::geometry::{
    bump, regular_polygon, smoothed_square, DiskDomain, Domain, LipschitzGraphDomain, PlanePoint, PolygonDomain,
};
use beurling_core::harness::{
    run_experiment, verify, Experiment, ExperimentId, ExperimentReport, Goldens, RunContext, VerifyConfig,
    VerifyOptions,
};
use beurling_core::norms::FieldCache;
use beurling_core::transform::{integrate_square_kernel, pv_beurling, Annulus, PVQuadratureSpec};
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Line {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: &'static str, pass: bool, detail: impl Into<String>) -> Line {
    let l = Line {
        id,
        pass,
        detail: detail.into(),
    };
    println!("{} {:>12}  {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.detail);
    l
}

fn halton(i: usize, base: usize) -> f64 {
    let (mut f, mut r, mut i) = (1.0, 0.0, i);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// 50 points inside and 50 outside the unit disk, all at distance ≥ 0.05
/// from the circle, from the Halton sequence in bases 2 and 3.
fn disk_points() -> Vec<PlanePoint> {
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    let mut i = 1;
    while inside.len() < 50 || outside.len() < 50 {
        let z = PlanePoint::new(5.0 * halton(i, 2) - 2.5, 5.0 * halton(i, 3) - 2.5);
        i += 1;
        let r = z.dist(PlanePoint::ORIGIN);
        if r < 0.95 && inside.len() < 50 {
            inside.push(z);
        } else if r > 1.05 && outside.len() < 50 {
            outside.push(z);
        }
    }
    inside.extend(outside);
    inside
}

/// `(max error against the stated form, max error against -r²/(z-c)², max evals, seconds)`.
fn disk_errors() -> (f64, f64, u64, f64) {
    let d = Domain::Disk(DiskDomain::unit());
    let spec = PVQuadratureSpec::default();
    let t = Instant::now();
    let (mut stated, mut exact, mut evals) = (0.0f64, 0.0f64, 0u64);
    for z in disk_points() {
        let v = pv_beurling(&d, z, &spec).unwrap();
        evals = evals.max(v.evals);
        let zc = z.to_complex();
        let err = |oracle: Complex64| {
            if z.dist(PlanePoint::ORIGIN) < 1.0 {
                // the oracle is 0 inside; absolute error
                (v.value - oracle).norm()
            } else {
                (v.value - oracle).norm() / oracle.norm()
            }
        };
        let inside = z.dist(PlanePoint::ORIGIN) < 1.0;
        let zero = Complex64::new(0.0, 0.0);
        stated = stated.max(err(if inside { zero } else { -1.0 / (std::f64::consts::PI * zc * zc) }));
        exact = exact.max(err(if inside { zero } else { -1.0 / (zc * zc) }));
    }
    (stated, exact, evals, t.elapsed().as_secs_f64())
}

fn criterion_1() -> Vec<Line> {
    let (stated, exact, evals, secs) = disk_errors();
    let budget = evals <= 1_000_000 && secs <= 60.0;
    vec![
        line(
            "1",
            stated <= 1e-3 && budget,
            format!("disk vs -1/(pi (z-c)^2): max rel err {stated:.3e}, max evals/point {evals}, {secs:.1} s"),
        ),
        line(
            "1 companion",
            exact <= 1e-3 && budget,
            format!("disk vs -1/(z-c)^2: max rel err {exact:.3e}, max evals/point {evals}, {secs:.1} s"),
        ),
    ]
}

fn report_ok(rep: &ExperimentReport) -> (bool, usize, usize) {
    let failing = rep.rows.iter().filter(|r| !r.pass).count();
    (failing == 0, rep.rows.len(), failing)
}

fn criterion_2(ctx: &RunContext) -> Line {
    let exp: Experiment = serde_json::from_str(r#"{"id": "lemma_halfplane"}"#).unwrap();
    let rep = run_experiment(&exp, ctx);
    let max = rep.rows.iter().map(|r| r.lhs).fold(0.0, f64::max);
    let (ok, n, bad) = report_ok(&rep);
    line(
        "2",
        ok && n == 20,
        format!("half-plane: {n} points, max |dB| {max:.2e} <= 1e-3, eps check at d/2 and d/4, {bad} failing"),
    )
}

fn criterion_3() -> Line {
    let spec = PVQuadratureSpec::default();
    let mut worst = 0.0f64;
    for (c, inner, outer) in [((0.0, 0.0), 0.1, 1.0), ((0.3, -0.7), 0.01, 0.5), ((-2.0, 1.5), 0.25, 3.0)] {
        let center = PlanePoint::new(c.0, c.1);
        let a = Annulus { center, inner, outer };
        let v = integrate_square_kernel(&a, center, inner, outer, &spec).unwrap();
        worst = worst.max(v.value.norm());
    }
    line("3", worst <= 1e-6, format!("annulus cancellation: max |integral| {worst:.2e} over 3 annuli"))
}

fn criterion_4() -> Line {
    let graph = |f: &dyn Fn(f64) -> f64| Domain::Graph(LipschitzGraphDomain::from_fn(1.0, 129, f).unwrap());
    let domains = vec![
        Domain::Disk(DiskDomain::unit()),
        Domain::Disk(DiskDomain::new(PlanePoint::new(0.3, -0.2), 0.7).unwrap()),
        Domain::Polygon(regular_polygon(4, PlanePoint::new(0.5, 0.5), 0.7, 0.785)),
        Domain::Polygon(regular_polygon(3, PlanePoint::ORIGIN, 1.0, 0.2)),
        Domain::Polygon(regular_polygon(6, PlanePoint::ORIGIN, 1.0, 0.0)),
        Domain::Polygon(smoothed_square(0.1, 64)),
        Domain::Polygon(
            PolygonDomain::new(
                [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]
                    .iter()
                    .map(|&(x, y)| PlanePoint::new(x, y))
                    .collect(),
            )
            .unwrap(),
        ),
        graph(&|_| 0.0),
        graph(&|x| 0.3 * bump(x)),
        graph(&|x| 0.5 * bump(x) * (3.0 * x).sin()),
    ];
    let mut violations = 0;
    let mut squares = 0;
    let mut tiling = 0.0f64;
    for d in &domains {
        let w = whitney_decompose(d, 6).unwrap();
        squares += w.squares.len();
        violations += w.check(d).len();
        let arcs = dyadic_arcs(d, 0, 6);
        for (_, level) in arcs.generations() {
            let (covered, total) = match arcs.layout {
                ArcLayout::Closed { total, .. } => (level.iter().map(|a| arc_measure(d, a)).sum::<f64>(), total),
                ArcLayout::Open { lo, hi } => (level.iter().map(|a| a.length()).sum::<f64>(), hi - lo),
            };
            tiling = tiling.max((covered - total).abs() / total);
        }
    }
    line(
        "4",
        violations == 0 && tiling <= 1e-9,
        format!("Whitney: {} domains, {squares} squares, {violations} violations; arc tiling rel err {tiling:.1e}", domains.len()),
    )
}

fn lp_residual(x: &[f64], y: &[f64], w: &[f64]) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let a = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let b = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    for i in 0..x.len() {
        let t = lp.add_var(w[i], (0.0, f64::INFINITY));
        lp.add_constraint([(t, 1.0), (a, x[i]), (b, 1.0)], ComparisonOp::Ge, y[i]);
        lp.add_constraint([(t, 1.0), (a, -x[i]), (b, -1.0)], ComparisonOp::Ge, -y[i]);
    }
    lp.solve().unwrap().solution().unwrap().objective()
}

fn criterion_5() -> Line {
    let affine = SampledFunction::from_fn(-4.0, 4.0, 801, |x| 3.0 * x - 2.0);
    let b_aff = [Interval::new(-1.0, 1.0), Interval::new(0.25, 0.5), Interval::dyadic(1, -1)]
        .iter()
        .map(|&i| beta1_function(&affine, i, false).unwrap().value)
        .fold(0.0, f64::max);
    let abs = SampledFunction::from_fn(-3.0, 3.0, 6000, f64::abs);
    let b_abs = beta1_function(&abs, Interval::new(-1.0, 1.0), false).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let n = 2 + k % 11;
        let mut x: Vec<f64> = Vec::new();
        while x.len() < n {
            let v: f64 = rng.gen_range(-5.0..5.0);
            if x.iter().all(|u| (u - v).abs() > 1e-3) {
                x.push(v);
            }
        }
        let y: Vec<f64> = x.iter().map(|_| rng.gen_range(-3.0..3.0)).collect();
        let w: Vec<f64> = x.iter().map(|_| rng.gen_range(0.1..2.0)).collect();
        let fit = exhaustive_fit(&x, &y, &w).unwrap();
        worst = worst.max((fit.l1_residual - lp_residual(&x, &y, &w)).abs());
    }
    line(
        "5",
        b_aff <= 1e-10 && (b_abs - 1.125).abs() <= 1e-6 && worst <= 1e-8,
        format!("beta1: affine {b_aff:.1e}, |x| {b_abs:.9}, pair fit vs LP max gap {worst:.1e} on 200 instances"),
    )
}

fn criterion_6(ctx: &RunContext) -> Line {
    let exp: Experiment = serde_json::from_str(r#"{"id": "lemma_normal_equiv"}"#).unwrap();
    let rep = run_experiment(&exp, ctx);
    let (ok, n, bad) = report_ok(&rep);
    line("6", ok && n == 5, format!("normal/slope inequalities: {n} profiles x 10^4 pairs, {bad} profiles with violations"))
}

fn criterion_7(ctx: &RunContext) -> Line {
    let exp: Experiment = serde_json::from_str(r#"{"id": "lemma_dorronsoro"}"#).unwrap();
    let t = Instant::now();
    let rep = run_experiment(&exp, ctx);
    let secs = t.elapsed().as_secs_f64();
    let c = rep
        .rows
        .iter()
        .find(|r| r.family_param == "equivalence_constant")
        .map_or(f64::NAN, |r| r.ratio);
    let (ok, n, bad) = report_ok(&rep);
    line(
        "7",
        ok && secs <= 300.0,
        format!("Dorronsoro: {n} rows, ratios within [1/C, C] with C = {c:.2} <= 50, {bad} failing, {secs:.0} s"),
    )
}

fn find(reports: &[ExperimentReport], id: ExperimentId) -> &ExperimentReport {
    reports.iter().find(|r| r.id == id).expect("experiment in config")
}

fn config_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/verify.json")
}

fn verify_criteria() -> Vec<Line> {
    let cfg = VerifyConfig::load(&config_path()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let opts = VerifyOptions::default();
    let t = Instant::now();
    let first = verify(&cfg, &a, &opts).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let reps = &first.reports;
    let mut out = Vec::new();

    let thm1 = find(reps, ExperimentId::Thm1);
    let all_valid = thm1.rows.iter().all(|r| r.valid);
    let (ok, n, bad) = report_ok(thm1);
    let worst = thm1.rows.iter().filter(|r| r.valid).map(|r| r.err_budget).fold(0.0, f64::max);
    out.push(line(
        "8",
        ok && all_valid && secs <= 1800.0,
        format!("thm1 sweep: {n} rows, all valid {all_valid}, worst budget {worst:.3}, {bad} failing, full verify {secs:.0} s"),
    ));

    let thm2 = find(reps, ExperimentId::Thm2);
    let (ok, n, bad) = report_ok(thm2);
    let maxes: Vec<String> = thm2
        .rows
        .iter()
        .filter(|r| r.family_param == "max_ratio")
        .map(|r| format!("{:.3}", r.lhs))
        .collect();
    out.push(line("9", ok, format!("thm2 sweep: {n} rows, max ratios [{}], {bad} failing", maxes.join(", "))));

    let small = find(reps, ExperimentId::ThmSmallExponent);
    let spread = small.rows.iter().find(|r| r.family_param == "spread");
    let trend = small.rows.iter().find(|r| r.family_param == "contrast_trend");
    let (ok, _, bad) = report_ok(small);
    out.push(line(
        "10",
        ok && spread.is_some_and(|r| r.pass) && trend.is_some_and(|r| r.pass),
        format!(
            "small exponent: max/min {:.3} <= 10, contrast increasing in {}/{} steps, {bad} failing",
            spread.map_or(f64::NAN, |r| r.ratio),
            trend.map_or(0.0, |r| r.lhs),
            trend.map_or(0.0, |r| r.rhs)
        ),
    ));

    let geo = find(reps, ExperimentId::LemmaGeomsum);
    let (ok, n, bad) = report_ok(geo);
    out.push(line("11", ok, format!("geometric sums: {n} rows over 5 scales and 2 exponent pairs, {bad} failing")));

    let second = verify(&cfg, &b, &opts).unwrap();
    let same = std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();
    out.push(line(
        "12",
        same && first.ok == second.ok,
        format!("determinism: two verify runs {}", if same { "byte-identical" } else { "differ" }),
    ));
    let others: Vec<String> = reps
        .iter()
        .filter(|r| !r.all_pass())
        .map(|r| r.id.name().to_string())
        .collect();
    println!("verify exit status ok = {} (experiments with failures: [{}])", first.ok, others.join(", "));
    out
}

#[test]
fn acceptance() {
    let cache = FieldCache::in_memory();
    let goldens = Goldens::default();
    let ctx = RunContext::new(&cache, &goldens);
    let mut lines = criterion_1();
    lines.push(criterion_2(&ctx));
    lines.push(criterion_3());
    lines.push(criterion_4());
    lines.push(criterion_5());
    lines.push(criterion_6(&ctx));
    lines.push(criterion_7(&ctx));
    lines.extend(verify_criteria());
    let failed: Vec<&str> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!("failed: {failed:?}");
    // criterion 1 fails against the stated formula; see its companion line
    let unexpected: Vec<&&str> = failed.iter().filter(|id| **id != "1").collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}

#[test]
#[ignore = "the stated disk formula is off by a factor of pi"]
fn criterion_1_literal() {
    let (stated, _, evals, secs) = disk_errors();
    assert!(stated <= 1e-3 && evals <= 1_000_000 && secs <= 60.0, "max rel err {stated:e}");
}
