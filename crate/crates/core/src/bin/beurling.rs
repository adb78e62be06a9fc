use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use beurling_core::beta::{dorronsoro_sum_curve, SampledFunction};
use beurling_core::decomposition::{dyadic_arcs, phi_report, psi_report, whitney_decompose, ArcLayout};
use beurling_core::geometry::{domain_from_json, Domain, PlanePoint};
use beurling_core::harness::{summary_line, verify, VerifyConfig, VerifyOptions};
use beurling_core::norms::{
    besov_diff_domain, besov_diff_line, besov_normal_curve, grad_lp_of_field, sample_beurling_field,
    sobolev_frac_seminorm, FieldCache, SeminormResult, CURVE_ELEMENTS,
};
use beurling_core::transform::{d_beurling, pv_beurling, PVQuadratureSpec};

type Res<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "beurling", version, about = "Beurling transforms, Whitney geometry and Besov norms of planar domains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Whitney squares and dyadic boundary arcs as CSV.
    Decomp {
        domain: PathBuf,
        #[arg(long, default_value_t = 6)]
        j_max: i32,
        #[arg(long, default_value_t = 0)]
        j_min: i32,
        /// Run the invariant checks instead of dumping; exit 1 on a violation.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-arc beta numbers and the weighted sum over the arc hierarchy.
    Beta {
        domain: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        j_min: i32,
        #[arg(long, default_value_t = 6)]
        j_max: i32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the transform at the points of a CSV with columns x,y.
    Transform {
        domain: PathBuf,
        /// Points CSV; `-` reads stdin.
        points: PathBuf,
        /// Truncation radius; with --derivative the values are ∂Bχ.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        outer_radius: Option<f64>,
        #[arg(long)]
        derivative: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One seminorm value as a CSV row.
    Norms {
        domain: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 7)]
        j_max: i32,
        #[arg(long, default_value_t = CURVE_ELEMENTS)]
        elements: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Run an experiment configuration and write the report CSV.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Store the measured constants as the new goldens.
        #[arg(long)]
        freeze_goldens: bool,
        /// Record wall-clock times (reports are then not reproducible).
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Normal field on the boundary, `B^α_{p,p}(∂Ω)`.
    BesovDiffCurve,
    /// `Bχ_Ω` in `B^α_{p,p}(Ω)`.
    BesovDiffDomain,
    /// `Bχ_Ω` in `W^{α,p}(Ω)`.
    SobolevFrac,
    /// `‖∂Bχ_Ω‖_{L^p(Ω)}`.
    SobolevGradLp,
    /// Slope of a graph domain in `B^α_{p,p}(ℝ)`.
    BesovDiffLine,
    /// Beta-number sum over the arcs of generations 0..=j_max.
    Dorronsoro,
}

fn load_domain(path: &Path) -> Res<Domain> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(domain_from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn output(out: &Option<PathBuf>) -> Res<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn decomp(domain: &Domain, j_min: i32, j_max: i32, check: bool, out: &Option<PathBuf>) -> Res<bool> {
    let w = whitney_decompose(domain, j_max)?;
    let arcs = dyadic_arcs(domain, j_min, j_max);
    let mut o = output(out)?;
    if !check {
        writeln!(o, "kind,generation,i,j,start,end,size")?;
        for q in &w.squares {
            writeln!(o, "square,{},{},{},,,{}", q.gen, q.k1, q.k2, q.side())?;
        }
        for q in &w.collar {
            writeln!(o, "collar,{},{},{},,,{}", q.gen, q.k1, q.k2, q.side())?;
        }
        for a in arcs.all() {
            writeln!(o, "arc,{},{},,{},{},{}", a.gen, a.index, a.start, a.end, a.length())?;
        }
        o.flush()?;
        return Ok(true);
    }
    let mut bad = w.check(domain);
    for (j, level) in arcs.generations() {
        let total: f64 = level.iter().map(|a| a.length()).sum();
        let expect = match arcs.layout {
            ArcLayout::Closed { total, .. } => total,
            ArcLayout::Open { lo, hi } => hi - lo,
        };
        if (total - expect).abs() > 1e-9 * expect {
            bad.push(format!("generation {j}: arcs cover {total}, boundary {expect}"));
        }
        if j > arcs.j_min {
            for a in level {
                match arcs.parent(a) {
                    Some(par) if arcs.contains(&par, a) => {}
                    _ => bad.push(format!("arc ({}, {}) is not inside its parent", a.gen, a.index)),
                }
            }
        }
    }
    let (_, phi) = phi_report(domain, &w, &arcs);
    let (gen_lo, gen_hi) = w.generation_range();
    let (_, psi) = psi_report(domain, &w, &arcs, gen_lo, gen_hi);
    writeln!(
        o,
        "squares {} collar {} rho {} d0 {}; phi multiplicity {} constant {:.3}; psi multiplicity {} constant {:.3} unresolved {}",
        w.squares.len(),
        w.collar.len(),
        w.rho,
        w.d0,
        phi.max_multiplicity,
        phi.constant,
        psi.max_multiplicity,
        psi.constant,
        psi.unresolved
    )?;
    if phi.constant > 4.0 * w.rho {
        bad.push(format!("phi comparability constant {} exceeds 4 rho", phi.constant));
    }
    for b in &bad {
        writeln!(o, "violation: {b}")?;
    }
    o.flush()?;
    Ok(bad.is_empty())
}

fn beta(domain: &Domain, alpha: f64, p: f64, j_min: i32, j_max: i32, out: &Option<PathBuf>) -> Res<()> {
    let arcs = dyadic_arcs(domain, j_min, j_max);
    let (sum, terms) = dorronsoro_sum_curve(domain, &arcs, alpha, p);
    let mut o = output(out)?;
    writeln!(o, "arc,generation,length,beta1,contribution")?;
    for t in &terms {
        writeln!(
            o,
            "{}:{},{},{:e},{:e},{:e}",
            t.arc.gen,
            t.arc.index,
            t.arc.gen,
            t.arc.length(),
            t.beta,
            t.contribution
        )?;
    }
    writeln!(o, "total,,,,{:e}", sum.value)?;
    o.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
}

#[allow(clippy::too_many_arguments)]
fn transform(
    domain: &Domain,
    points: &Path,
    spec: PVQuadratureSpec,
    derivative: bool,
    out: &Option<PathBuf>,
) -> Res<bool> {
    let reader: Box<dyn std::io::Read> = if points == Path::new("-") {
        Box::new(std::io::stdin().lock())
    } else {
        Box::new(std::fs::File::open(points).map_err(|e| format!("{}: {e}", points.display()))?)
    };
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut wr = csv::Writer::from_writer(output(out)?);
    wr.write_record(["x", "y", "Re", "Im", "est_error", "evals"])?;
    let mut ok = true;
    for row in rd.deserialize() {
        let PointRow { x, y } = row?;
        let z = PlanePoint::new(x, y);
        let r = if derivative {
            d_beurling(domain, z, &spec)
        } else {
            pv_beurling(domain, z, &spec)
        };
        match r {
            Ok(v) => wr.write_record([
                x.to_string(),
                y.to_string(),
                format!("{:e}", v.value.re),
                format!("{:e}", v.value.im),
                format!("{:e}", v.est_error),
                v.evals.to_string(),
            ])?,
            Err(e) => {
                ok = false;
                eprintln!("({x}, {y}): {e}");
                wr.write_record([x.to_string(), y.to_string(), "NaN".into(), "NaN".into(), "NaN".into(), "0".into()])?;
            }
        }
    }
    wr.flush()?;
    Ok(ok)
}

fn norms(domain: &Domain, alpha: f64, p: f64, kind: Kind, j_max: i32, elements: usize, cache_dir: &Option<PathBuf>) -> Res<()> {
    let cache = match cache_dir {
        Some(d) => FieldCache::with_dir(d)?,
        None => FieldCache::in_memory(),
    };
    let field = || -> Res<_> {
        let w = whitney_decompose(domain, j_max)?;
        Ok(sample_beurling_field(domain, &w, &PVQuadratureSpec::default(), &cache, 1)?)
    };
    let r: SeminormResult = match kind {
        Kind::BesovDiffCurve => besov_normal_curve(domain, alpha, p, elements),
        Kind::BesovDiffDomain => besov_diff_domain(&field()?, alpha, p),
        Kind::SobolevFrac => sobolev_frac_seminorm(&field()?, alpha, p),
        Kind::SobolevGradLp => grad_lp_of_field(&field()?, p),
        Kind::BesovDiffLine => {
            let Domain::Graph(g) = domain else {
                return Err("besov-diff-line needs a graph domain".into());
            };
            let (lo, hi) = g.x_range();
            let f = SampledFunction::from_fn(lo, hi, elements, |x| g.slope(x));
            besov_diff_line(&f, alpha, p)
        }
        Kind::Dorronsoro => {
            let arcs = dyadic_arcs(domain, 0, j_max);
            let (sum, terms) = dorronsoro_sum_curve(domain, &arcs, alpha, p);
            SeminormResult {
                value: sum.value,
                kind: beurling_core::norms::SeminormKind::Dorronsoro,
                alpha,
                p,
                meta: beurling_core::norms::QuadratureMeta {
                    nodes: terms.len(),
                    ..Default::default()
                },
            }
        }
    };
    let mut o = std::io::stdout().lock();
    writeln!(o, "kind,alpha,p,value,err_est,tail,nodes,pairs,evals")?;
    writeln!(
        o,
        "{},{},{},{:e},{:e},{:e},{},{},{}",
        r.kind.name(),
        r.alpha,
        r.p,
        r.value,
        r.meta.err_est,
        r.meta.tail,
        r.meta.nodes,
        r.meta.pairs,
        r.meta.evals
    )?;
    if let Some(stats) = cache_dir.as_ref().map(|_| cache.stats()) {
        eprintln!("cache: {} hits, {} misses", stats.hits, stats.misses);
    }
    Ok(())
}

fn run(cli: Cli) -> Res<bool> {
    match cli.cmd {
        Cmd::Decomp {
            domain,
            j_max,
            j_min,
            check,
            out,
        } => decomp(&load_domain(&domain)?, j_min, j_max, check, &out),
        Cmd::Beta {
            domain,
            alpha,
            p,
            j_min,
            j_max,
            out,
        } => beta(&load_domain(&domain)?, alpha, p, j_min, j_max, &out).map(|_| true),
        Cmd::Transform {
            domain,
            points,
            epsilon,
            budget,
            tol,
            outer_radius,
            derivative,
            out,
        } => {
            let d = PVQuadratureSpec::default();
            let spec = PVQuadratureSpec {
                epsilon: epsilon.unwrap_or(d.epsilon),
                outer_radius: outer_radius.unwrap_or(d.outer_radius),
                budget: budget.unwrap_or(d.budget),
                target_tol: tol.unwrap_or(d.target_tol),
            };
            transform(&load_domain(&domain)?, &points, spec, derivative, &out)
        }
        Cmd::Norms {
            domain,
            alpha,
            p,
            kind,
            j_max,
            elements,
            cache_dir,
        } => norms(&load_domain(&domain)?, alpha, p, kind, j_max, elements, &cache_dir).map(|_| true),
        Cmd::Verify {
            config,
            out,
            jobs,
            freeze_goldens,
            timing,
        } => {
            let cfg = VerifyConfig::load(&config)?;
            let opts = VerifyOptions {
                jobs,
                freeze_goldens,
                timing,
            };
            let outcome = verify(&cfg, &out, &opts)?;
            let mut o = std::io::stdout().lock();
            for rep in &outcome.reports {
                for row in &rep.rows {
                    writeln!(o, "{}", summary_line(rep.id, row))?;
                }
            }
            writeln!(o, "{}", if outcome.ok { "all valid rows pass" } else { "some valid rows fail" })?;
            Ok(outcome.ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
