//! Experiment suite: configurations, runners for the theorem sweeps and
//! lemma checks, CSV reports and frozen constants.

mod config;
mod goldens;
mod lemmas;
mod pool;
mod report;
mod theorems;

use std::path::Path;

pub use config::{
    ConfigError, Experiment, ExperimentId, Exponent, FamilySpec, Member, Resolution, VerifyConfig,
};
pub use goldens::{GoldenCheck, Goldens, GOLDEN_TOLERANCE};
pub use pool::run_ordered;
pub use report::{summary_line, write_csv, ExperimentReport, ReportRow, CSV_HEADER, VALID_BUDGET, ZERO_FLOOR};

use crate::norms::FieldCache;

/// Shared state of one run.
#[derive(Clone)]
pub struct RunContext<'a> {
    pub seed: u64,
    /// Worker threads for independent rows.
    pub jobs: usize,
    pub cache: &'a FieldCache,
    pub goldens: &'a Goldens,
    /// Compare constants with the value just measured instead of the golden.
    pub freeze: bool,
    /// Fill `wall_ms`; off by default so reports are reproducible.
    pub timing: bool,
    pub resolution: Resolution,
}

impl<'a> RunContext<'a> {
    pub fn new(cache: &'a FieldCache, goldens: &'a Goldens) -> Self {
        Self {
            seed: 0,
            jobs: 1,
            cache,
            goldens,
            freeze: false,
            timing: false,
            resolution: Resolution::default(),
        }
    }

    fn with_resolution(&self, resolution: Resolution) -> Self {
        Self {
            resolution,
            ..self.clone()
        }
    }

    /// `(ok, golden, note)` for a measured constant.
    fn golden_check(&self, key: &str, measured: f64) -> (bool, f64, String) {
        if self.freeze {
            return (measured.is_finite(), measured, "frozen by this run".into());
        }
        match self.goldens.check(key, measured) {
            GoldenCheck::Missing => (false, f64::NAN, format!("no golden for {key}")),
            GoldenCheck::Within { golden } => (true, golden, format!("golden {golden:.6e}")),
            GoldenCheck::Drifted { golden } => (false, golden, format!("drifted from golden {golden:.6e}")),
        }
    }
}

pub fn run_experiment(exp: &Experiment, ctx: &RunContext) -> ExperimentReport {
    let start = std::time::Instant::now();
    let (mut rows, measured) = match exp {
        Experiment::Thm1 { family, p, resolution } => theorems::run_thm1(family, p, resolution, ctx),
        Experiment::Thm2 {
            family,
            exponents,
            resolution,
        } => theorems::run_thm2(family, exponents, resolution, ctx),
        Experiment::ThmSmallExponent {
            family,
            exponent,
            contrast,
            max_spread,
            resolution,
        } => theorems::run_small_exponent(family, *exponent, *contrast, *max_spread, resolution, ctx),
        Experiment::LemmaNormalEquiv { deltas, pairs } => lemmas::run_normal_equiv(deltas, *pairs, ctx),
        Experiment::LemmaDorronsoro {
            gammas,
            p,
            samples,
            max_constant,
            curve_family,
            curve_exponent,
        } => lemmas::run_dorronsoro(
            gammas,
            p,
            *samples,
            *max_constant,
            curve_family.as_ref().map(|f| (f, *curve_exponent)),
            ctx,
        ),
        Experiment::LemmaHalfplane {
            points,
            bound,
            angle,
            quadrature,
        } => lemmas::run_halfplane(*points, *bound, *angle, quadrature),
        Experiment::LemmaDifsim {
            family,
            generations,
            radius_factor,
            m,
            grid,
            rotation,
        } => lemmas::run_difsim(family, generations, *radius_factor, *m, *grid, *rotation, ctx),
        Experiment::LemmaGeomsum {
            family,
            eta_tau,
            q_generations,
            window,
            floor,
        } => lemmas::run_geomsum(family, eta_tau, q_generations, *window, *floor, ctx),
    };
    if ctx.timing {
        // rows not timed by their runner get the whole experiment
        let ms = start.elapsed().as_millis() as u64;
        for r in rows.iter_mut().filter(|r| r.wall_ms == 0) {
            r.wall_ms = ms;
        }
    }
    ExperimentReport {
        id: exp.id(),
        rows,
        measured,
    }
}

/// Options of the `verify` command.
#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub jobs: usize,
    pub freeze_goldens: bool,
    pub timing: bool,
}

#[derive(Debug)]
pub struct VerifyOutcome {
    pub reports: Vec<ExperimentReport>,
    /// True iff every valid row passes.
    pub ok: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Runs every experiment of `cfg` in order, writes the CSV to `out` and,
/// when freezing, the measured constants to the goldens file.
pub fn verify(cfg: &VerifyConfig, out: &Path, opts: &VerifyOptions) -> Result<VerifyOutcome, VerifyError> {
    let goldens_path = cfg.goldens_path();
    let mut goldens = match &goldens_path {
        Some(p) => Goldens::load(p)?,
        None => Goldens::default(),
    };
    let cache = match cfg.cache_path() {
        Some(dir) => FieldCache::with_dir(dir)?,
        None => FieldCache::in_memory(),
    };
    let reports: Vec<ExperimentReport> = {
        let ctx = RunContext {
            seed: cfg.seed,
            jobs: opts.jobs.max(1),
            cache: &cache,
            goldens: &goldens,
            freeze: opts.freeze_goldens,
            timing: opts.timing,
            resolution: Resolution::default(),
        };
        cfg.experiments.iter().map(|e| run_experiment(e, &ctx)).collect()
    };
    if opts.freeze_goldens {
        for rep in &reports {
            for (k, v) in &rep.measured {
                goldens.values.insert(k.clone(), *v);
            }
        }
        if let Some(p) = &goldens_path {
            goldens.save(p)?;
        }
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::fs::File::create(out)?;
    write_csv(std::io::BufWriter::new(file), &reports)?;
    let ok = reports.iter().all(|r| r.failing_valid().next().is_none());
    Ok(VerifyOutcome { reports, ok })
}
