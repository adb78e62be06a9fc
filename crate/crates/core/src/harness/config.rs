use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::{smoothed_square, Domain, DomainSpec, GeometryError};
use crate::norms::CURVE_ELEMENTS;
use crate::transform::PVQuadratureSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Thm1,
    Thm2,
    ThmSmallExponent,
    LemmaNormalEquiv,
    LemmaDorronsoro,
    LemmaHalfplane,
    LemmaDifsim,
    LemmaGeomsum,
}

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Thm1 => "thm1",
            ExperimentId::Thm2 => "thm2",
            ExperimentId::ThmSmallExponent => "thm_small_exponent",
            ExperimentId::LemmaNormalEquiv => "lemma_normal_equiv",
            ExperimentId::LemmaDorronsoro => "lemma_dorronsoro",
            ExperimentId::LemmaHalfplane => "lemma_halfplane",
            ExperimentId::LemmaDifsim => "lemma_difsim",
            ExperimentId::LemmaGeomsum => "lemma_geomsum",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub label: String,
    pub domain: DomainSpec,
}

/// Base domain plus roughness grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Unit squares with corners rounded to radius `r`, listed in order.
    SmoothedSquare {
        radii: Vec<f64>,
        #[serde(default = "default_points_per_arc")]
        points_per_arc: usize,
    },
    Domains {
        members: Vec<Member>,
    },
}

fn default_points_per_arc() -> usize {
    512
}

impl FamilySpec {
    pub fn len(&self) -> usize {
        match self {
            FamilySpec::SmoothedSquare { radii, .. } => radii.len(),
            FamilySpec::Domains { members } => members.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn build(&self) -> Result<Vec<(String, Domain)>, GeometryError> {
        match self {
            FamilySpec::SmoothedSquare { radii, points_per_arc } => radii
                .iter()
                .map(|&r| {
                    if !(0.0..=0.5).contains(&r) {
                        return Err(GeometryError::InvalidField {
                            field: "radii".into(),
                            reason: format!("must lie in [0, 0.5], got {r}"),
                        });
                    }
                    Ok((format!("r={r}"), Domain::Polygon(smoothed_square(r, *points_per_arc))))
                })
                .collect(),
            FamilySpec::Domains { members } => members
                .iter()
                .map(|m| Ok((m.label.clone(), m.domain.build()?)))
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    pub alpha: f64,
    pub p: f64,
}

/// Discretization shared by the domain experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Resolution {
    /// Finest Whitney generation; the error budget compares with `j_max - 1`.
    pub j_max: i32,
    pub curve_elements: usize,
    pub quadrature: PVQuadratureSpec,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            j_max: 7,
            curve_elements: CURVE_ELEMENTS,
            quadrature: PVQuadratureSpec::default(),
        }
    }
}

fn default_profiles() -> Vec<f64> {
    vec![0.3, 0.5, 0.7, 0.9, 1.0]
}

fn default_pairs() -> usize {
    10_000
}

fn default_gammas() -> Vec<f64> {
    vec![0.2, 0.4, 0.6, 0.8]
}

fn default_ps() -> Vec<f64> {
    vec![1.5, 2.0, 3.0]
}

fn default_samples() -> usize {
    4096
}

fn default_dorronsoro_bound() -> f64 {
    50.0
}

fn default_curve_exponent() -> Exponent {
    Exponent { alpha: 0.5, p: 2.0 }
}

fn default_points() -> usize {
    20
}

fn default_bound() -> f64 {
    1e-3
}

fn default_m() -> f64 {
    32.0
}

fn default_radius_factor() -> f64 {
    4.0
}

fn default_generations() -> Vec<i32> {
    vec![2, 3, 4, 5]
}

fn default_grid() -> usize {
    400
}

fn default_pairs_eta_tau() -> Vec<[f64; 2]> {
    vec![[0.25, 0.75], [0.5, 1.0]]
}

fn default_q_generations() -> Vec<i32> {
    vec![0, 1, 2, 3, 4]
}

fn default_floor() -> f64 {
    0.25
}

fn default_spread() -> f64 {
    10.0
}

/// One experiment, tagged by `id`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum Experiment {
    Thm1 {
        family: FamilySpec,
        p: Vec<f64>,
        #[serde(default)]
        resolution: Resolution,
    },
    Thm2 {
        family: FamilySpec,
        exponents: Vec<Exponent>,
        #[serde(default)]
        resolution: Resolution,
    },
    ThmSmallExponent {
        family: FamilySpec,
        exponent: Exponent,
        /// Reported alongside; must have `αp > 1`.
        contrast: Exponent,
        #[serde(default = "default_spread")]
        max_spread: f64,
        #[serde(default)]
        resolution: Resolution,
    },
    LemmaNormalEquiv {
        /// Lipschitz constants of the test profiles.
        #[serde(default = "default_profiles")]
        deltas: Vec<f64>,
        #[serde(default = "default_pairs")]
        pairs: usize,
    },
    LemmaDorronsoro {
        #[serde(default = "default_gammas")]
        gammas: Vec<f64>,
        #[serde(default = "default_ps")]
        p: Vec<f64>,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_dorronsoro_bound")]
        max_constant: f64,
        /// Bounded domains for the curve sums and the normal floor.
        #[serde(default)]
        curve_family: Option<FamilySpec>,
        #[serde(default = "default_curve_exponent")]
        curve_exponent: Exponent,
    },
    LemmaHalfplane {
        #[serde(default = "default_points")]
        points: usize,
        #[serde(default = "default_bound")]
        bound: f64,
        /// Angle of the inward normal.
        #[serde(default)]
        angle: f64,
        #[serde(default)]
        quadrature: PVQuadratureSpec,
    },
    LemmaDifsim {
        family: FamilySpec,
        #[serde(default = "default_generations")]
        generations: Vec<i32>,
        #[serde(default = "default_radius_factor")]
        radius_factor: f64,
        #[serde(default = "default_m")]
        m: f64,
        #[serde(default = "default_grid")]
        grid: usize,
        /// Rotation applied to a copy of every member; rows must agree.
        #[serde(default)]
        rotation: Option<f64>,
    },
    LemmaGeomsum {
        family: FamilySpec,
        #[serde(default = "default_pairs_eta_tau")]
        eta_tau: Vec<[f64; 2]>,
        #[serde(default = "default_q_generations")]
        q_generations: Vec<i32>,
        #[serde(default)]
        window: Option<crate::decomposition::SumWindow>,
        /// Lower end of the accepted band, as a fraction of the golden.
        #[serde(default = "default_floor")]
        floor: f64,
    },
}

impl Experiment {
    pub fn id(&self) -> ExperimentId {
        match self {
            Experiment::Thm1 { .. } => ExperimentId::Thm1,
            Experiment::Thm2 { .. } => ExperimentId::Thm2,
            Experiment::ThmSmallExponent { .. } => ExperimentId::ThmSmallExponent,
            Experiment::LemmaNormalEquiv { .. } => ExperimentId::LemmaNormalEquiv,
            Experiment::LemmaDorronsoro { .. } => ExperimentId::LemmaDorronsoro,
            Experiment::LemmaHalfplane { .. } => ExperimentId::LemmaHalfplane,
            Experiment::LemmaDifsim { .. } => ExperimentId::LemmaDifsim,
            Experiment::LemmaGeomsum { .. } => ExperimentId::LemmaGeomsum,
        }
    }

    /// Grid and exponent constraints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |reason: String| Err(ConfigError::Invalid { id: self.id().name(), reason });
        let family_ok = |f: &FamilySpec| !f.is_empty();
        match self {
            Experiment::Thm1 { family, p, .. } => {
                if !family_ok(family) || p.is_empty() {
                    return bad("empty grid".into());
                }
                if let Some(q) = p.iter().find(|&&q| q <= 1.0) {
                    return bad(format!("p = {q} must exceed 1"));
                }
            }
            Experiment::Thm2 { family, exponents, .. } => {
                if !family_ok(family) || exponents.is_empty() {
                    return bad("empty grid".into());
                }
                for e in exponents {
                    check_exponent(e).or_else(|r| bad(r))?;
                    if e.alpha * e.p <= 1.0 {
                        return bad(format!(
                            "alpha p = {} <= 1; use thm_small_exponent",
                            e.alpha * e.p
                        ));
                    }
                }
            }
            Experiment::ThmSmallExponent { family, exponent, contrast, .. } => {
                if !family_ok(family) {
                    return bad("empty family".into());
                }
                check_exponent(exponent).or_else(|r| bad(r))?;
                check_exponent(contrast).or_else(|r| bad(r))?;
                if exponent.alpha * exponent.p >= 1.0 {
                    return bad(format!("alpha p = {} >= 1", exponent.alpha * exponent.p));
                }
                if contrast.alpha * contrast.p <= 1.0 {
                    return bad(format!("contrast alpha p = {} <= 1", contrast.alpha * contrast.p));
                }
            }
            Experiment::LemmaNormalEquiv { deltas, pairs } => {
                if deltas.is_empty() || *pairs == 0 {
                    return bad("empty grid".into());
                }
                if let Some(d) = deltas.iter().find(|&&d| !(d > 0.0 && d <= 1.0)) {
                    return bad(format!("delta = {d} outside (0, 1]"));
                }
            }
            Experiment::LemmaDorronsoro { gammas, p, .. } => {
                if gammas.is_empty() || p.is_empty() {
                    return bad("empty grid".into());
                }
                if let Some(g) = gammas.iter().find(|&&g| !(g > 0.0 && g < 1.0)) {
                    return bad(format!("gamma = {g} outside (0, 1)"));
                }
            }
            Experiment::LemmaHalfplane { points, .. } => {
                if *points == 0 {
                    return bad("no points".into());
                }
            }
            Experiment::LemmaDifsim { family, generations, .. } => {
                if !family_ok(family) || generations.is_empty() {
                    return bad("empty grid".into());
                }
            }
            Experiment::LemmaGeomsum { family, eta_tau, q_generations, .. } => {
                if !family_ok(family) || eta_tau.is_empty() || q_generations.is_empty() {
                    return bad("empty grid".into());
                }
                if let Some([e, t]) = eta_tau.iter().find(|[e, t]| !(*e > 0.0 && e < t)) {
                    return bad(format!("need 0 < eta < tau, got ({e}, {t})"));
                }
            }
        }
        Ok(())
    }
}

fn check_exponent(e: &Exponent) -> Result<(), String> {
    if !(e.alpha > 0.0 && e.alpha < 1.0) {
        return Err(format!("alpha = {} outside (0, 1)", e.alpha));
    }
    if !(e.p > 1.0 && e.p.is_finite()) {
        return Err(format!("p = {} must exceed 1", e.p));
    }
    Ok(())
}

/// A `verify` configuration: experiments run in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    #[serde(default)]
    pub seed: u64,
    /// Golden constants file, relative to the config file.
    #[serde(default)]
    pub goldens: Option<PathBuf>,
    /// Field cache directory, relative to the config file.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub experiments: Vec<Experiment>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Syntax {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{id}: {reason}")]
    Invalid { id: &'static str, reason: String },
}

impl VerifyConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: VerifyConfig = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            path: base_dir.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        if cfg.experiments.is_empty() {
            return Err(ConfigError::Invalid {
                id: "config",
                reason: "no experiments".into(),
            });
        }
        for e in &cfg.experiments {
            e.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_json(&text, &base).map_err(|e| match e {
            ConfigError::Syntax { line, column, message, .. } => ConfigError::Syntax {
                path: path.to_path_buf(),
                line,
                column,
                message,
            },
            e => e,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn goldens_path(&self) -> Option<PathBuf> {
        self.goldens.as_deref().map(|p| self.resolve(p))
    }

    pub fn cache_path(&self) -> Option<PathBuf> {
        self.cache_dir.as_deref().map(|p| self.resolve(p))
    }
}
