use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Allowed relative drift of a measured constant from its golden value.
pub const GOLDEN_TOLERANCE: f64 = 0.1;

/// Frozen empirical constants, keyed `"<experiment>/<group>"`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Goldens {
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GoldenCheck {
    Missing,
    Within { golden: f64 },
    Drifted { golden: f64 },
}

impl GoldenCheck {
    pub fn ok(self) -> bool {
        matches!(self, GoldenCheck::Within { .. })
    }
}

impl Goldens {
    pub fn load(path: &Path) -> std::io::Result<Self> {
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    /// `measured` against the golden, two-sided.
    pub fn check(&self, key: &str, measured: f64) -> GoldenCheck {
        match self.get(key) {
            None => GoldenCheck::Missing,
            Some(g) => {
                let ok = measured.is_finite()
                    && measured <= g * (1.0 + GOLDEN_TOLERANCE)
                    && measured >= g / (1.0 + GOLDEN_TOLERANCE);
                if ok {
                    GoldenCheck::Within { golden: g }
                } else {
                    GoldenCheck::Drifted { golden: g }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_band() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("g/goldens.json");
        let mut g = Goldens::default();
        g.values.insert("thm1/p=2".into(), 2.0);
        g.save(&path).unwrap();
        let back = Goldens::load(&path).unwrap();
        assert_eq!(back, g);
        assert!(back.check("thm1/p=2", 2.1).ok());
        assert!(back.check("thm1/p=2", 1.85).ok());
        assert!(!back.check("thm1/p=2", 2.3).ok());
        assert!(!back.check("thm1/p=2", 1.7).ok());
        assert_eq!(back.check("nope", 1.0), GoldenCheck::Missing);
        assert_eq!(Goldens::load(&tmp.path().join("absent.json")).unwrap(), Goldens::default());
    }
}
