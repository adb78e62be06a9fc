use std::io::Write;

use serde::Serialize;

use super::config::ExperimentId;

/// One line of a report. `valid` says the numbers can be trusted (error
/// budget below 10% of both sides, or an exact-zero case); `pass` says the
/// row meets its check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub family_param: String,
    pub alpha: f64,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Relative error budget, the larger of the two sides.
    pub err_budget: f64,
    pub valid: bool,
    pub wall_ms: u64,
    #[serde(skip)]
    pub pass: bool,
    #[serde(skip)]
    pub note: String,
}

/// Relative budget above which a row is not trusted.
pub const VALID_BUDGET: f64 = 0.1;

/// Values below this count as exact zeros.
pub const ZERO_FLOOR: f64 = 1e-9;

impl ReportRow {
    pub fn new(family_param: impl Into<String>, alpha: f64, p: f64) -> Self {
        Self {
            family_param: family_param.into(),
            alpha,
            p,
            lhs: f64::NAN,
            rhs: f64::NAN,
            ratio: f64::NAN,
            err_budget: f64::NAN,
            valid: false,
            wall_ms: 0,
            pass: false,
            note: String::new(),
        }
    }

    /// Fills in both sides with their absolute error estimates. The ratio
    /// is `lhs / rhs`, or 0 when `rhs` vanishes.
    pub fn with_sides(mut self, lhs: f64, lhs_err: f64, rhs: f64, rhs_err: f64) -> Self {
        self.lhs = lhs;
        self.rhs = rhs;
        self.ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
        let rel = |v: f64, e: f64| if v.abs() > ZERO_FLOOR { e / v.abs() } else { 0.0 };
        let zero_ok = |v: f64, e: f64| v.abs() > ZERO_FLOOR || e <= ZERO_FLOOR.max(1e-6);
        self.err_budget = rel(lhs, lhs_err).max(rel(rhs, rhs_err));
        self.valid = [lhs, lhs_err, rhs, rhs_err].iter().all(|v| v.is_finite())
            && self.err_budget < VALID_BUDGET
            && zero_ok(lhs, lhs_err)
            && zero_ok(rhs, rhs_err);
        self
    }

    /// A row whose computation failed.
    pub fn failed(family_param: impl Into<String>, alpha: f64, p: f64, why: impl std::fmt::Display) -> Self {
        let mut r = Self::new(family_param, alpha, p);
        r.note = format!("error: {why}");
        r
    }

    pub fn passing(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    pub fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub id: ExperimentId,
    pub rows: Vec<ReportRow>,
    /// Constants measured by this run, keyed like the goldens file.
    pub measured: Vec<(String, f64)>,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Rows that are valid but fail their check.
    pub fn failing_valid(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.valid && !r.pass)
    }
}

/// `%.10e`-style formatting that is stable across platforms.
fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.10e}")
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "family_param",
    "alpha",
    "p",
    "lhs",
    "rhs",
    "ratio",
    "err_budget",
    "valid",
    "wall_ms",
];

/// Writes every row of every report, prefixing `family_param` with the
/// experiment id.
pub fn write_csv<W: Write>(out: W, reports: &[ExperimentReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for rep in reports {
        for r in &rep.rows {
            w.write_record([
                format!("{}:{}", rep.id.name(), r.family_param),
                num(r.alpha),
                num(r.p),
                num(r.lhs),
                num(r.rhs),
                num(r.ratio),
                num(r.err_budget),
                r.valid.to_string(),
                r.wall_ms.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One human-readable line per row.
pub fn summary_line(id: ExperimentId, r: &ReportRow) -> String {
    format!(
        "{} {}:{} alpha={} p={} lhs={:.6e} rhs={:.6e} ratio={:.6e} budget={:.2e}{}{}",
        if r.pass { "PASS" } else { "FAIL" },
        id.name(),
        r.family_param,
        r.alpha,
        r.p,
        r.lhs,
        r.rhs,
        r.ratio,
        r.err_budget,
        if r.valid { "" } else { " (not valid)" },
        if r.note.is_empty() { String::new() } else { format!(" [{}]", r.note) },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validity_rules() {
        let r = ReportRow::new("a", 0.5, 2.0).with_sides(1.0, 0.05, 2.0, 0.1);
        assert!(r.valid);
        assert_eq!(r.ratio, 0.5);
        assert!((r.err_budget - 0.05).abs() < 1e-15);
        assert!(!ReportRow::new("b", 0.5, 2.0).with_sides(1.0, 0.2, 2.0, 0.0).valid);
        // exact zeros on both sides
        let z = ReportRow::new("flat", 0.5, 2.0).with_sides(0.0, 0.0, 0.0, 0.0);
        assert!(z.valid);
        assert_eq!(z.ratio, 0.0);
        assert!(!ReportRow::new("c", 0.5, 2.0).with_sides(f64::NAN, 0.0, 1.0, 0.0).valid);
    }

    #[test]
    fn csv_layout() {
        let rep = ExperimentReport {
            id: ExperimentId::Thm1,
            rows: vec![ReportRow::new("r=0.4", 0.5, 2.0).with_sides(1.0, 0.0, 4.0, 0.0)],
            measured: vec![],
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[rep]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("thm1:r=0.4,5.0000000000e-1,2.0000000000e0,"));
    }
}
