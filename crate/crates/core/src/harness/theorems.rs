use std::time::Instant;

use super::config::{Exponent, FamilySpec, Resolution};
use super::report::{ReportRow, ZERO_FLOOR};
use super::{pool, RunContext};
use crate::decomposition::whitney_decompose;
use crate::geometry::Domain;
use crate::norms::{
    besov_normal_curve, domain_seminorms, grad_lp_of_field, sample_beurling_field, BeurlingField, NormsError,
    SeminormResult,
};

/// Fields at `j_max` and `j_max - 1`.
struct Fields {
    fine: BeurlingField,
    coarse: BeurlingField,
}

fn fields(domain: &Domain, res: &Resolution, ctx: &RunContext) -> Result<Fields, NormsError> {
    let get = |j: i32| -> Result<BeurlingField, NormsError> {
        let w = whitney_decompose(domain, j)?;
        sample_beurling_field(domain, &w, &res.quadrature, ctx.cache, 1)
    };
    Ok(Fields {
        fine: get(res.j_max)?,
        coarse: get(res.j_max - 1)?,
    })
}

/// Value at the finest level with budget `|v(j) - v(j-1)| + err_est`.
fn converged(f: &Fields, eval: impl Fn(&BeurlingField) -> Vec<SeminormResult>) -> (f64, f64) {
    let fine = eval(&f.fine);
    let coarse = eval(&f.coarse);
    let v: f64 = fine.iter().map(|r| r.value).sum();
    let c: f64 = coarse.iter().map(|r| r.value).sum();
    let e: f64 = fine.iter().map(|r| r.meta.err_est).sum();
    (v, (v - c).abs() + e)
}

fn elapsed_ms(t: Instant, ctx: &RunContext) -> u64 {
    if ctx.timing {
        t.elapsed().as_millis() as u64
    } else {
        0
    }
}

fn note_for(row: &ReportRow) -> &'static str {
    if row.lhs.abs() <= ZERO_FLOOR && row.rhs.abs() <= ZERO_FLOOR {
        "degenerate"
    } else if row.lhs.abs() <= ZERO_FLOOR {
        "lhs vanishes"
    } else {
        ""
    }
}

/// One job per family member; each returns rows for every exponent.
fn per_member<F>(family: &FamilySpec, ctx: &RunContext, labels: Vec<(f64, f64)>, job: F) -> Vec<Vec<ReportRow>>
where
    F: Fn(&str, &Domain, &Fields) -> Vec<ReportRow> + Sync,
{
    let members = match family.build() {
        Ok(m) => m,
        Err(e) => {
            return vec![labels
                .iter()
                .map(|&(a, p)| ReportRow::failed("family", a, p, &e))
                .collect()]
        }
    };
    let tasks: Vec<_> = members
        .iter()
        .map(|(label, domain)| {
            let job = &job;
            let labels = &labels;
            move || {
                let t = Instant::now();
                match fields(domain, &ctx.resolution, ctx) {
                    Ok(f) => {
                        let mut rows = job(label, domain, &f);
                        let ms = elapsed_ms(t, ctx);
                        for r in &mut rows {
                            r.wall_ms = ms;
                        }
                        rows
                    }
                    Err(e) => labels.iter().map(|&(a, p)| ReportRow::failed(label.as_str(), a, p, &e)).collect(),
                }
            }
        })
        .collect();
    pool::run_ordered(ctx.jobs, tasks)
}

/// Largest ratio over valid rows, then the golden comparison row.
fn max_ratio_row(ctx: &RunContext, key: String, rows: &[&ReportRow], alpha: f64, p: f64) -> (ReportRow, Option<(String, f64)>) {
    let all_valid = rows.iter().all(|r| r.valid);
    let max = rows.iter().filter(|r| r.valid).map(|r| r.ratio).fold(f64::NAN, f64::max);
    let mut row = ReportRow::new("max_ratio", alpha, p);
    row.lhs = max;
    row.err_budget = rows.iter().filter(|r| r.valid).map(|r| r.err_budget).fold(0.0, f64::max);
    row.valid = all_valid && max.is_finite();
    let (pass, rhs, note) = ctx.golden_check(&key, max);
    row.rhs = rhs;
    row.ratio = max / rhs;
    row.pass = pass && row.valid;
    row.note = note;
    let measured = max.is_finite().then_some((key, max));
    (row, measured)
}

pub(super) fn run_thm1(family: &FamilySpec, ps: &[f64], res: &Resolution, ctx: &RunContext) -> (Vec<ReportRow>, Vec<(String, f64)>) {
    let labels: Vec<(f64, f64)> = ps.iter().map(|&p| (1.0 - 1.0 / p, p)).collect();
    let ctx = &ctx.with_resolution(*res);
    let per = per_member(family, ctx, labels, |label, domain, f| {
        ps.iter()
            .map(|&p| {
                let alpha = 1.0 - 1.0 / p;
                let (lhs, lhs_err) = converged(f, |fl| vec![grad_lp_of_field(fl, p)]);
                let rhs = besov_normal_curve(domain, alpha, p, res.curve_elements);
                let row = ReportRow::new(label, alpha, p).with_sides(lhs, lhs_err, rhs.value, rhs.meta.err_est);
                let note = note_for(&row);
                let pass = row.valid;
                row.passing(pass).noted(note)
            })
            .collect()
    });
    collect_with_max(ctx, "thm1", ps.iter().map(|&p| (1.0 - 1.0 / p, p)).collect(), per)
}

pub(super) fn run_thm2(
    family: &FamilySpec,
    exps: &[Exponent],
    res: &Resolution,
    ctx: &RunContext,
) -> (Vec<ReportRow>, Vec<(String, f64)>) {
    let labels: Vec<(f64, f64)> = exps.iter().map(|e| (e.alpha, e.p)).collect();
    let ctx = &ctx.with_resolution(*res);
    let per = per_member(family, ctx, labels.clone(), |label, domain, f| {
        let lhs_all = domain_lhs(f, exps);
        exps.iter()
            .zip(lhs_all)
            .map(|(e, (lhs, lhs_err))| {
                let rhs = besov_normal_curve(domain, e.alpha - 1.0 / e.p, e.p, res.curve_elements);
                let row = ReportRow::new(label, e.alpha, e.p).with_sides(lhs, lhs_err, rhs.value, rhs.meta.err_est);
                let note = note_for(&row);
                let pass = row.valid;
                row.passing(pass).noted(note)
            })
            .collect()
    });
    collect_with_max(ctx, "thm2", labels, per)
}

/// `‖B χ‖^p_{W^{α,p}} + ‖B χ‖^p_{B^α_{p,p}}` with its budget, per exponent.
fn domain_lhs(f: &Fields, exps: &[Exponent]) -> Vec<(f64, f64)> {
    let ae: Vec<(f64, f64)> = exps.iter().map(|e| (e.alpha, e.p)).collect();
    let fine = domain_seminorms(&f.fine, &ae);
    let coarse = domain_seminorms(&f.coarse, &ae);
    fine.iter()
        .zip(&coarse)
        .map(|((fs, fb), (cs, cb))| {
            let v = fs.value + fb.value;
            let c = cs.value + cb.value;
            (v, (v - c).abs() + fs.meta.err_est + fb.meta.err_est)
        })
        .collect()
}

/// Member rows grouped by exponent, each group closed by its max-ratio row.
fn collect_with_max(
    ctx: &RunContext,
    id: &str,
    labels: Vec<(f64, f64)>,
    per: Vec<Vec<ReportRow>>,
) -> (Vec<ReportRow>, Vec<(String, f64)>) {
    let mut rows = Vec::new();
    let mut measured = Vec::new();
    for (k, &(alpha, p)) in labels.iter().enumerate() {
        let group: Vec<&ReportRow> = per.iter().filter_map(|m| m.get(k)).collect();
        rows.extend(group.iter().map(|r| (*r).clone()));
        let key = format!("{id}/alpha={alpha:.6},p={p}");
        let (summary, m) = max_ratio_row(ctx, key, &group, alpha, p);
        rows.push(summary);
        measured.extend(m);
    }
    (rows, measured)
}

pub(super) fn run_small_exponent(
    family: &FamilySpec,
    exponent: Exponent,
    contrast: Exponent,
    max_spread: f64,
    res: &Resolution,
    ctx: &RunContext,
) -> (Vec<ReportRow>, Vec<(String, f64)>) {
    let labels = vec![(exponent.alpha, exponent.p), (contrast.alpha, contrast.p)];
    let ctx = &ctx.with_resolution(*res);
    let per = per_member(family, ctx, labels, |label, _domain, f| {
        let both = [exponent, contrast];
        both.iter()
            .zip(domain_lhs(f, &both))
            .map(|(e, (lhs, err))| {
                // no right-hand side: normalized later by the first member
                ReportRow::new(label, e.alpha, e.p).with_sides(lhs, err, 1.0, 0.0)
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut measured = Vec::new();
    for (k, e) in [exponent, contrast].iter().enumerate() {
        let group: Vec<ReportRow> = per.iter().filter_map(|m| m.get(k).cloned()).collect();
        let first = group.first().map_or(f64::NAN, |r| r.lhs);
        for mut r in group.iter().cloned() {
            r.rhs = first;
            r.ratio = r.lhs / first;
            let pass = r.valid && r.lhs.is_finite();
            rows.push(r.passing(pass).noted(if k == 0 { "bounded" } else { "contrast" }));
        }
        let all_valid = group.iter().all(|r| r.valid);
        let budget = group.iter().map(|r| r.err_budget).fold(0.0, f64::max);
        if k == 0 {
            let hi = group.iter().map(|r| r.lhs).fold(f64::NAN, f64::max);
            let lo = group.iter().map(|r| r.lhs).fold(f64::NAN, f64::min);
            let spread = hi / lo;
            let mut row = ReportRow::new("spread", e.alpha, e.p);
            row.lhs = hi;
            row.rhs = lo;
            row.ratio = spread;
            row.err_budget = budget;
            row.valid = all_valid && spread.is_finite();
            let key = format!("thm_small_exponent/spread,alpha={:.6},p={}", e.alpha, e.p);
            let (golden_ok, _, note) = ctx.golden_check(&key, spread);
            row.pass = row.valid && spread <= max_spread && golden_ok;
            row.note = format!("max/min <= {max_spread}; {note}");
            rows.push(row);
            if spread.is_finite() {
                measured.push((key, spread));
            }
        } else {
            let steps = group.len().saturating_sub(1);
            let up = group.windows(2).filter(|w| w[1].lhs > w[0].lhs).count();
            let mut row = ReportRow::new("contrast_trend", e.alpha, e.p);
            row.lhs = up as f64;
            row.rhs = steps as f64;
            row.ratio = if steps > 0 { up as f64 / steps as f64 } else { 0.0 };
            row.err_budget = budget;
            row.valid = all_valid;
            row.pass = row.valid && steps > 0 && up == steps;
            row.note = "strictly increasing steps / steps".into();
            rows.push(row);
        }
    }
    (rows, measured)
}
