use crate::constructions::{annulus_bounds, lower_bound_testfn, required_separation, AnnulusBounds};
use crate::error::Result;
use crate::grid::Interval;
use crate::spaces::{mean_oscillation, morrey_norm, IntervalLattice, MorreyParams};

use super::config::{ExperimentConfig, GridSpec};
use super::corpus::{build_symbol, parse_corpus, CorpusParams, SymbolSpec};
use super::report::{num, ExperimentReport, FittedConstant, Table};

struct Fit {
    rows: Vec<(f64, AnnulusBounds, f64, f64)>,
    c1: f64,
    c2: f64,
    spread1: f64,
    spread2: f64,
    testfn_rows: Vec<Vec<String>>,
    checks: Vec<(String, bool, String)>,
}

const TESTFN_HEADER: [&str; 8] = ["symbol", "r", "p", "lambda", "oscillation", "a", "integral_rel", "morrey_norm"];

/// Largest relative deviation from the median.
fn spread(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = crate::spaces::median_of_sorted(&v);
    v.iter().map(|x| (x - m).abs() / m.abs()).fold(0.0, f64::max)
}

fn fit(
    cfg: &ExperimentConfig,
    grid: &GridSpec,
    symbol: &SymbolSpec,
    params: &MorreyParams,
) -> Result<Fit> {
    let s = &cfg.settings;
    let delta: f64 = s.parse("lowerbound", "delta")?;
    let k_min: u32 = s.parse("lowerbound", "k_min")?;
    let k_max: u32 = s.parse("lowerbound", "k_max")?;
    let radii: Vec<f64> = s.list("lowerbound", "radii")?;
    let curve = cfg.curve.build()?;
    let g = grid.grid()?;
    let b = build_symbol(symbol, &CorpusParams::from_settings(s)?, cfg.seed, g);
    let lattice = IntervalLattice::for_grid(g)?;
    let mut rows = Vec::new();
    let mut testfn_rows = Vec::new();
    let mut checks = Vec::new();
    for &r in &radii {
        let iv = Interval::new(0.0, r)?;
        let osc = mean_oscillation(&b, &iv)?;
        let lb = lower_bound_testfn(&b, &iv, params)?;
        let integral_rel = lb.f.integral().norm() / lb.f.l1_norm().max(f64::MIN_POSITIVE);
        let mn = morrey_norm(&lb.f, params, &lattice)?;
        testfn_rows.push(vec![
            symbol.label(),
            num(r),
            num(params.p),
            num(params.lambda),
            num(osc),
            num(lb.a),
            num(integral_rel),
            num(mn),
        ]);
        checks.push((
            format!("{} r={r}: test function mean zero, |a| <= 1/2, norm in [1/4, 4]", symbol.label()),
            integral_rel <= 1e-10 && lb.a.abs() <= 0.5 && (0.25..=4.0).contains(&mn),
            format!("integral {integral_rel:.2e}, a = {:.4}, norm = {mn:.4}", lb.a),
        ));
        checks.push((
            format!("{} r={r}: M(b, I) > delta", symbol.label()),
            osc > delta,
            format!("M = {osc:.4}, delta = {delta}"),
        ));
        for k in k_min..=k_max {
            let ab = annulus_bounds(&curve, &b, &lb, k, params)?;
            let c1 = ab.lower_lhs / (delta.powf(params.p) * ab.unit);
            let c2 = ab.upper_lhs / ab.unit;
            rows.push((r, ab, c1, c2));
        }
    }
    let c1s: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let c2s: Vec<f64> = rows.iter().map(|r| r.3).collect();
    Ok(Fit {
        c1: c1s.iter().cloned().fold(f64::INFINITY, f64::min),
        c2: c2s.iter().cloned().fold(0.0, f64::max),
        spread1: spread(&c1s),
        spread2: spread(&c2s),
        rows,
        testfn_rows,
        checks,
    })
}

/// Annulus estimates for the test functions on `I(0, r)` over the `k` range.
pub fn run_lowerbound(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = &cfg.settings;
    let delta: f64 = s.parse("lowerbound", "delta")?;
    let a1: f64 = s.parse("lowerbound", "a1")?;
    let tol: f64 = s.parse("lowerbound", "stability_tol")?;
    let grid = cfg.grid()?;
    let corpus = parse_corpus(s)?;
    let mut report = super::new_report(cfg);
    let mut table = Table::new(
        "annulus",
        &["symbol", "r", "p", "lambda", "k", "lower_lhs", "upper_lhs", "unit", "c1", "c2"],
    );
    let mut testfns = Table::new("testfn", &TESTFN_HEADER);
    for symbol in &corpus {
        for params in &cfg.params {
            let f = fit(cfg, &grid, symbol, params)?;
            testfns.rows.extend(f.testfn_rows.iter().cloned());
            for (name, passed, detail) in &f.checks {
                report.check(name.clone(), *passed, detail.clone());
            }
            for (r, ab, c1, c2) in &f.rows {
                table.push(vec![
                    symbol.label(),
                    num(*r),
                    num(params.p),
                    num(params.lambda),
                    ab.k.to_string(),
                    num(ab.lower_lhs),
                    num(ab.upper_lhs),
                    num(ab.unit),
                    num(*c1),
                    num(*c2),
                ]);
            }
            let refined = if cfg.refine {
                Some(fit(cfg, &grid.refined(), symbol, params)?)
            } else {
                None
            };
            let tag = format!("{} p={} lambda={}", symbol.label(), params.p, params.lambda);
            report.constant(FittedConstant::new(format!("C1 {tag}"), f.c1, refined.as_ref().map(|r| r.c1), cfg.refine_tol));
            report.constant(FittedConstant::new(format!("C2 {tag}"), f.c2, refined.as_ref().map(|r| r.c2), cfg.refine_tol));
            let a2 = required_separation(f.c1, f.c2, delta, params.p, a1);
            report.constant(FittedConstant::new(format!("A2 {tag}"), a2, None, cfg.refine_tol));
            report.check(
                format!("{tag}: C1 > 0 and C2 finite"),
                f.c1 > 0.0 && f.c2.is_finite(),
                format!("C1 = {:.4e}, C2 = {:.4e}", f.c1, f.c2),
            );
            report.check(
                format!("{tag}: per-k constants stable"),
                f.spread1 <= tol && f.spread2 <= tol,
                format!(
                    "largest deviation from median: lower {:.1}%, upper {:.1}%",
                    100.0 * f.spread1,
                    100.0 * f.spread2
                ),
            );
        }
    }
    report.tables.push(table);
    report.tables.push(testfns);
    Ok(report)
}
