use rayon::prelude::*;

use crate::constructions::lower_bound_testfn;
use crate::error::Result;
use crate::grid::{Grid, GridFunction, Interval};
use crate::operators::commutator_image;
use crate::spaces::{bmo_norm, lattice_oscillations, morrey_norm, IntervalLattice, MorreyParams};

use super::config::{ExperimentConfig, GridSpec};
use super::corpus::{build_symbol, parse_corpus, CorpusParams};
use super::report::{num, relative_change, ExperimentReport, FittedConstant, Table};

pub(crate) struct Row {
    pub symbol: String,
    pub params: MorreyParams,
    pub op: f64,
    pub bmo: f64,
    pub ratio: Option<f64>,
}

/// Indicators of dyadic intervals at three positions across the window.
fn indicator_inputs(grid: Grid, min_cells: usize) -> Vec<GridFunction> {
    let window = grid.window();
    let mut out = Vec::new();
    let mut cells = min_cells.max(1);
    while 2 * cells <= grid.len {
        let len = cells as f64 * grid.step;
        for frac in [0.25, 0.5, 0.75] {
            let start = grid.origin + ((frac * grid.len as f64) as usize).saturating_sub(cells / 2) as f64 * grid.step;
            if let Ok(iv) = Interval::from_endpoints(start, start + len) {
                if window.contains_interval(&iv) {
                    out.push(GridFunction::indicator(grid, &iv));
                }
            }
        }
        cells *= 2;
    }
    out
}

/// Lemma-type test functions on the most oscillating interval of each of the
/// `count` most oscillating lattice levels.
fn testfn_inputs(
    b: &GridFunction,
    lattice: &IntervalLattice,
    params: &MorreyParams,
    min_cells: usize,
    count: usize,
) -> Result<Vec<GridFunction>> {
    let grid = *b.grid();
    let mut best: std::collections::BTreeMap<usize, (f64, Interval)> = Default::default();
    for (li, m) in lattice_oscillations(b, lattice)? {
        if li.cells < min_cells || m <= 0.0 {
            continue;
        }
        let e = best.entry(li.cells).or_insert((m, li.interval(&grid)));
        if m > e.0 {
            *e = (m, li.interval(&grid));
        }
    }
    let mut levels: Vec<(f64, Interval)> = best.into_values().collect();
    levels.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.radius.total_cmp(&b.1.radius)));
    levels
        .into_iter()
        .take(count)
        .map(|(_, iv)| lower_bound_testfn(b, &iv, params).map(|lb| lb.f))
        .collect()
}

/// Lower estimates of the operator norm for every symbol and parameter pair.
pub(crate) fn ratio_rows(cfg: &ExperimentConfig, spec: &GridSpec) -> Result<Vec<Row>> {
    let s = &cfg.settings;
    let min_cells: usize = s.parse("boundedness", "min_cells")?;
    let testfn_count: usize = s.parse("boundedness", "testfn_count")?;
    let grid = spec.grid()?;
    let curve = cfg.curve.build()?;
    let corpus_params = CorpusParams::from_settings(s)?;
    let lattice = IntervalLattice::for_grid(grid)?;
    let indicators = indicator_inputs(grid, min_cells);
    let mut rows = Vec::new();
    for symbol in parse_corpus(s)? {
        let b = build_symbol(&symbol, &corpus_params, cfg.seed, grid);
        let bmo = bmo_norm(&b, &lattice)?;
        let mut inputs = indicators.clone();
        // test functions only depend on the first parameter pair through a positive factor
        inputs.extend(testfn_inputs(&b, &lattice, &cfg.params[0], min_cells, testfn_count)?);
        let images: Vec<GridFunction> = inputs
            .par_iter()
            .map(|f| commutator_image(&curve, &b, f))
            .collect::<Result<_>>()?;
        for params in &cfg.params {
            let ratios: Vec<f64> = inputs
                .par_iter()
                .zip(&images)
                .map(|(f, g)| {
                    let nf = morrey_norm(f, params, &lattice)?;
                    Ok(if nf > 0.0 { morrey_norm(g, params, &lattice)? / nf } else { 0.0 })
                })
                .collect::<Result<_>>()?;
            let op = ratios.into_iter().fold(0.0, f64::max);
            let degenerate = bmo <= 1e-12 * b.max_abs().max(1.0);
            rows.push(Row {
                symbol: symbol.label(),
                params: *params,
                op,
                bmo,
                ratio: if degenerate { None } else { Some(op / bmo) },
            });
        }
    }
    Ok(rows)
}

pub(crate) fn band(rows: &[Row]) -> Option<(f64, f64)> {
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    if ratios.is_empty() {
        return None;
    }
    Some((
        ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        ratios.iter().cloned().fold(0.0, f64::max),
    ))
}

/// Ratio of the commutator's lower norm estimate to the BMO norm across the
/// corpus and the parameter grid, with the band re-measured at half the step.
pub fn run_boundedness(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let width_max: f64 = cfg.settings.parse("boundedness", "band_width")?;
    let spec = cfg.grid()?;
    let mut report = super::new_report(cfg);
    report.note("op_lower_estimate is a maximum over finitely many test inputs, hence a lower estimate");
    let rows = ratio_rows(cfg, &spec)?;
    let mut t = Table::new("ratios", &["symbol", "p", "lambda", "op_lower_estimate", "bmo", "ratio", "degenerate"]);
    for r in &rows {
        t.push(vec![
            r.symbol.clone(),
            num(r.params.p),
            num(r.params.lambda),
            num(r.op),
            num(r.bmo),
            r.ratio.map_or_else(|| "nan".to_string(), num),
            r.ratio.is_none().to_string(),
        ]);
    }
    report.tables.push(t);

    let Some((lo, hi)) = band(&rows) else {
        report.note("every symbol is degenerate (zero oscillation); no band to fit");
        return Ok(report);
    };
    let refined = if cfg.refine {
        band(&ratio_rows(cfg, &spec.refined())?)
    } else {
        None
    };
    report.constant(FittedConstant::new("band_lower", lo, refined.map(|b| b.0), cfg.refine_tol));
    report.constant(FittedConstant::new("band_upper", hi, refined.map(|b| b.1), cfg.refine_tol));
    report.check(
        "ratio band width",
        hi / lo <= width_max,
        format!("band [{lo:.4}, {hi:.4}], width {:.3} (limit {width_max})", hi / lo),
    );
    if let Some((rlo, rhi)) = refined {
        let (dlo, dhi) = (relative_change(lo, rlo), relative_change(hi, rhi));
        report.check(
            "band endpoints stable under refinement",
            dlo <= cfg.refine_tol && dhi <= cfg.refine_tol,
            format!("[{rlo:.4}, {rhi:.4}] at half step; changes {:.1}%, {:.1}%", 100.0 * dlo, 100.0 * dhi),
        );
    }
    Ok(report)
}
