use num_complex::Complex64;

use crate::compactness::{fk_report, smooth_truncate_symbol, FamilyReport};
use crate::constructions::{noncompact_witness, Scenario, Witness, WitnessOptions};
use crate::error::Result;
use crate::grid::GridFunction;
use crate::spaces::{morrey_norm, IntervalLattice, MorreyParams};

use super::config::{ExperimentConfig, GridSpec};
use super::corpus::{build_symbol, parse_corpus, random_steps, CorpusParams, SymbolSpec};
use super::report::{num, ExperimentReport, FittedConstant, Table};

struct Knobs {
    z_list: Vec<f64>,
    alpha_list: Vec<f64>,
    family_size: usize,
    family_radius: f64,
    decay_max: f64,
    slope_tol: f64,
    scenario: Scenario,
    witness: WitnessOptions,
    witness_count: usize,
    min_fraction: f64,
    epsilons: Vec<f64>,
    truncation_radius: f64,
}

impl Knobs {
    fn read(cfg: &ExperimentConfig) -> Result<Self> {
        let s = &cfg.settings;
        Ok(Self {
            z_list: s.list("compactness", "z_list")?,
            alpha_list: s.list("compactness", "alpha_list")?,
            family_size: s.parse("compactness", "family_size")?,
            family_radius: s.parse("compactness", "family_radius")?,
            decay_max: s.parse("compactness", "decay_max")?,
            slope_tol: s.parse("compactness", "slope_tol")?,
            scenario: Scenario::parse(s.get("compactness", "scenario").unwrap_or("shrinking"))
                .map_err(|e| crate::Error::Config(e.to_string()))?,
            witness: WitnessOptions {
                delta: None,
                ratio: s.parse("compactness", "witness_ratio")?,
                min_cells: s.parse("compactness", "witness_min_cells")?,
            },
            witness_count: s.parse("compactness", "witness_count")?,
            min_fraction: s.parse("compactness", "witness_min_fraction")?,
            epsilons: s.list("compactness", "epsilon_list")?,
            truncation_radius: s.parse("compactness", "truncation_radius")?,
        })
    }
}

/// Unit-Morrey random steps near the origin.
fn family(spec: &GridSpec, k: &Knobs, params: &MorreyParams, seed: u64) -> Result<Vec<GridFunction>> {
    let grid = spec.grid()?;
    let lattice = IntervalLattice::for_grid(grid)?;
    random_steps(grid, k.family_size, k.family_radius, seed)
        .into_iter()
        .map(|f| {
            let n = morrey_norm(&f, params, &lattice)?;
            Ok(if n > 0.0 { f.scaled(Complex64::new(1.0 / n, 0.0)) } else { f })
        })
        .collect()
}

fn fk(cfg: &ExperimentConfig, spec: &GridSpec, symbol: &SymbolSpec, k: &Knobs, params: &MorreyParams) -> Result<FamilyReport> {
    let grid = spec.grid()?;
    let b = build_symbol(symbol, &CorpusParams::from_settings(&cfg.settings)?, cfg.seed, grid);
    let fam = family(spec, k, params, cfg.seed)?;
    fk_report(&cfg.curve.build()?, &b, &fam, params, &k.z_list, &k.alpha_list)
}

fn witness(cfg: &ExperimentConfig, spec: &GridSpec, symbol: &SymbolSpec, k: &Knobs, params: &MorreyParams) -> Result<Witness> {
    let grid = spec.grid()?;
    let b = build_symbol(symbol, &CorpusParams::from_settings(&cfg.settings)?, cfg.seed, grid);
    noncompact_witness(&cfg.curve.build()?, &b, k.scenario, params, k.witness_count, &k.witness)
}

fn profile_rows(t: &mut Table, label: &str, params: &MorreyParams, r: &FamilyReport) {
    let head = |kind: &str| vec![label.to_string(), num(params.p), num(params.lambda), kind.to_string()];
    let mut row = head("bound");
    row.extend([String::new(), num(r.bound)]);
    t.push(row);
    for (z, v) in &r.equicontinuity {
        let mut row = head("equicontinuity");
        row.extend([num(*z), num(*v)]);
        t.push(row);
    }
    for (a, v) in &r.tail {
        let mut row = head("tail");
        row.extend([num(*a), num(*v)]);
        t.push(row);
    }
}

/// Fréchet–Kolmogorov profiles for CMO symbols and separated witness
/// families for the others.
pub fn run_compactness(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let k = Knobs::read(cfg)?;
    let spec = cfg.grid()?;
    let corpus = parse_corpus(&cfg.settings)?;
    let mut report = super::new_report(cfg);
    report.note("uniformity over the family is sampled on the finite z and alpha lists");
    let mut profiles = Table::new("profiles", &["symbol", "p", "lambda", "condition", "parameter", "value"]);
    let mut wtable = Table::new("witness", &["symbol", "p", "lambda", "scenario", "j", "l", "m", "distance", "unit", "fitted_bound"]);
    let mut trunc = Table::new("truncation", &["symbol", "epsilon", "radius", "bmo_distance"]);

    for symbol in &corpus {
        let label = symbol.label();
        for (pi, params) in cfg.params.iter().enumerate() {
            let tag = format!("{label} p={} lambda={}", params.p, params.lambda);
            let target = -(params.p - 1.0 + params.lambda) / params.p;
            if symbol.kind.is_cmo() {
                let r = fk(cfg, &spec, symbol, &k, params)?;
                profile_rows(&mut profiles, &label, params, &r);
                let mut csv = Vec::new();
                r.write_csv(&mut csv)?;
                report.artifact(
                    &format!("family_{}_p{}_l{}.csv", label.replace('*', "x"), params.p, params.lambda),
                    String::from_utf8(csv).expect("csv is utf-8"),
                );
                if r.bound == 0.0 {
                    report.check(format!("{tag}: zero operator"), true, "all commutator images vanish");
                    continue;
                }
                let refined = if cfg.refine { Some(fk(cfg, &spec.refined(), symbol, &k, params)?) } else { None };
                let decay = r.equicontinuity_decay().unwrap_or(f64::NAN);
                let slope = r.tail_slope().unwrap_or(f64::NAN);
                report.constant(FittedConstant::new(
                    format!("equicontinuity decay {tag}"),
                    decay,
                    refined.as_ref().and_then(|x| x.equicontinuity_decay()),
                    cfg.refine_tol,
                ));
                report.constant(FittedConstant::new(
                    format!("tail slope {tag}"),
                    slope,
                    refined.as_ref().and_then(|x| x.tail_slope()),
                    cfg.refine_tol,
                ));
                report.check(
                    format!("{tag}: uniformly bounded"),
                    r.bound.is_finite(),
                    format!("sup norm {:.4e}", r.bound),
                );
                report.check(
                    format!("{tag}: equicontinuity decays"),
                    decay <= k.decay_max,
                    format!("smallest-z / largest-z modulus {decay:.4} (limit {})", k.decay_max),
                );
                report.check(
                    format!("{tag}: tail slope"),
                    (slope - target).abs() <= k.slope_tol,
                    format!("{slope:.4} vs {target:.4} +- {}", k.slope_tol),
                );
            } else {
                let w = witness(cfg, &spec, symbol, &k, params)?;
                for row in &w.rows {
                    wtable.push(vec![
                        label.clone(),
                        num(params.p),
                        num(params.lambda),
                        w.scenario.label().to_string(),
                        row.j.to_string(),
                        row.l.to_string(),
                        row.m.to_string(),
                        num(row.distance),
                        num(row.unit),
                        num(row.fitted_bound),
                    ]);
                }
                let refined = if cfg.refine { Some(witness(cfg, &spec.refined(), symbol, &k, params)?) } else { None };
                report.constant(FittedConstant::new(
                    format!("witness bound {tag}"),
                    w.fitted_bound,
                    refined.as_ref().map(|x| x.fitted_bound),
                    cfg.refine_tol,
                ));
                report.check(
                    format!("{tag}: witness images separated"),
                    w.fitted_bound >= k.min_fraction,
                    format!(
                        "{} functions, min distance / min norm {:.4} (limit {})",
                        w.family.len(),
                        w.fitted_bound,
                        k.min_fraction
                    ),
                );
                // the same family through the Fréchet–Kolmogorov profiles
                let grid = spec.grid()?;
                let b = build_symbol(symbol, &CorpusParams::from_settings(&cfg.settings)?, cfg.seed, grid);
                let fam: Vec<GridFunction> = w.family.iter().map(|lb| lb.f.clone()).collect();
                let r = fk_report(&cfg.curve.build()?, &b, &fam, params, &k.z_list, &k.alpha_list)?;
                profile_rows(&mut profiles, &format!("{label} (witness family)"), params, &r);
                let decay = r.equicontinuity_decay().unwrap_or(f64::NAN);
                report.check(
                    format!("{tag}: witness family shows no equicontinuity decay"),
                    !(decay <= k.decay_max),
                    format!("smallest-z / largest-z modulus {decay:.4}"),
                );
                for &eps in if pi == 0 { &k.epsilons[..] } else { &[] } {
                    let t = smooth_truncate_symbol(&b, eps, Some(k.truncation_radius))?;
                    trunc.push(vec![label.clone(), num(eps), num(t.radius), num(t.bmo_distance)]);
                }
            }
        }
    }
    report.tables.push(profiles);
    if !wtable.rows.is_empty() {
        report.tables.push(wtable);
    }
    if !trunc.rows.is_empty() {
        report.tables.push(trunc);
    }
    Ok(report)
}
