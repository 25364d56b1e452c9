use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::factorization::{factorize, half_and_half_atom, make_pair, AtomicDecomposition, Factorization};
use crate::grid::Interval;

use super::config::ExperimentConfig;
use super::report::{num, ExperimentReport, FittedConstant, Table};

fn input(cells: usize) -> Result<AtomicDecomposition> {
    Ok(AtomicDecomposition::single(half_and_half_atom(Interval::new(0.0, 1.0)?, cells)))
}

/// Iterated factorization of a single atom, doubling `N` until every round
/// contracts by the configured factor.
pub fn run_factorization(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = &cfg.settings;
    let n0: u64 = s.parse("factorization", "n")?;
    let rounds: usize = s.parse("factorization", "rounds")?;
    let max_n: u64 = s.parse("factorization", "max_n")?;
    let cells: usize = s.parse("factorization", "atom_cells")?;
    let kappa_max: f64 = s.parse("factorization", "kappa_max")?;
    let homogeneity_n: Vec<u64> = s.list("factorization", "homogeneity_n")?;
    let sweep: bool = s.flag("factorization", "sweep")?;
    if cells < 2 || cells % 2 != 0 {
        return Err(Error::Config(format!("atom_cells must be even and at least 2, got {cells}")));
    }
    let curve = cfg.curve.build()?;
    let params = cfg.params[0];
    let decomp = input(cells)?;
    let mut report = super::new_report(cfg);

    let mut inputs = Table::new("input", &["coefficient", "center", "radius", "cells"]);
    for (l, a) in &decomp.terms {
        inputs.push(vec![num(l.norm()), num(a.center()), num(a.radius()), a.f().len().to_string()]);
    }
    report.tables.push(inputs);
    if rounds == 0 {
        report.note("zero rounds requested: the report holds the input decomposition only");
        return Ok(report);
    }

    let mut trace = Table::new("escalation", &["N", "status", "max_kappa"]);
    let mut n = n0;
    let outcome: Option<Factorization> = loop {
        match factorize(&curve, &decomp, n, rounds, &params) {
            Ok(f) => {
                let worst = f.rounds.iter().map(|r| r.kappa).fold(0.0, f64::max);
                let ok = worst < kappa_max;
                trace.push(vec![n.to_string(), if ok { "ok" } else { "slow" }.into(), num(worst)]);
                if ok {
                    break Some(f);
                }
            }
            Err(Error::NoContraction { kappa, .. }) => {
                trace.push(vec![n.to_string(), "no-contraction".into(), num(kappa)]);
            }
            Err(e) => return Err(e),
        }
        if n.saturating_mul(2) > max_n {
            break None;
        }
        n *= 2;
    };
    report.tables.push(trace);
    let Some(f) = outcome else {
        report.check(
            "contraction",
            false,
            format!("no N up to {max_n} gives kappa < {kappa_max} in every round"),
        );
        return Ok(report);
    };

    let mut t = Table::new(
        "rounds",
        &[
            "round",
            "atoms_in",
            "mass_in",
            "kappa",
            "cancellation",
            "chain_error",
            "fitted_c",
            "pair_mass",
        ],
    );
    for r in &f.rounds {
        t.push(vec![
            r.round.to_string(),
            r.atoms_in.to_string(),
            num(r.mass_in),
            num(r.kappa),
            num(r.max_cancellation),
            num(r.max_chain_error),
            num(r.max_fitted_c),
            num(r.pair_mass),
        ]);
    }
    report.tables.push(t);
    let mut json = Vec::new();
    f.write_json(&mut json)?;
    json.push(b'\n');
    report.artifact("factorization.json", String::from_utf8(json).expect("json is utf-8"));

    let worst = f.rounds.iter().map(|r| r.kappa).fold(0.0, f64::max);
    report.check(
        "per-round contraction",
        worst < kappa_max,
        format!("N = {}, largest kappa {worst:.4e} (limit {kappa_max})", f.n),
    );
    let cancel = f.rounds.iter().map(|r| r.max_cancellation).fold(0.0, f64::max);
    report.check("residual cancellation", cancel <= 1e-10, format!("largest relative mean {cancel:.2e}"));
    let points = f.reconstruction_points(&decomp, 512);
    let recon = f.reconstruction_error(&curve, &decomp, &points);
    report.check(
        "reconstruction identity",
        recon <= 1e-8,
        format!("relative error {recon:.2e} over {} points", points.len()),
    );

    let refined = if cfg.refine {
        Some(factorize(&curve, &input(2 * cells)?, f.n, 1, &params)?.rounds[0].kappa)
    } else {
        None
    };
    report.note("refined kappa uses an input atom sampled on twice as many cells");
    report.constant(FittedConstant::new("kappa_round1", f.rounds[0].kappa, refined, cfg.refine_tol));
    let fitted_c = f.rounds.iter().map(|r| r.max_fitted_c).fold(0.0, f64::max);
    report.constant(FittedConstant::new("residual_c", fitted_c, None, cfg.refine_tol));

    let atom = &decomp.terms[0].1;
    let mut h = Table::new("homogeneity", &["N", "n_abs_cg"]);
    let mut smallest = f64::INFINITY;
    let mut last = None;
    for &m in &homogeneity_n {
        let pair = make_pair(&curve, atom, m)?;
        let v = m as f64 * pair.cg_x0.norm();
        smallest = smallest.min(v);
        last = Some(v);
        h.push(vec![m.to_string(), num(v)]);
    }
    report.tables.push(h);
    if let Some(v) = last {
        report.check(
            "homogeneity lower bound",
            smallest >= 0.3,
            format!("min N|C g(x0)| = {smallest:.4}"),
        );
        if curve.is_flat() {
            let target = 2.0 / PI;
            report.check(
                "homogeneity limit 2/pi",
                (v - target).abs() <= 0.02 * target,
                format!("{v:.5} at the largest N vs {target:.5}"),
            );
        }
    }

    if sweep {
        let k1 = factorize(&curve, &decomp, f.n, 1, &params)?.rounds[0].kappa;
        let k2 = factorize(&curve, &decomp, 2 * f.n, 1, &params)?.rounds[0].kappa;
        let mut sw = Table::new("sweep", &["N", "kappa"]);
        sw.push(vec![f.n.to_string(), num(k1)]);
        sw.push(vec![(2 * f.n).to_string(), num(k2)]);
        report.tables.push(sw);
        let ratio = k2 / k1;
        report.check(
            "kappa(2N)/kappa(N) in [0.4, 0.8]",
            (0.4..=0.8).contains(&ratio),
            format!("{ratio:.4}"),
        );
    }
    Ok(report)
}
