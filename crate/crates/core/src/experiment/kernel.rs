use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curve::{admissible_triples, verify_kernel_estimates, KernelFit};
use crate::error::Result;

use super::config::ExperimentConfig;
use super::report::{num, relative_change, ExperimentReport, FittedConstant, Table};

/// Fits the kernel size and smoothness constants on random admissible triples,
/// then again on twice as many.
pub fn run_kernelcheck(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = &cfg.settings;
    let samples: usize = s.parse("kernelcheck", "samples")?;
    let extent: f64 = s.parse("kernelcheck", "extent")?;
    let tol: f64 = s.parse("kernelcheck", "stability_tol")?;
    let curve = cfg.curve.build()?;
    let mut report = super::new_report(cfg);

    let fit = |count: usize| -> KernelFit {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        verify_kernel_estimates(&curve, &admissible_triples(&mut rng, count, extent))
    };
    let base = fit(samples);
    let doubled = fit(2 * samples);

    let mut t = Table::new("kernel_fit", &["samples", "c_size", "c_smooth", "skipped_size", "skipped_smooth"]);
    for (n, f) in [(samples, base), (2 * samples, doubled)] {
        t.push(vec![
            n.to_string(),
            num(f.c_size),
            num(f.c_smooth),
            f.skipped_size.to_string(),
            f.skipped_smooth.to_string(),
        ]);
    }
    report.tables.push(t);
    report.note("refined values come from doubling the number of sampled triples");
    report.constant(FittedConstant::new("c_size", base.c_size, Some(doubled.c_size), tol));
    report.constant(FittedConstant::new("c_smooth", base.c_smooth, Some(doubled.c_smooth), tol));

    let lip = curve.lip_const();
    let upper = 1.0 / PI;
    let lower = 1.0 / (PI * (1.0 + lip * lip).sqrt());
    if curve.is_flat() {
        report.check(
            "c_size equals 1/pi",
            (base.c_size - upper).abs() <= 1e-12,
            format!("c_size = {:.15}", base.c_size),
        );
    } else {
        report.check(
            "c_size within [1/(pi sqrt(1+L^2)), 1/pi]",
            base.c_size >= lower * (1.0 - 1e-12) && base.c_size <= upper * (1.0 + 1e-12),
            format!("c_size = {:.6}, range [{lower:.6}, {upper:.6}]", base.c_size),
        );
    }
    let change = relative_change(base.c_smooth, doubled.c_smooth);
    report.check(
        "c_smooth stable under sample doubling",
        base.c_smooth.is_finite() && change <= tol,
        format!("{:.6} -> {:.6} ({:.1}%)", base.c_smooth, doubled.c_smooth, 100.0 * change),
    );
    Ok(report)
}
