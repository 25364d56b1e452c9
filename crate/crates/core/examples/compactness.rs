//! Fréchet–Kolmogorov profiles of commutator images for a smooth compactly
//! supported symbol, and a separated witness family for a jump symbol.

use czlab::compactness::{fk_report, smooth_truncate_symbol};
use czlab::constructions::{noncompact_witness, Scenario, WitnessOptions};
use czlab::spaces::{morrey_norm, IntervalLattice, MorreyParams};
use czlab::{Grid, GridFunction, LipschitzCurve};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> czlab::Result<()> {
    let grid = Grid::covering(-64.0, 64.0, 1.0 / 64.0)?;
    let lattice = IntervalLattice::for_grid(grid)?;
    let curve = LipschitzCurve::flat();
    let params = MorreyParams::new(2.0, 0.5)?;

    // unit-norm random steps on (-2, 2)
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let family = (0..8)
        .map(|_| {
            let levels: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = GridFunction::from_real_fn(grid, |x| {
                if x.abs() < 2.0 { levels[((x + 2.0) * 2.0) as usize % 8] } else { 0.0 }
            });
            let n = morrey_norm(&f, &params, &lattice)?;
            Ok(f.scaled(Complex64::new(1.0 / n, 0.0)))
        })
        .collect::<czlab::Result<Vec<_>>>()?;

    let bump = GridFunction::from_real_fn(grid, |x| if x.abs() < 1.0 { (1.0 - 1.0 / (1.0 - x * x)).exp() } else { 0.0 });
    let r = fk_report(&curve, &bump, &family, &params, &[0.16, 0.08, 0.04, 0.02], &[4.0, 8.0, 16.0, 32.0])?;
    println!("smooth bump: sup norm {:.4}", r.bound);
    for (z, v) in &r.equicontinuity {
        println!("  translation z={z:.4}: {v:.4e}");
    }
    for (a, v) in &r.tail {
        println!("  tail alpha={a}: {v:.4e}");
    }
    println!(
        "  tail slope {:.3} (expected {:.3})",
        r.tail_slope().unwrap_or(f64::NAN),
        -(params.p - 1.0 + params.lambda) / params.p
    );

    let jump = GridFunction::from_real_fn(grid, |x| if x > 0.0 { 1.0 } else { 0.0 });
    let w = noncompact_witness(&curve, &jump, Scenario::Shrinking, &params, 4, &WitnessOptions::default())?;
    println!("heaviside witness, {} functions:", w.family.len());
    for row in &w.rows {
        println!("  pair ({}, {}): distance {:.4}, relative {:.4}", row.l, row.m, row.distance, row.distance / row.unit);
    }
    println!("  min distance / min image norm {:.4}", w.fitted_bound);

    println!("smooth truncations of the heaviside symbol:");
    for eps in [0.5, 0.25, 0.125] {
        let t = smooth_truncate_symbol(&jump, eps, Some(8.0))?;
        println!("  eps={eps}: BMO distance {:.4}", t.bmo_distance);
    }
    Ok(())
}
