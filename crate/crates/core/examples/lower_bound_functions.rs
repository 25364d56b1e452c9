//! Test functions adapted to a Heaviside symbol and the annulus estimates of
//! their commutator images.

use czlab::constructions::{annulus_bounds, fit_annulus_constants, lower_bound_testfn, required_separation};
use czlab::spaces::{morrey_norm, IntervalLattice, MorreyParams};
use czlab::{Grid, GridFunction, Interval, LipschitzCurve};

fn main() -> czlab::Result<()> {
    let grid = Grid::covering(-64.0, 64.0, 1.0 / 64.0)?;
    let curve = LipschitzCurve::flat();
    let b = GridFunction::from_real_fn(grid, |x| if x > 0.0 { 1.0 } else { 0.0 });
    let params = MorreyParams::new(2.0, 0.5)?;
    let lattice = IntervalLattice::for_grid(grid)?;
    let delta = 0.1;
    for r in [0.0625, 0.125] {
        let lb = lower_bound_testfn(&b, &Interval::new(0.0, r)?, &params)?;
        println!(
            "I(0, {r}): a = {:+.3}, integral {:.1e}, Morrey norm {:.4}",
            lb.a,
            lb.f.integral().norm(),
            morrey_norm(&lb.f, &params, &lattice)?
        );
        let rows = (4..=8)
            .map(|k| annulus_bounds(&curve, &b, &lb, k, &params))
            .collect::<czlab::Result<Vec<_>>>()?;
        for row in &rows {
            println!(
                "  k={} lower/unit {:.4e}  upper/unit {:.4e}",
                row.k,
                row.lower_lhs / row.unit,
                row.upper_lhs / row.unit
            );
        }
        let (c1, c2) = fit_annulus_constants(&rows, delta, params.p);
        println!("  C1 = {c1:.4}, C2 = {c2:.4e}, A2 = {}", required_separation(c1, c2, delta, params.p, 16.0));
    }
    Ok(())
}
