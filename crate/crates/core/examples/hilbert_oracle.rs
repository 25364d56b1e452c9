//! Principal-value Cauchy integral on the flat line against the closed-form
//! Hilbert transform of an indicator.

use std::f64::consts::PI;

use czlab::operators::pv_cauchy;
use czlab::{Grid, GridFunction, Interval, LipschitzCurve};

fn main() -> czlab::Result<()> {
    let curve = LipschitzCurve::flat();
    let (a, b) = (-0.5, 1.0);
    println!("   step        x      numeric        exact      error");
    for step in [1e-2, 1e-3] {
        let grid = Grid::covering(-4.0, 4.0, step)?;
        let chi = GridFunction::indicator(grid, &Interval::from_endpoints(a, b)?);
        for x0 in [-2.0, -0.7, 0.25, 1.3, 3.0] {
            let x = grid.midpoint(grid.nearest_cell(x0));
            let value = pv_cauchy(&curve, &chi, x);
            // (i/π) ln|(x-a)/(x-b)|
            let exact = ((x - a) / (x - b)).abs().ln() / PI;
            println!(
                "{step:>7.0e} {x:>8.4} {:>12.8} {exact:>12.8} {:>10.2e}",
                value.im,
                (value.im - exact).abs().max(value.re.abs())
            );
        }
    }
    Ok(())
}
