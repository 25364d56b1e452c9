//! Hardy-Littlewood maximal function, the maximal truncated Cauchy operator
//! and the commutator with a BMO symbol, sampled along a line.

use czlab::operators::{commutator, hl_maximal, maximal_truncated, pv_cauchy, TruncationLattice};
use czlab::{Grid, GridFunction, Interval, LipschitzCurve};

fn main() -> czlab::Result<()> {
    let grid = Grid::covering(-8.0, 8.0, 1.0 / 64.0)?;
    let curve = LipschitzCurve::sawtooth(0.5, 1.0, 16.0)?;
    let f = GridFunction::indicator(grid, &Interval::new(0.0, 1.0)?);
    let b = GridFunction::from_real_fn(grid, |x| x.abs().max(1e-3).ln());
    let radii = TruncationLattice::geometric(grid.step, 8.0, 2.0)?;
    println!("{:>7} {:>9} {:>11} {:>11} {:>11}", "x", "M f", "|C f|", "C_* f", "|[b,C] f|");
    for x in [-6.0, -3.0, -1.5, -0.5, 0.0, 0.5, 1.5, 3.0, 6.0] {
        let x = grid.midpoint(grid.nearest_cell(x));
        println!(
            "{x:>7.3} {:>9.4} {:>11.4} {:>11.4} {:>11.4}",
            hl_maximal(&f, x),
            pv_cauchy(&curve, &f, x).norm(),
            maximal_truncated(&curve, &f, x, &radii)?,
            commutator(&curve, &b, &f, x)?.norm()
        );
    }
    Ok(())
}
