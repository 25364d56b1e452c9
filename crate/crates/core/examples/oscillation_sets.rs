//! Sets E ⊂ I and F ⊂ Ĩ on which a step symbol is separated by its local
//! mean oscillation.

use czlab::constructions::oscillation_sets;
use czlab::{Grid, GridFunction, Interval};

fn main() -> czlab::Result<()> {
    let grid = Grid::covering(-8.0, 8.0, 1.0 / 16.0)?;
    let b = GridFunction::from_real_fn(grid, |x| match x {
        x if x < -0.5 => 0.0,
        x if x < 0.25 => 3.0,
        x if x < 2.0 => -1.0,
        _ => 2.0,
    });
    for iv in [Interval::new(0.0, 0.5)?, Interval::new(-0.5, 1.0)?, Interval::new(-1.0, 1.0)?] {
        let sets = oscillation_sets(&b, &iv)?;
        sets.verify(&b)?;
        let e: Vec<f64> = sets.e.midpoints().collect();
        let f: Vec<f64> = sets.f.midpoints().collect();
        println!(
            "I = {:?}\n  alpha {:.2}, omega {:.2}, sign {:+}\n  |E| = {} on [{:.3}, {:.3}], |F| = {} on [{:.3}, {:.3}]",
            iv,
            sets.alpha,
            sets.omega,
            sets.sign,
            sets.e.measure(),
            e.iter().cloned().fold(f64::INFINITY, f64::min),
            e.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            sets.f.measure(),
            f.iter().cloned().fold(f64::INFINITY, f64::min),
            f.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
    }
    Ok(())
}
