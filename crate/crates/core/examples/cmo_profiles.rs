//! The three vanishing-oscillation profiles for a CMO symbol and two BMO
//! symbols that are not in CMO.

use czlab::spaces::{cmo_profile, CmoCondition, IntervalLattice};
use czlab::{Grid, GridFunction};

fn main() -> czlab::Result<()> {
    let grid = Grid::covering(-32.0, 32.0, 1.0 / 32.0)?;
    let lattice = IntervalLattice::for_grid(grid)?;
    let symbols = [
        ("smooth bump", GridFunction::from_real_fn(grid, |x| if x.abs() < 1.0 { (1.0 - 1.0 / (1.0 - x * x)).exp() } else { 0.0 })),
        ("heaviside", GridFunction::from_real_fn(grid, |x| if x > 0.0 { 1.0 } else { 0.0 })),
        ("clipped log", GridFunction::from_real_fn(grid, |x| x.abs().max(1e-3).ln())),
    ];
    for (name, b) in &symbols {
        let profile = cmo_profile(b, &lattice)?;
        println!("{name}");
        for (condition, what) in [
            (CmoCondition::SmallScale, "sup over |I| < delta"),
            (CmoCondition::LargeScale, "sup over |I| > R"),
            (CmoCondition::FarField, "sup over I away from I(0,R)"),
        ] {
            let curve = profile.curve(condition);
            let shown: Vec<String> = curve.iter().step_by(2).map(|(t, v)| format!("{t}:{v:.3}")).collect();
            println!("  ({}) {what:<28} {}", condition.label(), shown.join("  "));
        }
    }
    Ok(())
}
