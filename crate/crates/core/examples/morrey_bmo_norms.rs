//! Morrey norms of indicators and power functions, BMO norms of a few
//! symbols, and the block-space upper bound for a two-bump function.

use czlab::spaces::{
    bmo_norm, h_norm_upper, is_block, local_mean_oscillation, mean_oscillation, median, morrey_norm_argmax,
    IntervalLattice, MorreyParams,
};
use czlab::{Grid, GridFunction, Interval};

fn main() -> czlab::Result<()> {
    let grid = Grid::covering(-16.0, 16.0, 1.0 / 32.0)?;
    let lattice = IntervalLattice::for_grid(grid)?;

    println!("Morrey norms (radius normalization)");
    for (p, lambda) in [(2.0, 0.25), (2.0, 0.5), (3.0, 0.5), (1.5, 0.75)] {
        let params = MorreyParams::new(p, lambda)?;
        let chi = GridFunction::indicator(grid, &Interval::new(0.0, 1.0)?);
        // |x|^{-(1-λ)/p} saturates the norm at every scale
        let power = GridFunction::from_real_fn(grid, |x| x.abs().max(grid.step).powf(-(1.0 - lambda) / p));
        let (nc, at) = morrey_norm_argmax(&chi, &params, &lattice)?;
        let (np, _) = morrey_norm_argmax(&power, &params, &lattice)?;
        println!(
            "  p={p} lambda={lambda}: chi_I(0,1) {nc:.4} (closed form {:.4}, attained on {:?}), |x|^(-(1-l)/p) {np:.4}",
            2f64.powf(1.0 / p),
            at.interval(&grid)
        );
    }

    println!("BMO norms");
    let symbols = [
        ("sign(x)", GridFunction::from_real_fn(grid, |x| x.signum())),
        ("ln|x|", GridFunction::from_real_fn(grid, |x| x.abs().max(1e-3).ln())),
        ("ln|x| + 5", GridFunction::from_real_fn(grid, |x| x.abs().max(1e-3).ln() + 5.0)),
        ("exp(-x^2)", GridFunction::from_real_fn(grid, |x| (-x * x).exp())),
    ];
    for (name, b) in &symbols {
        println!("  {name:<10} {:.4}", bmo_norm(b, &lattice)?);
    }

    let b = &symbols[0].1;
    let iv = Interval::new(0.25, 1.0)?;
    println!(
        "sign(x) on {:?}: median {:.1}, mean oscillation {:.4}, omega_1/8 {:.4}",
        iv,
        median(b, &iv)?,
        mean_oscillation(b, &iv)?,
        local_mean_oscillation(b, &iv, 0.125)?
    );

    let params = MorreyParams::new(2.0, 0.5)?;
    let near = Interval::new(-2.0, 0.5)?;
    let far = Interval::new(6.0, 0.5)?;
    let two = &GridFunction::indicator(grid, &near) + &GridFunction::indicator(grid, &far);
    let scale = near.length().powf(-params.lambda / params.p_prime()) / near.length().sqrt();
    let block = GridFunction::indicator(grid, &near).map(|v| v * scale);
    println!("single bump is a block: {}", is_block(&block, &near, &params)?);
    println!("block-space upper bound of two unit bumps: {:.4}", h_norm_upper(&two, &params)?);
    Ok(())
}
