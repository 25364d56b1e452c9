//! Iterated factorization of a single atom: per-round contraction and the
//! reconstruction identity.

use czlab::factorization::{factorize, half_and_half_atom, AtomicDecomposition, ATOM_CELLS};
use czlab::spaces::MorreyParams;
use czlab::{Interval, LipschitzCurve};

fn main() -> czlab::Result<()> {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1024);
    let rounds: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(4);
    let curve = LipschitzCurve::flat();
    let params = MorreyParams::new(2.0, 0.5)?;
    let input = AtomicDecomposition::single(half_and_half_atom(Interval::new(0.0, 1.0)?, ATOM_CELLS));

    let started = std::time::Instant::now();
    let f = factorize(&curve, &input, n, rounds, &params)?;
    println!("N = {n}, {rounds} rounds in {:.1?}", started.elapsed());
    println!("round  atoms_in     mass_in      kappa   cancellation  chain_err  pair_mass");
    for r in &f.rounds {
        println!(
            "{:>5} {:>9} {:>11.4e} {:>10.4e} {:>12.2e} {:>10.2e} {:>10.4e}",
            r.round, r.atoms_in, r.mass_in, r.kappa, r.max_cancellation, r.max_chain_error, r.pair_mass
        );
    }
    println!("final residual mass {:.4e}", f.final_mass);
    let points = f.reconstruction_points(&input, 512);
    println!(
        "reconstruction error {:.2e} over {} points",
        f.reconstruction_error(&curve, &input, &points),
        points.len()
    );
    Ok(())
}
