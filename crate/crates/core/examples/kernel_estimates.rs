//! Fitted size and smoothness constants of the Cauchy kernel on a few curves.

use std::f64::consts::PI;

use czlab::curve::{admissible_triples, verify_kernel_estimates};
use czlab::LipschitzCurve;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> czlab::Result<()> {
    let curves = [
        ("flat", LipschitzCurve::flat()),
        ("sawtooth 0.5", LipschitzCurve::sawtooth(0.5, 1.0, 16.0)?),
        ("sawtooth 1", LipschitzCurve::sawtooth(1.0, 1.0, 16.0)?),
        ("bump", LipschitzCurve::smooth_bump(0.5, 1.0, 512)?),
    ];
    println!("{:<14} {:>6} {:>10} {:>10} {:>10} {:>10}", "curve", "lip", "c_size", "lower", "c_smooth", "doubled");
    for (name, curve) in &curves {
        let l = curve.lip_const();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let samples = admissible_triples(&mut rng, 20_000, 8.0);
        let half = verify_kernel_estimates(curve, &samples[..10_000]);
        let full = verify_kernel_estimates(curve, &samples);
        println!(
            "{name:<14} {l:>6.3} {:>10.6} {:>10.6} {:>10.4} {:>10.4}",
            half.c_size,
            1.0 / (PI * (1.0 + l * l).sqrt()),
            half.c_smooth,
            full.c_smooth
        );
    }
    println!("c_size never exceeds 1/pi = {:.6}", 1.0 / PI);
    Ok(())
}
