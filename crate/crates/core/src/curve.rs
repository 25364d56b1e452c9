//! Lipschitz graphs `Γ = {(t, A(t))}` and the Cauchy kernel along them.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear graph function given by its knots, extended linearly
/// beyond the first and last knot with the boundary slopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCurve {
    knots: Vec<(f64, f64)>,
    lip_const: f64,
}

impl LipschitzCurve {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Curve("need at least two knots".into()));
        }
        if knots.iter().any(|(t, a)| !t.is_finite() || !a.is_finite()) {
            return Err(Error::Curve("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Curve("knot abscissae must be strictly increasing".into()));
        }
        let lip_const = knots
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max);
        Ok(Self { knots, lip_const })
    }

    /// `A ≡ 0`.
    pub fn flat() -> Self {
        Self::new(vec![(-1.0, 0.0), (1.0, 0.0)]).expect("valid knots")
    }

    /// Zig-zag with slopes `±slope` and the given period, covering `[-extent, extent]`.
    pub fn sawtooth(slope: f64, period: f64, extent: f64) -> Result<Self> {
        if !(period > 0.0) || !(extent > 0.0) {
            return Err(Error::Curve("sawtooth needs positive period and extent".into()));
        }
        let half = 0.5 * period;
        let n = (2.0 * extent / half).ceil() as usize;
        let knots = (0..=n)
            .map(|k| {
                let t = -extent + k as f64 * half;
                let a = if k % 2 == 0 { 0.0 } else { slope * half };
                (t, a)
            })
            .collect();
        Self::new(knots)
    }

    /// `amplitude · exp(-t²/width²)` sampled on `samples` knots over `[-4w, 4w]`.
    pub fn smooth_bump(amplitude: f64, width: f64, samples: usize) -> Result<Self> {
        if !(width > 0.0) || samples < 2 {
            return Err(Error::Curve("bump needs positive width and >= 2 knots".into()));
        }
        let lo = -4.0 * width;
        let dt = 8.0 * width / (samples - 1) as f64;
        let knots = (0..samples)
            .map(|k| {
                let t = lo + k as f64 * dt;
                (t, amplitude * (-(t / width).powi(2)).exp())
            })
            .collect();
        Self::new(knots)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// `max |A'|` over the knot segments.
    pub fn lip_const(&self) -> f64 {
        self.lip_const
    }

    pub fn is_flat(&self) -> bool {
        self.knots.iter().all(|&(_, a)| a == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        let seg = match k.binary_search_by(|probe| probe.0.total_cmp(&t)) {
            Ok(i) => return k[i].1,
            Err(0) => 0,
            Err(i) if i >= k.len() => k.len() - 2,
            Err(i) => i - 1,
        };
        let (t0, a0) = k[seg];
        let (t1, a1) = k[seg + 1];
        a0 + (a1 - a0) * (t - t0) / (t1 - t0)
    }

    /// `C_Γ(x, y) = 1 / (πi (y - x + i[A(y) - A(x)]))`.
    pub fn kernel(&self, x: f64, y: f64) -> Result<Complex64> {
        if x == y {
            return Err(Error::Singularity(x));
        }
        Ok(kernel_from_heights(x, self.eval(x), y, self.eval(y)))
    }

    /// Writes `t,A` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "A"])?;
        for (t, a) in &self.knots {
            w.write_record([format!("{t:.16e}"), format!("{a:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `t,A` rows; the Lipschitz constant is recomputed and, when
    /// `declared_lip` is given, must not exceed it.
    pub fn read_csv<R: Read>(reader: R, declared_lip: Option<f64>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut knots = Vec::new();
        for rec in r.deserialize() {
            let (t, a): (f64, f64) = rec?;
            knots.push((t, a));
        }
        let curve = Self::new(knots)?;
        if let Some(declared) = declared_lip {
            if curve.lip_const > declared * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::Curve(format!(
                    "declared Lipschitz constant {declared} but knots give {}",
                    curve.lip_const
                )));
            }
        }
        Ok(curve)
    }
}

/// Kernel evaluation with precomputed heights `A(x)`, `A(y)`; `x != y` assumed.
#[inline]
pub fn kernel_from_heights(x: f64, ax: f64, y: f64, ay: f64) -> Complex64 {
    // 1/(πi·w) = -i/(π·w) = -i·conj(w)/(π|w|²)
    let dr = y - x;
    let di = ay - ax;
    let s = PI * (dr * dr + di * di);
    Complex64::new(-di / s, -dr / s)
}

/// Smallest constants making the size and smoothness estimates hold on a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelFit {
    /// `max |K(x,y)|·|x-y|`.
    pub c_size: f64,
    /// `max (|K(x,y)-K(x,z)| + |K(y,x)-K(z,x)|)·|x-y|²/|y-z|` over admissible triples.
    pub c_smooth: f64,
    /// Triples with `x == y`, unusable for either estimate.
    pub skipped_size: usize,
    /// Triples failing `|x-y| > 2|y-z|`.
    pub skipped_smooth: usize,
}

pub fn verify_kernel_estimates(curve: &LipschitzCurve, samples: &[(f64, f64, f64)]) -> KernelFit {
    let mut fit = KernelFit {
        c_size: 0.0,
        c_smooth: 0.0,
        skipped_size: 0,
        skipped_smooth: 0,
    };
    for &(x, y, z) in samples {
        let dxy = (x - y).abs();
        if !(dxy > 0.0) {
            fit.skipped_size += 1;
            fit.skipped_smooth += 1;
            continue;
        }
        let (ax, ay, az) = (curve.eval(x), curve.eval(y), curve.eval(z));
        let kxy = kernel_from_heights(x, ax, y, ay);
        fit.c_size = fit.c_size.max(kxy.norm() * dxy);

        let dyz = (y - z).abs();
        if !(dxy > 2.0 * dyz) {
            fit.skipped_smooth += 1;
            continue;
        }
        if dyz == 0.0 {
            continue;
        }
        let kxz = kernel_from_heights(x, ax, z, az);
        let kyx = kernel_from_heights(y, ay, x, ax);
        let kzx = kernel_from_heights(z, az, x, ax);
        let lhs = (kxy - kxz).norm() + (kyx - kzx).norm();
        fit.c_smooth = fit.c_smooth.max(lhs * dxy * dxy / dyz);
    }
    fit
}

/// Random triples with `|x - y| > 2|y - z|`, all coordinates in `[-extent, extent]`.
pub fn admissible_triples<R: Rng>(rng: &mut R, count: usize, extent: f64) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = rng.gen_range(-extent..extent);
        let y = rng.gen_range(-extent..extent);
        let d = (x - y).abs();
        if d < 1e-9 {
            continue;
        }
        let z = y + rng.gen_range(-0.499..0.499) * d;
        out.push((x, y, z));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eval_examples() {
        let flat = LipschitzCurve::new(vec![(0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!(flat.eval(7.0), 0.0);
        let diag = LipschitzCurve::new(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(diag.eval(0.5), 0.5);
        assert_eq!(diag.eval(2.0), 2.0);
        assert_eq!(diag.eval(-3.0), -3.0);
    }

    #[test]
    fn kernel_examples() {
        let flat = LipschitzCurve::flat();
        let k = flat.kernel(0.0, 1.0).unwrap();
        assert!((k - Complex64::new(0.0, -1.0 / PI)).norm() < 1e-15);
        let k = flat.kernel(0.0, -1.0).unwrap();
        assert!((k - Complex64::new(0.0, 1.0 / PI)).norm() < 1e-15);
        assert!(matches!(flat.kernel(2.0, 2.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn kernel_size_bound_on_curved_graph() {
        let c = LipschitzCurve::sawtooth(0.5, 1.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-5.0..5.0);
            let y: f64 = rng.gen_range(-5.0..5.0);
            let k = c.kernel(x, y).unwrap();
            let bound = 1.0 / (PI * (x - y).abs());
            assert!(k.norm() <= bound * (1.0 + 1e-12));
            if c.eval(x) == c.eval(y) {
                assert!((k.norm() - bound).abs() < 1e-12 * bound);
            }
        }
    }

    #[test]
    fn flat_kernel_is_antisymmetric() {
        let flat = LipschitzCurve::flat();
        for (x, y) in [(0.1, 2.0), (-3.0, 4.5), (1e-3, -1e-3)] {
            assert_eq!(flat.kernel(x, y).unwrap(), -flat.kernel(y, x).unwrap());
        }
    }

    #[test]
    fn lipschitz_invariant_on_knot_pairs() {
        let c = LipschitzCurve::smooth_bump(0.7, 1.3, 97).unwrap();
        let k = c.knots();
        for a in k {
            for b in k {
                if a.0 != b.0 {
                    assert!((a.1 - b.1).abs() <= c.lip_const() * (a.0 - b.0).abs() * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn sawtooth_lip_const() {
        let c = LipschitzCurve::sawtooth(0.5, 2.0, 8.0).unwrap();
        assert!((c.lip_const() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn flat_size_constant_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let triples = admissible_triples(&mut rng, 2000, 10.0);
        let fit = verify_kernel_estimates(&LipschitzCurve::flat(), &triples);
        assert!((fit.c_size - 1.0 / PI).abs() < 1e-12);
        assert_eq!(fit.skipped_size, 0);
    }

    #[test]
    fn degenerate_smoothness_sample_contributes_zero() {
        let fit = verify_kernel_estimates(&LipschitzCurve::flat(), &[(0.0, 1.0, 1.0)]);
        assert_eq!(fit.c_smooth, 0.0);
        let fit = verify_kernel_estimates(&LipschitzCurve::flat(), &[(1.0, 1.0, 1.0), (0.0, 1.0, 3.0)]);
        assert_eq!(fit.skipped_size, 1);
        assert_eq!(fit.skipped_smooth, 2);
    }

    #[test]
    fn fitted_constants_are_monotone_in_samples() {
        let c = LipschitzCurve::sawtooth(0.5, 1.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let all = admissible_triples(&mut rng, 4000, 5.0);
        let half = verify_kernel_estimates(&c, &all[..2000]);
        let full = verify_kernel_estimates(&c, &all);
        assert!(full.c_size >= half.c_size);
        assert!(full.c_smooth >= half.c_smooth);
    }

    #[test]
    fn curve_csv_validates_declared_lip() {
        let c = LipschitzCurve::sawtooth(0.5, 1.0, 2.0).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = LipschitzCurve::read_csv(buf.as_slice(), Some(0.5)).unwrap();
        assert_eq!(back.knots(), c.knots());
        assert!(LipschitzCurve::read_csv(buf.as_slice(), Some(0.25)).is_err());
    }
}
