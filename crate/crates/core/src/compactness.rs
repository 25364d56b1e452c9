//! Fréchet–Kolmogorov profiles for families of commutator images, and the
//! smooth compactly supported approximation of a symbol.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{kernel_from_heights, LipschitzCurve};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Interval};
use crate::operators::{commutator_image, maximal_truncated, TruncationLattice};
use crate::spaces::{bmo_norm, morrey_norm, IntervalLattice, MorreyParams};

/// Uniform bound, translation modulus and tail profile of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    /// `sup_f ‖[b, C_Γ] f‖`.
    pub bound: f64,
    /// `(z, sup_f ‖F(· + z) - F‖)` with `z` snapped to whole cells.
    pub equicontinuity: Vec<(f64, f64)>,
    /// `(α, sup_f ‖F χ_{|x| ≥ α}‖)`.
    pub tail: Vec<(f64, f64)>,
}

impl FamilyReport {
    /// Least-squares slope of `log value` against `log α`.
    pub fn tail_slope(&self) -> Option<f64> {
        loglog_slope(&self.tail)
    }

    pub fn equicontinuity_slope(&self) -> Option<f64> {
        loglog_slope(&self.equicontinuity)
    }

    /// Value at the smallest `z` over the value at the largest.
    pub fn equicontinuity_decay(&self) -> Option<f64> {
        let lo = self.equicontinuity.iter().min_by(|a, b| a.0.total_cmp(&b.0))?;
        let hi = self.equicontinuity.iter().max_by(|a, b| a.0.total_cmp(&b.0))?;
        if hi.1 > 0.0 {
            Some(lo.1 / hi.1)
        } else {
            None
        }
    }

    /// Three CSV sections separated by blank lines.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "# bound")?;
        writeln!(writer, "bound")?;
        writeln!(writer, "{:.10e}", self.bound)?;
        writeln!(writer)?;
        writeln!(writer, "# equicontinuity")?;
        writeln!(writer, "z,value")?;
        for (z, v) in &self.equicontinuity {
            writeln!(writer, "{:.10e},{:.10e}", z, v)?;
        }
        writeln!(writer)?;
        writeln!(writer, "# tail")?;
        writeln!(writer, "alpha,value")?;
        for (a, v) in &self.tail {
            writeln!(writer, "{:.10e},{:.10e}", a, v)?;
        }
        Ok(())
    }
}

/// Least-squares slope in log-log coordinates over the points with positive
/// coordinates; `None` with fewer than two of them.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// `F(x + k·h) - F(x)` at the cells where both samples lie in the window.
fn translation_difference(f: &GridFunction, cells: isize) -> GridFunction {
    let n = f.len() as isize;
    let zero = Complex64::new(0.0, 0.0);
    let values = (0..n)
        .map(|i| {
            let j = i + cells;
            if (0..n).contains(&j) {
                f.at(j) - f.at(i)
            } else {
                zero
            }
        })
        .collect();
    GridFunction::new(*f.grid(), values).expect("same length")
}

/// Applies `[b, C_Γ]` to every member and measures the three conditions of the
/// Fréchet–Kolmogorov criterion in the Morrey norm.
pub fn fk_report(
    curve: &LipschitzCurve,
    b: &GridFunction,
    family: &[GridFunction],
    params: &MorreyParams,
    z_list: &[f64],
    alpha_list: &[f64],
) -> Result<FamilyReport> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty family".into()));
    }
    let grid = *b.grid();
    for &alpha in alpha_list {
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("tail radius {alpha} must be positive")));
        }
        let needed = Interval::new(0.0, 2.0 * alpha)?;
        if !grid.contains_interval(&needed) {
            return Err(Error::out_of_window(needed.lo(), needed.hi(), grid.origin, grid.end()));
        }
    }
    let lattice = IntervalLattice::for_grid(grid)?;
    let images: Vec<GridFunction> = family
        .par_iter()
        .map(|f| commutator_image(curve, b, f))
        .collect::<Result<_>>()?;
    let sup = |values: Vec<f64>| values.into_iter().fold(0.0f64, f64::max);

    let norms: Vec<f64> = images
        .par_iter()
        .map(|g| morrey_norm(g, params, &lattice))
        .collect::<Result<_>>()?;
    let bound = sup(norms);

    let mut equicontinuity = Vec::with_capacity(z_list.len());
    for &z in z_list {
        let cells = (z / grid.step).round() as isize;
        let moduli: Vec<f64> = images
            .par_iter()
            .map(|g| morrey_norm(&translation_difference(g, cells), params, &lattice))
            .collect::<Result<_>>()?;
        equicontinuity.push((cells as f64 * grid.step, sup(moduli)));
    }

    let mut tail = Vec::with_capacity(alpha_list.len());
    for &alpha in alpha_list {
        let values: Vec<f64> = images
            .par_iter()
            .map(|g| morrey_norm(&g.masked(|x| x.abs() >= alpha), params, &lattice))
            .collect::<Result<_>>()?;
        tail.push((alpha, sup(values)));
    }

    Ok(FamilyReport {
        bound,
        equicontinuity,
        tail,
    })
}

/// A smooth compactly supported approximation of a symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothTruncation {
    pub symbol: GridFunction,
    pub epsilon: f64,
    /// Inner radius of the cutoff; it vanishes beyond twice this radius.
    pub radius: f64,
    pub center: f64,
    /// Constant the symbol is flattened to outside the cutoff.
    pub level: Complex64,
    /// `‖b - b_ε‖_BMO`.
    pub bmo_distance: f64,
}

fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
fn smooth_step(t: f64) -> f64 {
    let e = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let (a, b) = (e(t), e(1.0 - t));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Bump-kernel smoothing at scale `epsilon`; weights are renormalized over the
/// part of the kernel that falls inside the window.
pub fn mollify(b: &GridFunction, epsilon: f64) -> Result<GridFunction> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let h = b.step();
    let half = (epsilon / h).floor() as isize;
    if half == 0 {
        return Ok(b.clone());
    }
    let weights: Vec<f64> = (-half..=half).map(|k| bump(k as f64 * h / epsilon)).collect();
    let n = b.len() as isize;
    let values = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut mass = 0.0;
            for (w, k) in weights.iter().zip(-half..=half) {
                let j = i + k;
                if (0..n).contains(&j) && *w > 0.0 {
                    acc += b.at(j) * *w;
                    mass += w;
                }
            }
            acc / mass
        })
        .collect();
    GridFunction::new(*b.grid(), values)
}

/// Mollifies `b` at scale `epsilon`, then flattens it to its mean over the
/// cutoff annulus outside `radius` around the window centre (default radius:
/// a quarter of the window length).
pub fn smooth_truncate_symbol(b: &GridFunction, epsilon: f64, radius: Option<f64>) -> Result<SmoothTruncation> {
    let grid = *b.grid();
    let window = grid.window();
    let radius = radius.unwrap_or(0.25 * window.length());
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff radius must be positive, got {radius}")));
    }
    let center = window.center;
    let smooth = mollify(b, epsilon)?;
    let annulus: Vec<Complex64> = (0..grid.len as isize)
        .filter(|&i| {
            let d = (grid.midpoint(i) - center).abs();
            d > radius && d < 2.0 * radius
        })
        .map(|i| smooth.at(i))
        .collect();
    let level = if annulus.is_empty() {
        Complex64::new(0.0, 0.0)
    } else {
        annulus.iter().sum::<Complex64>() / annulus.len() as f64
    };
    let cut = |x: f64| smooth_step((2.0 * radius - (x - center).abs()) / radius);
    let values = (0..grid.len as isize)
        .map(|i| level + (smooth.at(i) - level) * cut(grid.midpoint(i)))
        .collect();
    let symbol = GridFunction::new(grid, values)?;
    let lattice = IntervalLattice::for_grid(grid)?;
    let bmo_distance = bmo_norm(&(b - &symbol), &lattice)?;
    Ok(SmoothTruncation {
        symbol,
        epsilon,
        radius,
        center,
        level,
        bmo_distance,
    })
}

/// Supremum of averages of `|f|` over lattice intervals containing each cell.
pub fn lattice_maximal(f: &GridFunction, lattice: &IntervalLattice) -> Result<GridFunction> {
    f.require_same_grid(&GridFunction::zeros(*lattice.grid()))?;
    let n = f.len() as isize;
    let mut prefix = vec![0.0];
    for v in f.values() {
        prefix.push(prefix.last().unwrap() + v.norm());
    }
    let mut best = vec![0.0f64; f.len()];
    for li in lattice.all() {
        let (lo, hi) = (li.start.max(0), li.end().min(n));
        if lo >= hi {
            continue;
        }
        // cells outside the window count as zero
        let avg = (prefix[hi as usize] - prefix[lo as usize]) / li.cells as f64;
        for v in &mut best[lo as usize..hi as usize] {
            *v = v.max(avg);
        }
    }
    GridFunction::new(*f.grid(), best.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
}

/// Morrey norms of the four pieces of `[b,C_Γ]f(x) - [b,C_Γ]f(x+z)` split at
/// `|x - y| = |z|/ε`, with the constants fitted against their bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourTerms {
    pub z: f64,
    pub epsilon: f64,
    pub norms: [f64; 4],
    /// `‖L₁‖ / ‖|b - b(·+z)|·C_*f‖`, `‖L₂‖ / (ε‖Mf‖)`, and
    /// `‖L₃‖, ‖L₄‖` over `ε^{-1}|z|·‖b'‖_∞·‖Mf‖`.
    pub fitted: [f64; 4],
    /// Morrey norm of `L₁ + L₂ + L₃ + L₄ - (F - F(· + z))`.
    pub identity_error: f64,
}

/// Splits the translation difference of `[b, C_Γ] f` into the four terms of
/// the equicontinuity estimate. Quadratic in the grid length.
pub fn four_term_diagnostic(
    curve: &LipschitzCurve,
    b: &GridFunction,
    f: &GridFunction,
    z: f64,
    epsilon: f64,
    params: &MorreyParams,
) -> Result<FourTerms> {
    b.require_same_grid(f)?;
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let grid = *f.grid();
    let h = grid.step;
    let k = (z / h).round() as isize;
    if k == 0 {
        return Err(Error::InvalidArgument(format!("shift {z} is below one cell")));
    }
    let zs = k as f64 * h;
    let reach = zs.abs() / epsilon;
    let n = grid.len as isize;
    let xs: Vec<f64> = (0..n).map(|i| grid.midpoint(i)).collect();
    let ax: Vec<f64> = xs.iter().map(|&x| curve.eval(x)).collect();
    let support: Vec<isize> = f.support_cells().into_iter().map(|i| i as isize).collect();
    let zero = Complex64::new(0.0, 0.0);

    let terms: Vec<[Complex64; 4]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = i + k;
            if !(0..n).contains(&s) {
                return [zero; 4];
            }
            let (bx, bs) = (b.at(i), b.at(s));
            let mut l = [zero; 4];
            for &j in &support {
                let w = f.at(j) * h;
                let near = ((i - j).abs() as f64) * h <= reach * (1.0 + 1e-12);
                let kx = if j == i { zero } else { kernel_from_heights(xs[i as usize], ax[i as usize], xs[j as usize], ax[j as usize]) };
                let ks = if j == s { zero } else { kernel_from_heights(xs[s as usize], ax[s as usize], xs[j as usize], ax[j as usize]) };
                let by = b.at(j);
                if near {
                    l[2] += kx * (bx - by) * w;
                    l[3] -= ks * (bs - by) * w;
                } else {
                    l[0] += kx * (bx - bs) * w;
                    l[1] += (kx - ks) * (bs - by) * w;
                }
            }
            l
        })
        .collect();

    let lattice = IntervalLattice::for_grid(grid)?;
    let piece = |t: usize| GridFunction::new(grid, terms.iter().map(|l| l[t]).collect());
    let pieces: Vec<GridFunction> = (0..4).map(piece).collect::<Result<_>>()?;
    let mut norms = [0.0; 4];
    for (t, p) in pieces.iter().enumerate() {
        norms[t] = morrey_norm(p, params, &lattice)?;
    }

    let image = commutator_image(curve, b, f)?;
    let diff = translation_difference(&image, k);
    let sum = pieces.iter().skip(1).fold(pieces[0].clone(), |acc, p| &acc + p);
    // the four terms add up to F(x) - F(x + z)
    let identity_error = morrey_norm(&(&sum + &diff), params, &lattice)?;

    let mut radii = TruncationLattice::geometric(h, grid.window().length(), TruncationLattice::DEFAULT_RATIO)?
        .radii()
        .to_vec();
    radii.push(reach);
    let radii = TruncationLattice::from_radii(radii)?;
    let star: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| maximal_truncated(curve, f, xs[i as usize], &radii))
        .collect::<Result<_>>()?;
    let l1_bound = GridFunction::new(
        grid,
        (0..n)
            .map(|i| {
                let s = i + k;
                let db = if (0..n).contains(&s) { (b.at(i) - b.at(s)).norm() } else { 0.0 };
                Complex64::new(db * star[i as usize], 0.0)
            })
            .collect(),
    )?;
    let mf = morrey_norm(&lattice_maximal(f, &lattice)?, params, &lattice)?;
    let lip_b = (1..n).map(|i| (b.at(i) - b.at(i - 1)).norm() / h).fold(0.0f64, f64::max);
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let fitted = [
        ratio(norms[0], morrey_norm(&l1_bound, params, &lattice)?),
        ratio(norms[1], epsilon * mf),
        ratio(norms[2], reach * lip_b * mf),
        ratio(norms[3], reach * lip_b * mf),
    ];
    Ok(FourTerms {
        z: zs,
        epsilon,
        norms,
        fitted,
        identity_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn smooth_bump(grid: Grid, width: f64) -> GridFunction {
        GridFunction::from_real_fn(grid, |x| bump(x / width))
    }

    fn clipped_log(grid: Grid) -> GridFunction {
        GridFunction::from_real_fn(grid, |x| x.abs().max(1e-3).ln())
    }

    /// Random step functions on `(-2, 2)` with unit Morrey norm.
    fn step_family(grid: Grid, count: usize, params: &MorreyParams, seed: u64) -> Vec<GridFunction> {
        let lattice = IntervalLattice::for_grid(grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let levels: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let f = GridFunction::from_real_fn(grid, |x| {
                    if x.abs() < 2.0 {
                        levels[((x + 2.0) * 2.0).floor() as usize]
                    } else {
                        0.0
                    }
                });
                let norm = morrey_norm(&f, params, &lattice).unwrap();
                f.scaled(Complex64::new(1.0 / norm, 0.0))
            })
            .collect()
    }

    #[test]
    fn zero_family_gives_zero_profiles() {
        let grid = Grid::covering(-8.0, 8.0, 1.0 / 16.0).unwrap();
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        let b = smooth_bump(grid, 1.0);
        let r = fk_report(&LipschitzCurve::flat(), &b, &[GridFunction::zeros(grid)], &params, &[0.5, 0.25], &[1.0, 2.0])
            .unwrap();
        assert_eq!(r.bound, 0.0);
        assert!(r.equicontinuity.iter().all(|(_, v)| *v == 0.0));
        assert!(r.tail.iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn tail_beyond_window_is_rejected() {
        let grid = Grid::covering(-8.0, 8.0, 1.0 / 16.0).unwrap();
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        let b = smooth_bump(grid, 1.0);
        let err = fk_report(&LipschitzCurve::flat(), &b, &[b.clone()], &params, &[], &[5.0]).unwrap_err();
        assert!(matches!(err, Error::OutOfWindow { .. }));
    }

    #[test]
    fn smooth_bump_family_decays() {
        let grid = Grid::covering(-64.0, 64.0, 1.0 / 128.0).unwrap();
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        let b = smooth_bump(grid, 1.0);
        let family = step_family(grid, 20, &params, 7);
        let r = fk_report(
            &LipschitzCurve::flat(),
            &b,
            &family,
            &params,
            &[0.16, 0.08, 0.04, 0.02],
            &[4.0, 8.0, 16.0, 32.0],
        )
        .unwrap();
        assert!(r.bound > 0.0 && r.bound.is_finite());
        for w in r.tail.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
        let slope = r.tail_slope().unwrap();
        assert!((slope + 0.75).abs() <= 0.15, "tail slope {slope}");
        for w in r.equicontinuity.windows(2) {
            assert!(w[1].1 < w[0].1, "{:?}", r.equicontinuity);
        }
        let decay = r.equicontinuity_decay().unwrap();
        assert!(decay <= 0.2, "equicontinuity decay {decay}");
        assert!((r.equicontinuity[3].0 - 3.0 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn translation_modulus_of_indicator() {
        let grid = Grid::covering(-4.0, 4.0, 1.0 / 256.0).unwrap();
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        let lattice = IntervalLattice::for_grid(grid).unwrap();
        let chi = GridFunction::indicator(grid, &Interval::from_endpoints(0.0, 1.0).unwrap());
        let k = (0.01f64 * 256.0).round() as isize;
        let m = morrey_norm(&translation_difference(&chi, k), &params, &lattice).unwrap();
        let z = k as f64 / 256.0;
        // two jump cells of width z: (∫|Δ|² / r^λ)^{1/2} with r = z/2 on one jump
        let expected = (z / (z / 2.0).sqrt()).sqrt();
        assert!((m - expected).abs() / expected < 0.25, "{m} vs {expected}");
    }

    #[test]
    fn truncation_keeps_compact_smooth_symbol() {
        let grid = Grid::covering(-16.0, 16.0, 1.0 / 64.0).unwrap();
        let b = smooth_bump(grid, 1.0);
        let t = smooth_truncate_symbol(&b, 0.05, None).unwrap();
        assert!(t.level.norm() < 1e-12);
        let own = bmo_norm(&b, &IntervalLattice::for_grid(grid).unwrap()).unwrap();
        assert!(t.bmo_distance < 0.01 * own);
    }

    #[test]
    fn truncation_of_constant_has_no_oscillation() {
        let grid = Grid::covering(-16.0, 16.0, 1.0 / 16.0).unwrap();
        let b = GridFunction::from_real_fn(grid, |_| 3.0);
        let t = smooth_truncate_symbol(&b, 0.5, None).unwrap();
        assert!(t.bmo_distance < 1e-12);
        assert!((t.level.re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn clipped_log_has_truncation_floor() {
        let grid = Grid::covering(-64.0, 64.0, 1.0 / 16.0).unwrap();
        let b = clipped_log(grid);
        let d: Vec<f64> = [0.5, 0.25, 0.125]
            .iter()
            .map(|&e| smooth_truncate_symbol(&b, e, Some(4.0)).unwrap().bmo_distance)
            .collect();
        assert!(d.iter().all(|&v| v > 0.2), "{d:?}");
        assert!((d[2] - d[0]).abs() < 0.5 * d[0], "{d:?}");
    }

    #[test]
    fn four_terms_add_up() {
        let grid = Grid::covering(-4.0, 4.0, 1.0 / 32.0).unwrap();
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        let b = smooth_bump(grid, 1.0);
        let f = step_family(grid, 1, &params, 3).remove(0);
        let curve = LipschitzCurve::sawtooth(0.5, 1.0, 8.0).unwrap();
        let t = four_term_diagnostic(&curve, &b, &f, 0.125, 0.25, &params).unwrap();
        assert!(t.identity_error < 1e-12, "{}", t.identity_error);
        assert!(t.fitted.iter().all(|c| c.is_finite() && *c >= 0.0));
        assert!(t.fitted[0] <= 1.0 + 1e-9, "{:?}", t.fitted);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(-0.75))).collect();
        assert!((loglog_slope(&pts).unwrap() + 0.75).abs() < 1e-12);
        assert!(loglog_slope(&pts[..1]).is_none());
    }
}
