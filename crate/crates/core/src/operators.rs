//! Principal-value, truncated, maximal and adjoint Cauchy integrals, the
//! commutator `[b, C_Γ]`, and the Hardy–Littlewood maximal function.
//!
//! Every operator is a midpoint sum over the nonzero cells of its input. The
//! evaluation point is snapped to the nearest midpoint of the input's grid and
//! the cell under it is left out, which is the symmetric one-cell exclusion
//! that defines the discrete principal value.

use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{kernel_from_heights, LipschitzCurve};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Geometric family of truncation radii used to discretize `sup_{t>0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationLattice {
    radii: Vec<f64>,
}

impl TruncationLattice {
    pub const DEFAULT_RATIO: f64 = 1.189_207_115_002_721; // 2^{1/4}

    pub fn geometric(t_min: f64, t_max: f64, ratio: f64) -> Result<Self> {
        if !(t_min > 0.0) || !(t_max >= t_min) || !(ratio > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "bad truncation lattice t_min={t_min} t_max={t_max} ratio={ratio}"
            )));
        }
        let mut radii = vec![t_min];
        while let Some(&last) = radii.last() {
            let next = last * ratio;
            if next > t_max * (1.0 + 1e-12) {
                break;
            }
            radii.push(next);
        }
        Ok(Self { radii })
    }

    pub fn from_radii(mut radii: Vec<f64>) -> Result<Self> {
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        if radii.first().is_some_and(|&t| !(t > 0.0)) {
            return Err(Error::InvalidArgument("truncation radii must be positive".into()));
        }
        Ok(Self { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

/// Nonzero cells of a function with their positions, heights and weights `f·h`.
struct Source {
    index: Vec<isize>,
    y: Vec<f64>,
    height: Vec<f64>,
    weight: Vec<Complex64>,
}

impl Source {
    fn new(curve: &LipschitzCurve, f: &GridFunction) -> Self {
        let grid = f.grid();
        let cells = f.support_cells();
        let mut s = Source {
            index: Vec::with_capacity(cells.len()),
            y: Vec::with_capacity(cells.len()),
            height: Vec::with_capacity(cells.len()),
            weight: Vec::with_capacity(cells.len()),
        };
        for i in cells {
            let y = grid.midpoint(i as isize);
            s.index.push(i as isize);
            s.y.push(y);
            s.height.push(curve.eval(y));
            s.weight.push(f.values()[i] * grid.step);
        }
        s
    }

    fn len(&self) -> usize {
        self.y.len()
    }

    /// `Σ_{j ≠ skip} K(x, y_j)·w_j·m_j` (or the transposed kernel).
    fn sum(&self, x: f64, ax: f64, skip: isize, transpose: bool, modulate: impl Fn(usize) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.len() {
            if self.index[j] == skip {
                continue;
            }
            let k = if transpose {
                kernel_from_heights(self.y[j], self.height[j], x, ax)
            } else {
                kernel_from_heights(x, ax, self.y[j], self.height[j])
            };
            acc += k * self.weight[j] * modulate(j);
        }
        acc
    }
}

/// Snapped evaluation point on `grid`: cell index and midpoint.
fn snap(grid: &Grid, x: f64) -> (isize, f64) {
    let i = grid.nearest_cell(x);
    (i, grid.midpoint(i))
}

fn one(_: usize) -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Discrete principal value `C_Γ f(x)`.
pub fn pv_cauchy(curve: &LipschitzCurve, f: &GridFunction, x: f64) -> Complex64 {
    let (i, xs) = snap(f.grid(), x);
    Source::new(curve, f).sum(xs, curve.eval(xs), i, false, one)
}

/// `C_Γ f(x)` with the kernel evaluated at `x` itself rather than at the
/// nearest midpoint; the cell containing `x` is left out.
pub fn cauchy_at(curve: &LipschitzCurve, f: &GridFunction, x: f64) -> Complex64 {
    let grid = f.grid();
    let i = ((x - grid.origin) / grid.step).floor() as isize;
    Source::new(curve, f).sum(x, curve.eval(x), i, false, one)
}

/// `∫_{|x-y|>t} C_Γ(x,y) f(y) dy`.
pub fn truncated_cauchy(curve: &LipschitzCurve, f: &GridFunction, x: f64, t: f64) -> Result<Complex64> {
    let step = f.step();
    if t < step * (1.0 - 1e-12) {
        return Err(Error::InvalidTruncation { t, step });
    }
    let (_, xs) = snap(f.grid(), x);
    let ax = curve.eval(xs);
    let src = Source::new(curve, f);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..src.len() {
        if (xs - src.y[j]).abs() > t {
            acc += kernel_from_heights(xs, ax, src.y[j], src.height[j]) * src.weight[j];
        }
    }
    Ok(acc)
}

/// `C_Γ^* f(x) = p.v. ∫ C_Γ(y, x) f(y) dy` (bilinear transpose).
pub fn adjoint_cauchy(curve: &LipschitzCurve, f: &GridFunction, x: f64) -> Complex64 {
    let (i, xs) = snap(f.grid(), x);
    Source::new(curve, f).sum(xs, curve.eval(xs), i, true, one)
}

/// `max_t |∫_{|x-y|>t} C_Γ(x,y) f(y) dy|` over the lattice radii.
pub fn maximal_truncated(
    curve: &LipschitzCurve,
    f: &GridFunction,
    x: f64,
    lattice: &TruncationLattice,
) -> Result<f64> {
    let radii = lattice.radii();
    if radii.is_empty() {
        return Err(Error::InvalidArgument("empty truncation lattice".into()));
    }
    if radii[0] < f.step() * (1.0 - 1e-12) {
        return Err(Error::InvalidTruncation {
            t: radii[0],
            step: f.step(),
        });
    }
    let (_, xs) = snap(f.grid(), x);
    let ax = curve.eval(xs);
    let src = Source::new(curve, f);
    // contributions sorted by decreasing distance, then running sums
    let mut terms: Vec<(f64, Complex64)> = (0..src.len())
        .map(|j| {
            let d = (xs - src.y[j]).abs();
            (d, kernel_from_heights(xs, ax, src.y[j], src.height[j]) * src.weight[j])
        })
        .filter(|(d, _)| *d > 0.0)
        .collect();
    terms.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut k = 0;
    for &t in radii.iter().rev() {
        while k < terms.len() && terms[k].0 > t {
            acc += terms[k].1;
            k += 1;
        }
        best = best.max(acc.norm());
    }
    Ok(best)
}

/// `[b, C_Γ] f(x) = b(x)·C_Γ f(x) - C_Γ(b f)(x)`.
pub fn commutator(curve: &LipschitzCurve, b: &GridFunction, f: &GridFunction, x: f64) -> Result<Complex64> {
    b.require_same_grid(f)?;
    let (i, xs) = snap(f.grid(), x);
    let src = Source::new(curve, f);
    let bx = b.at(i);
    Ok(src.sum(xs, curve.eval(xs), i, false, |j| bx - b.at(src.index[j])))
}

/// Uncentred Hardy–Littlewood maximal function over cell-aligned intervals
/// containing the cell of `x`.
pub fn hl_maximal(f: &GridFunction, x: f64) -> f64 {
    let n = f.len() as isize;
    if n == 0 {
        return 0.0;
    }
    let mut prefix = Vec::with_capacity(f.len() + 1);
    prefix.push(0.0);
    for v in f.values() {
        prefix.push(prefix.last().unwrap() + v.norm());
    }
    let mass = |l: isize, r: isize| {
        let a = prefix[l.clamp(0, n) as usize];
        let b = prefix[(r + 1).clamp(0, n) as usize];
        b - a
    };
    let i = ((x - f.grid().origin) / f.step()).floor() as isize;
    let lefts: Vec<isize> = if i < 0 { vec![i] } else { (0..=i.min(n - 1)).collect() };
    let rights: Vec<isize> = if i >= n { vec![i] } else { (i.max(0)..n).collect() };
    let mut best = 0.0f64;
    for &l in &lefts {
        for &r in &rights {
            best = best.max(mass(l, r) / (r - l + 1) as f64);
        }
    }
    best
}

/// `C_Γ f` sampled at every midpoint of `target`, whose lattice must be aligned
/// with `f`'s grid.
pub fn cauchy_image(curve: &LipschitzCurve, f: &GridFunction, target: Grid) -> Result<GridFunction> {
    image(curve, f, target, false)
}

/// `C_Γ^* f` sampled at every midpoint of `target`.
pub fn adjoint_image(curve: &LipschitzCurve, f: &GridFunction, target: Grid) -> Result<GridFunction> {
    image(curve, f, target, true)
}

fn image(curve: &LipschitzCurve, f: &GridFunction, target: Grid, transpose: bool) -> Result<GridFunction> {
    if !f.grid().is_aligned_with(&target) {
        return Err(Error::ResampleRequired("image target not aligned with input grid".into()));
    }
    let offset = f.grid().offset_of(&target);
    let src = Source::new(curve, f);
    let values: Vec<Complex64> = (0..target.len as isize)
        .into_par_iter()
        .map(|i| {
            let x = target.midpoint(i);
            src.sum(x, curve.eval(x), i + offset, transpose, one)
        })
        .collect();
    GridFunction::new(target, values)
}

/// `[b, C_Γ] f` at the cells `range` of the common grid of `b` and `f`.
pub fn commutator_values(
    curve: &LipschitzCurve,
    b: &GridFunction,
    f: &GridFunction,
    range: Range<isize>,
) -> Result<Vec<Complex64>> {
    b.require_same_grid(f)?;
    let grid = *f.grid();
    let src = Source::new(curve, f);
    let bsrc: Vec<Complex64> = src.index.iter().map(|&j| b.at(j)).collect();
    Ok(range
        .into_par_iter()
        .map(|i| {
            let x = grid.midpoint(i);
            let bx = b.at(i);
            src.sum(x, curve.eval(x), i, false, |j| bx - bsrc[j])
        })
        .collect())
}

/// `[b, C_Γ] f` on the whole common grid.
pub fn commutator_image(curve: &LipschitzCurve, b: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    let values = commutator_values(curve, b, f, 0..f.len() as isize)?;
    GridFunction::new(*f.grid(), values)
}
