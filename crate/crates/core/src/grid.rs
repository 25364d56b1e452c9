//! Uniform grids on the line and the functions sampled on them.
//!
//! A [`GridFunction`] stores one complex sample per cell, taken at the cell
//! midpoint, and is understood to vanish outside its window. All integrals are
//! midpoint sums, so they are exact for data that is constant on cells.

use std::io::{Read, Write};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when comparing grid geometry.
const GEOM_TOL: f64 = 1e-9;

/// The open interval `I(center, radius) = {y : |y - center| < radius}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub radius: f64,
}

impl Interval {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "interval needs a finite center and positive radius, got ({center}, {radius})"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn from_endpoints(lo: f64, hi: f64) -> Result<Self> {
        Self::new(0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    pub fn lo(&self) -> f64 {
        self.center - self.radius
    }

    pub fn hi(&self) -> f64 {
        self.center + self.radius
    }

    /// Lebesgue measure `|I| = 2r`.
    pub fn length(&self) -> f64 {
        2.0 * self.radius
    }

    /// The concentric dilate `kI`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            center: self.center,
            radius: k * self.radius,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() < self.radius
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.lo() >= self.lo() - GEOM_TOL * self.radius
            && other.hi() <= self.hi() + GEOM_TOL * self.radius
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo() < other.hi() && other.lo() < self.hi()
    }
}

/// Geometry of a uniform grid: cell `i` is `[origin + i*step, origin + (i+1)*step)`.
///
/// Cell indices are signed so that the lattice can be addressed beyond the
/// stored window; samples outside `0..len` are zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: f64,
    pub step: f64,
    pub len: usize,
}

impl Grid {
    pub fn new(origin: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !origin.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid needs a positive finite step, got {step}"
            )));
        }
        Ok(Self { origin, step, len })
    }

    /// Grid on `[lo, hi)` with the given step; `hi - lo` is rounded to whole cells.
    pub fn covering(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!("empty window ({lo}, {hi})")));
        }
        let len = ((hi - lo) / step).round() as usize;
        Self::new(lo, step, len.max(1))
    }

    pub fn end(&self) -> f64 {
        self.origin + self.len as f64 * self.step
    }

    pub fn window(&self) -> Interval {
        Interval {
            center: 0.5 * (self.origin + self.end()),
            radius: 0.5 * self.len as f64 * self.step,
        }
    }

    pub fn midpoint(&self, i: isize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.step
    }

    /// Index of the cell whose midpoint is nearest to `x`.
    pub fn nearest_cell(&self, x: f64) -> isize {
        ((x - self.origin) / self.step - 0.5).round() as isize
    }

    /// Nearest cell boundary to `x`.
    pub fn snap(&self, x: f64) -> f64 {
        self.origin + ((x - self.origin) / self.step).round() * self.step
    }

    /// Snaps both endpoints to cell boundaries; returns the snapped interval and
    /// the largest endpoint displacement.
    pub fn snap_interval(&self, interval: &Interval) -> Result<(Interval, f64)> {
        let lo = self.snap(interval.lo());
        let mut hi = self.snap(interval.hi());
        if hi <= lo {
            hi = lo + self.step;
        }
        let residual = (lo - interval.lo()).abs().max((hi - interval.hi()).abs());
        Ok((Interval::from_endpoints(lo, hi)?, residual))
    }

    /// Half-open range of (possibly out-of-window) cell indices whose midpoints
    /// lie in the open interval.
    pub fn cell_range(&self, interval: &Interval) -> (isize, isize) {
        let a = (interval.lo() - self.origin) / self.step - 0.5;
        let b = (interval.hi() - self.origin) / self.step - 0.5;
        let lo = a.floor() as isize + 1;
        let hi = b.ceil() as isize;
        (lo, hi.max(lo))
    }

    /// Same as [`Grid::cell_range`] clipped to the stored window.
    pub fn window_cells(&self, interval: &Interval) -> std::ops::Range<usize> {
        let (lo, hi) = self.cell_range(interval);
        let lo = lo.clamp(0, self.len as isize) as usize;
        let hi = hi.clamp(0, self.len as isize) as usize;
        lo..hi.max(lo)
    }

    /// True when the interval lies inside the window (up to rounding).
    pub fn contains_interval(&self, interval: &Interval) -> bool {
        let tol = GEOM_TOL * self.step;
        interval.lo() >= self.origin - tol && interval.hi() <= self.end() + tol
    }

    pub fn require_inside(&self, interval: &Interval) -> Result<()> {
        if self.contains_interval(interval) {
            Ok(())
        } else {
            Err(Error::out_of_window(
                interval.lo(),
                interval.hi(),
                self.origin,
                self.end(),
            ))
        }
    }

    /// Same step and origins differing by a whole number of cells.
    pub fn is_aligned_with(&self, other: &Grid) -> bool {
        if (self.step - other.step).abs() > GEOM_TOL * self.step {
            return false;
        }
        let shift = (other.origin - self.origin) / self.step;
        (shift - shift.round()).abs() < 1e-6
    }

    /// Offset, in cells, of `other`'s origin relative to this grid.
    pub fn offset_of(&self, other: &Grid) -> isize {
        ((other.origin - self.origin) / self.step).round() as isize
    }

    fn same_as(&self, other: &Grid) -> bool {
        self.len == other.len && self.is_aligned_with(other) && self.offset_of(other) == 0
    }
}

/// A compactly supported complex function sampled at the cell midpoints of a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite sample".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.len as isize).map(|i| f(grid.midpoint(i))).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Indicator of an interval (cells whose midpoints fall inside it).
    pub fn indicator(grid: Grid, interval: &Interval) -> Self {
        let mut out = Self::zeros(grid);
        for i in grid.window_cells(interval) {
            out.values[i] = Complex64::new(1.0, 0.0);
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn step(&self) -> f64 {
        self.grid.step
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample at a (possibly out-of-window) cell index.
    pub fn at(&self, i: isize) -> Complex64 {
        if i >= 0 && (i as usize) < self.values.len() {
            self.values[i as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Piecewise-constant evaluation: the sample of the cell containing `x`.
    pub fn value_at(&self, x: f64) -> Complex64 {
        let i = ((x - self.grid.origin) / self.grid.step).floor() as isize;
        self.at(i)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Indices of the nonzero cells.
    pub fn support_cells(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// True when every nonzero sample lies in the interval.
    pub fn supported_in(&self, interval: &Interval) -> bool {
        let (lo, hi) = self.grid.cell_range(interval);
        self.support_cells()
            .into_iter()
            .all(|i| (i as isize) >= lo && (i as isize) < hi)
    }

    /// Midpoint-rule integral over the whole window.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.step
    }

    /// Midpoint-rule integral over the cells whose midpoints lie in `over`.
    pub fn integrate(&self, over: &Interval) -> Complex64 {
        self.values[self.grid.window_cells(over)]
            .iter()
            .sum::<Complex64>()
            * self.grid.step
    }

    /// `(∫_over |f|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64, over: &Interval) -> Result<f64> {
        check_p(p)?;
        Ok(power_sum(&self.values[self.grid.window_cells(over)], p, self.grid.step))
    }

    /// `‖f‖_p` over the whole window.
    pub fn lp_norm_full(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        Ok(power_sum(&self.values, p, self.grid.step))
    }

    /// `∫ |f|` over the window.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.grid.step
    }

    /// Non-increasing rearrangement of `f·χ_I` evaluated at `t`.
    ///
    /// Cells of `I` outside the window count as zeros.
    pub fn rearrangement_value(&self, interval: &Interval, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rearrangement needs t > 0, got {t}"
            )));
        }
        let mut mags: Vec<f64> = self.values[self.grid.window_cells(interval)]
            .iter()
            .map(|v| v.norm())
            .collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        Ok(kth_largest(&mags, t / self.grid.step))
    }

    /// `f(· - z)`: the same samples on a grid moved by `z` snapped to whole cells.
    ///
    /// Returns the translated function and the snap residual `|z - snapped|`.
    pub fn translate(&self, z: f64) -> (Self, f64) {
        let cells = (z / self.grid.step).round();
        let snapped = cells * self.grid.step;
        let mut grid = self.grid;
        grid.origin += snapped;
        (
            Self {
                grid,
                values: self.values.clone(),
            },
            (z - snapped).abs(),
        )
    }

    /// `x ↦ f(x + cells·step)` on the same grid; samples shifted in from outside are zero.
    pub fn shifted_on_grid(&self, cells: isize) -> Self {
        let values = (0..self.values.len() as isize)
            .map(|i| self.at(i + cells))
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Zero outside the interval.
    pub fn restricted(&self, interval: &Interval) -> Self {
        let keep = self.grid.window_cells(interval);
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| if keep.contains(&i) { *v } else { Complex64::new(0.0, 0.0) })
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Keeps samples whose midpoints satisfy the predicate.
    pub fn masked(&self, keep: impl Fn(f64) -> bool) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if keep(self.grid.midpoint(i as isize)) {
                    *v
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.require_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    /// Samplewise product on a common grid.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn require_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::ResampleRequired(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    /// Re-expresses the function on another grid with the same step and an
    /// aligned lattice. Samples that fall outside `target` are dropped.
    pub fn regrid(&self, target: Grid) -> Result<Self> {
        if !self.grid.is_aligned_with(&target) {
            return Err(Error::ResampleRequired(format!(
                "{:?} is not aligned with {:?}",
                self.grid, target
            )));
        }
        let offset = self.grid.offset_of(&target);
        let values = (0..target.len as isize).map(|i| self.at(i + offset)).collect();
        Ok(Self {
            grid: target,
            values,
        })
    }

    /// Writes `x,re,im` rows, one per cell midpoint, with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "re", "im"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([
                format!("{:.16e}", self.grid.midpoint(i as isize)),
                format!("{:.16e}", v.re),
                format!("{:.16e}", v.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`GridFunction::write_csv`]. The step is
    /// inferred from the first two midpoints and checked against the rest.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for rec in r.deserialize() {
            let (x, re, im): (f64, f64, f64) = rec?;
            xs.push(x);
            values.push(Complex64::new(re, im));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidArgument("need at least two rows".into()));
        }
        let step = xs[1] - xs[0];
        for (i, x) in xs.iter().enumerate() {
            let expected = xs[0] + i as f64 * step;
            if (x - expected).abs() > 1e-6 * step {
                return Err(Error::InvalidArgument(format!(
                    "row {i}: midpoint {x} is off the uniform grid"
                )));
            }
        }
        let grid = Grid::new(xs[0] - 0.5 * step, step, xs.len())?;
        Self::new(grid, values)
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: Self) -> GridFunction {
        self.zip_with(rhs, |a, b| a + b).expect("grid mismatch in add")
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: Self) -> GridFunction {
        self.zip_with(rhs, |a, b| a - b).expect("grid mismatch in sub")
    }
}

impl Neg for &GridFunction {
    type Output = GridFunction;
    fn neg(self) -> GridFunction {
        self.map(|v| -v)
    }
}

impl Mul<f64> for &GridFunction {
    type Output = GridFunction;
    fn mul(self, rhs: f64) -> GridFunction {
        self.map(|v| v * rhs)
    }
}

/// A sorted set of cells of one grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSet {
    grid: Grid,
    indices: Vec<usize>,
}

impl CellSet {
    pub fn new(grid: Grid, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.last().is_some_and(|&i| i >= grid.len) {
            return Err(Error::InvalidArgument("cell index outside the grid".into()));
        }
        Ok(Self { grid, indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.indices.len() as f64 * self.grid.step
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.indices.iter().map(|&i| self.grid.midpoint(i as isize))
    }

    pub fn indicator(&self) -> GridFunction {
        let mut f = GridFunction::zeros(self.grid);
        for &i in &self.indices {
            f.values[i] = Complex64::new(1.0, 0.0);
        }
        f
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExponent(format!("p = {p}; need 1 <= p < inf")))
    }
}

fn power_sum(values: &[Complex64], p: f64, step: f64) -> f64 {
    let s: f64 = values.iter().map(|v| v.norm().powf(p)).sum();
    (s * step).powf(1.0 / p)
}

/// `f*(t)` for magnitudes sorted in decreasing order, `t` measured in cells.
///
/// `f*(t) = inf{α : #{|f| > α} < t}` equals the `ceil(t)`-th largest magnitude.
pub(crate) fn kth_largest(sorted_desc: &[f64], t_cells: f64) -> f64 {
    let k = (t_cells - 1e-9).ceil().max(1.0) as usize;
    sorted_desc.get(k - 1).copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_grid(step: f64) -> Grid {
        Grid::covering(-2.0, 2.0, step).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn indicator_mass() {
        let g = unit_grid(1e-2);
        let f = GridFunction::indicator(g, &Interval::from_endpoints(0.0, 1.0).unwrap());
        let v = f.integrate(&Interval::from_endpoints(0.0, 1.0).unwrap());
        assert_abs_diff_eq!(v.re, 1.0, epsilon = g.step);
    }

    #[test]
    fn odd_step_function_integrates_to_zero() {
        let g = unit_grid(1.0 / 64.0);
        let f = GridFunction::from_real_fn(g, |x| {
            if (0.0..1.0).contains(&x) {
                1.0
            } else if (-1.0..0.0).contains(&x) {
                -1.0
            } else {
                0.0
            }
        });
        assert_eq!(f.integral(), c(0.0));
    }

    #[test]
    fn linear_function_integral() {
        let g = unit_grid(1e-3);
        let f = GridFunction::from_real_fn(g, |x| x);
        let v = f.integrate(&Interval::from_endpoints(0.0, 1.0).unwrap()).re;
        assert!((v - 0.5).abs() <= g.step * g.step);
    }

    #[test]
    fn lp_norm_examples() {
        let g = Grid::covering(-1.0, 5.0, 1e-3).unwrap();
        let line = g.window();
        let a = GridFunction::indicator(g, &Interval::from_endpoints(0.0, 1.0).unwrap());
        assert_abs_diff_eq!(a.lp_norm(2.0, &line).unwrap(), 1.0, epsilon = g.step);
        let b = &GridFunction::indicator(g, &Interval::from_endpoints(0.0, 4.0).unwrap()) * 2.0;
        assert_abs_diff_eq!(b.lp_norm(2.0, &line).unwrap(), 4.0, epsilon = g.step);
        assert_eq!(GridFunction::zeros(g).lp_norm(2.0, &line).unwrap(), 0.0);
        assert!(matches!(a.lp_norm(0.5, &line), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn rearrangement_examples() {
        let g = Grid::covering(-1.0, 2.0, 1.0 / 128.0).unwrap();
        let i = Interval::from_endpoints(0.0, 1.0).unwrap();
        let f = GridFunction::indicator(g, &Interval::from_endpoints(0.0, 0.5).unwrap());
        assert_eq!(f.rearrangement_value(&i, 0.25).unwrap(), 1.0);
        assert_eq!(f.rearrangement_value(&i, 0.75).unwrap(), 0.0);
        let k = &GridFunction::indicator(g, &g.window()) * -3.0;
        for t in [0.01, 0.4, 1.0] {
            assert_eq!(k.rearrangement_value(&i, t).unwrap(), 3.0);
        }
        assert!(f.rearrangement_value(&i, 0.0).is_err());
    }

    #[test]
    fn translate_examples() {
        let g = unit_grid(1.0 / 32.0);
        let f = GridFunction::indicator(g, &Interval::from_endpoints(0.0, 1.0).unwrap());
        let (same, res) = f.translate(0.0);
        assert_eq!(same, f);
        assert_eq!(res, 0.0);
        let (moved, _) = f.translate(1.0);
        let target = Interval::from_endpoints(1.0, 2.0).unwrap();
        assert_abs_diff_eq!(moved.integrate(&target).re, 1.0, epsilon = 1e-12);
        assert_eq!(moved.value_at(1.5), c(1.0));
        assert_eq!(moved.value_at(0.5), c(0.0));
        let (back, _) = moved.translate(-1.0);
        assert_eq!(back.values(), f.values());
        assert_abs_diff_eq!(back.grid().origin, f.grid().origin, epsilon = 1e-12);
        let (_, snap) = f.translate(0.01);
        assert!(snap <= g.step / 2.0);
    }

    #[test]
    fn cell_range_uses_midpoints() {
        let g = Grid::covering(0.0, 1.0, 0.25).unwrap();
        let r = g.cell_range(&Interval::from_endpoints(0.25, 0.75).unwrap());
        assert_eq!(r, (1, 3));
        let r = g.cell_range(&Interval::from_endpoints(-1.0, 0.0).unwrap());
        assert_eq!(r, (-4, 0));
    }

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let g = Grid::covering(-1.0, 1.0, 0.1).unwrap();
        let f = GridFunction::from_fn(g, |x| Complex64::new(x.sin(), x.cos() / 3.0));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,re,im\n"));
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn cell_set_measure() {
        let g = unit_grid(0.5);
        let s = CellSet::new(g, vec![3, 1, 3]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.measure(), 1.0);
        assert!(CellSet::new(g, vec![100]).is_err());
    }

    #[test]
    fn product_requires_common_grid() {
        let a = GridFunction::zeros(unit_grid(0.5));
        let b = GridFunction::zeros(unit_grid(0.25));
        assert!(matches!(a.product(&b), Err(Error::ResampleRequired(_))));
    }
}
