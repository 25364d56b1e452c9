//! Morrey and BMO norms, medians, local mean oscillation, the three CMO
//! conditions as finite profiles, blocks and an upper bound for the block
//! space norm.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{kth_largest, Grid, GridFunction, Interval};

/// Exponents `(p, λ)` of `L^{p,λ}`; the same pair read as `(q, λ)` describes blocks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorreyParams {
    pub p: f64,
    pub lambda: f64,
}

impl MorreyParams {
    pub fn new(p: f64, lambda: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(format!("p must lie in (1, inf), got {p}")));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidExponent(format!(
                "lambda must lie in (0, 1), got {lambda}"
            )));
        }
        Ok(Self { p, lambda })
    }

    /// Conjugate exponent `p' = p / (p - 1)`.
    pub fn p_prime(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// The dual pair `(p', λ)`.
    pub fn dual(&self) -> Self {
        Self {
            p: self.p_prime(),
            lambda: self.lambda,
        }
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.p, self.lambda).map(|_| ())
    }
}

/// A lattice interval in cell coordinates: cells `start .. start + cells`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeInterval {
    pub start: isize,
    pub cells: usize,
}

impl LatticeInterval {
    pub fn interval(&self, grid: &Grid) -> Interval {
        let lo = grid.origin + self.start as f64 * grid.step;
        Interval::from_endpoints(lo, lo + self.cells as f64 * grid.step)
            .expect("lattice intervals have positive length")
    }

    pub fn end(&self) -> isize {
        self.start + self.cells as isize
    }
}

/// Dyadic family of cell-aligned intervals used to discretize suprema over
/// all intervals.
///
/// Lengths are `2^k` cells for `k` in `min_level..=max_level`; at each length
/// the starts step by `max(1, length / offsets)` cells from the window origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalLattice {
    grid: Grid,
    min_level: u32,
    max_level: u32,
    offsets: usize,
}

impl IntervalLattice {
    pub const DEFAULT_OFFSETS: usize = 4;

    pub fn new(grid: Grid, min_level: u32, max_level: u32, offsets: usize) -> Result<Self> {
        if grid.len == 0 || offsets == 0 || min_level > max_level {
            return Err(Error::InvalidArgument(format!(
                "empty interval lattice (levels {min_level}..={max_level}, offsets {offsets})"
            )));
        }
        if (1usize << max_level) > grid.len {
            return Err(Error::InvalidArgument(format!(
                "lattice length 2^{max_level} cells exceeds the window ({} cells)",
                grid.len
            )));
        }
        Ok(Self {
            grid,
            min_level,
            max_level,
            offsets,
        })
    }

    /// Every dyadic length from one cell to the largest that fits the window.
    pub fn for_grid(grid: Grid) -> Result<Self> {
        let max_level = usize::BITS - 1 - grid.len.max(1).leading_zeros();
        Self::new(grid, 0, max_level, Self::DEFAULT_OFFSETS)
    }

    /// Same lengths with twice the translation offsets.
    pub fn refined(&self) -> Self {
        Self {
            offsets: self.offsets * 2,
            ..self.clone()
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn offsets(&self) -> usize {
        self.offsets
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<u32> {
        self.min_level..=self.max_level
    }

    pub fn level_count(&self) -> usize {
        (self.max_level - self.min_level + 1) as usize
    }

    fn stride(&self, cells: usize) -> usize {
        (cells / self.offsets).max(1)
    }

    /// Intervals of the given level meeting the window, including those that
    /// hang over its edges.
    pub fn level(&self, level: u32) -> Vec<LatticeInterval> {
        let cells = 1usize << level;
        let stride = self.stride(cells) as isize;
        let n = self.grid.len as isize;
        let first = -((cells as isize - 1) / stride);
        let last = (n - 1) / stride;
        (first..=last)
            .map(|j| LatticeInterval {
                start: j * stride,
                cells,
            })
            .collect()
    }

    /// Intervals of the given level lying inside the window.
    pub fn level_inside(&self, level: u32) -> Vec<LatticeInterval> {
        let n = self.grid.len as isize;
        self.level(level)
            .into_iter()
            .filter(|li| li.start >= 0 && li.end() <= n)
            .collect()
    }

    pub fn all(&self) -> Vec<LatticeInterval> {
        self.levels().flat_map(|l| self.level(l)).collect()
    }

    pub fn all_inside(&self) -> Vec<LatticeInterval> {
        self.levels().flat_map(|l| self.level_inside(l)).collect()
    }

    fn require_grid(&self, f: &GridFunction) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::ResampleRequired(
                "function and interval lattice live on different grids".into(),
            ));
        }
        Ok(())
    }
}

fn prefix(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for v in values {
        acc += v;
        out.push(acc);
    }
    out
}

fn prefix_range(prefix: &[f64], start: isize, end: isize) -> f64 {
    let n = (prefix.len() - 1) as isize;
    prefix[end.clamp(0, n) as usize] - prefix[start.clamp(0, n) as usize]
}

/// `sup_{I(x,r)} [r^{-λ} ∫_I |f|^p]^{1/p}` over the lattice, with the maximizer.
pub fn morrey_norm_argmax(
    f: &GridFunction,
    params: &MorreyParams,
    lattice: &IntervalLattice,
) -> Result<(f64, LatticeInterval)> {
    params.validate()?;
    lattice.require_grid(f)?;
    let h = f.step();
    let pre = prefix(f.values().iter().map(|v| v.norm().powf(params.p) * h));
    let best = lattice
        .all()
        .into_par_iter()
        .map(|li| {
            let r = 0.5 * li.cells as f64 * h;
            let mass = prefix_range(&pre, li.start, li.end());
            (mass / r.powf(params.lambda), li)
        })
        .reduce_with(|a, b| pick_max(a, b))
        .ok_or_else(|| Error::InvalidArgument("empty interval lattice".into()))?;
    Ok((best.0.max(0.0).powf(1.0 / params.p), best.1))
}

/// Larger value wins; ties go to the earlier interval so reductions are deterministic.
fn pick_max(a: (f64, LatticeInterval), b: (f64, LatticeInterval)) -> (f64, LatticeInterval) {
    let key = |li: &LatticeInterval| (li.cells, li.start);
    if b.0 > a.0 || (b.0 == a.0 && key(&b.1) < key(&a.1)) {
        b
    } else {
        a
    }
}

/// Morrey norm `‖f‖_{L^{p,λ}}` over the lattice (radius normalization `r^λ`).
pub fn morrey_norm(f: &GridFunction, params: &MorreyParams, lattice: &IntervalLattice) -> Result<f64> {
    morrey_norm_argmax(f, params, lattice).map(|(v, _)| v)
}

fn oscillation_of(values: &[num_complex::Complex64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    // centring on the first sample keeps constants exact
    let m = values.len() as f64;
    let base = values[0];
    let mean = values.iter().map(|v| v - base).sum::<num_complex::Complex64>() / m;
    values.iter().map(|v| (v - base - mean).norm()).sum::<f64>() / m
}

fn cells_inside(b: &GridFunction, interval: &Interval) -> Result<std::ops::Range<usize>> {
    b.grid().require_inside(interval)?;
    Ok(b.grid().window_cells(interval))
}

/// Mean oscillation `M(b, I) = |I|^{-1} ∫_I |b - b_I|` over the cells of `I`.
pub fn mean_oscillation(b: &GridFunction, interval: &Interval) -> Result<f64> {
    let cells = cells_inside(b, interval)?;
    Ok(oscillation_of(&b.values()[cells]))
}

/// `M(b, I)` for every lattice interval inside the window.
pub fn lattice_oscillations(b: &GridFunction, lattice: &IntervalLattice) -> Result<Vec<(LatticeInterval, f64)>> {
    lattice.require_grid(b)?;
    let values = b.values();
    Ok(lattice
        .all_inside()
        .into_par_iter()
        .map(|li| {
            let s = li.start as usize;
            (li, oscillation_of(&values[s..s + li.cells]))
        })
        .collect())
}

/// `sup_I M(b, I)` over lattice intervals inside the window.
pub fn bmo_norm(b: &GridFunction, lattice: &IntervalLattice) -> Result<f64> {
    Ok(lattice_oscillations(b, lattice)?
        .into_iter()
        .map(|(_, m)| m)
        .fold(0.0, f64::max))
}

fn sorted_real(b: &GridFunction, interval: &Interval) -> Result<Vec<f64>> {
    let cells = cells_inside(b, interval)?;
    let mut v: Vec<f64> = b.values()[cells].iter().map(|z| z.re).collect();
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "interval ({}, {}) contains no cell midpoints",
            interval.lo(),
            interval.hi()
        )));
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub(crate) fn median_of_sorted(v: &[f64]) -> f64 {
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Median value `α_I(b)` of the real part of `b` on `I`; when the minimizers of
/// `c ↦ ∫_I |b - c|` form an interval its midpoint is returned.
pub fn median(b: &GridFunction, interval: &Interval) -> Result<f64> {
    Ok(median_of_sorted(&sorted_real(b, interval)?))
}

/// Local mean oscillation `ω_μ(b; I) = inf_c ((b - c)χ_I)*(μ|I|)` of the real part of `b`.
///
/// With `m` cells and `k = ⌈μm⌉`, the infimum is half the shortest spread of
/// `m - k + 1` consecutive sorted values.
pub fn local_mean_oscillation(b: &GridFunction, interval: &Interval, mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidArgument(format!("mu must lie in (0, 1), got {mu}")));
    }
    let v = sorted_real(b, interval)?;
    Ok(local_oscillation_sorted(&v, mu))
}

pub(crate) fn local_oscillation_sorted(v: &[f64], mu: f64) -> f64 {
    let m = v.len();
    let k = ((mu * m as f64) - 1e-9).ceil().max(1.0) as usize;
    if k > m {
        return 0.0;
    }
    let span = m - k;
    (0..k)
        .map(|j| 0.5 * (v[j + span] - v[j]))
        .fold(f64::INFINITY, f64::min)
}

/// Rearrangement value of `(b - c)χ_I` at `t`, the quantity minimized by
/// [`local_mean_oscillation`].
pub fn shifted_rearrangement(b: &GridFunction, interval: &Interval, c: f64, t: f64) -> Result<f64> {
    let cells = cells_inside(b, interval)?;
    let mut mags: Vec<f64> = b.values()[cells].iter().map(|z| (z.re - c).abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(kth_largest(&mags, t / b.step()))
}

/// Which of the three vanishing conditions a profile row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmoCondition {
    /// `sup_{|I| < δ} M(b, I)`
    SmallScale,
    /// `sup_{|I| > R} M(b, I)`
    LargeScale,
    /// `sup_{I ∩ I(0,R) = ∅} M(b, I)`
    FarField,
}

impl CmoCondition {
    pub fn label(&self) -> &'static str {
        match self {
            CmoCondition::SmallScale => "i",
            CmoCondition::LargeScale => "ii",
            CmoCondition::FarField => "iii",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmoRow {
    pub condition: CmoCondition,
    pub parameter: f64,
    pub sup_oscillation: f64,
}

/// Finite versions of the three CMO conditions.
///
/// Each curve is ordered so that its last row is the one closest to the limit:
/// decreasing `δ`, increasing `R`, increasing `R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmoProfile {
    pub rows: Vec<CmoRow>,
}

impl CmoProfile {
    pub fn curve(&self, condition: CmoCondition) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.condition == condition)
            .map(|r| (r.parameter, r.sup_oscillation))
            .collect()
    }

    /// Last value of the curve, or 0 for an empty curve.
    pub fn limit_value(&self, condition: CmoCondition) -> f64 {
        self.curve(condition).last().map(|c| c.1).unwrap_or(0.0)
    }

    pub fn vanishes(&self, condition: CmoCondition, threshold: f64) -> bool {
        self.limit_value(condition) <= threshold
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["condition", "parameter", "sup_oscillation"])?;
        for r in &self.rows {
            w.write_record([
                r.condition.label().to_string(),
                format!("{:.10e}", r.parameter),
                format!("{:.10e}", r.sup_oscillation),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sup-oscillation profiles for the three CMO conditions.
///
/// Condition (i) is tabulated at `δ = 2L` for each lattice length `L` of at
/// least two cells (intervals of length at most `L`), condition (ii) at `R = L/2` (intervals of
/// length at least `L`), and condition (iii) at `R = L` for lattice lengths
/// `L` below half the window.
pub fn cmo_profile(b: &GridFunction, lattice: &IntervalLattice) -> Result<CmoProfile> {
    if lattice.level_count() < 4 {
        return Err(Error::InvalidArgument(format!(
            "CMO profiles need at least 4 dyadic scales, lattice has {}",
            lattice.level_count()
        )));
    }
    let grid = *b.grid();
    let h = grid.step;
    let osc = lattice_oscillations(b, lattice)?;
    let levels: Vec<u32> = lattice.levels().collect();
    let per_level: Vec<f64> = levels
        .iter()
        .map(|&l| {
            osc.iter()
                .filter(|(li, _)| li.cells == 1 << l)
                .map(|(_, m)| *m)
                .fold(0.0, f64::max)
        })
        .collect();
    let mut rows = Vec::new();
    for (i, &l) in levels.iter().enumerate().rev() {
        if l == 0 {
            // a single cell has no oscillation
            continue;
        }
        let len = (1usize << l) as f64 * h;
        let sup = per_level[..=i].iter().copied().fold(0.0, f64::max);
        rows.push(CmoRow {
            condition: CmoCondition::SmallScale,
            parameter: 2.0 * len,
            sup_oscillation: sup,
        });
    }
    for (i, &l) in levels.iter().enumerate() {
        let len = (1usize << l) as f64 * h;
        let sup = per_level[i..].iter().copied().fold(0.0, f64::max);
        rows.push(CmoRow {
            condition: CmoCondition::LargeScale,
            parameter: 0.5 * len,
            sup_oscillation: sup,
        });
    }
    let half_window = grid.window().radius;
    for &l in &levels {
        let r = (1usize << l) as f64 * h;
        if r >= half_window {
            break;
        }
        let ball = Interval::new(0.0, r)?;
        let sup = osc
            .iter()
            .filter(|(li, _)| {
                let iv = li.interval(&grid);
                iv.hi() <= ball.lo() + 1e-9 * h || iv.lo() >= ball.hi() - 1e-9 * h
            })
            .map(|(_, m)| *m)
            .fold(0.0, f64::max);
        rows.push(CmoRow {
            condition: CmoCondition::FarField,
            parameter: r,
            sup_oscillation: sup,
        });
    }
    Ok(CmoProfile { rows })
}

/// True when `supp f ⊂ I` and `‖f‖_q ≤ |I|^{-λ/q'}`, with `params = (q, λ)`.
pub fn is_block(f: &GridFunction, interval: &Interval, params: &MorreyParams) -> Result<bool> {
    params.validate()?;
    if !f.supported_in(interval) {
        return Ok(false);
    }
    let norm = f.lp_norm_full(params.p)?;
    let bound = interval.length().powf(-params.lambda / params.p_prime());
    Ok(norm <= bound * (1.0 + 1e-12))
}

/// Upper bound for `‖g‖_{h^{λ,q}}`, `params = (q, λ)`.
///
/// The candidate decompositions are: maximal blocks on the hull of runs of
/// consecutive support components, and inside a single component a recursive
/// halving. The cheapest one found is returned; every candidate is a genuine
/// block decomposition, so the result never undercuts the norm.
pub fn h_norm_upper(g: &GridFunction, params: &MorreyParams) -> Result<f64> {
    params.validate()?;
    let q = params.p;
    let expo = params.lambda / params.p_prime();
    let h = g.step();
    let pre = prefix(g.values().iter().map(|v| v.norm().powf(q) * h));
    // cost of one block carrying cells [a, b)
    let block = |a: usize, b: usize| -> f64 {
        let mass = pre[b] - pre[a];
        if mass <= 0.0 {
            return 0.0;
        }
        mass.powf(1.0 / q) * ((b - a) as f64 * h).powf(expo)
    };
    let components = components(g);
    let split: Vec<f64> = components
        .iter()
        .map(|&(a, b)| halving_cost(a, b, &block))
        .collect();
    let k = components.len();
    let mut best = vec![0.0f64; k + 1];
    for j in 0..k {
        let mut cost = best[j] + split[j];
        for i in 0..j {
            cost = cost.min(best[i] + block(components[i].0, components[j].1));
        }
        best[j + 1] = cost;
    }
    Ok(best[k])
}

/// Maximal runs `[a, b)` of nonzero cells.
fn components(g: &GridFunction) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, v) in g.values().iter().enumerate() {
        let nz = v.re != 0.0 || v.im != 0.0;
        match (nz, start) {
            (true, None) => start = Some(i),
            (false, Some(a)) => {
                out.push((a, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(a) = start {
        out.push((a, g.len()));
    }
    out
}

fn halving_cost(a: usize, b: usize, block: &impl Fn(usize, usize) -> f64) -> f64 {
    let whole = block(a, b);
    if b - a < 2 {
        return whole;
    }
    let mid = a + (b - a) / 2;
    whole.min(halving_cost(a, mid, block) + halving_cost(mid, b, block))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::from_endpoints(a, b).unwrap()
    }

    fn grid() -> Grid {
        Grid::covering(-8.0, 8.0, 1.0 / 64.0).unwrap()
    }

    fn random_step(rng: &mut ChaCha8Rng, g: Grid, pieces: usize) -> GridFunction {
        let cuts: Vec<f64> = {
            let mut c: Vec<f64> = (0..pieces).map(|_| rng.gen_range(-6.0..6.0)).collect();
            c.sort_by(f64::total_cmp);
            c
        };
        let heights: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(-2.0..2.0)).collect();
        GridFunction::from_real_fn(g, |x| heights[cuts.iter().filter(|&&c| c < x).count()])
    }

    /// Brute force over every cell-aligned interval with a dyadic number of cells.
    fn morrey_oracle(f: &GridFunction, p: f64, lambda: f64) -> f64 {
        let n = f.len();
        let h = f.step();
        let mut best = 0.0f64;
        let mut len = 1;
        while len <= n {
            for s in 0..=(n - len) {
                let mass: f64 = f.values()[s..s + len].iter().map(|v| v.norm().powf(p) * h).sum();
                best = best.max(mass / (0.5 * len as f64 * h).powf(lambda));
            }
            len *= 2;
        }
        best.powf(1.0 / p)
    }

    #[test]
    fn params_validation() {
        assert!(MorreyParams::new(1.0, 0.5).is_err());
        assert!(MorreyParams::new(2.0, 1.0).is_err());
        let p = MorreyParams::new(3.0, 0.25).unwrap();
        assert!((1.0 / p.p + 1.0 / p.p_prime() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lattice_shape() {
        let g = Grid::covering(0.0, 1.0, 1.0 / 16.0).unwrap();
        let lat = IntervalLattice::for_grid(g).unwrap();
        assert_eq!(lat.level_count(), 5);
        for l in lat.levels() {
            let level = lat.level(l);
            // every cell is covered at every scale
            for c in 0..16isize {
                assert!(level.iter().any(|li| li.start <= c && c < li.end()));
            }
        }
        assert_eq!(lat.level_inside(4), vec![LatticeInterval { start: 0, cells: 16 }]);
        assert!(IntervalLattice::new(g, 0, 5, 4).is_err());
    }

    #[test]
    fn morrey_indicator() {
        let g = grid();
        let lat = IntervalLattice::for_grid(g).unwrap();
        let f = GridFunction::indicator(g, &iv(0.0, 1.0));
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        let (v, arg) = morrey_norm_argmax(&f, &params, &lat).unwrap();
        assert!((v - 2f64.powf(0.25)).abs() < 0.02 * 2f64.powf(0.25));
        assert!(arg.cells <= 64);
        assert_eq!(morrey_norm(&GridFunction::zeros(g), &params, &lat).unwrap(), 0.0);
        let scaled = f.scaled(Complex64::new(0.0, -3.0));
        assert!((morrey_norm(&scaled, &params, &lat).unwrap() - 3.0 * v).abs() < 1e-12);
        assert!(matches!(
            morrey_norm(&f, &MorreyParams { p: 0.5, lambda: 0.5 }, &lat),
            Err(Error::InvalidExponent(_))
        ));
    }

    #[test]
    fn morrey_matches_brute_force() {
        let g = Grid::covering(-1.0, 1.0, 1.0 / 32.0).unwrap();
        let lat = IntervalLattice::new(g, 0, 6, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let vals: Vec<Complex64> = (0..g.len).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
            let f = GridFunction::new(g, vals).unwrap();
            for (p, l) in [(2.0, 0.5), (1.5, 0.25), (4.0, 0.75)] {
                let params = MorreyParams::new(p, l).unwrap();
                let a = morrey_norm(&f, &params, &lat).unwrap();
                let b = morrey_oracle(&f, p, l);
                // the lattice also sees intervals overhanging the window
                assert!(a >= b * (1.0 - 1e-12), "{a} < {b}");
                assert!(a <= b * 2f64.powf(l / p) + 1e-12);
            }
        }
    }

    #[test]
    fn mean_oscillation_examples() {
        let g = grid();
        let heaviside = GridFunction::from_real_fn(g, |x| if x >= 0.0 { 1.0 } else { 0.0 });
        assert!((mean_oscillation(&heaviside, &iv(-1.0, 1.0)).unwrap() - 0.5).abs() <= g.step);
        let lin = GridFunction::from_real_fn(g, |x| x);
        assert!((mean_oscillation(&lin, &iv(0.0, 2.0)).unwrap() - 0.5).abs() <= g.step);
        let c = GridFunction::from_real_fn(g, |_| 4.2);
        assert!(mean_oscillation(&c, &iv(0.3, 1.7)).unwrap() < 1e-14);
        assert!(matches!(mean_oscillation(&c, &iv(7.0, 9.0)), Err(Error::OutOfWindow { .. })));
        let lat = IntervalLattice::for_grid(g).unwrap();
        let n = bmo_norm(&heaviside, &lat).unwrap();
        assert!((n - 0.5).abs() < 0.01);
        let shifted = heaviside.map(|v| v + 17.0);
        assert!((bmo_norm(&shifted, &lat).unwrap() - n).abs() < 1e-12);
        assert_eq!(bmo_norm(&c, &lat).unwrap(), 0.0);
    }

    #[test]
    fn median_examples() {
        let g = grid();
        let b = GridFunction::indicator(g, &iv(0.0, 0.5));
        assert_eq!(median(&b, &iv(0.0, 1.0)).unwrap(), 0.5);
        let c = GridFunction::from_real_fn(g, |_| -1.25);
        assert_eq!(median(&c, &iv(-3.0, 1.0)).unwrap(), -1.25);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let i = iv(-4.0, 4.0);
        for _ in 0..100 {
            let f = random_step(&mut rng, g, 6);
            let alpha = median(&f, &i).unwrap();
            let cells = g.window_cells(&i);
            let m = cells.len();
            let above = f.values()[cells.clone()].iter().filter(|v| v.re > alpha).count();
            let below = f.values()[cells.clone()].iter().filter(|v| v.re < alpha).count();
            assert!(2 * above <= m && 2 * below <= m);
            let dev = |c: f64| -> f64 { f.values()[cells.clone()].iter().map(|v| (v.re - c).abs()).sum() };
            let at_median = dev(alpha);
            for _ in 0..100 {
                let c = rng.gen_range(-3.0..3.0);
                assert!(at_median <= dev(c) + 1e-9);
            }
        }
    }

    /// `inf_c` over a fine grid of candidate constants.
    fn omega_oracle(b: &GridFunction, i: &Interval, mu: f64) -> f64 {
        let vals: Vec<f64> = b.values()[b.grid().window_cells(i)].iter().map(|v| v.re).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut cands: Vec<f64> = (0..=2000).map(|k| lo + (hi - lo) * k as f64 / 2000.0).collect();
        for a in &vals {
            for c in &vals {
                cands.push(0.5 * (a + c));
            }
        }
        cands
            .into_iter()
            .map(|c| shifted_rearrangement(b, i, c, mu * i.length()).unwrap())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn local_mean_oscillation_examples() {
        let g = grid();
        let b = GridFunction::indicator(g, &iv(0.0, 0.5));
        let i = iv(0.0, 1.0);
        assert!((local_mean_oscillation(&b, &i, 0.125).unwrap() - 0.5).abs() < 1e-12);
        assert!((omega_oracle(&b, &i, 0.125) - 0.5).abs() < 1e-12);
        let c = GridFunction::from_real_fn(g, |_| 2.0);
        for mu in [0.01, 0.125, 0.5, 0.99] {
            assert_eq!(local_mean_oscillation(&c, &i, mu).unwrap(), 0.0);
        }
        assert!(local_mean_oscillation(&b, &i, 0.0).is_err());
        assert!(local_mean_oscillation(&b, &i, 1.0).is_err());
    }

    #[test]
    fn local_mean_oscillation_matches_oracle_and_is_monotone() {
        let g = Grid::covering(-2.0, 2.0, 1.0 / 16.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let i = iv(-1.5, 1.0);
        for _ in 0..50 {
            let f = random_step(&mut rng, g, 5).map(|v| v + Complex64::new(0.0, 0.0));
            let f = GridFunction::from_real_fn(g, |x| f.value_at(x).re + if x.abs() < 0.2 { x } else { 0.0 });
            let mut prev = f64::INFINITY;
            for mu in [0.05, 0.125, 0.3, 0.5, 0.8] {
                let w = local_mean_oscillation(&f, &i, mu).unwrap();
                assert!(w <= prev + 1e-12);
                prev = w;
            }
            let w = local_mean_oscillation(&f, &i, 0.125).unwrap();
            assert!((w - omega_oracle(&f, &i, 0.125)).abs() < 1e-12);
        }
    }

    #[test]
    fn cmo_profiles() {
        let g = Grid::covering(-128.0, 128.0, 1.0 / 128.0).unwrap();
        let lat = IntervalLattice::for_grid(g).unwrap();
        let bump = GridFunction::from_real_fn(g, |x| if x.abs() < 1.0 { (-1.0 / (1.0 - x * x)).exp() } else { 0.0 });
        let prof = cmo_profile(&bump, &lat).unwrap();
        let lip = 0.8; // max |d/dx exp(-1/(1-x^2))| is about 0.77
        for (delta, sup) in prof.curve(CmoCondition::SmallScale) {
            assert!(sup <= lip * delta / 4.0 + 1e-12, "{delta} {sup}");
        }
        let threshold = 0.05 * bmo_norm(&bump, &lat).unwrap();
        assert!(prof.vanishes(CmoCondition::SmallScale, threshold));
        assert!(prof.vanishes(CmoCondition::FarField, threshold));
        assert!(prof.vanishes(CmoCondition::LargeScale, threshold));

        let g = grid();
        let lat = IntervalLattice::for_grid(g).unwrap();
        let log = GridFunction::from_real_fn(g, |x| x.abs().max(g.step).ln());
        let prof = cmo_profile(&log, &lat).unwrap();
        let small = prof.curve(CmoCondition::SmallScale);
        assert!(small.iter().all(|&(_, s)| s > 0.15), "{small:?}");

        let c = GridFunction::from_real_fn(g, |_| 3.0);
        let prof = cmo_profile(&c, &lat).unwrap();
        assert!(prof.rows.iter().all(|r| r.sup_oscillation == 0.0));
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("condition,parameter,sup_oscillation\n"));
        let shallow = IntervalLattice::new(g, 0, 2, 4).unwrap();
        assert!(cmo_profile(&c, &shallow).is_err());
    }

    #[test]
    fn blocks() {
        let g = grid();
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        let q = params.p;
        let qp = params.p_prime();
        let i = iv(1.0, 2.0);
        let height = i.length().powf(-1.0 / q - params.lambda / qp);
        let block = &GridFunction::indicator(g, &i) * height;
        assert!(is_block(&block, &i, &params).unwrap());
        assert!(is_block(&GridFunction::zeros(g), &i, &params).unwrap());
        assert!(!is_block(&(&block * 2.0), &i, &params).unwrap());
        assert!(!is_block(&block, &iv(1.0, 1.5), &params).unwrap());
        assert!((h_norm_upper(&block, &params).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn h_norm_upper_sums_and_scales() {
        let g = grid();
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        let maximal = |i: Interval| {
            &GridFunction::indicator(g, &i) * i.length().powf(-1.0 / params.p - params.lambda / params.p_prime())
        };
        let g2 = &(&maximal(iv(-7.0, -6.5)) * 2.0) + &(&maximal(iv(6.5, 7.0)) * 3.0);
        assert!((h_norm_upper(&g2, &params).unwrap() - 5.0).abs() < 1e-12);
        let scaled = g2.scaled(Complex64::new(-1.5, 2.0));
        assert!((h_norm_upper(&scaled, &params).unwrap() - 2.5 * 5.0).abs() < 1e-10);
        assert_eq!(h_norm_upper(&GridFunction::zeros(g), &params).unwrap(), 0.0);
    }

    #[test]
    fn duality_pairing() {
        let g = Grid::covering(-4.0, 4.0, 1.0 / 32.0).unwrap();
        let lat = IntervalLattice::for_grid(g).unwrap();
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let f = random_step(&mut rng, g, 8);
            let a = rng.gen_range(-3.0..2.0);
            let w = rng.gen_range(0.05..1.5);
            let gg = GridFunction::from_real_fn(g, |x| if x > a && x < a + w { (7.0 * x).sin() } else { 0.0 });
            let pairing = gg.product(&f).unwrap().integral().norm();
            let bound = h_norm_upper(&gg, &params.dual()).unwrap() * morrey_norm(&f, &params, &lat).unwrap();
            worst = worst.max(pairing / bound);
        }
        assert!(worst <= 4.0, "fitted pairing constant {worst}");
    }

    #[test]
    fn bmo_versus_local_oscillation() {
        let g = Grid::covering(-4.0, 4.0, 1.0 / 32.0).unwrap();
        let lat = IntervalLattice::for_grid(g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let b = random_step(&mut rng, g, 6);
            let bmo = bmo_norm(&b, &lat).unwrap();
            let sup_omega = lat
                .all_inside()
                .into_iter()
                .map(|li| local_mean_oscillation(&b, &li.interval(&g), 0.125).unwrap())
                .fold(0.0, f64::max);
            assert!(bmo >= 0.5 * sup_omega - 1e-12, "{bmo} vs {sup_omega}");
            if sup_omega > 0.0 {
                assert!(bmo / sup_omega <= 8.0);
            }
        }
    }
}
