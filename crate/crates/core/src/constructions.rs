//! Oscillation sets for a symbol on an interval, the mean-zero test functions
//! adapted to a symbol's median, their annulus bounds, and families of such
//! functions witnessing non-compactness of the commutator.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::LipschitzCurve;
use crate::error::{Error, Result};
use crate::grid::{CellSet, GridFunction, Interval};
use crate::operators::{commutator_image, commutator_values};
use crate::spaces::{
    bmo_norm, lattice_oscillations, local_oscillation_sorted, median, morrey_norm, IntervalLattice,
    LatticeInterval, MorreyParams,
};

/// Sets `E ⊂ I`, `F ⊂ Ĩ = I(x₀+4r, r)` on which `b` is separated by `ω_{1/8}(b; I)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationSets {
    pub e: CellSet,
    pub f: CellSet,
    pub sign: i8,
    pub omega: f64,
    pub alpha: f64,
    pub interval: Interval,
    pub tilde: Interval,
    /// `ω = 0`: the separation is vacuous.
    pub degenerate: bool,
}

impl OscillationSets {
    /// Checks the measure, sign and separation properties against `b`.
    pub fn verify(&self, b: &GridFunction) -> Result<()> {
        let h = b.step();
        let il = self.interval.length();
        let tl = self.tilde.length();
        let me = self.e.measure();
        let mf = self.f.measure();
        if (me - il / 16.0).abs() > h * (1.0 + 1e-9) {
            return Err(Error::ConstructionFailed(format!("|E| = {me}, expected {}", il / 16.0)));
        }
        if (mf - tl / 2.0).abs() > h * (1.0 + 1e-9) {
            return Err(Error::ConstructionFailed(format!("|F| = {mf}, expected {}", tl / 2.0)));
        }
        if me * mf < il * il / 64.0 - 2.0 * h * il {
            return Err(Error::ConstructionFailed(format!("|E||F| = {} too small", me * mf)));
        }
        let s = self.sign as f64;
        for &x in self.e.indices() {
            let bx = b.values()[x].re;
            for &y in self.f.indices() {
                let d = bx - b.values()[y].re;
                if s * d < 0.0 || d.abs() < self.omega * (1.0 - 1e-12) {
                    return Err(Error::ConstructionFailed(format!(
                        "pair ({x}, {y}) violates separation: b(x)-b(y) = {d}, omega = {}",
                        self.omega
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builds `E`, `F` and the sign for `b` on `I`.
///
/// `ℰ` keeps the `⌈m/8⌉` cells of `I` farthest from the median `α` of `b` on
/// `Ĩ` (ties drop the leftmost cell first); `E` is the larger signed half of
/// `ℰ` trimmed to `⌈|ℰ|/2⌉` cells, and `F` the `⌈m̃/2⌉` cells of `Ĩ` on the
/// opposite side of `α`, most extreme first.
pub fn oscillation_sets(b: &GridFunction, interval: &Interval) -> Result<OscillationSets> {
    let grid = *b.grid();
    grid.require_inside(&interval.scaled(5.0))?;
    let tilde = Interval::new(interval.center + 4.0 * interval.radius, interval.radius)?;
    let alpha = median(b, &tilde)?;
    let cells: Vec<usize> = grid.window_cells(interval).collect();
    let m = cells.len();
    if m == 0 {
        return Err(Error::InvalidArgument("interval contains no cells".into()));
    }
    let re = |i: usize| b.values()[i].re;
    let mut sorted: Vec<f64> = cells.iter().map(|&i| re(i)).collect();
    sorted.sort_by(f64::total_cmp);
    let omega = local_oscillation_sorted(&sorted, 0.125);

    let k = (m as f64 / 8.0 - 1e-9).ceil().max(1.0) as usize;
    let mut by_dev = cells.clone();
    by_dev.sort_by(|&x, &y| (re(x) - alpha).abs().total_cmp(&(re(y) - alpha).abs()).then(x.cmp(&y)));
    let script_e = &by_dev[m - k..];
    let e1: Vec<usize> = script_e.iter().copied().filter(|&i| re(i) >= alpha).collect();
    let e2: Vec<usize> = script_e.iter().copied().filter(|&i| re(i) <= alpha).collect();
    let (chosen, sign) = if e1.len() >= e2.len() { (e1, 1i8) } else { (e2, -1i8) };
    let half = (k + 1) / 2;
    // chosen is ordered by increasing deviation; keep the far end
    let e = chosen[chosen.len() - half..].to_vec();

    let tcells: Vec<usize> = grid.window_cells(&tilde).collect();
    let mt = tcells.len();
    let mut side: Vec<usize> = tcells
        .into_iter()
        .filter(|&i| if sign > 0 { re(i) <= alpha } else { re(i) >= alpha })
        .collect();
    if sign > 0 {
        side.sort_by(|&x, &y| re(x).total_cmp(&re(y)).then(x.cmp(&y)));
    } else {
        side.sort_by(|&x, &y| re(y).total_cmp(&re(x)).then(x.cmp(&y)));
    }
    let want = (mt + 1) / 2;
    if side.len() < want {
        return Err(Error::ConstructionFailed(format!(
            "level set of the median has {} cells, needs {want}",
            side.len()
        )));
    }
    side.truncate(want);

    let sets = OscillationSets {
        e: CellSet::new(grid, e)?,
        f: CellSet::new(grid, side)?,
        sign,
        omega,
        alpha,
        interval: *interval,
        tilde,
        degenerate: omega == 0.0,
    };
    Ok(sets)
}

/// Mean-zero function on `I_j` that is positive where `b` exceeds its median
/// and negative where it falls below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundFn {
    pub f: GridFunction,
    pub interval: Interval,
    pub a: f64,
    pub alpha: f64,
    pub params: MorreyParams,
    /// `|I_j|^{-(1-λ)/p}`
    pub height: f64,
}

/// `f_j = |I_j|^{-(1-λ)/p} (χ_{b>α} - χ_{b<α} - a_j χ_{I_j})` with `α` the median of `b` on `I_j`.
pub fn lower_bound_testfn(b: &GridFunction, interval: &Interval, params: &MorreyParams) -> Result<LowerBoundFn> {
    let params = MorreyParams::new(params.p, params.lambda)?;
    let alpha = median(b, interval)?;
    let grid = *b.grid();
    let cells = grid.window_cells(interval);
    let m = cells.len();
    let above = cells.clone().filter(|&i| b.values()[i].re > alpha).count();
    let below = cells.clone().filter(|&i| b.values()[i].re < alpha).count();
    let a = (above as f64 - below as f64) / m as f64;
    let height = interval.length().powf(-(1.0 - params.lambda) / params.p);
    let mut f = GridFunction::zeros(grid);
    for i in cells.clone() {
        let v = b.values()[i].re;
        let s = if v > alpha {
            1.0
        } else if v < alpha {
            -1.0
        } else {
            0.0
        };
        f.values_mut()[i] = Complex64::new(height * (s - a), 0.0);
    }
    let lb = LowerBoundFn {
        f,
        interval: *interval,
        a,
        alpha,
        params,
        height,
    };
    lb.verify(b)?;
    Ok(lb)
}

impl LowerBoundFn {
    pub fn verify(&self, b: &GridFunction) -> Result<()> {
        if !self.f.supported_in(&self.interval) {
            return Err(Error::ConstructionFailed("support leaves I_j".into()));
        }
        let total = self.f.integral().norm();
        let scale = self.f.l1_norm().max(f64::MIN_POSITIVE);
        if total > 1e-10 * scale {
            return Err(Error::ConstructionFailed(format!("integral {total} is not zero")));
        }
        if self.a.abs() > 0.5 + 1e-12 {
            return Err(Error::ConstructionFailed(format!("|a_j| = {} exceeds 1/2", self.a.abs())));
        }
        for i in self.f.support_cells() {
            if self.f.values()[i].re * (b.values()[i].re - self.alpha) < 0.0 {
                return Err(Error::ConstructionFailed(format!("f_j (b - alpha) < 0 at cell {i}")));
            }
        }
        Ok(())
    }
}

/// Left-hand sides of the annulus estimates at scale `2^k` and their common unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusBounds {
    pub k: u32,
    /// `∫_{I_j^k} |[b,C_Γ] f_j|^p` over `(x_j + 2^k r_j, x_j + 2^{k+1} r_j)`
    pub lower_lhs: f64,
    /// `∫ |[b,C_Γ] f_j|^p` over `2^{k+1} I_j \ 2^k I_j`
    pub upper_lhs: f64,
    /// `|I_j|^{p-1+λ} / |2^k I_j|^{p-1}`
    pub unit: f64,
}

pub fn annulus_bounds(
    curve: &LipschitzCurve,
    b: &GridFunction,
    lb: &LowerBoundFn,
    k: u32,
    params: &MorreyParams,
) -> Result<AnnulusBounds> {
    let params = MorreyParams::new(params.p, params.lambda)?;
    let grid = *b.grid();
    let ij = lb.interval;
    let outer = ij.scaled(2f64.powi(k as i32 + 1));
    let inner = ij.scaled(2f64.powi(k as i32));
    grid.require_inside(&outer)?;
    let h = grid.step;
    let (olo, ohi) = grid.cell_range(&outer);
    let (ilo, ihi) = grid.cell_range(&inner);
    let p = params.p;
    let sum = |range: std::ops::Range<isize>| -> Result<f64> {
        Ok(commutator_values(curve, b, &lb.f, range)?
            .iter()
            .map(|v| v.norm().powf(p) * h)
            .sum())
    };
    let left = sum(olo..ilo)?;
    let right_lo = ihi.max(grid.cell_range(&Interval::from_endpoints(inner.hi(), outer.hi())?).0);
    let right = sum(right_lo..ohi)?;
    let annulus = Interval::from_endpoints(inner.hi(), outer.hi())?;
    let (alo, ahi) = grid.cell_range(&annulus);
    let lower = if (alo, ahi) == (right_lo, ohi) { right } else { sum(alo..ahi)? };
    let unit = ij.length().powf(p - 1.0 + params.lambda) / inner.length().powf(p - 1.0);
    Ok(AnnulusBounds {
        k,
        lower_lhs: lower,
        upper_lhs: left + right,
        unit,
    })
}

/// Fitted constants `C̃₁ = min_k lower/(δ^p unit)` and `C̃₂ = max_k upper/unit`.
pub fn fit_annulus_constants(rows: &[AnnulusBounds], delta: f64, p: f64) -> (f64, f64) {
    let c1 = rows
        .iter()
        .map(|r| r.lower_lhs / (delta.powf(p) * r.unit))
        .fold(f64::INFINITY, f64::min);
    let c2 = rows.iter().map(|r| r.upper_lhs / r.unit).fold(0.0, f64::max);
    (c1, c2)
}

/// Smallest power of two `A₂` with
/// `8^{1-p} C̃₁ δ^p A₁^{1-p} > 2 C̃₂ / ((1 - 2^{1-p}) 2^{⌊log₂ A₂⌋ (p-1)})`.
pub fn required_separation(c1: f64, c2: f64, delta: f64, p: f64, a1: f64) -> f64 {
    let lhs = 8f64.powf(1.0 - p) * c1 * delta.powf(p) * a1.powf(1.0 - p);
    let need = 2.0 * c2 / ((1.0 - 2f64.powf(1.0 - p)) * lhs);
    let e = (need.log2() / (p - 1.0)).floor() + 1.0;
    2f64.powf(e.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Shrinking,
    Growing,
    Escaping,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::Shrinking => "shrinking",
            Scenario::Growing => "growing",
            Scenario::Escaping => "escaping",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "shrinking" => Ok(Scenario::Shrinking),
            "growing" => Ok(Scenario::Growing),
            "escaping" => Ok(Scenario::Escaping),
            other => Err(Error::InvalidArgument(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Selection knobs for [`noncompact_witness`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessOptions {
    /// Oscillation threshold; `None` means half of the BMO norm.
    pub delta: Option<f64>,
    /// Ratio between consecutive scales (shrinking, growing) or distances (escaping).
    pub ratio: f64,
    /// Smallest admissible interval, in cells.
    pub min_cells: usize,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        Self {
            delta: None,
            ratio: 2.0,
            min_cells: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub j: usize,
    pub l: usize,
    pub m: usize,
    pub distance: f64,
    pub unit: f64,
    pub fitted_bound: f64,
}

/// A family of test functions with pairwise distances of their commutator images.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub scenario: Scenario,
    pub delta: f64,
    pub ratio: f64,
    pub family: Vec<LowerBoundFn>,
    pub oscillations: Vec<f64>,
    pub image_norms: Vec<f64>,
    pub rows: Vec<WitnessRow>,
    /// `min distance / unit` over all pairs.
    pub fitted_bound: f64,
}

impl Witness {
    pub fn min_distance(&self) -> f64 {
        self.rows.iter().map(|r| r.distance).fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["scenario", "j", "l", "m", "distance", "unit", "fitted_bound"])?;
        for r in &self.rows {
            w.write_record([
                self.scenario.label().to_string(),
                r.j.to_string(),
                r.l.to_string(),
                r.m.to_string(),
                format!("{:.10e}", r.distance),
                format!("{:.10e}", r.unit),
                format!("{:.10e}", r.fitted_bound),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn best_per_level(osc: &[(LatticeInterval, f64)], delta: f64) -> Vec<(LatticeInterval, f64)> {
    let mut best: std::collections::BTreeMap<usize, (LatticeInterval, f64)> = Default::default();
    for &(li, m) in osc {
        if m <= delta {
            continue;
        }
        let e = best.entry(li.cells).or_insert((li, m));
        if m > e.1 {
            *e = (li, m);
        }
    }
    best.into_values().collect()
}

fn pick_by_ratio(levels: impl Iterator<Item = (LatticeInterval, f64)>, ratio: f64, count: usize) -> Vec<(LatticeInterval, f64)> {
    let mut out: Vec<(LatticeInterval, f64)> = Vec::new();
    for (li, m) in levels {
        if out.len() == count {
            break;
        }
        let ok = out.last().map_or(true, |(prev, _)| {
            let (a, b) = (prev.cells as f64, li.cells as f64);
            a.max(b) / a.min(b) >= ratio * (1.0 - 1e-12)
        });
        if ok {
            out.push((li, m));
        }
    }
    out
}

/// Chooses intervals with `M(b, I) > δ` for the scenario and measures the
/// separation of the commutator images of their test functions.
pub fn noncompact_witness(
    curve: &LipschitzCurve,
    b: &GridFunction,
    scenario: Scenario,
    params: &MorreyParams,
    count: usize,
    options: &WitnessOptions,
) -> Result<Witness> {
    let grid = *b.grid();
    let lattice = IntervalLattice::for_grid(grid)?;
    let delta = match options.delta {
        Some(d) => d,
        None => 0.5 * bmo_norm(b, &lattice)?,
    };
    if !(delta > 0.0) {
        return Err(Error::WitnessUnavailable("symbol has no oscillation above zero".into()));
    }
    let osc: Vec<(LatticeInterval, f64)> = lattice_oscillations(b, &lattice)?
        .into_iter()
        .filter(|(li, _)| li.cells >= options.min_cells)
        .collect();
    let chosen = match scenario {
        Scenario::Shrinking => {
            let levels = best_per_level(&osc, delta);
            let mut picked = pick_by_ratio(levels.into_iter(), options.ratio, count);
            picked.reverse();
            picked
        }
        Scenario::Growing => {
            let levels = best_per_level(&osc, delta);
            let mut picked = pick_by_ratio(levels.into_iter().rev(), options.ratio, count);
            picked.reverse();
            picked
        }
        Scenario::Escaping => escaping(&osc, delta, options.ratio, count, &grid),
    };
    if chosen.len() < 2 {
        return Err(Error::WitnessUnavailable(format!(
            "found {} interval(s) with M(b, I) > {delta:.4} for the {} scenario",
            chosen.len(),
            scenario.label()
        )));
    }
    let intervals: Vec<Interval> = chosen.iter().map(|(li, _)| li.interval(&grid)).collect();
    let mut w = witness_from_intervals(curve, b, scenario, &intervals, params)?;
    w.delta = delta;
    w.ratio = options.ratio;
    Ok(w)
}

fn escaping(
    osc: &[(LatticeInterval, f64)],
    delta: f64,
    ratio: f64,
    count: usize,
    grid: &crate::grid::Grid,
) -> Vec<(LatticeInterval, f64)> {
    // candidates nearest the origin first; among equals the most oscillating
    let mut cands: Vec<(LatticeInterval, f64, f64, f64)> = osc
        .iter()
        .filter(|(_, m)| *m > delta)
        .map(|&(li, m)| {
            let iv = li.interval(grid);
            (li, m, iv.center.abs(), iv.radius)
        })
        .collect();
    cands.sort_by(|a, b| {
        a.2.total_cmp(&b.2)
            .then(b.1.total_cmp(&a.1))
            .then(a.0.cells.cmp(&b.0.cells))
            .then(a.0.start.cmp(&b.0.start))
    });
    let mut out: Vec<(LatticeInterval, f64, f64, f64)> = Vec::new();
    for c in cands {
        if out.len() == count {
            break;
        }
        let ok = out.last().map_or(true, |p| c.2 - c.3 >= ratio * (p.2 + p.3));
        if ok {
            out.push(c);
        }
    }
    out.into_iter().map(|(li, m, _, _)| (li, m)).collect()
}

/// Builds the test functions on the given intervals and the pairwise Morrey
/// distances of their commutator images.
pub fn witness_from_intervals(
    curve: &LipschitzCurve,
    b: &GridFunction,
    scenario: Scenario,
    intervals: &[Interval],
    params: &MorreyParams,
) -> Result<Witness> {
    let grid = *b.grid();
    let lattice = IntervalLattice::for_grid(grid)?;
    let family: Vec<LowerBoundFn> = intervals
        .iter()
        .map(|iv| lower_bound_testfn(b, iv, params))
        .collect::<Result<_>>()?;
    let oscillations: Vec<f64> = intervals
        .iter()
        .map(|iv| crate::spaces::mean_oscillation(b, iv))
        .collect::<Result<_>>()?;
    let images: Vec<GridFunction> = family
        .iter()
        .map(|lb| commutator_image(curve, b, &lb.f))
        .collect::<Result<_>>()?;
    let image_norms: Vec<f64> = images
        .iter()
        .map(|g| morrey_norm(g, params, &lattice))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..images.len())
        .flat_map(|l| (l + 1..images.len()).map(move |m| (l, m)))
        .collect();
    let distances: Vec<f64> = pairs
        .par_iter()
        .map(|&(l, m)| morrey_norm(&(&images[l] - &images[m]), params, &lattice))
        .collect::<Result<_>>()?;
    let units: Vec<f64> = pairs.iter().map(|&(l, m)| image_norms[l].min(image_norms[m])).collect();
    let fitted = distances
        .iter()
        .zip(&units)
        .map(|(d, u)| if *u > 0.0 { d / u } else { 0.0 })
        .fold(f64::INFINITY, f64::min);
    let rows = pairs
        .iter()
        .enumerate()
        .map(|(j, &(l, m))| WitnessRow {
            j,
            l,
            m,
            distance: distances[j],
            unit: units[j],
            fitted_bound: fitted,
        })
        .collect();
    Ok(Witness {
        scenario,
        delta: 0.0,
        ratio: 0.0,
        family,
        oscillations,
        image_norms,
        rows,
        fitted_bound: fitted,
    })
}
