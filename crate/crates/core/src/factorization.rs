//! Atoms, the `(g, h)` pair attached to an atom, the two-bump residual, its
//! chain-of-atoms decomposition, and the iterated factorization
//! `a = Σ λ (g C*h - h C g) + residual`.
//!
//! Every atom carries its own grid covering its support interval, so atoms of
//! very different sizes and positions can coexist without a common window.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::LipschitzCurve;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Interval};
use crate::operators::{adjoint_cauchy, adjoint_image, cauchy_at, cauchy_image, pv_cauchy};
use crate::spaces::{h_norm_upper, morrey_norm, IntervalLattice, MorreyParams};

/// Cells used for atoms created by the chain construction.
pub const ATOM_CELLS: usize = 64;

const MEAN_TOL: f64 = 1e-12;

/// `f` supported in `I(x₀, r)` with `‖f‖_∞ ≤ 1/r` and `∫f = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    f: GridFunction,
    interval: Interval,
}

impl Atom {
    pub fn f(&self) -> &GridFunction {
        &self.f
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn center(&self) -> f64 {
        self.interval.center
    }

    pub fn radius(&self) -> f64 {
        self.interval.radius
    }

    pub fn value_at(&self, x: f64) -> Complex64 {
        self.f.value_at(x)
    }
}

/// Grid of `cells` equal cells exactly covering `interval`.
pub fn local_grid(interval: &Interval, cells: usize) -> Grid {
    Grid {
        origin: interval.lo(),
        step: interval.length() / cells as f64,
        len: cells,
    }
}

/// Validates the atom conditions.
pub fn make_atom(f: GridFunction, interval: Interval) -> Result<Atom> {
    if !f.supported_in(&interval) {
        return Err(Error::InvalidArgument("atom support leaves its interval".into()));
    }
    let l1 = f.l1_norm();
    let mean = f.integral().norm();
    if mean > MEAN_TOL * l1 {
        return Err(Error::Cancellation {
            mean,
            tol: MEAN_TOL * l1,
        });
    }
    let size = f.max_abs() * interval.radius;
    if size > 1.0 + 1e-12 {
        return Err(Error::AtomSize(size));
    }
    Ok(Atom { f, interval })
}

/// Like [`make_atom`] but divides `f` by `max(1, r‖f‖_∞)` first; returns the
/// atom and the factor removed (1 when no rescaling was needed).
pub fn make_atom_rescaled(f: GridFunction, interval: Interval) -> Result<(Atom, f64)> {
    let factor = (f.max_abs() * interval.radius).max(1.0);
    let atom = make_atom(f.scaled(Complex64::new(1.0 / factor, 0.0)), interval)?;
    Ok((atom, factor))
}

/// Atom `(χ_{right half} - χ_{left half}) / r` on `I`, sampled on `cells` cells.
pub fn half_and_half_atom(interval: Interval, cells: usize) -> Atom {
    let grid = local_grid(&interval, cells);
    let r = interval.radius;
    let c = interval.center;
    let f = GridFunction::from_real_fn(grid, |x| if x > c { 1.0 / r } else { -1.0 / r });
    Atom { f, interval }
}

/// Side on which the partner interval `I(y₀, r)` is placed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Rightward,
    Leftward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorPair {
    /// `χ_{I(y₀, r)}`
    pub g: GridFunction,
    /// `-a / C_Γ g(x₀)`
    pub h: GridFunction,
    pub coefficient: Complex64,
    pub n: u64,
    pub x0: f64,
    pub y0: f64,
    pub r: f64,
    /// `C_Γ g(x₀)`
    pub cg_x0: Complex64,
    pub source_atom: Atom,
}

impl FactorPair {
    pub fn g_interval(&self) -> Interval {
        Interval {
            center: self.y0,
            radius: self.r,
        }
    }

    /// `(g C_Γ* h - h C_Γ g)(x)` with `x` taken at the midpoint of its cell.
    pub fn term_at(&self, curve: &LipschitzCurve, x: f64) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        let gx = self.g.value_at(x);
        if gx != Complex64::new(0.0, 0.0) {
            let xs = cell_midpoint(self.g.grid(), x);
            v += gx * adjoint_cauchy(curve, &self.h, xs);
        }
        let hx = self.h.value_at(x);
        if hx != Complex64::new(0.0, 0.0) {
            let xs = cell_midpoint(self.h.grid(), x);
            v -= hx * pv_cauchy(curve, &self.g, xs);
        }
        v
    }
}

fn cell_midpoint(grid: &Grid, x: f64) -> f64 {
    grid.midpoint(((x - grid.origin) / grid.step).floor() as isize)
}

/// Builds `g = χ_{I(y₀, r)}` with `|x₀ - y₀| = N r` and `h = -a / C_Γ g(x₀)`,
/// with `C_Γ g` evaluated at `x₀` itself.
pub fn make_pair(curve: &LipschitzCurve, a: &Atom, n: u64) -> Result<FactorPair> {
    make_pair_with(curve, a, n, Direction::Rightward, None)
}

/// [`make_pair`] with an explicit direction and an optional window that must
/// contain the partner interval.
pub fn make_pair_with(
    curve: &LipschitzCurve,
    a: &Atom,
    n: u64,
    direction: Direction,
    window: Option<&Interval>,
) -> Result<FactorPair> {
    if n <= 10 {
        return Err(Error::InvalidArgument(format!("pair separation N must exceed 10, got {n}")));
    }
    let x0 = a.center();
    let r = a.radius();
    let y0 = match direction {
        Direction::Rightward => x0 + n as f64 * r,
        Direction::Leftward => x0 - n as f64 * r,
    };
    let target = Interval::new(y0, r)?;
    if let Some(w) = window {
        if !w.contains_interval(&target) {
            return Err(Error::out_of_window(target.lo(), target.hi(), w.lo(), w.hi()));
        }
    }
    let ag = *a.f.grid();
    let shift = (target.lo() - ag.origin) / ag.step;
    if (shift - shift.round()).abs() > 1e-6 {
        return Err(Error::ResampleRequired(
            "partner interval is not aligned with the atom's grid".into(),
        ));
    }
    let len = (target.length() / ag.step).round() as usize;
    let gg = Grid {
        origin: ag.origin + shift.round() * ag.step,
        step: ag.step,
        len,
    };
    let g = GridFunction::from_real_fn(gg, |_| 1.0);
    let c = cauchy_at(curve, &g, x0);
    if c.norm() < 1e-12 {
        return Err(Error::DegenerateDenominator(c.norm()));
    }
    let h = a.f.scaled(-1.0 / c);
    Ok(FactorPair {
        g,
        h,
        coefficient: Complex64::new(1.0, 0.0),
        n,
        x0,
        y0,
        r,
        cg_x0: c,
        source_atom: a.clone(),
    })
}

/// `a - (g C_Γ* h - h C_Γ g)`, held as its two pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// Piece on `I(x₀, r)`, on the atom's grid.
    pub near: GridFunction,
    /// Piece on `I(y₀, r)`, on `g`'s grid.
    pub far: GridFunction,
    pub near_interval: Interval,
    pub far_interval: Interval,
    pub n: u64,
    /// `∫` of the residual.
    pub mean: Complex64,
    /// `max|residual| · N · r`
    pub fitted_c: f64,
}

impl Residual {
    pub fn max_abs(&self) -> f64 {
        self.near.max_abs().max(self.far.max_abs())
    }

    pub fn l1_norm(&self) -> f64 {
        self.near.l1_norm() + self.far.l1_norm()
    }

    pub fn value_at(&self, x: f64) -> Complex64 {
        self.near.value_at(x) + self.far.value_at(x)
    }

    /// Both pieces on one grid spanning them.
    pub fn to_common_grid(&self) -> Result<GridFunction> {
        let a = self.near.grid();
        let b = self.far.grid();
        if !a.is_aligned_with(b) {
            return Err(Error::ResampleRequired("residual pieces are not aligned".into()));
        }
        let lo = a.origin.min(b.origin);
        let hi = a.end().max(b.end());
        let grid = Grid {
            origin: lo,
            step: a.step,
            len: ((hi - lo) / a.step).round() as usize,
        };
        Ok(&self.near.regrid(grid)? + &self.far.regrid(grid)?)
    }
}

/// Residual of the pair built from `a`.
pub fn residual(curve: &LipschitzCurve, a: &Atom, pair: &FactorPair) -> Result<Residual> {
    let cg = cauchy_image(curve, &pair.g, *a.f.grid())?;
    let near = a.f.zip_with(&pair.h.product(&cg)?, |av, hc| av + hc)?;
    let chh = adjoint_image(curve, &pair.h, *pair.g.grid())?;
    let far = pair.g.product(&chh)?.scaled(Complex64::new(-1.0, 0.0));
    let mean = near.integral() + far.integral();
    let res = Residual {
        near_interval: *a.interval(),
        far_interval: pair.g_interval(),
        n: pair.n,
        mean,
        fitted_c: 0.0,
        near,
        far,
    };
    let fitted_c = res.max_abs() * pair.n as f64 * pair.r;
    Ok(Residual { fitted_c, ..res })
}

/// Finite sum `Σ λ_k a_k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomicDecomposition {
    pub terms: Vec<(Complex64, Atom)>,
}

impl AtomicDecomposition {
    pub fn new(terms: Vec<(Complex64, Atom)>) -> Self {
        Self { terms }
    }

    pub fn single(atom: Atom) -> Self {
        Self::new(vec![(Complex64::new(1.0, 0.0), atom)])
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ |λ_k|`
    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|(l, _)| l.norm()).sum()
    }

    pub fn value_at(&self, x: f64) -> Complex64 {
        self.terms
            .iter()
            .filter(|(_, a)| a.f.grid().window().contains(x) || x == a.f.grid().origin)
            .map(|(l, a)| l * a.value_at(x))
            .sum()
    }
}

/// A bump of a two-bump function: its samples on a grid exactly covering `interval`.
#[derive(Clone, Debug)]
struct Bump {
    f: GridFunction,
    interval: Interval,
}

fn restrict_to(f: &GridFunction, interval: &Interval) -> Result<Bump> {
    let grid = *f.grid();
    let (lo, hi) = grid.cell_range(interval);
    let len = (hi - lo).max(0) as usize;
    let local = Grid {
        origin: grid.origin + lo as f64 * grid.step,
        step: grid.step,
        len,
    };
    if len == 0 || (len as f64 * grid.step - interval.length()).abs() > 1e-9 * interval.length() {
        return Err(Error::NotTwoBump(format!(
            "bump interval ({}, {}) is not a union of whole cells",
            interval.lo(),
            interval.hi()
        )));
    }
    let values = (lo..hi).map(|i| f.at(i)).collect();
    Ok(Bump {
        f: GridFunction::new(local, values)?,
        interval: Interval::from_endpoints(local.origin, local.end())?,
    })
}

/// Chain atoms and their total coefficient mass.
#[derive(Clone, Debug, Default)]
struct Chain {
    terms: Vec<(Complex64, Atom)>,
    mass: f64,
}

fn mean_free_bump(b: &Bump) -> Option<(Complex64, Atom)> {
    let m = b.f.integral();
    let avg = m / b.interval.length();
    let piece = b.f.map(|v| v - avg);
    let lambda = b.interval.radius * piece.max_abs();
    if lambda == 0.0 {
        return None;
    }
    let atom = Atom {
        f: piece.scaled(Complex64::new(1.0 / lambda, 0.0)),
        interval: b.interval,
    };
    Some((Complex64::new(lambda, 0.0), atom))
}

/// Atom `(χ_inner - χ_{outer \ inner}) / |inner|` on `outer` with `|outer| = 2|inner|`.
fn step_atom(outer: Interval, inner: Interval) -> Atom {
    let grid = local_grid(&outer, ATOM_CELLS);
    let v = 1.0 / inner.length();
    let f = GridFunction::from_real_fn(grid, |x| if x > inner.lo() && x < inner.hi() { v } else { -v });
    Atom { f, interval: outer }
}

/// Two-sided dyadic chain joining `left` and `right` (same radius `r̂`, left
/// ends `N r̂` apart).
///
/// The left intervals `J_k = [ℓ, ℓ + 2^{k+1} r̂]` grow rightward from the left
/// bump; the right intervals `Y_k` start at the right bump and are chosen on
/// coarser and coarser dyadic-like positions until `Y_K = J_K`.
fn chain(left: &Bump, right: &Bump, n: u64, build: bool) -> Result<Chain> {
    let rh = left.interval.radius;
    let base = left.interval.lo();
    let m1 = left.f.integral();
    let m2 = right.f.integral();
    let mut out = Chain::default();
    let push = |out: &mut Chain, l: Complex64, atom: Option<Atom>| {
        out.mass += l.norm();
        if let Some(a) = atom {
            out.terms.push((l, a));
        }
    };
    for b in [left, right] {
        let m = b.f.integral();
        let avg = m / b.interval.length();
        let lambda = b.interval.radius * b.f.values().iter().map(|v| (v - avg).norm()).fold(0.0, f64::max);
        if lambda > 0.0 {
            let atom = if build { mean_free_bump(b).map(|t| t.1) } else { None };
            push(&mut out, Complex64::new(lambda, 0.0), atom);
        }
    }
    let j = |k: u32| Interval::from_endpoints(base, base + 2f64.powi(k as i32 + 1) * rh);
    let mut s: u64 = n;
    let mut k: u32 = 0;
    while s != 0 {
        let big = 1u64 << (k + 2);
        let small = 1u64 << (k + 1);
        let next = if s % big <= small { s - s % big } else { s - s % small };
        let y_k = Interval::from_endpoints(base + s as f64 * rh, base + (s + small) as f64 * rh)?;
        let y_next = Interval::from_endpoints(base + next as f64 * rh, base + (next + big) as f64 * rh)?;
        if m1 != Complex64::new(0.0, 0.0) {
            let atom = build.then(|| step_atom(j(k + 1).unwrap(), j(k).unwrap()));
            push(&mut out, m1 / 2.0, atom);
        }
        if m2 != Complex64::new(0.0, 0.0) {
            let atom = build.then(|| step_atom(y_next, y_k));
            push(&mut out, m2 / 2.0, atom);
        }
        s = next;
        k += 1;
    }
    Ok(out)
}

fn chain_of_bumps(a: Bump, b: Bump, build: bool) -> Result<Chain> {
    let (left, right) = if a.interval.center <= b.interval.center { (a, b) } else { (b, a) };
    let rh = left.interval.radius;
    if (right.interval.radius - rh).abs() > 1e-9 * rh {
        return Err(Error::NotTwoBump("bumps have different radii".into()));
    }
    let gap = (right.interval.lo() - left.interval.lo()) / rh;
    if (gap - gap.round()).abs() > 1e-6 {
        return Err(Error::NotTwoBump(format!(
            "bump separation {gap} r is not a whole multiple of the radius"
        )));
    }
    if gap.round() == 0.0 {
        let merged = Bump {
            f: &left.f + &right.f,
            interval: left.interval,
        };
        let mut out = Chain::default();
        if let Some((l, atom)) = mean_free_bump(&merged) {
            out.mass = l.norm();
            if build {
                out.terms.push((l, atom));
            }
        }
        return Ok(out);
    }
    chain(&left, &right, gap.round() as u64, build)
}

/// Decomposes a mean-zero `u` supported in `I(x₀, r̂) ∪ I(y₀, r̂)`,
/// `r̂ = |x₀ - y₀| / N`, into atoms along a two-sided dyadic chain.
///
/// For `y₀ = x₀` the function must itself fit an interval centred at `x₀`
/// and a single atom is returned.
pub fn chain_atoms(u: &GridFunction, x0: f64, y0: f64, n: u64) -> Result<AtomicDecomposition> {
    let l1 = u.l1_norm();
    let mean = u.integral().norm();
    if mean > 1e-10 * l1.max(f64::MIN_POSITIVE) {
        return Err(Error::NotTwoBump(format!("integral {mean} is not zero")));
    }
    if l1 == 0.0 {
        return Ok(AtomicDecomposition::default());
    }
    let grid = *u.grid();
    if x0 == y0 {
        let reach = u
            .support_cells()
            .iter()
            .map(|&i| (grid.midpoint(i as isize) - x0).abs() + 0.5 * grid.step)
            .fold(0.0, f64::max);
        let cells = (reach / grid.step - 1e-9).ceil();
        let interval = Interval::new(x0, cells * grid.step)?;
        let bump = restrict_to(u, &interval)?;
        let (l, atom) = mean_free_bump(&bump).expect("nonzero function");
        return Ok(AtomicDecomposition::new(vec![(l, atom)]));
    }
    if n == 0 {
        return Err(Error::NotTwoBump("N must be positive for distinct centres".into()));
    }
    let rh = (x0 - y0).abs() / n as f64;
    let ix = Interval::new(x0, rh)?;
    let iy = Interval::new(y0, rh)?;
    for i in u.support_cells() {
        let x = grid.midpoint(i as isize);
        if !ix.contains(x) && !iy.contains(x) {
            return Err(Error::NotTwoBump(format!("u is nonzero at {x}, outside both bumps")));
        }
    }
    let chain = chain_of_bumps(restrict_to(u, &ix)?, restrict_to(u, &iy)?, true)?;
    Ok(AtomicDecomposition::new(chain.terms))
}

/// Coefficient mass of the chain decomposition of a residual, without building the atoms.
fn residual_chain(res: &Residual, build: bool) -> Result<Chain> {
    let near = restrict_to(&res.near, &res.near_interval)?;
    let far = restrict_to(&res.far, &res.far_interval)?;
    chain_of_bumps(near, far, build)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub coeff_re: f64,
    pub coeff_im: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub x0: f64,
    pub y0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub atoms_in: usize,
    pub mass_in: f64,
    pub mass_out: f64,
    pub kappa: f64,
    /// `Σ |λ| ‖g‖_{L^{p,λ}} ‖h‖_{h^{λ,p'}}` (upper bound for the last factor).
    pub pair_mass: f64,
    /// Largest `|∫ residual| / ‖λ a‖₁` in the round.
    pub max_cancellation: f64,
    /// Largest relative mismatch between a residual and its chain atoms.
    pub max_chain_error: f64,
    pub max_fitted_c: f64,
    pub pairs: Vec<PairSummary>,
}

/// Output of [`factorize`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub params: MorreyParams,
    pub rounds: Vec<RoundReport>,
    #[serde(skip)]
    pub pairs: Vec<Vec<FactorPair>>,
    #[serde(skip)]
    pub final_residual: Vec<(Complex64, Residual)>,
    /// Coefficient mass of the chain-atomized final residual.
    pub final_mass: f64,
    pub initial_mass: f64,
}

#[derive(Serialize)]
struct RoundJson<'a> {
    round: usize,
    atoms_in: usize,
    mass_in: f64,
    kappa: f64,
    pairs: &'a [PairSummary],
}

impl Factorization {
    /// `Σ_rounds Σ λ (g C*h - h C g)(x) + final residual(x)`.
    pub fn evaluate(&self, curve: &LipschitzCurve, x: f64) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        for round in &self.pairs {
            for p in round {
                if p.g.grid().window().contains(x) || p.h.grid().window().contains(x) {
                    v += p.coefficient * p.term_at(curve, x);
                }
            }
        }
        for (l, r) in &self.final_residual {
            v += l * r.value_at(x);
        }
        v
    }

    /// `max |input(x) - evaluate(x)| / max |input(x)|` over the points.
    pub fn reconstruction_error(&self, curve: &LipschitzCurve, input: &AtomicDecomposition, points: &[f64]) -> f64 {
        let (num, den) = points
            .par_iter()
            .map(|&x| {
                let a = input.value_at(x);
                ((a - self.evaluate(curve, x)).norm(), a.norm())
            })
            .reduce(|| (0.0, 0.0), |p, q| (p.0.max(q.0), p.1.max(q.1)));
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Sample points for [`Factorization::reconstruction_error`]: odd multiples
    /// of a sixty-fourth of the first atom's radius, which never fall on a cell
    /// boundary of any generated grid, across the first chain's reach.
    pub fn reconstruction_points(&self, input: &AtomicDecomposition, per_atom: usize) -> Vec<f64> {
        let mut pts = Vec::new();
        for (_, a) in &input.terms {
            let lo = a.interval().lo();
            let r = a.radius();
            let unit = r / 64.0;
            let span = 4.0 * self.n as f64 + 4.0;
            let total = (span * 64.0) as usize;
            let stride = (total / per_atom.max(1)).max(1);
            let mut j = 0usize;
            while j < total {
                pts.push(lo - 2.0 * self.n as f64 * r + (2 * j + 1) as f64 * unit);
                j += stride;
            }
            for j in 0..128usize {
                pts.push(lo + (2 * j + 1) as f64 * unit);
                pts.push(lo + self.n as f64 * r + (2 * j + 1) as f64 * unit);
            }
        }
        pts
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let rounds: Vec<RoundJson> = self
            .rounds
            .iter()
            .map(|r| RoundJson {
                round: r.round,
                atoms_in: r.atoms_in,
                mass_in: r.mass_in,
                kappa: r.kappa,
                pairs: &r.pairs,
            })
            .collect();
        serde_json::to_writer_pretty(writer, &rounds)?;
        Ok(())
    }
}

struct Processed {
    pair: FactorPair,
    residual: Residual,
    chain: Chain,
    pair_mass: f64,
    cancellation: f64,
    chain_error: f64,
}

fn process(
    curve: &LipschitzCurve,
    lambda: Complex64,
    atom: &Atom,
    n: u64,
    params: &MorreyParams,
    direction: Direction,
    build: bool,
) -> Result<Processed> {
    let mut pair = make_pair_with(curve, atom, n, direction, None)?;
    pair.coefficient = lambda;
    let res = residual(curve, atom, &pair)?;
    let chain = residual_chain(&res, true)?;
    let mut chain_error = 0.0f64;
    for piece in [&res.near, &res.far] {
        for i in 0..piece.len() {
            let x = piece.grid().midpoint(i as isize);
            let sum: Complex64 = chain.terms.iter().map(|(l, a)| l * a.value_at(x)).sum();
            chain_error = chain_error.max((sum - piece.values()[i]).norm());
        }
    }
    chain_error /= atom.f.max_abs().max(f64::MIN_POSITIVE);
    let lattice = IntervalLattice::for_grid(*pair.g.grid())?;
    let pair_mass = lambda.norm() * morrey_norm(&pair.g, params, &lattice)? * h_norm_upper(&pair.h, &params.dual())?;
    let cancellation = res.mean.norm() / atom.f.l1_norm().max(f64::MIN_POSITIVE);
    let chain = if build { chain } else { Chain { terms: Vec::new(), mass: chain.mass } };
    Ok(Processed {
        pair,
        residual: res,
        chain,
        pair_mass,
        cancellation,
        chain_error,
    })
}

/// Runs `rounds` rounds of pair construction and chain re-atomization.
pub fn factorize(
    curve: &LipschitzCurve,
    decomp: &AtomicDecomposition,
    n: u64,
    rounds: usize,
    params: &MorreyParams,
) -> Result<Factorization> {
    factorize_with(curve, decomp, n, rounds, params, Direction::Rightward)
}

pub fn factorize_with(
    curve: &LipschitzCurve,
    decomp: &AtomicDecomposition,
    n: u64,
    rounds: usize,
    params: &MorreyParams,
    direction: Direction,
) -> Result<Factorization> {
    let params = MorreyParams::new(params.p, params.lambda)?;
    let initial_mass = decomp.coefficient_sum();
    let mut out = Factorization {
        n,
        params,
        rounds: Vec::new(),
        pairs: Vec::new(),
        final_residual: Vec::new(),
        final_mass: initial_mass,
        initial_mass,
    };
    let mut current: Vec<(Complex64, Atom)> = decomp.terms.clone();
    for round in 1..=rounds {
        if current.is_empty() {
            break;
        }
        let last = round == rounds;
        let processed: Vec<Processed> = current
            .par_iter()
            .map(|(l, a)| process(curve, *l, a, n, &params, direction, !last))
            .collect::<Result<_>>()?;
        let mass_in: f64 = current.iter().map(|(l, _)| l.norm()).sum();
        let mass_out: f64 = processed
            .iter()
            .zip(&current)
            .map(|(p, (l, _))| l.norm() * p.chain.mass)
            .sum();
        let kappa = if mass_in > 0.0 { mass_out / mass_in } else { 0.0 };
        if kappa >= 1.0 {
            return Err(Error::NoContraction { kappa, n });
        }
        let report = RoundReport {
            round,
            atoms_in: current.len(),
            mass_in,
            mass_out,
            kappa,
            pair_mass: processed.iter().map(|p| p.pair_mass).sum(),
            max_cancellation: processed.iter().map(|p| p.cancellation).fold(0.0, f64::max),
            max_chain_error: processed.iter().map(|p| p.chain_error).fold(0.0, f64::max),
            max_fitted_c: processed.iter().map(|p| p.residual.fitted_c).fold(0.0, f64::max),
            pairs: processed
                .iter()
                .map(|p| PairSummary {
                    coeff_re: p.pair.coefficient.re,
                    coeff_im: p.pair.coefficient.im,
                    n,
                    x0: p.pair.x0,
                    y0: p.pair.y0,
                })
                .collect(),
        };
        out.rounds.push(report);
        out.final_mass = mass_out;
        let mut next = Vec::new();
        let mut pairs = Vec::with_capacity(processed.len());
        let mut residuals = Vec::with_capacity(processed.len());
        for (p, (l, _)) in processed.into_iter().zip(&current) {
            for (m, a) in p.chain.terms {
                next.push((l * m, a));
            }
            residuals.push((*l, p.residual));
            pairs.push(p.pair);
        }
        out.pairs.push(pairs);
        if last {
            out.final_residual = residuals;
        }
        current = next;
    }
    if out.rounds.is_empty() {
        out.final_residual = Vec::new();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_atom() -> Atom {
        half_and_half_atom(Interval::new(0.0, 1.0).unwrap(), ATOM_CELLS)
    }

    #[test]
    fn atom_validation() {
        let a = unit_atom();
        let same = make_atom(a.f().clone(), *a.interval()).unwrap();
        assert!((same.f().max_abs() * same.radius() - 1.0).abs() < 1e-15);
        let i = Interval::new(0.0, 1.0).unwrap();
        let chi = GridFunction::from_real_fn(local_grid(&i, 64), |_| 1.0);
        assert!(matches!(make_atom(chi, i), Err(Error::Cancellation { .. })));
        // mean 1e-18 |I|, far below the tolerance
        let mut tiny = a.f().clone();
        let shift = 1e-18 * i.length() / tiny.step();
        tiny.values_mut()[0] += shift;
        assert!(make_atom(tiny, i).is_ok());
        let big = a.f().scaled(Complex64::new(3.0, 0.0));
        assert!(matches!(make_atom(big.clone(), i), Err(Error::AtomSize(_))));
        let (atom, factor) = make_atom_rescaled(big, i).unwrap();
        assert!((factor - 3.0).abs() < 1e-12);
        assert!(atom.f().max_abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn pair_closed_form() {
        let flat = LipschitzCurve::flat();
        let pair = make_pair(&flat, &unit_atom(), 100).unwrap();
        assert_eq!(pair.y0, 100.0);
        let expected = (101.0f64 / 99.0).ln() / PI;
        assert!((pair.cg_x0.norm() - expected).abs() < 1e-6 * expected);
        assert!((pair.cg_x0.im + expected).abs() < 1e-6 * expected);
        assert!((100.0 * pair.cg_x0.norm() - 2.0 / PI).abs() < 0.01);
        assert!(make_pair(&flat, &unit_atom(), 10).is_err());
        let w = Interval::new(0.0, 50.0).unwrap();
        assert!(matches!(
            make_pair_with(&flat, &unit_atom(), 100, Direction::Rightward, Some(&w)),
            Err(Error::OutOfWindow { .. })
        ));
        let left = make_pair_with(&flat, &unit_atom(), 100, Direction::Leftward, None).unwrap();
        assert_eq!(left.y0, -100.0);
    }

    #[test]
    fn homogeneity_sweep() {
        let curves = [
            LipschitzCurve::flat(),
            LipschitzCurve::sawtooth(0.5, 3.0, 4000.0).unwrap(),
            LipschitzCurve::sawtooth(1.0, 7.0, 4000.0).unwrap(),
            LipschitzCurve::smooth_bump(0.5, 20.0, 257).unwrap(),
        ];
        for c in &curves {
            assert!(c.lip_const() <= 1.0 + 1e-12);
            for k in 4..=10 {
                let n = 1u64 << k;
                let pair = make_pair(c, &unit_atom(), n).unwrap();
                assert!(n as f64 * pair.cg_x0.norm() >= 0.3, "N={n}");
            }
        }
    }

    #[test]
    fn h_block_bound() {
        let flat = LipschitzCurve::flat();
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        for n in [16u64, 128, 1024] {
            let pair = make_pair(&flat, &unit_atom(), n).unwrap();
            let hq = pair.h.lp_norm_full(params.p_prime()).unwrap();
            let i = 2.0f64;
            let shape = n as f64 * i.powf((params.lambda - 1.0) / params.p);
            assert!(hq / shape < 4.0 && hq / shape > 0.1, "{}", hq / shape);
        }
    }

    #[test]
    fn residual_properties() {
        let flat = LipschitzCurve::flat();
        let a = unit_atom();
        let mut fits = Vec::new();
        for n in [100u64, 200] {
            let pair = make_pair(&flat, &a, n).unwrap();
            let res = residual(&flat, &a, &pair).unwrap();
            assert!(res.mean.norm() <= 1e-10 * a.f().l1_norm());
            assert!(res.max_abs() <= res.fitted_c / n as f64 + 1e-15);
            fits.push(res.fitted_c);
            let dual = pair.g.product(&adjoint_image(&flat, &pair.h, *pair.g.grid()).unwrap()).unwrap().integral();
            let direct = pair.h.product(&cauchy_image(&flat, &pair.g, *pair.h.grid()).unwrap()).unwrap().integral();
            assert!((dual - direct).norm() < 1e-6);
            let common = res.to_common_grid().unwrap();
            let max = common.max_abs();
            for i in common.support_cells() {
                let x = common.grid().midpoint(i as isize);
                if common.values()[i].norm() > 1e-8 * max {
                    assert!(res.near_interval.contains(x) || res.far_interval.contains(x));
                }
            }
        }
        assert!((fits[1] / fits[0] - 1.0).abs() < 0.3, "{fits:?}");
    }

    fn two_bump(n: u64) -> (GridFunction, f64, f64) {
        let grid = Grid::covering(-2.0, n as f64 + 2.0, 1.0 / 16.0).unwrap();
        let y0 = n as f64;
        let u = GridFunction::from_real_fn(grid, |x| {
            if x.abs() < 1.0 {
                0.5
            } else if (x - y0).abs() < 1.0 {
                -0.5
            } else {
                0.0
            }
        });
        (u, 0.0, y0)
    }

    fn check_decomposition(u: &GridFunction, d: &AtomicDecomposition) {
        for (_, a) in &d.terms {
            make_atom(a.f().clone(), *a.interval()).unwrap();
        }
        for i in 0..u.len() {
            let x = u.grid().midpoint(i as isize);
            assert!((d.value_at(x) - u.values()[i]).norm() < 1e-12, "at {x}");
        }
    }

    #[test]
    fn chain_examples() {
        let (u, x0, y0) = two_bump(8);
        let d = chain_atoms(&u, x0, y0, 8).unwrap();
        check_decomposition(&u, &d);
        // constant bumps need no correction atoms, only the two chains
        assert_eq!(d.len(), 6);
        let mut ratios = Vec::new();
        for n in [8u64, 64, 512] {
            let (u, x0, y0) = two_bump(n);
            let d = chain_atoms(&u, x0, y0, n).unwrap();
            check_decomposition(&u, &d);
            ratios.push(d.coefficient_sum() / (n as f64).log2());
        }
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        assert!(hi / lo <= 1.3, "{ratios:?}");
    }

    #[test]
    fn chain_odd_separation_and_errors() {
        let grid = Grid::covering(-2.0, 12.0, 1.0 / 8.0).unwrap();
        // odd separation, non-constant bumps
        let w = GridFunction::from_real_fn(grid, |x| {
            if x.abs() < 1.0 {
                x + 0.5
            } else if (x - 7.0).abs() < 1.0 {
                0.3 * (x - 7.0) - 0.5
            } else {
                0.0
            }
        });
        let d = chain_atoms(&w, 0.0, 7.0, 7).unwrap();
        check_decomposition(&w, &d);
        let not_mean_zero = GridFunction::from_real_fn(grid, |x| if x.abs() < 1.0 { 1.0 } else { 0.0 });
        assert!(matches!(chain_atoms(&not_mean_zero, 0.0, 7.0, 7), Err(Error::NotTwoBump(_))));
        assert!(matches!(chain_atoms(&w, 0.0, 6.0, 6), Err(Error::NotTwoBump(_))));
        let a = unit_atom();
        let single = chain_atoms(a.f(), 0.0, 0.0, 1).unwrap();
        assert_eq!(single.len(), 1);
        check_decomposition(a.f(), &single);
        assert!(chain_atoms(&GridFunction::zeros(grid), 0.0, 7.0, 7).unwrap().is_empty());
    }

    #[test]
    fn factorize_small() {
        let flat = LipschitzCurve::flat();
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        let input = AtomicDecomposition::single(unit_atom());
        let f = factorize(&flat, &input, 64, 2, &params).unwrap();
        assert_eq!(f.rounds.len(), 2);
        for r in &f.rounds {
            assert!(r.kappa < 1.0);
            assert!(r.max_cancellation <= 1e-10);
            assert!(r.max_chain_error <= 1e-10);
        }
        assert!(f.final_mass <= f.rounds[1].mass_in * f.rounds[1].kappa * (1.0 + 1e-12));
        assert!((f.rounds[1].mass_in - f.rounds[0].mass_in * f.rounds[0].kappa).abs() < 1e-12);
        let pts = f.reconstruction_points(&input, 256);
        let err = f.reconstruction_error(&flat, &input, &pts);
        assert!(err <= 1e-8, "{err}");
        let mut buf = Vec::new();
        f.write_json(&mut buf).unwrap();
        let json: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(json[0]["atoms_in"], 1);
        assert!(json[1]["pairs"][0]["N"] == 64);

        let empty = factorize(&flat, &AtomicDecomposition::default(), 64, 3, &params).unwrap();
        assert!(empty.rounds.is_empty() && empty.final_residual.is_empty());
        assert_eq!(empty.final_mass, 0.0);
    }

    #[test]
    fn factorize_no_contraction() {
        let flat = LipschitzCurve::flat();
        let params = MorreyParams::new(2.0, 0.5).unwrap();
        let input = AtomicDecomposition::single(unit_atom());
        match factorize(&flat, &input, 11, 1, &params) {
            Err(Error::NoContraction { kappa, .. }) => assert!(kappa >= 1.0),
            Ok(f) => assert!(f.rounds[0].kappa < 1.0),
            Err(e) => panic!("{e}"),
        }
    }
}
