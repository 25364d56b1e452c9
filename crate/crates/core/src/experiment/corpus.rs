//! Built-in symbols.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

use super::config::Settings;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    Heaviside,
    ClippedLog,
    SmoothBump,
    SawtoothBmo,
    RandomStep,
    Constant,
}

impl SymbolKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "heaviside" => SymbolKind::Heaviside,
            "clipped-log" => SymbolKind::ClippedLog,
            "smooth-bump" => SymbolKind::SmoothBump,
            "sawtooth-bmo" => SymbolKind::SawtoothBmo,
            "random-step" => SymbolKind::RandomStep,
            "constant" => SymbolKind::Constant,
            other => return Err(Error::Config(format!("unknown symbol '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SymbolKind::Heaviside => "heaviside",
            SymbolKind::ClippedLog => "clipped-log",
            SymbolKind::SmoothBump => "smooth-bump",
            SymbolKind::SawtoothBmo => "sawtooth-bmo",
            SymbolKind::RandomStep => "random-step",
            SymbolKind::Constant => "constant",
        }
    }

    /// Smooth and compactly supported up to a constant, hence in CMO.
    pub fn is_cmo(&self) -> bool {
        matches!(self, SymbolKind::SmoothBump | SymbolKind::Constant)
    }
}

/// Shape parameters shared by the built-in symbols.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    pub random_count: usize,
    pub random_width: f64,
    pub log_clip: f64,
    pub bump_width: f64,
    pub sawtooth_period: f64,
}

impl CorpusParams {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        Ok(Self {
            random_count: s.parse("corpus", "random_count")?,
            random_width: s.parse("corpus", "random_width")?,
            log_clip: s.parse("corpus", "log_clip")?,
            bump_width: s.parse("corpus", "bump_width")?,
            sawtooth_period: s.parse("corpus", "sawtooth_period")?,
        })
    }
}

/// One corpus entry: `name` or `name*scale`; `random-step` expands to
/// `random_count` members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub kind: SymbolKind,
    pub scale: f64,
    /// Index within the random family.
    pub member: usize,
}

impl SymbolSpec {
    pub fn label(&self) -> String {
        let mut s = self.kind.name().to_string();
        if self.kind == SymbolKind::RandomStep {
            s.push_str(&format!("-{}", self.member));
        }
        if self.scale != 1.0 {
            s.push_str(&format!("*{}", self.scale));
        }
        s
    }
}

pub fn parse_corpus(s: &Settings) -> Result<Vec<SymbolSpec>> {
    let params = CorpusParams::from_settings(s)?;
    let entries: Vec<String> = s.list("corpus", "symbols")?;
    let mut out = Vec::new();
    for e in entries {
        let (name, scale) = match e.split_once('*') {
            Some((n, k)) => (
                n.trim(),
                k.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad symbol scale in '{e}'")))?,
            ),
            None => (e.as_str(), 1.0),
        };
        let kind = SymbolKind::parse(name)?;
        let members = if kind == SymbolKind::RandomStep { params.random_count } else { 1 };
        for member in 0..members {
            out.push(SymbolSpec { kind, scale, member });
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty symbol corpus".into()));
    }
    Ok(out)
}

fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Samples the symbol on `grid`. Random members are drawn from a stream keyed
/// by the seed and the member index, so they do not depend on the grid.
pub fn build_symbol(spec: &SymbolSpec, params: &CorpusParams, seed: u64, grid: Grid) -> GridFunction {
    let k = spec.scale;
    match spec.kind {
        SymbolKind::Heaviside => GridFunction::from_real_fn(grid, |x| if x >= 0.0 { k } else { 0.0 }),
        SymbolKind::ClippedLog => GridFunction::from_real_fn(grid, |x| k * x.abs().max(params.log_clip).ln()),
        SymbolKind::SmoothBump => GridFunction::from_real_fn(grid, |x| k * bump(x / params.bump_width)),
        SymbolKind::SawtoothBmo => {
            let t = params.sawtooth_period;
            GridFunction::from_real_fn(grid, |x| k * ((x / t) - (x / t).floor()))
        }
        SymbolKind::RandomStep => {
            let w = params.random_width;
            let first = (grid.origin / w).floor() as i64;
            let last = (grid.end() / w).ceil() as i64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(spec.member as u64 + 1);
            let levels: Vec<f64> = (first..=last).map(|_| rng.gen_range(-1.0..1.0)).collect();
            GridFunction::from_real_fn(grid, |x| {
                let i = ((x / w).floor() as i64 - first) as usize;
                k * levels[i.min(levels.len() - 1)]
            })
        }
        SymbolKind::Constant => GridFunction::from_real_fn(grid, |_| k),
    }
}

/// `count` random step functions supported in `(-radius, radius)` with
/// pieces of length `radius/4`, drawn from `seed`.
pub fn random_steps(grid: Grid, count: usize, radius: f64, seed: u64) -> Vec<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let levels: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            GridFunction::from_real_fn(grid, |x| {
                if x.abs() < radius {
                    levels[(((x + radius) / radius * 4.0).floor() as usize).min(7)]
                } else {
                    0.0
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::{Experiment, Settings};

    #[test]
    fn corpus_expands_random_members() {
        let s = Settings::defaults(Experiment::Boundedness);
        let c = parse_corpus(&s).unwrap();
        assert_eq!(c.len(), 10);
        assert_eq!(c[4].label(), "random-step-0");
    }

    #[test]
    fn random_symbol_is_grid_independent() {
        let s = Settings::defaults(Experiment::Boundedness);
        let params = CorpusParams::from_settings(&s).unwrap();
        let spec = SymbolSpec {
            kind: SymbolKind::RandomStep,
            scale: 1.0,
            member: 2,
        };
        let coarse = build_symbol(&spec, &params, 9, Grid::covering(-4.0, 4.0, 0.25).unwrap());
        let fine = build_symbol(&spec, &params, 9, Grid::covering(-4.0, 4.0, 0.125).unwrap());
        for x in [-3.9, -1.1, 0.3, 2.7] {
            assert_eq!(coarse.value_at(x), fine.value_at(x));
        }
    }

    #[test]
    fn scaled_entries_parse() {
        let mut s = Settings::defaults(Experiment::Boundedness);
        s.apply_override("corpus.symbols=heaviside*2, constant").unwrap();
        let c = parse_corpus(&s).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].scale, 2.0);
        assert_eq!(c[0].label(), "heaviside*2");
        assert!(parse_corpus(&{
            let mut t = s.clone();
            t.apply_override("corpus.symbols=nonsense").unwrap();
            t
        })
        .is_err());
    }
}
