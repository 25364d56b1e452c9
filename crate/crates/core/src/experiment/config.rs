//! Experiment configuration: INI sections with per-experiment defaults and
//! `section.key=value` overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ini::Ini;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curve::LipschitzCurve;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spaces::MorreyParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Boundedness,
    Compactness,
    Factorization,
    Lowerbound,
    Kernelcheck,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Boundedness,
        Experiment::Compactness,
        Experiment::Factorization,
        Experiment::Lowerbound,
        Experiment::Kernelcheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Boundedness => "boundedness",
            Experiment::Compactness => "compactness",
            Experiment::Factorization => "factorization",
            Experiment::Lowerbound => "lowerbound",
            Experiment::Kernelcheck => "kernelcheck",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Key/value settings grouped by section, kept sorted for stable output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Settings {
    /// Defaults for every key an experiment reads.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut s = Settings::default();
        let common: &[(&str, &str, &str)] = &[
            ("run", "seed", "42"),
            ("run", "refine", "true"),
            ("run", "refine_tol", "0.3"),
            ("curve", "kind", "flat"),
            ("curve", "slope", "0.5"),
            ("curve", "period", "1"),
            ("curve", "amplitude", "0.5"),
            ("curve", "width", "1"),
            ("curve", "extent", "64"),
            ("morrey", "p", "2"),
            ("morrey", "lambda", "0.5"),
        ];
        for (sec, key, val) in common {
            s.set(sec, key, val);
        }
        let corpus = |s: &mut Settings, symbols: &str| {
            s.set("corpus", "symbols", symbols);
            s.set("corpus", "random_count", "6");
            s.set("corpus", "random_width", "1");
            s.set("corpus", "log_clip", "0.001");
            s.set("corpus", "bump_width", "1");
            s.set("corpus", "sawtooth_period", "1");
        };
        let grid = |s: &mut Settings, lo: &str, hi: &str, step: &str| {
            s.set("grid", "lo", lo);
            s.set("grid", "hi", hi);
            s.set("grid", "step", step);
        };
        match experiment {
            Experiment::Boundedness => {
                grid(&mut s, "-8", "8", "0.03125");
                corpus(&mut s, "heaviside,clipped-log,smooth-bump,sawtooth-bmo,random-step");
                s.set("morrey", "p", "1.5,2,3");
                s.set("morrey", "lambda", "0.25,0.5,0.75");
                s.set("boundedness", "band_width", "10");
                s.set("boundedness", "min_cells", "8");
                s.set("boundedness", "testfn_count", "6");
            }
            Experiment::Compactness => {
                grid(&mut s, "-64", "64", "0.0078125");
                corpus(&mut s, "smooth-bump,clipped-log");
                s.set("compactness", "z_list", "0.16,0.08,0.04,0.02");
                s.set("compactness", "alpha_list", "4,8,16,32");
                s.set("compactness", "family_size", "20");
                s.set("compactness", "family_radius", "2");
                s.set("compactness", "decay_max", "0.2");
                s.set("compactness", "slope_tol", "0.15");
                s.set("compactness", "scenario", "shrinking");
                s.set("compactness", "witness_count", "4");
                s.set("compactness", "witness_ratio", "2");
                s.set("compactness", "witness_min_cells", "8");
                s.set("compactness", "witness_min_fraction", "0.1");
                s.set("compactness", "epsilon_list", "0.5,0.25,0.125");
                s.set("compactness", "truncation_radius", "8");
            }
            Experiment::Factorization => {
                s.set("factorization", "n", "1024");
                s.set("factorization", "rounds", "4");
                s.set("factorization", "max_n", "16384");
                s.set("factorization", "atom_cells", "64");
                s.set("factorization", "kappa_max", "0.5");
                s.set("factorization", "homogeneity_n", "16,32,64,128,256,512,1024");
                s.set("factorization", "sweep", "true");
            }
            Experiment::Lowerbound => {
                grid(&mut s, "-64", "64", "0.015625");
                corpus(&mut s, "heaviside");
                s.set("lowerbound", "delta", "0.1");
                s.set("lowerbound", "k_min", "4");
                s.set("lowerbound", "k_max", "8");
                s.set("lowerbound", "radii", "0.0625,0.125");
                s.set("lowerbound", "a1", "16");
                s.set("lowerbound", "stability_tol", "0.3");
            }
            Experiment::Kernelcheck => {
                s.set("curve", "kind", "sawtooth");
                s.set("kernelcheck", "samples", "10000");
                s.set("kernelcheck", "extent", "8");
                s.set("kernelcheck", "stability_tol", "0.1");
            }
        }
        s
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.trim().to_string());
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    /// Replaces known keys; unknown sections or keys are rejected.
    pub fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        match self.sections.get_mut(section).and_then(|m| m.get_mut(key)) {
            Some(v) => {
                *v = value.trim().to_string();
                Ok(())
            }
            None => Err(Error::Config(format!("unknown setting '{section}.{key}'"))),
        }
    }

    /// Applies every entry of an INI document.
    pub fn apply_ini(&mut self, text: &str) -> Result<()> {
        let doc = Ini::load_from_str(text).map_err(|e| Error::Config(format!("cannot parse config: {e}")))?;
        for (section, props) in doc.iter() {
            for (key, value) in props.iter() {
                match section {
                    Some(sec) => self.apply(sec, key, value)?,
                    None => return Err(Error::Config(format!("setting '{key}' outside any section"))),
                }
            }
        }
        Ok(())
    }

    /// Applies a `section.key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (path, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{spec}' is not of the form section.key=value")))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| Error::Config(format!("override key '{path}' is not of the form section.key")))?;
        self.apply(section, key, value)
    }

    pub fn to_ini_string(&self) -> String {
        let mut doc = Ini::new();
        for (sec, props) in &self.sections {
            let mut setter = doc.with_section(Some(sec.as_str()));
            for (k, v) in props {
                setter.set(k.as_str(), v.as_str());
            }
        }
        let mut buf = Vec::new();
        doc.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ini output is utf-8")
    }

    /// SHA-256 of the resolved INI text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_ini_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn required(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key)
            .ok_or_else(|| Error::Config(format!("missing setting '{section}.{key}'")))
    }

    pub fn parse<T: FromStr>(&self, section: &str, key: &str) -> Result<T> {
        let raw = self.required(section, key)?;
        raw.parse()
            .map_err(|_| Error::Config(format!("'{section}.{key}' = '{raw}' cannot be parsed")))
    }

    pub fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Vec<T>> {
        let raw = self.required(section, key)?;
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::Config(format!("'{section}.{key}' item '{s}' cannot be parsed")))
            })
            .collect()
    }

    pub fn flag(&self, section: &str, key: &str) -> Result<bool> {
        match self.required(section, key)? {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            other => Err(Error::Config(format!("'{section}.{key}' = '{other}' is not a boolean"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn grid(&self) -> Result<Grid> {
        Grid::covering(self.lo, self.hi, self.step)
    }

    pub fn refined(&self) -> Self {
        Self {
            step: 0.5 * self.step,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Flat,
    Sawtooth,
    Bump,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub kind: CurveKind,
    pub slope: f64,
    pub period: f64,
    pub amplitude: f64,
    pub width: f64,
    pub extent: f64,
}

impl CurveSpec {
    pub fn build(&self) -> Result<LipschitzCurve> {
        match self.kind {
            CurveKind::Flat => Ok(LipschitzCurve::flat()),
            CurveKind::Sawtooth => LipschitzCurve::sawtooth(self.slope, self.period, self.extent),
            CurveKind::Bump => LipschitzCurve::smooth_bump(self.amplitude, self.width, 257),
        }
    }
}

/// Validated, typed view of [`Settings`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub settings: Settings,
    pub seed: u64,
    pub refine: bool,
    pub refine_tol: f64,
    pub curve: CurveSpec,
    pub params: Vec<MorreyParams>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, settings: Settings) -> Result<Self> {
        let kind = match settings.required("curve", "kind")? {
            "flat" => CurveKind::Flat,
            "sawtooth" => CurveKind::Sawtooth,
            "bump" | "smooth-bump" => CurveKind::Bump,
            other => return Err(Error::Config(format!("unknown curve kind '{other}'"))),
        };
        let curve = CurveSpec {
            kind,
            slope: settings.parse("curve", "slope")?,
            period: settings.parse("curve", "period")?,
            amplitude: settings.parse("curve", "amplitude")?,
            width: settings.parse("curve", "width")?,
            extent: settings.parse("curve", "extent")?,
        };
        curve.build().map_err(|e| Error::Config(e.to_string()))?;
        let ps: Vec<f64> = settings.list("morrey", "p")?;
        let lambdas: Vec<f64> = settings.list("morrey", "lambda")?;
        let mut params = Vec::new();
        for &p in &ps {
            for &l in &lambdas {
                params.push(MorreyParams::new(p, l).map_err(|e| Error::Config(e.to_string()))?);
            }
        }
        if params.is_empty() {
            return Err(Error::Config("no Morrey parameters given".into()));
        }
        let cfg = Self {
            experiment,
            seed: settings.parse("run", "seed")?,
            refine: settings.flag("run", "refine")?,
            refine_tol: settings.parse("run", "refine_tol")?,
            curve,
            params,
            settings,
        };
        if cfg.settings.get("grid", "step").is_some() {
            let g = cfg.grid()?;
            if !(g.step > 0.0 && g.lo < g.hi) {
                return Err(Error::Config(format!("bad grid ({}, {}) step {}", g.lo, g.hi, g.step)));
            }
            g.grid().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(cfg)
    }

    /// Defaults, then the INI text, then each override in order.
    pub fn resolve(experiment: Experiment, ini_text: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut settings = Settings::defaults(experiment);
        if let Some(text) = ini_text {
            settings.apply_ini(text)?;
        }
        for o in overrides {
            settings.apply_override(o)?;
        }
        Self::new(experiment, settings)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec {
            lo: self.settings.parse("grid", "lo")?,
            hi: self.settings.parse("grid", "hi")?,
            step: self.settings.parse("grid", "step")?,
        })
    }

    pub fn hash(&self) -> String {
        self.settings.hash()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_replace_known_keys_only() {
        let mut s = Settings::defaults(Experiment::Boundedness);
        s.apply_override("grid.step=0.0625").unwrap();
        assert_eq!(s.get("grid", "step"), Some("0.0625"));
        assert!(s.apply_override("grid.nope=1").is_err());
        assert!(s.apply_override("gridstep").is_err());
    }

    #[test]
    fn ini_round_trip_preserves_hash() {
        let s = Settings::defaults(Experiment::Compactness);
        let text = s.to_ini_string();
        let mut t = Settings::defaults(Experiment::Compactness);
        t.apply_ini(&text).unwrap();
        assert_eq!(s, t);
        assert_eq!(s.hash(), t.hash());
        assert_eq!(s.hash().len(), 64);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let err = ExperimentConfig::resolve(Experiment::Boundedness, Some("[morrey]\np = 0.5\n"), &[]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = ExperimentConfig::resolve(Experiment::Boundedness, None, &["run.seed=x".into()]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let cfg = ExperimentConfig::resolve(Experiment::Boundedness, None, &[]).unwrap();
        assert_eq!(cfg.params.len(), 9);
    }
}
