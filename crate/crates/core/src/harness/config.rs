//! Flat `key = value` configuration with `[section]` headers.

use crate::characteristic::Tolerances;
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Parsed configuration text: section name → key → raw value. Keys before the
/// first header live in the section "".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {}: unterminated section header", k + 1)))?;
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", k + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", k + 1)));
            }
            let entry = sections.entry(current.clone()).or_default();
            if entry.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {current}.{key}", k + 1)));
            }
        }
        Ok(Self { sections })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    fn value<T: std::str::FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Config(format!("{section}.{key}: cannot parse {v:?}"))),
        }
    }
}

const KNOWN_KEYS: [(&str, &str); 16] = [
    ("run", "model"),
    ("run", "seed"),
    ("run", "out"),
    ("grid", "n"),
    ("grid", "cfl"),
    ("data", "amplitude"),
    ("schedule", "lambda_count"),
    ("schedule", "mass"),
    ("schedule", "picard_eps"),
    ("schedule", "picard_n_max"),
    ("schedule", "picard_leaves"),
    ("scatter", "lipschitz_pairs"),
    ("scatter", "lipschitz_radius"),
    ("tolerances", "tol_rel"),
    ("tolerances", "tol_abs"),
    ("tolerances", "tol_glue"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Cylinder,
    SchwarzschildPatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    /// Number of cells of the reference grid.
    pub n: usize,
    pub cfl: f64,
    pub amplitude: f64,
    pub lambda_count: usize,
    pub mass: f64,
    pub picard_eps: f64,
    pub picard_n_max: usize,
    pub picard_leaves: usize,
    pub lipschitz_pairs: usize,
    pub lipschitz_radius: f64,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: Model::Cylinder,
            n: 400,
            cfl: 0.25,
            amplitude: 0.1,
            lambda_count: 7,
            mass: 1.0,
            picard_eps: 0.2,
            picard_n_max: 8,
            picard_leaves: 20,
            lipschitz_pairs: 100,
            lipschitz_radius: 0.1,
            tolerances: Tolerances::default(),
            seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(cf: &ConfigFile) -> Result<Self> {
        for (section, entries) in &cf.sections {
            for key in entries.keys() {
                if !KNOWN_KEYS.contains(&(section.as_str(), key.as_str())) {
                    let name = if section.is_empty() { key.clone() } else { format!("{section}.{key}") };
                    return Err(Error::Config(format!("unknown key {name}")));
                }
            }
        }
        let d = Self::default();
        let model = match cf.get("run", "model").unwrap_or("cylinder") {
            "cylinder" => Model::Cylinder,
            "schwarzschild_patch" => Model::SchwarzschildPatch,
            other => return Err(Error::Config(format!("run.model: unknown model {other:?}"))),
        };
        let cfg = Self {
            model,
            n: cf.value("grid", "n", d.n)?,
            cfl: cf.value("grid", "cfl", d.cfl)?,
            amplitude: cf.value("data", "amplitude", d.amplitude)?,
            lambda_count: cf.value("schedule", "lambda_count", d.lambda_count)?,
            mass: cf.value("schedule", "mass", d.mass)?,
            picard_eps: cf.value("schedule", "picard_eps", d.picard_eps)?,
            picard_n_max: cf.value("schedule", "picard_n_max", d.picard_n_max)?,
            picard_leaves: cf.value("schedule", "picard_leaves", d.picard_leaves)?,
            lipschitz_pairs: cf.value("scatter", "lipschitz_pairs", d.lipschitz_pairs)?,
            lipschitz_radius: cf.value("scatter", "lipschitz_radius", d.lipschitz_radius)?,
            tolerances: Tolerances {
                tol_rel: cf.value("tolerances", "tol_rel", d.tolerances.tol_rel)?,
                tol_abs: cf.value("tolerances", "tol_abs", d.tolerances.tol_abs)?,
                tol_glue: cf.value("tolerances", "tol_glue", d.tolerances.tol_glue)?,
            },
            seed: cf.value("run", "seed", d.seed)?,
            out: cf.get("run", "out").map_or(d.out, PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(&ConfigFile::load(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        if !(t.tol_rel > 0.0 && t.tol_abs > 0.0 && t.tol_glue > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.n < 16 || self.n % 2 != 0 {
            return Err(Error::Config(format!("grid.n = {} must be even and at least 16", self.n)));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!("grid.cfl = {} outside (0, 1)", self.cfl)));
        }
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return Err(Error::Config("data.amplitude must be finite and non-negative".into()));
        }
        if self.lambda_count < 2 || self.lambda_count > 30 {
            return Err(Error::Config("schedule.lambda_count must lie in [2, 30]".into()));
        }
        if !(self.picard_eps > 0.0 && self.picard_eps <= 1.0) || self.picard_leaves == 0 || self.mass < 0.0 {
            return Err(Error::Config("picard parameters out of range".into()));
        }
        if self.lipschitz_pairs < 2 || !(self.lipschitz_radius > 0.0) {
            return Err(Error::Config("scatter parameters out of range".into()));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        std::f64::consts::PI / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let cf = ConfigFile::parse("top = 1\n# note\n[grid]\nn = 200 # cells\ncfl=0.5\n\n[data]\namplitude = 0.3\n").unwrap();
        assert_eq!(cf.get("", "top"), Some("1"));
        assert_eq!(cf.get("grid", "n"), Some("200"));
        assert!(ExperimentConfig::from_file(&cf).is_err());
        let cf = ConfigFile::parse("# note\n[grid]\nn = 200 # cells\ncfl=0.5\n\n[data]\namplitude = 0.3\n").unwrap();
        let cfg = ExperimentConfig::from_file(&cf).unwrap();
        assert_eq!(cfg.n, 200);
        assert_eq!(cfg.cfl, 0.5);
        assert_eq!(cfg.amplitude, 0.3);
        assert_eq!(cfg.lambda_count, 7);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(ConfigFile::parse("[grid\nn = 1").is_err());
        assert!(ConfigFile::parse("just words").is_err());
        assert!(ConfigFile::parse("a = 1\na = 2").is_err());
        let bad = |t: &str| ExperimentConfig::from_file(&ConfigFile::parse(t).unwrap()).is_err();
        assert!(bad("[grid]\nn = many"));
        assert!(bad("[grid]\ncfl = 1.5"));
        assert!(bad("[tolerances]\ntol_rel = 0"));
        assert!(bad("[run]\nmodel = torus"));
    }

    #[test]
    fn checked_in_defaults_match() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/defaults.conf");
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert_eq!(cfg.n, 400);
        assert_eq!(cfg.cfl, 0.25);
        assert_eq!(cfg.lambda_count, 7);
        assert_eq!(cfg.tolerances, Tolerances::default());
    }
}
