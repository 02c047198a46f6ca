//! Run configuration: config files, inline parameter blocks and durations.
//!
//! Config files are plain `key = value` lines grouped under `[run]` and
//! `[potential]` headers; `#` starts a comment. Command-line flags override
//! file values.

use std::collections::BTreeMap;
use std::path::Path;

use fockramp::experiments::{lin_spaced, Preset};
use fockramp::model::{bias_for_target, DeformationPath};
use fockramp::{PotentialParams, SpatialGrid, UnitSystem};

use crate::CliError;

pub const RUN_KEYS: &[&str] = &[
    "preset", "n", "k", "at", "method", "tf", "tf-range", "superposition", "demux", "output", "plot", "threads", "cache-dir",
];
pub const POTENTIAL_KEYS: &[&str] = &["A", "B", "C", "A0", "Af", "B0", "kappa", "eps", "n", "xmin", "xmax", "points", "dt", "k"];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct FileConfig {
    pub run: BTreeMap<String, String>,
    pub potential: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = FileConfig::default();
        let mut section: Option<&str> = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| CliError::Usage(format!("config line {}: {msg}", no + 1));
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = match name.trim() {
                    "run" => Some("run"),
                    "potential" => Some("potential"),
                    other => return Err(at(format!("unknown section [{other}]"))),
                };
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| at(format!("expected key = value, got '{line}'")))?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            let (map, allowed) = match section {
                Some("run") => (&mut cfg.run, RUN_KEYS),
                Some("potential") => (&mut cfg.potential, POTENTIAL_KEYS),
                _ => return Err(at("key outside a [run] or [potential] section".into())),
            };
            if !allowed.contains(&key.as_str()) {
                return Err(at(format!("unknown key '{key}'")));
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(at(format!("duplicate key '{key}'")));
            }
        }
        Ok(cfg)
    }

    pub fn run_value(&self, key: &str) -> Option<&str> {
        self.run.get(key).map(String::as_str)
    }

    pub fn run_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.run_value(key)
            .map(|v| v.parse::<T>().map_err(|_| CliError::Usage(format!("config: bad value '{v}' for '{key}'"))))
            .transpose()
    }

    pub fn run_flag(&self, key: &str) -> Result<bool, CliError> {
        match self.run_value(key) {
            None => Ok(false),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(CliError::Usage(format!("config: '{key}' must be true or false, got '{v}'"))),
        }
    }
}

/// `key=value` pairs of an inline parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct InlineParams(pub BTreeMap<String, f64>);

impl InlineParams {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| CliError::Usage(format!("inline: expected key=value, got '{part}'")))?;
            Self::insert(&mut map, k.trim(), v.trim())?;
        }
        Ok(Self(map))
    }

    pub fn from_section(section: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (k, v) in section {
            Self::insert(&mut map, k, v)?;
        }
        Ok(Self(map))
    }

    fn insert(map: &mut BTreeMap<String, f64>, k: &str, v: &str) -> Result<(), CliError> {
        if !POTENTIAL_KEYS.contains(&k) {
            return Err(CliError::Usage(format!("inline: unknown key '{k}' (known: {})", POTENTIAL_KEYS.join(", "))));
        }
        let x: f64 = v.parse().map_err(|_| CliError::Usage(format!("inline: '{k}' is not a number: '{v}'")))?;
        if !x.is_finite() {
            return Err(CliError::Usage(format!("inline: '{k}' must be finite")));
        }
        if map.insert(k.to_string(), x).is_some() {
            return Err(CliError::Usage(format!("inline: duplicate key '{k}'")));
        }
        Ok(())
    }

    fn get(&self, k: &str) -> Option<f64> {
        self.0.get(k).copied()
    }

    fn count(&self, k: &str) -> Result<Option<usize>, CliError> {
        match self.get(k) {
            None => Ok(None),
            Some(v) if v >= 0.0 && v.fract() == 0.0 => Ok(Some(v as usize)),
            Some(v) => Err(CliError::Usage(format!("inline: '{k}' must be a non-negative integer, got {v}"))),
        }
    }

    /// A single static potential (keys A, B, C).
    pub fn is_static(&self) -> bool {
        ["A", "B", "C"].iter().any(|k| self.0.contains_key(*k))
    }

    pub fn static_params(&self) -> Result<PotentialParams, CliError> {
        if ["A0", "Af", "B0", "kappa", "eps"].iter().any(|k| self.0.contains_key(*k)) {
            return Err(CliError::Usage("inline: mix of static (A, B, C) and path (A0, Af, ...) keys".into()));
        }
        let a = self.get("A").ok_or_else(|| CliError::Usage("inline: static potential needs A".into()))?;
        Ok(PotentialParams::new(a, self.get("B").unwrap_or(0.0), self.get("C").unwrap_or(0.0)))
    }

    pub fn grid(&self) -> Result<SpatialGrid, CliError> {
        let points = self.count("points")?.unwrap_or(512);
        Ok(SpatialGrid::new(self.get("xmin").unwrap_or(-20.0), self.get("xmax").unwrap_or(20.0), points)?)
    }

    pub fn k(&self) -> Result<Option<usize>, CliError> {
        self.count("k")
    }

    /// Deformation-path preset. Defaults: n = 2, κ = 100/(A0 − Af),
    /// ε = 0.2·|A0|, C = bias for n, grid [−20, 20] × 512, dt = 0.005.
    pub fn preset(&self, n_override: Option<usize>) -> Result<Preset, CliError> {
        if self.is_static() {
            return Err(CliError::Usage("a deformation path needs A0, Af, B0 (not A, B, C)".into()));
        }
        let need = |k: &str| self.get(k).ok_or_else(|| CliError::Usage(format!("inline: missing '{k}'")));
        let (a0, af, b0) = (need("A0")?, need("Af")?, need("B0")?);
        let n = n_override.or(self.count("n")?).unwrap_or(2);
        let kappa = self.get("kappa").unwrap_or_else(|| DeformationPath::reference_kappa(a0, af));
        let eps = self.get("eps").unwrap_or(0.2 * a0.abs());
        let c = match self.get("C") {
            Some(c) => c,
            None => bias_for_target(n, a0, b0)?,
        };
        let path = DeformationPath::new(a0, af, b0, kappa, eps, c, n)?;
        let dt = self.get("dt").unwrap_or(0.005);
        let k = self.k()?.unwrap_or(n + 3);
        Ok(Preset::new("inline", None, path, self.grid()?, n, dt, k)?)
    }
}

/// A duration in internal units. A unit suffix (ns, us, ms, s) converts
/// from SI and needs a preset with physical units.
pub fn parse_time(text: &str, units: Option<&UnitSystem>) -> Result<f64, CliError> {
    let t = text.trim();
    let suffixes = [("ns", 1e-9), ("us", 1e-6), ("µs", 1e-6), ("μs", 1e-6), ("ms", 1e-3), ("s", 1.0)];
    let (number, scale) = suffixes
        .iter()
        .find_map(|(sfx, scale)| t.strip_suffix(sfx).map(|n| (n.trim(), Some(*scale))))
        .unwrap_or((t, None));
    let v: f64 = number.parse().map_err(|_| CliError::Usage(format!("bad duration '{text}'")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::Usage(format!("duration must be positive, got '{text}'")));
    }
    match (scale, units) {
        (None, _) => Ok(v),
        (Some(s), Some(u)) => Ok(u.time_from_si(v * s)),
        (Some(_), None) => Err(CliError::Usage(format!("'{text}' has a physical unit but the preset is dimensionless"))),
    }
}

/// Comma-separated durations.
pub fn parse_time_list(text: &str, units: Option<&UnitSystem>) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_time(s, units)).collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err(CliError::Usage("empty duration list".into()));
    }
    Ok(v)
}

/// `lo:hi:count`, evenly spaced and inclusive.
pub fn parse_time_range(text: &str, units: Option<&UnitSystem>) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(CliError::Usage(format!("range must be lo:hi:count, got '{text}'")));
    };
    let (lo, hi) = (parse_time(lo, units)?, parse_time(hi, units)?);
    let count: usize = count.trim().parse().map_err(|_| CliError::Usage(format!("bad count in range '{text}'")))?;
    if count == 0 || hi < lo {
        return Err(CliError::Usage(format!("empty range '{text}'")));
    }
    Ok(lin_spaced(lo, hi, count)?)
}
