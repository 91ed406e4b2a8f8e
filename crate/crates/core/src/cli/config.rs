use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::metric::ProviderRegistry;
use crate::{Error, Result};

pub const DEFAULT_BAND: usize = 16;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Curvature,
    Expand,
    Solve,
    Landscape,
    Foliate,
    Hawking,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Curvature,
        Command::Expand,
        Command::Solve,
        Command::Landscape,
        Command::Foliate,
        Command::Hawking,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::Expand => "expand",
            Command::Solve => "solve",
            Command::Landscape => "landscape",
            Command::Foliate => "foliate",
            Command::Hawking => "hawking",
        }
    }

    /// Keys without defaults that the command needs.
    pub fn required(self) -> &'static [&'static str] {
        match self {
            Command::Curvature => &[],
            Command::Expand | Command::Foliate => &["eps_grid"],
            Command::Solve | Command::Landscape => &["eps"],
            Command::Hawking => &["radii"],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
                Error::Configuration(format!(
                    "unknown command: {s} (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// A single run, as read from a `key = value` file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub metric: String,
    /// Provider parameters exactly as given.
    pub params: BTreeMap<String, f64>,
    pub command: Command,
    pub band: usize,
    pub eps: Option<f64>,
    pub eps_grid: Option<Vec<f64>>,
    /// Base point; defaults to the origin.
    pub p: Option<[f64; 3]>,
    /// Search start; defaults to `p`.
    pub start: Option<[f64; 3]>,
    pub radii: Option<Vec<f64>>,
    pub output_dir: Option<String>,
    pub seed: Option<u64>,
    /// Correction residual tolerance.
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Critical-point gradient tolerance.
    pub cp_tol: Option<f64>,
    pub geodesic_steps: Option<usize>,
    pub pin_center: bool,
}

const KEYS: [&str; 15] = [
    "metric",
    "command",
    "L",
    "eps",
    "eps_grid",
    "P",
    "start",
    "radii",
    "output_dir",
    "seed",
    "tol",
    "max_iter",
    "cp_tol",
    "geodesic_steps",
    "pin_center",
];

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Configuration(format!("{key}: cannot parse '{v}'")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| num(key, s.trim())).collect()
}

fn point(key: &str, v: &str) -> Result<[f64; 3]> {
    let xs = list(key, v)?;
    <[f64; 3]>::try_from(xs.as_slice()).map_err(|_| {
        Error::Configuration(format!(
            "{key} needs three comma-separated coordinates, got '{v}'"
        ))
    })
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &ProviderRegistry::builtin())
    }

    /// Parses against the parameter names and metric names of `registry`.
    pub fn parse_with(text: &str, registry: &ProviderRegistry) -> Result<Self> {
        let param_keys = registry.param_names();
        let mut raw: BTreeMap<&str, &str> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Configuration(format!("line {}: expected key = value", n + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) && !param_keys.contains(&k) {
                return Err(Error::Configuration(format!("unknown key: {k}")));
            }
            if raw.insert(k, v).is_some() {
                return Err(Error::Configuration(format!("duplicate key: {k}")));
            }
        }
        let metric = raw
            .get("metric")
            .ok_or_else(|| Error::Configuration("missing required key: metric".into()))?
            .to_string();
        let entry = registry
            .get(&metric)
            .ok_or_else(|| Error::Configuration(format!("unknown metric: {metric}")))?;
        let mut params = BTreeMap::new();
        for k in &param_keys {
            if let Some(v) = raw.get(k) {
                if !entry.params.iter().any(|p| p.name == *k) {
                    return Err(Error::Configuration(format!(
                        "metric {metric} takes no parameter {k}"
                    )));
                }
                params.insert(k.to_string(), num(k, v)?);
            }
        }
        let command: Command = raw
            .get("command")
            .ok_or_else(|| Error::Configuration("missing required key: command".into()))?
            .parse()?;
        let opt = |k: &str| raw.get(k).copied();
        let config = RunConfig {
            metric,
            params,
            command,
            band: opt("L")
                .map(|v| num("L", v))
                .transpose()?
                .unwrap_or(DEFAULT_BAND),
            eps: opt("eps").map(|v| num("eps", v)).transpose()?,
            eps_grid: opt("eps_grid").map(|v| list("eps_grid", v)).transpose()?,
            p: opt("P").map(|v| point("P", v)).transpose()?,
            start: opt("start").map(|v| point("start", v)).transpose()?,
            radii: opt("radii").map(|v| list("radii", v)).transpose()?,
            output_dir: opt("output_dir").map(str::to_string),
            seed: opt("seed").map(|v| num("seed", v)).transpose()?,
            tol: opt("tol").map(|v| num("tol", v)).transpose()?,
            max_iter: opt("max_iter").map(|v| num("max_iter", v)).transpose()?,
            cp_tol: opt("cp_tol").map(|v| num("cp_tol", v)).transpose()?,
            geodesic_steps: opt("geodesic_steps")
                .map(|v| num("geodesic_steps", v))
                .transpose()?,
            pin_center: opt("pin_center")
                .map(|v| num("pin_center", v))
                .transpose()?
                .unwrap_or(false),
        };
        config.validate(registry)?;
        Ok(config)
    }

    pub fn validate(&self, registry: &ProviderRegistry) -> Result<()> {
        // builds the provider once to check parameter values
        registry.create(&self.metric, &self.params)?;
        let missing: Vec<&str> = self
            .command
            .required()
            .iter()
            .copied()
            .filter(|k| match *k {
                "eps" => self.eps.is_none(),
                "eps_grid" => self.eps_grid.as_ref().is_none_or(Vec::is_empty),
                "radii" => self.radii.as_ref().is_none_or(Vec::is_empty),
                _ => false,
            })
            .collect();
        if !missing.is_empty() {
            return Err(Error::Configuration(format!(
                "{} requires {} (required for {}: {})",
                self.command,
                missing.join(", "),
                self.command,
                self.command.required().join(", ")
            )));
        }
        if self.band < 4 {
            return Err(Error::Configuration(format!(
                "L must be at least 4, got {}",
                self.band
            )));
        }
        let scales = self.eps.iter().chain(self.eps_grid.iter().flatten());
        for &e in scales {
            if !(e > 0.0 && e <= 0.5) {
                return Err(Error::Configuration(format!(
                    "eps must lie in (0, 0.5], got {e}"
                )));
            }
        }
        for &r in self.radii.iter().flatten() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Configuration(format!(
                    "radii must be positive, got {r}"
                )));
            }
        }
        for (k, v) in [("tol", self.tol), ("cp_tol", self.cp_tol)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Configuration(format!(
                        "{k} must be positive, got {v}"
                    )));
                }
            }
        }
        for (k, v) in [
            ("max_iter", self.max_iter),
            ("geodesic_steps", self.geodesic_steps),
        ] {
            if v == Some(0) {
                return Err(Error::Configuration(format!("{k} must be positive")));
            }
        }
        let points = [("P", self.p), ("start", self.start)];
        for (k, x) in points {
            if let Some(x) = x {
                if x.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Configuration(format!("{k} must be finite")));
                }
            }
        }
        Ok(())
    }

    pub fn base_point(&self) -> [f64; 3] {
        self.p.unwrap_or([0.0; 3])
    }

    pub fn start_point(&self) -> [f64; 3] {
        self.start.unwrap_or_else(|| self.base_point())
    }
}

/// Canonical text form; [`RunConfig::parse`] reads it back unchanged.
impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "metric = {}", self.metric)?;
        for (k, v) in &self.params {
            writeln!(f, "{k} = {v}")?;
        }
        writeln!(f, "command = {}", self.command)?;
        writeln!(f, "L = {}", self.band)?;
        if let Some(e) = self.eps {
            writeln!(f, "eps = {e}")?;
        }
        if let Some(g) = &self.eps_grid {
            writeln!(f, "eps_grid = {}", join(g))?;
        }
        if let Some(p) = &self.p {
            writeln!(f, "P = {}", join(p))?;
        }
        if let Some(p) = &self.start {
            writeln!(f, "start = {}", join(p))?;
        }
        if let Some(r) = &self.radii {
            writeln!(f, "radii = {}", join(r))?;
        }
        if let Some(d) = &self.output_dir {
            writeln!(f, "output_dir = {d}")?;
        }
        if let Some(s) = self.seed {
            writeln!(f, "seed = {s}")?;
        }
        if let Some(t) = self.tol {
            writeln!(f, "tol = {t}")?;
        }
        if let Some(m) = self.max_iter {
            writeln!(f, "max_iter = {m}")?;
        }
        if let Some(t) = self.cp_tol {
            writeln!(f, "cp_tol = {t}")?;
        }
        if let Some(s) = self.geodesic_steps {
            writeln!(f, "geodesic_steps = {s}")?;
        }
        if self.pin_center {
            writeln!(f, "pin_center = true")?;
        }
        Ok(())
    }
}
