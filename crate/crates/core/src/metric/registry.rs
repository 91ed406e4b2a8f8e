use std::collections::BTreeMap;
use std::sync::Arc;

use super::providers::{ConformalBump, ConformalQuadratic, Euclidean, RoundS3, Schwarzschild};
use super::MetricProvider;
use crate::{Error, Result};

type Factory = Box<dyn Fn(&BTreeMap<String, f64>) -> Result<Arc<dyn MetricProvider>> + Send + Sync>;

/// A named parameter accepted by a provider constructor.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: Option<f64>,
    pub positive: bool,
}

impl ParamSpec {
    pub const fn required(name: &'static str) -> Self {
        ParamSpec {
            name,
            default: None,
            positive: false,
        }
    }

    pub const fn positive(name: &'static str, default: f64) -> Self {
        ParamSpec {
            name,
            default: Some(default),
            positive: true,
        }
    }
}

pub struct ProviderEntry {
    pub name: String,
    pub params: Vec<ParamSpec>,
    factory: Factory,
}

impl ProviderEntry {
    pub fn new<F>(name: &str, params: Vec<ParamSpec>, factory: F) -> Self
    where
        F: Fn(&BTreeMap<String, f64>) -> Result<Arc<dyn MetricProvider>> + Send + Sync + 'static,
    {
        ProviderEntry {
            name: name.to_string(),
            params,
            factory: Box::new(factory),
        }
    }
}

/// Metric providers keyed by name.
pub struct ProviderRegistry {
    entries: BTreeMap<String, ProviderEntry>,
}

impl Default for ProviderRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl ProviderRegistry {
    pub fn empty() -> Self {
        ProviderRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(ProviderEntry::new("euclidean", vec![], |_| {
            Ok(Arc::new(Euclidean))
        }));
        reg.register(ProviderEntry::new(
            "round_s3",
            vec![ParamSpec::positive("R", 1.0)],
            |p| Ok(Arc::new(RoundS3 { radius: p["R"] })),
        ));
        reg.register(ProviderEntry::new(
            "schwarzschild",
            vec![ParamSpec::positive("m", 1.0)],
            |p| Ok(Arc::new(Schwarzschild { mass: p["m"] })),
        ));
        reg.register(ProviderEntry::new(
            "conformal_quadratic",
            vec![ParamSpec::required("eta")],
            |p| Ok(Arc::new(ConformalQuadratic { eta: p["eta"] })),
        ));
        reg.register(ProviderEntry::new(
            "conformal_bump",
            vec![
                ParamSpec::required("eta"),
                ParamSpec::positive("sigma", 1.0),
            ],
            |p| {
                Ok(Arc::new(ConformalBump {
                    eta: p["eta"],
                    sigma: p["sigma"],
                }))
            },
        ));
        reg
    }

    /// Adds or replaces an entry.
    pub fn register(&mut self, entry: ProviderEntry) {
        self.entries.insert(entry.name.clone(), entry);
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Option<&ProviderEntry> {
        self.entries.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// All parameter names accepted by any registered provider.
    pub fn param_names(&self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = self
            .entries
            .values()
            .flat_map(|e| e.params.iter().map(|p| p.name))
            .collect();
        names.sort_unstable();
        names.dedup();
        names
    }

    /// Builds a provider; parameters not declared by the entry are ignored.
    pub fn create(
        &self,
        name: &str,
        params: &BTreeMap<String, f64>,
    ) -> Result<Arc<dyn MetricProvider>> {
        let entry = self
            .entries
            .get(name)
            .ok_or_else(|| Error::Configuration(format!("unknown metric: {name}")))?;
        let mut resolved = BTreeMap::new();
        for spec in &entry.params {
            let value = match (params.get(spec.name), spec.default) {
                (Some(v), _) => *v,
                (None, Some(d)) => d,
                (None, None) => {
                    return Err(Error::Configuration(format!(
                        "metric {name} requires parameter {}",
                        spec.name
                    )))
                }
            };
            if !value.is_finite() || (spec.positive && value <= 0.0) {
                return Err(Error::Configuration(format!(
                    "metric {name}: parameter {} must be {}, got {value}",
                    spec.name,
                    if spec.positive { "positive" } else { "finite" }
                )));
            }
            resolved.insert(spec.name.to_string(), value);
        }
        (entry.factory)(&resolved)
    }
}
