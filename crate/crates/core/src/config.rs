//! Pipeline configuration, layered over the committed defaults.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eot::EotConfig;
use crate::partitioning::ClusteringConfig;
use crate::per_class::PerClass;
use crate::pot::PotConfig;

/// The committed default configuration.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../config/default.toml");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Framework {
    TbdPot,
    JdtEot,
    TbdEot,
}

impl Framework {
    pub const ALL: [Framework; 3] = [Framework::TbdPot, Framework::JdtEot, Framework::TbdEot];

    pub fn as_str(&self) -> &'static str {
        match self {
            Framework::TbdPot => "tbd-pot",
            Framework::JdtEot => "jdt-eot",
            Framework::TbdEot => "tbd-eot",
        }
    }
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Framework {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Framework::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown framework '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VrPrefilter {
    pub enabled: bool,
    /// Points with |vr| below this value (m/s) are dropped.
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatingConfig {
    /// BEV gate radius around each predicted object (m).
    pub radius: f64,
    /// Add the object's expected major semi-axis to the radius.
    pub extent_adaptive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub framework: Framework,
    pub nominal_frame_rate: f64,
    /// Detections scoring below this are discarded, per class.
    pub score_threshold: PerClass<f64>,
    pub vr_prefilter: VrPrefilter,
    pub gating: GatingConfig,
    pub clustering: ClusteringConfig,
    pub pot: PotConfig,
    pub eot: EotConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        toml::from_str(DEFAULT_CONFIG_TOML).expect("committed default config parses")
    }
}

/// Recursively overlays `over` onto `base`; tables merge key by key, any
/// other value replaces.
pub fn merge_toml(base: &mut toml::Value, over: &toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge_toml(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

/// Sets a dotted `key.path` to `raw`, parsed as a TOML value when possible
/// and as a plain string otherwise.
pub fn set_path(root: &mut toml::Value, path: &str, raw: &str) -> Result<(), ConfigError> {
    let value: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().filter(|k| !k.is_empty()).ok_or_else(|| ConfigError::Invalid("empty override key".into()))?;
    let mut node = root;
    for k in keys {
        let table = node
            .as_table_mut()
            .ok_or_else(|| ConfigError::Invalid(format!("'{path}' does not address a table")))?;
        node = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    node.as_table_mut()
        .ok_or_else(|| ConfigError::Invalid(format!("'{path}' does not address a table")))?
        .insert(last.to_string(), value);
    Ok(())
}

impl PipelineConfig {
    pub fn default_value() -> toml::Value {
        toml::Value::Table(DEFAULT_CONFIG_TOML.parse::<toml::Table>().expect("committed default config parses"))
    }

    /// Defaults, then each TOML layer in order, then `key=value` overrides.
    pub fn layered(layers: &[&str], overrides: &[(String, String)]) -> Result<(Self, toml::Value), ConfigError> {
        let mut merged = Self::default_value();
        for layer in layers {
            let v: toml::Table = layer.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
            merge_toml(&mut merged, &toml::Value::Table(v));
        }
        for (k, v) in overrides {
            set_path(&mut merged, k, v)?;
        }
        let cfg: PipelineConfig = merged
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok((cfg, merged))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(self.nominal_frame_rate > 0.0) {
            return invalid("nominal_frame_rate must be positive".into());
        }
        for (c, t) in self.score_threshold.iter() {
            if !(0.0..=1.0).contains(t) {
                return invalid(format!("score_threshold.{c} must be in [0, 1]"));
            }
        }
        if !(self.vr_prefilter.threshold >= 0.0) {
            return invalid("vr_prefilter.threshold must be non-negative".into());
        }
        if !(self.gating.radius > 0.0) {
            return invalid("gating.radius must be positive".into());
        }
        self.clustering.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.pot.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.eot.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }
}
