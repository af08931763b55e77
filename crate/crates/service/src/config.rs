//! Service configuration: a TOML file with environment overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use progsim_core::cluster::ClusterConfig;
use progsim_core::distance::Weights;
use progsim_core::hints::HintConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for {key}: {value}")]
    Env { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoreKind {
    #[default]
    Memory,
    Sqlite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoreConfig {
    pub kind: StoreKind,
    /// Database file for the sqlite store.
    pub path: PathBuf,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig { kind: StoreKind::Memory, path: PathBuf::from("progsim.db") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub weights: Weights,
    pub hints: HintConfig,
    pub cluster: ClusterConfig,
    /// Clusters searched member by member during a correction lookup.
    pub top_k: usize,
    /// Submissions an author must have made before hints are served.
    pub min_attempts: u32,
    pub recluster_period_secs: u64,
    /// Threads for distance computations; 0 means one per core.
    pub workers: usize,
    pub store: StoreConfig,
    pub listen: String,
    /// Shared secret for instructor endpoints; open when unset.
    pub instructor_token: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            weights: Weights::default(),
            hints: HintConfig::default(),
            cluster: ClusterConfig::default(),
            top_k: 4,
            min_attempts: 3,
            recluster_period_secs: 900,
            workers: 0,
            store: StoreConfig::default(),
            listen: "127.0.0.1:8080".to_string(),
            instructor_token: None,
        }
    }
}

fn parse_env<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Env { key: key.to_string(), value: value.to_string() })
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let c: ServiceConfig = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Reads `path` when given, then applies `PROGSIM_*` variables.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut c = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.to_path_buf(), source })?;
                toml::from_str(&text)?
            }
            None => ServiceConfig::default(),
        };
        c.apply_env(std::env::vars())?;
        c.validate()?;
        Ok(c)
    }

    /// Overrides from `(name, value)` pairs; unknown names are ignored.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<(), ConfigError> {
        for (k, v) in vars {
            match k.as_str() {
                "PROGSIM_LISTEN" => self.listen = v,
                "PROGSIM_STORE" => {
                    self.store.kind = match v.as_str() {
                        "memory" => StoreKind::Memory,
                        "sqlite" => StoreKind::Sqlite,
                        _ => return Err(ConfigError::Env { key: k, value: v }),
                    }
                }
                "PROGSIM_STORE_PATH" => self.store.path = PathBuf::from(v),
                "PROGSIM_WORKERS" => self.workers = parse_env(&k, &v)?,
                "PROGSIM_TOP_K" => self.top_k = parse_env(&k, &v)?,
                "PROGSIM_MIN_ATTEMPTS" => self.min_attempts = parse_env(&k, &v)?,
                "PROGSIM_RECLUSTER_SECS" => self.recluster_period_secs = parse_env(&k, &v)?,
                "PROGSIM_THRESHOLD_DIST" => self.cluster.threshold_dist = Some(parse_env(&k, &v)?),
                "PROGSIM_INSTRUCTOR_TOKEN" => self.instructor_token = Some(v).filter(|t| !t.is_empty()),
                "PROGSIM_W_AD" => self.weights.w_ad = parse_env(&k, &v)?,
                "PROGSIM_W_R" => self.weights.w_r = parse_env(&k, &v)?,
                _ => {}
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.weights.validate().map_err(ConfigError::Invalid)?;
        if self.top_k == 0 {
            return Err(ConfigError::Invalid("top_k must be at least 1".into()));
        }
        if self.recluster_period_secs == 0 {
            return Err(ConfigError::Invalid("recluster_period_secs must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ServiceConfig::default();
        assert_eq!((c.top_k, c.min_attempts, c.recluster_period_secs), (4, 3, 900));
        assert_eq!(c.weights.w_ad, 20);
    }

    #[test]
    fn file_then_environment() {
        let mut c = ServiceConfig::from_toml(
            "top_k = 2\nlisten = \"0.0.0.0:9000\"\n[weights]\nw_ad = 30\n[store]\nkind = \"sqlite\"\npath = \"/tmp/x.db\"\n",
        )
        .unwrap();
        assert_eq!((c.top_k, c.weights.w_ad, c.weights.w_r), (2, 30, 10));
        assert_eq!(c.store.kind, StoreKind::Sqlite);
        c.apply_env([("PROGSIM_TOP_K".to_string(), "6".to_string()), ("HOME".to_string(), "/".to_string())]).unwrap();
        assert_eq!(c.top_k, 6);
        assert!(c.apply_env([("PROGSIM_WORKERS".to_string(), "many".to_string())]).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ServiceConfig::from_toml("top_k = 0").is_err());
        assert!(ServiceConfig::from_toml("[weights]\nw_ad = 0").is_err());
        assert!(ServiceConfig::from_toml("unknown_key = 1").is_ok());
    }
}
