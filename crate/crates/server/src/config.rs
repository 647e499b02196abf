//! Flat `key = value` configuration.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use privgraph::query::AugmentationMode;
use privgraph::rdf::Iri;
use privgraph::store::{StoreConfig, VocabularyMode};
use thiserror::Error;

pub const PORT_ENV: &str = "PRIVGRAPH_PORT";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {message}")]
    BadValue { line: usize, key: String, message: String },
    #[error("{PORT_ENV}: {0}")]
    BadPortOverride(String),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub listen: SocketAddr,
    /// Snapshot file; engine state goes next to it. `None` keeps everything
    /// in memory.
    pub data_path: Option<PathBuf>,
    pub augmentation_mode: AugmentationMode,
    pub vocabulary_mode: VocabularyMode,
    pub metadata_cap: usize,
    /// Registered at startup when the store has no controller yet.
    pub controller: Option<Iri>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 7878)),
            data_path: None,
            augmentation_mode: AugmentationMode::Rewrite,
            vocabulary_mode: VocabularyMode::Strict,
            metadata_cap: 5,
            controller: None,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = Config::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Malformed { line })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(ConfigError::DuplicateKey { line, key: key.into() });
            }
            seen.push(key);
            let bad = |message: String| ConfigError::BadValue {
                line,
                key: key.into(),
                message,
            };
            match key {
                "listen" => config.listen = value.parse().map_err(|e| bad(format!("{e}")))?,
                "data_path" => config.data_path = (!value.is_empty()).then(|| PathBuf::from(value)),
                "augmentation_mode" => config.augmentation_mode = value.parse().map_err(bad)?,
                "vocabulary_mode" => config.vocabulary_mode = value.parse().map_err(bad)?,
                "metadata_cap" => config.metadata_cap = value.parse().map_err(|e| bad(format!("{e}")))?,
                "controller" => config.controller = Some(Iri::new(value).map_err(|e| bad(e.to_string()))?),
                _ => return Err(ConfigError::UnknownKey { line, key: key.into() }),
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Applies the port override, if set.
    pub fn with_env(mut self, port: Option<&str>) -> Result<Self, ConfigError> {
        if let Some(p) = port {
            let port: u16 = p.trim().parse().map_err(|_| ConfigError::BadPortOverride(p.to_string()))?;
            self.listen.set_port(port);
        }
        Ok(self)
    }

    pub fn store_config(&self) -> StoreConfig {
        StoreConfig {
            vocabulary_mode: self.vocabulary_mode,
            metadata_cap: self.metadata_cap,
        }
    }
}
