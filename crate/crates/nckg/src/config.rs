//! Application configuration: JSON file, defaults, and gateway wiring.
//! The API key is only ever read from an environment variable.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::Gateway;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewaySettings {
    pub endpoint: String,
    pub api_key_env: String,
    pub model: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// `"http"` or `"mock:<script-file>"`.
    pub backend: String,
}

impl Default for GatewaySettings {
    fn default() -> Self {
        GatewaySettings {
            endpoint: "https://api.openai.com/v1/chat/completions".to_string(),
            api_key_env: "NCKG_API_KEY".to_string(),
            model: "gpt-4o".to_string(),
            timeout_secs: 60,
            max_retries: 3,
            backend: "http".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub store_path: PathBuf,
    pub ontology_path: PathBuf,
    pub gateway: GatewaySettings,
    pub top_k: usize,
    pub max_depth: usize,
    pub output_dir: PathBuf,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            store_path: PathBuf::from("store.ttls"),
            ontology_path: PathBuf::from("ontology.ttls"),
            gateway: GatewaySettings::default(),
            top_k: 2,
            max_depth: 8,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("invalid backend '{0}': expected 'http' or 'mock:<file>'")]
    BadBackend(String),
    #[error("top_k must be at least 1")]
    BadTopK,
    #[error(transparent)]
    Gateway(#[from] crate::gateway::GatewayError),
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let config: AppConfig = serde_json::from_str(&text).map_err(|e| ConfigError::Invalid {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.top_k == 0 {
            return Err(ConfigError::BadTopK);
        }
        let backend = &self.gateway.backend;
        if backend != "http" && !backend.starts_with("mock:") {
            return Err(ConfigError::BadBackend(backend.clone()));
        }
        Ok(())
    }

    /// Builds the configured gateway. For the HTTP backend this resolves
    /// the API key environment variable and fails fast if it is unset.
    pub fn build_gateway(&self) -> Result<Gateway, ConfigError> {
        let settings = &self.gateway;
        if let Some(script) = settings.backend.strip_prefix("mock:") {
            return Ok(Gateway::mock_from_file(Path::new(script))?);
        }
        if settings.backend != "http" {
            return Err(ConfigError::BadBackend(settings.backend.clone()));
        }
        let api_key = std::env::var(&settings.api_key_env).map_err(|_| {
            ConfigError::Gateway(crate::gateway::GatewayError::MissingApiKey(
                settings.api_key_env.clone(),
            ))
        })?;
        Ok(Gateway::http(
            settings.endpoint.clone(),
            api_key,
            Duration::from_secs(settings.timeout_secs),
            settings.max_retries,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_sane() {
        let config = AppConfig::default();
        assert_eq!(config.top_k, 2);
        assert_eq!(config.max_depth, 8);
        assert_eq!(config.gateway.api_key_env, "NCKG_API_KEY");
        config.validate().unwrap();
    }

    #[test]
    fn partial_json_fills_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{"top_k": 4, "gateway": {"model": "other"}}"#).unwrap();
        let config = AppConfig::load(&path).unwrap();
        assert_eq!(config.top_k, 4);
        assert_eq!(config.gateway.model, "other");
        assert_eq!(config.max_depth, 8);
    }

    #[test]
    fn bad_backend_is_rejected() {
        let mut config = AppConfig::default();
        config.gateway.backend = "carrier-pigeon".to_string();
        assert!(matches!(config.validate(), Err(ConfigError::BadBackend(_))));
    }

    #[test]
    fn http_backend_requires_the_key_env() {
        let mut config = AppConfig::default();
        config.gateway.api_key_env = "NCKG_TEST_KEY_THAT_IS_NOT_SET".to_string();
        assert!(matches!(
            config.build_gateway(),
            Err(ConfigError::Gateway(crate::gateway::GatewayError::MissingApiKey(_)))
        ));
    }

    #[test]
    fn mock_backend_loads_script() {
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("script.json");
        std::fs::write(&script, "[]").unwrap();
        let mut config = AppConfig::default();
        config.gateway.backend = format!("mock:{}", script.display());
        assert!(config.build_gateway().unwrap().is_mock());
    }
}
