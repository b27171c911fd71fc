//! Service configuration: one TOML file, overridable through `PIDINST_*`
//! environment variables.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SuffixPolicy {
    #[default]
    Sequential,
    RandomHex,
}

impl std::str::FromStr for SuffixPolicy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Sequential" | "sequential" => Ok(SuffixPolicy::Sequential),
            "RandomHex" | "random_hex" | "random-hex" => Ok(SuffixPolicy::RandomHex),
            other => Err(ConfigError::Invalid(format!("unknown suffix policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryConfig {
    pub prefix: String,
    #[serde(default)]
    pub suffix_policy: SuffixPolicy,
    pub store_path: PathBuf,
    #[serde(default = "default_resolver")]
    pub base_resolver_url: String,
    #[serde(default = "default_bind")]
    pub bind: SocketAddr,
    /// Bearer token required on write requests when set.
    #[serde(default)]
    pub api_token: Option<String>,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
}

fn default_resolver() -> String {
    pidinst::pid::DEFAULT_HANDLE_RESOLVER.to_string()
}

fn default_bind() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 8080))
}

fn default_page_size() -> usize {
    100
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl RegistryConfig {
    pub fn new(prefix: impl Into<String>, store_path: impl Into<PathBuf>) -> Self {
        RegistryConfig {
            prefix: prefix.into(),
            suffix_policy: SuffixPolicy::Sequential,
            store_path: store_path.into(),
            base_resolver_url: default_resolver(),
            bind: default_bind(),
            api_token: None,
            page_size: default_page_size(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let c: RegistryConfig = toml::from_str(text)?;
        c.check()?;
        Ok(c)
    }

    /// Reads `path` and applies environment overrides.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut c: RegistryConfig = toml::from_str(&text)?;
        c.apply_env(|k| std::env::var(k).ok())?;
        c.check()?;
        Ok(c)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = var("PIDINST_PREFIX") {
            self.prefix = v;
        }
        if let Some(v) = var("PIDINST_SUFFIX_POLICY") {
            self.suffix_policy = v.parse()?;
        }
        if let Some(v) = var("PIDINST_STORE_PATH") {
            self.store_path = v.into();
        }
        if let Some(v) = var("PIDINST_BASE_RESOLVER_URL") {
            self.base_resolver_url = v;
        }
        if let Some(v) = var("PIDINST_BIND") {
            self.bind = v
                .parse()
                .map_err(|e| ConfigError::Invalid(format!("PIDINST_BIND `{v}`: {e}")))?;
        }
        if let Some(v) = var("PIDINST_API_TOKEN") {
            self.api_token = Some(v).filter(|t| !t.is_empty());
        }
        if let Some(v) = var("PIDINST_PAGE_SIZE") {
            self.page_size = v
                .parse()
                .map_err(|e| ConfigError::Invalid(format!("PIDINST_PAGE_SIZE `{v}`: {e}")))?;
        }
        Ok(())
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.prefix.trim().is_empty() {
            return Err(ConfigError::Invalid("prefix is empty".into()));
        }
        if self.prefix.contains('/') || self.prefix.chars().any(char::is_whitespace) {
            return Err(ConfigError::Invalid(format!(
                "prefix `{}` must not contain `/` or whitespace",
                self.prefix
            )));
        }
        if self.page_size == 0 {
            return Err(ConfigError::Invalid("page_size must be positive".into()));
        }
        Ok(())
    }
}
