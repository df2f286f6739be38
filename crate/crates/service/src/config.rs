use std::path::PathBuf;

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    pub bank_path: PathBuf,
    /// Bearer key for facilitator endpoints.
    pub facilitator_key: String,
}

impl std::fmt::Debug for ServiceConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ServiceConfig")
            .field("port", &self.port)
            .field("data_dir", &self.data_dir)
            .field("bank_path", &self.bank_path)
            .field("facilitator_key", &"<redacted>")
            .finish()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("environment variable {0} is required")]
    Missing(&'static str),
    #[error("environment variable {name} is invalid: {message}")]
    Invalid { name: &'static str, message: String },
}

impl ServiceConfig {
    /// Reads `PORT`, `DATA_DIR`, `BANK_PATH` and `FACILITATOR_KEY`.
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let port = match get("PORT") {
            Some(p) => p.parse().map_err(|e: std::num::ParseIntError| ConfigError::Invalid {
                name: "PORT",
                message: e.to_string(),
            })?,
            None => DEFAULT_PORT,
        };
        let required = |name: &'static str| get(name).filter(|v| !v.is_empty()).ok_or(ConfigError::Missing(name));
        let facilitator_key = required("FACILITATOR_KEY")?;
        if facilitator_key.len() < 16 {
            return Err(ConfigError::Invalid {
                name: "FACILITATOR_KEY",
                message: "must be at least 16 characters".into(),
            });
        }
        Ok(Self {
            port,
            data_dir: PathBuf::from(required("DATA_DIR")?),
            bank_path: PathBuf::from(required("BANK_PATH")?),
            facilitator_key,
        })
    }
}
