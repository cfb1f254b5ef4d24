//! Flat key-value run configuration and the flag/file/env/default
//! resolution rules.
//!
//! Precedence: command-line flag, then config file, then environment
//! (temperature only, `LIMB_TEMP_K`), then built-in default. Every
//! resolved value — defaults included — is echoed into the output
//! document's `config` block, which itself parses back as a config file.

use limb_core::analysis::SeriesError;
use limb_core::estimators::EstimatorError;
use limb_core::stochastic::StochasticError;
use limb_core::workloads::WorkloadError;
use std::collections::BTreeMap;

use std::path::{Path, PathBuf};

/// Environment variable overriding the default temperature.
pub const TEMP_ENV_VAR: &str = "LIMB_TEMP_K";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad files, bad parameter domains. Exit status 1.
    Validation(String),
    /// A series failed to certify its tolerance. Exit status 2.
    Convergence(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        Self::Validation(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 1,
            Self::Convergence(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Validation(m) | Self::Convergence(m) => m,
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::NotCertified { .. } => Self::Convergence(e.to_string()),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::Series(series) => series.into(),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<WorkloadError> for CliError {
    fn from(e: WorkloadError) -> Self {
        match e {
            WorkloadError::Estimator(inner) => inner.into(),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<StochasticError> for CliError {
    fn from(e: StochasticError) -> Self {
        match e {
            StochasticError::Estimator(inner) => inner.into(),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<limb_core::ScheduleError> for CliError {
    fn from(e: limb_core::ScheduleError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<limb_core::ThermoError> for CliError {
    fn from(e: limb_core::ThermoError) -> Self {
        Self::Validation(e.to_string())
    }
}

/// Parsed `key = value` config file.
#[derive(Debug, Default)]
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::validation(format!(
                    "config file {} line {}: expected 'key = value'",
                    path.display(),
                    i + 1
                ))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { map })
    }

    /// Reject unknown keys and a mismatched `subcommand` early; typos in a
    /// config file should not silently do nothing.
    pub fn check_keys(&self, subcommand: &str, known: &[&str]) -> Result<(), CliError> {
        if let Some(sc) = self.map.get("subcommand") {
            if sc != subcommand {
                return Err(CliError::validation(format!(
                    "config file is for subcommand '{sc}', but '{subcommand}' was invoked"
                )));
            }
        }
        for key in self.map.keys() {
            if key != "subcommand" && !known.contains(&key.as_str()) {
                return Err(CliError::validation(format!(
                    "config file: unknown key '{key}' for subcommand '{subcommand}'"
                )));
            }
        }
        Ok(())
    }

    pub fn get_str(&self, key: &str) -> Option<String> {
        self.map.get(key).cloned()
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.map
            .get(key)
            .map(|v| {
                v.parse().map_err(|_| {
                    CliError::validation(format!("config key '{key}': '{v}' is not a number"))
                })
            })
            .transpose()
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        // accept scientific notation for counts (1e7 and the like)
        Ok(self.get_f64(key)?.map(|v| v as u64))
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.map
            .get(key)
            .map(|v| match v.as_str() {
                "true" | "1" => Ok(true),
                "false" | "0" => Ok(false),
                other => Err(CliError::validation(format!(
                    "config key '{key}': '{other}' is not a boolean"
                ))),
            })
            .transpose()
    }

    pub fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.map.get(key).map(PathBuf::from)
    }
}

/// The resolved-configuration echo: everything that determined the run,
/// in a form that parses back as a config file.
#[derive(Debug, Default)]
pub struct Echo(pub BTreeMap<String, String>);

impl Echo {
    pub fn new(subcommand: &str) -> Self {
        let mut map = BTreeMap::new();
        map.insert("subcommand".to_string(), subcommand.to_string());
        Self(map)
    }

    pub fn set_str(&mut self, key: &str, value: impl AsRef<str>) {
        self.0.insert(key.to_string(), value.as_ref().to_string());
    }

    /// Floats echo in shortest round-trip form so the echoed config
    /// reproduces the run bit for bit.
    pub fn set_f64(&mut self, key: &str, value: f64) {
        self.0.insert(key.to_string(), format!("{value:?}"));
    }

    pub fn set_u64(&mut self, key: &str, value: u64) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn set_bool(&mut self, key: &str, value: bool) {
        self.0.insert(key.to_string(), value.to_string());
    }
}

/// Temperature resolution: flag, file, `LIMB_TEMP_K`, then 300 K.
pub fn resolve_temperature(flag: Option<f64>, file: &FileConfig) -> Result<f64, CliError> {
    if let Some(t) = flag {
        return Ok(t);
    }
    if let Some(t) = file.get_f64("temperature")? {
        return Ok(t);
    }
    match std::env::var(TEMP_ENV_VAR) {
        Ok(v) => v
            .parse()
            .map_err(|_| CliError::validation(format!("{TEMP_ENV_VAR}='{v}' is not a number"))),
        Err(_) => Ok(limb_core::thermo::DEFAULT_TEMPERATURE),
    }
}

/// Precision resolution with the bits/delta exclusivity rule.
/// Returns the effective delta plus the echo key/value that produced it.
pub fn resolve_precision(
    flag_bits: Option<f64>,
    flag_delta: Option<f64>,
    file: &FileConfig,
) -> Result<(f64, &'static str, f64), CliError> {
    match (flag_bits, flag_delta) {
        (Some(_), Some(_)) => Err(CliError::validation(
            "delta and bits are mutually exclusive",
        )),
        (Some(bits), None) => {
            if bits.is_nan() || bits <= 0.0 {
                return Err(CliError::validation(format!(
                    "bits must be positive, got {bits}"
                )));
            }
            Ok((2f64.powf(-bits), "bits", bits))
        }
        (None, Some(delta)) => Ok((delta, "delta", delta)),
        (None, None) => match (file.get_f64("bits")?, file.get_f64("delta")?) {
            (Some(_), Some(_)) => Err(CliError::validation(
                "delta and bits are mutually exclusive (both set in config file)",
            )),
            (Some(bits), None) => Ok((2f64.powf(-bits), "bits", bits)),
            (None, Some(delta)) => Ok((delta, "delta", delta)),
            (None, None) => Ok((limb_core::estimators::DEFAULT_DELTA, "bits", 16.0)),
        },
    }
}
