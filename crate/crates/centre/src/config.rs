//! Flat `key=value` configuration files.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored.
//! Relative paths are resolved against the directory holding the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;
use vmd_core::motion::DetectorConfig;
use vmd_core::protocol::{Mode, DEFAULT_PORT};
use vmd_core::rover::DEFAULT_WATCHDOG_TIMEOUT_MS;
use vmd_core::tracker::{ColorReference, TrackerConfig};

pub const SECRET_ENV: &str = "SENTRY_SECRET";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("{key}: {reason}")]
    Value { key: String, reason: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrameSourceConfig {
    Scene(PathBuf),
    Sequence(PathBuf),
}

#[derive(Debug, Clone)]
pub struct CentreConfig {
    pub listen_port: u16,
    /// WebSocket bridge and console assets; defaults to `listen_port + 1`.
    pub bridge_port: Option<u16>,
    pub shared_secret: String,
    pub alarm_password: String,
    pub detector: DetectorConfig,
    pub tracker: TrackerConfig,
    pub color: ColorReference,
    pub frame_rate: f64,
    pub source: FrameSourceConfig,
    pub watchdog_timeout_ms: u64,
    pub width: u32,
    pub height: u32,
    pub initial_mode: Mode,
    pub console_dir: Option<PathBuf>,
    pub record_dir: Option<PathBuf>,
}

impl CentreConfig {
    /// Defaults for everything except the frame source and credentials.
    pub fn new(source: FrameSourceConfig, shared_secret: &str, alarm_password: &str) -> Self {
        CentreConfig {
            listen_port: DEFAULT_PORT,
            bridge_port: None,
            shared_secret: shared_secret.to_string(),
            alarm_password: alarm_password.to_string(),
            detector: DetectorConfig::default(),
            tracker: TrackerConfig::default(),
            color: ColorReference::new([255, 0, 0], ColorReference::DEFAULT_TOLERANCE),
            frame_rate: 10.0,
            source,
            watchdog_timeout_ms: DEFAULT_WATCHDOG_TIMEOUT_MS,
            width: vmd_core::imaging::DEFAULT_WIDTH,
            height: vmd_core::imaging::DEFAULT_HEIGHT,
            initial_mode: Mode::PcControl,
            console_dir: None,
            record_dir: None,
        }
    }

    pub fn bridge_port(&self) -> u16 {
        self.bridge_port.unwrap_or_else(|| self.listen_port.wrapping_add(1))
    }

    pub fn frame_interval_ms(&self) -> u64 {
        ((1000.0 / self.frame_rate).round() as u64).max(1)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "frame_rate must be positive, got {}",
                self.frame_rate
            )));
        }
        if self.shared_secret.is_empty() {
            return Err(ConfigError::Invalid("shared_secret must not be empty".into()));
        }
        if self.alarm_password.is_empty() {
            return Err(ConfigError::Invalid("alarm_password must not be empty".into()));
        }
        if self.width < 8 || self.height < 8 {
            return Err(ConfigError::Invalid(format!(
                "frame size {}x{} below 8x8",
                self.width, self.height
            )));
        }
        self.detector
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.tracker.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let env_secret = std::env::var(SECRET_ENV).ok();
        Self::parse(&text, base, env_secret.as_deref())
    }

    /// Parses config text. `env_secret`, when set, overrides `shared_secret`.
    pub fn parse(text: &str, base: &Path, env_secret: Option<&str>) -> Result<Self, ConfigError> {
        let mut kv = parse_pairs(text)?;
        let mut take = |key: &str| kv.remove(key);

        let scene = take("scene_file").map(|v| base.join(v));
        let sequence = take("sequence_file").map(|v| base.join(v));
        let source = match (scene, sequence) {
            (Some(s), None) => FrameSourceConfig::Scene(s),
            (None, Some(s)) => FrameSourceConfig::Sequence(s),
            _ => {
                return Err(ConfigError::Invalid(
                    "exactly one of scene_file / sequence_file must be set".into(),
                ))
            }
        };
        let secret = env_secret
            .map(str::to_string)
            .or_else(|| take("shared_secret"))
            .unwrap_or_default();
        take("shared_secret");
        let password = take("alarm_password").unwrap_or_default();
        let mut cfg = CentreConfig::new(source, &secret, &password);

        if let Some(v) = take("listen_port") {
            cfg.listen_port = value("listen_port", &v)?;
        }
        if let Some(v) = take("bridge_port") {
            cfg.bridge_port = Some(value("bridge_port", &v)?);
        }
        if let Some(v) = take("tau") {
            cfg.detector.tau = value("tau", &v)?;
        }
        if let Some(v) = take("min_ratio") {
            cfg.detector.min_ratio = value("min_ratio", &v)?;
        }
        if let Some(v) = take("persist_k") {
            cfg.detector.persist_k = value("persist_k", &v)?;
        }
        if let Some(v) = take("denoise") {
            cfg.detector.denoise = value("denoise", &v)?;
        }
        if let Some(v) = take("dead_zone_frac") {
            cfg.tracker.dead_zone_frac = value("dead_zone_frac", &v)?;
        }
        if let Some(v) = take("min_pixels") {
            cfg.tracker.min_pixels = value("min_pixels", &v)?;
        }
        if let Some(v) = take("target_fill") {
            cfg.tracker.target_fill = value("target_fill", &v)?;
        }
        if let Some(v) = take("color") {
            cfg.color.rgb = parse_rgb(&v).map_err(|reason| ConfigError::Value {
                key: "color".into(),
                reason,
            })?;
        }
        if let Some(v) = take("color_tol") {
            cfg.color.tolerance = value("color_tol", &v)?;
        }
        if let Some(v) = take("frame_rate") {
            cfg.frame_rate = value("frame_rate", &v)?;
        }
        if let Some(v) = take("watchdog_timeout_ms") {
            cfg.watchdog_timeout_ms = value("watchdog_timeout_ms", &v)?;
        }
        if let Some(v) = take("width") {
            cfg.width = value("width", &v)?;
        }
        if let Some(v) = take("height") {
            cfg.height = value("height", &v)?;
        }
        if let Some(v) = take("mode") {
            cfg.initial_mode = v.parse().map_err(|reason| ConfigError::Value {
                key: "mode".into(),
                reason,
            })?;
        }
        cfg.console_dir = take("console_dir").map(|v| base.join(v));
        cfg.record_dir = take("record_dir").map(|v| base.join(v));

        if let Some(key) = kv.keys().next() {
            return Err(ConfigError::Value {
                key: key.clone(),
                reason: "unknown setting".into(),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Splits `key=value` lines; later duplicates are an error.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut kv = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                reason: format!("expected key=value, got {line:?}"),
            });
        };
        let key = k.trim().to_string();
        if kv.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                reason: format!("duplicate key {key:?}"),
            });
        }
    }
    Ok(kv)
}

pub fn value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::Value {
        key: key.to_string(),
        reason: format!("cannot parse {v:?}"),
    })
}

/// `R,G,B` with each channel 0–255.
pub fn parse_rgb(v: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    let [r, g, b] = parts[..] else {
        return Err(format!("expected R,G,B, got {v:?}"));
    };
    let channel = |s: &str| s.parse::<u8>().map_err(|_| format!("bad channel {s:?}"));
    Ok([channel(r)?, channel(g)?, channel(b)?])
}
