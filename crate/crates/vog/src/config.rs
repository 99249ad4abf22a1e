//! Run configuration: built-in defaults, optional key=value config file,
//! command-line overrides on top.

use crate::corner::CornerSide;
use crate::gaze::Calibration;
use std::path::Path;
use thiserror::Error;

/// Environment variable naming a config file to load when no `--config`
/// flag is given.
pub const CONFIG_ENV_VAR: &str = "VOG_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("config value out of range: {0}")]
    Range(String),
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Tunable pipeline parameters with their defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Low-resolution pass reduction, 640x480 -> 80x60 at 8.
    pub downscale_factor: u32,
    /// Iris window width as a fraction of the eye-region width.
    pub window_width_ratio: f64,
    /// Outlier cut in residual standard deviations for the double fit.
    pub outlier_k: f64,
    /// Minimum border samples for a usable pupil fit.
    pub min_samples: usize,
    pub corner_side: CornerSide,
    pub deg_per_px_x: f64,
    pub deg_per_px_y: f64,
    pub fps: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            downscale_factor: 8,
            window_width_ratio: 0.15,
            outlier_k: 2.0,
            min_samples: 8,
            corner_side: CornerSide::TemporalRight,
            deg_per_px_x: 0.05,
            deg_per_px_y: 0.05,
            fps: 30.0,
        }
    }
}

impl RunConfig {
    pub fn calibration(&self) -> Calibration {
        Calibration {
            deg_per_px_x: self.deg_per_px_x,
            deg_per_px_y: self.deg_per_px_y,
            viewing_distance_cm: 70.0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.downscale_factor == 0 {
            return Err(ConfigError::Range("downscale_factor must be >= 1".into()));
        }
        if !(self.window_width_ratio > 0.0 && self.window_width_ratio < 1.0) {
            return Err(ConfigError::Range(
                "window_width_ratio must be in (0, 1)".into(),
            ));
        }
        if self.outlier_k <= 0.0 || self.deg_per_px_x <= 0.0 || self.deg_per_px_y <= 0.0 || self.fps <= 0.0 {
            return Err(ConfigError::Range(
                "outlier_k, deg_per_px and fps must be positive".into(),
            ));
        }
        if self.min_samples < 3 {
            return Err(ConfigError::Range("min_samples must be >= 3".into()));
        }
        Ok(())
    }

    /// Apply one `key=value` assignment.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let bad = |reason: String| ConfigError::Parse { line, reason };
        match key {
            "downscale_factor" => {
                self.downscale_factor = value.parse().map_err(|_| bad(format!("bad integer {value:?}")))?
            }
            "window_width_ratio" => {
                self.window_width_ratio = value.parse().map_err(|_| bad(format!("bad number {value:?}")))?
            }
            "outlier_k" => {
                self.outlier_k = value.parse().map_err(|_| bad(format!("bad number {value:?}")))?
            }
            "min_samples" => {
                self.min_samples = value.parse().map_err(|_| bad(format!("bad integer {value:?}")))?
            }
            "corner_side" => self.corner_side = value.parse().map_err(bad)?,
            "deg_per_px_x" => {
                self.deg_per_px_x = value.parse().map_err(|_| bad(format!("bad number {value:?}")))?
            }
            "deg_per_px_y" => {
                self.deg_per_px_y = value.parse().map_err(|_| bad(format!("bad number {value:?}")))?
            }
            "deg_per_px" => {
                let v: f64 = value.parse().map_err(|_| bad(format!("bad number {value:?}")))?;
                self.deg_per_px_x = v;
                self.deg_per_px_y = v;
            }
            "fps" => self.fps = value.parse().map_err(|_| bad(format!("bad number {value:?}")))?,
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parse `key=value` lines; `#` starts a comment, blank lines ignored.
    pub fn apply_str(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Parse {
                line: i + 1,
                reason: format!("expected key=value, got {line:?}"),
            })?;
            self.set(key.trim(), value.trim(), i + 1)?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_str(&text)
    }
}
