//! Scenario configuration.
//!
//! Configuration files are JSON objects. Every key is optional; omitted keys
//! take the defaults of the selected `scale` preset. Units are part of the key
//! name and decibel quantities are converted to linear values exactly once, at
//! load time:
//!
//! | key                        | unit      | default (paper / test) |
//! |----------------------------|-----------|------------------------|
//! | `scale`                    | -         | `"paper"`              |
//! | `antennas`                 | count     | 4                      |
//! | `paths`                    | count     | 9                      |
//! | `wavelength_m`             | m         | 0.1                    |
//! | `region_side_wavelengths`  | λ         | 3                      |
//! | `p_max_dbm`                | dBm       | 38                     |
//! | `reflection_efficiency`    | -         | 0.8                    |
//! | `d_min_wavelengths`        | λ         | 0.5                    |
//! | `path_loss_db`             | dB        | -10                    |
//! | `path_loss_exponent`       | -         | 1.8                    |
//! | `noise_power_w`            | W         | 1e-8                   |
//! | `ber_max`                  | -         | 0.3                    |
//! | `swarm_size`               | particles | 150 / 50               |
//! | `swarm_iterations`         | -         | 150 / 50               |
//! | `cognitive_factor`         | -         | 1.4                    |
//! | `social_factor`            | -         | 1.4                    |
//! | `inertia`                  | -         | 1.2                    |
//! | `penalty_bits`             | bits      | 50                     |
//! | `initial_temperature_bits` | bits      | 1.0                    |
//! | `tolerance_bits`           | bits      | 0.01                   |
//! | `seed`                     | -         | 0                      |
//! | `trials`                   | -         | 100 / 20               |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::PlacementRegion;
use crate::error::ConfigError;

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// dB to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Named parameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Full-size swarm (S = Q = 150).
    #[default]
    Paper,
    /// Reduced swarm and trial count for CI.
    Test,
}

impl std::str::FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Scale::Paper),
            "test" => Ok(Scale::Test),
            other => Err(format!("unknown scale `{other}` (expected paper|test)")),
        }
    }
}

/// All physical and algorithmic parameters, in linear SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scale: Scale,
    /// Number of movable antennas at the primary transmitter.
    pub antennas: usize,
    /// Number of transmit/receive paths per link.
    pub paths: usize,
    pub wavelength: f64,
    /// Side of the square placement region, in meters.
    pub region_side: f64,
    /// Transmit power budget, watts.
    pub p_max: f64,
    pub reflection_efficiency: f64,
    /// Minimum inter-antenna spacing, meters.
    pub d_min: f64,
    /// Reference path loss (linear).
    pub path_loss: f64,
    pub path_loss_exponent: f64,
    /// Noise power at the primary user, watts.
    pub noise_power: f64,
    /// BER cap for the backscattered stream.
    pub ber_max: f64,
    pub swarm_size: usize,
    pub swarm_iterations: usize,
    pub cognitive_factor: f64,
    pub social_factor: f64,
    pub inertia: f64,
    pub penalty: f64,
    pub initial_temperature: f64,
    /// Convergence tolerance shared by the SCA and AO loops, bits.
    pub tolerance: f64,
    pub seed: u64,
    pub trials: usize,
}

impl ScenarioConfig {
    pub fn preset(scale: Scale) -> Self {
        let wavelength = 0.1;
        let (swarm, trials) = match scale {
            Scale::Paper => (150, 100),
            Scale::Test => (50, 20),
        };
        Self {
            scale,
            antennas: 4,
            paths: 9,
            wavelength,
            region_side: 3.0 * wavelength,
            p_max: dbm_to_watts(38.0),
            reflection_efficiency: 0.8,
            d_min: 0.5 * wavelength,
            path_loss: db_to_linear(-10.0),
            path_loss_exponent: 1.8,
            noise_power: 1e-8,
            ber_max: 0.3,
            swarm_size: swarm,
            swarm_iterations: swarm,
            cognitive_factor: 1.4,
            social_factor: 1.4,
            inertia: 1.2,
            penalty: 50.0,
            initial_temperature: 1.0,
            tolerance: 1e-2,
            seed: 0,
            trials,
        }
    }

    pub fn paper() -> Self {
        Self::preset(Scale::Paper)
    }

    pub fn test() -> Self {
        Self::preset(Scale::Test)
    }

    /// Square placement region centered at the transmitter origin.
    pub fn region(&self) -> PlacementRegion {
        PlacementRegion::centered_square(self.region_side)
    }

    /// Checks every range and positivity constraint, naming the first bad field.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
            ConfigError::Invalid {
                field,
                reason: reason.into(),
            }
        }
        fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(
                    field,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        }
        if self.antennas == 0 {
            return Err(invalid("antennas", "must be at least 1"));
        }
        if self.paths == 0 {
            return Err(invalid("paths", "must be at least 1"));
        }
        positive("wavelength_m", self.wavelength)?;
        positive("region_side_wavelengths", self.region_side)?;
        positive("p_max_dbm", self.p_max)?;
        if !(0.0..=1.0).contains(&self.reflection_efficiency) {
            return Err(invalid(
                "reflection_efficiency",
                format!("must lie in [0, 1], got {}", self.reflection_efficiency),
            ));
        }
        if !(self.d_min.is_finite() && self.d_min >= 0.0) {
            return Err(invalid("d_min_wavelengths", "must be non-negative"));
        }
        positive("path_loss_db", self.path_loss)?;
        if !(self.path_loss_exponent.is_finite() && self.path_loss_exponent >= 0.0) {
            return Err(invalid("path_loss_exponent", "must be non-negative"));
        }
        positive("noise_power_w", self.noise_power)?;
        if !(self.ber_max > 0.0 && self.ber_max < 0.5) {
            return Err(invalid(
                "ber_max",
                format!("must lie in (0, 0.5), got {}", self.ber_max),
            ));
        }
        if self.swarm_size == 0 {
            return Err(invalid("swarm_size", "must be at least 1"));
        }
        if self.swarm_iterations == 0 {
            return Err(invalid("swarm_iterations", "must be at least 1"));
        }
        for (field, v) in [
            ("cognitive_factor", self.cognitive_factor),
            ("social_factor", self.social_factor),
            ("inertia", self.inertia),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(field, format!("must be non-negative, got {v}")));
            }
        }
        positive("penalty_bits", self.penalty)?;
        positive("initial_temperature_bits", self.initial_temperature)?;
        positive("tolerance_bits", self.tolerance)?;
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        Ok(())
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::paper()
    }
}

/// On-disk form: every key optional, decibel units explicit.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scale: Option<Scale>,
    antennas: Option<usize>,
    paths: Option<usize>,
    wavelength_m: Option<f64>,
    region_side_wavelengths: Option<f64>,
    p_max_dbm: Option<f64>,
    reflection_efficiency: Option<f64>,
    d_min_wavelengths: Option<f64>,
    path_loss_db: Option<f64>,
    path_loss_exponent: Option<f64>,
    noise_power_w: Option<f64>,
    ber_max: Option<f64>,
    swarm_size: Option<usize>,
    swarm_iterations: Option<usize>,
    cognitive_factor: Option<f64>,
    social_factor: Option<f64>,
    inertia: Option<f64>,
    penalty_bits: Option<f64>,
    initial_temperature_bits: Option<f64>,
    tolerance_bits: Option<f64>,
    seed: Option<u64>,
    trials: Option<usize>,
}

impl RawConfig {
    fn resolve(self, scale: Option<Scale>) -> ScenarioConfig {
        let mut c = ScenarioConfig::preset(scale.or(self.scale).unwrap_or_default());
        if let Some(v) = self.wavelength_m {
            c.wavelength = v;
        }
        // region and spacing are expressed in wavelengths, so they follow λ
        c.region_side = self.region_side_wavelengths.unwrap_or(3.0) * c.wavelength;
        c.d_min = self.d_min_wavelengths.unwrap_or(0.5) * c.wavelength;
        macro_rules! take {
            ($($raw:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$raw { c.$field = v; })*
            };
        }
        take!(
            antennas => antennas,
            paths => paths,
            reflection_efficiency => reflection_efficiency,
            path_loss_exponent => path_loss_exponent,
            noise_power_w => noise_power,
            ber_max => ber_max,
            swarm_size => swarm_size,
            swarm_iterations => swarm_iterations,
            cognitive_factor => cognitive_factor,
            social_factor => social_factor,
            inertia => inertia,
            penalty_bits => penalty,
            initial_temperature_bits => initial_temperature,
            tolerance_bits => tolerance,
            seed => seed,
            trials => trials,
        );
        if let Some(dbm) = self.p_max_dbm {
            c.p_max = dbm_to_watts(dbm);
        }
        if let Some(db) = self.path_loss_db {
            c.path_loss = db_to_linear(db);
        }
        c
    }
}

/// Parses configuration text. Blank input yields the paper-scale defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_as(text, None)
}

/// Like [`parse_config`], with `scale` taking precedence over the file's own preset.
pub fn parse_config_as(text: &str, scale: Option<Scale>) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = if text.trim().is_empty() {
        RawConfig::default()
    } else {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?
    };
    let config = raw.resolve(scale);
    config.validate()?;
    Ok(config)
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    load_config_as(path, None)
}

pub fn load_config_as(
    path: impl AsRef<Path>,
    scale: Option<Scale>,
) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_as(&text, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_paper_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ScenarioConfig::paper());
        assert_eq!(c.swarm_size, 150);
        assert_eq!(c.swarm_iterations, 150);
        assert_eq!(c.paths, 9);
        assert!((c.region_side - 0.3).abs() < 1e-15);
        assert!((c.d_min - 0.05).abs() < 1e-15);
        assert!((c.path_loss - 0.1).abs() < 1e-15);
        assert_eq!(parse_config("  \n").unwrap(), ScenarioConfig::paper());
        assert_eq!(parse_config("{}").unwrap(), ScenarioConfig::paper());
    }

    #[test]
    fn dbm_is_converted_once() {
        let c = parse_config(r#"{"p_max_dbm": 38}"#).unwrap();
        assert!((c.p_max - 6.309_573_444_801_933).abs() < 1e-12);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn test_preset_shrinks_swarm() {
        let c = parse_config(r#"{"scale": "test", "paths": 3}"#).unwrap();
        assert_eq!(c.swarm_size, 50);
        assert_eq!(c.trials, 20);
        assert_eq!(c.paths, 3);
    }

    #[test]
    fn negative_noise_names_field() {
        let err = parse_config(r#"{"noise_power_w": -1e-8}"#).unwrap_err();
        match err {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "noise_power_w"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_reports_line() {
        let err = parse_config("{\n  \"antennas\": 4,\n  \"paths\": ,\n}").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            parse_config(r#"{"antenas": 4}"#),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn ber_range_is_checked() {
        for bad in ["0", "0.5", "0.7"] {
            let err = parse_config(&format!(r#"{{"ber_max": {bad}}}"#)).unwrap_err();
            assert!(matches!(
                err,
                ConfigError::Invalid {
                    field: "ber_max",
                    ..
                }
            ));
        }
    }
}
