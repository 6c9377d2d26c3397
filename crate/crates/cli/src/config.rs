//! Flat `key = value` experiment configuration.
//!
//! Every physical quantity carries its unit in the key (`sphere_radius_km`,
//! `tx_power_dbw`, ...). Values are converted to SI here and nowhere else.
//! Absent keys take the reference defaults; unknown keys are rejected.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use satroute_core::channel::{db_to_linear, dbm_to_watts, dbw_to_watts, ChannelParams};
use satroute_core::sim::Strategy;
use satroute_core::sphere::{Alpha2Mode, ConstellationGeometry};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: key `{key}` has the wrong unit; use `{expected}`")]
    Unit { line: usize, key: String, expected: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid value for `{key}`: {message}")]
    Invariant { key: String, message: String },
}

/// Which hop-count search picks the route length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    One,
    Two,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1" => Ok(Method::One),
            "2" => Ok(Method::Two),
            other => Err(format!("expected 1 or 2, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: ConstellationGeometry,
    pub channel: ChannelParams,
    pub theta_total_rad: f64,
    pub epsilon: f64,
    pub method: Method,
    pub alpha2_mode: Alpha2Mode,
    /// Fixed hop count for `analyze`/`simulate`; the optimizer's choice when absent.
    pub num_hops: Option<u32>,
    pub strategies: Vec<Strategy>,
    pub sweep_num_satellites: Vec<usize>,
    pub sweep_altitudes_m: Vec<f64>,
    pub sweep_theta_rad: Vec<f64>,
    pub num_realizations: usize,
    pub base_seed: u64,
    pub min_stepsize_cone_rad: f64,
    pub speed_of_light_mps: f64,
    pub output: Option<PathBuf>,
}

const KEYS: &[(&str, &str)] = &[
    ("earth_radius_km", "6371"),
    ("sphere_radius_km", "7371"),
    ("num_satellites", "1000"),
    ("eta_s", "1.00526"),
    ("a0", "0.01979"),
    ("jitter_mrad", "15"),
    ("theta_total_deg", "90"),
    ("tx_power_dbw", "15"),
    ("antenna_gain_dbi", "160"),
    ("wavelength_nm", "1550"),
    ("bandwidth_mhz", "20"),
    ("noise_power_dbm", "-100"),
    ("coverage_threshold_db", "0"),
    ("packet_mbit", "10"),
    ("epsilon", "0.1"),
    ("speed_of_light_mps", "3e8"),
    ("num_realizations", "10000"),
    ("base_seed", "0"),
    ("method", "1"),
    ("alpha2", "additive"),
    ("num_hops", ""),
    ("strategies", "proposed,min_deflection,max_stepsize,min_stepsize"),
    ("sweep_num_satellites", "200,1000,5000"),
    ("sweep_altitudes_km", "500,1000,1500"),
    ("sweep_theta_deg", "22.5,45,90"),
    ("min_stepsize_cone_deg", "30"),
    ("output", ""),
];

const UNIT_SUFFIXES: &[&str] = &[
    "_km", "_m", "_mm", "_deg", "_rad", "_mrad", "_urad", "_w", "_dbw", "_dbm", "_dbi", "_db", "_mw", "_nm", "_um",
    "_hz", "_khz", "_mhz", "_ghz", "_bit", "_bits", "_kbit", "_mbit", "_mps", "_kmps",
];

fn stem(key: &str) -> &str {
    UNIT_SUFFIXES
        .iter()
        .filter(|s| key.ends_with(*s))
        .map(|s| &key[..key.len() - s.len()])
        .min_by_key(|s| s.len())
        .unwrap_or(key)
}

/// Values as written, keyed by name, with the line each came from (0 = default).
struct RawConfig {
    values: BTreeMap<&'static str, (String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<&'static str, (String, usize)> =
            KEYS.iter().map(|(k, v)| (*k, (v.to_string(), 0))).collect();
        let mut seen = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let column = content.len() - content.trim_start().len() + 1;
                return Err(ConfigError::Parse {
                    line,
                    column,
                    message: "expected `key = value`".into(),
                });
            };
            let key = content[..eq].trim();
            let value = content[eq + 1..].trim();
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
            {
                return Err(ConfigError::Parse {
                    line,
                    column: content.len() - content.trim_start().len() + 1,
                    message: format!("invalid key `{key}`"),
                });
            }
            let Some((known, _)) = KEYS.iter().find(|(k, _)| *k == key) else {
                if let Some((expected, _)) = KEYS.iter().find(|(k, _)| stem(k) == stem(key) && stem(key) != key) {
                    return Err(ConfigError::Unit {
                        line,
                        key: key.into(),
                        expected: (*expected).into(),
                    });
                }
                if let Some((expected, _)) = KEYS.iter().find(|(k, _)| stem(k) == key) {
                    return Err(ConfigError::Unit {
                        line,
                        key: key.into(),
                        expected: (*expected).into(),
                    });
                }
                return Err(ConfigError::UnknownKey { line, key: key.into() });
            };
            if let Some(prev) = seen.insert(*known, line) {
                return Err(ConfigError::Parse {
                    line,
                    column: 1,
                    message: format!("duplicate key `{key}` (first set on line {prev})"),
                });
            }
            values.insert(known, (value.to_string(), line));
        }
        Ok(RawConfig { values })
    }

    fn raw(&self, key: &'static str) -> &str {
        &self.values[key].0
    }

    fn invariant(key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invariant {
            key: key.into(),
            message: message.into(),
        }
    }

    fn value_error(&self, key: &'static str, message: String) -> ConfigError {
        let (_, line) = &self.values[key];
        if *line == 0 {
            Self::invariant(key, message)
        } else {
            let column = 1;
            ConfigError::Parse {
                line: *line,
                column,
                message: format!("`{key}`: {message}"),
            }
        }
    }

    fn parse_as<T: std::str::FromStr>(&self, key: &'static str, s: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        s.trim()
            .parse::<T>()
            .map_err(|e| self.value_error(key, format!("cannot parse `{}`: {e}", s.trim())))
    }

    fn get<T: std::str::FromStr>(&self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse_as(key, self.raw(key))
    }

    fn number(&self, key: &'static str) -> Result<f64, ConfigError> {
        let v: f64 = self.get(key)?;
        if !v.is_finite() {
            return Err(Self::invariant(key, "must be finite"));
        }
        Ok(v)
    }

    fn positive(&self, key: &'static str) -> Result<f64, ConfigError> {
        let v = self.number(key)?;
        if v <= 0.0 {
            return Err(Self::invariant(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn list<T: std::str::FromStr>(&self, key: &'static str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key);
        if raw.trim().is_empty() {
            return Err(Self::invariant(key, "must not be empty"));
        }
        raw.split(',').map(|item| self.parse_as(key, item)).collect()
    }
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;
        fn inv(key: &str, message: impl Into<String>) -> ConfigError {
            RawConfig::invariant(key, message)
        }

        let earth = raw.positive("earth_radius_km")? * 1e3;
        let sphere = raw.positive("sphere_radius_km")? * 1e3;
        if sphere <= earth {
            return Err(inv("sphere_radius_km", "must exceed earth_radius_km"));
        }
        let n_sat: usize = raw.get("num_satellites")?;
        if n_sat == 0 {
            return Err(inv("num_satellites", "must be at least 1"));
        }
        let geometry =
            ConstellationGeometry::new(sphere, earth, n_sat).map_err(|e| inv("sphere_radius_km", e.to_string()))?;

        let jitter = raw.number("jitter_mrad")? * 1e-3;
        if !(0.0..1.0).contains(&jitter) {
            return Err(inv("jitter_mrad", "must lie in [0, 1000)"));
        }
        let a0 = raw.positive("a0")?;
        if a0 > 1.0 {
            return Err(inv("a0", "must not exceed 1"));
        }
        let channel = ChannelParams {
            tx_power_w: dbw_to_watts(raw.number("tx_power_dbw")?),
            antenna_gain: db_to_linear(raw.number("antenna_gain_dbi")?),
            wavelength_m: raw.positive("wavelength_nm")? * 1e-9,
            bandwidth_hz: raw.positive("bandwidth_mhz")? * 1e6,
            noise_power_w: dbm_to_watts(raw.number("noise_power_dbm")?),
            eta_s: raw.positive("eta_s")?,
            a0,
            jitter_sigma_rad: jitter,
            coverage_threshold: db_to_linear(raw.number("coverage_threshold_db")?),
            packet_bits: raw.positive("packet_mbit")? * 1e6,
        };

        let theta_deg = raw.positive("theta_total_deg")?;
        if theta_deg > 180.0 {
            return Err(inv("theta_total_deg", "must not exceed 180"));
        }
        let epsilon = raw.number("epsilon")?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(inv("epsilon", "must lie strictly between 0 and 1"));
        }
        let num_hops = match raw.raw("num_hops").trim() {
            "" => None,
            _ => {
                let n: u32 = raw.get("num_hops")?;
                if n == 0 {
                    return Err(inv("num_hops", "must be at least 1"));
                }
                Some(n)
            }
        };
        let num_realizations: usize = raw.get("num_realizations")?;
        if num_realizations == 0 {
            return Err(inv("num_realizations", "must be at least 1"));
        }
        let cone_deg = raw.positive("min_stepsize_cone_deg")?;
        if cone_deg > 90.0 {
            return Err(inv("min_stepsize_cone_deg", "must not exceed 90"));
        }
        let sweep_num_satellites: Vec<usize> = raw.list("sweep_num_satellites")?;
        if sweep_num_satellites.contains(&0) {
            return Err(inv("sweep_num_satellites", "entries must be at least 1"));
        }
        let sweep_altitudes_km: Vec<f64> = raw.list("sweep_altitudes_km")?;
        if sweep_altitudes_km.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(inv("sweep_altitudes_km", "entries must be positive"));
        }
        let sweep_theta_deg: Vec<f64> = raw.list("sweep_theta_deg")?;
        if sweep_theta_deg.iter().any(|t| !(*t > 0.0 && *t <= 180.0)) {
            return Err(inv("sweep_theta_deg", "entries must lie in (0, 180]"));
        }
        let output = match raw.raw("output").trim() {
            "" => None,
            p => Some(PathBuf::from(p)),
        };

        let cfg = ExperimentConfig {
            geometry,
            channel,
            theta_total_rad: theta_deg.to_radians(),
            epsilon,
            method: raw.get("method")?,
            alpha2_mode: raw.get("alpha2")?,
            num_hops,
            strategies: raw.list("strategies")?,
            sweep_num_satellites,
            sweep_altitudes_m: sweep_altitudes_km.iter().map(|a| a * 1e3).collect(),
            sweep_theta_rad: sweep_theta_deg.iter().map(|t| t.to_radians()).collect(),
            num_realizations,
            base_seed: raw.get("base_seed")?,
            min_stepsize_cone_rad: cone_deg.to_radians(),
            speed_of_light_mps: raw.positive("speed_of_light_mps")?,
            output,
        };
        cfg.channel.validate().map_err(|e| inv("channel", e.to_string()))?;
        Ok(cfg)
    }

    pub fn defaults() -> Self {
        Self::from_text("").expect("defaults are valid")
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_text(&text)
}

/// Cone half-angle used by the narrowest-step baseline when none is configured.
pub const DEFAULT_CONE_RAD: f64 = PI / 6.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_defaults() {
        let c = ExperimentConfig::from_text("").unwrap();
        assert_eq!(c.geometry.sphere_radius_m(), 7_371e3);
        assert_eq!(c.geometry.earth_radius_m(), 6_371e3);
        assert_eq!(c.epsilon, 0.1);
        assert_eq!(c.channel.coverage_threshold, 1.0);
        assert!((c.channel.tx_power_w - 31.6228).abs() < 1e-4);
        assert!((c.channel.noise_power_w - 1e-13).abs() < 1e-25);
        assert_eq!(c.channel.packet_bits, 1e7);
        assert_eq!(c.strategies.len(), 4);
        assert!((c.min_stepsize_cone_rad - DEFAULT_CONE_RAD).abs() < 1e-15);
        assert_eq!(c.num_hops, None);
    }

    #[test]
    fn comments_and_whitespace() {
        let c = ExperimentConfig::from_text("# shell\n  num_satellites = 648  # OneWeb\n\nsphere_radius_km=7571\n")
            .unwrap();
        assert_eq!(c.geometry.num_satellites(), 648);
        assert_eq!(c.geometry.sphere_radius_m(), 7_571e3);
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(
            ExperimentConfig::from_text("bandwidth_mhz = -5"),
            Err(ConfigError::Invariant { key, .. }) if key == "bandwidth_mhz"
        ));
        assert!(matches!(
            ExperimentConfig::from_text("\nbandwidth_hz = 2e7"),
            Err(ConfigError::Unit { line: 2, expected, .. }) if expected == "bandwidth_mhz"
        ));
        assert!(matches!(
            ExperimentConfig::from_text("tx_power = 3"),
            Err(ConfigError::Unit { expected, .. }) if expected == "tx_power_dbw"
        ));
        assert!(matches!(
            ExperimentConfig::from_text("colour = red"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            ExperimentConfig::from_text("a0 0.5"),
            Err(ConfigError::Parse { line: 1, column: 1, .. })
        ));
        assert!(matches!(
            ExperimentConfig::from_text("a0 = abc"),
            Err(ConfigError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            ExperimentConfig::from_text("a0 = 0.1\na0 = 0.2"),
            Err(ConfigError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            ExperimentConfig::from_text("strategies ="),
            Err(ConfigError::Invariant { .. })
        ));
        assert!(matches!(
            ExperimentConfig::from_text("strategies = proposed, fastest"),
            Err(ConfigError::Parse { .. })
        ));
    }
}
