//! Physical constants, user configuration and the quantities derived from it.
//!
//! Every configuration value is in SI units. A JSON document only needs to
//! name the fields it overrides; everything else falls back to the default
//! 0.1 kg cryogenic pendulum setup.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// CODATA constants plus the local gravitational acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Local gravity, m/s².
    pub g: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    c: 2.997_924_58e8,
    k_b: 1.380_649e-23,
    g: 9.81,
};

/// Which output quadrature the injected squeezed vacuum reduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SqueezePhaseMode {
    /// Shot noise scaled by e^{-2r}, back-action by e^{+2r}.
    #[default]
    ShotNoiseReduced,
    /// Shot noise scaled by e^{+2r}, back-action by e^{-2r}.
    BackActionReduced,
    /// Squeezing ignored regardless of `squeeze_parameter_r`.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterferometerConfig {
    /// Mass of a single mirror, kg.
    pub mirror_mass_m0: f64,
    /// Suspension fibre length, m.
    #[serde(rename = "pendulum_length_L")]
    pub pendulum_length_l: f64,
    #[serde(rename = "quality_Q")]
    pub quality_q: f64,
    /// Suspension temperature, K.
    #[serde(rename = "temperature_T")]
    pub temperature_t: f64,
    /// Total circulating light power, W.
    #[serde(rename = "circulating_power_P")]
    pub circulating_power_p: f64,
    /// Signal-recycling power gain.
    #[serde(rename = "signal_recycling_gain_G")]
    pub signal_recycling_gain_g: f64,
    pub squeeze_parameter_r: f64,
    pub squeeze_phase_mode: SqueezePhaseMode,
    /// Laser wavelength, m.
    pub wavelength_lambda: f64,
    /// Flat classical sensing noise, m/√Hz.
    pub sensing_noise_asd: f64,
    /// Flat classical force noise on the reduced mass, N/√Hz.
    pub classical_force_noise_asd: f64,
    /// Measurement strength of the common (bright-port) channel relative to
    /// the differential one. Scales the power-gain product P·G.
    pub common_measurement_ratio: f64,
    /// Signal-recycling gain used by the differential (momentum) readout.
    /// Falls back to `signal_recycling_gain_g` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub differential_recycling_gain: Option<f64>,
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        Self {
            mirror_mass_m0: 0.1,
            pendulum_length_l: 0.3,
            quality_q: 2e7,
            temperature_t: 4.0,
            circulating_power_p: 4000.0,
            signal_recycling_gain_g: 2000.0,
            squeeze_parameter_r: 0.0,
            squeeze_phase_mode: SqueezePhaseMode::ShotNoiseReduced,
            wavelength_lambda: 1.55e-6,
            sensing_noise_asd: 5e-21,
            classical_force_noise_asd: 0.0,
            common_measurement_ratio: 1.0,
            differential_recycling_gain: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl InterferometerConfig {
    /// Parses a JSON document, applies defaults and validates the result.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks: [(&str, f64, bool, &str); 12] = [
            ("mirror_mass_m0", self.mirror_mass_m0, self.mirror_mass_m0 > 0.0, "must be positive"),
            ("pendulum_length_L", self.pendulum_length_l, self.pendulum_length_l > 0.0, "must be positive"),
            ("quality_Q", self.quality_q, self.quality_q > 1.0, "must exceed 1"),
            ("temperature_T", self.temperature_t, self.temperature_t >= 0.0, "must be non-negative"),
            ("circulating_power_P", self.circulating_power_p, self.circulating_power_p >= 0.0, "must be non-negative"),
            ("signal_recycling_gain_G", self.signal_recycling_gain_g, self.signal_recycling_gain_g >= 1.0, "must be at least 1"),
            ("squeeze_parameter_r", self.squeeze_parameter_r, self.squeeze_parameter_r >= 0.0, "must be non-negative"),
            ("wavelength_lambda", self.wavelength_lambda, self.wavelength_lambda > 0.0, "must be positive"),
            ("sensing_noise_asd", self.sensing_noise_asd, self.sensing_noise_asd >= 0.0, "must be non-negative"),
            ("classical_force_noise_asd", self.classical_force_noise_asd, self.classical_force_noise_asd >= 0.0, "must be non-negative"),
            ("common_measurement_ratio", self.common_measurement_ratio, self.common_measurement_ratio > 0.0, "must be positive"),
            (
                "differential_recycling_gain",
                self.differential_recycling_gain.unwrap_or(1.0),
                self.differential_recycling_gain.is_none_or(|g| g >= 1.0),
                "must be at least 1",
            ),
        ];
        for (name, value, ok, rule) in checks {
            if !value.is_finite() {
                return Err(ConfigError::Invalid(format!("{name} must be finite")));
            }
            if !ok {
                return Err(ConfigError::Invalid(format!("{name} {rule}")));
            }
        }
        Ok(())
    }

    pub fn derive(&self) -> DerivedParams {
        DerivedParams::from_config(self)
    }
}

/// Quantities that follow directly from a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// m0/2, the mass of the differential mode, kg.
    pub reduced_mass_m: f64,
    /// sqrt(g/L), rad/s.
    pub pendulum_omega0: f64,
    /// Laser angular frequency 2πc/λ, rad/s.
    pub optical_omega: f64,
    pub shot_noise_factor: f64,
    pub backaction_factor: f64,
}

impl DerivedParams {
    pub fn from_config(cfg: &InterferometerConfig) -> Self {
        let squeeze = (2.0 * cfg.squeeze_parameter_r).exp();
        let (shot_noise_factor, backaction_factor) = match cfg.squeeze_phase_mode {
            SqueezePhaseMode::ShotNoiseReduced => (1.0 / squeeze, squeeze),
            SqueezePhaseMode::BackActionReduced => (squeeze, 1.0 / squeeze),
            SqueezePhaseMode::None => (1.0, 1.0),
        };
        Self {
            reduced_mass_m: cfg.mirror_mass_m0 / 2.0,
            pendulum_omega0: (CONSTANTS.g / cfg.pendulum_length_l).sqrt(),
            optical_omega: 2.0 * PI * CONSTANTS.c / cfg.wavelength_lambda,
            shot_noise_factor,
            backaction_factor,
        }
    }

    pub fn pendulum_frequency_hz(&self) -> f64 {
        self.pendulum_omega0 / (2.0 * PI)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg = InterferometerConfig::from_json(r#"{"mirror_mass_m0":0.1}"#).unwrap();
        assert_eq!(cfg, InterferometerConfig::default());
        assert_eq!(cfg.pendulum_length_l, 0.3);
        assert_eq!(cfg.quality_q, 2e7);
        assert_eq!(cfg.temperature_t, 4.0);
        assert_eq!(cfg.circulating_power_p, 4000.0);
        assert_eq!(cfg.signal_recycling_gain_g, 2000.0);
        assert_eq!(cfg.squeeze_parameter_r, 0.0);
        assert_eq!(cfg.wavelength_lambda, 1.55e-6);
        assert_eq!(cfg.sensing_noise_asd, 5e-21);
    }

    #[test]
    fn low_quality_factor_is_rejected() {
        let err = InterferometerConfig::from_json(r#"{"quality_Q":0.5}"#).unwrap_err();
        assert_eq!(err.to_string(), "quality_Q must exceed 1");
    }

    #[test]
    fn parse_errors_name_the_field() {
        let err = InterferometerConfig::from_json(r#"{"temperature_T":"cold"}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { ref path, .. } if path == "temperature_T"), "{err}");
        let err = InterferometerConfig::from_json(r#"{"mass":1.0}"#).unwrap_err();
        assert!(err.to_string().contains("mass"), "{err}");
    }

    #[test]
    fn ten_db_squeezing() {
        let cfg = InterferometerConfig {
            squeeze_parameter_r: 10f64.ln() / 2.0,
            ..Default::default()
        };
        let d = cfg.derive();
        assert!((d.shot_noise_factor - 0.1).abs() < 1e-15);
        assert!((d.backaction_factor - 10.0).abs() < 1e-13);

        let off = InterferometerConfig { squeeze_phase_mode: SqueezePhaseMode::None, ..cfg.clone() }.derive();
        assert_eq!((off.shot_noise_factor, off.backaction_factor), (1.0, 1.0));
        let ba = InterferometerConfig { squeeze_phase_mode: SqueezePhaseMode::BackActionReduced, ..cfg }.derive();
        assert!((ba.backaction_factor - 0.1).abs() < 1e-15);
    }

    #[test]
    fn derived_quantities() {
        let d = InterferometerConfig::default().derive();
        assert_eq!(d.reduced_mass_m, 0.05);
        assert!((d.pendulum_omega0 - 5.718_391_382_198_32).abs() < 1e-12);
        assert!((d.pendulum_frequency_hz() - 0.910_110_255).abs() < 1e-8);
        assert!((d.optical_omega / 1.215_259_075_683_131e15 - 1.0).abs() < 1e-14);

        let heavy = InterferometerConfig { mirror_mass_m0: 0.2, ..Default::default() }.derive();
        assert_eq!(heavy.reduced_mass_m, 2.0 * d.reduced_mass_m);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let cfg = InterferometerConfig { wavelength_lambda: f64::NAN, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn json_round_trip(
            m0 in 1e-3f64..10.0,
            t in 0.0f64..300.0,
            r in 0.0f64..3.0,
            asd in 0.0f64..1e-18,
            g_diff in proptest::option::of(1.0f64..5000.0),
        ) {
            let cfg = InterferometerConfig {
                mirror_mass_m0: m0,
                temperature_t: t,
                squeeze_parameter_r: r,
                sensing_noise_asd: asd,
                differential_recycling_gain: g_diff,
                ..Default::default()
            };
            let back = InterferometerConfig::from_json(&cfg.to_json()).unwrap();
            proptest::prop_assert_eq!(back, cfg);
        }
    }
}
