//! One-sided displacement noise spectral densities (m²/Hz) of the
//! dual-Michelson setup, plus the standard quantum limits they are compared
//! against.
//!
//! Shot noise and back-action use the low-sideband-frequency approximation
//! at every frequency; there is no signal-recycling cavity pole.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{InterferometerConfig, CONSTANTS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid grid: {0}")]
    Grid(String),
}

/// Complex mechanical response denominator D(Ω) = −Ω² + Ω0² + iΩΩ0/Q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalSusceptibilityDenominator {
    pub omega: f64,
    pub omega0: f64,
    pub q: f64,
}

impl MechanicalSusceptibilityDenominator {
    pub fn new(omega: f64, omega0: f64, q: f64) -> Self {
        Self { omega, omega0, q }
    }

    pub fn re(&self) -> f64 {
        self.omega0 * self.omega0 - self.omega * self.omega
    }

    pub fn im(&self) -> f64 {
        if self.q.is_infinite() {
            0.0
        } else {
            self.omega * self.omega0 / self.q
        }
    }

    /// |D(Ω)|, s⁻².
    pub fn norm(&self) -> f64 {
        self.re().hypot(self.im())
    }

    pub fn norm_sqr(&self) -> f64 {
        let (re, im) = (self.re(), self.im());
        re * re + im * im
    }
}

fn angular(f: f64) -> Result<f64, SpectraError> {
    if f > 0.0 && f.is_finite() {
        Ok(2.0 * PI * f)
    } else {
        Err(SpectraError::Domain(format!("frequency must be positive and finite, got {f}")))
    }
}

/// Free-mass standard quantum limit 2ħ/(mΩ²).
pub fn sql_free_mass(m: f64, f: f64) -> Result<f64, SpectraError> {
    let omega = angular(f)?;
    Ok(2.0 * CONSTANTS.hbar / (m * (omega * omega)))
}

/// Harmonic-oscillator standard quantum limit 2ħ/(m|D(Ω)|).
pub fn sql_harmonic(m: f64, f: f64, omega0: f64, q: f64) -> Result<f64, SpectraError> {
    let omega = angular(f)?;
    let d = MechanicalSusceptibilityDenominator::new(omega, omega0, q);
    Ok(2.0 * CONSTANTS.hbar / (m * d.norm()))
}

/// Quantum measurement noise e^{-2r}ħc²/(2ωPG); independent of frequency.
pub fn shot_noise(cfg: &InterferometerConfig) -> Result<f64, SpectraError> {
    shot_noise_with_gain(cfg, cfg.circulating_power_p * cfg.signal_recycling_gain_g)
}

pub(crate) fn shot_noise_with_gain(
    cfg: &InterferometerConfig,
    power_gain: f64,
) -> Result<f64, SpectraError> {
    if power_gain <= 0.0 {
        return Err(SpectraError::Domain(
            "shot noise diverges for zero circulating power".into(),
        ));
    }
    let d = cfg.derive();
    let c2 = CONSTANTS.c * CONSTANTS.c;
    Ok(d.shot_noise_factor * CONSTANTS.hbar * c2 / (2.0 * d.optical_omega * power_gain))
}

/// Back-action force PSD 2ħωPG e^{2r}/c² in N²/Hz.
pub(crate) fn backaction_force_psd(cfg: &InterferometerConfig, power_gain: f64) -> f64 {
    let d = cfg.derive();
    d.backaction_factor * 2.0 * CONSTANTS.hbar * d.optical_omega * power_gain
        / (CONSTANTS.c * CONSTANTS.c)
}

/// Pendulum thermal force PSD 4mΩ0k_BT/Q in N²/Hz.
pub(crate) fn thermal_force_psd(cfg: &InterferometerConfig) -> f64 {
    let d = cfg.derive();
    4.0 * d.reduced_mass_m * d.pendulum_omega0 * CONSTANTS.k_b * cfg.temperature_t / cfg.quality_q
}

/// Maps a force PSD (N²/Hz) onto displacement through 1/(m²|D|²).
fn force_to_displacement(cfg: &InterferometerConfig, force_psd: f64, f: f64) -> Result<f64, SpectraError> {
    let omega = angular(f)?;
    let d = cfg.derive();
    let den = MechanicalSusceptibilityDenominator::new(omega, d.pendulum_omega0, cfg.quality_q);
    let m = d.reduced_mass_m;
    Ok(force_psd / (m * m * den.norm_sqr()))
}

/// Quantum radiation-pressure (back-action) displacement noise.
pub fn radiation_pressure_noise(cfg: &InterferometerConfig, f: f64) -> Result<f64, SpectraError> {
    let force = backaction_force_psd(cfg, cfg.circulating_power_p * cfg.signal_recycling_gain_g);
    force_to_displacement(cfg, force, f)
}

/// Suspension thermal noise for viscous damping.
pub fn pendulum_thermal(cfg: &InterferometerConfig, f: f64) -> Result<f64, SpectraError> {
    force_to_displacement(cfg, thermal_force_psd(cfg), f)
}

/// Flat classical force noise mapped onto displacement.
pub fn classical_force(cfg: &InterferometerConfig, f: f64) -> Result<f64, SpectraError> {
    let asd = cfg.classical_force_noise_asd;
    force_to_displacement(cfg, asd * asd, f)
}

pub fn sensing_noise(cfg: &InterferometerConfig) -> f64 {
    cfg.sensing_noise_asd * cfg.sensing_noise_asd
}

/// Bose–Einstein occupation of a mode at angular frequency `omega`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = CONSTANTS.hbar * omega / (CONSTANTS.k_b * temperature);
    1.0 / x.exp_m1()
}

/// Ground-state position spread sqrt(ħ/(2mΩ)), m.
pub fn zero_point_fluctuation(m: f64, omega: f64) -> f64 {
    (CONSTANTS.hbar / (2.0 * m * omega)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CurveLabel {
    #[serde(rename = "fmSQL")]
    FreeMassSql,
    #[serde(rename = "hoSQL")]
    HarmonicSql,
    #[serde(rename = "shot")]
    Shot,
    #[serde(rename = "backaction")]
    Backaction,
    #[serde(rename = "pendulum_thermal")]
    PendulumThermal,
    #[serde(rename = "sensing")]
    Sensing,
    #[serde(rename = "classical_force")]
    ClassicalForce,
    #[serde(rename = "total_quantum")]
    TotalQuantum,
    #[serde(rename = "total_classical")]
    TotalClassical,
    /// Force-type classical noise only (thermal plus classical force). Used
    /// for the decoherence crossing; not part of the emitted budget.
    #[serde(rename = "total_force")]
    TotalForce,
}

impl CurveLabel {
    /// Curves emitted by [`budget`], in column order.
    pub const BUDGET: [CurveLabel; 9] = [
        CurveLabel::FreeMassSql,
        CurveLabel::HarmonicSql,
        CurveLabel::Shot,
        CurveLabel::Backaction,
        CurveLabel::PendulumThermal,
        CurveLabel::Sensing,
        CurveLabel::ClassicalForce,
        CurveLabel::TotalQuantum,
        CurveLabel::TotalClassical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CurveLabel::FreeMassSql => "fmSQL",
            CurveLabel::HarmonicSql => "hoSQL",
            CurveLabel::Shot => "shot",
            CurveLabel::Backaction => "backaction",
            CurveLabel::PendulumThermal => "pendulum_thermal",
            CurveLabel::Sensing => "sensing",
            CurveLabel::ClassicalForce => "classical_force",
            CurveLabel::TotalQuantum => "total_quantum",
            CurveLabel::TotalClassical => "total_classical",
            CurveLabel::TotalForce => "total_force",
        }
    }

    /// Evaluates the continuous model behind this label at `f` Hz.
    pub fn evaluate(self, cfg: &InterferometerConfig, f: f64) -> Result<f64, SpectraError> {
        let d = cfg.derive();
        let m = d.reduced_mass_m;
        match self {
            CurveLabel::FreeMassSql => sql_free_mass(m, f),
            CurveLabel::HarmonicSql => sql_harmonic(m, f, d.pendulum_omega0, cfg.quality_q),
            CurveLabel::Shot => angular(f).and_then(|_| shot_noise(cfg)),
            CurveLabel::Backaction => radiation_pressure_noise(cfg, f),
            CurveLabel::PendulumThermal => pendulum_thermal(cfg, f),
            CurveLabel::Sensing => angular(f).map(|_| sensing_noise(cfg)),
            CurveLabel::ClassicalForce => classical_force(cfg, f),
            CurveLabel::TotalQuantum => Ok(shot_noise(cfg)? + radiation_pressure_noise(cfg, f)?),
            CurveLabel::TotalClassical => {
                Ok(pendulum_thermal(cfg, f)? + sensing_noise(cfg) + classical_force(cfg, f)?)
            }
            CurveLabel::TotalForce => Ok(pendulum_thermal(cfg, f)? + classical_force(cfg, f)?),
        }
    }
}

impl fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Strictly increasing list of positive sideband frequencies, Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid(Vec<f64>);

impl FrequencyGrid {
    /// Logarithmic grid from `f_min` to `f_max` inclusive with at least
    /// `points_per_decade` points per decade.
    pub fn logarithmic(f_min: f64, f_max: f64, points_per_decade: usize) -> Result<Self, SpectraError> {
        if !(f_min > 0.0 && f_min < f_max && f_max.is_finite()) {
            return Err(SpectraError::Grid(format!(
                "need 0 < f_min < f_max, got f_min={f_min}, f_max={f_max}"
            )));
        }
        if points_per_decade == 0 {
            return Err(SpectraError::Grid("points_per_decade must be at least 1".into()));
        }
        let (lo, hi) = (f_min.log10(), f_max.log10());
        let intervals = ((hi - lo) * points_per_decade as f64).ceil().max(1.0) as usize;
        let step = (hi - lo) / intervals as f64;
        let mut points: Vec<f64> = (0..=intervals).map(|i| 10f64.powf(lo + step * i as f64)).collect();
        points[0] = f_min;
        points[intervals] = f_max;
        Ok(Self(points))
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self, SpectraError> {
        if points.is_empty() {
            return Err(SpectraError::Grid("grid is empty".into()));
        }
        if points.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(SpectraError::Grid("frequencies must be positive and finite".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SpectraError::Grid("frequencies must be strictly increasing".into()));
        }
        Ok(Self(points))
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A labelled one-sided displacement PSD sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCurve {
    pub label: CurveLabel,
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectralCurve {
    pub fn sample(label: CurveLabel, cfg: &InterferometerConfig, grid: &FrequencyGrid) -> Result<Self, SpectraError> {
        let values = grid
            .points()
            .par_iter()
            .map(|&f| label.evaluate(cfg, f))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(SpectraError::Domain(format!("{label} produced non-finite value {bad}")));
        }
        Ok(Self {
            label,
            frequencies: grid.points().to_vec(),
            values,
        })
    }

    pub fn asd(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.sqrt()).collect()
    }
}

/// Samples the full noise budget on `grid`, one curve per [`CurveLabel::BUDGET`] entry.
pub fn budget(cfg: &InterferometerConfig, grid: &FrequencyGrid) -> Result<Vec<SpectralCurve>, SpectraError> {
    CurveLabel::BUDGET
        .iter()
        .map(|&label| SpectralCurve::sample(label, cfg, grid))
        .collect()
}

pub fn budget_log(
    cfg: &InterferometerConfig,
    f_min: f64,
    f_max: f64,
    points_per_decade: usize,
) -> Result<Vec<SpectralCurve>, SpectraError> {
    budget(cfg, &FrequencyGrid::logarithmic(f_min, f_max, points_per_decade)?)
}
