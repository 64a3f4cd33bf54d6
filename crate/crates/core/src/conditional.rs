//! Steady-state conditional covariance of the common and differential mirror
//! modes under continuous position measurement.
//!
//! Each mode is a damped oscillator driven by white force noise and read out
//! through white position noise:
//!
//! ```text
//! ẋ = p/m
//! ṗ = −mΩ0²x − (Ω0/Q)p + F
//! y = x + n
//! ```
//!
//! One-sided PSDs `S_F`, `S_x` become two-sided white-noise intensities
//! `S_F/2`, `S_x/2`. The conditional covariance solves the filtering Riccati
//! equation `AΣ + ΣAᵀ + Q − ΣCᵀR⁻¹CΣ = 0`.
//!
//! Everything is solved in dimensionless quadratures `X = x·√(mΩr/ħ)`,
//! `P = p/√(ħmΩr)` and time `τ = Ωr·t`, where `Ωr = 2π·f_sql_touch` of the
//! configuration. In these units the vacuum variance is 1/2 and
//! `q̃·r̃ = S_F·S_x/(4ħ²) ≥ 1/4`.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::band::{self, BandError};
use crate::gaussian::{epr_report, EprReport, GaussianError, GaussianState, VACUUM_VARIANCE};
use crate::params::{InterferometerConfig, CONSTANTS};
use crate::spectra::{self, SpectraError};

/// Target for the maximum absolute Riccati residual, normalized units.
pub const RESIDUAL_TOL: f64 = 1e-12;

const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionalError {
    #[error("Riccati solver did not converge after {iterations} iterations (residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },
    #[error("noise model violates the measurement uncertainty bound: q·r = {product} < 1/4")]
    Unphysical { product: f64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("no SQL touch frequency for this configuration")]
    NoReferenceFrequency,
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Band(#[from] BandError),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MirrorMode {
    Common,
    Differential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MirrorModeModel {
    pub mode: MirrorMode,
    /// Reduced mass, kg.
    pub mass: f64,
    pub omega0: f64,
    pub q: f64,
    /// One-sided force PSD, N²/Hz (thermal + back-action + classical).
    pub force_noise_psd: f64,
    /// One-sided measurement PSD, m²/Hz.
    pub measurement_noise_psd: f64,
    /// Recorded only; the readout angle does not enter the noise model.
    pub readout_quadrature_angle: f64,
    /// Angular frequency setting the quadrature units, rad/s.
    pub reference_omega: f64,
}

/// Dimensionless coefficients of the filtering problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedModel {
    /// Ω0/Ωr.
    pub stiffness: f64,
    /// Ω0/(Q·Ωr).
    pub damping: f64,
    /// Force-noise intensity q̃.
    pub process_noise: f64,
    /// Measurement-noise intensity r̃.
    pub measurement_noise: f64,
}

impl NormalizedModel {
    pub fn drift(&self) -> Matrix2<f64> {
        Matrix2::new(0.0, 1.0, -self.stiffness * self.stiffness, -self.damping)
    }

    /// AΣ + ΣAᵀ + Q − ΣCᵀCΣ/r̃.
    pub fn riccati_rhs(&self, cov: &Matrix2<f64>) -> Matrix2<f64> {
        let a = self.drift();
        let q = Matrix2::new(0.0, 0.0, 0.0, self.process_noise);
        let gain = cov.column(0) * cov.row(0) / self.measurement_noise;
        a * cov + cov * a.transpose() + q - gain
    }
}

impl MirrorModeModel {
    pub fn validate(&self) -> Result<(), ConditionalError> {
        let fields = [
            ("mass", self.mass, self.mass > 0.0),
            ("omega0", self.omega0, self.omega0 >= 0.0),
            ("q", self.q, self.q > 0.0),
            ("force_noise_psd", self.force_noise_psd, self.force_noise_psd >= 0.0),
            ("measurement_noise_psd", self.measurement_noise_psd, self.measurement_noise_psd > 0.0),
            ("reference_omega", self.reference_omega, self.reference_omega > 0.0),
        ];
        for (name, value, ok) in fields {
            if !ok || value.is_nan() || (value.is_infinite() && name != "q") {
                return Err(ConditionalError::InvalidModel(format!("{name} = {value}")));
            }
        }
        Ok(())
    }

    pub fn normalized(&self) -> NormalizedModel {
        let hbar = CONSTANTS.hbar;
        let wr = self.reference_omega;
        let damping = if self.q.is_infinite() { 0.0 } else { self.omega0 / (self.q * wr) };
        NormalizedModel {
            stiffness: self.omega0 / wr,
            damping,
            process_noise: self.force_noise_psd / (2.0 * hbar * self.mass * wr * wr),
            measurement_noise: self.measurement_noise_psd * self.mass * wr * wr / (2.0 * hbar),
        }
    }
}

/// Assembles the noise model of one mirror mode from the configuration.
///
/// The common channel's P·G is scaled by `common_measurement_ratio`; the
/// differential channel uses `differential_recycling_gain` when set.
pub fn build_model(
    cfg: &InterferometerConfig,
    mode: MirrorMode,
    readout_angle: f64,
) -> Result<MirrorModeModel, ConditionalError> {
    let d = cfg.derive();
    let power_gain = match mode {
        MirrorMode::Common => cfg.circulating_power_p * cfg.signal_recycling_gain_g * cfg.common_measurement_ratio,
        MirrorMode::Differential => {
            cfg.circulating_power_p * cfg.differential_recycling_gain.unwrap_or(cfg.signal_recycling_gain_g)
        }
    };
    let classical = cfg.classical_force_noise_asd * cfg.classical_force_noise_asd;
    let force_noise_psd =
        spectra::thermal_force_psd(cfg) + spectra::backaction_force_psd(cfg, power_gain) + classical;
    let measurement_noise_psd = spectra::shot_noise_with_gain(cfg, power_gain)?;
    let touch = band::analyze(cfg)?.f_sql_touch.ok_or(ConditionalError::NoReferenceFrequency)?;
    Ok(MirrorModeModel {
        mode,
        mass: d.reduced_mass_m,
        omega0: d.pendulum_omega0,
        q: cfg.quality_q,
        force_noise_psd,
        measurement_noise_psd,
        readout_quadrature_angle: readout_angle,
        reference_omega: 2.0 * std::f64::consts::PI * touch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalStateReport {
    /// Conditional covariance in vacuum-normalized quadratures (vacuum = I/2).
    #[serde(serialize_with = "serialize_matrix2")]
    pub cov: Matrix2<f64>,
    /// 1/(2·√det Σ).
    pub purity: f64,
    /// Orientation of the minor (squeezed) axis measured from the x axis, rad.
    pub squeeze_angle: f64,
    /// Minor-axis variance over the vacuum variance.
    pub squeeze_factor: f64,
    /// Largest absolute entry of the Riccati residual at `cov`.
    pub residual: f64,
}

fn serialize_matrix2<S: serde::Serializer>(m: &Matrix2<f64>, s: S) -> Result<S::Ok, S::Error> {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]].serialize(s)
}

impl ConditionalStateReport {
    pub fn from_cov(cov: Matrix2<f64>, residual: f64) -> Self {
        let eig = SymmetricEigen::new(cov);
        let minor = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
        let axis = eig.eigenvectors.column(minor);
        let mut angle = axis[1].atan2(axis[0]);
        // Fold into (−π/2, π/2]; an axis has no direction.
        if angle <= -std::f64::consts::FRAC_PI_2 {
            angle += std::f64::consts::PI;
        } else if angle > std::f64::consts::FRAC_PI_2 {
            angle -= std::f64::consts::PI;
        }
        Self {
            cov,
            purity: 1.0 / (2.0 * cov.determinant().sqrt()),
            squeeze_angle: angle,
            squeeze_factor: eig.eigenvalues[minor] / VACUUM_VARIANCE,
            residual,
        }
    }
}

fn residual_norm(model: &NormalizedModel, cov: &Matrix2<f64>) -> f64 {
    model.riccati_rhs(cov).amax()
}

/// Solves `A_k Σ + Σ A_kᵀ = −W` for symmetric Σ.
fn solve_lyapunov(a: &Matrix2<f64>, w: &Matrix2<f64>) -> Option<Matrix2<f64>> {
    // Unknowns (Σ00, Σ01, Σ11).
    let m = Matrix3::new(
        2.0 * a[(0, 0)],
        2.0 * a[(0, 1)],
        0.0,
        a[(1, 0)],
        a[(0, 0)] + a[(1, 1)],
        a[(0, 1)],
        0.0,
        2.0 * a[(1, 0)],
        2.0 * a[(1, 1)],
    );
    let rhs = Vector3::new(-w[(0, 0)], -w[(0, 1)], -w[(1, 1)]);
    let s = m.lu().solve(&rhs)?;
    Some(Matrix2::new(s[0], s[1], s[1], s[2]))
}

/// Stabilizing solution of the filtering Riccati equation by Kleinman–Newton
/// iteration, started from the free-mass closed form.
pub fn solve_riccati(model: &NormalizedModel) -> Result<(Matrix2<f64>, usize), ConditionalError> {
    let r = model.measurement_noise;
    let q = model.process_noise;
    // Free-mass fixed point: b = √(q r), a = √(2 b r), c = a b / r.
    let b = (q * r).sqrt();
    let a = (2.0 * b * r).sqrt();
    let mut cov = Matrix2::new(a, b, b, a * b / r + model.stiffness.powi(2) * a);
    let drift = model.drift();
    let noise = Matrix2::new(0.0, 0.0, 0.0, q);

    let mut residual = residual_norm(model, &cov);
    for iteration in 0..MAX_ITERATIONS {
        if residual <= RESIDUAL_TOL * cov.amax().max(1.0) {
            return Ok((cov, iteration));
        }
        let gain = cov.column(0) * cov.row(0) / r;
        let closed = drift - Matrix2::new(cov[(0, 0)] / r, 0.0, cov[(0, 1)] / r, 0.0);
        let next = solve_lyapunov(&closed, &(noise + gain)).ok_or(ConditionalError::Solver {
            iterations: iteration,
            residual,
        })?;
        cov = (next + next.transpose()) * 0.5;
        residual = residual_norm(model, &cov);
    }
    if residual <= RESIDUAL_TOL * cov.amax().max(1.0) {
        return Ok((cov, MAX_ITERATIONS));
    }
    Err(ConditionalError::Solver {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// Steady-state conditional state of one mirror mode.
pub fn steady_conditional_cov(model: &MirrorModeModel) -> Result<ConditionalStateReport, ConditionalError> {
    model.validate()?;
    let norm = model.normalized();
    let product = norm.process_noise * norm.measurement_noise;
    if product < 0.25 * (1.0 - 1e-9) {
        return Err(ConditionalError::Unphysical { product });
    }
    let (cov, _) = solve_riccati(&norm)?;
    if !(cov[(0, 0)] > 0.0 && cov.determinant() > 0.0) {
        return Err(ConditionalError::Solver {
            iterations: MAX_ITERATIONS,
            residual: residual_norm(&norm, &cov),
        });
    }
    Ok(ConditionalStateReport::from_cov(cov, residual_norm(&norm, &cov)))
}

/// Joint state of mirrors A and B with `x_A = (x_c + x_d)/√2`,
/// `x_B = (x_c − x_d)/√2` (likewise for p), and its EPR report.
pub fn two_mirror_state(
    common: &ConditionalStateReport,
    differential: &ConditionalStateReport,
) -> Result<(GaussianState, EprReport), ConditionalError> {
    let (c, d) = (common.cov, differential.cov);
    let local = (c + d) * 0.5;
    let cross = (c - d) * 0.5;
    let cov = nalgebra::DMatrix::from_fn(4, 4, |i, j| {
        let block = if (i < 2) == (j < 2) { &local } else { &cross };
        block[(i % 2, j % 2)]
    });
    let state = GaussianState::new(nalgebra::DVector::zeros(4), cov)?;
    let report = epr_report(&state, 0, 1)?;
    Ok((state, report))
}
