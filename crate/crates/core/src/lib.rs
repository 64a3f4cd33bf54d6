//! Noise budget, entanglement-band analysis and Gaussian-state tools for a
//! pair of suspended mirrors that are conditionally entangled by continuous
//! interferometric measurement.
//!
//! * [`params`]: configuration, constants and derived quantities.
//! * [`spectra`]: displacement noise spectral densities and the SQL.
//! * [`band`]: SQL crossings, timescales and the feasibility verdict.
//! * [`gaussian`]: multimode Gaussian states, homodyne conditioning, EPR tests.
//! * [`conditional`]: steady-state conditional mirror states.
//! * [`cli`] and [`output`]: command-line front end and file formats.

pub mod band;
pub mod cli;
pub mod conditional;
pub mod gaussian;
pub mod output;
pub mod params;
pub mod spectra;

pub use band::{analyze, BandReport};
pub use gaussian::{EprReport, GaussianState};
pub use params::{InterferometerConfig, CONSTANTS};
