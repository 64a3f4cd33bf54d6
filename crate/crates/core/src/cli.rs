//! Command-line front end: config → spectra → band → gaussian → conditional.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::band;
use crate::conditional::{self, MirrorMode};
use crate::gaussian;
use crate::output;
use crate::params::{ConfigError, InterferometerConfig};
use crate::spectra::{self, FrequencyGrid};

pub const CONFIG_ENV: &str = "EPR_OPTOMECH_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "epr-optomech", version, about = "Noise budget and mirror-entanglement analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Options {
    /// JSON configuration; defaults apply to missing keys.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Output file, `-` for stdout.
    #[arg(long, global = true, default_value = "-")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0.1)]
    pub fmin: f64,
    #[arg(long, global = true, default_value_t = 1e5)]
    pub fmax: f64,
    #[arg(long, global = true, default_value_t = 50)]
    pub ppd: usize,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Noise budget curves on a logarithmic grid.
    Budget,
    /// SQL crossings, timescales and feasibility verdict.
    Band,
    /// Conditional common/differential states and the two-mirror EPR report.
    Entangle {
        /// Readout quadrature angle recorded for the common channel, rad.
        #[arg(long, default_value_t = 0.0)]
        common_angle: f64,
        /// Readout quadrature angle recorded for the differential channel, rad.
        #[arg(long, default_value_t = 0.0)]
        differential_angle: f64,
    },
    /// EPR pair from two squeezed inputs on a balanced beam splitter.
    Fig1 {
        /// Squeeze parameter of both inputs; defaults to the config's r.
        #[arg(long)]
        squeeze: Option<f64>,
    },
    /// Entanglement swapping between two EPR pairs.
    Swap {
        /// Squeeze parameter of the first pair; defaults to the config's r.
        #[arg(long)]
        squeeze: Option<f64>,
        /// Squeeze parameter of the second pair; defaults to the first.
        #[arg(long)]
        squeeze2: Option<f64>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Output { .. } => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Usage(_) => "config",
            CliError::Output { .. } => "io",
            CliError::Numeric(_) => "numeric",
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_line(&self) -> String {
        json!({"error": self.kind(), "message": self.to_string()}).to_string()
    }
}

fn numeric<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numeric(e.to_string())
}

pub fn load_config(path: Option<&Path>) -> Result<InterferometerConfig, ConfigError> {
    match path {
        None => Ok(InterferometerConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.display().to_string(),
                source,
            })?;
            InterferometerConfig::from_json(&text)
        }
    }
}

fn squeeze_or(cfg: &InterferometerConfig, r: Option<f64>) -> Result<f64, CliError> {
    let r = r.unwrap_or(cfg.squeeze_parameter_r);
    if r >= 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(CliError::Usage(format!("squeeze parameter must be non-negative, got {r}")))
    }
}

/// Produces the text the command would write.
pub fn render(command: &Command, options: &Options) -> Result<String, CliError> {
    let cfg = load_config(options.config.as_deref())?;
    let format = options.format;
    let json_only = |name: &str| -> Result<(), CliError> {
        match format {
            Some(Format::Csv) => Err(CliError::Usage(format!("`{name}` only supports --format json"))),
            _ => Ok(()),
        }
    };

    match command {
        Command::Budget => {
            let grid = FrequencyGrid::logarithmic(options.fmin, options.fmax, options.ppd)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let curves = spectra::budget(&cfg, &grid).map_err(numeric)?;
            Ok(match format.unwrap_or(Format::Csv) {
                Format::Csv => output::budget_csv(&curves),
                Format::Json => output::budget_json(&curves),
            })
        }
        Command::Band => {
            json_only("band")?;
            let report = band::analyze(&cfg).map_err(numeric)?;
            let mut value = serde_json::to_value(&report).map_err(numeric)?;
            value["tau_F_ms"] = json!(report.tau_f_ms());
            value["tau_q_ms"] = json!(report.tau_q_ms());
            Ok(output::render_json(&value))
        }
        Command::Entangle {
            common_angle,
            differential_angle,
        } => {
            json_only("entangle")?;
            let common = conditional::build_model(&cfg, MirrorMode::Common, *common_angle).map_err(numeric)?;
            let diff = conditional::build_model(&cfg, MirrorMode::Differential, *differential_angle).map_err(numeric)?;
            let common_report = conditional::steady_conditional_cov(&common).map_err(numeric)?;
            let diff_report = conditional::steady_conditional_cov(&diff).map_err(numeric)?;
            let (state, epr) = conditional::two_mirror_state(&common_report, &diff_report).map_err(numeric)?;
            Ok(output::render_json(&json!({
                "common": {"model": common, "state": common_report},
                "differential": {"model": diff, "state": diff_report},
                "joint_state": state,
                "epr": epr,
            })))
        }
        Command::Fig1 { squeeze } => {
            json_only("fig1")?;
            let r = squeeze_or(&cfg, *squeeze)?;
            let state = gaussian::epr_pair(r, r).map_err(numeric)?;
            let epr = gaussian::epr_report(&state, 0, 1).map_err(numeric)?;
            let sum_x = nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
            let diff_p = nalgebra::DVector::from_vec(vec![0.0, 1.0, 0.0, -1.0]);
            Ok(output::render_json(&json!({
                "squeeze_parameter_r": r,
                "state": state,
                "epr": epr,
                "var_x_sum": state.quadrature_variance(&sum_x),
                "var_p_diff": state.quadrature_variance(&diff_p),
            })))
        }
        Command::Swap { squeeze, squeeze2 } => {
            json_only("swap")?;
            let r1 = squeeze_or(&cfg, *squeeze)?;
            let r2 = squeeze_or(&cfg, squeeze2.or(Some(r1)))?;
            let state = gaussian::swapped_state(r1, r2).map_err(numeric)?;
            let epr = gaussian::epr_report(&state, 0, 1).map_err(numeric)?;
            Ok(output::render_json(&json!({
                "r_pair1": r1,
                "r_pair2": r2,
                "state": state,
                "epr": epr,
            })))
        }
    }
}

/// Runs one command and writes its output.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let text = render(&cli.command, &cli.options)?;
    let out = &cli.options.out;
    let written = if out.as_os_str() == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush())
    } else {
        fs::write(out, text)
    };
    written.map_err(|source| CliError::Output {
        path: out.display().to_string(),
        source,
    })
}
