//! CLI errors and their process exit codes.

use std::path::PathBuf;

use thiserror::Error;

use fwmpair_core::design::DesignError;
use fwmpair_core::dispersion::DispersionError;
use fwmpair_core::materials::MaterialError;
use fwmpair_core::modes::cache::CacheError;
use fwmpair_core::modes::ModeError;
use fwmpair_core::scenario::ScenarioError;
use fwmpair_core::sfwm::SfwmError;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// No physical solution (no guided mode, no phase matching, ...).
    pub const PHYSICS: u8 = 1;
    /// Invalid configuration or input.
    pub const CONFIG: u8 = 2;
    /// A numerical method failed to converge.
    pub const NUMERICAL: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

macro_rules! via_scenario {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Scenario(e.into())
            }
        }
    )*};
}
via_scenario!(MaterialError, ModeError, DispersionError, DesignError, SfwmError);

impl From<CacheError> for CliError {
    fn from(e: CacheError) -> Self {
        CliError::Scenario(DispersionError::from(e).into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => exit::CONFIG,
            CliError::Scenario(e) => scenario_code(e),
        }
    }
}

fn scenario_code(e: &ScenarioError) -> u8 {
    match e {
        ScenarioError::Material(_) => exit::CONFIG,
        ScenarioError::Mode(e) => mode_code(e),
        ScenarioError::Dispersion(e) => dispersion_code(e),
        ScenarioError::Design(e) => design_code(e),
        ScenarioError::Sfwm(e) => sfwm_code(e),
    }
}

fn mode_code(e: &ModeError) -> u8 {
    match e {
        ModeError::Material(_) | ModeError::InvalidGeometry(_) => exit::CONFIG,
        ModeError::NoGuidedMode { .. } => exit::PHYSICS,
        ModeError::NotConverged { .. } | ModeError::BoundaryLeak { .. } | ModeError::GridMismatch => exit::NUMERICAL,
    }
}

fn dispersion_code(e: &DispersionError) -> u8 {
    match e {
        DispersionError::Mode(e) => mode_code(e),
        DispersionError::Cache(_) | DispersionError::TooFewSamples(_) | DispersionError::InvalidGrid(_) => exit::CONFIG,
        DispersionError::OutOfRange { .. } => exit::CONFIG,
        DispersionError::NonMonotoneBeta { .. } => exit::NUMERICAL,
    }
}

fn design_code(e: &DesignError) -> u8 {
    match e {
        DesignError::Dispersion(e) => dispersion_code(e),
        DesignError::NoRoot { .. } | DesignError::NoRetune { .. } | DesignError::EmptyResult => exit::PHYSICS,
        DesignError::InvalidTarget(_) => exit::CONFIG,
    }
}

fn sfwm_code(e: &SfwmError) -> u8 {
    match e {
        SfwmError::Dispersion(e) => dispersion_code(e),
        SfwmError::FilterOutsideGrid { .. } | SfwmError::InvalidParameter(_) => exit::CONFIG,
        SfwmError::QuadratureNotConverged { .. } => exit::NUMERICAL,
    }
}
