//! Library side of the `geowl` command: file formats, run configuration and
//! the subcommands, each returning a serializable report.

pub mod commands;
pub mod format;

use std::fmt;

use geowl_core::wl::WlConfig;
use geowl_core::Error;

pub use commands::{
    cmd_color, cmd_compare, cmd_gen, cmd_roundtrip, cmd_search, color, compare, roundtrip, ColorSummary, CompareReport,
    FingerprintJson, GenParams, RoundtripReport, SearchReport,
};
pub use format::LoadedCloud;

/// Failure of a command, carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable input, bad parameters or mismatched dimensions (exit 2).
    Parse(String),
    /// Reconstruction or verification failed (exit 1).
    Verification(String),
    /// A configured cap was exceeded (exit 3).
    Cap(String),
}

impl CliError {
    pub fn parse(msg: String) -> Self {
        CliError::Parse(msg)
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Cap(_) => 3,
        }
    }

    fn is_cap(e: &Error) -> bool {
        matches!(
            e,
            Error::TupleCapExceeded { .. } | Error::CandidateCapExceeded { .. } | Error::DepthCapExceeded { .. }
        )
    }

    /// Errors raised while reading or coloring input.
    pub fn from_input(e: Error) -> Self {
        if Self::is_cap(&e) {
            CliError::Cap(e.to_string())
        } else {
            CliError::Parse(e.to_string())
        }
    }

    /// Errors raised by a reconstruction.
    pub fn from_recon(e: Error) -> Self {
        match e {
            Error::EmptyCloud
            | Error::DimensionMismatch { .. }
            | Error::DuplicatePoint(..)
            | Error::InvalidMatrix(_)
            | Error::ParameterMismatch(_)
            | Error::BadColors(_) => CliError::Parse(e.to_string()),
            e if Self::is_cap(&e) => CliError::Cap(e.to_string()),
            e => CliError::Verification(e.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "input error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Cap(m) => write!(f, "cap exceeded: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub ell: Option<usize>,
    pub iters: Option<usize>,
    pub mode: Mode,
    pub tol: f64,
    pub seed: u64,
    pub max_tuples: u128,
    pub max_candidates: u128,
    pub max_depth: usize,
    /// Directions for solid-angle estimates.
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ell: None,
            iters: None,
            mode: Mode::Exact,
            tol: 1e-9,
            seed: 0,
            max_tuples: 100_000,
            max_candidates: 4096,
            max_depth: 1 << 16,
            samples: 1 << 13,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Parse(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_tuples == 0 || self.max_candidates == 0 || self.max_depth == 0 || self.samples == 0 {
            return Err(CliError::Parse("caps must be positive".into()));
        }
        if self.iters.is_some_and(|t| t > 64) {
            return Err(CliError::Parse("at most 64 iterations".into()));
        }
        if self.ell == Some(0) {
            return Err(CliError::Parse("ell must be at least 1".into()));
        }
        Ok(())
    }

    pub fn wl(&self) -> WlConfig {
        WlConfig {
            quantum: self.tol,
            max_tuples: self.max_tuples,
            parallel: true,
        }
    }

    /// Mode actually used for `cloud`: float input forces float mode.
    pub fn mode_for(&self, cloud: &LoadedCloud) -> Mode {
        match cloud {
            LoadedCloud::Float(_) => Mode::Float,
            LoadedCloud::Exact(_) => self.mode,
        }
    }

    /// Tolerance handed to the reconstruction (exact runs decide exactly).
    pub fn core_tol(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Exact => 0.0,
            Mode::Float => self.tol,
        }
    }
}
