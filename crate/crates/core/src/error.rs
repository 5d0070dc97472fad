use std::path::PathBuf;

use thiserror::Error;

use crate::device::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Validation(ValidationReport),

    #[error("unknown preset `{0}` (expected one of: fig2a, fig2b, fig3, fig4, rubidium-xpm)")]
    UnknownPreset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config is missing required key `{0}`")]
    MissingKey(String),

    #[error("config key `{key}` has invalid value `{value}`")]
    InvalidValue { key: String, value: String },

    #[error("config key `{0}` is not recognised")]
    UnknownKey(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular network response at k = {k} rad/m: {what}")]
    Singular { k: f64, what: &'static str },

    #[error("R2 = 0: delay is infinite")]
    InfiniteDelay,

    #[error("no split resonance found around k0")]
    NoSplitResonance,

    #[error("aliasing guard: {fraction:.3e} of the output energy lies at the time-grid edges; enlarge the grid")]
    Aliasing { fraction: f64 },

    #[error("round-trip iteration did not converge after {iterations} iterations (last change {last_change:.3e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("time step lattice: segment {segment} would change length by {relative:.3e} (limit 1e-3)")]
    LatticeSnap { segment: &'static str, relative: f64 },
}

impl Error {
    /// True for failures of numerical guards (aliasing, convergence, singularity)
    /// as opposed to bad user input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::Aliasing { .. }
                | Error::NonConvergence { .. }
                | Error::LatticeSnap { .. }
                | Error::NoSplitResonance
        )
    }
}
