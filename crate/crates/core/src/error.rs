use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum QsepError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    /// The candidate separable state is numerically indistinguishable from the target.
    #[error("degenerate witness: distance {distance:.3e} to the separable candidate is below threshold")]
    DegenerateWitness { distance: f64 },

    #[error("robustness region is empty: {0}")]
    RegionEmpty(String),

    #[error("generator starved: {0}")]
    GeneratorStarved(StarvationReport),

    #[error("load error at line {line}: {message}")]
    Load { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl QsepError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QsepError::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, QsepError>;

/// Diagnostics carried by a starvation error.
#[derive(Debug, Clone, PartialEq)]
pub struct StarvationReport {
    pub generator: &'static str,
    pub attempts: u64,
    pub accepted: u64,
    /// Fraction of draws that passed the PPT filter (PPT-entangled generator only).
    pub ppt_rate: Option<f64>,
    /// Fraction of PPT candidates whose witness failed validation.
    pub validation_failure_rate: Option<f64>,
}

impl std::fmt::Display for StarvationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} accepted out of {} draws",
            self.generator, self.accepted, self.attempts
        )?;
        if let Some(rate) = self.ppt_rate {
            write!(f, ", PPT rate {rate:.4}")?;
        }
        if let Some(rate) = self.validation_failure_rate {
            write!(f, ", witness validation failure rate {rate:.4}")?;
        }
        Ok(())
    }
}
