use std::fmt;

/// Errors raised by the extraction toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A value passed to an operation violates its precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration value (loss hyperparameter, weight, model setting) is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical routine failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A model evaluation failed; the trial is recorded as failed.
    #[error("evaluation failed: {0}")]
    EvaluationFailed(EvalFailure),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why an external (or built-in) model evaluation produced no prediction.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalFailure {
    Spawn(String),
    Io(String),
    NonzeroExit { code: Option<i32>, stderr: String },
    Timeout { seconds: f64, stderr: String },
    ShortOutput { expected: usize, got: usize },
    Malformed(String),
    NonFinite(String),
}

impl fmt::Display for EvalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalFailure::Spawn(msg) => write!(f, "could not start simulator: {msg}"),
            EvalFailure::Io(msg) => write!(f, "i/o error: {msg}"),
            EvalFailure::NonzeroExit { code, stderr } => {
                match code {
                    Some(code) => write!(f, "simulator exited with code {code}")?,
                    None => write!(f, "simulator terminated by signal")?,
                }
                write_stderr(f, stderr)
            }
            EvalFailure::Timeout { seconds, stderr } => {
                write!(f, "simulator timed out after {seconds} s")?;
                write_stderr(f, stderr)
            }
            EvalFailure::ShortOutput { expected, got } => {
                write!(
                    f,
                    "short output: expected {expected} predictions, got {got}"
                )
            }
            EvalFailure::Malformed(msg) => write!(f, "malformed output: {msg}"),
            EvalFailure::NonFinite(msg) => write!(f, "non-finite prediction: {msg}"),
        }
    }
}

fn write_stderr(f: &mut fmt::Formatter<'_>, stderr: &str) -> fmt::Result {
    let stderr = stderr.trim();
    if stderr.is_empty() {
        Ok(())
    } else {
        write!(f, " (stderr: {stderr})")
    }
}

impl From<EvalFailure> for Error {
    fn from(failure: EvalFailure) -> Self {
        Error::EvaluationFailed(failure)
    }
}
