use thiserror::Error;

/// Errors reported by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is out of range or non-finite. `name` identifies the
    /// offending parameter.
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// An input collection or record violates a structural requirement.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}

/// Checks that `value` is finite and inside `[lo, hi]`.
pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), Error> {
    if !value.is_finite() {
        return Err(Error::param(name, format!("must be finite, got {value}")));
    }
    if value < lo || value > hi {
        return Err(Error::param(
            name,
            format!("must lie in [{lo}, {hi}], got {value}"),
        ));
    }
    Ok(())
}

/// Checks that `value` is finite and nonnegative.
pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<(), Error> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::param(
            name,
            format!("must be finite and nonnegative, got {value}"),
        ));
    }
    Ok(())
}
