use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("observer gains ({0}, {1}, {2}, {3}) fail the Hurwitz gate")]
    NonHurwitzGains(f64, f64, f64, f64),

    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("non-finite value for `{0}`")]
    NonFinite(String),

    #[error("integration step {dt} s exceeds epsilon/4 = {limit} s")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("observer diverged: {entry} is not finite at t = {t} s")]
    Divergence { entry: String, t: f64 },

    #[error("altitude {0} m is above the atmosphere model ceiling")]
    AboveCeiling(f64),

    #[error("missile-target range is zero")]
    ZeroRange,

    #[error("airspeed is zero, incidence angles are undefined")]
    ZeroAirspeed,

    #[error("airframe dataset line {line}: {message}")]
    Dataset { line: usize, message: String },

    #[error("prediction horizon {delta} s is not an integer multiple of dt = {dt} s")]
    MisalignedHorizon { delta: f64, dt: f64 },

    #[error("series overlap of {0} samples is shorter than the 100-sample minimum")]
    ShortOverlap(usize),

    #[error("engagement record is empty")]
    EmptyRecord,

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("configuration is invalid:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(name.to_string()))
    }
}
