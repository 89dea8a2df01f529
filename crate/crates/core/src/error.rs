use thiserror::Error;

use crate::qiup::Stage;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vector is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("`{op}` requires stage {expected:?}, state is at {found:?}")]
    WrongStage {
        op: &'static str,
        expected: Stage,
        found: Stage,
    },

    #[error("no photon survives the loss channel")]
    NoSurvivingPhoton,

    #[error("fringe scan carries no signal")]
    NoSignal,

    #[error("invalid fringe scan: {0}")]
    InvalidScan(String),

    #[error("predictability {0} is too close to 1; transmittance is not identifiable")]
    SingularPredictability(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by the physics of the configuration rather than by
    /// malformed input or I/O.
    pub fn is_physics(&self) -> bool {
        matches!(
            self,
            Error::SingularPredictability(_)
                | Error::NoSurvivingPhoton
                | Error::NoSignal
                | Error::WrongStage { .. }
        )
    }

    pub fn is_invalid_parameter(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. })
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
