use thiserror::Error;

use crate::flux::FluxScheme;

/// Location of a nodal degree of freedom inside a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NodeLocation {
    pub element: usize,
    pub node: (usize, usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// Non-physical state (nonpositive density or pressure, or a NaN).
    /// This is the crash signal of a robustness run.
    #[error(
        "invalid state at t = {time}: rho = {rho}, p = {pressure} \
         (element {}, node {:?})",
        location.element,
        location.node
    )]
    InvalidState {
        rho: f64,
        pressure: f64,
        location: NodeLocation,
        time: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scheme {0:?} has no explicit split form")]
    UnsupportedScheme(FluxScheme),
}

impl Error {
    /// Attaches a position and time to an invalid-state error raised by a
    /// pointwise conversion.
    pub fn at(self, location: NodeLocation, time: f64) -> Self {
        match self {
            Error::InvalidState { rho, pressure, .. } => Error::InvalidState {
                rho,
                pressure,
                location,
                time,
            },
            other => other,
        }
    }

    pub fn is_invalid_state(&self) -> bool {
        matches!(self, Error::InvalidState { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
