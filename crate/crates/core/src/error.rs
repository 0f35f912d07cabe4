use thiserror::Error;

use crate::circuit::ParseError;
use crate::fock::ModeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("photon number must be at least 1")]
    NoPhotons,
    #[error("expected {expected} photons, found {found}")]
    PhotonCountMismatch { expected: usize, found: usize },
    #[error("photon {0} has no nonzero amplitude")]
    EmptyPhoton(usize),
    #[error("empty post-selected state")]
    EmptyState,
    #[error("mode {0} appears in both tensor factors")]
    OverlappingModes(ModeId),
    #[error("mode {0} is not an input of the mode map")]
    ModeMismatch(ModeId),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("reflectivity {0} outside [0, 1]")]
    InvalidReflectivity(f64),
    #[error("port {port} out of range for {total} spatial modes")]
    PortOutOfRange { port: usize, total: usize },
    #[error("beam splitter ports must differ (both {0})")]
    SamePorts(usize),
    #[error("invalid mismatch scenario: {0}")]
    InvalidScenario(String),
    #[error("photons outside the measured channel")]
    ChannelMismatch,
    #[error("ensemble has zero trace")]
    ZeroTrace,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T> = std::result::Result<T, Error>;
