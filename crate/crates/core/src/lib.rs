//! Simulation of n-photon polarization cat states generated by post-selected
//! bunching of independent photons into a single spatial mode.
//!
//! The pipeline is: [`optics::build_input`] → [`optics::merge_cascade`] →
//! [`postselect::project_product`], giving the unnormalized line state whose
//! norm² is the success probability. [`polarization`] computes the photon
//! number statistics of that state, [`mismatch`] models a distinguishable
//! photon, and [`entanglement`] spreads the cat over n channels and evaluates
//! the GHZ-fraction witness. [`circuit`] reads and writes networks as text.

pub mod circuit;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod mismatch;
pub mod optics;
pub mod polarization;
pub mod postselect;
pub mod reference;
pub mod validate;

pub use error::{Error, Result};
pub use fock::{FockState, ModeId, OccupationVector, Polarization, ProductPhotonState};
pub use optics::ModeMap;
pub use num_complex::Complex64;
