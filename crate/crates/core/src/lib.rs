//! Driven quantum Brownian motion.
//!
//! A harmonic oscillator with a periodically modulated frequency couples
//! linearly to two Ohmic environments. The drive converts quanta into pairs
//! of environmental excitations, which entangles environmental bands whose
//! frequencies add up to the drive frequency. This crate computes
//!
//! * the driven Green function in Floquet form ([`floquet`]),
//! * equal-time correlators of two environmental bands, their energies and
//!   heat currents ([`correlators`]),
//! * the logarithmic negativity of the band pair, growth rates and
//!   temperature thresholds ([`entanglement`]),
//! * a discrete-bath reference simulation of the full linear network
//!   ([`oracle`]).

pub mod config;
pub mod correlators;
pub mod entanglement;
pub mod error;
pub mod floquet;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod runs;
pub mod special;

pub use error::{Error, Result};
