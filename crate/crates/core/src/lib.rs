//! Polarization sets of vector-valued wave fields.
//!
//! The crate covers the symbol calculus of systems of real principal type,
//! null bicharacteristics and the transport of fiber polarizations along
//! them, the gauge algebra of free Maxwell modes in Lorenz gauge, and a
//! grid-based estimator that recovers oscillation directions and
//! polarizations from synthesized wave packets.

pub mod error;
pub mod gauge;
pub mod geometry;
pub mod io;
pub mod lab;
pub mod linalg;
pub mod named;
pub mod phase_space;
pub mod principal;
pub mod ray;
pub mod symbol;
pub mod transport;

pub use error::{Error, Result};
pub use phase_space::{Metric, PhaseSpacePoint, SpacetimePoint, WaveCovector, MINKOWSKI};
