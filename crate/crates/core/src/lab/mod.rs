//! Grid experiments: closed-form wave packets and a windowed-Fourier
//! estimator of oscillation directions and polarizations.
//!
//! The estimator detects strong oscillation in smooth packets, which stands
//! in for singular directions of a distribution.

pub mod compare;
pub mod estimate;
pub mod grid;
pub mod spectrum;
pub mod synth;
pub mod track;

pub use compare::{compare, CompareEntry, CompareReport, Tolerances};
pub use estimate::{estimate_polarization_set, scalar_detector, PolarizationEstimate};
pub use grid::{GridField, GridSpec};
pub use spectrum::{windowed_spectrum, WindowedSpectrum};
pub use synth::{synthesize, synthesize_all, WavePacketSpec};
pub use track::{straightness_track, Track};
