//! Proper scoring rules for univariate probabilistic forecasts.
//!
//! The crate evaluates Ignorance, CRPS, Energy, Power, Pseudo-spherical and
//! naive linear scores, checks propriety numerically, constructs
//! implausibility witnesses, studies relative scores under smooth
//! transformations, and scores forecast archives.

pub mod analysis;
pub mod archive;
pub mod distributions;
pub mod error;
pub mod figures;
pub mod quadrature;
pub mod report;
pub mod scores;

pub use distributions::{Density, Forecast, MixtureDensity, Transform, TransformedDensity};
pub use error::{Error, Result};
pub use scores::{MonteCarlo, ScoreOptions, ScoreSpec, ScoreValue};
