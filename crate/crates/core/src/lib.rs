//! Bell nonlocality under wirings: no-signaling and local-polytope geometry,
//! wiring classes, relative-entropy distinguishability and the monotones
//! built from it.

pub mod behavior;
pub mod cli;
pub mod divergence;
pub mod error;
pub mod geometry;
pub mod monotones;
pub mod wirings;

pub use behavior::{Behavior, InputDistribution, Scenario};
pub use error::{Error, Result};
