//! Chance-constrained bilinear programs via the classical and scaled
//! scenario approaches.
//!
//! The pipeline: model a joint chance constraint over bilinear rows
//! ([`problem`]), decide how many uncertainty samples the target violation
//! level requires ([`samplesize`]), draw them from a regularly-varying
//! distribution ([`distributions`]), solve the resulting tall convex
//! program ([`solver`]), and certify the solution out of sample
//! ([`validate`]).

pub mod distributions;
pub mod error;
pub mod problem;
pub mod rng;
pub mod samplesize;
pub mod solver;
pub mod validate;

pub use error::{Error, Result};
pub use rng::Stream;
