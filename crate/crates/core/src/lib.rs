//! Probabilistic secret sharing over arbitrary participant sets, checked at desk scale.
//!
//! The crate is organised bottom-up:
//!
//! * [`access_structure`]: monotone structures given by finite generators, G-delta
//!   witnesses (decreasing chains of generator families), builtin example structures
//!   and the diagonal refutation of candidate witnesses.
//! * [`span_program`]: monotone span programs over prime fields and the construction of
//!   a program from a generator family.
//! * [`linear_scheme`]: the perfect scheme induced by a span program, with dealing,
//!   recovery and exhaustive joint-distribution enumeration.
//! * [`classifier`]: perfect / almost perfect / ramp / almost ramp classification of a
//!   finite joint distribution against an access structure.
//! * [`gaussian_ramp`]: finite truncations of Hilbert-space programs, the Gaussian scheme
//!   and its wrapped (fractional part) ramp variant.
//! * [`tail_threshold`]: the finite-share, infinitely-many-secrets ramp scheme.
//! * [`bridge`]: end-to-end pipelines producing plain-text reports.

pub mod access_structure;
pub mod bridge;
pub mod catalogue;
pub mod classifier;
pub mod error;
pub mod field;
pub mod gaussian_ramp;
pub mod linear_scheme;
pub mod rng;
pub mod span_program;
pub mod tail_threshold;
mod text;
pub mod wrapped;

pub use error::{Error, Result};
