//! Deterministic tooling around a face-forgery classifier: seeded
//! negative-sample recipes, online augmentation, a Haar-cascade face
//! detector, detector-driven score correction and two-stage learning-rate
//! schedules.

pub mod cascade;
pub mod error;
pub mod imaging;
pub mod landmarks;
pub mod pipeline;
pub mod postprocess;
pub mod recipes;
pub mod rng;
pub mod schedule;
pub mod synth;

pub use error::{Error, Result};
pub use imaging::{ImageBuffer, Rect};
pub use rng::DeterministicRng;
