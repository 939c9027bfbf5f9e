//! Active vibro-tactile material classification.
//!
//! A chirp is injected by an emitter finger, propagates through the gripped
//! object, and is recorded by a receiver finger. The difference between the
//! smoothed received and emitted magnitude spectra carries the object's
//! stiffness signature, which is summarized by two features and classified
//! with a nearest-centroid model.
//!
//! * [`signals`]: chirp synthesis, DFT magnitude, boxcar smoothing
//! * [`material_sim`]: material registry and the synthetic rig
//! * [`features`]: differential spectrum, low-band peak, high-band trend
//! * [`classify`]: nearest-centroid model and classification maps
//! * [`pipeline`]: file formats and the command-line front end

pub mod classify;
pub mod error;
pub mod features;
pub mod material_sim;
pub mod pipeline;
pub mod signals;

pub use error::{Error, Result};
