//! Coverage and rate analysis for triangle-clustered cooperation on
//! Poisson-Delaunay cellular networks, with a matching Monte Carlo engine.
//!
//! The crate has three layers:
//! * numerics: special functions, quadrature, and the lower-triangular
//!   Toeplitz exponential (`specfun`, `quad`);
//! * model: planar geometry (`geometry`), fading and interference samples
//!   (`channel`), and the analytic coverage/rate machinery (`analytic`);
//! * experiments: seeded simulation (`montecarlo`) and figure-oriented
//!   experiment plumbing with CSV output (`experiment`).

pub mod analytic;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod montecarlo;
pub mod params;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
pub use params::{InterferenceMode, ModelParams, SchemeId, UeType};
