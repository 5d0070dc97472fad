//! Simulation and feasibility analysis of a coupled double-cavity resonator
//! that mimics electromagnetically induced transparency for a signal field,
//! and of the cross-phase shift it can give a probe in a four-level medium.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod constants;
pub mod device;
pub mod error;
pub mod intracavity;
pub mod loss;
pub mod optimize;
pub mod oracle;
pub mod pulse;
pub mod spectral;
pub mod xpm;

pub use device::{BeamSplitterSpec, DeviceParams, GeometrySpec, MirrorSpec, Preset};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::GMatrix;
