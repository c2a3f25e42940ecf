//! Numerical lab for volume-preserving mean curvature flow: a nonlocal
//! Allen–Cahn phase-field solver, a sharp-interface front tracker, and the
//! calibration and relative-entropy diagnostics that compare the two.

pub mod calibration;
pub mod doublewell;
pub mod entropy;
pub mod error;
pub mod fields;
pub mod harness;
pub mod phasefield;
pub mod sharpinterface;

pub use error::{Error, Result};
