//! Front tracking for the area-preserving curve-shortening flow
//! `V = κ − λ` with `λ = ∫κ ds / L`.

mod curve;
mod flow;
mod io;
mod spline;

pub use curve::{menger_curvature, Curve, Geometry, MIN_NODES};
pub use flow::{stable_dt, step, FrontStep, LambdaMode, C_FT};
pub use io::{
    read_curve, read_metrics, read_velocity, write_curve, write_metrics, write_velocity, CurveSidecar, FrontMetrics,
};
pub use spline::{ClosedSpline, SplinePoint};
