//! Square-root-velocity (SRV) elastic shape analysis of open and closed curves.
//!
//! A curve `α` is represented by `ν = α̇ / √‖α̇‖`. Rescaling to unit L² norm
//! removes translation and scale (the preshape sphere); closed curves also
//! satisfy `∫ ν‖ν‖ = 0`. Shapes are orbits under rotations and
//! reparameterisations acting as `(O, γ)·ν = O (ν∘γ) √γ̇`, and the shape
//! distance is the smallest preshape geodesic distance between orbits.

mod curve;
mod distance;
mod dp;
mod geodesic;
mod group;
mod srv;

use thiserror::Error;

pub use curve::{Curve, CurveKind};
pub use distance::{
    curve_distances, face_distance, face_distance_with, shape_distance, shape_distance_with, ShapeDistanceReport,
    ShapeOptions, DEFAULT_SAMPLES,
};
pub use dp::optimal_reparam;
pub use geodesic::{preshape_geodesic, preshape_geodesic_with, GeodesicPath, DEFAULT_PATH_STEPS};
pub use group::{group_action, procrustes_rotation, Reparam};
pub use srv::{
    project_closed, project_closed_detailed, raw_srv, srv_inverse, srv_transform, ClosureProjection, SrvFunction,
    CLOSURE_MAX_ITERATIONS, CLOSURE_TOLERANCE,
};

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("curve needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("consecutive points coincide at segment {0}")]
    CoincidentPoints(usize),
    #[error("curve kinds differ: {0:?} vs {1:?}")]
    KindMismatch(CurveKind, CurveKind),
    #[error("curve dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("sample counts differ: {0} vs {1}")]
    SampleMismatch(usize, usize),
    #[error("closure projection requires a closed SRV")]
    NotClosed,
    #[error("cannot normalise a zero SRV function")]
    ZeroFunction,
    #[error("closure projection did not converge after {iterations} iterations (residual {residual:e})")]
    ClosureNotConverged { iterations: usize, residual: f64 },
    #[error("reparameterisation is not strictly increasing at sample {0}")]
    NonMonotone(usize),
    #[error("reparameterisation does not match the SRV: {0}")]
    BadReparam(String),
    #[error("curve families have different sizes: {0} vs {1}")]
    CurveCountMismatch(usize, usize),
    #[error("resampling failed: {0}")]
    Resample(String),
}

pub type Result<T> = std::result::Result<T, ShapeError>;
