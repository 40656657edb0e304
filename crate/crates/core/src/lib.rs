//! Topological and elastic-shape descriptors for triangulated surface scans.
//!
//! The crate is organised as a pipeline:
//!
//! * [`mesh`] ingests STL surfaces, estimates mean curvature, downsamples the
//!   resulting point cloud, aligns faces to landmarks and cuts level curves.
//! * [`persistence`] builds Vietoris–Rips bifiltrations over valued point
//!   clouds and evaluates barcodes and Hilbert (dimension) functions.
//! * [`metrics`] compares Hilbert functions (L² and sublevel Hausdorff) and
//!   assembles distance matrices.
//! * [`shape`] implements square-root-velocity shape analysis of curves:
//!   preshape geodesics and the elastic shape distance.
//! * [`stats`] runs permutation tests, classical MDS and k-NN classification
//!   on distance matrices.
//! * [`pipeline`] ties everything together behind a flat config file and
//!   writes CSV/JSON/SVG artifacts.

pub mod mesh;
pub mod metrics;
pub mod persistence;
pub mod pipeline;
pub mod shape;
pub mod stats;

/// Three-component vector used for points, velocities and SRV samples.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 matrix used for rotations.
pub type Mat3 = nalgebra::Matrix3<f64>;
