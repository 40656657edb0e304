//! End-to-end runs: dataset loading, the three analysis branches, statistics
//! and artifact emission.

mod config;
mod plot;
mod run;
mod synth;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{Branch, BranchSel, PipelineConfig, TauRange};
pub use plot::{barcode_svg, distance_heatmap_svg, hilbert_svg, mds_scatter_svg, render_plots};
pub use run::{load_dataset, run_pipeline, Dataset, MatrixResult, RunArtifacts, Subject};
pub use synth::{clover_points, generate_synthetic, Family, SynthOptions};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("subject {subject}, stage {stage}: {message}")]
    Stage { subject: String, stage: &'static str, message: String, non_convergence: bool },
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl PipelineError {
    /// Process exit code: 2 config, 3 data, 4 numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::NonConvergence(_) | PipelineError::Stage { non_convergence: true, .. } => 4,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io { path: path.into(), source }
    }

    pub(crate) fn stage(subject: &str, stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError::Stage { subject: subject.to_string(), stage, message: e.to_string(), non_convergence: false }
    }

    pub(crate) fn shape_stage(subject: &str, stage: &'static str, e: &crate::shape::ShapeError) -> Self {
        let non_convergence = matches!(e, crate::shape::ShapeError::ClosureNotConverged { .. });
        PipelineError::Stage { subject: subject.to_string(), stage, message: e.to_string(), non_convergence }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;
