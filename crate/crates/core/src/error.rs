use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not anti-Hermitian traceless (defect {defect:.3e})")]
    NotAntiHermitianTraceless { defect: f64 },

    #[error("radius {radius} is outside the admissible range (r_max = {r_max})")]
    RadiusOutOfRange { radius: f64, r_max: f64 },

    #[error("radius {0} is not a shell radius")]
    NotShellRadius(f64),

    #[error("plaquette angle {angle:.6} at site {site} reached the branch cut")]
    CurvatureBranch { site: usize, angle: f64 },

    #[error(
        "gauge fixing did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    GaugeFixing { residual: f64, iterations: usize },

    #[error("cannot normalize a zero spinor field")]
    ZeroField,

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("invalid link field: {0}")]
    InvalidLinks(String),

    #[error("invalid angle alpha = {0}")]
    InvalidAlpha(f64),

    #[error("exponent {0} outside (0, 1]")]
    InvalidExponent(f64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("zero h encountered at radius {0}")]
    ZeroH(f64),

    #[error("insufficient converged stages: need {needed}, have {have}")]
    InsufficientStages { needed: usize, have: usize },

    #[error("no point of the zero set near input: {reason} (|mu| = {mu_norm:.3e})")]
    Infeasible { reason: String, mu_norm: f64 },

    #[error("rank deficiency: expected rank {expected}, found {found}")]
    RankDeficiency { expected: usize, found: usize },

    #[error("path step {step} too large ({distance:.3e} > {limit:.3e})")]
    LargeStep {
        step: usize,
        distance: f64,
        limit: f64,
    },

    #[error("path is not closed in the quotient (overlap {overlap:.3e})")]
    OpenPath { overlap: f64 },

    #[error("section does not lift: curvature {curvature:.3e} exceeds tolerance")]
    LiftObstruction { curvature: f64 },

    #[error("snapshot header: {0}")]
    SnapshotHeader(String),

    #[error("snapshot version {found} is not supported (expected {expected})")]
    SnapshotVersion { found: u32, expected: u32 },

    #[error("snapshot size mismatch: expected {expected} bytes, found {found}")]
    SnapshotSize { expected: usize, found: usize },

    #[error("config: {field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
