use thiserror::Error;

/// Errors produced by the sensitivity library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("coordinate {x} lies outside the domain [0, {len}]")]
    OutsideDomain { x: f64, len: f64 },

    #[error("coordinate {x} lies on a material interface; a side must be given")]
    AmbiguousInterface { x: f64 },

    #[error("enrichment kink at {kappa} touches the domain boundary; its slope is unbounded")]
    SingularEnrichment { kappa: f64 },

    #[error("invalid material layout: {0}")]
    InvalidLayout(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the enriched method needs at least one interface to enrich")]
    NoInterfaceToEnrich,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular to working precision (pivot column {column})")]
    Singular { column: usize },

    #[error("node {node} is not an interior node of a mesh with {elements} elements")]
    BoundaryNode { node: usize, elements: usize },

    #[error("operation requires {0}")]
    Unsupported(String),

    #[error("closed-form reference is only valid for f(x) = x and uhat(x) = x(ell - x): {0}")]
    OracleValidity(String),

    #[error("shape velocity must satisfy V(kappa) = 1, got {value}")]
    VelocityNormalization { value: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
