//! Discrete and continuous shape and topological derivatives for a 1D
//! two-material Poisson tracking problem, discretized with B-splines with and
//! without a global linear interface enrichment.

pub mod analytic;
pub mod assembly;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod linalg;
pub mod problem;
pub mod quadrature;
pub mod shape;
pub mod spline;
pub mod topo;

pub use analytic::{
    analytic_dg, analytic_dt, analytic_du, analytic_flux, analytic_g, analytic_u,
    AnalyticCoefficients, AnalyticDerivative,
};
pub use assembly::{assemble, assemble_with_kinks, assemble_with_splits, AssembledSystem};
pub use error::{Error, Result};
pub use experiments::{ConvergenceRecord, Quantity, SweepRow, TopoRow};
pub use fields::{
    eval_field, solve_adjoint, solve_state, solve_state_adjoint, DiscreteField, StateAdjoint,
};
pub use linalg::{solve, DenseMatrix, LuFactorization};
pub use problem::{
    enrichment_eval, DiscretizationMethod, Enrichment, EnrichmentQuantity, Material,
    MaterialLayout, Polynomial, ProblemData,
};
pub use shape::{
    dk_standard, enriched_limit_blocks, shape_derivative_cp_boundary, shape_derivative_cp_volume,
    shape_derivative_dp_enriched, shape_derivative_dp_standard, shape_sensitivity,
    EnrichedShapeLimits, OneSided, RankOneMatrix, ShapeProblem, ShapeSensitivity, ShapeVelocity,
};
pub use spline::{KnotVector, Side, SplineSpace};
pub use topo::{
    dk_topo_standard, enriched_topo_limits, td_enriched, td_standard, td_standard_corrected,
    u_e0, EnrichedTopoLimits, TopoPerturbation, TopoProblem, TopoSensitivity,
};
