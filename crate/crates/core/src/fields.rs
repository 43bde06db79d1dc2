//! Discrete state and adjoint fields.

use crate::assembly::AssembledSystem;
use crate::error::{Error, Result};
use crate::linalg::{LuFactorization, DenseMatrix};
use crate::problem::{DiscretizationMethod, Enrichment};
use crate::spline::{Side, SplineSpace};

/// `u_h = sum N^S_i u^S_i + sum N^E_j u^E_j`.
#[derive(Clone, Debug)]
pub struct DiscreteField {
    pub method: DiscretizationMethod,
    pub space: SplineSpace,
    pub enrichments: Vec<Enrichment>,
    pub coeffs_s: Vec<f64>,
    pub coeffs_e: Vec<f64>,
}

impl DiscreteField {
    pub fn from_coefficients(sys: &AssembledSystem, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() != sys.dim() {
            return Err(Error::DimensionMismatch {
                expected: sys.dim(),
                found: coeffs.len(),
            });
        }
        let (s, e) = coeffs.split_at(sys.n_s());
        Ok(Self {
            method: sys.method,
            space: sys.space.clone(),
            enrichments: sys.enrichments.clone(),
            coeffs_s: s.to_vec(),
            coeffs_e: e.to_vec(),
        })
    }

    /// All coefficients, standard part first.
    pub fn coefficients(&self) -> Vec<f64> {
        [self.coeffs_s.as_slice(), &self.coeffs_e].concat()
    }

    /// Value (`order = 0`) or x-derivative (`order = 1`). At knots and
    /// enrichment kinks the side selects the one-sided limit.
    pub fn eval(&self, x: f64, order: u8, side: Side) -> Result<f64> {
        let mut v = self.space.eval_combination(&self.coeffs_s, x, order, side)?;
        for (e, c) in self.enrichments.iter().zip(&self.coeffs_e) {
            v += c * if order == 0 {
                e.value(x)
            } else {
                e.slope(x, side)
            };
        }
        Ok(v)
    }

    /// Standard part only.
    pub fn eval_standard(&self, x: f64, order: u8, side: Side) -> Result<f64> {
        self.space.eval_combination(&self.coeffs_s, x, order, side)
    }
}

pub fn eval_field(field: &DiscreteField, x: f64, order: u8, side: Side) -> Result<f64> {
    field.eval(x, order, side)
}

/// State and adjoint sharing one factorization of `K`.
#[derive(Clone, Debug)]
pub struct StateAdjoint {
    pub state: DiscreteField,
    pub adjoint: DiscreteField,
}

pub fn factorize(sys: &AssembledSystem) -> Result<LuFactorization> {
    LuFactorization::new(sys.stiffness())
}

pub fn solve_state(sys: &AssembledSystem) -> Result<DiscreteField> {
    let u = factorize(sys)?.solve(&sys.load())?;
    DiscreteField::from_coefficients(sys, &u)
}

/// Solves `K^T p = -2 (M u - m)`.
pub fn solve_adjoint(sys: &AssembledSystem, state: &DiscreteField) -> Result<DiscreteField> {
    adjoint_with(sys, &factorize(sys)?, state)
}

fn adjoint_with(
    sys: &AssembledSystem,
    lu: &LuFactorization,
    state: &DiscreteField,
) -> Result<DiscreteField> {
    let rhs = adjoint_rhs(&sys.mass(), &sys.tracking(), &state.coefficients())?;
    let p = lu.solve_transpose(&rhs)?;
    DiscreteField::from_coefficients(sys, &p)
}

pub(crate) fn adjoint_rhs(mass: &DenseMatrix, tracking: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    Ok(mass
        .mul_vec(u)?
        .iter()
        .zip(tracking)
        .map(|(mu, m)| -2.0 * (mu - m))
        .collect())
}

pub fn solve_state_adjoint(sys: &AssembledSystem) -> Result<StateAdjoint> {
    let lu = factorize(sys)?;
    let u = lu.solve(&sys.load())?;
    let state = DiscreteField::from_coefficients(sys, &u)?;
    let adjoint = adjoint_with(sys, &lu, &state)?;
    Ok(StateAdjoint { state, adjoint })
}
