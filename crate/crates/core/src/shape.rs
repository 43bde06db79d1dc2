//! Shape derivatives with respect to the interface position `kappa`.
//!
//! DP values differentiate the discrete objective exactly; CP values insert
//! the discrete fields into the continuous volume and boundary formulas.

use crate::assembly::{assemble, points_per_piece, AssembledSystem};
use crate::error::{Error, Result};
use crate::fields::{solve_state_adjoint, DiscreteField};
use crate::linalg::{dot, DenseMatrix};
use crate::problem::{DiscretizationMethod, Enrichment, MaterialLayout, ProblemData};
use crate::quadrature::{partition, GaussLegendre};
use crate::spline::{Side, SplineSpace};

/// `scale * v v^T` with a sparse `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneMatrix {
    pub dim: usize,
    pub scale: f64,
    pub vector: Vec<(usize, f64)>,
}

impl RankOneMatrix {
    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let vx: f64 = self.vector.iter().map(|&(i, v)| v * x[i]).sum();
        let vy: f64 = self.vector.iter().map(|&(i, v)| v * y[i]).sum();
        self.scale * vx * vy
    }

    pub fn mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let vy: f64 = self.vector.iter().map(|&(i, v)| v * y[i]).sum();
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.vector {
            out[i] += self.scale * v * vy;
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.dim, self.dim);
        for &(i, vi) in &self.vector {
            for &(j, vj) in &self.vector {
                out[(i, j)] += self.scale * vi * vj;
            }
        }
        out
    }
}

/// `dK[i,j] = (lambda1 - lambda2) N_i'(kappa) N_j'(kappa)`, using the
/// one-sided basis derivatives from `side`.
pub fn dk_standard(
    space: &SplineSpace,
    data: &ProblemData,
    kappa: f64,
    side: Side,
) -> Result<RankOneMatrix> {
    check_interior(kappa, data.length)?;
    Ok(RankOneMatrix {
        dim: space.dim(),
        scale: data.lambda1 - data.lambda2,
        vector: space.eval_basis(kappa, 1, side)?,
    })
}

fn check_interior(kappa: f64, length: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < length) {
        return Err(Error::InvalidLayout(format!(
            "interface {kappa} must lie strictly inside (0, {length})"
        )));
    }
    Ok(())
}

/// A shape derivative that may have two one-sided values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OneSided {
    Single(f64),
    Pair { left: f64, right: f64 },
}

impl OneSided {
    pub fn left(&self) -> f64 {
        match *self {
            OneSided::Single(v) => v,
            OneSided::Pair { left, .. } => left,
        }
    }

    pub fn right(&self) -> f64 {
        match *self {
            OneSided::Single(v) => v,
            OneSided::Pair { right, .. } => right,
        }
    }

    pub fn is_pair(&self) -> bool {
        matches!(self, OneSided::Pair { .. })
    }
}

/// `p^T dK u` for the standard method; the other derivative terms vanish.
pub fn shape_derivative_dp_standard(u: &DiscreteField, p: &DiscreteField, dk: &RankOneMatrix) -> f64 {
    dk.bilinear(&p.coeffs_s, &u.coeffs_s)
}

/// Kappa-derivatives of the enriched blocks for one interface.
#[derive(Clone, Debug, PartialEq)]
pub struct EnrichedShapeLimits {
    pub kappa: f64,
    pub dk_ss: RankOneMatrix,
    pub dk_se: Vec<f64>,
    pub dk_ee: f64,
    pub df_e: f64,
    pub dm_se: Vec<f64>,
    pub dm_e: f64,
}

pub fn enriched_limit_blocks(
    space: &SplineSpace,
    data: &ProblemData,
    kappa: f64,
    side: Side,
) -> Result<EnrichedShapeLimits> {
    let e = Enrichment::new(kappa, data.length)?;
    let (l1, l2) = (data.lambda1, data.lambda2);
    let r = data.length - kappa;
    let dk_ss = dk_standard(space, data, kappa, side)?;

    let n = space.dim();
    let mut dk_se = vec![0.0; n];
    let slope_sum = l1 / kappa + l2 / r;
    let curvature = l1 / (kappa * kappa) - l2 / (r * r);
    for (i, d) in space.eval_basis(kappa, 1, side)? {
        dk_se[i] += d * slope_sum;
    }
    for (i, v) in space.eval_basis(kappa, 0, side)? {
        dk_se[i] -= v * curvature;
    }
    let dk_ee = -l1 / (kappa * kappa) + l2 / (r * r);

    let mut df_e = 0.0;
    let mut dm_e = 0.0;
    let mut dm_se = vec![0.0; n];
    let rule = GaussLegendre::new(points_per_piece(space, data));
    for piece in partition(space, &[kappa]) {
        rule.for_each(piece.a, piece.b, |x, w| {
            let dn = e.kink_derivative(x);
            df_e += w * data.source.eval(x) * dn;
            dm_e += w * data.target.eval(x) * dn;
            let lb = space.local_basis(piece.element, x);
            for r in 0..lb.len {
                if let Some(i) = space.retained_index(lb.first + r) {
                    dm_se[i] += w * lb.values[r] * dn;
                }
            }
        });
    }
    Ok(EnrichedShapeLimits {
        kappa,
        dk_ss,
        dk_se,
        dk_ee,
        df_e,
        dm_se,
        dm_e,
    })
}

/// `p^T (dK u - df) + u^T dM u - 2 u^T dm` for the one-interface enriched system.
pub fn shape_derivative_dp_enriched(
    u: &DiscreteField,
    p: &DiscreteField,
    blocks: &EnrichedShapeLimits,
) -> Result<f64> {
    if u.coeffs_e.len() != 1 || p.coeffs_e.len() != 1 {
        return Err(Error::Unsupported(
            "an enriched field with exactly one enrichment function".into(),
        ));
    }
    let (us, ue) = (&u.coeffs_s, u.coeffs_e[0]);
    let (ps, pe) = (&p.coeffs_s, p.coeffs_e[0]);
    let pku = blocks.dk_ss.bilinear(ps, us)
        + dot(ps, &blocks.dk_se) * ue
        + pe * dot(&blocks.dk_se, us)
        + pe * blocks.dk_ee * ue;
    let pdf = pe * blocks.df_e;
    let udmu = 2.0 * ue * dot(&blocks.dm_se, us);
    let udm = 2.0 * blocks.dm_e * ue;
    Ok(pku - pdf + udmu - udm)
}

/// Piecewise-linear velocity field through `(x, V(x))` breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeVelocity {
    points: Vec<(f64, f64)>,
}

impl ShapeVelocity {
    /// Global tent: `V(0) = V(ell) = 0`, `V(kappa) = 1`.
    pub fn tent(kappa: f64, length: f64) -> Result<Self> {
        check_interior(kappa, length)?;
        Ok(Self {
            points: vec![(0.0, 0.0), (kappa, 1.0), (length, 0.0)],
        })
    }

    /// Breakpoints must be strictly increasing in `x`, start at `0` and end at
    /// `ell` with zero values.
    pub fn piecewise_linear(points: Vec<(f64, f64)>, length: f64) -> Result<Self> {
        let ok = points.len() >= 2
            && points[0] == (0.0, 0.0)
            && points[points.len() - 1] == (length, 0.0)
            && points.windows(2).all(|w| w[1].0 > w[0].0);
        if !ok {
            return Err(Error::InvalidParameter(
                "velocity breakpoints must increase from (0, 0) to (ell, 0)".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn kinks(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    fn segment(&self, x: f64) -> usize {
        let k = self.points.partition_point(|p| p.0 <= x);
        k.clamp(1, self.points.len() - 1) - 1
    }

    pub fn value(&self, x: f64) -> f64 {
        let s = self.segment(x);
        let (x0, v0) = self.points[s];
        let (x1, v1) = self.points[s + 1];
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Slope on the open segment containing `x`.
    pub fn slope(&self, x: f64) -> f64 {
        let s = self.segment(x);
        let (x0, v0) = self.points[s];
        let (x1, v1) = self.points[s + 1];
        (v1 - v0) / (x1 - x0)
    }
}

/// Volume form
/// `int ((u - uhat)^2 - f p - lambda u' p') V' - (2 (u - uhat) uhat' + f' p) V dx`.
pub fn shape_derivative_cp_volume(
    u: &DiscreteField,
    p: &DiscreteField,
    data: &ProblemData,
    kappa: f64,
    velocity: &ShapeVelocity,
) -> Result<f64> {
    let vk = velocity.value(kappa);
    if (vk - 1.0).abs() > 1e-12 {
        return Err(Error::VelocityNormalization { value: vk });
    }
    let layout = MaterialLayout::OneInterface { kappa };
    layout.validate(data.length)?;
    let mut splits = velocity.kinks();
    splits.push(kappa);
    let rule = GaussLegendre::new(points_per_piece(&u.space, data) + 2);
    let mut total = 0.0;
    for piece in partition(&u.space, &splits) {
        let lambda = layout.lambda_off_interface(data, piece.midpoint());
        let mut err = None;
        rule.for_each(piece.a, piece.b, |x, w| {
            let eval = || -> Result<f64> {
                let uh = u.eval(x, 0, Side::Left)?;
                let du = u.eval(x, 1, Side::Left)?;
                let ph = p.eval(x, 0, Side::Left)?;
                let dp = p.eval(x, 1, Side::Left)?;
                let diff = uh - data.target.eval(x);
                let f = data.source.eval(x);
                let a = diff * diff - f * ph - lambda * du * dp;
                let b = 2.0 * diff * data.target.derivative(x) + data.source.derivative(x) * ph;
                Ok(a * velocity.slope(x) - b * velocity.value(x))
            };
            match eval() {
                Ok(v) => total += w * v,
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(total)
}

/// Boundary form `(1/lambda2 - 1/lambda1) (lambda u')(kappa) (lambda p')(kappa)`
/// with each flux taken as the mean of its one-sided values.
pub fn shape_derivative_cp_boundary(
    u: &DiscreteField,
    p: &DiscreteField,
    data: &ProblemData,
    kappa: f64,
) -> Result<f64> {
    check_interior(kappa, data.length)?;
    let flux = |f: &DiscreteField| -> Result<f64> {
        let left = data.lambda1 * f.eval(kappa, 1, Side::Left)?;
        let right = data.lambda2 * f.eval(kappa, 1, Side::Right)?;
        Ok(0.5 * (left + right))
    };
    Ok((1.0 / data.lambda2 - 1.0 / data.lambda1) * flux(u)? * flux(p)?)
}

/// All shape sensitivities at one interface position.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeSensitivity {
    pub kappa: f64,
    pub method: DiscretizationMethod,
    /// Objective including `int uhat^2`.
    pub objective: f64,
    pub dp: OneSided,
    pub cp_volume: f64,
    pub cp_boundary: f64,
    /// `kappa` coincides with a knot.
    pub on_knot: bool,
}

/// Discrete system and solved fields for one interface at `kappa`.
#[derive(Clone, Debug)]
pub struct ShapeProblem {
    pub system: AssembledSystem,
    pub state: DiscreteField,
    pub adjoint: DiscreteField,
}

impl ShapeProblem {
    pub fn new(
        space: &SplineSpace,
        data: &ProblemData,
        method: DiscretizationMethod,
        kappa: f64,
    ) -> Result<Self> {
        let layout = MaterialLayout::OneInterface { kappa };
        let system = assemble(space, data, &layout, method)?;
        let sa = solve_state_adjoint(&system)?;
        Ok(Self {
            system,
            state: sa.state,
            adjoint: sa.adjoint,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.system.layout.interfaces()[0]
    }

    pub fn objective(&self) -> Result<f64> {
        self.system
            .objective_value(&self.state.coefficients(), true)
    }

    /// DP derivative using one-sided basis derivatives from `side`.
    pub fn dp(&self, side: Side) -> Result<f64> {
        let (space, data, kappa) = (&self.system.space, &self.system.data, self.kappa());
        match self.system.method {
            DiscretizationMethod::Standard => Ok(shape_derivative_dp_standard(
                &self.state,
                &self.adjoint,
                &dk_standard(space, data, kappa, side)?,
            )),
            DiscretizationMethod::Enriched => shape_derivative_dp_enriched(
                &self.state,
                &self.adjoint,
                &enriched_limit_blocks(space, data, kappa, side)?,
            ),
        }
    }

    pub fn cp_volume(&self) -> Result<f64> {
        let kappa = self.kappa();
        let v = ShapeVelocity::tent(kappa, self.system.data.length)?;
        shape_derivative_cp_volume(&self.state, &self.adjoint, &self.system.data, kappa, &v)
    }

    pub fn cp_boundary(&self) -> Result<f64> {
        shape_derivative_cp_boundary(&self.state, &self.adjoint, &self.system.data, self.kappa())
    }

    pub fn sensitivity(&self) -> Result<ShapeSensitivity> {
        let space = &self.system.space;
        let kappa = self.kappa();
        let on_knot = space.knot_index(kappa).is_some();
        let dp = if on_knot && space.degree() == 1 {
            OneSided::Pair {
                left: self.dp(Side::Left)?,
                right: self.dp(Side::Right)?,
            }
        } else {
            OneSided::Single(self.dp(Side::Left)?)
        };
        Ok(ShapeSensitivity {
            kappa,
            method: self.system.method,
            objective: self.objective()?,
            dp,
            cp_volume: self.cp_volume()?,
            cp_boundary: self.cp_boundary()?,
            on_knot,
        })
    }
}

pub fn shape_sensitivity(
    space: &SplineSpace,
    data: &ProblemData,
    method: DiscretizationMethod,
    kappa: f64,
) -> Result<ShapeSensitivity> {
    ShapeProblem::new(space, data, method, kappa)?.sensitivity()
}
