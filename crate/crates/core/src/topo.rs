//! Topological derivatives for nucleating material 2 at an interior node of
//! a homogeneous material-1 background.

use crate::assembly::{assemble, points_per_piece, AssembledSystem};
use crate::error::{Error, Result};
use crate::fields::{solve_state_adjoint, DiscreteField};
use crate::linalg::{dot, DenseMatrix, LuFactorization};
use crate::problem::{DiscretizationMethod, Enrichment, Material, MaterialLayout, ProblemData};
use crate::quadrature::{partition, GaussLegendre};
use crate::spline::{Side, SplineSpace};

/// Inclusion centred at breakpoint `node`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopoPerturbation {
    pub node: usize,
    pub x: f64,
    pub h_left: f64,
    pub h_right: f64,
}

impl TopoPerturbation {
    pub fn new(space: &SplineSpace, node: usize) -> Result<Self> {
        let m = space.elements();
        if node == 0 || node >= m {
            return Err(Error::BoundaryNode { node, elements: m });
        }
        let x = space.breakpoint(node);
        Ok(Self {
            node,
            x,
            h_left: x - space.breakpoint(node - 1),
            h_right: space.breakpoint(node + 1) - x,
        })
    }

    /// Largest admissible inclusion half-width (the local mesh width).
    pub fn max_half_width(&self) -> f64 {
        self.h_left.min(self.h_right)
    }

    /// Layout with material 2 on `(x - eps, x + eps)`.
    pub fn layout(&self, eps: f64) -> Result<MaterialLayout> {
        if !(eps > 0.0 && eps < self.max_half_width()) {
            return Err(Error::InvalidParameter(format!(
                "inclusion half-width {eps} must lie in (0, {})",
                self.max_half_width()
            )));
        }
        Ok(MaterialLayout::TwoInterface {
            center: self.x,
            half_width: eps,
        })
    }
}

pub fn background_layout() -> MaterialLayout {
    MaterialLayout::Homogeneous {
        material: Material::First,
    }
}

fn require_linear(space: &SplineSpace) -> Result<()> {
    if space.degree() != 1 {
        return Err(Error::Unsupported(format!(
            "linear splines for topological derivatives, got degree {}",
            space.degree()
        )));
    }
    Ok(())
}

/// `(lambda2 - lambda1) (L L^T + R R^T)` with `L`, `R` the one-sided basis
/// derivatives at the node.
pub fn dk_topo_standard(
    space: &SplineSpace,
    data: &ProblemData,
    pert: &TopoPerturbation,
) -> Result<DenseMatrix> {
    let n = space.dim();
    let mut dk = DenseMatrix::zeros(n, n);
    let scale = data.lambda2 - data.lambda1;
    for side in Side::both() {
        let d = space.eval_basis(pert.x, 1, side)?;
        for &(i, a) in &d {
            for &(j, b) in &d {
                dk[(i, j)] += scale * a * b;
            }
        }
    }
    Ok(dk)
}

/// `(lambda2 - lambda1)/2 [p_{k-1}, p_k, p_{k+1}] T [u_{k-1}, u_k, u_{k+1}]^T`
/// with the tridiagonal `T` built from the two adjacent element widths.
pub fn td_standard(
    u: &DiscreteField,
    p: &DiscreteField,
    data: &ProblemData,
    pert: &TopoPerturbation,
) -> Result<f64> {
    require_linear(&u.space)?;
    let a = 1.0 / (pert.h_left * pert.h_left);
    let b = 1.0 / (pert.h_right * pert.h_right);
    let t = [[a, -a, 0.0], [-a, a + b, -b], [0.0, -b, b]];
    let coeff = |c: &[f64], node: usize| u.space.retained_index(node).map_or(0.0, |i| c[i]);
    let k = pert.node;
    let pv = [coeff(&p.coeffs_s, k - 1), coeff(&p.coeffs_s, k), coeff(&p.coeffs_s, k + 1)];
    let uv = [coeff(&u.coeffs_s, k - 1), coeff(&u.coeffs_s, k), coeff(&u.coeffs_s, k + 1)];
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += pv[i] * t[i][j] * uv[j];
        }
    }
    Ok(0.5 * (data.lambda2 - data.lambda1) * s)
}

/// [`td_standard`] scaled by `lambda1 / lambda2`.
pub fn td_standard_corrected(
    u: &DiscreteField,
    p: &DiscreteField,
    data: &ProblemData,
    pert: &TopoPerturbation,
) -> Result<f64> {
    Ok(td_standard(u, p, data, pert)? * data.lambda1 / data.lambda2)
}

/// Limits as `eps -> 0` of the derivatives of the two-enrichment blocks,
/// where enrichment 1 has its kink at `x - eps` and enrichment 2 at `x + eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnrichedTopoLimits {
    pub perturbation: TopoPerturbation,
    /// `H[j][i]`: unperturbed tent at the node sampled at the node of basis `i`.
    pub h: DenseMatrix,
    pub dk_ss: DenseMatrix,
    pub dk_se: DenseMatrix,
    pub dk_es: DenseMatrix,
    pub dk_ee: DenseMatrix,
    pub df_e: Vec<f64>,
    pub dm_se: DenseMatrix,
    pub dm_e: Vec<f64>,
    /// `dK^E - dK^ES H^T + H dK^S H^T - H dK^SE`.
    pub g: DenseMatrix,
}

const KINK_DIRECTIONS: [f64; 2] = [-1.0, 1.0];

pub fn enriched_topo_limits(
    space: &SplineSpace,
    data: &ProblemData,
    pert: &TopoPerturbation,
) -> Result<EnrichedTopoLimits> {
    require_linear(space)?;
    let n = space.dim();
    let (l1, l2) = (data.lambda1, data.lambda2);
    let x = pert.x;
    let r = data.length - x;
    let tent = Enrichment::new(x, data.length)?;
    let e_minus = tent.left_slope();
    let e_plus = tent.right_slope();
    // Enrichment slopes on the regions left of, inside and right of the inclusion.
    let left = [e_minus, e_minus];
    let middle = [e_plus, e_minus];
    let right = [e_plus, e_plus];

    let dl = dense_vec(n, &space.eval_basis(x, 1, Side::Left)?);
    let dr = dense_vec(n, &space.eval_basis(x, 1, Side::Right)?);
    let val = dense_vec(n, &space.eval_basis(x, 0, Side::Left)?);

    let dk_ss = dk_topo_standard(space, data, pert)?;

    let mut dk_se = DenseMatrix::zeros(n, 2);
    for i in 0..n {
        for j in 0..2 {
            let s = KINK_DIRECTIONS[j];
            let integral = l1 * (-s / (x * x)) * val[i] + l1 * (-s / (r * r)) * (-val[i]);
            let jump = -l1 * dl[i] * left[j] + l2 * dl[i] * middle[j] + l2 * dr[i] * middle[j]
                - l1 * dr[i] * right[j];
            dk_se[(i, j)] = integral + jump;
        }
    }
    let dk_es = dk_se.transpose();

    let mut dk_ee = DenseMatrix::zeros(2, 2);
    for j in 0..2 {
        for l in 0..2 {
            let s = KINK_DIRECTIONS[j] + KINK_DIRECTIONS[l];
            let integral = l1 * s * (-1.0 / (x * x) + 1.0 / (r * r));
            let jump = -l1 * left[j] * left[l] + 2.0 * l2 * middle[j] * middle[l]
                - l1 * right[j] * right[l];
            dk_ee[(j, l)] = integral + jump;
        }
    }

    let mut int_f = 0.0;
    let mut int_u = 0.0;
    let mut int_n = vec![0.0; n];
    let rule = GaussLegendre::new(points_per_piece(space, data));
    for piece in partition(space, &[x]) {
        rule.for_each(piece.a, piece.b, |y, w| {
            let dn = tent.kink_derivative(y);
            int_f += w * data.source.eval(y) * dn;
            int_u += w * data.target.eval(y) * dn;
            let lb = space.local_basis(piece.element, y);
            for q in 0..lb.len {
                if let Some(i) = space.retained_index(lb.first + q) {
                    int_n[i] += w * lb.values[q] * dn;
                }
            }
        });
    }
    let df_e: Vec<f64> = KINK_DIRECTIONS.iter().map(|s| s * int_f).collect();
    let dm_e: Vec<f64> = KINK_DIRECTIONS.iter().map(|s| s * int_u).collect();
    let dm_se = DenseMatrix::from_fn(n, 2, |i, j| KINK_DIRECTIONS[j] * int_n[i]);

    let h = DenseMatrix::from_fn(2, n, |_, i| tent.value(space.breakpoint(i + 1)));
    let ht = h.transpose();
    let g = dk_ee
        .sub(&dk_es.matmul(&ht)?)?
        .sub(&h.matmul(&dk_ss)?.matmul(&ht)?.scaled(-1.0))?
        .sub(&h.matmul(&dk_se)?)?;

    Ok(EnrichedTopoLimits {
        perturbation: *pert,
        h,
        dk_ss,
        dk_se,
        dk_es,
        dk_ee,
        df_e,
        dm_se,
        dm_e,
        g,
    })
}

fn dense_vec(n: usize, sparse: &[(usize, f64)]) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &(i, a) in sparse {
        v[i] += a;
    }
    v
}

/// Limit enrichment coefficients `G^{-1} (df^E - (dK^ES - H dK^S) u)`.
pub fn u_e0(limits: &EnrichedTopoLimits, u: &[f64]) -> Result<Vec<f64>> {
    let a = limits.dk_es.sub(&limits.h.matmul(&limits.dk_ss)?)?;
    let au = a.mul_vec(u)?;
    let rhs: Vec<f64> = limits.df_e.iter().zip(&au).map(|(f, v)| f - v).collect();
    LuFactorization::new(limits.g.clone())?.solve(&rhs)
}

/// `S0 + S1 + S2` with `S0 = p^T dK^S u / 2`,
/// `S1 = (u^T dM^SE - dm^E^T) u^E_0` and `S2 = p^T (dK^SE - dK^S H^T) u^E_0 / 2`.
pub fn td_enriched(u: &[f64], p: &[f64], limits: &EnrichedTopoLimits) -> Result<f64> {
    let ue0 = u_e0(limits, u)?;
    let s0 = 0.5 * limits.dk_ss.bilinear(p, u)?;
    let udm = limits.dm_se.tr_mul_vec(u)?;
    let s1: f64 = udm
        .iter()
        .zip(&limits.dm_e)
        .zip(&ue0)
        .map(|((a, b), c)| (a - b) * c)
        .sum();
    let b = limits
        .dk_se
        .sub(&limits.dk_ss.matmul(&limits.h.transpose())?)?;
    let s2 = 0.5 * dot(p, &b.mul_vec(&ue0)?);
    Ok(s0 + s1 + s2)
}

/// Unperturbed standard system with its state and adjoint.
#[derive(Clone, Debug)]
pub struct TopoProblem {
    pub system: AssembledSystem,
    pub state: DiscreteField,
    pub adjoint: DiscreteField,
}

/// Topological derivatives at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopoSensitivity {
    pub node: usize,
    pub x: f64,
    pub standard: f64,
    pub corrected: f64,
    pub enriched: f64,
}

impl TopoProblem {
    pub fn new(space: &SplineSpace, data: &ProblemData) -> Result<Self> {
        require_linear(space)?;
        let system = assemble(space, data, &background_layout(), DiscretizationMethod::Standard)?;
        let sa = solve_state_adjoint(&system)?;
        Ok(Self {
            system,
            state: sa.state,
            adjoint: sa.adjoint,
        })
    }

    pub fn perturbation(&self, node: usize) -> Result<TopoPerturbation> {
        TopoPerturbation::new(&self.system.space, node)
    }

    pub fn sensitivity(&self, node: usize) -> Result<TopoSensitivity> {
        let pert = self.perturbation(node)?;
        let data = &self.system.data;
        let standard = td_standard(&self.state, &self.adjoint, data, &pert)?;
        let limits = enriched_topo_limits(&self.system.space, data, &pert)?;
        let enriched = td_enriched(&self.state.coeffs_s, &self.adjoint.coeffs_s, &limits)?;
        Ok(TopoSensitivity {
            node,
            x: pert.x,
            standard,
            corrected: standard * data.lambda1 / data.lambda2,
            enriched,
        })
    }

    /// All interior nodes in order.
    pub fn sweep(&self) -> Result<Vec<TopoSensitivity>> {
        (1..self.system.space.elements())
            .map(|k| self.sensitivity(k))
            .collect()
    }
}
