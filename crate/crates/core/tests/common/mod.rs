//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use sensi1d::{
    analytic_du, assemble, assemble_with_kinks, solve_state_adjoint, AssembledSystem,
    DiscretizationMethod, Material, MaterialLayout, ProblemData, ShapeProblem, SplineSpace,
    TopoPerturbation,
};

/// Two Richardson levels (ratio 2) applied to the forward quotients
/// `D(e) = (f(e) - f(0)) / e` at `e0, e0/2, e0/4`. Returns the extrapolated
/// limit and an error estimate from the last level.
pub fn richardson_limit(
    f0: &[f64],
    f: impl Fn(f64) -> Vec<f64>,
    e0: f64,
) -> (Vec<f64>, f64) {
    let quot = |e: f64| -> Vec<f64> {
        f(e).iter().zip(f0).map(|(a, b)| (a - b) / e).collect()
    };
    let d0 = quot(e0);
    let d1 = quot(0.5 * e0);
    let d2 = quot(0.25 * e0);
    let r0: Vec<f64> = d0.iter().zip(&d1).map(|(a, b)| 2.0 * b - a).collect();
    let r1: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| 2.0 * b - a).collect();
    let lim: Vec<f64> = r0.iter().zip(&r1).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    let est = lim
        .iter()
        .zip(&r1)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (lim, est)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Block entries of a one-interface enriched system, flattened in a fixed
/// order: `K_SS, K_SE, K_EE, f_E, M_SE, m_E, M_EE`.
pub fn shape_block_values(sys: &AssembledSystem) -> Vec<Vec<f64>> {
    vec![
        sys.k_ss.as_slice().to_vec(),
        sys.k_se.as_slice().to_vec(),
        sys.k_ee.as_slice().to_vec(),
        sys.f_e.clone(),
        sys.m_se.as_slice().to_vec(),
        sys.m_e.clone(),
        sys.m_ee.as_slice().to_vec(),
    ]
}

pub fn enriched_one_interface(space: &SplineSpace, data: &ProblemData, kappa: f64) -> AssembledSystem {
    assemble(
        space,
        data,
        &MaterialLayout::OneInterface { kappa },
        DiscretizationMethod::Enriched,
    )
    .expect("assembly")
}

/// Discrete objective (with the constant) for one interface at `kappa`.
pub fn shape_objective(
    space: &SplineSpace,
    data: &ProblemData,
    method: DiscretizationMethod,
    kappa: f64,
) -> f64 {
    ShapeProblem::new(space, data, method, kappa)
        .and_then(|sp| sp.objective())
        .expect("objective")
}

pub fn central_fd(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (g(x + h) - g(x - h)) / (2.0 * h)
}

/// `|a - b| <= rel * max(|a|, |b|) + abs`.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}

/// Two-interface enriched system for an inclusion of half-width `eps`.
pub fn inclusion_system(
    space: &SplineSpace,
    data: &ProblemData,
    pert: &TopoPerturbation,
    eps: f64,
) -> AssembledSystem {
    assemble(
        space,
        data,
        &pert.layout(eps).expect("layout"),
        DiscretizationMethod::Enriched,
    )
    .expect("assembly")
}

pub fn background() -> MaterialLayout {
    MaterialLayout::Homogeneous {
        material: Material::First,
    }
}

/// Enrichments with both kinks at the node: the `eps = 0` limit of the
/// inclusion system's blocks.
pub fn collapsed_system(space: &SplineSpace, data: &ProblemData, x: f64) -> AssembledSystem {
    assemble_with_kinks(space, data, &background(), &[x, x], &[]).expect("assembly")
}

/// Block entries of a two-enrichment system: `K_SS, K_SE, K_EE, f_E, M_SE, m_E`.
pub fn topo_block_values(sys: &AssembledSystem) -> Vec<Vec<f64>> {
    vec![
        sys.k_ss.as_slice().to_vec(),
        sys.k_se.as_slice().to_vec(),
        sys.k_ee.as_slice().to_vec(),
        sys.f_e.clone(),
        sys.m_se.as_slice().to_vec(),
        sys.m_e.clone(),
    ]
}

/// `int (u_h - uhat)^2` of the solved inclusion system.
pub fn inclusion_objective(
    space: &SplineSpace,
    data: &ProblemData,
    pert: &TopoPerturbation,
    eps: f64,
) -> f64 {
    let sys = inclusion_system(space, data, pert, eps);
    let sa = solve_state_adjoint(&sys).expect("solve");
    sys.objective_value(&sa.state.coefficients(), true)
        .expect("objective")
}

/// `lambda1 (lambda2 - lambda1) / lambda2 * u'(x) p'(x)` for the homogeneous
/// material-1 background. The state is the exact cubic; the adjoint solves
/// with quintic splines, which contain the exact quintic adjoint.
pub fn topological_formula(data: &ProblemData, x: f64) -> f64 {
    let homo = data.with_lambdas(data.lambda1, data.lambda1).expect("data");
    let space = SplineSpace::new(5, 8, data.length).expect("space");
    let sys = assemble(&space, &homo, &background(), DiscretizationMethod::Standard)
        .expect("assembly");
    let sa = solve_state_adjoint(&sys).expect("solve");
    // Any interior interface position gives the homogeneous state.
    let du = analytic_du(x, 0.5 * data.length, &homo).expect("du");
    let dp = sa
        .adjoint
        .eval(x, 1, sensi1d::Side::Left)
        .expect("adjoint derivative");
    data.lambda1 * (data.lambda2 - data.lambda1) / data.lambda2 * du * dp
}
