//! Acceptance suite. Prints one PASS/FAIL line per criterion. With `--strict`
//! the process exits with a nonzero status if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sensi1d::experiments::{
    rate_between, study_shape_l2, study_state_convergence, study_topo, Quantity, STATE_KAPPA,
};
use sensi1d::quadrature::GaussLegendre;
use sensi1d::{
    analytic_dt, analytic_g, analytic_u, enriched_limit_blocks, enriched_topo_limits, solve,
    td_enriched, u_e0, DiscretizationMethod, ProblemData, ShapeProblem, Side, SplineSpace,
    TopoProblem,
};

use common::*;

const STANDARD: DiscretizationMethod = DiscretizationMethod::Standard;
const ENRICHED: DiscretizationMethod = DiscretizationMethod::Enriched;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(ok: bool, failures: &mut Vec<String>, what: String) {
    if !ok {
        failures.push(what);
    }
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome {
            pass: true,
            detail: summary,
        }
    } else {
        Outcome {
            pass: false,
            detail: format!("{summary}; failed: {}", failures.join("; ")),
        }
    }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn criterion_state_rates() -> Outcome {
    let data = ProblemData::default();
    let start = Instant::now();
    let ms = [128, 256, 512, 1024];
    let recs = study_state_convergence(&data, STATE_KAPPA, &[STANDARD, ENRICHED], &[1, 2, 3], &ms)
        .expect("state study");
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for (method, p, l2_target, l2_tol, h1_target, h1_tol) in [
        (STANDARD, 1, 1.0, 0.15, 0.5, 0.1),
        (STANDARD, 2, 1.0, 0.15, 0.5, 0.1),
        (STANDARD, 3, 1.0, 0.15, 0.5, 0.1),
        (ENRICHED, 1, 2.0, 0.2, 1.0, 0.15),
        (ENRICHED, 2, 2.5, 0.25, 1.5, 0.2),
        (ENRICHED, 3, 2.5, 0.25, 1.5, 0.2),
    ] {
        let l2 = rate_between(&recs, method, p, Quantity::L2, 128, 1024).expect("rate");
        let h1 = rate_between(&recs, method, p, Quantity::H1, 128, 1024).expect("rate");
        parts.push(format!("{method} p={p}: L2 {l2:.3} H1 {h1:.3}"));
        check(
            within(l2, l2_target, l2_tol),
            &mut failures,
            format!("{method} p={p} L2 rate {l2:.3} not {l2_target}±{l2_tol}"),
        );
        check(
            within(h1, h1_target, h1_tol),
            &mut failures,
            format!("{method} p={p} H1 rate {h1:.3} not {h1_target}±{h1_tol}"),
        );
    }
    check(
        elapsed < Duration::from_secs(60),
        &mut failures,
        format!("runtime {elapsed:.1?} exceeds 60 s"),
    );
    outcome(failures, format!("{} [{elapsed:.1?}]", parts.join(", ")))
}

/// Hat-function slopes at breakpoint `k` of a uniform linear mesh, written
/// out directly: `(left, right)` sparse derivative vectors by retained index.
type Sparse = Vec<(usize, f64)>;

fn hat_slopes(m: usize, k: usize) -> (Sparse, Sparse) {
    let inv_h = m as f64;
    let mut left = Vec::new();
    let mut right = Vec::new();
    // Node k-1 (retained k-2) and node k (retained k-1) on element k-1.
    if k >= 2 {
        left.push((k - 2, -inv_h));
    }
    left.push((k - 1, inv_h));
    right.push((k - 1, -inv_h));
    if k < m - 1 {
        right.push((k, inv_h));
    }
    (left, right)
}

fn criterion_smoothness() -> Outcome {
    let data = ProblemData::default();
    let m = 8;
    let mut failures = Vec::new();
    let mut worst_rel: f64 = 0.0;
    for method in [STANDARD, ENRICHED] {
        for p in [2, 3] {
            let space = SplineSpace::new(p, m, 1.0).unwrap();
            for k in 1..m {
                let kappa = space.breakpoint(k);
                let sp = ShapeProblem::new(&space, &data, method, kappa).unwrap();
                let l = sp.dp(Side::Left).unwrap();
                let r = sp.dp(Side::Right).unwrap();
                let rel = (l - r).abs() / l.abs().max(r.abs());
                worst_rel = worst_rel.max(rel);
                check(
                    rel <= 1e-9,
                    &mut failures,
                    format!("{method} p={p} knot {k}: left {l:e} right {r:e}"),
                );
            }
        }
    }
    let space = SplineSpace::new(1, m, 1.0).unwrap();
    let mut worst_jump: f64 = 0.0;
    for k in 1..m {
        let kappa = space.breakpoint(k);
        let sp = ShapeProblem::new(&space, &data, STANDARD, kappa).unwrap();
        let jump = sp.dp(Side::Right).unwrap() - sp.dp(Side::Left).unwrap();
        let (left, right) = hat_slopes(m, k);
        let dot = |v: &[(usize, f64)], c: &[f64]| v.iter().map(|&(i, s)| s * c[i]).sum::<f64>();
        let (u, pa) = (&sp.state.coeffs_s, &sp.adjoint.coeffs_s);
        let scale = data.lambda1 - data.lambda2;
        let expected = scale * (dot(&right, pa) * dot(&right, u) - dot(&left, pa) * dot(&left, u));
        worst_jump = worst_jump.max((jump - expected).abs());
        check(
            (jump - expected).abs() <= 1e-10,
            &mut failures,
            format!("p=1 knot {k}: jump {jump:e} expected {expected:e}"),
        );
    }
    outcome(
        failures,
        format!("max rel. knot mismatch p>=2 {worst_rel:.2e}; max p=1 jump deviation {worst_jump:.2e}"),
    )
}

fn criterion_shape_l2() -> Outcome {
    let data = ProblemData::default();
    let start = Instant::now();
    let ms = [32, 64, 128, 256];
    let recs = study_shape_l2(&data, &[STANDARD, ENRICHED], &[1, 2, 3], &ms, Some(8 * 256))
        .expect("shape study");
    let elapsed = start.elapsed();
    let rate = |method, p, q| rate_between(&recs, method, p, q, 32, 256).expect("rate");
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for p in 1..=3 {
        let cp = rate(STANDARD, p, Quantity::Cp);
        let dp = rate(STANDARD, p, Quantity::Dp);
        parts.push(format!("standard p={p}: CP {cp:.3} DP {dp:.3}"));
        check(
            within(cp, 0.45, 0.15),
            &mut failures,
            format!("standard p={p} CP rate {cp:.3} not 0.45±0.15"),
        );
        check(dp < 0.1, &mut failures, format!("standard p={p} DP rate {dp:.3} not < 0.1"));
    }
    for p in 1..=3 {
        let dp = rate(ENRICHED, p, Quantity::Dp);
        let cp = rate(ENRICHED, p, Quantity::Cp);
        parts.push(format!("enriched p={p}: DP {dp:.3} CP {cp:.3}"));
        check(
            within(dp, 2.0, 0.3),
            &mut failures,
            format!("enriched p={p} DP rate {dp:.3} not 2.0±0.3"),
        );
        let (target, tol) = if p == 1 { (2.0, 0.3) } else { (3.0, 0.4) };
        check(
            within(cp, target, tol),
            &mut failures,
            format!("enriched p={p} CP rate {cp:.3} not {target}±{tol}"),
        );
    }
    check(
        elapsed < Duration::from_secs(300),
        &mut failures,
        format!("runtime {elapsed:.1?} exceeds 5 min"),
    );
    outcome(failures, format!("{} [{elapsed:.1?}]", parts.join(", ")))
}

/// `max_k |td_k - a_k| / max_k |a_k|` over interior nodes.
fn relative_error(values: &[f64], analytic: &[f64]) -> f64 {
    max_diff(values, analytic) / max_abs(analytic)
}

fn criterion_topological() -> Outcome {
    let data = ProblemData::default();
    let rows = study_topo(&data, &[32]).expect("topo study");
    let analytic: Vec<f64> = rows.iter().map(|r| r.analytic.unwrap()).collect();
    let col = |f: fn(&sensi1d::TopoRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let xfem = relative_error(&col(|r| r.xfem), &analytic);
    let corr = relative_error(&col(|r| r.fem_corr), &analytic);
    let fem = relative_error(&col(|r| r.fem), &analytic);
    let target = data.lambda2 / data.lambda1;
    // Least-squares ratio over the nodes in [ell/4, 3 ell/4]; pointwise ratios
    // are undefined where the analytic value changes sign.
    let (num, den) = rows
        .iter()
        .filter(|r| r.x >= 0.25 * data.length && r.x <= 0.75 * data.length)
        .map(|r| (r.fem, r.analytic.unwrap()))
        .fold((0.0, 0.0), |(n, d), (f, a)| (n + f * a, d + a * a));
    let ratio = num / den;
    let mut failures = Vec::new();
    check(xfem < 0.05, &mut failures, format!("xfem error {xfem:.4} not < 5%"));
    check(corr < 0.05, &mut failures, format!("fem-corr error {corr:.4} not < 5%"));
    check(fem > 0.30, &mut failures, format!("fem error {fem:.4} not > 30%"));
    check(
        (ratio - target).abs() <= 0.1 * target,
        &mut failures,
        format!("mid-domain fem/analytic ratio {ratio:.4} not within 10% of {target}"),
    );
    outcome(
        failures,
        format!(
            "rel. errors xfem {xfem:.4}, fem-corr {corr:.4}, fem {fem:.4}; mid-domain fem/analytic {ratio:.4}"
        ),
    )
}

fn criterion_oracles() -> Outcome {
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    let data = ProblemData::default();

    // (a) DP against central differences of the discrete objective.
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst_a: f64 = 0.0;
    for case in 0..20 {
        let method = if case % 2 == 0 { STANDARD } else { ENRICHED };
        let p = rng.random_range(1..=3);
        let m = [4, 8, 16, 32][rng.random_range(0..4)];
        let space = SplineSpace::new(p, m, 1.0).unwrap();
        let h = 1.0 / m as f64;
        let kappa = loop {
            let k: f64 = rng.random_range(0.05..0.95);
            let off = (k / h - (k / h).round()).abs() * h;
            if off > 1e-3 * h {
                break k;
            }
        };
        let dp = ShapeProblem::new(&space, &data, method, kappa)
            .unwrap()
            .dp(Side::Left)
            .unwrap();
        let fd = central_fd(|k| shape_objective(&space, &data, method, k), kappa, 1e-6);
        let rel = (dp - fd).abs() / dp.abs().max(fd.abs());
        worst_a = worst_a.max(rel);
        check(
            close(dp, fd, 1e-5, 1e-9),
            &mut failures,
            format!("(a) {method} p={p} m={m} kappa={kappa:.6}: {dp:e} vs {fd:e}"),
        );
    }
    parts.push(format!("(a) worst rel {worst_a:.1e}"));

    // (b) analytic limit blocks against forward differences with Richardson.
    let kappa = 0.37;
    let mut worst_b: f64 = 0.0;
    for p in 1..=3 {
        let space = SplineSpace::new(p, 8, 1.0).unwrap();
        let b = enriched_limit_blocks(&space, &data, kappa, Side::Left).unwrap();
        let base = shape_block_values(&enriched_one_interface(&space, &data, kappa));
        let flat = |e: f64| -> Vec<f64> {
            shape_block_values(&enriched_one_interface(&space, &data, kappa + e)).concat()
        };
        let (lim, _) = richardson_limit(&base.concat(), flat, 1e-3);
        let n = space.dim();
        let analytic: Vec<f64> = [
            b.dk_ss.to_dense().as_slice().to_vec(),
            b.dk_se.clone(),
            vec![b.dk_ee],
            vec![b.df_e],
            b.dm_se.clone(),
            vec![b.dm_e],
            vec![0.0],
        ]
        .concat();
        assert_eq!(analytic.len(), n * n + n + 1 + 1 + n + 1 + 1);
        let err = max_diff(&lim, &analytic) / max_abs(&analytic).max(1.0);
        worst_b = worst_b.max(err);
        check(err <= 1e-6, &mut failures, format!("(b) shape blocks p={p}: {err:.2e}"));
    }
    let space1 = SplineSpace::new(1, 8, 1.0).unwrap();
    for k in [2, 4, 5] {
        let tp = TopoProblem::new(&space1, &data).unwrap();
        let pert = tp.perturbation(k).unwrap();
        let lim = enriched_topo_limits(&space1, &data, &pert).unwrap();
        let base = topo_block_values(&collapsed_system(&space1, &data, pert.x)).concat();
        let flat = |e: f64| topo_block_values(&inclusion_system(&space1, &data, &pert, e)).concat();
        let (ext, _) = richardson_limit(&base, flat, pert.max_half_width() / 64.0);
        let analytic: Vec<f64> = [
            lim.dk_ss.as_slice().to_vec(),
            lim.dk_se.as_slice().to_vec(),
            lim.dk_ee.as_slice().to_vec(),
            lim.df_e.clone(),
            lim.dm_se.as_slice().to_vec(),
            lim.dm_e.clone(),
        ]
        .concat();
        let err = max_diff(&ext, &analytic) / max_abs(&analytic).max(1.0);
        worst_b = worst_b.max(err);
        check(err <= 1e-6, &mut failures, format!("(b) topo blocks node {k}: {err:.2e}"));
    }
    parts.push(format!("(b) worst {worst_b:.1e}"));

    // (c) u^E_0 against the extrapolated enrichment coefficients of the full
    // inclusion system, (d) H identities.
    let mut worst_c: f64 = 0.0;
    let mut worst_d: f64 = 0.0;
    for k in [2, 4, 5] {
        let tp = TopoProblem::new(&space1, &data).unwrap();
        let pert = tp.perturbation(k).unwrap();
        let lim = enriched_topo_limits(&space1, &data, &pert).unwrap();
        let ue0 = u_e0(&lim, &tp.state.coeffs_s).unwrap();
        let coeffs = |e: f64| -> Vec<f64> {
            let sys = inclusion_system(&space1, &data, &pert, e);
            let u = solve(&sys.stiffness(), &sys.load()).unwrap();
            u[sys.n_s()..].to_vec()
        };
        let eb = pert.max_half_width();
        let (c0, c1, c2) = (coeffs(eb / 8.0), coeffs(eb / 16.0), coeffs(eb / 32.0));
        let extrap: Vec<f64> = (0..2)
            .map(|j| {
                let r0 = 2.0 * c1[j] - c0[j];
                let r1 = 2.0 * c2[j] - c1[j];
                (4.0 * r1 - r0) / 3.0
            })
            .collect();
        let err = max_diff(&extrap, &ue0) / max_abs(&ue0);
        worst_c = worst_c.max(err);
        check(err <= 1e-4, &mut failures, format!("(c) node {k}: {extrap:?} vs {ue0:?}"));

        let sys0 = collapsed_system(&space1, &data, pert.x);
        let hk = lim.h.matmul(&sys0.k_ss).unwrap();
        let d1 = hk.sub(&sys0.k_se.transpose()).unwrap().max_abs();
        let d2 = lim
            .h
            .matmul(&sys0.k_se)
            .unwrap()
            .sub(&sys0.k_ee)
            .unwrap()
            .max_abs();
        let d3 = max_diff(&lim.h.mul_vec(&sys0.f_s).unwrap(), &sys0.f_e);
        let d = d1.max(d2).max(d3);
        worst_d = worst_d.max(d);
        check(d <= 1e-10, &mut failures, format!("(d) node {k}: {d:.2e}"));
    }
    parts.push(format!("(c) worst rel {worst_c:.1e}"));
    parts.push(format!("(d) worst {worst_d:.1e}"));

    // (e) enriched topological derivative against the one-sided difference
    // quotient of the inclusion objective.
    let m = 16;
    let space = SplineSpace::new(1, m, 1.0).unwrap();
    let tp = TopoProblem::new(&space, &data).unwrap();
    let g0 = tp
        .system
        .objective_value(&tp.state.coefficients(), true)
        .unwrap();
    let mut worst_e: f64 = 0.0;
    for k in [m / 4, m / 2, 3 * m / 4] {
        let pert = tp.perturbation(k).unwrap();
        let lim = enriched_topo_limits(&space, &data, &pert).unwrap();
        let td = td_enriched(&tp.state.coeffs_s, &tp.adjoint.coeffs_s, &lim).unwrap();
        let (fd, _) = richardson_limit(
            &[g0 / 2.0],
            |e| vec![inclusion_objective(&space, &data, &pert, e) / 2.0],
            pert.max_half_width() / 8.0,
        );
        let fd = fd[0];
        let rel = (td - fd).abs() / td.abs().max(fd.abs());
        worst_e = worst_e.max(rel);
        check(
            rel <= 1e-4,
            &mut failures,
            format!("(e) node {k}: td {td:e} vs fd {fd:e}"),
        );
    }
    parts.push(format!("(e) worst rel {worst_e:.1e}"));
    outcome(failures, parts.join(", "))
}

fn criterion_analytic() -> Outcome {
    let data = ProblemData::default();
    let mut failures = Vec::new();
    let rule = GaussLegendre::new(8);
    let mut worst_g: f64 = 0.0;
    for i in 1..=10 {
        let kappa = i as f64 / 11.0;
        let integrand = |x: f64| (analytic_u(x, kappa, &data).unwrap() - data.target.eval(x)).powi(2);
        let quad = rule.integrate(0.0, kappa, integrand) + rule.integrate(kappa, 1.0, integrand);
        let g = analytic_g(kappa, &data).unwrap();
        worst_g = worst_g.max((g - quad).abs());
        check((g - quad).abs() <= 1e-10, &mut failures, format!("G at {kappa:.4}: {g:e} vs {quad:e}"));
    }
    let mut worst_t: f64 = 0.0;
    for kappa in [0.1, 0.3, 0.5, 0.6, 0.85] {
        let a = analytic_dt(kappa, &data).unwrap();
        let f = topological_formula(&data, kappa);
        let rel = (a - f).abs() / a.abs().max(f.abs());
        worst_t = worst_t.max(rel);
        check(rel <= 1e-4, &mut failures, format!("dT at {kappa}: {a:e} vs {f:e}"));
    }
    outcome(
        failures,
        format!("max |G - quadrature| {worst_g:.1e}; max rel. dT deviation {worst_t:.1e}"),
    )
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("1 state convergence rates", criterion_state_rates),
        ("2 smoothness across knots", criterion_smoothness),
        ("3 shape-derivative L2 rates", criterion_shape_l2),
        ("4 topological derivative accuracy", criterion_topological),
        ("5 oracle equivalence", criterion_oracles),
        ("6 analytic oracle self-consistency", criterion_analytic),
    ];
    let args: Vec<String> = std::env::args().skip(1).collect();
    let strict = args.iter().any(|a| a == "--strict");
    let filter: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let mut all_pass = true;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.starts_with(f.as_str())) {
            continue;
        }
        let o = run();
        all_pass &= o.pass;
        println!(
            "criterion {name}: {} - {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {}",
        if all_pass { "all selected criteria PASS" } else { "some criteria FAIL" }
    );
    if strict && !all_pass {
        std::process::exit(1);
    }
}
