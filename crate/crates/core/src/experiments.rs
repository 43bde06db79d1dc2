//! Convergence studies, sweeps and CSV output.

use std::fmt::Write as _;

use crate::analytic::{analytic_dg, analytic_dt, analytic_du, analytic_g, analytic_u};
use crate::assembly::{assemble, points_per_piece};
use crate::error::{Error, Result};
use crate::fields::solve_state;
use crate::problem::{DiscretizationMethod, MaterialLayout, ProblemData};
use crate::quadrature::{composite_points, partition, GaussLegendre};
use crate::shape::{ShapeProblem, ShapeSensitivity};
use crate::spline::{Side, SplineSpace};
use crate::topo::TopoProblem;

/// Unresolved interface position used for the state study.
pub const STATE_KAPPA: f64 = std::f64::consts::SQRT_2 / 5.0;

/// Dyadic element counts `2, 4, ..., max`.
pub fn dyadic(min: usize, max: usize) -> Vec<usize> {
    std::iter::successors(Some(min.max(1)), |&m| Some(2 * m))
        .take_while(|&m| m <= max)
        .collect()
}

/// Negated least-squares slope of `log(error)` against `log(m)`.
pub fn fit_rate(ms: &[usize], errors: &[f64]) -> Result<f64> {
    if ms.len() != errors.len() || ms.len() < 2 {
        return Err(Error::InvalidParameter(
            "a rate fit needs at least two matching (m, error) pairs".into(),
        ));
    }
    if errors.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter(
            "a rate fit needs positive finite errors".into(),
        ));
    }
    let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(-sxy / sxx)
}

/// Error measure reported by a convergence study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    L2,
    H1,
    /// Shape-derivative L2 error of the DP formula.
    Dp,
    /// Shape-derivative L2 error of the CP volume formula.
    Cp,
}

impl Quantity {
    pub fn label(&self) -> &'static str {
        match self {
            Quantity::L2 => "l2",
            Quantity::H1 => "h1",
            Quantity::Dp => "dp",
            Quantity::Cp => "cp",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub study: &'static str,
    pub method: DiscretizationMethod,
    pub degree: usize,
    pub quantity: Quantity,
    pub m: usize,
    pub error: f64,
    /// Rate fitted over this `m` and the two preceding dyadic levels.
    pub rate: Option<f64>,
}

/// Errors of one (method, degree, quantity) series, ordered by `m`.
pub fn series(
    records: &[ConvergenceRecord],
    method: DiscretizationMethod,
    degree: usize,
    quantity: Quantity,
) -> Vec<(usize, f64)> {
    let mut s: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.method == method && r.degree == degree && r.quantity == quantity)
        .map(|r| (r.m, r.error))
        .collect();
    s.sort_by_key(|p| p.0);
    s
}

/// Rate fitted over the records whose `m` lies in `[m_min, m_max]`.
pub fn rate_between(
    records: &[ConvergenceRecord],
    method: DiscretizationMethod,
    degree: usize,
    quantity: Quantity,
    m_min: usize,
    m_max: usize,
) -> Result<f64> {
    let (ms, errs): (Vec<usize>, Vec<f64>) = series(records, method, degree, quantity)
        .into_iter()
        .filter(|&(m, _)| m >= m_min && m <= m_max)
        .unzip();
    fit_rate(&ms, &errs)
}

fn attach_rates(records: &mut [ConvergenceRecord]) {
    for idx in 0..records.len() {
        let r = &records[idx];
        let s = series(records, r.method, r.degree, r.quantity);
        let pos = s.iter().position(|&(m, _)| m == r.m).unwrap_or(0);
        let rate = (pos >= 2 && s[pos - 1].0 * 2 == r.m && s[pos - 2].0 * 4 == r.m)
            .then(|| {
                let (ms, es): (Vec<usize>, Vec<f64>) = s[pos - 2..=pos].iter().copied().unzip();
                fit_rate(&ms, &es).ok()
            })
            .flatten();
        records[idx].rate = rate;
    }
}

/// L2 and full H1 errors of the discrete state against the exact state.
pub fn state_errors(
    space: &SplineSpace,
    data: &ProblemData,
    method: DiscretizationMethod,
    kappa: f64,
) -> Result<(f64, f64)> {
    let layout = MaterialLayout::OneInterface { kappa };
    let sys = assemble(space, data, &layout, method)?;
    let u = solve_state(&sys)?;
    let rule = GaussLegendre::new(points_per_piece(space, data) + 2);
    let mut l2 = 0.0;
    let mut semi = 0.0;
    for piece in partition(space, &[kappa]) {
        let mut err = Ok(());
        rule.for_each(piece.a, piece.b, |x, w| {
            let step = || -> Result<(f64, f64)> {
                let e0 = u.eval(x, 0, Side::Left)? - analytic_u(x, kappa, data)?;
                let e1 = u.eval(x, 1, Side::Left)? - analytic_du(x, kappa, data)?;
                Ok((e0, e1))
            };
            match step() {
                Ok((e0, e1)) => {
                    l2 += w * e0 * e0;
                    semi += w * e1 * e1;
                }
                Err(e) => err = Err(e),
            }
        });
        err?;
    }
    Ok((l2.sqrt(), (l2 + semi).sqrt()))
}

pub fn study_state_convergence(
    data: &ProblemData,
    kappa: f64,
    methods: &[DiscretizationMethod],
    degrees: &[usize],
    ms: &[usize],
) -> Result<Vec<ConvergenceRecord>> {
    let mut out = Vec::new();
    for &method in methods {
        for &p in degrees {
            for &m in ms {
                let space = SplineSpace::new(p, m, data.length)?;
                let (l2, h1) = state_errors(&space, data, method, kappa)?;
                for (quantity, error) in [(Quantity::L2, l2), (Quantity::H1, h1)] {
                    out.push(ConvergenceRecord {
                        study: "state",
                        method,
                        degree: p,
                        quantity,
                        m,
                        error,
                        rate: None,
                    });
                }
            }
        }
    }
    attach_rates(&mut out);
    Ok(out)
}

/// One row of a shape sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub kappa: f64,
    /// `None` unless the DP value is one-sided at this `kappa`.
    pub side: Option<Side>,
    pub objective: f64,
    pub dp: f64,
    pub cp_volume: f64,
    pub cp_boundary: f64,
    pub analytic_g: Option<f64>,
    pub analytic_dg: Option<f64>,
}

/// `samples` equispaced interior points merged with the interior knots. For
/// the enriched linear method knots are left out, since there the tent is
/// already in the spline space.
pub fn default_kappa_grid(
    length: f64,
    samples: usize,
    space: &SplineSpace,
    method: DiscretizationMethod,
) -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=samples)
        .map(|i| length * i as f64 / (samples + 1) as f64)
        .collect();
    grid.extend((1..space.elements()).map(|k| space.breakpoint(k)));
    if method == DiscretizationMethod::Enriched && space.degree() == 1 {
        grid.retain(|&k| space.knot_index(k).is_none());
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * length);
    grid
}

pub fn study_shape_sweep(
    data: &ProblemData,
    method: DiscretizationMethod,
    degree: usize,
    m: usize,
    kappas: &[f64],
) -> Result<Vec<SweepRow>> {
    let space = SplineSpace::new(degree, m, data.length)?;
    let reference = data.has_reference_form();
    let mut rows = Vec::new();
    for &kappa in kappas {
        let sp = ShapeProblem::new(&space, data, method, kappa)?;
        let ShapeSensitivity {
            objective,
            dp,
            cp_volume,
            cp_boundary,
            ..
        } = sp.sensitivity()?;
        let (ag, adg) = if reference {
            (
                Some(analytic_g(kappa, data)?),
                Some(analytic_dg(kappa, data)?.value),
            )
        } else {
            (None, None)
        };
        let sides: Vec<(Option<Side>, f64)> = if dp.is_pair() {
            vec![(Some(Side::Left), dp.left()), (Some(Side::Right), dp.right())]
        } else {
            vec![(None, dp.left())]
        };
        for (side, value) in sides {
            rows.push(SweepRow {
                kappa,
                side,
                objective,
                dp: value,
                cp_volume,
                cp_boundary,
                analytic_g: ag,
                analytic_dg: adg,
            });
        }
    }
    Ok(rows)
}

/// Gauss points of `cells` equal cells (two points each) on `(0, ell)`.
pub fn shape_l2_grid(length: f64, cells: usize) -> Vec<(f64, f64)> {
    composite_points(0.0, length, cells, &GaussLegendre::new(2))
}

/// Shape-derivative L2 errors `(int (d_h - d)^2 dkappa)^(1/2)` of the DP and
/// CP volume formulas against the analytic derivative. `cells` sets the
/// kappa grid; `None` uses `8 * max(ms)` cells.
pub fn study_shape_l2(
    data: &ProblemData,
    methods: &[DiscretizationMethod],
    degrees: &[usize],
    ms: &[usize],
    cells: Option<usize>,
) -> Result<Vec<ConvergenceRecord>> {
    let m_max = ms.iter().copied().max().unwrap_or(2);
    let cells = cells.unwrap_or(8 * m_max);
    let grid = shape_l2_grid(data.length, cells);
    let exact = grid
        .iter()
        .map(|&(k, _)| analytic_dg(k, data).map(|d| d.value))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &method in methods {
        for &p in degrees {
            for &m in ms {
                let space = SplineSpace::new(p, m, data.length)?;
                let (mut dp_err, mut cp_err) = (0.0, 0.0);
                for (&(kappa, w), &d) in grid.iter().zip(&exact) {
                    let sp = ShapeProblem::new(&space, data, method, kappa)?;
                    dp_err += w * (sp.dp(Side::Left)? - d).powi(2);
                    cp_err += w * (sp.cp_volume()? - d).powi(2);
                }
                for (quantity, e) in [(Quantity::Dp, dp_err), (Quantity::Cp, cp_err)] {
                    out.push(ConvergenceRecord {
                        study: "shape-l2",
                        method,
                        degree: p,
                        quantity,
                        m,
                        error: e.sqrt(),
                        rate: None,
                    });
                }
            }
        }
    }
    attach_rates(&mut out);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopoRow {
    pub m: usize,
    pub x: f64,
    pub fem: f64,
    pub fem_corr: f64,
    pub xfem: f64,
    pub analytic: Option<f64>,
}

pub fn study_topo(data: &ProblemData, ms: &[usize]) -> Result<Vec<TopoRow>> {
    let reference = data.has_reference_form();
    let mut rows = Vec::new();
    for &m in ms {
        let space = SplineSpace::new(1, m, data.length)?;
        let tp = TopoProblem::new(&space, data)?;
        for s in tp.sweep()? {
            rows.push(TopoRow {
                m,
                x: s.x,
                fem: s.standard,
                fem_corr: s.corrected,
                xfem: s.enriched,
                analytic: if reference {
                    Some(analytic_dt(s.x, data)?)
                } else {
                    None
                },
            });
        }
    }
    Ok(rows)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Wide table: one row per `m`, columns `<quantity>_p<degree>`.
pub fn convergence_csv(
    records: &[ConvergenceRecord],
    method: DiscretizationMethod,
    quantities: &[Quantity],
    degrees: &[usize],
) -> String {
    let mut ms: Vec<usize> = records
        .iter()
        .filter(|r| r.method == method)
        .map(|r| r.m)
        .collect();
    ms.sort_unstable();
    ms.dedup();
    let mut s = String::from("m");
    for q in quantities {
        for p in degrees {
            let _ = write!(s, ",{}_p{p}", q.label());
        }
    }
    s.push('\n');
    for m in ms {
        let _ = write!(s, "{m}");
        for &q in quantities {
            for &p in degrees {
                let v = records
                    .iter()
                    .find(|r| r.method == method && r.degree == p && r.quantity == q && r.m == m)
                    .map(|r| r.error);
                let _ = write!(s, ",{}", opt(v));
            }
        }
        s.push('\n');
    }
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(
        "kappa,side,G,dG_dp,dG_cp,dG_cp_boundary,G_analytic,dG_analytic\n",
    );
    for r in rows {
        let side = match r.side {
            None => "both",
            Some(Side::Left) => "left",
            Some(Side::Right) => "right",
        };
        let _ = writeln!(
            s,
            "{},{side},{},{},{},{},{},{}",
            num(r.kappa),
            num(r.objective),
            num(r.dp),
            num(r.cp_volume),
            num(r.cp_boundary),
            opt(r.analytic_g),
            opt(r.analytic_dg)
        );
    }
    s
}

pub fn topo_csv(rows: &[TopoRow]) -> String {
    let mut s = String::from("m,x_k,td_fem,td_fem_corr,td_xfem,td_analytic\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.m,
            num(r.x),
            num(r.fem),
            num(r.fem_corr),
            num(r.xfem),
            opt(r.analytic)
        );
    }
    s
}

/// Fitted rate over the last three dyadic levels of every series, one line each.
pub fn rate_summary(records: &[ConvergenceRecord]) -> String {
    let mut keys: Vec<(String, usize, Quantity)> = Vec::new();
    for r in records {
        let key = (r.method.to_string(), r.degree, r.quantity);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut s = String::new();
    for (method, p, q) in keys {
        let last = records
            .iter()
            .filter(|r| r.method.to_string() == method && r.degree == p && r.quantity == q)
            .max_by_key(|r| r.m);
        if let Some(r) = last {
            let rate = r.rate.map_or("n/a".to_string(), |v| format!("{v:.3}"));
            let _ = writeln!(s, "{method} p={p} {}: rate {rate}", q.label());
        }
    }
    s
}
