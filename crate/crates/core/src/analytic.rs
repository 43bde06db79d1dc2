//! Closed-form references for `f(x) = x` and `uhat(x) = x (ell - x)`.

use crate::error::{Error, Result};
use crate::problem::ProblemData;

/// Coefficients of `u = a1 x^3 + a2 x` on `(0, kappa)` and
/// `u = b1 x^3 + b2 x + b3` on `(kappa, ell)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl AnalyticCoefficients {
    pub fn new(kappa: f64, data: &ProblemData) -> Self {
        let (l, l1, l2, k) = (data.length, data.lambda1, data.lambda2, kappa);
        let den = l * l1 - k * l1 + k * l2;
        let num = l.powi(3) * l1 - k.powi(3) * l1 + k.powi(3) * l2;
        Self {
            a1: -1.0 / (6.0 * l1),
            a2: num / (6.0 * l1 * den),
            b1: -1.0 / (6.0 * l2),
            b2: num / (6.0 * l2 * den),
            b3: l * (k.powi(3) * l1 - k.powi(3) * l2 - l * l * k * l1 + l * l * k * l2)
                / (6.0 * l2 * den),
        }
    }
}

fn check_reference(data: &ProblemData) -> Result<()> {
    if data.has_reference_form() {
        Ok(())
    } else {
        Err(Error::OracleValidity(format!(
            "f = {:?}, uhat = {:?}",
            data.source.coeffs(),
            data.target.coeffs()
        )))
    }
}

fn check_kappa(kappa: f64, data: &ProblemData) -> Result<()> {
    if !(kappa > 0.0 && kappa < data.length) {
        return Err(Error::InvalidLayout(format!(
            "interface {kappa} must lie strictly inside (0, {})",
            data.length
        )));
    }
    Ok(())
}

/// Exact state for material 1 on `(0, kappa)` and material 2 on `(kappa, ell)`.
pub fn analytic_u(x: f64, kappa: f64, data: &ProblemData) -> Result<f64> {
    check_reference(data)?;
    check_kappa(kappa, data)?;
    if !(0.0..=data.length).contains(&x) {
        return Err(Error::OutsideDomain {
            x,
            len: data.length,
        });
    }
    let c = AnalyticCoefficients::new(kappa, data);
    Ok(if x <= kappa {
        c.a1 * x.powi(3) + c.a2 * x
    } else {
        c.b1 * x.powi(3) + c.b2 * x + c.b3
    })
}

/// `du/dx`; at `x = kappa` the left branch is used.
pub fn analytic_du(x: f64, kappa: f64, data: &ProblemData) -> Result<f64> {
    let q = analytic_flux(x, kappa, data)?;
    let lambda = if x <= kappa {
        data.lambda1
    } else {
        data.lambda2
    };
    Ok(-q / lambda)
}

/// `q = -lambda u' = x^2/2 - C`, continuous across the interface.
pub fn analytic_flux(x: f64, kappa: f64, data: &ProblemData) -> Result<f64> {
    check_reference(data)?;
    check_kappa(kappa, data)?;
    if !(0.0..=data.length).contains(&x) {
        return Err(Error::OutsideDomain {
            x,
            len: data.length,
        });
    }
    let (l, l1, l2, k) = (data.length, data.lambda1, data.lambda2, kappa);
    let c = (l.powi(3) * l1 - k.powi(3) * l1 + k.powi(3) * l2) / (6.0 * (l * l1 - k * l1 + k * l2));
    Ok(0.5 * x * x - c)
}

/// `int_0^ell (u - uhat)^2 dx` in closed form.
pub fn analytic_g(kappa: f64, data: &ProblemData) -> Result<f64> {
    check_reference(data)?;
    check_kappa(kappa, data)?;
    Ok(g_unchecked(kappa, data))
}

fn g_unchecked(k: f64, data: &ProblemData) -> f64 {
    let l = data.length;
    let AnalyticCoefficients { a1, a2, b1, b2, b3 } = AnalyticCoefficients::new(k, data);
    let p = |x: f64, n: i32| x.powi(n);
    let g1 = a1 * a1 * p(k, 7) / 7.0 + 2.0 * a1 * a2 * p(k, 5) / 5.0 + a2 * a2 * p(k, 3) / 3.0;
    let uhat_sq_left = l * l * p(k, 3) / 3.0 - l * p(k, 4) / 2.0 + p(k, 5) / 5.0;
    let g2 = uhat_sq_left;
    let g3 = -2.0
        * (a1 * (l * p(k, 5) / 5.0 - p(k, 6) / 6.0) + a2 * (l * p(k, 3) / 3.0 - p(k, 4) / 4.0));
    let g4 = b2 * b2 * (p(l, 3) - p(k, 3)) / 3.0
        + b1 * b1 * (p(l, 7) - p(k, 7)) / 7.0
        + b3 * b3 * (l - k)
        + b2 * b3 * (l * l - k * k)
        + b1 * b3 * (p(l, 4) - p(k, 4)) / 2.0
        + 2.0 * b1 * b2 * (p(l, 5) - p(k, 5)) / 5.0;
    let g5 = p(l, 5) / 30.0 - uhat_sq_left;
    let g6 = -2.0
        * (b1 * (l * (p(l, 5) - p(k, 5)) / 5.0 - (p(l, 6) - p(k, 6)) / 6.0)
            + b2 * (l * (p(l, 3) - p(k, 3)) / 3.0 - (p(l, 4) - p(k, 4)) / 4.0)
            + b3 * (l * (l * l - k * k) / 2.0 - (p(l, 3) - p(k, 3)) / 3.0));
    g1 + g2 + g3 + g4 + g5 + g6
}

/// Shape derivative `dG/dkappa`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticDerivative {
    pub value: f64,
    /// `kappa` is within ten difference steps of a domain end, so the stencil
    /// leaves `(0, ell)` or approaches the singular end points.
    pub reduced_accuracy: bool,
}

/// Five-point central differences of [`analytic_g`] with step `1e-4 ell`,
/// improved by one Richardson step with the half step.
pub fn analytic_dg(kappa: f64, data: &ProblemData) -> Result<AnalyticDerivative> {
    check_reference(data)?;
    check_kappa(kappa, data)?;
    let step = 1e-4 * data.length;
    let g = |k: f64| g_unchecked(k, data);
    let five_point = |h: f64| {
        (g(kappa - 2.0 * h) - 8.0 * g(kappa - h) + 8.0 * g(kappa + h) - g(kappa + 2.0 * h))
            / (12.0 * h)
    };
    let coarse = five_point(step);
    let fine = five_point(0.5 * step);
    Ok(AnalyticDerivative {
        value: (16.0 * fine - coarse) / 15.0,
        reduced_accuracy: kappa < 10.0 * step || kappa > data.length - 10.0 * step,
    })
}

/// Topological derivative for an inclusion of material 2 in material 1 at `kappa`.
pub fn analytic_dt(kappa: f64, data: &ProblemData) -> Result<f64> {
    check_reference(data)?;
    check_kappa(kappa, data)?;
    let (l, l1, l2, k) = (data.length, data.lambda1, data.lambda2, kappa);
    let p = |x: f64, n: i32| x.powi(n);
    let t1 = p(k, 3) * (l * l - 3.0 * k * k) * (l1 - l2)
        * (-10.0 * l * l + 60.0 * l1 * l + 6.0 * k * k - 45.0 * l1 * k)
        / (540.0 * l * l1 * l1 * l2);
    let t2 = k * k * p(l - k, 2) * p(l + k - 6.0 * l1, 2) / (36.0 * l1 * l1);
    let t3 = l1
        * (7.0 * p(l, 5) + 14.0 * p(l, 4) * k - 30.0 * p(l, 3) * k * k - 54.0 * l * l * p(k, 3)
            + 27.0 * l * p(k, 4)
            + 36.0 * p(k, 5))
        - l2 * (7.0 * p(l, 5) + 14.0 * p(l, 4) * k + 6.0 * l * l * p(k, 3) + 57.0 * l * p(k, 4)
            + 36.0 * p(k, 5))
        - l1 * l1
            * (30.0 * p(l, 4) + 60.0 * p(l, 3) * k - 180.0 * l * l * k * k - 180.0 * l * p(k, 3)
                + 270.0 * p(k, 4))
        + l1 * l2
            * (30.0 * p(l, 4) + 60.0 * p(l, 3) * k + 180.0 * l * l * k * k + 180.0 * l * p(k, 3)
                + 270.0 * p(k, 4))
        - 1080.0 * l * k * k * l1 * l1 * l2;
    Ok(t1 + t2 + t3 * p(l - k, 2) / (1080.0 * l * l1 * l1 * l2))
}
