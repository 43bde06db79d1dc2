//! Open-knot B-spline spaces on a uniform partition of `(0, ell)`.
//!
//! The full basis of degree `p` on `m` elements has `m + p` functions. Only
//! the first and last of them have a nonzero trace, so removing them yields
//! the homogeneous-Dirichlet space of dimension `m + p - 2` that the
//! discretizations use.

use crate::error::{Error, Result};

/// Largest supported polynomial degree. Local evaluations use fixed-size
/// scratch arrays of length `MAX_DEGREE + 1`.
pub const MAX_DEGREE: usize = 8;

/// Which one-sided limit to take at a point where a piecewise quantity may jump.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn both() -> [Side; 2] {
        [Side::Left, Side::Right]
    }
}

/// Open knot vector with uniform interior knots.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector {
    degree: usize,
    elements: usize,
    length: f64,
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn uniform(degree: usize, elements: usize, length: f64) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::InvalidParameter(format!(
                "spline degree must be in 1..={MAX_DEGREE}, got {degree}"
            )));
        }
        if elements < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 elements, got {elements}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain length must be positive, got {length}"
            )));
        }
        let mut knots = Vec::with_capacity(elements + 2 * degree + 1);
        knots.extend(std::iter::repeat_n(0.0, degree));
        knots.extend((0..=elements).map(|k| breakpoint(k, elements, length)));
        knots.extend(std::iter::repeat_n(length, degree));
        Ok(Self {
            degree,
            elements,
            length,
            knots,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions before boundary elimination.
    pub fn basis_count(&self) -> usize {
        self.elements + self.degree
    }
}

fn breakpoint(k: usize, elements: usize, length: f64) -> f64 {
    if k == elements {
        length
    } else {
        k as f64 * length / elements as f64
    }
}

/// Values (and first derivatives) of the `p + 1` full-basis functions that
/// are nonzero on one element. Entry `r` belongs to full index `first + r`.
#[derive(Clone, Copy, Debug)]
pub struct LocalBasis {
    pub first: usize,
    pub len: usize,
    pub values: [f64; MAX_DEGREE + 1],
    pub derivs: [f64; MAX_DEGREE + 1],
}

/// Degree-`p` spline space with the two boundary functions removed.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineSpace {
    knot_vector: KnotVector,
}

impl SplineSpace {
    pub fn new(degree: usize, elements: usize, length: f64) -> Result<Self> {
        Ok(Self {
            knot_vector: KnotVector::uniform(degree, elements, length)?,
        })
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.knot_vector
    }

    pub fn degree(&self) -> usize {
        self.knot_vector.degree
    }

    pub fn elements(&self) -> usize {
        self.knot_vector.elements
    }

    pub fn length(&self) -> f64 {
        self.knot_vector.length
    }

    /// Dimension after Dirichlet elimination (`n_S = m + p - 2`).
    pub fn dim(&self) -> usize {
        self.knot_vector.basis_count() - 2
    }

    pub fn element_width(&self) -> f64 {
        self.length() / self.elements() as f64
    }

    /// Breakpoints `x_0 = 0 < x_1 < ... < x_m = ell`.
    pub fn element_boundaries(&self) -> Vec<f64> {
        let m = self.elements();
        (0..=m).map(|k| breakpoint(k, m, self.length())).collect()
    }

    pub fn breakpoint(&self, k: usize) -> f64 {
        breakpoint(k, self.elements(), self.length())
    }

    /// Index of the breakpoint `x` coincides with, if any.
    pub fn knot_index(&self, x: f64) -> Option<usize> {
        let t = x * self.elements() as f64 / self.length();
        let k = t.round();
        if k >= 0.0 && (t - k).abs() <= 1e-12 * t.abs().max(1.0) {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Element whose closure contains `x`. At an interior breakpoint the side
    /// selects the element to the left or to the right.
    pub fn locate(&self, x: f64, side: Side) -> Result<usize> {
        self.check_domain(x)?;
        let m = self.elements();
        let e = match self.knot_index(x) {
            Some(k) => match side {
                Side::Left => k.saturating_sub(1),
                Side::Right => k,
            },
            None => (x * m as f64 / self.length()).floor() as usize,
        };
        Ok(e.min(m - 1))
    }

    pub(crate) fn check_domain(&self, x: f64) -> Result<()> {
        if !(0.0..=self.length()).contains(&x) {
            return Err(Error::OutsideDomain {
                x,
                len: self.length(),
            });
        }
        Ok(())
    }

    /// Cox-de Boor evaluation of the full basis on element `element`. The
    /// point is not range-checked; polynomial pieces extend naturally.
    pub fn local_basis(&self, element: usize, x: f64) -> LocalBasis {
        let p = self.degree();
        let span = element + p;
        let u = self.knot_vector.knots();
        let mut values = [0.0; MAX_DEGREE + 1];
        let mut derivs = [0.0; MAX_DEGREE + 1];

        let lower = cox_de_boor(u, span, p - 1, x);
        let full = cox_de_boor(u, span, p, x);
        values[..=p].copy_from_slice(&full[..=p]);
        let pf = p as f64;
        for r in 0..=p {
            let i = span - p + r;
            let mut d = 0.0;
            if r >= 1 {
                d += lower[r - 1] / (u[i + p] - u[i]);
            }
            if r < p {
                d -= lower[r] / (u[i + p + 1] - u[i + 1]);
            }
            derivs[r] = pf * d;
        }
        LocalBasis {
            first: span - p,
            len: p + 1,
            values,
            derivs,
        }
    }

    /// Retained index of full-basis function `full`, if it survives the
    /// boundary elimination.
    pub fn retained_index(&self, full: usize) -> Option<usize> {
        (full >= 1 && full <= self.dim()).then(|| full - 1)
    }

    /// All full-basis functions with `x` in their support.
    pub fn eval_full_basis(&self, x: f64, order: u8, side: Side) -> Result<Vec<(usize, f64)>> {
        check_order(order)?;
        let e = self.locate(x, side)?;
        let lb = self.local_basis(e, x);
        let src = if order == 0 { &lb.values } else { &lb.derivs };
        Ok((0..lb.len).map(|r| (lb.first + r, src[r])).collect())
    }

    /// Retained basis functions with `x` in their support, with retained
    /// indices in `0..dim()`.
    pub fn eval_basis(&self, x: f64, order: u8, side: Side) -> Result<Vec<(usize, f64)>> {
        Ok(self
            .eval_full_basis(x, order, side)?
            .into_iter()
            .filter_map(|(i, v)| self.retained_index(i).map(|j| (j, v)))
            .collect())
    }

    /// Evaluates `sum_i coeffs[i] N_i^(order)(x)` over the retained basis.
    pub fn eval_combination(&self, coeffs: &[f64], x: f64, order: u8, side: Side) -> Result<f64> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coeffs.len(),
            });
        }
        Ok(self
            .eval_basis(x, order, side)?
            .into_iter()
            .map(|(i, v)| coeffs[i] * v)
            .sum())
    }
}

fn check_order(order: u8) -> Result<()> {
    if order > 1 {
        return Err(Error::InvalidParameter(format!(
            "derivative order must be 0 or 1, got {order}"
        )));
    }
    Ok(())
}

/// Nonzero basis functions of degree `q` on the knot span `span`
/// (functions `span - q ..= span`).
fn cox_de_boor(u: &[f64], span: usize, q: usize, x: f64) -> [f64; MAX_DEGREE + 1] {
    let mut n = [0.0; MAX_DEGREE + 1];
    let mut left = [0.0; MAX_DEGREE + 1];
    let mut right = [0.0; MAX_DEGREE + 1];
    n[0] = 1.0;
    for j in 1..=q {
        left[j] = x - u[span + 1 - j];
        right[j] = u[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}
