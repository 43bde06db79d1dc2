//! Gauss-Legendre rules and composite integration over split partitions.

use std::f64::consts::PI;

use crate::spline::SplineSpace;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one point");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            points[n / 2] = 0.0;
        }
        Self { points, weights }
    }

    /// Number of points needed to integrate a polynomial of degree `degree` exactly.
    pub fn points_for_degree(degree: usize) -> usize {
        degree / 2 + 1
    }

    /// Calls `f(x, w)` for every mapped point of `[a, b]`.
    pub fn for_each(&self, a: f64, b: f64, mut f: impl FnMut(f64, f64)) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in self.points.iter().zip(&self.weights) {
            f(mid + half * xi, half * wi);
        }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        self.for_each(a, b, |x, w| acc += w * f(x));
        acc
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One integration piece: `[a, b]` lies inside element `element`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub element: usize,
}

impl Piece {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

/// Splits `(0, ell)` at all element boundaries and at every point in
/// `splits` lying strictly inside the domain. Zero-length pieces are dropped.
pub fn partition(space: &SplineSpace, splits: &[f64]) -> Vec<Piece> {
    let len = space.length();
    let mut pts = space.element_boundaries();
    pts.extend(splits.iter().copied().filter(|&s| s > 0.0 && s < len));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let m = space.elements();
    pts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let element = ((mid * m as f64 / len).floor() as usize).min(m - 1);
            Piece {
                a: w[0],
                b: w[1],
                element,
            }
        })
        .collect()
}

/// Composite rule over `[a, b]` with `cells` equal cells of `rule` each.
pub fn composite_points(a: f64, b: f64, cells: usize, rule: &GaussLegendre) -> Vec<(f64, f64)> {
    let h = (b - a) / cells as f64;
    let mut out = Vec::with_capacity(cells * rule.points.len());
    for c in 0..cells {
        let lo = a + c as f64 * h;
        let hi = if c + 1 == cells { b } else { lo + h };
        rule.for_each(lo, hi, |x, w| out.push((x, w)));
    }
    out
}
