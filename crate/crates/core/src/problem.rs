//! Problem data, material layouts and the global linear enrichment function.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spline::Side;

/// Polynomial in monomial form, `coeffs[k]` multiplies `x^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

/// Data of the two-material tracking problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemData {
    pub length: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Source term `f`.
    pub source: Polynomial,
    /// Desired state `uhat`.
    pub target: Polynomial,
}

impl Default for ProblemData {
    /// `ell = 1`, `lambda1 = 0.4`, `lambda2 = 0.2`, `f(x) = x`, `uhat(x) = (ell - x) x`.
    fn default() -> Self {
        Self::reference(1.0, 0.4, 0.2).expect("reference data is valid")
    }
}

impl ProblemData {
    pub fn new(
        length: f64,
        lambda1: f64,
        lambda2: f64,
        source: Polynomial,
        target: Polynomial,
    ) -> Result<Self> {
        for (name, v) in [("ell", length), ("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            length,
            lambda1,
            lambda2,
            source,
            target,
        })
    }

    /// The reference source `f(x) = x` and target `uhat(x) = (ell - x) x`
    /// with the given length and coefficients.
    pub fn reference(length: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(
            length,
            lambda1,
            lambda2,
            Polynomial::new(vec![0.0, 1.0]),
            default_target(length),
        )
    }

    pub fn with_lambdas(&self, lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(
            self.length,
            lambda1,
            lambda2,
            self.source.clone(),
            self.target.clone(),
        )
    }

    pub fn lambda(&self, material: Material) -> f64 {
        match material {
            Material::First => self.lambda1,
            Material::Second => self.lambda2,
        }
    }

    /// Whether `f` and `uhat` have the reference forms for which closed-form
    /// solutions are available.
    pub fn has_reference_form(&self) -> bool {
        let target = default_target(self.length);
        coeffs_close(self.source.coeffs(), &[0.0, 1.0])
            && coeffs_close(self.target.coeffs(), target.coeffs())
    }

    /// Parses `key = value` lines. Keys: `ell`, `lambda1`, `lambda2`,
    /// `f_coeffs`, `uhat_coeffs`; coefficient lists are in ascending powers,
    /// separated by commas or whitespace. `#` starts a comment. Missing keys
    /// take the reference values.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut length = 1.0;
        let mut lambda1 = 0.4;
        let mut lambda2 = 0.2;
        let mut source = None;
        let mut target = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected key = value, got `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let scalar = |v: &str| {
                v.parse::<f64>().map_err(|e| Error::Config {
                    line,
                    message: format!("`{key}`: {e}"),
                })
            };
            match key {
                "ell" => length = scalar(value)?,
                "lambda1" => lambda1 = scalar(value)?,
                "lambda2" => lambda2 = scalar(value)?,
                "f_coeffs" => source = Some(parse_coeffs(value, line, key)?),
                "uhat_coeffs" => target = Some(parse_coeffs(value, line, key)?),
                other => {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        Self::new(
            length,
            lambda1,
            lambda2,
            source.unwrap_or_else(|| Polynomial::new(vec![0.0, 1.0])),
            target.unwrap_or_else(|| default_target(length)),
        )
    }
}

fn default_target(length: f64) -> Polynomial {
    Polynomial::new(vec![0.0, length, -1.0])
}

fn coeffs_close(a: &[f64], b: &[f64]) -> bool {
    let n = a.len().max(b.len());
    (0..n).all(|k| {
        let x = a.get(k).copied().unwrap_or(0.0);
        let y = b.get(k).copied().unwrap_or(0.0);
        (x - y).abs() <= 1e-14 * (1.0 + y.abs())
    })
}

fn parse_coeffs(value: &str, line: usize, key: &str) -> Result<Polynomial> {
    let coeffs = value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>().map_err(|e| Error::Config {
                line,
                message: format!("`{key}`: {e}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if coeffs.is_empty() {
        return Err(Error::Config {
            line,
            message: format!("`{key}` needs at least one coefficient"),
        });
    }
    Ok(Polynomial::new(coeffs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Material {
    First,
    Second,
}

/// Geometric arrangement of the two materials on `(0, ell)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaterialLayout {
    /// Material 1 on `(0, kappa)`, material 2 on `(kappa, ell)`.
    OneInterface { kappa: f64 },
    /// Material 2 on `(center - half_width, center + half_width)`, material 1 elsewhere.
    TwoInterface { center: f64, half_width: f64 },
    /// A single material everywhere.
    Homogeneous { material: Material },
}

impl MaterialLayout {
    pub fn validate(&self, length: f64) -> Result<()> {
        match *self {
            MaterialLayout::OneInterface { kappa } => {
                if !(kappa > 0.0 && kappa < length) {
                    return Err(Error::InvalidLayout(format!(
                        "interface {kappa} must lie strictly inside (0, {length})"
                    )));
                }
            }
            MaterialLayout::TwoInterface { center, half_width } => {
                if !(half_width > 0.0 && center - half_width > 0.0 && center + half_width < length)
                {
                    return Err(Error::InvalidLayout(format!(
                        "inclusion ({}, {}) must lie strictly inside (0, {length})",
                        center - half_width,
                        center + half_width
                    )));
                }
            }
            MaterialLayout::Homogeneous { .. } => {}
        }
        Ok(())
    }

    /// Interface coordinates in increasing order.
    pub fn interfaces(&self) -> Vec<f64> {
        match *self {
            MaterialLayout::OneInterface { kappa } => vec![kappa],
            MaterialLayout::TwoInterface { center, half_width } => {
                vec![center - half_width, center + half_width]
            }
            MaterialLayout::Homogeneous { .. } => Vec::new(),
        }
    }

    /// Diffusion coefficient at `x`. On an interface the side must be given.
    pub fn lambda_at(&self, data: &ProblemData, x: f64, side: Option<Side>) -> Result<f64> {
        if !(0.0..=data.length).contains(&x) {
            return Err(Error::OutsideDomain {
                x,
                len: data.length,
            });
        }
        let on_interface = self.interfaces().contains(&x);
        match (on_interface, side) {
            (false, _) => Ok(self.lambda_off_interface(data, x)),
            (true, None) => Err(Error::AmbiguousInterface { x }),
            (true, Some(Side::Left)) => Ok(self.lambda_off_interface(data, x - self.probe(data))),
            (true, Some(Side::Right)) => Ok(self.lambda_off_interface(data, x + self.probe(data))),
        }
    }

    fn probe(&self, data: &ProblemData) -> f64 {
        let gap = match *self {
            MaterialLayout::TwoInterface { half_width, .. } => half_width,
            _ => data.length,
        };
        0.5 * gap
    }

    /// Material at a point known not to be an interface.
    pub(crate) fn material_off_interface(&self, x: f64) -> Material {
        match *self {
            MaterialLayout::OneInterface { kappa } => {
                if x < kappa {
                    Material::First
                } else {
                    Material::Second
                }
            }
            MaterialLayout::TwoInterface { center, half_width } => {
                if (x - center).abs() < half_width {
                    Material::Second
                } else {
                    Material::First
                }
            }
            MaterialLayout::Homogeneous { material } => material,
        }
    }

    pub(crate) fn lambda_off_interface(&self, data: &ProblemData, x: f64) -> f64 {
        data.lambda(self.material_off_interface(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiscretizationMethod {
    Standard,
    Enriched,
}

impl fmt::Display for DiscretizationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiscretizationMethod::Standard => "standard",
            DiscretizationMethod::Enriched => "enriched",
        })
    }
}

impl FromStr for DiscretizationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" | "fem" => Ok(Self::Standard),
            "enriched" | "xfem" => Ok(Self::Enriched),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

/// What to evaluate of an enrichment function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnrichmentQuantity {
    Value,
    /// `d/dx`.
    Slope,
    /// `d/dkappa` of the value.
    KinkDerivative,
}

/// Global piecewise-linear tent with its kink at `kink`: `x / kink` on the
/// left, `(ell - x) / (ell - kink)` on the right.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Enrichment {
    kink: f64,
    length: f64,
}

impl Enrichment {
    pub fn new(kink: f64, length: f64) -> Result<Self> {
        if !(kink > 0.0 && kink < length) {
            return Err(Error::SingularEnrichment { kappa: kink });
        }
        Ok(Self { kink, length })
    }

    pub fn kink(&self) -> f64 {
        self.kink
    }

    pub fn value(&self, x: f64) -> f64 {
        if x <= self.kink {
            x / self.kink
        } else {
            (self.length - x) / (self.length - self.kink)
        }
    }

    pub fn left_slope(&self) -> f64 {
        1.0 / self.kink
    }

    pub fn right_slope(&self) -> f64 {
        -1.0 / (self.length - self.kink)
    }

    /// Slope at `x`; at the kink the side picks the one-sided value.
    pub fn slope(&self, x: f64, side: Side) -> f64 {
        let left = x < self.kink || (x == self.kink && side == Side::Left);
        if left {
            self.left_slope()
        } else {
            self.right_slope()
        }
    }

    /// Derivative of the value with respect to the kink position.
    pub fn kink_derivative(&self, x: f64) -> f64 {
        if x <= self.kink {
            -x / (self.kink * self.kink)
        } else {
            let r = self.length - self.kink;
            (self.length - x) / (r * r)
        }
    }

    /// Derivative of the slope with respect to the kink position, on the
    /// left (`x < kink`) or right piece.
    pub fn kink_derivative_of_slope(&self, left: bool) -> f64 {
        if left {
            -1.0 / (self.kink * self.kink)
        } else {
            let r = self.length - self.kink;
            -1.0 / (r * r)
        }
    }
}

/// Evaluates the enrichment function with kink `kappa` on `(0, ell)`.
pub fn enrichment_eval(
    kappa: f64,
    length: f64,
    x: f64,
    what: EnrichmentQuantity,
    side: Side,
) -> Result<f64> {
    let e = Enrichment::new(kappa, length)?;
    if !(0.0..=length).contains(&x) {
        return Err(Error::OutsideDomain { x, len: length });
    }
    Ok(match what {
        EnrichmentQuantity::Value => e.value(x),
        EnrichmentQuantity::Slope => e.slope(x, side),
        EnrichmentQuantity::KinkDerivative => e.kink_derivative(x),
    })
}
