//! Block assembly of stiffness, mass, load and tracking terms.

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};
use crate::problem::{DiscretizationMethod, Enrichment, MaterialLayout, ProblemData};
use crate::quadrature::{partition, GaussLegendre};
use crate::spline::SplineSpace;

/// Block-structured discrete system. For the standard method the enrichment
/// blocks have zero columns/rows.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub space: SplineSpace,
    pub data: ProblemData,
    pub layout: MaterialLayout,
    pub method: DiscretizationMethod,
    pub enrichments: Vec<Enrichment>,
    pub k_ss: DenseMatrix,
    pub k_se: DenseMatrix,
    pub k_ee: DenseMatrix,
    pub m_ss: DenseMatrix,
    pub m_se: DenseMatrix,
    pub m_ee: DenseMatrix,
    pub f_s: Vec<f64>,
    pub f_e: Vec<f64>,
    pub m_s: Vec<f64>,
    pub m_e: Vec<f64>,
    /// `int uhat^2 dx`.
    pub c_uhat: f64,
}

impl AssembledSystem {
    pub fn n_s(&self) -> usize {
        self.f_s.len()
    }

    pub fn n_e(&self) -> usize {
        self.f_e.len()
    }

    pub fn dim(&self) -> usize {
        self.n_s() + self.n_e()
    }

    pub fn stiffness(&self) -> DenseMatrix {
        join_blocks(&self.k_ss, &self.k_se, &self.k_ee)
    }

    pub fn mass(&self) -> DenseMatrix {
        join_blocks(&self.m_ss, &self.m_se, &self.m_ee)
    }

    pub fn load(&self) -> Vec<f64> {
        [self.f_s.as_slice(), &self.f_e].concat()
    }

    pub fn tracking(&self) -> Vec<f64> {
        [self.m_s.as_slice(), &self.m_e].concat()
    }

    /// `u^T M u - 2 u^T m`, plus `int uhat^2` when `include_constant` is set,
    /// in which case the value equals `int (u_h - uhat)^2 dx`.
    pub fn objective_value(&self, u: &[f64], include_constant: bool) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.len(),
            });
        }
        let quad = self.mass().bilinear(u, u)? - 2.0 * dot(u, &self.tracking());
        Ok(if include_constant {
            quad + self.c_uhat
        } else {
            quad
        })
    }
}

/// `[[A, B], [B^T, C]]`.
pub(crate) fn join_blocks(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> DenseMatrix {
    let ns = a.rows();
    let ne = c.rows();
    let mut out = DenseMatrix::zeros(ns + ne, ns + ne);
    for i in 0..ns {
        for j in 0..ns {
            out[(i, j)] = a[(i, j)];
        }
        for j in 0..ne {
            out[(i, ns + j)] = b[(i, j)];
            out[(ns + j, i)] = b[(i, j)];
        }
    }
    for i in 0..ne {
        for j in 0..ne {
            out[(ns + i, ns + j)] = c[(i, j)];
        }
    }
    out
}

/// Gauss points per piece: at least `p + 2`, more if the data polynomials need it.
pub(crate) fn points_per_piece(space: &SplineSpace, data: &ProblemData) -> usize {
    let p = space.degree();
    let df = data.source.degree();
    let du = data.target.degree();
    let max_deg = (2 * p + 2).max(p + 1 + df).max(p + 1 + du).max(2 * du);
    (p + 2).max(GaussLegendre::points_for_degree(max_deg))
}

pub fn assemble(
    space: &SplineSpace,
    data: &ProblemData,
    layout: &MaterialLayout,
    method: DiscretizationMethod,
) -> Result<AssembledSystem> {
    assemble_with_splits(space, data, layout, method, &[])
}

/// As [`assemble`], with additional quadrature split points.
pub fn assemble_with_splits(
    space: &SplineSpace,
    data: &ProblemData,
    layout: &MaterialLayout,
    method: DiscretizationMethod,
    extra_splits: &[f64],
) -> Result<AssembledSystem> {
    layout.validate(data.length)?;
    let interfaces = layout.interfaces();
    let kinks = match method {
        DiscretizationMethod::Standard => Vec::new(),
        DiscretizationMethod::Enriched => {
            if interfaces.is_empty() {
                return Err(Error::NoInterfaceToEnrich);
            }
            if space.degree() == 1 {
                if let Some(&k) = interfaces.iter().find(|&&k| space.knot_index(k).is_some()) {
                    return Err(Error::Unsupported(format!(
                        "an enrichment kink off the knots of a linear space (kink {k} is a knot, \
                         so the tent is already in the spline space)"
                    )));
                }
            }
            interfaces.clone()
        }
    };
    assemble_with_kinks(space, data, layout, &kinks, extra_splits)
}

/// Assembles with one tent enrichment per entry of `kinks`, independent of
/// the layout's interfaces. No linear-independence check is made, so the
/// result may be singular. An empty `kinks` gives the standard system.
pub fn assemble_with_kinks(
    space: &SplineSpace,
    data: &ProblemData,
    layout: &MaterialLayout,
    kinks: &[f64],
    extra_splits: &[f64],
) -> Result<AssembledSystem> {
    if (space.length() - data.length).abs() > 1e-14 * data.length {
        return Err(Error::InvalidParameter(format!(
            "space length {} differs from problem length {}",
            space.length(),
            data.length
        )));
    }
    layout.validate(data.length)?;
    let method = if kinks.is_empty() {
        DiscretizationMethod::Standard
    } else {
        DiscretizationMethod::Enriched
    };
    let enrichments = kinks
        .iter()
        .map(|&k| Enrichment::new(k, data.length))
        .collect::<Result<Vec<_>>>()?;
    let interfaces = layout.interfaces();

    let ns = space.dim();
    let ne = enrichments.len();
    let mut sys = AssembledSystem {
        space: space.clone(),
        data: data.clone(),
        layout: *layout,
        method,
        enrichments: enrichments.clone(),
        k_ss: DenseMatrix::zeros(ns, ns),
        k_se: DenseMatrix::zeros(ns, ne),
        k_ee: DenseMatrix::zeros(ne, ne),
        m_ss: DenseMatrix::zeros(ns, ns),
        m_se: DenseMatrix::zeros(ns, ne),
        m_ee: DenseMatrix::zeros(ne, ne),
        f_s: vec![0.0; ns],
        f_e: vec![0.0; ne],
        m_s: vec![0.0; ns],
        m_e: vec![0.0; ne],
        c_uhat: 0.0,
    };

    let mut splits = interfaces;
    splits.extend_from_slice(kinks);
    splits.extend_from_slice(extra_splits);
    let rule = GaussLegendre::new(points_per_piece(space, data));
    let mut idx = Vec::with_capacity(space.degree() + 1);
    let mut ev = vec![0.0; ne];
    let mut es = vec![0.0; ne];

    for piece in partition(space, &splits) {
        let lambda = layout.lambda_off_interface(data, piece.midpoint());
        rule.for_each(piece.a, piece.b, |x, w| {
            let lb = space.local_basis(piece.element, x);
            idx.clear();
            for r in 0..lb.len {
                if let Some(i) = space.retained_index(lb.first + r) {
                    idx.push((i, lb.values[r], lb.derivs[r]));
                }
            }
            let f = data.source.eval(x);
            let uh = data.target.eval(x);
            for (j, e) in enrichments.iter().enumerate() {
                ev[j] = e.value(x);
                es[j] = if x < e.kink() {
                    e.left_slope()
                } else {
                    e.right_slope()
                };
            }
            for &(i, vi, di) in &idx {
                for &(j, vj, dj) in &idx {
                    sys.k_ss[(i, j)] += w * lambda * di * dj;
                    sys.m_ss[(i, j)] += w * vi * vj;
                }
                for j in 0..ne {
                    sys.k_se[(i, j)] += w * lambda * di * es[j];
                    sys.m_se[(i, j)] += w * vi * ev[j];
                }
                sys.f_s[i] += w * f * vi;
                sys.m_s[i] += w * uh * vi;
            }
            for j in 0..ne {
                for l in 0..ne {
                    sys.k_ee[(j, l)] += w * lambda * es[j] * es[l];
                    sys.m_ee[(j, l)] += w * ev[j] * ev[l];
                }
                sys.f_e[j] += w * f * ev[j];
                sys.m_e[j] += w * uh * ev[j];
            }
            sys.c_uhat += w * uh * uh;
        });
    }
    Ok(sys)
}
