//! Fixtures shared by the benchmarks.

use sensi1d::{DiscretizationMethod, ProblemData, SplineSpace};

pub fn space(degree: usize, elements: usize) -> SplineSpace {
    SplineSpace::new(degree, elements, 1.0).expect("valid space")
}

pub fn data() -> ProblemData {
    ProblemData::default()
}

pub const METHODS: [DiscretizationMethod; 2] =
    [DiscretizationMethod::Standard, DiscretizationMethod::Enriched];
