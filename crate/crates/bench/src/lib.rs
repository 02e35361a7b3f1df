//! Shared fixtures for the benchmarks under `benches/`.

use powermix::{DistributionSpec, MixtureSpec};

pub fn uniform01() -> DistributionSpec {
    DistributionSpec::uniform(0.0, 1.0).unwrap()
}

/// TSP mixture of two uniform(0, 1) components.
pub fn uniform_tsp(n: f64) -> MixtureSpec {
    MixtureSpec::tsp(n, uniform01(), uniform01()).unwrap()
}

/// Directed mixture of uniform(-1, 1) and arcsin(-1, 1).
pub fn uniform_arcsin(n: f64) -> MixtureSpec {
    MixtureSpec::directed(
        n,
        DistributionSpec::uniform(-1.0, 1.0).unwrap(),
        DistributionSpec::arcsin(-1.0, 1.0).unwrap(),
    )
    .unwrap()
}

/// TSP mixture of beta(1, 2) components with a beta(3, 1) weight.
pub fn beta_weighted() -> MixtureSpec {
    let b = DistributionSpec::beta(1.0, 2.0).unwrap();
    MixtureSpec::tsp_with_weight(DistributionSpec::beta(3.0, 1.0).unwrap(), b, b).unwrap()
}
