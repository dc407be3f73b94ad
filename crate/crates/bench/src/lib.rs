//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use bmclab_core::{EnvironmentRealization, EnvironmentSpec, GeneratorSet, SiteLaw, Window};

/// Two-law i.i.d. palette on `Z` with `c = 1.2`.
pub fn recurrent_spec() -> Arc<EnvironmentSpec> {
    Arc::new(
        EnvironmentSpec::new(
            GeneratorSet::nearest_neighbour(1),
            vec![
                SiteLaw::branching_walk_with_mean(&[0.5, 0.5], 1.2).unwrap(),
                SiteLaw::branching_walk_with_mean(&[0.7, 0.3], 1.4).unwrap(),
            ],
            vec![0.5, 0.5],
            0.05,
        )
        .unwrap(),
    )
}

/// Homogeneous nearest-neighbour walk on `Z^d` with mean offspring `mean`.
pub fn lattice_spec(dimension: usize, mean: f64) -> Arc<EnvironmentSpec> {
    let g = GeneratorSet::nearest_neighbour(dimension);
    let p = vec![1.0 / g.len() as f64; g.len()];
    Arc::new(EnvironmentSpec::homogeneous(g, SiteLaw::branching_walk_with_mean(&p, mean).unwrap()).unwrap())
}

/// A realization of `spec` on `[-l, l]^d`.
pub fn realization(spec: &Arc<EnvironmentSpec>, l: i64, seed: u64) -> EnvironmentRealization {
    spec.sample(Window::new(spec.generator().dimension(), l).unwrap(), seed).unwrap()
}
