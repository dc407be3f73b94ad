//! Random environments: a palette of site laws with sampling weights, and
//! realizations assigning a law to every site of a window.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::lattice::{GeneratorSet, Point, Window};
use super::law::{OffspringVector, SiteLaw};
use crate::error::{Error, Result};
use crate::rng::IndexedUniforms;

const WEIGHT_TOL: f64 = 1e-12;

/// The measure on site laws: a finite palette, its weights, and the
/// ellipticity bound used for the irreducibility condition.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentSpec {
    generator: GeneratorSet,
    palette: Vec<SiteLaw>,
    weights: Vec<f64>,
    epsilon: f64,
}

impl EnvironmentSpec {
    /// Validated spec. Every palette law must produce at least one offspring
    /// along each generating step with probability greater than `epsilon`.
    pub fn new(
        generator: GeneratorSet,
        palette: Vec<SiteLaw>,
        weights: Vec<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        let spec = Self::relaxed(generator, palette, weights, epsilon)?;
        spec.check_irreducibility()?;
        Ok(spec)
    }

    /// Like [`EnvironmentSpec::new`] but without the irreducibility
    /// condition, for degenerate fixtures such as pure drift or pure
    /// doubling laws.
    pub fn relaxed(
        generator: GeneratorSet,
        palette: Vec<SiteLaw>,
        weights: Vec<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        if palette.is_empty() {
            return Err(Error::config("palette is empty"));
        }
        if weights.len() != palette.len() {
            return Err(Error::config(format!(
                "{} weights for {} palette laws",
                weights.len(),
                palette.len()
            )));
        }
        validate_weights(&weights)?;
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::config("epsilon must be positive"));
        }
        for (i, law) in palette.iter().enumerate() {
            if law.n_steps() != generator.len() {
                return Err(Error::config(format!(
                    "palette law {i} has {} steps, generator has {}",
                    law.n_steps(),
                    generator.len()
                )));
            }
        }
        Ok(EnvironmentSpec {
            generator,
            palette,
            weights,
            epsilon,
        })
    }

    /// Spec with a single law (a homogeneous environment).
    pub fn homogeneous(generator: GeneratorSet, law: SiteLaw) -> Result<Self> {
        Self::relaxed(generator, vec![law], vec![1.0], 1e-12)
    }

    /// Checks that every palette law puts probability above `epsilon` on
    /// `{v_s >= 1}` for each generating step `s`.
    pub fn check_irreducibility(&self) -> Result<()> {
        for (i, law) in self.palette.iter().enumerate() {
            for &s in self.generator.gen_subset() {
                let p = law.prob_at_least_one(s);
                if p <= self.epsilon {
                    return Err(Error::config(format!(
                        "palette law {i} sends offspring along step {:?} with probability {p} <= epsilon {}",
                        self.generator.steps()[s],
                        self.epsilon
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn generator(&self) -> &GeneratorSet {
        &self.generator
    }

    pub fn palette(&self) -> &[SiteLaw] {
        &self.palette
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dimension(&self) -> usize {
        self.generator.dimension()
    }

    /// Draws `i.i.d.` palette indices for every site of `window`.
    pub fn sample(self: &Arc<Self>, window: Window, seed: u64) -> Result<EnvironmentRealization> {
        sample_environment(self, window, seed)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpecDocument = serde_json::from_str(text)?;
        doc.into_spec()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpecDocument::from_spec(self)).expect("serializable")
    }
}

fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::config("weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::config(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Draws a realization on `window`: the law at the site of lexicographic rank
/// `r` is chosen from the weights with the `r`-th uniform of the seeded stream.
pub fn sample_environment(
    spec: &Arc<EnvironmentSpec>,
    window: Window,
    seed: u64,
) -> Result<EnvironmentRealization> {
    validate_weights(&spec.weights)?;
    if window.dimension() != spec.dimension() {
        return Err(Error::config("window dimension does not match spec"));
    }
    let mut cumulative = Vec::with_capacity(spec.weights.len());
    let mut acc = 0.0;
    for w in &spec.weights {
        acc += w;
        cumulative.push(acc);
    }
    // the last law with positive mass absorbs rounding in the cumulative sum
    let last = spec
        .weights
        .iter()
        .rposition(|&w| w > 0.0)
        .expect("weights sum to one");
    let mut uniforms = IndexedUniforms::new(seed);
    let assignment = (0..window.len())
        .map(|r| {
            let u = uniforms.at(r as u64);
            cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(last)
                .min(last) as u32
        })
        .collect();
    Ok(EnvironmentRealization {
        spec: Arc::clone(spec),
        window,
        assignment,
        seed: Some(seed),
    })
}

/// A law index for every site of a window.
#[derive(Clone, Debug)]
pub struct EnvironmentRealization {
    spec: Arc<EnvironmentSpec>,
    window: Window,
    assignment: Vec<u32>,
    seed: Option<u64>,
}

impl EnvironmentRealization {
    pub fn from_assignment(
        spec: Arc<EnvironmentSpec>,
        window: Window,
        assignment: Vec<u32>,
    ) -> Result<Self> {
        if window.dimension() != spec.dimension() {
            return Err(Error::config("window dimension does not match spec"));
        }
        if assignment.len() != window.len() {
            return Err(Error::config(format!(
                "assignment covers {} sites, window has {}",
                assignment.len(),
                window.len()
            )));
        }
        if let Some(&bad) = assignment.iter().find(|&&a| a as usize >= spec.palette.len()) {
            return Err(Error::config(format!("palette index {bad} out of range")));
        }
        Ok(EnvironmentRealization {
            spec,
            window,
            assignment,
            seed: None,
        })
    }

    /// Every site gets palette law `law`.
    pub fn homogeneous(spec: Arc<EnvironmentSpec>, window: Window, law: usize) -> Result<Self> {
        let n = window.len();
        Self::from_assignment(spec, window, vec![law as u32; n])
    }

    pub fn spec(&self) -> &Arc<EnvironmentSpec> {
        &self.spec
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn law_index(&self, rank: usize) -> usize {
        self.assignment[rank] as usize
    }

    pub fn law_at_rank(&self, rank: usize) -> &SiteLaw {
        &self.spec.palette[self.assignment[rank] as usize]
    }

    pub fn law_at(&self, site: &[i64]) -> Option<&SiteLaw> {
        self.window.rank(site).map(|r| self.law_at_rank(r))
    }
}

/// On-disk JSON form of an [`EnvironmentSpec`].
///
/// Atom counts are either a dense array aligned with `steps`, or an object
/// keyed by the comma-joined step coordinates (`{"1": 2, "-1": 1}`).
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub dimension: usize,
    pub steps: Vec<Point>,
    pub gen_subset: Vec<Point>,
    pub epsilon: f64,
    pub palette: Vec<LawDocument>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawDocument {
    pub atoms: Vec<AtomDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDocument {
    pub counts: CountsDocument,
    pub prob: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CountsDocument {
    Dense(Vec<u32>),
    ByStep(BTreeMap<String, u32>),
}

impl SpecDocument {
    pub fn into_spec(self) -> Result<EnvironmentSpec> {
        let generator = GeneratorSet::new(self.dimension, self.steps, &self.gen_subset)?;
        let n = generator.len();
        let mut palette = Vec::with_capacity(self.palette.len());
        for (li, law) in self.palette.into_iter().enumerate() {
            let mut atoms = Vec::with_capacity(law.atoms.len());
            for atom in law.atoms {
                let v = match atom.counts {
                    CountsDocument::Dense(dense) => {
                        if dense.len() != n {
                            return Err(Error::config(format!(
                                "law {li}: dense counts have length {}, expected {n}",
                                dense.len()
                            )));
                        }
                        OffspringVector::from_dense(&dense)
                    }
                    CountsDocument::ByStep(map) => {
                        let mut dense = vec![0u32; n];
                        for (key, c) in map {
                            let step = parse_step(&key)?;
                            let idx = generator.index_of(&step).ok_or_else(|| {
                                Error::config(format!("law {li}: unknown step {key:?}"))
                            })?;
                            dense[idx] += c;
                        }
                        OffspringVector::from_dense(&dense)
                    }
                };
                atoms.push((v, atom.prob));
            }
            palette.push(
                SiteLaw::new(n, atoms).map_err(|e| Error::config(format!("law {li}: {e}")))?,
            );
        }
        EnvironmentSpec::new(generator, palette, self.weights, self.epsilon)
    }

    pub fn from_spec(spec: &EnvironmentSpec) -> Self {
        let n = spec.generator.len();
        SpecDocument {
            dimension: spec.dimension(),
            steps: spec.generator.steps().to_vec(),
            gen_subset: spec
                .generator
                .gen_subset()
                .iter()
                .map(|&i| spec.generator.steps()[i].clone())
                .collect(),
            epsilon: spec.epsilon,
            palette: spec
                .palette
                .iter()
                .map(|law| LawDocument {
                    atoms: law
                        .atoms()
                        .iter()
                        .map(|(v, p)| {
                            let mut dense = vec![0; n];
                            for &(s, c) in v.counts() {
                                dense[s] = c;
                            }
                            AtomDocument {
                                counts: CountsDocument::Dense(dense),
                                prob: *p,
                            }
                        })
                        .collect(),
                })
                .collect(),
            weights: spec.weights.clone(),
        }
    }
}

fn parse_step(key: &str) -> Result<Point> {
    key.split(',')
        .map(|c| {
            c.trim()
                .parse::<i64>()
                .map_err(|_| Error::config(format!("cannot parse step {key:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_law_spec(weights: Vec<f64>) -> Arc<EnvironmentSpec> {
        let g = GeneratorSet::nearest_neighbour(1);
        let a = SiteLaw::branching_walk_with_mean(&[0.5, 0.5], 1.0).unwrap();
        let b = SiteLaw::branching_walk_with_mean(&[0.7, 0.3], 1.5).unwrap();
        Arc::new(EnvironmentSpec::new(g, vec![a, b], weights, 0.01).unwrap())
    }

    #[test]
    fn single_law_palette_is_constant() {
        let g = GeneratorSet::nearest_neighbour(1);
        let law = SiteLaw::branching_walk_with_mean(&[0.5, 0.5], 1.2).unwrap();
        let spec = Arc::new(EnvironmentSpec::new(g, vec![law], vec![1.0], 0.1).unwrap());
        let w = Window::new(1, 20).unwrap();
        for seed in [0, 1, 99] {
            let env = spec.sample(w, seed).unwrap();
            assert!(env.assignment().iter().all(|&a| a == 0));
        }
    }

    #[test]
    fn zero_weight_law_is_never_drawn() {
        let spec = two_law_spec(vec![1.0, 0.0]);
        let env = spec.sample(Window::new(1, 40).unwrap(), 3).unwrap();
        assert!(env.assignment().iter().all(|&a| a == 0));
        let spec = two_law_spec(vec![0.0, 1.0]);
        let env = spec.sample(Window::new(1, 40).unwrap(), 3).unwrap();
        assert!(env.assignment().iter().all(|&a| a == 1));
    }

    #[test]
    fn fair_weights_give_binomial_frequency() {
        let spec = two_law_spec(vec![0.5, 0.5]);
        // 10_001 sites
        let env = spec.sample(Window::new(1, 5000).unwrap(), 2024).unwrap();
        let zeros = env.assignment().iter().filter(|&&a| a == 0).count() as f64;
        let freq = zeros / env.assignment().len() as f64;
        assert!((freq - 0.5).abs() < 0.02, "frequency {freq}");
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let spec = two_law_spec(vec![0.3, 0.7]);
        let w = Window::new(1, 64).unwrap();
        let a = spec.sample(w, 11).unwrap();
        let b = spec.sample(w, 11).unwrap();
        let c = spec.sample(w, 12).unwrap();
        assert_eq!(a.assignment(), b.assignment());
        assert_ne!(a.assignment(), c.assignment());
        assert_eq!(a.seed(), Some(11));
    }

    #[test]
    fn invalid_weights_rejected() {
        let g = GeneratorSet::nearest_neighbour(1);
        let law = SiteLaw::branching_walk_with_mean(&[0.5, 0.5], 1.0).unwrap();
        assert!(EnvironmentSpec::new(g.clone(), vec![law.clone()], vec![0.9], 0.1).is_err());
        assert!(
            EnvironmentSpec::new(g.clone(), vec![law.clone(), law.clone()], vec![1.5, -0.5], 0.1)
                .is_err()
        );
        assert!(EnvironmentSpec::new(g, vec![law], vec![1.0], 0.0).is_err());
    }

    #[test]
    fn irreducibility_condition_enforced() {
        let g = GeneratorSet::nearest_neighbour(1);
        let drift = SiteLaw::deterministic(2, OffspringVector::new([(0, 1)]).unwrap()).unwrap();
        assert!(EnvironmentSpec::new(g.clone(), vec![drift.clone()], vec![1.0], 0.1).is_err());
        assert!(EnvironmentSpec::relaxed(g.clone(), vec![drift], vec![1.0], 0.1).is_ok());
        // P(v_{-1} >= 1) = 0.5 * 0.8 = 0.4
        let law = SiteLaw::branching_walk_with_mean(&[0.2, 0.8], 1.0).unwrap();
        assert!(EnvironmentSpec::new(g.clone(), vec![law.clone()], vec![1.0], 0.19).is_ok());
        assert!(EnvironmentSpec::new(g, vec![law], vec![1.0], 0.2).is_err());
    }

    #[test]
    fn json_both_count_forms() {
        let text = r#"{
            "dimension": 1,
            "steps": [[1], [-1]],
            "gen_subset": [[1], [-1]],
            "epsilon": 0.1,
            "palette": [
                {"atoms": [{"counts": [1, 1], "prob": 0.5}, {"counts": {"1": 1}, "prob": 0.25},
                           {"counts": {"-1": 1}, "prob": 0.25}]}
            ],
            "weights": [1.0]
        }"#;
        let spec = EnvironmentSpec::from_json(text).unwrap();
        assert_eq!(spec.palette()[0].mean(), &[0.75, 0.75]);
        let again = EnvironmentSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(again, spec);
        assert!(EnvironmentSpec::from_json(&text.replace("\"-1\"", "\"2\"")).is_err());
        assert!(EnvironmentSpec::from_json(&text.replace("[1.0]", "[0.5]")).is_err());
    }
}
