//! Offspring vectors and per-site substitution laws.

use crate::error::{Error, Result};

const PROB_TOL: f64 = 1e-12;

/// One branching outcome: how many offspring a particle sends along each step.
///
/// Stored sparsely as `(step index, count)` pairs sorted by step index, with
/// zero counts dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OffspringVector {
    counts: Vec<(usize, u32)>,
}

impl OffspringVector {
    /// A vector with at least one offspring.
    pub fn new(counts: impl IntoIterator<Item = (usize, u32)>) -> Result<Self> {
        let v = Self::from_counts(counts);
        if v.total() == 0 {
            return Err(Error::config(
                "offspring vector must produce at least one particle",
            ));
        }
        Ok(v)
    }

    /// The empty outcome: the particle dies without offspring. Needed for
    /// laws whose mean offspring number is below one.
    pub fn extinction() -> Self {
        OffspringVector { counts: Vec::new() }
    }

    /// Dense counts aligned with the step list; all-zero gives [`Self::extinction`].
    pub fn from_dense(dense: &[u32]) -> Self {
        Self::from_counts(dense.iter().copied().enumerate())
    }

    fn from_counts(counts: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut counts: Vec<(usize, u32)> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        counts.sort_unstable();
        // merge repeated step indices
        counts.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        OffspringVector { counts }
    }

    pub fn counts(&self) -> &[(usize, u32)] {
        &self.counts
    }

    pub fn count(&self, step: usize) -> u32 {
        self.counts
            .iter()
            .find(|&&(s, _)| s == step)
            .map_or(0, |&(_, c)| c)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn is_extinction(&self) -> bool {
        self.counts.is_empty()
    }
}

/// A finite-support probability law over offspring vectors at one site,
/// carrying its mean vector `m(s) = Σ_v ω(v) v_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteLaw {
    atoms: Vec<(OffspringVector, f64)>,
    mean: Vec<f64>,
}

impl SiteLaw {
    /// Builds a law over `n_steps` steps. Probabilities must be strictly
    /// positive and sum to one within `1e-12`.
    pub fn new(n_steps: usize, atoms: Vec<(OffspringVector, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::config("site law has no atoms"));
        }
        let mut total = 0.0;
        for (v, p) in &atoms {
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::config(format!(
                    "atom probability {p} is not strictly positive"
                )));
            }
            if let Some(&(s, _)) = v.counts().iter().find(|&&(s, _)| s >= n_steps) {
                return Err(Error::config(format!(
                    "offspring vector refers to step {s}, only {n_steps} steps"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::config(format!(
                "atom probabilities sum to {total}, not 1"
            )));
        }
        let mean = mean_of(n_steps, &atoms);
        Ok(SiteLaw { atoms, mean })
    }

    /// A law that always produces the same offspring vector.
    pub fn deterministic(n_steps: usize, v: OffspringVector) -> Result<Self> {
        SiteLaw::new(n_steps, vec![(v, 1.0)])
    }

    /// Independent branching and movement: a particle has `k` children with
    /// probability `offspring[k]`, and each child independently takes step
    /// `s` with probability `movement[s]`. The resulting law is the mixture of
    /// multinomials `Σ_k μ_k Mult(k; movement)`.
    pub fn branching_walk(offspring: &[f64], movement: &[f64]) -> Result<Self> {
        let msum: f64 = movement.iter().sum();
        if movement.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (msum - 1.0).abs() > PROB_TOL {
            return Err(Error::config("movement probabilities must form a distribution"));
        }
        let active: Vec<usize> = (0..movement.len()).filter(|&s| movement[s] > 0.0).collect();
        let mut atoms = Vec::new();
        for (k, &mu) in offspring.iter().enumerate() {
            if mu < 0.0 || !mu.is_finite() {
                return Err(Error::config("offspring probabilities must be non-negative"));
            }
            if mu == 0.0 {
                continue;
            }
            if k == 0 {
                atoms.push((OffspringVector::extinction(), mu));
                continue;
            }
            let mut parts = vec![0u32; active.len()];
            compositions(k as u32, 0, &mut parts, &mut |parts| {
                let mut p = mu * multinomial(k as u32, parts);
                for (i, &n) in parts.iter().enumerate() {
                    p *= movement[active[i]].powi(n as i32);
                }
                if p > 0.0 {
                    let v = OffspringVector::from_counts(
                        parts.iter().enumerate().map(|(i, &n)| (active[i], n)),
                    );
                    atoms.push((v, p));
                }
            });
        }
        // renormalize away rounding in the multinomial weights
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "offspring probabilities sum to {total}, not 1"
            )));
        }
        for (_, p) in atoms.iter_mut() {
            *p /= total;
        }
        SiteLaw::new(movement.len(), atoms)
    }

    /// Branching walk with offspring number in `{0, 1}` (mean ≤ 1) or
    /// `{1, 2}` (mean in `(1, 2]`) so that the total mean is `mean`.
    pub fn branching_walk_with_mean(movement: &[f64], mean: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&mean) {
            return Err(Error::config(format!(
                "mean offspring {mean} outside [0, 2]"
            )));
        }
        let offspring = if mean <= 1.0 {
            vec![1.0 - mean, mean]
        } else {
            vec![0.0, 2.0 - mean, mean - 1.0]
        };
        SiteLaw::branching_walk(&offspring, movement)
    }

    pub fn atoms(&self) -> &[(OffspringVector, f64)] {
        &self.atoms
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn n_steps(&self) -> usize {
        self.mean.len()
    }

    /// `Σ_s m(s)`, the mean total number of offspring.
    pub fn total_mean(&self) -> f64 {
        self.mean.iter().sum()
    }

    /// Recomputes the mean vector from the atoms.
    pub fn recomputed_mean(&self) -> Vec<f64> {
        mean_of(self.mean.len(), &self.atoms)
    }

    /// Probability of producing at least one offspring along `step`.
    pub fn prob_at_least_one(&self, step: usize) -> f64 {
        self.atoms
            .iter()
            .filter(|(v, _)| v.count(step) >= 1)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn can_go_extinct(&self) -> bool {
        self.atoms.iter().any(|(v, _)| v.is_extinction())
    }
}

fn mean_of(n_steps: usize, atoms: &[(OffspringVector, f64)]) -> Vec<f64> {
    let mut mean = vec![0.0; n_steps];
    for (v, p) in atoms {
        for &(s, c) in v.counts() {
            mean[s] += p * c as f64;
        }
    }
    mean
}

fn compositions(remaining: u32, pos: usize, parts: &mut [u32], f: &mut impl FnMut(&[u32])) {
    if pos + 1 == parts.len() {
        parts[pos] = remaining;
        f(parts);
        return;
    }
    if parts.is_empty() {
        return;
    }
    for n in 0..=remaining {
        parts[pos] = n;
        compositions(remaining - n, pos + 1, parts, f);
    }
}

fn multinomial(k: u32, parts: &[u32]) -> f64 {
    let ln_fact = |n: u32| (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
    (ln_fact(k) - parts.iter().map(|&n| ln_fact(n)).sum::<f64>())
        .exp()
        .round()
}
