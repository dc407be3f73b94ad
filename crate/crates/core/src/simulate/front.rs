use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::kernel::{EnvironmentRealization, SiteLaw};

/// Particle counts by site rank at one generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParticleFront {
    pub generation: u32,
    counts: BTreeMap<usize, u64>,
}

/// A particle left the window of the environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowExhausted {
    pub generation: u32,
}

impl ParticleFront {
    pub fn single(rank: usize) -> Self {
        Self::from_counts(0, [(rank, 1)])
    }

    pub fn from_counts(generation: u32, counts: impl IntoIterator<Item = (usize, u64)>) -> Self {
        let mut map = BTreeMap::new();
        for (r, c) in counts {
            if c > 0 {
                *map.entry(r).or_insert(0) += c;
            }
        }
        ParticleFront {
            generation,
            counts: map,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().fold(0u64, |a, &c| a.saturating_add(c))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count_at(&self, rank: usize) -> u64 {
        self.counts.get(&rank).copied().unwrap_or(0)
    }

    /// Removes and returns the particles at `rank`.
    pub fn take(&mut self, rank: usize) -> u64 {
        self.counts.remove(&rank).unwrap_or(0)
    }

    /// Occupied sites in increasing rank order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&r, &c)| (r, c))
    }
}

/// Splits `n` trials over the atoms of `law` (sequential binomials).
fn multinomial<R: Rng + ?Sized>(n: u64, law: &SiteLaw, rng: &mut R, out: &mut Vec<u64>) {
    out.clear();
    let atoms = law.atoms();
    let mut left = n;
    let mut mass = 1.0;
    for (j, (_, p)) in atoms.iter().enumerate() {
        if left == 0 {
            out.push(0);
            continue;
        }
        let c = if j + 1 == atoms.len() {
            left
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        out.push(c);
        left -= c;
        mass -= p;
    }
}

/// One generation: each particle at `x` draws an offspring vector from the
/// law at `x` and deposits its children at `x + s`.
pub fn step_front<R: Rng + ?Sized>(
    front: &ParticleFront,
    env: &EnvironmentRealization,
    rng: &mut R,
) -> Result<ParticleFront, WindowExhausted> {
    let window = env.window();
    let steps = env.spec().generator().steps();
    let exhausted = WindowExhausted {
        generation: front.generation + 1,
    };
    let mut next: BTreeMap<usize, u64> = BTreeMap::new();
    let mut split = Vec::new();
    for (rank, n) in front.iter() {
        if rank >= window.len() {
            return Err(exhausted);
        }
        let law = env.law_at_rank(rank);
        multinomial(n, law, rng, &mut split);
        for ((v, _), &c) in law.atoms().iter().zip(&split) {
            if c == 0 {
                continue;
            }
            for &(s, k) in v.counts() {
                let target = window.shift(rank, &steps[s]).ok_or(exhausted)?;
                let e = next.entry(target).or_insert(0);
                *e = e.saturating_add(c.saturating_mul(k as u64));
            }
        }
    }
    Ok(ParticleFront {
        generation: front.generation + 1,
        counts: next,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{EnvironmentSpec, GeneratorSet, OffspringVector, Window};
    use crate::rng::replica_rng;
    use std::sync::Arc;

    fn env(law: SiteLaw, l: i64) -> EnvironmentRealization {
        let spec = Arc::new(EnvironmentSpec::homogeneous(GeneratorSet::nearest_neighbour(1), law).unwrap());
        let w = Window::new(1, l).unwrap();
        EnvironmentRealization::homogeneous(spec, w, 0).unwrap()
    }

    // steps of the 1-d nearest-neighbour set are [+1, -1]
    #[test]
    fn deterministic_shift() {
        let law = SiteLaw::deterministic(2, OffspringVector::new([(0, 1)]).unwrap()).unwrap();
        let e = env(law, 3);
        let o = e.window().origin_rank();
        let mut rng = replica_rng(1, 0);
        let f = step_front(&ParticleFront::single(o), &e, &mut rng).unwrap();
        assert_eq!(f.iter().collect::<Vec<_>>(), vec![(o + 1, 1)]);
        assert_eq!(f.generation, 1);
    }

    #[test]
    fn exhaustion_is_reported() {
        let law = SiteLaw::deterministic(2, OffspringVector::new([(0, 1)]).unwrap()).unwrap();
        let e = env(law, 1);
        let mut rng = replica_rng(1, 0);
        let f = ParticleFront::single(e.window().origin_rank());
        let f = step_front(&f, &e, &mut rng).unwrap();
        assert_eq!(step_front(&f, &e, &mut rng), Err(WindowExhausted { generation: 2 }));
    }

    #[test]
    fn multinomial_conserves_trials() {
        let law = SiteLaw::branching_walk_with_mean(&[0.3, 0.7], 1.4).unwrap();
        let mut rng = replica_rng(3, 0);
        let mut out = Vec::new();
        for n in [0u64, 1, 17, 1_000_000_000_000] {
            multinomial(n, &law, &mut rng, &mut out);
            assert_eq!(out.iter().sum::<u64>(), n);
            assert_eq!(out.len(), law.atoms().len());
        }
    }
}
