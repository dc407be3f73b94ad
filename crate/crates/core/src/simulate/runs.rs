use rand::Rng;
use serde::Serialize;

use super::front::{step_front, ParticleFront};
use crate::kernel::EnvironmentRealization;

/// One realization of the process in which particles reaching the origin
/// stay there forever. `trajectory[n]` is the frozen count after generation
/// `n`; `q[n]`, when requested, is `Σ f(x_i(n))` over all particles
/// (frozen ones included).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrozenRun {
    pub origin: usize,
    pub trajectory: Vec<u64>,
    pub nu: u64,
    pub capped: bool,
    pub exhausted: bool,
    pub q: Option<Vec<f64>>,
}

/// Return count at the origin of the ordinary process.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReturnRun {
    pub returns: u64,
    pub generations: u32,
    pub capped: bool,
    pub exhausted: bool,
}

fn q_value(front: &ParticleFront, frozen: u64, origin: usize, f: &[f64]) -> f64 {
    front.iter().map(|(r, c)| f[r] * c as f64).sum::<f64>() + frozen as f64 * f[origin]
}

/// Runs the frozen-origin process from one particle at `origin` for at most
/// `horizon` generations.
///
/// The starting particle reproduces like in the ordinary process; every
/// particle found at the origin at a later generation is frozen. A run
/// whose population (active plus frozen) exceeds `cap` stops with `nu = cap`.
/// `f` must be indexed by window rank.
pub fn run_frozen<R: Rng + ?Sized>(
    env: &EnvironmentRealization,
    origin: usize,
    horizon: u32,
    cap: u64,
    rng: &mut R,
    f: Option<&[f64]>,
) -> FrozenRun {
    let mut front = ParticleFront::single(origin);
    let mut frozen = 0u64;
    let mut trajectory = vec![0];
    let mut q = f.map(|f| vec![q_value(&front, 0, origin, f)]);
    let (mut capped, mut exhausted) = (false, false);
    for _ in 0..horizon {
        front = match step_front(&front, env, rng) {
            Ok(next) => next,
            Err(_) => {
                exhausted = true;
                break;
            }
        };
        frozen = frozen.saturating_add(front.take(origin));
        trajectory.push(frozen);
        if let (Some(q), Some(f)) = (q.as_mut(), f) {
            q.push(q_value(&front, frozen, origin, f));
        }
        if front.total().saturating_add(frozen) > cap {
            capped = true;
            break;
        }
        if front.is_empty() {
            break;
        }
    }
    FrozenRun {
        origin,
        trajectory,
        nu: if capped { cap } else { frozen },
        capped,
        exhausted,
        q,
    }
}

/// Counts `Σ_{1≤n≤horizon} #{particles at origin at generation n}` for the
/// ordinary process started from one particle at `origin`.
pub fn run_returns<R: Rng + ?Sized>(
    env: &EnvironmentRealization,
    origin: usize,
    horizon: u32,
    cap: u64,
    rng: &mut R,
) -> ReturnRun {
    let mut front = ParticleFront::single(origin);
    let mut run = ReturnRun {
        returns: 0,
        generations: 0,
        capped: false,
        exhausted: false,
    };
    for _ in 0..horizon {
        front = match step_front(&front, env, rng) {
            Ok(next) => next,
            Err(_) => {
                run.exhausted = true;
                break;
            }
        };
        run.generations = front.generation;
        run.returns = run.returns.saturating_add(front.count_at(origin));
        if front.total() > cap {
            run.capped = true;
            break;
        }
        if front.is_empty() {
            break;
        }
    }
    run
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{EnvironmentSpec, GeneratorSet, OffspringVector, SiteLaw, Window};
    use crate::rng::replica_rng;
    use std::sync::Arc;

    fn env(law: SiteLaw, l: i64) -> EnvironmentRealization {
        let spec = Arc::new(EnvironmentSpec::homogeneous(GeneratorSet::nearest_neighbour(1), law).unwrap());
        EnvironmentRealization::homogeneous(spec, Window::new(1, l).unwrap(), 0).unwrap()
    }

    #[test]
    fn self_loop_freezes_once() {
        // one child at the parent's site: steps are [+1, -1, 0]
        let gen = GeneratorSet::new(1, vec![vec![1], vec![-1], vec![0]], &[vec![1], vec![-1]]).unwrap();
        let law = SiteLaw::deterministic(3, OffspringVector::new([(2, 1)]).unwrap()).unwrap();
        let spec = Arc::new(EnvironmentSpec::homogeneous(gen, law).unwrap());
        let e = EnvironmentRealization::homogeneous(spec, Window::new(1, 2).unwrap(), 0).unwrap();
        let o = e.window().origin_rank();
        let run = run_frozen(&e, o, 10, 100, &mut replica_rng(0, 0), None);
        assert_eq!(run.nu, 1);
        assert_eq!(run.trajectory, vec![0, 1]);
    }

    #[test]
    fn drift_never_returns() {
        let law = SiteLaw::deterministic(2, OffspringVector::new([(0, 1)]).unwrap()).unwrap();
        let e = env(law, 50);
        let o = e.window().origin_rank();
        let run = run_frozen(&e, o, 20, 100, &mut replica_rng(0, 0), None);
        assert_eq!((run.nu, run.capped, run.exhausted), (0, false, false));
        let r = run_returns(&e, o, 20, 100, &mut replica_rng(0, 0));
        assert_eq!(r.returns, 0);
    }

    #[test]
    fn doubling_hits_cap() {
        // two children at +1 and one at -1 every generation
        let law = SiteLaw::deterministic(2, OffspringVector::new([(0, 2), (1, 1)]).unwrap()).unwrap();
        let e = env(law, 40);
        let o = e.window().origin_rank();
        let run = run_frozen(&e, o, 30, 1000, &mut replica_rng(0, 0), None);
        assert!(run.capped);
        assert_eq!(run.nu, 1000);
        assert!(run.trajectory.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn q_tracks_constant_function() {
        let law = SiteLaw::branching_walk_with_mean(&[0.5, 0.5], 1.0).unwrap();
        let e = env(law, 30);
        let o = e.window().origin_rank();
        let f = vec![1.0; e.window().len()];
        let run = run_frozen(&e, o, 20, 1000, &mut replica_rng(5, 0), Some(&f));
        // one particle, frozen or not, for the whole run
        assert!(run.q.unwrap().iter().all(|&q| q == 1.0));
    }
}
