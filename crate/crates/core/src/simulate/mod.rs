//! Particle-level Monte Carlo of branching random walks in a fixed
//! environment realization.
//!
//! Particles are kept as counts per site and each generation splits the
//! particles at a site over the atoms of the local law with one multinomial
//! draw, so the cost of a generation scales with the occupied sites rather
//! than the population.

mod front;
mod runs;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

pub use front::{step_front, ParticleFront, WindowExhausted};
pub use runs::{run_frozen, run_returns, FrozenRun, ReturnRun};

use crate::error::{Error, Result};
use crate::kernel::EnvironmentRealization;
use crate::rng::replica_rng;

/// Return-count thresholds reported by [`recurrence_probe`].
pub const RETURN_THRESHOLDS: [u64; 3] = [1, 10, 100];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimulationConfig {
    pub origin: usize,
    pub replicas: usize,
    pub horizon: u32,
    pub cap: u64,
    pub seed: u64,
}

impl SimulationConfig {
    fn validate(&self, env: &EnvironmentRealization) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::invalid("replicas must be at least 1"));
        }
        if self.cap == 0 {
            return Err(Error::invalid("cap must be at least 1"));
        }
        if self.origin >= env.window().len() {
            return Err(Error::invalid("origin outside the environment window"));
        }
        Ok(())
    }
}

/// Sample mean of ν with a 95% normal-approximation half-width.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GwEstimate {
    pub samples: Vec<u64>,
    pub mean: f64,
    pub half_width: f64,
    pub capped_fraction: f64,
    pub exhausted_fraction: f64,
}

impl GwEstimate {
    pub fn from_runs(runs: &[FrozenRun]) -> Self {
        let n = runs.len() as f64;
        let samples: Vec<u64> = runs.iter().map(|r| r.nu).collect();
        let mean = samples.iter().map(|&x| x as f64).sum::<f64>() / n;
        let var = if runs.len() > 1 {
            samples.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        GwEstimate {
            mean,
            half_width: 1.96 * (var / n).sqrt(),
            capped_fraction: runs.iter().filter(|r| r.capped).count() as f64 / n,
            exhausted_fraction: runs.iter().filter(|r| r.exhausted).count() as f64 / n,
            samples,
        }
    }
}

/// Fraction of runs with at least `at_least` returns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReturnFraction {
    pub at_least: u64,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeSummary {
    pub returns: Vec<u64>,
    pub fractions: Vec<ReturnFraction>,
    pub capped_fraction: f64,
    pub exhausted_fraction: f64,
}

impl ProbeSummary {
    pub fn from_runs(runs: &[ReturnRun]) -> Self {
        let n = runs.len() as f64;
        let returns: Vec<u64> = runs.iter().map(|r| r.returns).collect();
        ProbeSummary {
            fractions: RETURN_THRESHOLDS
                .iter()
                .map(|&k| ReturnFraction {
                    at_least: k,
                    fraction: returns.iter().filter(|&&r| r >= k).count() as f64 / n,
                })
                .collect(),
            capped_fraction: runs.iter().filter(|r| r.capped).count() as f64 / n,
            exhausted_fraction: runs.iter().filter(|r| r.exhausted).count() as f64 / n,
            returns,
        }
    }

    pub fn fraction_at_least(&self, k: u64) -> Option<f64> {
        self.fractions
            .iter()
            .find(|f| f.at_least == k)
            .map(|f| f.fraction)
    }
}

/// Frozen runs for replicas `0..replicas`, each on its own stream.
pub fn frozen_runs(env: &EnvironmentRealization, cfg: &SimulationConfig) -> Result<Vec<FrozenRun>> {
    cfg.validate(env)?;
    Ok((0..cfg.replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(cfg.seed, i as u64);
            run_frozen(env, cfg.origin, cfg.horizon, cfg.cap, &mut rng, None)
        })
        .collect())
}

/// Mean of the frozen count ν, the offspring law of the embedded
/// Galton–Watson process.
pub fn estimate_gw_mean(env: &EnvironmentRealization, cfg: &SimulationConfig) -> Result<GwEstimate> {
    Ok(GwEstimate::from_runs(&frozen_runs(env, cfg)?))
}

/// Distribution of return counts to the origin for the ordinary process.
pub fn recurrence_probe(env: &EnvironmentRealization, cfg: &SimulationConfig) -> Result<ProbeSummary> {
    cfg.validate(env)?;
    let runs: Vec<ReturnRun> = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(cfg.seed, i as u64);
            run_returns(env, cfg.origin, cfg.horizon, cfg.cap, &mut rng)
        })
        .collect();
    Ok(ProbeSummary::from_runs(&runs))
}

/// One line of the per-replica export.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicaRecord {
    pub replica: usize,
    pub nu: u64,
    pub returns: u64,
    pub capped: bool,
    pub exhausted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub replicas: usize,
    pub horizon: u32,
    pub cap: u64,
    pub seed: u64,
    pub mean_nu: f64,
    pub half_width: f64,
    pub nu_capped_fraction: f64,
    pub return_fractions: Vec<ReturnFraction>,
    pub returns_capped_fraction: f64,
    pub exhausted_fraction: f64,
}

/// Runs the frozen process and then the ordinary process on each replica
/// stream (the frozen run comes first, so its ν equals the one reported by
/// [`estimate_gw_mean`] for the same seed).
pub fn simulate(
    env: &EnvironmentRealization,
    cfg: &SimulationConfig,
) -> Result<(Vec<ReplicaRecord>, SimulationSummary)> {
    cfg.validate(env)?;
    let pairs: Vec<(FrozenRun, ReturnRun)> = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(cfg.seed, i as u64);
            let f = run_frozen(env, cfg.origin, cfg.horizon, cfg.cap, &mut rng, None);
            let r = run_returns(env, cfg.origin, cfg.horizon, cfg.cap, &mut rng);
            (f, r)
        })
        .collect();
    let (frozen, returns): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let gw = GwEstimate::from_runs(&frozen);
    let probe = ProbeSummary::from_runs(&returns);
    let records = frozen
        .iter()
        .zip(&returns)
        .enumerate()
        .map(|(i, (f, r))| ReplicaRecord {
            replica: i,
            nu: f.nu,
            returns: r.returns,
            capped: f.capped || r.capped,
            exhausted: f.exhausted || r.exhausted,
        })
        .collect();
    let n = cfg.replicas as f64;
    let exhausted = frozen
        .iter()
        .zip(&returns)
        .filter(|(f, r)| f.exhausted || r.exhausted)
        .count() as f64
        / n;
    let summary = SimulationSummary {
        replicas: cfg.replicas,
        horizon: cfg.horizon,
        cap: cfg.cap,
        seed: cfg.seed,
        mean_nu: gw.mean,
        half_width: gw.half_width,
        nu_capped_fraction: gw.capped_fraction,
        return_fractions: probe.fractions,
        returns_capped_fraction: probe.capped_fraction,
        exhausted_fraction: exhausted,
    };
    Ok((records, summary))
}

/// Writes `replica,nu,returns,capped,exhausted` rows.
pub fn write_replica_csv<W: Write>(records: &[ReplicaRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "replica,nu,returns,capped,exhausted")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.replica, r.nu, r.returns, r.capped, r.exhausted
        )?;
    }
    Ok(())
}
