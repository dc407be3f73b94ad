//! The minimax value `c = inf_θ max_i φ(m_i, θ)` over a palette of mean vectors.
//!
//! `φ` is linear in `m`, so the supremum over the convex hull of the palette
//! is attained at a palette mean, and convexity in θ lets the supremum and
//! infimum be exchanged. The outer problem is therefore a finite max of
//! smooth convex functions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::exponential::{half_space_witness, inf_theta, log_phi, log_phi_derivatives, newton_step, MeanVector};
use crate::error::{Error, Result};
use crate::kernel::{EnvironmentSpec, Point, Window};
use crate::spectral::spectral_radius_sup;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Transient,
    StronglyRecurrent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub c: f64,
    pub theta_star: Vec<f64>,
    /// Palette indices attaining the max at `theta_star`.
    pub active_laws: Vec<usize>,
    pub verdict: Verdict,
    /// `|c − 1| < boundary_tol`: the verdict depends on the tolerance.
    pub boundary_flag: bool,
}

impl CriterionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CriterionOptions {
    /// Gradient tolerance for single-law problems.
    pub tol: f64,
    pub boundary_tol: f64,
}

impl Default for CriterionOptions {
    fn default() -> Self {
        CriterionOptions {
            tol: 1e-12,
            boundary_tol: 1e-6,
        }
    }
}

/// Relative gap (in `ln φ`) within which a law counts as active.
const ACTIVE_TOL: f64 = 1e-7;
const TAU_START: f64 = 1.0;
const TAU_END: f64 = 1e-13;
const STAGE_MAX_ITER: usize = 100;
const POLISH_STEPS: usize = 200;

/// Evaluates the criterion for the palette means of `spec`.
pub fn criterion_value(spec: &EnvironmentSpec, options: CriterionOptions) -> Result<CriterionReport> {
    let means: Vec<MeanVector> = spec
        .palette()
        .iter()
        .map(|law| MeanVector::of_law(spec.generator(), law))
        .collect();
    criterion_value_of(&means, options)
}

/// `c = inf_θ max_i φ(m_i, θ)`; transient iff `c <= 1`.
///
/// Requires the union of the supports to surround the origin (otherwise the
/// infimum escapes to infinity and [`Error::DegenerateSupport`] is returned).
/// Individual laws may be one-sided.
pub fn criterion_value_of(palette: &[MeanVector], options: CriterionOptions) -> Result<CriterionReport> {
    let first = palette
        .first()
        .ok_or_else(|| Error::invalid("empty palette"))?;
    let d = first.dimension();
    if palette.iter().any(|m| m.steps() != first.steps()) {
        return Err(Error::invalid("palette means must share one step set"));
    }
    let support: Vec<Point> = first
        .steps()
        .iter()
        .enumerate()
        .filter(|&(k, _)| palette.iter().any(|m| m.mass()[k] > 0.0))
        .map(|(_, s)| s.clone())
        .collect();
    if let Some(u) = half_space_witness(&support, d) {
        let limit = palette
            .iter()
            .map(|m| {
                m.steps()
                    .iter()
                    .zip(m.mass())
                    .filter(|(s, _)| {
                        s.iter().zip(&u).map(|(&a, b)| a as f64 * b).sum::<f64>().abs() < 1e-12
                    })
                    .map(|(_, w)| w)
                    .fold(0.0, |a, w| a + w)
            })
            .fold(0.0, f64::max);
        return Err(Error::DegenerateSupport { direction: u, limit });
    }

    let theta = if palette.len() == 1 {
        DVector::from_vec(inf_theta(first, options.tol)?.theta)
    } else {
        let mut theta = DVector::<f64>::zeros(d);
        let mut tau = TAU_START;
        while tau >= TAU_END {
            theta = minimize_smoothed(palette, theta, tau);
            tau *= 0.1;
        }
        polish(palette, theta)
    };

    let logs: Vec<f64> = palette.iter().map(|m| log_phi(m, theta.as_slice())).collect();
    let fmax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c = fmax.exp();
    let active_laws = logs
        .iter()
        .enumerate()
        .filter(|&(_, &l)| l >= fmax - ACTIVE_TOL)
        .map(|(i, _)| i)
        .collect();
    Ok(CriterionReport {
        c,
        theta_star: theta.as_slice().to_vec(),
        active_laws,
        verdict: if c <= 1.0 {
            Verdict::Transient
        } else {
            Verdict::StronglyRecurrent
        },
        boundary_flag: (c - 1.0).abs() < options.boundary_tol,
    })
}

/// `τ ln Σ_i exp(ln φ_i(θ) / τ)` with gradient and Hessian.
fn smoothed(palette: &[MeanVector], theta: &DVector<f64>, tau: f64) -> (f64, DVector<f64>, DMatrix<f64>) {
    let d = theta.len();
    let parts: Vec<_> = palette
        .iter()
        .map(|m| log_phi_derivatives(m, theta.as_slice()))
        .collect();
    let fmax = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = parts.iter().map(|p| ((p.0 - fmax) / tau).exp()).collect();
    let z: f64 = weights.iter().sum();
    let value = fmax + tau * z.ln();
    let mut g = DVector::zeros(d);
    let mut h = DMatrix::zeros(d, d);
    let mut outer = DMatrix::zeros(d, d);
    for (w, (_, gi, hi)) in weights.iter().zip(&parts) {
        let pi = w / z;
        g += pi * gi;
        h += pi * hi;
        outer += pi * gi * gi.transpose();
    }
    h += (outer - &g * g.transpose()) / tau;
    (value, g, h)
}

fn smoothed_value(palette: &[MeanVector], theta: &DVector<f64>, tau: f64) -> f64 {
    let logs: Vec<f64> = palette.iter().map(|m| log_phi(m, theta.as_slice()) / tau).collect();
    tau * super::exponential::log_sum_exp(&logs)
}

fn minimize_smoothed(palette: &[MeanVector], mut theta: DVector<f64>, tau: f64) -> DVector<f64> {
    for _ in 0..STAGE_MAX_ITER {
        let (f, g, h) = smoothed(palette, &theta, tau);
        let step = newton_step(&h, &g);
        let decrement = -g.dot(&step);
        if !(decrement > 1e-24) {
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-14 {
            let trial = &theta + alpha * &step;
            if smoothed_value(palette, &trial, tau) <= f - 1e-4 * alpha * decrement {
                theta = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    theta
}

/// Subgradient descent on the true `max_i ln φ_i`, keeping the best point.
fn polish(palette: &[MeanVector], theta: DVector<f64>) -> DVector<f64> {
    let objective = |t: &DVector<f64>| {
        palette
            .iter()
            .map(|m| log_phi(m, t.as_slice()))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut best = theta.clone();
    let mut best_val = objective(&best);
    let mut current = theta;
    for k in 0..POLISH_STEPS {
        let (i, _) = palette
            .iter()
            .map(|m| log_phi(m, current.as_slice()))
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let (_, g, _) = log_phi_derivatives(&palette[i], current.as_slice());
        let gn = g.norm();
        if gn == 0.0 {
            break;
        }
        current -= (1e-9 / (k as f64 + 1.0)) * g / gn;
        let v = objective(&current);
        if v < best_val {
            best_val = v;
            best = current.clone();
        }
    }
    best
}

/// Windowed spectral estimates of one realization compared with `c`.
#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckReport {
    pub c: f64,
    pub windows: Vec<i64>,
    pub estimates: Vec<f64>,
    /// `c − ρ(M_{B_L})` per window.
    pub gaps: Vec<f64>,
    /// Largest `|gap|` observed.
    pub max_gap: f64,
    /// Estimates non-decreasing within `tol`.
    pub monotone: bool,
    /// Every estimate at most `c + tol`.
    pub bounded_by_c: bool,
}

/// Samples a realization from `spec` and checks that `ρ(M_{B_L})` increases
/// toward `c` from below along `schedule`.
pub fn classify_cross_check(
    spec: &Arc<EnvironmentSpec>,
    schedule: &[i64],
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<CrossCheckReport> {
    let report = criterion_value(spec, CriterionOptions::default())?;
    let l_max = *schedule
        .last()
        .ok_or_else(|| Error::invalid("empty window schedule"))?;
    let env = spec.sample(Window::new(spec.dimension(), l_max)?, seed)?;
    let estimates: Vec<f64> = spectral_radius_sup(&env, schedule, tol, max_iter)?
        .into_iter()
        .map(|e| e.value)
        .collect();
    let gaps: Vec<f64> = estimates.iter().map(|e| report.c - e).collect();
    Ok(CrossCheckReport {
        c: report.c,
        windows: schedule.to_vec(),
        monotone: estimates.windows(2).all(|w| w[1] >= w[0] - tol),
        bounded_by_c: estimates.iter().all(|&e| e <= report.c + tol),
        max_gap: gaps.iter().fold(0.0, |a: f64, g| a.max(g.abs())),
        estimates,
        gaps,
    })
}
