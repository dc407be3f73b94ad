use std::io::Write;

use crate::error::{Error, Result};
use crate::kernel::{build_moment_kernel, Boundary, EnvironmentRealization, MomentKernel, Window};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    PowerIteration,
    /// Diagonal growth `(m^(n)(o, o))^(1/n)`; diagnostic only.
    GrowthRate,
}

/// A Perron–Frobenius value estimate for one finite window.
#[derive(Clone, Debug)]
pub struct SpectralEstimate {
    pub value: f64,
    /// Half-width `L` of the window the kernel was built on, when known.
    pub window_size: Option<i64>,
    pub method: Method,
    /// `‖Mv − λv‖∞ / ‖v‖∞` for the returned pair.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Collatz–Wielandt bracket `min_i (Mv)_i / v_i ≤ ρ ≤ max_i (Mv)_i / v_i`.
    pub lower: f64,
    pub upper: f64,
    /// Right Perron vector (∞-norm 1), over the kernel's states.
    pub vector: Vec<f64>,
}

/// Perron–Frobenius eigenvalue of an irreducible nonnegative kernel.
///
/// Iterates on `M + I`, which is primitive even when `M` is periodic and has
/// the same Perron vector, with `ρ(M + I) = ρ(M) + 1`. Stops once the
/// residual of `(λ, v)` for `M` itself is at most `tol`; otherwise the
/// estimate is returned with `converged = false`.
pub fn spectral_radius_window(m: &MomentKernel, tol: f64, max_iter: usize) -> Result<SpectralEstimate> {
    m.ensure_irreducible()?;
    power_iteration(m, None, tol, max_iter)
}

/// As [`spectral_radius_window`] starting from `start` (must be positive).
pub fn spectral_radius_window_from(
    m: &MomentKernel,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SpectralEstimate> {
    m.ensure_irreducible()?;
    if start.len() != m.len() || start.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("start vector must be positive on every state"));
    }
    power_iteration(m, Some(start), tol, max_iter)
}

fn power_iteration(
    m: &MomentKernel,
    start: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralEstimate> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let n = m.len();
    if n == 0 {
        return Err(Error::invalid("empty kernel"));
    }
    let mut v = start.map_or_else(|| vec![1.0; n], <[f64]>::to_vec);
    normalize(&mut v);
    let mut mv = vec![0.0; n];
    let mut iterations = 0;
    loop {
        m.apply_into(&v, &mut mv);
        let (lambda, residual) = rayleigh(&v, &mv);
        if residual <= tol || iterations >= max_iter {
            let (lower, upper) = collatz_wielandt(&v, &mv);
            return Ok(SpectralEstimate {
                value: lambda.max(0.0),
                window_size: m.window().map(|w| w.half_width()),
                method: Method::PowerIteration,
                residual,
                iterations,
                converged: residual <= tol,
                lower,
                upper,
                vector: v,
            });
        }
        for (vi, &wi) in v.iter_mut().zip(&mv) {
            *vi += wi;
        }
        normalize(&mut v);
        iterations += 1;
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().fold(0.0, |a: f64, &b| a.max(b.abs()));
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Least-squares eigenvalue for `v` and the relative ∞-residual.
fn rayleigh(v: &[f64], mv: &[f64]) -> (f64, f64) {
    let num: f64 = v.iter().zip(mv).map(|(a, b)| a * b).sum();
    let den: f64 = v.iter().map(|a| a * a).sum();
    let lambda = num / den;
    let vnorm = v.iter().fold(0.0, |a: f64, &b| a.max(b.abs()));
    let res = v
        .iter()
        .zip(mv)
        .fold(0.0, |a: f64, (&vi, &wi)| a.max((wi - lambda * vi).abs()));
    (lambda, res / vnorm)
}

fn collatz_wielandt(v: &[f64], mv: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (&vi, &wi) in v.iter().zip(mv) {
        if vi > 0.0 {
            let r = wi / vi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo.min(hi), hi)
}

/// Spectral radius of an arbitrary finite nonnegative kernel: the largest
/// Perron–Frobenius value over its irreducible diagonal blocks, i.e. the
/// supremum of `ρ(M_Y)` over irreducible `Y` inside the window.
pub fn spectral_radius_reducible(m: &MomentKernel, tol: f64, max_iter: usize) -> Result<SpectralEstimate> {
    let comps = m.components();
    if comps.len() == 1 {
        return spectral_radius_window(m, tol, max_iter);
    }
    let mut best: Option<(SpectralEstimate, Vec<usize>)> = None;
    let mut worst_residual: f64 = 0.0;
    let mut iterations = 0;
    let mut converged = true;
    for comp in comps {
        let sub = m.restrict(&comp);
        // a lone state without a self-loop contributes ρ = 0
        if sub.nnz() == 0 {
            continue;
        }
        let est = power_iteration(&sub, None, tol, max_iter)?;
        worst_residual = worst_residual.max(est.residual);
        iterations = iterations.max(est.iterations);
        converged &= est.converged;
        if best.as_ref().is_none_or(|(b, _)| est.value > b.value) {
            best = Some((est, comp));
        }
    }
    let window_size = m.window().map(|w| w.half_width());
    Ok(match best {
        Some((est, comp)) => {
            let mut vector = vec![0.0; m.len()];
            for (k, &i) in comp.iter().enumerate() {
                vector[i] = est.vector[k];
            }
            SpectralEstimate {
                window_size,
                residual: worst_residual,
                iterations,
                converged,
                vector,
                ..est
            }
        }
        None => SpectralEstimate {
            value: 0.0,
            window_size,
            method: Method::PowerIteration,
            residual: 0.0,
            iterations: 0,
            converged: true,
            lower: 0.0,
            upper: 0.0,
            vector: vec![0.0; m.len()],
        },
    })
}

/// Windowed spectral radii `ρ(M_{B_L})` of a realization over the nested boxes
/// `B_L = [-L, L]^d` of `schedule`, each a lower bound for `ρ(M)`.
///
/// Reducible windows are handled blockwise (see
/// [`spectral_radius_reducible`]). Each window is warm-started from the
/// previous Perron vector.
pub fn spectral_radius_sup(
    env: &EnvironmentRealization,
    schedule: &[i64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<SpectralEstimate>> {
    if schedule.is_empty() {
        return Err(Error::invalid("empty window schedule"));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("window schedule must be strictly increasing"));
    }
    let dim = env.window().dimension();
    let mut out: Vec<SpectralEstimate> = Vec::with_capacity(schedule.len());
    let mut prev: Option<(Window, Vec<f64>)> = None;
    for &l in schedule {
        let window = Window::new(dim, l)?;
        let kernel = build_moment_kernel(env, window, Boundary::Truncated)?;
        let est = if kernel.is_irreducible() {
            match &prev {
                Some((pw, pv)) if pv.iter().all(|&x| x > 0.0) => {
                    let start = embed(pw, pv, &window);
                    spectral_radius_window_from(&kernel, &start, tol, max_iter)?
                }
                _ => spectral_radius_window(&kernel, tol, max_iter)?,
            }
        } else {
            spectral_radius_reducible(&kernel, tol, max_iter)?
        };
        prev = Some((window, est.vector.clone()));
        out.push(est);
    }
    Ok(out)
}

/// Extends a positive vector on `from` to `to`, filling new sites with the
/// smallest old value.
fn embed(from: &Window, v: &[f64], to: &Window) -> Vec<f64> {
    let fill = v.iter().copied().fold(f64::INFINITY, f64::min);
    (0..to.len())
        .map(|r| from.rank(&to.site(r)).map_or(fill, |k| v[k]))
        .collect()
}

/// Diagnostic estimate `(m^(n)(o, o))^(1/n)` at the kernel's origin.
pub fn growth_rate_estimate(m: &MomentKernel, n: usize) -> SpectralEstimate {
    let value = super::green::growth_rate(m, m.origin(), m.origin(), n);
    SpectralEstimate {
        value,
        window_size: m.window().map(|w| w.half_width()),
        method: Method::GrowthRate,
        residual: f64::NAN,
        iterations: n,
        converged: false,
        lower: f64::NAN,
        upper: f64::NAN,
        vector: Vec::new(),
    }
}

/// Convergence trace CSV: `L,estimate,residual,iterations,converged`.
pub fn write_trace<W: Write>(estimates: &[SpectralEstimate], mut out: W) -> std::io::Result<()> {
    writeln!(out, "L,estimate,residual,iterations,converged")?;
    for e in estimates {
        let l = e.window_size.map_or_else(String::new, |l| l.to_string());
        writeln!(
            out,
            "{l},{:.15e},{:.6e},{},{}",
            e.value, e.residual, e.iterations, e.converged
        )?;
    }
    Ok(())
}
