use super::linear::solve_shifted;
use crate::error::{Error, Result};
use crate::kernel::MomentKernel;

/// Outcome of testing `Mf <= t f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperharmonicCheck {
    /// `Σ_y m(x, y) f(y) <= t f(x) + tol` at every state.
    pub holds: bool,
    /// `max_x (Mf(x) − t f(x)) / f(x)`; negative when there is slack everywhere.
    pub max_violation: f64,
}

pub fn check_superharmonic(
    m: &MomentKernel,
    f: &[f64],
    t: f64,
    tol: f64,
) -> Result<SuperharmonicCheck> {
    if f.len() != m.len() {
        return Err(Error::invalid(format!(
            "function has {} values for {} states",
            f.len(),
            m.len()
        )));
    }
    if let Some(x) = f.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!(
            "function must be strictly positive (f({x}) = {})",
            f[x]
        )));
    }
    let mf = m.apply(f);
    let mut holds = true;
    let mut max_violation = f64::NEG_INFINITY;
    for (&g, &fx) in mf.iter().zip(f) {
        let excess = g - t * fx;
        holds &= excess <= tol;
        max_violation = max_violation.max(excess / fx);
    }
    Ok(SuperharmonicCheck {
        holds,
        max_violation,
    })
}

/// Whether some strictly positive `f` satisfies `Mf < t f`, decided by
/// solving `(tI − M) f = 1`: for `t > ρ(M)` the solution is the positive
/// Green-function sum `Σ_k t^{-k-1} M^k 1`, for `t < ρ(M)` it has a
/// nonpositive entry or does not exist.
pub fn admits_superharmonic(m: &MomentKernel, t: f64) -> bool {
    if !(t > 0.0) {
        return false;
    }
    let ones = vec![1.0; m.len()];
    solve_shifted(m, t, &ones).is_some_and(|f| f.iter().all(|&v| v > 0.0))
}

/// The minimal `t` admitting a positive `t`-superharmonic function, found by
/// bisection on `[0, max row sum]`. For a finite irreducible kernel this is
/// the Perron–Frobenius eigenvalue; it does not use power iteration and so
/// serves as an independent check of [`super::spectral_radius_window`].
pub fn min_superharmonic_t(m: &MomentKernel, tol: f64) -> Result<f64> {
    m.ensure_irreducible()?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let mut hi = m.max_row_sum();
    let mut lo = 0.0;
    if hi == 0.0 {
        return Ok(0.0);
    }
    while hi - lo > tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if admits_superharmonic(m, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
