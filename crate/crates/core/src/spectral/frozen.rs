use super::linear::solve_shifted;
use crate::error::{Error, Result};
use crate::kernel::MomentKernel;

/// Solution of the boundary problem `Σ_y m̃(x, y) f(y) = t f(x)` on interior
/// states with `f(Δ) = 1`.
#[derive(Clone, Debug)]
pub struct FrozenSolution {
    pub t: f64,
    /// Kernel indices of the interior states, in order.
    pub interior: Vec<usize>,
    /// `f̃(t, x)` for each interior state.
    pub values: Vec<f64>,
    /// The series `Σ_k m̃^(k)(x, Δ) t^{-k}` converges: the system is
    /// solvable and the solution strictly positive.
    pub finite: bool,
    /// No interior state sends mass to `Δ`, so the solution is identically 0.
    pub degenerate: bool,
    /// `‖(tI − M̃_int) f − b‖∞` (NaN when unsolvable).
    pub residual: f64,
}

impl FrozenSolution {
    pub fn value_at(&self, state: usize) -> Option<f64> {
        self.interior
            .iter()
            .position(|&s| s == state)
            .map(|k| self.values[k])
    }
}

/// Expected number of first arrivals at the absorbing state `Δ` under the
/// kernel `M̃ / t`, i.e. `f̃(t, x) = Σ_k m̃^(k)(x, Δ) t^{-k}`, obtained by
/// solving `(tI − M̃_int) f = b` with `b(x) = m̃(x, Δ)`.
pub fn solve_frozen(m: &MomentKernel, t: f64) -> Result<FrozenSolution> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t = {t} must be positive")));
    }
    let delta = m
        .absorbing()
        .ok_or_else(|| Error::invalid("kernel has no absorbing state"))?;
    let interior: Vec<usize> = (0..m.len()).filter(|&i| i != delta).collect();
    let b: Vec<f64> = interior.iter().map(|&i| m.get(i, delta)).collect();
    let inner = m.restrict(&interior);
    let degenerate = b.iter().all(|&v| v == 0.0);
    let Some(values) = solve_shifted(&inner, t, &b) else {
        return Ok(FrozenSolution {
            t,
            values: vec![f64::INFINITY; interior.len()],
            interior,
            finite: false,
            degenerate,
            residual: f64::NAN,
        });
    };
    let kf = inner.apply(&values);
    let residual = values
        .iter()
        .zip(&kf)
        .zip(&b)
        .fold(0.0, |a: f64, ((&f, &g), &bi)| a.max((t * f - g - bi).abs()));
    let finite = !degenerate && values.iter().all(|&v| v > 0.0);
    Ok(FrozenSolution {
        t,
        interior,
        values,
        finite,
        degenerate,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_site(a: f64, b: f64) -> MomentKernel {
        MomentKernel::from_dense(&[vec![a, b], vec![0.0, 0.0]])
            .unwrap()
            .with_absorbing(1)
            .unwrap()
    }

    #[test]
    fn single_interior_site() {
        let (a, b, t) = (0.3, 0.45, 0.8);
        let s = solve_frozen(&one_site(a, b), t).unwrap();
        assert!(s.finite);
        assert!((s.values[0] - b / (t - a)).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn below_spectral_radius_is_infinite() {
        let s = solve_frozen(&one_site(0.3, 0.45), 0.2).unwrap();
        assert!(!s.finite);
        let s = solve_frozen(&one_site(0.3, 0.45), 0.3).unwrap();
        assert!(!s.finite);
    }

    #[test]
    fn zero_flux_is_degenerate() {
        let m = MomentKernel::from_dense(&[
            vec![0.0, 0.5, 0.0],
            vec![0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap()
        .with_absorbing(2)
        .unwrap();
        let s = solve_frozen(&m, 2.0).unwrap();
        assert!(s.degenerate && !s.finite);
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_frozen(&one_site(0.3, 0.4), 0.0).is_err());
        let plain = MomentKernel::from_dense(&[vec![0.3]]).unwrap();
        assert!(solve_frozen(&plain, 1.0).is_err());
    }
}
