use crate::error::{Error, Result};
use crate::kernel::MomentKernel;

/// Coefficients `m^(n)(x, y)` for `n = 0..=N` of the Green function
/// `G(x, y | z) = Σ_n m^(n)(x, y) z^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenSeries {
    pub x: usize,
    pub y: usize,
    pub coefficients: Vec<f64>,
}

impl GreenSeries {
    /// Computes the first `n_max + 1` coefficients by propagating the row
    /// vector `e_x M^n`.
    pub fn compute(m: &MomentKernel, x: usize, y: usize, n_max: usize) -> Result<Self> {
        if x >= m.len() || y >= m.len() {
            return Err(Error::invalid(format!(
                "states ({x}, {y}) outside kernel of {} states",
                m.len()
            )));
        }
        let mut mu = vec![0.0; m.len()];
        mu[x] = 1.0;
        let mut next = vec![0.0; m.len()];
        let mut coefficients = Vec::with_capacity(n_max + 1);
        coefficients.push(mu[y]);
        for _ in 0..n_max {
            m.left_apply_into(&mu, &mut next);
            std::mem::swap(&mut mu, &mut next);
            coefficients.push(mu[y]);
        }
        Ok(GreenSeries { x, y, coefficients })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Partial sum `Σ_{n<=N} m^(n)(x, y) z^n`.
    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(z >= 0.0) {
            return Err(Error::invalid(format!("z = {z} must be non-negative")));
        }
        Ok(self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * z + c))
    }
}

/// `Σ_{n=0}^{N} m^(n)(x, y) z^n`, a lower partial sum of `G(x, y | z)`.
pub fn green_partial(m: &MomentKernel, x: usize, y: usize, z: f64, n_max: usize) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::invalid(format!("z = {z} must be non-negative")));
    }
    GreenSeries::compute(m, x, y, n_max)?.eval(z)
}

/// `(m^(n)(x, y))^(1/n)`, computed with per-step rescaling so large `n` does
/// not overflow. Returns 0 when the entry vanishes.
pub fn growth_rate(m: &MomentKernel, x: usize, y: usize, n: usize) -> f64 {
    assert!(n > 0, "growth rate needs n >= 1");
    let mut mu = vec![0.0; m.len()];
    mu[x] = 1.0;
    let mut next = vec![0.0; m.len()];
    let mut log_scale = 0.0;
    for _ in 0..n {
        m.left_apply_into(&mu, &mut next);
        std::mem::swap(&mut mu, &mut next);
        let norm = mu.iter().fold(0.0, |a: f64, &b| a.max(b));
        if norm == 0.0 {
            return 0.0;
        }
        mu.iter_mut().for_each(|v| *v /= norm);
        log_scale += norm.ln();
    }
    if mu[y] == 0.0 {
        0.0
    } else {
        ((log_scale + mu[y].ln()) / n as f64).exp()
    }
}
