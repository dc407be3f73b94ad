//! The exponential moment `φ(m, θ) = Σ_s e^{<θ,s>} m(s)` and its infimum over θ.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{GeneratorSet, Point, SiteLaw};

/// A nonnegative mean vector `m(s)` over a finite step set. Total mass below
/// one is allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanVector {
    steps: Vec<Point>,
    mass: Vec<f64>,
}

impl MeanVector {
    pub fn new(steps: Vec<Point>, mass: Vec<f64>) -> Result<Self> {
        if steps.len() != mass.len() {
            return Err(Error::invalid("steps and masses differ in length"));
        }
        let d = steps.first().map_or(0, Vec::len);
        if d == 0 || steps.iter().any(|s| s.len() != d) {
            return Err(Error::invalid("steps must share a positive dimension"));
        }
        if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::invalid("masses must be finite and non-negative"));
        }
        Ok(MeanVector { steps, mass })
    }

    /// Mean vector of a site law over the generator's steps.
    pub fn of_law(generator: &GeneratorSet, law: &SiteLaw) -> Self {
        MeanVector {
            steps: generator.steps().to_vec(),
            mass: law.mean().to_vec(),
        }
    }

    /// One-dimensional nearest-neighbour vector `m(+1) = up, m(−1) = down`.
    pub fn nearest_neighbour_1d(up: f64, down: f64) -> Result<Self> {
        MeanVector::new(vec![vec![1], vec![-1]], vec![up, down])
    }

    pub fn dimension(&self) -> usize {
        self.steps[0].len()
    }

    pub fn steps(&self) -> &[Point] {
        &self.steps
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn scaled(&self, gamma: f64) -> Self {
        MeanVector {
            steps: self.steps.clone(),
            mass: self.mass.iter().map(|m| m * gamma).collect(),
        }
    }

    /// `Σ_i λ_i m_i` for vectors over the same steps.
    pub fn combination(vectors: &[&MeanVector], weights: &[f64]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::invalid("empty combination"))?;
        if vectors.len() != weights.len() || vectors.iter().any(|v| v.steps != first.steps) {
            return Err(Error::invalid("combination needs matching steps and weights"));
        }
        let mut mass = vec![0.0; first.mass.len()];
        for (v, &w) in vectors.iter().zip(weights) {
            for (acc, &m) in mass.iter_mut().zip(&v.mass) {
                *acc += w * m;
            }
        }
        MeanVector::new(first.steps.clone(), mass)
    }

    pub(crate) fn support(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.steps
            .iter()
            .zip(self.mass.iter().copied())
            .filter(|&(_, m)| m > 0.0)
    }
}

fn dot(theta: &[f64], s: &[i64]) -> f64 {
    theta.iter().zip(s).map(|(t, &c)| t * c as f64).sum()
}

/// `φ(m, θ) = Σ_s e^{<θ,s>} m(s)`.
pub fn phi(m: &MeanVector, theta: &[f64]) -> f64 {
    log_phi(m, theta).exp()
}

/// `ln φ(m, θ)`, evaluated with max-exponent shifting; `-∞` for `m ≡ 0`.
pub fn log_phi(m: &MeanVector, theta: &[f64]) -> f64 {
    let exps: Vec<f64> = m.support().map(|(s, w)| dot(theta, s) + w.ln()).collect();
    log_sum_exp(&exps)
}

pub(crate) fn log_sum_exp(x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + x.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Value, gradient and Hessian of `ln φ(m, ·)` at θ. The gradient is the mean
/// step under the tilted weights `e^{<θ,s>} m(s) / φ`, the Hessian their
/// covariance.
pub(crate) fn log_phi_derivatives(m: &MeanVector, theta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
    let d = theta.len();
    let exps: Vec<(&Point, f64)> = m.support().map(|(s, w)| (s, dot(theta, s) + w.ln())).collect();
    let lse = log_sum_exp(&exps.iter().map(|e| e.1).collect::<Vec<_>>());
    let mut g = DVector::zeros(d);
    let mut h = DMatrix::zeros(d, d);
    for (s, e) in &exps {
        let w = (e - lse).exp();
        for a in 0..d {
            g[a] += w * s[a] as f64;
            for b in 0..d {
                h[(a, b)] += w * (s[a] * s[b]) as f64;
            }
        }
    }
    h -= &g * g.transpose();
    (lse, g, h)
}

/// Minimizer of `φ(m, ·)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InfTheta {
    pub theta: Vec<f64>,
    pub value: f64,
    /// `‖∇_θ φ(m, θ*)‖₂`.
    pub gradient_norm: f64,
    pub iterations: usize,
}

const NEWTON_MAX_ITER: usize = 200;

/// `inf_θ φ(m, θ)` by damped Newton on `ln φ`.
///
/// The infimum is attained iff the support of `m` is not contained in a
/// closed half-space `{s : <u,s> <= 0}`; otherwise a
/// [`Error::DegenerateSupport`] carries such a `u` and the limit of
/// `φ(m, λu)` as `λ → ∞`.
pub fn inf_theta(m: &MeanVector, tol: f64) -> Result<InfTheta> {
    let support: Vec<Point> = m.support().map(|(s, _)| s.clone()).collect();
    if let Some(u) = half_space_witness(&support, m.dimension()) {
        let limit = m
            .support()
            .filter(|(s, _)| dot(&u, s).abs() < 1e-12)
            .map(|(_, w)| w)
            .fold(0.0, |a, w| a + w);
        return Err(Error::DegenerateSupport { direction: u, limit });
    }
    let d = m.dimension();
    let mut theta = DVector::<f64>::zeros(d);
    for iter in 0..NEWTON_MAX_ITER {
        let (f, g, h) = log_phi_derivatives(m, theta.as_slice());
        let grad_norm = f.exp() * g.norm();
        if grad_norm <= tol {
            return Ok(InfTheta {
                theta: theta.as_slice().to_vec(),
                value: f.exp(),
                gradient_norm: grad_norm,
                iterations: iter,
            });
        }
        let step = newton_step(&h, &g);
        let slope = g.dot(&step);
        // below this the Armijo test only sees rounding in ln φ
        let noise = 8.0 * f64::EPSILON * f.abs().max(1.0);
        let mut alpha = 1.0;
        loop {
            let trial = &theta + alpha * &step;
            let ft = log_phi(m, trial.as_slice());
            let flat = -slope <= noise && ft <= f + noise;
            if ft <= f + 1e-4 * alpha * slope || flat || alpha < 1e-12 {
                theta = trial;
                break;
            }
            alpha *= 0.5;
        }
    }
    let (f, g, _) = log_phi_derivatives(m, theta.as_slice());
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITER,
        residual: f.exp() * g.norm(),
    })
}

/// Newton direction `−H⁻¹ g`, regularized if `H` is (numerically) singular;
/// falls back to steepest descent.
pub(crate) fn newton_step(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let d = g.len();
    let scale = h.diagonal().iter().fold(0.0, |a: f64, &b| a.max(b.abs())).max(1e-300);
    for ridge in [0.0, 1e-12, 1e-8, 1e-4] {
        let reg = h + DMatrix::identity(d, d) * (ridge * scale);
        if let Some(ch) = reg.clone().cholesky() {
            let step = -ch.solve(g);
            if step.iter().all(|v| v.is_finite()) {
                return step;
            }
        }
    }
    -g.clone()
}

/// A direction `u ≠ 0` with `<u, s> <= 0` for all `s` in `support`, if one
/// exists. Such `u` exists iff `0` is not an interior point of the convex hull
/// of the support.
pub fn half_space_witness(support: &[Point], dimension: usize) -> Option<Vec<f64>> {
    let nonzero: Vec<&Point> = support.iter().filter(|s| s.iter().any(|&c| c != 0)).collect();
    if nonzero.is_empty() {
        let mut u = vec![0.0; dimension];
        u[0] = 1.0;
        return Some(u);
    }
    if let Some(u) = null_vector(&nonzero, dimension) {
        return Some(u);
    }
    // The cone {u : <u,s> <= 0 ∀s} is pointed here; if nontrivial, it has an
    // extreme ray orthogonal to d−1 independent support vectors.
    let k = dimension - 1;
    let mut chosen = Vec::with_capacity(k);
    let mut found = None;
    subsets(&nonzero, k, 0, &mut chosen, &mut |rows| {
        if found.is_some() {
            return;
        }
        let normal = generalized_cross(rows, dimension);
        if normal.iter().all(|&c| c == 0) {
            return;
        }
        for sign in [1i128, -1] {
            if nonzero
                .iter()
                .all(|s| s.iter().zip(&normal).map(|(&a, &b)| a as i128 * b * sign).sum::<i128>() <= 0)
            {
                let u: Vec<f64> = normal.iter().map(|&c| (c * sign) as f64).collect();
                let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                found = Some(u.into_iter().map(|v| v / norm).collect());
                return;
            }
        }
    });
    found
}

fn subsets<'a>(
    items: &[&'a Point],
    k: usize,
    start: usize,
    chosen: &mut Vec<&'a Point>,
    f: &mut impl FnMut(&[&'a Point]),
) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    for i in start..items.len() {
        chosen.push(items[i]);
        subsets(items, k, i + 1, chosen, f);
        chosen.pop();
    }
}

/// The vector `u` with `u_j = (−1)^j det(rows without column j)`, orthogonal
/// to each of the `d − 1` rows.
fn generalized_cross(rows: &[&Point], dimension: usize) -> Vec<i128> {
    (0..dimension)
        .map(|j| {
            let minor: Vec<Vec<i128>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != j)
                        .map(|(_, &v)| v as i128)
                        .collect()
                })
                .collect();
            let det = bareiss_det(minor);
            if j % 2 == 0 {
                det
            } else {
                -det
            }
        })
        .collect()
}

/// Exact integer determinant (fraction-free elimination).
fn bareiss_det(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// A unit vector orthogonal to every row, when the rows do not span `R^d`.
fn null_vector(rows: &[&Point], dimension: usize) -> Option<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..dimension {
        let Some(p) = (row..a.len()).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
        else {
            break;
        };
        if a[p][col].abs() < 1e-9 {
            continue;
        }
        a.swap(row, p);
        let pv = a[row][col];
        a[row].iter_mut().for_each(|v| *v /= pv);
        for i in 0..a.len() {
            if i != row {
                let f = a[i][col];
                if f != 0.0 {
                    for c in 0..dimension {
                        a[i][c] -= f * a[row][c];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() == dimension {
        return None;
    }
    let free = (0..dimension).find(|c| !pivots.contains(c))?;
    let mut u = vec![0.0; dimension];
    u[free] = 1.0;
    for (r, &pc) in pivots.iter().enumerate() {
        u[pc] = -a[r][free];
    }
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    Some(u.into_iter().map(|v| v / norm).collect())
}
