//! Solves `(tI − K) f = b` for a nonnegative kernel `K`.

use nalgebra::{DMatrix, DVector};

use crate::kernel::MomentKernel;

/// Above this many states the dense LU is replaced by conjugate gradients on
/// the normal equations.
pub const DENSE_LIMIT: usize = 2_000;

const CG_TOL: f64 = 1e-12;

/// Returns `None` when the system is numerically singular or the iterative
/// solver fails to reach the residual target.
pub fn solve_shifted(k: &MomentKernel, t: f64, b: &[f64]) -> Option<Vec<f64>> {
    if k.len() <= DENSE_LIMIT {
        solve_dense(k, t, b)
    } else {
        solve_normal_cg(k, t, b)
    }
}

fn solve_dense(k: &MomentKernel, t: f64, b: &[f64]) -> Option<Vec<f64>> {
    let n = k.len();
    let mut a = DMatrix::<f64>::identity(n, n) * t;
    for (i, j, v) in k.triplets() {
        a[(i, j)] -= v;
    }
    let lu = a.lu();
    let x = lu.solve(&DVector::from_column_slice(b))?;
    x.iter().all(|v| v.is_finite()).then(|| x.as_slice().to_vec())
}

/// CGNR: conjugate gradients on `Aᵀ A f = Aᵀ b` with `A = tI − K`.
fn solve_normal_cg(k: &MomentKernel, t: f64, b: &[f64]) -> Option<Vec<f64>> {
    let n = k.len();
    let apply = |x: &[f64], out: &mut Vec<f64>| {
        k.apply_into(x, out);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = t * xi - *o;
        }
    };
    let apply_t = |x: &[f64], out: &mut Vec<f64>| {
        k.left_apply_into(x, out);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = t * xi - *o;
        }
    };
    let bnorm = b.iter().fold(0.0, |a: f64, &v| a.max(v.abs())).max(1.0);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    apply_t(&r, &mut z);
    let mut p = z.clone();
    let mut zz: f64 = z.iter().map(|v| v * v).sum();
    let mut w = vec![0.0; n];
    let max_iter = 20 * n + 1000;
    for _ in 0..max_iter {
        let rmax = r.iter().fold(0.0, |a: f64, &v| a.max(v.abs()));
        if rmax <= CG_TOL * bnorm {
            return Some(x);
        }
        apply(&p, &mut w);
        let ww: f64 = w.iter().map(|v| v * v).sum();
        if ww == 0.0 {
            return None;
        }
        let alpha = zz / ww;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * w[i];
        }
        apply_t(&r, &mut z);
        let zz_new: f64 = z.iter().map(|v| v * v).sum();
        let beta = zz_new / zz;
        zz = zz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_and_iterative_agree() {
        let n = 40;
        let k = MomentKernel::from_triplets(
            n,
            (0..n).flat_map(|i| {
                [(i, (i + 1) % n, 0.4), (i, (i + n - 1) % n, 0.5), (i, i, 0.05)]
            }),
        )
        .unwrap();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i % 3) as f64).collect();
        let dense = solve_dense(&k, 1.3, &b).unwrap();
        let cg = solve_normal_cg(&k, 1.3, &b).unwrap();
        for (a, c) in dense.iter().zip(&cg) {
            assert!((a - c).abs() < 1e-9);
        }
    }

    #[test]
    fn singular_system_detected() {
        let k = MomentKernel::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(solve_dense(&k, 1.0, &[1.0, 1.0]).is_none());
    }
}
