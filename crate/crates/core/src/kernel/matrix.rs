//! Sparse nonnegative first-moment kernels.

use std::fmt::Write as _;
use std::io::Write;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::environment::EnvironmentRealization;
use super::lattice::{Point, Window};
use crate::error::{Error, Result};

/// How mass leaving a window is treated when restricting a kernel to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Outflow is collected by an extra absorbing state `Δ` (the last index).
    Absorbing,
    /// Outflow is dropped: the kernel is the principal submatrix on the window.
    Truncated,
}

/// A nonnegative matrix `m(x, y)` in compressed sparse row form.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentKernel {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    origin: usize,
    absorbing: Option<usize>,
    window: Option<Window>,
}

impl MomentKernel {
    /// Builds a kernel from `(row, col, value)` triplets; repeated positions
    /// are summed and zeros dropped.
    pub fn from_triplets(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("entry ({i}, {j}) outside {n} states")));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("entry ({i}, {j}) = {v} is not >= 0")));
            }
            rows[i].push((j, v));
        }
        Ok(Self::from_rows(rows))
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("dense kernel must be square"));
        }
        Self::from_triplets(
            n,
            rows.iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v))),
        )
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows((0..n).map(|i| vec![(i, 1.0)]).collect())
    }

    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        MomentKernel {
            row_ptr,
            cols,
            vals,
            origin: 0,
            absorbing: None,
            window: None,
        }
    }

    pub fn with_origin(mut self, origin: usize) -> Self {
        assert!(origin < self.len(), "origin out of range");
        self.origin = origin;
        self
    }

    /// Marks `state` as the absorbing boundary state `Δ`.
    pub fn with_absorbing(mut self, state: usize) -> Result<Self> {
        if state >= self.len() {
            return Err(Error::invalid("absorbing state out of range"));
        }
        if self.row(state).next().is_some() {
            return Err(Error::invalid("absorbing state must have an empty row"));
        }
        self.absorbing = Some(state);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn absorbing(&self) -> Option<usize> {
        self.absorbing
    }

    /// The window whose site ranks index the (non-absorbing) states, if any.
    pub fn window(&self) -> Option<Window> {
        self.window
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.len()).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.len()).map(|i| self.row_sum(i)).fold(0.0, f64::max)
    }

    /// `out = M f`.
    pub fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(j, v)| v * f[j]).sum();
        }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.apply_into(f, &mut out);
        out
    }

    /// `out = μ M` (row vector times kernel).
    pub fn left_apply_into(&self, mu: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &w) in mu.iter().enumerate() {
            if w != 0.0 {
                for (j, v) in self.row(i) {
                    out[j] += w * v;
                }
            }
        }
    }

    pub fn left_apply(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.left_apply_into(mu, &mut out);
        out
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &MomentKernel) -> MomentKernel {
        assert_eq!(self.len(), other.len(), "kernel sizes differ");
        let n = self.len();
        let mut acc = vec![0.0; n];
        let mut touched = vec![false; n];
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut idx = Vec::new();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        idx.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            let row: Vec<(usize, f64)> = idx.iter().map(|&j| (j, acc[j])).collect();
            for &j in &idx {
                acc[j] = 0.0;
                touched[j] = false;
            }
            rows.push(row);
        }
        let mut out = Self::from_rows(rows);
        out.origin = self.origin;
        out.absorbing = self.absorbing;
        out.window = self.window;
        out
    }

    /// Principal submatrix on `states` (in the given order).
    pub fn restrict(&self, states: &[usize]) -> MomentKernel {
        let mut map = vec![usize::MAX; self.len()];
        for (new, &old) in states.iter().enumerate() {
            map[old] = new;
        }
        let rows = states
            .iter()
            .map(|&i| {
                self.row(i)
                    .filter(|&(j, _)| map[j] != usize::MAX)
                    .map(|(j, v)| (map[j], v))
                    .collect()
            })
            .collect();
        let mut out = Self::from_rows(rows);
        if map[self.origin] != usize::MAX {
            out.origin = map[self.origin];
        }
        out
    }

    /// Strongly connected components of the support graph.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::with_capacity(self.len(), self.nnz());
        let nodes: Vec<_> = (0..self.len()).map(|_| g.add_node(())).collect();
        for (i, j, _) in self.triplets() {
            g.add_edge(nodes[i], nodes[j], ());
        }
        let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
                c.sort_unstable();
                c
            })
            .collect();
        comps.sort_by_key(|c| c[0]);
        comps
    }

    /// Whether the support graph is strongly connected. A single state counts
    /// as irreducible.
    pub fn is_irreducible(&self) -> bool {
        self.len() <= 1 || self.components().len() == 1
    }

    pub fn ensure_irreducible(&self) -> Result<()> {
        if self.is_irreducible() {
            Ok(())
        } else {
            Err(Error::Reducible {
                components: self.components().len(),
            })
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.len(), self.len());
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Coordinate-triplet CSV `x_index,y_index,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x_index,y_index,value")?;
        let mut line = String::new();
        for (i, j, v) in self.triplets() {
            line.clear();
            let _ = write!(line, "{i},{j},{v:e}");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Restricts the first-moment kernel of a realization to `window`.
///
/// States are the window sites in lexicographic order, plus `Δ` as the last
/// state under [`Boundary::Absorbing`]. The origin state is the window centre.
pub fn build_moment_kernel(
    env: &EnvironmentRealization,
    window: Window,
    boundary: Boundary,
) -> Result<MomentKernel> {
    if window.dimension() != env.window().dimension() || !env.window().covers(&window) {
        return Err(Error::config(format!(
            "window of half-width {} has sites without an assigned law (environment covers {})",
            window.half_width(),
            env.window().half_width()
        )));
    }
    let n = window.len();
    let steps = env.spec().generator().steps();
    let delta = n;
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n + 1);
    for r in 0..n {
        let site = window.site(r);
        let law = env.law_at(&site).expect("covered window");
        let mut row = Vec::with_capacity(steps.len());
        for (s, &m) in law.mean().iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            match window.shift(r, &steps[s]) {
                Some(t) => row.push((t, m)),
                None if boundary == Boundary::Absorbing => row.push((delta, m)),
                None => {}
            }
        }
        rows.push(row);
    }
    if boundary == Boundary::Absorbing {
        rows.push(Vec::new());
    }
    let mut kernel = MomentKernel::from_rows(rows);
    kernel.origin = window.origin_rank();
    kernel.window = Some(window);
    if boundary == Boundary::Absorbing {
        kernel.absorbing = Some(delta);
    }
    Ok(kernel)
}

/// Kernel of a spatially homogeneous walk on `window`: `m(x, x + s) = mass[s]`.
pub fn homogeneous_kernel(
    steps: &[Point],
    mass: &[f64],
    window: Window,
    boundary: Boundary,
) -> Result<MomentKernel> {
    if steps.len() != mass.len() {
        return Err(Error::invalid("steps and masses differ in length"));
    }
    if steps.iter().any(|s| s.len() != window.dimension()) {
        return Err(Error::invalid("step dimension does not match window"));
    }
    let n = window.len();
    let delta = n;
    let mut triplets = Vec::with_capacity(n * steps.len());
    for r in 0..n {
        for (s, &m) in steps.iter().zip(mass) {
            if m == 0.0 {
                continue;
            }
            match window.shift(r, s) {
                Some(t) => triplets.push((r, t, m)),
                None if boundary == Boundary::Absorbing => triplets.push((r, delta, m)),
                None => {}
            }
        }
    }
    let states = if boundary == Boundary::Absorbing { n + 1 } else { n };
    let mut kernel = MomentKernel::from_triplets(states, triplets)?;
    kernel.origin = window.origin_rank();
    kernel.window = Some(window);
    if boundary == Boundary::Absorbing {
        kernel.absorbing = Some(delta);
    }
    Ok(kernel)
}

/// `M^n`, with `M^0 = I`.
pub fn convolve_n(m: &MomentKernel, n: u32) -> MomentKernel {
    let mut result = MomentKernel::identity(m.len());
    result.origin = m.origin;
    result.absorbing = m.absorbing;
    result.window = m.window;
    let mut base = m.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base);
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::kernel::{EnvironmentSpec, GeneratorSet, OffspringVector, SiteLaw};

    fn homogeneous(mean: &[f64], half_width: i64) -> EnvironmentRealization {
        // laws with exactly these means: one atom per step
        let g = GeneratorSet::new(1, vec![vec![1], vec![-1], vec![0]], &[vec![1], vec![-1]])
            .unwrap();
        let total: f64 = mean.iter().sum();
        let atoms = mean
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(s, &m)| (OffspringVector::new([(s, 1)]).unwrap(), m / total))
            .collect::<Vec<_>>();
        // scale up to the requested total with a deterministic multiplicity
        let law = if (total - 1.0).abs() < 1e-15 {
            SiteLaw::new(3, atoms).unwrap()
        } else {
            let k = total.round() as u32;
            assert!((total - k as f64).abs() < 1e-15);
            SiteLaw::new(
                3,
                atoms
                    .into_iter()
                    .map(|(v, p)| (OffspringVector::new([(v.counts()[0].0, k)]).unwrap(), p))
                    .collect(),
            )
            .unwrap()
        };
        let spec = Arc::new(EnvironmentSpec::homogeneous(g, law).unwrap());
        EnvironmentRealization::homogeneous(spec, Window::new(1, half_width).unwrap(), 0).unwrap()
    }

    #[test]
    fn tridiagonal_transcription() {
        let (p, q) = (0.7, 0.3);
        let env = homogeneous(&[p, q, 0.0], 1);
        let k = build_moment_kernel(&env, Window::new(1, 1).unwrap(), Boundary::Truncated).unwrap();
        let d = k.to_dense();
        let expected = [[0.0, p, 0.0], [q, 0.0, p], [0.0, q, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d[(i, j)], expected[i][j]);
            }
        }
        assert_eq!(k.origin(), 1);
    }

    #[test]
    fn single_site_without_self_loop_is_zero() {
        let env = homogeneous(&[0.5, 0.5, 0.0], 3);
        let k = build_moment_kernel(&env, Window::new(1, 0).unwrap(), Boundary::Truncated).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k.nnz(), 0);
    }

    #[test]
    fn absorbing_boundary_keeps_row_mass() {
        let env = homogeneous(&[0.5, 0.25, 0.25], 4);
        let k = build_moment_kernel(&env, Window::new(1, 2).unwrap(), Boundary::Absorbing).unwrap();
        assert_eq!(k.len(), 6);
        assert_eq!(k.absorbing(), Some(5));
        for i in 0..5 {
            assert!((k.row_sum(i) - 1.0).abs() < 1e-12);
        }
        assert_eq!(k.get(4, 5), 0.5);
        assert_eq!(k.get(0, 5), 0.25);
        assert_eq!(k.row_sum(5), 0.0);
    }

    #[test]
    fn uncovered_window_is_a_configuration_error() {
        let env = homogeneous(&[0.5, 0.5, 0.0], 2);
        let err = build_moment_kernel(&env, Window::new(1, 3).unwrap(), Boundary::Truncated);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn powers() {
        let a = MomentKernel::from_dense(&[vec![0.9]]).unwrap();
        assert!((convolve_n(&a, 5).get(0, 0) - 0.9f64.powi(5)).abs() < 1e-15);
        let m = MomentKernel::from_dense(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(convolve_n(&m, 0), MomentKernel::identity(2));
        let m2 = convolve_n(&m, 2).to_dense();
        assert_eq!(m2[(0, 0)], 7.0);
        assert_eq!(m2[(1, 1)], 22.0);
        // two-step return on the p/q tridiagonal kernel: p·q + q·p
        let (p, q) = (0.6, 0.4);
        let env = homogeneous(&[p, q, 0.0], 3);
        let k = build_moment_kernel(&env, Window::new(1, 3).unwrap(), Boundary::Truncated).unwrap();
        let k2 = convolve_n(&k, 2);
        for x in 1..6 {
            assert!((k2.get(x, x) - 2.0 * p * q).abs() < 1e-15);
        }
    }

    #[test]
    fn irreducibility_and_components() {
        let m = MomentKernel::from_dense(&[
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(!m.is_irreducible());
        assert_eq!(m.components(), vec![vec![0, 1], vec![2]]);
        assert!(MomentKernel::from_dense(&[vec![0.0]]).unwrap().is_irreducible());
        assert!(MomentKernel::from_dense(&[vec![1.0, -1.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn csv_export() {
        let m = MomentKernel::from_dense(&[vec![0.0, 0.5], vec![2.0, 0.0]]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x_index,y_index,value\n0,1,5e-1\n1,0,2e0\n");
    }
}
