//! Lattice geometry: generator sets of `Z^d` and axis-aligned boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point (site or step) of `Z^d`.
pub type Point = Vec<i64>;

/// The finite step set of a branching random walk together with a declared
/// generating subset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSet {
    dimension: usize,
    steps: Vec<Point>,
    /// Indices into `steps`.
    gen_subset: Vec<usize>,
}

impl GeneratorSet {
    pub fn new(dimension: usize, steps: Vec<Point>, gen_subset: &[Point]) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::config("dimension must be positive"));
        }
        if steps.is_empty() {
            return Err(Error::config("step set is empty"));
        }
        for (i, s) in steps.iter().enumerate() {
            if s.len() != dimension {
                return Err(Error::config(format!(
                    "step {s:?} has length {}, expected {dimension}",
                    s.len()
                )));
            }
            if steps[..i].contains(s) {
                return Err(Error::config(format!("duplicate step {s:?}")));
            }
        }
        let mut subset = Vec::with_capacity(gen_subset.len());
        for g in gen_subset {
            let idx = steps
                .iter()
                .position(|s| s == g)
                .ok_or_else(|| Error::config(format!("generating step {g:?} is not a step")))?;
            if !subset.contains(&idx) {
                subset.push(idx);
            }
        }
        let basis: Vec<Point> = subset.iter().map(|&i| steps[i].clone()).collect();
        if !spans_integer_lattice(&basis, dimension) {
            return Err(Error::config(format!(
                "generating subset {basis:?} does not generate Z^{dimension}"
            )));
        }
        Ok(GeneratorSet {
            dimension,
            steps,
            gen_subset: subset,
        })
    }

    /// Nearest-neighbour steps `{±e_i}` with the whole set declared generating.
    pub fn nearest_neighbour(dimension: usize) -> Self {
        let mut steps = Vec::with_capacity(2 * dimension);
        for i in 0..dimension {
            for sign in [1, -1] {
                let mut e = vec![0; dimension];
                e[i] = sign;
                steps.push(e);
            }
        }
        let gens = steps.clone();
        GeneratorSet::new(dimension, steps, &gens).expect("unit vectors generate Z^d")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn steps(&self) -> &[Point] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn gen_subset(&self) -> &[usize] {
        &self.gen_subset
    }

    pub fn index_of(&self, step: &[i64]) -> Option<usize> {
        self.steps.iter().position(|s| s.as_slice() == step)
    }

    /// Largest `|s_i|` over all steps and coordinates.
    pub fn max_reach(&self) -> i64 {
        self.steps
            .iter()
            .flat_map(|s| s.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// Whether the integer span of `vectors` is all of `Z^d`.
///
/// Row-reduces with unimodular integer operations to an echelon basis; the
/// span is `Z^d` iff there are `d` pivots, all equal to ±1.
pub fn spans_integer_lattice(vectors: &[Point], dimension: usize) -> bool {
    let mut rows: Vec<Vec<i128>> = vectors
        .iter()
        .map(|v| v.iter().map(|&c| c as i128).collect())
        .collect();
    let mut pivot_row = 0;
    for col in 0..dimension {
        // Euclid on column `col` over rows pivot_row.. until one nonzero remains.
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..rows.len() {
                if rows[r][col] != 0
                    && best.is_none_or(|b| rows[r][col].abs() < rows[b][col].abs())
                {
                    best = Some(r);
                }
            }
            let Some(b) = best else { return false };
            rows.swap(pivot_row, b);
            let mut done = true;
            for r in pivot_row + 1..rows.len() {
                if rows[r][col] != 0 {
                    let q = rows[r][col] / rows[pivot_row][col];
                    for c in col..dimension {
                        rows[r][c] -= q * rows[pivot_row][c];
                    }
                    if rows[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if rows[pivot_row][col].abs() != 1 {
            return false;
        }
        pivot_row += 1;
    }
    true
}

/// The box `[-L, L]^d`, with sites ranked lexicographically (first coordinate
/// most significant).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    dimension: usize,
    half_width: i64,
}

impl Window {
    pub fn new(dimension: usize, half_width: i64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::config("window dimension must be positive"));
        }
        if half_width < 0 {
            return Err(Error::config("window half-width must be non-negative"));
        }
        let side = (2 * half_width + 1) as u128;
        if side.checked_pow(dimension as u32).is_none_or(|n| n > usize::MAX as u128 / 8) {
            return Err(Error::config("window too large"));
        }
        Ok(Window {
            dimension,
            half_width,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_width(&self) -> i64 {
        self.half_width
    }

    pub fn side(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        site.len() == self.dimension && site.iter().all(|c| c.abs() <= self.half_width)
    }

    /// Whether every site of `other` lies in `self`.
    pub fn covers(&self, other: &Window) -> bool {
        self.dimension == other.dimension && self.half_width >= other.half_width
    }

    pub fn rank(&self, site: &[i64]) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let side = self.side();
        Some(site.iter().fold(0usize, |acc, &c| {
            acc * side + (c + self.half_width) as usize
        }))
    }

    pub fn site(&self, rank: usize) -> Point {
        let side = self.side();
        let mut out = vec![0; self.dimension];
        let mut r = rank;
        for c in out.iter_mut().rev() {
            *c = (r % side) as i64 - self.half_width;
            r /= side;
        }
        out
    }

    pub fn origin_rank(&self) -> usize {
        self.len() / 2
    }

    /// Rank of `site(rank) + step`, or `None` if it leaves the box.
    pub fn shift(&self, rank: usize, step: &[i64]) -> Option<usize> {
        let side = self.side();
        let mut r = rank;
        let mut stride = 1usize;
        let mut out = rank as i128;
        for &s in step.iter().rev() {
            let c = (r % side) as i64 - self.half_width + s;
            if c.abs() > self.half_width {
                return None;
            }
            out += s as i128 * stride as i128;
            r /= side;
            stride *= side;
        }
        Some(out as usize)
    }

    pub fn sites(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|r| self.site(r))
    }
}
