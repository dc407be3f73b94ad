//! Critical parameters of two classical branching random walks.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{homogeneous_kernel, Boundary, MomentKernel, Point, Window};
use crate::spectral::{spectral_radius_reducible, spectral_radius_window, SpectralEstimate};

/// A finite undirected simple graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Parses an edge list: one `u v` pair per line; blank lines and lines
    /// starting with `#` are skipped. Vertex labels are arbitrary tokens.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut edges = BTreeSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(Error::config(format!(
                    "line {}: expected `u v`, got {line:?}",
                    lineno + 1
                )));
            }
            let mut id = |t: &str| {
                *index.entry(t.to_string()).or_insert_with(|| {
                    labels.push(t.to_string());
                    labels.len() - 1
                })
            };
            let (u, v) = (id(tokens[0]), id(tokens[1]));
            edges.insert((u.min(v), u.max(v)));
        }
        if edges.is_empty() {
            return Err(Error::config("edge list is empty"));
        }
        Ok(Graph { labels, edges })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if edges.iter().any(|&(u, v)| u >= n || v >= n) {
            return Err(Error::config("edge endpoint out of range"));
        }
        Ok(Graph {
            labels: (0..n).map(|i| i.to_string()).collect(),
            edges: edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect(),
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::from_edges(n, &edges).expect("valid")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Graph::from_edges(n, &edges).expect("valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Adjacency matrix as a kernel; a loop `u u` contributes 1 on the diagonal.
    pub fn adjacency(&self) -> MomentKernel {
        let triplets = self.edges.iter().flat_map(|&(u, v)| {
            if u == v {
                vec![(u, u, 1.0)]
            } else {
                vec![(u, v, 1.0), (v, u, 1.0)]
            }
        });
        MomentKernel::from_triplets(self.vertex_count(), triplets).expect("valid adjacency")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalLambda {
    /// `1 / ρ(A)`: the walk survives locally iff `λ > lambda_critical`.
    pub lambda_critical: f64,
    pub rho: f64,
    pub residual: f64,
}

/// Critical birth rate of the continuous-time branching random walk on a
/// graph (death rate 1, birth rate λ onto each neighbour).
pub fn ct_brw_critical_lambda(graph: &Graph, tol: f64, max_iter: usize) -> Result<CriticalLambda> {
    let a = graph.adjacency();
    let comps = a.components();
    if comps.len() > 1 {
        return Err(Error::Disconnected {
            components: comps.len(),
        });
    }
    let est = spectral_radius_window(&a, tol, max_iter)?;
    if !est.converged {
        return Err(Error::NoConvergence {
            iterations: est.iterations,
            residual: est.residual,
        });
    }
    Ok(CriticalLambda {
        lambda_critical: 1.0 / est.value,
        rho: est.value,
        residual: est.residual,
    })
}

#[derive(Clone, Debug)]
pub struct CriticalMean {
    /// `1 / ρ(P)`: transient iff the mean offspring number is at most this.
    pub m_critical: f64,
    pub rho: f64,
    pub estimates: Vec<SpectralEstimate>,
}

/// Critical mean offspring for branching with independent movement by a
/// homogeneous step distribution `probs` on `Z^d`, from windowed spectral
/// radii of `P` along `schedule` (the last window gives the estimate).
pub fn independent_branching_critical_m(
    steps: &[Point],
    probs: &[f64],
    schedule: &[i64],
    tol: f64,
    max_iter: usize,
) -> Result<CriticalMean> {
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::config(format!(
            "movement kernel is not stochastic (row sum {total})"
        )));
    }
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("window schedule must be non-empty and increasing"));
    }
    let d = steps
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::config("no steps"))?;
    let mut estimates = Vec::with_capacity(schedule.len());
    for &l in schedule {
        let k = homogeneous_kernel(steps, probs, Window::new(d, l)?, Boundary::Truncated)?;
        estimates.push(spectral_radius_reducible(&k, tol, max_iter)?);
    }
    let rho = estimates.last().expect("non-empty").value;
    if rho == 0.0 {
        return Err(Error::DegenerateSupport {
            direction: Vec::new(),
            limit: 0.0,
        });
    }
    Ok(CriticalMean {
        m_critical: 1.0 / rho,
        rho,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_edge_lists() {
        let g = Graph::parse_edge_list("# triangle\na b\nb c\n\nc a\na b\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.adjacency().nnz(), 6);
        assert!(Graph::parse_edge_list("").is_err());
        assert!(Graph::parse_edge_list("1 2 3").is_err());
    }

    #[test]
    fn small_graphs() {
        let k2 = Graph::complete(2);
        let r = ct_brw_critical_lambda(&k2, 1e-12, 1000).unwrap();
        assert!((r.lambda_critical - 1.0).abs() < 1e-12);
        let c6 = Graph::cycle(6);
        let r = ct_brw_critical_lambda(&c6, 1e-12, 1000).unwrap();
        assert!((r.lambda_critical - 0.5).abs() < 1e-12);
    }

    #[test]
    fn disconnected_rejected() {
        let g = Graph::parse_edge_list("0 1\n2 3\n").unwrap();
        assert!(matches!(
            ct_brw_critical_lambda(&g, 1e-10, 100),
            Err(Error::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn lazy_walk_is_critical_at_one() {
        let r = independent_branching_critical_m(&[vec![0]], &[1.0], &[5, 10], 1e-12, 100).unwrap();
        assert!((r.m_critical - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_stochastic_rejected() {
        assert!(independent_branching_critical_m(
            &[vec![1], vec![-1]],
            &[0.5, 0.6],
            &[10],
            1e-10,
            100
        )
        .is_err());
    }
}
