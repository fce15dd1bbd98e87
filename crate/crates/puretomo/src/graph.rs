//! The weighted estimation graph: vertices are computational labels weighted
//! by their outcome probabilities, edges are the label pairs for which a
//! polarization identity is available. Reconstruction order and error
//! behavior are governed by paths and spanning trees of this graph.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::rotate_label;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationGraph {
    n: usize,
    weights: Vec<f64>,
    edges: BTreeSet<(usize, usize)>,
    /// Vertices that survived pruning.
    alive: Vec<bool>,
}

impl EstimationGraph {
    pub fn from_edges(
        n: usize,
        weights: Vec<f64>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let dim = 1usize << n;
        if weights.len() != dim {
            return Err(Error::DimensionMismatch(weights.len(), dim));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= dim || b >= dim || a == b {
                return Err(Error::LabelOutOfRange { label: a.max(b), n });
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(EstimationGraph {
            n,
            weights,
            edges: set,
            alive: vec![true; dim],
        })
    }

    /// Full hypercube: one edge per label pair at Hamming distance one.
    pub fn hypercube(n: usize, weights: Vec<f64>) -> Result<Self> {
        let dim = 1usize << n;
        let mut edges = Vec::with_capacity(n * dim / 2);
        for j in 0..dim {
            for k in 0..n {
                if j & (1 << k) == 0 {
                    edges.push((j, j | (1 << k)));
                }
            }
        }
        Self::from_edges(n, weights, edges)
    }

    /// The Hamiltonian cycle of the hypercube traced out by the CNOT-chain
    /// rotation of the label cycle.
    pub fn rotated_cycle(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewQubits { n, min: 2 });
        }
        let mask = (1usize << n) - 1;
        let edges = (0..=mask).map(|j| (rotate_label(j), rotate_label((j + 1) & mask)));
        Self::from_edges(n, weights, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_alive(&self, v: usize) -> bool {
        self.alive[v]
    }

    pub fn alive_vertices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&v| self.alive[v]).collect()
    }

    /// Edges between alive vertices, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(a, b)| self.alive[a] && self.alive[b])
            .collect()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        // edge set is small (n 2^(n-1)); a scan keeps the structure simple
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v && self.alive[b] {
                    Some(b)
                } else if b == v && self.alive[a] {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.dim()];
        for &(a, b) in &self.edges {
            if self.alive[a] && self.alive[b] {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Remove vertices with weight <= tau; report whether the surviving
    /// subgraph is connected. Vertices with zero weight carry no usable
    /// information, so removal never loses signal.
    pub fn prune_and_check_connectivity(&self, tau: f64) -> (EstimationGraph, bool) {
        let mut pruned = self.clone();
        for v in 0..pruned.dim() {
            if pruned.weights[v] <= tau {
                pruned.alive[v] = false;
            }
        }
        let connected = pruned.components().len() <= 1;
        (pruned, connected)
    }

    /// Connected components of the alive subgraph, each sorted, ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.dim()];
        let mut out = Vec::new();
        for start in 0..self.dim() {
            if !self.alive[start] || seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &u in &adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn component_of(&self, v: usize) -> Vec<usize> {
        self.components()
            .into_iter()
            .find(|c| c.contains(&v))
            .unwrap_or_default()
    }

    fn bfs_distances(&self, source: usize, adj: &[Vec<usize>]) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.dim()];
        dist[source] = Some(0);
        let mut frontier = vec![source];
        let mut d = 0u32;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for &v in &frontier {
                for &u in &adj[v] {
                    if dist[u].is_none() {
                        dist[u] = Some(d);
                        next.push(u);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    /// Among all minimal-length paths from `j` to `k`, the one maximizing the
    /// summed vertex weights, ties broken by lexicographically smallest
    /// vertex sequence.
    pub fn optimal_path(&self, j: usize, k: usize) -> Result<PathResult> {
        if j >= self.dim() || k >= self.dim() {
            return Err(Error::LabelOutOfRange {
                label: j.max(k),
                n: self.n,
            });
        }
        if !self.alive[j] {
            return Err(Error::VertexPruned(j));
        }
        if !self.alive[k] {
            return Err(Error::VertexPruned(k));
        }
        let adj = self.adjacency();
        let dist = self.bfs_distances(j, &adj);
        let Some(dk) = dist[k] else {
            return Err(Error::NoPath {
                j,
                k,
                a: self.component_of(j),
                b: self.component_of(k),
            });
        };
        // dynamic program over the shortest-path DAG in BFS-layer order;
        // appending the same vertex preserves both orderings, so comparing
        // (score, path) at each predecessor is sound
        let mut best: Vec<Option<(f64, Vec<usize>)>> = vec![None; self.dim()];
        best[j] = Some((self.weights[j], vec![j]));
        let mut layer: Vec<usize> = vec![j];
        for d in 0..dk {
            let mut next: Vec<usize> = Vec::new();
            for &v in &layer {
                for &u in &adj[v] {
                    if dist[u] == Some(d + 1) {
                        let (score_v, path_v) = best[v].clone().unwrap();
                        let cand_score = score_v + self.weights[u];
                        let mut cand_path = path_v;
                        cand_path.push(u);
                        let better = match &best[u] {
                            None => true,
                            Some((s, p)) => {
                                cand_score > *s + 1e-15
                                    || ((cand_score - *s).abs() <= 1e-15 && cand_path < *p)
                            }
                        };
                        if better {
                            if best[u].is_none() {
                                next.push(u);
                            }
                            best[u] = Some((cand_score, cand_path));
                        }
                    }
                }
            }
            next.sort_unstable();
            next.dedup();
            layer = next;
        }
        let (weight, vertices) = best[k].clone().expect("k is reachable");
        Ok(PathResult {
            length: vertices.len() - 1,
            vertices,
            weight,
        })
    }

    /// Shortest-path tree rooted at `root` (default: heaviest vertex). Every
    /// tree path realizes the graph geodesic; among valid parents the
    /// heaviest wins, ties to the smaller label. `edge_ok` can veto an edge
    /// (e.g. phase-unreliable estimates) as long as an alternative parent at
    /// the same depth exists.
    pub fn reconstruction_tree(
        &self,
        root: Option<usize>,
        edge_ok: Option<&dyn Fn(usize, usize) -> bool>,
    ) -> Result<SpanningTree> {
        let root = match root {
            Some(r) => {
                if r >= self.dim() {
                    return Err(Error::LabelOutOfRange {
                        label: r,
                        n: self.n,
                    });
                }
                if !self.alive[r] {
                    return Err(Error::VertexPruned(r));
                }
                r
            }
            None => self.default_root()?,
        };
        let components = self.components();
        if components.len() > 1 {
            return Err(Error::Disconnected { components });
        }
        let adj = self.adjacency();
        let dist = self.bfs_distances(root, &adj);
        self.tree_from_distances(root, &adj, &dist, |candidates| {
            // reliable parents first, then weight, then label
            let pick = |list: &[usize]| -> Option<usize> {
                list.iter().copied().max_by(|&a, &b| {
                    self.weights[a]
                        .partial_cmp(&self.weights[b])
                        .unwrap()
                        .then(b.cmp(&a))
                })
            };
            match edge_ok {
                None => pick(&candidates.parents).unwrap(),
                Some(ok) => {
                    let (child, parents) = (candidates.child, &candidates.parents);
                    let good: Vec<usize> = parents
                        .iter()
                        .copied()
                        .filter(|&p| ok(p.min(child), p.max(child)))
                        .collect();
                    if good.is_empty() {
                        pick(parents).unwrap()
                    } else {
                        pick(&good).unwrap()
                    }
                }
            }
        })
    }

    /// Shortest-path tree with seeded random parent choices; used to build
    /// the candidate pool for best-of selection.
    pub fn randomized_shortest_path_tree(
        &self,
        root: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<SpanningTree> {
        if !self.alive[root] {
            return Err(Error::VertexPruned(root));
        }
        let components = self.components();
        if components.len() > 1 {
            return Err(Error::Disconnected { components });
        }
        let adj = self.adjacency();
        let dist = self.bfs_distances(root, &adj);
        self.tree_from_distances(root, &adj, &dist, |candidates| {
            *candidates.parents.choose(rng).unwrap()
        })
    }

    fn default_root(&self) -> Result<usize> {
        (0..self.dim())
            .filter(|&v| self.alive[v])
            .max_by(|&a, &b| {
                self.weights[a]
                    .partial_cmp(&self.weights[b])
                    .unwrap()
                    .then(b.cmp(&a))
            })
            .ok_or(Error::ZeroVector)
    }

    fn tree_from_distances(
        &self,
        root: usize,
        adj: &[Vec<usize>],
        dist: &[Option<u32>],
        mut choose: impl FnMut(&ParentCandidates) -> usize,
    ) -> Result<SpanningTree> {
        let dim = self.dim();
        let mut parent: Vec<Option<usize>> = vec![None; dim];
        let mut depth: Vec<u32> = vec![0; dim];
        let mut order: Vec<usize> = vec![root];
        let mut by_depth: Vec<Vec<usize>> = Vec::new();
        for v in 0..dim {
            if let Some(d) = dist[v] {
                if d > 0 {
                    let d = d as usize;
                    if by_depth.len() < d {
                        by_depth.resize(d, Vec::new());
                    }
                    by_depth[d - 1].push(v);
                }
            }
        }
        for (level, vertices) in by_depth.iter().enumerate() {
            let d = (level + 1) as u32;
            for &v in vertices {
                let parents: Vec<usize> = adj[v]
                    .iter()
                    .copied()
                    .filter(|&u| dist[u] == Some(d - 1))
                    .collect();
                debug_assert!(!parents.is_empty());
                let p = choose(&ParentCandidates { child: v, parents });
                parent[v] = Some(p);
                depth[v] = d;
                order.push(v);
            }
        }
        Ok(SpanningTree {
            root,
            parent,
            depth,
            order,
        })
    }
}

struct ParentCandidates {
    child: usize,
    parents: Vec<usize>,
}

/// A path with its vertex-weight score.
#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub vertices: Vec<usize>,
    pub length: usize,
    pub weight: f64,
}

/// Shortest-path spanning tree of the pruned component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanningTree {
    pub root: usize,
    /// Parent per vertex; `None` for the root and for pruned vertices.
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<u32>,
    /// Root-first traversal order (parents always precede children).
    pub order: Vec<usize>,
}

impl SpanningTree {
    pub fn edge_count(&self) -> usize {
        self.parent.iter().flatten().count()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.order
            .iter()
            .filter_map(|&v| self.parent[v].map(|p| (p, v)))
            .collect()
    }

    pub fn max_depth(&self) -> u32 {
        self.order.iter().map(|&v| self.depth[v]).max().unwrap_or(0)
    }
}

/// Closed-form number of spanning trees of the n-dimensional hypercube:
/// `2^-n * prod_{i=1..n} (2i)^C(n,i)`.
pub fn spanning_tree_count(n: usize) -> BigUint {
    let mut result = BigUint::from(1u32);
    for i in 1..=n {
        let base = BigUint::from(2 * i as u64);
        result *= base.pow(binomial(n, i) as u32);
    }
    // the product is divisible by 2^n: total power of two is sum C(n,i)(1+v2(i)) >= 2^n - 1 + n
    result >> n
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
