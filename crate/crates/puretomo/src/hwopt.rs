//! Device-aware qubit selection: find a chain of exactly D physical qubits
//! minimizing accumulated error weights on a calibration graph, compare the
//! shortest-path-tree heuristic against an exhaustive oracle, and benchmark
//! selections by Hellinger distance under weight-derived noise.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{hellinger, stream_rng, EmpiricalDistribution};
use crate::state::{gates, GateSpec, StateVector};

/// Calibration graph: node weights are local-gate error rates, edge weights
/// two-qubit-gate error rates.
#[derive(Clone, Debug)]
pub struct DeviceGraph {
    directed: bool,
    ids: Vec<u32>,
    node_weights: Vec<f64>,
    /// Outgoing adjacency in internal indices.
    adjacency: Vec<Vec<(usize, f64)>>,
}

/// On-disk schema: `{directed, nodes: [{id, weight}], edges: [{a, b, weight}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviceGraphFile {
    #[serde(default)]
    pub directed: bool,
    pub nodes: Vec<DeviceNodeFile>,
    pub edges: Vec<DeviceEdgeFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviceNodeFile {
    pub id: u32,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviceEdgeFile {
    pub a: u32,
    pub b: u32,
    pub weight: f64,
}

impl DeviceGraph {
    pub fn from_file(file: &DeviceGraphFile) -> Result<Self> {
        let mut ids = Vec::with_capacity(file.nodes.len());
        let mut node_weights = Vec::with_capacity(file.nodes.len());
        for node in &file.nodes {
            if ids.contains(&node.id) {
                return Err(Error::schema("nodes", format!("duplicate id {}", node.id)));
            }
            if node.weight < 0.0 {
                return Err(Error::schema("nodes", "weights must be nonnegative"));
            }
            ids.push(node.id);
            node_weights.push(node.weight);
        }
        let index_of = |id: u32| -> Result<usize> {
            ids.iter()
                .position(|x| *x == id)
                .ok_or_else(|| Error::schema("edges", format!("unknown node id {id}")))
        };
        let mut adjacency = vec![Vec::new(); ids.len()];
        for edge in &file.edges {
            if edge.weight < 0.0 {
                return Err(Error::schema("edges", "weights must be nonnegative"));
            }
            let (a, b) = (index_of(edge.a)?, index_of(edge.b)?);
            adjacency[a].push((b, edge.weight));
            if !file.directed {
                adjacency[b].push((a, edge.weight));
            }
        }
        for list in &mut adjacency {
            list.sort_by(|x, y| x.0.cmp(&y.0));
        }
        Ok(DeviceGraph {
            directed: file.directed,
            ids,
            node_weights,
            adjacency,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn node_weight_by_id(&self, id: u32) -> Option<f64> {
        self.ids
            .iter()
            .position(|x| *x == id)
            .map(|i| self.node_weights[i])
    }

    pub fn edge_weight_by_ids(&self, a: u32, b: u32) -> Option<f64> {
        let ia = self.ids.iter().position(|x| *x == a)?;
        let ib = self.ids.iter().position(|x| *x == b)?;
        self.adjacency[ia]
            .iter()
            .find(|(t, _)| *t == ib)
            .map(|(_, w)| *w)
    }

    /// Reversed copy (edge directions flipped); identical for undirected graphs.
    pub fn reversed(&self) -> DeviceGraph {
        let mut adjacency = vec![Vec::new(); self.len()];
        for (from, list) in self.adjacency.iter().enumerate() {
            for &(to, w) in list {
                adjacency[to].push((from, w));
            }
        }
        for list in &mut adjacency {
            list.sort_by(|x, y| x.0.cmp(&y.0));
        }
        DeviceGraph {
            directed: self.directed,
            ids: self.ids.clone(),
            node_weights: self.node_weights.clone(),
            adjacency,
        }
    }

    fn path_cost(&self, internal: &[usize]) -> f64 {
        let nodes: f64 = internal.iter().map(|&v| self.node_weights[v]).sum();
        let mut edges = 0.0;
        for pair in internal.windows(2) {
            let w = self.adjacency[pair[0]]
                .iter()
                .find(|(t, _)| *t == pair[1])
                .map(|(_, w)| *w)
                .expect("consecutive path nodes are adjacent");
            edges += w;
        }
        nodes + edges
    }

    fn externalize(&self, internal: &[usize]) -> Vec<u32> {
        internal.iter().map(|&v| self.ids[v]).collect()
    }
}

/// A simple chain of physical qubits with its accumulated error cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitPath {
    pub nodes: Vec<u32>,
    pub cost: f64,
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (cost, node)
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path-tree heuristic: run a Dijkstra sweep from every source,
/// keep the tree path to each target, filter to exactly `d` nodes, and take
/// the cheapest. Ties break to the lexicographically smallest node sequence.
///
/// Shortest-path trees need not contain the optimal fixed-length chain, so
/// this can exceed the true optimum; [`exhaustive_paths_oracle`] measures
/// the gap.
pub fn best_fixed_length_path(g: &DeviceGraph, d: usize) -> Result<QubitPath> {
    if g.is_empty() || d == 0 {
        return Err(Error::NoChain(d));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for source in 0..g.len() {
        let paths = dijkstra_tree_paths(g, source);
        for path in paths.into_iter().flatten() {
            if path.len() != d {
                continue;
            }
            let cost = g.path_cost(&path);
            let better = match &best {
                None => true,
                Some((c, p)) => cost < c - 1e-15 || ((cost - c).abs() <= 1e-15 && path < *p),
            };
            if better {
                best = Some((cost, path));
            }
        }
    }
    match best {
        Some((cost, path)) => Ok(QubitPath {
            nodes: g.externalize(&path),
            cost,
        }),
        None => Err(Error::NoChain(d)),
    }
}

/// Dijkstra from `source` under the node-plus-edge cost; returns the tree
/// path to every reachable node.
fn dijkstra_tree_paths(g: &DeviceGraph, source: usize) -> Vec<Option<Vec<usize>>> {
    let n = g.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut paths: Vec<Option<Vec<usize>>> = vec![None; n];
    dist[source] = g.node_weights[source];
    paths[source] = Some(vec![source]);
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        cost: dist[source],
        node: source,
    });
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        for &(next, w) in &g.adjacency[node] {
            let cand = cost + w + g.node_weights[next];
            let replace = cand < dist[next] - 1e-15 || {
                // deterministic tie-break on equal cost
                (cand - dist[next]).abs() <= 1e-15
                    && paths[next].as_ref().is_some_and(|p| {
                        let mut candidate = paths[node].clone().unwrap();
                        candidate.push(next);
                        candidate < *p
                    })
            };
            if replace {
                dist[next] = cand;
                let mut path = paths[node].clone().unwrap();
                path.push(next);
                paths[next] = Some(path);
                heap.push(HeapEntry {
                    cost: cand,
                    node: next,
                });
            }
        }
    }
    paths
}

const ORACLE_NODE_CAP: usize = 16;

/// True optimum by depth-first enumeration of all simple paths with exactly
/// `d` nodes. Refuses graphs beyond 16 nodes.
pub fn exhaustive_paths_oracle(g: &DeviceGraph, d: usize) -> Result<QubitPath> {
    if g.len() > ORACLE_NODE_CAP {
        return Err(Error::OracleCap(g.len(), ORACLE_NODE_CAP));
    }
    if g.is_empty() || d == 0 || d > g.len() {
        return Err(Error::NoChain(d));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut stack: Vec<usize> = Vec::with_capacity(d);
    fn dfs(
        g: &DeviceGraph,
        d: usize,
        stack: &mut Vec<usize>,
        visited: u32,
        cost: f64,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if stack.len() == d {
            let better = match best {
                None => true,
                Some((c, p)) => cost < *c - 1e-15 || ((cost - *c).abs() <= 1e-15 && *stack < *p),
            };
            if better {
                *best = Some((cost, stack.clone()));
            }
            return;
        }
        let last = *stack.last().unwrap();
        for &(next, w) in &g.adjacency[last] {
            if visited & (1 << next) == 0 {
                stack.push(next);
                dfs(
                    g,
                    d,
                    stack,
                    visited | (1 << next),
                    cost + w + g.node_weights[next],
                    best,
                );
                stack.pop();
            }
        }
    }
    for source in 0..g.len() {
        stack.clear();
        stack.push(source);
        dfs(
            g,
            d,
            &mut stack,
            1 << source,
            g.node_weights[source],
            &mut best,
        );
    }
    match best {
        Some((cost, path)) => Ok(QubitPath {
            nodes: g.externalize(&path),
            cost,
        }),
        None => Err(Error::NoChain(d)),
    }
}

/// Per-seed Hellinger distances of two candidate chains.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HellingerComparison {
    pub per_seed: Vec<SeedDistances>,
    pub median_optimized: f64,
    pub median_control: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedDistances {
    pub seed: u64,
    pub optimized: f64,
    pub control: f64,
}

/// Simulate the layered benchmark-state preparation, echoed by its inverse,
/// on two physical chains, with depolarizing noise per gate and readout
/// flips taken from the device weights; report the Hellinger distance of
/// the sampled distribution to the ideal point mass at the all-zeros
/// outcome for each seed.
///
/// The echo matters: the benchmark state's plain computational distribution
/// is uniform, which a Pauli channel and readout flips leave untouched, so
/// measuring the state directly would hide any amount of modeled noise.
pub fn compare_selection_hellinger(
    g: &DeviceGraph,
    optimized: &QubitPath,
    control: &QubitPath,
    shots: u64,
    seeds: &[u64],
) -> Result<HellingerComparison> {
    let n = optimized.nodes.len();
    if n < 2 || control.nodes.len() != n {
        return Err(Error::schema(
            "paths",
            "both chains must share a length of at least 2",
        ));
    }
    let mut ideal_probs = vec![0.0; 1 << n];
    ideal_probs[0] = 1.0;
    let ideal = EmpiricalDistribution::from_probabilities(n, ideal_probs)?;
    let mut per_seed = Vec::with_capacity(seeds.len());
    for (i, &seed) in seeds.iter().enumerate() {
        let optimized_d =
            noisy_preparation_distribution(g, &optimized.nodes, shots, seed, 2 * i as u64)?;
        let control_d =
            noisy_preparation_distribution(g, &control.nodes, shots, seed, 2 * i as u64 + 1)?;
        per_seed.push(SeedDistances {
            seed,
            optimized: hellinger(&optimized_d, &ideal)?,
            control: hellinger(&control_d, &ideal)?,
        });
    }
    let mut opt: Vec<f64> = per_seed.iter().map(|s| s.optimized).collect();
    let mut ctl: Vec<f64> = per_seed.iter().map(|s| s.control).collect();
    Ok(HellingerComparison {
        per_seed,
        median_optimized: median(&mut opt),
        median_control: median(&mut ctl),
    })
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// One gate of the logical preparation circuit.
enum PrepGate {
    SqrtX(usize),
    Ecr(usize, usize),
}

fn preparation_gates(n: usize) -> Vec<PrepGate> {
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(PrepGate::SqrtX(q));
    }
    if n == 2 {
        gates.push(PrepGate::Ecr(0, 1));
        gates.push(PrepGate::SqrtX(0));
        return gates;
    }
    if n % 2 == 0 {
        for j in 0..n / 2 {
            gates.push(PrepGate::Ecr(2 * j, 2 * j + 1));
        }
        gates.push(PrepGate::SqrtX(0));
        for k in 0..n / 2 - 1 {
            gates.push(PrepGate::Ecr(2 * k + 1, 2 * k + 2));
        }
    } else {
        for j in 0..n / 2 {
            gates.push(PrepGate::Ecr(2 * j, 2 * j + 1));
        }
        gates.push(PrepGate::SqrtX(n - 1));
        gates.push(PrepGate::SqrtX(0));
        for k in 0..n / 2 {
            gates.push(PrepGate::Ecr(2 * k + 1, 2 * k + 2));
        }
    }
    gates
}

/// Monte-Carlo trajectories of the echoed preparation (forward circuit then
/// its adjoint): after each gate, each touched qubit suffers a uniformly
/// random Pauli with probability equal to the mapped error weight; readout
/// flips each outcome bit with the (capped) node weight.
fn noisy_preparation_distribution(
    g: &DeviceGraph,
    chain: &[u32],
    shots: u64,
    seed: u64,
    stream: u64,
) -> Result<EmpiricalDistribution> {
    let n = chain.len();
    let node_err: Vec<f64> = chain
        .iter()
        .map(|id| {
            g.node_weight_by_id(*id)
                .ok_or_else(|| Error::schema("paths", format!("unknown node id {id}")))
        })
        .collect::<Result<_>>()?;
    let mut edge_err = vec![0.0; n.saturating_sub(1)];
    for i in 0..n - 1 {
        edge_err[i] = g
            .edge_weight_by_ids(chain[i], chain[i + 1])
            .or_else(|| g.edge_weight_by_ids(chain[i + 1], chain[i]))
            .ok_or_else(|| {
                Error::schema(
                    "paths",
                    format!(
                        "chain nodes {} and {} are not connected",
                        chain[i],
                        chain[i + 1]
                    ),
                )
            })?;
    }
    let gates_list = preparation_gates(n);
    let sqrt_x = gates::sqrt_x();
    let sqrt_x_dag = gates::adjoint2(&sqrt_x);
    // echoed circuit: forward once, then the adjoints in reverse order (the
    // entangling gate is self-inverse); noise strikes after every gate
    let mut program: Vec<(GateSpec, Vec<(usize, f64)>)> = Vec::new();
    let mut push_gate = |gate: &PrepGate, adjoint: bool| -> crate::error::Result<()> {
        match gate {
            PrepGate::SqrtX(q) => {
                let m = if adjoint { sqrt_x_dag } else { sqrt_x };
                program.push((GateSpec::single(*q, m)?, vec![(*q, node_err[*q])]));
            }
            PrepGate::Ecr(a, b) => {
                let p = edge_err[*a.min(b)];
                program.push((gates::ecr(*a, *b)?, vec![(*a, p), (*b, p)]));
            }
        }
        Ok(())
    };
    for gate in &gates_list {
        push_gate(gate, false)?;
    }
    for gate in gates_list.iter().rev() {
        push_gate(gate, true)?;
    }
    let mut rng = stream_rng(seed, stream);
    let mut histogram = vec![0u64; 1 << n];
    for _ in 0..shots {
        let mut state = StateVector::zero_state(n)?;
        for (gate, noise_sites) in &program {
            state = state.apply_gate(gate)?;
            for &(q, p) in noise_sites {
                maybe_pauli(&mut state, q, p, &mut rng)?;
            }
        }
        let weights = state.weights();
        let mut u = rng.gen::<f64>();
        let mut outcome = 0usize;
        for (label, w) in weights.iter().enumerate() {
            if u < *w {
                outcome = label;
                break;
            }
            u -= w;
        }
        // readout flips
        for (q, &err) in node_err.iter().enumerate() {
            let flip = err.min(0.5);
            if flip > 0.0 && rng.gen::<f64>() < flip {
                outcome ^= 1 << q;
            }
        }
        histogram[outcome] += 1;
    }
    let total = shots.max(1) as f64;
    EmpiricalDistribution::from_probabilities(
        n,
        histogram.iter().map(|c| *c as f64 / total).collect(),
    )
}

fn maybe_pauli(
    state: &mut StateVector,
    q: usize,
    p: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<()> {
    if p > 0.0 && rng.gen::<f64>() < p {
        let m: [Complex64; 4] = match rng.gen_range(0..3) {
            0 => gates::pauli_x(),
            1 => gates::pauli_y(),
            _ => gates::pauli_z(),
        };
        *state = state.apply_gate(&GateSpec::single(q, m)?)?;
    }
    Ok(())
}
