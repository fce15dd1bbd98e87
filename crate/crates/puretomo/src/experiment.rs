//! Batch front end: end-to-end tomography experiments (prepare, measure,
//! reconstruct, certify) and parameter sweeps with machine-readable output.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::{disentangled_five_bases, two_n_plus_one_bases, MeasurementBasis};
use crate::bits::rotate_label;
use crate::error::{Error, Result};
use crate::graph::EstimationGraph;
use crate::measure::{
    outcome_probabilities, sample_counts, stream_rng, CountsTable, EmpiricalDistribution,
    NoiseModel,
};
use crate::recon::{
    adjoint_layer, edge_estimates, prerotate_for_zeros, purity_metric, reconstruct_chain,
    reconstruct_tree, select_best_reconstruction, EdgeEstimates, PurityReport,
    ReconstructionResult, SelectionMode,
};
use crate::state::{fidelity, prepare_graph_state, StateVector, StateVectorJson};

const STREAM_STATE: u64 = 1 << 40;
const STREAM_MEASURE: u64 = 2 << 40;
const STREAM_TREE: u64 = 3 << 40;
const STREAM_BOOTSTRAP: u64 = 4 << 40;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "five")]
    Five,
    #[serde(rename = "2n+1")]
    TwoNPlusOne,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Five => "five",
            Method::TwoNPlusOne => "2n+1",
        }
    }
}

/// Shot allocation: exact probabilities, a fixed count per basis, or a total
/// budget split equally with the remainder going to the computational basis.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotSpec {
    Exact,
    PerBasis(u64),
    TotalBudget(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    GraphState,
    Ghz,
    Random { min_weight: f64 },
    Amplitudes(StateVectorJson),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconMode {
    /// Magnitudes from the computational counts, phases along a tree.
    Tree,
    /// Closed-form products along the Gray-order chain; falls back to the
    /// tree when an estimate sits below the reliability floor.
    Chain,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Benchmark against the known target (simulation default).
    Auto,
    Benchmark,
    /// Multinomial log-likelihood of all observed counts.
    Blind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub n: usize,
    pub shots: ShotSpec,
    #[serde(default)]
    pub noise: Option<NoiseModel>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    pub state: StateSpec,
    #[serde(default)]
    pub prerotate: bool,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_selection")]
    pub selection: Selection,
    #[serde(default = "default_recon_mode")]
    pub reconstruction: ReconMode,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: u32,
}

fn default_repetitions() -> u32 {
    1
}
fn default_candidates() -> usize {
    32
}
fn default_selection() -> Selection {
    Selection::Auto
}
fn default_recon_mode() -> ReconMode {
    ReconMode::Tree
}
fn default_bootstrap() -> u32 {
    16
}

/// Machine-readable result of one experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub method: String,
    pub n: usize,
    pub seed: u64,
    pub shots_per_basis: Option<u64>,
    pub total_shots: Option<u64>,
    /// Amplitudes of the first repetition's estimate, `[re, im]` per label.
    pub amplitudes: Vec<[f64; 2]>,
    pub fidelity: Option<f64>,
    pub fidelity_stderr: Option<f64>,
    #[serde(rename = "purity_P")]
    pub purity_p: f64,
    /// Accumulated per-vertex phase variances; null on pruned vertices.
    pub phase_variances: Vec<Option<f64>>,
    pub tree: TreeJson,
    pub conventions: Conventions,
    pub warnings: Vec<String>,
    /// Per-repetition summaries when more than one repetition ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<RunSummary>>,
    pub fidelity_median: Option<f64>,
    #[serde(rename = "purity_P_median")]
    pub purity_p_median: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub repetition: u32,
    pub fidelity: Option<f64>,
    #[serde(rename = "purity_P")]
    pub purity_p: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeJson {
    pub root: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Conventions {
    /// Stored edge quantity: `rho_hat = a_low conj(a_high)`; the chain
    /// closed form uses 4x this, the variance formulas 2x.
    pub lambda: String,
    /// Qubit i is bit i of the integer label.
    pub labels: String,
    /// First index of a two-qubit gate is the low bit of its matrix.
    pub two_qubit_order: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            lambda: "rho_hat".into(),
            labels: "bit-i-is-qubit-i".into(),
            two_qubit_order: "first-index-low-bit".into(),
        }
    }
}

/// Instantiate the target state of a config.
pub fn prepare_state(spec: &StateSpec, n: usize, seed: u64) -> Result<StateVector> {
    match spec {
        StateSpec::GraphState => prepare_graph_state(n),
        StateSpec::Ghz => StateVector::ghz(n),
        StateSpec::Random { min_weight } => random_state(n, *min_weight, seed),
        StateSpec::Amplitudes(json) => {
            if json.n != n {
                return Err(Error::DimensionMismatch(json.n, n));
            }
            StateVector::from_json(json)
        }
    }
}

/// Random pure state whose weights all clear `min_weight`: a seeded weight
/// profile is mixed with the uniform one, then random phases are attached.
pub fn random_state(n: usize, min_weight: f64, seed: u64) -> Result<StateVector> {
    let dim = 1usize << n;
    if min_weight * dim as f64 > 0.9 {
        return Err(Error::schema(
            "min_weight",
            "infeasible floor: min_weight * 2^n must stay below 0.9",
        ));
    }
    let mix = (1.2 * min_weight * dim as f64).clamp(0.5, 0.95);
    let mut rng = stream_rng(seed, STREAM_STATE);
    let raw: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>().max(1e-6)).collect();
    let sum: f64 = raw.iter().sum();
    let amps: Vec<Complex64> = raw
        .iter()
        .map(|r| {
            let w = (1.0 - mix) * r / sum + mix / dim as f64;
            Complex64::from_polar(w.sqrt(), rng.gen::<f64>() * std::f64::consts::TAU)
        })
        .collect();
    StateVector::from_amplitudes(n, amps)
}

pub fn family_bases(method: Method, n: usize) -> Result<Vec<MeasurementBasis>> {
    match method {
        Method::Five => Ok(disentangled_five_bases(n)?.to_vec()),
        Method::TwoNPlusOne => two_n_plus_one_bases(n),
    }
}

pub fn family_graph(method: Method, n: usize, weights: Vec<f64>) -> Result<EstimationGraph> {
    match method {
        Method::Five => EstimationGraph::rotated_cycle(n, weights),
        Method::TwoNPlusOne => EstimationGraph::hypercube(n, weights),
    }
}

/// Per-basis shot counts; `None` in exact mode. Budget mode divides evenly
/// and hands the remainder to the computational basis (index 0).
pub fn allocate_shots(spec: ShotSpec, num_bases: usize) -> Option<Vec<u64>> {
    match spec {
        ShotSpec::Exact => None,
        ShotSpec::PerBasis(n) => Some(vec![n; num_bases]),
        ShotSpec::TotalBudget(total) => {
            let per = total / num_bases as u64;
            let rem = total - per * num_bases as u64;
            let mut out = vec![per; num_bases];
            out[0] += rem;
            Some(out)
        }
    }
}

struct SingleRun {
    result: ReconstructionResult,
    purity: PurityReport,
    fidelity: Option<f64>,
    fidelity_stderr: Option<f64>,
    warnings: Vec<String>,
}

/// Data gathered for one repetition before reconstruction.
struct MeasuredData {
    dists: Vec<EmpiricalDistribution>,
    counts: Option<Vec<CountsTable>>,
    shot_weights: Vec<f64>,
    weights: Vec<f64>,
    diag_shots: f64,
    tau: f64,
}

fn measure_family(
    state: &StateVector,
    bases: &[MeasurementBasis],
    alloc: &Option<Vec<u64>>,
    noise: Option<&NoiseModel>,
    tau_override: Option<f64>,
    seed: u64,
    stream_base: u64,
) -> Result<MeasuredData> {
    let exact: Vec<EmpiricalDistribution> = bases
        .iter()
        .map(|b| outcome_probabilities(state, b, noise))
        .collect::<Result<_>>()?;
    match alloc {
        None => {
            let weights = exact[0].probabilities().to_vec();
            let tau = tau_override.unwrap_or(1e-12);
            Ok(MeasuredData {
                shot_weights: vec![f64::INFINITY; bases.len()],
                dists: exact,
                counts: None,
                weights,
                diag_shots: f64::INFINITY,
                tau,
            })
        }
        Some(shots) => {
            let counts: Vec<CountsTable> = bases
                .iter()
                .zip(shots)
                .enumerate()
                .map(|(i, (b, &s))| {
                    sample_counts(&b.id, &exact[i], s, seed, stream_base + i as u64)
                })
                .collect();
            let dists: Vec<EmpiricalDistribution> = counts.iter().map(|t| t.empirical()).collect();
            let weights = dists[0].probabilities().to_vec();
            let diag_shots = shots[0] as f64;
            let tau = tau_override.unwrap_or(1.0 / (10.0 * diag_shots.max(1.0)));
            Ok(MeasuredData {
                shot_weights: shots.iter().map(|&s| s as f64).collect(),
                dists,
                counts: Some(counts),
                weights,
                diag_shots,
                tau,
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn reconstruct_from_data(
    config: &ExperimentConfig,
    bases: &[MeasurementBasis],
    data: &MeasuredData,
    target: &StateVector,
    layer_adjoint: Option<&[crate::state::Matrix2]>,
    seed: u64,
    tree_stream_base: u64,
    warnings: &mut Vec<String>,
) -> Result<(ReconstructionResult, PurityReport, Option<f64>)> {
    let estimates: EdgeEstimates = edge_estimates(
        bases,
        &data.dists,
        &data.shot_weights,
        &data.weights,
        data.diag_shots,
    );
    let graph = family_graph(config.method, config.n, data.weights.clone())?;
    let (pruned, connected) = graph.prune_and_check_connectivity(data.tau);
    if !connected {
        return Err(Error::Disconnected {
            components: pruned.components(),
        });
    }
    let purity = purity_metric(&estimates, &data.weights, &pruned);

    let reliable = |a: usize, b: usize| estimates.get(&(a, b)).map_or(false, |e| e.phase_reliable);

    let mut candidates: Vec<ReconstructionResult> = Vec::new();
    if config.reconstruction == ReconMode::Chain {
        let mask = (1usize << config.n) - 1;
        let gray: Vec<usize> = (0..=mask).map(rotate_label).collect();
        match reconstruct_chain(&gray, &estimates, &data.weights) {
            Ok(r) => candidates.push(r),
            Err(Error::ChainBroken(a, b)) => {
                warnings.push(format!(
                    "chain broken at edge ({a}, {b}); fell back to tree reconstruction"
                ));
            }
            Err(e) => return Err(e),
        }
    }
    if candidates.is_empty() || config.reconstruction == ReconMode::Tree {
        let tree = pruned.reconstruction_tree(None, Some(&reliable))?;
        candidates.push(reconstruct_tree(&pruned, &tree, &estimates, &data.weights)?);
        let root = tree.root;
        let mut rng = stream_rng(seed, tree_stream_base);
        for _ in 1..config.candidates.max(1) {
            let t = pruned.randomized_shortest_path_tree(root, &mut rng)?;
            candidates.push(reconstruct_tree(&pruned, &t, &estimates, &data.weights)?);
        }
    }

    // undo any pre-rotation before scoring candidates against the target
    if let Some(adj) = layer_adjoint {
        for cand in &mut candidates {
            let unrotated = cand.state().apply_local_layer(adj)?;
            cand.amplitudes = unrotated.amplitudes().to_vec();
        }
    }

    let mode = match config.selection {
        Selection::Auto | Selection::Benchmark => SelectionMode::Benchmark(target),
        Selection::Blind => match &data.counts {
            Some(counts) => SelectionMode::Blind { bases, counts },
            None => SelectionMode::Benchmark(target),
        },
    };
    let (chosen, _) = select_best_reconstruction(candidates, &mode)?;
    let fid = fidelity(&chosen.state(), target)?;
    Ok((chosen, purity, Some(fid)))
}

fn run_single(config: &ExperimentConfig, rep: u32) -> Result<SingleRun> {
    let mut warnings = Vec::new();
    let target = prepare_state(&config.state, config.n, config.seed)?;
    let bases = family_bases(config.method, config.n)?;
    let alloc = allocate_shots(config.shots, bases.len());

    // pre-rotation: measure U|psi> instead of |psi>, undo afterwards
    let layer = if config.prerotate {
        let planned_diag = alloc.as_ref().map(|a| a[0] as f64);
        let threshold = config
            .tau
            .unwrap_or_else(|| planned_diag.map_or(1e-9, |s| 1.0 / (10.0 * s.max(1.0))));
        let layer = prerotate_for_zeros(&target, threshold, 16, config.seed)?;
        Some(layer)
    } else {
        None
    };
    let measured_state = match &layer {
        Some(l) => target.apply_local_layer(l)?,
        None => target.clone(),
    };

    let measure_base = STREAM_MEASURE + (rep as u64) * 4096;
    let data = measure_family(
        &measured_state,
        &bases,
        &alloc,
        config.noise.as_ref(),
        config.tau,
        config.seed,
        measure_base,
    )?;
    let adjoint = layer.as_ref().map(|l| adjoint_layer(l));
    let (result, purity, fid) = reconstruct_from_data(
        config,
        &bases,
        &data,
        &target,
        adjoint.as_deref(),
        config.seed,
        STREAM_TREE + (rep as u64) * 4096,
        &mut warnings,
    )?;

    // parametric bootstrap for the fidelity error bar: resample the observed
    // empirical distributions as multinomials of the same size
    let fidelity_stderr = match (&data.counts, config.bootstrap) {
        (Some(_), b) if b > 1 => {
            let mut fids = Vec::with_capacity(b as usize);
            for resample in 0..b {
                let boot_base =
                    STREAM_BOOTSTRAP + (rep as u64) * (4096 * 64) + (resample as u64) * 4096;
                let shots = alloc.as_ref().unwrap();
                let boot_counts: Vec<CountsTable> = bases
                    .iter()
                    .zip(shots)
                    .enumerate()
                    .map(|(i, (basis, &s))| {
                        sample_counts(
                            &basis.id,
                            &data.dists[i],
                            s,
                            config.seed,
                            boot_base + i as u64,
                        )
                    })
                    .collect();
                let boot_dists: Vec<EmpiricalDistribution> =
                    boot_counts.iter().map(|t| t.empirical()).collect();
                let boot_data = MeasuredData {
                    weights: boot_dists[0].probabilities().to_vec(),
                    dists: boot_dists,
                    counts: Some(boot_counts),
                    shot_weights: data.shot_weights.clone(),
                    diag_shots: data.diag_shots,
                    tau: data.tau,
                };
                let mut boot_warnings = Vec::new();
                match reconstruct_from_data(
                    config,
                    &bases,
                    &boot_data,
                    &target,
                    adjoint.as_deref(),
                    config.seed,
                    STREAM_TREE + (rep as u64) * 4096,
                    &mut boot_warnings,
                ) {
                    Ok((_, _, Some(f))) => fids.push(f),
                    Ok((_, _, None)) => {}
                    Err(Error::Disconnected { .. }) => {
                        warnings.push(format!("bootstrap resample {resample} disconnected"));
                    }
                    Err(e) => return Err(e),
                }
            }
            stddev(&fids)
        }
        _ => None,
    };

    Ok(SingleRun {
        result,
        purity,
        fidelity: fid,
        fidelity_stderr,
        warnings,
    })
}

fn stddev(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    Some(var.sqrt())
}

fn median_of(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    })
}

/// Run the configured experiment: prepare, measure, reconstruct, certify.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    let bases_count = family_bases(config.method, config.n)?.len();
    let alloc = allocate_shots(config.shots, bases_count);
    let reps = config.repetitions.max(1);
    let mut runs = Vec::with_capacity(reps as usize);
    for rep in 0..reps {
        runs.push(run_single(config, rep)?);
    }
    let first = &runs[0];
    let fidelities: Vec<f64> = runs.iter().filter_map(|r| r.fidelity).collect();
    let purities: Vec<f64> = runs.iter().map(|r| r.purity.p).collect();
    let tree = match &first.result.structure {
        crate::recon::ReconStructure::Tree(t) => TreeJson {
            root: t.root,
            edges: t.edges().iter().map(|&(a, b)| [a, b]).collect(),
        },
        crate::recon::ReconStructure::Chain(order) => TreeJson {
            root: order[0],
            edges: order.windows(2).map(|w| [w[0], w[1]]).collect(),
        },
    };
    let mut warnings = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        for w in &run.warnings {
            warnings.push(if reps > 1 {
                format!("rep {i}: {w}")
            } else {
                w.clone()
            });
        }
    }
    Ok(Report {
        method: config.method.label().to_string(),
        n: config.n,
        seed: config.seed,
        shots_per_basis: match config.shots {
            ShotSpec::PerBasis(s) => Some(s),
            _ => None,
        },
        total_shots: alloc.as_ref().map(|a| a.iter().sum()),
        amplitudes: first
            .result
            .amplitudes
            .iter()
            .map(|a| [a.re, a.im])
            .collect(),
        fidelity: first.fidelity,
        fidelity_stderr: first.fidelity_stderr,
        purity_p: first.purity.p,
        phase_variances: first
            .result
            .phase_variances
            .iter()
            .map(|v| v.is_finite().then_some(*v))
            .collect(),
        tree,
        conventions: Conventions::default(),
        warnings,
        runs: (reps > 1).then(|| {
            runs.iter()
                .enumerate()
                .map(|(i, r)| RunSummary {
                    repetition: i as u32,
                    fidelity: r.fidelity,
                    purity_p: r.purity.p,
                })
                .collect()
        }),
        fidelity_median: median_of(fidelities),
        purity_p_median: median_of(purities).unwrap_or(0.0),
    })
}

/// Sample the configured family once and render the counts in the shared
/// on-disk schema (the same one `ingest` emits).
pub fn simulate_counts_file(
    config: &ExperimentConfig,
    order: crate::measure::BitOrder,
) -> Result<crate::measure::CountsFile> {
    let target = prepare_state(&config.state, config.n, config.seed)?;
    let bases = family_bases(config.method, config.n)?;
    let alloc = allocate_shots(config.shots, bases.len());
    let Some(shots) = alloc else {
        return Err(Error::schema(
            "shots",
            "counts need a finite shot allocation",
        ));
    };
    let tables: Vec<crate::measure::CountsTable> = bases
        .iter()
        .zip(&shots)
        .enumerate()
        .map(|(i, (b, &s))| {
            let dist = outcome_probabilities(&target, b, config.noise.as_ref())?;
            Ok(sample_counts(
                &b.id,
                &dist,
                s,
                config.seed,
                STREAM_MEASURE + i as u64,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(crate::measure::CountsFile::from_tables(
        config.n,
        config.seed,
        order,
        &tables,
    ))
}

/// Sweep grid; the cross product of all axes is evaluated.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    pub ns: Vec<usize>,
    /// Interpreted per `shot_mode`.
    pub shot_values: Vec<u64>,
    #[serde(default = "default_shot_mode")]
    pub shot_mode: SweepShotMode,
    pub seeds: Vec<u64>,
    pub state: StateSpec,
    #[serde(default)]
    pub noise: Option<NoiseModel>,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_selection")]
    pub selection: Selection,
    #[serde(default = "default_recon_mode")]
    pub reconstruction: ReconMode,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepShotMode {
    PerBasis,
    TotalBudget,
}

fn default_shot_mode() -> SweepShotMode {
    SweepShotMode::PerBasis
}

pub const CSV_HEADER: &str =
    "method,n,shots_per_basis,total_shots,seed,fidelity,purity_P,wall_time_ms";

/// Evaluate the grid and render one CSV row per cell, sorted by
/// (method, n, shots, seed). Cells run in parallel; set `PURETOMO_WORKERS`
/// to bound the worker pool.
pub fn run_sweep(config: &SweepConfig) -> Result<String> {
    let mut cells = Vec::new();
    for &method in &config.methods {
        for &n in &config.ns {
            for &shots in &config.shot_values {
                for &seed in &config.seeds {
                    cells.push((method, n, shots, seed));
                }
            }
        }
    }
    let pool = worker_pool()?;
    let results: Vec<Result<String>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(method, n, shots, seed)| sweep_cell(config, method, n, shots, seed))
            .collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        rows.push(r?);
    }
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    Ok(csv)
}

fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("PURETOMO_WORKERS") {
        if let Ok(k) = v.parse::<usize>() {
            builder = builder.num_threads(k.max(1));
        }
    }
    builder
        .build()
        .map_err(|e| Error::schema("workers", e.to_string()))
}

fn sweep_cell(
    config: &SweepConfig,
    method: Method,
    n: usize,
    shots: u64,
    seed: u64,
) -> Result<String> {
    let shot_spec = match config.shot_mode {
        SweepShotMode::PerBasis => ShotSpec::PerBasis(shots),
        SweepShotMode::TotalBudget => ShotSpec::TotalBudget(shots),
    };
    let cell_config = ExperimentConfig {
        method,
        n,
        shots: shot_spec,
        noise: config.noise,
        seed,
        repetitions: 1,
        state: config.state.clone(),
        prerotate: false,
        candidates: config.candidates,
        tau: config.tau,
        selection: config.selection,
        reconstruction: config.reconstruction,
        bootstrap: 0,
    };
    let start = Instant::now();
    let report = run_experiment(&cell_config)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let per_basis = report
        .shots_per_basis
        .map(|s| s.to_string())
        .unwrap_or_else(|| {
            // budget mode: equal share before the remainder
            let bases = family_bases(method, n).map(|b| b.len()).unwrap_or(1);
            (shots / bases as u64).to_string()
        });
    Ok(format!(
        "{},{},{},{},{},{},{},{:.3}",
        report.method,
        n,
        per_basis,
        report.total_shots.unwrap_or(0),
        seed,
        report.fidelity.map(|f| f.to_string()).unwrap_or_default(),
        report.purity_p,
        wall_ms
    ))
}

/// Graph dump consumed by the `graph` subcommand.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphDump {
    pub n: usize,
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphVertex {
    pub label: usize,
    pub weight: f64,
}

pub fn graph_dump(graph: &EstimationGraph, with_tree: bool) -> Result<GraphDump> {
    let tree = if with_tree {
        let t = graph.reconstruction_tree(None, None)?;
        Some(TreeJson {
            root: t.root,
            edges: t.edges().iter().map(|&(a, b)| [a, b]).collect(),
        })
    } else {
        None
    };
    Ok(GraphDump {
        n: graph.n(),
        vertices: graph
            .alive_vertices()
            .into_iter()
            .map(|label| GraphVertex {
                label,
                weight: graph.weight(label),
            })
            .collect(),
        edges: graph.edges().iter().map(|&(a, b)| [a, b]).collect(),
        tree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_config(method: Method, n: usize) -> ExperimentConfig {
        ExperimentConfig {
            method,
            n,
            shots: ShotSpec::Exact,
            noise: None,
            seed: 11,
            repetitions: 1,
            state: StateSpec::Random { min_weight: 1e-3 },
            prerotate: false,
            candidates: 4,
            tau: None,
            selection: Selection::Auto,
            reconstruction: ReconMode::Tree,
            bootstrap: 0,
        }
    }

    #[test]
    fn exact_pipeline_reaches_unit_fidelity() {
        for method in [Method::TwoNPlusOne, Method::Five] {
            let report = run_experiment(&exact_config(method, 3)).unwrap();
            assert!(report.fidelity.unwrap() > 1.0 - 1e-9, "{method:?}");
            assert!(report.purity_p < 1e-10);
        }
    }

    #[test]
    fn chain_mode_matches_tree_mode_on_exact_data() {
        let mut config = exact_config(Method::TwoNPlusOne, 3);
        config.reconstruction = ReconMode::Chain;
        let report = run_experiment(&config).unwrap();
        assert!(report.fidelity.unwrap() > 1.0 - 1e-9);
        assert!(report.warnings.is_empty(), "{:?}", report.warnings);
    }

    #[test]
    fn ghz_requires_prerotation() {
        let mut config = exact_config(Method::TwoNPlusOne, 4);
        config.state = StateSpec::Ghz;
        let err = run_experiment(&config).unwrap_err();
        assert!(matches!(err, Error::Disconnected { .. }));

        config.prerotate = true;
        let report = run_experiment(&config).unwrap();
        assert!(report.fidelity.unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn budget_mode_allocates_remainder_to_computational() {
        let alloc = allocate_shots(ShotSpec::TotalBudget(100_000), 7).unwrap();
        assert_eq!(alloc.len(), 7);
        assert_eq!(alloc[0], 14_285 + 5);
        for &s in &alloc[1..] {
            assert_eq!(s, 14_285);
        }
        assert_eq!(alloc.iter().sum::<u64>(), 100_000);
    }

    #[test]
    fn sampled_run_is_deterministic_and_reasonable() {
        let mut config = exact_config(Method::TwoNPlusOne, 3);
        config.shots = ShotSpec::PerBasis(20_000);
        config.bootstrap = 4;
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.fidelity.unwrap() > 0.99, "fidelity {:?}", a.fidelity);
        assert!(a.fidelity_stderr.is_some());
    }

    #[test]
    fn repetitions_report_medians() {
        let mut config = exact_config(Method::Five, 2);
        config.shots = ShotSpec::PerBasis(2000);
        config.repetitions = 3;
        config.bootstrap = 0;
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.runs.as_ref().unwrap().len(), 3);
        assert!(report.fidelity_median.unwrap() > 0.95);
    }

    #[test]
    fn empty_sweep_yields_header_only() {
        let config = SweepConfig {
            methods: vec![],
            ns: vec![],
            shot_values: vec![],
            shot_mode: SweepShotMode::PerBasis,
            seeds: vec![],
            state: StateSpec::GraphState,
            noise: None,
            candidates: 4,
            tau: None,
            selection: Selection::Auto,
            reconstruction: ReconMode::Tree,
        };
        let csv = run_sweep(&config).unwrap();
        assert_eq!(csv, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn sweep_rows_are_sorted_and_complete() {
        let config = SweepConfig {
            methods: vec![Method::TwoNPlusOne],
            ns: vec![2, 3],
            shot_values: vec![1000, 4000],
            shot_mode: SweepShotMode::PerBasis,
            seeds: vec![1, 2],
            state: StateSpec::GraphState,
            noise: None,
            candidates: 2,
            tau: None,
            selection: Selection::Auto,
            reconstruction: ReconMode::Tree,
        };
        let csv = run_sweep(&config).unwrap();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 2 * 2);
        // median fidelity should not decrease with the shot axis
        let fid = |line: &str| -> f64 { line.split(',').nth(5).unwrap().parse().unwrap() };
        for n_idx in 0..2 {
            let base = 1 + n_idx * 4;
            let lo = 0.5 * (fid(lines[base]) + fid(lines[base + 1]));
            let hi = 0.5 * (fid(lines[base + 2]) + fid(lines[base + 3]));
            assert!(hi >= lo - 0.05, "shots axis regressed: {lo} -> {hi}");
        }
    }
}
