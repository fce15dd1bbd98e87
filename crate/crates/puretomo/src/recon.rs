//! Analytic state reconstruction: polarization-identity edge estimates, the
//! tree phase recursion and the chain closed form, pre-rotation for states
//! with vanishing amplitudes, a purity certificate, and error budgets.
//!
//! Conventions: the stored edge quantity is `rho_hat = a_low * conj(a_high)`
//! (an off-diagonal density-matrix entry). The chain closed form uses
//! `Lambda = 4 rho_hat`; the variance formulas are stated for
//! `Lambda = 2 rho_hat`. Storing the single product avoids factor-of-two
//! mistakes at the boundaries.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bases::{MeasurementBasis, VectorDetail};
use crate::error::{Error, Result};
use crate::graph::{EstimationGraph, SpanningTree};
use crate::measure::{stream_rng, CountsTable, EmpiricalDistribution};
use crate::state::{fidelity, gates, Matrix2, StateVector};

/// Probabilities of the four polarization outcomes of one edge `(low, high)`
/// with `low < high`, as measured: `p_plus` and `p_minus` are the
/// probabilities of the `(|low> ± |high>)/sqrt(2)` outcomes; `p_imag_plus`
/// is the probability whose value equals `|a_low + i a_high|^2 / 2` (the
/// `ell = 3` projector under the smaller-label phase convention) and
/// `p_imag_minus` its partner.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct EdgeProbabilities {
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_imag_plus: f64,
    pub p_imag_minus: f64,
}

/// Shots behind each constituent probability; `f64::INFINITY` marks exact
/// probabilities.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EdgeShots {
    pub real: f64,
    pub imag: f64,
    pub diagonal: f64,
}

impl EdgeShots {
    pub fn exact() -> Self {
        EdgeShots {
            real: f64::INFINITY,
            imag: f64::INFINITY,
            diagonal: f64::INFINITY,
        }
    }
}

/// Polarization estimate for one edge, with multinomial error budget.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaEstimate {
    pub edge: (usize, usize),
    /// Estimate of `a_low * conj(a_high)`.
    pub rho_hat: Complex64,
    /// Variance of Re(Lambda), Lambda = 2 rho_hat.
    pub var_re_lambda: f64,
    /// Variance of Im(Lambda).
    pub var_im_lambda: f64,
    /// Variance of |Lambda| as propagated from the diagonal weights.
    pub var_abs_lambda: f64,
    /// Variance of the phase beta = arg(Lambda) = arg(rho_hat).
    pub var_beta: f64,
    pub shots: EdgeShots,
    /// False when |Lambda| sits below three standard errors; such edges are
    /// avoided during tree construction whenever an alternative exists.
    pub phase_reliable: bool,
}

/// Combine the four outcome probabilities of an edge into the off-diagonal
/// estimate `rho_hat = [(p+ - p-) + i (pt+ - pt-)] / 2` and its error
/// budget.
pub fn lambda_from_counts(
    edge: (usize, usize),
    probs: EdgeProbabilities,
    w_low: f64,
    w_high: f64,
    shots: EdgeShots,
) -> LambdaEstimate {
    let re_lambda = probs.p_plus - probs.p_minus;
    let im_lambda = probs.p_imag_plus - probs.p_imag_minus;
    let rho_hat = Complex64::new(re_lambda, im_lambda) / 2.0;

    let var_re_lambda = ((probs.p_plus + probs.p_minus) - re_lambda * re_lambda) / shots.real;
    let var_im_lambda =
        ((probs.p_imag_plus + probs.p_imag_minus) - im_lambda * im_lambda) / shots.imag;
    let var_abs_lambda = (w_low + w_high - 4.0 * w_low * w_high) / shots.diagonal;

    let abs2 = re_lambda * re_lambda + im_lambda * im_lambda;
    let var_beta = if abs2 > 0.0 {
        (im_lambda * im_lambda * var_re_lambda + re_lambda * re_lambda * var_im_lambda)
            / (abs2 * abs2)
    } else {
        f64::INFINITY
    };
    let phase_reliable = abs2 > 9.0 * (var_re_lambda + var_im_lambda);

    LambdaEstimate {
        edge,
        rho_hat,
        var_re_lambda,
        var_im_lambda,
        var_abs_lambda,
        var_beta,
        shots,
        phase_reliable,
    }
}

pub type EdgeEstimates = BTreeMap<(usize, usize), LambdaEstimate>;

#[derive(Default)]
struct EdgeAccumulator {
    // shot-weighted sums per sign; exact probes overwrite
    real: Option<(f64, f64, f64)>, // (sum_w*p_plus, sum_w*p_minus, shots)
    imag: Option<(f64, f64, f64)>,
}

fn pool(slot: &mut Option<(f64, f64, f64)>, p_a: f64, p_b: f64, shots: f64) {
    match slot {
        None => *slot = Some((p_a * weight_of(shots), p_b * weight_of(shots), shots)),
        Some((sa, sb, sn)) => {
            if shots.is_infinite() || sn.is_infinite() {
                *slot = Some((p_a, p_b, f64::INFINITY));
            } else {
                *sa += p_a * shots;
                *sb += p_b * shots;
                *sn += shots;
            }
        }
    }
}

fn weight_of(shots: f64) -> f64 {
    if shots.is_infinite() {
        1.0
    } else {
        shots
    }
}

fn resolve(slot: &Option<(f64, f64, f64)>) -> Option<(f64, f64, f64)> {
    slot.map(|(sa, sb, sn)| {
        if sn.is_infinite() {
            (sa, sb, sn)
        } else {
            (sa / sn, sb / sn, sn)
        }
    })
}

/// Collect per-edge polarization estimates from a measured basis family.
/// `dists[i]` and `shots[i]` belong to `bases[i]`; `weights` and
/// `diag_shots` come from the computational-basis table. Edges probed more
/// than once are pooled by shot weight.
pub fn edge_estimates(
    bases: &[MeasurementBasis],
    dists: &[EmpiricalDistribution],
    shots: &[f64],
    weights: &[f64],
    diag_shots: f64,
) -> EdgeEstimates {
    let mut acc: BTreeMap<(usize, usize), EdgeAccumulator> = BTreeMap::new();
    for ((basis, dist), &n_shots) in bases.iter().zip(dists).zip(shots) {
        // gather both signs of each edge within this basis
        let mut partial: BTreeMap<(usize, usize), [Option<f64>; 4]> = BTreeMap::new();
        for v in &basis.vectors {
            if let VectorDetail::Edge { low, high, ell } = v.detail {
                partial.entry((low, high)).or_default()[ell as usize] =
                    Some(dist.probability(v.outcome));
            }
        }
        for (edge, slots) in partial {
            let entry = acc.entry(edge).or_default();
            if let (Some(p0), Some(p2)) = (slots[0], slots[2]) {
                pool(&mut entry.real, p0, p2, n_shots);
            }
            if let (Some(p3), Some(p1)) = (slots[3], slots[1]) {
                pool(&mut entry.imag, p3, p1, n_shots);
            }
        }
    }
    acc.into_iter()
        .filter_map(|(edge, e)| {
            let (p_plus, p_minus, real_shots) = resolve(&e.real)?;
            let (p_imag_plus, p_imag_minus, imag_shots) = resolve(&e.imag)?;
            let probs = EdgeProbabilities {
                p_plus,
                p_minus,
                p_imag_plus,
                p_imag_minus,
            };
            let shots = EdgeShots {
                real: real_shots,
                imag: imag_shots,
                diagonal: diag_shots,
            };
            Some((
                edge,
                lambda_from_counts(edge, probs, weights[edge.0], weights[edge.1], shots),
            ))
        })
        .collect()
}

/// How the amplitudes were ordered during reconstruction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ReconStructure {
    Tree(SpanningTree),
    Chain(Vec<usize>),
}

/// Reconstructed amplitudes with the root-phase convention and accumulated
/// per-vertex phase variances.
#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub n: usize,
    pub amplitudes: Vec<Complex64>,
    pub root: usize,
    pub structure: ReconStructure,
    /// Accumulated phase variance per vertex; 0 at the root, infinite on
    /// pruned vertices.
    pub phase_variances: Vec<f64>,
}

impl ReconstructionResult {
    pub fn state(&self) -> StateVector {
        StateVector::from_amplitudes(self.n, self.amplitudes.clone())
            .expect("reconstruction amplitudes are normalized")
    }
}

/// Magnitudes from the computational weights, phases by the root-to-leaf
/// recursion `phi_child = phi_parent -/+ arg(rho_hat)` along the tree.
/// Pruned vertices (absent from the tree) get amplitude zero.
pub fn reconstruct_tree(
    graph: &EstimationGraph,
    tree: &SpanningTree,
    estimates: &EdgeEstimates,
    weights: &[f64],
) -> Result<ReconstructionResult> {
    let n = graph.n();
    let dim = graph.dim();
    if weights.len() != dim {
        return Err(Error::DimensionMismatch(weights.len(), dim));
    }
    let mut phases = vec![0.0f64; dim];
    let mut variances = vec![f64::INFINITY; dim];
    variances[tree.root] = 0.0;
    for &v in &tree.order {
        let Some(p) = tree.parent[v] else { continue };
        let key = (p.min(v), p.max(v));
        let est = estimates
            .get(&key)
            .ok_or(Error::MissingEstimate(key.0, key.1))?;
        let beta = est.rho_hat.arg(); // phi_low - phi_high
        phases[v] = if p == key.0 {
            phases[p] - beta
        } else {
            phases[p] + beta
        };
        variances[v] = variances[p] + est.var_beta;
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    for v in 0..dim {
        if graph.is_alive(v) {
            amplitudes[v] = Complex64::from_polar(weights[v].max(0.0).sqrt(), phases[v]);
        }
    }
    normalize(&mut amplitudes)?;
    Ok(ReconstructionResult {
        n,
        amplitudes,
        root: tree.root,
        structure: ReconStructure::Tree(tree.clone()),
        phase_variances: variances,
    })
}

/// Reliability floor used by the chain mode: an edge estimate is usable when
/// |Lambda| clears both a numerical floor and three standard errors.
fn chain_floor(est: &LambdaEstimate) -> bool {
    let abs = 2.0 * est.rho_hat.norm();
    abs > 1e-12 && est.phase_reliable
}

/// Closed-form reconstruction along a chain of consecutive edges: with
/// `Lambda_m = 4 rho(v_{m-1}, v_m)` and `a_0 = sqrt(w_{v_0})`,
///
/// * `a_1 = conj(Lambda_1) / (4 a_0)`, and
/// * `a_m = a_{m-2} * conj(Lambda_m) / Lambda_{m-1}` thereafter,
///
/// which reproduces the alternating even/odd product formulas. Magnitudes
/// here come from the Lambda products rather than the computational counts,
/// so this mode serves as an independent cross-check of the tree recursion.
pub fn reconstruct_chain(
    chain: &[usize],
    estimates: &EdgeEstimates,
    weights: &[f64],
) -> Result<ReconstructionResult> {
    let dim = weights.len();
    let n = dim.trailing_zeros() as usize;
    if chain.is_empty() || chain.len() > dim {
        return Err(Error::schema("chain", "empty or oversized vertex sequence"));
    }
    let v0 = chain[0];
    let a0 = weights[v0].max(0.0).sqrt();
    if a0 <= 0.0 {
        return Err(Error::VertexPruned(v0));
    }
    let mut along: Vec<Complex64> = Vec::with_capacity(chain.len());
    along.push(Complex64::new(a0, 0.0));
    let mut lambdas: Vec<Complex64> = Vec::with_capacity(chain.len());
    lambdas.push(Complex64::new(1.0, 0.0)); // Lambda_0 := 1
    let mut variances_along = vec![0.0f64; chain.len()];
    for m in 1..chain.len() {
        let (u, v) = (chain[m - 1], chain[m]);
        let key = (u.min(v), u.max(v));
        let est = estimates
            .get(&key)
            .ok_or(Error::MissingEstimate(key.0, key.1))?;
        if !chain_floor(est) {
            return Err(Error::ChainBroken(key.0, key.1));
        }
        // orient rho along the traversal: rho(u, v) = a_u conj(a_v)
        let rho = if u == key.0 {
            est.rho_hat
        } else {
            est.rho_hat.conj()
        };
        let lambda = 4.0 * rho;
        let prev = lambdas[m - 1];
        let a_m = if m == 1 {
            lambda.conj() / (4.0 * a0)
        } else {
            along[m - 2] * lambda.conj() / prev
        };
        along.push(a_m);
        lambdas.push(lambda);
        variances_along[m] = variances_along[m - 1] + est.var_beta;
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    let mut phase_variances = vec![f64::INFINITY; dim];
    for (m, &v) in chain.iter().enumerate() {
        amplitudes[v] = along[m];
        phase_variances[v] = variances_along[m];
    }
    normalize(&mut amplitudes)?;
    Ok(ReconstructionResult {
        n,
        amplitudes,
        root: v0,
        structure: ReconStructure::Chain(chain.to_vec()),
        phase_variances,
    })
}

fn normalize(amps: &mut [Complex64]) -> Result<()> {
    let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if norm2 <= 0.0 {
        return Err(Error::ZeroVector);
    }
    let scale = norm2.sqrt().recip();
    for a in amps.iter_mut() {
        *a *= scale;
    }
    Ok(())
}

/// Find a layer of single-qubit unitaries making every rotated amplitude
/// exceed `threshold` in weight, so the estimation graph stays connected.
///
/// The identity layer is returned when the state already qualifies. The
/// all-Hadamard proposal is tried next; for states like the GHZ family it
/// leaves half the weights at zero (the two branches interfere on every
/// label), in which case Hadamards on all but one qubit (which cannot
/// interfere the branches) and then seeded random layers are tried.
pub fn prerotate_for_zeros(
    state: &StateVector,
    threshold: f64,
    retries: usize,
    seed: u64,
) -> Result<Vec<Matrix2>> {
    let n = state.n();
    let qualifies = |layer: &[Matrix2]| -> bool {
        let rotated = state.apply_local_layer(layer).expect("layer matches n");
        rotated.weights().iter().all(|w| *w > threshold)
    };

    let identity: Vec<Matrix2> = (0..n).map(|_| gates::identity()).collect();
    if qualifies(&identity) {
        return Ok(identity);
    }
    let all_h: Vec<Matrix2> = (0..n).map(|_| gates::hadamard()).collect();
    if qualifies(&all_h) {
        return Ok(all_h);
    }
    for fixed in 0..n {
        let layer: Vec<Matrix2> = (0..n)
            .map(|q| {
                if q == fixed {
                    gates::identity()
                } else {
                    gates::hadamard()
                }
            })
            .collect();
        if qualifies(&layer) {
            return Ok(layer);
        }
    }
    let mut rng = stream_rng(seed, 0x707265); // fixed stream tag for pre-rotation
    for _ in 0..retries {
        let layer: Vec<Matrix2> = (0..n).map(|_| random_unitary(&mut rng)).collect();
        if qualifies(&layer) {
            return Ok(layer);
        }
    }
    Err(Error::PrerotationFailed { retries })
}

fn random_unitary(rng: &mut rand_chacha::ChaCha8Rng) -> Matrix2 {
    let theta = rng.gen::<f64>() * std::f64::consts::FRAC_PI_2;
    let alpha = rng.gen::<f64>() * std::f64::consts::TAU;
    let beta = rng.gen::<f64>() * std::f64::consts::TAU;
    let (c, s) = (theta.cos(), theta.sin());
    [
        Complex64::from_polar(c, alpha),
        Complex64::from_polar(s, beta),
        Complex64::from_polar(-s, -beta),
        Complex64::from_polar(c, -alpha),
    ]
}

/// Adjoint layer, used to undo a pre-rotation.
pub fn adjoint_layer(layer: &[Matrix2]) -> Vec<Matrix2> {
    layer.iter().map(gates::adjoint2).collect()
}

/// Cauchy-Schwarz residuals `|rho_jk|^2 - w_j w_k` over the graph edges and
/// their root-sum-square. Zero for data consistent with a pure state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PurityReport {
    pub p: f64,
    pub residuals: Vec<EdgeResidual>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeResidual {
    pub edge: (usize, usize),
    pub residual: f64,
}

pub fn purity_metric(
    estimates: &EdgeEstimates,
    weights: &[f64],
    graph: &EstimationGraph,
) -> PurityReport {
    let mut residuals = Vec::new();
    let mut sum_sq = 0.0;
    for (a, b) in graph.edges() {
        if let Some(est) = estimates.get(&(a, b)) {
            let residual = est.rho_hat.norm_sqr() - weights[a] * weights[b];
            sum_sq += residual * residual;
            residuals.push(EdgeResidual {
                edge: (a, b),
                residual,
            });
        }
    }
    PurityReport {
        p: sum_sq.sqrt(),
        residuals,
    }
}

/// Criterion for picking among candidate reconstructions.
pub enum SelectionMode<'a> {
    /// Maximize fidelity against a known target.
    Benchmark(&'a StateVector),
    /// Maximize the multinomial log-likelihood of all observed counts.
    Blind {
        bases: &'a [MeasurementBasis],
        counts: &'a [CountsTable],
    },
}

/// Pick the best candidate under the given mode; ties keep the earliest
/// candidate.
pub fn select_best_reconstruction(
    candidates: Vec<ReconstructionResult>,
    mode: &SelectionMode,
) -> Result<(ReconstructionResult, f64)> {
    if candidates.is_empty() {
        return Err(Error::schema("candidates", "no reconstruction candidates"));
    }
    let mut best: Option<(usize, f64)> = None;
    for (idx, cand) in candidates.iter().enumerate() {
        let score = match mode {
            SelectionMode::Benchmark(target) => fidelity(&cand.state(), target)?,
            SelectionMode::Blind { bases, counts } => log_likelihood(&cand.state(), bases, counts)?,
        };
        if best.map_or(true, |(_, s)| score > s) {
            best = Some((idx, score));
        }
    }
    let (idx, score) = best.unwrap();
    Ok((candidates.into_iter().nth(idx).unwrap(), score))
}

fn log_likelihood(
    state: &StateVector,
    bases: &[MeasurementBasis],
    counts: &[CountsTable],
) -> Result<f64> {
    let mut ll = 0.0;
    for (basis, table) in bases.iter().zip(counts) {
        let dist = crate::measure::outcome_probabilities(state, basis, None)?;
        for (&label, &c) in &table.counts {
            ll += c as f64 * dist.probability(label).max(1e-300).ln();
        }
    }
    Ok(ll)
}

/// Closed-form phase variances for benchmark cases.
#[derive(Copy, Clone, Debug)]
pub enum PhaseVarianceCase {
    /// State with all weights equal to `weight`: `1 / (4 N w)`.
    Uniform { weight: f64, shots: f64 },
    /// Real state: `2 pt+ / (N (p+ - p-)^2)`.
    RealState {
        p_plus: f64,
        p_minus: f64,
        p_imag_plus: f64,
        shots: f64,
    },
}

pub fn phase_variance_special_cases(case: PhaseVarianceCase) -> Result<f64> {
    match case {
        PhaseVarianceCase::Uniform { weight, shots } => Ok(1.0 / (4.0 * shots * weight)),
        PhaseVarianceCase::RealState {
            p_plus,
            p_minus,
            p_imag_plus,
            shots,
        } => {
            let denom = p_plus - p_minus;
            if denom == 0.0 {
                return Err(Error::UnreliablePhase);
            }
            Ok(2.0 * p_imag_plus / (shots * denom * denom))
        }
    }
}
