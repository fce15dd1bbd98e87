//! Outcome probabilities, seeded multinomial shot sampling, adaptive runs,
//! a minimal noise model, Hellinger distance, and ingestion of externally
//! measured Pauli-subset counts.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::bases::{
    computational_basis, i_pow, product_basis, LocalGate, LoccSchedule, MeasurementBasis,
    Realization, VectorDetail,
};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Minimal parametric noise: classical readout flips plus a per-applied-gate
/// depolarizing strength. Zero noise reproduces exact statistics.
///
/// Depolarizing a qubit right before a single-qubit-basis readout flips the
/// observed bit with probability p/2, so basis-preparation gates enter the
/// outcome distribution as extra per-bit flips; two-qubit gates count once
/// per touched qubit.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub readout_flip: f64,
    pub depolarizing: f64,
}

impl NoiseModel {
    pub fn new(readout_flip: f64, depolarizing: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&readout_flip) {
            return Err(Error::schema("readout_flip", "must lie in [0, 0.5]"));
        }
        if !(0.0..=1.0).contains(&depolarizing) {
            return Err(Error::schema("depolarizing", "must lie in [0, 1]"));
        }
        Ok(NoiseModel {
            readout_flip,
            depolarizing,
        })
    }

    pub fn noiseless() -> Self {
        NoiseModel {
            readout_flip: 0.0,
            depolarizing: 0.0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.readout_flip == 0.0 && self.depolarizing == 0.0
    }
}

/// Dense outcome distribution over the 2^n labels.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    n: usize,
    probs: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn from_probabilities(n: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != (1 << n) {
            return Err(Error::DimensionMismatch(probs.len(), 1 << n));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || probs.iter().any(|p| *p < -1e-12) {
            return Err(Error::schema(
                "probabilities",
                "must be nonnegative and sum to 1",
            ));
        }
        Ok(EmpiricalDistribution { n, probs })
    }

    pub fn from_counts(table: &CountsTable) -> Self {
        let mut probs = vec![0.0; 1 << table.n];
        if table.shots > 0 {
            let inv = 1.0 / table.shots as f64;
            for (&label, &c) in &table.counts {
                probs[label] = c as f64 * inv;
            }
        }
        EmpiricalDistribution { n: table.n, probs }
    }

    /// Convex mixture of distributions over the same outcome space.
    pub fn mixture(parts: &[(f64, &EmpiricalDistribution)]) -> Result<Self> {
        let n = parts
            .first()
            .ok_or_else(|| Error::schema("mixture", "no components"))?
            .1
            .n;
        let mut probs = vec![0.0; 1 << n];
        let mut total = 0.0;
        for (w, dist) in parts {
            if dist.n != n {
                return Err(Error::DimensionMismatch(dist.n, n));
            }
            total += w;
            for (acc, p) in probs.iter_mut().zip(&dist.probs) {
                *acc += w * p;
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::schema("mixture", "weights must sum to 1"));
        }
        EmpiricalDistribution::from_probabilities(n, probs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probability(&self, label: usize) -> f64 {
        self.probs[label]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }
}

/// Exact outcome probabilities of a basis measurement, optionally convolved
/// with the noise model.
pub fn outcome_probabilities(
    state: &StateVector,
    basis: &MeasurementBasis,
    noise: Option<&NoiseModel>,
) -> Result<EmpiricalDistribution> {
    if state.n() != basis.n {
        return Err(Error::DimensionMismatch(state.n(), basis.n));
    }
    let amps = state.amplitudes();
    let mut probs = vec![0.0; 1 << basis.n];
    for v in &basis.vectors {
        probs[v.outcome] = match v.detail {
            VectorDetail::Computational { label } => amps[label].norm_sqr(),
            VectorDetail::Edge { low, high, ell } => {
                (amps[low] + i_pow(ell).conj() * amps[high]).norm_sqr() / 2.0
            }
        };
    }
    if let Some(nm) = noise {
        if !nm.is_noiseless() {
            apply_noise(&mut probs, basis, nm);
        }
    }
    // clean float dust before the sum-to-1 validation
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    EmpiricalDistribution::from_probabilities(basis.n, probs)
}

/// Number of basis-preparation gates touching each qubit.
fn prep_gate_counts(basis: &MeasurementBasis) -> Vec<u32> {
    let n = basis.n;
    let mut counts = vec![0u32; n];
    match &basis.realization {
        Realization::Computational => {}
        Realization::Product { gates } => {
            for (q, g) in gates.iter().enumerate() {
                if *g != LocalGate::Identity {
                    counts[q] += 1;
                }
            }
        }
        Realization::Rotated { .. } => {
            // descending CNOT chain touches interior qubits twice
            for q in 0..n {
                counts[q] += u32::from(q > 0) + u32::from(q + 1 < n);
            }
        }
        Realization::Adaptive { .. } => {
            // handled per outcome via the fired qubit below
        }
    }
    counts
}

fn apply_noise(probs: &mut [f64], basis: &MeasurementBasis, nm: &NoiseModel) {
    let n = basis.n;
    let gate_counts = prep_gate_counts(basis);
    // effective per-bit flip probability: readout combined with p/2 per gate
    let combine = |a: f64, b: f64| a * (1.0 - b) + b * (1.0 - a);
    for q in 0..n {
        let mut flip = nm.readout_flip;
        for _ in 0..gate_counts[q] {
            flip = combine(flip, nm.depolarizing / 2.0);
        }
        if flip > 0.0 {
            flip_bit(probs, q, flip);
        }
    }
    if let Realization::Adaptive { .. } | Realization::Rotated { .. } = basis.realization {
        if nm.depolarizing > 0.0 {
            // the adaptive layer applies one gate, on the outcome's own edge
            // direction; mix each edge pair accordingly
            let f = nm.depolarizing / 2.0;
            let old = probs.to_vec();
            for v in &basis.vectors {
                if let VectorDetail::Edge { low, high, .. } = v.detail {
                    let partner = low + high - v.outcome;
                    probs[v.outcome] = (1.0 - f) * old[v.outcome] + f * old[partner];
                }
            }
        }
    }
}

fn flip_bit(probs: &mut [f64], q: usize, f: f64) {
    let step = 1usize << q;
    for j in 0..probs.len() {
        if j & step == 0 {
            let a = probs[j];
            let b = probs[j | step];
            probs[j] = (1.0 - f) * a + f * b;
            probs[j | step] = (1.0 - f) * b + f * a;
        }
    }
}

/// Outcome histogram for one basis setting.
#[derive(Clone, Debug, PartialEq)]
pub struct CountsTable {
    pub basis_id: String,
    pub n: usize,
    pub counts: BTreeMap<usize, u64>,
    pub shots: u64,
    pub seed: u64,
    pub noise: Option<NoiseModel>,
}

impl CountsTable {
    pub fn empirical(&self) -> EmpiricalDistribution {
        EmpiricalDistribution::from_counts(self)
    }

    fn from_raw(
        basis_id: &str,
        n: usize,
        counts: BTreeMap<usize, u64>,
        seed: u64,
        noise: Option<NoiseModel>,
    ) -> Self {
        let shots = counts.values().sum();
        CountsTable {
            basis_id: basis_id.to_string(),
            n,
            counts,
            shots,
            seed,
            noise,
        }
    }
}

/// Deterministic RNG stream for a given root seed and task index.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multinomial draw of `shots` outcomes, decomposed into conditional
/// binomials so the cost is linear in the outcome space rather than in the
/// shot count. Identical `(dist, shots, seed, stream)` give identical tables.
pub fn sample_counts(
    basis_id: &str,
    dist: &EmpiricalDistribution,
    shots: u64,
    seed: u64,
    stream: u64,
) -> CountsTable {
    let mut rng = stream_rng(seed, stream);
    let mut counts = BTreeMap::new();
    let mut remaining_shots = shots;
    let mut remaining_prob = 1.0_f64;
    for (label, &p) in dist.probs.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let q = (p / remaining_prob).clamp(0.0, 1.0);
        let c = if q >= 1.0 {
            remaining_shots
        } else {
            Binomial::new(remaining_shots, q).unwrap().sample(&mut rng)
        };
        if c > 0 {
            counts.insert(label, c);
        }
        remaining_shots -= c;
        remaining_prob -= p;
        if remaining_prob <= 0.0 {
            break;
        }
    }
    if remaining_shots > 0 {
        // float dust at the tail; assign to the most likely label
        let best = dist
            .probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(l, _)| l)
            .unwrap_or(0);
        *counts.entry(best).or_insert(0) += remaining_shots;
    }
    CountsTable::from_raw(basis_id, dist.n, counts, seed, None)
}

/// Shot-by-shot simulation of one adaptive schedule: qubits are measured in
/// index order, the conditional gate fires per the schedule, and the outcome
/// label is the full bitstring. Marginal statistics match
/// [`outcome_probabilities`] of the schedule's induced projector basis.
pub fn simulate_adaptive_run(
    state: &StateVector,
    schedule: &LoccSchedule,
    shots: u64,
    seed: u64,
    stream: u64,
) -> Result<CountsTable> {
    if state.n() != schedule.n {
        return Err(Error::DimensionMismatch(state.n(), schedule.n));
    }
    let n = schedule.n;
    let mut rng = stream_rng(seed, stream);
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut work: Vec<Complex64> = Vec::with_capacity(1 << n);
    for _ in 0..shots {
        work.clear();
        work.extend_from_slice(state.amplitudes());
        let mut b_m = false;
        let mut b_h = false;
        let mut outcome = 0usize;
        for q in 0..n {
            if schedule.fires(q, b_m, b_h) {
                // measuring the basis whose vectors are (SH)|y> means
                // applying the adjoint, S-dagger then H, to the state
                if schedule.b_s {
                    apply_s_dagger(&mut work, q);
                }
                apply_h(&mut work, q);
                b_h = true;
            }
            let step = 1usize << q;
            let p1: f64 = work
                .iter()
                .enumerate()
                .filter(|(j, _)| j & step != 0)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            let norm: f64 = work.iter().map(|a| a.norm_sqr()).sum();
            let bit = rng.gen::<f64>() * norm < p1;
            // collapse
            for (j, a) in work.iter_mut().enumerate() {
                if (j & step != 0) != bit {
                    *a = Complex64::new(0.0, 0.0);
                }
            }
            let kept: f64 = work.iter().map(|a| a.norm_sqr()).sum();
            let scale = kept.sqrt().recip();
            for a in work.iter_mut() {
                *a *= scale;
            }
            outcome |= usize::from(bit) << q;
            b_m = bit;
        }
        *counts.entry(outcome).or_insert(0) += 1;
    }
    let id = format!(
        "locc-c{}-s{}",
        u8::from(schedule.b_c),
        u8::from(schedule.b_s)
    );
    Ok(CountsTable::from_raw(&id, n, counts, seed, None))
}

fn apply_h(amps: &mut [Complex64], q: usize) {
    let step = 1usize << q;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..amps.len() {
        if j & step == 0 {
            let a = amps[j];
            let b = amps[j | step];
            amps[j] = (a + b) * h;
            amps[j | step] = (a - b) * h;
        }
    }
}

fn apply_s_dagger(amps: &mut [Complex64], q: usize) {
    let step = 1usize << q;
    for (j, a) in amps.iter_mut().enumerate() {
        if j & step != 0 {
            *a *= Complex64::new(0.0, -1.0);
        }
    }
}

/// Hellinger distance `sqrt(1 - sum_i sqrt(p_i q_i))`, in [0, 1].
pub fn hellinger(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> Result<f64> {
    if p.n != q.n {
        return Err(Error::DimensionMismatch(p.n, q.n));
    }
    let bc: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    Ok((1.0 - bc.min(1.0)).max(0.0).sqrt())
}

/// Total-variation distance `0.5 * sum_i |p_i - q_i|`.
pub fn total_variation(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> Result<f64> {
    if p.n != q.n {
        return Err(Error::DimensionMismatch(p.n, q.n));
    }
    Ok(0.5
        * p.probs
            .iter()
            .zip(&q.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Reading direction of bitstring keys in counts files.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BitOrder {
    /// Leftmost character is the highest qubit (number-style labels).
    #[default]
    Msb,
    /// Leftmost character is qubit 0.
    Lsb,
}

pub fn render_label(label: usize, n: usize, order: BitOrder) -> String {
    let mut s = String::with_capacity(n);
    match order {
        BitOrder::Msb => {
            for q in (0..n).rev() {
                s.push(if label >> q & 1 == 1 { '1' } else { '0' });
            }
        }
        BitOrder::Lsb => {
            for q in 0..n {
                s.push(if label >> q & 1 == 1 { '1' } else { '0' });
            }
        }
    }
    s
}

pub fn parse_label(s: &str, n: usize, order: BitOrder) -> Result<usize> {
    if s.len() != n || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::schema(
            "counts",
            format!("outcome key \"{s}\" is not an {n}-bit string"),
        ));
    }
    let mut label = 0usize;
    for (pos, b) in s.bytes().enumerate() {
        let q = match order {
            BitOrder::Msb => n - 1 - pos,
            BitOrder::Lsb => pos,
        };
        if b == b'1' {
            label |= 1 << q;
        }
    }
    Ok(label)
}

/// On-disk counts schema, shared by simulated and ingested data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountsFile {
    pub n: usize,
    #[serde(default)]
    pub bit_order: BitOrder,
    pub seed: u64,
    pub bases: Vec<CountsFileEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountsFileEntry {
    pub id: String,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl CountsFile {
    pub fn from_tables(n: usize, seed: u64, order: BitOrder, tables: &[CountsTable]) -> Self {
        CountsFile {
            n,
            bit_order: order,
            seed,
            bases: tables
                .iter()
                .map(|t| CountsFileEntry {
                    id: t.basis_id.clone(),
                    shots: t.shots,
                    counts: t
                        .counts
                        .iter()
                        .map(|(&l, &c)| (render_label(l, n, order), c))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_tables(&self) -> Result<Vec<CountsTable>> {
        self.bases
            .iter()
            .map(|entry| {
                let mut counts = BTreeMap::new();
                for (key, &c) in &entry.counts {
                    let label = parse_label(key, self.n, self.bit_order)?;
                    *counts.entry(label).or_insert(0) += c;
                }
                let total: u64 = counts.values().sum();
                if total != entry.shots {
                    return Err(Error::schema(
                        "shots",
                        format!(
                            "basis {}: declared {} shots but counts sum to {total}",
                            entry.id, entry.shots
                        ),
                    ));
                }
                Ok(CountsTable {
                    basis_id: entry.id.clone(),
                    n: self.n,
                    counts,
                    shots: total,
                    seed: self.seed,
                    noise: None,
                })
            })
            .collect()
    }
}

/// Externally measured counts keyed by a Pauli setting per qubit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PauliCountsFile {
    pub n: usize,
    #[serde(default)]
    pub bit_order: BitOrder,
    #[serde(default)]
    pub seed: u64,
    pub settings: Vec<PauliSettingRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PauliSettingRecord {
    /// One character per qubit from {X, Y, Z}, read in `bit_order` direction.
    pub setting: String,
    pub counts: BTreeMap<String, u64>,
    /// Sign convention of the Y eigenbasis; -1 swaps the two Y outcomes.
    #[serde(default)]
    pub y_sign: Option<i8>,
}

/// A relabeled external counts table together with the edge-annotated basis
/// it maps onto.
#[derive(Clone, Debug)]
pub struct IngestedSetting {
    pub basis: MeasurementBasis,
    pub counts: CountsTable,
}

/// Map Pauli-subset settings onto the 2n+1 family: settings with a single
/// non-Z qubit become the H (X) or SH (Y) basis on that qubit; all-Z becomes
/// the computational basis. Settings with two or more non-Z qubits are
/// rejected with a diagnostic naming the setting.
pub fn ingest_pauli_counts(file: &PauliCountsFile) -> Result<Vec<IngestedSetting>> {
    let n = file.n;
    let mut out = Vec::with_capacity(file.settings.len());
    for record in &file.settings {
        if record.setting.len() != n {
            return Err(Error::BadPauliSetting {
                setting: record.setting.clone(),
                reason: format!("expected {n} characters, got {}", record.setting.len()),
            });
        }
        let mut non_z: Vec<(usize, char)> = Vec::new();
        for (pos, ch) in record.setting.chars().enumerate() {
            let q = match file.bit_order {
                BitOrder::Msb => n - 1 - pos,
                BitOrder::Lsb => pos,
            };
            match ch {
                'Z' | 'z' => {}
                'X' | 'x' | 'Y' | 'y' => non_z.push((q, ch.to_ascii_uppercase())),
                other => {
                    return Err(Error::BadPauliSetting {
                        setting: record.setting.clone(),
                        reason: format!("unsupported operator '{other}'"),
                    })
                }
            }
        }
        if non_z.len() > 1 {
            let qubits: Vec<usize> = non_z.iter().map(|(q, _)| *q).collect();
            return Err(Error::BadPauliSetting {
                setting: record.setting.clone(),
                reason: format!(
                    "{} non-Z qubits {qubits:?}; exactly one qubit may differ from Z",
                    non_z.len()
                ),
            });
        }
        let basis = match non_z.first() {
            None => computational_basis(n),
            Some((q, 'X')) => product_basis(n, *q, LocalGate::Hadamard)?,
            Some((q, 'Y')) => product_basis(n, *q, LocalGate::Sh)?,
            _ => unreachable!(),
        };
        let flip_bit = match (non_z.first(), record.y_sign.unwrap_or(1)) {
            (Some((q, 'Y')), -1) => Some(*q),
            (_, 1) | (_, -1) => None,
            (_, other) => {
                return Err(Error::BadPauliSetting {
                    setting: record.setting.clone(),
                    reason: format!("y_sign must be 1 or -1, got {other}"),
                })
            }
        };
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for (key, &c) in &record.counts {
            let mut label = parse_label(key, n, file.bit_order)?;
            if let Some(q) = flip_bit {
                label ^= 1 << q;
            }
            *counts.entry(label).or_insert(0) += c;
        }
        let table = CountsTable::from_raw(&basis.id, n, counts, file.seed, None);
        out.push(IngestedSetting {
            basis,
            counts: table,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::two_n_plus_one_bases;
    use crate::state::{prepare_graph_state, StateVector};
    use approx::assert_abs_diff_eq;

    #[test]
    fn computational_probabilities_of_layered_state_are_uniform() {
        for n in 2..=6 {
            let st = prepare_graph_state(n).unwrap();
            let dist = outcome_probabilities(&st, &computational_basis(n), None).unwrap();
            for &p in dist.probabilities() {
                assert_abs_diff_eq!(p, 2f64.powi(-(n as i32)), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one_across_families() {
        let st = prepare_graph_state(3).unwrap();
        for basis in two_n_plus_one_bases(3).unwrap() {
            let dist = outcome_probabilities(&st, &basis, None).unwrap();
            let sum: f64 = dist.probabilities().iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn plus_state_in_x_basis_is_deterministic() {
        let plus = StateVector::from_amplitudes(
            1,
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        )
        .unwrap();
        let x_basis = product_basis(1, 0, LocalGate::Hadamard).unwrap();
        let dist = outcome_probabilities(&plus, &x_basis, None).unwrap();
        assert_abs_diff_eq!(dist.probability(0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dist.probability(1), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sampling_edge_cases() {
        let st = prepare_graph_state(2).unwrap();
        let dist = outcome_probabilities(&st, &computational_basis(2), None).unwrap();
        let empty = sample_counts("computational", &dist, 0, 1, 0);
        assert_eq!(empty.shots, 0);
        assert!(empty.counts.is_empty());

        let point = EmpiricalDistribution::from_probabilities(2, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let table = sample_counts("computational", &point, 1000, 1, 0);
        assert_eq!(table.counts.get(&2), Some(&1000));
    }

    #[test]
    fn sampling_is_deterministic() {
        let st = prepare_graph_state(3).unwrap();
        let basis = &two_n_plus_one_bases(3).unwrap()[2];
        let dist = outcome_probabilities(&st, basis, None).unwrap();
        let a = sample_counts(&basis.id, &dist, 50_000, 42, 7);
        let b = sample_counts(&basis.id, &dist, 50_000, 42, 7);
        assert_eq!(a, b);
        let c = sample_counts(&basis.id, &dist, 50_000, 42, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn readout_noise_half_flips_give_uniform_marginals() {
        let st = StateVector::basis_state(3, 5).unwrap();
        let nm = NoiseModel::new(0.5, 0.0).unwrap();
        let dist = outcome_probabilities(&st, &computational_basis(3), Some(&nm)).unwrap();
        for &p in dist.probabilities() {
            assert_abs_diff_eq!(p, 1.0 / 8.0, epsilon = 1e-12);
        }
        // zero noise reproduces the exact distribution
        let nm0 = NoiseModel::noiseless();
        let exact = outcome_probabilities(&st, &computational_basis(3), Some(&nm0)).unwrap();
        assert_abs_diff_eq!(exact.probability(5), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_run_matches_projector_basis_chi_squared() {
        let st = prepare_graph_state(2).unwrap();
        let shots = 40_000;
        for (i, (b_c, b_s)) in [(false, false), (false, true), (true, true)]
            .into_iter()
            .enumerate()
        {
            let sched = LoccSchedule::new(2, b_c, b_s).unwrap();
            let table = simulate_adaptive_run(&st, &sched, shots, 9, i as u64).unwrap();
            let exact = outcome_probabilities(&st, &sched.projector_basis(), None).unwrap();
            let mut chi2 = 0.0;
            let mut dof = 0usize;
            for (label, &p) in exact.probabilities().iter().enumerate() {
                if p > 1e-12 {
                    let c = *table.counts.get(&label).unwrap_or(&0) as f64;
                    let expect = shots as f64 * p;
                    chi2 += (c - expect).powi(2) / expect;
                    dof += 1;
                }
            }
            let dof = (dof - 1).max(1) as f64;
            assert!(
                chi2 < dof + 5.0 * (2.0 * dof).sqrt(),
                "b_c={b_c} b_s={b_s}: chi2={chi2} dof={dof}"
            );
        }
    }

    #[test]
    fn adaptive_control_bit_equals_first_qubit_product_basis() {
        // exact distribution identity on the induced projector sets
        let st = prepare_graph_state(3).unwrap();
        let sched = LoccSchedule::new(3, true, true).unwrap();
        let adaptive = outcome_probabilities(&st, &sched.projector_basis(), None).unwrap();
        let product =
            outcome_probabilities(&st, &product_basis(3, 0, LocalGate::Sh).unwrap(), None).unwrap();
        for label in 0..8 {
            assert_abs_diff_eq!(
                adaptive.probability(label),
                product.probability(label),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn adaptive_run_is_deterministic() {
        let st = prepare_graph_state(2).unwrap();
        let sched = LoccSchedule::new(2, false, true).unwrap();
        let a = simulate_adaptive_run(&st, &sched, 5000, 3, 1).unwrap();
        let b = simulate_adaptive_run(&st, &sched, 5000, 3, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hellinger_examples() {
        let p = EmpiricalDistribution::from_probabilities(1, vec![1.0, 0.0]).unwrap();
        let q = EmpiricalDistribution::from_probabilities(1, vec![0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(hellinger(&p, &p).unwrap(), 0.0, epsilon = 1e-12);
        let r = EmpiricalDistribution::from_probabilities(1, vec![0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(hellinger(&p, &r).unwrap(), 1.0, epsilon = 1e-12);
        let expect = (1.0 - 1.0 / 2f64.sqrt()).sqrt();
        assert_abs_diff_eq!(hellinger(&p, &q).unwrap(), expect, epsilon = 1e-12);
        // symmetry
        assert_abs_diff_eq!(
            hellinger(&q, &p).unwrap(),
            hellinger(&p, &q).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn hellinger_triangle_spot_checks() {
        use rand::Rng;
        let mut rng = stream_rng(21, 0);
        for _ in 0..50 {
            let mut draws = |k: usize| -> EmpiricalDistribution {
                let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
                let sum: f64 = raw.iter().sum();
                EmpiricalDistribution::from_probabilities(2, raw.iter().map(|x| x / sum).collect())
                    .unwrap()
            };
            let (p, q, r) = (draws(4), draws(4), draws(4));
            let (pq, qr, pr) = (
                hellinger(&p, &q).unwrap(),
                hellinger(&q, &r).unwrap(),
                hellinger(&p, &r).unwrap(),
            );
            assert!(pr <= pq + qr + 1e-12);
        }
    }

    #[test]
    fn bit_order_round_trip() {
        assert_eq!(render_label(0b0110, 4, BitOrder::Msb), "0110");
        assert_eq!(render_label(0b0110, 4, BitOrder::Lsb), "0110");
        assert_eq!(render_label(0b0001, 4, BitOrder::Msb), "0001");
        assert_eq!(render_label(0b0001, 4, BitOrder::Lsb), "1000");
        for order in [BitOrder::Msb, BitOrder::Lsb] {
            for label in 0..16 {
                let s = render_label(label, 4, order);
                assert_eq!(parse_label(&s, 4, order).unwrap(), label);
            }
        }
    }

    #[test]
    fn ingest_maps_settings_onto_the_product_family() {
        let mut counts = BTreeMap::new();
        counts.insert("000".to_string(), 10u64);
        counts.insert("100".to_string(), 6u64);
        let file = PauliCountsFile {
            n: 3,
            bit_order: BitOrder::Lsb,
            seed: 0,
            settings: vec![
                PauliSettingRecord {
                    setting: "ZZX".into(),
                    counts: counts.clone(),
                    y_sign: None,
                },
                PauliSettingRecord {
                    setting: "ZZZ".into(),
                    counts: counts.clone(),
                    y_sign: None,
                },
                PauliSettingRecord {
                    setting: "ZYZ".into(),
                    counts: counts.clone(),
                    y_sign: Some(-1),
                },
            ],
        };
        let ingested = ingest_pauli_counts(&file).unwrap();
        // X on qubit 2 under lsb reading
        assert_eq!(ingested[0].basis.id, "h-q2");
        assert_eq!(ingested[1].basis.id, "computational");
        assert_eq!(ingested[2].basis.id, "sh-q1");
        // lsb "100" is label 1; the y_sign flip moves it across bit 1
        assert_eq!(ingested[0].counts.counts.get(&1), Some(&6));
        assert_eq!(ingested[2].counts.counts.get(&3), Some(&6));
        assert_eq!(ingested[2].counts.counts.get(&2), Some(&10));
    }

    #[test]
    fn ingest_rejects_multi_qubit_settings() {
        let file = PauliCountsFile {
            n: 3,
            bit_order: BitOrder::Lsb,
            seed: 0,
            settings: vec![PauliSettingRecord {
                setting: "XYZ".into(),
                counts: BTreeMap::new(),
                y_sign: None,
            }],
        };
        let err = ingest_pauli_counts(&file).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("XYZ"), "{msg}");
    }

    #[test]
    fn counts_file_round_trip() {
        let st = prepare_graph_state(3).unwrap();
        let bases = two_n_plus_one_bases(3).unwrap();
        let tables: Vec<CountsTable> = bases
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let dist = outcome_probabilities(&st, b, None).unwrap();
                sample_counts(&b.id, &dist, 1000, 5, i as u64)
            })
            .collect();
        let file = CountsFile::from_tables(3, 5, BitOrder::Msb, &tables);
        let text = serde_json::to_string(&file).unwrap();
        let parsed: CountsFile = serde_json::from_str(&text).unwrap();
        let back = parsed.to_tables().unwrap();
        for (orig, round) in tables.iter().zip(&back) {
            assert_eq!(orig.counts, round.counts);
            assert_eq!(orig.shots, round.shots);
        }
    }
}
