//! The two measurement families: five bases whose non-computational members
//! are disentangled by a CNOT chain (realized adaptively with classical
//! communication), and 2n+1 strictly local product bases.
//!
//! Every non-computational basis vector is an edge superposition
//! `(|low> + i^ell |high>)/sqrt(2)` annotated with the label pair it probes.
//! The global phase is fixed so the smaller label carries phase 0, and the
//! outcome label of a vector equals the bitstring a circuit realization
//! would measure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::rotate_label;
use crate::error::{Error, Result};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `i^ell` for `ell` in 0..4.
pub(crate) fn i_pow(ell: u8) -> Complex64 {
    match ell & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// What a single basis vector projects onto.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum VectorDetail {
    /// `|label>`.
    Computational { label: usize },
    /// `(|low> + i^ell |high>)/sqrt(2)` with `low < high`.
    Edge { low: usize, high: usize, ell: u8 },
}

/// One basis vector plus the outcome label that selects it.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct BasisVector {
    pub outcome: usize,
    pub detail: VectorDetail,
}

impl BasisVector {
    fn sort_key(&self) -> (usize, u8) {
        match self.detail {
            VectorDetail::Computational { label } => (label, 0),
            VectorDetail::Edge { low, ell, .. } => (low, ell),
        }
    }

    /// Dense amplitudes of the vector.
    pub fn dense(&self, n: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
        match self.detail {
            VectorDetail::Computational { label } => v[label] = Complex64::new(1.0, 0.0),
            VectorDetail::Edge { low, high, ell } => {
                v[low] = Complex64::new(SQRT_HALF, 0.0);
                v[high] = i_pow(ell) * SQRT_HALF;
            }
        }
        v
    }
}

/// Build an edge vector from an arbitrarily ordered pair, normalizing to the
/// smaller-label-first phase convention. The outcome label is the smaller
/// endpoint for `ell` in {0, 1} and the larger one otherwise, which matches
/// the physical bitstring wherever the basis has a circuit realization.
fn edge_vector(a: usize, b: usize, ell: u8) -> BasisVector {
    debug_assert_ne!(a, b);
    let (low, high, ell) = if a < b {
        (a, b, ell & 3)
    } else {
        // |b> + i^ell |a> = i^ell (|a> + i^(4-ell) |b>) up to global phase
        (b, a, (4 - (ell & 3)) & 3)
    };
    let outcome = if ell < 2 { low } else { high };
    BasisVector {
        outcome,
        detail: VectorDetail::Edge { low, high, ell },
    }
}

/// How a basis is produced on hardware.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Realization {
    /// Plain computational-basis readout.
    Computational,
    /// One single-qubit basis gate per qubit (identity elsewhere); the basis
    /// vectors are the columns of the layer, so the circuit applies the
    /// adjoint layer before readout.
    Product { gates: Vec<LocalGate> },
    /// Descending CNOT chain followed by the adaptive layer with
    /// `(b_C = false, b_S)`.
    Rotated { b_s: bool },
    /// Local gates conditioned on earlier outcomes; see [`LoccSchedule`].
    Adaptive { b_c: bool, b_s: bool },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalGate {
    Identity,
    Hadamard,
    /// `S * H`, whose columns are the circular `|+i>`, `|-i>` pair.
    Sh,
}

/// An orthonormal measurement basis with per-vector edge annotations.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementBasis {
    pub id: String,
    pub n: usize,
    pub vectors: Vec<BasisVector>,
    pub realization: Realization,
}

impl MeasurementBasis {
    fn new(
        id: impl Into<String>,
        n: usize,
        mut vectors: Vec<BasisVector>,
        realization: Realization,
    ) -> Self {
        vectors.sort_by_key(|v| v.sort_key());
        debug_assert_eq!(vectors.len(), 1 << n);
        MeasurementBasis {
            id: id.into(),
            n,
            vectors,
            realization,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Vector currently assigned to a given outcome label.
    pub fn vector_for_outcome(&self, outcome: usize) -> Option<&BasisVector> {
        self.vectors.iter().find(|v| v.outcome == outcome)
    }

    /// Canonical multiset of projectors, usable for equality up to element
    /// reordering and global phases.
    pub fn projector_set(&self) -> Vec<VectorDetail> {
        let mut set: Vec<VectorDetail> = self.vectors.iter().map(|v| v.detail).collect();
        set.sort();
        set
    }

    /// Edges probed by this basis (empty for the computational basis).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .vectors
            .iter()
            .filter_map(|v| match v.detail {
                VectorDetail::Edge { low, high, .. } => Some((low, high)),
                VectorDetail::Computational { .. } => None,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn to_json(&self) -> BasisJson {
        BasisJson {
            id: self.id.clone(),
            n: self.n,
            realization: self.realization.clone(),
            vectors: self
                .vectors
                .iter()
                .map(|v| {
                    let (edge, ell) = match v.detail {
                        VectorDetail::Computational { .. } => (None, None),
                        VectorDetail::Edge { low, high, ell } => (Some([low, high]), Some(ell)),
                    };
                    let amplitudes = match v.detail {
                        VectorDetail::Computational { label } => vec![AmplitudeEntry {
                            label,
                            re: 1.0,
                            im: 0.0,
                        }],
                        VectorDetail::Edge { low, high, ell } => {
                            let z = i_pow(ell) * SQRT_HALF;
                            vec![
                                AmplitudeEntry {
                                    label: low,
                                    re: SQRT_HALF,
                                    im: 0.0,
                                },
                                AmplitudeEntry {
                                    label: high,
                                    re: z.re,
                                    im: z.im,
                                },
                            ]
                        }
                    };
                    BasisVectorJson {
                        outcome: v.outcome,
                        edge,
                        ell,
                        amplitudes,
                    }
                })
                .collect(),
        }
    }
}

/// Serialized basis: sparse nonzero amplitudes per vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisJson {
    pub id: String,
    pub n: usize,
    pub realization: Realization,
    pub vectors: Vec<BasisVectorJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisVectorJson {
    pub outcome: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<u8>,
    pub amplitudes: Vec<AmplitudeEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmplitudeEntry {
    pub label: usize,
    pub re: f64,
    pub im: f64,
}

pub fn computational_basis(n: usize) -> MeasurementBasis {
    let vectors = (0..(1 << n))
        .map(|label| BasisVector {
            outcome: label,
            detail: VectorDetail::Computational { label },
        })
        .collect();
    MeasurementBasis::new("computational", n, vectors, Realization::Computational)
}

/// Product basis with `gate` on qubit `q` and identity elsewhere.
pub fn product_basis(n: usize, q: usize, gate: LocalGate) -> Result<MeasurementBasis> {
    if q >= n {
        return Err(Error::BadTargets);
    }
    let (id, ells) = match gate {
        LocalGate::Hadamard => (format!("h-q{q}"), [0u8, 2u8]),
        LocalGate::Sh => (format!("sh-q{q}"), [1u8, 3u8]),
        LocalGate::Identity => return Err(Error::BadTargets),
    };
    let mut vectors = Vec::with_capacity(1 << n);
    for base in 0..(1usize << n) {
        if base & (1 << q) != 0 {
            continue;
        }
        vectors.push(edge_vector(base, base | (1 << q), ells[0]));
        vectors.push(edge_vector(base, base | (1 << q), ells[1]));
    }
    let gates = (0..n)
        .map(|i| if i == q { gate } else { LocalGate::Identity })
        .collect();
    Ok(MeasurementBasis::new(
        id,
        n,
        vectors,
        Realization::Product { gates },
    ))
}

/// The original five bases: computational plus four bases whose edges tile
/// the label cycle 0-1-2-…-(2^n-1)-0. The odd-pair members contain entangled
/// vectors for n >= 2; see [`disentangled_five_bases`] for the rotated,
/// fully separable form.
pub fn original_five_bases(n: usize) -> Result<[MeasurementBasis; 5]> {
    if n == 0 {
        return Err(Error::TooFewQubits { n, min: 1 });
    }
    let dim = 1usize << n;
    let mask = dim - 1;
    let build = |start: usize, ells: [u8; 2], id: &str, realization: Realization| {
        let mut vectors = Vec::with_capacity(dim);
        let mut m = start;
        loop {
            vectors.push(edge_vector(m, (m + 1) & mask, ells[0]));
            vectors.push(edge_vector(m, (m + 1) & mask, ells[1]));
            m = (m + 2) & mask;
            if m == start {
                break;
            }
        }
        MeasurementBasis::new(id, n, vectors, realization)
    };
    Ok([
        computational_basis(n),
        build(
            0,
            [0, 2],
            "cycle-even-re",
            Realization::Product {
                gates: one_hot_layer(n, 0, LocalGate::Hadamard),
            },
        ),
        build(
            0,
            [1, 3],
            "cycle-even-im",
            Realization::Product {
                gates: one_hot_layer(n, 0, LocalGate::Sh),
            },
        ),
        build(
            1,
            [0, 2],
            "cycle-odd-re",
            Realization::Rotated { b_s: false },
        ),
        build(
            1,
            [1, 3],
            "cycle-odd-im",
            Realization::Rotated { b_s: true },
        ),
    ])
}

fn one_hot_layer(n: usize, q: usize, gate: LocalGate) -> Vec<LocalGate> {
    (0..n)
        .map(|i| if i == q { gate } else { LocalGate::Identity })
        .collect()
}

/// Image of the five bases under the descending CNOT chain: identical
/// statistics as a family, but every vector is a product state and the
/// probed edges form a Hamiltonian cycle of the hypercube.
pub fn disentangled_five_bases(n: usize) -> Result<[MeasurementBasis; 5]> {
    if n < 2 {
        return Err(Error::TooFewQubits { n, min: 2 });
    }
    let originals = original_five_bases(n)?;
    let rotate_basis = |basis: &MeasurementBasis, id: &str, realization: Realization| {
        let vectors = basis
            .vectors
            .iter()
            .map(|v| match v.detail {
                VectorDetail::Computational { label } => BasisVector {
                    outcome: rotate_label(label),
                    detail: VectorDetail::Computational {
                        label: rotate_label(label),
                    },
                },
                VectorDetail::Edge { low, high, ell } => {
                    edge_vector(rotate_label(low), rotate_label(high), ell)
                }
            })
            .collect();
        MeasurementBasis::new(id, n, vectors, realization)
    };
    Ok([
        computational_basis(n),
        rotate_basis(
            &originals[1],
            "gray-even-re",
            Realization::Product {
                gates: one_hot_layer(n, 0, LocalGate::Hadamard),
            },
        ),
        rotate_basis(
            &originals[2],
            "gray-even-im",
            Realization::Product {
                gates: one_hot_layer(n, 0, LocalGate::Sh),
            },
        ),
        rotate_basis(
            &originals[3],
            "gray-odd-re",
            Realization::Adaptive {
                b_c: false,
                b_s: false,
            },
        ),
        rotate_basis(
            &originals[4],
            "gray-odd-im",
            Realization::Adaptive {
                b_c: false,
                b_s: true,
            },
        ),
    ])
}

/// The 2n+1 product bases: computational, then H on qubit k for each k, then
/// SH on qubit k. Basis 1+k probes the direction-k hypercube edges with real
/// polarization signs, basis 1+n+k the same edges with imaginary signs.
pub fn two_n_plus_one_bases(n: usize) -> Result<Vec<MeasurementBasis>> {
    if n == 0 {
        return Err(Error::TooFewQubits { n, min: 1 });
    }
    let mut out = Vec::with_capacity(2 * n + 1);
    out.push(computational_basis(n));
    for q in 0..n {
        out.push(product_basis(n, q, LocalGate::Hadamard)?);
    }
    for q in 0..n {
        out.push(product_basis(n, q, LocalGate::Sh)?);
    }
    Ok(out)
}

/// Classical control program for one adaptive measurement run.
///
/// Qubits are measured in index order. Before qubit `j` is measured, the
/// basis gate (H, then S when `b_s`) fires at most once per run, when
///
/// * `j` is the first qubit and `b_c` is set, or
/// * no gate has fired yet and the previous outcome was 1 (for j < n-1), or
/// * `j` is the last qubit and no gate has fired yet.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoccSchedule {
    pub n: usize,
    pub b_c: bool,
    pub b_s: bool,
}

impl LoccSchedule {
    pub fn new(n: usize, b_c: bool, b_s: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewQubits { n, min: 2 });
        }
        Ok(LoccSchedule { n, b_c, b_s })
    }

    /// Whether the gate fires before measuring `qubit`, given the last
    /// outcome bit `b_m` and the has-fired latch `b_h`.
    pub fn fires(&self, qubit: usize, b_m: bool, b_h: bool) -> bool {
        (qubit == 0 && self.b_c)
            || (qubit + 1 < self.n && !b_h && b_m)
            || (qubit + 1 == self.n && !b_h)
    }

    /// The qubit the gate fires on for a given outcome bitstring.
    pub fn fired_qubit(&self, outcome: usize) -> usize {
        let mut b_m = false;
        let b_h = false;
        for qubit in 0..self.n {
            if self.fires(qubit, b_m, b_h) {
                return qubit;
            }
            b_m = (outcome >> qubit) & 1 == 1;
        }
        unreachable!("the last-qubit clause always fires");
    }

    /// The orthonormal product basis this schedule induces, with outcome
    /// labels equal to the measured bitstrings.
    pub fn projector_basis(&self) -> MeasurementBasis {
        let n = self.n;
        let mut vectors = Vec::with_capacity(1 << n);
        for outcome in 0..(1usize << n) {
            let k = self.fired_qubit(outcome);
            let base = outcome & !(1 << k);
            let bit = (outcome >> k) & 1 == 1;
            let ell = match (self.b_s, bit) {
                (false, false) => 0,
                (false, true) => 2,
                (true, false) => 1,
                (true, true) => 3,
            };
            vectors.push(edge_vector(base, base | (1 << k), ell));
        }
        let id = format!("locc-c{}-s{}", u8::from(self.b_c), u8::from(self.b_s));
        MeasurementBasis::new(
            id,
            n,
            vectors,
            Realization::Adaptive {
                b_c: self.b_c,
                b_s: self.b_s,
            },
        )
    }
}

/// Convenience constructor mirroring the family grouping.
pub fn locc_schedule(n: usize, b_c: bool, b_s: bool) -> Result<LoccSchedule> {
    LoccSchedule::new(n, b_c, b_s)
}

/// Result of the separability check.
#[derive(Clone, Debug)]
pub struct ProductCheck {
    pub is_product: bool,
    /// Largest Schmidt coefficient (singular value) for each single-qubit cut.
    pub per_cut_largest_schmidt: Vec<f64>,
}

const PRODUCT_TOL: f64 = 1e-10;

/// Schmidt test: a unit vector is a product state iff every single-qubit cut
/// has largest Schmidt coefficient 1. For two-term superpositions
/// `a|j> + b|j'>` this is equivalent to `d_H(j, j') <= 1`.
pub fn is_product_state(n: usize, amps: &[Complex64]) -> Result<ProductCheck> {
    if amps.len() != (1 << n) {
        return Err(Error::DimensionMismatch(amps.len(), 1 << n));
    }
    let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if norm2 < 1e-24 {
        return Err(Error::ZeroVector);
    }
    let mut per_cut = Vec::with_capacity(n);
    for q in 0..n {
        let step = 1usize << q;
        let mut r00 = 0.0;
        let mut r11 = 0.0;
        let mut r01 = Complex64::new(0.0, 0.0);
        for j in 0..amps.len() {
            if j & step == 0 {
                r00 += amps[j].norm_sqr();
                r11 += amps[j | step].norm_sqr();
                r01 += amps[j] * amps[j | step].conj();
            }
        }
        let (r00, r11) = (r00 / norm2, r11 / norm2);
        let r01 = r01 / norm2;
        let mid = 0.5 * (r00 + r11);
        let rad = (0.25 * (r00 - r11).powi(2) + r01.norm_sqr()).sqrt();
        let eig_max = (mid + rad).clamp(0.0, 1.0);
        per_cut.push(eig_max.sqrt());
    }
    let is_product = per_cut.iter().all(|s| *s >= 1.0 - PRODUCT_TOL);
    Ok(ProductCheck {
        is_product,
        per_cut_largest_schmidt: per_cut,
    })
}

pub fn is_product_vector(n: usize, v: &BasisVector) -> Result<ProductCheck> {
    is_product_state(n, &v.dense(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::hamming;

    fn assert_orthonormal_complete(basis: &MeasurementBasis) {
        let dim = basis.dim();
        assert_eq!(basis.vectors.len(), dim, "{}", basis.id);
        // outcome labels form a permutation
        let mut seen = vec![false; dim];
        for v in &basis.vectors {
            assert!(
                !seen[v.outcome],
                "{}: outcome {} repeated",
                basis.id, v.outcome
            );
            seen[v.outcome] = true;
        }
        // pairwise orthogonality and completeness, dense
        let dense: Vec<Vec<Complex64>> = basis.vectors.iter().map(|v| v.dense(basis.n)).collect();
        for (i, a) in dense.iter().enumerate() {
            for (j, b) in dense.iter().enumerate() {
                let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (dot.norm() - expect).abs() < 1e-10,
                    "{}: <{i}|{j}> = {dot}",
                    basis.id
                );
            }
        }
    }

    /// Sparse projector sum: every basis vector touches at most two labels,
    /// so completeness can be checked entry-wise up to n = 8.
    fn assert_projector_sum_is_identity(basis: &MeasurementBasis) {
        use std::collections::BTreeMap;
        let mut sum: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        let mut add = |r: usize, c: usize, v: Complex64| {
            *sum.entry((r, c)).or_insert(Complex64::new(0.0, 0.0)) += v;
        };
        for v in &basis.vectors {
            match v.detail {
                VectorDetail::Computational { label } => add(label, label, Complex64::new(1.0, 0.0)),
                VectorDetail::Edge { low, high, ell } => {
                    let z = i_pow(ell);
                    add(low, low, Complex64::new(0.5, 0.0));
                    add(high, high, Complex64::new(0.5, 0.0));
                    add(low, high, 0.5 * z.conj());
                    add(high, low, 0.5 * z);
                }
            }
        }
        for ((r, c), v) in sum {
            let expect = if r == c { 1.0 } else { 0.0 };
            assert!(
                (v - expect).norm() < 1e-10,
                "{}: projector sum entry ({r},{c}) = {v}",
                basis.id
            );
        }
    }

    #[test]
    fn projector_sums_complete_up_to_n8() {
        for n in 2..=8 {
            for b in disentangled_five_bases(n).unwrap().iter() {
                assert_projector_sum_is_identity(b);
            }
            for b in two_n_plus_one_bases(n).unwrap() {
                assert_projector_sum_is_identity(&b);
            }
            for b in original_five_bases(n).unwrap().iter() {
                assert_projector_sum_is_identity(b);
            }
        }
    }

    #[test]
    fn families_are_orthonormal_and_complete() {
        for n in 1..=5 {
            for b in original_five_bases(n).unwrap().iter() {
                assert_orthonormal_complete(b);
            }
            for b in two_n_plus_one_bases(n).unwrap() {
                assert_orthonormal_complete(&b);
            }
        }
        for n in 2..=5 {
            for b in disentangled_five_bases(n).unwrap().iter() {
                assert_orthonormal_complete(b);
            }
            for b_c in [false, true] {
                for b_s in [false, true] {
                    let basis = LoccSchedule::new(n, b_c, b_s).unwrap().projector_basis();
                    assert_orthonormal_complete(&basis);
                }
            }
        }
    }

    #[test]
    fn original_five_two_qubits_explicit() {
        // odd-pair real basis at n=2: {|00>±|11>, |01>±|10>}, label pairs {0,3}, {1,2}
        let bases = original_five_bases(2).unwrap();
        assert_eq!(bases[3].edges(), vec![(0, 3), (1, 2)]);
        assert_eq!(bases[4].edges(), vec![(0, 3), (1, 2)]);
        assert_eq!(bases[1].edges(), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn original_five_edges_tile_the_label_cycle() {
        for n in 1..=6 {
            let bases = original_five_bases(n).unwrap();
            let mask = (1usize << n) - 1;
            let mut edges: Vec<(usize, usize)> = Vec::new();
            for b in &bases[1..] {
                edges.extend(b.edges());
            }
            edges.sort();
            edges.dedup();
            let mut expect: Vec<(usize, usize)> = (0..=mask)
                .map(|j| {
                    let k = (j + 1) & mask;
                    (j.min(k), j.max(k))
                })
                .collect();
            expect.sort();
            expect.dedup();
            assert_eq!(edges, expect, "n={n}");
        }
    }

    #[test]
    fn disentangled_two_qubits_matches_product_form() {
        // the rotated odd-pair bases become H / SH on qubit 1
        let bases = disentangled_five_bases(2).unwrap();
        assert_eq!(bases[3].edges(), vec![(0, 2), (1, 3)]);
        let h_q1 = product_basis(2, 1, LocalGate::Hadamard).unwrap();
        assert_eq!(bases[3].projector_set(), h_q1.projector_set());
        let sh_q1 = product_basis(2, 1, LocalGate::Sh).unwrap();
        assert_eq!(bases[4].projector_set(), sh_q1.projector_set());
        // even-pair bases are invariant under the chain
        let originals = original_five_bases(2).unwrap();
        assert_eq!(bases[1].projector_set(), originals[1].projector_set());
        assert_eq!(bases[2].projector_set(), originals[2].projector_set());
    }

    #[test]
    fn disentangled_edges_form_hypercube_hamiltonian_cycle() {
        for n in 2..=6 {
            let bases = disentangled_five_bases(n).unwrap();
            let mask = (1usize << n) - 1;
            let mut edges: Vec<(usize, usize)> = Vec::new();
            for b in &bases[1..] {
                edges.extend(b.edges());
            }
            edges.sort();
            edges.dedup();
            assert_eq!(edges.len(), 1 << n, "n={n}");
            for &(a, b) in &edges {
                assert_eq!(hamming(a, b), 1, "n={n} edge ({a},{b})");
            }
            // the image of the label cycle under the chain rotation
            let mut expect: Vec<(usize, usize)> = (0..=mask)
                .map(|j| {
                    let (a, b) = (rotate_label(j), rotate_label((j + 1) & mask));
                    (a.min(b), a.max(b))
                })
                .collect();
            expect.sort();
            expect.dedup();
            assert_eq!(edges, expect, "n={n}");
        }
    }

    #[test]
    fn disentangled_vectors_are_all_product_states() {
        for n in 2..=5 {
            for basis in disentangled_five_bases(n).unwrap().iter() {
                for v in &basis.vectors {
                    let check = is_product_vector(n, v).unwrap();
                    assert!(check.is_product, "{} {:?}", basis.id, v.detail);
                }
            }
        }
    }

    #[test]
    fn two_n_plus_one_single_qubit_is_the_mub_triple() {
        let bases = two_n_plus_one_bases(1).unwrap();
        assert_eq!(bases.len(), 3);
        assert_eq!(
            bases[1].projector_set(),
            vec![
                VectorDetail::Edge {
                    low: 0,
                    high: 1,
                    ell: 0
                },
                VectorDetail::Edge {
                    low: 0,
                    high: 1,
                    ell: 2
                },
            ]
        );
        assert_eq!(
            bases[2].projector_set(),
            vec![
                VectorDetail::Edge {
                    low: 0,
                    high: 1,
                    ell: 1
                },
                VectorDetail::Edge {
                    low: 0,
                    high: 1,
                    ell: 3
                },
            ]
        );
    }

    #[test]
    fn two_n_plus_one_coincides_with_disentangled_five_at_n2() {
        let a = two_n_plus_one_bases(2).unwrap();
        let b = disentangled_five_bases(2).unwrap();
        let mut fam_a: Vec<Vec<VectorDetail>> = a.iter().map(|x| x.projector_set()).collect();
        let mut fam_b: Vec<Vec<VectorDetail>> = b.iter().map(|x| x.projector_set()).collect();
        fam_a.sort();
        fam_b.sort();
        assert_eq!(fam_a, fam_b);
    }

    #[test]
    fn two_n_plus_one_three_qubits_contains_printed_middle_basis() {
        // {|0,±,0>, |0,±,1>, |1,±,0>, |1,±,1>}: direction-1 edges, real signs
        let bases = two_n_plus_one_bases(3).unwrap();
        let mut expect: Vec<VectorDetail> = [(0usize, 2usize), (1, 3), (4, 6), (5, 7)]
            .iter()
            .flat_map(|&(a, b)| {
                [
                    VectorDetail::Edge {
                        low: a,
                        high: b,
                        ell: 0,
                    },
                    VectorDetail::Edge {
                        low: a,
                        high: b,
                        ell: 2,
                    },
                ]
            })
            .collect();
        expect.sort();
        assert_eq!(bases[2].projector_set(), expect);
        assert_eq!(bases.len(), 7);
    }

    #[test]
    fn two_n_plus_one_directions_partition_hypercube_edges() {
        for n in 1..=6 {
            let bases = two_n_plus_one_bases(n).unwrap();
            for k in 0..n {
                let real_edges = bases[1 + k].edges();
                let imag_edges = bases[1 + n + k].edges();
                assert_eq!(real_edges, imag_edges);
                assert_eq!(real_edges.len(), 1 << (n - 1));
                for &(a, b) in &real_edges {
                    assert_eq!(b, a | (1 << k));
                    assert_eq!(a & (1 << k), 0);
                }
            }
        }
    }

    #[test]
    fn two_n_plus_one_vectors_are_all_product_states() {
        for n in 2..=5 {
            for basis in two_n_plus_one_bases(n).unwrap() {
                for v in &basis.vectors {
                    assert!(is_product_vector(n, v).unwrap().is_product, "{}", basis.id);
                }
            }
        }
    }

    #[test]
    fn locc_with_control_bit_is_first_qubit_product_basis() {
        for n in 2..=4 {
            let basis = LoccSchedule::new(n, true, false).unwrap().projector_basis();
            let h0 = product_basis(n, 0, LocalGate::Hadamard).unwrap();
            assert_eq!(basis.projector_set(), h0.projector_set());
            let basis = LoccSchedule::new(n, true, true).unwrap().projector_basis();
            let sh0 = product_basis(n, 0, LocalGate::Sh).unwrap();
            assert_eq!(basis.projector_set(), sh0.projector_set());
        }
    }

    #[test]
    fn locc_all_zero_prefix_fires_on_last_qubit() {
        let sched = LoccSchedule::new(4, false, false).unwrap();
        assert_eq!(sched.fired_qubit(0b0000), 3);
        assert_eq!(sched.fired_qubit(0b1000), 3);
        // a one on the penultimate qubit is too late to trigger the middle clause
        assert_eq!(sched.fired_qubit(0b0100), 3);
        assert_eq!(sched.fired_qubit(0b0001), 1);
        assert_eq!(sched.fired_qubit(0b0110), 2);
    }

    #[test]
    fn locc_matches_rotated_odd_basis_at_n2() {
        let bases = disentangled_five_bases(2).unwrap();
        let sched = LoccSchedule::new(2, false, false).unwrap();
        assert_eq!(
            sched.projector_basis().projector_set(),
            bases[3].projector_set()
        );
        let sched = LoccSchedule::new(2, false, true).unwrap();
        assert_eq!(
            sched.projector_basis().projector_set(),
            bases[4].projector_set()
        );
    }

    #[test]
    fn locc_family_probes_same_edges_as_disentangled_family() {
        for n in 2..=4 {
            let mut locc_edges: Vec<(usize, usize)> = Vec::new();
            for b_c in [false, true] {
                for b_s in [false, true] {
                    locc_edges.extend(
                        LoccSchedule::new(n, b_c, b_s)
                            .unwrap()
                            .projector_basis()
                            .edges(),
                    );
                }
            }
            locc_edges.sort();
            locc_edges.dedup();
            let bases = disentangled_five_bases(n).unwrap();
            let mut family_edges: Vec<(usize, usize)> = Vec::new();
            for b in &bases[1..] {
                family_edges.extend(b.edges());
            }
            family_edges.sort();
            family_edges.dedup();
            assert_eq!(locc_edges, family_edges, "n={n}");
        }
    }

    #[test]
    fn product_check_examples() {
        let n = 2;
        // Bell pair: not product
        let mut bell = vec![Complex64::new(0.0, 0.0); 4];
        bell[0] = Complex64::new(SQRT_HALF, 0.0);
        bell[3] = Complex64::new(SQRT_HALF, 0.0);
        assert!(!is_product_state(n, &bell).unwrap().is_product);
        // |1> (x) |+>: product
        let mut v = vec![Complex64::new(0.0, 0.0); 4];
        v[1] = Complex64::new(SQRT_HALF, 0.0);
        v[3] = Complex64::new(SQRT_HALF, 0.0);
        assert!(is_product_state(n, &v).unwrap().is_product);
        // zero vector is rejected
        assert!(is_product_state(n, &vec![Complex64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn product_check_matches_hamming_predicate_on_random_edges() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(2..=6);
            let j = rng.gen_range(0..(1usize << n));
            let mut k = rng.gen_range(0..(1usize << n));
            if k == j {
                k = j ^ 1;
            }
            let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
            let a = Complex64::new(rng.gen::<f64>() + 0.1, rng.gen::<f64>() - 0.5);
            let b = Complex64::new(rng.gen::<f64>() + 0.1, rng.gen::<f64>() - 0.5);
            v[j] = a;
            v[k] = b;
            let check = is_product_state(n, &v).unwrap();
            assert_eq!(check.is_product, hamming(j, k) <= 1, "n={n} j={j} k={k}");
        }
    }
}
