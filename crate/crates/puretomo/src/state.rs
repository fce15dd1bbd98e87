//! Dense pure-state representation and gate application.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the dense representation.
pub const MAX_QUBITS: usize = 24;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// An `n`-qubit pure state as a dense array of 2^n complex amplitudes.
///
/// Amplitude `j` multiplies the basis ket whose qubit `i` equals bit `i` of
/// `j`. Values are immutable after construction; gate application returns a
/// fresh state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The basis state `|label>`.
    pub fn basis_state(n: usize, label: usize) -> Result<Self> {
        check_qubit_count(n)?;
        if label >= (1 << n) {
            return Err(Error::LabelOutOfRange { label, n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[label] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn zero_state(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    /// Build from raw amplitudes; the vector is renormalized and must not be
    /// numerically zero.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubit_count(n)?;
        if amps.len() != (1 << n) {
            return Err(Error::DimensionMismatch(amps.len(), 1 << n));
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm2 < 1e-24 {
            return Err(Error::ZeroVector);
        }
        let scale = norm2.sqrt().recip();
        let amps = amps.into_iter().map(|a| a * scale).collect();
        Ok(StateVector { n, amps })
    }

    /// `(|0...0> + |1...1>)/sqrt(2)`.
    pub fn ghz(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(SQRT_HALF, 0.0);
        amps[(1 << n) - 1] = Complex64::new(SQRT_HALF, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, label: usize) -> Complex64 {
        self.amps[label]
    }

    /// Outcome probabilities `|a_j|^2` in label order.
    pub fn weights(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Apply a gate, returning the new state.
    pub fn apply_gate(&self, gate: &GateSpec) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_gate_in_place(gate)?;
        Ok(out)
    }

    pub(crate) fn apply_gate_in_place(&mut self, gate: &GateSpec) -> Result<()> {
        for &t in &gate.targets {
            if t >= self.n {
                return Err(Error::BadTargets);
            }
        }
        match gate.targets.len() {
            1 => {
                let q = gate.targets[0];
                apply_single(&mut self.amps, &gate.matrix, q);
            }
            2 => {
                let (qa, qb) = (gate.targets[0], gate.targets[1]);
                apply_two(&mut self.amps, &gate.matrix, qa, qb);
            }
            _ => return Err(Error::BadTargets),
        }
        Ok(())
    }

    /// Apply one single-qubit unitary per qubit (identity entries allowed).
    pub fn apply_local_layer(&self, layer: &[Matrix2]) -> Result<StateVector> {
        if layer.len() != self.n {
            return Err(Error::DimensionMismatch(layer.len(), self.n));
        }
        let mut out = self.clone();
        for (q, u) in layer.iter().enumerate() {
            apply_single(&mut out.amps, u.as_slice(), q);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> StateVectorJson {
        StateVectorJson {
            n: self.n,
            amplitudes: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn from_json(json: &StateVectorJson) -> Result<Self> {
        let amps = json
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        Self::from_amplitudes(json.n, amps)
    }
}

/// Serialized form: `{"n": …, "amplitudes": [[re, im], …]}` in label order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVectorJson {
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::TooFewQubits { n, min: 1 });
    }
    if n > MAX_QUBITS {
        return Err(Error::SizeCap { n, max: MAX_QUBITS });
    }
    Ok(())
}

/// 2x2 complex matrix in row-major order.
pub type Matrix2 = [Complex64; 4];

/// A 1- or 2-qubit unitary bound to target qubits.
///
/// For two targets `[a, b]`, qubit `a` indexes the least significant bit of
/// the 4x4 matrix and `b` the most significant one.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    matrix: Vec<Complex64>,
    targets: Vec<usize>,
}

impl GateSpec {
    pub fn single(target: usize, matrix: Matrix2) -> Result<Self> {
        let matrix = matrix.to_vec();
        check_unitary(&matrix, 2)?;
        Ok(GateSpec {
            matrix,
            targets: vec![target],
        })
    }

    pub fn two(target_low: usize, target_high: usize, matrix: [Complex64; 16]) -> Result<Self> {
        if target_low == target_high {
            return Err(Error::BadTargets);
        }
        let matrix = matrix.to_vec();
        check_unitary(&matrix, 4)?;
        Ok(GateSpec {
            matrix,
            targets: vec![target_low, target_high],
        })
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }
}

fn check_unitary(m: &[Complex64], d: usize) -> Result<()> {
    let mut max_dev = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            let mut dot = Complex64::new(0.0, 0.0);
            for k in 0..d {
                dot += m[k * d + i].conj() * m[k * d + j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((dot - expect).norm());
        }
    }
    if max_dev > 1e-10 {
        return Err(Error::NotUnitary(max_dev));
    }
    Ok(())
}

fn apply_single(amps: &mut [Complex64], m: &[Complex64], q: usize) {
    let stride = 1usize << q;
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for offset in base..base + stride {
            let i0 = offset;
            let i1 = offset + stride;
            let a0 = amps[i0];
            let a1 = amps[i1];
            amps[i0] = m[0] * a0 + m[1] * a1;
            amps[i1] = m[2] * a0 + m[3] * a1;
        }
        base += stride << 1;
    }
}

fn apply_two(amps: &mut [Complex64], m: &[Complex64], qa: usize, qb: usize) {
    let (sa, sb) = (1usize << qa, 1usize << qb);
    let dim = amps.len();
    for i in 0..dim {
        if i & sa == 0 && i & sb == 0 {
            let idx = [i, i | sa, i | sb, i | sa | sb];
            let prev = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
            for r in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..4 {
                    acc += m[r * 4 + c] * prev[c];
                }
                amps[idx[r]] = acc;
            }
        }
    }
}

/// Standard gate matrices in the crate's conventions.
pub mod gates {
    use super::{Complex64, GateSpec, Matrix2, Result};

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn identity() -> Matrix2 {
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]
    }

    pub fn hadamard() -> Matrix2 {
        [
            c(SQRT_HALF, 0.0),
            c(SQRT_HALF, 0.0),
            c(SQRT_HALF, 0.0),
            c(-SQRT_HALF, 0.0),
        ]
    }

    pub fn phase_s() -> Matrix2 {
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]
    }

    /// `S * H`; its columns are the `|+i>`, `|-i>` basis vectors.
    pub fn sh() -> Matrix2 {
        [
            c(SQRT_HALF, 0.0),
            c(SQRT_HALF, 0.0),
            c(0.0, SQRT_HALF),
            c(0.0, -SQRT_HALF),
        ]
    }

    pub fn pauli_x() -> Matrix2 {
        [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]
    }

    pub fn pauli_y() -> Matrix2 {
        [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]
    }

    pub fn pauli_z() -> Matrix2 {
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]
    }

    /// Principal square root of X: (1/2)[[1+i, 1-i], [1-i, 1+i]].
    pub fn sqrt_x() -> Matrix2 {
        [c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)]
    }

    pub fn adjoint2(m: &Matrix2) -> Matrix2 {
        [m[0].conj(), m[2].conj(), m[1].conj(), m[3].conj()]
    }

    /// CNOT with the given control and target qubits.
    pub fn cnot(control: usize, target: usize) -> Result<GateSpec> {
        // targets [target, control]: target is the low bit of the 4x4 index
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        #[rustfmt::skip]
        let m = [
            o, z, z, z,
            z, o, z, z,
            z, z, z, o,
            z, z, o, z,
        ];
        GateSpec::two(target, control, m)
    }

    /// Echoed cross-resonance gate `ECR_{a,b}`.
    ///
    /// The matrix is the standard (1/sqrt2)(IX - XY) form with the first
    /// index `a` as the least significant bit of the two-qubit subspace.
    /// This ordering is the one under which the layered benchmark states of
    /// [`super::prepare_graph_state`] come out with uniform amplitudes; the
    /// opposite ordering does not (checked in the tests).
    pub fn ecr(a: usize, b: usize) -> Result<GateSpec> {
        let z = c(0.0, 0.0);
        let h = SQRT_HALF;
        #[rustfmt::skip]
        let m = [
            z,            c(h, 0.0), z,            c(0.0, h),
            c(h, 0.0),    z,         c(0.0, -h),   z,
            z,            c(0.0, h), z,            c(h, 0.0),
            c(0.0, -h),   z,         c(h, 0.0),    z,
        ];
        GateSpec::two(a, b, m)
    }
}

/// Depth-three benchmark state built from sqrt(X) and ECR layers.
///
/// Layer 1 applies sqrt(X) to every qubit; layer 2 entangles the pairs
/// (0,1), (2,3), …; layer 3 entangles the staggered pairs (1,2), (3,4), …
/// with sqrt(X) on the leftover endpoints. Every outcome probability of the
/// result equals 2^-n and every bipartition is entangled.
pub fn prepare_graph_state(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::TooFewQubits { n, min: 2 });
    }
    let mut st = StateVector::zero_state(n)?;
    let sx = gates::sqrt_x();
    for q in 0..n {
        st.apply_gate_in_place(&GateSpec::single(q, sx)?)?;
    }
    if n == 2 {
        st.apply_gate_in_place(&gates::ecr(0, 1)?)?;
        st.apply_gate_in_place(&GateSpec::single(0, sx)?)?;
        return Ok(st);
    }
    if n % 2 == 0 {
        for j in 0..n / 2 {
            st.apply_gate_in_place(&gates::ecr(2 * j, 2 * j + 1)?)?;
        }
        st.apply_gate_in_place(&GateSpec::single(0, sx)?)?;
        for k in 0..n / 2 - 1 {
            st.apply_gate_in_place(&gates::ecr(2 * k + 1, 2 * k + 2)?)?;
        }
    } else {
        for j in 0..n / 2 {
            st.apply_gate_in_place(&gates::ecr(2 * j, 2 * j + 1)?)?;
        }
        st.apply_gate_in_place(&GateSpec::single(n - 1, sx)?)?;
        st.apply_gate_in_place(&GateSpec::single(0, sx)?)?;
        for k in 0..n / 2 {
            st.apply_gate_in_place(&gates::ecr(2 * k + 1, 2 * k + 2)?)?;
        }
    }
    Ok(st)
}

/// Squared overlap `|<a|b>|^2`; invariant under global phases.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// True when the reduced state across the cut `(set, complement)` has rank
/// at least two, i.e. the bipartition carries entanglement.
pub fn bipartition_entangled(state: &StateVector, set: &[usize], tol: f64) -> bool {
    let n = state.n();
    let amps = state.amplitudes();
    let rows = 1usize << set.len();
    let others: Vec<usize> = (0..n).filter(|q| !set.contains(q)).collect();
    let cols = 1usize << others.len();
    let index = |r: usize, c: usize| -> usize {
        let mut label = 0usize;
        for (pos, &q) in set.iter().enumerate() {
            label |= ((r >> pos) & 1) << q;
        }
        for (pos, &q) in others.iter().enumerate() {
            label |= ((c >> pos) & 1) << q;
        }
        label
    };
    // rank >= 2 iff some row is not proportional to a pivot row; fixing the
    // pivot column at the pivot row's largest entry keeps the scan linear
    let mut pivot: Option<(usize, usize)> = None;
    let mut best = tol;
    for r in 0..rows {
        for c in 0..cols {
            let m = amps[index(r, c)].norm_sqr();
            if m > best {
                best = m;
                pivot = Some((r, c));
            }
        }
        if pivot.is_some() {
            break;
        }
    }
    let Some((p, c1)) = pivot else { return false };
    let a_pc1 = amps[index(p, c1)];
    // scale-invariant residual: compare against the pivot magnitude so the
    // test is meaningful for uniformly small amplitudes
    let scale = a_pc1.norm_sqr() * a_pc1.norm_sqr();
    for r in 0..rows {
        if r == p {
            continue;
        }
        let a_rc1 = amps[index(r, c1)];
        for c2 in 0..cols {
            let det = a_pc1 * amps[index(r, c2)] - amps[index(p, c2)] * a_rc1;
            if det.norm_sqr() > tol * scale {
                return true;
            }
        }
    }
    false
}
