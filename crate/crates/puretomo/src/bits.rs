//! Bit-level index algebra on computational-basis labels.
//!
//! A label `j` encodes the joint outcome of `n` qubits with qubit `i` stored
//! in bit `i` of the integer, i.e. `j = sum_i j_i 2^i`. Everything downstream
//! (gate targets, basis edges, graph vertices) uses this convention.

use crate::error::{Error, Result};

/// A computational-basis label together with its qubit count.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitLabel {
    value: usize,
    n: usize,
}

impl BitLabel {
    pub fn new(value: usize, n: usize) -> Result<Self> {
        if n == 0 || value >= (1usize << n) {
            return Err(Error::LabelOutOfRange { label: value, n });
        }
        Ok(BitLabel { value, n })
    }

    pub fn value(&self) -> usize {
        self.value
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Bit `i` of the label (qubit `i`'s outcome).
    pub fn bit(&self, i: usize) -> bool {
        (self.value >> i) & 1 == 1
    }
}

/// Number of positions where the binary expansions of `j` and `k` differ.
pub fn hamming_distance(j: BitLabel, k: BitLabel) -> Result<u32> {
    if j.n != k.n {
        return Err(Error::DimensionMismatch(j.n, k.n));
    }
    Ok(hamming(j.value, k.value))
}

pub(crate) fn hamming(a: usize, b: usize) -> u32 {
    (a ^ b).count_ones()
}

/// The successor label `(j + 1) mod 2^n` and its Hamming distance from `j`.
///
/// Incrementing cascades through the trailing ones of `j`, so the distance is
/// `trailing_ones(j) + 1`, except for the all-ones label which wraps to 0 at
/// distance `n`.
pub fn successor_profile(j: BitLabel) -> (BitLabel, u32) {
    let mask = (1usize << j.n) - 1;
    let k = (j.value + 1) & mask;
    let dist = hamming(j.value, k);
    (BitLabel { value: k, n: j.n }, dist)
}

/// Image of a basis label under the descending CNOT chain
/// `CNOT_{n-1,n-2} ... CNOT_{1,0}` (control on the higher qubit).
///
/// Bitwise this is `j ^ (j >> 1)`, the reflected Gray code. Consecutive
/// labels map to labels at Hamming distance one, which is what turns the
/// label cycle into a Hamiltonian cycle of the hypercube.
pub fn rotate_index(j: BitLabel) -> Result<BitLabel> {
    if j.n < 2 {
        return Err(Error::TooFewQubits { n: j.n, min: 2 });
    }
    Ok(BitLabel {
        value: rotate_label(j.value),
        n: j.n,
    })
}

/// Raw label map of [`rotate_index`]; independent of the qubit count.
pub fn rotate_label(j: usize) -> usize {
    j ^ (j >> 1)
}

/// Inverse of [`rotate_label`] (suffix XOR).
pub fn rotate_label_inverse(mut g: usize) -> usize {
    let mut j = g;
    while g > 0 {
        g >>= 1;
        j ^= g;
    }
    j
}
