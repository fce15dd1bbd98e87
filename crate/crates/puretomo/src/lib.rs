//! Entanglement-free pure-state tomography toolkit.
//!
//! Two measurement families reconstruct an unknown n-qubit pure state
//! analytically from separable (or LOCC-assisted) measurements:
//!
//! * a fixed family of five bases whose non-computational members are
//!   realized with local gates conditioned on earlier outcomes, and
//! * a family of 2n+1 strictly local product bases, one single-qubit gate
//!   per circuit.
//!
//! Magnitudes come from the computational basis; relative phases come from
//! polarization-identity estimates attached to graph edges (label pairs at
//! Hamming distance one). Reconstruction is a closed-form recursion along a
//! spanning structure of that graph; no iterative inference is involved.
//!
//! The crate also ships a shot-level multinomial measurement simulator with
//! a minimal readout/depolarizing noise model, error-propagation budgets, a
//! purity certificate, and a device-aware qubit-chain selector.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod bases;
pub mod bits;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod hwopt;
pub mod measure;
pub mod oracle;
pub mod recon;
pub mod state;

pub use error::{Error, Result};
