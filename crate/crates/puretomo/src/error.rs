//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("label {label} out of range for {n} qubits")]
    LabelOutOfRange { label: usize, n: usize },

    #[error("operation needs at least {min} qubits, got {n}")]
    TooFewQubits { n: usize, min: usize },

    #[error("dense statevector capped at {max} qubits, got {n}")]
    SizeCap { n: usize, max: usize },

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("gate targets out of range or duplicated")]
    BadTargets,

    #[error("zero vector")]
    ZeroVector,

    #[error("vertex {0} is not in the pruned graph")]
    VertexPruned(usize),

    #[error("no path between {j} and {k}: {j} lies in component {a:?}, {k} in component {b:?}")]
    NoPath {
        j: usize,
        k: usize,
        a: Vec<usize>,
        b: Vec<usize>,
    },

    #[error("graph disconnected after pruning; components: {}", format_components(.components))]
    Disconnected { components: Vec<Vec<usize>> },

    #[error("estimation chain broken at edge ({0}, {1}): |Lambda| below the reliability floor")]
    ChainBroken(usize, usize),

    #[error("no polarization estimate available for edge ({0}, {1})")]
    MissingEstimate(usize, usize),

    #[error("phase estimate unreliable: the real-pair probabilities coincide")]
    UnreliablePhase,

    #[error(
        "pre-rotation failed: still produced near-zero weights after {retries} randomized retries"
    )]
    PrerotationFailed { retries: usize },

    #[error("no simple path with exactly {0} nodes exists in the device graph")]
    NoChain(usize),

    #[error("exhaustive path search refused: {0} nodes exceeds the cap of {1}")]
    OracleCap(usize, usize),

    #[error("Pauli setting \"{setting}\" rejected: {reason}")]
    BadPauliSetting { setting: String, reason: String },

    #[error("schema error in field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn schema(field: &str, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema { .. } | Error::BadPauliSetting { .. } | Error::Json(_) => 2,
            Error::Disconnected { .. } | Error::NoPath { .. } | Error::PrerotationFailed { .. } => {
                3
            }
            Error::SizeCap { .. } | Error::OracleCap(..) => 4,
            _ => 1,
        }
    }
}

fn format_components(components: &[Vec<usize>]) -> String {
    let parts: Vec<String> = components
        .iter()
        .map(|c| {
            if c.len() > 8 {
                format!("[{} vertices, first {:?}]", c.len(), &c[..8])
            } else {
                format!("{c:?}")
            }
        })
        .collect();
    parts.join(" | ")
}
