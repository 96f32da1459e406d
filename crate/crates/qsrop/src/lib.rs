//! An exact state-vector laboratory for encryption games with quantum
//! superposition oracle access.
//!
//! The crate simulates, at desk scale (a configurable cap of 22 qubits by
//! default), the security experiments of symmetric encryption against
//! adversaries that query encryption and decryption oracles in superposition:
//!
//! * [`qcore`] — registers, amplitude vectors, XOR-style query unitaries,
//!   Walsh–Hadamard transforms, measurements and pure-state metrics.
//! * [`schemes`] — keyed function families, random function/permutation
//!   samplers, and the encryption constructions under study, each realised as
//!   per-invocation truth tables.
//! * [`experiments`] — the distinguishing games (`qprf`, `rop-qscpa`,
//!   `rop-qscca`), the decryption-restriction monitor, Monte Carlo advantage
//!   estimation, and the reduction wrappers `B` and `J`.
//! * [`attacks`] — concrete adversaries: a Walsh–Hadamard distinguisher, a
//!   Grover tag-forgery adversary, and classical baselines.
//! * [`analysis`] — pointwise numeric verification of the fidelity /
//!   trace-distance inequality chain on recorded runs, and calculators for the
//!   closed-form bounds.
//! * [`cli`] — the `qsrop` command-line front end.
//!
//! Everything is deterministic given a master seed; see [`seed::SeedTree`]
//! for the splitting rule.
//!
//! ```
//! use qsrop::qcore::{QState, RegisterLayout, BitString};
//!
//! let layout = RegisterLayout::new(&[("m", 2), ("c", 2)], 22)?;
//! let mut state = QState::basis(&layout, &BitString::new(4, 0b00_01)?)?;
//! state.walsh_hadamard("m")?;
//! assert!((state.norm() - 1.0).abs() < 1e-12);
//! # Ok::<(), qsrop::Error>(())
//! ```

pub mod analysis;
pub mod attacks;
pub mod cli;
pub mod experiments;
pub mod qcore;
pub mod report;
pub mod schemes;
pub mod seed;

use thiserror::Error;

/// Default register size cap. Keeps a state vector under 64 MiB.
pub const DEFAULT_QUBIT_CAP: usize = 22;

/// Tolerance for the unit-norm invariant.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Weight below this counts as zero support (restriction monitor, collapsed
/// amplitudes).
pub const ZERO_WEIGHT: f64 = 1e-12;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown segment `{0}`")]
    UnknownSegment(String),
    #[error("{context}: expected {expected} bits, got {got}")]
    WidthMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("value {value:#x} does not fit in {width} bits")]
    ValueOutOfRange { value: u64, width: usize },
    #[error("register of {requested} qubits exceeds the cap of {cap}")]
    QubitCapExceeded { requested: usize, cap: usize },
    #[error("segment width must be at least 1")]
    EmptySegment,
    #[error("duplicate segment name `{0}`")]
    DuplicateSegment(String),
    #[error("input and output segments of a query unitary must be disjoint")]
    OverlappingSegments,
    #[error("table entries are not a bijection")]
    NotABijection,
    #[error("states live on different layouts")]
    LayoutMismatch,
    #[error("state norm {norm} violates the unit-norm invariant")]
    NormViolation { norm: f64 },
    #[error("operation requires scheme {expected}, instance is {got}")]
    WrongScheme {
        expected: &'static str,
        got: &'static str,
    },
    #[error("adversary layout is missing segment `{name}` of width {width}")]
    MissingSegment { name: String, width: usize },
    #[error("{kind} query budget of {budget} exceeded")]
    BudgetExceeded { kind: &'static str, budget: u32 },
    #[error(
        "restriction violated at decryption query {query}: ciphertext {ciphertext:#x} \
         carries weight {weight:.3e}"
    )]
    RestrictionViolated {
        query: u32,
        ciphertext: u64,
        weight: f64,
    },
    #[error("paired runs disagree: {0}")]
    PairingMismatch(String),
    #[error("sample group {0} is empty")]
    EmptyGroup(usize),
    #[error("xi must be positive, got {0}")]
    NonPositiveXi(f64),
    #[error("need at least {min} trials, got {got}")]
    TooFewTrials { min: u32, got: u32 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trial {index} of arm b={arm}: {source}")]
    Trial {
        arm: u8,
        index: u32,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

// The book chapters double as doc-tests so the guide can never drift from the
// API. `cargo test --doc` runs every fenced snippet below.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/registers-and-oracles.md")]
    pub struct RegistersAndOracles;
    #[doc = include_str!("../../../book/src/function-families.md")]
    pub struct FunctionFamilies;
    #[doc = include_str!("../../../book/src/distinguishing-games.md")]
    pub struct DistinguishingGames;
    #[doc = include_str!("../../../book/src/superposition-attacks.md")]
    pub struct SuperpositionAttacks;
    #[doc = include_str!("../../../book/src/checking-the-bounds.md")]
    pub struct CheckingTheBounds;
    #[doc = include_str!("../../../book/src/command-line.md")]
    pub struct CommandLine;
}
