//! riplab — a simulation laboratory for rational interactive proofs.
//!
//! Payment-based interactive proofs reward provers instead of being
//! accepted or rejected: a verifier exchanges messages with one or more
//! non-communicating provers, then pays them, and the protocol is sound
//! when every payment-maximizing strategy reports the correct membership
//! bit. This crate executes such protocols exactly — every expectation is
//! an exact rational computed by enumerating all random tapes, and every
//! optimum by enumerating all deterministic strategy profiles — so strict
//! inequalities like utility gaps are decided, not estimated.
//!
//! What's here:
//!
//! - [`protocol`]: inputs, explicit random tapes, transcripts with a full
//!   verifier access trace, single-run execution, exact expected payments,
//!   payment normalization, and resource audits.
//! - [`strategy`]: strategy-profile enumeration over reachable histories,
//!   optimal (payment-maximizing) profiles, the rational answer bit, and
//!   utility-gap measurement.
//! - [`zoo`]: concrete constructions — the single-round NP payment
//!   protocol, its composition under a nonadaptive oracle machine, the
//!   two-prover communication-reduction wrapper, and a toy
//!   constant-communication probe protocol.
//! - [`transforms`]: rounding payments to {0, 1}, the accept/reject view
//!   whose acceptance probability equals the expected payment, the
//!   member/nonmember separation condition, completeness/soundness
//!   extraction, and threshold repetition certified by exact binomial
//!   tails.
//! - [`deciders`]: the interval-splitting machine that recovers the answer
//!   bit from nonadaptive "is some profile's payment in this interval?"
//!   queries.
//! - [`sat`], [`config`], [`report`], [`harness`]: toy CNF instances with a
//!   DIMACS-subset parser, and the configuration-driven experiment runner
//!   behind the `riplab` binary.
//!
//! Each major capability has a runnable walkthrough under `examples/`:
//!
//! ```text
//! cargo run --example np_protocol
//! cargo run --example oracle_composition
//! cargo run --example communication_reduction
//! cargo run --example toy_probe
//! cargo run --example zero_one_rounding
//! cargo run --example accept_reject
//! cargo run --example amplification
//! cargo run --example interval_decider
//! ```

pub mod config;
pub mod deciders;
pub mod harness;
pub mod protocol;
pub mod rational;
pub mod report;
pub mod sat;
pub mod strategy;
pub mod transforms;
pub mod zoo;

pub use rational::Rat;

/// Enumeration ceilings. Analyses that would exceed them fail explicitly
/// instead of running unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of strategy profiles (and explored message paths).
    pub max_profiles: u128,
    /// Maximum number of random tapes.
    pub max_tapes: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_profiles: 1 << 20,
            max_tapes: 1 << 20,
        }
    }
}

impl Caps {
    pub fn uniform(limit: u128) -> Self {
        Caps {
            max_profiles: limit,
            max_tapes: limit,
        }
    }
}

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed strategy: {0}")]
    MalformedStrategy(String),
    #[error("communication budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("random tape has {got} bits, declared randomness budget is {want}")]
    TapeMismatch { want: usize, got: usize },
    #[error("random tape exhausted at position {0}")]
    TapeExhausted(usize),
    #[error("transcript access out of bounds: prover round {round}, prover {prover}, bit {bit}")]
    AccessOutOfBounds {
        round: usize,
        prover: usize,
        bit: usize,
    },
    #[error("verifier contract violation: {0}")]
    VerifierContract(String),
    #[error("payment {0} outside the allowed range")]
    PaymentOutOfRange(String),
    #[error("randomness cap exceeded: 2^{len} tapes over the cap of {cap}")]
    RandomnessCapExceeded { len: usize, cap: u128 },
    #[error("strategy cap exceeded: {count} profiles over the cap of {cap}")]
    StrategyCapExceeded { count: u128, cap: u128 },
    #[error("payment-maximizing profiles disagree on the answer bit")]
    InvalidRip,
    #[error("base protocol payments are not normalized to [0, 1]")]
    BaseNotNormalized,
    #[error("protocol payments are not normalized to [0, 1]")]
    NotNormalized,
    #[error("payment support is not {{0, 1}}: saw {0}")]
    NonBinaryPayment(String),
    #[error("completeness/soundness gap violated: {0}")]
    GapViolated(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("formula error: {0}")]
    Formula(String),
    #[error("analysis failed: {0}")]
    AnalysisFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("report serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    /// Process exit code for the CLI: 1 for analysis failures, 2 for
    /// configuration problems, 3 for exceeded enumeration caps.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigInvalid(_) | Error::Io(_) | Error::Formula(_) => 2,
            Error::RandomnessCapExceeded { .. } | Error::StrategyCapExceeded { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
