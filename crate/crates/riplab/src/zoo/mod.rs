//! Concrete protocol constructions: the single-round payment protocol for
//! an NP language, its composition under an oracle machine making several
//! nonadaptive queries, the two-prover communication-reduction wrapper, and
//! a toy constant-communication protocol for exercising the engine.

mod np;
mod oracle;
mod toy;
mod wrapper;

pub use np::build_np_rip;
pub use oracle::{build_oracle_query_rip, parity_tuple_input, OracleMachine};
pub use toy::build_toy_constant_comm;
pub use wrapper::{build_communication_reduction, honest_wrapper_profile};

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::protocol::{tape_count, Input, RandomTape};
use crate::rational::{rat, rat_string, Rat};
use crate::sat::CnfFormula;
use crate::{Caps, Error, Result};

/// Membership oracle of a classical proof system, decidable at desk scale.
pub type MembershipFn = Arc<dyn Fn(&Input) -> Result<bool> + Send + Sync>;

/// Accept/reject procedure over `(input, message, coin bits)`.
pub type AcceptFn = Arc<dyn Fn(&Input, &[bool], &[bool]) -> Result<bool> + Send + Sync>;

/// A one-round classical proof system with declared completeness and
/// soundness, standing in for the inner accept/reject protocol the payment
/// rules score against.
///
/// Only `(completeness, soundness)` enter any analysis; the accept procedure
/// itself is a black box consuming a dedicated slice of tape bits.
#[derive(Clone)]
pub struct ClassicalProofSystem {
    pub name: String,
    /// Length of the one prover message; the message space is all bit
    /// strings of this length.
    pub message_len: usize,
    /// Tape bits the accept procedure consumes per run.
    pub randomness_len: usize,
    /// Declared completeness `c0`.
    pub completeness: Rat,
    /// Declared soundness `s0`.
    pub soundness: Rat,
    membership: MembershipFn,
    accept: AcceptFn,
}

impl ClassicalProofSystem {
    pub fn new(
        name: impl Into<String>,
        message_len: usize,
        randomness_len: usize,
        completeness: Rat,
        soundness: Rat,
        membership: MembershipFn,
        accept: AcceptFn,
    ) -> Result<Self> {
        if soundness < Rat::zero() || completeness > Rat::one() || soundness >= completeness {
            return Err(Error::InvalidParameter(format!(
                "proof system parameters need 0 <= s0 < c0 <= 1, got s0={}, c0={}",
                rat_string(&soundness),
                rat_string(&completeness)
            )));
        }
        Ok(ClassicalProofSystem {
            name: name.into(),
            message_len,
            randomness_len,
            completeness,
            soundness,
            membership,
            accept,
        })
    }

    pub fn is_member(&self, x: &Input) -> Result<bool> {
        (self.membership)(x)
    }

    pub fn accepts(&self, x: &Input, message: &[bool], coins: &[bool]) -> Result<bool> {
        if message.len() != self.message_len {
            return Err(Error::InvalidParameter(format!(
                "checker message has {} bits, expected {}",
                message.len(),
                self.message_len
            )));
        }
        if coins.len() != self.randomness_len {
            return Err(Error::InvalidParameter(format!(
                "checker got {} coin bits, expected {}",
                coins.len(),
                self.randomness_len
            )));
        }
        (self.accept)(x, message, coins)
    }

    /// Exact acceptance probability of one message over all coin strings.
    pub fn acceptance_probability(&self, x: &Input, message: &[bool]) -> Result<Rat> {
        let total = tape_count(self.randomness_len).ok_or(Error::RandomnessCapExceeded {
            len: self.randomness_len,
            cap: u128::MAX,
        })?;
        let mut accepting: u128 = 0;
        for coins in RandomTape::all(self.randomness_len) {
            if self.accepts(x, message, coins.bits())? {
                accepting += 1;
            }
        }
        Ok(Rat::new(accepting.into(), total.into()))
    }

    /// Verifies the declared parameters on one input by enumerating every
    /// message and every coin string: members must have a message accepted
    /// with probability at least `c0`, nonmembers no message above `s0`.
    pub fn check_parameters(&self, x: &Input, caps: &Caps) -> Result<()> {
        let messages = tape_count(self.message_len)
            .filter(|c| *c <= caps.max_profiles)
            .ok_or(Error::StrategyCapExceeded {
                count: u128::MAX,
                cap: caps.max_profiles,
            })?;
        let member = self.is_member(x)?;
        let mut best = Rat::zero();
        for m in 0..messages {
            let bits: Vec<bool> = (0..self.message_len)
                .map(|pos| (m >> (self.message_len - 1 - pos)) & 1 == 1)
                .collect();
            let p = self.acceptance_probability(x, &bits)?;
            if member {
                if p > best {
                    best = p;
                }
            } else if p > self.soundness {
                return Err(Error::InvalidParameter(format!(
                    "nonmember {x} has a message accepted with probability {} > s0 = {}",
                    rat_string(&p),
                    rat_string(&self.soundness)
                )));
            }
        }
        if member && best < self.completeness {
            return Err(Error::InvalidParameter(format!(
                "member {x} reaches acceptance probability only {} < c0 = {}",
                rat_string(&best),
                rat_string(&self.completeness)
            )));
        }
        Ok(())
    }

    /// The perfect certificate checker for toy SAT: the message is an
    /// assignment, accepted iff it satisfies the encoded formula. No
    /// randomness, `c0 = 1`, `s0 = 0`.
    pub fn perfect_sat_checker() -> Self {
        ClassicalProofSystem::new(
            "perfect-sat",
            crate::sat::MAX_VARS,
            0,
            Rat::one(),
            Rat::zero(),
            Arc::new(|x| Ok(CnfFormula::from_input(x)?.satisfiable())),
            Arc::new(|x, message, _| Ok(CnfFormula::from_input(x)?.eval(message))),
        )
        .expect("perfect checker parameters are valid")
    }

    /// A synthetic noisy checker: satisfying assignments are always
    /// accepted, and any non-satisfying message is accepted exactly when
    /// its two dedicated tape bits read 00, so wrong claims survive with
    /// probability exactly 1/4. `c0 = 1`, `s0 = 1/4`.
    pub fn noisy_sat_checker() -> Self {
        ClassicalProofSystem::new(
            "noisy-sat",
            crate::sat::MAX_VARS,
            2,
            Rat::one(),
            rat(1, 4),
            Arc::new(|x| Ok(CnfFormula::from_input(x)?.satisfiable())),
            Arc::new(|x, message, coins| {
                Ok(CnfFormula::from_input(x)?.eval(message) || (!coins[0] && !coins[1]))
            }),
        )
        .expect("noisy checker parameters are valid")
    }
}

impl std::fmt::Debug for ClassicalProofSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClassicalProofSystem")
            .field("name", &self.name)
            .field("message_len", &self.message_len)
            .field("randomness_len", &self.randomness_len)
            .field("completeness", &rat_string(&self.completeness))
            .field("soundness", &rat_string(&self.soundness))
            .finish_non_exhaustive()
    }
}
