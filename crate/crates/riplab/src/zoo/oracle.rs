//! Composition of the NP payment protocol under an oracle machine that
//! makes a fixed number of nonadaptive queries.
//!
//! The prover sends `c, (c_1, m_1), ..., (c_g, m_g)` in one round: the
//! overall answer bit, then a claimed answer bit and certificate for each
//! query. The verifier scores each `(c_i, m_i)` with the NP payment rule,
//! accumulating `R_n`, feeds the claimed bits to the machine as its oracle
//! answers, and pays `-1` if `c` contradicts the machine's output and
//! `R_n / g` otherwise.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::protocol::{Input, ProtocolSpec, RoundSpec, VerifierAction, VerifierFn};
use crate::rational::{rat, Rat};
use crate::sat::{decode_tuple, encode_tuple, CnfFormula};
use crate::{Error, Result};

use super::ClassicalProofSystem;

/// Produces all oracle queries for an input before any answer is seen.
pub type QueryGenFn = Arc<dyn Fn(&Input) -> Result<Vec<Input>> + Send + Sync>;

/// Combines an input and the oracle answers into the machine's output bit.
pub type FinisherFn = Arc<dyn Fn(&Input, &[bool]) -> bool + Send + Sync>;

/// A machine deciding a language with a fixed number of nonadaptive queries
/// to an inner NP language: a query generator producing all queries before
/// any answer is seen, and a finisher combining the answers into the output
/// bit.
#[derive(Clone)]
pub struct OracleMachine {
    pub name: String,
    /// Exact number of queries per input; at least 1.
    pub query_count: usize,
    query_gen: QueryGenFn,
    finisher: FinisherFn,
}

impl OracleMachine {
    pub fn new(
        name: impl Into<String>,
        query_count: usize,
        query_gen: QueryGenFn,
        finisher: FinisherFn,
    ) -> Result<Self> {
        if query_count == 0 {
            return Err(Error::InvalidParameter(
                "oracle machines make at least one query".into(),
            ));
        }
        Ok(OracleMachine {
            name: name.into(),
            query_count,
            query_gen,
            finisher,
        })
    }

    /// All queries for `x`, generated before any answer is consumed.
    pub fn queries(&self, x: &Input) -> Result<Vec<Input>> {
        let queries = (self.query_gen)(x)?;
        if queries.len() != self.query_count {
            return Err(Error::InvalidParameter(format!(
                "query generator produced {} queries, declared {}",
                queries.len(),
                self.query_count
            )));
        }
        Ok(queries)
    }

    pub fn output(&self, x: &Input, answers: &[bool]) -> bool {
        (self.finisher)(x, answers)
    }

    /// The canonical machine: the input encodes a tuple of `query_count`
    /// formulas, the queries are the formulas themselves, and the output is
    /// the parity of the answers, i.e. whether an odd number of the
    /// formulas is declared satisfiable.
    pub fn parity_of_satisfiable(query_count: usize) -> Result<Self> {
        OracleMachine::new(
            format!("parity-sat[{query_count}]"),
            query_count,
            Arc::new(move |x: &Input| {
                Ok(decode_tuple(x, query_count)?
                    .iter()
                    .map(CnfFormula::to_input)
                    .collect())
            }),
            Arc::new(|_, answers| answers.iter().fold(false, |acc, a| acc ^ a)),
        )
    }
}

impl std::fmt::Debug for OracleMachine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleMachine")
            .field("name", &self.name)
            .field("query_count", &self.query_count)
            .finish_non_exhaustive()
    }
}

/// Input for the parity machine on a concrete tuple of formulas.
pub fn parity_tuple_input(formulas: &[CnfFormula]) -> Input {
    encode_tuple(formulas)
}

pub fn build_oracle_query_rip(machine: &OracleMachine, cps: &ClassicalProofSystem) -> ProtocolSpec {
    let gamma = machine.query_count;
    let per_query = 1 + cps.message_len;
    let message_len = 1 + gamma * per_query;
    let machine_name = machine.name.clone();
    let machine = machine.clone();
    let checker = cps.clone();
    let checker_rand = cps.randomness_len;

    let behavior: VerifierFn = Arc::new(move |io| {
        let claim = io.read_bit(0, 0, 0)?;
        let queries = machine.queries(io.input())?;
        let mut answers = Vec::with_capacity(gamma);
        let mut accumulated = Rat::zero();
        for (i, query) in queries.iter().enumerate() {
            let offset = 1 + i * per_query;
            let query_claim = io.read_bit(0, 0, offset)?;
            answers.push(query_claim);
            if !query_claim {
                accumulated += rat(1, 2);
                continue;
            }
            let mut certificate = Vec::with_capacity(checker.message_len);
            for b in 0..checker.message_len {
                certificate.push(io.read_bit(0, 0, offset + 1 + b)?);
            }
            // Dedicated tape region per query, used or not, so expectations
            // stay independent across queries.
            io.set_rand_cursor(i * checker_rand)?;
            let mut coins = Vec::with_capacity(checker_rand);
            for _ in 0..checker_rand {
                coins.push(io.rand_bit()?);
            }
            if checker.accepts(query, &certificate, &coins)? {
                accumulated += Rat::one();
            }
        }
        let output = machine.output(io.input(), &answers);
        if claim != output {
            return Ok(VerifierAction::Finish(rat(-1, 1)));
        }
        Ok(VerifierAction::Finish(
            accumulated / Rat::from_integer(gamma.into()),
        ))
    });

    ProtocolSpec::new(
        format!("oracle-rip[{machine_name}; {}]", cps.name),
        1,
        vec![RoundSpec::Prover(vec![message_len])],
        gamma * cps.randomness_len,
        message_len,
        false,
        behavior,
    )
    .expect("oracle protocol structure is valid")
    .with_metadata("gamma", gamma.to_string())
    .with_metadata("checker", cps.name.clone())
    .with_metadata(
        "payment_support",
        format!("{{-1}} u {{j/{} : 0 <= j <= {}}}", 2 * gamma, 2 * gamma),
    )
}
