//! Shared fixtures for the integration suites.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use riplab::protocol::{Input, Message, ProtocolSpec, RoundSpec, VerifierAction, VerifierFn};
use riplab::rational::{rat, Rat};
use riplab::sat::CnfFormula;
use riplab::strategy::StrategyProfile;

/// `(x1 | x2) & !x1`, satisfiable by `x1 = 0, x2 = 1`.
pub fn phi1() -> CnfFormula {
    CnfFormula::from_clauses(2, &[vec![1, 2], vec![-1]]).unwrap()
}

/// `x1 & !x1`, unsatisfiable.
pub fn phi2() -> CnfFormula {
    CnfFormula::from_clauses(1, &[vec![1], vec![-1]]).unwrap()
}

/// Twelve toy instances over at most three variables, labels verified by
/// brute force in the suites that use them.
pub fn formula_suite() -> Vec<CnfFormula> {
    vec![
        phi1(),
        CnfFormula::from_clauses(1, &[vec![1]]).unwrap(),
        CnfFormula::from_clauses(3, &[vec![1, 2, 3]]).unwrap(),
        CnfFormula::from_clauses(2, &[vec![-1], vec![-2]]).unwrap(),
        CnfFormula::from_clauses(3, &[vec![1, -2], vec![2, 3]]).unwrap(),
        CnfFormula::from_clauses(1, &[]).unwrap(),
        CnfFormula::from_clauses(3, &[vec![1], vec![2], vec![3]]).unwrap(),
        phi2(),
        CnfFormula::from_clauses(2, &[vec![1, 2], vec![-1], vec![-2]]).unwrap(),
        CnfFormula::from_clauses(2, &[vec![2], vec![-2]]).unwrap(),
        CnfFormula::from_clauses(2, &[vec![1, 2], vec![1, -2], vec![-1, 2], vec![-1, -2]]).unwrap(),
        CnfFormula::from_clauses(3, &[vec![3], vec![-3]]).unwrap(),
    ]
}

/// A two-bit, one-coin base protocol for wrapper exercises over the
/// language of equal-bit inputs.
///
/// The prover sends `(c, d)`. The verifier always reads both bits, pays 3/4
/// for a correct membership claim `c` and 1/4 for a wrong one, plus 1/4
/// when `d` matches the input bit selected by the coin. Its access pattern
/// is value-independent, its payments stay in [0, 1], and its utility gap
/// is exactly 1/2 on every input.
pub fn rich_base() -> ProtocolSpec {
    let behavior: VerifierFn = Arc::new(|io| {
        let claim = io.read_bit(0, 0, 0)?;
        let guess = io.read_bit(0, 0, 1)?;
        let coin = io.rand_bit()?;
        let member = io.input().bit(0) == io.input().bit(1);
        let mut value = if claim == member {
            rat(3, 4)
        } else {
            rat(1, 4)
        };
        if guess == io.input().bit(usize::from(coin)) {
            value += rat(1, 4);
        }
        Ok(VerifierAction::Finish(value))
    });
    ProtocolSpec::new(
        "equal-bits-base",
        1,
        vec![RoundSpec::Prover(vec![2])],
        1,
        2,
        true,
        behavior,
    )
    .unwrap()
}

/// Inputs of the `rich_base` language: both two members and two nonmembers.
pub fn rich_base_inputs() -> Vec<(Input, bool)> {
    vec![
        ("11".parse().unwrap(), true),
        ("00".parse().unwrap(), true),
        ("10".parse().unwrap(), false),
        ("01".parse().unwrap(), false),
    ]
}

/// One-prover, one-round, one-bit protocol paying a fixed rational.
pub fn constant_spec(payment: Rat, rand_bits: usize) -> ProtocolSpec {
    let value = payment.clone();
    let behavior: VerifierFn = Arc::new(move |io| {
        io.read_bit(0, 0, 0)?;
        Ok(VerifierAction::Finish(value.clone()))
    });
    ProtocolSpec::new(
        "constant",
        1,
        vec![RoundSpec::Prover(vec![1])],
        rand_bits,
        1,
        true,
        behavior,
    )
    .unwrap()
}

/// Profile for a single-prover, single-round protocol: always send `msg`.
/// Avoids a reachability pass; the only history is the empty one.
pub fn single_message_profile(msg: Message) -> StrategyProfile {
    StrategyProfile::from_tables(vec![vec![BTreeMap::from([(Vec::new(), msg)])]])
}
