//! Property-based invariants over randomly generated table protocols.
//!
//! A table protocol pays a value looked up by `(tape, message)`; proptest
//! generates the table, so these properties range over a family of
//! protocols rather than the fixed zoo.

mod common;

use std::sync::Arc;

use proptest::prelude::*;

use riplab::protocol::{
    execute, expected_payment, normalize_payments, Input, Message, ProtocolSpec, RandomTape,
    RoundSpec, VerifierAction, VerifierFn,
};
use riplab::rational::{rat, Rat};
use riplab::strategy::{enumerate_profiles, optimal_profiles};
use riplab::transforms::{round_payments_zero_one, to_accept_reject};
use riplab::zoo::{build_communication_reduction, honest_wrapper_profile};
use riplab::Caps;

use num_traits::{One, Zero};

/// Payment table indexed by `(tape value, message value)`; entries are
/// eighths in [0, 1].
#[derive(Debug, Clone)]
struct TableProtocol {
    rand_bits: usize,
    msg_bits: usize,
    eighths: Vec<u8>,
}

impl TableProtocol {
    fn payment(&self, tape: u64, msg: u64) -> Rat {
        let idx = (tape as usize) * (1 << self.msg_bits) + msg as usize;
        rat(i64::from(self.eighths[idx]), 8)
    }

    fn spec(&self) -> ProtocolSpec {
        let table = self.clone();
        let behavior: VerifierFn = Arc::new(move |io| {
            let mut msg = 0u64;
            for bit in 0..table.msg_bits {
                msg = (msg << 1) | u64::from(io.read_bit(0, 0, bit)?);
            }
            let tape = io.rand_uint(table.rand_bits)?;
            Ok(VerifierAction::Finish(table.payment(tape, msg)))
        });
        ProtocolSpec::new(
            "table",
            1,
            vec![RoundSpec::Prover(vec![self.msg_bits])],
            self.rand_bits,
            self.msg_bits,
            true,
            behavior,
        )
        .unwrap()
    }
}

fn table_protocol() -> impl Strategy<Value = TableProtocol> {
    (1usize..=2, 0usize..=2).prop_flat_map(|(msg_bits, rand_bits)| {
        let entries = (1usize << rand_bits) * (1 << msg_bits);
        proptest::collection::vec(0u8..=8, entries).prop_map(move |eighths| TableProtocol {
            rand_bits,
            msg_bits,
            eighths,
        })
    })
}

fn input() -> Input {
    "1".parse().unwrap()
}

fn caps() -> Caps {
    Caps::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Execution is a pure function of its arguments.
    #[test]
    fn execution_is_deterministic(table in table_protocol(), tape_seed in any::<u64>(), msg_seed in any::<u64>()) {
        let spec = table.spec();
        let x = input();
        let tape = RandomTape::from_index(
            table.rand_bits,
            u128::from(tape_seed) % (1u128 << table.rand_bits),
        );
        let msg = Message::from_uint(msg_seed % (1 << table.msg_bits), table.msg_bits);
        let profile = common::single_message_profile(msg);
        let first = execute(&spec, &x, &tape, &profile).unwrap();
        let second = execute(&spec, &x, &tape, &profile).unwrap();
        prop_assert_eq!(first.0, second.0);
        prop_assert_eq!(first.1, second.1);
    }

    /// The expectation is bit-identical to summing per-tape payments and
    /// dividing, and every trace entry points at a produced transcript bit.
    #[test]
    fn expectation_is_exact_and_traces_are_sound(table in table_protocol(), msg_seed in any::<u64>()) {
        let spec = table.spec();
        let x = input();
        let msg = Message::from_uint(msg_seed % (1 << table.msg_bits), table.msg_bits);
        let profile = common::single_message_profile(msg);

        let mut sum = Rat::zero();
        for tape in RandomTape::all(table.rand_bits) {
            let (transcript, payment) = execute(&spec, &x, &tape, &profile).unwrap();
            for pos in transcript.access_trace() {
                let message = transcript.prover_message(pos.prover_round, pos.prover);
                prop_assert!(message.is_some());
                prop_assert!(pos.bit < message.unwrap().len());
            }
            sum += payment.into_value();
        }
        let expected = expected_payment(&spec, &x, &profile, &caps()).unwrap();
        prop_assert_eq!(expected, sum / rat(1 << table.rand_bits, 1));
    }

    /// The optimum and argmax set are independent of enumeration order.
    #[test]
    fn optimum_is_order_invariant(table in table_protocol()) {
        let spec = table.spec();
        let x = input();
        let report = optimal_profiles(&spec, &x, &caps()).unwrap();
        let recomputed_max = report.payments.iter().max().unwrap();
        prop_assert_eq!(recomputed_max, &report.optimum);
        let reversed_argmax: Vec<usize> = report
            .payments
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, u)| *u == &report.optimum)
            .map(|(i, _)| i)
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        prop_assert_eq!(reversed_argmax, report.argmax);
    }

    /// Normalizing payments halves the utility gap exactly and leaves the
    /// argmax set and answer bit unchanged.
    #[test]
    fn normalization_is_affine_equivariant(table in table_protocol()) {
        let spec = table.spec();
        let x = input();
        let raw = optimal_profiles(&spec, &x, &caps()).unwrap();
        let normalized = normalize_payments(&spec);
        let mapped = optimal_profiles(&normalized, &x, &caps()).unwrap();
        prop_assert_eq!(&mapped.argmax, &raw.argmax);
        prop_assert_eq!(mapped.answer_bit, raw.answer_bit);
        prop_assert_eq!(mapped.invalid_rip, raw.invalid_rip);
        match (raw.utility_gap, mapped.utility_gap) {
            (Some(g), Some(h)) => prop_assert_eq!(h, g / rat(2, 1)),
            (None, None) => {}
            (a, b) => prop_assert!(false, "gap definedness changed: {:?} vs {:?}", a, b),
        }
    }

    /// The rounding sandwich holds for every profile, and rounded payments
    /// read back as acceptance probabilities.
    #[test]
    fn rounding_sandwich_and_acceptance_identity(table in table_protocol(), gamma_num in 1i64..=6, gamma_den in 1i64..=2) {
        let spec = table.spec();
        let x = input();
        let gamma = rat(gamma_num, gamma_den);
        let rounded = round_payments_zero_one(&spec, &gamma).unwrap();
        let slack = (rat(2, 1) * &gamma).recip();
        let arp = to_accept_reject(&rounded, std::slice::from_ref(&x), &caps()).unwrap();
        for profile in enumerate_profiles(&spec, &x, &caps()).unwrap().iter() {
            let u = expected_payment(&spec, &x, &profile, &caps()).unwrap();
            let u_prime = expected_payment(&rounded, &x, &profile, &caps()).unwrap();
            prop_assert!(u <= u_prime);
            prop_assert!(u_prime <= &u + &slack);
            let by_decision = arp.acceptance_probability(&x, &profile, &caps()).unwrap();
            prop_assert_eq!(by_decision, u_prime);
        }
    }

    /// A profile trailing the optimum by more than `1/(2 gamma)` cannot
    /// become optimal after rounding.
    #[test]
    fn rounding_cannot_promote_distant_profiles(table in table_protocol(), gamma_num in 1i64..=6) {
        let spec = table.spec();
        let x = input();
        let gamma = rat(gamma_num, 1);
        let rounded = round_payments_zero_one(&spec, &gamma).unwrap();
        let slack = (rat(2, 1) * &gamma).recip();
        let raw = optimal_profiles(&spec, &x, &caps()).unwrap();
        let after = optimal_profiles(&rounded, &x, &caps()).unwrap();
        for &idx in &after.argmax {
            let distance = &raw.optimum - &raw.payments[idx];
            prop_assert!(distance <= slack);
        }
    }

    /// Wrapping a normalized table protocol preserves the rational answer
    /// whenever the base is a valid rational proof, and honest play earns
    /// the scaled base optimum when every sampled position is read.
    #[test]
    fn wrapper_preserves_valid_answers(table in table_protocol()) {
        let spec = table.spec();
        let x = input();
        let raw = optimal_profiles(&spec, &x, &caps()).unwrap();
        prop_assume!(!raw.invalid_rip);
        let wrapper = build_communication_reduction(&spec).unwrap();
        let wrapped = optimal_profiles(&wrapper, &x, &caps()).unwrap();
        prop_assert!(!wrapped.invalid_rip, "wrapper must stay a valid rational proof");
        prop_assert_eq!(wrapped.answer_bit, raw.answer_bit);

        // The table verifier reads every message bit on every tape, so the
        // honest wrapped profile earns exactly optimum / (2 C).
        let base_best = &raw.argmax_profiles[0];
        let honest = honest_wrapper_profile(&wrapper, &spec, &x, base_best, &caps()).unwrap();
        let u = expected_payment(&wrapper, &x, &honest, &caps()).unwrap();
        let scale = rat(2 * spec.communication_budget as i64, 1);
        prop_assert_eq!(u, raw.optimum / scale);
    }

    /// Rounded payment support really is {0, 1}: any profile, any tape.
    #[test]
    fn rounded_runs_pay_zero_or_one(table in table_protocol(), msg_seed in any::<u64>()) {
        let spec = table.spec();
        let x = input();
        let rounded = round_payments_zero_one(&spec, &rat(2, 1)).unwrap();
        let msg = Message::from_uint(msg_seed % (1 << table.msg_bits), table.msg_bits);
        let profile = common::single_message_profile(msg);
        for tape in RandomTape::all(rounded.randomness_len) {
            let (_, payment) = execute(&rounded, &x, &tape, &profile).unwrap();
            prop_assert!(payment.value().is_zero() || payment.value().is_one());
        }
    }
}
