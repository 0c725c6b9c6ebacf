//! The single-round payment protocol for an NP language.
//!
//! The prover sends the answer bit `c` followed by a certificate `m`. A
//! claim of nonmembership (`c = 0`) ends the protocol with payment 1/2; a
//! membership claim is scored by the inner checker, paying 1 on accept and
//! 0 on reject. With a perfect checker the utility gap is exactly 1/2 on
//! every input.

use std::sync::Arc;

use crate::protocol::{ProtocolSpec, RoundSpec, VerifierAction, VerifierFn};
use crate::rational::{rat, rat_string};

use super::ClassicalProofSystem;

pub fn build_np_rip(cps: &ClassicalProofSystem) -> ProtocolSpec {
    let message_len = 1 + cps.message_len;
    let checker = cps.clone();
    let behavior: VerifierFn = Arc::new(move |io| {
        let claim = io.read_bit(0, 0, 0)?;
        if !claim {
            return Ok(VerifierAction::Finish(rat(1, 2)));
        }
        let mut certificate = Vec::with_capacity(checker.message_len);
        for bit in 1..=checker.message_len {
            certificate.push(io.read_bit(0, 0, bit)?);
        }
        let mut coins = Vec::with_capacity(checker.randomness_len);
        for _ in 0..checker.randomness_len {
            coins.push(io.rand_bit()?);
        }
        let accepted = checker.accepts(io.input(), &certificate, &coins)?;
        Ok(VerifierAction::Finish(if accepted {
            rat(1, 1)
        } else {
            rat(0, 1)
        }))
    });
    ProtocolSpec::new(
        format!("np-rip[{}]", cps.name),
        1,
        vec![RoundSpec::Prover(vec![message_len])],
        cps.randomness_len,
        message_len,
        true,
        behavior,
    )
    .expect("np protocol structure is valid")
    .with_metadata("checker", cps.name.clone())
    .with_metadata("checker_completeness", rat_string(&cps.completeness))
    .with_metadata("checker_soundness", rat_string(&cps.soundness))
    .with_metadata("payment_support", "{0, 1/2, 1}")
}


#[cfg(test)]
mod support_tests {
    use super::*;
    use crate::rational::Rat;
    use crate::sat::CnfFormula;
    use crate::strategy::rational_answer;
    use crate::Caps;
    use std::collections::BTreeSet;
    use std::sync::Arc;

    #[test]
    fn payment_support_is_exactly_zero_half_one() {
        let spec = build_np_rip(&ClassicalProofSystem::perfect_sat_checker());
        let caps = Caps::default();
        for clauses in [vec![vec![1, 2], vec![-1]], vec![vec![1], vec![-1]]] {
            let x = CnfFormula::from_clauses(2, &clauses).unwrap().to_input();
            let mut support = BTreeSet::new();
            crate::protocol::explore_all_runs(&spec, &x, &caps, &mut |run| {
                support.insert(run.payment.clone());
                Ok(())
            })
            .unwrap();
            let want: BTreeSet<Rat> = [rat(0, 1), rat(1, 2), rat(1, 1)].into_iter().collect();
            assert!(support.is_subset(&want));
            assert!(support.contains(&rat(1, 2)));
        }
    }

    #[test]
    fn audit_counts_the_claim_and_certificate_bits() {
        let cps = ClassicalProofSystem::perfect_sat_checker();
        assert_eq!(cps.message_len, 3);
        let spec = build_np_rip(&cps);
        let x = CnfFormula::from_clauses(2, &[vec![1, 2], vec![-1]])
            .unwrap()
            .to_input();
        let audit = crate::protocol::resource_audit(&spec, &x, &Caps::default()).unwrap();
        assert!(audit.ok);
        // Answer bit plus a certificate of length 3.
        assert_eq!(audit.max_communication_bits, 1 + 3);
        assert_eq!(audit.rounds_used, 1);
    }

    #[test]
    fn both_checkers_meet_their_declared_parameters() {
        let caps = Caps::default();
        let sat = CnfFormula::from_clauses(2, &[vec![1, 2], vec![-1]])
            .unwrap()
            .to_input();
        let unsat = CnfFormula::from_clauses(1, &[vec![1], vec![-1]])
            .unwrap()
            .to_input();
        for cps in [
            ClassicalProofSystem::perfect_sat_checker(),
            ClassicalProofSystem::noisy_sat_checker(),
        ] {
            cps.check_parameters(&sat, &caps).unwrap();
            cps.check_parameters(&unsat, &caps).unwrap();
        }
    }

    #[test]
    fn corrupted_payment_rule_flips_answers_on_unsatisfiable_inputs() {
        // Swap the 1 and 0 payments: a rejected certificate now earns the
        // full reward, so on an unsatisfiable input the optimum moves to a
        // membership claim and validation against the true labels fails.
        let honest = build_np_rip(&ClassicalProofSystem::perfect_sat_checker());
        let inner = honest.behavior().clone();
        let corrupted_behavior: crate::protocol::VerifierFn =
            Arc::new(move |io| match inner(io)? {
                crate::protocol::VerifierAction::Finish(value) => {
                    let swapped = if value == rat(1, 1) {
                        rat(0, 1)
                    } else if value == rat(0, 1) {
                        rat(1, 1)
                    } else {
                        value
                    };
                    Ok(crate::protocol::VerifierAction::Finish(swapped))
                }
                send => Ok(send),
            });
        let corrupted = honest.clone().replace_behavior(corrupted_behavior);
        let caps = Caps::default();
        let unsat = CnfFormula::from_clauses(1, &[vec![1], vec![-1]])
            .unwrap()
            .to_input();
        assert!(!rational_answer(&honest, &unsat, &caps).unwrap());
        assert!(rational_answer(&corrupted, &unsat, &caps).unwrap());
    }
}
