//! The single-round payment protocol for toy SAT.
//!
//! The prover claims membership with an answer bit and backs it with a
//! certificate. Claiming "unsatisfiable" pays a flat 1/2; claiming
//! "satisfiable" pays 1 if the certificate checks and 0 if it doesn't, so
//! lying always costs at least 1/2 in expectation.
//!
//! ```text
//! cargo run --example np_protocol
//! ```

use riplab::protocol::{execute, Message, RandomTape};
use riplab::rational::rat_string;
use riplab::sat::CnfFormula;
use riplab::strategy::optimal_profiles;
use riplab::zoo::{build_np_rip, ClassicalProofSystem};
use riplab::Caps;

fn main() -> riplab::Result<()> {
    let checker = ClassicalProofSystem::perfect_sat_checker();
    let spec = build_np_rip(&checker);
    let caps = Caps::default();

    let phi1 = CnfFormula::from_clauses(2, &[vec![1, 2], vec![-1]])?;
    let phi2 = CnfFormula::from_clauses(1, &[vec![1], vec![-1]])?;

    for (name, formula) in [("phi1", &phi1), ("phi2", &phi2)] {
        let x = formula.to_input();
        println!(
            "{name} = {formula}  (satisfiable: {})",
            formula.satisfiable()
        );

        let report = optimal_profiles(&spec, &x, &caps)?;
        println!("  profiles enumerated : {}", report.payments.len());
        println!("  optimal payment     : {}", rat_string(&report.optimum));
        println!("  rational answer bit : {:?}", report.answer_bit);
        println!(
            "  utility gap         : {}",
            report
                .utility_gap
                .as_ref()
                .map(rat_string)
                .unwrap_or_else(|| "undefined".into())
        );
        println!();
    }

    // One concrete run: the honest certificate for phi1 read bit by bit.
    let x = phi1.to_input();
    let honest = Message::new(vec![true, false, true, false]); // c=1, assignment 010
    let profile =
        riplab::strategy::StrategyProfile::from_fn(&spec, &x, &caps, |_, _, _| honest.clone())?;
    let (transcript, payment) = execute(&spec, &x, &RandomTape::empty(), &profile)?;
    println!("honest run on phi1:");
    println!("  payment       : {payment}");
    println!("  answer bit    : {}", u8::from(transcript.answer_bit()));
    println!(
        "  bits verified : {} positions read in order",
        transcript.access_trace().len()
    );
    Ok(())
}
