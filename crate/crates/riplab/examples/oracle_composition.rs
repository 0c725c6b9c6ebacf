//! Scoring several NP queries at once through an oracle machine.
//!
//! The input encodes a tuple of formulas. The machine asks one membership
//! query per formula, combines the claimed answers by parity, and the
//! verifier pays the averaged per-query payments — unless the prover's
//! final bit contradicts the machine's own output on those claims, which
//! costs -1 outright.
//!
//! ```text
//! cargo run --example oracle_composition
//! ```

use riplab::rational::rat_string;
use riplab::sat::CnfFormula;
use riplab::strategy::optimal_profiles;
use riplab::zoo::{
    build_oracle_query_rip, parity_tuple_input, ClassicalProofSystem, OracleMachine,
};
use riplab::Caps;

fn main() -> riplab::Result<()> {
    let phi1 = CnfFormula::from_clauses(2, &[vec![1, 2], vec![-1]])?;
    let phi2 = CnfFormula::from_clauses(1, &[vec![1], vec![-1]])?;

    let machine = OracleMachine::parity_of_satisfiable(2)?;
    let spec = build_oracle_query_rip(&machine, &ClassicalProofSystem::perfect_sat_checker());
    let caps = Caps::default();

    println!(
        "machine: {} (output = parity of the claimed bits)",
        machine.name
    );
    println!("protocol: {}\n", spec.name);

    let tuples = [
        ("(phi1, phi2)", vec![phi1.clone(), phi2.clone()]),
        ("(phi2, phi2)", vec![phi2.clone(), phi2]),
        ("(phi1, phi1)", vec![phi1.clone(), phi1]),
    ];
    for (name, tuple) in tuples {
        let x = parity_tuple_input(&tuple);
        let satisfiable = tuple.iter().filter(|f| f.satisfiable()).count();
        let report = optimal_profiles(&spec, &x, &caps)?;
        println!("{name}: {satisfiable} satisfiable");
        println!("  optimal payment : {}", rat_string(&report.optimum));
        println!(
            "  answer bit      : {:?} (odd count claimed)",
            report.answer_bit
        );
        println!(
            "  utility gap     : {} (construction floor: 1/4)",
            report
                .utility_gap
                .as_ref()
                .map(rat_string)
                .unwrap_or_else(|| "undefined".into())
        );
        println!();
    }
    Ok(())
}
