//! Recovering the answer bit from nonadaptive interval queries.
//!
//! Split [0, 1] into N intervals and ask, for each: does some strategy
//! profile's exact expected payment land here, and does one land here with
//! answer bit 1? With N above the reciprocal utility gap, every profile in
//! the highest nonempty interval is optimal, so accepting on its answer-1
//! query reproduces the protocol's rational answer — 2N oracle calls, all
//! issued before any answer is read.
//!
//! ```text
//! cargo run --example interval_decider
//! ```

use riplab::deciders::interval_decider;
use riplab::sat::CnfFormula;
use riplab::strategy::rational_answer;
use riplab::zoo::{build_np_rip, ClassicalProofSystem};
use riplab::Caps;

fn main() -> riplab::Result<()> {
    let spec = build_np_rip(&ClassicalProofSystem::perfect_sat_checker());
    let caps = Caps::default();
    let n_intervals = 6; // twice the gap parameter gamma = 3

    for (name, formula) in [
        (
            "phi1",
            CnfFormula::from_clauses(2, &[vec![1, 2], vec![-1]])?,
        ),
        ("phi2", CnfFormula::from_clauses(1, &[vec![1], vec![-1]])?),
        (
            "chain",
            CnfFormula::from_clauses(3, &[vec![1, -2], vec![2, 3]])?,
        ),
    ] {
        let x = formula.to_input();
        let run = interval_decider(&spec, &x, n_intervals, &caps)?;
        let answer = rational_answer(&spec, &x, &caps)?;
        println!("{name}: {formula}");
        println!(
            "  {} queries, highest nonempty interval {:?}, homogeneous: {}",
            run.queries.len(),
            run.i_star,
            run.i_star_homogeneous
        );
        println!(
            "  decider {} vs rational answer {} -> {}",
            u8::from(run.accept),
            u8::from(answer),
            if run.accept == answer {
                "agree"
            } else {
                "DISAGREE"
            }
        );
        let answers: Vec<u8> = run.answers.iter().map(|a| u8::from(*a)).collect();
        println!("  raw answers (i, flavor) pairs: {answers:?}\n");
    }
    Ok(())
}
