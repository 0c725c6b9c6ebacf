//! From payments to acceptance: the classical view of a rational proof.
//!
//! Once payments are 0 or 1, "pay 1" can be read as "accept", and the
//! acceptance probability of any strategy equals its expected payment
//! bit-exactly. If the optimal payments of members and nonmembers are
//! separated by more than 1/gamma, the protocol carries classical
//! completeness and soundness.
//!
//! ```text
//! cargo run --example accept_reject
//! ```

use riplab::protocol::expected_payment;
use riplab::rational::{rat, rat_string};
use riplab::sat::CnfFormula;
use riplab::strategy::enumerate_profiles;
use riplab::transforms::{
    check_gap_condition, extract_completeness_soundness, round_payments_zero_one, to_accept_reject,
};
use riplab::zoo::{build_np_rip, ClassicalProofSystem};
use riplab::Caps;

fn main() -> riplab::Result<()> {
    let spec = build_np_rip(&ClassicalProofSystem::perfect_sat_checker());
    let caps = Caps::default();
    let members = vec![
        CnfFormula::from_clauses(2, &[vec![1, 2], vec![-1]])?.to_input(),
        CnfFormula::from_clauses(3, &[vec![1, 2, 3]])?.to_input(),
    ];
    let nonmembers = vec![
        CnfFormula::from_clauses(1, &[vec![1], vec![-1]])?.to_input(),
        CnfFormula::from_clauses(2, &[vec![2], vec![-2]])?.to_input(),
    ];

    // Separation of optimal payments, measured before rounding.
    for gamma in [rat(3, 1), rat(2, 1)] {
        let condition = check_gap_condition(&spec, &members, &nonmembers, &gamma, &caps)?;
        println!(
            "separation by 1/{}: min member {} vs max nonmember {} -> {}",
            rat_string(&gamma),
            condition
                .min_member_optimum
                .as_ref()
                .map(rat_string)
                .unwrap(),
            condition
                .max_nonmember_optimum
                .as_ref()
                .map(rat_string)
                .unwrap(),
            if condition.holds {
                "HOLDS"
            } else {
                "fails (strict)"
            }
        );
    }
    println!();

    // Round, reinterpret, and check the payment/acceptance identity on
    // every profile of one input.
    let gamma = rat(3, 1);
    let rounded = round_payments_zero_one(&spec, &gamma)?;
    let probe: Vec<_> = members.iter().chain(&nonmembers).cloned().collect();
    let mut arp = to_accept_reject(&rounded, &probe, &caps)?;
    let x = &members[0];
    let mut checked = 0;
    for profile in enumerate_profiles(&rounded, x, &caps)?.iter() {
        let by_payment = expected_payment(&rounded, x, &profile, &caps)?;
        let by_decision = arp.acceptance_probability(x, &profile, &caps)?;
        assert_eq!(by_payment, by_decision);
        checked += 1;
    }
    println!("acceptance probability == expected payment on {checked} profiles");

    let (c, s) =
        extract_completeness_soundness(&mut arp, &members, &nonmembers, Some(&gamma), &caps)?;
    println!(
        "extracted completeness {} and soundness {} (threshold s + 1/(2 gamma) = {})",
        rat_string(&c),
        rat_string(&s),
        rat_string(&(&s + (rat(2, 1) * &gamma).recip()))
    );
    Ok(())
}
