//! Rounding graded payments to coin flips worth 0 or 1.
//!
//! Appending a few tape bits turns any payment R in [0, 1] into a Bernoulli
//! payment whose mean is ceil(G R) / G on a grid of G = 2^(1 + ceil(log2 g))
//! values: never below R, never more than 1/(2g) above it. The payment then
//! reads as an acceptance probability.
//!
//! ```text
//! cargo run --example zero_one_rounding
//! ```

use std::sync::Arc;

use riplab::protocol::{
    expected_payment, Message, ProtocolSpec, RoundSpec, VerifierAction, VerifierFn,
};
use riplab::rational::{rat, rat_string, Rat};
use riplab::sat::CnfFormula;
use riplab::strategy::{enumerate_profiles, StrategyProfile};
use riplab::transforms::round_payments_zero_one;
use riplab::zoo::{build_np_rip, ClassicalProofSystem};
use riplab::Caps;

/// One-bit protocol paying a fixed off-grid value.
fn flat(payment: Rat) -> ProtocolSpec {
    let behavior: VerifierFn = Arc::new(move |io| {
        io.read_bit(0, 0, 0)?;
        Ok(VerifierAction::Finish(payment.clone()))
    });
    ProtocolSpec::new(
        "flat",
        1,
        vec![RoundSpec::Prover(vec![1])],
        0,
        1,
        true,
        behavior,
    )
    .unwrap()
}

fn main() -> riplab::Result<()> {
    let spec = build_np_rip(&ClassicalProofSystem::noisy_sat_checker());
    let caps = Caps::default();
    let x = CnfFormula::from_clauses(1, &[vec![1], vec![-1]])?.to_input();

    for gamma in [rat(1, 1), rat(2, 1), rat(4, 1)] {
        let rounded = round_payments_zero_one(&spec, &gamma)?;
        let slack = (rat(2, 1) * &gamma).recip();
        println!(
            "gamma = {}: grid G = {}, slack 1/(2 gamma) = {}, tape grows {} -> {} bits",
            rat_string(&gamma),
            rounded.metadata["rounding_grid"],
            rat_string(&slack),
            spec.randomness_len,
            rounded.randomness_len
        );
        for profile in enumerate_profiles(&spec, &x, &caps)?.iter().skip(7).take(4) {
            let u = expected_payment(&spec, &x, &profile, &caps)?;
            let u_prime = expected_payment(&rounded, &x, &profile, &caps)?;
            let opening: &Message = profile.message(0, 0, &[]).unwrap();
            println!(
                "  message {opening}: u = {:>4}  ->  u' = {:>4}  (sandwich holds: {})",
                rat_string(&u),
                rat_string(&u_prime),
                u <= u_prime && u_prime <= &u + &slack
            );
        }
        println!();
    }

    // A payment off the grid gets lifted, but never past the slack.
    let spec = flat(rat(1, 3));
    let x = "1".parse()?;
    let profile = StrategyProfile::from_fn(&spec, &x, &caps, |_, _, _| Message::from_uint(1, 1))?;
    for gamma in [rat(1, 1), rat(2, 1), rat(4, 1)] {
        let rounded = round_payments_zero_one(&spec, &gamma)?;
        let u_prime = expected_payment(&rounded, &x, &profile, &caps)?;
        println!(
            "flat payment 1/3, gamma = {}: rounds up to {}",
            rat_string(&gamma),
            rat_string(&u_prime)
        );
    }
    Ok(())
}
