//! Threshold repetition with an exact tail certificate.
//!
//! Repeating an accept/reject protocol rho = ceil(96 ln(n) g'^2 / c) times
//! and accepting past tau = rho c (1 - 1/(4 g')) drives completeness toward
//! 1 and soundness toward 0. Instead of executing ten thousand repetitions,
//! the tails of the binomial counts are computed exactly over big integers
//! and compared against the 1/n target.
//!
//! ```text
//! cargo run --example amplification
//! ```

use riplab::rational::{rat, rat_decimal, rat_string, Rat};
use riplab::transforms::{amplify, certify_amplification, AcceptRejectProtocol};
use riplab::zoo::{build_np_rip, ClassicalProofSystem};

use num_traits::One;

fn main() -> riplab::Result<()> {
    // Synthetic base guarantees: completeness 3/5, soundness 2/5.
    let arp = AcceptRejectProtocol {
        spec: build_np_rip(&ClassicalProofSystem::perfect_sat_checker()),
        completeness: Some(rat(3, 5)),
        soundness: Some(rat(2, 5)),
    };
    let gamma_prime = rat(6, 1);
    let n = 16;
    let amplified = amplify(&arp, &rat(3, 5), &gamma_prime, n)?;
    println!(
        "c = 3/5, s = 2/5, gamma' = 6, n = {n}: rho = {}, tau = {} ({} repetitions must accept)",
        amplified.rho,
        rat_string(&amplified.tau),
        rat_decimal(&amplified.tau, 3),
    );

    let certificate = certify_amplification(&amplified, &rat(3, 5), &rat(2, 5));
    println!(
        "completeness failure Pr[X <= tau | p = c] = {}",
        rat_decimal(&certificate.completeness_failure, 4)
    );
    println!(
        "soundness acceptance Pr[X > tau | p = s] = {}",
        rat_decimal(&certificate.soundness_acceptance, 4)
    );
    println!(
        "both within the 1/n = {} target: {}\n",
        rat_string(&certificate.bound),
        certificate.meets_bound
    );

    // A perfect base degenerates gracefully: every repetition accepts.
    let perfect = AcceptRejectProtocol {
        spec: arp.spec.clone(),
        completeness: Some(Rat::one()),
        soundness: Some(rat(0, 1)),
    };
    let amplified = amplify(&perfect, &Rat::one(), &rat(2, 1), 4)?;
    println!(
        "c = 1, s = 0, gamma' = 2, n = 4: rho = {}, analytic acceptance at p = 1 is {}",
        amplified.rho,
        rat_string(&amplified.analytic_acceptance(&Rat::one()))
    );
    Ok(())
}
