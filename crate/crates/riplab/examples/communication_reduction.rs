//! Squeezing a protocol's communication with a second prover.
//!
//! Prover 1 resends its opening message, learns the verifier's coins, and
//! sends only the transcript bits the base verifier actually reads. The
//! verifier replays the base protocol against that stream and spot-checks
//! one uniformly sampled transcript position against a commitment from
//! prover 2, who never sees prover 1's messages. Disagreement costs -1, so
//! consistent play is the only rational option and the wrapped protocol
//! answers exactly like the base.
//!
//! ```text
//! cargo run --example communication_reduction
//! ```

use riplab::protocol::{expected_payment, Input};
use riplab::rational::{rat_string, Rat};
use riplab::strategy::{enumerate_profiles, optimal_profiles, rational_answer};
use riplab::zoo::{build_communication_reduction, build_toy_constant_comm, honest_wrapper_profile};
use riplab::Caps;

use num_traits::Zero;

fn main() -> riplab::Result<()> {
    let base = build_toy_constant_comm(3);
    let wrapper = build_communication_reduction(&base)?;
    let caps = Caps::default();

    println!(
        "base    : {} ({} prover, {} round)",
        base.name,
        base.prover_count,
        base.rounds.len()
    );
    println!(
        "wrapped : {} ({} provers, {} rounds, {} tape bits)\n",
        wrapper.name,
        wrapper.prover_count,
        wrapper.rounds.len(),
        wrapper.randomness_len
    );

    for text in ["110", "000", "011"] {
        let x: Input = text.parse()?;
        let base_report = optimal_profiles(&base, &x, &caps)?;
        let wrapped_answer = rational_answer(&wrapper, &x, &caps)?;
        println!("input {text}:");
        println!(
            "  base optimum {} with answer {:?}",
            rat_string(&base_report.optimum),
            base_report.answer_bit
        );
        println!("  wrapped answer {} (preserved)", u8::from(wrapped_answer));

        // Honest play earns the base payment scaled by 1/(2C).
        let honest =
            honest_wrapper_profile(&wrapper, &base, &x, &base_report.argmax_profiles[0], &caps)?;
        let honest_pay = expected_payment(&wrapper, &x, &honest, &caps)?;
        println!("  honest wrapped payment {}", rat_string(&honest_pay));

        // Every profile that contradicts itself on an accessed bit loses
        // money; count them by full enumeration.
        let mut negative = 0usize;
        let mut total = 0usize;
        for profile in enumerate_profiles(&wrapper, &x, &caps)?.iter() {
            let u = expected_payment(&wrapper, &x, &profile, &caps)?;
            total += 1;
            if u < Rat::zero() {
                negative += 1;
            }
        }
        println!("  {negative} of {total} wrapped profiles pay strictly less than 0\n");
    }
    Ok(())
}
