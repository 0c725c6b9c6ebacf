//! The smallest protocol in the zoo: one claimed bit, one probed position.
//!
//! The verifier samples an input position from the tape and pays 1 when the
//! prover's claim agrees with the probed bit. Over the whole tape the claim
//! that maximizes expected payment is the input's majority bit, so two
//! strategy profiles and a couple of coin flips already make a working
//! rational proof.
//!
//! ```text
//! cargo run --example toy_probe
//! ```

use riplab::protocol::{resource_audit, Input};
use riplab::rational::rat_string;
use riplab::strategy::optimal_profiles;
use riplab::zoo::build_toy_constant_comm;
use riplab::Caps;

fn main() -> riplab::Result<()> {
    let spec = build_toy_constant_comm(3);
    let caps = Caps::default();
    println!("protocol: {}", spec.name);
    println!("metadata: {:?}\n", spec.metadata);

    for text in ["110", "011", "000", "101", "111"] {
        let x: Input = text.parse()?;
        let report = optimal_profiles(&spec, &x, &caps)?;
        println!(
            "input {text}: claims pay {} / {}, argmax claim {}",
            rat_string(&report.payments[1]),
            rat_string(&report.payments[0]),
            report.answer_bit.map(u8::from).unwrap_or(9),
        );
    }

    let audit = resource_audit(&spec, &"110".parse()?, &caps)?;
    println!(
        "\naudit: {} bits transmitted, {} round, {} tape bits, {} runs explored",
        audit.max_communication_bits, audit.rounds_used, audit.max_random_bits, audit.runs_explored
    );
    println!("budgets respected: {}", audit.ok);
    Ok(())
}
