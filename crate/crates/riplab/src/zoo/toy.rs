//! A toy constant-communication protocol for exercising the engine.
//!
//! The prover sends one bit: a claim about the input. The verifier probes a
//! tape-selected input position and pays 1 when the claim agrees with the
//! probed bit, 0 when it disagrees, and a flat 1/2 when the probe index
//! falls outside the input (the padding of the index range to a power of
//! two). The payment-maximizing claim is therefore the majority bit of the
//! input, so the protocol decides per-bit-majority membership.

use std::sync::Arc;

use crate::protocol::{ProtocolSpec, RoundSpec, VerifierAction, VerifierFn};
use crate::rational::rat;

/// Builds the probe protocol for inputs of exactly `input_len` bits.
pub fn build_toy_constant_comm(input_len: usize) -> ProtocolSpec {
    assert!(input_len >= 1, "inputs must have at least one bit");
    let mut probe_bits = 0usize;
    while (1usize << probe_bits) < input_len {
        probe_bits += 1;
    }
    let behavior: VerifierFn = Arc::new(move |io| {
        let claim = io.read_bit(0, 0, 0)?;
        let probe = io.rand_uint(probe_bits)? as usize;
        if probe >= io.input().len() {
            return Ok(VerifierAction::Finish(rat(1, 2)));
        }
        let agree = io.input().bit(probe) == claim;
        Ok(VerifierAction::Finish(rat(i64::from(agree), 1)))
    });
    ProtocolSpec::new(
        format!("toy-majority[{input_len}]"),
        1,
        vec![RoundSpec::Prover(vec![1])],
        probe_bits,
        1,
        true,
        behavior,
    )
    .expect("toy protocol structure is valid")
    .with_metadata("input_len", input_len.to_string())
    .with_metadata(
        "probe",
        format!("{probe_bits} tape bits; out-of-range probes pay 1/2"),
    )
}
