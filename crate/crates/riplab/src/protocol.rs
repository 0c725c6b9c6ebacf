//! Core protocol model: inputs, random tapes, messages, transcripts,
//! payments, protocol specifications, single-run execution, and exact
//! expected payments by enumeration over all random tapes.
//!
//! A protocol is a fixed alternation of prover rounds and verifier rounds,
//! starting and ending with the provers. Message lengths are declared per
//! round and per prover (length zero means a prover is silent that round).
//! The verifier is a deterministic procedure over `(input, tape, messages)`
//! that reads transcript bits only through an instrumented accessor, so the
//! exact sequence of bits it touched is recorded in every transcript.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::rational::{rat, rat_string, Rat};
use crate::strategy::StrategyProfile;
use crate::{Caps, Error, Result};

/// An input string `x` with `n = |x| >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Input {
    bits: Vec<bool>,
}

impl Input {
    pub fn new(bits: Vec<bool>) -> Self {
        assert!(!bits.is_empty(), "inputs must have at least one bit");
        Input { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{}", u8::from(*b))?;
        }
        Ok(())
    }
}

impl FromStr for Input {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = parse_bits(s)?;
        if bits.is_empty() {
            return Err(Error::InvalidParameter("empty input string".into()));
        }
        Ok(Input::new(bits))
    }
}

fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::InvalidParameter(format!(
                "invalid bit character {other:?}"
            ))),
        })
        .collect()
}

/// The verifier's random string `r`, an explicit finite tape of coin flips.
///
/// The tape is consumed left to right; a protocol's expectation is the exact
/// average over all `2^len` tapes, each equally likely.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RandomTape {
    bits: Vec<bool>,
}

impl RandomTape {
    pub fn new(bits: Vec<bool>) -> Self {
        RandomTape { bits }
    }

    pub fn empty() -> Self {
        RandomTape { bits: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// The `index`-th tape of the given length, bits in lexicographic order
    /// (most significant bit first).
    pub fn from_index(len: usize, index: u128) -> Self {
        let bits = (0..len)
            .map(|pos| (index >> (len - 1 - pos)) & 1 == 1)
            .collect();
        RandomTape { bits }
    }

    /// Iterates over all `2^len` tapes in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = RandomTape> {
        let count = tape_count(len).expect("tape length too large to enumerate");
        (0..count).map(move |i| RandomTape::from_index(len, i))
    }
}

impl fmt::Display for RandomTape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{}", u8::from(*b))?;
        }
        Ok(())
    }
}

/// Number of tapes of the given length, if representable.
pub fn tape_count(len: usize) -> Option<u128> {
    if len >= 128 {
        None
    } else {
        Some(1u128 << len)
    }
}

/// A single message, a finite bit string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    bits: Vec<bool>,
}

impl Message {
    pub fn new(bits: Vec<bool>) -> Self {
        Message { bits }
    }

    pub fn empty() -> Self {
        Message { bits: Vec::new() }
    }

    pub fn zero(len: usize) -> Self {
        Message {
            bits: vec![false; len],
        }
    }

    /// Message of `len` bits spelling `value` most significant bit first.
    pub fn from_uint(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let bits = (0..len)
            .map(|pos| (value >> (len - 1 - pos)) & 1 == 1)
            .collect();
        Message { bits }
    }

    pub fn to_uint(&self) -> u64 {
        assert!(self.bits.len() <= 64);
        self.bits
            .iter()
            .fold(0u64, |acc, b| (acc << 1) | u64::from(*b))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{}", u8::from(*b))?;
        }
        Ok(())
    }
}

impl FromStr for Message {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(Message::new(parse_bits(s)?))
    }
}

/// Position of one transcript bit: the `bit`-th bit of the message sent by
/// `prover` in prover round `prover_round` (all indices zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitPos {
    pub prover_round: usize,
    pub prover: usize,
    pub bit: usize,
}

impl fmt::Display for BitPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(r{}, p{}, b{})",
            self.prover_round, self.prover, self.bit
        )
    }
}

/// The messages of one round. Prover rounds carry one message per prover;
/// verifier rounds carry one message per prover channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundMessages {
    pub from_verifier: bool,
    pub messages: Vec<Message>,
}

/// The full record of one protocol execution, including which transcript
/// bits the verifier actually read and in what order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    rounds: Vec<RoundMessages>,
    access_trace: Vec<BitPos>,
    answer_bit: bool,
    total_bits: usize,
    random_bits_consumed: usize,
}

impl Transcript {
    pub fn rounds(&self) -> &[RoundMessages] {
        &self.rounds
    }

    /// Every transcript position the verifier read, in read order.
    pub fn access_trace(&self) -> &[BitPos] {
        &self.access_trace
    }

    /// The first bit of prover 1's first-round message: the claim `x in L`.
    pub fn answer_bit(&self) -> bool {
        self.answer_bit
    }

    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    pub fn random_bits_consumed(&self) -> usize {
        self.random_bits_consumed
    }

    pub fn prover_message(&self, prover_round: usize, prover: usize) -> Option<&Message> {
        self.rounds
            .iter()
            .filter(|r| !r.from_verifier)
            .nth(prover_round)
            .and_then(|r| r.messages.get(prover))
    }

    pub fn verifier_message(&self, verifier_round: usize, prover: usize) -> Option<&Message> {
        self.rounds
            .iter()
            .filter(|r| r.from_verifier)
            .nth(verifier_round)
            .and_then(|r| r.messages.get(prover))
    }

    /// The effective transcript: the values of the accessed bits, in read
    /// order.
    pub fn effective_transcript(&self) -> Vec<bool> {
        self.access_trace
            .iter()
            .map(|pos| {
                self.prover_message(pos.prover_round, pos.prover)
                    .expect("trace references an existing message")
                    .bit(pos.bit)
            })
            .collect()
    }
}

/// A terminal payment, an exact rational in `[-1, 1]`.
///
/// Protocols flagged normalized keep payments in `[0, 1]`; the wider raw
/// range exists because penalty-style rules pay `-1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Payment {
    value: Rat,
}

impl Payment {
    pub fn new(value: Rat) -> Result<Self> {
        if value < rat(-1, 1) || value > rat(1, 1) {
            return Err(Error::PaymentOutOfRange(rat_string(&value)));
        }
        Ok(Payment { value })
    }

    pub fn value(&self) -> &Rat {
        &self.value
    }

    pub fn into_value(self) -> Rat {
        self.value
    }
}

impl fmt::Display for Payment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", rat_string(&self.value))
    }
}

/// Declared message lengths for one round, one entry per prover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundSpec {
    /// Each prover sends a message of the declared length to the verifier.
    Prover(Vec<usize>),
    /// The verifier sends a message of the declared length to each prover.
    Verifier(Vec<usize>),
}

/// What the verifier does after a prover round: reply on every prover
/// channel, or end the protocol with a payment.
#[derive(Debug, Clone)]
pub enum VerifierAction {
    Send(Vec<Message>),
    Finish(Rat),
}

/// Instrumented access the verifier gets to an execution in progress.
///
/// All transcript reads go through [`read_bit`](VerifierIo::read_bit) and are
/// recorded; all coin flips come from the explicit tape through
/// [`rand_bit`](VerifierIo::rand_bit). Verifiers that need a dedicated tape
/// region (for example a rounding stage appended after an inner protocol)
/// position themselves with [`set_rand_cursor`](VerifierIo::set_rand_cursor).
pub trait VerifierIo {
    fn input(&self) -> &Input;

    /// Number of prover rounds already played.
    fn completed_prover_rounds(&self) -> usize;

    /// Reads one transcript bit, recording it in the access trace. Reading a
    /// position that has not been produced yet is an error.
    fn read_bit(&mut self, prover_round: usize, prover: usize, bit: usize) -> Result<bool>;

    /// Declared length of a prover message; length metadata is not traced.
    fn message_len(&self, prover_round: usize, prover: usize) -> Result<usize>;

    /// Consumes the next tape bit.
    fn rand_bit(&mut self) -> Result<bool>;

    /// Moves the tape cursor to an absolute position.
    fn set_rand_cursor(&mut self, pos: usize) -> Result<()>;

    fn rand_cursor(&self) -> usize;

    /// Consumes `bits` tape bits as an unsigned integer, first bit most
    /// significant.
    fn rand_uint(&mut self, bits: usize) -> Result<u64> {
        assert!(bits <= 64);
        let mut v = 0u64;
        for _ in 0..bits {
            v = (v << 1) | u64::from(self.rand_bit()?);
        }
        Ok(v)
    }

    /// Reads a full prover message bit by bit, in order.
    fn read_message(&mut self, prover_round: usize, prover: usize) -> Result<Vec<bool>> {
        let len = self.message_len(prover_round, prover)?;
        (0..len)
            .map(|b| self.read_bit(prover_round, prover, b))
            .collect()
    }
}

/// The verifier's deterministic procedure. It is invoked once after each
/// prover round and must `Send` when a verifier round is declared next, and
/// `Finish` after the final prover round.
pub type VerifierFn = Arc<dyn Fn(&mut dyn VerifierIo) -> Result<VerifierAction> + Send + Sync>;

/// An executable protocol description: round structure, budgets, payment
/// behavior, and metadata.
#[derive(Clone)]
pub struct ProtocolSpec {
    pub name: String,
    pub prover_count: usize,
    pub rounds: Vec<RoundSpec>,
    /// Declared randomness budget: every tape has exactly this many bits.
    pub randomness_len: usize,
    /// Communication budget `C`: total transmitted bits per run must not
    /// exceed it.
    pub communication_budget: usize,
    /// Largest declared single-message length.
    pub per_message_bound: usize,
    /// Whether payments are guaranteed to lie in `[0, 1]`.
    pub normalized: bool,
    pub metadata: BTreeMap<String, String>,
    behavior: VerifierFn,
}

impl fmt::Debug for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProtocolSpec")
            .field("name", &self.name)
            .field("prover_count", &self.prover_count)
            .field("rounds", &self.rounds)
            .field("randomness_len", &self.randomness_len)
            .field("communication_budget", &self.communication_budget)
            .field("normalized", &self.normalized)
            .finish_non_exhaustive()
    }
}

impl ProtocolSpec {
    pub fn new(
        name: impl Into<String>,
        prover_count: usize,
        rounds: Vec<RoundSpec>,
        randomness_len: usize,
        communication_budget: usize,
        normalized: bool,
        behavior: VerifierFn,
    ) -> Result<Self> {
        if prover_count == 0 {
            return Err(Error::InvalidParameter(
                "at least one prover required".into(),
            ));
        }
        if rounds.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one round required".into(),
            ));
        }
        for (idx, round) in rounds.iter().enumerate() {
            let (is_verifier, lens) = match round {
                RoundSpec::Prover(l) => (false, l),
                RoundSpec::Verifier(l) => (true, l),
            };
            if is_verifier != (idx % 2 == 1) {
                return Err(Error::InvalidParameter(
                    "rounds must alternate prover, verifier, prover, ...".into(),
                ));
            }
            if lens.len() != prover_count {
                return Err(Error::InvalidParameter(format!(
                    "round {idx} declares {} message lengths for {} provers",
                    lens.len(),
                    prover_count
                )));
            }
        }
        if rounds.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "protocols must end with a prover round".into(),
            ));
        }
        let first_len = match &rounds[0] {
            RoundSpec::Prover(lens) => lens[0],
            RoundSpec::Verifier(_) => unreachable!(),
        };
        if first_len == 0 {
            return Err(Error::InvalidParameter(
                "prover 1's first message must carry the answer bit".into(),
            ));
        }
        let per_message_bound = rounds
            .iter()
            .map(|r| match r {
                RoundSpec::Prover(l) | RoundSpec::Verifier(l) => {
                    l.iter().copied().max().unwrap_or(0)
                }
            })
            .max()
            .unwrap_or(0);
        Ok(ProtocolSpec {
            name: name.into(),
            prover_count,
            rounds,
            randomness_len,
            communication_budget,
            per_message_bound,
            normalized,
            metadata: BTreeMap::new(),
            behavior,
        })
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub(crate) fn behavior(&self) -> &VerifierFn {
        &self.behavior
    }

    pub(crate) fn replace_behavior(mut self, behavior: VerifierFn) -> Self {
        self.behavior = behavior;
        self
    }

    /// Number of prover rounds (rounds 1, 3, 5, ... of the protocol).
    pub fn prover_round_count(&self) -> usize {
        self.rounds.len().div_ceil(2)
    }

    /// Declared lengths of the messages sent in prover round `t`.
    pub fn prover_round_lens(&self, t: usize) -> &[usize] {
        match &self.rounds[2 * t] {
            RoundSpec::Prover(lens) => lens,
            RoundSpec::Verifier(_) => unreachable!(),
        }
    }

    /// Declared lengths of the verifier messages after prover round `v`.
    pub fn verifier_round_lens(&self, v: usize) -> &[usize] {
        match &self.rounds[2 * v + 1] {
            RoundSpec::Verifier(lens) => lens,
            RoundSpec::Prover(_) => unreachable!(),
        }
    }

    pub fn verifier_round_count(&self) -> usize {
        self.rounds.len() / 2
    }

    /// Sum of all declared message lengths, prover and verifier.
    pub fn total_declared_bits(&self) -> usize {
        self.rounds
            .iter()
            .map(|r| match r {
                RoundSpec::Prover(l) | RoundSpec::Verifier(l) => l.iter().sum::<usize>(),
            })
            .sum()
    }

    /// Sum of the declared prover message lengths only.
    pub fn total_prover_bits(&self) -> usize {
        (0..self.prover_round_count())
            .map(|t| self.prover_round_lens(t).iter().sum::<usize>())
            .sum()
    }
}

/// Execution state shared with the verifier through [`VerifierIo`].
struct ExecState<'a> {
    spec: &'a ProtocolSpec,
    input: &'a Input,
    tape: &'a RandomTape,
    rounds: Vec<RoundMessages>,
    trace: Vec<BitPos>,
    rand_cursor: usize,
    rand_high_water: usize,
    completed_prover_rounds: usize,
}

impl<'a> ExecState<'a> {
    fn new(spec: &'a ProtocolSpec, input: &'a Input, tape: &'a RandomTape) -> Self {
        ExecState {
            spec,
            input,
            tape,
            rounds: Vec::with_capacity(spec.rounds.len()),
            trace: Vec::new(),
            rand_cursor: 0,
            rand_high_water: 0,
            completed_prover_rounds: 0,
        }
    }

    fn prover_message_bit(&self, prover_round: usize, prover: usize, bit: usize) -> Option<bool> {
        self.rounds
            .iter()
            .filter(|r| !r.from_verifier)
            .nth(prover_round)
            .and_then(|r| r.messages.get(prover))
            .and_then(|m| m.bits().get(bit).copied())
    }

    /// Verifier-channel history of `prover`: the concatenation of all
    /// verifier messages addressed to it so far.
    fn history(&self, prover: usize) -> Vec<bool> {
        let mut h = Vec::new();
        for round in self.rounds.iter().filter(|r| r.from_verifier) {
            h.extend_from_slice(round.messages[prover].bits());
        }
        h
    }
}

impl VerifierIo for ExecState<'_> {
    fn input(&self) -> &Input {
        self.input
    }

    fn completed_prover_rounds(&self) -> usize {
        self.completed_prover_rounds
    }

    fn read_bit(&mut self, prover_round: usize, prover: usize, bit: usize) -> Result<bool> {
        match self.prover_message_bit(prover_round, prover, bit) {
            Some(value) => {
                self.trace.push(BitPos {
                    prover_round,
                    prover,
                    bit,
                });
                Ok(value)
            }
            None => Err(Error::AccessOutOfBounds {
                round: prover_round,
                prover,
                bit,
            }),
        }
    }

    fn message_len(&self, prover_round: usize, prover: usize) -> Result<usize> {
        if prover_round >= self.spec.prover_round_count() || prover >= self.spec.prover_count {
            return Err(Error::AccessOutOfBounds {
                round: prover_round,
                prover,
                bit: 0,
            });
        }
        Ok(self.spec.prover_round_lens(prover_round)[prover])
    }

    fn rand_bit(&mut self) -> Result<bool> {
        let pos = self.rand_cursor;
        let bit = *self.tape.bits().get(pos).ok_or(Error::TapeExhausted(pos))?;
        self.rand_cursor += 1;
        self.rand_high_water = self.rand_high_water.max(self.rand_cursor);
        Ok(bit)
    }

    fn set_rand_cursor(&mut self, pos: usize) -> Result<()> {
        if pos > self.tape.len() {
            return Err(Error::TapeExhausted(pos));
        }
        self.rand_cursor = pos;
        Ok(())
    }

    fn rand_cursor(&self) -> usize {
        self.rand_cursor
    }
}

/// Runs one execution of `spec` on input `x`, tape `r`, and strategy profile
/// `s`. Pure: identical arguments produce a bit-identical transcript and
/// payment.
pub fn execute(
    spec: &ProtocolSpec,
    x: &Input,
    r: &RandomTape,
    s: &StrategyProfile,
) -> Result<(Transcript, Payment)> {
    if r.len() != spec.randomness_len {
        return Err(Error::TapeMismatch {
            want: spec.randomness_len,
            got: r.len(),
        });
    }
    let mut state = ExecState::new(spec, x, r);
    let mut total_bits = 0usize;
    let prover_rounds = spec.prover_round_count();
    let mut payment: Option<Rat> = None;

    for t in 0..prover_rounds {
        let lens = spec.prover_round_lens(t);
        let mut messages = Vec::with_capacity(spec.prover_count);
        for (i, &len) in lens.iter().enumerate() {
            let history = state.history(i);
            let msg = s
                .message(i, t, &history)
                .ok_or_else(|| {
                    Error::MalformedStrategy(format!(
                        "prover {i} has no move for round {t} history {:?}",
                        bits_string(&history)
                    ))
                })?
                .clone();
            if msg.len() != len {
                return Err(Error::MalformedStrategy(format!(
                    "prover {i} round {t} message has {} bits, declared {len}",
                    msg.len()
                )));
            }
            total_bits += msg.len();
            messages.push(msg);
        }
        if total_bits > spec.communication_budget {
            return Err(Error::BudgetExceeded(format!(
                "{total_bits} bits transmitted, budget {}",
                spec.communication_budget
            )));
        }
        state.rounds.push(RoundMessages {
            from_verifier: false,
            messages,
        });
        state.completed_prover_rounds += 1;

        let action = (spec.behavior)(&mut state)?;
        if t + 1 < prover_rounds {
            let vlens = spec.verifier_round_lens(t);
            match action {
                VerifierAction::Send(msgs) => {
                    if msgs.len() != spec.prover_count {
                        return Err(Error::VerifierContract(format!(
                            "verifier sent {} messages for {} provers",
                            msgs.len(),
                            spec.prover_count
                        )));
                    }
                    for (i, m) in msgs.iter().enumerate() {
                        if m.len() != vlens[i] {
                            return Err(Error::VerifierContract(format!(
                                "verifier message to prover {i} has {} bits, declared {}",
                                m.len(),
                                vlens[i]
                            )));
                        }
                        total_bits += m.len();
                    }
                    if total_bits > spec.communication_budget {
                        return Err(Error::BudgetExceeded(format!(
                            "{total_bits} bits transmitted, budget {}",
                            spec.communication_budget
                        )));
                    }
                    state.rounds.push(RoundMessages {
                        from_verifier: true,
                        messages: msgs,
                    });
                }
                VerifierAction::Finish(_) => {
                    return Err(Error::VerifierContract(format!(
                        "verifier finished after prover round {t} with rounds remaining"
                    )));
                }
            }
        } else {
            match action {
                VerifierAction::Finish(value) => payment = Some(value),
                VerifierAction::Send(_) => {
                    return Err(Error::VerifierContract(
                        "verifier must finish after the final prover round".into(),
                    ));
                }
            }
        }
    }

    let value = payment.expect("loop always ends in Finish or an error");
    if spec.normalized && (value < Rat::zero() || value > Rat::one()) {
        return Err(Error::PaymentOutOfRange(format!(
            "{} from a protocol flagged normalized",
            rat_string(&value)
        )));
    }
    let payment = Payment::new(value)?;
    let answer_bit = state.rounds[0].messages[0].bit(0);
    Ok((
        Transcript {
            rounds: state.rounds,
            access_trace: state.trace,
            answer_bit,
            total_bits,
            random_bits_consumed: state.rand_high_water,
        },
        payment,
    ))
}

fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

/// Exact expected payment `u(s; x) = E_r[R(x, r, (V, P)(x, r, s))]`, the
/// average over all `2^randomness_len` tapes. No floating point is involved.
pub fn expected_payment(
    spec: &ProtocolSpec,
    x: &Input,
    s: &StrategyProfile,
    caps: &Caps,
) -> Result<Rat> {
    let count = tape_count(spec.randomness_len)
        .filter(|c| *c <= caps.max_tapes)
        .ok_or(Error::RandomnessCapExceeded {
            len: spec.randomness_len,
            cap: caps.max_tapes,
        })?;
    let mut sum = Rat::zero();
    for tape in RandomTape::all(spec.randomness_len) {
        let (_, payment) = execute(spec, x, &tape, s)?;
        sum += payment.into_value();
    }
    Ok(sum / Rat::from_integer(count.into()))
}

/// Shifts and scales payments with the affine map `R -> (R + 1) / 2`, taking
/// the raw range `[-1, 1]` onto `[0, 1]`. Strict ordering of strategy
/// profiles by expected payment is preserved.
pub fn normalize_payments(spec: &ProtocolSpec) -> ProtocolSpec {
    let inner = spec.behavior.clone();
    let behavior: VerifierFn = Arc::new(move |io| match inner(io)? {
        VerifierAction::Finish(value) => {
            Ok(VerifierAction::Finish((value + Rat::one()) / rat(2, 1)))
        }
        send => Ok(send),
    });
    let mut out = spec.clone();
    out.name = format!("{}+normalized", spec.name);
    out.normalized = true;
    out.behavior = behavior;
    out.metadata
        .insert("payment_affine".into(), "(R+1)/2".into());
    out
}

/// One fully resolved run, handed to [`explore_all_runs`] visitors.
pub(crate) struct RunRecord<'a> {
    /// Verifier replies, `[verifier_round][prover]`.
    pub verifier_messages: &'a [Vec<Message>],
    pub payment: &'a Rat,
    pub rand_high_water: usize,
    pub total_bits: usize,
}

/// Visits every `(tape, message choice)` run of the protocol exactly once.
///
/// At each prover round the exploration branches over all joint messages of
/// the declared lengths; each explored path corresponds to an execution
/// under some deterministic strategy profile, and every profile's executions
/// are covered. Used for reachability, audits, and payment-support checks.
pub(crate) fn explore_all_runs(
    spec: &ProtocolSpec,
    x: &Input,
    caps: &Caps,
    visit: &mut dyn FnMut(&RunRecord<'_>) -> Result<()>,
) -> Result<()> {
    let tapes = tape_count(spec.randomness_len)
        .filter(|c| *c <= caps.max_tapes)
        .ok_or(Error::RandomnessCapExceeded {
            len: spec.randomness_len,
            cap: caps.max_tapes,
        })?;
    let mut paths: u128 = 1;
    for t in 0..spec.prover_round_count() {
        let bits: usize = spec.prover_round_lens(t).iter().sum();
        paths = paths
            .checked_shl(bits as u32)
            .filter(|p| *p <= caps.max_profiles)
            .ok_or(Error::StrategyCapExceeded {
                count: paths,
                cap: caps.max_profiles,
            })?;
    }
    let _ = tapes;

    for tape in RandomTape::all(spec.randomness_len) {
        let state = ExecState::new(spec, x, &tape);
        explore_round(spec, state, 0, 0, visit)?;
    }
    Ok(())
}

fn explore_round(
    spec: &ProtocolSpec,
    state: ExecState<'_>,
    t: usize,
    total_bits: usize,
    visit: &mut dyn FnMut(&RunRecord<'_>) -> Result<()>,
) -> Result<()> {
    let lens = spec.prover_round_lens(t);
    let round_bits: usize = lens.iter().sum();
    for combo in 0..(1u128 << round_bits) {
        let mut messages = Vec::with_capacity(spec.prover_count);
        let mut shift = round_bits;
        for &len in lens {
            shift -= len;
            let value = ((combo >> shift) & ((1u128 << len) - 1)) as u64;
            messages.push(Message::from_uint(value, len));
        }
        let mut branch = ExecState {
            spec: state.spec,
            input: state.input,
            tape: state.tape,
            rounds: state.rounds.clone(),
            trace: state.trace.clone(),
            rand_cursor: state.rand_cursor,
            rand_high_water: state.rand_high_water,
            completed_prover_rounds: state.completed_prover_rounds,
        };
        let total_bits = total_bits + round_bits;
        if total_bits > spec.communication_budget {
            return Err(Error::BudgetExceeded(format!(
                "{total_bits} bits transmitted, budget {}",
                spec.communication_budget
            )));
        }
        branch.rounds.push(RoundMessages {
            from_verifier: false,
            messages,
        });
        branch.completed_prover_rounds += 1;

        let action = (spec.behavior)(&mut branch)?;
        let last = t + 1 == spec.prover_round_count();
        match (action, last) {
            (VerifierAction::Finish(value), true) => {
                let payment = Payment::new(value)?.into_value();
                let verifier_messages: Vec<Vec<Message>> = branch
                    .rounds
                    .iter()
                    .filter(|r| r.from_verifier)
                    .map(|r| r.messages.clone())
                    .collect();
                visit(&RunRecord {
                    verifier_messages: &verifier_messages,
                    payment: &payment,
                    rand_high_water: branch.rand_high_water,
                    total_bits,
                })?;
            }
            (VerifierAction::Send(msgs), false) => {
                let vlens = spec.verifier_round_lens(t);
                let mut total_bits = total_bits;
                for (i, m) in msgs.iter().enumerate() {
                    if m.len() != vlens[i] {
                        return Err(Error::VerifierContract(format!(
                            "verifier message to prover {i} has {} bits, declared {}",
                            m.len(),
                            vlens[i]
                        )));
                    }
                    total_bits += m.len();
                }
                branch.rounds.push(RoundMessages {
                    from_verifier: true,
                    messages: msgs,
                });
                explore_round(spec, branch, t + 1, total_bits, visit)?;
            }
            (VerifierAction::Finish(_), false) => {
                return Err(Error::VerifierContract(
                    "verifier finished with rounds remaining".into(),
                ));
            }
            (VerifierAction::Send(_), true) => {
                return Err(Error::VerifierContract(
                    "verifier must finish after the final prover round".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Resource audit over every `(tape, message choice)` run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub ok: bool,
    pub violations: Vec<String>,
    pub max_communication_bits: usize,
    pub rounds_used: usize,
    pub max_random_bits: usize,
    pub declared_communication_budget: usize,
    pub declared_rounds: usize,
    pub declared_randomness: usize,
    pub runs_explored: u64,
}

/// Checks the declared budgets `C`, round count, and randomness against
/// every run of the protocol on `x`. Specs that violate a budget are
/// reported here rather than silently truncated anywhere.
pub fn resource_audit(spec: &ProtocolSpec, x: &Input, caps: &Caps) -> Result<AuditReport> {
    let declared = AuditReport {
        ok: true,
        violations: Vec::new(),
        max_communication_bits: 0,
        rounds_used: spec.rounds.len(),
        max_random_bits: 0,
        declared_communication_budget: spec.communication_budget,
        declared_rounds: spec.rounds.len(),
        declared_randomness: spec.randomness_len,
        runs_explored: 0,
    };
    let static_total = spec.total_declared_bits();
    if static_total > spec.communication_budget {
        let mut report = declared;
        report.ok = false;
        report.max_communication_bits = static_total;
        report.violations.push(format!(
            "declared messages total {static_total} bits, budget {}",
            spec.communication_budget
        ));
        return Ok(report);
    }
    let mut report = declared;
    explore_all_runs(spec, x, caps, &mut |run| {
        report.max_communication_bits = report.max_communication_bits.max(run.total_bits);
        report.max_random_bits = report.max_random_bits.max(run.rand_high_water);
        report.runs_explored += 1;
        Ok(())
    })?;
    if report.max_random_bits > spec.randomness_len {
        report.ok = false;
        report.violations.push(format!(
            "verifier consumed {} random bits, budget {}",
            report.max_random_bits, spec.randomness_len
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::StrategyProfile;
    use crate::Caps;

    /// One prover, one round, two-bit message; payment is the message value
    /// divided by 4 when the tape bit is 0, else 1.
    fn table_spec() -> ProtocolSpec {
        let behavior: VerifierFn = Arc::new(|io| {
            let hi = io.read_bit(0, 0, 0)?;
            let lo = io.read_bit(0, 0, 1)?;
            let coin = io.rand_bit()?;
            let value = if coin {
                Rat::one()
            } else {
                rat(2 * i64::from(hi) + i64::from(lo), 4)
            };
            Ok(VerifierAction::Finish(value))
        });
        ProtocolSpec::new(
            "table",
            1,
            vec![RoundSpec::Prover(vec![2])],
            1,
            2,
            true,
            behavior,
        )
        .unwrap()
    }

    fn fixed(spec: &ProtocolSpec, x: &Input, msg: Message) -> StrategyProfile {
        StrategyProfile::from_fn(spec, x, &Caps::default(), |_, _, _| msg.clone()).unwrap()
    }

    #[test]
    fn expectation_averages_over_all_tapes() {
        let spec = table_spec();
        let x: Input = "1".parse().unwrap();
        let s = fixed(&spec, &x, Message::from_uint(3, 2));
        // (3/4 + 1) / 2.
        let u = expected_payment(&spec, &x, &s, &Caps::default()).unwrap();
        assert_eq!(u, rat(7, 8));
        // Independent route: sum single runs and divide.
        let mut sum = Rat::zero();
        for tape in RandomTape::all(1) {
            sum += execute(&spec, &x, &tape, &s).unwrap().1.into_value();
        }
        assert_eq!(sum / rat(2, 1), rat(7, 8));
    }

    #[test]
    fn payment_constant_in_tape_equals_single_run() {
        let behavior: VerifierFn = Arc::new(|io| {
            io.read_bit(0, 0, 0)?;
            Ok(VerifierAction::Finish(rat(1, 3)))
        });
        let spec = ProtocolSpec::new(
            "constant",
            1,
            vec![RoundSpec::Prover(vec![1])],
            2,
            1,
            true,
            behavior,
        )
        .unwrap();
        let x: Input = "1".parse().unwrap();
        let s = fixed(&spec, &x, Message::from_uint(1, 1));
        let u = expected_payment(&spec, &x, &s, &Caps::default()).unwrap();
        let (_, single) = execute(&spec, &x, &RandomTape::from_index(2, 2), &s).unwrap();
        assert_eq!(&u, single.value());
    }

    #[test]
    fn tape_length_must_match_the_declared_budget() {
        let spec = table_spec();
        let x: Input = "1".parse().unwrap();
        let s = fixed(&spec, &x, Message::from_uint(0, 2));
        let err = execute(&spec, &x, &RandomTape::empty(), &s).unwrap_err();
        assert!(matches!(err, Error::TapeMismatch { want: 1, got: 0 }));
    }

    #[test]
    fn access_trace_references_existing_positions_in_read_order() {
        let spec = table_spec();
        let x: Input = "1".parse().unwrap();
        let s = fixed(&spec, &x, Message::from_uint(2, 2));
        let (transcript, _) = execute(&spec, &x, &RandomTape::from_index(1, 0), &s).unwrap();
        assert_eq!(
            transcript.access_trace(),
            &[
                BitPos {
                    prover_round: 0,
                    prover: 0,
                    bit: 0
                },
                BitPos {
                    prover_round: 0,
                    prover: 0,
                    bit: 1
                },
            ]
        );
        assert_eq!(transcript.effective_transcript(), vec![true, false]);
        // Reading a future or absent position fails.
        let bad: VerifierFn = Arc::new(|io| {
            io.read_bit(1, 0, 0)?;
            Ok(VerifierAction::Finish(Rat::zero()))
        });
        let spec = ProtocolSpec::new(
            "bad-read",
            1,
            vec![RoundSpec::Prover(vec![1])],
            0,
            1,
            true,
            bad,
        )
        .unwrap();
        let table = BTreeMap::from([(Vec::new(), Message::from_uint(0, 1))]);
        let s = StrategyProfile::from_tables(vec![vec![table]]);
        assert!(matches!(
            execute(&spec, &x, &RandomTape::empty(), &s),
            Err(Error::AccessOutOfBounds { .. })
        ));
    }

    #[test]
    fn normalization_maps_endpoints_and_preserves_order() {
        let make = |value: Rat| {
            let behavior: VerifierFn = Arc::new(move |io| {
                io.read_bit(0, 0, 0)?;
                Ok(VerifierAction::Finish(value.clone()))
            });
            ProtocolSpec::new(
                "signed",
                1,
                vec![RoundSpec::Prover(vec![1])],
                0,
                1,
                false,
                behavior,
            )
            .unwrap()
        };
        let x: Input = "1".parse().unwrap();
        let caps = Caps::default();
        for (raw, mapped) in [
            (rat(-1, 1), rat(0, 1)),
            (rat(1, 1), rat(1, 1)),
            (rat(-1, 2), rat(1, 4)),
        ] {
            let spec = normalize_payments(&make(raw));
            assert!(spec.normalized);
            let s = fixed(&spec, &x, Message::from_uint(1, 1));
            assert_eq!(expected_payment(&spec, &x, &s, &caps).unwrap(), mapped);
        }
    }

    #[test]
    fn audit_reports_budgets_and_rejects_violations() {
        let spec = table_spec();
        let x: Input = "1".parse().unwrap();
        let audit = resource_audit(&spec, &x, &Caps::default()).unwrap();
        assert!(audit.ok);
        assert_eq!(audit.max_communication_bits, 2);
        assert_eq!(audit.rounds_used, 1);
        assert_eq!(audit.max_random_bits, 1);
        assert_eq!(audit.runs_explored, 8);

        let mut over = table_spec();
        over.communication_budget = 1;
        let audit = resource_audit(&over, &x, &Caps::default()).unwrap();
        assert!(!audit.ok);
        assert!(!audit.violations.is_empty());
        // Execution rejects the same violation instead of truncating.
        let s = fixed(&spec, &x, Message::from_uint(0, 2));
        assert!(matches!(
            execute(&over, &x, &RandomTape::from_index(1, 0), &s),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn caps_are_enforced() {
        let spec = table_spec();
        let x: Input = "1".parse().unwrap();
        let s = fixed(&spec, &x, Message::from_uint(0, 2));
        let tight = Caps {
            max_profiles: 2,
            max_tapes: 1,
        };
        assert!(matches!(
            expected_payment(&spec, &x, &s, &tight),
            Err(Error::RandomnessCapExceeded { .. })
        ));
        assert!(matches!(
            resource_audit(
                &spec,
                &x,
                &Caps {
                    max_profiles: 2,
                    max_tapes: 4
                }
            ),
            Err(Error::StrategyCapExceeded { .. })
        ));
    }

    #[test]
    fn undefined_strategy_on_reachable_history_is_malformed() {
        let spec = table_spec();
        let x: Input = "1".parse().unwrap();
        let s = StrategyProfile::from_tables(vec![vec![std::collections::BTreeMap::new()]]);
        assert!(matches!(
            execute(&spec, &x, &RandomTape::from_index(1, 0), &s),
            Err(Error::MalformedStrategy(_))
        ));
    }
}
