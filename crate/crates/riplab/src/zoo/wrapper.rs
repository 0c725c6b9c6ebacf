//! Two-prover, five-round simulation of an arbitrary normalized protocol.
//!
//! Prover 1 resends the base protocol's opening message, receives the base
//! tape from the verifier, and then sends the *effective transcript*: the
//! values of the transcript bits the base verifier reads, in read order.
//! The verifier replays the base verifier against that stream, samples one
//! transcript position uniformly from a power-of-two padded index space,
//! and asks prover 2 to commit to that bit given only the sampled indices
//! and the addressed prover's channel history. A commitment that
//! contradicts the effective transcript pays -1; a sampled position the
//! base verifier never accessed pays 0; otherwise the run pays the base
//! payment divided by `2 C`, for `C` the base communication budget.
//!
//! The replay also cross-checks the effective transcript against the
//! resent opening message wherever the base verifier reads into it, paying
//! -1 on any disagreement; prover 1 cannot claim one answer bit in the
//! opening and feed the replay another.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::protocol::{
    BitPos, Input, Message, ProtocolSpec, RoundSpec, VerifierAction, VerifierFn, VerifierIo,
};
use crate::rational::{rat, Rat};
use crate::strategy::StrategyProfile;
use crate::{Caps, Error, Result};

/// Index widths and layout shared by the construction and its honest play.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WrapperDims {
    /// Length of the base opening message (prover 1, round 1).
    pub m1_len: usize,
    /// Base randomness budget; also the length of the round-2 message.
    pub base_rand: usize,
    /// Effective-transcript capacity: total declared prover bits.
    pub m_tilde_len: usize,
    pub base_prover_rounds: usize,
    pub base_provers: usize,
    /// Sampling widths for the round, prover, and bit indices.
    pub round_bits: usize,
    pub prover_bits: usize,
    pub bit_bits: usize,
    /// Capacity of the history field sent to prover 2.
    pub history_len: usize,
}

impl WrapperDims {
    pub(crate) fn of(base: &ProtocolSpec) -> Self {
        let base_prover_rounds = base.prover_round_count();
        let base_provers = base.prover_count;
        let max_prover_msg = (0..base_prover_rounds)
            .flat_map(|t| base.prover_round_lens(t).iter().copied())
            .max()
            .unwrap_or(0);
        let history_len = (0..base_provers)
            .map(|i| {
                (0..base.verifier_round_count())
                    .map(|v| base.verifier_round_lens(v)[i])
                    .sum::<usize>()
            })
            .max()
            .unwrap_or(0);
        WrapperDims {
            m1_len: base.prover_round_lens(0)[0],
            base_rand: base.randomness_len,
            m_tilde_len: base.total_prover_bits(),
            base_prover_rounds,
            base_provers,
            round_bits: index_bits(base_prover_rounds),
            prover_bits: index_bits(base_provers),
            bit_bits: index_bits(max_prover_msg),
            history_len,
        }
    }

    pub(crate) fn sample_bits(&self) -> usize {
        self.round_bits + self.prover_bits + self.bit_bits
    }

    pub(crate) fn commit_request_len(&self) -> usize {
        self.sample_bits() + self.history_len
    }

    /// Base-channel history length of `prover` before prover round `round`.
    pub(crate) fn base_history_len(
        &self,
        base: &ProtocolSpec,
        prover: usize,
        round: usize,
    ) -> usize {
        (0..round.min(base.verifier_round_count()))
            .map(|v| base.verifier_round_lens(v)[prover])
            .sum()
    }
}

fn index_bits(count: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < count {
        bits += 1;
    }
    bits
}

/// Outcome of replaying the base verifier against an effective transcript.
struct BaseReplay {
    reads: Vec<(BitPos, bool)>,
    verifier_messages: Vec<Vec<Message>>,
    payment: Rat,
    opening_conflict: bool,
}

impl BaseReplay {
    fn verifier_history(&self, prover: usize, before_round: usize) -> Vec<bool> {
        let mut h = Vec::new();
        for round in self.verifier_messages.iter().take(before_round) {
            h.extend_from_slice(round[prover].bits());
        }
        h
    }

    fn first_read(&self, pos: BitPos) -> Option<bool> {
        self.reads.iter().find(|(p, _)| *p == pos).map(|(_, v)| *v)
    }
}

/// [`VerifierIo`] that answers transcript reads from a value stream instead
/// of a real transcript, recording which positions were asked for.
struct ReplayIo<'a> {
    base: &'a ProtocolSpec,
    input: &'a Input,
    tape: &'a [bool],
    values: &'a [bool],
    opening: &'a [bool],
    cursor: usize,
    rand_cursor: usize,
    completed: usize,
    reads: Vec<(BitPos, bool)>,
    verifier_messages: Vec<Vec<Message>>,
    opening_conflict: bool,
}

impl VerifierIo for ReplayIo<'_> {
    fn input(&self) -> &Input {
        self.input
    }

    fn completed_prover_rounds(&self) -> usize {
        self.completed
    }

    fn read_bit(&mut self, prover_round: usize, prover: usize, bit: usize) -> Result<bool> {
        let produced = prover_round < self.completed
            && prover < self.base.prover_count
            && bit < self.base.prover_round_lens(prover_round)[prover];
        if !produced {
            return Err(Error::AccessOutOfBounds {
                round: prover_round,
                prover,
                bit,
            });
        }
        let value = *self.values.get(self.cursor).ok_or_else(|| {
            Error::VerifierContract(
                "base verifier reads exceed the effective transcript capacity".into(),
            )
        })?;
        self.cursor += 1;
        self.reads.push((
            BitPos {
                prover_round,
                prover,
                bit,
            },
            value,
        ));
        if prover_round == 0 && prover == 0 && value != self.opening[bit] {
            self.opening_conflict = true;
        }
        Ok(value)
    }

    fn message_len(&self, prover_round: usize, prover: usize) -> Result<usize> {
        if prover_round >= self.base.prover_round_count() || prover >= self.base.prover_count {
            return Err(Error::AccessOutOfBounds {
                round: prover_round,
                prover,
                bit: 0,
            });
        }
        Ok(self.base.prover_round_lens(prover_round)[prover])
    }

    fn rand_bit(&mut self) -> Result<bool> {
        let pos = self.rand_cursor;
        let bit = *self.tape.get(pos).ok_or(Error::TapeExhausted(pos))?;
        self.rand_cursor += 1;
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

/// Replays the base verifier with reads served from `values`. The replay is
/// deterministic in `(x, tape, values, opening)`, so repeating it inside
/// different verifier turns of one wrapper run is sound.
fn replay_base(
    base: &ProtocolSpec,
    x: &Input,
    tape: &[bool],
    values: &[bool],
    opening: &[bool],
) -> Result<BaseReplay> {
    let mut io = ReplayIo {
        base,
        input: x,
        tape,
        values,
        opening,
        cursor: 0,
        rand_cursor: 0,
        completed: 0,
        reads: Vec::new(),
        verifier_messages: Vec::new(),
        opening_conflict: false,
    };
    let prover_rounds = base.prover_round_count();
    let mut payment = None;
    for t in 0..prover_rounds {
        io.completed += 1;
        let action = (base.behavior())(&mut io)?;
        match action {
            VerifierAction::Send(msgs) if t + 1 < prover_rounds => {
                let vlens = base.verifier_round_lens(t);
                for (i, m) in msgs.iter().enumerate() {
                    if m.len() != vlens[i] {
                        return Err(Error::VerifierContract(format!(
                            "base verifier message to prover {i} has {} bits, declared {}",
                            m.len(),
                            vlens[i]
                        )));
                    }
                }
                io.verifier_messages.push(msgs);
            }
            VerifierAction::Finish(value) if t + 1 == prover_rounds => {
                if value < Rat::zero() || value > Rat::one() {
                    return Err(Error::VerifierContract(
                        "base payment left [0, 1] during replay".into(),
                    ));
                }
                payment = Some(value);
            }
            _ => {
                return Err(Error::VerifierContract(
                    "base verifier broke its round structure during replay".into(),
                ));
            }
        }
    }
    Ok(BaseReplay {
        reads: io.reads,
        verifier_messages: io.verifier_messages,
        payment: payment.expect("replay loop ends in Finish or an error"),
        opening_conflict: io.opening_conflict,
    })
}

/// Wrapper-run data a verifier turn works from: the opening message, the
/// effective transcript, the base tape, and the sampled indices.
struct GatheredRun {
    opening: Vec<bool>,
    m_tilde: Vec<bool>,
    tape: Vec<bool>,
    round: u64,
    prover: u64,
    bit: u64,
}

fn gather(io: &mut dyn VerifierIo, dims: &WrapperDims) -> Result<GatheredRun> {
    let opening = io.read_message(0, 0)?;
    let m_tilde = io.read_message(1, 0)?;
    io.set_rand_cursor(0)?;
    let mut tape = Vec::with_capacity(dims.base_rand);
    for _ in 0..dims.base_rand {
        tape.push(io.rand_bit()?);
    }
    io.set_rand_cursor(dims.base_rand)?;
    let round = io.rand_uint(dims.round_bits)?;
    let prover = io.rand_uint(dims.prover_bits)?;
    let bit = io.rand_uint(dims.bit_bits)?;
    Ok(GatheredRun {
        opening,
        m_tilde,
        tape,
        round,
        prover,
        bit,
    })
}

fn push_uint(bits: &mut Vec<bool>, value: u64, width: usize) {
    for pos in 0..width {
        bits.push((value >> (width - 1 - pos)) & 1 == 1);
    }
}

/// Wraps a normalized protocol in the two-prover, five-round simulation.
pub fn build_communication_reduction(base: &ProtocolSpec) -> Result<ProtocolSpec> {
    if !base.normalized {
        return Err(Error::BaseNotNormalized);
    }
    let dims = WrapperDims::of(base);
    let rounds = vec![
        RoundSpec::Prover(vec![dims.m1_len, 0]),
        RoundSpec::Verifier(vec![dims.base_rand, 0]),
        RoundSpec::Prover(vec![dims.m_tilde_len, 0]),
        RoundSpec::Verifier(vec![0, dims.commit_request_len()]),
        RoundSpec::Prover(vec![0, 1]),
    ];
    let communication =
        dims.m1_len + dims.base_rand + dims.m_tilde_len + dims.commit_request_len() + 1;
    let randomness = dims.base_rand + dims.sample_bits();
    let divisor = Rat::from_integer((2 * base.communication_budget).into());
    let base_arc = Arc::new(base.clone());

    let behavior: VerifierFn = Arc::new(move |io| match io.completed_prover_rounds() {
        1 => {
            io.set_rand_cursor(0)?;
            let mut tape = Vec::with_capacity(dims.base_rand);
            for _ in 0..dims.base_rand {
                tape.push(io.rand_bit()?);
            }
            Ok(VerifierAction::Send(vec![
                Message::new(tape),
                Message::empty(),
            ]))
        }
        2 => {
            let run = gather(io, &dims)?;
            let replay = replay_base(&base_arc, io.input(), &run.tape, &run.m_tilde, &run.opening)?;
            let mut request = Vec::with_capacity(dims.commit_request_len());
            push_uint(&mut request, run.round, dims.round_bits);
            push_uint(&mut request, run.prover, dims.prover_bits);
            push_uint(&mut request, run.bit, dims.bit_bits);
            let history = if (run.round as usize) < dims.base_prover_rounds
                && (run.prover as usize) < dims.base_provers
            {
                replay.verifier_history(run.prover as usize, run.round as usize)
            } else {
                Vec::new()
            };
            request.extend_from_slice(&history);
            request.resize(dims.commit_request_len(), false);
            Ok(VerifierAction::Send(vec![
                Message::empty(),
                Message::new(request),
            ]))
        }
        3 => {
            let run = gather(io, &dims)?;
            let replay = replay_base(&base_arc, io.input(), &run.tape, &run.m_tilde, &run.opening)?;
            let commitment = io.read_bit(2, 1, 0)?;
            if replay.opening_conflict {
                return Ok(VerifierAction::Finish(rat(-1, 1)));
            }
            let in_range = (run.round as usize) < dims.base_prover_rounds
                && (run.prover as usize) < dims.base_provers
                && (run.bit as usize)
                    < base_arc.prover_round_lens(run.round as usize)[run.prover as usize];
            let accessed = in_range.then(|| {
                replay.first_read(BitPos {
                    prover_round: run.round as usize,
                    prover: run.prover as usize,
                    bit: run.bit as usize,
                })
            });
            match accessed.flatten() {
                None => Ok(VerifierAction::Finish(Rat::zero())),
                Some(value) if value != commitment => Ok(VerifierAction::Finish(rat(-1, 1))),
                Some(_) => Ok(VerifierAction::Finish(&replay.payment / &divisor)),
            }
        }
        other => Err(Error::VerifierContract(format!(
            "unexpected verifier turn after {other} prover rounds"
        ))),
    });

    Ok(ProtocolSpec::new(
        format!("comm-reduce[{}]", base.name),
        2,
        rounds,
        randomness,
        communication,
        false,
        behavior,
    )?
    .with_metadata("base", base.name.clone())
    .with_metadata("base_communication", base.communication_budget.to_string())
    .with_metadata(
        "payment_divisor",
        format!("2*{}", base.communication_budget),
    )
    .with_metadata(
        "index_sampling",
        format!(
            "round:{}b prover:{}b bit:{}b, power-of-two padded; out-of-range samples pay 0",
            dims.round_bits, dims.prover_bits, dims.bit_bits
        ),
    ))
}

/// The honest two-prover strategy for a wrapped protocol: both provers play
/// consistently with `base_profile`. Prover 1 resends its opening message
/// and the genuine effective transcript for each tape; prover 2 answers
/// every commitment request from the committed base strategy.
pub fn honest_wrapper_profile(
    wrapper: &ProtocolSpec,
    base: &ProtocolSpec,
    x: &Input,
    base_profile: &StrategyProfile,
    caps: &Caps,
) -> Result<StrategyProfile> {
    let dims = WrapperDims::of(base);
    let opening = base_profile
        .message(0, 0, &[])
        .ok_or_else(|| Error::MalformedStrategy("base profile lacks an opening move".into()))?
        .clone();
    let mut failure: Option<Error> = None;
    let profile = StrategyProfile::from_fn(wrapper, x, caps, |prover, round, history| {
        match (prover, round) {
            (0, 0) => opening.clone(),
            (0, 1) => {
                let tape = crate::protocol::RandomTape::new(history.to_vec());
                match crate::protocol::execute(base, x, &tape, base_profile) {
                    Ok((transcript, _)) => {
                        let mut bits = transcript.effective_transcript();
                        bits.resize(dims.m_tilde_len, false);
                        Message::new(bits)
                    }
                    Err(err) => {
                        failure.get_or_insert(err);
                        Message::zero(dims.m_tilde_len)
                    }
                }
            }
            (1, 2) => {
                let mut cursor = 0;
                let round_idx = take_uint(history, &mut cursor, dims.round_bits);
                let prover_idx = take_uint(history, &mut cursor, dims.prover_bits);
                let bit_idx = take_uint(history, &mut cursor, dims.bit_bits);
                let answer =
                    if round_idx < dims.base_prover_rounds && prover_idx < dims.base_provers {
                        let hist_len = dims.base_history_len(base, prover_idx, round_idx);
                        let prefix = &history[cursor..cursor + hist_len];
                        base_profile
                            .message(prover_idx, round_idx, prefix)
                            .and_then(|m| m.bits().get(bit_idx).copied())
                            .unwrap_or(false)
                    } else {
                        false
                    };
                Message::new(vec![answer])
            }
            _ => Message::empty(),
        }
    })?;
    match failure {
        Some(err) => Err(err),
        None => Ok(profile),
    }
}

fn take_uint(bits: &[bool], cursor: &mut usize, width: usize) -> usize {
    let mut v = 0usize;
    for _ in 0..width {
        v = (v << 1) | usize::from(bits[*cursor]);
        *cursor += 1;
    }
    v
}
