//! Strategy profiles, exhaustive profile enumeration, optimal (payment
//! maximizing) profiles, the rational answer bit, and the utility gap.
//!
//! Provers are cooperative: they pre-commit to a joint deterministic
//! strategy profile and the analysis finds every profile maximizing the
//! exact expected payment. Enumeration covers total mappings over reachable
//! histories only; provers never see another prover's channel.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::protocol::{expected_payment, explore_all_runs, Input, Message, ProtocolSpec};
use crate::rational::Rat;
use crate::{Caps, Error, Result};

/// A joint deterministic commitment: for every prover, every prover round,
/// a total mapping from the prover's observed verifier-channel history to
/// the message it sends.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StrategyProfile {
    /// `tables[prover][prover_round]: history bits -> message`.
    tables: Vec<Vec<BTreeMap<Vec<bool>, Message>>>,
}

impl StrategyProfile {
    pub fn from_tables(tables: Vec<Vec<BTreeMap<Vec<bool>, Message>>>) -> Self {
        StrategyProfile { tables }
    }

    pub fn prover_count(&self) -> usize {
        self.tables.len()
    }

    pub fn message(
        &self,
        prover: usize,
        prover_round: usize,
        history: &[bool],
    ) -> Option<&Message> {
        self.tables.get(prover)?.get(prover_round)?.get(history)
    }

    /// The answer bit this profile commits to: the first bit of prover 1's
    /// first-round message (sent on the empty history).
    pub fn answer_bit(&self) -> Option<bool> {
        self.message(0, 0, &[]).map(|m| m.bit(0))
    }

    pub fn tables(&self) -> &[Vec<BTreeMap<Vec<bool>, Message>>] {
        &self.tables
    }

    /// Materializes a total profile over the reachable histories of `spec`
    /// on `x`, taking each move from `f(prover, prover_round, history)`.
    pub fn from_fn(
        spec: &ProtocolSpec,
        x: &Input,
        caps: &Caps,
        mut f: impl FnMut(usize, usize, &[bool]) -> Message,
    ) -> Result<Self> {
        let reach = reachable_histories(spec, x, caps)?;
        let mut tables = Vec::with_capacity(spec.prover_count);
        for i in 0..spec.prover_count {
            let mut rounds = Vec::with_capacity(spec.prover_round_count());
            for t in 0..spec.prover_round_count() {
                let len = spec.prover_round_lens(t)[i];
                let mut table = BTreeMap::new();
                for history in &reach.sets[i][t] {
                    let msg = f(i, t, history);
                    if msg.len() != len {
                        return Err(Error::MalformedStrategy(format!(
                            "prover {i} round {t} message has {} bits, declared {len}",
                            msg.len()
                        )));
                    }
                    table.insert(history.clone(), msg);
                }
                rounds.push(table);
            }
            tables.push(rounds);
        }
        Ok(StrategyProfile { tables })
    }
}

/// Reachable verifier-channel histories, `sets[prover][prover_round]`.
#[derive(Debug, Clone)]
pub struct ReachableHistories {
    pub sets: Vec<Vec<BTreeSet<Vec<bool>>>>,
}

/// Computes every history each prover can observe under some tape and some
/// deterministic profile. Exploration branches over all message choices, so
/// reachability under arbitrary play coincides with reachability under
/// deterministic profiles.
pub fn reachable_histories(
    spec: &ProtocolSpec,
    x: &Input,
    caps: &Caps,
) -> Result<ReachableHistories> {
    let provers = spec.prover_count;
    let rounds = spec.prover_round_count();
    let mut sets = vec![vec![BTreeSet::new(); rounds]; provers];
    explore_all_runs(spec, x, caps, &mut |run| {
        for (i, prover_sets) in sets.iter_mut().enumerate() {
            let mut history: Vec<bool> = Vec::new();
            for (t, set) in prover_sets.iter_mut().enumerate() {
                set.insert(history.clone());
                if t < run.verifier_messages.len() {
                    history.extend_from_slice(run.verifier_messages[t][i].bits());
                }
            }
        }
        Ok(())
    })?;
    Ok(ReachableHistories { sets })
}

/// One slot of the flattened strategy table: the move of `prover` in round
/// `prover_round` on `history`, a free choice among `2^len` messages.
#[derive(Debug, Clone)]
struct Slot {
    prover: usize,
    prover_round: usize,
    history: Vec<bool>,
    len: usize,
}

/// A complete, canonically ordered enumeration of the deterministic
/// well-formed strategy profiles of a protocol on one input.
#[derive(Debug)]
pub struct ProfileEnumeration {
    slots: Vec<Slot>,
    prover_count: usize,
    prover_rounds: usize,
    count: u128,
}

impl ProfileEnumeration {
    /// Total number of profiles.
    pub fn count(&self) -> u128 {
        self.count
    }

    /// Yields every profile exactly once, ordered lexicographically over the
    /// flattened mapping tables (first slot most significant, messages
    /// ordered as big-endian integers).
    pub fn iter(&self) -> impl Iterator<Item = StrategyProfile> + '_ {
        ProfileIter {
            enumeration: self,
            next: 0,
        }
    }

    fn profile_at(&self, index: u128) -> StrategyProfile {
        let mut digits = vec![0u64; self.slots.len()];
        let mut rest = index;
        for (d, slot) in self.slots.iter().enumerate().rev() {
            let base = 1u128 << slot.len;
            digits[d] = (rest % base) as u64;
            rest /= base;
        }
        let mut tables = vec![vec![BTreeMap::new(); self.prover_rounds]; self.prover_count];
        for (slot, digit) in self.slots.iter().zip(digits) {
            tables[slot.prover][slot.prover_round]
                .insert(slot.history.clone(), Message::from_uint(digit, slot.len));
        }
        StrategyProfile { tables }
    }
}

struct ProfileIter<'a> {
    enumeration: &'a ProfileEnumeration,
    next: u128,
}

impl Iterator for ProfileIter<'_> {
    type Item = StrategyProfile;

    fn next(&mut self) -> Option<StrategyProfile> {
        if self.next >= self.enumeration.count {
            return None;
        }
        let profile = self.enumeration.profile_at(self.next);
        self.next += 1;
        Some(profile)
    }
}

/// Enumerates every deterministic well-formed strategy profile of `spec` on
/// `x`, exactly once, in canonical order.
pub fn enumerate_profiles(
    spec: &ProtocolSpec,
    x: &Input,
    caps: &Caps,
) -> Result<ProfileEnumeration> {
    let reach = reachable_histories(spec, x, caps)?;
    let mut slots = Vec::new();
    for i in 0..spec.prover_count {
        for t in 0..spec.prover_round_count() {
            let len = spec.prover_round_lens(t)[i];
            for history in &reach.sets[i][t] {
                slots.push(Slot {
                    prover: i,
                    prover_round: t,
                    history: history.clone(),
                    len,
                });
            }
        }
    }
    let mut count: u128 = 1;
    for slot in &slots {
        count = count
            .checked_shl(slot.len as u32)
            .filter(|c| *c <= caps.max_profiles)
            .ok_or(Error::StrategyCapExceeded {
                count,
                cap: caps.max_profiles,
            })?;
    }
    Ok(ProfileEnumeration {
        slots,
        prover_count: spec.prover_count,
        prover_rounds: spec.prover_round_count(),
        count,
    })
}

/// Per-profile exact expected payments and answer bits, in enumeration
/// order. Shared by the optimum search and the interval oracle.
pub(crate) fn profile_payment_table(
    spec: &ProtocolSpec,
    x: &Input,
    caps: &Caps,
) -> Result<Vec<(Rat, bool)>> {
    let enumeration = enumerate_profiles(spec, x, caps)?;
    let mut table = Vec::with_capacity(enumeration.count() as usize);
    for profile in enumeration.iter() {
        let u = expected_payment(spec, x, &profile, caps)?;
        let answer = profile
            .answer_bit()
            .ok_or_else(|| Error::MalformedStrategy("profile lacks a first-round move".into()))?;
        table.push((u, answer));
    }
    Ok(table)
}

/// The analysis of one `(spec, x)` pair: every profile's exact expected
/// payment, the optimum `u*`, all profiles attaining it, their shared answer
/// bit, and the utility gap to the best opposing profile.
#[derive(Debug, Clone)]
pub struct PaymentReport {
    /// Exact expected payment per profile, in enumeration order.
    pub payments: Vec<Rat>,
    /// Answer bit per profile, in enumeration order.
    pub answer_bits: Vec<bool>,
    /// The optimum `u* = max_s u(s)`.
    pub optimum: Rat,
    /// Indices of every argmax profile.
    pub argmax: Vec<usize>,
    /// The argmax profiles themselves.
    pub argmax_profiles: Vec<StrategyProfile>,
    /// The common answer bit of the argmax profiles; `None` iff INVALID-RIP.
    pub answer_bit: Option<bool>,
    /// Set when the argmax profiles disagree on the answer bit, violating
    /// the defining property of a rational proof.
    pub invalid_rip: bool,
    /// `u*` minus the best expected payment among profiles carrying the
    /// opposite answer bit; `None` when no opposing profile exists (or the
    /// report is INVALID-RIP).
    pub utility_gap: Option<Rat>,
}

/// Enumerates all profiles and reports the optimum set: a per-profile sum
/// over tapes followed by a maximum over profiles. Ties are reported as the
/// full argmax set, never sampled.
pub fn optimal_profiles(spec: &ProtocolSpec, x: &Input, caps: &Caps) -> Result<PaymentReport> {
    let enumeration = enumerate_profiles(spec, x, caps)?;
    let mut payments = Vec::with_capacity(enumeration.count() as usize);
    let mut answer_bits = Vec::with_capacity(enumeration.count() as usize);
    let mut optimum: Option<Rat> = None;
    for profile in enumeration.iter() {
        let u = expected_payment(spec, x, &profile, caps)?;
        let answer = profile
            .answer_bit()
            .ok_or_else(|| Error::MalformedStrategy("profile lacks a first-round move".into()))?;
        if optimum.as_ref().is_none_or(|best| u > *best) {
            optimum = Some(u.clone());
        }
        payments.push(u);
        answer_bits.push(answer);
    }
    let optimum = optimum.expect("every protocol has at least one profile");

    let argmax: Vec<usize> = payments
        .iter()
        .enumerate()
        .filter(|(_, u)| **u == optimum)
        .map(|(idx, _)| idx)
        .collect();
    let argmax_profiles: Vec<StrategyProfile> = argmax
        .iter()
        .map(|&idx| enumeration.profile_at(idx as u128))
        .collect();

    let first_bit = answer_bits[argmax[0]];
    let invalid_rip = argmax.iter().any(|&idx| answer_bits[idx] != first_bit);
    let answer_bit = if invalid_rip { None } else { Some(first_bit) };

    let utility_gap = answer_bit.and_then(|bit| {
        payments
            .iter()
            .zip(&answer_bits)
            .filter(|(_, b)| **b != bit)
            .map(|(u, _)| u)
            .max()
            .map(|best_opposing| &optimum - best_opposing)
    });

    Ok(PaymentReport {
        payments,
        answer_bits,
        optimum,
        argmax,
        argmax_profiles,
        answer_bit,
        invalid_rip,
        utility_gap,
    })
}

/// The common answer bit of all payment-maximizing profiles.
pub fn rational_answer(spec: &ProtocolSpec, x: &Input, caps: &Caps) -> Result<bool> {
    optimal_profiles(spec, x, caps)?
        .answer_bit
        .ok_or(Error::InvalidRip)
}

/// `u*` minus the best expected payment among profiles whose answer bit
/// opposes the optimum's. `Ok(None)` when no profile carries the opposite
/// bit: the gap is undefined rather than infinite.
pub fn utility_gap(spec: &ProtocolSpec, x: &Input, caps: &Caps) -> Result<Option<Rat>> {
    let report = optimal_profiles(spec, x, caps)?;
    if report.invalid_rip {
        return Err(Error::InvalidRip);
    }
    Ok(report.utility_gap)
}

/// Per-input outcome of a gap check.
#[derive(Debug, Clone)]
pub struct GapRow {
    pub input: Input,
    pub gap: Option<Rat>,
    pub passes: bool,
}

/// Outcome of testing `gap > 1/gamma` on a set of inputs.
#[derive(Debug, Clone)]
pub struct GammaGapReport {
    pub gamma: Rat,
    pub rows: Vec<GapRow>,
    pub holds: bool,
}

/// Tests whether the protocol has a `gamma`-utility gap on every given
/// input: the gap must strictly exceed `1/gamma`, or be undefined.
pub fn has_gamma_gap(
    spec: &ProtocolSpec,
    inputs: &[Input],
    gamma: &Rat,
    caps: &Caps,
) -> Result<GammaGapReport> {
    if !(gamma > &Rat::zero()) {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let threshold = gamma.recip();
    let mut rows = Vec::with_capacity(inputs.len());
    for input in inputs {
        let gap = utility_gap(spec, input, caps)?;
        let passes = match &gap {
            Some(g) => *g > threshold,
            None => true,
        };
        rows.push(GapRow {
            input: input.clone(),
            gap,
            passes,
        });
    }
    let holds = rows.iter().all(|r| r.passes);
    Ok(GammaGapReport {
        gamma: gamma.clone(),
        rows,
        holds,
    })
}
