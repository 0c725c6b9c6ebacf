//! Conversions between payment-based and accept/reject protocols: rounding
//! payments to {0, 1}, reading the payment as an acceptance probability,
//! checking the member/nonmember separation condition, extracting
//! completeness and soundness, and threshold repetition with exact binomial
//! tail certificates.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::protocol::{
    execute, explore_all_runs, tape_count, Input, ProtocolSpec, RandomTape, VerifierAction,
    VerifierFn,
};
use crate::rational::{ceil_log2, ln_interval, rat, rat_string, Rat};
use crate::strategy::{optimal_profiles, StrategyProfile};
use crate::{Caps, Error, Result};

use std::sync::Arc;

/// Replaces a normalized payment `R` with a Bernoulli payment of matching
/// mean up to `1/(2 gamma)`.
///
/// The new verifier appends `1 + ceil(log2 gamma)` tape bits, reads them as
/// a uniform integer `r'` in `{1, ..., G}` for `G = 2^(1 + ceil(log2
/// gamma))`, and pays 1 exactly when `r' <= ceil(G R)`. For every profile
/// the expectations satisfy `u <= u' <= u + 1/(2 gamma)` exactly.
pub fn round_payments_zero_one(spec: &ProtocolSpec, gamma: &Rat) -> Result<ProtocolSpec> {
    if !spec.normalized {
        return Err(Error::NotNormalized);
    }
    if !gamma.is_positive() {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let extra_bits = 1 + ceil_log2(gamma) as usize;
    let grid = BigInt::from(1u8) << extra_bits;
    let base_rand = spec.randomness_len;
    let inner = spec.behavior().clone();
    let grid_rat = Rat::from_integer(grid.clone());

    let behavior: VerifierFn = Arc::new(move |io| match inner(io)? {
        VerifierAction::Finish(payment) => {
            // The rounding bits live at a fixed offset past the inner
            // protocol's declared budget, independent of how many bits the
            // inner verifier actually consumed.
            io.set_rand_cursor(base_rand)?;
            let drawn = BigInt::from(io.rand_uint(extra_bits)?) + 1;
            let threshold = (&grid_rat * payment).ceil().to_integer();
            Ok(VerifierAction::Finish(if drawn <= threshold {
                Rat::one()
            } else {
                Rat::zero()
            }))
        }
        send => Ok(send),
    });

    let mut out = spec.clone();
    out.name = format!("{}+zero-one", spec.name);
    out.randomness_len = base_rand + extra_bits;
    out = out.replace_behavior(behavior);
    out.metadata
        .insert("rounding_grid".into(), grid.to_string());
    out.metadata
        .insert("rounding_gamma".into(), rat_string(gamma));
    Ok(out)
}

/// The accept/reject view of a zero-one payment protocol: accept exactly
/// when the terminal payment is 1. For every input and profile the
/// acceptance probability equals the expected payment.
#[derive(Debug, Clone)]
pub struct AcceptRejectProtocol {
    pub spec: ProtocolSpec,
    /// Extracted completeness `c`, once computed.
    pub completeness: Option<Rat>,
    /// Extracted soundness `s`, once computed.
    pub soundness: Option<Rat>,
}

impl AcceptRejectProtocol {
    /// Runs one repetition and applies the decision rule.
    pub fn accepts_run(&self, x: &Input, r: &RandomTape, s: &StrategyProfile) -> Result<bool> {
        let (_, payment) = execute(&self.spec, x, r, s)?;
        let value = payment.into_value();
        if value.is_one() {
            Ok(true)
        } else if value.is_zero() {
            Ok(false)
        } else {
            Err(Error::NonBinaryPayment(rat_string(&value)))
        }
    }

    /// Exact acceptance probability by counting accepting tapes under the
    /// decision rule. This is an independent route from `expected_payment`;
    /// the two must agree bit-exactly.
    pub fn acceptance_probability(
        &self,
        x: &Input,
        s: &StrategyProfile,
        caps: &Caps,
    ) -> Result<Rat> {
        let total = tape_count(self.spec.randomness_len)
            .filter(|c| *c <= caps.max_tapes)
            .ok_or(Error::RandomnessCapExceeded {
                len: self.spec.randomness_len,
                cap: caps.max_tapes,
            })?;
        let mut accepting: u128 = 0;
        for tape in RandomTape::all(self.spec.randomness_len) {
            if self.accepts_run(x, &tape, s)? {
                accepting += 1;
            }
        }
        Ok(Rat::new(accepting.into(), total.into()))
    }
}

/// Converts a protocol whose payments are all 0 or 1 into its accept/reject
/// view, verifying the payment support by exhausting every run on the probe
/// inputs.
pub fn to_accept_reject(
    spec: &ProtocolSpec,
    probe_inputs: &[Input],
    caps: &Caps,
) -> Result<AcceptRejectProtocol> {
    for x in probe_inputs {
        explore_all_runs(spec, x, caps, &mut |run| {
            if !run.payment.is_zero() && !run.payment.is_one() {
                return Err(Error::NonBinaryPayment(rat_string(run.payment)));
            }
            Ok(())
        })?;
    }
    Ok(AcceptRejectProtocol {
        spec: spec.clone(),
        completeness: None,
        soundness: None,
    })
}

/// Outcome of testing the member/nonmember separation of optimal payments.
#[derive(Debug, Clone)]
pub struct GapConditionReport {
    pub gamma: Rat,
    pub min_member_optimum: Option<Rat>,
    pub max_nonmember_optimum: Option<Rat>,
    pub holds: bool,
    /// Set when one side is empty, making the condition hold vacuously.
    pub vacuous: bool,
}

/// Checks the strict separation `min over members of u* > max over
/// nonmembers of u* + 1/gamma`.
pub fn check_gap_condition(
    spec: &ProtocolSpec,
    members: &[Input],
    nonmembers: &[Input],
    gamma: &Rat,
    caps: &Caps,
) -> Result<GapConditionReport> {
    if !gamma.is_positive() {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let mut min_member: Option<Rat> = None;
    for x in members {
        let u = optimal_profiles(spec, x, caps)?.optimum;
        if min_member.as_ref().is_none_or(|m| u < *m) {
            min_member = Some(u);
        }
    }
    let mut max_nonmember: Option<Rat> = None;
    for x in nonmembers {
        let u = optimal_profiles(spec, x, caps)?.optimum;
        if max_nonmember.as_ref().is_none_or(|m| u > *m) {
            max_nonmember = Some(u);
        }
    }
    let (holds, vacuous) = match (&min_member, &max_nonmember) {
        (Some(lo), Some(hi)) => (lo > &(hi + gamma.recip()), false),
        _ => (true, true),
    };
    Ok(GapConditionReport {
        gamma: gamma.clone(),
        min_member_optimum: min_member,
        max_nonmember_optimum: max_nonmember,
        holds,
        vacuous,
    })
}

/// Extracts completeness and soundness: `c` is the least optimal acceptance
/// probability over members, `s` the greatest over nonmembers (the optimal
/// profile maximizes acceptance, so no profile on a nonmember exceeds it).
///
/// With `gamma` supplied, asserts the rounded-protocol separation
/// `c > s + 1/(2 gamma)`; without it, asserts `c > s`. Violations are
/// reported as [`Error::GapViolated`].
pub fn extract_completeness_soundness(
    arp: &mut AcceptRejectProtocol,
    members: &[Input],
    nonmembers: &[Input],
    gamma: Option<&Rat>,
    caps: &Caps,
) -> Result<(Rat, Rat)> {
    if members.is_empty() || nonmembers.is_empty() {
        return Err(Error::InvalidParameter(
            "extraction needs at least one member and one nonmember".into(),
        ));
    }
    let mut completeness: Option<Rat> = None;
    for x in members {
        let u = optimal_profiles(&arp.spec, x, caps)?.optimum;
        if completeness.as_ref().is_none_or(|c| u < *c) {
            completeness = Some(u);
        }
    }
    let mut soundness: Option<Rat> = None;
    for x in nonmembers {
        let u = optimal_profiles(&arp.spec, x, caps)?.optimum;
        if soundness.as_ref().is_none_or(|s| u > *s) {
            soundness = Some(u);
        }
    }
    let c = completeness.expect("members nonempty");
    let s = soundness.expect("nonmembers nonempty");
    let required = match gamma {
        Some(g) => {
            if !g.is_positive() {
                return Err(Error::InvalidParameter("gamma must be positive".into()));
            }
            &s + (rat(2, 1) * g).recip()
        }
        None => s.clone(),
    };
    if c <= required {
        return Err(Error::GapViolated(format!(
            "completeness {} does not exceed {}",
            rat_string(&c),
            rat_string(&required)
        )));
    }
    arp.completeness = Some(c.clone());
    arp.soundness = Some(s.clone());
    Ok((c, s))
}

/// Threshold repetition of an accept/reject protocol: run `rho` independent
/// repetitions on fresh tape segments and accept when more than `tau`
/// accept.
#[derive(Debug, Clone)]
pub struct AmplifiedProtocol {
    pub base: AcceptRejectProtocol,
    pub rho: u64,
    pub tau: Rat,
    pub gamma_prime: Rat,
    pub n: u64,
    /// The per-repetition completeness the construction was sized for.
    pub completeness: Rat,
}

/// Builds the amplified protocol: `rho = ceil(96 ln(n) gamma'^2 / c)`
/// repetitions with acceptance threshold `tau = rho c (1 - 1/(4 gamma'))`.
///
/// `ln n` is enclosed in an exact rational interval tight enough to certify
/// the ceiling, so `rho` is exact. Requires the extracted soundness to
/// satisfy `c > s + 1/gamma'`.
pub fn amplify(
    arp: &AcceptRejectProtocol,
    c: &Rat,
    gamma_prime: &Rat,
    n: u64,
) -> Result<AmplifiedProtocol> {
    if gamma_prime <= &Rat::one() {
        return Err(Error::InvalidParameter(
            "amplification requires gamma' > 1".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(
            "amplification requires n >= 2".into(),
        ));
    }
    if !c.is_positive() || c > &Rat::one() {
        return Err(Error::InvalidParameter(
            "completeness must lie in (0, 1]".into(),
        ));
    }
    let s = arp.soundness.as_ref().ok_or_else(|| {
        Error::InvalidParameter("extract completeness and soundness before amplifying".into())
    })?;
    if c <= &(s + gamma_prime.recip()) {
        return Err(Error::GapViolated(format!(
            "need c > s + 1/gamma', got c = {}, s = {}, gamma' = {}",
            rat_string(c),
            rat_string(s),
            rat_string(gamma_prime)
        )));
    }

    let factor = rat(96, 1) * gamma_prime * gamma_prime / c;
    let mut terms = 48;
    let rho = loop {
        let (lo, hi) = ln_interval(n, terms);
        let lo_count = (&factor * lo).ceil().to_integer();
        let hi_count = (&factor * hi).ceil().to_integer();
        if lo_count == hi_count {
            break lo_count
                .to_u64()
                .ok_or_else(|| Error::InvalidParameter("repetition count overflows u64".into()))?;
        }
        terms *= 2;
        if terms > 1 << 20 {
            return Err(Error::InvalidParameter(
                "could not certify the repetition ceiling".into(),
            ));
        }
    };
    let tau = Rat::from_integer(rho.into()) * c * (Rat::one() - (rat(4, 1) * gamma_prime).recip());
    Ok(AmplifiedProtocol {
        base: arp.clone(),
        rho,
        tau,
        gamma_prime: gamma_prime.clone(),
        n,
        completeness: c.clone(),
    })
}

/// Exact upper binomial tail `Pr[Binomial(rho, p) > tau]`.
///
/// Computed entirely over big integers: the sum of `C(rho, k) a^k b^(rho-k)`
/// for `k` above the threshold, over denominator `(a + b)^rho` with
/// `p = a / (a + b)`.
pub fn threshold_acceptance_prob(p: &Rat, rho: u64, tau: &Rat) -> Rat {
    assert!(
        !p.is_negative() && p <= &Rat::one(),
        "probability must lie in [0, 1]"
    );
    // Smallest integer count strictly above tau.
    let k_min_int: BigInt = tau.floor().to_integer() + 1;
    if k_min_int > BigInt::from(rho) {
        return Rat::zero();
    }
    let k_min = k_min_int.max(BigInt::zero()).to_u64().expect("small index");

    let denom = p.denom().to_biguint().expect("positive denominator");
    let a = p.numer().to_biguint().expect("nonnegative numerator");
    let b = &denom - &a;

    if a.is_zero() {
        // p = 0: the only mass is at k = 0.
        return if k_min == 0 { Rat::one() } else { Rat::zero() };
    }

    // Walk k downward from rho. Each step multiplies the running term
    // C(rho, k) a^k b^(rho-k) by k b and divides by (rho - k + 1) a; both
    // divisions are exact.
    let mut term = a.pow(rho as u32);
    let mut sum = BigUint::zero();
    let mut k = rho;
    loop {
        sum += &term;
        if k == k_min {
            break;
        }
        term = term * k * &b / (rho - k + 1) / &a;
        k -= 1;
    }
    Rat::new(BigInt::from(sum), BigInt::from(denom.pow(rho as u32)))
}

/// Exact lower tail `Pr[Binomial(rho, p) <= tau]`, the completeness failure
/// probability of a threshold test.
pub fn threshold_failure_prob(p: &Rat, rho: u64, tau: &Rat) -> Rat {
    Rat::one() - threshold_acceptance_prob(p, rho, tau)
}

impl AmplifiedProtocol {
    /// Analytic acceptance probability when every repetition independently
    /// accepts with probability `p`.
    pub fn analytic_acceptance(&self, p: &Rat) -> Rat {
        threshold_acceptance_prob(p, self.rho, &self.tau)
    }

    /// Executes all `rho` repetitions on one product tape (fresh segment per
    /// repetition) and applies the threshold rule.
    pub fn execute(
        &self,
        x: &Input,
        s: &StrategyProfile,
        product_tape: &RandomTape,
    ) -> Result<bool> {
        let seg = self.base.spec.randomness_len;
        let want = seg * self.rho as usize;
        if product_tape.len() != want {
            return Err(Error::TapeMismatch {
                want,
                got: product_tape.len(),
            });
        }
        let mut accepts = 0u64;
        for rep in 0..self.rho as usize {
            let tape = RandomTape::new(product_tape.bits()[rep * seg..(rep + 1) * seg].to_vec());
            if self.base.accepts_run(x, &tape, s)? {
                accepts += 1;
            }
        }
        Ok(Rat::from_integer(accepts.into()) > self.tau)
    }

    /// Exact acceptance probability by enumerating every product tape.
    /// Feasible only for tiny `rho` times per-repetition randomness; used to
    /// cross-check the analytic tail.
    pub fn acceptance_probability_exhaustive(
        &self,
        x: &Input,
        s: &StrategyProfile,
        caps: &Caps,
    ) -> Result<Rat> {
        let total_bits = self.base.spec.randomness_len * self.rho as usize;
        let total = tape_count(total_bits)
            .filter(|c| *c <= caps.max_tapes)
            .ok_or(Error::RandomnessCapExceeded {
                len: total_bits,
                cap: caps.max_tapes,
            })?;
        let mut accepting: u128 = 0;
        for tape in RandomTape::all(total_bits) {
            if self.execute(x, s, &tape)? {
                accepting += 1;
            }
        }
        Ok(Rat::new(accepting.into(), total.into()))
    }
}

/// Checks that the amplified protocol meets the target guarantees: with
/// per-repetition probability `c` the failure tail stays at most `bound`,
/// and with per-repetition probability `s` the acceptance tail stays at
/// most `bound`.
#[derive(Debug, Clone)]
pub struct AmplificationCertificate {
    pub rho: u64,
    pub tau: Rat,
    pub completeness_failure: Rat,
    pub soundness_acceptance: Rat,
    pub bound: Rat,
    pub meets_bound: bool,
}

pub fn certify_amplification(
    amplified: &AmplifiedProtocol,
    c: &Rat,
    s: &Rat,
) -> AmplificationCertificate {
    let bound = Rat::new(BigInt::one(), amplified.n.into());
    let completeness_failure = threshold_failure_prob(c, amplified.rho, &amplified.tau);
    let soundness_acceptance = threshold_acceptance_prob(s, amplified.rho, &amplified.tau);
    let meets_bound = completeness_failure <= bound && soundness_acceptance <= bound;
    AmplificationCertificate {
        rho: amplified.rho,
        tau: amplified.tau.clone(),
        completeness_failure,
        soundness_acceptance,
        bound,
        meets_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{expected_payment, RoundSpec};
    use crate::rational::parse_rat;

    /// One-prover, one-round, one-bit protocol paying a constant.
    fn constant_spec(payment: Rat, rand_bits: usize) -> ProtocolSpec {
        let value = payment.clone();
        let behavior: VerifierFn = Arc::new(move |io| {
            io.read_bit(0, 0, 0)?;
            Ok(VerifierAction::Finish(value.clone()))
        });
        ProtocolSpec::new(
            format!("constant[{}]", rat_string(&payment)),
            1,
            vec![RoundSpec::Prover(vec![1])],
            rand_bits,
            1,
            true,
            behavior,
        )
        .unwrap()
    }

    fn only_profile(spec: &ProtocolSpec, x: &Input) -> StrategyProfile {
        StrategyProfile::from_fn(spec, x, &Caps::default(), |_, _, _| {
            crate::protocol::Message::from_uint(1, 1)
        })
        .unwrap()
    }

    #[test]
    fn rounding_endpoints() {
        let caps = Caps::default();
        let x: Input = "1".parse().unwrap();
        for gamma in [rat(1, 1), rat(2, 1), rat(4, 1), rat(8, 1)] {
            let zero = round_payments_zero_one(&constant_spec(Rat::zero(), 0), &gamma).unwrap();
            let u = expected_payment(&zero, &x, &only_profile(&zero, &x), &caps).unwrap();
            assert!(u.is_zero());
            let one = round_payments_zero_one(&constant_spec(Rat::one(), 0), &gamma).unwrap();
            let u = expected_payment(&one, &x, &only_profile(&one, &x), &caps).unwrap();
            assert!(u.is_one());
        }
    }

    #[test]
    fn rounding_one_third_with_gamma_two() {
        let x: Input = "1".parse().unwrap();
        let spec = constant_spec(rat(1, 3), 0);
        let rounded = round_payments_zero_one(&spec, &rat(2, 1)).unwrap();
        assert_eq!(rounded.randomness_len, 2);
        let u =
            expected_payment(&rounded, &x, &only_profile(&rounded, &x), &Caps::default()).unwrap();
        // ceil(4/3)/4 = 2/4.
        assert_eq!(u, rat(1, 2));
        assert!(rat(1, 3) <= u && u <= rat(1, 3) + rat(1, 4));
    }

    #[test]
    fn rounding_requires_normalized_payments() {
        let mut spec = constant_spec(rat(1, 2), 0);
        spec.normalized = false;
        assert!(matches!(
            round_payments_zero_one(&spec, &rat(2, 1)),
            Err(Error::NotNormalized)
        ));
    }

    #[test]
    fn accept_reject_identity_on_probe() {
        let caps = Caps::default();
        let x: Input = "1".parse().unwrap();
        let spec = round_payments_zero_one(&constant_spec(rat(3, 4), 0), &rat(2, 1)).unwrap();
        let arp = to_accept_reject(&spec, std::slice::from_ref(&x), &caps).unwrap();
        let profile = only_profile(&spec, &x);
        let by_counting = arp.acceptance_probability(&x, &profile, &caps).unwrap();
        let by_payment = expected_payment(&spec, &x, &profile, &caps).unwrap();
        assert_eq!(by_counting, by_payment);
        assert_eq!(by_counting, rat(3, 4));
    }

    #[test]
    fn non_binary_support_is_rejected() {
        let caps = Caps::default();
        let x: Input = "1".parse().unwrap();
        let spec = constant_spec(rat(1, 3), 0);
        assert!(matches!(
            to_accept_reject(&spec, &[x], &caps),
            Err(Error::NonBinaryPayment(_))
        ));
    }

    #[test]
    fn amplification_parameters_match_direct_arithmetic() {
        let arp = AcceptRejectProtocol {
            spec: constant_spec(Rat::one(), 0),
            completeness: Some(rat(3, 5)),
            soundness: Some(rat(2, 5)),
        };
        let amplified = amplify(&arp, &rat(3, 5), &rat(6, 1), 16).unwrap();
        assert_eq!(amplified.rho, 15971);
        assert_eq!(
            amplified.tau,
            Rat::from_integer(15971.into()) * rat(3, 5) * rat(23, 24)
        );

        let arp = AcceptRejectProtocol {
            spec: constant_spec(Rat::one(), 0),
            completeness: Some(Rat::one()),
            soundness: Some(Rat::zero()),
        };
        let amplified = amplify(&arp, &Rat::one(), &rat(2, 1), 4).unwrap();
        assert_eq!(amplified.rho, 533);
    }

    #[test]
    fn amplification_rejects_bad_parameters() {
        let arp = AcceptRejectProtocol {
            spec: constant_spec(Rat::one(), 0),
            completeness: Some(Rat::one()),
            soundness: Some(Rat::zero()),
        };
        assert!(matches!(
            amplify(&arp, &Rat::one(), &Rat::one(), 16),
            Err(Error::InvalidParameter(_))
        ));
        let tight = AcceptRejectProtocol {
            spec: constant_spec(Rat::one(), 0),
            completeness: Some(rat(1, 2)),
            soundness: Some(rat(1, 2)),
        };
        assert!(matches!(
            amplify(&tight, &rat(1, 2), &rat(4, 1), 16),
            Err(Error::GapViolated(_))
        ));
    }

    #[test]
    fn binomial_tail_edges() {
        assert!(threshold_acceptance_prob(&Rat::one(), 7, &rat(6, 1)).is_one());
        assert!(threshold_acceptance_prob(&Rat::zero(), 7, &rat(0, 1)).is_zero());
        assert!(threshold_acceptance_prob(&Rat::zero(), 7, &rat(-1, 1)).is_one());
        assert!(threshold_acceptance_prob(&rat(1, 2), 4, &rat(4, 1)).is_zero());
        // Pr[Bin(4, 1/2) > 2] = (4 + 1) / 16.
        assert_eq!(
            threshold_acceptance_prob(&rat(1, 2), 4, &rat(2, 1)),
            rat(5, 16)
        );
        // Pr[Bin(3, 1/3) > 1] = (C(3,2) 1^2 2 + C(3,3)) / 27 = 7/27.
        assert_eq!(
            threshold_acceptance_prob(&rat(1, 3), 3, &rat(1, 1)),
            rat(7, 27)
        );
    }

    #[test]
    fn tail_complement_is_exact() {
        let p = parse_rat("3/5").unwrap();
        let tau = rat(7, 2);
        let upper = threshold_acceptance_prob(&p, 9, &tau);
        let lower = threshold_failure_prob(&p, 9, &tau);
        assert!((upper + lower).is_one());
    }

    #[test]
    fn executed_repetitions_match_analytic_tail() {
        let caps = Caps::default();
        let x: Input = "1".parse().unwrap();
        // Per-repetition acceptance probability 1/2 from one tape bit.
        let behavior: VerifierFn = Arc::new(|io| {
            io.read_bit(0, 0, 0)?;
            let coin = io.rand_bit()?;
            Ok(VerifierAction::Finish(rat(i64::from(coin), 1)))
        });
        let spec = ProtocolSpec::new(
            "coin",
            1,
            vec![RoundSpec::Prover(vec![1])],
            1,
            1,
            true,
            behavior,
        )
        .unwrap();
        let arp = to_accept_reject(&spec, std::slice::from_ref(&x), &caps).unwrap();
        let amplified = AmplifiedProtocol {
            base: arp,
            rho: 5,
            tau: rat(5, 2),
            gamma_prime: rat(2, 1),
            n: 4,
            completeness: rat(1, 2),
        };
        let profile = only_profile(&spec, &x);
        let executed = amplified
            .acceptance_probability_exhaustive(&x, &profile, &caps)
            .unwrap();
        assert_eq!(executed, amplified.analytic_acceptance(&rat(1, 2)));
        // Pr[Bin(5, 1/2) > 5/2] = 1/2 by symmetry.
        assert_eq!(executed, rat(1, 2));
    }
}
