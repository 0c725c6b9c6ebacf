//! Interval-splitting decision machines cross-validated against protocol
//! semantics.
//!
//! The decider partitions `[0, 1]` into `N` intervals and asks, for each,
//! whether some strategy profile's exact expected payment lands there, and
//! whether one does with answer bit 1. All `2N` queries are generated before
//! any answer is consumed. It accepts exactly when the highest nonempty
//! interval contains a profile answering 1. For a protocol with a verified
//! utility gap above `1/N` this reproduces the rational answer bit.

use num_traits::One;

use crate::protocol::{Input, ProtocolSpec};
use crate::rational::Rat;
use crate::strategy::profile_payment_table;
use crate::{Caps, Error, Result};

/// One oracle question: is some profile's expected payment inside interval
/// `index` (1-based), optionally restricted to profiles answering 1?
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalQuery {
    pub index: usize,
    pub require_answer_one: bool,
}

/// Membership of a payment in interval `i` of the `N`-partition of `[0, 1]`:
/// `[(i-1)/N, i/N)` for `i < N`, closed `[(N-1)/N, 1]` for `i = N`, so every
/// payment in `[0, 1]` lands in exactly one interval. Payments outside
/// `[0, 1]` (penalty payments) land in none.
pub fn payment_in_interval(u: &Rat, index: usize, n_intervals: usize) -> bool {
    assert!(
        index >= 1 && index <= n_intervals,
        "interval index out of range"
    );
    let n = Rat::from_integer((n_intervals as u64).into());
    let lower = Rat::from_integer(((index - 1) as u64).into()) / &n;
    let upper = Rat::from_integer((index as u64).into()) / &n;
    if index == n_intervals {
        u >= &lower && u <= &Rat::one()
    } else {
        u >= &lower && u < &upper
    }
}

/// Answers one interval query by enumerating every profile and its exact
/// expected payment.
pub fn strategy_oracle(
    spec: &ProtocolSpec,
    x: &Input,
    query: IntervalQuery,
    n_intervals: usize,
    caps: &Caps,
) -> Result<bool> {
    if query.index < 1 || query.index > n_intervals {
        return Err(Error::InvalidParameter(format!(
            "interval index {} outside 1..={n_intervals}",
            query.index
        )));
    }
    let table = profile_payment_table(spec, x, caps)?;
    Ok(table.iter().any(|(u, answer)| {
        payment_in_interval(u, query.index, n_intervals) && (!query.require_answer_one || *answer)
    }))
}

/// Full record of one decider run.
#[derive(Debug, Clone)]
pub struct DeciderRun {
    pub n_intervals: usize,
    /// All `2N` queries, generated upfront (nonadaptive).
    pub queries: Vec<IntervalQuery>,
    /// Oracle answers, aligned with `queries`.
    pub answers: Vec<bool>,
    /// Highest nonempty interval, if any payment lies in `[0, 1]`.
    pub i_star: Option<usize>,
    pub accept: bool,
    /// Whether every profile in the top interval shares one answer bit.
    pub i_star_homogeneous: bool,
}

/// Runs the interval machine: all `2N` queries first, then the decision.
pub fn interval_decider(
    spec: &ProtocolSpec,
    x: &Input,
    n_intervals: usize,
    caps: &Caps,
) -> Result<DeciderRun> {
    if n_intervals == 0 {
        return Err(Error::InvalidParameter("need at least one interval".into()));
    }
    let queries: Vec<IntervalQuery> = (1..=n_intervals)
        .flat_map(|index| {
            [
                IntervalQuery {
                    index,
                    require_answer_one: false,
                },
                IntervalQuery {
                    index,
                    require_answer_one: true,
                },
            ]
        })
        .collect();

    let table = profile_payment_table(spec, x, caps)?;
    let answers: Vec<bool> = queries
        .iter()
        .map(|q| {
            table.iter().any(|(u, answer)| {
                payment_in_interval(u, q.index, n_intervals) && (!q.require_answer_one || *answer)
            })
        })
        .collect();

    let i_star = queries
        .iter()
        .zip(&answers)
        .filter(|(q, a)| !q.require_answer_one && **a)
        .map(|(q, _)| q.index)
        .max();

    let accept = match i_star {
        Some(top) => queries
            .iter()
            .zip(&answers)
            .find(|(q, _)| q.index == top && q.require_answer_one)
            .map(|(_, a)| *a)
            .unwrap_or(false),
        None => false,
    };

    let i_star_homogeneous = match i_star {
        Some(top) => {
            let bits: Vec<bool> = table
                .iter()
                .filter(|(u, _)| payment_in_interval(u, top, n_intervals))
                .map(|(_, answer)| *answer)
                .collect();
            bits.windows(2).all(|w| w[0] == w[1])
        }
        None => true,
    };

    Ok(DeciderRun {
        n_intervals,
        queries,
        answers,
        i_star,
        accept,
        i_star_homogeneous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::sat::CnfFormula;
    use crate::strategy::rational_answer;
    use crate::zoo::{build_np_rip, ClassicalProofSystem};

    fn phi1_input() -> Input {
        CnfFormula::from_clauses(2, &[vec![1, 2], vec![-1]])
            .unwrap()
            .to_input()
    }

    fn phi2_input() -> Input {
        CnfFormula::from_clauses(1, &[vec![1], vec![-1]])
            .unwrap()
            .to_input()
    }

    #[test]
    fn interval_partition_is_total_on_unit_interval() {
        let n = 4;
        for u in [
            rat(0, 1),
            rat(1, 4),
            rat(1, 3),
            rat(1, 2),
            rat(3, 4),
            rat(1, 1),
        ] {
            let count = (1..=n).filter(|i| payment_in_interval(&u, *i, n)).count();
            assert_eq!(count, 1, "payment {u} must land in exactly one interval");
        }
        // Penalty payments land nowhere.
        assert_eq!(
            (1..=n)
                .filter(|i| payment_in_interval(&rat(-1, 1), *i, n))
                .count(),
            0
        );
        // Boundary payments land in the interval closed from below.
        assert!(payment_in_interval(&rat(1, 2), 3, 4));
        assert!(!payment_in_interval(&rat(1, 2), 2, 4));
        assert!(payment_in_interval(&rat(1, 1), 4, 4));
    }

    #[test]
    fn oracle_answers_on_the_np_protocol() {
        let spec = build_np_rip(&ClassicalProofSystem::perfect_sat_checker());
        let caps = Caps::default();
        let x = phi1_input();
        // The optimum 1 lies in the top interval, with answer bit 1.
        assert!(strategy_oracle(
            &spec,
            &x,
            IntervalQuery {
                index: 4,
                require_answer_one: false
            },
            4,
            &caps
        )
        .unwrap());
        assert!(strategy_oracle(
            &spec,
            &x,
            IntervalQuery {
                index: 4,
                require_answer_one: true
            },
            4,
            &caps
        )
        .unwrap());
        // Interval 2 = [1/4, 1/2) holds no payment: support is {0, 1/2, 1}.
        assert!(!strategy_oracle(
            &spec,
            &x,
            IntervalQuery {
                index: 2,
                require_answer_one: false
            },
            4,
            &caps
        )
        .unwrap());
    }

    #[test]
    fn decider_agrees_with_rational_answer() {
        let spec = build_np_rip(&ClassicalProofSystem::perfect_sat_checker());
        let caps = Caps::default();

        let sat = phi1_input();
        let run = interval_decider(&spec, &sat, 4, &caps).unwrap();
        assert_eq!(run.queries.len(), 8);
        assert_eq!(run.i_star, Some(4));
        assert!(run.accept);
        assert!(run.i_star_homogeneous);
        assert_eq!(run.accept, rational_answer(&spec, &sat, &caps).unwrap());

        let unsat = phi2_input();
        let run = interval_decider(&spec, &unsat, 4, &caps).unwrap();
        // The optimum 1/2 sits in interval 3 with answer bit 0 only.
        assert_eq!(run.i_star, Some(3));
        assert!(!run.accept);
        assert!(run.i_star_homogeneous);
        assert_eq!(run.accept, rational_answer(&spec, &unsat, &caps).unwrap());
    }

    #[test]
    fn decider_matches_standalone_oracle_calls() {
        let spec = build_np_rip(&ClassicalProofSystem::perfect_sat_checker());
        let caps = Caps::default();
        let x = phi1_input();
        let run = interval_decider(&spec, &x, 6, &caps).unwrap();
        for (query, answer) in run.queries.iter().zip(&run.answers) {
            assert_eq!(
                strategy_oracle(&spec, &x, *query, 6, &caps).unwrap(),
                *answer
            );
        }
    }
}
