//! Configuration-driven experiment runner.
//!
//! Analyses run in a fixed order — build, audit, gap, decide, transform,
//! amplify — with an early abort when the audit flags a budget violation.
//! Module errors propagate to the caller, which maps them to process exit
//! codes.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::{
    Analysis, CheckerChoice, ExperimentConfig, LabeledInput, ProtocolKind, ReportFormat,
};
use crate::deciders::interval_decider;
use crate::protocol::{normalize_payments, resource_audit, ProtocolSpec};
use crate::rational::{ceil_log2, rat};
use crate::report::{
    AmplifySummary, AuditSummary, DecideRow, DecideSummary, GapConditionSummary, GapRowSummary,
    GapSummary, InputSummary, ProtocolSummary, RatField, Report, TransformSummary, ValidateRow,
    ValidateSummary,
};
use crate::strategy::optimal_profiles;
use crate::transforms::{
    amplify, certify_amplification, check_gap_condition, extract_completeness_soundness,
    round_payments_zero_one, to_accept_reject,
};
use crate::zoo::{
    build_communication_reduction, build_np_rip, build_oracle_query_rip, build_toy_constant_comm,
    ClassicalProofSystem, OracleMachine,
};
use crate::{Error, Result};

/// Builds the protocol the configuration selects, applying the
/// communication-reduction wrapper (after normalization if needed) when
/// requested.
pub fn build_protocol(config: &ExperimentConfig) -> Result<ProtocolSpec> {
    let checker = |choice: CheckerChoice| match choice {
        CheckerChoice::Perfect => ClassicalProofSystem::perfect_sat_checker(),
        CheckerChoice::Noisy => ClassicalProofSystem::noisy_sat_checker(),
    };
    let spec = match &config.kind {
        ProtocolKind::Np { checker: c } => build_np_rip(&checker(*c)),
        ProtocolKind::OracleParity { gamma, checker: c } => {
            let machine = OracleMachine::parity_of_satisfiable(*gamma)?;
            build_oracle_query_rip(&machine, &checker(*c))
        }
        ProtocolKind::ToyMajority { input_len } => build_toy_constant_comm(*input_len),
    };
    if config.wrap_communication {
        let base = if spec.normalized {
            spec
        } else {
            normalize_payments(&spec)
        };
        build_communication_reduction(&base)
    } else {
        Ok(spec)
    }
}

fn echo_with_seed(config: &ExperimentConfig) -> std::collections::BTreeMap<String, String> {
    let mut echo = config.echo.clone();
    echo.insert("output.seed".into(), config.seed.to_string());
    echo
}

fn protocol_summary(spec: &ProtocolSpec) -> ProtocolSummary {
    ProtocolSummary {
        name: spec.name.clone(),
        prover_count: spec.prover_count,
        rounds: spec.rounds.len(),
        randomness_len: spec.randomness_len,
        communication_budget: spec.communication_budget,
        normalized: spec.normalized,
        metadata: spec.metadata.clone(),
    }
}

fn input_summaries(spec: &ProtocolSpec, config: &ExperimentConfig) -> Result<Vec<InputSummary>> {
    config
        .inputs
        .iter()
        .map(|labeled| {
            let report = optimal_profiles(spec, &labeled.input, &config.caps)?;
            Ok(InputSummary {
                label: labeled.label.clone(),
                member: labeled.member,
                bits: labeled.input.to_string(),
                profile_count: report.payments.len().to_string(),
                optimum: RatField::of(&report.optimum),
                answer_bit: report.answer_bit,
                invalid_rip: report.invalid_rip,
                utility_gap: report.utility_gap.as_ref().map(RatField::of),
                argmax_count: report.argmax.len(),
            })
        })
        .collect()
}

/// Runs the configured analyses (or `analyses_override` when given) in the
/// fixed order and assembles the report. Deterministic given the
/// configuration, except for the timestamp field.
pub fn run_experiment(
    config: &ExperimentConfig,
    analyses_override: Option<&[Analysis]>,
) -> Result<Report> {
    let analyses = analyses_override.unwrap_or(&config.analyses);
    let requested = |a: Analysis| analyses.contains(&a);
    let spec = build_protocol(config)?;
    let caps = &config.caps;

    let mut report = Report {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        generated_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        notes: vec![
            "optima range over deterministic strategy profiles; randomized prover \
             strategies are out of scope"
                .to_string(),
        ],
        config_echo: echo_with_seed(config),
        protocol: protocol_summary(&spec),
        inputs: input_summaries(&spec, config)?,
        audit: None,
        gap: None,
        decide: None,
        transform: None,
        amplify: None,
        validate: None,
    };

    if requested(Analysis::Audit) {
        let mut rows = Vec::with_capacity(config.inputs.len());
        for labeled in &config.inputs {
            let audit = resource_audit(&spec, &labeled.input, caps)?;
            rows.push(AuditSummary {
                label: labeled.label.clone(),
                ok: audit.ok,
                violations: audit.violations.clone(),
                max_communication_bits: audit.max_communication_bits,
                rounds_used: audit.rounds_used,
                max_random_bits: audit.max_random_bits,
                runs_explored: audit.runs_explored,
            });
        }
        let failed: Vec<&AuditSummary> = rows.iter().filter(|r| !r.ok).collect();
        if !failed.is_empty() {
            let detail = failed
                .iter()
                .flat_map(|r| r.violations.iter().cloned())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::AnalysisFailed(format!("audit failed: {detail}")));
        }
        report.audit = Some(rows);
    }

    if requested(Analysis::Gap) {
        let gamma = config
            .gap_gamma
            .as_ref()
            .ok_or_else(|| Error::ConfigInvalid("gap analysis needs analysis.gap_gamma".into()))?;
        let rows = config
            .inputs
            .iter()
            .map(|labeled| {
                let gap = crate::strategy::utility_gap(&spec, &labeled.input, caps)?;
                let passes = gap.as_ref().map(|g| g > &gamma.recip()).unwrap_or(true);
                Ok(GapRowSummary {
                    label: labeled.label.clone(),
                    member: labeled.member,
                    gap: gap.as_ref().map(RatField::of),
                    passes,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let holds = rows.iter().all(|r| r.passes);
        report.gap = Some(GapSummary {
            gamma: RatField::of(gamma),
            holds,
            rows,
        });
    }

    if requested(Analysis::Decide) {
        let n_intervals = config.decider_intervals.ok_or_else(|| {
            Error::ConfigInvalid("decide analysis needs analysis.decider_intervals".into())
        })?;
        let mut rows = Vec::with_capacity(config.inputs.len());
        for labeled in &config.inputs {
            let run = interval_decider(&spec, &labeled.input, n_intervals, caps)?;
            let answer = crate::strategy::rational_answer(&spec, &labeled.input, caps)?;
            rows.push(DecideRow {
                label: labeled.label.clone(),
                i_star: run.i_star,
                accept: run.accept,
                rational_answer: answer,
                agree: run.accept == answer,
                homogeneous: run.i_star_homogeneous,
                query_count: run.queries.len(),
            });
        }
        let all_agree = rows.iter().all(|r| r.agree);
        report.decide = Some(DecideSummary {
            n_intervals,
            all_agree,
            rows,
        });
    }

    let needs_transform = requested(Analysis::Transform) || requested(Analysis::Amplify);
    if needs_transform {
        let gamma = config.transform_gamma.as_ref().ok_or_else(|| {
            Error::ConfigInvalid("transform analysis needs analysis.transform_gamma".into())
        })?;
        let members = config.members();
        let nonmembers = config.nonmembers();

        let normalized = if spec.normalized {
            spec.clone()
        } else {
            normalize_payments(&spec)
        };
        let condition = check_gap_condition(&normalized, &members, &nonmembers, gamma, caps)?;
        let rounded = round_payments_zero_one(&normalized, gamma)?;
        let probe: Vec<_> = config.inputs.iter().map(|l| l.input.clone()).collect();
        let mut arp = to_accept_reject(&rounded, &probe, caps)?;
        let (c, s) =
            extract_completeness_soundness(&mut arp, &members, &nonmembers, Some(gamma), caps)?;

        let extra_bits = 1 + ceil_log2(gamma) as usize;
        report.transform = Some(TransformSummary {
            gamma: RatField::of(gamma),
            rounding_grid: rounded
                .metadata
                .get("rounding_grid")
                .cloned()
                .unwrap_or_default(),
            extra_random_bits: extra_bits,
            gap_condition: GapConditionSummary {
                gamma: RatField::of(&condition.gamma),
                min_member_optimum: condition.min_member_optimum.as_ref().map(RatField::of),
                max_nonmember_optimum: condition.max_nonmember_optimum.as_ref().map(RatField::of),
                holds: condition.holds,
                vacuous: condition.vacuous,
            },
            completeness: RatField::of(&c),
            soundness: RatField::of(&s),
            extraction_threshold: RatField::of(&(&s + (rat(2, 1) * gamma).recip())),
        });

        if requested(Analysis::Amplify) {
            let gamma_prime = config.amplify_gamma_prime.as_ref().ok_or_else(|| {
                Error::ConfigInvalid("amplify analysis needs analysis.amplify_gamma_prime".into())
            })?;
            let n = config.amplify_n.ok_or_else(|| {
                Error::ConfigInvalid("amplify analysis needs analysis.amplify_n".into())
            })?;
            let amplified = amplify(&arp, &c, gamma_prime, n)?;
            let certificate = certify_amplification(&amplified, &c, &s);
            report.amplify = Some(AmplifySummary {
                completeness: RatField::of(&c),
                soundness: RatField::of(&s),
                gamma_prime: RatField::of(gamma_prime),
                n,
                rho: amplified.rho,
                tau: RatField::of(&amplified.tau),
                completeness_failure: RatField::of(&certificate.completeness_failure),
                soundness_acceptance: RatField::of(&certificate.soundness_acceptance),
                bound: RatField::of(&certificate.bound),
                meets_bound: certificate.meets_bound,
            });
        }
    }

    Ok(report)
}

/// Checks that the optimal answer bit matches the member/nonmember label on
/// every input, with no INVALID-RIP flags. An empty input set passes
/// vacuously.
pub fn validate_rip(config: &ExperimentConfig) -> Result<ValidateSummary> {
    let spec = build_protocol(config)?;
    let mut rows = Vec::with_capacity(config.inputs.len());
    for LabeledInput {
        label,
        input,
        member,
    } in &config.inputs
    {
        let report = optimal_profiles(&spec, input, &config.caps)?;
        let matches = report.answer_bit == Some(*member);
        rows.push(ValidateRow {
            label: label.clone(),
            member: *member,
            answer_bit: report.answer_bit,
            invalid_rip: report.invalid_rip,
            matches,
        });
    }
    let pass = rows.iter().all(|r| r.matches && !r.invalid_rip);
    Ok(ValidateSummary {
        vacuous: rows.is_empty(),
        pass,
        rows,
    })
}

/// Writes a report in the configured format.
pub fn write_report(report: &Report, path: &Path, format: ReportFormat) -> Result<()> {
    let body = match format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Csv => report.gap_csv(),
    };
    fs::write(path, body)?;
    Ok(())
}
