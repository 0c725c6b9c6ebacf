use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use riplab::config::{load_config, Analysis, ExperimentConfig, ReportFormat};
use riplab::harness::{run_experiment, validate_rip, write_report};
use riplab::Caps;

/// Experiment runner for payment-based interactive proofs.
///
/// Every analysis is exact: expectations enumerate all random tapes,
/// optima enumerate all deterministic strategy profiles, and reports carry
/// each number as an exact `p/q` string.
#[derive(Parser)]
#[command(
    name = "riplab",
    version,
    about = "Exact analysis of payment-based (rational) interactive proof protocols",
    after_help = "CONFIG FILE (TOML):\n\
    \n\
    [protocol]              kind = \"np\" | \"oracle-parity\" | \"toy-majority\"\n\
    \x20                       checker = \"perfect\" (default) | \"noisy\"\n\
    \x20                       gamma = <query count>        (oracle-parity)\n\
    \x20                       input_len = <bits>           (toy-majority, default 3)\n\
    \x20                       wrap_communication = false   (two-prover wrapper)\n\
    [inputs]                members / nonmembers: formula paths (np),\n\
    \x20                       arrays of paths (oracle-parity), bit strings (toy)\n\
    [analysis]              run = [\"audit\", \"gap\"] (default); also\n\
    \x20                       \"decide\", \"transform\", \"amplify\";\n\
    \x20                       gap_gamma, transform_gamma, amplify_gamma_prime\n\
    \x20                       (rationals as \"p/q\"), decider_intervals, amplify_n\n\
    [caps]                  max_profiles, max_tapes (default 1048576 each)\n\
    [output]                path, format = \"json\" (default) | \"csv\", seed = 0\n\
    \n\
    EXIT CODES:\n\
    \x20   0  success\n\
    \x20   1  analysis failure (audit violation, INVALID-RIP, gap violation,\n\
    \x20      failed validation)\n\
    \x20   2  configuration error (unreadable file, bad TOML, missing formula)\n\
    \x20   3  enumeration cap exceeded"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Parser)]
struct CommonArgs {
    /// Path to the experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Report destination; overrides the config's output.path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on profiles and tapes alike; overrides the config's caps.
    #[arg(long)]
    caps: Option<u128>,
    /// Seed echoed into the report for sampled spot checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Report format; overrides the config's output.format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every analysis listed in the configuration.
    Run(CommonArgs),
    /// Measure utility gaps against analysis.gap_gamma.
    Gap(CommonArgs),
    /// Run the interval decider and compare with the rational answer.
    Decide(CommonArgs),
    /// Round payments to {0, 1} and extract completeness/soundness.
    Transform(CommonArgs),
    /// Build the threshold repetition and certify its binomial tails.
    Amplify(CommonArgs),
    /// Check that optimal answers match the member/nonmember labels.
    Validate(CommonArgs),
}

fn apply_overrides(config: &mut ExperimentConfig, args: &CommonArgs) {
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    if let Some(limit) = args.caps {
        config.caps = Caps::uniform(limit);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(format) = args.format {
        config.format = match format {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
        };
    }
}

fn emit(report: &riplab::report::Report, config: &ExperimentConfig) -> riplab::Result<()> {
    if let Some(path) = &config.out {
        write_report(report, path, config.format)?;
        println!("report written to {}", path.display());
    } else {
        match config.format {
            ReportFormat::Json => println!("{}", report.to_json()?),
            ReportFormat::Csv => print!("{}", report.gap_csv()),
        }
    }
    Ok(())
}

fn run(args: &CommonArgs, analyses: Option<&[Analysis]>) -> riplab::Result<()> {
    let mut config = load_config(&args.config)?;
    apply_overrides(&mut config, args);
    let report = run_experiment(&config, analyses)?;
    for input in &report.inputs {
        let answer = match input.answer_bit {
            Some(bit) => u8::from(bit).to_string(),
            None => "INVALID-RIP".to_string(),
        };
        println!(
            "input {}: optimum {} answer {} gap {}",
            input.label,
            input.optimum.exact,
            answer,
            input
                .utility_gap
                .as_ref()
                .map(|g| g.exact.clone())
                .unwrap_or_else(|| "undefined".into()),
        );
    }
    if let Some(gap) = &report.gap {
        println!(
            "gap > 1/{}: {}",
            gap.gamma.exact,
            if gap.holds { "HOLDS" } else { "FAILS" }
        );
    }
    if let Some(decide) = &report.decide {
        println!(
            "decider agreement: {}",
            if decide.all_agree { "PASS" } else { "FAIL" }
        );
    }
    if let Some(transform) = &report.transform {
        println!(
            "extracted completeness {} soundness {}",
            transform.completeness.exact, transform.soundness.exact
        );
    }
    if let Some(amplify) = &report.amplify {
        println!(
            "amplification rho {} tau {} tails {} / {} (bound {}): {}",
            amplify.rho,
            amplify.tau.exact,
            amplify.completeness_failure.dec,
            amplify.soundness_acceptance.dec,
            amplify.bound.exact,
            if amplify.meets_bound {
                "CERTIFIED"
            } else {
                "FAILED"
            }
        );
    }
    emit(&report, &config)?;
    let invalid_rip = report.inputs.iter().any(|i| i.invalid_rip);
    let gap_failed = report.gap.as_ref().is_some_and(|g| !g.holds);
    let decide_failed = report.decide.as_ref().is_some_and(|d| !d.all_agree);
    let amplify_failed = report.amplify.as_ref().is_some_and(|a| !a.meets_bound);
    if invalid_rip || gap_failed || decide_failed || amplify_failed {
        return Err(riplab::Error::AnalysisFailed(
            "one or more analyses reported a failing result".into(),
        ));
    }
    Ok(())
}

fn run_validate(args: &CommonArgs) -> riplab::Result<()> {
    let mut config = load_config(&args.config)?;
    apply_overrides(&mut config, args);
    let summary = validate_rip(&config)?;
    for row in &summary.rows {
        let answer = match row.answer_bit {
            Some(bit) => u8::from(bit).to_string(),
            None => "INVALID-RIP".to_string(),
        };
        println!(
            "{} {}: label {} answer {}",
            if row.matches { "PASS" } else { "FAIL" },
            row.label,
            u8::from(row.member),
            answer
        );
    }
    if summary.vacuous {
        println!("PASS (vacuous: no inputs)");
    } else if summary.pass {
        println!("PASS: all answers match their labels");
    } else {
        println!("FAIL: some answers contradict their labels");
        return Err(riplab::Error::AnalysisFailed("validation failed".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args, None),
        Command::Gap(args) => run(args, Some(&[Analysis::Gap])),
        Command::Decide(args) => run(args, Some(&[Analysis::Decide])),
        Command::Transform(args) => run(args, Some(&[Analysis::Transform])),
        Command::Amplify(args) => run(args, Some(&[Analysis::Amplify])),
        Command::Validate(args) => run_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
