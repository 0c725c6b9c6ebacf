//! Experiment configuration: a single TOML file selecting a protocol, a
//! labeled input set, the analyses to run, enumeration caps, and output.
//!
//! Formula paths resolve relative to the configuration file and are loaded
//! eagerly, so a missing or malformed file is a configuration error before
//! any analysis starts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::protocol::Input;
use crate::rational::{parse_rat, Rat};
use crate::sat::CnfFormula;
use crate::{Caps, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckerChoice {
    Perfect,
    Noisy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolKind {
    /// Single-round NP payment protocol over toy SAT.
    Np { checker: CheckerChoice },
    /// Parity-of-satisfiable oracle composition with `gamma` queries.
    OracleParity {
        gamma: usize,
        checker: CheckerChoice,
    },
    /// Constant-communication majority probe over fixed-length inputs.
    ToyMajority { input_len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Audit,
    Gap,
    Decide,
    Transform,
    Amplify,
}

impl Analysis {
    pub fn name(&self) -> &'static str {
        match self {
            Analysis::Audit => "audit",
            Analysis::Gap => "gap",
            Analysis::Decide => "decide",
            Analysis::Transform => "transform",
            Analysis::Amplify => "amplify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// One labeled input, already decoded.
#[derive(Debug, Clone)]
pub struct LabeledInput {
    pub label: String,
    pub input: Input,
    pub member: bool,
}

/// A fully validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ProtocolKind,
    pub wrap_communication: bool,
    pub inputs: Vec<LabeledInput>,
    pub analyses: Vec<Analysis>,
    pub gap_gamma: Option<Rat>,
    pub decider_intervals: Option<usize>,
    pub transform_gamma: Option<Rat>,
    pub amplify_gamma_prime: Option<Rat>,
    pub amplify_n: Option<u64>,
    pub caps: Caps,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
    pub seed: u64,
    /// Key/value echo of the parsed configuration, embedded in reports.
    pub echo: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn members(&self) -> Vec<Input> {
        self.inputs
            .iter()
            .filter(|l| l.member)
            .map(|l| l.input.clone())
            .collect()
    }

    pub fn nonmembers(&self) -> Vec<Input> {
        self.inputs
            .iter()
            .filter(|l| !l.member)
            .map(|l| l.input.clone())
            .collect()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    protocol: RawProtocol,
    #[serde(default)]
    inputs: RawInputs,
    #[serde(default)]
    analysis: RawAnalysis,
    #[serde(default)]
    caps: RawCaps,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    kind: String,
    checker: Option<String>,
    gamma: Option<usize>,
    input_len: Option<usize>,
    #[serde(default)]
    wrap_communication: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInputs {
    #[serde(default)]
    members: Vec<RawInputEntry>,
    #[serde(default)]
    nonmembers: Vec<RawInputEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawInputEntry {
    Single(String),
    Tuple(Vec<String>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    run: Option<Vec<String>>,
    gap_gamma: Option<String>,
    decider_intervals: Option<usize>,
    transform_gamma: Option<String>,
    amplify_gamma_prime: Option<String>,
    amplify_n: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCaps {
    max_profiles: Option<u128>,
    max_tapes: Option<u128>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<String>,
    format: Option<String>,
    seed: Option<u64>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::ConfigInvalid(msg.into())
}

/// Parses and validates a configuration file, loading every referenced
/// formula file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base_dir)
}

/// Parses a configuration from text, resolving paths against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| bad(format!("TOML parse: {e}")))?;

    let checker = match raw.protocol.checker.as_deref() {
        None | Some("perfect") => CheckerChoice::Perfect,
        Some("noisy") => CheckerChoice::Noisy,
        Some(other) => return Err(bad(format!("unknown checker {other:?}"))),
    };
    let kind = match raw.protocol.kind.as_str() {
        "np" => ProtocolKind::Np { checker },
        "oracle-parity" => {
            let gamma = raw
                .protocol
                .gamma
                .ok_or_else(|| bad("oracle-parity requires protocol.gamma"))?;
            if gamma == 0 {
                return Err(bad("protocol.gamma must be at least 1"));
            }
            ProtocolKind::OracleParity { gamma, checker }
        }
        "toy-majority" => {
            let input_len = raw.protocol.input_len.unwrap_or(3);
            if input_len == 0 {
                return Err(bad("protocol.input_len must be at least 1"));
            }
            ProtocolKind::ToyMajority { input_len }
        }
        other => return Err(bad(format!("unknown protocol kind {other:?}"))),
    };

    let mut inputs = Vec::new();
    for (entries, member) in [(&raw.inputs.members, true), (&raw.inputs.nonmembers, false)] {
        for entry in entries {
            inputs.push(load_input(entry, &kind, base_dir, member)?);
        }
    }

    let analyses = match &raw.analysis.run {
        None => vec![Analysis::Audit, Analysis::Gap],
        Some(names) => {
            let mut list = Vec::with_capacity(names.len());
            for name in names {
                list.push(match name.as_str() {
                    "audit" => Analysis::Audit,
                    "gap" => Analysis::Gap,
                    "decide" => Analysis::Decide,
                    "transform" => Analysis::Transform,
                    "amplify" => Analysis::Amplify,
                    other => return Err(bad(format!("unknown analysis {other:?}"))),
                });
            }
            list
        }
    };

    let parse_gamma = |field: &Option<String>, name: &str| -> Result<Option<Rat>> {
        match field {
            None => Ok(None),
            Some(text) => {
                let value = parse_rat(text)
                    .ok_or_else(|| bad(format!("{name} is not a rational: {text:?}")))?;
                if value <= Rat::from_integer(0.into()) {
                    return Err(bad(format!("{name} must be positive")));
                }
                Ok(Some(value))
            }
        }
    };
    let gap_gamma = parse_gamma(&raw.analysis.gap_gamma, "analysis.gap_gamma")?;
    let transform_gamma = parse_gamma(&raw.analysis.transform_gamma, "analysis.transform_gamma")?;
    let amplify_gamma_prime = parse_gamma(
        &raw.analysis.amplify_gamma_prime,
        "analysis.amplify_gamma_prime",
    )?;

    let caps = Caps {
        max_profiles: raw
            .caps
            .max_profiles
            .unwrap_or(Caps::default().max_profiles),
        max_tapes: raw.caps.max_tapes.unwrap_or(Caps::default().max_tapes),
    };
    if caps.max_profiles == 0 || caps.max_tapes == 0 {
        return Err(bad("caps must be positive"));
    }

    let format = match raw.output.format.as_deref() {
        None | Some("json") => ReportFormat::Json,
        Some("csv") => ReportFormat::Csv,
        Some(other) => return Err(bad(format!("unknown output format {other:?}"))),
    };

    let mut echo = BTreeMap::new();
    echo.insert("protocol.kind".into(), raw.protocol.kind.clone());
    if let Some(c) = &raw.protocol.checker {
        echo.insert("protocol.checker".into(), c.clone());
    }
    if let Some(g) = raw.protocol.gamma {
        echo.insert("protocol.gamma".into(), g.to_string());
    }
    if let Some(l) = raw.protocol.input_len {
        echo.insert("protocol.input_len".into(), l.to_string());
    }
    echo.insert(
        "protocol.wrap_communication".into(),
        raw.protocol.wrap_communication.to_string(),
    );
    echo.insert(
        "analysis.run".into(),
        analyses
            .iter()
            .map(Analysis::name)
            .collect::<Vec<_>>()
            .join(","),
    );
    for (key, value) in [
        ("analysis.gap_gamma", &raw.analysis.gap_gamma),
        ("analysis.transform_gamma", &raw.analysis.transform_gamma),
        (
            "analysis.amplify_gamma_prime",
            &raw.analysis.amplify_gamma_prime,
        ),
    ] {
        if let Some(v) = value {
            echo.insert(key.into(), v.clone());
        }
    }
    if let Some(n) = raw.analysis.decider_intervals {
        echo.insert("analysis.decider_intervals".into(), n.to_string());
    }
    if let Some(n) = raw.analysis.amplify_n {
        echo.insert("analysis.amplify_n".into(), n.to_string());
    }
    echo.insert("caps.max_profiles".into(), caps.max_profiles.to_string());
    echo.insert("caps.max_tapes".into(), caps.max_tapes.to_string());

    Ok(ExperimentConfig {
        kind,
        wrap_communication: raw.protocol.wrap_communication,
        inputs,
        analyses,
        gap_gamma,
        decider_intervals: raw.analysis.decider_intervals,
        transform_gamma,
        amplify_gamma_prime,
        amplify_n: raw.analysis.amplify_n,
        caps,
        out: raw.output.path.map(PathBuf::from),
        format,
        seed: raw.output.seed.unwrap_or(0),
        echo,
    })
}

fn load_input(
    entry: &RawInputEntry,
    kind: &ProtocolKind,
    base_dir: &Path,
    member: bool,
) -> Result<LabeledInput> {
    match kind {
        ProtocolKind::Np { .. } => {
            let RawInputEntry::Single(path) = entry else {
                return Err(bad("np inputs are single formula paths"));
            };
            let formula = load_formula(base_dir, path)?;
            Ok(LabeledInput {
                label: path.clone(),
                input: formula.to_input(),
                member,
            })
        }
        ProtocolKind::OracleParity { gamma, .. } => {
            let RawInputEntry::Tuple(paths) = entry else {
                return Err(bad("oracle-parity inputs are arrays of formula paths"));
            };
            if paths.len() != *gamma {
                return Err(bad(format!(
                    "oracle-parity tuples need exactly {gamma} formulas, got {}",
                    paths.len()
                )));
            }
            let formulas: Vec<CnfFormula> = paths
                .iter()
                .map(|p| load_formula(base_dir, p))
                .collect::<Result<_>>()?;
            Ok(LabeledInput {
                label: paths.join("+"),
                input: crate::sat::encode_tuple(&formulas),
                member,
            })
        }
        ProtocolKind::ToyMajority { input_len } => {
            let RawInputEntry::Single(bits) = entry else {
                return Err(bad("toy-majority inputs are bit strings"));
            };
            let input: Input = bits
                .parse()
                .map_err(|e| bad(format!("bad toy input {bits:?}: {e}")))?;
            if input.len() != *input_len {
                return Err(bad(format!(
                    "toy input {bits:?} has {} bits, protocol declares {input_len}",
                    input.len()
                )));
            }
            Ok(LabeledInput {
                label: bits.clone(),
                input,
                member,
            })
        }
    }
}

fn load_formula(base_dir: &Path, path: &str) -> Result<CnfFormula> {
    let resolved = base_dir.join(path);
    let text = fs::read_to_string(&resolved)
        .map_err(|e| bad(format!("cannot read formula {}: {e}", resolved.display())))?;
    CnfFormula::parse_dimacs(&text).map_err(|e| bad(format!("formula {}: {e}", resolved.display())))
}
