//! Machine-readable experiment reports.
//!
//! Every numeric field carries the exact rational as a `"p/q"` string next
//! to a decimal rendering; no stage of report generation introduces
//! floating point into a rational value. Reports serialize to JSON and the
//! gap table additionally exports as CSV.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::rational::{rat_decimal, rat_string, Rat};
use crate::{Error, Result};

/// An exact rational with a decimal rendering for human readers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatField {
    pub exact: String,
    pub dec: String,
}

impl RatField {
    pub fn of(value: &Rat) -> Self {
        RatField {
            exact: rat_string(value),
            dec: rat_decimal(value, 12),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub name: String,
    pub prover_count: usize,
    pub rounds: usize,
    pub randomness_len: usize,
    pub communication_budget: usize,
    pub normalized: bool,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSummary {
    pub label: String,
    pub member: bool,
    pub bits: String,
    pub profile_count: String,
    pub optimum: RatField,
    pub answer_bit: Option<bool>,
    pub invalid_rip: bool,
    pub utility_gap: Option<RatField>,
    pub argmax_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub label: String,
    pub ok: bool,
    pub violations: Vec<String>,
    pub max_communication_bits: usize,
    pub rounds_used: usize,
    pub max_random_bits: usize,
    pub runs_explored: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRowSummary {
    pub label: String,
    pub member: bool,
    pub gap: Option<RatField>,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapSummary {
    pub gamma: RatField,
    pub holds: bool,
    pub rows: Vec<GapRowSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideRow {
    pub label: String,
    pub i_star: Option<usize>,
    pub accept: bool,
    pub rational_answer: bool,
    pub agree: bool,
    pub homogeneous: bool,
    pub query_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideSummary {
    pub n_intervals: usize,
    pub all_agree: bool,
    pub rows: Vec<DecideRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapConditionSummary {
    pub gamma: RatField,
    pub min_member_optimum: Option<RatField>,
    pub max_nonmember_optimum: Option<RatField>,
    pub holds: bool,
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformSummary {
    /// Gap parameter fed to the rounding stage.
    pub gamma: RatField,
    /// Rounding grid size `G = 2^(1 + ceil(log2 gamma))`.
    pub rounding_grid: String,
    /// Extra tape bits appended by the rounding stage.
    pub extra_random_bits: usize,
    /// Separation of optimal payments, measured before rounding.
    pub gap_condition: GapConditionSummary,
    /// Completeness extracted from the rounded accept/reject protocol.
    pub completeness: RatField,
    /// Soundness extracted from the rounded accept/reject protocol.
    pub soundness: RatField,
    /// The separation the extraction asserted: `c > s + 1/(2 gamma)`.
    pub extraction_threshold: RatField,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmplifySummary {
    pub completeness: RatField,
    pub soundness: RatField,
    pub gamma_prime: RatField,
    pub n: u64,
    pub rho: u64,
    pub tau: RatField,
    pub completeness_failure: RatField,
    pub soundness_acceptance: RatField,
    pub bound: RatField,
    pub meets_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateRow {
    pub label: String,
    pub member: bool,
    pub answer_bit: Option<bool>,
    pub invalid_rip: bool,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateSummary {
    pub pass: bool,
    pub vacuous: bool,
    pub rows: Vec<ValidateRow>,
}

/// The full experiment report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    /// Wall-clock stamp; the only field allowed to differ between reruns of
    /// an identical configuration.
    pub generated_unix: u64,
    /// Standing caveats about what the analyses cover.
    pub notes: Vec<String>,
    pub config_echo: BTreeMap<String, String>,
    pub protocol: ProtocolSummary,
    pub inputs: Vec<InputSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub audit: Option<Vec<AuditSummary>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gap: Option<GapSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decide: Option<DecideSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub transform: Option<TransformSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amplify: Option<AmplifySummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub validate: Option<ValidateSummary>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// The gap table as CSV, one row per input.
    pub fn gap_csv(&self) -> String {
        let mut out = String::from("label,member,gap_exact,gap_dec,passes\n");
        if let Some(gap) = &self.gap {
            for row in &gap.rows {
                let (exact, dec) = row
                    .gap
                    .as_ref()
                    .map(|g| (g.exact.clone(), g.dec.clone()))
                    .unwrap_or_else(|| ("undefined".into(), "undefined".into()));
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    csv_escape(&row.label),
                    row.member,
                    exact,
                    dec,
                    row.passes
                ));
            }
        }
        out
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
