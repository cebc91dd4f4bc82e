//! Dialect audit of a compilation database.
//!
//! Input is the usual `compile_commands.json`: an array of objects with
//! `directory`, `file` and either `arguments` (an array) or `command` (one
//! shell-quoted string). Options pulled in from compiler configuration files
//! are not seen; the database is trusted to be fully expanded.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialect::{canonical_flags, encode_config, DialectConfig, Dimension};
use crate::include::normalize;
use crate::invocation::{parse_invocation, CompilerInvocation, Environment, InvocationError};
use crate::profile::CompilerProfile;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("compilation database is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("compilation database has no entries")]
    Empty,
    #[error("entry {index}: {message}")]
    Entry { index: usize, message: String },
    #[error("{file}: {source}")]
    Invocation {
        file: String,
        #[source]
        source: InvocationError,
    },
    #[error("severity policy: {0}")]
    Policy(String),
}

#[derive(Deserialize)]
struct RawEntry {
    directory: Option<String>,
    file: Option<String>,
    arguments: Option<Vec<String>>,
    command: Option<String>,
}

/// One compile step, arguments verbatim.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct CompileEntry {
    pub directory: String,
    pub file: String,
    pub arguments: Vec<String>,
}

impl CompileEntry {
    /// `file` made absolute against `directory`.
    pub fn path(&self) -> String {
        normalize(&self.file, &normalize(&self.directory, "/"))
    }
}

#[derive(Serialize, Clone, Debug)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EntryAnalysis<'p> {
    Audited { invocation: CompilerInvocation<'p> },
    /// The compiler is not one the profile describes.
    Unauditable { reason: String },
}

#[derive(Serialize, Clone, Debug)]
pub struct CapturedEntry<'p> {
    pub entry: CompileEntry,
    pub analysis: EntryAnalysis<'p>,
}

impl CapturedEntry<'_> {
    pub fn dialect(&self) -> Option<DialectConfig> {
        match &self.analysis {
            EntryAnalysis::Audited { invocation } => Some(invocation.dialect),
            EntryAnalysis::Unauditable { .. } => None,
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct BuildCapture<'p> {
    #[serde(skip)]
    pub profile: &'p CompilerProfile,
    pub entries: Vec<CapturedEntry<'p>>,
}

fn entry_error(index: usize, message: impl Into<String>) -> AuditError {
    AuditError::Entry {
        index,
        message: message.into(),
    }
}

fn parse_entry<'p>(
    index: usize,
    raw: RawEntry,
    profile: &'p CompilerProfile,
) -> Result<CapturedEntry<'p>, AuditError> {
    let directory = raw.directory.ok_or_else(|| entry_error(index, "missing field `directory`"))?;
    let file = raw.file.ok_or_else(|| entry_error(index, "missing field `file`"))?;
    let arguments = match (raw.arguments, raw.command) {
        (Some(args), _) => args,
        (None, Some(cmd)) => shlex::split(&cmd)
            .ok_or_else(|| entry_error(index, format!("cannot split command `{cmd}`: unbalanced quotes")))?,
        (None, None) => return Err(entry_error(index, "needs `arguments` or `command`")),
    };
    let entry = CompileEntry {
        directory,
        file,
        arguments,
    };
    let Some(program) = entry.arguments.first() else {
        return Err(entry_error(index, "empty command line"));
    };
    let analysis = if profile.covers_compiler(program) {
        let invocation = parse_invocation(&entry.arguments, &Environment::new(), profile).map_err(|source| {
            AuditError::Invocation {
                file: entry.file.clone(),
                source,
            }
        })?;
        EntryAnalysis::Audited { invocation }
    } else {
        EntryAnalysis::Unauditable {
            reason: format!("compiler `{program}` is not covered by profile `{}`", profile.name),
        }
    };
    Ok(CapturedEntry { entry, analysis })
}

/// Parses a compilation database. Entries are parsed in parallel; the
/// capture keeps database order and the error reported is the one of the
/// first failing entry.
pub fn load_build<'p>(document: &str, profile: &'p CompilerProfile) -> Result<BuildCapture<'p>, AuditError> {
    let raw: Vec<RawEntry> = serde_json::from_str(document)?;
    if raw.is_empty() {
        return Err(AuditError::Empty);
    }
    let results: Vec<Result<CapturedEntry<'p>, AuditError>> = raw
        .into_par_iter()
        .enumerate()
        .map(|(i, r)| parse_entry(i, r, profile))
        .collect();
    let entries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(BuildCapture { profile, entries })
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Low,
    Medium,
    High,
}

impl std::str::FromStr for Severity {
    type Err = String;
    fn from_str(s: &str) -> Result<Severity, String> {
        match s {
            "low" => Ok(Severity::Low),
            "medium" => Ok(Severity::Medium),
            "high" => Ok(Severity::High),
            _ => Err(format!("unknown severity `{s}` (expected low, medium or high)")),
        }
    }
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Severity::Low => "low",
            Severity::Medium => "medium",
            Severity::High => "high",
        })
    }
}

/// Severity of each kind of finding. By default layout dimensions are high,
/// the others and unauditable entries medium.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeverityPolicy {
    pub dimensions: BTreeMap<Dimension, Severity>,
    pub unauditable: Severity,
}

impl Default for SeverityPolicy {
    fn default() -> SeverityPolicy {
        let dimensions = Dimension::ALL
            .into_iter()
            .map(|d| {
                let s = if d.affects_layout() {
                    Severity::High
                } else {
                    Severity::Medium
                };
                (d, s)
            })
            .collect();
        SeverityPolicy {
            dimensions,
            unauditable: Severity::Medium,
        }
    }
}

impl SeverityPolicy {
    /// Reads overrides from a TOML table `[severity]` whose keys are
    /// dimension names or `unauditable`.
    pub fn from_toml(text: &str) -> Result<SeverityPolicy, AuditError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct File {
            #[serde(default)]
            severity: BTreeMap<String, Severity>,
        }
        let file: File = toml::from_str(text).map_err(|e| AuditError::Policy(e.to_string()))?;
        let mut policy = SeverityPolicy::default();
        for (key, sev) in file.severity {
            if key == "unauditable" {
                policy.unauditable = sev;
            } else {
                let dim: Dimension = key.parse().map_err(AuditError::Policy)?;
                policy.dimensions.insert(dim, sev);
            }
        }
        Ok(policy)
    }

    pub fn of(&self, dim: Dimension) -> Severity {
        self.dimensions[&dim]
    }
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct TuRow {
    pub file: String,
    pub value: u32,
    /// Canonical options for the derived dialect.
    pub flags: String,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct ValueGroup {
    pub value: String,
    pub files: Vec<String>,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Inconsistency {
    pub dimension: Dimension,
    pub severity: Severity,
    /// Files grouped by the value they have along `dimension`.
    pub partition: Vec<ValueGroup>,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub file: String,
    pub dimension: Dimension,
    pub tu_value: String,
    pub reference_value: String,
    pub severity: Severity,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct UnauditableEntry {
    pub file: String,
    pub reason: String,
    pub severity: Severity,
}

#[derive(Serialize, Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub per_tu: Vec<TuRow>,
    pub inconsistencies: Vec<Inconsistency>,
    pub mismatches: Vec<Mismatch>,
    pub unauditable: Vec<UnauditableEntry>,
}

impl AuditReport {
    /// Severities of all findings.
    pub fn severities(&self) -> impl Iterator<Item = Severity> + '_ {
        self.inconsistencies
            .iter()
            .map(|i| i.severity)
            .chain(self.mismatches.iter().map(|m| m.severity))
            .chain(self.unauditable.iter().map(|u| u.severity))
    }

    pub fn findings_at_or_above(&self, threshold: Severity) -> usize {
        self.severities().filter(|&s| s >= threshold).count()
    }
}

/// Per-TU dialects and one inconsistency for each dimension along which the
/// audited TUs differ.
pub fn audit(capture: &BuildCapture<'_>, policy: &SeverityPolicy) -> AuditReport {
    let mut report = AuditReport::default();
    let mut audited: Vec<(String, DialectConfig)> = Vec::new();
    for e in &capture.entries {
        let file = e.entry.path();
        match &e.analysis {
            EntryAnalysis::Audited { invocation } => {
                let config = invocation.dialect;
                let flags = canonical_flags(&config, capture.profile)
                    .map(|f| f.join(" "))
                    .unwrap_or_else(|_| format!("-std={}", invocation.std));
                report.per_tu.push(TuRow {
                    file: file.clone(),
                    value: encode_config(&config),
                    flags,
                });
                audited.push((file, config));
            }
            EntryAnalysis::Unauditable { reason } => report.unauditable.push(UnauditableEntry {
                file,
                reason: reason.clone(),
                severity: policy.unauditable,
            }),
        }
    }
    for dim in Dimension::ALL {
        let mut groups: BTreeMap<u32, ValueGroup> = BTreeMap::new();
        for (file, config) in &audited {
            groups
                .entry(config.coordinate(dim))
                .or_insert_with(|| ValueGroup {
                    value: config.describe(dim),
                    files: Vec::new(),
                })
                .files
                .push(file.clone());
        }
        if groups.len() >= 2 {
            report.inconsistencies.push(Inconsistency {
                dimension: dim,
                severity: policy.of(dim),
                partition: groups.into_values().collect(),
            });
        }
    }
    report
}

/// [`audit`] plus one mismatch row for each (TU, dimension) where the TU's
/// dialect differs from `reference`, the dialect an analysis tool assumes.
pub fn check_against(capture: &BuildCapture<'_>, reference: &DialectConfig, policy: &SeverityPolicy) -> AuditReport {
    let mut report = audit(capture, policy);
    for e in &capture.entries {
        let Some(config) = e.dialect() else { continue };
        for dim in config.differing_dimensions(reference) {
            report.mismatches.push(Mismatch {
                file: e.entry.path(),
                dimension: dim,
                tu_value: config.describe(dim),
                reference_value: reference.describe(dim),
                severity: policy.of(dim),
            });
        }
    }
    report
}
