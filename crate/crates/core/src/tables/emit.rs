//! Report serialization: pretty JSON, or an aligned plain-text listing.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{Status, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            other => Err(format!("unknown report format '{other}' (json|text)")),
        }
    }
}

pub fn emit_report(report: &VerificationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => text(report),
    }
}

pub fn parse_report(json: &str) -> Result<VerificationReport, serde_json::Error> {
    serde_json::from_str(json)
}

fn text(report: &VerificationReport) -> String {
    let mut out = String::new();
    let bw = report
        .entries
        .iter()
        .flat_map(|e| e.bindings.iter().map(|b| b.binding.len() + b.case.as_ref().map_or(0, |c| c.len() + 3)))
        .max()
        .unwrap_or(1);
    for e in &report.entries {
        let _ = write!(out, "[{}] {}  {}", e.table, e.id, e.label);
        if !e.errata.is_empty() {
            let _ = write!(out, "  errata: {}", e.errata.join(", "));
        }
        out.push('\n');
        for n in &e.notes {
            let _ = writeln!(out, "    note: {n}");
        }
        for b in &e.bindings {
            let name = match &b.case {
                Some(c) => format!("{} [{c}]", b.binding),
                None => b.binding.clone(),
            };
            let cols: Vec<String> = b.checks().iter().map(|(n, c)| format!("{n}={}", c.status)).collect();
            let _ = writeln!(out, "  {name:<bw$}  {}  {}", cols.join(" "), b.solution);
            for (n, c) in b.checks() {
                if !matches!(c.status, Status::Pass | Status::Skipped | Status::NoClaim) && !c.detail.is_empty() {
                    let _ = writeln!(out, "    {n}: {}", c.detail);
                }
            }
        }
        if !e.skipped.is_empty() {
            let _ = writeln!(out, "  skipped: {}", e.skipped.join("; "));
        }
    }
    if !report.skipped.is_empty() {
        let _ = writeln!(out, "skipped: {}", report.skipped.join("; "));
    }
    out.push('\n');
    for s in &report.summary {
        let _ = writeln!(
            out,
            "Table {:<2} entries={} bindings={} failures={} unverified={} degenerate={} trivial={} errata={}",
            s.table, s.entries, s.bindings, s.failures, s.unverified, s.degenerate, s.trivial, s.errata_applied
        );
    }
    out
}
