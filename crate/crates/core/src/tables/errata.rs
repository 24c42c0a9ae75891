//! Executable justification of the errata ledger.
//!
//! A correction is sound when the row fails its named check with the printed
//! text and passes it with the correction. An unverifiable erratum only has
//! to fail with the printed text.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::liealg::registry::{AlgebraRecord, ErratumKind, ErratumRecord, Registry};
use crate::symkernel::Rational;

use super::{algebra_bindings, default_values, verify_record, EntryReport, VerifyOptions};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErratumVerdict {
    pub id: String,
    pub algebra: String,
    pub check: String,
    pub printed_fails: bool,
    /// `None` for unverifiable errata.
    pub corrected_passes: Option<bool>,
    pub detail: String,
}

impl ErratumVerdict {
    pub fn sound(&self) -> bool {
        self.printed_fails && self.corrected_passes.unwrap_or(true)
    }
}

/// Report column judged by a check name.
fn column(check: &str) -> Option<&'static str> {
    Some(match check {
        "frame" | "fields" => "frame",
        "membership" | "parse" => "membership",
        "jacobi" | "closure" | "constants" => "structure",
        "identity" => "identity",
        "origin" => "origin",
        _ => return None,
    })
}

fn sub_id(field: &str) -> Option<&str> {
    field.strip_prefix("sub[")?.split_once(']').map(|(id, _)| id)
}

fn column_failure(report: &EntryReport, col: &str) -> Option<String> {
    if report.bindings.is_empty() {
        return Some(report.notes.first().cloned().unwrap_or_else(|| "no binding checked".into()));
    }
    report.bindings.iter().find_map(|b| {
        b.column(col)
            .filter(|c| c.failed())
            .map(|c| format!("{}: {}", b.binding, c.detail))
    })
}

/// Whether the case branches of a record select disjoint bindings.
pub fn cases_disjoint(rec: &AlgebraRecord, values: &[Rational]) -> Result<(), String> {
    let (sweep, _) = algebra_bindings(rec, values)?;
    let sets: Vec<_> = rec
        .cases
        .iter()
        .map(|c| c.bindings(&sweep))
        .collect::<Result<Vec<_>, _>>()?;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if let Some(env) = sets[i].iter().find(|e| sets[j].contains(e)) {
                return Err(format!(
                    "cases '{}' and '{}' both hold at {env}",
                    rec.cases[i].label, rec.cases[j].label
                ));
            }
        }
    }
    Ok(())
}

fn run(raw: &AlgebraRecord, skip: &[&str], sub: Option<&str>, seed: u64) -> EntryReport {
    let opts = VerifyOptions {
        trials: 1,
        resolve_unverifiable: false,
        values: default_values(),
    };
    let id = match sub {
        Some(s) => format!("{}/{s}", raw.name),
        None => raw.name.clone(),
    };
    verify_record(raw, raw.with_errata(skip), sub, &id, seed, &opts)
}

pub fn check_erratum(raw: &AlgebraRecord, e: &ErratumRecord, seed: u64) -> ErratumVerdict {
    let mut v = ErratumVerdict {
        id: e.id.clone(),
        algebra: raw.name.clone(),
        check: e.check.clone(),
        printed_fails: false,
        corrected_passes: None,
        detail: String::new(),
    };
    let skip = [e.id.as_str()];
    if e.check == "cases" {
        let printed = raw.with_errata(&skip).map_err(|x| x.to_string()).and_then(|r| cases_disjoint(&r, &default_values()));
        let corrected = raw.with_errata(&[]).map_err(|x| x.to_string()).and_then(|r| cases_disjoint(&r, &default_values()));
        v.printed_fails = printed.is_err();
        v.detail = printed.err().unwrap_or_default();
        if e.kind == ErratumKind::Correction {
            v.corrected_passes = Some(corrected.is_ok());
        }
        return v;
    }
    let Some(col) = column(&e.check) else {
        v.detail = format!("unknown check '{}'", e.check);
        return v;
    };
    let sub = sub_id(&e.field);
    let printed = if e.kind == ErratumKind::Correction {
        run(raw, &skip, sub, seed)
    } else {
        run(raw, &[], sub, seed)
    };
    match column_failure(&printed, col) {
        Some(d) => {
            v.printed_fails = true;
            v.detail = d;
        }
        None => v.detail = format!("printed text passes the {col} check"),
    }
    if e.kind == ErratumKind::Correction {
        let corrected = run(raw, &[], sub, seed);
        let f = column_failure(&corrected, col);
        if let Some(d) = &f {
            v.detail = format!("{}; corrected text still fails: {d}", v.detail);
        }
        v.corrected_passes = Some(f.is_none());
    }
    v
}

/// Verdicts for every erratum of the registry, in registry order.
pub fn check_all_errata(registry: &Registry, seed: u64) -> Vec<ErratumVerdict> {
    let jobs: Vec<(&AlgebraRecord, &ErratumRecord)> = registry
        .algebras()
        .iter()
        .flat_map(|a| a.errata.iter().map(move |e| (a, e)))
        .collect();
    jobs.par_iter().map(|(a, e)| check_erratum(a, e, seed)).collect()
}
