//! Reproduction harness for the order-four and order-three tables.
//!
//! Every printed row is a claim under test. Table I rows are checked through
//! the frame, the multiplicativity equations and the fundamental identity;
//! Table II rows through subalgebra closure and the same equations on the
//! subgroup. Corrections come from the registry's errata ledger.

mod claims;
pub mod emit;
pub mod errata;
mod order3;
mod order4;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::liealg::registry::{product_sweep_with, zipped_sweep_with, AlgebraRecord, ErratumKind, Registry, SubalgebraRecord, DEFAULT_SWEEP};
use crate::invfields::Frame;
use crate::nambu::{solve_multiplicative, SolutionSpace};
use crate::symkernel::{parse_constant, ParamEnv, Rational};

pub(crate) use claims::split;
pub use emit::{emit_report, parse_report, ReportFormat};
pub use errata::{check_all_errata, check_erratum, ErratumVerdict};

/// Which table a row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TableId {
    I,
    II,
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableId::I => write!(f, "I"),
            TableId::II => write!(f, "II"),
        }
    }
}

/// One printed row: an algebra (Table I) or one of its subalgebras (Table II).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub id: String,
    pub table: TableId,
    pub algebra: String,
    pub subalgebra: Option<String>,
    pub label: String,
    /// Printed frame rows or subalgebra fields, as stored.
    pub claimed_fields: Vec<Vec<String>>,
    /// Printed components, `(label, expression)`.
    pub claimed_eta: Vec<(String, String)>,
    /// Piecewise branches `(condition, expression)`.
    pub param_cases: Vec<(String, String)>,
}

/// All rows of a registry, Table I first, in file order.
pub fn entries(registry: &Registry) -> Vec<TableEntry> {
    let mut out = Vec::new();
    for a in registry.algebras() {
        out.push(TableEntry {
            id: a.name.clone(),
            table: TableId::I,
            algebra: a.name.clone(),
            subalgebra: None,
            label: a.label.clone(),
            claimed_fields: a.frame.clone(),
            claimed_eta: a.eta.iter().map(|e| ("1234".to_string(), e.clone())).collect(),
            param_cases: a.cases.iter().map(|c| (c.label.clone(), c.eta.clone())).collect(),
        });
    }
    for a in registry.algebras() {
        for s in &a.subalgebras {
            out.push(TableEntry {
                id: sub_entry_id(a, s),
                table: TableId::II,
                algebra: a.name.clone(),
                subalgebra: Some(s.id.clone()),
                label: format!("{} < {}", s.label, a.label),
                claimed_fields: s.fields.clone(),
                claimed_eta: s.eta.iter().map(|c| (c.label.clone(), c.expr.clone())).collect(),
                param_cases: Vec::new(),
            });
        }
    }
    out
}

fn sub_entry_id(a: &AlgebraRecord, s: &SubalgebraRecord) -> String {
    format!("{}/{}", a.name, s.id)
}

/// Outcome of one check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The check fails and an erratum marks the printed claim as unverifiable.
    Unverified,
    /// The printed formula collapses at this binding; the solver result is reported.
    Degenerate,
    /// The solution space is `{0}` and the claim is the zero structure.
    Trivial,
    /// Nothing is printed for this check.
    NoClaim,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Unverified => "unverified",
            Status::Degenerate => "degenerate",
            Status::Trivial => "trivial",
            Status::NoClaim => "no-claim",
            Status::Skipped => "skipped",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub status: Status,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    pub fn new(status: Status, detail: impl Into<String>) -> Self {
        Self {
            status,
            detail: detail.into(),
        }
    }

    pub fn pass(detail: impl Into<String>) -> Self {
        Self::new(Status::Pass, detail)
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Self::new(Status::Fail, detail)
    }

    pub fn skipped(detail: impl Into<String>) -> Self {
        Self::new(Status::Skipped, detail)
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Results for one parameter binding (and branch) of a row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingReport {
    pub binding: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    /// Jacobi (Table I) or subalgebra closure with induced Jacobi (Table II).
    pub structure: Check,
    /// Stored frame (Table I) or printed subalgebra fields (Table II).
    pub frame: Check,
    pub membership: Check,
    pub identity: Check,
    pub origin: Check,
    /// General solution of the multiplicativity equations.
    pub solution: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BindingReport {
    fn new(env: &ParamEnv, case: Option<String>) -> Self {
        let skip = || Check::skipped("");
        Self {
            binding: binding_label(env),
            case,
            structure: skip(),
            frame: skip(),
            membership: skip(),
            identity: skip(),
            origin: skip(),
            solution: String::new(),
            notes: Vec::new(),
        }
    }

    pub fn checks(&self) -> [(&'static str, &Check); 5] {
        [
            ("structure", &self.structure),
            ("frame", &self.frame),
            ("membership", &self.membership),
            ("identity", &self.identity),
            ("origin", &self.origin),
        ]
    }

    pub fn failures(&self) -> usize {
        self.checks().iter().filter(|(_, c)| c.failed()).count()
    }

    pub fn column(&self, name: &str) -> Option<&Check> {
        self.checks().into_iter().find(|(n, _)| *n == name).map(|(_, c)| c)
    }
}

pub fn binding_label(env: &ParamEnv) -> String {
    if env.is_empty() {
        "-".into()
    } else {
        env.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryReport {
    pub id: String,
    pub table: TableId,
    pub algebra: String,
    pub label: String,
    /// Corrections applied to this row.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errata: Vec<String>,
    pub bindings: Vec<BindingReport>,
    /// Bindings dropped by an exclusion, with the exclusion.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl EntryReport {
    pub fn failures(&self) -> usize {
        self.bindings.iter().map(|b| b.failures()).sum::<usize>() + usize::from(self.bindings.is_empty())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSummary {
    pub table: String,
    pub entries: usize,
    pub bindings: usize,
    pub failures: usize,
    pub unverified: usize,
    pub degenerate: usize,
    pub trivial: usize,
    pub errata_applied: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub sweep: Vec<String>,
    pub entries: Vec<EntryReport>,
    /// Rows left out of the run, with the reason.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    pub summary: Vec<TableSummary>,
}

impl VerificationReport {
    /// Checks that failed without an erratum explaining them.
    pub fn unexplained_failures(&self) -> usize {
        self.entries.iter().map(|e| e.failures()).sum()
    }

    pub fn summary_for(&self, table: TableId) -> Option<&TableSummary> {
        self.summary.iter().find(|s| s.table == table.to_string())
    }
}

/// Knobs for a verification run.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: u64,
    /// Fundamental-identity trials per binding.
    pub trials: usize,
    /// Values swept for every free algebra parameter without an explicit sweep.
    pub values: Vec<Rational>,
    /// Restrict to these entry ids (or algebra names).
    pub only: Option<Vec<String>>,
    /// Restrict to these tables.
    pub tables: Option<Vec<TableId>>,
    /// Leave out rows with free parameters instead of sweeping them.
    pub skip_parameterized: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            trials: 2,
            values: default_values(),
            only: None,
            tables: None,
            skip_parameterized: false,
        }
    }
}

pub fn default_values() -> Vec<Rational> {
    DEFAULT_SWEEP
        .iter()
        .map(|(n, d)| Rational::new((*n).into(), (*d).into()))
        .collect()
}

/// Internal switches used by the errata checks.
#[derive(Clone, Debug)]
pub(crate) struct VerifyOptions {
    pub trials: usize,
    /// Turn failures covered by an unverifiable erratum into `Unverified`.
    pub resolve_unverifiable: bool,
    pub values: Vec<Rational>,
}

/// Parameter bindings for an algebra row, plus the skipped ones.
pub fn algebra_bindings(rec: &AlgebraRecord, values: &[Rational]) -> Result<(Vec<ParamEnv>, Vec<String>), String> {
    let spec = rec.spec().map_err(|e| e.to_string())?;
    let candidates = if rec.sweep.is_empty() {
        product_sweep_with(&rec.params, values)
    } else {
        rec.sweep
            .iter()
            .map(crate::liealg::registry::binding_env)
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut keep = Vec::new();
    let mut skipped = Vec::new();
    for env in candidates {
        match spec.excluded_by(&env) {
            Ok(None) => keep.push(env),
            Ok(Some(ex)) => skipped.push(format!("{} (excluded: {ex} = 0)", binding_label(&env))),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok((keep, skipped))
}

/// Bindings for a subalgebra row: the algebra sweep zipped with the
/// subalgebra's own sweep, cycling the shorter one.
pub fn sub_bindings(
    rec: &AlgebraRecord,
    sub: &SubalgebraRecord,
    values: &[Rational],
) -> Result<(Vec<ParamEnv>, Vec<String>), String> {
    let (alg, mut skipped) = algebra_bindings(rec, values)?;
    let own = if sub.sweep.is_empty() {
        zipped_sweep_with(&sub.params, values)
    } else {
        sub.sweep
            .iter()
            .map(crate::liealg::registry::binding_env)
            .collect::<Result<Vec<_>, _>>()?
    };
    if alg.is_empty() {
        return Ok((Vec::new(), skipped));
    }
    let n = alg.len().max(own.len());
    let mut out: Vec<ParamEnv> = Vec::new();
    'outer: for i in 0..n {
        let env = alg[i % alg.len()].merged(&own[i % own.len()]);
        for ex in &sub.exclude {
            match parse_constant(ex, &env) {
                Ok(v) if num_traits::Zero::is_zero(&v) => {
                    skipped.push(format!("{} (excluded: {ex} = 0)", binding_label(&env)));
                    continue 'outer;
                }
                Ok(_) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
        if !out.contains(&env) {
            out.push(env);
        }
    }
    Ok((out, skipped))
}

/// Stable per-row seed.
fn entry_seed(seed: u64, id: &str) -> u64 {
    // FNV-1a; any fixed mixing works, it only has to be independent of thread scheduling.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed
}

/// Correction errata that touch a row.
fn applied_errata(raw: &AlgebraRecord, sub: Option<&str>) -> Vec<String> {
    raw.errata
        .iter()
        .filter(|e| e.kind == ErratumKind::Correction)
        .filter(|e| match sub {
            None => !e.field.starts_with("sub["),
            Some(id) => e.field.starts_with("C[") || e.field.starts_with(&format!("sub[{id}].")),
        })
        .map(|e| e.id.clone())
        .collect()
}

/// Verifies one row over its bindings. `raw` is the record as stored; errata
/// are applied here.
pub fn verify_entry(raw: &AlgebraRecord, entry: &TableEntry, opts: &RunOptions) -> EntryReport {
    let vopts = VerifyOptions {
        trials: opts.trials,
        resolve_unverifiable: true,
        values: opts.values.clone(),
    };
    let seed = entry_seed(opts.seed, &entry.id);
    let rec = raw.with_errata(&[]);
    verify_record(raw, rec, entry.subalgebra.as_deref(), &entry.id, seed, &vopts)
}

pub(crate) fn verify_record(
    raw: &AlgebraRecord,
    rec: Result<AlgebraRecord, crate::liealg::registry::RegistryError>,
    sub: Option<&str>,
    id: &str,
    seed: u64,
    opts: &VerifyOptions,
) -> EntryReport {
    let mut report = EntryReport {
        id: id.to_string(),
        table: if sub.is_some() { TableId::II } else { TableId::I },
        algebra: raw.name.clone(),
        label: raw.label.clone(),
        errata: applied_errata(raw, sub),
        bindings: Vec::new(),
        skipped: Vec::new(),
        notes: Vec::new(),
    };
    let rec = match rec {
        Ok(r) => r,
        Err(e) => {
            report.notes.push(format!("errata cannot be applied: {e}"));
            return report;
        }
    };
    match sub {
        None => order4::verify(raw, &rec, seed, opts, &mut report),
        Some(sid) => match rec.subalgebra(sid) {
            Some(s) => {
                report.label = format!("{} < {}", s.label, rec.label);
                order3::verify(raw, &rec, s, seed, opts, &mut report)
            }
            None => report.notes.push(format!("no subalgebra '{sid}'")),
        },
    }
    report
}

/// Top-order solution space of one algebra at one binding.
#[derive(Clone, Debug)]
pub struct TopSolution {
    pub frame: Frame,
    pub space: SolutionSpace,
    /// How the frame was obtained.
    pub notes: Vec<String>,
}

/// Solves the top-order equations at `env`, on the stored frame when it
/// reproduces the brackets and on a derived one otherwise. Errata are applied.
pub fn solve_top(raw: &AlgebraRecord, env: &ParamEnv) -> Result<TopSolution, String> {
    let rec = raw.with_errata(&[]).map_err(|e| e.to_string())?;
    let spec = rec.spec().map_err(|e| e.to_string())?;
    if let Some(ex) = spec.excluded_by(env).map_err(|e| e.to_string())? {
        return Err(format!("excluded binding: {ex} = 0"));
    }
    let sc = spec.constants_at(env).map_err(|e| e.to_string())?;
    let (_, frame, notes) = order4::working_frame(&rec, &sc, env);
    let frame = frame.ok_or("no frame reproduces the brackets")?;
    let claim = rec.eta.as_deref().and_then(|s| claims::split(s, env).ok());
    let problem = order4::top_problem(&frame, &sc, claim.as_ref());
    let space = solve_multiplicative(&problem).map_err(|e| e.to_string())?;
    order4::solver_sound(&problem, &space)?;
    Ok(TopSolution { frame, space, notes })
}

/// Verifies every row of the registry. Rows run in parallel; the report is
/// assembled in entry order, so it is identical for any thread count.
pub fn run_all(registry: &Registry, opts: &RunOptions) -> VerificationReport {
    let all = entries(registry);
    let mut skipped = Vec::new();
    let selected: Vec<&TableEntry> = all
        .iter()
        .filter(|e| match &opts.only {
            None => true,
            Some(names) => names.iter().any(|n| *n == e.id || *n == e.algebra),
        })
        .filter(|e| opts.tables.as_ref().map_or(true, |t| t.contains(&e.table)))
        .filter(|e| {
            if !opts.skip_parameterized {
                return true;
            }
            let params = registry.get(&e.algebra).map_or(Vec::new(), |a| free_params(a, e.subalgebra.as_deref()));
            if params.is_empty() {
                return true;
            }
            skipped.push(format!("{} (parameters {})", e.id, params.join(", ")));
            false
        })
        .collect();
    let reports: Vec<EntryReport> = selected
        .par_iter()
        .map(|e| {
            let raw = registry.get(&e.algebra).expect("entry algebra exists");
            let mut r = verify_entry(raw, e, opts);
            if let Some(reason) = registry.is_rejected(&e.algebra) {
                r.notes.push(format!("rejected by the Jacobi gate: {reason}"));
            }
            r
        })
        .collect();
    let summary = [TableId::I, TableId::II]
        .iter()
        .map(|t| summarize(*t, &reports))
        .collect();
    VerificationReport {
        seed: opts.seed,
        sweep: opts.values.iter().map(crate::symkernel::format_rational).collect(),
        entries: reports,
        skipped,
        summary,
    }
}

/// Parameters a row is swept over: the algebra's and the subalgebra's own.
fn free_params(a: &AlgebraRecord, sub: Option<&str>) -> Vec<String> {
    let mut p = a.params.clone();
    if let Some(s) = sub.and_then(|id| a.subalgebra(id)) {
        p.extend(s.params.iter().filter(|n| !a.params.contains(n)).cloned());
    }
    p
}

fn summarize(table: TableId, reports: &[EntryReport]) -> TableSummary {
    let mut s = TableSummary {
        table: table.to_string(),
        ..Default::default()
    };
    for r in reports.iter().filter(|r| r.table == table) {
        s.entries += 1;
        s.bindings += r.bindings.len();
        s.failures += r.failures();
        s.errata_applied += r.errata.len();
        for b in &r.bindings {
            for (_, c) in b.checks() {
                match c.status {
                    Status::Unverified => s.unverified += 1,
                    Status::Degenerate => s.degenerate += 1,
                    Status::Trivial => s.trivial += 1,
                    _ => {}
                }
            }
        }
    }
    s
}

/// Turns a failed check into `Unverified` when an unverifiable erratum with
/// the given check name covers one of the fields.
pub(crate) fn resolve(
    check: Check,
    raw: &AlgebraRecord,
    names: &[&str],
    field: impl Fn(&str) -> bool,
    opts: &VerifyOptions,
) -> Check {
    if check.status != Status::Fail || !opts.resolve_unverifiable {
        return check;
    }
    match raw
        .errata
        .iter()
        .find(|e| e.kind == ErratumKind::Unverifiable && names.contains(&e.check.as_str()) && field(&e.field))
    {
        Some(e) => Check::new(Status::Unverified, format!("erratum {}: {}", e.id, check.detail)),
        None => check,
    }
}
