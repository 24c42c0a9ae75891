//! Registry file format: algebras, stored frames, claimed structures,
//! listed subalgebras and the errata ledger.
//!
//! The file is TOML with one `[[algebra]]` table per Lie algebra. Printed
//! table text is stored verbatim (transliterated to the expression grammar);
//! corrections never overwrite it but live in `[[algebra.errata]]` records
//! that are applied on demand.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ConstantEntry, JacobiReport, LieAlgebraSpec, LieError};
use crate::symkernel::{parse_rational, ParamEnv, Rational};

/// Built-in registry shipped with the crate.
pub const BUNDLED_REGISTRY: &str = include_str!("../../data/registry.toml");

/// Values swept for each free parameter when no explicit sweep is given.
pub const DEFAULT_SWEEP: [(i64, i64); 6] = [(-2, 1), (-1, 1), (-1, 2), (1, 2), (1, 1), (2, 1)];

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read registry {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("registry format error: {0}")]
    Format(String),
    #[error("algebra {algebra}: {message}")]
    Entry { algebra: String, message: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegistryFile {
    #[serde(default, rename = "algebra")]
    pub algebras: Vec<AlgebraRecord>,
}

/// A structure constant as written in the file: `[i, j, k, "expr"]` or
/// `"f^k_ij = expr"` / `"C_ij^k = expr"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstantSpec {
    Tuple(usize, usize, usize, String),
    Text(String),
}

impl ConstantSpec {
    pub fn entry(&self) -> Result<ConstantEntry, String> {
        match self {
            ConstantSpec::Tuple(i, j, k, e) => Ok(ConstantEntry {
                i: *i,
                j: *j,
                k: *k,
                expr: e.clone(),
            }),
            ConstantSpec::Text(t) => parse_constant_text(t),
        }
    }
}

/// Parses `f^k_ij = expr` or `C_ij^k = expr` (indices are single digits, or
/// comma separated).
fn parse_constant_text(t: &str) -> Result<ConstantEntry, String> {
    let (lhs, rhs) = t
        .split_once('=')
        .ok_or_else(|| format!("constant '{t}' lacks '='"))?;
    let lhs: String = lhs.chars().filter(|c| !c.is_whitespace() && *c != '{' && *c != '}').collect();
    let digits = |s: &str| -> Result<Vec<usize>, String> {
        let parts: Vec<&str> = if s.contains(',') {
            s.split(',').collect()
        } else {
            s.split("").filter(|p| !p.is_empty()).collect()
        };
        parts
            .iter()
            .map(|p| p.parse::<usize>().map_err(|_| format!("bad index '{p}' in '{t}'")))
            .collect()
    };
    let (upper, lower) = if let Some(rest) = lhs.strip_prefix("f^") {
        let (k, ij) = rest.split_once('_').ok_or_else(|| format!("bad constant '{t}'"))?;
        (digits(k)?, digits(ij)?)
    } else if let Some(rest) = lhs.strip_prefix("C_") {
        let (ij, k) = rest.split_once('^').ok_or_else(|| format!("bad constant '{t}'"))?;
        (digits(k)?, digits(ij)?)
    } else {
        return Err(format!("constant '{t}' must start with f^ or C_"));
    };
    match (upper.as_slice(), lower.as_slice()) {
        ([k], [i, j]) => Ok(ConstantEntry {
            i: *i,
            j: *j,
            k: *k,
            expr: rhs.trim().to_string(),
        }),
        _ => Err(format!("constant '{t}' needs one upper and two lower indices")),
    }
}

/// A piecewise branch of a claimed structure. The label is the branch
/// condition, e.g. `a = -1` or `b != -1/2, a != 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub label: String,
    pub eta: String,
}

/// One condition of a case label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    Equal(String, Rational),
    NotEqual(String, Rational),
}

impl Condition {
    pub fn holds(&self, env: &ParamEnv) -> bool {
        match self {
            Condition::Equal(p, v) => env.get(p) == Some(v),
            Condition::NotEqual(p, v) => env.get(p) != Some(v),
        }
    }
}

impl CaseRecord {
    /// Parses the label into conditions.
    pub fn conditions(&self) -> Result<Vec<Condition>, String> {
        self.label
            .split(',')
            .map(|part| {
                let (lhs, rhs, eq) = if let Some((l, r)) = part.split_once("!=") {
                    (l, r, false)
                } else if let Some((l, r)) = part.split_once('=') {
                    (l, r, true)
                } else {
                    return Err(format!("case condition '{part}' lacks '=' or '!='"));
                };
                let name = lhs.trim().to_string();
                let v = parse_rational(rhs.trim())
                    .ok_or_else(|| format!("case condition '{part}' needs an exact rational"))?;
                Ok(if eq { Condition::Equal(name, v) } else { Condition::NotEqual(name, v) })
            })
            .collect()
    }

    /// Bindings of this branch: each sweep binding with the equalities
    /// imposed, deduplicated, then filtered by the inequalities.
    pub fn bindings(&self, sweep: &[ParamEnv]) -> Result<Vec<ParamEnv>, String> {
        let conds = self.conditions()?;
        let mut out: Vec<ParamEnv> = Vec::new();
        for env in sweep {
            let mut e = env.clone();
            for c in &conds {
                if let Condition::Equal(p, v) = c {
                    e.bind(p, v.clone());
                }
            }
            if conds.iter().all(|c| c.holds(&e)) && !out.contains(&e) {
                out.push(e);
            }
        }
        Ok(out)
    }
}

/// A claimed component `eta^{label}` of an order-3 structure.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaComponent {
    pub label: String,
    pub expr: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubalgebraRecord {
    pub id: String,
    /// Classification label of the subalgebra, e.g. `A_{3,1}`.
    pub label: String,
    /// Basis vectors as coefficient expressions in `X_1..X_dim`.
    pub basis: Vec<Vec<String>>,
    /// Coordinates (1-based) carrying the subgroup chart, one per basis
    /// vector; by default the first unused nonzero coefficient of each vector.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<usize>,
    /// Basis as printed, for reports.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub printed_basis: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<BTreeMap<String, String>>,
    /// Claimed left-invariant fields, one row of components per basis vector.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eta: Vec<EtaComponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErratumKind {
    /// The printed text is replaced by `corrected`.
    Correction,
    /// No single-token correction reconciles the claim; it is reported as
    /// unverified instead of patched.
    Unverifiable,
}

/// One machine-readable correction to the printed tables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErratumRecord {
    pub id: String,
    /// Field path, e.g. `C[2,4,1]`, `frame[3]`, `eta`, `case[2].eta`,
    /// `sub[A_4_8.1].fields[1]`, `sub[A_4_8.1].eta[1].label`.
    pub field: String,
    pub printed: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected: Option<String>,
    pub kind: ErratumKind,
    /// Name of the executable check that separates printed and corrected text.
    pub check: String,
    pub note: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraRecord {
    pub name: String,
    pub label: String,
    /// Other ids accepted on lookup, e.g. `A_4_8`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude: Vec<String>,
    /// Explicit parameter bindings replacing the default sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<BTreeMap<String, String>>,
    #[serde(default)]
    pub constants: Vec<ConstantSpec>,
    /// Second-kind coordinate ordering (1-based basis indices), first factor first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<usize>>,
    /// Stored frame, row `i` holds the components of `X_i`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frame: Vec<Vec<String>>,
    /// Claimed top-order component `eta^{12..n}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<String>,
    #[serde(default, rename = "case", skip_serializing_if = "Vec::is_empty")]
    pub cases: Vec<CaseRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, rename = "subalgebra", skip_serializing_if = "Vec::is_empty")]
    pub subalgebras: Vec<SubalgebraRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errata: Vec<ErratumRecord>,
}

impl AlgebraRecord {
    pub fn constant_entries(&self) -> Result<Vec<ConstantEntry>, RegistryError> {
        self.constants
            .iter()
            .map(|c| c.entry())
            .collect::<Result<_, _>>()
            .map_err(|m| self.entry_error(m))
    }

    fn entry_error(&self, message: String) -> RegistryError {
        RegistryError::Entry {
            algebra: self.name.clone(),
            message,
        }
    }

    pub fn spec(&self) -> Result<LieAlgebraSpec, RegistryError> {
        Ok(LieAlgebraSpec {
            name: self.name.clone(),
            label: self.label.clone(),
            dim: self.dim,
            params: self.params.clone(),
            exclude: self.exclude.clone(),
            constants: self.constant_entries()?,
        })
    }

    pub fn subalgebra(&self, id: &str) -> Option<&SubalgebraRecord> {
        self.subalgebras.iter().find(|s| s.id == id)
    }

    pub fn erratum(&self, id: &str) -> Option<&ErratumRecord> {
        self.errata.iter().find(|e| e.id == id)
    }

    /// Reads the text stored at a field path.
    pub fn field(&self, path: &str) -> Result<Option<String>, RegistryError> {
        let p = FieldPath::parse(path).map_err(|m| self.entry_error(m))?;
        Ok(match p {
            FieldPath::Constant(i, j, k) => {
                let entries = self.constant_entries()?;
                Some(
                    entries
                        .iter()
                        .find(|c| (c.i, c.j, c.k) == (i, j, k))
                        .map_or_else(|| "0".to_string(), |c| c.expr.clone()),
                )
            }
            FieldPath::FrameRow(r) => self.frame.get(r).map(|row| row.join(", ")),
            FieldPath::Eta => self.eta.clone(),
            FieldPath::CaseEta(n) => self.cases.get(n).map(|c| c.eta.clone()),
            FieldPath::CaseLabel(n) => self.cases.get(n).map(|c| c.label.clone()),
            FieldPath::Sub(id, sf) => {
                let Some(s) = self.subalgebra(&id) else {
                    return Ok(None);
                };
                match sf {
                    SubField::Basis(r) => s.basis.get(r).map(|row| row.join(", ")),
                    SubField::Fields(r) => s.fields.get(r).map(|row| row.join(", ")),
                    SubField::EtaExpr(n) => s.eta.get(n).map(|c| c.expr.clone()),
                    SubField::EtaLabel(n) => s.eta.get(n).map(|c| c.label.clone()),
                    SubField::Label => Some(s.label.clone()),
                }
            }
        })
    }

    /// Replaces the text stored at a field path.
    pub fn set_field(&mut self, path: &str, value: &str) -> Result<(), RegistryError> {
        let p = FieldPath::parse(path).map_err(|m| self.entry_error(m))?;
        let missing = |me: &Self| me.entry_error(format!("field '{path}' does not exist"));
        let row = |v: &str| -> Vec<String> { v.split(',').map(|s| s.trim().to_string()).collect() };
        match p {
            FieldPath::Constant(i, j, k) => {
                let mut entries = self.constant_entries()?;
                entries.retain(|c| (c.i, c.j, c.k) != (i, j, k));
                if value.trim() != "0" {
                    entries.push(ConstantEntry {
                        i,
                        j,
                        k,
                        expr: value.trim().to_string(),
                    });
                }
                self.constants = entries
                    .into_iter()
                    .map(|c| ConstantSpec::Tuple(c.i, c.j, c.k, c.expr))
                    .collect();
            }
            FieldPath::FrameRow(r) => {
                if r >= self.frame.len() {
                    return Err(missing(self));
                }
                self.frame[r] = row(value);
            }
            FieldPath::Eta => self.eta = Some(value.to_string()),
            FieldPath::CaseEta(n) | FieldPath::CaseLabel(n) => {
                if n >= self.cases.len() {
                    return Err(missing(self));
                }
                if matches!(p, FieldPath::CaseEta(_)) {
                    self.cases[n].eta = value.to_string();
                } else {
                    self.cases[n].label = value.to_string();
                }
            }
            FieldPath::Sub(id, sf) => {
                let err = missing(self);
                let s = self.subalgebras.iter_mut().find(|s| s.id == id).ok_or(err)?;
                let ok = match sf {
                    SubField::Basis(r) => s.basis.get_mut(r).map(|x| *x = row(value)).is_some(),
                    SubField::Fields(r) => s.fields.get_mut(r).map(|x| *x = row(value)).is_some(),
                    SubField::EtaExpr(n) => s.eta.get_mut(n).map(|c| c.expr = value.to_string()).is_some(),
                    SubField::EtaLabel(n) => s.eta.get_mut(n).map(|c| c.label = value.to_string()).is_some(),
                    SubField::Label => {
                        s.label = value.to_string();
                        true
                    }
                };
                if !ok {
                    return Err(self.entry_error(format!("field '{path}' does not exist")));
                }
            }
        }
        Ok(())
    }

    /// Copy with every correction applied except those whose id is in `skip`.
    pub fn with_errata(&self, skip: &[&str]) -> Result<AlgebraRecord, RegistryError> {
        let mut out = self.clone();
        for e in &self.errata {
            if e.kind != ErratumKind::Correction || skip.contains(&e.id.as_str()) {
                continue;
            }
            if let Some(c) = &e.corrected {
                out.set_field(&e.field, c)?;
            }
        }
        Ok(out)
    }

    /// Errata touching a field path, or any field under a subalgebra prefix.
    pub fn errata_for(&self, prefix: &str) -> Vec<&ErratumRecord> {
        self.errata.iter().filter(|e| e.field.starts_with(prefix)).collect()
    }

    /// Checks that every erratum's `printed` text matches the stored text.
    pub fn validate_errata(&self) -> Result<(), RegistryError> {
        for e in &self.errata {
            let stored = self.field(&e.field)?;
            let stored = stored.ok_or_else(|| {
                self.entry_error(format!("erratum {} targets missing field {}", e.id, e.field))
            })?;
            if normalize_ws(&stored) != normalize_ws(&e.printed) {
                return Err(self.entry_error(format!(
                    "erratum {} printed text '{}' does not match stored '{}'",
                    e.id, e.printed, stored
                )));
            }
            if e.kind == ErratumKind::Correction && e.corrected.is_none() {
                return Err(self.entry_error(format!("erratum {} lacks corrected text", e.id)));
            }
        }
        Ok(())
    }

    /// Parameter bindings swept for this algebra, with skipped bindings and
    /// the exclusion that removed them.
    pub fn sweep_bindings(&self, spec: &LieAlgebraSpec) -> Result<Sweep, RegistryError> {
        let candidates: Vec<ParamEnv> = if !self.sweep.is_empty() {
            self.sweep
                .iter()
                .map(|b| binding_env(b))
                .collect::<Result<_, _>>()
                .map_err(|m| self.entry_error(m))?
        } else {
            product_sweep(&self.params)
        };
        let mut sweep = Sweep::default();
        for env in candidates {
            match spec.excluded_by(&env) {
                Ok(None) => sweep.bindings.push(env),
                Ok(Some(ex)) => sweep.skipped.push((env, ex)),
                Err(e) => return Err(self.entry_error(e.to_string())),
            }
        }
        Ok(sweep)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Sweep {
    pub bindings: Vec<ParamEnv>,
    /// Bindings dropped by an exclusion expression.
    pub skipped: Vec<(ParamEnv, String)>,
}

pub fn binding_env(b: &BTreeMap<String, String>) -> Result<ParamEnv, String> {
    let mut env = ParamEnv::new();
    for (k, v) in b {
        let r = parse_rational(v).ok_or_else(|| format!("binding {k}={v} is not an exact rational"))?;
        env.bind(k, r);
    }
    Ok(env)
}

fn default_values() -> Vec<Rational> {
    DEFAULT_SWEEP
        .iter()
        .map(|(n, d)| Rational::new((*n).into(), (*d).into()))
        .collect()
}

/// Full product of the default values over the named parameters.
pub fn product_sweep(params: &[String]) -> Vec<ParamEnv> {
    product_sweep_with(params, &default_values())
}

/// Full product of `values` over the named parameters.
pub fn product_sweep_with(params: &[String], values: &[Rational]) -> Vec<ParamEnv> {
    let mut out = vec![ParamEnv::new()];
    for p in params {
        let mut next = Vec::new();
        for env in &out {
            for v in values {
                next.push(env.clone().with(p, v.clone()));
            }
        }
        out = next;
    }
    out
}

/// Default values assigned jointly (zipped) to the named parameters.
pub fn zipped_sweep(params: &[String]) -> Vec<ParamEnv> {
    zipped_sweep_with(params, &default_values())
}

/// `values` assigned jointly to the named parameters.
pub fn zipped_sweep_with(params: &[String], values: &[Rational]) -> Vec<ParamEnv> {
    if params.is_empty() {
        return vec![ParamEnv::new()];
    }
    values
        .iter()
        .map(|v| {
            let mut env = ParamEnv::new();
            for p in params {
                env.bind(p, v.clone());
            }
            env
        })
        .collect()
}

fn normalize_ws(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum SubField {
    Basis(usize),
    Fields(usize),
    EtaExpr(usize),
    EtaLabel(usize),
    Label,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum FieldPath {
    Constant(usize, usize, usize),
    FrameRow(usize),
    Eta,
    CaseEta(usize),
    CaseLabel(usize),
    Sub(String, SubField),
}

/// Reads `name[n]` returning the 1-based index converted to 0-based.
fn indexed<'a>(s: &'a str, name: &str) -> Option<(usize, &'a str)> {
    let rest = s.strip_prefix(name)?.strip_prefix('[')?;
    let (n, tail) = rest.split_once(']')?;
    let n: usize = n.trim().parse().ok()?;
    (n >= 1).then_some((n - 1, tail))
}

impl FieldPath {
    fn parse(path: &str) -> Result<FieldPath, String> {
        let bad = || format!("unrecognized field path '{path}'");
        if let Some(rest) = path.strip_prefix("C[") {
            let inner = rest.strip_suffix(']').ok_or_else(bad)?;
            let idx: Vec<usize> = inner
                .split(',')
                .map(|p| p.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?;
            return match idx.as_slice() {
                [i, j, k] => Ok(FieldPath::Constant(*i, *j, *k)),
                _ => Err(bad()),
            };
        }
        if path == "eta" {
            return Ok(FieldPath::Eta);
        }
        if let Some((r, "")) = indexed(path, "frame") {
            return Ok(FieldPath::FrameRow(r));
        }
        if let Some((n, tail)) = indexed(path, "case") {
            return match tail {
                ".eta" => Ok(FieldPath::CaseEta(n)),
                ".label" => Ok(FieldPath::CaseLabel(n)),
                _ => Err(bad()),
            };
        }
        if let Some(rest) = path.strip_prefix("sub[") {
            let (id, tail) = rest.split_once(']').ok_or_else(bad)?;
            let tail = tail.strip_prefix('.').ok_or_else(bad)?;
            let sf = if tail == "label" {
                SubField::Label
            } else if let Some((r, "")) = indexed(tail, "basis") {
                SubField::Basis(r)
            } else if let Some((r, "")) = indexed(tail, "fields") {
                SubField::Fields(r)
            } else if let Some((n, t)) = indexed(tail, "eta") {
                match t {
                    "" => SubField::EtaExpr(n),
                    ".label" => SubField::EtaLabel(n),
                    _ => return Err(bad()),
                }
            } else {
                return Err(bad());
            };
            return Ok(FieldPath::Sub(id.to_string(), sf));
        }
        Err(bad())
    }
}

/// A loaded registry: raw records plus the algebras that passed the Jacobi gate.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    pub file: RegistryFile,
    /// Algebras rejected by the Jacobi gate even after errata, with the reason.
    pub rejected: Vec<(String, String)>,
}

impl fmt::Display for ErratumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErratumKind::Correction => write!(f, "correction"),
            ErratumKind::Unverifiable => write!(f, "unverifiable"),
        }
    }
}

impl Registry {
    pub fn parse(text: &str) -> Result<Registry, RegistryError> {
        let file: RegistryFile = toml::from_str(text).map_err(|e| RegistryError::Format(e.to_string()))?;
        Registry::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Registry, RegistryError> {
        let text = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Registry::parse(&text)
    }

    pub fn bundled() -> Registry {
        Registry::parse(BUNDLED_REGISTRY).expect("bundled registry is well formed")
    }

    pub fn from_file(file: RegistryFile) -> Result<Registry, RegistryError> {
        let mut seen = std::collections::BTreeSet::new();
        let mut rejected = Vec::new();
        for a in &file.algebras {
            if !seen.insert(a.name.clone()) {
                return Err(RegistryError::Format(format!("duplicate algebra name {}", a.name)));
            }
            a.constant_entries()?;
            a.validate_errata()?;
            if let Err(reason) = jacobi_gate(a) {
                rejected.push((a.name.clone(), reason));
            }
        }
        Ok(Registry { file, rejected })
    }

    pub fn to_toml(&self) -> Result<String, RegistryError> {
        toml::to_string(&self.file).map_err(|e| RegistryError::Format(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), RegistryError> {
        let text = self.to_toml()?;
        std::fs::write(path, text).map_err(|source| RegistryError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn algebras(&self) -> &[AlgebraRecord] {
        &self.file.algebras
    }

    /// Lookup by name, alias or label, ignoring case.
    pub fn find(&self, id: &str) -> Option<&AlgebraRecord> {
        self.get(id).or_else(|| {
            self.file.algebras.iter().find(|a| {
                std::iter::once(&a.name)
                    .chain(&a.aliases)
                    .chain(std::iter::once(&a.label))
                    .any(|n| n.eq_ignore_ascii_case(id))
            })
        })
    }

    pub fn get(&self, name: &str) -> Option<&AlgebraRecord> {
        self.file.algebras.iter().find(|a| a.name == name)
    }

    pub fn is_rejected(&self, name: &str) -> Option<&str> {
        self.rejected.iter().find(|(n, _)| n == name).map(|(_, r)| r.as_str())
    }
}

/// Runs the Jacobi check over the sweep with all errata applied.
pub fn jacobi_gate(a: &AlgebraRecord) -> Result<(), String> {
    let fixed = a.with_errata(&[]).map_err(|e| e.to_string())?;
    let spec = fixed.spec().map_err(|e| e.to_string())?;
    let sweep = fixed.sweep_bindings(&spec).map_err(|e| e.to_string())?;
    for env in &sweep.bindings {
        let sc = spec.constants_at(env).map_err(|e| e.to_string())?;
        if let JacobiReport::Violation { triple, residual } = sc.jacobi_check() {
            let pointer = a
                .errata
                .iter()
                .find(|e| e.field.starts_with("C["))
                .map_or(String::new(), |e| format!(" (see erratum {})", e.id));
            return Err(format!(
                "Jacobi violation at triple {:?} for [{}]: residual {}{}",
                triple, env, residual, pointer
            ));
        }
    }
    Ok(())
}

impl From<LieError> for RegistryError {
    fn from(e: LieError) -> Self {
        RegistryError::Format(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[[algebra]]
name = "A_3_8+A_1"
label = "A_{3,8}+A_1"
dim = 4
constants = ["f^2_13 = -2", "f^1_12 = 1", [2, 3, 3, "1"]]

[[algebra]]
name = "A_a_4_2"
label = "A^a_{4,2}"
dim = 4
params = ["a"]
exclude = ["a"]
constants = ["f^1_14 = a", "f^2_24 = 1", "f^2_34 = 1", "f^3_34 = 1"]
eta = "q4*(exp(-(a+2)*x4)-1)"

[[algebra.errata]]
id = "demo"
field = "C[1,4,1]"
printed = "a"
corrected = "a"
kind = "correction"
check = "jacobi"
note = "no-op"
"#;

    #[test]
    fn constants_in_both_spellings() {
        let r = Registry::parse(SAMPLE).unwrap();
        assert!(r.rejected.is_empty());
        let spec = r.get("A_3_8+A_1").unwrap().spec().unwrap();
        let sc = spec.constants_at(&ParamEnv::new()).unwrap();
        assert!(sc.jacobi_check().passed());
        assert_eq!(sc.get(0, 2, 1).to_string(), "-2");
    }

    #[test]
    fn round_trip_and_sweep() {
        let r = Registry::parse(SAMPLE).unwrap();
        let text = r.to_toml().unwrap();
        let again = Registry::parse(&text).unwrap();
        assert_eq!(r.file, again.file);
        let a = r.get("A_a_4_2").unwrap();
        let sweep = a.sweep_bindings(&a.spec().unwrap()).unwrap();
        assert_eq!(sweep.bindings.len(), 6);
        assert!(Registry::parse("").unwrap().algebras().is_empty());
    }

    #[test]
    fn field_paths() {
        let r = Registry::parse(SAMPLE).unwrap();
        let mut a = r.get("A_a_4_2").unwrap().clone();
        assert_eq!(a.field("C[2,4,2]").unwrap().as_deref(), Some("1"));
        assert_eq!(a.field("C[1,2,3]").unwrap().as_deref(), Some("0"));
        a.set_field("C[2,4,2]", "0").unwrap();
        assert_eq!(a.field("C[2,4,2]").unwrap().as_deref(), Some("0"));
        assert!(a.field("bogus").is_err());
    }
}
