//! Table II rows: order-three structures from three-dimensional subalgebras.
//!
//! The subgroup frame is derived from the induced constants in a chart
//! `y_1..y_3`, and `y_m` is identified with the coordinate `x^{lead(m)}`,
//! the first free axis along which the basis vector `B_m` has a nonzero
//! coefficient. The embedded fields are `Y_a = V_a^m(x_lead) B_m^i d_i` and
//! the components of `f Y_1 ^ Y_2 ^ Y_3` are `f det(V) minor_B(i, j, k)`.

use num_traits::Zero;

use crate::invfields::{all_orderings, derive_frame, fraction_bracket, DeriveOptions, Frame, VectorField};
use crate::liealg::registry::{AlgebraRecord, SubalgebraRecord};
use crate::liealg::{AbstractVector, ClosureReport, JacobiReport, StructureConstants};
use crate::nambu::{
    combinations, default_ansatz, fundamental_identity_check, solve_multiplicative, wedge, FiReport,
    MultiplicativityProblem, Multivector, SolutionSpace,
};
use crate::symkernel::linalg::Matrix;
use crate::symkernel::{parse_fraction, ExpPoly, Fraction, GaussianRational, ParamEnv, Rational, MAX_AXES};

use super::claims::{split, ClaimParts};
use super::order4::{dependent_parts, describe, part_name, solver_sound};
use super::{resolve, sub_bindings, BindingReport, Check, EntryReport, Status, VerifyOptions};

pub(super) fn verify(
    raw: &AlgebraRecord,
    rec: &AlgebraRecord,
    sub: &SubalgebraRecord,
    seed: u64,
    opts: &VerifyOptions,
    report: &mut EntryReport,
) {
    let spec = match rec.spec() {
        Ok(s) => s,
        Err(e) => return report.notes.push(e.to_string()),
    };
    let (bindings, skipped) = match sub_bindings(rec, sub, &opts.values) {
        Ok(b) => b,
        Err(e) => return report.notes.push(e),
    };
    report.skipped = skipped;
    if let Some(n) = &sub.note {
        report.notes.push(n.clone());
    }
    for (i, env) in bindings.iter().enumerate() {
        let b = match spec.constants_at(env) {
            Ok(sc) => check_binding(raw, sub, &sc, env, seed.wrapping_add(i as u64), opts),
            Err(e) => {
                let mut b = BindingReport::new(env, None);
                b.structure = Check::fail(e.to_string());
                b
            }
        };
        report.bindings.push(b);
    }
}

/// 0-based chart axes: explicit, or for each basis vector the first unused
/// axis with coefficient 1, else the first unused nonzero one.
pub(crate) fn lead_axes(sub: &SubalgebraRecord, basis: &[AbstractVector]) -> Result<Vec<usize>, String> {
    if !sub.axes.is_empty() {
        if sub.axes.len() != basis.len() || sub.axes.iter().any(|&a| a == 0 || a > basis[0].dim()) {
            return Err(format!("axes {:?} do not fit the basis", sub.axes));
        }
        return Ok(sub.axes.iter().map(|a| a - 1).collect());
    }
    let mut used: Vec<usize> = Vec::new();
    for b in basis {
        let free = |i: &usize| !b.0[*i].is_zero() && !used.contains(i);
        let unit = (0..b.dim()).find(|i| free(i) && b.0[*i] == Rational::from_integer(1.into()));
        match unit.or_else(|| (0..b.dim()).find(free)) {
            Some(i) => used.push(i),
            None => return Err(format!("no free axis for basis vector {b}")),
        }
    }
    Ok(used)
}

/// The subgroup frame for one factor ordering, in the 4D chart.
struct Embedding {
    ordering: Vec<usize>,
    /// `V_a^m d_{lead(m)}`: the chart fields themselves.
    chart: Frame,
    /// `V_a^m B_m^i d_i`, with the chart's denominators.
    embedded: Frame,
    /// Determinant of the numerator rows of `V`.
    v_det: ExpPoly,
}

fn embed(sc3: &StructureConstants, chart: &ChartMap, ordering: &[usize]) -> Option<Embedding> {
    let opts = DeriveOptions {
        ordering: Some(ordering.to_vec()),
        allow_denominators: true,
    };
    let v = derive_frame(sc3, &opts).ok()?;
    let basis = &chart.basis;
    let dim = basis[0].dim();
    let to_x = |f: &ExpPoly| chart.pull(f);
    let mut chart_rows = Vec::new();
    let mut emb_rows = Vec::new();
    for row in &v.rows {
        let comps: Vec<ExpPoly> = row.components.iter().map(to_x).collect();
        let mut ch = vec![ExpPoly::zero(); dim];
        let mut emb = vec![ExpPoly::zero(); dim];
        for (m, c) in comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // d/dy_m = sum_j B_m^{lead(j)} d/dx^{lead(j)} on the chart.
            for (i, bi) in basis[m].0.iter().enumerate() {
                if bi.is_zero() {
                    continue;
                }
                let term = c.scale(&GaussianRational::real(bi.clone()));
                emb[i] = emb[i].add(&term);
                if chart.leads.contains(&i) {
                    ch[i] = ch[i].add(&term);
                }
            }
        }
        chart_rows.push(VectorField::new(ch));
        emb_rows.push(VectorField::new(emb));
    }
    let dens: Vec<ExpPoly> = v.dens.iter().map(to_x).collect();
    Some(Embedding {
        ordering: ordering.to_vec(),
        chart: Frame {
            rows: chart_rows,
            dens: dens.clone(),
        },
        embedded: Frame { rows: emb_rows, dens },
        v_det: to_x(&v.numerator_det()),
    })
}

/// Linear chart of the subgroup: `x = sum_m y_m B_m`, with `y` recovered from
/// the lead coordinates.
struct ChartMap {
    basis: Vec<AbstractVector>,
    leads: Vec<usize>,
    /// `y_m` as a linear form in the lead coordinates.
    y_of_x: Vec<Vec<(usize, GaussianRational)>>,
}

impl ChartMap {
    fn new(basis: &[AbstractVector], leads: &[usize]) -> Result<ChartMap, String> {
        let n = basis.len();
        let m = Matrix::from_rows(
            (0..n)
                .map(|j| (0..n).map(|k| GaussianRational::real(basis[k].0[leads[j]].clone())).collect())
                .collect(),
        );
        let inv = m.inverse().ok_or("the lead coordinates do not chart the subgroup")?;
        let y_of_x = (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| (leads[j], inv.get(k, j).clone()))
                    .filter(|(_, c)| !c.is_zero())
                    .collect()
            })
            .collect();
        Ok(ChartMap {
            basis: basis.to_vec(),
            leads: leads.to_vec(),
            y_of_x,
        })
    }

    /// A function of `y_1..y_n` (axes `0..n`) as a function of `x`.
    fn pull(&self, f: &ExpPoly) -> ExpPoly {
        let subs: Vec<(usize, Vec<(usize, GaussianRational)>)> = self.y_of_x.iter().cloned().enumerate().collect();
        f.substitute_linear(&subs)
    }

    /// `x^i` for every axis off the chart, in the lead coordinates.
    fn off_chart(&self) -> Vec<(usize, Vec<(usize, GaussianRational)>)> {
        (0..self.basis[0].dim())
            .filter(|i| !self.leads.contains(i))
            .map(|i| {
                let mut acc = vec![GaussianRational::zero(); MAX_AXES];
                for (b, form) in self.basis.iter().zip(&self.y_of_x) {
                    let bi = GaussianRational::real(b.0[i].clone());
                    for (j, c) in form {
                        acc[*j] += &(&bi * c);
                    }
                }
                (i, acc.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect())
            })
            .collect()
    }
}

fn fields_equal(printed: &[Vec<Fraction>], frame: &Frame) -> bool {
    printed.len() == frame.rows.len()
        && printed
            .iter()
            .enumerate()
            .all(|(a, row)| row.iter().zip(frame.row_fractions(a)).all(|(p, e)| p.equals(&e)))
}

/// `[F_a, F_b] = c_ab^c F_c` and `F_a(e) = B_a`.
fn fields_satisfy(printed: &[Vec<Fraction>], sc3: &StructureConstants, basis: &[AbstractVector]) -> Result<(), String> {
    let n = printed.len();
    for (a, row) in printed.iter().enumerate() {
        for (i, c) in row.iter().enumerate() {
            let at = c.num().at_origin();
            let den = c.den().at_origin();
            if den.is_zero() || at != &GaussianRational::real(basis[a].0[i].clone()) * &den {
                return Err(format!("field {} is not its basis vector at the identity", a + 1));
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            let br = fraction_bracket(&printed[a], &printed[b]);
            for (mu, v) in br.iter().enumerate() {
                let mut r = v.clone();
                for (c, row) in printed.iter().enumerate() {
                    let k = sc3.get(a, b, c);
                    if !k.is_zero() {
                        r = r.sub(&row[mu].scale(&GaussianRational::real(k.clone())));
                    }
                }
                if !r.is_zero() {
                    return Err(format!("[Y{},Y{}] has residual {} along d{}", a + 1, b + 1, r, mu + 1));
                }
            }
        }
    }
    Ok(())
}

/// A printed component: 0-based index triple in label order, and its parts.
struct Component {
    label: String,
    idx: Vec<usize>,
    claim: ClaimParts,
}

fn parse_label(label: &str, dim: usize) -> Result<Vec<usize>, String> {
    let idx: Vec<usize> = label
        .chars()
        .map(|c| c.to_digit(10).map(|d| d as usize))
        .collect::<Option<Vec<_>>>()
        .filter(|v| v.len() == 3 && v.iter().all(|&d| d >= 1 && d <= dim))
        .ok_or_else(|| format!("component label '{label}' is not three indices"))?;
    Ok(idx.into_iter().map(|d| d - 1).collect())
}

/// Minor of the basis matrix on the given columns, in that order.
fn basis_minor(basis: &[AbstractVector], cols: &[usize]) -> ExpPoly {
    let m: Vec<Vec<ExpPoly>> = basis
        .iter()
        .map(|b| cols.iter().map(|&c| ExpPoly::from_rational(b.0[c].clone())).collect())
        .collect();
    crate::invfields::det(&m)
}

enum Membership {
    Pass(String),
    Degenerate(String),
    Fail(String),
}

/// Joint membership of the claimed components, one constant at a time.
fn members(space: &SolutionSpace, comps: &[Component], basis: &[AbstractVector], emb: &Embedding) -> Membership {
    let n_det = emb.v_det.clone();
    let d_all = emb.chart.dens.iter().fold(ExpPoly::one(), |acc, d| acc.mul(d));
    let mut keys: Vec<Option<usize>> = Vec::new();
    for c in comps {
        if !c.claim.free.is_zero() && !keys.contains(&None) {
            keys.push(None);
        }
        for (k, _) in &c.claim.parts {
            if !keys.contains(&Some(*k)) {
                keys.push(Some(*k));
            }
        }
    }
    keys.sort();
    let mut bad = Vec::new();
    let mut collapsed = Vec::new();
    let mut checked = 0;
    let mut qs = Vec::new();
    for key in keys {
        let part = |c: &Component| -> Fraction {
            match key {
                None => c.claim.free.clone(),
                Some(k) => c
                    .claim
                    .parts
                    .iter()
                    .find(|(j, _)| *j == k)
                    .map(|(_, p)| p.clone())
                    .unwrap_or_else(|| Fraction::from(ExpPoly::zero())),
            }
        };
        let pairs: Vec<(ExpPoly, ExpPoly)> = comps
            .iter()
            .map(|c| {
                let p = part(c);
                (p.num().mul(&d_all), n_det.mul(&basis_minor(basis, &c.idx)).mul(p.den()))
            })
            .collect();
        if pairs.iter().all(|(t, _)| t.is_zero()) {
            collapsed.push(part_name(key));
            continue;
        }
        checked += 1;
        match (space.contains_scaled(&pairs), key) {
            (None, _) => bad.push(part_name(key)),
            (Some(q), Some(k)) => qs.push((k, q)),
            (Some(_), None) => {}
        }
    }
    if !bad.is_empty() {
        Membership::Fail(format!("ordering {:?}: not a solution: {} part", emb.ordering, bad.join(", ")))
    } else if let Some(d) = dependent_parts(&qs) {
        Membership::Fail(d)
    } else if !collapsed.is_empty() {
        Membership::Degenerate(format!(
            "{} part vanishes here; f = {}",
            collapsed.join(", "),
            space.general_form()
        ))
    } else {
        Membership::Pass(format!("{checked} part(s), ordering {:?}", emb.ordering))
    }
}

fn solve_on(emb: &Embedding, sc3: &StructureConstants, leads: &[usize], comps: &[Component]) -> Result<(MultiplicativityProblem, SolutionSpace), String> {
    let trace = sc3.trace_vector();
    let mut problem = MultiplicativityProblem::new(&emb.chart, trace.clone(), default_ansatz(&emb.chart, &trace, leads, 2));
    // Claimed functions with an invertible scale go into the ansatz.
    let n_det = emb.v_det.clone();
    for c in comps {
        for p in c.claim.parts.iter().map(|(_, p)| p).chain(std::iter::once(&c.claim.free)) {
            if p.is_zero() {
                continue;
            }
            if let Some(inv) = n_det.mul(p.den()).unit_inverse() {
                let d_all = emb.chart.dens.iter().fold(ExpPoly::one(), |acc, d| acc.mul(d));
                problem.extend_ansatz(&p.num().mul(&d_all).mul(&inv));
            }
        }
    }
    let space = solve_multiplicative(&problem).map_err(|e| e.to_string())?;
    solver_sound(&problem, &space)?;
    Ok((problem, space))
}

fn check_binding(
    raw: &AlgebraRecord,
    sub: &SubalgebraRecord,
    sc: &StructureConstants,
    env: &ParamEnv,
    seed: u64,
    opts: &VerifyOptions,
) -> BindingReport {
    let mut b = BindingReport::new(env, None);
    let prefix = format!("sub[{}].", sub.id);
    let basis: Vec<AbstractVector> = match sub.basis.iter().map(|r| AbstractVector::parse(r, env)).collect() {
        Ok(v) => v,
        Err(e) => {
            b.structure = Check::fail(format!("basis does not parse: {e}"));
            return b;
        }
    };
    let sc3 = match sc.subalgebra_closure(&basis) {
        Ok(ClosureReport::Pass { induced }) => induced,
        Ok(ClosureReport::Fail { pair, bracket }) => {
            b.structure = resolve(
                Check::fail(format!("[B{},B{}] = {bracket} leaves the span", pair.0, pair.1)),
                raw,
                &["closure"],
                |f| f.starts_with(&prefix),
                opts,
            );
            return b;
        }
        Err(e) => {
            b.structure = resolve(Check::fail(e.to_string()), raw, &["closure"], |f| f.starts_with(&prefix), opts);
            return b;
        }
    };
    b.structure = match sc3.jacobi_check() {
        JacobiReport::Pass => Check::pass(format!("closed: {sc3}")),
        JacobiReport::Violation { triple, residual } => {
            Check::fail(format!("induced Jacobi fails at {triple:?}: {residual}"))
        }
    };
    let leads = match lead_axes(sub, &basis) {
        Ok(l) => l,
        Err(e) => {
            b.frame = Check::fail(e);
            return b;
        }
    };
    let chart = match ChartMap::new(&basis, &leads) {
        Ok(c) => c,
        Err(e) => {
            b.frame = Check::fail(e);
            return b;
        }
    };
    let embeddings: Vec<Embedding> = all_orderings(3).iter().filter_map(|o| embed(&sc3, &chart, o)).collect();
    if embeddings.is_empty() {
        b.frame = Check::fail("no subgroup frame could be derived");
        return b;
    }

    // Printed fields.
    let fields_field = |f: &str| f.starts_with(&format!("{prefix}fields"));
    let printed: Option<Result<Vec<Vec<Fraction>>, String>> = (!sub.fields.is_empty()).then(|| {
        sub.fields
            .iter()
            .map(|row| {
                if row.len() != sc.dim {
                    return Err(format!("field row has {} entries", row.len()));
                }
                row.iter().map(|s| parse_fraction(s, env).map_err(|e| format!("'{s}': {e}"))).collect()
            })
            .collect()
    });
    let mut preferred = 0;
    let frame_check = match &printed {
        None => Check::new(Status::NoClaim, "no fields printed"),
        Some(Err(e)) => Check::fail(format!("fields do not parse: {e}")),
        Some(Ok(p)) => match embeddings.iter().position(|e| fields_equal(p, &e.embedded)) {
            Some(i) => {
                preferred = i;
                Check::pass(format!("equal to the embedded frame, ordering {:?}", embeddings[i].ordering))
            }
            None => match fields_satisfy(p, &sc3, &basis) {
                Ok(()) => Check::pass("satisfies the induced brackets"),
                Err(e) => Check::fail(e),
            },
        },
    };
    b.frame = resolve(frame_check, raw, &["fields"], fields_field, opts);

    // Claimed components.
    let mut comps: Vec<Component> = Vec::new();
    for (n, c) in sub.eta.iter().enumerate() {
        let parsed = parse_label(&c.label, sc.dim).and_then(|idx| split(&c.expr, env).map(|claim| (idx, claim)));
        match parsed {
            Ok((idx, claim)) => comps.push(Component {
                label: c.label.clone(),
                idx,
                claim,
            }),
            Err(e) => {
                b.membership = resolve(
                    Check::fail(format!("component {}: {e}", n + 1)),
                    raw,
                    &["membership", "parse"],
                    |f| f.starts_with(&format!("{prefix}eta")),
                    opts,
                );
                return b;
            }
        }
    }
    // Off-chart coordinates are read on the linear image of the subalgebra.
    let subs = chart.off_chart();
    let mut lost = Vec::new();
    for c in &mut comps {
        let r = c.claim.map(|f| f.substitute_linear(&subs));
        if !r.all_ones().equals(&c.claim.all_ones()) {
            b.notes.push(format!("component {} restricted to the subgroup chart", c.label));
        }
        for ((k, before), (_, after)) in c.claim.parts.iter().zip(&r.parts) {
            if !before.is_zero() && after.is_zero() {
                lost.push(format!("{} of {}", part_name(Some(*k)), c.label));
            }
        }
        c.claim = r;
    }
    for cols in combinations(sc.dim, 3) {
        if !basis_minor(&basis, &cols).is_zero() && !comps.iter().any(|c| sorted(&c.idx) == cols) {
            let l: String = cols.iter().map(|c| (c + 1).to_string()).collect();
            b.notes.push(format!("component {l} is not printed"));
        }
    }

    let mut order: Vec<usize> = vec![preferred];
    order.extend((0..embeddings.len()).filter(|&i| i != preferred));
    // A printed "0"; formulas that merely vanish at this binding are degenerate.
    let all_zero = comps.iter().all(|c| c.claim.parts.is_empty() && c.claim.free.is_zero());
    let mut membership = None;
    let mut solved: Option<(usize, SolutionSpace)> = None;
    for &i in &order {
        let (_, space) = match solve_on(&embeddings[i], &sc3, &leads, &comps) {
            Ok(s) => s,
            Err(e) => {
                membership.get_or_insert(Check::fail(e));
                continue;
            }
        };
        if solved.is_none() {
            b.solution = describe(&space);
        }
        let verdict = if comps.is_empty() {
            Check::new(Status::NoClaim, "no structure printed")
        } else if all_zero {
            if space.basis().is_empty() {
                Check::new(Status::Trivial, "solution space = {0}")
            } else {
                Check::fail(format!("printed 0, but f = {}", space.general_form()))
            }
        } else {
            match members(&space, &comps, &basis, &embeddings[i]) {
                Membership::Pass(d) => Check::pass(d),
                Membership::Degenerate(d) => Check::new(Status::Degenerate, d),
                Membership::Fail(d) => Check::fail(d),
            }
        };
        let done = !verdict.failed();
        if solved.is_none() || done {
            b.solution = describe(&space);
            solved = Some((i, space));
            membership = Some(verdict);
        }
        if done || comps.is_empty() || all_zero {
            break;
        }
    }
    let mut membership = membership.unwrap_or_else(|| Check::fail("no ordering could be solved"));
    if !lost.is_empty() && !membership.failed() {
        membership = Check::fail(format!("{} vanishes on the subgroup", lost.join(", ")));
    }
    b.membership = resolve(membership, raw, &["membership"], |f| f.starts_with(&format!("{prefix}eta")), opts);

    b.origin = if comps.is_empty() {
        Check::new(Status::NoClaim, "")
    } else {
        let bad: Vec<&str> = comps
            .iter()
            .filter(|c| !c.claim.all_ones().num().at_origin().is_zero())
            .map(|c| c.label.as_str())
            .collect();
        if bad.is_empty() {
            Check::pass("")
        } else {
            Check::fail(format!("nonzero at the identity: {}", bad.join(", ")))
        }
    };
    b.origin = resolve(b.origin, raw, &["origin", "membership"], |f| f.starts_with(&format!("{prefix}eta")), opts);

    // Fundamental identity on the claimed tensor, or on f Y_1 ^ Y_2 ^ Y_3.
    let tensor = if !comps.is_empty() && !comps.iter().all(|c| c.claim.is_zero()) {
        Some(claimed_tensor(sc.dim, &comps))
    } else {
        solved.as_ref().and_then(|(i, space)| {
            let f = space.basis().iter().fold(ExpPoly::zero(), |acc, s| acc.add(&s.f));
            (!f.is_zero()).then(|| wedge(&f, &embeddings[*i].embedded.rows))
        })
    };
    b.identity = match tensor {
        None => Check::new(Status::Trivial, "zero tensor"),
        Some(t) => match fundamental_identity_check(&t, opts.trials, seed) {
            FiReport::Pass { trials } => Check::pass(format!("{trials} trials")),
            FiReport::Counterexample { functions, component, value } => {
                Check::fail(format!("{component:?} = {value} for ({})", functions.join(", ")))
            }
        },
    };
    b.identity = resolve(b.identity, raw, &["identity", "membership"], |f| f.starts_with(&format!("{prefix}eta")), opts);
    b
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

/// The claimed components with all constants 1, over a common denominator.
fn claimed_tensor(dim: usize, comps: &[Component]) -> Multivector {
    let vals: Vec<Fraction> = comps.iter().map(|c| c.claim.all_ones()).collect();
    let mut dens: Vec<ExpPoly> = Vec::new();
    for v in &vals {
        if !v.is_zero() && *v.den() != ExpPoly::one() && !dens.contains(v.den()) {
            dens.push(v.den().clone());
        }
    }
    let entries = comps.iter().zip(&vals).map(|(c, v)| {
        let scaled = dens
            .iter()
            .filter(|d| *d != v.den())
            .fold(v.num().clone(), |acc, d| acc.mul(d));
        (c.idx.clone(), scaled)
    });
    Multivector::from_components(dim, 3, entries)
}
