//! The subcommands. Each writes its result to `out` and returns the verdict.

use std::io::Write;

use serde::Serialize;

use crate::dynamics::{
    a049_structure, a48_constants, casimir_identity, check_q_closure, integrate_flow, pfaffian_check,
    weighted_evolution, write_csv, CanonicalChart, FlowConfig, InvariantMetric, PoissonStructure,
};
use crate::invfields::{all_orderings, derive_frame, frames_equal, verify_frame, DeriveOptions, Frame};
use crate::liealg::registry::{AlgebraRecord, Registry};
use crate::nambu::{nbracket, Multivector};
use crate::symkernel::gauss::rational_to_f64;
use crate::symkernel::{format_rational, parse, print, ExpPoly, ParamEnv, Rational};
use crate::tables::{
    binding_label, check_all_errata, emit_report, entries, run_all, solve_top, split, verify_entry, ReportFormat,
    RunOptions, Status, TableId,
};

use super::{sweep_entry, CliError, Context, DynamicsCommand, Format, ModelArgs, Outcome, SweepMode, TableArg, VerifyArgs};

fn emit(ctx: &Context, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match &ctx.output {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// `[Ti,Tj]=...` with the coefficients as stored, so parameters stay symbolic.
fn brackets(a: &AlgebraRecord) -> Result<String, CliError> {
    let mut es = a.constant_entries()?;
    es.sort_by_key(|e| (e.i, e.j, e.k));
    let mut groups: Vec<((usize, usize), Vec<String>)> = Vec::new();
    for e in es {
        let c = e.expr.trim();
        let term = if c == "1" {
            format!("T{}", e.k)
        } else if c == "-1" {
            format!("-T{}", e.k)
        } else if c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '/') {
            format!("{c}*T{}", e.k)
        } else {
            format!("({c})*T{}", e.k)
        };
        match groups.last_mut() {
            Some((ij, ts)) if *ij == (e.i, e.j) => ts.push(term),
            _ => groups.push(((e.i, e.j), vec![term])),
        }
    }
    if groups.is_empty() {
        return Ok("abelian".into());
    }
    let parts: Vec<String> = groups
        .into_iter()
        .map(|((i, j), ts)| {
            let mut rhs = ts[0].clone();
            for t in &ts[1..] {
                match t.strip_prefix('-') {
                    Some(r) => rhs.push_str(&format!("-{r}")),
                    None => rhs.push_str(&format!("+{t}")),
                }
            }
            format!("[T{i},T{j}]={rhs}")
        })
        .collect();
    Ok(parts.join(", "))
}

#[derive(Serialize)]
struct ListedSub {
    id: String,
    label: String,
    basis: String,
    eta: Vec<(String, String)>,
}

#[derive(Serialize)]
struct Listed {
    name: String,
    label: String,
    aliases: Vec<String>,
    params: Vec<String>,
    brackets: String,
    eta: Option<String>,
    cases: Vec<(String, String)>,
    subalgebras: Vec<ListedSub>,
    errata: usize,
}

pub(super) fn list(ctx: &Context, algebra: Option<&str>, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let algebras: Vec<&AlgebraRecord> = match algebra {
        Some(id) => vec![ctx.algebra(id)?],
        None => ctx.registry.algebras().iter().collect(),
    };
    let mut listed = Vec::new();
    for a in &algebras {
        listed.push(Listed {
            name: a.name.clone(),
            label: a.label.clone(),
            aliases: a.aliases.clone(),
            params: a.params.clone(),
            brackets: brackets(a)?,
            eta: a.eta.clone(),
            cases: a.cases.iter().map(|c| (c.label.clone(), c.eta.clone())).collect(),
            subalgebras: a
                .subalgebras
                .iter()
                .map(|s| ListedSub {
                    id: s.id.clone(),
                    label: s.label.clone(),
                    basis: s.printed_basis.clone(),
                    eta: s.eta.iter().map(|c| (c.label.clone(), c.expr.clone())).collect(),
                })
                .collect(),
            errata: a.errata.len(),
        });
    }
    let text = match ctx.format {
        Format::Json => serde_json::to_string_pretty(&listed).expect("listing serializes") + "\n",
        Format::Text => {
            let mut s = String::new();
            for l in &listed {
                s.push_str(&format!("{}  {}", l.name, l.label));
                if !l.aliases.is_empty() {
                    s.push_str(&format!("  ({})", l.aliases.join(", ")));
                }
                s.push('\n');
                if !l.params.is_empty() {
                    s.push_str(&format!("  params: {}\n", l.params.join(", ")));
                }
                s.push_str(&format!("  brackets: {}\n", l.brackets));
                if let Some(e) = &l.eta {
                    s.push_str(&format!("  eta^1234 = {e}\n"));
                }
                for (c, e) in &l.cases {
                    s.push_str(&format!("  eta^1234 = {e}   [{c}]\n"));
                }
                for sub in &l.subalgebras {
                    let etas: Vec<String> = sub.eta.iter().map(|(k, e)| format!("eta^{k} = {e}")).collect();
                    s.push_str(&format!("  sub {}  {}  <{}>  {}\n", sub.id, sub.label, sub.basis, etas.join("; ")));
                }
                if l.errata > 0 {
                    s.push_str(&format!("  errata: {}\n", l.errata));
                }
            }
            s
        }
    };
    emit(ctx, &text, out)?;
    Ok(Outcome::new(true).with("algebras", listed.len()))
}

/// Copy of an algebra whose sweeps are pinned to the bound parameters.
fn pinned(a: &AlgebraRecord, env: &ParamEnv) -> AlgebraRecord {
    let mut r = a.clone();
    if !a.params.is_empty() && a.params.iter().all(|p| env.contains(p)) {
        r.sweep = vec![sweep_entry(env, &a.params)];
    }
    for s in &mut r.subalgebras {
        let own: Vec<String> = s.params.iter().filter(|p| !a.params.contains(p)).cloned().collect();
        if !own.is_empty() && own.iter().all(|p| env.contains(p)) {
            s.sweep = vec![sweep_entry(env, &own)];
        }
    }
    r
}

fn pinned_registry(reg: &Registry, env: &ParamEnv) -> Registry {
    if env.is_empty() {
        return reg.clone();
    }
    let mut r = reg.clone();
    for a in &mut r.file.algebras {
        *a = pinned(a, env);
    }
    r
}

pub(super) fn solve(
    ctx: &Context,
    id: &str,
    order: u8,
    sub: Option<&str>,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let a = ctx.algebra(id)?;
    let env = ctx.require(&a.label, &a.params)?;
    let rec = pinned(a, &env);
    let opts = RunOptions {
        seed: ctx.seed,
        ..RunOptions::default()
    };
    let mut s = String::new();
    let mut ok = true;
    if order == 4 {
        let top = solve_top(a, &env).map_err(CliError::Compute)?;
        let space = &top.space;
        s.push_str(&format!("{} ({}) at {}\n", a.label, a.name, binding_label(&env)));
        for n in &top.notes {
            s.push_str(&format!("  {n}\n"));
        }
        s.push_str(&format!("f = {}\n", space.general_form()));
        if !space.forced_zero.is_empty() {
            let names: Vec<String> = space.forced_zero.iter().map(|k| format!("q{}", k + 1)).collect();
            s.push_str(&format!("forced to 0: {}\n", names.join(", ")));
        }
        for (k, sol) in &space.particular {
            s.push_str(&format!("  q{}: f = {}\n", k + 1, print(&sol.f)));
        }
        for (j, h) in space.homogeneous.iter().enumerate() {
            s.push_str(&format!("  c{}: f = {}\n", j + 1, print(h)));
        }
        // The printed structure at this binding.
        let entry = entries(&ctx.registry).into_iter().find(|e| e.table == TableId::I && e.algebra == a.name);
        if let Some(e) = entry {
            let r = verify_entry(&rec, &e, &opts);
            for b in r.bindings.iter().filter(|b| b.binding == binding_label(&env)) {
                let claim = match &b.case {
                    Some(c) => format!("printed [{c}]"),
                    None => "printed".into(),
                };
                s.push_str(&format!("{claim}: membership={} {}\n", b.membership.status, b.membership.detail));
                ok &= b.failures() == 0;
            }
        }
        emit(ctx, &s, out)?;
        return Ok(Outcome::new(ok)
            .with("particular", space.particular.len())
            .with("homogeneous", space.homogeneous.len()));
    }
    let rows: Vec<_> = entries(&ctx.registry)
        .into_iter()
        .filter(|e| e.algebra == a.name && e.table == TableId::II)
        .filter(|e| sub.map_or(true, |id| e.subalgebra.as_deref() == Some(id)))
        .collect();
    if rows.is_empty() {
        return Err(CliError::Usage(match sub {
            Some(id) => format!("{} has no subalgebra '{id}'", a.name),
            None => format!("{} has no subalgebra rows", a.name),
        }));
    }
    for e in &rows {
        let r = verify_entry(&rec, e, &opts);
        s.push_str(&format!("{}  {}\n", e.id, r.label));
        for n in &r.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
        for b in &r.bindings {
            s.push_str(&format!(
                "  {}  {}  membership={} {}\n",
                b.binding, b.solution, b.membership.status, b.membership.detail
            ));
            ok &= b.failures() == 0;
        }
    }
    emit(ctx, &s, out)?;
    Ok(Outcome::new(ok).with("rows", rows.len()))
}

pub(super) fn verify(ctx: &Context, args: &VerifyArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    if !args.all && args.table.is_none() && args.algebra.is_empty() {
        return Err(CliError::Usage("choose --all, --table or --algebra".into()));
    }
    let names = args
        .algebra
        .iter()
        .map(|id| ctx.algebra(id).map(|a| a.name.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let registry = pinned_registry(&ctx.registry, &ctx.env);
    let opts = RunOptions {
        seed: ctx.seed,
        trials: args.trials,
        only: (!names.is_empty()).then_some(names),
        tables: args.table.map(|t| {
            vec![match t {
                TableArg::I => TableId::I,
                TableArg::II => TableId::II,
            }]
        }),
        skip_parameterized: args.param_sweep == SweepMode::None,
        ..RunOptions::default()
    };
    let report = run_all(&registry, &opts);
    let format = match ctx.format {
        Format::Json => ReportFormat::Json,
        Format::Text => ReportFormat::Text,
    };
    let text = emit_report(&report, format);
    emit(ctx, &text, out)?;
    let failures = report.unexplained_failures();
    let bindings: usize = report.entries.iter().map(|e| e.bindings.len()).sum();
    let unverified: usize = report
        .entries
        .iter()
        .flat_map(|e| &e.bindings)
        .flat_map(|b| b.checks())
        .filter(|(_, c)| c.status == Status::Unverified)
        .count();
    if ctx.output.is_some() && ctx.format == Format::Text {
        // The summary lines still go to the terminal.
        for l in text.lines().filter(|l| l.starts_with("Table ")) {
            writeln!(out, "{l}")?;
        }
    }
    let mut o = Outcome::new(failures == 0)
        .with("unexplained_failures", failures)
        .with("entries", report.entries.len())
        .with("bindings", bindings)
        .with("unverified", unverified)
        .with("skipped", report.skipped.len());
    if args.errata {
        let verdicts = check_all_errata(&registry, ctx.seed);
        let unsound: Vec<&str> = verdicts.iter().filter(|v| !v.sound()).map(|v| v.id.as_str()).collect();
        for id in &unsound {
            writeln!(out, "unsound erratum: {id}")?;
        }
        o.ok &= unsound.is_empty();
        o = o.with("errata", verdicts.len()).with("unsound_errata", unsound.len());
    }
    Ok(o)
}

/// `name*f`, parenthesized when `f` has several terms.
fn scaled(name: &str, f: &ExpPoly) -> String {
    let s = print(f);
    match (f.len(), s.as_str()) {
        (1, "1") => name.to_string(),
        (1, "-1") => format!("-{name}"),
        (1, _) => match s.strip_prefix('-') {
            Some(r) => format!("-{name}*{r}"),
            None => format!("{name}*{s}"),
        },
        _ => format!("{name}*({s})"),
    }
}

fn join_terms(parts: &[String]) -> String {
    if parts.is_empty() {
        return "0".into();
    }
    let mut s = parts[0].clone();
    for p in &parts[1..] {
        match p.strip_prefix('-') {
            Some(r) => s.push_str(&format!(" - {r}")),
            None => s.push_str(&format!(" + {p}")),
        }
    }
    s
}

pub(super) fn bracket(
    ctx: &Context,
    algebra: Option<&str>,
    eta: Option<&str>,
    functions: &[String],
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let (env, dim, det, default_eta) = match algebra {
        Some(id) => {
            let a = ctx.algebra(id)?;
            let env = ctx.require(&a.label, &a.params)?;
            let top = solve_top(a, &env).map_err(CliError::Compute)?;
            if top.frame.has_denominators() {
                return Err(CliError::Compute(format!("the frame of {} has denominators", a.label)));
            }
            (env, a.dim, top.frame.numerator_det(), a.with_errata(&[])?.eta)
        }
        None => (ctx.env.clone(), functions.len(), ExpPoly::one(), None),
    };
    if functions.len() != dim {
        return Err(CliError::Usage(format!("the bracket takes {dim} functions, got {}", functions.len())));
    }
    let eta_src = eta.map(str::to_string).or(default_eta).unwrap_or_else(|| "1".into());
    let claim = split(&eta_src, &env).map_err(CliError::Usage)?;
    let fs = functions
        .iter()
        .map(|f| parse(f, &env).map_err(|e| CliError::Usage(format!("'{f}': {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let value = |p: &crate::symkernel::Fraction| -> Result<ExpPoly, CliError> {
        let p = p
            .as_exppoly()
            .ok_or_else(|| CliError::Usage(format!("eta '{eta_src}' has a denominator")))?;
        Ok(nbracket(&Multivector::top(dim, p.mul(&det)), &fs))
    };
    let mut terms = Vec::new();
    let free = value(&claim.free)?;
    if !free.is_zero() {
        terms.push(print(&free));
    }
    for (k, p) in &claim.parts {
        let v = value(p)?;
        if !v.is_zero() {
            terms.push(scaled(&format!("q{}", k + 1), &v));
        }
    }
    writeln!(out, "{}", join_terms(&terms))?;
    Ok(Outcome::new(true))
}

pub(super) fn derive(ctx: &Context, id: &str, ordering: Option<&[usize]>, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let a = ctx.algebra(id)?;
    let env = ctx.require(&a.label, &a.params)?;
    let rec = a.with_errata(&[])?;
    let sc = rec
        .spec()?
        .constants_at(&env)
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let candidates: Vec<Vec<usize>> = match ordering {
        Some(o) => vec![o.to_vec()],
        None => rec.ordering.iter().cloned().chain(all_orderings(sc.dim)).collect(),
    };
    let mut last_err = String::from("no ordering tried");
    for o in candidates {
        let opts = DeriveOptions {
            ordering: Some(o.clone()),
            allow_denominators: true,
        };
        match derive_frame(&sc, &opts) {
            Ok(frame) => {
                let report = verify_frame(&frame, &sc);
                let stored = Frame::parse(&rec.frame, &env).ok();
                let same = stored.as_ref().is_some_and(|s| frames_equal(s, &frame));
                let order: Vec<String> = o.iter().map(|i| i.to_string()).collect();
                let mut s = format!("{} ({}) at {}, ordering {}\n", a.label, a.name, binding_label(&env), order.join(","));
                s.push_str(&frame.to_string());
                s.push_str(&format!("verify_frame: {}\n", if report.passed() { "pass" } else { "FAIL" }));
                s.push_str(&format!("equals stored frame: {}\n", if same { "yes" } else { "no" }));
                emit(ctx, &s, out)?;
                return Ok(Outcome::new(report.passed()).with("ordering", order.join(",")));
            }
            Err(e) => last_err = format!("ordering {o:?}: {e}"),
        }
    }
    Err(CliError::Compute(last_err))
}

fn rat(r: &Rational) -> String {
    format_rational(r)
}

pub(super) fn dynamics(
    ctx: &Context,
    action: &DynamicsCommand,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Outcome, CliError> {
    match action {
        DynamicsCommand::Check { model, trials } => check(ctx, model, *trials, out),
        DynamicsCommand::Evolve {
            model,
            t_end,
            dt,
            freeze_eta,
            x1,
            x2,
            p1,
            p2,
        } => {
            let cfg = FlowConfig {
                alpha: model.alpha.clone(),
                metric_a: model.metric_a.clone(),
                q4: model.q4.clone(),
                freeze_eta: *freeze_eta,
                dt: *dt,
                t_end: *t_end,
                initial: [x1, x2, p1, p2].map(rational_to_f64),
            };
            let samples = integrate_flow(&cfg)?;
            let mut csv = Vec::new();
            write_csv(&samples, &mut csv)?;
            match &ctx.output {
                Some(p) => std::fs::write(p, &csv)?,
                None => out.write_all(&csv)?,
            }
            let h0 = samples[0].h;
            let drift = samples.iter().map(|s| (s.h - h0).abs()).fold(0.0, f64::max);
            let bound = 1e-9 * h0.abs().max(1.0);
            if ctx.output.is_some() {
                writeln!(out, "{} samples, max |H - H(0)| = {drift:e}", samples.len())?;
            } else {
                writeln!(err, "{} samples, max |H - H(0)| = {drift:e}", samples.len())?;
            }
            Ok(Outcome::new(drift < bound).with("samples", samples.len()).with("drift", format!("{drift:e}")))
        }
    }
}

fn check(ctx: &Context, m: &ModelArgs, trials: usize, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let ps = PoissonStructure::new(m.alpha.clone())?;
    let metric = InvariantMetric::new(m.metric_a.clone())?;
    let chart = CanonicalChart::new(&ps);
    let sc = a48_constants();
    let eta = a049_structure(&m.q4);
    let mut s = format!("alpha={} metric a={} q4={}\n", rat(&m.alpha), rat(&m.metric_a), rat(&m.q4));

    let closure = check_q_closure(&ps, &chart, &sc);
    let closed = closure.iter().filter(|c| c.residual.is_none()).count();
    s.push_str(&format!("charge closure: {closed}/{} pairs\n", closure.len()));
    for c in closure.iter().filter(|c| c.residual.is_some()) {
        s.push_str(&format!("  {{Q{},Q{}}} residual {}\n", c.pair.0, c.pair.1, c.residual.as_deref().unwrap_or("")));
    }
    let invariant = metric.ad_invariant(&sc);
    s.push_str(&format!("metric ad-invariant: {}\n", if invariant { "pass" } else { "FAIL" }));

    let expected = Rational::from_integer((-2).into()) / (&m.metric_a * &m.metric_a);
    let casimir = casimir_identity(&metric, &chart, &sc);
    let casimir_ok = matches!(&casimir, Ok(c) if *c == expected);
    match &casimir {
        Ok(c) => s.push_str(&format!("casimir coefficient: {} (expected -2/a^2 = {})\n", rat(c), rat(&expected))),
        Err(e) => s.push_str(&format!("casimir coefficient: {e}\n")),
    }

    let pf = pfaffian_check(&ps, &eta, trials, ctx.seed);
    s.push_str(&format!(
        "pfaffian constant: {}; {} quadruples: {}\n",
        rat(&pf.constant),
        pf.trials,
        if pf.failure.is_none() { "pass" } else { "FAIL" }
    ));
    if let Some(f) = &pf.failure {
        s.push_str(&format!("  counterexample ({})\n", f.join(", ")));
    }

    let obs = chart.x1();
    let ev = weighted_evolution(&obs, &metric, &ps, &chart, &sc, &eta);
    match &ev.ratio {
        Some(r) => s.push_str(&format!("evolution of x_1: lhs = {} * rhs\n", rat(r))),
        None => s.push_str(&format!("evolution of x_1: lhs - rhs = {}\n", print(&ev.difference))),
    }
    emit(ctx, &s, out)?;
    let ok = closed == closure.len() && invariant && casimir_ok && pf.failure.is_none();
    let mut o = Outcome::new(ok)
        .with("closure", format!("{closed}/{}", closure.len()))
        .with("pfaffian_constant", rat(&pf.constant));
    if let Ok(c) = &casimir {
        o = o.with("casimir", rat(c));
    }
    Ok(o)
}
