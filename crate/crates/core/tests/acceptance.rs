//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::cell::Cell;
use std::process::ExitCode;

use nambu::dynamics::{
    a049_structure, a48_constants, casimir_identity, check_q_closure, integrate_flow, pfaffian_check, CanonicalChart,
    FlowConfig, InvariantMetric, PoissonStructure,
};
use nambu::invfields::{all_orderings, derive_frame, verify_frame, DeriveOptions};
use nambu::liealg::registry::{ErratumKind, Registry};
use nambu::liealg::{AbstractVector, ClosureReport};
use nambu::symkernel::{rat, rat_int, ExpPoly, ParamEnv};
use nambu::tables::{
    algebra_bindings, check_all_errata, default_values, entries, run_all, solve_top, sub_bindings, RunOptions, Status,
    TableId, VerificationReport,
};
use proptest::test_runner::{Config, RngAlgorithm, TestError, TestRng, TestRunner};

const SEED: u64 = 2024;
const KERNEL_CASES: u32 = 64;
const DRIFT_BOUND: f64 = 1e-9;
const PFAFFIAN_TRIALS: usize = 50;
const MIN_DERIVED: usize = 15;
const MIN_BINDINGS: usize = 4;

type Outcome = Result<String, String>;

fn worked_example(reg: &Registry, report: &VerificationReport) -> Outcome {
    let a = reg.find("A4_8").ok_or("A4_8 missing")?;
    let top = solve_top(a, &ParamEnv::new())?;
    let space = &top.space;
    let x4 = ExpPoly::coord(3);
    let general_ok = space.homogeneous.is_empty()
        && matches!(space.particular.as_slice(), [(3, s)] if s.f == x4);
    if !general_ok {
        return Err(format!("solution space {space:?}, expected f = q4*x4"));
    }
    if top.space.forced_zero != [0, 1, 2] {
        return Err(format!("forced zero {:?}", top.space.forced_zero));
    }
    let rows: Vec<_> = report
        .entries
        .iter()
        .filter(|e| e.table == TableId::II && e.algebra == "A4_8")
        .collect();
    if rows.len() != 3 {
        return Err(format!("{} order-3 rows", rows.len()));
    }
    for r in &rows {
        for b in &r.bindings {
            if b.membership.status != Status::Pass {
                return Err(format!("{} {}: membership {}", r.id, b.binding, b.membership.status));
            }
        }
    }
    Ok("f = q4*x4, q1 = q2 = q3 = 0; 3 order-3 rows membership-verified".into())
}

fn table_one(reg: &Registry, report: &VerificationReport) -> Outcome {
    let rows: Vec<_> = report.entries.iter().filter(|e| e.table == TableId::I).collect();
    let failures: usize = rows.iter().map(|r| r.failures()).sum();
    if failures > 0 {
        return Err(format!("{failures} failed checks"));
    }
    for r in &rows {
        let a = reg.get(&r.algebra).unwrap();
        if !a.params.is_empty() && r.bindings.len() < MIN_BINDINGS {
            return Err(format!("{} swept over {} bindings", r.id, r.bindings.len()));
        }
        if r.bindings.is_empty() {
            return Err(format!("{} has no binding", r.id));
        }
    }
    let errata = errata_for(reg, TableId::I)?;
    let s = report.summary_for(TableId::I).unwrap();
    Ok(format!(
        "{} rows, {} bindings, {errata} errata sound, {} unverified, {} degenerate",
        s.entries, s.bindings, s.unverified, s.degenerate
    ))
}

/// Soundness of the errata attached to one table; Table II errata address `sub[..]` fields.
fn errata_for(reg: &Registry, table: TableId) -> Result<usize, String> {
    let verdicts = check_all_errata(reg, SEED);
    let mut n = 0;
    for v in verdicts {
        let a = reg.get(&v.algebra).unwrap();
        let e = a.erratum(&v.id).unwrap();
        let is_sub = e.field.starts_with("sub[");
        if is_sub != (table == TableId::II) {
            continue;
        }
        if e.kind != ErratumKind::Correction || !v.sound() {
            return Err(format!("erratum {} ({}): {}", v.id, e.kind, v.detail));
        }
        n += 1;
    }
    Ok(n)
}

fn table_two(reg: &Registry, report: &VerificationReport) -> Outcome {
    let rows: Vec<_> = report.entries.iter().filter(|e| e.table == TableId::II).collect();
    let mut trivial = Vec::new();
    for r in &rows {
        if r.bindings.is_empty() {
            return Err(format!("{} has no binding", r.id));
        }
        for b in &r.bindings {
            if b.failures() > 0 {
                return Err(format!("{} {} failed", r.id, b.binding));
            }
        }
        if r.bindings.iter().any(|b| b.membership.status == Status::Trivial) {
            trivial.push(r.id.clone());
        }
    }
    let all = entries(reg);
    for id in &trivial {
        let e = all.iter().find(|e| &e.id == id).unwrap();
        if !e.claimed_eta.iter().all(|(_, x)| x.trim() == "0") {
            return Err(format!("{id} is trivial but claims a nonzero structure"));
        }
    }
    if trivial.len() != 2 {
        return Err(format!("trivial rows {trivial:?}, expected the two zero rows"));
    }
    let errata = errata_for(reg, TableId::II)?;
    let s = report.summary_for(TableId::II).unwrap();
    Ok(format!(
        "{} rows, {} bindings, {errata} errata sound, trivial rows {}",
        s.entries,
        s.bindings,
        trivial.join(", ")
    ))
}

fn jacobi(reg: &Registry) -> Outcome {
    if !reg.rejected.is_empty() {
        return Err(format!("rejected algebras {:?}", reg.rejected));
    }
    let values = default_values();
    let (mut algebras, mut induced) = (0, 0);
    for raw in reg.algebras() {
        let a = raw.with_errata(&[]).map_err(|e| e.to_string())?;
        let spec = a.spec().map_err(|e| e.to_string())?;
        let (envs, _) = algebra_bindings(&a, &values)?;
        for env in &envs {
            let sc = spec.constants_at(env).map_err(|e| e.to_string())?;
            if !sc.jacobi_check().passed() {
                return Err(format!("{} at {env}", a.name));
            }
            algebras += 1;
        }
        for sub in &a.subalgebras {
            let (envs, _) = sub_bindings(&a, sub, &values)?;
            for env in &envs {
                let sc = spec.constants_at(env).map_err(|e| e.to_string())?;
                let basis = sub
                    .basis
                    .iter()
                    .map(|v| AbstractVector::parse(v, env))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| e.to_string())?;
                match sc.subalgebra_closure(&basis).map_err(|e| e.to_string())? {
                    ClosureReport::Pass { induced: c } if c.jacobi_check().passed() => induced += 1,
                    other => return Err(format!("{}/{} at {env}: {other:?}", a.name, sub.id)),
                }
            }
        }
    }
    Ok(format!("{algebras} algebra bindings, {induced} induced subalgebra bindings"))
}

fn kernel() -> Outcome {
    use common::*;
    let count = Cell::new(0usize);
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&SEED.to_le_bytes());
    let config = Config {
        cases: KERNEL_CASES,
        failure_persistence: None,
        ..Config::default()
    };
    // A runner stops after `cases` successes in total, so each property gets its own.
    let runner = || TestRunner::new_with_rng(config.clone(), TestRng::from_seed(RngAlgorithm::ChaCha, &seed));
    let add = |n: usize| count.set(count.get() + n);
    fn report<T: std::fmt::Debug>(name: &str, r: Result<(), TestError<T>>) -> Result<(), String> {
        r.map_err(|e| format!("{name}: {e}"))
    }

    report("ring", runner().run(&(exppoly(), exppoly(), exppoly()), |(f, g, h)| ring_axioms(&f, &g, &h).map(add)))?;
    report(
        "derivation",
        runner().run(&(exppoly(), exppoly(), 0..AXES, 0..AXES), |(f, g, i, j)| derivation(&f, &g, i, j).map(add)),
    )?;
    report("round trip", runner().run(&real_exppoly(), |f| round_trip(&f).map(add)))?;
    report(
        "evaluation",
        runner().run(&(exppoly(), exppoly(), point()), |(f, g, p)| evaluation(&f, &g, &p).map(add)),
    )?;
    report(
        "substitution",
        runner().run(&(exppoly(), exppoly(), linear_sub(), point()), |(f, g, s, p)| {
            substitution(&f, &g, &s, &p).map(add)
        }),
    )?;
    report(
        "renaming",
        runner().run(&(exppoly(), exppoly(), permutation()), |(f, g, perm)| renaming(&f, &g, &perm).map(add)),
    )?;
    let n = count.get();
    if n < 1000 {
        return Err(format!("only {n} assertions"));
    }
    Ok(format!("{n} exact assertions, seed {SEED}"))
}

fn dynamics() -> Outcome {
    let ps = PoissonStructure::new(rat_int(1)).map_err(|e| e.to_string())?;
    let chart = CanonicalChart::new(&ps);
    let sc = a48_constants();
    let closure = check_q_closure(&ps, &chart, &sc);
    let closed = closure.iter().filter(|c| c.residual.is_none()).count();
    if closed != 6 || closure.len() != 6 {
        return Err(format!("closure {closed}/{}", closure.len()));
    }
    for a in [rat(1, 2), rat_int(1), rat_int(2), rat_int(3)] {
        let metric = InvariantMetric::new(a.clone()).map_err(|e| e.to_string())?;
        let c = casimir_identity(&metric, &chart, &sc).map_err(|e| e.to_string())?;
        if c != rat_int(-2) / (&a * &a) {
            return Err(format!("casimir coefficient {c} at a = {a}"));
        }
    }
    let pf = pfaffian_check(&ps, &a049_structure(&rat_int(1)), PFAFFIAN_TRIALS, SEED);
    if let Some(f) = pf.failure {
        return Err(format!("pfaffian fails on ({})", f.join(", ")));
    }
    let samples = integrate_flow(&FlowConfig {
        alpha: rat_int(1),
        metric_a: rat_int(1),
        q4: rat_int(1),
        freeze_eta: false,
        dt: 1e-3,
        t_end: 10.0,
        initial: [0.0, 0.0, 1.0, 0.0],
    })
    .map_err(|e| e.to_string())?;
    let h0 = samples[0].h;
    let drift = samples.iter().map(|s| (s.h - h0).abs()).fold(0.0, f64::max);
    if drift >= DRIFT_BOUND {
        return Err(format!("drift {drift:e}"));
    }
    Ok(format!(
        "closure 6/6, casimir -2/a^2 at 4 values, pfaffian on {} quadruples, drift {drift:e}",
        pf.trials
    ))
}

fn frames(reg: &Registry) -> Outcome {
    let values = default_values();
    let (mut derived, mut total) = (0, 0);
    for raw in reg.algebras() {
        let a = raw.with_errata(&[]).map_err(|e| e.to_string())?;
        let (envs, _) = algebra_bindings(&a, &values)?;
        let Some(env) = envs.first() else { continue };
        let sc = a.spec().map_err(|e| e.to_string())?.constants_at(env).map_err(|e| e.to_string())?;
        total += 1;
        let orderings = a.ordering.iter().cloned().chain(all_orderings(sc.dim));
        for o in orderings {
            let opts = DeriveOptions {
                ordering: Some(o),
                allow_denominators: true,
            };
            if let Ok(frame) = derive_frame(&sc, &opts) {
                if !verify_frame(&frame, &sc).passed() {
                    return Err(format!("derived frame of {} at {env} fails", a.name));
                }
                derived += 1;
                break;
            }
        }
    }
    if derived < MIN_DERIVED {
        return Err(format!("derived {derived} of {total}"));
    }
    Ok(format!("derived and verified {derived} of {total} algebras"))
}

fn main() -> ExitCode {
    let reg = Registry::bundled();
    let report = run_all(&reg, &RunOptions::default());
    let criteria: [(&str, Box<dyn Fn() -> Outcome>); 7] = [
        ("worked example", Box::new(|| worked_example(&reg, &report))),
        ("order-four table", Box::new(|| table_one(&reg, &report))),
        ("order-three table", Box::new(|| table_two(&reg, &report))),
        ("jacobi gate", Box::new(|| jacobi(&reg))),
        ("kernel properties", Box::new(kernel)),
        ("dynamics", Box::new(dynamics)),
        ("frame derivation", Box::new(|| frames(&reg))),
    ];
    let mut ok = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("PASS {} {name}: {msg}", i + 1),
            Err(msg) => {
                ok = false;
                println!("FAIL {} {name}: {msg}", i + 1);
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
