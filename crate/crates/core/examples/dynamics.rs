//! Charge closure, the Casimir identity, the Pfaffian expansion of the
//! 4-bracket, and a short RK4 run of the weighted flow.

use nambu::dynamics::{
    a049_structure, a48_constants, casimir_identity, check_q_closure, integrate_flow, pfaffian_check, CanonicalChart,
    FlowConfig, InvariantMetric, PoissonStructure,
};
use nambu::symkernel::{format_rational, rat, rat_int};

fn main() {
    let ps = PoissonStructure::new(rat_int(1)).unwrap();
    let chart = CanonicalChart::new(&ps);
    let sc = a48_constants();
    let closure = check_q_closure(&ps, &chart, &sc);
    let closed = closure.iter().filter(|c| c.residual.is_none()).count();
    println!("charge closure: {closed}/{}", closure.len());
    for a in [rat(1, 2), rat_int(1), rat_int(2), rat_int(3)] {
        let metric = InvariantMetric::new(a.clone()).unwrap();
        let c = casimir_identity(&metric, &chart, &sc).unwrap();
        println!("a = {}: casimir coefficient {}", format_rational(&a), format_rational(&c));
    }
    let pf = pfaffian_check(&ps, &a049_structure(&rat_int(1)), 20, 7);
    println!(
        "pfaffian constant {} on {} quadruples: {}",
        format_rational(&pf.constant),
        pf.trials,
        if pf.failure.is_none() { "exact" } else { "mismatch" }
    );
    let samples = integrate_flow(&FlowConfig {
        alpha: rat_int(1),
        metric_a: rat_int(1),
        q4: rat_int(1),
        freeze_eta: false,
        dt: 1e-2,
        t_end: 1.0,
        initial: [0.0, 0.0, 1.0, 0.5],
    })
    .unwrap();
    let last = samples.last().unwrap();
    println!("t = {:.2}: z = {:?}, H = {}", last.t, last.z, last.h);
}
