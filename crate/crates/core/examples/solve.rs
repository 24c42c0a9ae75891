//! Solves the top-order multiplicativity equations for one algebra.
//!
//! `cargo run --example solve -- A4_5 a=1/2 b=2`

use nambu::liealg::registry::Registry;
use nambu::symkernel::{parse_rational, print, ParamEnv};
use nambu::tables::solve_top;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "A4_8".into());
    let mut env = ParamEnv::new();
    for a in args {
        let (k, v) = a.split_once('=').expect("bindings look like a=1/2");
        env.bind(k, parse_rational(v).expect("exact rational"));
    }
    let registry = Registry::bundled();
    let rec = registry.find(&name).expect("algebra in the registry");
    let top = solve_top(rec, &env).unwrap_or_else(|e| panic!("{name}: {e}"));
    for n in &top.notes {
        println!("note: {n}");
    }
    for (k, s) in &top.space.particular {
        println!("q{}: f = {}", k + 1, print(&s.f));
    }
    for h in &top.space.homogeneous {
        println!("homogeneous: f = {}", print(h));
    }
    let forced: Vec<String> = top.space.forced_zero.iter().map(|k| format!("q{}", k + 1)).collect();
    println!("forced to 0: {}", forced.join(", "));
}
