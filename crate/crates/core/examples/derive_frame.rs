//! Derives left-invariant frames from structure constants and checks them.
//!
//! `cargo run --example derive_frame -- A4_8 [name=value ...]`

use nambu::invfields::{all_orderings, derive_frame, frames_equal, verify_frame, DeriveOptions, Frame};
use nambu::liealg::registry::Registry;
use nambu::symkernel::{parse_rational, ParamEnv};

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
    let sc = rec.spec().unwrap().constants_at(&env).unwrap();
    let stored = Frame::parse(&rec.frame, &env).ok();
    for ordering in all_orderings(sc.dim) {
        let opts = DeriveOptions {
            ordering: Some(ordering.clone()),
            allow_denominators: true,
        };
        match derive_frame(&sc, &opts) {
            Ok(frame) => {
                let ok = verify_frame(&frame, &sc).passed();
                let same = stored.as_ref().is_some_and(|s| frames_equal(s, &frame));
                println!("ordering {ordering:?}: verify {}, equals stored: {same}", if ok { "pass" } else { "FAIL" });
                print!("{frame}");
            }
            Err(e) => println!("ordering {ordering:?}: {e}"),
        }
    }
}
