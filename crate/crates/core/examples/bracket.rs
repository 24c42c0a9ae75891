//! The 4-bracket of the multiplicative structure x4 X1^X2^X3^X4 on A4_8,
//! evaluated on a few function quadruples.

use nambu::invfields::Frame;
use nambu::liealg::registry::Registry;
use nambu::nambu::multivector::{nbracket, wedge};
use nambu::symkernel::{parse, print, ParamEnv};

fn main() {
    let env = ParamEnv::new();
    let rec = Registry::bundled().find("A4_8").unwrap().with_errata(&[]).unwrap();
    let frame = Frame::parse(&rec.frame, &env).unwrap();
    let rows = frame.plain_rows().expect("polynomial frame");
    let eta = wedge(&parse("x4", &env).unwrap(), rows);
    let quadruples = [
        ["x1", "x2", "x3", "x4"],
        ["x1*x2", "x2", "x3", "x4"],
        ["exp(x4)", "x1", "x2", "x3"],
        ["x1", "x1", "x3", "x4"],
    ];
    for q in quadruples {
        let fs: Vec<_> = q.iter().map(|f| parse(f, &env).unwrap()).collect();
        println!("{{{}}} = {}", q.join(", "), print(&nbracket(&eta, &fs)));
    }
}
