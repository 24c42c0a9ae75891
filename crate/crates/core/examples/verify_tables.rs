//! Verifies the bundled tables and prints the text report.
//!
//! `cargo run --example verify_tables -- [ENTRY...]`

use nambu::liealg::registry::Registry;
use nambu::tables::{emit_report, run_all, ReportFormat, RunOptions};

fn main() {
    let only: Vec<String> = std::env::args().skip(1).collect();
    let opts = RunOptions {
        only: (!only.is_empty()).then_some(only),
        ..RunOptions::default()
    };
    let report = run_all(&Registry::bundled(), &opts);
    print!("{}", emit_report(&report, ReportFormat::Text));
    println!("unexplained failures: {}", report.unexplained_failures());
}
