//! Judges every erratum in the bundled registry: the printed text must fail
//! the named check, and a correction must pass it.

use nambu::liealg::registry::Registry;
use nambu::tables::check_all_errata;

fn main() {
    let verdicts = check_all_errata(&Registry::bundled(), 2024);
    let mut unsound = 0;
    for v in &verdicts {
        let state = match (v.sound(), v.corrected_passes) {
            (false, _) => "UNSOUND",
            (true, None) => "unverifiable",
            (true, Some(_)) => "sound",
        };
        if !v.sound() {
            unsound += 1;
        }
        println!("{:<12} {:<32} {:<10} {}", state, v.id, v.check, v.detail);
    }
    println!("{} errata, {} unsound", verdicts.len(), unsound);
}
