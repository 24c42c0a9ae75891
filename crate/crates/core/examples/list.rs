//! Lists the bundled registry: algebras, parameters, subalgebras and errata.

use nambu::liealg::registry::Registry;

fn main() {
    let registry = Registry::bundled();
    for a in registry.algebras() {
        let params = if a.params.is_empty() {
            String::new()
        } else {
            format!(" ({})", a.params.join(", "))
        };
        println!(
            "{:<10} {:<18}{params} subalgebras={} errata={}",
            a.name,
            a.label,
            a.subalgebras.len(),
            a.errata.len()
        );
    }
}
