mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_axioms_hold(f in exppoly(), g in exppoly(), h in exppoly()) {
        ring_axioms(&f, &g, &h)?;
    }

    #[test]
    fn differentiation_is_a_derivation(f in exppoly(), g in exppoly(), i in 0..AXES, j in 0..AXES) {
        derivation(&f, &g, i, j)?;
    }

    #[test]
    fn print_parse_round_trip(f in real_exppoly()) {
        round_trip(&f)?;
    }

    #[test]
    fn evaluation_is_a_homomorphism(f in exppoly(), g in exppoly(), p in point()) {
        evaluation(&f, &g, &p)?;
    }

    #[test]
    fn linear_substitution(f in exppoly(), g in exppoly(), s in linear_sub(), p in point()) {
        substitution(&f, &g, &s, &p)?;
    }

    #[test]
    fn axis_renaming(f in exppoly(), g in exppoly(), perm in permutation()) {
        renaming(&f, &g, &perm)?;
    }

    #[test]
    fn real_functions_evaluate_to_reals(f in real_exppoly(), p in point()) {
        prop_assert!(f.is_real());
        prop_assert!(f.evaluate(&p).is_ok());
    }
}
