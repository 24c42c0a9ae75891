//! Strategies and kernel properties shared by the proptest suites and the
//! acceptance target.

#![allow(dead_code)]

use nambu::symkernel::{parse, print, ExpPoly, Frequency, GaussianRational, Monomial, ParamEnv};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// Axes used by generated functions.
pub const AXES: usize = 3;

/// Relative tolerance for float evaluation checks.
pub const EVAL_TOL: f64 = 1e-9;

fn gauss() -> impl Strategy<Value = GaussianRational> {
    (-5i64..=5, 1i64..=3, -2i64..=2).prop_map(|(n, d, i)| {
        GaussianRational::from_frac(n, d) + GaussianRational::i().scale(&nambu::symkernel::rat(i, d))
    })
}

fn term() -> impl Strategy<Value = ExpPoly> {
    (gauss(), prop::array::uniform3(0u16..=2), 0usize..AXES, -2i64..=2, -1i64..=1).prop_map(
        |(c, pw, axis, re, im)| {
            let mut m = Monomial::one();
            for (k, p) in pw.iter().enumerate() {
                m.0[k] = *p;
            }
            let lam = GaussianRational::from_int(re) + GaussianRational::i().scale(&nambu::symkernel::rat_int(im));
            ExpPoly::term(c, m, Frequency::from_entries([(axis, lam)]))
        },
    )
}

/// Complex exponential polynomials in `x_1..x_3`.
pub fn exppoly() -> impl Strategy<Value = ExpPoly> {
    prop::collection::vec(term(), 0..4).prop_map(|ts| ts.iter().fold(ExpPoly::zero(), |acc, t| acc.add(t)))
}

/// Real-valued exponential polynomials.
pub fn real_exppoly() -> impl Strategy<Value = ExpPoly> {
    exppoly().prop_map(|f| f.real_part())
}

pub fn point() -> impl Strategy<Value = [f64; AXES]> {
    prop::array::uniform3(-1.0f64..1.0)
}

/// A linear substitution of one axis by a form in all axes.
pub fn linear_sub() -> impl Strategy<Value = (usize, Vec<(usize, GaussianRational)>)> {
    (0usize..AXES, prop::collection::vec((0usize..AXES, -3i64..=3), 1..3)).prop_map(|(k, form)| {
        (k, form.into_iter().map(|(j, c)| (j, GaussianRational::from_int(c))).collect())
    })
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= EVAL_TOL * a.norm().max(b.norm()).max(1.0)
}

/// Ring axioms; returns the number of assertions made.
pub fn ring_axioms(f: &ExpPoly, g: &ExpPoly, h: &ExpPoly) -> Result<usize, TestCaseError> {
    prop_assert_eq!(f.add(g), g.add(f));
    prop_assert_eq!(f.mul(g), g.mul(f));
    prop_assert_eq!(f.add(g).add(h), f.add(&g.add(h)));
    prop_assert_eq!(f.mul(g).mul(h), f.mul(&g.mul(h)));
    prop_assert_eq!(f.mul(&g.add(h)), f.mul(g).add(&f.mul(h)));
    prop_assert_eq!(f.add(&ExpPoly::zero()), f.clone());
    prop_assert_eq!(f.mul(&ExpPoly::one()), f.clone());
    prop_assert!(f.sub(f).is_zero());
    prop_assert_eq!(f.pow(2), f.mul(f));
    Ok(9)
}

/// Linearity, the Leibniz rule and commuting partials.
pub fn derivation(f: &ExpPoly, g: &ExpPoly, i: usize, j: usize) -> Result<usize, TestCaseError> {
    prop_assert_eq!(f.add(g).differentiate(i), f.differentiate(i).add(&g.differentiate(i)));
    prop_assert_eq!(
        f.mul(g).differentiate(i),
        f.differentiate(i).mul(g).add(&f.mul(&g.differentiate(i)))
    );
    prop_assert_eq!(f.differentiate(i).differentiate(j), f.differentiate(j).differentiate(i));
    Ok(3)
}

/// Printing a real function and parsing it back gives the same normal form.
pub fn round_trip(f: &ExpPoly) -> Result<usize, TestCaseError> {
    let text = print(f);
    let back = parse(&text, &ParamEnv::new()).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
    prop_assert_eq!(&back, f, "printed as {}", text);
    Ok(1)
}

/// Evaluation at a point is a ring homomorphism and commutes with conjugation.
pub fn evaluation(f: &ExpPoly, g: &ExpPoly, p: &[f64; AXES]) -> Result<usize, TestCaseError> {
    let (fv, gv) = (f.evaluate_complex(p), g.evaluate_complex(p));
    prop_assert!(close(f.add(g).evaluate_complex(p), fv + gv));
    prop_assert!(close(f.mul(g).evaluate_complex(p), fv * gv));
    prop_assert!(close(f.conj().evaluate_complex(p), fv.conj()));
    prop_assert!(close(f.real_part().evaluate_complex(p), Complex64::new(fv.re, 0.0)));
    Ok(4)
}

/// Linear substitution is a ring homomorphism and agrees with evaluation at
/// the substituted point.
pub fn substitution(
    f: &ExpPoly,
    g: &ExpPoly,
    sub: &(usize, Vec<(usize, GaussianRational)>),
    p: &[f64; AXES],
) -> Result<usize, TestCaseError> {
    let s = std::slice::from_ref(sub);
    prop_assert_eq!(f.mul(g).substitute_linear(s), f.substitute_linear(s).mul(&g.substitute_linear(s)));
    prop_assert_eq!(f.add(g).substitute_linear(s), f.substitute_linear(s).add(&g.substitute_linear(s)));
    let mut q = *p;
    q[sub.0] = sub.1.iter().map(|(j, c)| c.to_f64_pair().0 * p[*j]).sum();
    prop_assert!(close(f.substitute_linear(s).evaluate_complex(p), f.evaluate_complex(&q)));
    Ok(3)
}

/// Renaming by a permutation is a ring homomorphism and is undone by the inverse.
pub fn renaming(f: &ExpPoly, g: &ExpPoly, perm: &[usize]) -> Result<usize, TestCaseError> {
    let mut inv = vec![0; perm.len()];
    for (k, &v) in perm.iter().enumerate() {
        inv[v] = k;
    }
    prop_assert_eq!(f.rename_axes(perm).rename_axes(&inv), f.clone());
    prop_assert_eq!(f.mul(g).rename_axes(perm), f.rename_axes(perm).mul(&g.rename_axes(perm)));
    Ok(2)
}

pub fn permutation() -> impl Strategy<Value = Vec<usize>> {
    Just((0..AXES).collect::<Vec<_>>()).prop_shuffle()
}
