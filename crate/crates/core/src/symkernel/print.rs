//! Deterministic printer emitting the parser's grammar.
//!
//! Conjugate pairs `c e^{(α+iβ)x} + conj` are folded back into
//! `e^{αx}(2Re(c) cos(βx) - 2Im(c) sin(βx))`.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::exppoly::{ExpPoly, ExpPolyTerm, Frequency, Monomial};
use super::gauss::{format_rational, GaussianRational, Rational};

pub fn print(e: &ExpPoly) -> String {
    let items = items(e);
    if items.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (neg, body)) in items.iter().enumerate() {
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(body);
    }
    out
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

fn items(e: &ExpPoly) -> Vec<(bool, String)> {
    let terms = e.terms();
    let mut consumed: HashSet<usize> = HashSet::new();
    let mut out = Vec::new();
    for (i, t) in terms.iter().enumerate() {
        if consumed.contains(&i) {
            continue;
        }
        consumed.insert(i);
        if !t.freq.is_real() {
            let cf = t.freq.conj();
            let partner = terms.iter().enumerate().position(|(j, u)| {
                !consumed.contains(&j) && u.powers == t.powers && u.freq == cf && u.coeff == t.coeff.conj()
            });
            if let Some(j) = partner {
                consumed.insert(j);
                let rep = if leading_positive(&t.freq.imag_part()) { t } else { &terms[j] };
                fold_pair(rep, &mut out);
                continue;
            }
        }
        out.push(raw_term(&t.coeff, &t.powers, &t.freq, None));
    }
    out
}

fn leading_positive(f: &Frequency) -> bool {
    f.entries().next().is_some_and(|(_, c)| c.re.is_positive())
}

fn fold_pair(rep: &ExpPolyTerm, out: &mut Vec<(bool, String)>) {
    let two = Rational::from_integer(2.into());
    let alpha = rep.freq.real_part();
    let beta = rep.freq.imag_part();
    let cos_c = &rep.coeff.re * &two;
    let sin_c = -(&rep.coeff.im * &two);
    if !cos_c.is_zero() {
        out.push(raw_term(
            &GaussianRational::real(cos_c),
            &rep.powers,
            &alpha,
            Some(("cos", &beta)),
        ));
    }
    if !sin_c.is_zero() {
        out.push(raw_term(
            &GaussianRational::real(sin_c),
            &rep.powers,
            &alpha,
            Some(("sin", &beta)),
        ));
    }
}

fn raw_term(
    c: &GaussianRational,
    powers: &Monomial,
    freq: &Frequency,
    trig: Option<(&str, &Frequency)>,
) -> (bool, String) {
    let mut factors = Vec::new();
    for (axis, &p) in powers.0.iter().enumerate() {
        match p {
            0 => {}
            1 => factors.push(format!("x{}", axis + 1)),
            _ => factors.push(format!("x{}^{}", axis + 1, p)),
        }
    }
    if !freq.is_zero() {
        factors.push(format!("exp({})", linear_form(freq)));
    }
    if let Some((name, beta)) = trig {
        factors.push(format!("{name}({})", linear_form(beta)));
    }
    let (neg, coeff) = if c.is_real() {
        (c.re.is_negative(), magnitude(&c.re))
    } else if c.re.is_zero() {
        let m = magnitude(&c.im);
        let s = if m == "1" { "I".to_string() } else { format!("{m}*I") };
        (c.im.is_negative(), s)
    } else {
        (false, c.to_string())
    };
    if factors.is_empty() {
        return (neg, coeff);
    }
    let body = factors.join("*");
    if coeff == "1" {
        (neg, body)
    } else {
        (neg, format!("{coeff}*{body}"))
    }
}

fn magnitude(r: &Rational) -> String {
    format_rational(&r.abs())
}

/// `-2*x4`, `x1+1/2*x3`, `(1+I)*x2`.
pub fn linear_form(f: &Frequency) -> String {
    let mut out = String::new();
    for (k, (axis, c)) in f.entries().enumerate() {
        let var = format!("x{}", axis + 1);
        let (neg, body) = if c.is_real() {
            let neg = c.re.is_negative();
            let m = c.re.abs();
            if m.is_one() {
                (neg, var)
            } else {
                (neg, format!("{}*{var}", format_rational(&m)))
            }
        } else if c.re.is_zero() {
            let m = c.im.abs();
            if m.is_one() {
                (c.im.is_negative(), format!("I*{var}"))
            } else {
                (c.im.is_negative(), format!("{}*I*{var}", format_rational(&m)))
            }
        } else {
            (false, format!("{c}*{var}"))
        };
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push('-'),
            (_, false) => out.push('+'),
        }
        out.push_str(&body);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::expr::{parse, ParamEnv};

    fn roundtrip(src: &str) -> String {
        let e = parse(src, &ParamEnv::new()).unwrap();
        let printed = print(&e);
        let again = parse(&printed, &ParamEnv::new()).unwrap();
        assert_eq!(e, again, "round trip failed for {src} -> {printed}");
        printed
    }

    #[test]
    fn folds_trig_pairs() {
        assert_eq!(roundtrip("cos(x3)"), "cos(x3)");
        assert_eq!(roundtrip("-sin(x3)"), "-sin(x3)");
        assert_eq!(roundtrip("sin(x3)*sin(x3)+cos(x3)*cos(x3)"), "1");
        assert_eq!(roundtrip("x2*exp(-x4)*cos(2*x4)"), "x2*exp(-x4)*cos(2*x4)");
    }

    #[test]
    fn prints_plain_forms() {
        assert_eq!(roundtrip("x3*exp(-x4)"), "x3*exp(-x4)");
        assert_eq!(roundtrip("0*x1"), "0");
        assert_eq!(roundtrip("2*x1+x2^2-exp(-x1-x3)"), "-exp(-x1-x3) + 2*x1 + x2^2");
        assert_eq!(roundtrip("I*exp(I*x1)"), "I*exp(I*x1)");
        assert_eq!(roundtrip("(1+2*I)*x1"), "(1+2*I)*x1");
    }
}
