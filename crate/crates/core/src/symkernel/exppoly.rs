//! Exponential polynomials: finite sums of `c * x^k * exp(lambda . x)`.
//!
//! Coordinates are indexed from 0 internally (axis 0 is `x1`). Sines and
//! cosines live here as conjugate pairs of complex exponentials.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_complex::Complex64;

use super::gauss::{rational_to_f64, GaussianRational, Rational};
use super::SymError;

/// Largest number of coordinate axes supported by the kernel.
pub const MAX_AXES: usize = 8;

/// Imaginary residue tolerated when evaluating a real function.
pub const IMAG_TOL: f64 = 1e-12;

/// Exponent vector of a monomial `x^k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(pub [u16; MAX_AXES]);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(axis: usize) -> Self {
        let mut m = Self::default();
        m.0[axis] = 1;
        m
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&p| p as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&p| p == 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = *self;
        for (o, p) in out.0.iter_mut().zip(other.0.iter()) {
            *o += p;
        }
        out
    }

    pub fn power(&self, axis: usize) -> u16 {
        self.0[axis]
    }

    /// Highest axis index with a nonzero power, plus one.
    pub fn span(&self) -> usize {
        self.0.iter().rposition(|&p| p != 0).map_or(0, |i| i + 1)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Frequency vector `lambda` of `exp(lambda . x)`; zero entries are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Frequency(Vec<(u8, GaussianRational)>);

impl Frequency {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (usize, GaussianRational)>) -> Self {
        let mut dense: Vec<GaussianRational> = vec![GaussianRational::zero(); MAX_AXES];
        for (axis, c) in entries {
            dense[axis] += &c;
        }
        Self::from_dense(&dense)
    }

    pub fn from_dense(dense: &[GaussianRational]) -> Self {
        Self(
            dense
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i as u8, c.clone()))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, axis: usize) -> GaussianRational {
        self.0
            .iter()
            .find(|(a, _)| *a as usize == axis)
            .map(|(_, c)| c.clone())
            .unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &GaussianRational)> {
        self.0.iter().map(|(a, c)| (*a as usize, c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            match (self.0.get(i), other.0.get(j)) {
                (Some(a), Some(b)) if a.0 == b.0 => {
                    let s = &a.1 + &b.1;
                    if !s.is_zero() {
                        out.push((a.0, s));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a.0 < b.0 => {
                    out.push(a.clone());
                    i += 1;
                }
                (Some(_), Some(b)) => {
                    out.push(b.clone());
                    j += 1;
                }
                (Some(a), None) => {
                    out.push(a.clone());
                    i += 1;
                }
                (None, Some(b)) => {
                    out.push(b.clone());
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Self(out)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|(a, c)| (*a, -c)).collect())
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self(self.0.iter().map(|(a, c)| (*a, c * s)).collect())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|(a, c)| (*a, c.conj())).collect())
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|(_, c)| c.is_real())
    }

    pub fn real_part(&self) -> Self {
        Self::from_entries(self.entries().map(|(a, c)| (a, GaussianRational::real(c.re.clone()))))
    }

    pub fn imag_part(&self) -> Self {
        Self::from_entries(self.entries().map(|(a, c)| (a, GaussianRational::real(c.im.clone()))))
    }

    pub fn span(&self) -> usize {
        self.0.last().map_or(0, |(a, _)| *a as usize + 1)
    }

    fn cmp_component(&self, other: &Self, part: fn(&GaussianRational) -> &Rational) -> Ordering {
        for axis in 0..MAX_AXES {
            let a = self.get(axis);
            let b = other.get(axis);
            let ord = part(&a).cmp(part(&b));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }
}

impl Ord for Frequency {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_component(other, |c| &c.re)
            .then_with(|| self.cmp_component(other, |c| &c.im))
    }
}

impl PartialOrd for Frequency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One term `coeff * x^powers * exp(freq . x)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExpPolyTerm {
    pub coeff: GaussianRational,
    pub powers: Monomial,
    pub freq: Frequency,
}

impl ExpPolyTerm {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.powers
            .cmp(&other.powers)
            .then_with(|| self.freq.cmp(&other.freq))
    }
}

/// Canonical sum of terms. Equality of values is equality of functions.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct ExpPoly {
    terms: Vec<ExpPolyTerm>,
}

type TermKey = (Monomial, Frequency);

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::term(c, Monomial::one(), Frequency::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(GaussianRational::from_int(n))
    }

    pub fn from_rational(r: Rational) -> Self {
        Self::constant(GaussianRational::real(r))
    }

    /// The coordinate function `x_{axis+1}`.
    pub fn coord(axis: usize) -> Self {
        assert!(axis < MAX_AXES, "axis {axis} out of range");
        Self::term(GaussianRational::one(), Monomial::var(axis), Frequency::zero())
    }

    /// `exp(freq . x)`.
    pub fn exp(freq: Frequency) -> Self {
        Self::term(GaussianRational::one(), Monomial::one(), freq)
    }

    pub fn term(coeff: GaussianRational, powers: Monomial, freq: Frequency) -> Self {
        if coeff.is_zero() {
            return Self::zero();
        }
        Self {
            terms: vec![ExpPolyTerm { coeff, powers, freq }],
        }
    }

    /// Builds the normal form from arbitrary (possibly repeated or zero) terms.
    pub fn from_terms(terms: impl IntoIterator<Item = ExpPolyTerm>) -> Self {
        let mut acc: HashMap<TermKey, GaussianRational> = HashMap::new();
        for t in terms {
            if t.coeff.is_zero() {
                continue;
            }
            acc.entry((t.powers, t.freq))
                .and_modify(|c| *c += &t.coeff)
                .or_insert(t.coeff);
        }
        let mut terms: Vec<ExpPolyTerm> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((powers, freq), coeff)| ExpPolyTerm { coeff, powers, freq })
            .collect();
        terms.sort_by(|a, b| a.key_cmp(b));
        Self { terms }
    }

    pub fn terms(&self) -> &[ExpPolyTerm] {
        &self.terms
    }

    /// Substitutes `x_{k+1} -> x_{map[k]+1}`; `map` must be injective and
    /// cover every axis the function uses.
    pub fn rename_axes(&self, map: &[usize]) -> ExpPoly {
        Self::from_terms(self.terms.iter().map(|t| {
            let mut powers = Monomial::one();
            for (k, &p) in t.powers.0.iter().enumerate() {
                if p != 0 {
                    powers.0[map[k]] += p;
                }
            }
            let freq = Frequency::from_entries(t.freq.entries().map(|(k, c)| (map[k], c.clone())));
            ExpPolyTerm {
                coeff: t.coeff.clone(),
                powers,
                freq,
            }
        }))
    }

    /// Substitutes linear forms for some coordinates: each `(k, form)`
    /// replaces `x_{k+1}` by `sum c * x_{j+1}` over `(j, c)` in `form`.
    pub fn substitute_linear(&self, subs: &[(usize, Vec<(usize, GaussianRational)>)]) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for t in &self.terms {
            let mut powers = t.powers;
            let mut factor = ExpPoly::one();
            let mut freq: Vec<GaussianRational> = (0..MAX_AXES).map(|a| t.freq.get(a)).collect();
            for (k, _) in subs {
                freq[*k] = GaussianRational::zero();
            }
            // Substitutions are simultaneous: read the original term only.
            for (k, form) in subs {
                let p = t.powers.0[*k];
                powers.0[*k] = 0;
                let lin = ExpPoly::from_terms(form.iter().map(|(j, c)| ExpPolyTerm {
                    coeff: c.clone(),
                    powers: Monomial::var(*j),
                    freq: Frequency::zero(),
                }));
                factor = factor.mul(&lin.pow(u32::from(p)));
                let fk = t.freq.get(*k);
                if !fk.is_zero() {
                    for (j, c) in form {
                        freq[*j] += &(&fk * c);
                    }
                }
            }
            let freq = Frequency::from_entries(freq.into_iter().enumerate());
            out = out.add(&factor.mul(&ExpPoly::term(t.coeff.clone(), powers, freq)));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if this is a constant function.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.as_slice() {
            [] => Some(GaussianRational::zero()),
            [t] if t.powers.is_one() && t.freq.is_zero() => Some(t.coeff.clone()),
            _ => None,
        }
    }

    /// `Some((c, lambda))` when this is the unit `c * exp(lambda . x)` with `c != 0`.
    pub fn as_unit(&self) -> Option<(GaussianRational, Frequency)> {
        match self.terms.as_slice() {
            [t] if t.powers.is_one() => Some((t.coeff.clone(), t.freq.clone())),
            _ => None,
        }
    }

    /// Multiplicative inverse of a unit.
    pub fn unit_inverse(&self) -> Option<ExpPoly> {
        let (c, f) = self.as_unit()?;
        Some(Self::term(c.inv()?, Monomial::one(), f.neg()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match a[i].key_cmp(&b[j]) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].coeff + &b[j].coeff;
                    if !c.is_zero() {
                        out.push(ExpPolyTerm {
                            coeff: c,
                            powers: a[i].powers,
                            freq: a[i].freq.clone(),
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self { terms: out }
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| ExpPolyTerm {
                    coeff: -&t.coeff,
                    powers: t.powers,
                    freq: t.freq.clone(),
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| ExpPolyTerm {
                    coeff: &t.coeff * s,
                    powers: t.powers,
                    freq: t.freq.clone(),
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut prods = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                prods.push(ExpPolyTerm {
                    coeff: &a.coeff * &b.coeff,
                    powers: a.powers.mul(&b.powers),
                    freq: a.freq.add(&b.freq),
                });
            }
        }
        Self::from_terms(prods)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact partial derivative with respect to `x_{axis+1}`.
    pub fn differentiate(&self, axis: usize) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * 2);
        for t in &self.terms {
            let k = t.powers.power(axis);
            if k > 0 {
                let mut p = t.powers;
                p.0[axis] -= 1;
                out.push(ExpPolyTerm {
                    coeff: t.coeff.scale(&Rational::from_integer((k as i64).into())),
                    powers: p,
                    freq: t.freq.clone(),
                });
            }
            let lam = t.freq.get(axis);
            if !lam.is_zero() {
                out.push(ExpPolyTerm {
                    coeff: &t.coeff * &lam,
                    powers: t.powers,
                    freq: t.freq.clone(),
                });
            }
        }
        Self::from_terms(out)
    }

    /// Complex conjugate of the function (coefficients and frequencies).
    pub fn conj(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|t| ExpPolyTerm {
            coeff: t.coeff.conj(),
            powers: t.powers,
            freq: t.freq.conj(),
        }))
    }

    /// True when the function takes real values at real points.
    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    /// `(f + conj f) / 2`.
    pub fn real_part(&self) -> Self {
        self.add(&self.conj()).scale(&GaussianRational::from_frac(1, 2))
    }

    /// `(f - conj f) / (2i)`.
    pub fn imag_part(&self) -> Self {
        let half_i_inv = GaussianRational::new(Rational::from_integer(0.into()), Rational::new((-1).into(), 2.into()));
        self.sub(&self.conj()).scale(&half_i_inv)
    }

    /// Exact value at the origin.
    pub fn at_origin(&self) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for t in &self.terms {
            if t.powers.is_one() {
                acc += &t.coeff;
            }
        }
        acc
    }

    /// Complex value at a real point.
    pub fn evaluate_complex(&self, point: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let (cr, ci) = t.coeff.to_f64_pair();
            let mut v = Complex64::new(cr, ci);
            for (axis, &p) in t.powers.0.iter().enumerate() {
                if p > 0 {
                    v *= point.get(axis).copied().unwrap_or(0.0).powi(p as i32);
                }
            }
            let mut arg = Complex64::new(0.0, 0.0);
            for (axis, lam) in t.freq.entries() {
                let (lr, li) = lam.to_f64_pair();
                arg += Complex64::new(lr, li) * point.get(axis).copied().unwrap_or(0.0);
            }
            acc += v * arg.exp();
        }
        acc
    }

    /// Real value at a real point; fails if the imaginary residue is not negligible.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64, SymError> {
        if point.iter().any(|c| !c.is_finite()) {
            return Err(SymError::NonFinitePoint);
        }
        let v = self.evaluate_complex(point);
        let scale = v.re.abs().max(1.0);
        if v.im.abs() >= IMAG_TOL * scale {
            return Err(SymError::NonRealResult { residue: v.im });
        }
        Ok(v.re)
    }

    /// Number of axes the function depends on (highest axis used, plus one).
    pub fn span(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.powers.span().max(t.freq.span()))
            .max()
            .unwrap_or(0)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.powers.degree()).max().unwrap_or(0)
    }

    /// Distinct frequency vectors occurring in the terms.
    pub fn frequencies(&self) -> Vec<Frequency> {
        let mut fs: Vec<Frequency> = self.terms.iter().map(|t| t.freq.clone()).collect();
        fs.sort();
        fs.dedup();
        fs
    }

    /// Coefficient of the basis function `x^powers exp(freq . x)`.
    pub fn coefficient(&self, powers: &Monomial, freq: &Frequency) -> GaussianRational {
        self.terms
            .iter()
            .find(|t| t.powers == *powers && t.freq == *freq)
            .map(|t| t.coeff.clone())
            .unwrap_or_default()
    }

    /// Largest numerator/denominator bit size among the coefficients; guards blow-up.
    pub fn coefficient_bits(&self) -> u64 {
        self.terms
            .iter()
            .map(|t| {
                [&t.coeff.re, &t.coeff.im]
                    .iter()
                    .map(|r| r.numer().bits().max(r.denom().bits()))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }
}

/// Reads a real rational from a constant ExpPoly.
pub fn real_constant(e: &ExpPoly) -> Option<Rational> {
    let c = e.as_constant()?;
    c.is_real().then_some(c.re)
}

pub fn f64_of(r: &Rational) -> f64 {
    rational_to_f64(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::gauss::rat_int;

    fn x(i: usize) -> ExpPoly {
        ExpPoly::coord(i - 1)
    }

    fn e(axis: usize, lam: i64) -> ExpPoly {
        ExpPoly::exp(Frequency::from_entries([(axis - 1, GaussianRational::from_int(lam))]))
    }

    #[test]
    fn additive_identities() {
        assert_eq!(x(1).add(&ExpPoly::zero()), x(1));
        assert!(e(4, -1).add(&e(4, -1).neg()).is_zero());
        let q = x(4).scale(&GaussianRational::from_frac(1, 3));
        assert_eq!(q.add(&q), x(4).scale(&GaussianRational::from_frac(2, 3)));
    }

    #[test]
    fn products_merge_keys() {
        let p = x(3).mul(&e(4, -1));
        assert_eq!(p.len(), 1);
        let t = &p.terms()[0];
        assert_eq!(t.powers.power(2), 1);
        assert_eq!(t.freq.get(3), GaussianRational::from_int(-1));
        assert_eq!(e(4, 1).mul(&e(4, -1)), ExpPoly::one());
    }

    #[test]
    fn derivative_product_rule() {
        let f = x(4).mul(&e(4, -2));
        let expected = e(4, -2).sub(&x(4).mul(&e(4, -2)).scale(&GaussianRational::from_int(2)));
        assert_eq!(f.differentiate(3), expected);
        assert!(x(1).differentiate(1).is_zero());
    }

    #[test]
    fn evaluation() {
        let f = e(4, -2).sub(&ExpPoly::one());
        assert_eq!(f.evaluate(&[0.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        let g = x(3).mul(&e(4, -1));
        assert_eq!(g.evaluate(&[0.0, 0.0, 2.0, 0.0]).unwrap(), 2.0);
        let h = ExpPoly::exp(Frequency::from_entries([(0, GaussianRational::i())]));
        assert!(matches!(h.evaluate(&[1.0, 0.0, 0.0, 0.0]), Err(SymError::NonRealResult { .. })));
    }

    #[test]
    fn ordering_is_graded() {
        let f = x(1).mul(&x(1)).add(&x(2)).add(&ExpPoly::one()).add(&e(1, 1));
        let degs: Vec<u32> = f.terms().iter().map(|t| t.powers.degree()).collect();
        assert_eq!(degs, vec![0, 0, 1, 2]);
        assert_eq!(f.at_origin(), GaussianRational::real(rat_int(2)));
    }
}
