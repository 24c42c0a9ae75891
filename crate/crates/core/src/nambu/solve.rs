//! The multiplicativity equations `X_i f + t_i f = q_i`, `f(e) = 0`, solved
//! exactly over a finite ansatz.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;

use crate::invfields::{Frame, VectorField};
use crate::symkernel::linalg::{solve, Rref};
use crate::symkernel::{print, ExpPoly, Frequency, GaussianRational as Gq, Monomial, Rational};

use super::NambuError;

/// Ansatz element `x^k e^{lambda.x}`.
pub type TermKey = (Monomial, Frequency);

fn key_poly(k: &TermKey) -> ExpPoly {
    ExpPoly::term(Gq::one(), k.0, k.1.clone())
}

fn keys_of(e: &ExpPoly) -> impl Iterator<Item = TermKey> + '_ {
    e.terms().iter().map(|t| (t.powers, t.freq.clone()))
}

/// One multiplicativity problem: fields `X_i = rows[i] / dens[i]`, trace
/// entries `t_i`, and a finite ansatz.
#[derive(Clone, Debug)]
pub struct MultiplicativityProblem {
    pub rows: Vec<VectorField>,
    pub dens: Vec<ExpPoly>,
    pub trace: Vec<Rational>,
    pub ansatz: Vec<TermKey>,
    /// Reject ansatz elements whose images leave the ansatz.
    pub strict: bool,
}

impl MultiplicativityProblem {
    pub fn new(frame: &Frame, trace: Vec<Rational>, ansatz: Vec<TermKey>) -> Self {
        Self {
            rows: frame.rows.clone(),
            dens: frame.dens.clone(),
            trace,
            ansatz,
            strict: false,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Adds the terms of `f` and their images under the fields.
    pub fn extend_ansatz(&mut self, f: &ExpPoly) {
        let mut set: BTreeSet<TermKey> = self.ansatz.iter().cloned().collect();
        for k in keys_of(f) {
            set.insert(k);
        }
        for k in keys_of(f).collect::<Vec<_>>() {
            for r in &self.rows {
                set.extend(keys_of(&r.apply(&key_poly(&k))));
            }
        }
        self.ansatz = set.into_iter().collect();
    }

    /// `N_i . grad f + t_i d_i f`, i.e. `d_i (X_i f + t_i f)`.
    fn lhs(&self, i: usize, f: &ExpPoly) -> ExpPoly {
        let mut r = self.rows[i].apply(f);
        if !self.trace[i].is_zero() {
            r = r.add(&f.mul(&self.dens[i]).scale(&Gq::real(self.trace[i].clone())));
        }
        r
    }

    /// First ansatz element whose image under some field leaves the ansatz.
    pub fn closure_defect(&self) -> Option<String> {
        let set: BTreeSet<&TermKey> = self.ansatz.iter().collect();
        for k in &self.ansatz {
            for i in 0..self.rows.len() {
                for img in keys_of(&self.lhs(i, &key_poly(k))) {
                    if !set.contains(&img) {
                        return Some(print(&key_poly(k)));
                    }
                }
            }
        }
        None
    }

    /// The constants `q_i` if `f` solves the system exactly (any `f`, not only
    /// ansatz members); `None` otherwise.
    pub fn residual_constants(&self, f: &ExpPoly) -> Option<Vec<Rational>> {
        if !f.at_origin().is_zero() {
            return None;
        }
        let mut qs = Vec::with_capacity(self.rows.len());
        for i in 0..self.rows.len() {
            let r = self.lhs(i, f);
            let d = &self.dens[i];
            let q = if r.is_zero() {
                Gq::zero()
            } else {
                let lead = &d.terms()[0];
                let c = r.coefficient(&lead.powers, &lead.freq);
                let q = &c / &lead.coeff;
                if r != d.scale(&q) {
                    return None;
                }
                q
            };
            if !q.is_real() {
                return None;
            }
            qs.push(q.re);
        }
        Some(qs)
    }
}

/// A real solution: constants `q` and the function `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub q: Vec<Rational>,
    pub f: ExpPoly,
}

/// Affine solution space of the multiplicativity equations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSpace {
    pub n: usize,
    /// Solutions keyed by the 0-based constant they switch on.
    pub particular: Vec<(usize, Solution)>,
    /// Solutions with all `q_i = 0`.
    pub homogeneous: Vec<ExpPoly>,
    /// Constants that vanish on every solution.
    pub forced_zero: Vec<usize>,
    pub ansatz_size: usize,
}

impl SolutionSpace {
    /// All basis solutions, particular ones first.
    pub fn basis(&self) -> Vec<Solution> {
        self.particular
            .iter()
            .map(|(_, s)| s.clone())
            .chain(self.homogeneous.iter().map(|f| Solution {
                q: vec![Rational::zero(); self.n],
                f: f.clone(),
            }))
            .collect()
    }

    /// Exact membership of `f` in the span of the basis; returns its constants.
    pub fn contains(&self, f: &ExpPoly) -> Option<Vec<Rational>> {
        self.contains_scaled(&[(f.clone(), ExpPoly::one())])
    }

    /// Finds one solution `f` with `target = scale * f` for every pair at
    /// once and returns its constants. This tests membership of functions
    /// known only through a multiple, such as a tensor component
    /// `f * det(frame)` over a frame with denominators.
    pub fn contains_scaled(&self, pairs: &[(ExpPoly, ExpPoly)]) -> Option<Vec<Rational>> {
        let basis = self.basis();
        if pairs.iter().all(|(t, _)| t.is_zero()) {
            return Some(vec![Rational::zero(); self.n]);
        }
        if basis.is_empty() {
            return None;
        }
        let mut rows: BTreeMap<(usize, TermKey), usize> = BTreeMap::new();
        let images: Vec<Vec<ExpPoly>> = pairs
            .iter()
            .map(|(_, s)| basis.iter().map(|b| b.f.mul(s)).collect())
            .collect();
        for (p, (target, _)) in pairs.iter().enumerate() {
            for e in images[p].iter().chain(std::iter::once(target)) {
                for k in keys_of(e) {
                    let n = rows.len();
                    rows.entry((p, k)).or_insert(n);
                }
            }
        }
        let mut a = vec![vec![Gq::zero(); basis.len()]; rows.len()];
        let mut rhs = vec![Gq::zero(); rows.len()];
        for (p, (target, _)) in pairs.iter().enumerate() {
            for (j, img) in images[p].iter().enumerate() {
                for t in img.terms() {
                    a[rows[&(p, (t.powers, t.freq.clone()))]][j] = t.coeff.clone();
                }
            }
            for t in target.terms() {
                rhs[rows[&(p, (t.powers, t.freq.clone()))]] = t.coeff.clone();
            }
        }
        let lam = solve(&a, &rhs)?;
        let mut q = vec![Gq::zero(); self.n];
        for (l, s) in lam.iter().zip(&basis) {
            for (qi, sq) in q.iter_mut().zip(&s.q) {
                *qi += &(l * &Gq::real(sq.clone()));
            }
        }
        // Real functions have real coordinates in a real basis.
        q.into_iter().map(|c| c.is_real().then_some(c.re)).collect()
    }

    /// The general solution, e.g. `q4*x4`, with homogeneous terms as `c1*(...)`.
    pub fn general_form(&self) -> String {
        let mut parts = Vec::new();
        for (k, s) in &self.particular {
            parts.push(scaled(&format!("q{}", k + 1), &s.f));
        }
        for (j, h) in self.homogeneous.iter().enumerate() {
            parts.push(scaled(&format!("c{}", j + 1), h));
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                None => {
                    out.push_str(" + ");
                    out.push_str(p);
                }
            }
        }
        out
    }
}

/// `name*f` with parentheses when `f` has several terms.
fn scaled(name: &str, f: &ExpPoly) -> String {
    let s = print(f);
    if f.len() == 1 {
        if s == "1" {
            name.to_string()
        } else if s == "-1" {
            format!("-{name}")
        } else if let Some(rest) = s.strip_prefix('-') {
            format!("-{name}*{rest}")
        } else {
            format!("{name}*{s}")
        }
    } else {
        format!("{name}*({s})")
    }
}

/// Solves the system exactly over the ansatz.
pub fn solve_multiplicative(p: &MultiplicativityProblem) -> Result<SolutionSpace, NambuError> {
    let n = p.rows.len();
    if p.trace.len() != n || p.dens.len() != n {
        return Err(NambuError::Shape("trace and denominators must match the fields".into()));
    }
    if p.strict {
        if let Some(esc) = p.closure_defect() {
            return Err(NambuError::AnsatzNotClosed(esc));
        }
    }
    let m = p.ansatz.len();
    // Columns: ansatz coefficients 0..m, then q_1..q_n.
    let mut eqs: HashMap<(usize, TermKey), Vec<(usize, Gq)>> = HashMap::new();
    for (j, k) in p.ansatz.iter().enumerate() {
        let b = key_poly(k);
        for i in 0..n {
            for t in p.lhs(i, &b).terms() {
                eqs.entry((i, (t.powers, t.freq.clone()))).or_default().push((j, t.coeff.clone()));
            }
        }
    }
    for i in 0..n {
        for t in p.dens[i].terms() {
            eqs.entry((i, (t.powers, t.freq.clone())))
                .or_default()
                .push((m + i, -&t.coeff));
        }
    }
    let mut rref = Rref::new(m + n);
    // f(e) = 0
    rref.insert(
        p.ansatz
            .iter()
            .enumerate()
            .filter(|(_, k)| k.0.is_one())
            .map(|(j, _)| (j, Gq::one())),
    );
    let mut ordered: Vec<_> = eqs.into_iter().collect();
    ordered.sort_by(|a, b| a.0.cmp(&b.0));
    for (_, row) in ordered {
        rref.insert(row);
    }
    let null = rref.nullspace();

    // Real basis: real and imaginary parts of each complex solution, reduced
    // over a real coordinate system (q columns first, then re/im per term).
    let mut real_sols = Vec::new();
    for v in &null {
        let f = ExpPoly::from_terms(p.ansatz.iter().zip(v).filter(|(_, c)| !c.is_zero()).map(|(k, c)| {
            crate::symkernel::ExpPolyTerm {
                coeff: c.clone(),
                powers: k.0,
                freq: k.1.clone(),
            }
        }));
        let q: Vec<Gq> = v[m..].to_vec();
        real_sols.push((q.iter().map(|c| c.re.clone()).collect::<Vec<_>>(), f.real_part()));
        real_sols.push((q.iter().map(|c| c.im.clone()).collect::<Vec<_>>(), f.imag_part()));
    }
    let mut cols: BTreeMap<TermKey, usize> = BTreeMap::new();
    for (_, f) in &real_sols {
        for k in keys_of(f) {
            cols.entry(k).or_insert(0);
        }
    }
    for (idx, v) in cols.values_mut().enumerate() {
        *v = n + 2 * idx;
    }
    let mut real = Rref::new(n + 2 * cols.len());
    for (q, f) in &real_sols {
        let mut row: Vec<(usize, Gq)> = q
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i, Gq::real(c.clone())))
            .collect();
        for t in f.terms() {
            let c = cols[&(t.powers, t.freq.clone())];
            if !t.coeff.re.is_zero() {
                row.push((c, Gq::real(t.coeff.re.clone())));
            }
            if !t.coeff.im.is_zero() {
                row.push((c + 1, Gq::real(t.coeff.im.clone())));
            }
        }
        real.insert(row);
    }
    let col_keys: Vec<&TermKey> = cols.keys().collect();
    let mut particular = Vec::new();
    let mut homogeneous = Vec::new();
    let mut reachable = vec![false; n];
    for row in real.rows() {
        let mut q = vec![Rational::zero(); n];
        let mut re: BTreeMap<usize, (Rational, Rational)> = BTreeMap::new();
        for (c, v) in row {
            if *c < n {
                q[*c] = v.re.clone();
                reachable[*c] = true;
            } else {
                let slot = re.entry((c - n) / 2).or_insert((Rational::zero(), Rational::zero()));
                if (c - n) % 2 == 0 {
                    slot.0 = v.re.clone();
                } else {
                    slot.1 = v.re.clone();
                }
            }
        }
        let f = ExpPoly::from_terms(re.into_iter().map(|(idx, (a, b))| crate::symkernel::ExpPolyTerm {
            coeff: Gq::new(a, b),
            powers: col_keys[idx].0,
            freq: col_keys[idx].1.clone(),
        }));
        let pivot = row[0].0;
        if pivot < n {
            particular.push((pivot, Solution { q, f }));
        } else {
            homogeneous.push(f);
        }
    }
    let forced_zero = (0..n).filter(|i| !reachable[*i]).collect();
    Ok(SolutionSpace {
        n,
        particular,
        homogeneous,
        forced_zero,
        ansatz_size: m,
    })
}

/// Degree-bounded monomials in `axes` times exponentials whose frequencies are
/// sums of at most two frequencies occurring in the frame, the trace-induced
/// decay rates, or 0. `trace[k]` belongs to the coordinate `axes[k]`.
///
/// This is a heuristic: it contains every closed-form solution we have met but
/// is not closed under the fields in general.
pub fn default_ansatz(frame: &Frame, trace: &[Rational], axes: &[usize], degree: u32) -> Vec<TermKey> {
    let mut freqs: BTreeSet<Frequency> = BTreeSet::new();
    freqs.insert(Frequency::zero());
    // Solutions of `X_i f + t_i f = q_i` pick up `exp(-t_i x^i)` factors.
    for (&ax, t) in axes.iter().zip(trace) {
        if !t.is_zero() {
            freqs.insert(Frequency::from_entries([(ax, Gq::real(-t.clone()))]));
        }
    }
    for (row, den) in frame.rows.iter().zip(&frame.dens) {
        for c in row.components.iter().chain(std::iter::once(den)) {
            for f in c.frequencies() {
                freqs.insert(f);
            }
        }
    }
    let base: Vec<Frequency> = freqs.iter().cloned().collect();
    for a in &base {
        for b in &base {
            freqs.insert(a.add(b));
        }
    }
    let mut monos = vec![Monomial::one()];
    let mut frontier = vec![Monomial::one()];
    for _ in 0..degree {
        let mut next = Vec::new();
        for m in &frontier {
            for &ax in axes {
                let mm = m.mul(&Monomial::var(ax));
                if !monos.contains(&mm) {
                    monos.push(mm);
                    next.push(mm);
                }
            }
        }
        frontier = next;
    }
    let mut out = Vec::new();
    for m in &monos {
        for f in &freqs {
            out.push((*m, f.clone()));
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::{parse, rat_int, ParamEnv};

    fn env() -> ParamEnv {
        ParamEnv::new()
    }

    fn frame(rows: &[[&str; 4]]) -> Frame {
        Frame::parse(
            &rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect::<Vec<_>>(),
            &env(),
        )
        .unwrap()
    }

    #[test]
    fn abelian_solutions() {
        let f = Frame::identity(4);
        let t = vec![rat_int(0); 4];
        let p = MultiplicativityProblem::new(&f, t.clone(), default_ansatz(&f, &t, &[0, 1, 2, 3], 2));
        let s = solve_multiplicative(&p).unwrap();
        assert_eq!(s.particular.len(), 4);
        assert!(s.homogeneous.is_empty());
        assert!(s.forced_zero.is_empty());
        assert_eq!(s.general_form(), "q1*x1 + q2*x2 + q3*x3 + q4*x4");
    }

    #[test]
    fn worked_example() {
        let f = frame(&[
            ["1", "0", "0", "0"],
            ["-x3*exp(-x4)", "exp(-x4)", "0", "0"],
            ["0", "0", "exp(x4)", "0"],
            ["0", "0", "0", "1"],
        ]);
        let t = vec![rat_int(0); 4];
        let p = MultiplicativityProblem::new(&f, t.clone(), default_ansatz(&f, &t, &[0, 1, 2, 3], 2));
        let s = solve_multiplicative(&p).unwrap();
        assert_eq!(s.forced_zero, vec![0, 1, 2]);
        let q = s.contains(&parse("x4", &env()).unwrap()).unwrap();
        assert_eq!(q, vec![rat_int(0), rat_int(0), rat_int(0), rat_int(1)]);
        assert_eq!(p.residual_constants(&parse("3*x4", &env()).unwrap()).unwrap()[3], rat_int(3));
        assert!(s.contains(&parse("x1", &env()).unwrap()).is_none());
    }

    #[test]
    fn nonzero_trace() {
        // A2 + 2A1: [X1,X2] = X2, t = (1,0,0,0), X1 = d1 - x2 d2.
        let f = frame(&[["1", "-x2", "0", "0"], ["0", "1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]]);
        let t = vec![rat_int(1), rat_int(0), rat_int(0), rat_int(0)];
        let p = MultiplicativityProblem::new(&f, t.clone(), default_ansatz(&f, &t, &[0, 1, 2, 3], 2));
        let s = solve_multiplicative(&p).unwrap();
        let claim = parse("x2 + (exp(-x1) - 1)", &env()).unwrap();
        assert!(s.contains(&claim).is_some());
        for b in s.basis() {
            assert_eq!(p.residual_constants(&b.f).unwrap(), b.q);
        }
    }
}
