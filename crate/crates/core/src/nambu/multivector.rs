//! Antisymmetric multivector fields with exponential-polynomial components.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::invfields::{det, VectorField};
use crate::symkernel::{print, ExpPoly, GaussianRational, Monomial};

/// A prefactor times a wedge of fields, kept alongside the components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposable {
    pub prefactor: ExpPoly,
    pub factors: Vec<VectorField>,
}

/// Order-`n` multivector on a `dim`-dimensional chart. Components are stored
/// for strictly increasing index tuples (0-based) and only when nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multivector {
    dim: usize,
    order: usize,
    components: BTreeMap<Vec<usize>, ExpPoly>,
    provenance: Option<Decomposable>,
}

/// Increasing `k`-subsets of `0..n`, lexicographic.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Sorts `idx` and returns the permutation sign, or `None` on a repeated index.
pub fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut v = idx.to_vec();
    let mut negative = false;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] == v[j + 1] {
                return None;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                negative = !negative;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, negative))
}

impl Multivector {
    pub fn zero(dim: usize, order: usize) -> Self {
        Self {
            dim,
            order,
            components: BTreeMap::new(),
            provenance: None,
        }
    }

    /// Builds from `(indices, value)` pairs; indices may be unsorted (sign applied)
    /// and repeated entries are summed.
    pub fn from_components(
        dim: usize,
        order: usize,
        entries: impl IntoIterator<Item = (Vec<usize>, ExpPoly)>,
    ) -> Self {
        let mut mv = Self::zero(dim, order);
        for (idx, v) in entries {
            assert_eq!(idx.len(), order, "index tuple length");
            let Some((sorted, neg)) = sort_with_sign(&idx) else { continue };
            let v = if neg { v.neg() } else { v };
            let e = mv.components.entry(sorted).or_insert_with(ExpPoly::zero);
            *e = e.add(&v);
        }
        mv.components.retain(|_, v| !v.is_zero());
        mv
    }

    /// `f * d_1 ^ ... ^ d_dim`.
    pub fn top(dim: usize, f: ExpPoly) -> Self {
        Self::from_components(dim, dim, [((0..dim).collect(), f)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn provenance(&self) -> Option<&Decomposable> {
        self.provenance.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &ExpPoly)> {
        self.components.iter()
    }

    /// Component for an arbitrary index tuple, antisymmetry applied.
    pub fn component(&self, idx: &[usize]) -> ExpPoly {
        match sort_with_sign(idx) {
            None => ExpPoly::zero(),
            Some((sorted, neg)) => {
                let v = self.components.get(&sorted).cloned().unwrap_or_else(ExpPoly::zero);
                if neg {
                    v.neg()
                } else {
                    v
                }
            }
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let entries = self
            .components
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .chain(o.components.iter().map(|(k, v)| (k.clone(), v.neg())));
        Self::from_components(self.dim, self.order, entries)
    }

    pub fn mul_fn(&self, f: &ExpPoly) -> Self {
        Self::from_components(
            self.dim,
            self.order,
            self.components.iter().map(|(k, v)| (k.clone(), v.mul(f))),
        )
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, v) in &self.components {
            if !first {
                writeln!(f)?;
            }
            first = false;
            let label: String = idx.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "eta^{label} = {}", print(v))?;
        }
        Ok(())
    }
}

/// `f * X_1 ^ ... ^ X_n`: each component is `f` times the minor of the
/// field matrix on the selected columns.
pub fn wedge(f: &ExpPoly, fields: &[VectorField]) -> Multivector {
    let order = fields.len();
    let dim = fields.first().map_or(0, |x| x.dim());
    let mut mv = Multivector::zero(dim, order);
    if !f.is_zero() {
        for cols in combinations(dim, order) {
            let m: Vec<Vec<ExpPoly>> = fields
                .iter()
                .map(|x| cols.iter().map(|&c| x.components[c].clone()).collect())
                .collect();
            let d = det(&m);
            if !d.is_zero() {
                mv.components.insert(cols, d.mul(f));
            }
        }
    }
    mv.provenance = Some(Decomposable {
        prefactor: f.clone(),
        factors: fields.to_vec(),
    });
    mv
}

/// `{f_1, ..., f_n} = eta(df_1, ..., df_n)`.
pub fn nbracket(eta: &Multivector, fs: &[ExpPoly]) -> ExpPoly {
    assert_eq!(fs.len(), eta.order, "bracket arity must equal the order");
    let grads: Vec<Vec<ExpPoly>> = fs
        .iter()
        .map(|f| (0..eta.dim).map(|mu| f.differentiate(mu)).collect())
        .collect();
    let mut acc = ExpPoly::zero();
    for (idx, v) in &eta.components {
        let m: Vec<Vec<ExpPoly>> = grads
            .iter()
            .map(|g| idx.iter().map(|&mu| g[mu].clone()).collect())
            .collect();
        let d = det(&m);
        if !d.is_zero() {
            acc = acc.add(&v.mul(&d));
        }
    }
    acc
}

/// The field `g -> {f_1, ..., f_{n-1}, g}`, read off on coordinate functions.
pub fn hamiltonian_field(eta: &Multivector, fs: &[ExpPoly]) -> VectorField {
    assert_eq!(fs.len() + 1, eta.order, "need order - 1 functions");
    let comps = (0..eta.dim)
        .map(|mu| {
            let mut args = fs.to_vec();
            args.push(ExpPoly::coord(mu));
            nbracket(eta, &args)
        })
        .collect();
    VectorField::new(comps)
}

/// `(L_X eta)^{I} = X(eta^I) - sum_a (d_nu X^{I_a}) eta^{I_1..nu..I_n}`.
pub fn lie_derivative(x: &VectorField, eta: &Multivector) -> Multivector {
    let dim = eta.dim;
    let jac: Vec<Vec<ExpPoly>> = (0..dim)
        .map(|mu| (0..dim).map(|nu| x.components[mu].differentiate(nu)).collect())
        .collect();
    let mut entries = Vec::new();
    for idx in combinations(dim, eta.order) {
        let mut v = x.apply(&eta.component(&idx));
        for a in 0..idx.len() {
            for (nu, row) in jac[idx[a]].iter().enumerate() {
                if row.is_zero() {
                    continue;
                }
                let mut j = idx.clone();
                j[a] = nu;
                let e = eta.component(&j);
                if !e.is_zero() {
                    v = v.sub(&row.mul(&e));
                }
            }
        }
        if !v.is_zero() {
            entries.push((idx, v));
        }
    }
    Multivector::from_components(dim, eta.order, entries)
}

/// Outcome of [`fundamental_identity_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiReport {
    Pass { trials: usize },
    Counterexample {
        functions: Vec<String>,
        /// 1-based index tuple of the first nonzero component.
        component: Vec<usize>,
        value: String,
    },
}

impl FiReport {
    pub fn passed(&self) -> bool {
        matches!(self, FiReport::Pass { .. })
    }
}

/// Random polynomial of degree at most 2 with small integer coefficients.
pub fn random_polynomial(rng: &mut ChaCha8Rng, dim: usize) -> ExpPoly {
    let mut monos = vec![Monomial::one()];
    for i in 0..dim {
        monos.push(Monomial::var(i));
        for j in i..dim {
            monos.push(Monomial::var(i).mul(&Monomial::var(j)));
        }
    }
    loop {
        let mut f = ExpPoly::zero();
        let count = rng.gen_range(1..=4);
        for _ in 0..count {
            let m = monos[rng.gen_range(0..monos.len())];
            let c = rng.gen_range(-3i64..=3);
            if c != 0 && !m.is_one() {
                f = f.add(&ExpPoly::term(GaussianRational::from_int(c), m, Default::default()));
            }
        }
        if !f.is_zero() {
            return f;
        }
    }
}

/// Checks `L_{X_{f_1..f_{n-1}}} eta = 0` on seeded random polynomial tuples.
pub fn fundamental_identity_check(eta: &Multivector, trials: usize, seed: u64) -> FiReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let fs: Vec<ExpPoly> = (0..eta.order - 1).map(|_| random_polynomial(&mut rng, eta.dim)).collect();
        let x = hamiltonian_field(eta, &fs);
        let l = lie_derivative(&x, eta);
        if let Some((idx, v)) = l.components.iter().next() {
            return FiReport::Counterexample {
                functions: fs.iter().map(print).collect(),
                component: idx.iter().map(|i| i + 1).collect(),
                value: print(v),
            };
        }
    }
    FiReport::Pass { trials }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::{parse, ParamEnv};

    fn p(s: &str) -> ExpPoly {
        parse(s, &ParamEnv::new().with("q4", crate::symkernel::rat_int(1))).unwrap()
    }

    fn coords() -> Vec<VectorField> {
        (0..4).map(|i| VectorField::coordinate(4, i)).collect()
    }

    #[test]
    fn wedge_and_bracket() {
        let vol = wedge(&ExpPoly::one(), &coords());
        assert_eq!(vol.component(&[0, 1, 2, 3]), ExpPoly::one());
        assert_eq!(vol.component(&[1, 0, 2, 3]), ExpPoly::from_int(-1));
        let x: Vec<ExpPoly> = (0..4).map(ExpPoly::coord).collect();
        assert_eq!(nbracket(&vol, &x), ExpPoly::one());
        let rep = vec![x[0].clone(), x[0].clone(), x[2].clone(), x[3].clone()];
        assert!(nbracket(&vol, &rep).is_zero());
        let mut twice = coords();
        twice[1] = twice[0].clone();
        assert!(wedge(&ExpPoly::one(), &twice).is_zero());
        let eta = Multivector::top(4, p("q4*x4"));
        assert_eq!(nbracket(&eta, &x), p("x4"));
    }

    #[test]
    fn hamiltonian_fields() {
        let x: Vec<ExpPoly> = (0..4).map(ExpPoly::coord).collect();
        let vol = Multivector::top(4, ExpPoly::one());
        assert_eq!(hamiltonian_field(&vol, &x[..3]), VectorField::coordinate(4, 3));
        let eta = Multivector::top(4, p("x4"));
        assert_eq!(hamiltonian_field(&eta, &x[..3]), VectorField::coordinate(4, 3).mul_fn(&p("x4")));
        let with_const = vec![ExpPoly::from_int(3), x[1].clone(), x[2].clone()];
        assert!(hamiltonian_field(&eta, &with_const).is_zero());
    }

    #[test]
    fn lie_derivatives() {
        let d4 = VectorField::coordinate(4, 3);
        let vol = Multivector::top(4, ExpPoly::one());
        assert!(lie_derivative(&d4, &vol).is_zero());
        assert_eq!(lie_derivative(&d4, &Multivector::top(4, p("x4"))), vol);
        let euler = VectorField::coordinate(4, 0).mul_fn(&p("x1"));
        assert_eq!(lie_derivative(&euler, &vol), Multivector::top(4, ExpPoly::from_int(-1)));
    }

    #[test]
    fn fundamental_identity() {
        let eta = Multivector::top(4, p("x1*exp(-x4) - x2^2"));
        assert!(fundamental_identity_check(&eta, 5, 7).passed());
        // d1 ^ d2 ^ (d3 + x1 d4) spans a non-integrable distribution.
        let mut f = coords();
        f[2] = f[2].add(&VectorField::coordinate(4, 3).mul_fn(&p("x1")));
        let bad = wedge(&ExpPoly::one(), &f[..3]);
        assert!(!fundamental_identity_check(&bad, 10, 7).passed());
        let good = wedge(&p("exp(x3)"), &coords()[1..]);
        assert!(fundamental_identity_check(&good, 10, 7).passed());
    }
}
