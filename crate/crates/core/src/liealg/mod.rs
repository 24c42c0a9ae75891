//! Structure constants, brackets, Jacobi and closure checks.
//!
//! Convention: `[X_i, X_j] = C_ij^k X_k`, with constants stored only for `i < j`.
//! Indices are 1-based in data files and reports and 0-based in code.

pub mod registry;

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symkernel::linalg::Matrix;
use crate::symkernel::{parse_constant, format_rational_vec, GaussianRational, ParamEnv, Rational, SymError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("{0}")]
    Sym(#[from] SymError),
    #[error("structure constant index ({i},{j},{k}) out of range for dimension {dim}")]
    IndexOutOfRange { i: usize, j: usize, k: usize, dim: usize },
    #[error("basis vectors are linearly dependent after substitution")]
    DegenerateBasis,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter binding violates exclusion '{0}'")]
    Excluded(String),
}

/// One stored structure constant `C_ij^k = expr` (1-based indices, `i < j`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub expr: String,
}

/// A real Lie algebra given by (possibly parameterized) structure constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebraSpec {
    pub name: String,
    pub label: String,
    pub dim: usize,
    pub params: Vec<String>,
    /// Expressions in the parameters that must not vanish.
    pub exclude: Vec<String>,
    pub constants: Vec<ConstantEntry>,
}

impl LieAlgebraSpec {
    pub fn abelian(name: &str, dim: usize) -> Self {
        Self {
            name: name.to_string(),
            label: name.to_string(),
            dim,
            params: Vec::new(),
            exclude: Vec::new(),
            constants: Vec::new(),
        }
    }

    /// Returns the first exclusion expression that vanishes at `env`.
    pub fn excluded_by(&self, env: &ParamEnv) -> Result<Option<String>, LieError> {
        for ex in &self.exclude {
            if parse_constant(ex, env)?.is_zero() {
                return Ok(Some(ex.clone()));
            }
        }
        Ok(None)
    }

    /// Evaluates the constants at a parameter binding.
    pub fn constants_at(&self, env: &ParamEnv) -> Result<StructureConstants, LieError> {
        let mut sc = StructureConstants::zero(self.dim);
        for c in &self.constants {
            if c.i == 0 || c.j == 0 || c.k == 0 || c.i > self.dim || c.j > self.dim || c.k > self.dim {
                return Err(LieError::IndexOutOfRange {
                    i: c.i,
                    j: c.j,
                    k: c.k,
                    dim: self.dim,
                });
            }
            let v = parse_constant(&c.expr, env)?;
            sc.add(c.i - 1, c.j - 1, c.k - 1, &v);
        }
        Ok(sc)
    }

    pub fn param_names(&self) -> BTreeSet<String> {
        self.params.iter().cloned().collect()
    }
}

/// Dense exact structure constants, antisymmetric in the lower indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    pub dim: usize,
    c: Vec<Rational>,
}

impl StructureConstants {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            c: vec![Rational::zero(); dim * dim * dim],
        }
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    /// 0-based `C_ij^k`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.c[self.idx(i, j, k)]
    }

    /// Adds `v` to `C_ij^k` and subtracts it from `C_ji^k`.
    pub fn add(&mut self, i: usize, j: usize, k: usize, v: &Rational) {
        let a = self.idx(i, j, k);
        let b = self.idx(j, i, k);
        self.c[a] += v;
        self.c[b] -= v;
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Rational) {
        let a = self.idx(i, j, k);
        let b = self.idx(j, i, k);
        self.c[b] = -v.clone();
        self.c[a] = v;
    }

    /// Nonzero entries with `i < j`, 0-based.
    pub fn nonzero(&self) -> Vec<(usize, usize, usize, Rational)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for k in 0..self.dim {
                    let v = self.get(i, j, k);
                    if !v.is_zero() {
                        out.push((i, j, k, v.clone()));
                    }
                }
            }
        }
        out
    }

    pub fn basis(&self, i: usize) -> AbstractVector {
        let mut v = AbstractVector::zero(self.dim);
        v.0[i] = Rational::from_integer(1.into());
        v
    }

    pub fn bracket(&self, u: &AbstractVector, v: &AbstractVector) -> AbstractVector {
        let mut w = AbstractVector::zero(self.dim);
        for i in 0..self.dim {
            if u.0[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if v.0[j].is_zero() {
                    continue;
                }
                let uv = &u.0[i] * &v.0[j];
                for k in 0..self.dim {
                    let c = self.get(i, j, k);
                    if !c.is_zero() {
                        w.0[k] += &uv * c;
                    }
                }
            }
        }
        w
    }

    /// Checks the Jacobi identity on all basis triples `i < j < k`.
    pub fn jacobi_check(&self) -> JacobiReport {
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for k in j + 1..self.dim {
                    let (x, y, z) = (self.basis(i), self.basis(j), self.basis(k));
                    let r = self
                        .bracket(&x, &self.bracket(&y, &z))
                        .add(&self.bracket(&y, &self.bracket(&z, &x)))
                        .add(&self.bracket(&z, &self.bracket(&x, &y)));
                    if !r.is_zero() {
                        return JacobiReport::Violation {
                            triple: (i + 1, j + 1, k + 1),
                            residual: r,
                        };
                    }
                }
            }
        }
        JacobiReport::Pass
    }

    /// `t_i = sum_k C_ik^k`.
    pub fn trace_vector(&self) -> Vec<Rational> {
        (0..self.dim)
            .map(|i| (0..self.dim).fold(Rational::zero(), |acc, k| acc + self.get(i, k, k)))
            .collect()
    }

    /// Matrix of `ad(X_i)` acting on coordinate columns: `(ad X_i)_{k j} = C_ij^k`.
    pub fn ad_matrix(&self, i: usize) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            for k in 0..self.dim {
                let c = self.get(i, j, k);
                if !c.is_zero() {
                    m.set(k, j, GaussianRational::real(c.clone()));
                }
            }
        }
        m
    }

    /// Checks that the span of `basis` is closed under the bracket and returns
    /// the induced structure constants in that basis.
    pub fn subalgebra_closure(&self, basis: &[AbstractVector]) -> Result<ClosureReport, LieError> {
        for b in basis {
            if b.dim() != self.dim {
                return Err(LieError::DimensionMismatch {
                    expected: self.dim,
                    got: b.dim(),
                });
            }
        }
        let m = basis.len();
        let cols: Vec<Vec<GaussianRational>> = (0..self.dim)
            .map(|r| basis.iter().map(|b| GaussianRational::real(b.0[r].clone())).collect())
            .collect();
        if Matrix::from_rows(cols.clone()).rank() < m {
            return Err(LieError::DegenerateBasis);
        }
        let mut induced = StructureConstants::zero(m);
        for a in 0..m {
            for b in a + 1..m {
                let w = self.bracket(&basis[a], &basis[b]);
                let rhs: Vec<GaussianRational> =
                    w.0.iter().map(|x| GaussianRational::real(x.clone())).collect();
                match crate::symkernel::linalg::solve(&cols, &rhs) {
                    Some(coeffs) => {
                        for (d, c) in coeffs.into_iter().enumerate() {
                            induced.set(a, b, d, c.re);
                        }
                    }
                    None => {
                        return Ok(ClosureReport::Fail {
                            pair: (a + 1, b + 1),
                            bracket: w,
                        })
                    }
                }
            }
        }
        Ok(ClosureReport::Pass { induced })
    }
}

impl fmt::Display for StructureConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(usize, usize, Vec<String>)> = Vec::new();
        for (i, j, k, v) in self.nonzero() {
            let term = match v.to_string().as_str() {
                "1" => format!("T{}", k + 1),
                "-1" => format!("-T{}", k + 1),
                s => format!("{}*T{}", s, k + 1),
            };
            match parts.last_mut() {
                Some((pi, pj, terms)) if *pi == i && *pj == j => terms.push(term),
                _ => parts.push((i, j, vec![term])),
            }
        }
        let text: Vec<String> = parts
            .into_iter()
            .map(|(i, j, terms)| {
                let mut rhs = terms[0].clone();
                for t in &terms[1..] {
                    if let Some(s) = t.strip_prefix('-') {
                        rhs.push_str(&format!("-{s}"));
                    } else {
                        rhs.push_str(&format!("+{t}"));
                    }
                }
                format!("[T{},T{}]={}", i + 1, j + 1, rhs)
            })
            .collect();
        if text.is_empty() {
            write!(f, "abelian")
        } else {
            write!(f, "{}", text.join(", "))
        }
    }
}

/// Exact coordinates in the basis `X_1..X_dim`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbstractVector(pub Vec<Rational>);

impl AbstractVector {
    pub fn zero(dim: usize) -> Self {
        Self(vec![Rational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    /// Parses one coefficient expression per basis element.
    pub fn parse(exprs: &[String], env: &ParamEnv) -> Result<Self, LieError> {
        Ok(Self(
            exprs
                .iter()
                .map(|e| parse_constant(e, env))
                .collect::<Result<_, _>>()?,
        ))
    }
}

impl fmt::Display for AbstractVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational_vec(&self.0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JacobiReport {
    Pass,
    Violation {
        triple: (usize, usize, usize),
        residual: AbstractVector,
    },
}

impl JacobiReport {
    pub fn passed(&self) -> bool {
        matches!(self, JacobiReport::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosureReport {
    Pass { induced: StructureConstants },
    Fail { pair: (usize, usize), bracket: AbstractVector },
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        matches!(self, ClosureReport::Pass { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::rat_int;

    fn a48() -> StructureConstants {
        let mut sc = StructureConstants::zero(4);
        sc.set(1, 2, 0, rat_int(1));
        sc.set(1, 3, 1, rat_int(1));
        sc.set(2, 3, 2, rat_int(-1));
        sc
    }

    #[test]
    fn worked_example_brackets() {
        let sc = a48();
        assert_eq!(sc.bracket(&sc.basis(1), &sc.basis(2)), sc.basis(0));
        assert_eq!(sc.bracket(&sc.basis(2), &sc.basis(3)), sc.basis(2).scale(&rat_int(-1)));
        assert!(sc.jacobi_check().passed());
        assert_eq!(sc.trace_vector(), vec![rat_int(0); 4]);
        assert_eq!(sc.to_string(), "[T2,T3]=T1, [T2,T4]=T2, [T3,T4]=-T3");
    }

    #[test]
    fn jacobi_detects_sign_flip() {
        let mut sc = a48();
        sc.set(1, 3, 1, rat_int(-1));
        match sc.jacobi_check() {
            JacobiReport::Violation { triple, .. } => assert_eq!(triple, (2, 3, 4)),
            JacobiReport::Pass => panic!("flip not detected"),
        }
    }

    #[test]
    fn closure_pass_and_witness() {
        let sc = a48();
        let sub = [sc.basis(1), sc.basis(2), sc.basis(0)];
        match sc.subalgebra_closure(&sub).unwrap() {
            ClosureReport::Pass { induced } => {
                assert_eq!(induced.get(0, 1, 2), &rat_int(1));
                assert!(induced.jacobi_check().passed());
            }
            other => panic!("{other:?}"),
        }
        let bad = [sc.basis(1), sc.basis(2), sc.basis(3)];
        assert!(matches!(
            sc.subalgebra_closure(&bad).unwrap(),
            ClosureReport::Fail { pair: (1, 2), .. }
        ));
        let dep = [sc.basis(1), sc.basis(1), sc.basis(3)];
        assert_eq!(sc.subalgebra_closure(&dep), Err(LieError::DegenerateBasis));
    }
}
