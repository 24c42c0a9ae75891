//! Left-invariant vector fields: frames, brackets, consistency checks and
//! derivation from structure constants in coordinates of the second kind.

pub mod matexp;

use std::fmt;

use thiserror::Error;

use crate::liealg::StructureConstants;
use crate::symkernel::linalg::Matrix;
use crate::symkernel::{print, ExpPoly, Fraction, GaussianRational, ParamEnv, Rational, SymError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("{0}")]
    Sym(#[from] SymError),
    #[error("frame determinant {0} is not a unit")]
    SingularFrame(String),
    #[error("ad({generator}) has an eigenvalue outside the Gaussian rationals")]
    NonClosedExponential { generator: usize },
    #[error("frame shape mismatch: {0}")]
    Shape(String),
    #[error("ordering must be a permutation of 1..={0}")]
    BadOrdering(usize),
}

/// A vector field `X = X^mu d_mu` with exponential-polynomial components.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField {
    pub components: Vec<ExpPoly>,
}

impl VectorField {
    pub fn new(components: Vec<ExpPoly>) -> Self {
        Self { components }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![ExpPoly::zero(); dim])
    }

    /// The coordinate field `d_{axis+1}`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        let mut v = Self::zero(dim);
        v.components[axis] = ExpPoly::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// `X(f) = sum_mu X^mu d_mu f`.
    pub fn apply(&self, f: &ExpPoly) -> ExpPoly {
        let mut acc = ExpPoly::zero();
        for (mu, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = f.differentiate(mu);
            if !d.is_zero() {
                acc = acc.add(&c.mul(&d));
            }
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.components.iter().zip(&o.components).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.components.iter().zip(&o.components).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::new(self.components.iter().map(|a| a.scale(c)).collect())
    }

    pub fn mul_fn(&self, f: &ExpPoly) -> Self {
        Self::new(self.components.iter().map(|a| a.mul(f)).collect())
    }

    /// Components evaluated exactly at the origin.
    pub fn at_origin(&self) -> Vec<GaussianRational> {
        self.components.iter().map(|c| c.at_origin()).collect()
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(print).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// `[X, Y]^mu = X(Y^mu) - Y(X^mu)`.
pub fn field_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    VectorField::new(
        (0..x.dim())
            .map(|mu| x.apply(&y.components[mu]).sub(&y.apply(&x.components[mu])))
            .collect(),
    )
}

/// A frame `X_i = rows[i] / dens[i]`. Denominators are 1 except for the few
/// printed frames with rational entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub rows: Vec<VectorField>,
    pub dens: Vec<ExpPoly>,
}

impl Frame {
    pub fn new(rows: Vec<VectorField>) -> Self {
        let dens = vec![ExpPoly::one(); rows.len()];
        Self { rows, dens }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new((0..dim).map(|i| VectorField::coordinate(dim, i)).collect())
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn has_denominators(&self) -> bool {
        self.dens.iter().any(|d| *d != ExpPoly::one())
    }

    /// Parses a stored frame (row-major strings). Entries may carry arbitrary
    /// denominators; each row is brought to a common denominator.
    pub fn parse(rows: &[Vec<String>], env: &ParamEnv) -> Result<Frame, FrameError> {
        let dim = rows.len();
        let mut out_rows = Vec::with_capacity(dim);
        let mut dens = Vec::with_capacity(dim);
        for r in rows {
            if r.len() != dim {
                return Err(FrameError::Shape(format!("row has {} entries, expected {dim}", r.len())));
            }
            let fr: Vec<Fraction> = r
                .iter()
                .map(|s| crate::symkernel::parse_fraction(s, env))
                .collect::<Result<_, _>>()?;
            let (row, den) = common_denominator(&fr);
            out_rows.push(row);
            dens.push(den);
        }
        Ok(Frame { rows: out_rows, dens })
    }

    /// Row `i` as fractions.
    pub fn row_fractions(&self, i: usize) -> Vec<Fraction> {
        self.rows[i]
            .components
            .iter()
            .map(|c| Fraction::new(c.clone(), self.dens[i].clone()).expect("nonzero denominator"))
            .collect()
    }

    /// Plain rows; `None` if some row has a non-trivial denominator.
    pub fn plain_rows(&self) -> Option<&[VectorField]> {
        (!self.has_denominators()).then_some(self.rows.as_slice())
    }

    /// Determinant of the numerator matrix (rows), ignoring denominators.
    pub fn numerator_det(&self) -> ExpPoly {
        det(&self.rows.iter().map(|r| r.components.clone()).collect::<Vec<_>>())
    }

    /// Normalization `X_i|_e = d_i`, checked exactly.
    pub fn identity_at_origin(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| {
            let d = self.dens[i].at_origin();
            (0..n).all(|j| {
                let v = self.rows[i].components[j].at_origin();
                if i == j {
                    !d.is_zero() && v == d
                } else {
                    v.is_zero()
                }
            })
        })
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            let mut terms = Vec::new();
            for (mu, c) in row.components.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let coeff = if self.dens[i] == ExpPoly::one() {
                    print(c)
                } else {
                    format!("({})/({})", print(c), print(&self.dens[i]))
                };
                terms.push(format!("({coeff})*d{}", mu + 1));
            }
            let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
            writeln!(f, "X{} = {}", i + 1, body)?;
        }
        Ok(())
    }
}

fn common_denominator(fr: &[Fraction]) -> (VectorField, ExpPoly) {
    let mut dens: Vec<ExpPoly> = Vec::new();
    for f in fr {
        if !f.is_zero() && *f.den() != ExpPoly::one() && !dens.contains(f.den()) {
            dens.push(f.den().clone());
        }
    }
    let common = dens.iter().fold(ExpPoly::one(), |acc, d| acc.mul(d));
    let comps = fr
        .iter()
        .map(|f| {
            if f.is_zero() {
                return ExpPoly::zero();
            }
            dens.iter()
                .filter(|d| *d != f.den())
                .fold(f.num().clone(), |acc, d| acc.mul(d))
        })
        .collect();
    (VectorField::new(comps), common)
}

/// Determinant of a square matrix of exponential polynomials (Laplace expansion).
pub fn det(m: &[Vec<ExpPoly>]) -> ExpPoly {
    let n = m.len();
    let cols: Vec<usize> = (0..n).collect();
    det_rec(m, 0, &cols)
}

fn det_rec(m: &[Vec<ExpPoly>], row: usize, cols: &[usize]) -> ExpPoly {
    if cols.is_empty() {
        return ExpPoly::one();
    }
    let mut acc = ExpPoly::zero();
    for (k, &c) in cols.iter().enumerate() {
        let e = &m[row][c];
        if e.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_rec(m, row + 1, &rest);
        let term = e.mul(&minor);
        acc = if k % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Minor with the given rows and columns.
pub fn minor(m: &[Vec<ExpPoly>], rows: &[usize], cols: &[usize]) -> ExpPoly {
    let sub: Vec<Vec<ExpPoly>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| m[r][c].clone()).collect())
        .collect();
    det(&sub)
}

/// Per-pair outcome of [`verify_frame`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameMismatch {
    pub pair: (usize, usize),
    /// Printed residual `[X_i,X_j] - C_ij^k X_k`, one entry per component.
    pub residual: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameReport {
    pub mismatches: Vec<FrameMismatch>,
    pub normalized: bool,
}

impl FrameReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.normalized
    }
}

/// Checks `[X_i, X_j] = C_ij^k X_k` for all `i < j`, exactly, plus the
/// normalization at the origin.
pub fn verify_frame(frame: &Frame, sc: &StructureConstants) -> FrameReport {
    let n = frame.dim();
    let mut mismatches = Vec::new();
    if let Some(rows) = frame.plain_rows() {
        for i in 0..n {
            for j in i + 1..n {
                let mut r = field_bracket(&rows[i], &rows[j]);
                for (k, row) in rows.iter().enumerate() {
                    let c = sc.get(i, j, k);
                    if !num_traits::Zero::is_zero(c) {
                        r = r.sub(&row.scale(&GaussianRational::real(c.clone())));
                    }
                }
                if !r.is_zero() {
                    mismatches.push(FrameMismatch {
                        pair: (i + 1, j + 1),
                        residual: r.components.iter().map(print).collect(),
                    });
                }
            }
        }
    } else {
        let rows: Vec<Vec<Fraction>> = (0..n).map(|i| frame.row_fractions(i)).collect();
        for i in 0..n {
            for j in i + 1..n {
                let br = fraction_bracket(&rows[i], &rows[j]);
                let mut bad = Vec::new();
                let mut any = false;
                for mu in 0..n {
                    let mut r = br[mu].clone();
                    for (k, row) in rows.iter().enumerate() {
                        let c = sc.get(i, j, k);
                        if !num_traits::Zero::is_zero(c) {
                            r = r.sub(&row[mu].scale(&GaussianRational::real(c.clone())));
                        }
                    }
                    any |= !r.is_zero();
                    bad.push(r.to_string());
                }
                if any {
                    mismatches.push(FrameMismatch {
                        pair: (i + 1, j + 1),
                        residual: bad,
                    });
                }
            }
        }
    }
    FrameReport {
        mismatches,
        normalized: frame.identity_at_origin(),
    }
}

/// Applies a fraction-valued field to a fraction.
pub fn fraction_apply(x: &[Fraction], f: &Fraction) -> Fraction {
    let mut acc = Fraction::from(ExpPoly::zero());
    for (mu, c) in x.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let d = f.differentiate(mu);
        if !d.is_zero() {
            acc = acc.add(&c.mul(&d));
        }
    }
    acc
}

pub fn fraction_bracket(x: &[Fraction], y: &[Fraction]) -> Vec<Fraction> {
    (0..x.len())
        .map(|mu| fraction_apply(x, &y[mu]).sub(&fraction_apply(y, &x[mu])))
        .collect()
}

/// Exact inverse of a frame whose determinant is a unit.
///
/// With `entries` the matrix `V` (rows `X_i`), returns `W` with `V W = I`.
pub fn invert_matrix(entries: &[Vec<ExpPoly>]) -> Result<Vec<Vec<ExpPoly>>, FrameError> {
    let n = entries.len();
    let d = det(entries);
    let inv = d.unit_inverse().ok_or_else(|| FrameError::SingularFrame(print(&d)))?;
    Ok(adjugate(entries)
        .into_iter()
        .map(|row| row.into_iter().map(|e| e.mul(&inv)).collect())
        .collect::<Vec<_>>())
    .map(|m: Vec<Vec<ExpPoly>>| {
        debug_assert_eq!(m.len(), n);
        m
    })
}

/// Adjugate: `adj[i][j] = (-1)^{i+j} M_{ji}`.
pub fn adjugate(m: &[Vec<ExpPoly>]) -> Vec<Vec<ExpPoly>> {
    let n = m.len();
    let mut out = vec![vec![ExpPoly::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let mn = minor(m, &rows, &cols);
            out[i][j] = if (i + j) % 2 == 0 { mn } else { mn.neg() };
        }
    }
    out
}

pub fn invert_frame(frame: &Frame) -> Result<Frame, FrameError> {
    let rows = frame
        .plain_rows()
        .ok_or_else(|| FrameError::SingularFrame("frame has non-unit denominators".into()))?;
    let m: Vec<Vec<ExpPoly>> = rows.iter().map(|r| r.components.clone()).collect();
    let inv = invert_matrix(&m)?;
    Ok(Frame::new(inv.into_iter().map(VectorField::new).collect()))
}

/// Options for [`derive_frame`].
#[derive(Clone, Debug, Default)]
pub struct DeriveOptions {
    /// Factor order `g = exp(x^{o1} T_{o1}) ... exp(x^{on} T_{on})`, 1-based.
    /// Defaults to `1..=n`.
    pub ordering: Option<Vec<usize>>,
    /// Accept a non-unit determinant and return a frame with denominators.
    pub allow_denominators: bool,
}

/// Left-invariant frame from `g^{-1} dg = e^i_mu T_i dx^mu` in coordinates of the
/// second kind, followed by exact inversion.
pub fn derive_frame(sc: &StructureConstants, opts: &DeriveOptions) -> Result<Frame, FrameError> {
    let n = sc.dim;
    let order: Vec<usize> = match &opts.ordering {
        Some(o) => {
            let mut sorted = o.clone();
            sorted.sort_unstable();
            if sorted != (1..=n).collect::<Vec<_>>() {
                return Err(FrameError::BadOrdering(n));
            }
            o.iter().map(|k| k - 1).collect()
        }
        None => (0..n).collect(),
    };
    let minus_one = Rational::from_integer((-1).into());
    let mut exps: Vec<Option<Vec<Vec<ExpPoly>>>> = vec![None; n];
    for &g in &order {
        let ad = sc.ad_matrix(g);
        let e = matexp::exp_matrix(&ad, g, &minus_one).ok_or(FrameError::NonClosedExponential { generator: g + 1 })?;
        exps[g] = Some(e);
    }
    // e_matrix[i][mu] = e^i_mu
    let mut e_matrix = vec![vec![ExpPoly::zero(); n]; n];
    for (pos, &g) in order.iter().enumerate() {
        let mut v: Vec<ExpPoly> = (0..n).map(|i| if i == g { ExpPoly::one() } else { ExpPoly::zero() }).collect();
        for &later in &order[pos + 1..] {
            let m = exps[later].as_ref().unwrap();
            v = (0..n)
                .map(|i| {
                    (0..n).fold(ExpPoly::zero(), |acc, j| {
                        if m[i][j].is_zero() || v[j].is_zero() {
                            acc
                        } else {
                            acc.add(&m[i][j].mul(&v[j]))
                        }
                    })
                })
                .collect();
        }
        for i in 0..n {
            e_matrix[i][g] = v[i].clone();
        }
    }
    for row in &e_matrix {
        for e in row {
            if !e.is_real() {
                return Err(FrameError::Shape("non-real Maurer-Cartan entry".into()));
            }
        }
    }
    // V_i^mu = (E^{-1})[mu][i], i.e. V = (E^{-1})^T.
    let d = det(&e_matrix);
    let adj = adjugate(&e_matrix);
    match d.unit_inverse() {
        Some(inv) => {
            let rows = (0..n)
                .map(|i| VectorField::new((0..n).map(|mu| adj[mu][i].mul(&inv)).collect()))
                .collect();
            Ok(Frame::new(rows))
        }
        None if opts.allow_denominators && !d.is_zero() => {
            let rows = (0..n)
                .map(|i| VectorField::new((0..n).map(|mu| adj[mu][i].clone()).collect()))
                .collect();
            Ok(Frame {
                rows,
                dens: vec![d; n],
            })
        }
        None => Err(FrameError::SingularFrame(print(&d))),
    }
}

/// True when two frames represent the same fields.
pub fn frames_equal(a: &Frame, b: &Frame) -> bool {
    if a.dim() != b.dim() {
        return false;
    }
    (0..a.dim()).all(|i| {
        if a.dens[i] == b.dens[i] {
            a.rows[i] == b.rows[i]
        } else {
            (0..a.dim()).all(|mu| {
                a.rows[i].components[mu].mul(&b.dens[i]) == b.rows[i].components[mu].mul(&a.dens[i])
            })
        }
    })
}

/// All orderings (1-based) of `n` generators, lexicographic.
pub fn all_orderings(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for k in 1..=n {
            if !prefix.contains(&k) {
                prefix.push(k);
                rec(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, &mut out);
    out
}

/// Rational identity check on a numeric matrix, used for the determinant.
pub fn is_identity(m: &Matrix) -> bool {
    *m == Matrix::identity(m.rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::{parse, rat_int};

    fn env() -> ParamEnv {
        ParamEnv::new()
    }

    fn a48() -> StructureConstants {
        let mut sc = StructureConstants::zero(4);
        sc.set(1, 2, 0, rat_int(1));
        sc.set(1, 3, 1, rat_int(1));
        sc.set(2, 3, 2, rat_int(-1));
        sc
    }

    fn text_frame() -> Frame {
        let rows = [
            ["1", "0", "0", "0"],
            ["-x3*exp(-x4)", "exp(-x4)", "0", "0"],
            ["0", "0", "exp(x4)", "0"],
            ["0", "0", "0", "1"],
        ];
        Frame::parse(
            &rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect::<Vec<_>>(),
            &env(),
        )
        .unwrap()
    }

    #[test]
    fn worked_example_frame() {
        let f = text_frame();
        assert!(verify_frame(&f, &a48()).passed());
        let x4 = parse("x4", &env()).unwrap();
        assert_eq!(f.rows[3].apply(&x4), ExpPoly::one());
        let x1 = parse("x1", &env()).unwrap();
        assert_eq!(f.rows[1].apply(&x1), parse("-x3*exp(-x4)", &env()).unwrap());
        let br = field_bracket(&f.rows[1], &f.rows[2]);
        assert_eq!(br, VectorField::coordinate(4, 0));
    }

    #[test]
    fn printed_table_row_fails() {
        let mut f = text_frame();
        f.rows[2].components[2] = parse("x4*exp(x4)", &env()).unwrap();
        let rep = verify_frame(&f, &a48());
        assert!(rep.mismatches.iter().any(|m| m.pair == (3, 4)));
    }

    #[test]
    fn derived_frame_matches_text() {
        let d = derive_frame(&a48(), &DeriveOptions::default()).unwrap();
        assert!(verify_frame(&d, &a48()).passed());
        assert!(frames_equal(&d, &text_frame()));
        let id = derive_frame(&StructureConstants::zero(4), &DeriveOptions::default()).unwrap();
        assert_eq!(id, Frame::identity(4));
    }

    #[test]
    fn inversion() {
        let f = text_frame();
        let inv = invert_frame(&f).unwrap();
        let m: Vec<Vec<ExpPoly>> = f.rows.iter().map(|r| r.components.clone()).collect();
        let w: Vec<Vec<ExpPoly>> = inv.rows.iter().map(|r| r.components.clone()).collect();
        for i in 0..4 {
            for j in 0..4 {
                let s = (0..4).fold(ExpPoly::zero(), |acc, k| acc.add(&m[i][k].mul(&w[k][j])));
                assert_eq!(s, if i == j { ExpPoly::one() } else { ExpPoly::zero() });
            }
        }
        let mut bad = Frame::identity(4);
        bad.rows[0].components[0] = parse("x1", &env()).unwrap();
        assert!(matches!(invert_frame(&bad), Err(FrameError::SingularFrame(_))));
    }
}
