//! Closed-form `exp(s A)` for small rational matrices.
//!
//! The eigenvalues must be Gaussian rationals. They are located numerically,
//! snapped to nearby rationals and then verified exactly against the square-free
//! part of the characteristic polynomial, so a wrong guess can only produce an
//! error, never a wrong answer.

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::symkernel::gauss::rational_to_f64;
use crate::symkernel::linalg::Matrix;
use crate::symkernel::{ExpPoly, Frequency, GaussianRational as Gq, Monomial, Rational};

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer((k as i64).into()))
                .collect(),
        )
        .trim()
    }

    /// Remainder of division by `d` (nonzero).
    fn rem(&self, d: &Poly) -> Poly {
        let dd = d.degree().expect("nonzero divisor");
        let lead = d.0[dd].clone();
        let mut r = self.clone().trim();
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let f = &r.0[rd] / &lead;
            for k in 0..=dd {
                let v = &f * &d.0[k];
                r.0[rd - dd + k] -= v;
            }
            r = r.trim();
        }
        r
    }

    fn quot(&self, d: &Poly) -> Poly {
        let dd = d.degree().expect("nonzero divisor");
        let lead = d.0[dd].clone();
        let mut r = self.clone().trim();
        let mut q = vec![Rational::zero(); r.0.len().saturating_sub(dd).max(1)];
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let f = &r.0[rd] / &lead;
            for k in 0..=dd {
                let v = &f * &d.0[k];
                r.0[rd - dd + k] -= v;
            }
            q[rd - dd] = f;
            r = r.trim();
        }
        Poly(q).trim()
    }

    fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone().trim(), o.clone().trim());
        while b.degree().is_some() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    /// `p / gcd(p, p')`.
    pub fn square_free(&self) -> Poly {
        let g = self.gcd(&self.derivative());
        match g.degree() {
            Some(0) | None => self.clone().trim(),
            Some(_) => self.quot(&g),
        }
    }

    pub fn eval_gq(&self, z: &Gq) -> Gq {
        let mut acc = Gq::zero();
        for c in self.0.iter().rev() {
            acc = &(&acc * z) + &Gq::real(c.clone());
        }
        acc
    }

    fn roots_numeric(&self) -> Vec<Complex64> {
        let n = match self.degree() {
            Some(n) if n > 0 => n,
            _ => return Vec::new(),
        };
        let lead = rational_to_f64(&self.0[n]);
        let coeffs: Vec<Complex64> = self.0[..=n]
            .iter()
            .map(|c| Complex64::new(rational_to_f64(c) / lead, 0.0))
            .collect();
        let eval = |z: Complex64| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
        let seed = Complex64::new(0.4, 0.9);
        let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1)).collect();
        for _ in 0..500 {
            let mut delta = 0.0f64;
            for i in 0..n {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-15 {
                break;
            }
        }
        roots
    }
}

/// Characteristic polynomial `det(t I - A)` via Faddeev-LeVerrier.
pub fn char_poly(a: &Matrix) -> Poly {
    let n = a.rows;
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let mut m = Matrix::identity(n);
    for k in 1..=n {
        let am = a.mul(&m);
        let tr = (0..n).fold(Gq::zero(), |acc, i| &acc + am.get(i, i));
        let c = -tr.re / Rational::from_integer((k as i64).into());
        coeffs[n - k] = c.clone();
        m = am.add(&Matrix::identity(n).scale(&Gq::real(c)));
    }
    Poly(coeffs)
}

/// Best rational approximation with bounded denominator.
fn snap(x: f64, max_den: i64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        if a.abs() > 1e12 {
            break;
        }
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = v - a;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    (k1 != 0).then(|| Rational::new(h1.into(), k1.into()))
}

/// Distinct eigenvalues of a rational matrix, if all are Gaussian rationals.
pub fn gaussian_eigenvalues(a: &Matrix) -> Option<Vec<Gq>> {
    let sf = char_poly(a).square_free();
    let mut out: Vec<Gq> = Vec::new();
    for z in sf.roots_numeric() {
        let re = snap(z.re, 100_000)?;
        let im = if z.im.abs() < 1e-9 { Rational::zero() } else { snap(z.im, 100_000)? };
        let g = Gq::new(re, im);
        if !sf.eval_gq(&g).is_zero() {
            return None;
        }
        if !out.contains(&g) {
            out.push(g);
        }
    }
    (Some(out.len()) == sf.degree()).then_some(out)
}

/// `exp(s A)` as a matrix of exponential polynomials in `s = scale * x_axis`.
///
/// Returns `None` when an eigenvalue is not a Gaussian rational.
pub fn exp_matrix(a: &Matrix, axis: usize, scale: &Rational) -> Option<Vec<Vec<ExpPoly>>> {
    let n = a.rows;
    if a.is_zero() {
        return Some(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { ExpPoly::one() } else { ExpPoly::zero() }).collect())
                .collect(),
        );
    }
    let eig = gaussian_eigenvalues(a)?;
    // Generalized eigenspaces assembled into a change of basis.
    let mut cols: Vec<Vec<Gq>> = Vec::new();
    let mut blocks: Vec<(Gq, usize, usize)> = Vec::new();
    for lam in &eig {
        let shifted = a.sub(&Matrix::identity(n).scale(lam));
        let mut p = Matrix::identity(n);
        for _ in 0..n {
            p = p.mul(&shifted);
        }
        let basis = p.nullspace();
        let start = cols.len();
        cols.extend(basis);
        blocks.push((lam.clone(), start, cols.len()));
    }
    if cols.len() != n {
        return None;
    }
    let q = Matrix::from_rows((0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect());
    let qinv = q.inverse()?;
    let mut s_mat = Matrix::zeros(n, n);
    let mut projectors = Vec::new();
    for (lam, start, end) in &blocks {
        let mut d = Matrix::zeros(n, n);
        for k in *start..*end {
            d.set(k, k, Gq::one());
        }
        let p = q.mul(&d).mul(&qinv);
        s_mat = s_mat.add(&p.scale(lam));
        projectors.push((lam.clone(), p));
    }
    let nil = a.sub(&s_mat);
    // exp(sN) = sum_k s^k N^k / k!
    let mut nil_terms: Vec<Matrix> = vec![Matrix::identity(n)];
    let mut fact = Rational::one();
    let mut power = Matrix::identity(n);
    for k in 1..n {
        power = power.mul(&nil);
        if power.is_zero() {
            break;
        }
        fact *= Rational::from_integer((k as i64).into());
        nil_terms.push(power.scale(&Gq::real(fact.recip())));
    }
    let scale_g = Gq::real(scale.clone());
    let mut out = vec![vec![ExpPoly::zero(); n]; n];
    for (lam, p) in &projectors {
        let freq = Frequency::from_entries([(axis, lam * &scale_g)]);
        for (k, nk) in nil_terms.iter().enumerate() {
            let m = p.mul(nk);
            if m.is_zero() {
                continue;
            }
            let mut mono = Monomial::one();
            mono.0[axis] = k as u16;
            let sk = scale_g.pow(k as u32);
            for i in 0..n {
                for j in 0..n {
                    let c = m.get(i, j);
                    if !c.is_zero() {
                        let t = ExpPoly::term(c * &sk, mono, freq.clone());
                        out[i][j] = out[i][j].add(&t);
                    }
                }
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::{parse, rat, ParamEnv};

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| Gq::from_int(v)).collect()).collect())
    }

    #[test]
    fn char_poly_and_eigenvalues() {
        let rot = m(&[&[0, -1], &[1, 0]]);
        assert_eq!(char_poly(&rot), Poly(vec![rat(1, 1), rat(0, 1), rat(1, 1)]));
        let eig = gaussian_eigenvalues(&rot).unwrap();
        assert!(eig.contains(&Gq::i()) && eig.contains(&-Gq::i()));
        let irr = m(&[&[0, 2], &[1, 0]]);
        assert!(gaussian_eigenvalues(&irr).is_none());
    }

    #[test]
    fn exp_of_rotation_and_jordan_block() {
        let env = ParamEnv::new();
        let rot = m(&[&[0, -1], &[1, 0]]);
        let e = exp_matrix(&rot, 0, &rat(1, 1)).unwrap();
        assert_eq!(e[0][0], parse("cos(x1)", &env).unwrap());
        assert_eq!(e[0][1], parse("-sin(x1)", &env).unwrap());
        let jordan = m(&[&[2, 1], &[0, 2]]);
        let e = exp_matrix(&jordan, 3, &rat(-1, 1)).unwrap();
        assert_eq!(e[0][1], parse("-x4*exp(-2*x4)", &env).unwrap());
        assert_eq!(e[1][1], parse("exp(-2*x4)", &env).unwrap());
    }
}
