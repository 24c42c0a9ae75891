//! Splitting a printed formula into its parts along the free constants.

use std::collections::BTreeSet;

use crate::symkernel::{rat_int, ExpPoly, Expr, Fraction, ParamEnv};

/// A printed formula at one binding: the part free of `q`s, and the part
/// carried by each constant that occurs in the text.
#[derive(Clone, Debug)]
pub(crate) struct ClaimParts {
    pub free: Fraction,
    /// `(k, part)` for `q_{k+1}`, in increasing `k`.
    pub parts: Vec<(usize, Fraction)>,
}

impl ClaimParts {
    pub fn is_zero(&self) -> bool {
        self.free.is_zero() && self.parts.iter().all(|(_, p)| p.is_zero())
    }

    /// Constants named in the text whose part vanishes at this binding.
    pub fn collapsed(&self) -> Vec<usize> {
        self.parts.iter().filter(|(_, p)| p.is_zero()).map(|(k, _)| *k).collect()
    }

    /// Applies `g` to the numerator and denominator of every part.
    pub fn map(&self, g: impl Fn(&ExpPoly) -> ExpPoly) -> ClaimParts {
        let m = |f: &Fraction| Fraction::new(g(f.num()), g(f.den())).unwrap_or_else(|_| f.clone());
        ClaimParts {
            free: m(&self.free),
            parts: self.parts.iter().map(|(k, p)| (*k, m(p))).collect(),
        }
    }

    /// The formula with every constant set to 1.
    pub fn all_ones(&self) -> Fraction {
        self.parts.iter().fold(self.free.clone(), |acc, (_, p)| acc.add(p))
    }
}

fn q_index(name: &str) -> Option<usize> {
    let d = name.strip_prefix('q')?;
    let k: usize = d.parse().ok()?;
    (k >= 1).then(|| k - 1)
}

/// Parses `src` and evaluates it with each `q_k` switched on alone.
pub(crate) fn split(src: &str, env: &ParamEnv) -> Result<ClaimParts, String> {
    let expr = Expr::parse_fraction(src).map_err(|e| format!("'{src}': {e}"))?;
    let qs: BTreeSet<usize> = expr.params().iter().filter_map(|p| q_index(p)).collect();
    let eval = |on: Option<usize>| -> Result<Fraction, String> {
        let mut e = env.clone();
        for &k in &qs {
            e.bind(&format!("q{}", k + 1), rat_int(i64::from(Some(k) == on)));
        }
        expr.normalize_fraction(&e).map_err(|err| format!("'{src}': {err}"))
    };
    let free = eval(None)?;
    let mut parts = Vec::new();
    for &k in &qs {
        parts.push((k, eval(Some(k))?.sub(&free)));
    }
    Ok(ClaimParts { free, parts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::{parse, rat};

    #[test]
    fn splits_along_constants() {
        let env = ParamEnv::new().with("a", rat(1, 2));
        let c = split("q2*x2 + a*q1*(exp(-x1) - 1)", &env).unwrap();
        assert!(c.free.is_zero());
        assert_eq!(c.parts.len(), 2);
        assert_eq!(c.parts[0].1.as_exppoly().unwrap(), parse("(exp(-x1) - 1)/2", &env).unwrap());
        assert_eq!(c.parts[1].1.as_exppoly().unwrap(), parse("x2", &env).unwrap());
    }

    #[test]
    fn collapsing_part_is_reported() {
        let env = ParamEnv::new().with("a", rat(-2, 1));
        let c = split("q1*(a+2)*x1 + q4*x4", &env).unwrap();
        assert_eq!(c.collapsed(), vec![0]);
    }
}
