//! A Hamiltonian system on the group `A^0_{4,9}` with the order-four Nambu
//! structure `q4 (exp(-2 x4) - 1)` and `A_{4,8}` as symmetry algebra.
//!
//! The group coordinates `x1..x4` carry the constant bracket
//! `{x1,x4} = alpha`, `{x2,x3} = -alpha`. The canonical chart used throughout is
//! `x_1 = x1`, `x_2 = x2`, `P_1 = x4/alpha`, `P_2 = -x3/alpha`, which makes
//! `{x_i, P_j} = delta_ij`.

use std::io::Write;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::liealg::StructureConstants;
use crate::nambu::multivector::random_polynomial;
use crate::nambu::{nbracket, Multivector};
use crate::symkernel::gauss::rational_to_f64;
use crate::symkernel::linalg::Matrix;
use crate::symkernel::{print, ExpPoly, Frequency, GaussianRational as Gq, Rational};

#[derive(Debug, Error)]
pub enum DynError {
    #[error("step size must be positive and finite, and t_end nonnegative (dt={dt}, t_end={t_end})")]
    StepSizeInvalid { dt: f64, t_end: f64 },
    #[error("{0} must be nonzero")]
    ZeroParameter(&'static str),
    #[error("index sum is not a multiple of Q1^2; residual {0}")]
    NotProportional(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn g(r: &Rational) -> Gq {
    Gq::real(r.clone())
}

/// The constant bracket on the group coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonStructure {
    pub alpha: Rational,
}

impl PoissonStructure {
    pub fn new(alpha: Rational) -> Result<Self, DynError> {
        if alpha.is_zero() {
            return Err(DynError::ZeroParameter("alpha"));
        }
        Ok(Self { alpha })
    }

    /// `alpha (d1F d4G - d4F d1G) - alpha (d2F d3G - d3F d2G)`.
    pub fn bracket(&self, f: &ExpPoly, h: &ExpPoly) -> ExpPoly {
        let d = |e: &ExpPoly, k: usize| e.differentiate(k);
        let a = d(f, 0).mul(&d(h, 3)).sub(&d(f, 3).mul(&d(h, 0)));
        let b = d(f, 1).mul(&d(h, 2)).sub(&d(f, 2).mul(&d(h, 1)));
        a.sub(&b).scale(&g(&self.alpha))
    }

    /// Matrix `{x^i, x^j}`.
    pub fn matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(4, 4);
        m.set(0, 3, g(&self.alpha));
        m.set(3, 0, g(&-self.alpha.clone()));
        m.set(1, 2, g(&-self.alpha.clone()));
        m.set(2, 1, g(&self.alpha));
        m
    }

    /// Jacobi identity of the coordinate bracket, checked on all coordinate triples.
    pub fn jacobi_holds(&self) -> bool {
        let x: Vec<ExpPoly> = (0..4).map(ExpPoly::coord).collect();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let s = self
                        .bracket(&x[i], &self.bracket(&x[j], &x[k]))
                        .add(&self.bracket(&x[j], &self.bracket(&x[k], &x[i])))
                        .add(&self.bracket(&x[k], &self.bracket(&x[i], &x[j])));
                    if !s.is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// The identification of the group coordinates with canonical pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalChart {
    pub alpha: Rational,
}

impl CanonicalChart {
    pub fn new(ps: &PoissonStructure) -> Self {
        Self { alpha: ps.alpha.clone() }
    }

    pub fn x1(&self) -> ExpPoly {
        ExpPoly::coord(0)
    }

    pub fn x2(&self) -> ExpPoly {
        ExpPoly::coord(1)
    }

    pub fn p1(&self) -> ExpPoly {
        ExpPoly::coord(3).scale(&g(&self.alpha.recip()))
    }

    pub fn p2(&self) -> ExpPoly {
        ExpPoly::coord(2).scale(&g(&-self.alpha.recip()))
    }

    /// `Q_1 = -P_1, Q_2 = -P_2, Q_3 = -x_2 P_1, Q_4 = -x_2 P_2` (1-based `a`).
    pub fn q(&self, a: usize) -> ExpPoly {
        match a {
            1 => self.p1().neg(),
            2 => self.p2().neg(),
            3 => self.x2().mul(&self.p1()).neg(),
            4 => self.x2().mul(&self.p2()).neg(),
            _ => panic!("Q index {a} out of range"),
        }
    }

    pub fn qs(&self) -> Vec<ExpPoly> {
        (1..=4).map(|a| self.q(a)).collect()
    }

    /// `H = Q_1^2 = P_1^2`.
    pub fn hamiltonian(&self) -> ExpPoly {
        self.q(1).pow(2)
    }

    /// `{x_i, P_j} = delta_ij`, `{x_1,x_2} = {P_1,P_2} = 0`.
    pub fn is_canonical(&self, ps: &PoissonStructure) -> bool {
        let xs = [self.x1(), self.x2()];
        let ps_ = [self.p1(), self.p2()];
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { ExpPoly::one() } else { ExpPoly::zero() };
                if ps.bracket(&xs[i], &ps_[j]) != expect {
                    return false;
                }
            }
        }
        ps.bracket(&xs[0], &xs[1]).is_zero() && ps.bracket(&ps_[0], &ps_[1]).is_zero()
    }

    /// Group point for chart values `(x_1, x_2, P_1, P_2)`.
    pub fn to_group(&self, z: [f64; 4]) -> [f64; 4] {
        let a = rational_to_f64(&self.alpha);
        [z[0], z[1], -a * z[3], a * z[2]]
    }
}

/// Per-pair closure result: `(a, b)` 1-based and the residual if nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureCheck {
    pub pair: (usize, usize),
    pub residual: Option<String>,
}

/// `{Q_a, Q_b} = C_ab^c Q_c` for the six pairs.
pub fn check_q_closure(ps: &PoissonStructure, chart: &CanonicalChart, sc: &StructureConstants) -> Vec<ClosureCheck> {
    let q = chart.qs();
    let mut out = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            let mut r = ps.bracket(&q[a], &q[b]);
            for (c, qc) in q.iter().enumerate() {
                let k = sc.get(a, b, c);
                if !k.is_zero() {
                    r = r.sub(&qc.scale(&g(k)));
                }
            }
            out.push(ClosureCheck {
                pair: (a + 1, b + 1),
                residual: (!r.is_zero()).then(|| print(&r)),
            });
        }
    }
    out
}

/// The anti-diagonal metric `g_14 = a`, `g_23 = -a` and its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantMetric {
    pub a: Rational,
    pub g: Vec<Vec<Rational>>,
    pub inv: Vec<Vec<Rational>>,
}

impl InvariantMetric {
    pub fn new(a: Rational) -> Result<Self, DynError> {
        if a.is_zero() {
            return Err(DynError::ZeroParameter("metric parameter a"));
        }
        let z = Rational::zero();
        let mut gm = vec![vec![z.clone(); 4]; 4];
        gm[0][3] = a.clone();
        gm[3][0] = a.clone();
        gm[1][2] = -a.clone();
        gm[2][1] = -a.clone();
        let m = Matrix::from_rows(gm.iter().map(|r| r.iter().map(g).collect()).collect());
        let inv = m.inverse().expect("a != 0");
        let inv = (0..4).map(|i| (0..4).map(|j| inv.get(i, j).re.clone()).collect()).collect();
        Ok(Self { a, g: gm, inv })
    }

    /// `g g^{-1} = 1`.
    pub fn inverse_ok(&self) -> bool {
        (0..4).all(|i| {
            (0..4).all(|j| {
                let s: Rational = (0..4).map(|k| &self.g[i][k] * &self.inv[k][j]).sum();
                s == if i == j { Rational::one() } else { Rational::zero() }
            })
        })
    }

    /// `sum_d (C_ca^d g_db + C_cb^d g_ad) = 0` for all `a, b, c`.
    pub fn ad_invariant(&self, sc: &StructureConstants) -> bool {
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let s: Rational = (0..4)
                        .map(|d| sc.get(c, a, d) * &self.g[d][b] + sc.get(c, b, d) * &self.g[a][d])
                        .sum();
                    if !s.is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `W^{abe} = g^{ac} g^{bd} C_cd^e`, the weights of the evolution law.
    pub fn weights(&self, sc: &StructureConstants) -> Vec<(usize, usize, usize, Rational)> {
        let mut out = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                for e in 0..4 {
                    let mut s = Rational::zero();
                    for c in 0..4 {
                        if self.inv[a][c].is_zero() {
                            continue;
                        }
                        for d in 0..4 {
                            let k = sc.get(c, d, e);
                            if !k.is_zero() && !self.inv[b][d].is_zero() {
                                s += &self.inv[a][c] * &self.inv[b][d] * k;
                            }
                        }
                    }
                    if !s.is_zero() {
                        out.push((a, b, e, s));
                    }
                }
            }
        }
        out
    }
}

/// Exact `c` with `g^{ac} g^{bd} C_cd^e C_be^f Q_a Q_f = c Q_1^2`.
pub fn casimir_identity(
    metric: &InvariantMetric,
    chart: &CanonicalChart,
    sc: &StructureConstants,
) -> Result<Rational, DynError> {
    let q = chart.qs();
    let mut lhs = ExpPoly::zero();
    for (a, b, e, w) in metric.weights(sc) {
        for (f, qf) in q.iter().enumerate() {
            let k = sc.get(b, e, f);
            if !k.is_zero() {
                lhs = lhs.add(&q[a].mul(qf).scale(&g(&(&w * k))));
            }
        }
    }
    let q1sq = q[0].pow(2);
    let lead = &q1sq.terms()[0];
    let c = lhs.coefficient(&lead.powers, &lead.freq);
    let c = &c / &lead.coeff;
    let residual = lhs.sub(&q1sq.scale(&c));
    if !residual.is_zero() || !c.is_real() {
        return Err(DynError::NotProportional(print(&residual)));
    }
    Ok(c.re)
}

/// `eta * d(f1,f2,f3,f4)/d(x1,x2,x3,x4)`.
pub fn four_bracket(eta: &ExpPoly, fs: &[ExpPoly; 4]) -> ExpPoly {
    nbracket(&Multivector::top(4, eta.clone()), fs)
}

/// `{A,B}{C,D} - {A,C}{B,D} + {A,D}{B,C}`.
pub fn pfaffian(ps: &PoissonStructure, fs: &[ExpPoly; 4]) -> ExpPoly {
    let b = |i: usize, j: usize| ps.bracket(&fs[i], &fs[j]);
    b(0, 1).mul(&b(2, 3)).sub(&b(0, 2).mul(&b(1, 3))).add(&b(0, 3).mul(&b(1, 2)))
}

/// The constant `k` in `{A,B,C,D} = k (eta/alpha^2) Pf(A,B,C,D)`, read off on
/// the coordinate functions.
pub fn pfaffian_constant(ps: &PoissonStructure) -> Rational {
    let x = [ExpPoly::coord(0), ExpPoly::coord(1), ExpPoly::coord(2), ExpPoly::coord(3)];
    let pf = pfaffian(ps, &x).as_constant().expect("constant bracket").re;
    // Jacobian of the coordinates is 1: 1 = k / alpha^2 * pf.
    (&ps.alpha * &ps.alpha) / pf
}

/// Outcome of [`pfaffian_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PfaffianReport {
    pub constant: Rational,
    pub trials: usize,
    /// First failing quadruple, printed.
    pub failure: Option<Vec<String>>,
}

/// Exact comparison of both sides on seeded random polynomial quadruples.
pub fn pfaffian_check(ps: &PoissonStructure, eta: &ExpPoly, trials: usize, seed: u64) -> PfaffianReport {
    let k = pfaffian_constant(ps);
    let scale = g(&(&k / (&ps.alpha * &ps.alpha)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let fs: [ExpPoly; 4] = std::array::from_fn(|_| random_polynomial(&mut rng, 4));
        let lhs = four_bracket(eta, &fs);
        let rhs = pfaffian(ps, &fs).mul(eta).scale(&scale);
        if lhs != rhs {
            return PfaffianReport {
                constant: k,
                trials,
                failure: Some(fs.iter().map(print).collect()),
            };
        }
    }
    PfaffianReport {
        constant: k,
        trials,
        failure: None,
    }
}

/// Both sides of the weighted evolution law for one observable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evolution {
    /// `g^{ac} g^{bd} C_cd^e {A, Q_a, Q_b, Q_e}`.
    pub lhs: ExpPoly,
    /// `-4 eta / (alpha^2 a^2) {A, H}`.
    pub rhs: ExpPoly,
    pub difference: ExpPoly,
    /// `r` with `lhs = r * rhs`, when such a constant exists and `rhs != 0`.
    pub ratio: Option<Rational>,
}

pub fn weighted_evolution(
    obs: &ExpPoly,
    metric: &InvariantMetric,
    ps: &PoissonStructure,
    chart: &CanonicalChart,
    sc: &StructureConstants,
    eta: &ExpPoly,
) -> Evolution {
    let q = chart.qs();
    let mut lhs = ExpPoly::zero();
    for (a, b, e, w) in metric.weights(sc) {
        let fb = four_bracket(eta, &[obs.clone(), q[a].clone(), q[b].clone(), q[e].clone()]);
        lhs = lhs.add(&fb.scale(&g(&w)));
    }
    let pref = Rational::from_integer((-4).into()) / (&ps.alpha * &ps.alpha * &metric.a * &metric.a);
    let rhs = ps.bracket(obs, &chart.hamiltonian()).mul(eta).scale(&g(&pref));
    let difference = lhs.sub(&rhs);
    let ratio = if rhs.is_zero() {
        None
    } else {
        let lead = &rhs.terms()[0];
        let r = &lhs.coefficient(&lead.powers, &lead.freq) / &lead.coeff;
        (r.is_real() && lhs == rhs.scale(&r)).then_some(r.re)
    };
    Evolution {
        lhs,
        rhs,
        difference,
        ratio,
    }
}

/// `q4 (exp(-2 x4) - 1)`.
pub fn a049_structure(q4: &Rational) -> ExpPoly {
    ExpPoly::exp(Frequency::from_entries([(3, Gq::from_int(-2))]))
        .sub(&ExpPoly::one())
        .scale(&g(q4))
}

/// Settings for [`integrate_flow`].
#[derive(Clone, Debug)]
pub struct FlowConfig {
    pub alpha: Rational,
    pub metric_a: Rational,
    pub q4: Rational,
    /// Evaluate the prefactor once at the initial point.
    pub freeze_eta: bool,
    pub dt: f64,
    pub t_end: f64,
    /// `(x_1, x_2, P_1, P_2)`.
    pub initial: [f64; 4],
}

/// One row of the trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub z: [f64; 4],
    pub h: f64,
}

/// Fixed-step RK4 for `dA/dt = kappa {A, H}` with `H = P_1^2` and
/// `kappa = -4 eta / (alpha^2 a^2)`.
pub fn integrate_flow(cfg: &FlowConfig) -> Result<Vec<Sample>, DynError> {
    if !(cfg.dt.is_finite() && cfg.dt > 0.0 && cfg.t_end.is_finite() && cfg.t_end >= 0.0) {
        return Err(DynError::StepSizeInvalid {
            dt: cfg.dt,
            t_end: cfg.t_end,
        });
    }
    let ps = PoissonStructure::new(cfg.alpha.clone())?;
    if cfg.metric_a.is_zero() {
        return Err(DynError::ZeroParameter("metric parameter a"));
    }
    let chart = CanonicalChart::new(&ps);
    let eta = a049_structure(&cfg.q4);
    let alpha = rational_to_f64(&cfg.alpha);
    let ma = rational_to_f64(&cfg.metric_a);
    let pref = -4.0 / (alpha * alpha * ma * ma);
    let kappa_at = |z: &[f64; 4]| -> f64 {
        let p = chart.to_group(*z);
        pref * eta.evaluate(&p).unwrap_or(f64::NAN)
    };
    let frozen = kappa_at(&cfg.initial);
    // Canonical equations with H = P1^2: x1' = 2 P1, everything else fixed.
    let rhs = |z: &[f64; 4]| -> [f64; 4] {
        let k = if cfg.freeze_eta { frozen } else { kappa_at(z) };
        [k * 2.0 * z[2], 0.0, 0.0, 0.0]
    };
    let energy = |z: &[f64; 4]| z[2] * z[2];
    let steps = (cfg.t_end / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut z = cfg.initial;
    let mut t = 0.0;
    out.push(Sample { t, z, h: energy(&z) });
    for n in 0..steps {
        let h = (cfg.t_end - t).min(cfg.dt);
        let add = |a: &[f64; 4], b: &[f64; 4], s: f64| -> [f64; 4] { std::array::from_fn(|i| a[i] + s * b[i]) };
        let k1 = rhs(&z);
        let k2 = rhs(&add(&z, &k1, h / 2.0));
        let k3 = rhs(&add(&z, &k2, h / 2.0));
        let k4 = rhs(&add(&z, &k3, h));
        z = std::array::from_fn(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        t = if n + 1 == steps { cfg.t_end } else { (n + 1) as f64 * cfg.dt };
        out.push(Sample { t, z, h: energy(&z) });
    }
    Ok(out)
}

/// CSV with header `t,x1,x2,P1,P2,H` and 17 significant digits.
pub fn write_csv(samples: &[Sample], mut w: impl Write) -> Result<(), DynError> {
    writeln!(w, "t,x1,x2,P1,P2,H")?;
    for s in samples {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.t, s.z[0], s.z[1], s.z[2], s.z[3], s.h
        )?;
    }
    Ok(())
}

/// Standard `A_{4,8}` constants: `[T2,T3]=T1, [T2,T4]=T2, [T3,T4]=-T3`.
pub fn a48_constants() -> StructureConstants {
    let mut sc = StructureConstants::zero(4);
    sc.set(1, 2, 0, Rational::one());
    sc.set(1, 3, 1, Rational::one());
    sc.set(2, 3, 2, -Rational::one());
    sc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::{rat, rat_int};

    #[test]
    fn brackets_and_closure() {
        let ps = PoissonStructure::new(rat_int(1)).unwrap();
        assert_eq!(ps.bracket(&ExpPoly::coord(0), &ExpPoly::coord(3)), ExpPoly::one());
        assert!(ps.jacobi_holds());
        let chart = CanonicalChart::new(&ps);
        assert!(chart.is_canonical(&ps));
        assert_eq!(ps.bracket(&chart.q(2), &chart.q(3)), chart.q(1));
        let checks = check_q_closure(&ps, &chart, &a48_constants());
        assert_eq!(checks.len(), 6);
        assert!(checks.iter().all(|c| c.residual.is_none()));
    }

    #[test]
    fn casimir_coefficient_scales() {
        let ps = PoissonStructure::new(rat_int(1)).unwrap();
        let chart = CanonicalChart::new(&ps);
        let sc = a48_constants();
        for (a, c) in [(rat_int(1), rat_int(-2)), (rat_int(2), rat(-1, 2))] {
            let m = InvariantMetric::new(a).unwrap();
            assert!(m.inverse_ok() && m.ad_invariant(&sc));
            assert_eq!(casimir_identity(&m, &chart, &sc).unwrap(), c);
        }
        // Sign flips of the three nonzero constants stay proportional to Q1^2
        // (coefficients 2, 0, 0); an extra constant produces cross terms.
        let m = InvariantMetric::new(rat_int(1)).unwrap();
        let mut flipped = sc.clone();
        flipped.set(1, 2, 0, rat_int(-1));
        assert_eq!(casimir_identity(&m, &chart, &flipped).unwrap(), rat_int(2));
        let mut bumped = sc.clone();
        bumped.set(0, 2, 1, rat_int(1));
        assert!(matches!(casimir_identity(&m, &chart, &bumped), Err(DynError::NotProportional(_))));
    }

    #[test]
    fn pfaffian_and_evolution() {
        let ps = PoissonStructure::new(rat_int(2)).unwrap();
        let eta = a049_structure(&rat_int(1));
        let rep = pfaffian_check(&ps, &eta, 5, 3);
        assert_eq!(rep.constant, rat_int(-1));
        assert!(rep.failure.is_none());
        let chart = CanonicalChart::new(&ps);
        let m = InvariantMetric::new(rat_int(1)).unwrap();
        let ev = weighted_evolution(&chart.q(1), &m, &ps, &chart, &a48_constants(), &eta);
        assert!(ev.lhs.is_zero() && ev.rhs.is_zero());
    }

    #[test]
    fn flow() {
        let cfg = FlowConfig {
            alpha: rat_int(1),
            metric_a: rat_int(1),
            q4: rat_int(1),
            freeze_eta: false,
            dt: 1e-2,
            t_end: 1.0,
            initial: [0.0, 0.5, 0.3, -0.2],
        };
        let s = integrate_flow(&cfg).unwrap();
        assert_eq!(s.len(), 101);
        assert!((s.last().unwrap().h - s[0].h).abs() < 1e-12);
        let bad = FlowConfig { dt: 0.0, ..cfg };
        assert!(matches!(integrate_flow(&bad), Err(DynError::StepSizeInvalid { .. })));
    }
}
