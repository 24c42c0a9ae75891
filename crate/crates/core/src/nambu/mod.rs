//! Nambu structures: multivector calculus, the fundamental identity, the
//! subalgebra correspondence for decomposable tensors and the multiplicativity
//! equations for `f X_1 ^ ... ^ X_n`.

pub mod multivector;
pub mod solve;

use thiserror::Error;

use crate::invfields::{Frame, VectorField};
use crate::liealg::{AbstractVector, ClosureReport, LieError, StructureConstants};
use crate::symkernel::{ExpPoly, GaussianRational};

pub use multivector::{
    combinations, fundamental_identity_check, hamiltonian_field, lie_derivative, nbracket, wedge, FiReport,
    Multivector,
};
pub use solve::{default_ansatz, solve_multiplicative, MultiplicativityProblem, Solution, SolutionSpace, TermKey};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NambuError {
    #[error("ansatz is not closed under the fields: image of {0} escapes")]
    AnsatzNotClosed(String),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// Fields `sum_m B_a^m X_m` for abstract basis vectors `B_a`.
pub fn combine_rows(frame_rows: &[VectorField], basis: &[AbstractVector]) -> Vec<VectorField> {
    let dim = frame_rows.first().map_or(0, |r| r.dim());
    basis
        .iter()
        .map(|b| {
            b.0.iter().zip(frame_rows).fold(VectorField::zero(dim), |acc, (c, row)| {
                if num_traits::Zero::is_zero(c) {
                    acc
                } else {
                    acc.add(&row.scale(&GaussianRational::real(c.clone())))
                }
            })
        })
        .collect()
}

/// Both sides of the subalgebra / left-invariant Nambu correspondence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposableReport {
    pub closure: ClosureReport,
    pub nambu: FiReport,
}

impl DecomposableReport {
    /// Closure implies the Nambu property; for decomposable left-invariant
    /// tensors the converse holds as well.
    pub fn consistent(&self) -> bool {
        self.closure.passed() == self.nambu.passed()
    }
}

/// Checks closure of `basis` and the fundamental identity for the wedge of
/// the corresponding left-invariant fields. The frame must be free of
/// denominators; scaling by a nonvanishing function does not change the
/// Nambu property of an order >= 3 decomposable tensor, so callers may pass
/// numerator rows.
pub fn decomposable_check(
    sc: &StructureConstants,
    basis: &[AbstractVector],
    frame: &Frame,
    trials: usize,
    seed: u64,
) -> Result<DecomposableReport, NambuError> {
    let closure = sc.subalgebra_closure(basis)?;
    let fields = combine_rows(&frame.rows, basis);
    let eta = wedge(&ExpPoly::one(), &fields);
    let nambu = fundamental_identity_check(&eta, trials, seed);
    Ok(DecomposableReport { closure, nambu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invfields::{derive_frame, DeriveOptions};
    use crate::symkernel::rat_int;

    fn a48() -> StructureConstants {
        let mut sc = StructureConstants::zero(4);
        sc.set(1, 2, 0, rat_int(1));
        sc.set(1, 3, 1, rat_int(1));
        sc.set(2, 3, 2, rat_int(-1));
        sc
    }

    fn unit(i: usize) -> AbstractVector {
        let mut v = AbstractVector::zero(4);
        v.0[i] = rat_int(1);
        v
    }

    #[test]
    fn subalgebra_iff_nambu() {
        let sc = a48();
        let frame = derive_frame(&sc, &DeriveOptions::default()).unwrap();
        let sub = decomposable_check(&sc, &[unit(1), unit(2), unit(0)], &frame, 8, 11).unwrap();
        assert!(sub.closure.passed() && sub.nambu.passed());
        let non = decomposable_check(&sc, &[unit(1), unit(2), unit(3)], &frame, 8, 11).unwrap();
        assert!(!non.closure.passed());
        assert!(non.consistent());
        let ab = StructureConstants::zero(4);
        let r = decomposable_check(&ab, &[unit(0), unit(1), unit(3)], &Frame::identity(4), 4, 1).unwrap();
        assert!(r.closure.passed() && r.nambu.passed());
    }
}
