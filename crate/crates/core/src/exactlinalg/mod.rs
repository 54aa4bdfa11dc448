//! Exact rational linear algebra: scalars, lattice and rational vectors,
//! sparse vectors keyed by an ordered basis, canonical row-echelon bases
//! and tensor-grid interpolation.

mod interp;
mod rational;
mod sparse;

pub use interp::{evaluate_polynomial, vandermonde_solve, CoefficientMap};
pub use rational::{format_rational, parse_rational, Rational};
pub use sparse::{nullspace, rref_basis, SparseVector, SubspaceBasis};

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("evaluation points do not form a full tensor grid: {0}")]
    NotGrid(String),
    #[error("evaluations are inconsistent with the stated degrees at point {0:?}")]
    Inconsistent(Vec<i64>),
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
}

/// A point of the integer lattice `Z^d`, compared lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn zero(d: usize) -> Self {
        LatticeVector(vec![0; d])
    }

    pub fn unit(d: usize, i: usize) -> Self {
        let mut v = vec![0; d];
        v[i] = 1;
        LatticeVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn inf_norm(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn to_qvector(&self) -> QVector {
        QVector(self.0.iter().map(|&x| Rational::from_integer(x.into())).collect())
    }

    /// Every lattice point with `|n_i| <= radius`, in lexicographic order.
    pub fn cube(d: usize, radius: i64) -> Vec<LatticeVector> {
        let mut out = vec![LatticeVector(Vec::with_capacity(d))];
        for _ in 0..d {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (-radius..=radius).map(move |x| {
                        let mut q = p.0.clone();
                        q.push(x);
                        LatticeVector(q)
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Add for &LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: &LatticeVector) -> LatticeVector {
        assert_eq!(self.dim(), rhs.dim());
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        assert_eq!(self.dim(), rhs.dim());
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| -a).collect())
    }
}

impl From<Vec<i64>> for LatticeVector {
    fn from(v: Vec<i64>) -> Self {
        LatticeVector(v)
    }
}

/// A vector in `Q^d`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QVector(pub Vec<Rational>);

impl QVector {
    pub fn zero(d: usize) -> Self {
        QVector(vec![Rational::zero(); d])
    }

    pub fn unit(d: usize, i: usize) -> Self {
        let mut v = Self::zero(d);
        v.0[i] = Rational::from_integer(1.into());
        v
    }

    pub fn from_integers(xs: &[i64]) -> Self {
        QVector(xs.iter().map(|&x| Rational::from_integer(x.into())).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> QVector {
        QVector(self.0.iter().map(|x| x * c).collect())
    }

    /// `self + n` for a lattice point of the same length.
    pub fn shifted(&self, n: &LatticeVector) -> QVector {
        assert_eq!(self.dim(), n.dim());
        QVector(
            self.0
                .iter()
                .zip(n.entries())
                .map(|(a, &x)| a + Rational::from_integer(x.into()))
                .collect(),
        )
    }

    /// True when every entry is an integer.
    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }
}

impl fmt::Debug for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Add for &QVector {
    type Output = QVector;
    fn add(self, rhs: &QVector) -> QVector {
        assert_eq!(self.dim(), rhs.dim());
        QVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &QVector {
    type Output = QVector;
    fn sub(self, rhs: &QVector) -> QVector {
        assert_eq!(self.dim(), rhs.dim());
        QVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// The standard symmetric bilinear form `(u | v) = u^T v`.
pub fn dot(u: &QVector, v: &QVector) -> Result<Rational, LinalgError> {
    if u.dim() != v.dim() {
        return Err(LinalgError::LengthMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    Ok(u.0.iter().zip(&v.0).map(|(a, b)| a * b).sum())
}

/// `(u | n)` for a lattice vector `n`.
pub fn dot_lattice(u: &QVector, n: &LatticeVector) -> Rational {
    assert_eq!(u.dim(), n.dim());
    u.0.iter()
        .zip(n.entries())
        .filter(|(_, &x)| x != 0)
        .map(|(a, &x)| a * Rational::from_integer(x.into()))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn dot_examples() {
        let e1 = QVector::from_integers(&[1, 0]);
        let e2 = QVector::from_integers(&[0, 1]);
        assert_eq!(dot(&e1, &e2).unwrap(), q("0"));
        assert_eq!(dot(&e1, &e1).unwrap(), q("1"));
        let a = QVector(vec![q("1/2"), q("1/3")]);
        let b = QVector::from_integers(&[2, 3]);
        assert_eq!(dot(&a, &b).unwrap(), q("2"));
    }

    #[test]
    fn dot_rejects_length_mismatch() {
        let a = QVector::zero(2);
        let b = QVector::zero(3);
        assert_eq!(
            dot(&a, &b),
            Err(LinalgError::LengthMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn cube_is_lexicographic_and_complete() {
        let pts = LatticeVector::cube(2, 1);
        assert_eq!(pts.len(), 9);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(pts[0], LatticeVector(vec![-1, -1]));
        assert_eq!(LatticeVector::cube(3, 0), vec![LatticeVector::zero(3)]);
    }
}
