//! Recovering operator coefficients of polynomial families `g(n, u)` by exact
//! interpolation, and replaying the coefficient extractions used in the
//! irreducibility argument.

use std::collections::BTreeMap;

use num_traits::One;
use rayon::prelude::*;

use super::{act, FSpaceConfig, FVector, WittError, WittOperator};
use crate::exactlinalg::{vandermonde_solve, LatticeVector, QVector, Rational};
use crate::glmodules::{apply_e, ModuleVector};

/// A family `(n, u) -> g(n, u) x` that is polynomial in `n` and `u`.
pub type Blackbox<'a> = dyn Fn(&LatticeVector, &QVector) -> FVector + Sync + 'a;

/// `g(n, u) = sum_{a,b} c_{a,b} n^a u^b`, with each `c_{a,b}` already applied
/// to a fixed vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OperatorPolynomial {
    pub n_bounds: Vec<usize>,
    pub u_bounds: Vec<usize>,
    pub coefficients: BTreeMap<(Vec<usize>, Vec<usize>), FVector>,
}

impl OperatorPolynomial {
    pub fn coefficient(&self, a: &[usize], b: &[usize]) -> FVector {
        self.coefficients
            .get(&(a.to_vec(), b.to_vec()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn evaluate(&self, n: &LatticeVector, u: &QVector) -> FVector {
        let mut out = FVector::new();
        for ((a, b), c) in &self.coefficients {
            let mut mono = Rational::one();
            for (&e, &x) in a.iter().zip(n.entries()) {
                mono *= Rational::from_integer(x.into()).pow(e as i32);
            }
            for (&e, x) in b.iter().zip(u.entries()) {
                mono *= x.pow(e as i32);
            }
            out.add_scaled(c, &mono);
        }
        out
    }
}

/// Samples the family on the grid `{0..=n_bounds[i]} x {0..=u_bounds[j]}` and
/// solves for every coefficient.
pub fn interpolate_operator_polynomial(
    blackbox: &Blackbox<'_>,
    n_bounds: &[usize],
    u_bounds: &[usize],
) -> Result<OperatorPolynomial, WittError> {
    let d = n_bounds.len();
    if u_bounds.len() != d {
        return Err(WittError::DimensionMismatch {
            expected: d,
            got: u_bounds.len(),
        });
    }
    let bounds: Vec<usize> = n_bounds.iter().chain(u_bounds).copied().collect();
    let mut points: Vec<Vec<i64>> = vec![vec![]];
    for &g in &bounds {
        points = points
            .into_iter()
            .flat_map(|p| {
                (0..=g as i64).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    let values: Vec<_> = points
        .par_iter()
        .map(|p| {
            let n = LatticeVector(p[..d].to_vec());
            let u = QVector::from_integers(&p[d..]);
            blackbox(&n, &u).to_flat()
        })
        .collect();
    let solved = vandermonde_solve(&points, &values, &bounds)?;
    let coefficients = solved
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(deg, c)| ((deg[..d].to_vec(), deg[d..].to_vec()), FVector::from_flat(&c)))
        .collect();
    Ok(OperatorPolynomial {
        n_bounds: n_bounds.to_vec(),
        u_bounds: u_bounds.to_vec(),
        coefficients,
    })
}

/// The coefficient of `n^a u^b` in the family.
pub fn extract_coefficient(
    blackbox: &Blackbox<'_>,
    n_bounds: &[usize],
    u_bounds: &[usize],
    a: &[usize],
    b: &[usize],
) -> Result<FVector, WittError> {
    Ok(interpolate_operator_polynomial(blackbox, n_bounds, u_bounds)?.coefficient(a, b))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReplayOutcome {
    pub extracted: FVector,
    pub expected: FVector,
}

impl ReplayOutcome {
    pub fn passed(&self) -> bool {
        self.extracted == self.expected
    }
}

fn check_vector(cfg: &FSpaceConfig, v: &ModuleVector) -> Result<(), WittError> {
    match v.keys().find(|k| !cfg.module.owns(k)) {
        Some(k) => Err(WittError::ForeignKey(k.clone())),
        None => Ok(()),
    }
}

fn check_index(cfg: &FSpaceConfig, index: usize) -> Result<(), WittError> {
    if index >= cfg.d() {
        return Err(WittError::IndexOutOfRange { index, d: cfg.d() });
    }
    Ok(())
}

fn check_degree(cfg: &FSpaceConfig, m: &LatticeVector) -> Result<(), WittError> {
    if m.dim() != cfg.d() {
        return Err(WittError::DimensionMismatch {
            expected: cfg.d(),
            got: m.dim(),
        });
    }
    Ok(())
}

fn unit_exponent(d: usize, i: usize, e: usize) -> Vec<usize> {
    let mut a = vec![0; d];
    a[i] = e;
    a
}

/// Interpolates `(n, u) -> D(u, m - n) D(u, n) v(0)` (degree two in every
/// `n_i` and `u_j`) and compares its `n_s^2 u_t^2` coefficient with
/// `-E_st E_st v` placed at degree `m`.
pub fn replay_claim1(
    cfg: &FSpaceConfig,
    s: usize,
    t: usize,
    m: &LatticeVector,
    v: &ModuleVector,
) -> Result<ReplayOutcome, WittError> {
    check_index(cfg, s)?;
    check_index(cfg, t)?;
    if s == t {
        return Err(WittError::SameIndex(s));
    }
    check_degree(cfg, m)?;
    check_vector(cfg, v)?;
    let d = cfg.d();
    let start = FVector::single(LatticeVector::zero(d), v.clone());
    let blackbox = |n: &LatticeVector, u: &QVector| {
        let inner = act(cfg, &WittOperator { u: u.clone(), r: n.clone() }, &start);
        act(cfg, &WittOperator { u: u.clone(), r: m - n }, &inner)
    };
    let extracted = extract_coefficient(
        &blackbox,
        &vec![2; d],
        &vec![2; d],
        &unit_exponent(d, s, 2),
        &unit_exponent(d, t, 2),
    )?;
    let est = |x: &ModuleVector| apply_e(&cfg.module, s, t, x);
    let expected = FVector::single(m.clone(), est(&est(v)).neg());
    Ok(ReplayOutcome { extracted, expected })
}

/// Interpolates `(n, u) -> D(u, n) v(m - n)` (degree one in every variable)
/// and compares its `n_i u_j` coefficient with `E_ij v`, or `(E_ii - 1) v`
/// when `i = j`, placed at degree `m`.
pub fn replay_claim2(
    cfg: &FSpaceConfig,
    i: usize,
    j: usize,
    m: &LatticeVector,
    v: &ModuleVector,
) -> Result<ReplayOutcome, WittError> {
    check_index(cfg, i)?;
    check_index(cfg, j)?;
    check_degree(cfg, m)?;
    check_vector(cfg, v)?;
    let d = cfg.d();
    let blackbox = |n: &LatticeVector, u: &QVector| {
        let x = FVector::single(m - n, v.clone());
        act(cfg, &WittOperator { u: u.clone(), r: n.clone() }, &x)
    };
    let extracted = extract_coefficient(
        &blackbox,
        &vec![1; d],
        &vec![1; d],
        &unit_exponent(d, i, 1),
        &unit_exponent(d, j, 1),
    )?;
    let mut image = apply_e(&cfg.module, i, j, v);
    if i == j {
        image.add_scaled(v, &-Rational::one());
    }
    let expected = FVector::single(m.clone(), image);
    Ok(ReplayOutcome { extracted, expected })
}

