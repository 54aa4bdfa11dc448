use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::StructureError;
use crate::exactlinalg::{format_rational, nullspace, rref_basis, QVector, Rational, SparseVector};
use crate::glmodules::{ExplicitModule, GlModuleSpec, Matrix};
use crate::wittaction::FSpaceConfig;

pub const DEFAULT_EXPLICIT_CAP: usize = 8;

const SEED: u64 = 0x5eed_1505;
const RANDOM_TRIALS: usize = 32;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum NotIsomorphicReason {
    BMismatch { b1: Rational, b2: Rational },
    /// `alpha - beta` has a non-integral entry.
    WeightCoset { difference: QVector },
    ModuleMismatch(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum IsoOutcome {
    Isomorphic,
    NotIsomorphic(NotIsomorphicReason),
}

impl IsoOutcome {
    pub fn is_isomorphic(&self) -> bool {
        *self == IsoOutcome::Isomorphic
    }
}

pub fn iso_criterion(cfg1: &FSpaceConfig, cfg2: &FSpaceConfig) -> Result<IsoOutcome, StructureError> {
    iso_criterion_with_cap(cfg1, cfg2, DEFAULT_EXPLICIT_CAP)
}

/// `F^alpha_b(V) ~ F^beta_b'(V')` iff `b = b'`, `alpha - beta` is integral and
/// `V ~ V'` as `sl_d`-modules.
pub fn iso_criterion_with_cap(
    cfg1: &FSpaceConfig,
    cfg2: &FSpaceConfig,
    cap: usize,
) -> Result<IsoOutcome, StructureError> {
    if cfg1.d() != cfg2.d() {
        return Err(StructureError::DimensionMismatch {
            expected: cfg1.d(),
            got: cfg2.d(),
        });
    }
    let (b1, b2) = (cfg1.module.b(), cfg2.module.b());
    if b1 != b2 {
        return Ok(IsoOutcome::NotIsomorphic(NotIsomorphicReason::BMismatch {
            b1: b1.clone(),
            b2: b2.clone(),
        }));
    }
    let difference = &cfg1.alpha - &cfg2.alpha;
    if !difference.is_integral() {
        return Ok(IsoOutcome::NotIsomorphic(NotIsomorphicReason::WeightCoset { difference }));
    }
    if sl_isomorphic(&cfg1.module, &cfg2.module, cap)? {
        Ok(IsoOutcome::Isomorphic)
    } else {
        Ok(IsoOutcome::NotIsomorphic(NotIsomorphicReason::ModuleMismatch(format!(
            "{} and {} are not isomorphic as sl_d-modules",
            cfg1.module.describe(),
            cfg2.module.describe()
        ))))
    }
}

/// Dynkin labels of a finite-dimensional catalog module.
fn dynkin_labels(spec: &GlModuleSpec) -> Option<Vec<u32>> {
    let d = spec.d();
    let mut labels = vec![0; d - 1];
    match spec {
        GlModuleSpec::Exterior { k, .. } => {
            if *k > 0 && *k < d {
                labels[k - 1] = 1;
            }
        }
        GlModuleSpec::Symmetric { m, .. } => labels[0] = *m,
        _ => return None,
    }
    Some(labels)
}

/// `sl_d`-isomorphism of two modules of the same rank. Catalog pairs are
/// decided from their parameters; anything involving an explicit module is
/// decided by searching for an invertible intertwiner.
pub fn sl_isomorphic(a: &GlModuleSpec, b: &GlModuleSpec, cap: usize) -> Result<bool, StructureError> {
    if a.d() != b.d() {
        return Err(StructureError::DimensionMismatch {
            expected: a.d(),
            got: b.d(),
        });
    }
    match (a, b) {
        (GlModuleSpec::Nilsson { d, beta: x, .. }, GlModuleSpec::Nilsson { beta: y, .. }) => {
            // for d = 2 the sl_2 action only sees beta up to beta -> -1 - beta
            Ok(x == y || (*d == 2 && x + y == -Rational::one()))
        }
        (GlModuleSpec::Nilsson { .. }, _) | (_, GlModuleSpec::Nilsson { .. }) => Ok(false),
        (GlModuleSpec::Explicit(_), _) | (_, GlModuleSpec::Explicit(_)) => {
            let (x, y) = (a.to_explicit().expect("finite"), b.to_explicit().expect("finite"));
            if x.dim() != y.dim() {
                return Ok(false);
            }
            if x.dim() > cap {
                return Err(StructureError::CapExceeded { dim: x.dim(), cap });
            }
            explicit_conjugate(&x, &y)
        }
        _ => Ok(dynkin_labels(a) == dynkin_labels(b)),
    }
}

/// Generators of `sl_d`: off-diagonal units and `E_ii - E_{i+1,i+1}`.
fn sl_generators(m: &ExplicitModule) -> Vec<Matrix> {
    let d = m.d;
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                out.push(m.units[i][j].clone());
            }
        }
    }
    for i in 0..d - 1 {
        let mut h = m.units[i][i].clone();
        for (r, row) in h.rows.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x -= &m.units[i + 1][i + 1].rows[r][c];
            }
        }
        out.push(h);
    }
    out
}

fn is_invertible(s: &[Rational], n: usize) -> bool {
    let rows: Vec<SparseVector<usize>> = (0..n)
        .map(|r| (0..n).map(|c| (c, s[r * n + c].clone())).collect())
        .collect();
    rref_basis(&rows).rank() == n
}

/// Looks for invertible `S` with `S A_x = B_x S` for every generator `x`.
fn explicit_conjugate(a: &ExplicitModule, b: &ExplicitModule) -> Result<bool, StructureError> {
    let n = a.dim();
    let idx = |r: usize, c: usize| r * n + c;
    let mut equations = Vec::new();
    for (ax, bx) in sl_generators(a).iter().zip(sl_generators(b)) {
        // (S A - B S)[r][c] = sum_k S[r][k] A[k][c] - B[r][k] S[k][c]
        for r in 0..n {
            for c in 0..n {
                let mut eq = SparseVector::new();
                for k in 0..n {
                    eq.add_term(idx(r, k), &ax.rows[k][c]);
                    eq.add_term(idx(k, c), &-&bx.rows[r][k]);
                }
                if !eq.is_zero() {
                    equations.push(eq);
                }
            }
        }
    }
    let kernel = nullspace(&equations, n * n);
    if kernel.is_empty() {
        return Ok(false);
    }
    let dense = |v: &SparseVector<usize>| -> Vec<Rational> { (0..n * n).map(|i| v.get(&i)).collect() };
    if kernel.iter().any(|v| is_invertible(&dense(v), n)) {
        return Ok(true);
    }
    // det is a polynomial of degree n on the kernel; a nonzero one rarely
    // vanishes at a random integer point
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..RANDOM_TRIALS {
        let mut s = vec![Rational::zero(); n * n];
        for v in &kernel {
            let c = Rational::from_integer(rng.gen_range(-50i64..=50).into());
            for (i, x) in v.iter() {
                s[*i] += x * &c;
            }
        }
        if is_invertible(&s, n) {
            return Ok(true);
        }
    }
    Err(StructureError::Undecided)
}

impl std::fmt::Display for NotIsomorphicReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NotIsomorphicReason::BMismatch { b1, b2 } => {
                write!(f, "b mismatch: {} vs {}", format_rational(b1), format_rational(b2))
            }
            NotIsomorphicReason::WeightCoset { difference } => {
                write!(f, "alpha - beta = {difference:?} is not integral")
            }
            NotIsomorphicReason::ModuleMismatch(s) => f.write_str(s),
        }
    }
}
