//! Catalog of `gl_d`-modules on which the identity acts by a scalar `b`,
//! together with checkers for the bracket law and for the
//! nilpotent/injective behavior of the off-diagonal matrix units.
//!
//! All indices are zero-based: `E(i, j)` with `0 <= i, j < d`.

mod poly;

use std::fmt;

use num_integer::binomial;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactlinalg::{format_rational, rref_basis, Rational, SparseVector};
use poly::{Monomial, Poly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlError {
    #[error("invalid module parameters: {0}")]
    InvalidParameters(String),
    #[error("a degree bound is required for Nilsson modules")]
    MissingDegreeBound,
    #[error("index ({i}, {j}) out of range for d = {d}")]
    IndexOutOfRange { i: usize, j: usize, d: usize },
    #[error("the dichotomy is stated for off-diagonal units; got E({0},{0})")]
    DiagonalUnit(usize),
    #[error("explicit module violates the gl_d bracket at {0:?}")]
    BracketViolation(BracketCounterexample),
    #[error("identity does not act as b on the explicit module")]
    IdentityNotScalar,
}

/// Basis element of a catalog module, in canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisKey {
    /// `e_{i_1} ^ ... ^ e_{i_k}` with strictly increasing indices.
    Exterior(Vec<usize>),
    /// `x^a` with `|a| = m`.
    Symmetric(Vec<u32>),
    /// `h^a` with `a` in `Z_+^{d-1}`.
    Nilsson(Vec<u32>),
    Explicit(usize),
}

impl BasisKey {
    /// Integer tuple used in serialized form: one-based indices for exterior
    /// keys, exponents for symmetric and Nilsson keys, `[index]` for explicit.
    pub fn to_list(&self) -> Vec<i64> {
        match self {
            BasisKey::Exterior(ix) => ix.iter().map(|&i| i as i64 + 1).collect(),
            BasisKey::Symmetric(a) | BasisKey::Nilsson(a) => a.iter().map(|&e| e as i64).collect(),
            BasisKey::Explicit(i) => vec![*i as i64],
        }
    }
}

impl fmt::Debug for BasisKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisKey::Exterior(ix) if ix.is_empty() => write!(f, "1"),
            BasisKey::Exterior(ix) => {
                let parts: Vec<String> = ix.iter().map(|i| format!("e{}", i + 1)).collect();
                write!(f, "{}", parts.join("^"))
            }
            BasisKey::Symmetric(a) => write!(f, "x{a:?}"),
            BasisKey::Nilsson(a) => write!(f, "h{a:?}"),
            BasisKey::Explicit(i) => write!(f, "v{i}"),
        }
    }
}

pub type ModuleVector = SparseVector<BasisKey>;

/// Square matrix, `rows[r][c]`; column `c` is the image of basis vector `c`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    pub rows: Vec<Vec<Rational>>,
}

impl Matrix {
    pub fn zero(n: usize) -> Self {
        Matrix {
            rows: vec![vec![Rational::zero(); n]; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn column(&self, c: usize) -> ModuleVector {
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| (BasisKey::Explicit(r), row[c].clone()))
            .collect()
    }
}

/// A module given by explicit matrices for every `E(i, j)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExplicitModule {
    pub d: usize,
    pub b: Rational,
    /// `units[i][j]` is the matrix of `E(i, j)`.
    pub units: Vec<Vec<Matrix>>,
}

impl ExplicitModule {
    pub fn dim(&self) -> usize {
        self.units[0][0].dim()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GlModuleSpec {
    /// `Lambda^k C^d`; natural identity scalar `k`.
    Exterior { d: usize, k: usize, b: Rational },
    /// `S^m C^d`; natural identity scalar `m`.
    Symmetric { d: usize, m: u32, b: Rational },
    /// Nilsson's module on `C[h_1, ..., h_{d-1}]` with parameter `beta`.
    Nilsson { d: usize, beta: Rational, b: Rational },
    Explicit(ExplicitModule),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OperatorClass {
    /// Least `t` with `E^t = 0`.
    Nilpotent(usize),
    InjectiveOnTruncation,
    /// Neither nilpotent nor injective; impossible on an irreducible module.
    Neither { rank: usize, columns: usize },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BracketCounterexample {
    pub quadruple: (usize, usize, usize, usize),
    pub key: BasisKey,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BracketCheck {
    Pass { checked: usize },
    Counterexample(BracketCounterexample),
}

impl BracketCheck {
    pub fn passed(&self) -> bool {
        matches!(self, BracketCheck::Pass { .. })
    }
}

fn rat(x: i64) -> Rational {
    Rational::from_integer(x.into())
}

impl GlModuleSpec {
    pub fn exterior(d: usize, k: usize, b: Rational) -> Result<Self, GlError> {
        check_rank(d)?;
        // k = 0 is the trivial module, the source of the first de Rham map
        if k > d {
            return Err(GlError::InvalidParameters(format!("exterior power {k} exceeds d = {d}")));
        }
        Ok(GlModuleSpec::Exterior { d, k, b })
    }

    pub fn symmetric(d: usize, m: u32, b: Rational) -> Result<Self, GlError> {
        check_rank(d)?;
        Ok(GlModuleSpec::Symmetric { d, m, b })
    }

    pub fn nilsson(d: usize, beta: Rational, b: Rational) -> Result<Self, GlError> {
        check_rank(d)?;
        Ok(GlModuleSpec::Nilsson { d, beta, b })
    }

    /// Validated explicit module: the identity must act as `b` and the
    /// bracket law must hold.
    pub fn explicit(d: usize, b: Rational, units: Vec<Vec<Matrix>>) -> Result<Self, GlError> {
        let spec = Self::explicit_unchecked(d, b, units)?;
        let GlModuleSpec::Explicit(m) = &spec else { unreachable!() };
        let n = m.dim();
        let mut identity = Matrix::zero(n);
        for i in 0..d {
            for (r, row) in m.units[i][i].rows.iter().enumerate() {
                for (c, x) in row.iter().enumerate() {
                    identity.rows[r][c] += x;
                }
            }
        }
        for (r, row) in identity.rows.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                let want = if r == c { m.b.clone() } else { Rational::zero() };
                if *x != want {
                    return Err(GlError::IdentityNotScalar);
                }
            }
        }
        match verify_gl_bracket(&spec, None)? {
            BracketCheck::Pass { .. } => Ok(spec),
            BracketCheck::Counterexample(c) => Err(GlError::BracketViolation(c)),
        }
    }

    /// Shape-checked only. Used for mutation fixtures.
    pub fn explicit_unchecked(d: usize, b: Rational, units: Vec<Vec<Matrix>>) -> Result<Self, GlError> {
        check_rank(d)?;
        if units.len() != d || units.iter().any(|row| row.len() != d) {
            return Err(GlError::InvalidParameters(format!("expected {d}x{d} matrix units")));
        }
        let n = units[0][0].dim();
        if units.iter().flatten().any(|m| m.dim() != n || m.rows.iter().any(|r| r.len() != n)) {
            return Err(GlError::InvalidParameters("matrices must all be square of one size".into()));
        }
        Ok(GlModuleSpec::Explicit(ExplicitModule { d, b, units }))
    }

    pub fn d(&self) -> usize {
        match self {
            GlModuleSpec::Exterior { d, .. } | GlModuleSpec::Symmetric { d, .. } | GlModuleSpec::Nilsson { d, .. } => *d,
            GlModuleSpec::Explicit(m) => m.d,
        }
    }

    /// Scalar by which the identity matrix acts.
    pub fn b(&self) -> &Rational {
        match self {
            GlModuleSpec::Exterior { b, .. } | GlModuleSpec::Symmetric { b, .. } | GlModuleSpec::Nilsson { b, .. } => b,
            GlModuleSpec::Explicit(m) => &m.b,
        }
    }

    pub fn with_b(&self, b: Rational) -> Self {
        let mut out = self.clone();
        match &mut out {
            GlModuleSpec::Exterior { b: x, .. } | GlModuleSpec::Symmetric { b: x, .. } | GlModuleSpec::Nilsson { b: x, .. } => *x = b,
            GlModuleSpec::Explicit(m) => {
                // shift the diagonal units so the identity acts by the new scalar
                let shift = (&b - &m.b) / rat(m.d as i64);
                for i in 0..m.d {
                    for (r, row) in m.units[i][i].rows.iter_mut().enumerate() {
                        row[r] += &shift;
                    }
                }
                m.b = b;
            }
        }
        out
    }

    /// `None` for Nilsson modules.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            GlModuleSpec::Exterior { d, k, .. } => Some(binomial(*d, *k)),
            GlModuleSpec::Symmetric { d, m, .. } => Some(binomial(*d + *m as usize - 1, *m as usize)),
            GlModuleSpec::Nilsson { .. } => None,
            GlModuleSpec::Explicit(m) => Some(m.dim()),
        }
    }

    pub fn is_finite_dimensional(&self) -> bool {
        self.dimension().is_some()
    }

    /// Whether `key` is a basis element of this module.
    pub fn owns(&self, key: &BasisKey) -> bool {
        match (self, key) {
            (GlModuleSpec::Exterior { d, k, .. }, BasisKey::Exterior(ix)) => {
                ix.len() == *k && ix.windows(2).all(|w| w[0] < w[1]) && ix.iter().all(|&i| i < *d)
            }
            (GlModuleSpec::Symmetric { d, m, .. }, BasisKey::Symmetric(a)) => a.len() == *d && a.iter().sum::<u32>() == *m,
            (GlModuleSpec::Nilsson { d, .. }, BasisKey::Nilsson(a)) => a.len() == d - 1,
            (GlModuleSpec::Explicit(m), BasisKey::Explicit(i)) => *i < m.dim(),
            _ => false,
        }
    }

    /// Inverse of [`BasisKey::to_list`]; `None` when the list names no basis
    /// element of this module.
    pub fn key_from_list(&self, list: &[i64]) -> Option<BasisKey> {
        let key = match self {
            GlModuleSpec::Exterior { .. } => {
                let ix: Option<Vec<usize>> = list.iter().map(|&i| usize::try_from(i - 1).ok()).collect();
                BasisKey::Exterior(ix?)
            }
            GlModuleSpec::Symmetric { .. } | GlModuleSpec::Nilsson { .. } => {
                let a: Option<Vec<u32>> = list.iter().map(|&e| u32::try_from(e).ok()).collect();
                match self {
                    GlModuleSpec::Symmetric { .. } => BasisKey::Symmetric(a?),
                    _ => BasisKey::Nilsson(a?),
                }
            }
            GlModuleSpec::Explicit(_) => match list {
                [i] => BasisKey::Explicit(usize::try_from(*i).ok()?),
                _ => return None,
            },
        };
        self.owns(&key).then_some(key)
    }

    /// Degree used for truncation: total `h`-degree for Nilsson keys, zero
    /// otherwise.
    pub fn key_degree(key: &BasisKey) -> u32 {
        match key {
            BasisKey::Nilsson(a) => poly::total_degree(a),
            _ => 0,
        }
    }

    /// The unit vector `1` of the Nilsson module.
    pub fn nilsson_one(d: usize) -> BasisKey {
        BasisKey::Nilsson(vec![0; d - 1])
    }

    /// Convert a finite-dimensional catalog entry to explicit matrices in
    /// the order of `basis_enumerate`.
    pub fn to_explicit(&self) -> Option<ExplicitModule> {
        if let GlModuleSpec::Explicit(m) = self {
            return Some(m.clone());
        }
        if !self.is_finite_dimensional() {
            return None;
        }
        let keys = basis_enumerate(self, None).ok()?;
        let d = self.d();
        let n = keys.len();
        let units = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let mut mat = Matrix::zero(n);
                        for (c, key) in keys.iter().enumerate() {
                            let img = apply_e(self, i, j, &ModuleVector::basis(key.clone()));
                            for (r, k2) in keys.iter().enumerate() {
                                mat.rows[r][c] = img.get(k2);
                            }
                        }
                        mat
                    })
                    .collect()
            })
            .collect();
        Some(ExplicitModule { d, b: self.b().clone(), units })
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            GlModuleSpec::Exterior { d, k, b } => format!("Exterior(d={d}, k={k}, b={})", format_rational(b)),
            GlModuleSpec::Symmetric { d, m, b } => format!("Symmetric(d={d}, m={m}, b={})", format_rational(b)),
            GlModuleSpec::Nilsson { d, beta, b } => {
                format!("Nilsson(d={d}, beta={}, b={})", format_rational(beta), format_rational(b))
            }
            GlModuleSpec::Explicit(m) => format!("Explicit(d={}, dim={}, b={})", m.d, m.dim(), format_rational(&m.b)),
        }
    }
}

fn check_rank(d: usize) -> Result<(), GlError> {
    if d < 2 {
        return Err(GlError::InvalidParameters(format!("d must be at least 2, got {d}")));
    }
    Ok(())
}

/// Canonical basis. Nilsson modules need a bound on the total degree of the
/// `h`-monomials; other variants ignore the bound.
pub fn basis_enumerate(spec: &GlModuleSpec, degree_bound: Option<u32>) -> Result<Vec<BasisKey>, GlError> {
    Ok(match spec {
        GlModuleSpec::Exterior { d, k, .. } => subsets(*d, *k).into_iter().map(BasisKey::Exterior).collect(),
        GlModuleSpec::Symmetric { d, m, .. } => {
            let mut out: Vec<BasisKey> = poly::monomials_up_to(*d, *m)
                .into_iter()
                .filter(|a| poly::total_degree(a) == *m)
                .map(BasisKey::Symmetric)
                .collect();
            out.sort();
            out
        }
        GlModuleSpec::Nilsson { d, .. } => {
            let bound = degree_bound.ok_or(GlError::MissingDegreeBound)?;
            poly::monomials_up_to(d - 1, bound).into_iter().map(BasisKey::Nilsson).collect()
        }
        GlModuleSpec::Explicit(m) => (0..m.dim()).map(BasisKey::Explicit).collect(),
    })
}

fn subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, k, &mut Vec::new(), &mut out);
    out
}

/// Image of `v` under `E(i, j)`.
pub fn apply_e(spec: &GlModuleSpec, i: usize, j: usize, v: &ModuleVector) -> ModuleVector {
    let d = spec.d();
    assert!(i < d && j < d, "matrix unit ({i}, {j}) out of range for d = {d}");
    let mut out = ModuleVector::new();
    for (key, c) in v.iter() {
        out.add_scaled(&apply_e_basis(spec, i, j, key), c);
    }
    out
}

fn apply_e_basis(spec: &GlModuleSpec, i: usize, j: usize, key: &BasisKey) -> ModuleVector {
    match (spec, key) {
        (GlModuleSpec::Exterior { d, k, b }, BasisKey::Exterior(ix)) => {
            let mut out = ModuleVector::new();
            if i == j {
                let natural = if ix.contains(&i) { Rational::one() } else { Rational::zero() };
                let twist = (b - rat(*k as i64)) / rat(*d as i64);
                out.add_term(key.clone(), &(natural + twist));
                return out;
            }
            // derivation e_j -> e_i
            let Some(pos) = ix.iter().position(|&x| x == j) else { return out };
            if ix.contains(&i) {
                return out;
            }
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            let between = ix.iter().filter(|&&x| lo < x && x < hi).count();
            let mut new = ix.clone();
            new[pos] = i;
            new.sort_unstable();
            let sign = if between % 2 == 0 { rat(1) } else { rat(-1) };
            out.add_term(BasisKey::Exterior(new), &sign);
            out
        }
        (GlModuleSpec::Symmetric { d, m, b }, BasisKey::Symmetric(a)) => {
            let mut out = ModuleVector::new();
            if i == j {
                let twist = (b - rat(*m as i64)) / rat(*d as i64);
                out.add_term(key.clone(), &(rat(a[i] as i64) + twist));
                return out;
            }
            if a[j] == 0 {
                return out;
            }
            let mut new = a.clone();
            new[j] -= 1;
            new[i] += 1;
            out.add_term(BasisKey::Symmetric(new), &rat(a[j] as i64));
            out
        }
        (GlModuleSpec::Nilsson { d, beta, b }, BasisKey::Nilsson(a)) => {
            let f = Poly::basis(a.clone());
            nilsson_e(*d, beta, b, i, j, &f).map_keys(|m: &Monomial| BasisKey::Nilsson(m.clone()))
        }
        (GlModuleSpec::Explicit(m), BasisKey::Explicit(c)) => m.units[i][j].column(*c),
        _ => panic!("basis key {key:?} does not belong to {}", spec.describe()),
    }
}

/// Nilsson action, with the diagonal units split as `h_i + b/d`.
fn nilsson_e(d: usize, beta: &Rational, b: &Rational, i: usize, j: usize, f: &Poly) -> Poly {
    let nv = d - 1;
    let last = d - 1;
    let b_over_d = b / rat(d as i64);
    let sum_h = {
        let mut s = Poly::new();
        for k in 0..nv {
            s.add_assign(&poly::variable(nv, k));
        }
        s
    };
    // h_i - beta - 1
    let shifted_h = |i: usize| {
        let mut p = poly::variable(nv, i);
        p.add_assign(&poly::constant(nv, -(beta + rat(1))));
        p
    };
    if i == j {
        let mut factor = if i < last { poly::variable(nv, i) } else { sum_h.neg() };
        factor.add_assign(&poly::constant(nv, b_over_d));
        return poly::mul(&factor, f);
    }
    if j == last {
        // (beta + sum h_k)(h_i - beta - 1) f(.., h_i - 1, ..)
        let mut first = sum_h;
        first.add_assign(&poly::constant(nv, beta.clone()));
        let factor = poly::mul(&first, &shifted_h(i));
        return poly::mul(&factor, &poly::shift(f, i, -1));
    }
    if i == last {
        return poly::shift(f, j, 1).neg();
    }
    let g = poly::shift(&poly::shift(f, i, -1), j, 1);
    poly::mul(&shifted_h(i), &g)
}

/// Checks `[E_ij, E_kl] = delta_jk E_il - delta_li E_kj` on every basis vector
/// (Nilsson: every monomial of degree `<= degree_bound`) and every index
/// quadruple. Reports the lexicographically first failure.
pub fn verify_gl_bracket(spec: &GlModuleSpec, degree_bound: Option<u32>) -> Result<BracketCheck, GlError> {
    let d = spec.d();
    let keys = basis_enumerate(spec, degree_bound)?;
    let mut checked = 0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    for key in &keys {
                        let v = ModuleVector::basis(key.clone());
                        let lhs = apply_e(spec, i, j, &apply_e(spec, k, l, &v))
                            .sub(&apply_e(spec, k, l, &apply_e(spec, i, j, &v)));
                        let mut rhs = ModuleVector::new();
                        if j == k {
                            rhs.add_assign(&apply_e(spec, i, l, &v));
                        }
                        if l == i {
                            rhs = rhs.sub(&apply_e(spec, k, j, &v));
                        }
                        if lhs != rhs {
                            return Ok(BracketCheck::Counterexample(BracketCounterexample {
                                quadruple: (i, j, k, l),
                                key: key.clone(),
                            }));
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(BracketCheck::Pass { checked })
}

/// Nilpotency index or injectivity of an off-diagonal unit. Nilsson modules
/// are checked on the degree `<= truncation` slice, whose image lies in
/// degree `<= truncation + 2`.
pub fn classify_operator(spec: &GlModuleSpec, i: usize, j: usize, truncation: Option<u32>) -> Result<OperatorClass, GlError> {
    let d = spec.d();
    if i >= d || j >= d {
        return Err(GlError::IndexOutOfRange { i, j, d });
    }
    if i == j {
        return Err(GlError::DiagonalUnit(i));
    }
    let keys = basis_enumerate(spec, truncation)?;
    let images: Vec<ModuleVector> = keys
        .iter()
        .map(|k| apply_e(spec, i, j, &ModuleVector::basis(k.clone())))
        .collect();
    if spec.is_finite_dimensional() {
        let mut current = images.clone();
        for t in 1..=keys.len() + 1 {
            if current.iter().all(ModuleVector::is_zero) {
                return Ok(OperatorClass::Nilpotent(t));
            }
            current = current.iter().map(|v| apply_e(spec, i, j, v)).collect();
        }
    }
    let rank = rref_basis(&images).rank();
    if rank == keys.len() {
        Ok(OperatorClass::InjectiveOnTruncation)
    } else {
        Ok(OperatorClass::Neither { rank, columns: keys.len() })
    }
}
