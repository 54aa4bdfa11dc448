//! The Witt algebra `W_d` acting on `F^alpha_b(V) = V (x) A_d`.
//!
//! `D(u, r) = x^r sum_i u_i d_i` acts on `v(n) = v (x) x^n` by
//!
//! ```text
//! D(u, r) v(n) = ((u | n + alpha) v + (r u^T) v)(n + r)
//! ```
//!
//! where the matrix `r u^T = sum_{i,j} r_i u_j E_ij` acts through the
//! `gl_d`-module structure of `V`.

mod replay;

pub use replay::{
    extract_coefficient, interpolate_operator_polynomial, replay_claim1, replay_claim2, Blackbox,
    OperatorPolynomial, ReplayOutcome,
};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::exactlinalg::{dot, dot_lattice, LatticeVector, LinalgError, QVector, Rational, SparseVector};
use crate::glmodules::{apply_e, basis_enumerate, BasisKey, GlError, GlModuleSpec, ModuleVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WittError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Claim 1 needs distinct indices, got s = t = {0}")]
    SameIndex(usize),
    #[error("index {index} out of range for d = {d}")]
    IndexOutOfRange { index: usize, d: usize },
    #[error("basis key {0:?} does not belong to the module")]
    ForeignKey(BasisKey),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Gl(#[from] GlError),
}

/// `D(u, r) = x^r sum_i u_i d_i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WittOperator {
    pub u: QVector,
    pub r: LatticeVector,
}

impl WittOperator {
    pub fn new(u: QVector, r: LatticeVector) -> Result<Self, WittError> {
        if u.dim() != r.dim() {
            return Err(WittError::DimensionMismatch {
                expected: u.dim(),
                got: r.dim(),
            });
        }
        Ok(WittOperator { u, r })
    }

    /// `d_i = D(e_i, 0)`
    pub fn partial(d: usize, i: usize) -> Self {
        WittOperator {
            u: QVector::unit(d, i),
            r: LatticeVector::zero(d),
        }
    }

    /// `D(e_i, r)`
    pub fn unit(i: usize, r: LatticeVector) -> Self {
        WittOperator {
            u: QVector::unit(r.dim(), i),
            r,
        }
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero()
    }

    /// `{D(e_i, r) : 0 <= i < d, |r|_inf <= radius}`, ordered by `r` then `i`.
    pub fn generating_set(d: usize, radius: i64) -> Vec<WittOperator> {
        LatticeVector::cube(d, radius)
            .into_iter()
            .flat_map(|r| (0..d).map(move |i| WittOperator::unit(i, r.clone())))
            .collect()
    }
}

impl fmt::Debug for WittOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D({:?}, {:?})", self.u, self.r)
    }
}

/// Formal sum of operators; the bracket of two operators has at most one term.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct WittSum {
    pub terms: Vec<WittOperator>,
}

impl WittSum {
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(WittOperator::is_zero)
    }
}

/// `[D(u, r), D(v, s)] = D(w, r + s)` with `w = (u | s) v - (v | r) u`.
pub fn bracket(a: &WittOperator, b: &WittOperator) -> WittSum {
    assert_eq!(a.dim(), b.dim(), "operators of different rank");
    let us = dot_lattice(&a.u, &b.r);
    let vr = dot_lattice(&b.u, &a.r);
    let w = &b.u.scale(&us) - &a.u.scale(&vr);
    if w.is_zero() {
        return WittSum::default();
    }
    WittSum {
        terms: vec![WittOperator { u: w, r: &a.r + &b.r }],
    }
}

/// Parameters of `F^alpha_b(V)`; `b` is carried by the module.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FSpaceConfig {
    pub alpha: QVector,
    pub module: GlModuleSpec,
}

impl FSpaceConfig {
    pub fn new(alpha: QVector, module: GlModuleSpec) -> Result<Self, WittError> {
        if alpha.dim() != module.d() {
            return Err(WittError::DimensionMismatch {
                expected: module.d(),
                got: alpha.dim(),
            });
        }
        Ok(FSpaceConfig { alpha, module })
    }

    pub fn d(&self) -> usize {
        self.alpha.dim()
    }
}

/// Finite sum of `v(n)`, stored as one module vector per lattice degree.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct FVector {
    components: BTreeMap<LatticeVector, ModuleVector>,
}

impl FVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// `v(n)`
    pub fn single(n: LatticeVector, v: ModuleVector) -> Self {
        let mut out = Self::new();
        out.add_component(n, &v);
        out
    }

    pub fn basis(n: LatticeVector, key: BasisKey) -> Self {
        Self::single(n, ModuleVector::basis(key))
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, n: &LatticeVector) -> Option<&ModuleVector> {
        self.components.get(n)
    }

    pub fn components(&self) -> impl Iterator<Item = (&LatticeVector, &ModuleVector)> {
        self.components.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &LatticeVector> {
        self.components.keys()
    }

    pub fn add_component(&mut self, n: LatticeVector, v: &ModuleVector) {
        if v.is_zero() {
            return;
        }
        let slot = self.components.entry(n.clone()).or_default();
        slot.add_assign(v);
        if slot.is_zero() {
            self.components.remove(&n);
        }
    }

    pub fn add_scaled(&mut self, other: &FVector, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (n, v) in &other.components {
            self.add_component(n.clone(), &v.scaled(c));
        }
    }

    pub fn add_assign(&mut self, other: &FVector) {
        for (n, v) in &other.components {
            self.add_component(n.clone(), v);
        }
    }

    pub fn scaled(&self, c: &Rational) -> FVector {
        let mut out = FVector::new();
        out.add_scaled(self, c);
        out
    }

    pub fn sub(&self, other: &FVector) -> FVector {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::from_integer(1.into()));
        out
    }

    /// Flattened form keyed by `(n, basis key)`.
    pub fn to_flat(&self) -> SparseVector<(LatticeVector, BasisKey)> {
        let mut out = SparseVector::new();
        for (n, v) in &self.components {
            for (k, c) in v.iter() {
                out.add_term((n.clone(), k.clone()), c);
            }
        }
        out
    }

    pub fn from_flat(flat: &SparseVector<(LatticeVector, BasisKey)>) -> Self {
        let mut out = FVector::new();
        for ((n, k), c) in flat.iter() {
            out.add_component(n.clone(), &ModuleVector::from_terms([(k.clone(), c.clone())]));
        }
        out
    }
}

impl fmt::Debug for FVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.components.iter()).finish()
    }
}

/// `(r u^T) v = sum_{i,j} r_i u_j E_ij v`
pub fn apply_rank_one(module: &GlModuleSpec, r: &LatticeVector, u: &QVector, v: &ModuleVector) -> ModuleVector {
    rank_one_by(r, u, v, |i, j, w| apply_e(module, i, j, w))
}

fn rank_one_by<E>(r: &LatticeVector, u: &QVector, v: &ModuleVector, e: E) -> ModuleVector
where
    E: Fn(usize, usize, &ModuleVector) -> ModuleVector,
{
    let mut out = ModuleVector::new();
    for (i, &ri) in r.entries().iter().enumerate() {
        if ri == 0 {
            continue;
        }
        let ri = Rational::from_integer(ri.into());
        for (j, uj) in u.entries().iter().enumerate() {
            if uj.is_zero() {
                continue;
            }
            out.add_scaled(&e(i, j, v), &(&ri * uj));
        }
    }
    out
}

fn act_by<E>(cfg: &FSpaceConfig, op: &WittOperator, x: &FVector, e: E) -> FVector
where
    E: Fn(usize, usize, &ModuleVector) -> ModuleVector,
{
    assert_eq!(op.dim(), cfg.d(), "operator rank does not match the module");
    let base = dot(&op.u, &cfg.alpha).expect("checked rank");
    let mut out = FVector::new();
    for (n, v) in x.components() {
        let scalar = dot_lattice(&op.u, n) + &base;
        let mut image = rank_one_by(&op.r, &op.u, v, &e);
        image.add_scaled(v, &scalar);
        out.add_component(n + &op.r, &image);
    }
    out
}

/// Image of `x` under `D(u, r)`.
pub fn act(cfg: &FSpaceConfig, op: &WittOperator, x: &FVector) -> FVector {
    act_by(cfg, op, x, |i, j, v| apply_e(&cfg.module, i, j, v))
}

/// The action with `E_ij` precomputed on a set of basis keys; other keys
/// fall back to [`apply_e`]. Agrees with [`act`] everywhere.
pub struct ActionTable<'a> {
    cfg: &'a FSpaceConfig,
    units: HashMap<(usize, usize, BasisKey), ModuleVector>,
}

impl<'a> ActionTable<'a> {
    pub fn new(cfg: &'a FSpaceConfig, keys: &[BasisKey]) -> Self {
        let d = cfg.d();
        let units = keys
            .par_iter()
            .flat_map_iter(|k| {
                let v = ModuleVector::basis(k.clone());
                (0..d)
                    .flat_map(move |i| (0..d).map(move |j| (i, j)))
                    .map(move |(i, j)| ((i, j, k.clone()), apply_e(&cfg.module, i, j, &v)))
            })
            .collect();
        ActionTable { cfg, units }
    }

    /// Table covering every key a word of `word_length` operators can reach
    /// from keys of degree `<= v_degree_bound`.
    pub fn for_words(cfg: &'a FSpaceConfig, v_degree_bound: Option<u32>, word_length: u32) -> Result<Self, WittError> {
        // Nilsson units raise the h-degree by at most two
        let bound = v_degree_bound.map(|b| b + 2 * word_length);
        let keys = basis_enumerate(&cfg.module, bound)?;
        Ok(Self::new(cfg, &keys))
    }

    pub fn apply_e(&self, i: usize, j: usize, v: &ModuleVector) -> ModuleVector {
        let mut out = ModuleVector::new();
        for (key, c) in v.iter() {
            match self.units.get(&(i, j, key.clone())) {
                Some(img) => out.add_scaled(img, c),
                None => out.add_scaled(&apply_e(&self.cfg.module, i, j, &ModuleVector::basis(key.clone())), c),
            }
        }
        out
    }

    pub fn act(&self, op: &WittOperator, x: &FVector) -> FVector {
        act_by(self.cfg, op, x, |i, j, v| self.apply_e(i, j, v))
    }
}

pub fn act_sum(cfg: &FSpaceConfig, ops: &WittSum, x: &FVector) -> FVector {
    let mut out = FVector::new();
    for op in &ops.terms {
        out.add_assign(&act(cfg, op, x));
    }
    out
}

/// Eigenvalues of `d_1, ..., d_d` on `V (x) x^n`: `alpha + n`.
pub fn weight_of(cfg: &FSpaceConfig, n: &LatticeVector) -> QVector {
    cfg.alpha.shifted(n)
}

/// First failing site of the commutator identity
/// `A(Bx) - B(Ax) = [A, B] x`, indexed into the operator list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RepresentationCounterexample {
    pub first: usize,
    pub second: usize,
    pub degree: LatticeVector,
    pub key: BasisKey,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RepresentationCheck {
    Pass { sites: usize },
    Counterexample(RepresentationCounterexample),
}

impl RepresentationCheck {
    pub fn passed(&self) -> bool {
        matches!(self, RepresentationCheck::Pass { .. })
    }
}

/// Exhaustive check of the representation axiom on every operator pair and
/// every basis vector `v(n)` with `n` in `degrees` (Nilsson: `v` of degree
/// `<= v_degree_bound`).
pub fn verify_representation(
    cfg: &FSpaceConfig,
    ops: &[WittOperator],
    degrees: &[LatticeVector],
    v_degree_bound: Option<u32>,
) -> Result<RepresentationCheck, WittError> {
    let table = ActionTable::for_words(cfg, v_degree_bound, 2)?;
    verify_representation_with(cfg, ops, degrees, v_degree_bound, |_, op, x| table.act(op, x))
}

/// As [`verify_representation`], with a caller-supplied action.
///
/// Pairs are checked with `first < second`; the identity is antisymmetric
/// and trivial on the diagonal, so the reported site is also the least
/// failing one among all ordered pairs.
pub fn verify_representation_with<F>(
    cfg: &FSpaceConfig,
    ops: &[WittOperator],
    degrees: &[LatticeVector],
    v_degree_bound: Option<u32>,
    action: F,
) -> Result<RepresentationCheck, WittError>
where
    F: Fn(&FSpaceConfig, &WittOperator, &FVector) -> FVector + Sync,
{
    let d = cfg.d();
    if let Some(op) = ops.iter().find(|op| op.dim() != d) {
        return Err(WittError::DimensionMismatch { expected: d, got: op.dim() });
    }
    if let Some(n) = degrees.iter().find(|n| n.dim() != d) {
        return Err(WittError::DimensionMismatch { expected: d, got: n.dim() });
    }
    let keys = basis_enumerate(&cfg.module, v_degree_bound)?;
    let mut degrees = degrees.to_vec();
    degrees.sort();
    degrees.dedup();
    let sites: Vec<(LatticeVector, BasisKey, FVector)> = degrees
        .iter()
        .flat_map(|n| keys.iter().map(move |k| (n.clone(), k.clone(), FVector::basis(n.clone(), k.clone()))))
        .collect();

    // single actions, reused by every pair: images[op][site]
    let images: Vec<Vec<FVector>> = ops
        .par_iter()
        .map(|op| sites.iter().map(|(_, _, x)| action(cfg, op, x)).collect())
        .collect();

    let pairs: Vec<(usize, usize)> = (0..ops.len())
        .flat_map(|a| (a + 1..ops.len()).map(move |b| (a, b)))
        .collect();
    let failure = pairs
        .par_iter()
        .map(|&(a, b)| {
            let br = bracket(&ops[a], &ops[b]);
            for (s, (n, key, x)) in sites.iter().enumerate() {
                let lhs = action(cfg, &ops[a], &images[b][s]).sub(&action(cfg, &ops[b], &images[a][s]));
                let mut rhs = FVector::new();
                for term in &br.terms {
                    rhs.add_assign(&action(cfg, term, x));
                }
                if lhs != rhs {
                    return Some(RepresentationCounterexample {
                        first: a,
                        second: b,
                        degree: n.clone(),
                        key: key.clone(),
                    });
                }
            }
            None
        })
        .find_first(Option::is_some)
        .flatten();

    Ok(match failure {
        Some(c) => RepresentationCheck::Counterexample(c),
        None => RepresentationCheck::Pass {
            sites: pairs.len() * sites.len(),
        },
    })
}
