//! Structure of `F^alpha_b(V)`: reachable spans and windowed cyclicity, the
//! de Rham intertwiner and its reducibility certificate, and the isomorphism
//! test.

mod closure;
mod derham;
mod iso;

pub use closure::{
    closure_reach, is_window_cyclic, window_dims, window_keys, ClosureEngine, Coverage, CyclicityReport, WeightDims,
};
pub use derham::{
    certify_reducible_fundamental, derham_image_at, derham_map, derham_target, verify_derham_intertwines,
    verify_intertwiner, wedge_vector, CertificateFailure, CertificateOutcome, IntertwinerCheck, IntertwinerSite,
    ReducibilityCertificate, WeightRank,
};
pub use iso::{iso_criterion, iso_criterion_with_cap, sl_isomorphic, IsoOutcome, NotIsomorphicReason, DEFAULT_EXPLICIT_CAP};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exactlinalg::{LatticeVector, LinalgError, SubspaceBasis};
use crate::glmodules::{BasisKey, GlError, ModuleVector};
use crate::wittaction::{FVector, WittError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error("generators must be nonzero")]
    ZeroGenerator,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis key {0:?} does not belong to the module")]
    ForeignKey(BasisKey),
    #[error("{0}")]
    ModuleMismatch(String),
    #[error("explicit module of dimension {dim} exceeds the isomorphism search cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("no invertible intertwiner found among sampled candidates")]
    Undecided,
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error(transparent)]
    Gl(#[from] GlError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Box `|n_i| <= lattice_bound`; for Nilsson modules only basis vectors of
/// total `h`-degree `<= v_degree_bound` are required.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Window {
    pub lattice_bound: i64,
    pub v_degree_bound: Option<u32>,
}

impl Window {
    pub fn new(lattice_bound: i64, v_degree_bound: Option<u32>) -> Self {
        Window {
            lattice_bound,
            v_degree_bound,
        }
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        if self.lattice_bound < 0 {
            return Err(StructureError::InvalidBudget(format!(
                "lattice bound {} < 0",
                self.lattice_bound
            )));
        }
        Ok(())
    }
}

/// Operators `D(e_i, r)` with `|r|_inf <= radius`, words of length up to
/// `max_word_length`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ClosureBudget {
    pub radius: i64,
    pub max_word_length: usize,
}

impl ClosureBudget {
    pub fn new(radius: i64, max_word_length: usize) -> Self {
        ClosureBudget { radius, max_word_length }
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        if self.radius < 1 {
            return Err(StructureError::InvalidBudget(format!("operator radius {} < 1", self.radius)));
        }
        Ok(())
    }
}

/// A subspace of `F^alpha_b(V)` spanned by weight vectors, one canonical
/// basis per lattice degree.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GradedSubspace {
    pub pieces: BTreeMap<LatticeVector, SubspaceBasis<BasisKey>>,
}

impl GradedSubspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v(n)`; returns the new normalized row when the span grew.
    pub fn insert(&mut self, n: &LatticeVector, v: &ModuleVector) -> Option<ModuleVector> {
        if v.is_zero() {
            return None;
        }
        self.pieces.entry(n.clone()).or_default().insert(v)
    }

    pub fn dim_at(&self, n: &LatticeVector) -> usize {
        self.pieces.get(n).map_or(0, SubspaceBasis::rank)
    }

    /// Total dimension over all degrees.
    pub fn total_dim(&self) -> usize {
        self.pieces.values().map(SubspaceBasis::rank).sum()
    }

    /// Membership of a vector with arbitrary support.
    pub fn contains(&self, x: &FVector) -> bool {
        x.components().all(|(n, v)| self.pieces.get(n).is_some_and(|p| p.contains(v)))
    }

    /// Pointwise inclusion.
    pub fn is_subspace_of(&self, other: &GradedSubspace) -> bool {
        self.pieces.iter().all(|(n, p)| match other.pieces.get(n) {
            Some(q) => p.is_subspace_of(q),
            None => p.rank() == 0,
        })
    }
}
