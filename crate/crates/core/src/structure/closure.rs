use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{ClosureBudget, GradedSubspace, StructureError, Window};
use crate::exactlinalg::{LatticeVector, SubspaceBasis};
use crate::glmodules::{basis_enumerate, BasisKey, GlModuleSpec, ModuleVector};
use crate::wittaction::{act, FSpaceConfig, FVector, WittOperator};

/// Breadth-first span growth: after `steps()` rounds the space is the span of
/// every operator word of length `<= steps()` applied to the generators.
///
/// Only rows that enlarged the span in the previous round are acted on, since
/// images of older rows are already present.
pub struct ClosureEngine<'a> {
    cfg: &'a FSpaceConfig,
    ops: Vec<WittOperator>,
    space: GradedSubspace,
    frontier: Vec<(LatticeVector, ModuleVector)>,
    steps: usize,
}

impl<'a> ClosureEngine<'a> {
    /// Generators are split into weight components first; each component lies
    /// in the submodule generated by the whole vector.
    pub fn new(cfg: &'a FSpaceConfig, generators: &[FVector], radius: i64) -> Result<Self, StructureError> {
        if radius < 1 {
            return Err(StructureError::InvalidBudget(format!("operator radius {radius} < 1")));
        }
        if generators.is_empty() || generators.iter().any(FVector::is_zero) {
            return Err(StructureError::ZeroGenerator);
        }
        let d = cfg.d();
        let mut engine = ClosureEngine {
            cfg,
            ops: WittOperator::generating_set(d, radius),
            space: GradedSubspace::default(),
            frontier: Vec::new(),
            steps: 0,
        };
        for g in generators {
            for (n, v) in g.components() {
                if n.dim() != d {
                    return Err(StructureError::DimensionMismatch { expected: d, got: n.dim() });
                }
                if let Some(k) = v.keys().find(|k| !cfg.module.owns(k)) {
                    return Err(StructureError::ForeignKey(k.clone()));
                }
                if let Some(row) = engine.space.insert(n, v) {
                    engine.frontier.push((n.clone(), row));
                }
            }
        }
        Ok(engine)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn space(&self) -> &GradedSubspace {
        &self.space
    }

    pub fn into_space(self) -> GradedSubspace {
        self.space
    }

    /// No new rows were produced in the last round: the span is closed under
    /// every operator in the set.
    pub fn is_stable(&self) -> bool {
        self.frontier.is_empty()
    }

    /// One more round of operator applications. Returns whether the span grew.
    pub fn step(&mut self) -> bool {
        self.steps += 1;
        if self.frontier.is_empty() {
            return false;
        }
        let cfg = self.cfg;
        let ops = &self.ops;
        let images: Vec<(LatticeVector, ModuleVector)> = self
            .frontier
            .par_iter()
            .flat_map_iter(|(n, v)| {
                let x = FVector::single(n.clone(), v.clone());
                ops.iter().filter_map(move |op| {
                    let y = act(cfg, op, &x);
                    let target = n + &op.r;
                    y.component(&target).map(|w| (target, w.clone()))
                })
            })
            .collect();

        let mut grouped: BTreeMap<LatticeVector, Vec<ModuleVector>> = BTreeMap::new();
        for (n, w) in images {
            grouped.entry(n).or_default().push(w);
        }
        let mut work: Vec<(LatticeVector, SubspaceBasis<BasisKey>, Vec<ModuleVector>)> = grouped
            .into_iter()
            .map(|(n, ws)| {
                let piece = self.space.pieces.remove(&n).unwrap_or_default();
                (n, piece, ws)
            })
            .collect();
        let fresh: Vec<Vec<ModuleVector>> = work
            .par_iter_mut()
            .map(|(_, piece, ws)| ws.iter().filter_map(|w| piece.insert(w)).collect())
            .collect();

        self.frontier.clear();
        for ((n, piece, _), rows) in work.into_iter().zip(fresh) {
            for row in rows {
                self.frontier.push((n.clone(), row));
            }
            self.space.pieces.insert(n, piece);
        }
        !self.frontier.is_empty()
    }

    pub fn run_to(&mut self, word_length: usize) {
        while self.steps < word_length {
            self.step();
        }
    }
}

/// Span of every word of length `<= max_word_length` in
/// `{D(e_i, r) : |r|_inf <= radius}` applied to the generators. Vectors are
/// kept exactly; nothing is truncated.
pub fn closure_reach(cfg: &FSpaceConfig, generators: &[FVector], budget: ClosureBudget) -> Result<GradedSubspace, StructureError> {
    let mut engine = ClosureEngine::new(cfg, generators, budget.radius)?;
    engine.run_to(budget.max_word_length);
    Ok(engine.into_space())
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightDims {
    pub weight: LatticeVector,
    pub achieved: usize,
    pub required: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Coverage {
    Covered,
    NotCovered,
}

/// Outcome of the budgeted cyclicity search. For `Covered`, `(radius,
/// word_length)` is the smallest sufficient budget in lexicographic order;
/// otherwise it is the largest budget tried.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CyclicityReport {
    pub coverage: Coverage,
    pub radius: i64,
    pub word_length: usize,
    pub dims: Vec<WeightDims>,
}

impl CyclicityReport {
    pub fn covered(&self) -> bool {
        self.coverage == Coverage::Covered
    }
}

/// Basis vectors the window requires at every weight.
pub fn window_keys(module: &GlModuleSpec, window: &Window) -> Result<Vec<BasisKey>, StructureError> {
    Ok(basis_enumerate(module, window.v_degree_bound)?)
}

/// Dimension of `piece` intersected with the span of `keys`.
fn achieved_dimension(piece: &SubspaceBasis<BasisKey>, keys: &[BasisKey]) -> usize {
    // dim(P cap Q) = dim P - rank of P projected away from Q
    let projected: Vec<ModuleVector> = piece
        .rows()
        .map(|r| r.iter().filter(|(k, _)| keys.binary_search(k).is_err()).map(|(k, c)| (k.clone(), c.clone())).collect())
        .collect();
    piece.rank() - crate::exactlinalg::rref_basis(&projected).rank()
}

pub fn window_dims(space: &GradedSubspace, keys: &[BasisKey], window: &Window, d: usize) -> Vec<WeightDims> {
    LatticeVector::cube(d, window.lattice_bound)
        .into_iter()
        .map(|n| {
            let achieved = space.pieces.get(&n).map_or(0, |p| achieved_dimension(p, keys));
            WeightDims {
                weight: n,
                achieved,
                required: keys.len(),
            }
        })
        .collect()
}

fn is_covered(space: &GradedSubspace, keys: &[BasisKey], window: &Window, d: usize) -> bool {
    LatticeVector::cube(d, window.lattice_bound).iter().all(|n| match space.pieces.get(n) {
        Some(piece) => keys.iter().all(|k| piece.contains(&ModuleVector::basis(k.clone()))),
        None => keys.is_empty(),
    })
}

/// Searches budgets `(R, T)` in lexicographic order up to `budget` for one
/// whose closure of `generator` contains every required basis vector at every
/// weight of the window.
pub fn is_window_cyclic(
    cfg: &FSpaceConfig,
    generator: &FVector,
    window: &Window,
    budget: ClosureBudget,
) -> Result<CyclicityReport, StructureError> {
    window.validate()?;
    budget.validate()?;
    let d = cfg.d();
    let keys = window_keys(&cfg.module, window)?;
    let mut last = None;
    for radius in 1..=budget.radius {
        let mut engine = ClosureEngine::new(cfg, std::slice::from_ref(generator), radius)?;
        loop {
            if is_covered(engine.space(), &keys, window, d) {
                return Ok(CyclicityReport {
                    coverage: Coverage::Covered,
                    radius,
                    word_length: engine.steps(),
                    dims: window_dims(engine.space(), &keys, window, d),
                });
            }
            if engine.steps() >= budget.max_word_length {
                break;
            }
            if !engine.step() {
                // closed under the operator set; more rounds change nothing
                engine.run_to(budget.max_word_length);
                break;
            }
        }
        last = Some((radius, engine));
    }
    let (radius, engine) = last.expect("radius >= 1");
    Ok(CyclicityReport {
        coverage: Coverage::NotCovered,
        radius,
        word_length: engine.steps(),
        dims: window_dims(engine.space(), &keys, window, d),
    })
}
