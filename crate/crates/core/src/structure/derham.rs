use num_integer::binomial;
use num_traits::Zero;

use super::{StructureError, Window};
use crate::exactlinalg::{rref_basis, LatticeVector, QVector, Rational, SubspaceBasis};
use crate::glmodules::{basis_enumerate, BasisKey, GlModuleSpec, ModuleVector};
use crate::wittaction::{act, weight_of, FSpaceConfig, FVector, WittOperator};

fn rat(x: i64) -> Rational {
    Rational::from_integer(x.into())
}

/// `w ^ v` for `w in Q^d` and `v in Lambda^{k-1}`.
pub fn wedge_vector(w: &QVector, v: &ModuleVector) -> ModuleVector {
    let mut out = ModuleVector::new();
    for (key, c) in v.iter() {
        let BasisKey::Exterior(ix) = key else {
            panic!("wedge of a non-exterior key {key:?}");
        };
        for (i, wi) in w.entries().iter().enumerate() {
            if wi.is_zero() || ix.contains(&i) {
                continue;
            }
            // moving e_i past the smaller indices of ix
            let before = ix.iter().filter(|&&x| x < i).count();
            let mut new = ix.clone();
            new.insert(before, i);
            let sign = if before % 2 == 0 { rat(1) } else { rat(-1) };
            out.add_term(BasisKey::Exterior(new), &(c * wi * sign));
        }
    }
    out
}

fn exterior_degree(cfg: &FSpaceConfig) -> Result<(usize, usize, &Rational), StructureError> {
    match &cfg.module {
        GlModuleSpec::Exterior { d, k, b } => Ok((*d, *k, b)),
        other => Err(StructureError::ModuleMismatch(format!(
            "de Rham map needs an exterior power, got {}",
            other.describe()
        ))),
    }
}

/// `F^alpha_k(Lambda^k)`, the target of the de Rham map out of `source`.
pub fn derham_target(source: &FSpaceConfig) -> Result<FSpaceConfig, StructureError> {
    let (d, k, _) = exterior_degree(source)?;
    if k >= d {
        return Err(StructureError::ModuleMismatch(format!("no exterior power above {k} for d = {d}")));
    }
    let module = GlModuleSpec::exterior(d, k + 1, rat(k as i64 + 1))?;
    Ok(FSpaceConfig::new(source.alpha.clone(), module)?)
}

/// `v(n) -> ((alpha + n) ^ v)(n)` from `F^alpha_{k-1}(Lambda^{k-1})` to
/// `F^alpha_k(Lambda^k)`. The source must carry its natural scalar `b = k - 1`.
pub fn derham_map(source: &FSpaceConfig, x: &FVector) -> Result<FVector, StructureError> {
    let (d, k, b) = exterior_degree(source)?;
    if *b != rat(k as i64) {
        return Err(StructureError::ModuleMismatch(format!(
            "source Lambda^{k} must have b = {k}"
        )));
    }
    if k >= d {
        return Err(StructureError::ModuleMismatch(format!("no exterior power above {k} for d = {d}")));
    }
    Ok(wedge_with_weight(source, x))
}

fn wedge_with_weight(cfg: &FSpaceConfig, x: &FVector) -> FVector {
    let mut out = FVector::new();
    for (n, v) in x.components() {
        out.add_component(n.clone(), &wedge_vector(&weight_of(cfg, n), v));
    }
    out
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntertwinerSite {
    pub operator: WittOperator,
    pub degree: LatticeVector,
    pub key: BasisKey,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum IntertwinerCheck {
    Pass { sites: usize },
    Counterexample(IntertwinerSite),
}

impl IntertwinerCheck {
    pub fn passed(&self) -> bool {
        matches!(self, IntertwinerCheck::Pass { .. })
    }
}

/// Checks `map(A x) = A map(x)` for `A = D(e_i, r)`, `|r|_inf <= radius`, and
/// every basis vector `v(n)` of `source` with `n` in the window. The target
/// configuration only supplies the action on the image side.
pub fn verify_intertwiner(
    source: &FSpaceConfig,
    target: &FSpaceConfig,
    window: &Window,
    radius: i64,
) -> Result<IntertwinerCheck, StructureError> {
    exterior_degree(source)?;
    exterior_degree(target)?;
    let d = source.d();
    let keys = basis_enumerate(&source.module, None)?;
    let ops = WittOperator::generating_set(d, radius);
    let mut sites = 0;
    for n in LatticeVector::cube(d, window.lattice_bound) {
        for key in &keys {
            let x = FVector::basis(n.clone(), key.clone());
            let image = wedge_with_weight(source, &x);
            for op in &ops {
                let lhs = wedge_with_weight(source, &act(source, op, &x));
                let rhs = act(target, op, &image);
                if lhs != rhs {
                    return Ok(IntertwinerCheck::Counterexample(IntertwinerSite {
                        operator: op.clone(),
                        degree: n,
                        key: key.clone(),
                    }));
                }
                sites += 1;
            }
        }
    }
    Ok(IntertwinerCheck::Pass { sites })
}

/// De Rham intertwiner `F^alpha_{k-1}(Lambda^{k-1}) -> F^alpha_k(Lambda^k)`
/// with the natural scalars `b = k - 1` and `b = k`.
pub fn verify_derham_intertwines(
    d: usize,
    k: usize,
    alpha: &QVector,
    window: &Window,
    radius: i64,
) -> Result<IntertwinerCheck, StructureError> {
    if k == 0 || k > d {
        return Err(StructureError::ModuleMismatch(format!("need 1 <= k <= d, got k = {k}, d = {d}")));
    }
    let source = FSpaceConfig::new(alpha.clone(), GlModuleSpec::exterior(d, k - 1, rat(k as i64 - 1))?)?;
    let target = derham_target(&source)?;
    verify_intertwiner(&source, &target, window, radius)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightRank {
    pub weight: LatticeVector,
    pub rank: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReducibilityCertificate {
    pub invariance_sites: usize,
    pub full_dimension: usize,
    pub ranks: Vec<WeightRank>,
    pub proper_everywhere: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CertificateFailure {
    /// `D(e_i, r)` maps an image vector at `degree` outside the image at
    /// `degree + r`.
    NotInvariant { operator: WittOperator, degree: LatticeVector, vector: ModuleVector },
    /// The image is everything at every tested weight.
    NotProper,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CertificateOutcome {
    Certificate(ReducibilityCertificate),
    NoCertificate(CertificateFailure),
}

impl CertificateOutcome {
    pub fn certified(&self) -> bool {
        matches!(self, CertificateOutcome::Certificate(_))
    }
}

/// Image of the de Rham map at degree `n`, as a subspace of `Lambda^k`.
pub fn derham_image_at(d: usize, k: usize, alpha: &QVector, n: &LatticeVector) -> Result<SubspaceBasis<BasisKey>, StructureError> {
    let source = GlModuleSpec::exterior(d, k - 1, rat(k as i64 - 1))?;
    let w = alpha.shifted(n);
    let images: Vec<ModuleVector> = basis_enumerate(&source, None)?
        .into_iter()
        .map(|key| wedge_vector(&w, &ModuleVector::basis(key)))
        .collect();
    Ok(rref_basis(&images))
}

/// Finite certificate that `F^alpha_b(Lambda^k)` has a proper nonzero
/// submodule: the graded de Rham image is invariant under `D(e_i, r)`,
/// `|r|_inf <= radius`, between window weights, and misses part of `Lambda^k`
/// at some weight.
pub fn certify_reducible_fundamental(
    d: usize,
    k: usize,
    b: &Rational,
    alpha: &QVector,
    window: &Window,
    radius: i64,
) -> Result<CertificateOutcome, StructureError> {
    if k == 0 || k > d {
        return Err(StructureError::ModuleMismatch(format!("need 1 <= k <= d, got k = {k}, d = {d}")));
    }
    window.validate()?;
    let cfg = FSpaceConfig::new(alpha.clone(), GlModuleSpec::exterior(d, k, b.clone())?)?;
    let weights = LatticeVector::cube(d, window.lattice_bound);
    let images: Vec<SubspaceBasis<BasisKey>> = weights
        .iter()
        .map(|n| derham_image_at(d, k, alpha, n))
        .collect::<Result<_, _>>()?;
    let ops = WittOperator::generating_set(d, radius);
    let mut sites = 0;
    for (n, image) in weights.iter().zip(&images) {
        for op in &ops {
            let target = n + &op.r;
            let Ok(t_idx) = weights.binary_search(&target) else { continue };
            for row in image.rows() {
                let y = act(&cfg, op, &FVector::single(n.clone(), row.clone()));
                let w = y.component(&target).cloned().unwrap_or_default();
                if !images[t_idx].contains(&w) {
                    return Ok(CertificateOutcome::NoCertificate(CertificateFailure::NotInvariant {
                        operator: op.clone(),
                        degree: n.clone(),
                        vector: row.clone(),
                    }));
                }
                sites += 1;
            }
        }
    }
    let full_dimension = binomial(d, k);
    let ranks: Vec<WeightRank> = weights
        .iter()
        .zip(&images)
        .map(|(n, img)| WeightRank {
            weight: n.clone(),
            rank: img.rank(),
        })
        .collect();
    if ranks.iter().all(|r| r.rank >= full_dimension) {
        return Ok(CertificateOutcome::NoCertificate(CertificateFailure::NotProper));
    }
    let proper_everywhere = ranks.iter().all(|r| r.rank < full_dimension);
    Ok(CertificateOutcome::Certificate(ReducibilityCertificate {
        invariance_sites: sites,
        full_dimension,
        ranks,
        proper_everywhere,
    }))
}
