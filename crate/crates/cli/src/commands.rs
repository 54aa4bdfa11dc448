use rayon::prelude::*;
use serde_json::{json, Value};

use wittmod::exactlinalg::LatticeVector;
use wittmod::glmodules::{
    basis_enumerate, classify_operator, verify_gl_bracket, BracketCheck, GlError, GlModuleSpec, ModuleVector,
    OperatorClass,
};
use wittmod::structure::{
    certify_reducible_fundamental, closure_reach, is_window_cyclic, iso_criterion, verify_derham_intertwines,
    CertificateFailure, CertificateOutcome, ClosureBudget, CyclicityReport, IntertwinerCheck, IsoOutcome,
    NotIsomorphicReason, StructureError, Window,
};
use wittmod::wittaction::{
    replay_claim1, replay_claim2, verify_representation, FSpaceConfig, FVector, RepresentationCheck, WittError,
    WittOperator,
};

use crate::config::{fvector_json, lattice_json, qvector_json, rational_json, RunConfig};
use crate::{CliError, Command};

/// Command-specific part of a report.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub outcome: &'static str,
    pub success: bool,
    pub result: Value,
    pub counterexample: Value,
}

impl Outcome {
    fn new(outcome: &'static str, success: bool, result: Value, counterexample: Value) -> Self {
        Outcome {
            outcome,
            success,
            result,
            counterexample,
        }
    }
}

fn cfg_err(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn witt_err(e: WittError) -> CliError {
    match e {
        WittError::Gl(g) => gl_err(g),
        other => CliError::Run(other.to_string()),
    }
}

fn gl_err(e: GlError) -> CliError {
    match e {
        GlError::MissingDegreeBound => cfg_err("window.D", "a degree bound is required for Nilsson modules"),
        other => CliError::Run(other.to_string()),
    }
}

fn structure_err(e: StructureError) -> CliError {
    match e {
        StructureError::Gl(g) => gl_err(g),
        StructureError::Witt(w) => witt_err(w),
        other => CliError::Run(other.to_string()),
    }
}

fn operator_json(op: &WittOperator) -> Value {
    json!({"u": qvector_json(&op.u), "r": lattice_json(&op.r)})
}

fn one_based(i: usize) -> usize {
    i + 1
}

fn require_window(cfg: &RunConfig) -> Result<Window, CliError> {
    cfg.window.ok_or_else(|| cfg_err("window", "missing field"))
}

fn require_budget(cfg: &RunConfig) -> Result<ClosureBudget, CliError> {
    cfg.budget.ok_or_else(|| cfg_err("budget", "missing field"))
}

/// Explicit modules are parsed without checks so that `verify-gl` can report
/// on broken ones; every other command needs a genuine module.
fn require_valid_module(spec: &GlModuleSpec, path: &str) -> Result<(), CliError> {
    if let GlModuleSpec::Explicit(m) = spec {
        GlModuleSpec::explicit(m.d, m.b.clone(), m.units.clone()).map_err(|e| cfg_err(path, e.to_string()))?;
    }
    Ok(())
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    if command != Command::VerifyGl {
        require_valid_module(&cfg.space.module, "module")?;
    }
    match command {
        Command::VerifyRep => verify_rep(cfg),
        Command::VerifyGl => verify_gl(cfg),
        Command::Classify => classify(cfg),
        Command::Closure => closure(cfg),
        Command::Cyclic => cyclic(cfg),
        Command::CertifyReducible => certify(cfg),
        Command::IsoCheck => iso_check(cfg),
        Command::ReplayClaims => replay(cfg),
    }
}

fn verify_rep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d = cfg.space.d();
    let radius = cfg.options.radius.unwrap_or(1);
    let lattice = cfg.options.lattice.unwrap_or(1);
    let ops = WittOperator::generating_set(d, radius);
    let degrees = LatticeVector::cube(d, lattice);
    let bound = cfg.window.and_then(|w| w.v_degree_bound);
    let check = verify_representation(&cfg.space, &ops, &degrees, bound).map_err(witt_err)?;
    let mut result = json!({"operators": ops.len(), "degrees": degrees.len()});
    Ok(match check {
        RepresentationCheck::Pass { sites } => {
            result["checked"] = json!(sites);
            Outcome::new("pass", true, result, Value::Null)
        }
        RepresentationCheck::Counterexample(c) => Outcome::new(
            "fail",
            false,
            result,
            json!({
                "first": operator_json(&ops[c.first]),
                "second": operator_json(&ops[c.second]),
                "degree": lattice_json(&c.degree),
                "key": c.key.to_list(),
            }),
        ),
    })
}

fn verify_gl(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let bound = cfg.window.and_then(|w| w.v_degree_bound);
    Ok(match verify_gl_bracket(&cfg.space.module, bound).map_err(gl_err)? {
        BracketCheck::Pass { checked } => Outcome::new("pass", true, json!({"checked": checked}), Value::Null),
        BracketCheck::Counterexample(c) => {
            let (i, j, k, l) = c.quadruple;
            Outcome::new(
                "fail",
                false,
                json!({}),
                json!({
                    "quadruple": [one_based(i), one_based(j), one_based(k), one_based(l)],
                    "key": c.key.to_list(),
                }),
            )
        }
    })
}

fn classify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d = cfg.space.d();
    let bound = cfg.window.and_then(|w| w.v_degree_bound);
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let classes = pairs
        .par_iter()
        .map(|&(i, j)| classify_operator(&cfg.space.module, i, j, bound))
        .collect::<Result<Vec<_>, _>>()
        .map_err(gl_err)?;
    let mut table = Vec::new();
    let mut failure = Value::Null;
    for (&(i, j), class) in pairs.iter().zip(&classes) {
        let row = match class {
            OperatorClass::Nilpotent(t) => {
                json!({"i": one_based(i), "j": one_based(j), "class": "nilpotent", "index": t})
            }
            OperatorClass::InjectiveOnTruncation => {
                json!({"i": one_based(i), "j": one_based(j), "class": "injective_on_truncation"})
            }
            OperatorClass::Neither { rank, columns } => {
                let row = json!({"i": one_based(i), "j": one_based(j), "class": "neither", "rank": rank, "columns": columns});
                if failure.is_null() {
                    failure = row.clone();
                }
                row
            }
        };
        table.push(row);
    }
    let ok = failure.is_null();
    Ok(Outcome::new(if ok { "pass" } else { "fail" }, ok, json!({"operators": table}), failure))
}

fn generators(cfg: &RunConfig) -> Result<Vec<FVector>, CliError> {
    let gens = cfg
        .options
        .generators
        .clone()
        .ok_or_else(|| cfg_err("options.generators", "missing field"))?;
    if let Some(i) = gens.iter().position(FVector::is_zero) {
        return Err(cfg_err(&format!("options.generators[{i}]"), "generator is zero"));
    }
    Ok(gens)
}

fn closure(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let gens = generators(cfg)?;
    let budget = require_budget(cfg)?;
    let window = cfg.window.unwrap_or(Window::new(1, None));
    let space = closure_reach(&cfg.space, &gens, budget).map_err(structure_err)?;
    let weights: Vec<Value> = LatticeVector::cube(cfg.space.d(), window.lattice_bound)
        .iter()
        .map(|n| json!({"weight": lattice_json(n), "dim": space.dim_at(n)}))
        .collect();
    let result = json!({
        "total_dim": space.total_dim(),
        "reached_weights": space.pieces.len(),
        "weights": weights,
    });
    Ok(Outcome::new("computed", true, result, Value::Null))
}

fn cyclicity_json(generator: &FVector, r: &CyclicityReport) -> Value {
    let dims: Vec<Value> = r
        .dims
        .iter()
        .map(|w| json!({"weight": lattice_json(&w.weight), "achieved": w.achieved, "required": w.required}))
        .collect();
    json!({
        "generator": fvector_json(generator),
        "coverage": if r.covered() { "covered" } else { "not_covered" },
        "R": r.radius,
        "T": r.word_length,
        "dims": dims,
    })
}

fn cyclic(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let window = require_window(cfg)?;
    let budget = require_budget(cfg)?;
    let gens = match &cfg.options.generators {
        Some(_) => generators(cfg)?,
        None => basis_enumerate(&cfg.space.module, window.v_degree_bound)
            .map_err(gl_err)?
            .into_iter()
            .map(|k| FVector::basis(LatticeVector::zero(cfg.space.d()), k))
            .collect(),
    };
    let reports = gens
        .iter()
        .map(|g| is_window_cyclic(&cfg.space, g, &window, budget))
        .collect::<Result<Vec<_>, _>>()
        .map_err(structure_err)?;
    let runs: Vec<Value> = gens.iter().zip(&reports).map(|(g, r)| cyclicity_json(g, r)).collect();
    let covered = reports.iter().all(CyclicityReport::covered);
    let mut result = json!({"runs": runs});
    if covered {
        let (r, t) = reports.iter().map(|r| (r.radius, r.word_length)).max().unwrap_or((1, 0));
        result["sufficient_budget"] = json!({"R": r, "T": t});
        return Ok(Outcome::new("covered", true, result, Value::Null));
    }
    let (g, r) = gens.iter().zip(&reports).find(|(_, r)| !r.covered()).expect("some run not covered");
    let shortfall: Vec<Value> = r
        .dims
        .iter()
        .filter(|w| w.achieved < w.required)
        .map(|w| json!({"weight": lattice_json(&w.weight), "achieved": w.achieved, "required": w.required}))
        .collect();
    Ok(Outcome::new(
        "not_covered",
        false,
        result,
        json!({"generator": fvector_json(g), "R": r.radius, "T": r.word_length, "shortfall": shortfall}),
    ))
}

fn certify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let GlModuleSpec::Exterior { d, k, b } = &cfg.space.module else {
        return Err(cfg_err("module.variant", "certify-reducible needs an exterior module"));
    };
    if *k == 0 {
        return Err(cfg_err("module.k", "certify-reducible needs k >= 1"));
    }
    let window = require_window(cfg)?;
    let radius = cfg.budget.map_or(1, |b| b.radius);
    let alpha = &cfg.space.alpha;
    let cert = certify_reducible_fundamental(*d, *k, b, alpha, &window, radius).map_err(structure_err)?;
    let inter = verify_derham_intertwines(*d, *k, alpha, &window, radius).map_err(structure_err)?;
    let inter_json = match &inter {
        IntertwinerCheck::Pass { sites } => json!({"outcome": "pass", "sites": sites}),
        IntertwinerCheck::Counterexample(s) => json!({
            "outcome": "fail",
            "operator": operator_json(&s.operator),
            "degree": lattice_json(&s.degree),
            "key": s.key.to_list(),
        }),
    };
    let mut result = json!({"intertwiner": inter_json});
    let counterexample = match &cert {
        CertificateOutcome::Certificate(c) => {
            let ranks: Vec<Value> = c
                .ranks
                .iter()
                .map(|r| json!({"weight": lattice_json(&r.weight), "rank": r.rank}))
                .collect();
            result["certificate"] = json!({
                "invariance_sites": c.invariance_sites,
                "full_dimension": c.full_dimension,
                "proper_everywhere": c.proper_everywhere,
                "ranks": ranks,
            });
            Value::Null
        }
        CertificateOutcome::NoCertificate(CertificateFailure::NotInvariant { operator, degree, vector }) => json!({
            "failure": "not_invariant",
            "operator": operator_json(operator),
            "degree": lattice_json(degree),
            "vector": fvector_json(&FVector::single(degree.clone(), vector.clone())),
        }),
        CertificateOutcome::NoCertificate(CertificateFailure::NotProper) => json!({"failure": "not_proper"}),
    };
    let ok = cert.certified() && inter.passed();
    Ok(Outcome::new(
        if ok { "certificate" } else { "no_certificate" },
        ok,
        result,
        counterexample,
    ))
}

fn reason_json(r: &NotIsomorphicReason) -> Value {
    match r {
        NotIsomorphicReason::BMismatch { b1, b2 } => {
            json!({"kind": "b_mismatch", "b1": rational_json(b1), "b2": rational_json(b2)})
        }
        NotIsomorphicReason::WeightCoset { difference } => {
            json!({"kind": "weight_coset", "difference": qvector_json(difference)})
        }
        NotIsomorphicReason::ModuleMismatch(s) => json!({"kind": "module_mismatch", "detail": s}),
    }
}

fn iso_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let other: &FSpaceConfig = cfg
        .options
        .other
        .as_ref()
        .ok_or_else(|| cfg_err("options.other", "missing field"))?;
    require_valid_module(&other.module, "options.other.module")?;
    Ok(match iso_criterion(&cfg.space, other).map_err(structure_err)? {
        IsoOutcome::Isomorphic => Outcome::new("isomorphic", true, json!({}), Value::Null),
        IsoOutcome::NotIsomorphic(r) => {
            Outcome::new("not_isomorphic", false, json!({}), json!({"reason": reason_json(&r)}))
        }
    })
}

#[derive(Clone)]
struct ReplaySite {
    claim: u8,
    first: usize,
    second: usize,
    m: LatticeVector,
    key: wittmod::glmodules::BasisKey,
}

fn replay(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d = cfg.space.d();
    let lattice = cfg.options.lattice.unwrap_or(1);
    let keys = basis_enumerate(&cfg.space.module, cfg.window.and_then(|w| w.v_degree_bound)).map_err(gl_err)?;
    let mut sites = Vec::new();
    for m in LatticeVector::cube(d, lattice) {
        for key in &keys {
            for s in 0..d {
                for t in 0..d {
                    if s != t {
                        sites.push(ReplaySite { claim: 1, first: s, second: t, m: m.clone(), key: key.clone() });
                    }
                }
            }
            for i in 0..d {
                for j in 0..d {
                    sites.push(ReplaySite { claim: 2, first: i, second: j, m: m.clone(), key: key.clone() });
                }
            }
        }
    }
    let results = sites
        .par_iter()
        .map(|site| {
            let v = ModuleVector::basis(site.key.clone());
            if site.claim == 1 {
                replay_claim1(&cfg.space, site.first, site.second, &site.m, &v)
            } else {
                replay_claim2(&cfg.space, site.first, site.second, &site.m, &v)
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(witt_err)?;
    let count = |c: u8| sites.iter().filter(|s| s.claim == c).count();
    let result = json!({"claim1_checked": count(1), "claim2_checked": count(2)});
    Ok(match sites.iter().zip(&results).find(|(_, r)| !r.passed()) {
        None => Outcome::new("pass", true, result, Value::Null),
        Some((s, r)) => Outcome::new(
            "fail",
            false,
            result,
            json!({
                "claim": s.claim,
                "indices": [one_based(s.first), one_based(s.second)],
                "m": lattice_json(&s.m),
                "key": s.key.to_list(),
                "extracted": fvector_json(&r.extracted),
                "expected": fvector_json(&r.expected),
            }),
        ),
    })
}
