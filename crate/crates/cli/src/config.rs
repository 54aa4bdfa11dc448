//! Run configuration: parsing with field paths, and the canonical echo used
//! for reports and cache keys.

use serde_json::{json, Map, Value};

use wittmod::exactlinalg::{format_rational, parse_rational, LatticeVector, QVector, Rational};
use wittmod::glmodules::{GlModuleSpec, Matrix, ModuleVector};
use wittmod::structure::{ClosureBudget, Window};
use wittmod::wittaction::{FSpaceConfig, FVector};

use crate::CliError;

/// Configuration of one run. `options` holds the command-specific settings
/// that are not part of the module description.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub space: FSpaceConfig,
    pub window: Option<Window>,
    pub budget: Option<ClosureBudget>,
    pub options: Options,
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    /// Box for the operator degrees `r` in `verify-rep`.
    pub radius: Option<i64>,
    /// Box for the lattice degrees in `verify-rep` and `replay-claims`.
    pub lattice: Option<i64>,
    pub generators: Option<Vec<FVector>>,
    pub other: Option<FSpaceConfig>,
}

fn err(path: &str, msg: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        message: msg.into(),
    }
}

fn join(path: &str, field: &str) -> String {
    if path.is_empty() {
        field.to_string()
    } else {
        format!("{path}.{field}")
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn required<'a>(m: &'a Map<String, Value>, path: &str, field: &str) -> Result<&'a Value, CliError> {
    m.get(field).ok_or_else(|| err(&join(path, field), "missing field"))
}

fn check_fields(m: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<(), CliError> {
    match m.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(err(&join(path, k), "unknown field")),
        None => Ok(()),
    }
}

fn integer(v: &Value, path: &str) -> Result<i64, CliError> {
    v.as_i64().ok_or_else(|| err(path, "expected an integer"))
}

fn natural(v: &Value, path: &str) -> Result<u64, CliError> {
    v.as_u64().ok_or_else(|| err(path, "expected a non-negative integer"))
}

/// Rationals are strings such as `"1/2"`; plain JSON integers are accepted.
fn rational(v: &Value, path: &str) -> Result<Rational, CliError> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| err(path, e.to_string())),
        Value::Number(n) if n.is_i64() => Ok(Rational::from(n.as_i64().unwrap_or_default())),
        _ => Err(err(path, "expected a rational string like \"1/2\"")),
    }
}

pub fn rationals(v: &Value, path: &str) -> Result<Vec<Rational>, CliError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| rational(x, &format!("{path}[{i}]")))
        .collect()
}

fn lattice(v: &Value, path: &str, d: usize) -> Result<LatticeVector, CliError> {
    let xs = array(v, path)?;
    if xs.len() != d {
        return Err(err(path, format!("expected {d} entries, got {}", xs.len())));
    }
    let entries = xs
        .iter()
        .enumerate()
        .map(|(i, x)| integer(x, &format!("{path}[{i}]")))
        .collect::<Result<_, _>>()?;
    Ok(LatticeVector(entries))
}

fn matrix(v: &Value, path: &str) -> Result<Matrix, CliError> {
    let rows = array(v, path)?
        .iter()
        .enumerate()
        .map(|(r, row)| rationals(row, &format!("{path}[{r}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix { rows })
}

pub fn parse_module(v: &Value, path: &str, d: usize) -> Result<GlModuleSpec, CliError> {
    let m = object(v, path)?;
    let variant = required(m, path, "variant")?
        .as_str()
        .ok_or_else(|| err(&join(path, "variant"), "expected a string"))?;
    let b = rational(required(m, path, "b")?, &join(path, "b"))?;
    let bad = |field: &str, e: wittmod::glmodules::GlError| err(&join(path, field), e.to_string());
    match variant {
        "exterior" => {
            check_fields(m, path, &["variant", "k", "b"])?;
            let k = natural(required(m, path, "k")?, &join(path, "k"))? as usize;
            GlModuleSpec::exterior(d, k, b).map_err(|e| bad("k", e))
        }
        "symmetric" => {
            check_fields(m, path, &["variant", "m", "b"])?;
            let deg = natural(required(m, path, "m")?, &join(path, "m"))?;
            let deg = u32::try_from(deg).map_err(|_| err(&join(path, "m"), "too large"))?;
            GlModuleSpec::symmetric(d, deg, b).map_err(|e| bad("m", e))
        }
        "nilsson" => {
            check_fields(m, path, &["variant", "beta", "b"])?;
            let beta = rational(required(m, path, "beta")?, &join(path, "beta"))?;
            GlModuleSpec::nilsson(d, beta, b).map_err(|e| bad("beta", e))
        }
        "explicit" => {
            check_fields(m, path, &["variant", "units", "b"])?;
            let upath = join(path, "units");
            let units = array(required(m, path, "units")?, &upath)?
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    array(row, &format!("{upath}[{i}]"))?
                        .iter()
                        .enumerate()
                        .map(|(j, mat)| matrix(mat, &format!("{upath}[{i}][{j}]")))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            GlModuleSpec::explicit_unchecked(d, b, units).map_err(|e| bad("units", e))
        }
        other => Err(err(
            &join(path, "variant"),
            format!("unknown variant {other:?}; expected exterior, symmetric, nilsson or explicit"),
        )),
    }
}

pub fn parse_space(m: &Map<String, Value>, path: &str, d: usize) -> Result<FSpaceConfig, CliError> {
    let alpha = QVector(rationals(required(m, path, "alpha")?, &join(path, "alpha"))?);
    if alpha.dim() != d {
        return Err(err(&join(path, "alpha"), format!("expected {d} entries, got {}", alpha.dim())));
    }
    let module = parse_module(required(m, path, "module")?, &join(path, "module"), d)?;
    FSpaceConfig::new(alpha, module).map_err(|e| err(path, e.to_string()))
}

/// Vector given as a list of terms `{"n": [...], "key": [...], "coeff": "p/q"}`.
pub fn parse_vector(v: &Value, path: &str, space: &FSpaceConfig) -> Result<FVector, CliError> {
    let mut out = FVector::new();
    for (t, term) in array(v, path)?.iter().enumerate() {
        let tpath = format!("{path}[{t}]");
        let m = object(term, &tpath)?;
        check_fields(m, &tpath, &["n", "key", "coeff"])?;
        let n = lattice(required(m, &tpath, "n")?, &join(&tpath, "n"), space.d())?;
        let kpath = join(&tpath, "key");
        let list = array(required(m, &tpath, "key")?, &kpath)?
            .iter()
            .enumerate()
            .map(|(i, x)| integer(x, &format!("{kpath}[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let key = space
            .module
            .key_from_list(&list)
            .ok_or_else(|| err(&kpath, format!("{list:?} is not a basis element of {}", space.module.describe())))?;
        let coeff = match m.get("coeff") {
            Some(c) => rational(c, &join(&tpath, "coeff"))?,
            None => Rational::from(1),
        };
        out.add_component(n, &ModuleVector::basis(key).scaled(&coeff));
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_json(v: &Value) -> Result<RunConfig, CliError> {
        let m = object(v, "")?;
        check_fields(m, "", &["d", "alpha", "module", "window", "budget", "options"])?;
        let d = natural(required(m, "", "d")?, "d")? as usize;
        if d < 2 {
            return Err(err("d", "d must be at least 2"));
        }
        let space = parse_space(m, "", d)?;

        let window = match m.get("window") {
            None | Some(Value::Null) => None,
            Some(w) => {
                let wm = object(w, "window")?;
                check_fields(wm, "window", &["N", "D"])?;
                let n = integer(required(wm, "window", "N")?, "window.N")?;
                if n < 0 {
                    return Err(err("window.N", "must be >= 0"));
                }
                let dd = match wm.get("D") {
                    None | Some(Value::Null) => None,
                    Some(x) => Some(u32::try_from(natural(x, "window.D")?).map_err(|_| err("window.D", "too large"))?),
                };
                Some(Window::new(n, dd))
            }
        };

        let budget = match m.get("budget") {
            None | Some(Value::Null) => None,
            Some(b) => {
                let bm = object(b, "budget")?;
                check_fields(bm, "budget", &["R", "T"])?;
                let r = integer(required(bm, "budget", "R")?, "budget.R")?;
                if r < 1 {
                    return Err(err("budget.R", "must be >= 1"));
                }
                let t = natural(required(bm, "budget", "T")?, "budget.T")? as usize;
                Some(ClosureBudget::new(r, t))
            }
        };

        let mut options = Options::default();
        if let Some(o) = m.get("options") {
            let om = object(o, "options")?;
            check_fields(om, "options", &["radius", "lattice", "generators", "other"])?;
            if let Some(x) = om.get("radius") {
                let r = integer(x, "options.radius")?;
                if r < 0 {
                    return Err(err("options.radius", "must be >= 0"));
                }
                options.radius = Some(r);
            }
            if let Some(x) = om.get("lattice") {
                let r = integer(x, "options.lattice")?;
                if r < 0 {
                    return Err(err("options.lattice", "must be >= 0"));
                }
                options.lattice = Some(r);
            }
            if let Some(x) = om.get("generators") {
                let gens = array(x, "options.generators")?
                    .iter()
                    .enumerate()
                    .map(|(i, g)| parse_vector(g, &format!("options.generators[{i}]"), &space))
                    .collect::<Result<Vec<_>, _>>()?;
                options.generators = Some(gens);
            }
            if let Some(x) = om.get("other") {
                let xm = object(x, "options.other")?;
                check_fields(xm, "options.other", &["alpha", "module"])?;
                options.other = Some(parse_space(xm, "options.other", d)?);
            }
        }
        Ok(RunConfig {
            space,
            window,
            budget,
            options,
        })
    }

    /// Canonical JSON form: normalized rationals, fixed field order, absent
    /// options omitted. Two configs describing the same run echo identically.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("d".into(), json!(self.space.d()));
        m.insert("alpha".into(), qvector_json(&self.space.alpha));
        m.insert("module".into(), module_json(&self.space.module));
        if let Some(w) = &self.window {
            m.insert("window".into(), json!({"N": w.lattice_bound, "D": w.v_degree_bound}));
        }
        if let Some(b) = &self.budget {
            m.insert("budget".into(), json!({"R": b.radius, "T": b.max_word_length}));
        }
        let mut o = Map::new();
        if let Some(r) = self.options.radius {
            o.insert("radius".into(), json!(r));
        }
        if let Some(r) = self.options.lattice {
            o.insert("lattice".into(), json!(r));
        }
        if let Some(gens) = &self.options.generators {
            o.insert("generators".into(), Value::Array(gens.iter().map(fvector_json).collect()));
        }
        if let Some(other) = &self.options.other {
            o.insert(
                "other".into(),
                json!({"alpha": qvector_json(&other.alpha), "module": module_json(&other.module)}),
            );
        }
        if !o.is_empty() {
            m.insert("options".into(), Value::Object(o));
        }
        Value::Object(m)
    }
}

pub fn rational_json(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

pub fn qvector_json(v: &QVector) -> Value {
    Value::Array(v.entries().iter().map(rational_json).collect())
}

pub fn lattice_json(n: &LatticeVector) -> Value {
    json!(n.entries())
}

pub fn module_json(spec: &GlModuleSpec) -> Value {
    match spec {
        GlModuleSpec::Exterior { k, b, .. } => json!({"variant": "exterior", "k": k, "b": rational_json(b)}),
        GlModuleSpec::Symmetric { m, b, .. } => json!({"variant": "symmetric", "m": m, "b": rational_json(b)}),
        GlModuleSpec::Nilsson { beta, b, .. } => {
            json!({"variant": "nilsson", "beta": rational_json(beta), "b": rational_json(b)})
        }
        GlModuleSpec::Explicit(m) => {
            let units: Vec<Value> = m
                .units
                .iter()
                .map(|row| {
                    Value::Array(
                        row.iter()
                            .map(|mat| {
                                Value::Array(
                                    mat.rows
                                        .iter()
                                        .map(|r| Value::Array(r.iter().map(rational_json).collect()))
                                        .collect(),
                                )
                            })
                            .collect(),
                    )
                })
                .collect();
            json!({"variant": "explicit", "units": units, "b": rational_json(&m.b)})
        }
    }
}

pub fn fvector_json(x: &FVector) -> Value {
    let mut terms = Vec::new();
    for (n, v) in x.components() {
        for (key, c) in v.iter() {
            terms.push(json!({"n": lattice_json(n), "key": key.to_list(), "coeff": rational_json(c)}));
        }
    }
    Value::Array(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(v: Value) -> Result<RunConfig, CliError> {
        RunConfig::from_json(&v)
    }

    fn path_of(r: Result<RunConfig, CliError>) -> String {
        match r {
            Err(CliError::Config { path, .. }) => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    fn base() -> Value {
        json!({"d": 2, "alpha": ["1/2", "1/3"], "module": {"variant": "exterior", "k": 1, "b": "1"}})
    }

    #[test]
    fn errors_name_the_field() {
        let mut v = base();
        v["alpha"] = json!(["1/2", "x"]);
        assert_eq!(path_of(parse(v)), "alpha[1]");

        let mut v = base();
        v["alpha"] = json!(["1/2"]);
        assert_eq!(path_of(parse(v)), "alpha");

        let mut v = base();
        v["module"]["variant"] = json!("spinor");
        assert_eq!(path_of(parse(v)), "module.variant");

        let mut v = base();
        v["module"]["k"] = json!(-1);
        assert_eq!(path_of(parse(v)), "module.k");

        let mut v = base();
        v["budget"] = json!({"R": 0, "T": 1});
        assert_eq!(path_of(parse(v)), "budget.R");

        let mut v = base();
        v["colour"] = json!(1);
        assert_eq!(path_of(parse(v)), "colour");

        let mut v = base();
        v["options"] = json!({"generators": [[{"n": [0, 0], "key": [3]}]]});
        assert_eq!(path_of(parse(v)), "options.generators[0][0].key");

        let mut v = base();
        v["module"]["b"] = json!("1/0");
        assert_eq!(path_of(parse(v)), "module.b");
    }

    #[test]
    fn echo_is_canonical() {
        let mut v = base();
        v["alpha"] = json!(["2/4", 0]);
        v["window"] = json!({"N": 1});
        let echo = parse(v).unwrap().to_json();
        assert_eq!(echo["alpha"], json!(["1/2", "0"]));
        assert_eq!(echo["window"], json!({"N": 1, "D": null}));
        assert_eq!(parse(echo.clone()).unwrap().to_json(), echo);
    }

    #[test]
    fn vectors_round_trip() {
        let mut v = base();
        v["options"] = json!({"generators": [[
            {"n": [0, 1], "key": [2], "coeff": "-3/2"},
            {"n": [0, 0], "key": [1]}
        ]]});
        let cfg = parse(v).unwrap();
        let g = &cfg.options.generators.as_ref().unwrap()[0];
        assert_eq!(g.support().count(), 2);
        let again = parse_vector(&fvector_json(g), "g", &cfg.space).unwrap();
        assert_eq!(&again, g);
    }

    #[test]
    fn explicit_modules_round_trip() {
        let spec = GlModuleSpec::symmetric(2, 2, Rational::from(2)).unwrap();
        let m = spec.to_explicit().unwrap();
        let explicit = GlModuleSpec::explicit(m.d, m.b, m.units).unwrap();
        let parsed = parse_module(&module_json(&explicit), "module", 2).unwrap();
        assert_eq!(parsed, explicit);
    }
}
