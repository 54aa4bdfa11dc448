//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Every comparison is exact (rational equality, integer ranks); the only
//! numeric tolerance is the wall-clock limit of criterion 1.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use wittmod::exactlinalg::{format_rational, parse_rational, Rational};
use wittmod::glmodules::GlModuleSpec;
use wittmod_cli::config::module_json;
use wittmod_cli::{run, Command, Report, RunConfig};

const REPRESENTATION_TIME_LIMIT: Duration = Duration::from_secs(120);
const MUTATION_SEED: u64 = 20_240_601;
const ISO_SEED: u64 = 77;
const ISO_RANDOM_PAIRS: usize = 10;
const THREADS_DEFAULT: usize = 8;

type Run = (Command, Value);

struct Criterion {
    id: u32,
    name: &'static str,
    runs: Vec<Run>,
    failures: Vec<String>,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Criterion {
            id,
            name,
            runs: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn run(&mut self, command: Command, cfg: Value) -> Report {
        self.runs.push((command, cfg.clone()));
        execute(command, &cfg, THREADS_DEFAULT)
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, detail: &str) -> Self {
        if self.failures.is_empty() {
            println!("PASS criterion {}: {} ({detail})", self.id, self.name);
        } else {
            println!("FAIL criterion {}: {}: {}", self.id, self.name, self.failures.join("; "));
        }
        self
    }
}

fn execute(command: Command, cfg: &Value, threads: usize) -> Report {
    let parsed = RunConfig::from_json(cfg).unwrap_or_else(|e| panic!("bad config {cfg}: {e}"));
    run(command, &parsed, Some(threads)).unwrap_or_else(|e| panic!("{} failed on {cfg}: {e}", command.name()))
}

fn alpha(d: usize) -> Value {
    json!(["1/2", "1/3", "1/5"][..d])
}

fn exterior(k: usize, b: &str) -> Value {
    json!({"variant": "exterior", "k": k, "b": b})
}

fn symmetric(m: u32, b: &str) -> Value {
    json!({"variant": "symmetric", "m": m, "b": b})
}

fn nilsson(beta: &str, b: &str) -> Value {
    json!({"variant": "nilsson", "beta": beta, "b": b})
}

fn config(d: usize, module: Value) -> Value {
    json!({"d": d, "alpha": alpha(d), "module": module})
}

fn with(mut cfg: Value, field: &str, value: Value) -> Value {
    cfg[field] = value;
    cfg
}

fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

fn describe(cfg: &Value) -> String {
    format!("{}", cfg["module"])
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::new(1, "representation axioms on exhaustive boxes");
    let mut cases = Vec::new();
    for d in [2, 3] {
        cases.push(config(d, exterior(1, "0")));
        cases.push(config(d, exterior(1, "1")));
        cases.push(with(config(d, nilsson("1/2", "0")), "window", json!({"N": 1, "D": 3})));
    }
    cases.push(config(2, symmetric(2, "2")));
    let start = Instant::now();
    for cfg in cases {
        let cfg = with(cfg, "options", json!({"radius": 1, "lattice": 1}));
        let r = c.run(Command::VerifyRep, cfg.clone());
        c.check(r.outcome.outcome == "pass", || format!("{} -> {}", describe(&cfg), r.outcome.counterexample));
    }
    let elapsed = start.elapsed();
    c.check(elapsed <= REPRESENTATION_TIME_LIMIT, || {
        format!("took {elapsed:?}, limit {REPRESENTATION_TIME_LIMIT:?}")
    });
    c.finish(&format!("7 modules, exact equality, {:.1}s of {}s", elapsed.as_secs_f64(), REPRESENTATION_TIME_LIMIT.as_secs()))
}

fn sign_mutation(seed: u64) -> Value {
    let spec = GlModuleSpec::symmetric(2, 2, q("2")).unwrap();
    let mut m = spec.to_explicit().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites = Vec::new();
    for i in 0..m.d {
        for j in 0..m.d {
            if i == j {
                continue;
            }
            for (r, row) in m.units[i][j].rows.iter().enumerate() {
                for (col, x) in row.iter().enumerate() {
                    if *x != Rational::from(0) {
                        sites.push((i, j, r, col));
                    }
                }
            }
        }
    }
    let &(i, j, r, col) = sites.choose(&mut rng).expect("nonzero entries");
    let x = &mut m.units[i][j].rows[r][col];
    *x = -x.clone();
    let spec = GlModuleSpec::explicit_unchecked(m.d, m.b, m.units).unwrap();
    config(2, module_json(&spec))
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::new(2, "gl bracket law on the catalog, mutation detected");
    let mut count = 0;
    for d in [2usize, 3] {
        let mut modules = Vec::new();
        for k in 0..=d {
            modules.push(exterior(k, &k.to_string()));
            modules.push(exterior(k, "1/2"));
        }
        for m in 0..=3u32 {
            modules.push(symmetric(m, &m.to_string()));
            modules.push(symmetric(m, "-1"));
        }
        for beta in ["1/2", "0", "-2/3"] {
            modules.push(nilsson(beta, "0"));
            modules.push(nilsson(beta, "1"));
        }
        for module in modules {
            let cfg = with(config(d, module), "window", json!({"N": 0, "D": 5}));
            let r = c.run(Command::VerifyGl, cfg.clone());
            count += 1;
            c.check(r.outcome.outcome == "pass", || format!("{} -> {}", describe(&cfg), r.outcome.counterexample));
        }
    }
    let mutant = sign_mutation(MUTATION_SEED);
    let r = c.run(Command::VerifyGl, mutant);
    c.check(r.outcome.outcome == "fail" && r.outcome.counterexample["quadruple"].is_array(), || {
        format!("mutation with seed {MUTATION_SEED} not detected")
    });
    c.finish(&format!(
        "{count} catalog modules pass, mutant counterexample {}",
        r.outcome.counterexample
    ))
}

fn criterion_3() -> Criterion {
    let mut c = Criterion::new(3, "off-diagonal units: nilpotent or injective");
    let mut finite = 0;
    let mut nil = 0;
    for d in [2usize, 3] {
        let mut modules: Vec<Value> = (0..=d).map(|k| exterior(k, &k.to_string())).collect();
        modules.extend((1..=3u32).map(|m| symmetric(m, &m.to_string())));
        for module in modules {
            let cfg = config(d, module);
            let r = c.run(Command::Classify, cfg.clone());
            for row in r.outcome.result["operators"].as_array().unwrap() {
                finite += 1;
                c.check(row["class"] == "nilpotent", || format!("{} {row}", describe(&cfg)));
            }
        }
        for b in ["0", "1"] {
            for dd in 1..=4 {
                let cfg = with(config(d, nilsson("1/2", b)), "window", json!({"N": 0, "D": dd}));
                let r = c.run(Command::Classify, cfg.clone());
                for row in r.outcome.result["operators"].as_array().unwrap() {
                    nil += 1;
                    c.check(row["class"] == "injective_on_truncation", || {
                        format!("{} D={dd} {row}", describe(&cfg))
                    });
                }
            }
        }
    }
    c.finish(&format!("{finite} nilpotent, {nil} injective classifications"))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn criterion_4() -> Criterion {
    let mut c = Criterion::new(4, "reducibility certificate for fundamental exterior powers");
    let cases = [(2usize, 1usize, 2i64), (3, 1, 1), (3, 2, 1)];
    let mut sites = 0;
    for (d, k, n) in cases {
        let cfg = json!({
            "d": d,
            "alpha": alpha(d),
            "module": exterior(k, &k.to_string()),
            "window": {"N": n},
            "budget": {"R": 1, "T": 0},
        });
        let r = c.run(Command::CertifyReducible, cfg.clone());
        let res = &r.outcome.result;
        c.check(r.outcome.outcome == "certificate", || format!("d={d} k={k}: {}", r.outcome.counterexample));
        c.check(res["intertwiner"]["outcome"] == "pass", || format!("d={d} k={k}: intertwiner {}", res["intertwiner"]));
        let full = binomial(d, k);
        if let Some(ranks) = res["certificate"]["ranks"].as_array() {
            c.check(ranks.len() == (2 * n as usize + 1).pow(d as u32), || format!("d={d} k={k}: missing weights"));
            for w in ranks {
                let rank = w["rank"].as_u64().unwrap() as usize;
                c.check(rank < full, || format!("d={d} k={k}: rank {rank} at {}", w["weight"]));
            }
            sites += res["certificate"]["invariance_sites"].as_u64().unwrap();
        }
    }
    c.finish(&format!("3 certificates, {sites} invariance sites, every rank below C(d,k)"))
}

fn criterion_5() -> Criterion {
    let mut c = Criterion::new(5, "windowed cyclicity for irreducible finite modules");
    let mut budgets = Vec::new();
    for module in [exterior(1, "0"), symmetric(2, "2")] {
        let cfg = json!({
            "d": 2,
            "alpha": alpha(2),
            "module": module,
            "window": {"N": 1},
            "budget": {"R": 2, "T": 8},
        });
        let r = c.run(Command::Cyclic, cfg.clone());
        c.check(r.outcome.outcome == "covered", || format!("{}: {}", describe(&cfg), r.outcome.counterexample));
        let runs = r.outcome.result["runs"].as_array().unwrap();
        for run in runs {
            c.check(run["R"].as_i64().is_some_and(|x| x <= 2) && run["T"].as_u64().is_some_and(|t| t <= 8), || {
                format!("{}: budget {run}", describe(&cfg))
            });
        }
        budgets.push(format!(
            "{} from {} generators, smallest (R,T)=({},{})",
            cfg["module"]["variant"].as_str().unwrap(),
            runs.len(),
            r.outcome.result["sufficient_budget"]["R"],
            r.outcome.result["sufficient_budget"]["T"]
        ));
    }
    c.finish(&budgets.join("; "))
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::new(6, "windowed cyclicity for Nilsson modules");
    let mut budgets = Vec::new();
    for (d, dd) in [(2usize, 2u32), (3, 1)] {
        let one = vec![0; d - 1];
        let cfg = json!({
            "d": d,
            "alpha": alpha(d),
            "module": nilsson("1/2", "0"),
            "window": {"N": 1, "D": dd},
            "budget": {"R": 2, "T": 8},
            "options": {"generators": [[{"n": vec![0; d], "key": one, "coeff": "1"}]]},
        });
        let r = c.run(Command::Cyclic, cfg.clone());
        c.check(r.outcome.outcome == "covered", || format!("d={d}: {}", r.outcome.counterexample));
        let run = &r.outcome.result["runs"][0];
        budgets.push(format!("d={d} D={dd}: (R,T)=({},{})", run["R"], run["T"]));
    }
    c.finish(&budgets.join("; "))
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::new(7, "coefficient-extraction replays");
    let mut counts = Vec::new();
    for cfg in [
        config(2, exterior(1, "1")),
        with(config(2, nilsson("1/2", "0")), "window", json!({"N": 0, "D": 2})),
    ] {
        let cfg = with(cfg, "options", json!({"lattice": 1}));
        let r = c.run(Command::ReplayClaims, cfg.clone());
        c.check(r.outcome.outcome == "pass", || format!("{}: {}", describe(&cfg), r.outcome.counterexample));
        counts.push(format!(
            "{} claim-1 + {} claim-2 sites",
            r.outcome.result["claim1_checked"], r.outcome.result["claim2_checked"]
        ));
    }
    c.finish(&counts.join(", "))
}

/// sl_d class of a catalog module, decided from its parameters alone.
fn sl_class(d: usize, module: &Value) -> String {
    let get = |f: &str| module[f].clone();
    match module["variant"].as_str().unwrap() {
        "exterior" => match get("k").as_u64().unwrap() as usize {
            0 => "trivial".into(),
            k if k == d => "trivial".into(),
            1 => "natural".into(),
            k => format!("wedge{k}"),
        },
        "symmetric" => match get("m").as_u64().unwrap() {
            0 => "trivial".into(),
            1 => "natural".into(),
            m => format!("sym{m}"),
        },
        _ => {
            let beta = q(get("beta").as_str().unwrap());
            let canonical = if d == 2 { beta.clone().min(-beta - Rational::from(1)) } else { beta };
            format!("nilsson{}", format_rational(&canonical))
        }
    }
}

fn expected_iso(a: &Value, b: &Value) -> bool {
    let d = a["d"].as_u64().unwrap() as usize;
    let same_b = q(a["module"]["b"].as_str().unwrap()) == q(b["module"]["b"].as_str().unwrap());
    let integral = a["alpha"]
        .as_array()
        .unwrap()
        .iter()
        .zip(b["alpha"].as_array().unwrap())
        .all(|(x, y)| (q(x.as_str().unwrap()) - q(y.as_str().unwrap())).is_integer());
    same_b && integral && sl_class(d, &a["module"]) == sl_class(d, &b["module"])
}

fn random_module(rng: &mut ChaCha8Rng, d: usize, b: &str) -> Value {
    match rng.gen_range(0..3) {
        0 => exterior(rng.gen_range(0..=d), b),
        1 => symmetric(rng.gen_range(0..=2), b),
        _ => nilsson(["1/2", "-3/2", "1/3", "0", "-1"][rng.gen_range(0..5)], b),
    }
}

fn random_pair(rng: &mut ChaCha8Rng) -> (Value, Value) {
    let d = rng.gen_range(2..=3);
    let alphas = ["0", "1/2", "1/3", "3/2", "-2/3", "4/3"];
    let a_alpha: Vec<&str> = (0..d).map(|_| alphas[rng.gen_range(0..alphas.len())]).collect();
    let b = ["0", "1", "2"][rng.gen_range(0..3)];
    let a = json!({"d": d, "alpha": a_alpha, "module": random_module(rng, d, b)});
    // half the partners are integral translates with an equivalent module,
    // the rest are drawn independently
    let partner = if rng.gen_bool(0.5) {
        let shifted: Vec<String> = a_alpha
            .iter()
            .map(|x| format_rational(&(q(x) + Rational::from(rng.gen_range(-2i64..=2)))))
            .collect();
        json!({"d": d, "alpha": shifted, "module": a["module"].clone()})
    } else {
        let other_alpha: Vec<&str> = (0..d).map(|_| alphas[rng.gen_range(0..alphas.len())]).collect();
        let b2 = ["0", "1", "2"][rng.gen_range(0..3)];
        json!({"d": d, "alpha": other_alpha, "module": random_module(rng, d, b2)})
    };
    (a, partner)
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::new(8, "isomorphism criterion truth table");
    let lam = |al: [&str; 2], b: &str| json!({"d": 2, "alpha": al, "module": exterior(1, b)});
    let mut pairs = vec![
        (lam(["1/2", "0"], "1"), lam(["3/2", "-1"], "1"), Some(true)),
        (lam(["1/2", "0"], "1"), lam(["1/3", "0"], "1"), Some(false)),
        (lam(["1/2", "0"], "1"), lam(["1/2", "0"], "2"), Some(false)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(ISO_SEED);
    for _ in 0..ISO_RANDOM_PAIRS {
        let (a, b) = random_pair(&mut rng);
        pairs.push((a, b, None));
    }
    let mut yes = 0;
    for (a, b, stated) in pairs {
        let expected = stated.unwrap_or_else(|| expected_iso(&a, &b));
        let cfg = with(a.clone(), "options", json!({"other": {"alpha": b["alpha"], "module": b["module"]}}));
        let r = c.run(Command::IsoCheck, cfg);
        let got = r.outcome.outcome == "isomorphic";
        yes += got as usize;
        c.check(got == expected, || format!("{a} vs {b}: expected {expected}, got {}", r.outcome.outcome));
    }
    c.finish(&format!("{} pairs, {yes} isomorphic", 3 + ISO_RANDOM_PAIRS))
}

fn criterion_9(runs: &[Run]) -> Criterion {
    let mut c = Criterion::new(9, "reports identical at 1 and 8 threads");
    for (command, cfg) in runs {
        let one = execute(*command, cfg, 1).deterministic_json().to_string();
        let eight = execute(*command, cfg, 8).deterministic_json().to_string();
        c.check(one == eight, || format!("{} on {cfg}", command.name()));
    }
    c.finish(&format!("{} reports compared byte for byte, timing excluded", runs.len()))
}

fn main() {
    let criteria = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    let mut passed = criteria.iter().filter(|c| c.failures.is_empty()).count();
    let runs: Vec<Run> = criteria.iter().flat_map(|c| c.runs.iter().cloned()).collect();
    passed += criterion_9(&runs).failures.is_empty() as usize;
    println!("acceptance: {passed}/9 criteria passed");
    if passed != 9 {
        std::process::exit(1);
    }
}
