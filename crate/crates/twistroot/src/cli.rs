//! Command-line front end. Every command reads JSON (from `--in` or stdin),
//! writes JSON with sorted keys, and exits with 0 (ok), 1 (a verification
//! failed; the output carries the witness) or 2 (malformed input).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::cylsets::{CylinderSet, CylinderSetJson};
use crate::functionals::{pipeline, solve_zeta, FuncError};
use crate::quadratic::{
    basis_elem, c_from_json, centrality_check, derivation_check, eigenspaces, form_invariance_check, gl_superalgebra,
    loop_algebra, q_algebra, super_jacobi_check, GradedSuperAlgebra, JacobiReport, Matrix, QuadError,
};
use crate::rootspace::{FamilyKind, RootSystem, Weight};
use crate::shadow::{
    build_t, random_assignment, saturate, verify_main_i, AssignmentJson, SaturationResult, ScenarioJson,
    ShadowAssignment, SuppState,
};
use crate::suite;

pub const DEFAULT_DEPTH: i64 = 12;

#[derive(Parser, Debug)]
#[command(name = "twistroot", version, about = "Root combinatorics and structure-constant checks for twisted affine Lie superalgebras")]
pub struct Cli {
    /// Family: A2m,2n-1^2 | A2m-1,2n-1^2 | A2m,2n^4 | Dm+1,n^2
    #[arg(long, global = true)]
    pub family: Option<String>,
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Largest |k| enumerated; echoed in every report that depends on it
    #[arg(long, global = true, default_value_t = DEFAULT_DEPTH)]
    pub depth: i64,
    /// Seed for randomized commands
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Read input JSON from this file instead of stdin
    #[arg(long = "in", global = true)]
    pub input: Option<PathBuf>,
    /// Write output JSON to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// All roots with |k| ≤ depth, with class and parity
    Roots,
    /// Classify a weight (or a list of weights)
    Classify,
    /// String data (r, k) of finite roots; all of them without input
    StringData,
    /// Symmetry, closure and parts of a cylinder set
    Subset,
    /// T(1), T(2), T of an assignment; a random assignment without input
    ShadowBuild,
    /// Symmetry, closure and imaginary-part checks on T, T(1), T(2)
    VerifyMainI,
    /// A functional cutting P out of S
    SolveZeta,
    /// The three-stage functional chain of an assignment
    Pipeline,
    /// Super-Jacobi and super-antisymmetry on a degree window
    Jacobi {
        #[arg(long, value_enum, default_value_t = Algebra::Q)]
        algebra: Algebra,
        #[arg(long, default_value_t = 20)]
        window: i64,
    },
    /// Build and check a twisted loop algebra over gl(m|n)
    Loop {
        /// Include the basis and structure constants in the output
        #[arg(long)]
        structure: bool,
    },
    /// Support saturation of a scenario
    Saturate,
    /// The full acceptance suite as a pass/fail matrix
    Sweep,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algebra {
    Q,
    Gl,
    Loop,
}

impl Command {
    /// Whether the command always needs input, may take it, or never does.
    pub fn input_mode(&self) -> InputMode {
        match self {
            Command::Classify | Command::Subset | Command::VerifyMainI | Command::SolveZeta | Command::Pipeline
            | Command::Saturate => InputMode::Required,
            Command::StringData | Command::ShadowBuild | Command::Loop { .. } => InputMode::Optional,
            Command::Jacobi { algebra, .. } if *algebra == Algebra::Loop => InputMode::Optional,
            _ => InputMode::None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputMode {
    Required,
    Optional,
    None,
}

/// Result of a command: exit code and JSON body.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub body: Value,
}

impl Outcome {
    fn ok(body: Value) -> Self {
        Outcome { code: 0, body }
    }
    fn verdict(pass: bool, body: Value) -> Self {
        Outcome { code: if pass { 0 } else { 1 }, body }
    }
    fn malformed(msg: impl Into<String>) -> Self {
        Outcome { code: 2, body: json!({ "error": "malformed input", "detail": msg.into() }) }
    }
}

type Res<T> = Result<T, Outcome>;

fn parse<T: DeserializeOwned>(text: &str) -> Res<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Outcome::malformed(format!("at {path}: {}", e.inner()))
    })
}

fn need_input(input: Option<&str>) -> Res<&str> {
    input.filter(|s| !s.trim().is_empty()).ok_or_else(|| Outcome::malformed("this command needs JSON input"))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

/// Root system from flags, falling back to fields in the input.
fn root_system(cli: &Cli, family: Option<&str>, m: Option<usize>, n: Option<usize>) -> Res<RootSystem> {
    let fam = cli.family.as_deref().or(family).ok_or_else(|| Outcome::malformed("missing --family"))?;
    let kind: FamilyKind = fam.parse().map_err(|e: crate::rootspace::RootError| Outcome::malformed(e.to_string()))?;
    let m = cli.m.or(m).ok_or_else(|| Outcome::malformed("missing --m"))?;
    let n = cli.n.or(n).ok_or_else(|| Outcome::malformed("missing --n"))?;
    RootSystem::new(kind, m, n).map_err(|e| Outcome::malformed(e.to_string()))
}

fn header(rs: &RootSystem) -> serde_json::Map<String, Value> {
    let mut h = serde_json::Map::new();
    h.insert("family".into(), json!(rs.kind().label()));
    h.insert("m".into(), json!(rs.m()));
    h.insert("n".into(), json!(rs.n()));
    h
}

fn with(mut h: serde_json::Map<String, Value>, extra: Value) -> Value {
    if let Value::Object(e) = extra {
        h.extend(e);
    }
    Value::Object(h)
}

fn load_assignment(cli: &Cli, text: &str) -> Res<ShadowAssignment> {
    let j: AssignmentJson = parse(text)?;
    let rs = root_system(cli, j.family.as_deref(), j.m, j.n)?;
    ShadowAssignment::from_json(&rs, &j).map_err(|e| Outcome::malformed(e.to_string()))
}

/// Weights given as one object, a list, or `{"weights": [...]}`.
fn load_weights(text: &str) -> Res<Vec<Weight>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Input {
        One(Weight),
        Many(Vec<Weight>),
        Wrapped { weights: Vec<Weight> },
    }
    Ok(match parse::<Input>(text)? {
        Input::One(w) => vec![w],
        Input::Many(v) | Input::Wrapped { weights: v } => v,
    })
}

#[derive(Deserialize)]
struct FamilyFields {
    family: Option<String>,
    m: Option<usize>,
    n: Option<usize>,
}

fn family_fields(text: Option<&str>) -> FamilyFields {
    text.and_then(|t| serde_json::from_str(t).ok()).unwrap_or(FamilyFields { family: None, m: None, n: None })
}

pub fn run(cli: &Cli, input: Option<&str>) -> Outcome {
    match dispatch(cli, input) {
        Ok(o) | Err(o) => o,
    }
}

fn dispatch(cli: &Cli, input: Option<&str>) -> Res<Outcome> {
    match &cli.command {
        Command::Roots => cmd_roots(cli),
        Command::Classify => cmd_classify(cli, need_input(input)?),
        Command::StringData => cmd_string_data(cli, input),
        Command::Subset => cmd_subset(cli, need_input(input)?),
        Command::ShadowBuild => cmd_shadow_build(cli, input),
        Command::VerifyMainI => {
            let sa = load_assignment(cli, need_input(input)?)?;
            match verify_main_i(&sa) {
                Ok(rep) => Ok(Outcome::verdict(rep.pass, with(header(sa.rs()), to_value(&rep)))),
                Err(e) => Ok(Outcome::verdict(false, with(header(sa.rs()), json!({ "pass": false, "error": e.to_string() })))),
            }
        }
        Command::SolveZeta => cmd_solve_zeta(cli, need_input(input)?),
        Command::Pipeline => {
            let sa = load_assignment(cli, need_input(input)?)?;
            match pipeline(&sa) {
                Ok(rep) => Ok(Outcome::ok(with(header(sa.rs()), to_value(&rep)))),
                Err(e @ FuncError::Stage { .. }) | Err(e @ FuncError::Precondition(_)) => {
                    Ok(Outcome::verdict(false, with(header(sa.rs()), json!({ "error": e.to_string() }))))
                }
                Err(e) => Err(Outcome::malformed(e.to_string())),
            }
        }
        Command::Jacobi { algebra, window } => cmd_jacobi(cli, *algebra, *window, input),
        Command::Loop { structure } => cmd_loop(cli, *structure, input),
        Command::Saturate => cmd_saturate(cli, need_input(input)?),
        Command::Sweep => {
            let results = suite::run_all(cli.seed);
            let pass = results.iter().all(|r| r.pass);
            Ok(Outcome::verdict(pass, json!({ "seed": cli.seed, "pass": pass, "criteria": results })))
        }
    }
}

fn cmd_roots(cli: &Cli) -> Res<Outcome> {
    let rs = root_system(cli, None, None, None)?;
    let roots: Vec<Value> = rs
        .enumerate(cli.depth)
        .iter()
        .map(|(d, k)| {
            json!({
                "weight": rs.weight(d, *k),
                "class": rs.classify_dot(d, *k),
                "parity": rs.parity_dot(d, *k),
            })
        })
        .collect();
    Ok(Outcome::ok(with(header(&rs), json!({ "depth": cli.depth, "count": roots.len(), "roots": roots }))))
}

fn cmd_classify(cli: &Cli, text: &str) -> Res<Outcome> {
    let ff = family_fields(Some(text));
    let rs = root_system(cli, ff.family.as_deref(), ff.m, ff.n)?;
    let ws = load_weights(text)?;
    let mut out = Vec::new();
    for w in ws {
        if w.dims() != (rs.m(), rs.n()) {
            return Err(Outcome::malformed(format!("{w} has the wrong dimensions")));
        }
        out.push(json!({
            "weight": w,
            "member": rs.contains(&w),
            "class": rs.classify(&w),
            "parity": rs.parity(&w).ok(),
        }));
    }
    Ok(Outcome::ok(with(header(&rs), json!({ "results": out }))))
}

fn cmd_string_data(cli: &Cli, input: Option<&str>) -> Res<Outcome> {
    let ff = family_fields(input);
    let rs = root_system(cli, ff.family.as_deref(), ff.m, ff.n)?;
    let ws: Vec<Weight> = match input.filter(|s| !s.trim().is_empty()) {
        Some(t) => load_weights(t)?,
        None => rs.finite_roots().iter().filter(|d| !d.is_zero()).map(|d| rs.weight(d, 0)).collect(),
    };
    let mut out = Vec::new();
    for w in ws {
        let (r, k) = rs.string_data(&w).map_err(|e| Outcome::malformed(e.to_string()))?;
        out.push(json!({ "root": w, "r": r, "k": k }));
    }
    Ok(Outcome::ok(with(header(&rs), json!({ "strings": out }))))
}

#[derive(Deserialize)]
struct SubsetInput {
    family: Option<String>,
    m: Option<usize>,
    n: Option<usize>,
    set: CylinderSetJson,
}

fn load_set(rs: &RootSystem, j: &CylinderSetJson) -> Res<CylinderSet> {
    CylinderSet::from_json(rs, j).map_err(|e| Outcome::malformed(e.to_string()))
}

fn cmd_subset(cli: &Cli, text: &str) -> Res<Outcome> {
    let inp: SubsetInput = parse(text)?;
    let rs = root_system(cli, inp.family.as_deref(), inp.m, inp.n)?;
    let s = load_set(&rs, &inp.set)?;
    let rep = s.closure_report();
    let witness = rep.witness.map(|((a, x), (b, y))| json!([rs.weight(&a, x), rs.weight(&b, y)]));
    let (re, ns, im, cross) = s.parts();
    let elements: Vec<Weight> = s.elements(cli.depth).iter().map(|(d, k)| rs.weight(d, *k)).collect();
    Ok(Outcome::ok(with(
        header(&rs),
        json!({
            "depth": cli.depth,
            "symmetric": s.is_symmetric(),
            "closed": rep.closed,
            "window_bound": rep.window_bound,
            "closure_witness": witness,
            "finite": s.is_finite(),
            "sdot": s.sdot().iter().map(|d| rs.weight(d, 0)).collect::<Vec<_>>(),
            "parts": { "re": re.to_json(), "ns": ns.to_json(), "im": im.to_json(), "cross": cross.to_json() },
            "elements": elements,
        }),
    )))
}

fn cmd_shadow_build(cli: &Cli, input: Option<&str>) -> Res<Outcome> {
    let (sa, zeta) = match input.filter(|s| !s.trim().is_empty()) {
        Some(t) => (load_assignment(cli, t)?, None),
        None => {
            let rs = root_system(cli, None, None, None)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let g = random_assignment(&rs, &mut rng).map_err(|e| Outcome::malformed(e.to_string()))?;
            (g.sa, Some(g.zeta))
        }
    };
    let ts = build_t(&sa);
    Ok(Outcome::ok(with(
        header(sa.rs()),
        json!({
            "seed": input.map_or(Some(cli.seed), |_| None),
            "assignment": sa.to_json(),
            "hybrid_functional": zeta,
            "t1": ts.t1.to_json(),
            "t2": ts.t2.to_json(),
            "t": ts.t.to_json(),
        }),
    )))
}

#[derive(Deserialize)]
struct SolveInput {
    family: Option<String>,
    m: Option<usize>,
    n: Option<usize>,
    s: CylinderSetJson,
    p: CylinderSetJson,
}

fn cmd_solve_zeta(cli: &Cli, text: &str) -> Res<Outcome> {
    let inp: SolveInput = parse(text)?;
    let rs = root_system(cli, inp.family.as_deref(), inp.m, inp.n)?;
    let s = load_set(&rs, &inp.s)?;
    let p = load_set(&rs, &inp.p)?;
    match solve_zeta(&s, &p) {
        Ok(Some(z)) => Ok(Outcome::ok(with(header(&rs), json!({ "feasible": true, "zeta": z })))),
        Ok(None) => Ok(Outcome::verdict(false, with(header(&rs), json!({ "feasible": false, "zeta": null })))),
        Err(e) => Ok(Outcome::verdict(false, with(header(&rs), json!({ "feasible": false, "error": e.to_string() })))),
    }
}

fn jacobi_json(rep: &JacobiReport) -> Value {
    json!({
        "checked_triples": rep.checked_triples,
        "skipped_triples": rep.skipped_triples,
        "violations": rep.violations.len(),
        "antisymmetry_violations": rep.antisymmetry_violations.len(),
        "witnesses": rep.violations.iter().chain(&rep.antisymmetry_violations).take(5).collect::<Vec<_>>(),
    })
}

/// Loop algebra input: `gl(m|n)`, the order `l`, the window and `σ` as a
/// dense matrix or as the diagonal `g` of `Ad(g)`. Defaults: `gl(2|1)`,
/// `σ = 1`, `l = 2`, window 4.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopInput {
    #[serde(default = "two")]
    m: usize,
    #[serde(default = "one")]
    n: usize,
    #[serde(default = "two")]
    l: usize,
    #[serde(default = "four")]
    window: i64,
    #[serde(default)]
    sigma: Option<Value>,
    #[serde(default)]
    diag: Option<Vec<Value>>,
}

fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn four() -> i64 {
    4
}

fn build_loop(cli: &Cli, input: Option<&str>) -> Res<(LoopInput, GradedSuperAlgebra, GradedSuperAlgebra, Matrix)> {
    let mut inp: LoopInput = match input.filter(|s| !s.trim().is_empty()) {
        Some(t) => parse(t)?,
        None => LoopInput { m: 2, n: 1, l: 2, window: 4, sigma: None, diag: None },
    };
    if let Some(m) = cli.m {
        inp.m = m;
    }
    if let Some(n) = cli.n {
        inp.n = n;
    }
    if inp.m + inp.n == 0 {
        return Err(Outcome::malformed("m+n must be positive"));
    }
    let base = gl_superalgebra(inp.m, inp.n);
    let sigma = match (&inp.sigma, &inp.diag) {
        (Some(s), _) => Matrix::from_json(s).map_err(|e| Outcome::malformed(e.to_string()))?,
        (None, Some(g)) => {
            let g = g.iter().map(c_from_json).collect::<Result<Vec<_>, _>>().map_err(|e| Outcome::malformed(e.to_string()))?;
            if g.len() != inp.m + inp.n || g.iter().any(num_traits::Zero::is_zero) {
                return Err(Outcome::malformed("diag needs m+n nonzero entries"));
            }
            Matrix::adjoint_diag(&g)
        }
        (None, None) => Matrix::identity(base.dim()),
    };
    let alg = match loop_algebra(&base, &sigma, inp.l, inp.window) {
        Ok(a) => a,
        Err(e @ (QuadError::NotAutomorphism(_) | QuadError::Order)) => {
            return Err(Outcome::verdict(false, json!({ "error": e.to_string() })));
        }
        Err(e) => return Err(Outcome::malformed(e.to_string())),
    };
    Ok((inp, base, alg, sigma))
}

fn cmd_jacobi(cli: &Cli, algebra: Algebra, window: i64, input: Option<&str>) -> Res<Outcome> {
    let (alg, name, window) = match algebra {
        Algebra::Q => (q_algebra(window).map_err(|e| Outcome::malformed(e.to_string()))?, "q", window),
        Algebra::Gl => {
            let (m, n) = (cli.m.unwrap_or(2), cli.n.unwrap_or(1));
            if m + n == 0 {
                return Err(Outcome::malformed("m+n must be positive"));
            }
            (gl_superalgebra(m, n), "gl", 0)
        }
        Algebra::Loop => {
            let (inp, _, alg, _) = build_loop(cli, input)?;
            (alg, "loop", inp.window)
        }
    };
    let rep = super_jacobi_check(&alg, window);
    let mut body = jacobi_json(&rep);
    body["algebra"] = json!(name);
    body["window"] = json!(window);
    body["dim"] = json!(alg.dim());
    Ok(Outcome::verdict(rep.ok(), body))
}

fn cmd_loop(cli: &Cli, structure: bool, input: Option<&str>) -> Res<Outcome> {
    let (inp, base, alg, sigma) = build_loop(cli, input)?;
    let w = inp.window;
    let rep = super_jacobi_check(&alg, w);
    let (form_checked, form_bad) = form_invariance_check(&alg, w);
    let c = alg.dim() - 2;
    let d = alg.dim() - 1;
    let cent = centrality_check(&alg, &[basis_elem(c), basis_elem(d)], w).expect("in basis");
    let deriv_bad = derivation_check(&alg, d);
    let dims: Vec<usize> = eigenspaces(&base, &sigma, inp.l).iter().map(Vec::len).collect();
    let pass = rep.ok() && form_bad.is_empty() && cent[0].central && deriv_bad.is_empty();
    let mut body = json!({
        "m": inp.m,
        "n": inp.n,
        "l": inp.l,
        "window": w,
        "dim": alg.dim(),
        "eigenspace_dims": dims,
        "jacobi": jacobi_json(&rep),
        "form_invariance": { "checked_triples": form_checked, "violations": form_bad.len(), "witnesses": form_bad.iter().take(5).collect::<Vec<_>>() },
        "c_central": cent[0],
        "d_central": cent[1],
        "d_derivation_failures": deriv_bad,
        "pass": pass,
    });
    if structure {
        body["structure"] = to_value(&alg.to_json());
    }
    Ok(Outcome::verdict(pass, body))
}

fn cmd_saturate(cli: &Cli, text: &str) -> Res<Outcome> {
    let sc: ScenarioJson = parse(text)?;
    let rs = root_system(cli, Some(&sc.family), Some(sc.m), Some(sc.n))?;
    let sa = ShadowAssignment::from_json(&rs, &sc.assignment).map_err(|e| Outcome::malformed(e.to_string()))?;
    if sc.budget == 0 {
        return Err(Outcome::malformed("budget must be positive"));
    }
    let state = SuppState { concrete: sc.seeds.into_iter().collect(), families: sc.families.into_iter().collect() };
    let res = saturate(&state, &sa, sc.budget).map_err(|e| Outcome::malformed(e.to_string()))?;
    let body = match res {
        SaturationResult::Consistent(s) => json!({ "result": "Consistent", "state": s }),
        SaturationResult::Contradiction(chain) => json!({ "result": "Contradiction", "chain": chain }),
        SaturationResult::BudgetExhausted(s) => json!({ "result": "BudgetExhausted", "state": s }),
    };
    Ok(Outcome::ok(with(header(&rs), json!({ "budget": sc.budget, "outcome": body }))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("twistroot").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn roots_echo_depth() {
        let o = run(&cli(&["roots", "--family", "Dm+1,n^2", "--m", "1", "--n", "1", "--depth", "2"]), None);
        assert_eq!(o.code, 0);
        assert_eq!(o.body["depth"], 2);
        // ℤδ, ±ε₁, ±δ₁ on 5 levels each; ±2δ₁, ±ε₁±δ₁ on k ∈ {-2,0,2}
        assert_eq!(o.body["count"], 5 * 5 + 6 * 3);
        let o = run(&cli(&["roots", "--family", "Dm+1,n^2", "--m", "1", "--n", "1"]), None);
        assert_eq!(o.body["depth"], DEFAULT_DEPTH);
    }

    #[test]
    fn missing_family_is_malformed() {
        assert_eq!(run(&cli(&["roots"]), None).code, 2);
        assert_eq!(run(&cli(&["verify-main-i"]), None).code, 2);
        assert_eq!(run(&cli(&["verify-main-i"]), Some("{\"cosets\": 3}")).code, 2);
    }

    #[test]
    fn worked_file_verifies() {
        let o = run(&cli(&["verify-main-i"]), Some(suite::WORKED_SHADOW));
        assert_eq!(o.code, 0, "{}", o.body);
        assert_eq!(o.body["pass"], true);
    }

    #[test]
    fn gl_jacobi() {
        let o = run(&cli(&["jacobi", "--algebra", "gl", "--m", "1", "--n", "1"]), None);
        assert_eq!(o.code, 0);
        assert_eq!(o.body["violations"], 0);
    }
}
