//! Task vocabulary and execution. Task names are the library operation names;
//! a few short aliases are accepted and reported under the canonical name.

use std::cell::OnceCell;
use std::collections::BTreeMap;

use gcgw::bundles::{
    atiyah_cocycles, bott_dims, cech_oracle_p1, chern_connection, chern_weil, check_connection_law, check_gh_cocycle,
    curvature, default_truncation, dual, gh_connection_search, residue_degree, tensor, transgression, triviality,
    validate_cocycle, AtiyahData, ChernConvention, ConnectionData, MForm, OverlapCheck, SearchOutcome,
    TransitionCocycle, Triviality,
};
use gcgw::complexes::{
    adjoints_and_laplacians, build_operators, cohomology_dims, duality_report, hodge_star, hodge_summary,
    lefschetz_check, star_star_check, AdjointReport, CohomologyDims, Flavor, KahlerReport, Operators,
    TransverseSplitting,
};
use gcgw::gcs::{check_calabi_yau, check_gc_map, leaf_distribution, GcMapCandidate, PureSpinorLine};
use gcgw::lie::LieStructure;
use gcgw::linalg::{same_span, CMatrix};
use gcgw::{BasedSpace, GaussianRational, Multivector};
use serde_json::{json, Value};

use crate::problem::{self, schema_err, BundleInput, GcsInput, Problem, SchemaError, TransverseInput};
use crate::report::{ExactValue, TaskResult, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Need {
    Nothing,
    Lie,
    Gcs,
    LieGcs,
    Splitting,
    Bundle,
}

struct Spec {
    name: &'static str,
    aliases: &'static [&'static str],
    /// Names given to positional arguments, in order.
    positional: &'static [&'static str],
    params: &'static [&'static str],
    need: Need,
}

const SPECS: &[Spec] = &[
    Spec { name: "validate", aliases: &[], positional: &[], params: &[], need: Need::Lie },
    Spec { name: "check_axioms", aliases: &[], positional: &[], params: &[], need: Need::Gcs },
    Spec { name: "eigenbundle_and_type", aliases: &["type"], positional: &["expect"], params: &["expect"], need: Need::Gcs },
    Spec { name: "b_transform", aliases: &[], positional: &["B"], params: &["B"], need: Need::Gcs },
    Spec { name: "check_gc_map", aliases: &[], positional: &[], params: &["target", "psi"], need: Need::Gcs },
    Spec { name: "spinor_to_structure", aliases: &[], positional: &[], params: &[], need: Need::Gcs },
    Spec { name: "structure_to_spinor", aliases: &[], positional: &[], params: &[], need: Need::Gcs },
    Spec { name: "check_calabi_yau", aliases: &["calabi_yau", "cy"], positional: &["strong"], params: &["strong"], need: Need::LieGcs },
    Spec { name: "leaf_distribution", aliases: &[], positional: &[], params: &[], need: Need::LieGcs },
    Spec { name: "transverse_split", aliases: &[], positional: &[], params: &[], need: Need::Splitting },
    Spec { name: "build_operators", aliases: &[], positional: &[], params: &[], need: Need::Splitting },
    Spec {
        name: "cohomology_dims",
        aliases: &["cohomology"],
        positional: &["flavor"],
        params: &["flavor", "expect"],
        need: Need::Splitting,
    },
    Spec { name: "hodge_star", aliases: &[], positional: &["form"], params: &["form"], need: Need::Splitting },
    Spec { name: "adjoints_and_laplacians", aliases: &["adjoints"], positional: &[], params: &[], need: Need::Splitting },
    Spec { name: "lefschetz_check", aliases: &["kahler"], positional: &[], params: &[], need: Need::Splitting },
    Spec { name: "duality_report", aliases: &["duality"], positional: &[], params: &[], need: Need::Splitting },
    Spec { name: "hodge_summary", aliases: &["hodge"], positional: &[], params: &[], need: Need::Splitting },
    Spec { name: "validate_cocycle", aliases: &[], positional: &[], params: &[], need: Need::Bundle },
    Spec { name: "check_gh_cocycle", aliases: &[], positional: &[], params: &[], need: Need::Bundle },
    Spec { name: "atiyah_cocycles", aliases: &["atiyah"], positional: &[], params: &[], need: Need::Bundle },
    Spec {
        name: "gh_connection_search",
        aliases: &["connection_search"],
        positional: &["bound"],
        params: &["bound", "expect"],
        need: Need::Bundle,
    },
    Spec { name: "curvature", aliases: &[], positional: &["connection"], params: &["connection"], need: Need::Bundle },
    Spec { name: "chern_connection", aliases: &[], positional: &["metric"], params: &["metric"], need: Need::Bundle },
    Spec {
        name: "chern_weil",
        aliases: &["chern"],
        positional: &["degree"],
        params: &["degree", "convention", "connection"],
        need: Need::Bundle,
    },
    Spec {
        name: "transgression",
        aliases: &[],
        positional: &["degree"],
        params: &["degree", "convention", "connections"],
        need: Need::Bundle,
    },
    Spec { name: "picard_ops", aliases: &["picard"], positional: &[], params: &["expect"], need: Need::Bundle },
    Spec { name: "bott_dims", aliases: &["bott"], positional: &["n", "m", "p", "q"], params: &["n", "m", "p", "q", "expect"], need: Need::Nothing },
    Spec {
        name: "cech_oracle_p1",
        aliases: &["oracle_p1"],
        positional: &["m", "q"],
        params: &["m", "p", "q", "truncation", "expect"],
        need: Need::Nothing,
    },
];

/// Parameters holding forms in the shared grammar.
pub const FORM_PARAMS: &[&str] = &["B", "form"];

/// Task names in vocabulary order.
pub fn vocabulary() -> Vec<&'static str> {
    SPECS.iter().map(|s| s.name).collect()
}

fn spec(name: &str) -> Option<&'static Spec> {
    SPECS.iter().find(|s| s.name == name || s.aliases.contains(&name))
}

/// Where a connection comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConnSource {
    /// Chern connection of the given hermitian metric.
    Chern(usize),
    /// One of the bundle's explicit connections.
    Explicit(usize),
    /// `Θ = 0`.
    Zero,
    /// The solution of the coboundary law within a degree bound.
    Search(i64),
}

impl ConnSource {
    fn parse(v: &Value, loc: &str) -> Result<Self, SchemaError> {
        fn bad<T>(loc: &str) -> Result<T, SchemaError> {
            schema_err(loc, "expected an explicit connection index, \"chern[:N]\", \"zero\", or \"search[:BOUND]\"")
        }
        if let Some(n) = v.as_u64() {
            return Ok(ConnSource::Explicit(n as usize));
        }
        let Some(s) = v.as_str() else { return bad(loc) };
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |d: i64| match arg {
            None => Ok(d),
            Some(a) => a.parse::<i64>().or_else(|_| bad(loc)),
        };
        match head {
            "chern" => Ok(ConnSource::Chern(num(0)? as usize)),
            "zero" if arg.is_none() => Ok(ConnSource::Zero),
            "search" => Ok(ConnSource::Search(num(4)?)),
            _ => s.parse::<usize>().map(ConnSource::Explicit).or_else(|_| bad(loc)),
        }
    }

    fn label(&self) -> String {
        match self {
            ConnSource::Chern(i) => format!("Chern connection of metric {}", i),
            ConnSource::Explicit(i) => format!("connection {}", i),
            ConnSource::Zero => "zero connection".into(),
            ConnSource::Search(b) => format!("searched connection (bound {})", b),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Validate,
    CheckAxioms,
    EigenbundleAndType { expect: Option<usize> },
    BTransform { b: String },
    CheckGcMap { target: Value, psi: Value },
    SpinorToStructure,
    StructureToSpinor,
    CheckCalabiYau { strong: bool },
    LeafDistribution,
    TransverseSplit,
    BuildOperators,
    CohomologyDims { flavor: Flavor, expect: Option<Value> },
    HodgeStar { form: Option<String> },
    AdjointsAndLaplacians,
    LefschetzCheck,
    DualityReport,
    HodgeSummary,
    ValidateCocycle,
    CheckGhCocycle,
    AtiyahCocycles,
    GhConnectionSearch { bound: i64, expect: Option<bool> },
    Curvature { connection: Option<ConnSource> },
    ChernConnection { metric: usize },
    ChernWeil { degree: usize, convention: ChernConvention, connection: Option<ConnSource> },
    Transgression { degree: usize, convention: ChernConvention, connections: Option<[ConnSource; 2]> },
    PicardOps { expect: Option<i64> },
    BottDims { n: i64, m: i64, p: i64, q: i64, expect: Option<u64> },
    CechOracleP1 { m: i64, p: u8, q: u8, truncation: Option<i64>, expect: Option<usize> },
}

/// A resolved task: canonical name, the parameters as given, the typed task.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskCall {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub task: Task,
    pub location: String,
}

impl TaskCall {
    /// `name` or `name(k=v, ...)` with parameters in key order.
    pub fn label(&self) -> String {
        if self.params.is_empty() {
            return self.name.clone();
        }
        let args: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{}={}", k, s),
                other => format!("{}={}", k, other),
            })
            .collect();
        format!("{}({})", self.name, args.join(", "))
    }
}

/// Builds a call from a name and named parameters, as the subcommands do.
pub fn call(name: &str, params: &[(&str, Value)]) -> Result<TaskCall, SchemaError> {
    let mut obj = serde_json::Map::new();
    obj.insert("task".into(), Value::String(name.into()));
    for (k, v) in params {
        obj.insert(k.to_string(), v.clone());
    }
    resolve(&Value::Object(obj), "arguments")
}

/// Accepts `"name"`, `"name(arg, key=value)"`, or `{"task": "name", "key": value}`.
pub fn resolve(v: &Value, loc: &str) -> Result<TaskCall, SchemaError> {
    let (name, positional, mut named) = match v {
        Value::String(s) => parse_call(s).map_err(|m| SchemaError { location: loc.to_string(), message: m })?,
        Value::Object(map) => {
            let name = map
                .get("task")
                .and_then(|t| t.as_str())
                .ok_or_else(|| SchemaError { location: loc.to_string(), message: "task objects need a string 'task' field".into() })?;
            let named: BTreeMap<String, Value> =
                map.iter().filter(|(k, _)| k.as_str() != "task").map(|(k, v)| (k.clone(), v.clone())).collect();
            (name.to_string(), Vec::new(), named)
        }
        _ => return schema_err(loc, "a task is a string or an object"),
    };
    let spec = spec(&name).ok_or_else(|| SchemaError {
        location: loc.to_string(),
        message: format!("unknown task '{}' (known: {})", name, vocabulary().join(", ")),
    })?;
    if positional.len() > spec.positional.len() {
        return schema_err(loc, format!("'{}' takes at most {} positional arguments", spec.name, spec.positional.len()));
    }
    for (key, val) in spec.positional.iter().zip(positional) {
        // a flag given by name, as in `calabi_yau(strong)`
        let val = if val.as_str() == Some(key) { Value::Bool(true) } else { val };
        if named.insert(key.to_string(), val).is_some() {
            return schema_err(loc, format!("parameter '{}' given twice", key));
        }
    }
    if let Some(k) = named.keys().find(|k| !spec.params.contains(&k.as_str())) {
        let allowed = if spec.params.is_empty() { "none".to_string() } else { spec.params.join(", ") };
        return schema_err(format!("{}.{}", loc, k), format!("unknown parameter for '{}' (allowed: {})", spec.name, allowed));
    }
    let task = typed(spec.name, &named, loc)?;
    Ok(TaskCall { name: spec.name.to_string(), params: named, task, location: loc.to_string() })
}

/// A call string split into name, positional and named arguments.
type ParsedCall = (String, Vec<Value>, BTreeMap<String, Value>);

/// `name` or `name(a, b=c)`. Values are integers, `true`/`false`, bare words
/// or double-quoted strings.
fn parse_call(s: &str) -> Result<ParsedCall, String> {
    let s = s.trim();
    let (name, rest) = match s.find('(') {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("malformed task name in '{}'", s));
    }
    let mut positional = Vec::new();
    let mut named = BTreeMap::new();
    if let Some(rest) = rest {
        let inner = rest.strip_suffix(')').ok_or_else(|| format!("missing ')' in '{}'", s))?;
        for arg in split_args(inner)? {
            let arg = arg.trim();
            if arg.is_empty() {
                return Err(format!("empty argument in '{}'", s));
            }
            match arg.split_once('=') {
                Some((k, v)) if !k.trim().starts_with('"') => {
                    if named.insert(k.trim().to_string(), word_value(v.trim())).is_some() {
                        return Err(format!("parameter '{}' given twice", k.trim()));
                    }
                }
                _ => positional.push(word_value(arg)),
            }
        }
    }
    Ok((name.to_string(), positional, named))
}

fn split_args(s: &str) -> Result<Vec<String>, String> {
    let mut out = vec![String::new()];
    let mut quoted = false;
    for c in s.chars() {
        match c {
            '"' => {
                quoted = !quoted;
                out.last_mut().unwrap().push(c);
            }
            ',' if !quoted => out.push(String::new()),
            _ => out.last_mut().unwrap().push(c),
        }
    }
    if quoted {
        return Err("unterminated string in task arguments".into());
    }
    if out.len() == 1 && out[0].trim().is_empty() {
        out.clear();
    }
    Ok(out)
}

fn word_value(w: &str) -> Value {
    if let Some(inner) = w.strip_prefix('"').and_then(|x| x.strip_suffix('"')) {
        return Value::String(inner.to_string());
    }
    match w {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => w.parse::<i64>().map(Value::from).unwrap_or_else(|_| Value::String(w.to_string())),
    }
}

struct Params<'a> {
    map: &'a BTreeMap<String, Value>,
    loc: &'a str,
}

impl Params<'_> {
    fn at(&self, key: &str) -> String {
        format!("{}.{}", self.loc, key)
    }

    fn int(&self, key: &str) -> Result<Option<i64>, SchemaError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v.as_i64().map(Some).ok_or_else(|| SchemaError { location: self.at(key), message: "expected an integer".into() }),
        }
    }

    fn req_int(&self, key: &str) -> Result<i64, SchemaError> {
        self.int(key)?.ok_or_else(|| SchemaError { location: self.loc.to_string(), message: format!("missing parameter '{}'", key) })
    }

    fn uint(&self, key: &str) -> Result<Option<usize>, SchemaError> {
        match self.int(key)? {
            Some(n) if n < 0 => schema_err(self.at(key), "expected a nonnegative integer"),
            other => Ok(other.map(|n| n as usize)),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, SchemaError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v.as_bool().map(Some).ok_or_else(|| SchemaError { location: self.at(key), message: "expected true or false".into() }),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>, SchemaError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => schema_err(self.at(key), "expected a string"),
        }
    }

    fn degree(&self) -> Result<usize, SchemaError> {
        match self.uint("degree")? {
            Some(0) => schema_err(self.at("degree"), "degree must be at least 1"),
            Some(k) => Ok(k),
            None => schema_err(self.loc, "missing parameter 'degree'"),
        }
    }

    fn convention(&self) -> Result<ChernConvention, SchemaError> {
        match self.string("convention")?.as_deref() {
            None | Some("vector") => Ok(ChernConvention::Vector),
            Some("principal") => Ok(ChernConvention::Principal),
            Some(other) => schema_err(self.at("convention"), format!("unknown convention '{}' (principal or vector)", other)),
        }
    }

    fn connection(&self, key: &str) -> Result<Option<ConnSource>, SchemaError> {
        self.map.get(key).map(|v| ConnSource::parse(v, &self.at(key))).transpose()
    }
}

fn typed(name: &str, map: &BTreeMap<String, Value>, loc: &str) -> Result<Task, SchemaError> {
    let p = Params { map, loc };
    Ok(match name {
        "validate" => Task::Validate,
        "check_axioms" => Task::CheckAxioms,
        "eigenbundle_and_type" => Task::EigenbundleAndType { expect: p.uint("expect")? },
        "b_transform" => Task::BTransform {
            b: p.string("B")?.ok_or_else(|| SchemaError { location: loc.into(), message: "missing parameter 'B'".into() })?,
        },
        "check_gc_map" => {
            let target = map.get("target").cloned().ok_or_else(|| SchemaError { location: loc.into(), message: "missing parameter 'target'".into() })?;
            let psi = map.get("psi").cloned().ok_or_else(|| SchemaError { location: loc.into(), message: "missing parameter 'psi'".into() })?;
            if !psi.is_array() {
                return schema_err(p.at("psi"), "expected a matrix");
            }
            Task::CheckGcMap { target, psi }
        }
        "spinor_to_structure" => Task::SpinorToStructure,
        "structure_to_spinor" => Task::StructureToSpinor,
        "check_calabi_yau" => Task::CheckCalabiYau { strong: p.boolean("strong")?.unwrap_or(false) },
        "leaf_distribution" => Task::LeafDistribution,
        "transverse_split" => Task::TransverseSplit,
        "build_operators" => Task::BuildOperators,
        "cohomology_dims" => {
            let flavor = match p.string("flavor")?.as_deref() {
                None | Some("D") => Flavor::D,
                Some("dL") => Flavor::DL,
                Some("dLbar") => Flavor::DLbar,
                Some(other) => return schema_err(p.at("flavor"), format!("unknown flavor '{}' (D, dL or dLbar)", other)),
            };
            let expect = map.get("expect").cloned();
            if let Some(e) = &expect {
                let ok = match flavor {
                    Flavor::D => serde_json::from_value::<Vec<usize>>(e.clone()).is_ok(),
                    _ => serde_json::from_value::<Vec<Vec<usize>>>(e.clone()).is_ok(),
                };
                if !ok {
                    return schema_err(p.at("expect"), "expected a list of dimensions (D) or a table of them (dL, dLbar)");
                }
            }
            Task::CohomologyDims { flavor, expect }
        }
        "hodge_star" => Task::HodgeStar { form: p.string("form")? },
        "adjoints_and_laplacians" => Task::AdjointsAndLaplacians,
        "lefschetz_check" => Task::LefschetzCheck,
        "duality_report" => Task::DualityReport,
        "hodge_summary" => Task::HodgeSummary,
        "validate_cocycle" => Task::ValidateCocycle,
        "check_gh_cocycle" => Task::CheckGhCocycle,
        "atiyah_cocycles" => Task::AtiyahCocycles,
        "gh_connection_search" => {
            let expect = match p.string("expect")?.as_deref() {
                None => None,
                Some("found") => Some(true),
                Some("not_found") => Some(false),
                Some(other) => return schema_err(p.at("expect"), format!("expected 'found' or 'not_found', got '{}'", other)),
            };
            Task::GhConnectionSearch { bound: p.int("bound")?.unwrap_or(4), expect }
        }
        "curvature" => Task::Curvature { connection: p.connection("connection")? },
        "chern_connection" => Task::ChernConnection { metric: p.uint("metric")?.unwrap_or(0) },
        "chern_weil" => Task::ChernWeil { degree: p.degree()?, convention: p.convention()?, connection: p.connection("connection")? },
        "transgression" => {
            let connections = match map.get("connections") {
                None => None,
                Some(Value::Array(a)) if a.len() == 2 => Some([
                    ConnSource::parse(&a[0], &format!("{}[0]", p.at("connections")))?,
                    ConnSource::parse(&a[1], &format!("{}[1]", p.at("connections")))?,
                ]),
                Some(_) => return schema_err(p.at("connections"), "expected a list of two connections"),
            };
            Task::Transgression { degree: p.degree()?, convention: p.convention()?, connections }
        }
        "picard_ops" => Task::PicardOps { expect: p.int("expect")? },
        "bott_dims" => Task::BottDims {
            n: p.req_int("n")?,
            m: p.req_int("m")?,
            p: p.int("p")?.unwrap_or(0),
            q: p.int("q")?.unwrap_or(0),
            expect: p.uint("expect")?.map(|e| e as u64),
        },
        "cech_oracle_p1" => {
            let small = |key: &str| -> Result<u8, SchemaError> {
                match p.int(key)?.unwrap_or(0) {
                    v @ 0..=1 => Ok(v as u8),
                    _ => schema_err(p.at(key), "expected 0 or 1"),
                }
            };
            Task::CechOracleP1 {
                m: p.req_int("m")?,
                p: small("p")?,
                q: small("q")?,
                truncation: p.int("truncation")?,
                expect: p.uint("expect")?,
            }
        }
        _ => unreachable!("task table and typed() disagree on {}", name),
    })
}

/// Each task needs its blocks to be present in the file.
pub fn check_requirements(p: &Problem, call: &TaskCall) -> Result<(), SchemaError> {
    let need = spec(&call.name).expect("resolved").need;
    let missing = match need {
        Need::Nothing => None,
        Need::Lie if p.lie.is_none() => Some("a 'lie_algebra' block"),
        Need::Gcs if p.gcs.is_none() => Some("a 'gcs' block"),
        Need::LieGcs if p.lie.is_none() || p.gcs.is_none() => Some("'lie_algebra' and 'gcs' blocks"),
        Need::Splitting if !p.has_splitting() => Some("a 'transverse' block, or 'gcs' with 'lie_algebra'"),
        Need::Bundle if p.bundle.is_none() => Some("a 'bundle' block"),
        _ => None,
    };
    if let Some(m) = missing {
        return schema_err(&call.location, format!("task '{}' needs {}", call.name, m));
    }
    if let Some(Ok(b)) = &p.bundle {
        let mut sources = Vec::new();
        match &call.task {
            Task::Curvature { connection } | Task::ChernWeil { connection, .. } => sources.extend(connection.clone()),
            Task::Transgression { connections, .. } => sources.extend(connections.iter().flatten().cloned()),
            Task::ChernConnection { metric } => sources.push(ConnSource::Chern(*metric)),
            _ => {}
        }
        for s in sources {
            match s {
                ConnSource::Chern(i) if i >= b.metrics.len() => {
                    return schema_err(&call.location, format!("no hermitian metric {} (the bundle declares {})", i, b.metrics.len()))
                }
                ConnSource::Explicit(i) if i >= b.connections.len() => {
                    return schema_err(&call.location, format!("no connection {} (the bundle declares {})", i, b.connections.len()))
                }
                _ => {}
            }
        }
    }
    Ok(())
}

enum Failure {
    /// A library precondition failed.
    Contract(String),
    /// An input problem only detectable at run time.
    Schema(String),
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Contract(s)
    }
}

struct Outcome {
    verdict: Verdict,
    lines: Vec<String>,
    values: Vec<ExactValue>,
    details: Value,
}

impl Outcome {
    fn new(pass: bool) -> Self {
        Outcome { verdict: if pass { Verdict::Pass } else { Verdict::Fail }, lines: Vec::new(), values: Vec::new(), details: Value::Null }
    }

    fn line(mut self, s: impl Into<String>) -> Self {
        self.lines.push(s.into());
        self
    }

    fn value(mut self, name: impl Into<String>, exact: impl Into<String>) -> Self {
        self.values.push(ExactValue { name: name.into(), exact: exact.into(), approx: None });
        self
    }

    fn details(mut self, v: Value) -> Self {
        self.details = v;
        self
    }
}

type Run = Result<Outcome, Failure>;

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn pass_fail(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

fn matrix_text(rows: &[Vec<String>]) -> String {
    format!("[{}]", rows.iter().map(|r| format!("[{}]", r.join(", "))).collect::<Vec<_>>().join(", "))
}

fn cmatrix_rows(m: &CMatrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect()
}

fn vector_text(space: &BasedSpace, v: &[GaussianRational]) -> String {
    space.print(&Multivector::from_coeffs(v))
}

fn failed_checks(checks: &[OverlapCheck]) -> Vec<String> {
    checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| match &c.witness {
            Some(w) => format!("fails on {}: product is {}", c.charts.join(","), matrix_text(w)),
            None => format!("fails on {}", c.charts.join(",")),
        })
        .collect()
}

fn count_line(what: &str, checks: &[OverlapCheck]) -> String {
    let ok = checks.iter().filter(|c| c.pass).count();
    format!("{}: {}/{} hold", what, ok, checks.len())
}

/// Executes the tasks of a problem in declaration order.
pub struct Runner<'a> {
    p: &'a Problem,
    splitting: OnceCell<Result<TransverseSplitting, String>>,
    ops: OnceCell<Result<Operators, String>>,
    atiyah: OnceCell<Result<AtiyahData, String>>,
}

impl<'a> Runner<'a> {
    pub fn new(p: &'a Problem) -> Self {
        Runner { p, splitting: OnceCell::new(), ops: OnceCell::new(), atiyah: OnceCell::new() }
    }

    pub fn run_all(&self) -> Vec<TaskResult> {
        self.p.tasks.iter().map(|c| self.run(c)).collect()
    }

    pub fn run(&self, call: &TaskCall) -> TaskResult {
        let (verdict, lines, values, details, error) = match self.dispatch(&call.task) {
            Ok(o) => (o.verdict, o.lines, o.values, o.details, None),
            Err(Failure::Contract(m)) => (Verdict::Error, Vec::new(), Vec::new(), Value::Null, Some(m)),
            Err(Failure::Schema(m)) => (Verdict::Invalid, Vec::new(), Vec::new(), Value::Null, Some(format!("{}: {}", call.location, m))),
        };
        TaskResult { task: call.label(), verdict, lines, values, details, error }
    }

    fn lie(&self) -> Result<&LieStructure, String> {
        match &self.p.lie {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(format!("lie_algebra: {}", e)),
            None => Err("no lie_algebra block".into()),
        }
    }

    /// The Lie algebra, required to satisfy `d² = 0`.
    fn valid_lie(&self) -> Result<&LieStructure, String> {
        let l = self.lie()?;
        match l.validate().first_failure {
            None => Ok(l),
            Some((g, w)) => Err(format!("lie_algebra is not a Lie algebra: d^2 e{} = {}", g, w)),
        }
    }

    fn gcs(&self) -> Result<&GcsInput, String> {
        match &self.p.gcs {
            Some(Ok(g)) => Ok(g),
            Some(Err(e)) => Err(format!("gcs: {}", e)),
            None => Err("no gcs block".into()),
        }
    }

    fn bundle(&self) -> Result<&BundleInput, String> {
        match &self.p.bundle {
            Some(Ok(b)) => Ok(b),
            Some(Err(e)) => Err(format!("bundle: {}", e)),
            None => Err("no bundle block".into()),
        }
    }

    fn cocycle(&self) -> Result<&TransitionCocycle, String> {
        Ok(&self.bundle()?.cocycle)
    }

    pub fn splitting(&self) -> Result<&TransverseSplitting, String> {
        self.splitting
            .get_or_init(|| {
                let err = |e: gcgw::complexes::ComplexError| e.to_string();
                let s = match &self.p.transverse {
                    Some(TransverseInput::Generators(g)) => TransverseSplitting::from_generators(self.valid_lie()?, g.clone()).map_err(err)?,
                    Some(TransverseInput::Table(t)) => TransverseSplitting::from_table(t.len(), t).map_err(err)?,
                    Some(TransverseInput::Flat(k)) => TransverseSplitting::flat(*k),
                    None => TransverseSplitting::from_gcs(&self.gcs()?.structure()?, self.valid_lie()?).map_err(err)?,
                };
                match &self.p.metric {
                    Some(h) => s.with_metric(h).map_err(err),
                    None => Ok(s),
                }
            })
            .as_ref()
            .map_err(|e| e.clone())
    }

    fn ops(&self) -> Result<&Operators, String> {
        self.ops
            .get_or_init(|| build_operators(self.splitting()?).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| e.clone())
    }

    fn atiyah(&self) -> Result<&AtiyahData, String> {
        self.atiyah
            .get_or_init(|| atiyah_cocycles(self.cocycle()?).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// Explicit connection 0, else the Chern connection of metric 0, else a search.
    fn default_source(&self, nth: usize) -> Result<ConnSource, String> {
        let b = self.bundle()?;
        let mut all: Vec<ConnSource> = (0..b.connections.len()).map(ConnSource::Explicit).collect();
        all.extend((0..b.metrics.len()).map(ConnSource::Chern));
        all.push(ConnSource::Search(4));
        all.push(ConnSource::Zero);
        all.get(nth).cloned().ok_or_else(|| "not enough connections".into())
    }

    fn connection(&self, src: &ConnSource) -> Result<ConnectionData, String> {
        let c = self.cocycle()?;
        match src {
            ConnSource::Explicit(i) => {
                let conn = self.bundle()?.connections.get(*i).cloned().ok_or_else(|| format!("no connection {}", i))?;
                conn.check(c).map_err(|e| e.to_string())?;
                Ok(conn)
            }
            ConnSource::Chern(i) => {
                let h = self.bundle()?.metrics.get(*i).ok_or_else(|| format!("no hermitian metric {}", i))?;
                Ok(chern_connection(c, h).map_err(|e| e.to_string())?.connection)
            }
            ConnSource::Zero => Ok(ConnectionData::zero(c)),
            ConnSource::Search(bound) => match gh_connection_search(c, self.atiyah()?, *bound).map_err(|e| e.to_string())? {
                SearchOutcome::Found(conn) => Ok(conn),
                SearchOutcome::NotFoundWithinBound { bound, .. } => Err(format!("no connection found within degree bound {}", bound)),
            },
        }
    }

    fn dispatch(&self, t: &Task) -> Run {
        match t {
            Task::Validate => self.validate(),
            Task::CheckAxioms => self.check_axioms(),
            Task::EigenbundleAndType { expect } => self.eigen(*expect),
            Task::BTransform { b } => self.b_transform(b),
            Task::CheckGcMap { target, psi } => self.gc_map(target, psi),
            Task::SpinorToStructure | Task::StructureToSpinor => self.round_trip(),
            Task::CheckCalabiYau { strong } => self.calabi_yau(*strong),
            Task::LeafDistribution => self.leaves(),
            Task::TransverseSplit => self.transverse_split(),
            Task::BuildOperators => self.build_operators(),
            Task::CohomologyDims { flavor, expect } => self.cohomology(*flavor, expect.as_ref()),
            Task::HodgeStar { form } => self.hodge_star(form.as_deref()),
            Task::AdjointsAndLaplacians => self.adjoints(),
            Task::LefschetzCheck => self.lefschetz(),
            Task::DualityReport => self.duality(),
            Task::HodgeSummary => self.hodge(),
            Task::ValidateCocycle => self.validate_cocycle(),
            Task::CheckGhCocycle => self.check_gh(),
            Task::AtiyahCocycles => self.atiyah_task(),
            Task::GhConnectionSearch { bound, expect } => self.search(*bound, *expect),
            Task::Curvature { connection } => self.curvature(connection.as_ref()),
            Task::ChernConnection { metric } => self.chern_connection(*metric),
            Task::ChernWeil { degree, convention, connection } => self.chern_weil(*degree, *convention, connection.as_ref()),
            Task::Transgression { degree, convention, connections } => self.transgression(*degree, *convention, connections.as_ref()),
            Task::PicardOps { expect } => self.picard(*expect),
            Task::BottDims { n, m, p, q, expect } => bott(*n, *m, *p, *q, *expect),
            Task::CechOracleP1 { m, p, q, truncation, expect } => oracle(*m, *p, *q, *truncation, *expect),
        }
    }

    fn validate(&self) -> Run {
        let l = self.lie()?;
        let r = l.validate();
        let claim = self.p.nilpotent_claim.map(|c| (c, !c || l.check_nilpotent_claim().is_ok()));
        let mut o = Outcome::new(r.valid() && claim.is_none_or(|(_, ok)| ok));
        o = match &r.first_failure {
            None => o.line("d^2 = 0 on every generator"),
            Some((g, w)) => o.line(format!("d^2 e{} = {} (Jacobi identity fails)", g, w)),
        };
        if r.d_squared_zero {
            o = o.line(match r.nilpotency_class {
                Some(c) => format!("nilpotent of class {}", c),
                None => "not nilpotent".into(),
            });
            o = o.line(format!("unimodular: {}", yes(l.is_unimodular())));
        }
        if let Some((claimed, ok)) = claim {
            o = o.line(format!("declared nilpotent = {}: {}", claimed, if ok { "consistent" } else { "contradicted" }));
        }
        let details = json!({
            "dim": l.dim(),
            "antisymmetric": r.antisymmetric,
            "d_squared_zero": r.d_squared_zero,
            "first_failure": r.first_failure.as_ref().map(|(g, w)| json!({"generator": format!("e{}", g), "d_squared": w})),
            "nilpotency_class": r.nilpotency_class,
            "unimodular": r.d_squared_zero.then(|| l.is_unimodular()),
        });
        Ok(o.details(details))
    }

    /// The Lie algebra for integrability, when the file gives one.
    fn optional_lie(&self) -> Result<Option<&LieStructure>, String> {
        match &self.p.lie {
            None => Ok(None),
            Some(_) => self.valid_lie().map(Some),
        }
    }

    fn check_axioms(&self) -> Run {
        let j = self.gcs()?.structure()?;
        let lie = self.optional_lie()?;
        let r = j.check_axioms(lie).map_err(|e| e.to_string())?;
        let show = |name: &str, c: &gcgw::gcs::Check| match &c.witness {
            Some(w) if !c.pass => format!("{}: fail, witness {}", name, w),
            _ => format!("{}: {}", name, pass_fail(c.pass)),
        };
        let mut o = Outcome::new(r.passed()).line(show("(a) J^2 = -1", &r.square)).line(show("(b) orthogonal for the pairing", &r.orthogonal));
        o = match &r.integrable {
            Some(c) => o.line(show("(c) Nijenhuis tensor vanishes", c)),
            None => o.line("(c) not checked: no lie_algebra block"),
        };
        Ok(o.details(serde_json::to_value(&r).expect("serializable")))
    }

    fn eigen(&self, expect: Option<usize>) -> Run {
        let j = self.gcs()?.structure()?;
        let e = j.eigen().map_err(|e| e.to_string())?;
        let space = BasedSpace::standard(j.dim());
        let mut o = Outcome::new(expect.is_none_or(|k| k == e.k)).value("type", e.k.to_string());
        if let Some(k) = expect {
            o = o.line(format!("expected type {}", k));
        }
        let delta: Vec<String> = e
            .delta
            .iter()
            .map(|v| vector_text(&space, &v.iter().map(|r| GaussianRational::real(r.clone())).collect::<Vec<_>>()))
            .collect();
        o = o
            .line(format!("dim_C L = {}, dim_C E = {}", e.l.len(), e.e.len()))
            .line(if delta.is_empty() { "Delta = 0".to_string() } else { format!("Delta = span{{{}}}", delta.join(", ")) });
        Ok(o.details(serde_json::to_value(&e).expect("serializable")))
    }

    fn b_transform(&self, b: &str) -> Run {
        let j = self.gcs()?.structure()?;
        let space = BasedSpace::standard(j.dim());
        let bf = space.parse(b).map_err(|e| Failure::Schema(format!("B = \"{}\": {}", b, e)))?;
        let lie = self.optional_lie()?;
        let t = j.b_transform(&bf, lie).map_err(|e| e.to_string())?;
        let before = j.type_k().map_err(|e| e.to_string())?;
        let after = t.type_k().map_err(|e| e.to_string())?;
        let axioms = t.check_axioms(lie).map_err(|e| e.to_string())?;
        let o = Outcome::new(before == after && axioms.passed())
            .line(format!("type before {}, after {}", before, after))
            .line(format!("transformed structure satisfies the axioms: {}", yes(axioms.passed())))
            .value("transformed matrix", matrix_text(&cmatrix_rows(t.matrix())));
        Ok(o.details(json!({
            "matrix": cmatrix_rows(t.matrix()),
            "type_before": before,
            "type_after": after,
            "axioms": axioms,
        })))
    }

    fn gc_map(&self, target: &Value, psi: &Value) -> Run {
        let source = self.gcs()?.structure()?;
        let target = problem::gcs_value(target, self.p.lie.as_ref().and_then(|l| l.as_ref().ok()).map(|l| l.dim()))
            .map_err(|e| Failure::Schema(e.to_string()))??
            .structure()?;
        let psi = problem::matrix_value(psi).map_err(|e| Failure::Schema(e.to_string()))?;
        let r = check_gc_map(&GcMapCandidate { source, target, psi }).map_err(|e| e.to_string())?;
        let mut o = Outcome::new(r.is_gc_map)
            .line(format!("psi(E_V) in E_W: {}", yes(r.e_inclusion)))
            .line(format!("psi pushes the Poisson structure forward: {}", yes(r.poisson_pushforward)));
        if let Some(f) = &r.failing {
            o = o.line(format!("fails: {}", f));
        }
        Ok(o.details(serde_json::to_value(&r).expect("serializable")))
    }

    fn round_trip(&self) -> Run {
        match self.gcs()? {
            GcsInput::Spinor(s) => {
                let j = gcgw::gcs::spinor_to_structure(s).map_err(|e| e.to_string())?;
                let back = j.structure_to_spinor().map_err(|e| e.to_string())?;
                let ok = same_span(&back.annihilator(), &s.annihilator(), 2 * s.dim());
                let o = Outcome::new(ok)
                    .line(format!("type {}", j.type_k().map_err(|e| e.to_string())?))
                    .line(format!("annihilator of structure_to_spinor(J) equals that of rho: {}", yes(ok)))
                    .value("J", matrix_text(&cmatrix_rows(j.matrix())));
                Ok(o.details(json!({"matrix": cmatrix_rows(j.matrix()), "round_trip": ok})))
            }
            GcsInput::Structure(j) => {
                let s = j.structure_to_spinor().map_err(|e| e.to_string())?;
                let back = gcgw::gcs::spinor_to_structure(&s).map_err(|e| e.to_string())?;
                let ok = &back == j;
                let rho = BasedSpace::standard(j.dim()).print(&s.rho);
                let o = Outcome::new(ok)
                    .line(format!("spinor_to_structure(structure_to_spinor(J)) = J: {}", yes(ok)))
                    .value("rho", rho.clone());
                Ok(o.details(json!({"rho": rho, "round_trip": ok})))
            }
        }
    }

    fn spinor(&self) -> Result<PureSpinorLine, String> {
        self.gcs()?.spinor()
    }

    fn calabi_yau(&self, strong: bool) -> Run {
        let l = self.valid_lie()?;
        let s = self.spinor()?;
        let r = check_calabi_yau(l, &s, strong).map_err(|e| e.to_string())?;
        let space = l.space();
        let mut o = Outcome::new(r.passed())
            .line(format!("type {}", r.type_k))
            .line(if r.d_rho_zero { "d rho = 0".to_string() } else { format!("d rho = {} != 0", space.print(&r.d_rho)) })
            .line(format!("pure: {}, decomposable: {}", yes(r.pure), yes(r.decomposable)));
        if let Some(nd) = &r.nondegeneracy {
            o = o
                .line(format!("omega^(n-k) ^ Omega ^ conj(Omega) = {} ({})", space.print(nd), if r.nondegenerate { "nonzero" } else { "zero" }))
                .value("nondegeneracy", space.print(nd));
        }
        for (j, d) in r.d_theta.iter().enumerate() {
            if !d.is_zero() {
                o = o.line(format!("d theta{} = {}", j + 1, space.print(d)));
            }
        }
        o = o.line(format!("generalized Calabi-Yau: {}", yes(r.gcy)));
        if let Some(sg) = r.strong_gcy {
            o = o.line(format!("strong: {}", yes(sg)));
        }
        o = o.value("d rho", space.print(&r.d_rho));
        Ok(o.details(serde_json::to_value(&r).expect("serializable")))
    }

    fn leaves(&self) -> Run {
        let l = self.valid_lie()?;
        let r = leaf_distribution(l, &self.spinor()?).map_err(|e| e.to_string())?;
        let basis: Vec<String> = r
            .basis
            .iter()
            .map(|v| vector_text(l.space(), &v.iter().map(|x| GaussianRational::real(x.clone())).collect::<Vec<_>>()))
            .collect();
        let o = Outcome::new(r.subalgebra)
            .line(format!("s = span{{{}}}", basis.join(", ")))
            .line(format!("codimension {}", r.codim))
            .line(format!("closed under the bracket: {}", yes(r.subalgebra)));
        Ok(o.details(serde_json::to_value(&r).expect("serializable")))
    }

    fn transverse_split(&self) -> Run {
        let s = self.splitting()?;
        let sp = s.space();
        let mut o = Outcome::new(true).line(format!("k = {}", s.k()));
        let gens: Vec<String> = s.generators().iter().map(|g| s.ambient().space().print(g)).collect();
        o = o.line(format!("generators: {}", gens.join(", ")));
        let mut table = serde_json::Map::new();
        for (label, t) in sp.labels().iter().zip(s.table()) {
            o = o.line(format!("d({}) = {}", label, sp.print(t)));
            table.insert(label.clone(), Value::String(sp.print(t)));
        }
        Ok(o.details(json!({"k": s.k(), "generators": gens, "table": table})))
    }

    fn build_operators(&self) -> Run {
        let ids = self.ops()?.identities();
        let o = Outcome::new(ids.all())
            .line(format!("D^2 = 0: {}", pass_fail(ids.d_squared)))
            .line(format!("d_L^2 = 0: {}", pass_fail(ids.d_l_squared)))
            .line(format!("d_Lbar^2 = 0: {}", pass_fail(ids.d_lbar_squared)))
            .line(format!("d_L d_Lbar = -d_Lbar d_L: {}", pass_fail(ids.anticommute)));
        Ok(o.details(serde_json::to_value(&ids).expect("serializable")))
    }

    fn cohomology(&self, flavor: Flavor, expect: Option<&Value>) -> Run {
        let ops = self.ops()?;
        let ids = ops.identities();
        let dims = cohomology_dims(ops);
        let (shown, name) = match flavor {
            Flavor::D => (json!(dims.d), "D"),
            Flavor::DL => (json!(dims.d_l), "dL"),
            Flavor::DLbar => (json!(dims.d_lbar), "dLbar"),
        };
        let matches = expect.is_none_or(|e| *e == shown);
        let mut o = Outcome::new(ids.all() && matches).value(format!("dims H_{}", name), shown.to_string());
        if !ids.all() {
            o = o.line("operator identities fail; see build_operators");
        }
        if let Some(e) = expect {
            o = o.line(format!("expected {}: {}", e, if matches { "match" } else { "mismatch" }));
        }
        if flavor == Flavor::D {
            o = o.line(format!("sum over p+q of h^(p,q): {:?}", hodge_totals(&dims)));
        }
        Ok(o.details(json!({"flavor": name, "dims": dims, "operator_identities": ids})))
    }

    fn hodge_star(&self, form: Option<&str>) -> Run {
        let s = self.splitting()?;
        let ss = star_star_check(s, &self.ops()?.grading);
        let mut o = Outcome::new(ss.iter().all(|b| *b)).line(format!("star star = (-1)^(r(2k-r)) for r = 0..{}: {:?}", 2 * s.k(), ss));
        let mut details = json!({"star_star": ss});
        if let Some(f) = form {
            let w = s.space().parse(f).map_err(|e| Failure::Schema(format!("form \"{}\": {}", f, e)))?;
            let st = hodge_star(s, &w).map_err(|e| e.to_string())?;
            let text = s.space().print(&st);
            o = o.value(format!("star({})", f), text.clone());
            details["star"] = Value::String(text);
        }
        Ok(o.details(details))
    }

    fn adjoints(&self) -> Run {
        let (_, r) = adjoints_and_laplacians(self.splitting()?, self.ops()?);
        let o = Outcome::new(adjoints_pass(&r)).lines_from(adjoint_lines(&r));
        Ok(o.details(serde_json::to_value(&r).expect("serializable")))
    }

    fn lefschetz(&self) -> Run {
        let r = lefschetz_check(self.splitting()?, self.ops()?);
        let mut o = Outcome::new(r.passed()).lines_from(kahler_lines(&r));
        if r.identities.is_none() {
            o.verdict = Verdict::Skipped;
        }
        Ok(o.details(serde_json::to_value(&r).expect("serializable")))
    }

    fn duality(&self) -> Run {
        let r = duality_report(self.splitting()?, self.ops()?);
        let mut o = Outcome::new(r.passed())
            .line(format!("dim H^r_D = dim H^(2k-r)_D: {}", yes(r.d_symmetric)))
            .line(format!("h^(p,q) = h^(k-p,k-q): {}", yes(r.d_l_symmetric)));
        let bad: Vec<String> = r.pairings.iter().filter(|p| !p.nondegenerate).map(|p| format!("{:?}", p.degree)).collect();
        o = o.line(if bad.is_empty() {
            format!("harmonic pairings nondegenerate in all {} degrees", r.pairings.len())
        } else {
            format!("degenerate pairings in degrees {}", bad.join(", "))
        });
        Ok(o.details(serde_json::to_value(&r).expect("serializable")))
    }

    fn hodge(&self) -> Run {
        let h = hodge_summary(self.splitting()?).map_err(|e| e.to_string())?;
        let kahler_ok = h.kahler.passed() || h.kahler.identities.is_none();
        let pass = h.operator_identities.all()
            && h.star_star.iter().all(|b| *b)
            && adjoints_pass(&h.adjoints)
            && kahler_ok
            && h.duality.passed();
        let kahler = match (&h.kahler.identities, h.kahler.passed()) {
            (None, _) => "skipped",
            (Some(_), true) => "pass",
            (Some(_), false) => "fail",
        };
        let o = Outcome::new(pass)
            .line(format!("k = {}", h.k))
            .line(format!("operator identities: {}", pass_fail(h.operator_identities.all())))
            .line(format!("dims H_D: {:?}", h.dims.d))
            .line(format!("h^(p,q): {:?}", h.dims.d_l))
            .line(format!("star star: {}", pass_fail(h.star_star.iter().all(|b| *b))))
            .lines_from(adjoint_lines(&h.adjoints))
            .lines_from(kahler_lines(&h.kahler))
            .line(format!("duality: {}", pass_fail(h.duality.passed())))
            .value("dims H_D", json!(h.dims.d).to_string());
        Ok(o.details(json!({
            "k": h.k,
            "dims": h.dims,
            "operator_identities": h.operator_identities,
            "star_star": h.star_star,
            "adjoints": h.adjoints,
            "kahler_identities": kahler,
            "kahler": h.kahler,
            "duality": h.duality,
        })))
    }

    fn validate_cocycle(&self) -> Run {
        let r = validate_cocycle(self.cocycle()?);
        let o = Outcome::new(r.valid)
            .line(count_line("phi_ab phi_ba = I", &r.inverse))
            .line(count_line("phi_ab phi_bc phi_ca = I", &r.triple))
            .lines_from(failed_checks(&r.inverse))
            .lines_from(failed_checks(&r.triple));
        Ok(o.details(serde_json::to_value(&r).expect("serializable")))
    }

    fn check_gh(&self) -> Run {
        let r = check_gh_cocycle(self.cocycle()?);
        let mut o = Outcome::new(r.gh).line(format!("generalized holomorphic: {}", yes(r.gh)));
        for w in &r.offending {
            o = o.line(format!(
                "entry ({}, {}) on {},{} depends on {}",
                w.entry.0, w.entry.1, w.overlap.0, w.overlap.1, w.variables.join(", ")
            ));
        }
        Ok(o.details(serde_json::to_value(&r).expect("serializable")))
    }

    fn atiyah_task(&self) -> Run {
        let c = self.cocycle()?;
        let a = self.atiyah()?;
        let mut o = Outcome::new(a.passed());
        let mut xi = serde_json::Map::new();
        for (&(x, y), m) in &a.xi {
            let key = format!("{},{}", c.nerve().chart_name(x), c.nerve().chart_name(y));
            let text = matrix_text(&m.display(c.nerve().names(x)));
            o = o.value(format!("xi[{}]", key), text.clone());
            xi.insert(key, Value::String(text));
        }
        o = o
            .line(count_line("b = -xi", &a.sign_theorem))
            .line(count_line("twisted cocycle condition", &a.twisted_cocycle))
            .lines_from(failed_checks(&a.sign_theorem))
            .lines_from(failed_checks(&a.twisted_cocycle));
        Ok(o.details(json!({"xi": xi, "sign_theorem": a.sign_theorem, "twisted_cocycle": a.twisted_cocycle})))
    }

    fn search(&self, bound: i64, expect: Option<bool>) -> Run {
        let c = self.cocycle()?;
        let a = self.atiyah()?;
        match gh_connection_search(c, a, bound).map_err(|e| e.to_string())? {
            SearchOutcome::Found(conn) => {
                let law = check_connection_law(c, a, &conn);
                let ok = law.iter().all(|l| l.pass);
                let mut o = Outcome::new(ok && expect.is_none_or(|e| e)).line(format!("connection found within degree bound {}", bound));
                let shown = conn.display(c);
                for (i, t) in shown.iter().enumerate() {
                    o = o.value(format!("Theta[{}]", c.nerve().chart_name(i)), matrix_text(t));
                }
                o = o.line(count_line("xi = phi pull(Theta) phi^-1 - Theta", &law));
                if expect == Some(false) {
                    o = o.line("expected no connection within the bound");
                }
                Ok(o.details(json!({"found": true, "bound": bound, "theta": shown, "law": law})))
            }
            SearchOutcome::NotFoundWithinBound { bound, unknowns, equations } => {
                let mut o = Outcome::new(expect.is_none_or(|e| !e))
                    .line(format!("no connection within bound {} ({} unknowns, {} equations)", bound, unknowns, equations))
                    .line("the ansatz is polynomial of bounded degree; this is not a proof of nonexistence");
                if expect == Some(true) {
                    o = o.line("expected a connection");
                }
                Ok(o.details(json!({"found": false, "bound": bound, "unknowns": unknowns, "equations": equations})))
            }
        }
    }

    fn source(&self, src: Option<&ConnSource>, nth: usize) -> Result<ConnSource, String> {
        match src {
            Some(s) => Ok(s.clone()),
            None => self.default_source(nth),
        }
    }

    fn curvature(&self, src: Option<&ConnSource>) -> Run {
        let c = self.cocycle()?;
        let src = self.source(src, 0)?;
        let conn = self.connection(&src)?;
        let cd = curvature(c, &conn).map_err(|e| e.to_string())?;
        let mut o = Outcome::new(cd.equivariance.iter().all(|e| e.pass)).line(format!("using the {}", src.label()));
        let (omega, omega11) = (mforms(c, &cd.omega), mforms(c, &cd.omega11));
        for (i, (w, w11)) in omega.iter().zip(&omega11).enumerate() {
            let chart = c.nerve().chart_name(i);
            o = o.value(format!("Omega[{}]", chart), w.clone()).value(format!("Omega11[{}]", chart), w11.clone());
        }
        o = o.line(count_line("Omega11 transforms by conjugation", &cd.equivariance));
        Ok(o.details(json!({"connection": src.label(), "omega": omega, "omega11": omega11, "equivariance": cd.equivariance})))
    }

    fn chern_connection(&self, metric: usize) -> Run {
        let c = self.cocycle()?;
        let h = self.bundle()?.metrics.get(metric).ok_or_else(|| format!("no hermitian metric {}", metric))?;
        let d = chern_connection(c, h).map_err(|e| e.to_string())?;
        let mut o = Outcome::new(d.passed());
        let theta = mforms(c, &d.connection.theta);
        let omega = mforms(c, &d.curvature.omega);
        for (i, (t, w)) in theta.iter().zip(&omega).enumerate() {
            let chart = c.nerve().chart_name(i);
            o = o.value(format!("theta[{}]", chart), t.clone()).value(format!("Omega[{}]", chart), w.clone());
        }
        o = o
            .line(count_line("h_b = phi^T h_a conj(phi)", &d.metric_compatible))
            .line(format!("curvature of type (1,1): {}", yes(d.type_11)))
            .line(format!("Omega^T h + h conj(Omega) = 0: {}", yes(d.skew_hermitian)))
            .line(count_line("coboundary law against xi", &d.law));
        Ok(o.details(json!({
            "theta": theta,
            "omega": omega,
            "metric_compatible": d.metric_compatible,
            "type_11": d.type_11,
            "skew_hermitian": d.skew_hermitian,
            "law": d.law,
        })))
    }

    fn chern_weil(&self, k: usize, conv: ChernConvention, src: Option<&ConnSource>) -> Run {
        let c = self.cocycle()?;
        let src = self.source(src, 0)?;
        let conn = self.connection(&src)?;
        let cd = curvature(c, &conn).map_err(|e| e.to_string())?;
        let cls = chern_weil(c, &cd.omega11, k, conv).map_err(|e| e.to_string())?;
        let shown = cls.display(c);
        let mut o = Outcome::new(cls.passed()).line(format!("using the {}, {} convention", src.label(), convention_name(conv)));
        for (i, s) in shown.iter().enumerate() {
            o = o.value(format!("c{}[{}]", k, c.nerve().chart_name(i)), s.clone());
        }
        o = o
            .line(format!("d_L-closed on every chart: {}", yes(cls.closed.iter().all(|b| *b))))
            .line(count_line("charts agree on overlaps", &cls.agreement));
        Ok(o.details(json!({
            "degree": k,
            "convention": conv,
            "connection": src.label(),
            "forms": shown,
            "closed": cls.closed,
            "agreement": cls.agreement,
        })))
    }

    fn transgression(&self, k: usize, conv: ChernConvention, srcs: Option<&[ConnSource; 2]>) -> Run {
        let c = self.cocycle()?;
        let (s0, s1) = match srcs {
            Some([a, b]) => (a.clone(), b.clone()),
            None => (self.default_source(0)?, self.default_source(1)?),
        };
        let (c0, c1) = (self.connection(&s0)?, self.connection(&s1)?);
        let r = transgression(c, self.atiyah()?, &c0, &c1, k, conv).map_err(|e| e.to_string())?;
        let distinct = c0 != c1;
        let mut o = Outcome::new(r.passed()).line(format!("from the {} to the {}", s0.label(), s1.label()));
        if !distinct {
            o = o.line("the two connections coincide");
        }
        let shown: Vec<String> = r
            .t
            .iter()
            .enumerate()
            .map(|(a, f)| {
                let body = f.display(c.nerve().names(a));
                if f.is_zero() {
                    body
                } else {
                    format!("(2*pi*i)^-{} * ({})", k, body)
                }
            })
            .collect();
        for (i, s) in shown.iter().enumerate() {
            o = o.value(format!("T[{}]", c.nerve().chart_name(i)), s.clone());
        }
        o = o
            .line(format!("f(Omega') - f(Omega) = d_L T on every chart: {}", yes(r.exact.iter().all(|b| *b))))
            .line(count_line("T agrees on overlaps", &r.agreement))
            .line(count_line("first connection satisfies the coboundary law", &r.admissible[0]))
            .line(count_line("second connection satisfies the coboundary law", &r.admissible[1]));
        Ok(o.details(json!({
            "connections": [s0.label(), s1.label()],
            "distinct": distinct,
            "t": shown,
            "exact": r.exact,
            "agreement": r.agreement,
            "admissible": r.admissible,
        })))
    }

    fn picard(&self, expect: Option<i64>) -> Run {
        let a = self.cocycle()?;
        let e = |x: gcgw::bundles::BundleError| x.to_string();
        let t = triviality(a).map_err(e)?;
        let d = dual(a).map_err(e)?;
        let td = triviality(&d).map_err(e)?;
        let ts = triviality(&tensor(a, &d).map_err(e)?).map_err(e)?;
        let tsq = triviality(&tensor(a, a).map_err(e)?).map_err(e)?;
        let group_law = ts == Triviality::Trivial
            && match &t {
                Triviality::NonTrivial { degree } => {
                    td == Triviality::NonTrivial { degree: -degree } && tsq == Triviality::NonTrivial { degree: 2 * degree }
                }
                Triviality::Trivial => td == Triviality::Trivial && tsq == Triviality::Trivial,
                Triviality::Undecided { .. } => true,
            };
        let residue = residue_degree(a);
        let residue_ok = match (&residue, &t) {
            (Some(r), Triviality::NonTrivial { degree }) => *r == GaussianRational::from_int(*degree),
            (Some(r), Triviality::Trivial) => r.is_zero(),
            _ => true,
        };
        let degree = match &t {
            Triviality::Trivial => Some(0),
            Triviality::NonTrivial { degree } => Some(*degree),
            Triviality::Undecided { .. } => None,
        };
        let expect_ok = expect.is_none_or(|m| degree == Some(m));
        let mut o = Outcome::new(group_law && residue_ok && expect_ok)
            .line(format!("L: {}", triviality_text(&t)))
            .line(format!("dual: {}", triviality_text(&td)))
            .line(format!("L (x) dual: {}", triviality_text(&ts)))
            .line(format!("L (x) L: {}", triviality_text(&tsq)));
        if let Some(r) = &residue {
            o = o.line(format!("residue of dphi/phi at 0: {}", r)).value("residue", r.to_string());
        }
        if let Some(m) = expect {
            o = o.line(format!("expected degree {}: {}", m, if expect_ok { "match" } else { "mismatch" }));
        }
        Ok(o.details(json!({
            "triviality": t,
            "dual": td,
            "tensor_with_dual": ts,
            "square": tsq,
            "residue_degree": residue,
            "group_law": group_law,
        })))
    }
}

trait Lines {
    fn lines_from(self, v: Vec<String>) -> Self;
}

impl Lines for Outcome {
    fn lines_from(mut self, v: Vec<String>) -> Self {
        self.lines.extend(v);
        self
    }
}

fn convention_name(c: ChernConvention) -> &'static str {
    match c {
        ChernConvention::Principal => "principal",
        ChernConvention::Vector => "vector",
    }
}

fn triviality_text(t: &Triviality) -> String {
    match t {
        Triviality::Trivial => "trivial".into(),
        Triviality::NonTrivial { degree } => format!("nontrivial, degree {}", degree),
        Triviality::Undecided { reason } => format!("undecided ({})", reason),
    }
}

fn mforms(c: &TransitionCocycle, ms: &[MForm]) -> Vec<String> {
    ms.iter().enumerate().map(|(a, m)| matrix_text(&m.display(c.nerve().names(a)))).collect()
}

fn hodge_totals(d: &CohomologyDims) -> Vec<usize> {
    let k = d.d_l.len().saturating_sub(1);
    (0..=2 * k).map(|r| (0..=k).filter(|p| r >= *p && r - p <= k).map(|p| d.d_l[p][r - p]).sum()).collect()
}

fn adjoints_pass(r: &AdjointReport) -> bool {
    r.d_adjoint && r.d_l_adjoint && r.d_lbar_adjoint && r.laplacians_self_adjoint && r.gram_positive && r.harmonic_matches_cohomology
}

fn adjoint_lines(r: &AdjointReport) -> Vec<String> {
    let mut v = vec![
        format!("unimodular: {}", yes(r.unimodular)),
        format!("D* adjoint of D: {}", yes(r.d_adjoint)),
        format!("d_L* adjoint of d_L: {}", yes(r.d_l_adjoint)),
        format!("d_Lbar* adjoint of d_Lbar: {}", yes(r.d_lbar_adjoint)),
        format!("Laplacians self-adjoint: {}", yes(r.laplacians_self_adjoint)),
        format!("Gram matrices positive: {}", yes(r.gram_positive)),
        format!("harmonic dims equal cohomology dims: {}", yes(r.harmonic_matches_cohomology)),
    ];
    if !r.unimodular {
        v.push("D does not vanish on A^(2k-1); adjointness of D is not expected".into());
    }
    v
}

fn kahler_lines(r: &KahlerReport) -> Vec<String> {
    match &r.identities {
        None => vec![match &r.diagnostic {
            Some(d) => format!("Kahler identities not applicable: {}", d),
            None => "Kahler identities not applicable: D omega != 0".into(),
        }],
        Some(ids) => {
            let mut v: Vec<String> = ids
                .iter()
                .map(|c| match c.failing_bidegree {
                    Some((p, q)) => format!("{}: fail in bidegree ({}, {})", c.name, p, q),
                    None => format!("{}: pass", c.name),
                })
                .collect();
            v.push(format!("Delta_D = 2 Delta_dL: {}", r.laplacian_relation.map_or("not checked", pass_fail)));
            v.push(format!("H_D = sum of H^(p,q): {}", r.hodge_decomposition.map_or("not checked", pass_fail)));
            v
        }
    }
}

fn bott(n: i64, m: i64, p: i64, q: i64, expect: Option<u64>) -> Run {
    let v = bott_dims(n, m, p, q).map_err(|e| e.to_string())?;
    let ok = expect.is_none_or(|e| v == e.into());
    let mut o = Outcome::new(ok).value(format!("dim H^{}(P^{}, Omega^{}({}))", q, n, p, m), v.to_string());
    if let Some(e) = expect {
        o = o.line(format!("expected {}: {}", e, if ok { "match" } else { "mismatch" }));
    }
    Ok(o.details(json!({"n": n, "m": m, "p": p, "q": q, "dim": v.to_string()})))
}

fn oracle(m: i64, p: u8, q: u8, truncation: Option<i64>, expect: Option<usize>) -> Run {
    let t = truncation.unwrap_or_else(|| default_truncation(m, p));
    let r = cech_oracle_p1(m, p, q, t).map_err(|e| e.to_string())?;
    let ok = r.stable && expect.is_none_or(|e| e == r.dim);
    let mut o = Outcome::new(ok)
        .value(format!("dim H^{}(P^1, Omega^{}({}))", q, p, m), r.dim.to_string())
        .line(format!("truncation {}, stable at {}: {}", r.truncation, r.truncation + 1, yes(r.stable)));
    if let Some(e) = expect {
        o = o.line(format!("expected {}: {}", e, if e == r.dim { "match" } else { "mismatch" }));
    }
    Ok(o.details(json!({"m": m, "p": p, "q": q, "dim": r.dim, "truncation": r.truncation, "stable": r.stable})))
}
