//! Problem files: the JSON schema, and conversion of its blocks into library
//! objects.
//!
//! Expression syntax errors are schema errors and carry a location. Objects
//! that parse but violate a constructor precondition are kept as `Err` and
//! surface as contract violations when a task needs them.

use std::collections::BTreeMap;
use std::fmt;

use gcgw::bundles::{ChartNerve, ConnectionData, ConnectionKind, MForm, RForm, RationalFunction, TransitionCocycle};
use gcgw::expr::{self, Dialect, ParseError};
use gcgw::gcs::{spinor_to_structure, GCStructure, PureSpinorLine};
use gcgw::linalg::{CMatrix, Matrix};
use gcgw::lie::LieStructure;
use gcgw::{BasedSpace, GaussianRational, Multivector};
use serde::Deserialize;
use serde_json::Value;

use crate::tasks::{self, TaskCall};

pub const PROBLEM_SCHEMA: &str = "gcgw-problem/1";

type RF = RationalFunction;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    /// JSON path, with a file position when one is known.
    pub location: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for SchemaError {}

pub(crate) fn schema_err<T>(location: impl Into<String>, message: impl Into<String>) -> Result<T, SchemaError> {
    Err(SchemaError { location: location.into(), message: message.into() })
}

/// A matrix entry: an integer or an expression string.
#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Int(n) => n.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub schema: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub lie_algebra: Option<LieBlock>,
    #[serde(default)]
    pub gcs: Option<GcsBlock>,
    #[serde(default)]
    pub transverse: Option<TransverseBlock>,
    #[serde(default)]
    pub metric: Option<MetricBlock>,
    #[serde(default)]
    pub bundle: Option<BundleBlock>,
    #[serde(default)]
    pub tasks: Vec<Value>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct LieBlock {
    pub dim: usize,
    /// `de_k` for the non-closed generators.
    #[serde(default)]
    pub d: BTreeMap<String, String>,
    /// Optional claim, checked by `validate`.
    #[serde(default)]
    pub nilpotent: Option<bool>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GcsBlock {
    Matrix(Vec<Vec<Scalar>>),
    Blocks(BlocksBlock),
    Complex(Vec<Vec<Scalar>>),
    Symplectic(SymplecticBlock),
    Spinor(SpinorBlock),
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct BlocksBlock {
    #[serde(rename = "J")]
    pub j: Vec<Vec<Scalar>>,
    #[serde(rename = "B", default)]
    pub b: Option<String>,
    #[serde(default)]
    pub beta: Option<Vec<Vec<Scalar>>>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct SymplecticBlock {
    pub omega: String,
    #[serde(default)]
    pub dim: Option<usize>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct SpinorBlock {
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(rename = "B", default)]
    pub b: Option<String>,
    #[serde(default)]
    pub omega: Option<String>,
    #[serde(default)]
    pub theta: Option<Vec<String>>,
    /// The whole mixed form, instead of its factors.
    #[serde(default)]
    pub rho: Option<String>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct TransverseBlock {
    #[serde(default)]
    pub generators: Option<Vec<String>>,
    /// `d(dz_j)` over the labels `dz1.., dzb1..`.
    #[serde(default)]
    pub table: Option<Vec<String>>,
    #[serde(default)]
    pub flat: Option<usize>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct MetricBlock {
    pub gram: Vec<Vec<Scalar>>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct BundleBlock {
    pub rank: usize,
    pub charts: Vec<String>,
    pub vars: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub leaves: Vec<String>,
    #[serde(default)]
    pub glue: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default)]
    pub transition: BTreeMap<String, Vec<Vec<Scalar>>>,
    /// Each entry gives one matrix per chart.
    #[serde(default)]
    pub hermitian_metrics: Vec<BTreeMap<String, Vec<Vec<Scalar>>>>,
    #[serde(default)]
    pub connections: Vec<ConnectionBlock>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct ConnectionBlock {
    #[serde(default)]
    pub kind: Option<String>,
    pub theta: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Debug, Clone)]
pub enum GcsInput {
    Structure(GCStructure),
    Spinor(PureSpinorLine),
}

impl GcsInput {
    pub fn structure(&self) -> Result<GCStructure, String> {
        match self {
            GcsInput::Structure(j) => Ok(j.clone()),
            GcsInput::Spinor(s) => spinor_to_structure(s).map_err(|e| format!("spinor_to_structure: {}", e)),
        }
    }

    pub fn spinor(&self) -> Result<PureSpinorLine, String> {
        match self {
            GcsInput::Structure(j) => j.structure_to_spinor().map_err(|e| format!("structure_to_spinor: {}", e)),
            GcsInput::Spinor(s) => Ok(s.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GcsInput::Structure(j) => j.dim(),
            GcsInput::Spinor(s) => s.dim(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum TransverseInput {
    Generators(Vec<Multivector>),
    Table(Vec<Multivector>),
    Flat(usize),
}

#[derive(Debug, Clone)]
pub struct BundleInput {
    pub cocycle: TransitionCocycle,
    /// One matrix per chart for each declared metric.
    pub metrics: Vec<Vec<Matrix<RF>>>,
    pub connections: Vec<ConnectionData>,
}

/// A loaded problem. `Err` fields hold constructor failures.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub description: Option<String>,
    pub lie: Option<Result<LieStructure, String>>,
    pub nilpotent_claim: Option<bool>,
    pub gcs: Option<Result<GcsInput, String>>,
    pub transverse: Option<TransverseInput>,
    pub metric: Option<CMatrix>,
    pub bundle: Option<Result<BundleInput, String>>,
    pub tasks: Vec<TaskCall>,
}

impl Problem {
    /// A problem with no blocks, for commands that take only parameters.
    pub fn empty(name: &str) -> Self {
        Problem {
            name: name.to_string(),
            description: None,
            lie: None,
            nilpotent_claim: None,
            gcs: None,
            transverse: None,
            metric: None,
            bundle: None,
            tasks: Vec::new(),
        }
    }

    pub fn has_splitting(&self) -> bool {
        self.transverse.is_some() || (self.gcs.is_some() && self.lie.is_some())
    }
}

/// Line and column (1-based) of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
    (line, col)
}

/// Resolves expression errors to file positions by finding the string literal
/// in the source; falls back to the JSON path alone.
struct Locator<'a> {
    source: &'a str,
}

impl Locator<'_> {
    fn error(&self, path: &str, text: &str, e: &ParseError) -> SchemaError {
        let literal = serde_json::to_string(text).unwrap_or_default();
        let at = self.source.find(&literal).filter(|_| !literal[1..literal.len() - 1].contains('\\'));
        let location = match at {
            Some(start) => {
                let (line, col) = line_col(self.source, start + 1 + e.pos);
                format!("{} (line {}, column {})", path, line, col)
            }
            None => path.to_string(),
        };
        SchemaError { location, message: format!("in \"{}\": {}", text, e) }
    }

    fn form(&self, space: &BasedSpace, path: &str, text: &str) -> Result<Multivector, SchemaError> {
        space.parse(text).map_err(|e| self.error(path, text, &e))
    }

    fn scalar(&self, path: &str, text: &str) -> Result<GaussianRational, SchemaError> {
        expr::parse_scalar(text).map_err(|e| self.error(path, text, &e))
    }

    fn matrix(&self, path: &str, rows: &[Vec<Scalar>]) -> Result<CMatrix, SchemaError> {
        let n = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != n) {
            return schema_err(path, "rows have different lengths");
        }
        let entries = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .enumerate()
                    .map(|(j, c)| self.scalar(&format!("{}[{}][{}]", path, i, j), &c.text()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Matrix::from_rows(entries))
    }

    /// Syntax check only, for expressions whose context is known at run time.
    fn syntax(&self, path: &str, text: &str, dialect: Dialect) -> Result<(), SchemaError> {
        expr::parse(text, dialect).map(|_| ()).map_err(|e| self.error(path, text, &e))
    }
}

fn quoted_key(path: &str, key: &str) -> String {
    format!("{}[{}]", path, serde_json::to_string(key).unwrap_or_default())
}

/// Parses and converts a problem file. `source` is the raw text, used for
/// error positions.
pub fn load(source: &str) -> Result<Problem, SchemaError> {
    let file: ProblemFile = serde_json::from_str(source).map_err(|e| SchemaError {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: strip_position(&e.to_string()),
    })?;
    from_file(file, source)
}

fn strip_position(s: &str) -> String {
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s.to_string(),
    }
}

pub fn from_file(file: ProblemFile, source: &str) -> Result<Problem, SchemaError> {
    let loc = Locator { source };
    if let Some(s) = &file.schema {
        if s != PROBLEM_SCHEMA {
            return schema_err("$.schema", format!("unsupported schema '{}', expected '{}'", s, PROBLEM_SCHEMA));
        }
    }
    let lie_dim = file.lie_algebra.as_ref().map(|l| l.dim);
    let lie = file.lie_algebra.as_ref().map(|l| lie_block(&loc, l)).transpose()?;
    let gcs = file.gcs.as_ref().map(|g| gcs_block(&loc, "$.gcs", g, lie_dim)).transpose()?;
    let transverse = file.transverse.as_ref().map(|t| transverse_block(&loc, t, lie_dim)).transpose()?;
    let metric = file.metric.as_ref().map(|m| loc.matrix("$.metric.gram", &m.gram)).transpose()?;
    let bundle = file.bundle.as_ref().map(|b| bundle_block(&loc, b)).transpose()?;
    let mut problem = Problem {
        name: file.name.clone().unwrap_or_else(|| "problem".into()),
        description: file.description.clone(),
        lie,
        nilpotent_claim: file.lie_algebra.as_ref().and_then(|l| l.nilpotent),
        gcs,
        transverse,
        metric,
        bundle,
        tasks: Vec::new(),
    };
    for (i, t) in file.tasks.iter().enumerate() {
        let path = format!("$.tasks[{}]", i);
        let call = tasks::resolve(t, &path)?;
        precheck(&loc, &call, &path, lie_dim)?;
        problem.tasks.push(call);
    }
    for call in &problem.tasks {
        tasks::check_requirements(&problem, call)?;
    }
    Ok(problem)
}

/// Syntax of expression-valued task parameters.
fn precheck(loc: &Locator, call: &TaskCall, path: &str, lie_dim: Option<usize>) -> Result<(), SchemaError> {
    for (key, v) in &call.params {
        if let (Some(s), true) = (v.as_str(), tasks::FORM_PARAMS.contains(&key.as_str())) {
            loc.syntax(&format!("{}.{}", path, key), s, Dialect::Form)?;
        }
    }
    if let Some(target) = call.params.get("target") {
        let g: GcsBlock = serde_json::from_value(target.clone())
            .map_err(|e| SchemaError { location: format!("{}.target", path), message: e.to_string() })?;
        let _ = gcs_block(loc, &format!("{}.target", path), &g, lie_dim)?;
    }
    if let Some(Value::Array(rows)) = call.params.get("psi") {
        let rows: Vec<Vec<Scalar>> = serde_json::from_value(Value::Array(rows.clone()))
            .map_err(|e| SchemaError { location: format!("{}.psi", path), message: e.to_string() })?;
        loc.matrix(&format!("{}.psi", path), &rows)?;
    }
    Ok(())
}

fn lie_block(loc: &Locator, l: &LieBlock) -> Result<Result<LieStructure, String>, SchemaError> {
    let space = BasedSpace::standard(l.dim);
    let mut table = vec![Multivector::zero(l.dim); l.dim];
    for (g, s) in &l.d {
        let path = quoted_key("$.lie_algebra.d", g);
        let k = space.index_of(g).ok_or_else(|| SchemaError {
            location: path.clone(),
            message: format!("unknown generator '{}' (expected e1..e{})", g, l.dim),
        })?;
        table[k] = loc.form(&space, &path, s)?;
    }
    Ok(LieStructure::unchecked(space, table).map_err(|e| e.to_string()))
}

/// Parses a GCS block; the space dimension comes from the matrices, the
/// block's own `dim`, or the Lie algebra.
fn gcs_block(
    loc: &Locator,
    path: &str,
    g: &GcsBlock,
    lie_dim: Option<usize>,
) -> Result<Result<GcsInput, String>, SchemaError> {
    let need_dim = |own: Option<usize>, p: &str| {
        own.or(lie_dim).ok_or_else(|| SchemaError {
            location: p.to_string(),
            message: "dimension unknown: give 'dim' or a lie_algebra block".into(),
        })
    };
    let fmt = |e: gcgw::gcs::GcsError| e.to_string();
    Ok(match g {
        GcsBlock::Matrix(rows) => {
            GCStructure::from_matrix(loc.matrix(&format!("{}.matrix", path), rows)?).map(GcsInput::Structure).map_err(fmt)
        }
        GcsBlock::Complex(rows) => {
            GCStructure::from_complex(&loc.matrix(&format!("{}.complex", path), rows)?).map(GcsInput::Structure).map_err(fmt)
        }
        GcsBlock::Blocks(b) => {
            let p = format!("{}.blocks", path);
            let j = loc.matrix(&format!("{}.J", p), &b.j)?;
            let m = j.rows();
            let space = BasedSpace::standard(m);
            let bf = match &b.b {
                Some(s) => loc.form(&space, &format!("{}.B", p), s)?,
                None => Multivector::zero(m),
            };
            let beta = match &b.beta {
                Some(rows) => loc.matrix(&format!("{}.beta", p), rows)?,
                None => Matrix::zeros(m, m),
            };
            GCStructure::from_blocks(&j, &bf, &beta).map(GcsInput::Structure).map_err(fmt)
        }
        GcsBlock::Symplectic(s) => {
            let p = format!("{}.symplectic", path);
            let space = BasedSpace::standard(need_dim(s.dim, &p)?);
            let w = loc.form(&space, &format!("{}.omega", p), &s.omega)?;
            GCStructure::from_symplectic(&w).map(GcsInput::Structure).map_err(fmt)
        }
        GcsBlock::Spinor(s) => {
            let p = format!("{}.spinor", path);
            let m = need_dim(s.dim, &p)?;
            let space = BasedSpace::standard(m);
            if let Some(rho) = &s.rho {
                if s.b.is_some() || s.omega.is_some() || s.theta.is_some() {
                    return schema_err(p, "give either 'rho' or the factors 'B', 'omega', 'theta'");
                }
                Ok(GcsInput::Spinor(PureSpinorLine::new(loc.form(&space, &format!("{}.rho", p), rho)?)))
            } else {
                let opt = |v: &Option<String>, key: &str| -> Result<Multivector, SchemaError> {
                    match v {
                        Some(t) => loc.form(&space, &format!("{}.{}", p, key), t),
                        None => Ok(Multivector::zero(m)),
                    }
                };
                let b = opt(&s.b, "B")?;
                let omega = opt(&s.omega, "omega")?;
                let theta = s
                    .theta
                    .iter()
                    .flatten()
                    .enumerate()
                    .map(|(i, t)| loc.form(&space, &format!("{}.theta[{}]", p, i), t))
                    .collect::<Result<Vec<_>, _>>()?;
                PureSpinorLine::from_factors(b, omega, theta).map(GcsInput::Spinor).map_err(fmt)
            }
        }
    })
}

fn transverse_block(loc: &Locator, t: &TransverseBlock, lie_dim: Option<usize>) -> Result<TransverseInput, SchemaError> {
    let given = [t.generators.is_some(), t.table.is_some(), t.flat.is_some()].iter().filter(|x| **x).count();
    if given != 1 {
        return schema_err("$.transverse", "give exactly one of 'generators', 'table', 'flat'");
    }
    if let Some(gens) = &t.generators {
        let m = lie_dim.ok_or_else(|| SchemaError {
            location: "$.transverse.generators".into(),
            message: "generators need a lie_algebra block".into(),
        })?;
        let space = BasedSpace::standard(m);
        let forms = gens
            .iter()
            .enumerate()
            .map(|(i, g)| loc.form(&space, &format!("$.transverse.generators[{}]", i), g))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(TransverseInput::Generators(forms));
    }
    if let Some(table) = &t.table {
        let space = abstract_space(table.len());
        let forms = table
            .iter()
            .enumerate()
            .map(|(i, g)| loc.form(&space, &format!("$.transverse.table[{}]", i), g))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(TransverseInput::Table(forms));
    }
    Ok(TransverseInput::Flat(t.flat.unwrap_or(0)))
}

/// A GCS block given as a task parameter.
pub fn gcs_value(v: &Value, lie_dim: Option<usize>) -> Result<Result<GcsInput, String>, SchemaError> {
    let g: GcsBlock =
        serde_json::from_value(v.clone()).map_err(|e| SchemaError { location: "target".into(), message: e.to_string() })?;
    gcs_block(&Locator { source: "" }, "target", &g, lie_dim)
}

/// A matrix of scalar expressions given as a task parameter.
pub fn matrix_value(v: &Value) -> Result<CMatrix, SchemaError> {
    let rows: Vec<Vec<Scalar>> =
        serde_json::from_value(v.clone()).map_err(|e| SchemaError { location: "psi".into(), message: e.to_string() })?;
    Locator { source: "" }.matrix("psi", &rows)
}

/// Labels `dz1..dzk, dzb1..dzbk` of the transverse algebra.
pub fn abstract_space(k: usize) -> BasedSpace {
    let labels = (1..=k).map(|j| format!("dz{}", j)).chain((1..=k).map(|j| format!("dzb{}", j))).collect();
    BasedSpace::with_labels(labels).expect("distinct labels")
}

fn split_key(path: &str, key: &str) -> Result<(String, String), SchemaError> {
    match key.split_once(',') {
        Some((a, b)) => Ok((a.trim().to_string(), b.trim().to_string())),
        None => schema_err(quoted_key(path, key), "overlap keys have the form \"A,B\""),
    }
}

fn bundle_block(loc: &Locator, b: &BundleBlock) -> Result<Result<BundleInput, String>, SchemaError> {
    for c in &b.charts {
        if !b.vars.contains_key(c) {
            return schema_err("$.bundle.vars", format!("no variables for chart '{}'", c));
        }
    }
    if let Some(extra) = b.vars.keys().find(|k| !b.charts.contains(k)) {
        return schema_err(quoted_key("$.bundle.vars", extra), "not a declared chart");
    }
    let known = |path: &str, c: &str| {
        if b.charts.iter().any(|x| x == c) {
            Ok(())
        } else {
            schema_err(path, format!("unknown chart '{}'", c))
        }
    };
    let leaves: Vec<&str> = b.leaves.iter().map(|s| s.as_str()).collect();
    let names = |c: &str| {
        let vs: Vec<&str> = b.vars[c].iter().map(|s| s.as_str()).collect();
        gcgw::bundles::VarNames::new(&vs, &leaves)
    };
    // syntax and variables of the coordinate changes, in the source chart
    let mut glue_owned = Vec::new();
    for (key, assignments) in &b.glue {
        let path = quoted_key("$.bundle.glue", key);
        let (from, to) = split_key("$.bundle.glue", key)?;
        known(&path, &from)?;
        known(&path, &to)?;
        let nm = names(&from);
        for (var, e) in assignments {
            let p = quoted_key(&path, var);
            if !b.vars[&to].contains(var) {
                return schema_err(p, format!("'{}' is not a variable of chart '{}'", var, to));
            }
            RF::parse(e, &nm).map_err(|err| loc.error(&p, e, &err))?;
        }
        glue_owned.push((from, to, assignments.iter().map(|(v, e)| (v.clone(), e.clone())).collect::<Vec<_>>()));
    }
    let charts: Vec<(&str, Vec<&str>)> =
        b.charts.iter().map(|c| (c.as_str(), b.vars[c].iter().map(|s| s.as_str()).collect())).collect();
    let chart_refs: Vec<(&str, &[&str])> = charts.iter().map(|(c, v)| (*c, v.as_slice())).collect();
    let assignment_refs: Vec<Vec<(&str, &str)>> =
        glue_owned.iter().map(|(_, _, a)| a.iter().map(|(v, e)| (v.as_str(), e.as_str())).collect()).collect();
    let specs: Vec<gcgw::bundles::GlueSpec> =
        glue_owned.iter().zip(&assignment_refs).map(|((f, t, _), a)| (f.as_str(), t.as_str(), a.as_slice())).collect();
    let nerve = match ChartNerve::new(&chart_refs, &leaves, &specs) {
        Ok(n) => n,
        Err(e) => return Ok(Err(e.to_string())),
    };

    let mut given = BTreeMap::new();
    for (key, rows) in &b.transition {
        let path = quoted_key("$.bundle.transition", key);
        let (from, to) = split_key("$.bundle.transition", key)?;
        known(&path, &from)?;
        known(&path, &to)?;
        let (x, y) = (nerve.index(&from).expect("known"), nerve.index(&to).expect("known"));
        if rows.len() != b.rank || rows.iter().any(|r| r.len() != b.rank) {
            return schema_err(path, format!("expected a {0}x{0} matrix", b.rank));
        }
        let mut m = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            let mut row = Vec::new();
            for (j, e) in r.iter().enumerate() {
                let t = e.text();
                let p = format!("{}[{}][{}]", path, i, j);
                row.push(nerve.parse_on_overlap(x, y, &t).map_err(|err| loc.error(&p, &t, &err))?);
            }
            m.push(row);
        }
        given.insert((x, y), Matrix::from_rows(m));
    }

    let chart_matrix = |path: &str, c: &str, rows: &[Vec<Scalar>]| -> Result<Matrix<RF>, SchemaError> {
        let a = nerve.index(c).map_err(|_| SchemaError { location: path.to_string(), message: format!("unknown chart '{}'", c) })?;
        if rows.len() != b.rank || rows.iter().any(|r| r.len() != b.rank) {
            return schema_err(path, format!("expected a {0}x{0} matrix", b.rank));
        }
        let mut m = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            let mut row = Vec::new();
            for (j, e) in r.iter().enumerate() {
                let t = e.text();
                let p = format!("{}[{}][{}]", path, i, j);
                row.push(nerve.parse_on_chart(a, &t).map_err(|err| loc.error(&p, &t, &err))?);
            }
            m.push(row);
        }
        Ok(Matrix::from_rows(m))
    };

    let mut metrics = Vec::new();
    for (n, h) in b.hermitian_metrics.iter().enumerate() {
        let path = format!("$.bundle.hermitian_metrics[{}]", n);
        let mut per_chart = Vec::new();
        for c in &b.charts {
            let rows = h.get(c).ok_or_else(|| SchemaError { location: path.clone(), message: format!("no matrix for chart '{}'", c) })?;
            per_chart.push(chart_matrix(&quoted_key(&path, c), c, rows)?);
        }
        if let Some(extra) = h.keys().find(|k| !b.charts.contains(k)) {
            return schema_err(quoted_key(&path, extra), "not a declared chart");
        }
        metrics.push(per_chart);
    }

    let shape = nerve.shape();
    let mut connections = Vec::new();
    for (n, cb) in b.connections.iter().enumerate() {
        let path = format!("$.bundle.connections[{}]", n);
        let kind = match cb.kind.as_deref() {
            None | Some("transverse") => ConnectionKind::Transverse,
            Some("smooth_generalized") => ConnectionKind::SmoothGeneralized,
            Some(other) => {
                return schema_err(
                    format!("{}.kind", path),
                    format!("unknown kind '{}' (expected transverse or smooth_generalized)", other),
                )
            }
        };
        let mut theta = Vec::new();
        for c in &b.charts {
            let p = quoted_key(&format!("{}.theta", path), c);
            let rows = cb.theta.get(c).ok_or_else(|| SchemaError { location: path.clone(), message: format!("no matrix for chart '{}'", c) })?;
            if rows.len() != b.rank || rows.iter().any(|r| r.len() != b.rank) {
                return schema_err(p, format!("expected a {0}x{0} matrix", b.rank));
            }
            let a = nerve.index(c).expect("declared chart");
            let mut entries = Vec::new();
            for (i, r) in rows.iter().enumerate() {
                let mut row = Vec::new();
                for (j, e) in r.iter().enumerate() {
                    let pe = format!("{}[{}][{}]", p, i, j);
                    row.push(RForm::parse(e, nerve.names(a), shape).map_err(|err| loc.error(&pe, e, &err))?);
                }
                entries.push(row);
            }
            theta.push(MForm::from_entries(shape, entries));
        }
        connections.push(ConnectionData { kind, theta });
    }

    Ok(TransitionCocycle::new(nerve, b.rank, given)
        .map(|cocycle| BundleInput { cocycle, metrics, connections })
        .map_err(|e| e.to_string()))
}
