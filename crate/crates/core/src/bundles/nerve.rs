//! Charts and coordinate changes on their overlaps.

use std::collections::BTreeMap;

use thiserror::Error;

use super::forms::{FormShape, MForm, RForm};
use super::poly::{Poly, Var, VarNames};
use super::ratfunc::RationalFunction;
use crate::expr::ParseError;
use crate::linalg::Matrix;

type RF = RationalFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error("parse error in {context}: {error}")]
    Parse { context: String, error: ParseError },
    #[error("unknown chart '{0}'")]
    UnknownChart(String),
    #[error("chart '{chart}' has {found} transverse variables, expected {expected}")]
    ChartDimension { chart: String, found: usize, expected: usize },
    #[error("coordinate change {from}->{to} is not generalized holomorphic (depends on {witness})")]
    NonHolomorphicGlue { from: String, to: String, witness: String },
    #[error("coordinate change {from}->{to} must give every variable of '{to}'")]
    IncompleteGlue { from: String, to: String },
    #[error("cannot determine the coordinate change {from}->{to}")]
    MissingGlue { from: String, to: String },
    #[error("coordinate changes {from}<->{to} are not mutually inverse")]
    GlueNotInverse { from: String, to: String },
    #[error("coordinate change {from}->{to} is singular")]
    SingularGlue { from: String, to: String },
    #[error("transition on {from},{to} is not a {rank}x{rank} matrix")]
    Shape { from: String, to: String, rank: usize },
    #[error("transition on {from},{to} is not invertible (determinant {det})")]
    Singular { from: String, to: String, det: String },
    #[error("cocycle is not generalized holomorphic: {0}")]
    NotGh(String),
    #[error("connection on chart '{chart}': {message}")]
    Connection { chart: String, message: String },
    #[error("metric on chart '{chart}': {message}")]
    Metric { chart: String, message: String },
    #[error("{0}")]
    Contract(String),
}

/// `(from, to, [(variable of to, expression in from)])`.
pub type GlueSpec<'a> = (&'a str, &'a str, &'a [(&'a str, &'a str)]);

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub name: String,
    pub names: VarNames,
}

/// Charts with holomorphic coordinate changes. `glue[(a, b)]` expresses the
/// coordinates of `b` as functions of those of `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartNerve {
    charts: Vec<Chart>,
    k: usize,
    leaves: usize,
    glue: BTreeMap<(usize, usize), Vec<RF>>,
}

impl ChartNerve {
    /// Builds a nerve from textual glue maps `(from, to, [(var_of_to, expr_in_from)])`.
    /// Missing directions are filled by inverting one-variable Möbius maps
    /// and by composing along other charts.
    pub fn new(
        charts: &[(&str, &[&str])],
        leaves: &[&str],
        glue: &[GlueSpec],
    ) -> Result<Self, BundleError> {
        let k = charts.first().map(|c| c.1.len()).unwrap_or(0);
        let mut out = ChartNerve {
            charts: charts.iter().map(|(n, vs)| Chart { name: n.to_string(), names: VarNames::new(vs, leaves) }).collect(),
            k,
            leaves: leaves.len(),
            glue: BTreeMap::new(),
        };
        for c in &out.charts {
            if c.names.holo.len() != k {
                return Err(BundleError::ChartDimension { chart: c.name.clone(), found: c.names.holo.len(), expected: k });
            }
        }
        for (from, to, assignments) in glue {
            let (a, b) = (out.index(from)?, out.index(to)?);
            let mut images = vec![None; k];
            for (var, expr) in assignments.iter() {
                let j = out.charts[b].names.holo.iter().position(|h| h == var).ok_or_else(|| BundleError::Parse {
                    context: format!("glue {}->{}", from, to),
                    error: ParseError { pos: 0, message: format!("'{}' is not a variable of chart '{}'", var, to) },
                })?;
                let f = RF::parse(expr, &out.charts[a].names)
                    .map_err(|error| BundleError::Parse { context: format!("glue {}->{} for {}", from, to, var), error })?;
                images[j] = Some(f);
            }
            let images: Vec<RF> = images
                .into_iter()
                .collect::<Option<_>>()
                .ok_or_else(|| BundleError::IncompleteGlue { from: from.to_string(), to: to.to_string() })?;
            out.insert_glue(a, b, images)?;
        }
        out.complete()?;
        out.verify()?;
        Ok(out)
    }

    /// A single chart with no overlaps.
    pub fn single(name: &str, vars: &[&str], leaves: &[&str]) -> Self {
        ChartNerve {
            charts: vec![Chart { name: name.to_string(), names: VarNames::new(vars, leaves) }],
            k: vars.len(),
            leaves: leaves.len(),
            glue: BTreeMap::new(),
        }
    }

    fn insert_glue(&mut self, a: usize, b: usize, images: Vec<RF>) -> Result<(), BundleError> {
        for f in &images {
            if let Some(v) = f.non_gh_vars().first() {
                return Err(BundleError::NonHolomorphicGlue {
                    from: self.charts[a].name.clone(),
                    to: self.charts[b].name.clone(),
                    witness: self.charts[a].names.name(*v),
                });
            }
        }
        self.glue.insert((a, b), images);
        Ok(())
    }

    fn complete(&mut self) -> Result<(), BundleError> {
        let n = self.charts.len();
        loop {
            let mut changed = false;
            for a in 0..n {
                for b in 0..n {
                    if a == b || self.glue.contains_key(&(a, b)) {
                        continue;
                    }
                    if let Some(g) = self.glue.get(&(b, a)).and_then(|g| invert_mobius(g)) {
                        self.glue.insert((a, b), g);
                        changed = true;
                        continue;
                    }
                    for c in 0..n {
                        if c == a || c == b {
                            continue;
                        }
                        if let (Some(ac), Some(cb)) = (self.glue.get(&(a, c)), self.glue.get(&(c, b))) {
                            let sub = self.substitution(ac);
                            let composed: Option<Vec<RF>> = cb.iter().map(|f| f.substitute(&sub)).collect();
                            if let Some(g) = composed {
                                self.glue.insert((a, b), g);
                                changed = true;
                                break;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a != b && !self.glue.contains_key(&(a, b)) {
                    return Err(BundleError::MissingGlue { from: self.charts[a].name.clone(), to: self.charts[b].name.clone() });
                }
            }
        }
        Ok(())
    }

    fn verify(&self) -> Result<(), BundleError> {
        for (&(a, b), g) in &self.glue {
            if a > b {
                continue;
            }
            let back = &self.glue[&(b, a)];
            let err = || BundleError::GlueNotInverse { from: self.charts[a].name.clone(), to: self.charts[b].name.clone() };
            let sub = self.substitution(g);
            for (j, f) in back.iter().enumerate() {
                if f.substitute(&sub).ok_or_else(err)? != RF::var(Var::Holo(j)) {
                    return Err(err());
                }
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn shape(&self) -> FormShape {
        FormShape { k: self.k, leaves: self.leaves }
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart_name(&self, a: usize) -> &str {
        &self.charts[a].name
    }

    pub fn names(&self, a: usize) -> &VarNames {
        &self.charts[a].names
    }

    pub fn index(&self, name: &str) -> Result<usize, BundleError> {
        self.charts.iter().position(|c| c.name == name).ok_or_else(|| BundleError::UnknownChart(name.to_string()))
    }

    pub fn glue(&self, a: usize, b: usize) -> Option<&[RF]> {
        self.glue.get(&(a, b)).map(|v| v.as_slice())
    }

    /// Ordered pairs of distinct charts.
    pub fn overlaps(&self) -> Vec<(usize, usize)> {
        self.glue.keys().copied().collect()
    }

    fn substitution(&self, images: &[RF]) -> BTreeMap<Var, RF> {
        let mut m = BTreeMap::new();
        for (j, f) in images.iter().enumerate() {
            m.insert(Var::Holo(j), f.clone());
            m.insert(Var::Conj(j), f.conj());
        }
        m
    }

    /// Rewrites a function on chart `b` in the coordinates of chart `a`.
    pub fn pull(&self, a: usize, b: usize, f: &RF) -> Option<RF> {
        if a == b {
            return Some(f.clone());
        }
        f.substitute(&self.substitution(self.glue(a, b)?))
    }

    pub fn pull_matrix(&self, a: usize, b: usize, m: &Matrix<RF>) -> Option<Matrix<RF>> {
        let rows = m
            .to_rows()
            .iter()
            .map(|r| r.iter().map(|f| self.pull(a, b, f)).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Some(Matrix::from_rows(rows))
    }

    /// Rewrites a form on chart `b` in the coordinates of chart `a`.
    pub fn pull_form(&self, a: usize, b: usize, w: &RForm) -> Option<RForm> {
        if a == b {
            return Some(w.clone());
        }
        let sh = self.shape();
        let g = self.glue(a, b)?;
        let mut images = Vec::with_capacity(2 * self.k + self.leaves);
        for gj in g {
            let mut dw = RForm::zero(sh);
            for i in 0..self.k {
                dw.add_term(sh.dz(i), &gj.derivative(Var::Holo(i)));
            }
            images.push(dw);
        }
        for j in 0..self.k {
            let c = images[j].conj();
            images.push(c);
        }
        for l in 0..self.leaves {
            images.push(RForm::term(sh, sh.dp(l), RF::one()));
        }
        w.transform(sh, &self.substitution(g), &images)
    }

    pub fn pull_mform(&self, a: usize, b: usize, m: &MForm) -> Option<MForm> {
        m.try_map(|w| self.pull_form(a, b, w))
    }

    /// Parses a function written in the variables of chart `a` and/or `b`,
    /// returning it in the variables of `a`.
    pub fn parse_on_overlap(&self, a: usize, b: usize, s: &str) -> Result<RF, ParseError> {
        let na = &self.charts[a].names;
        if a == b {
            return RF::parse(s, na);
        }
        let nb = &self.charts[b].names;
        let mut holo = na.holo.clone();
        holo.extend(nb.holo.iter().cloned());
        let joint = VarNames { holo, leaf: na.leaf.clone() };
        let f = RF::parse(s, &joint)?;
        let g = self.glue(a, b).expect("complete nerve");
        let mut sub = BTreeMap::new();
        for (j, gj) in g.iter().enumerate() {
            sub.insert(Var::Holo(self.k + j), gj.clone());
            sub.insert(Var::Conj(self.k + j), gj.conj());
        }
        f.substitute(&sub).ok_or(ParseError { pos: 0, message: "expression is singular on the overlap".into() })
    }

    pub fn parse_on_chart(&self, a: usize, s: &str) -> Result<RF, ParseError> {
        RF::parse(s, &self.charts[a].names)
    }
}

/// Inverts `w = (αz + β)/(γz + δ)` in one variable.
fn invert_mobius(g: &[RF]) -> Option<Vec<RF>> {
    if g.len() != 1 {
        return None;
    }
    let z = Var::Holo(0);
    let (num, den) = (g[0].num(), g[0].den());
    if num.degree_in(z) > 1 || den.degree_in(z) > 1 || !g[0].vars().iter().all(|v| *v == z) {
        return None;
    }
    let c = |p: &Poly, i: usize| p.coeffs_in(z).get(i).cloned().unwrap_or_else(Poly::zero);
    let (alpha, beta, gamma, delta) = (c(num, 1), c(num, 0), c(den, 1), c(den, 0));
    let w = Poly::var(z);
    let n = delta.mul(&w).sub(&beta);
    let d = alpha.sub(&gamma.mul(&w));
    if alpha.mul(&delta).sub(&beta.mul(&gamma)).is_zero() {
        return None;
    }
    Some(vec![RF::new(n, d)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> ChartNerve {
        ChartNerve::new(&[("U0", &["z"]), ("U1", &["w"])], &[], &[("U0", "U1", &[("w", "1/z")])]).unwrap()
    }

    #[test]
    fn mobius_completion() {
        let n = p1();
        assert_eq!(n.glue(1, 0).unwrap()[0], RF::parse("1/w", n.names(1)).unwrap());
        let n = ChartNerve::new(&[("A", &["z"]), ("B", &["w"])], &[], &[("A", "B", &[("w", "(2z + 1)/(z - 3)")])]).unwrap();
        let back = n.glue(1, 0).unwrap()[0].clone();
        assert_eq!(back, RF::parse("(3w + 1)/(w - 2)", n.names(1)).unwrap());
    }

    #[test]
    fn form_pullback() {
        let n = p1();
        let sh = n.shape();
        // dw/w on U1 is −dz/z on U0
        let w = RForm::term(sh, sh.dz(0), RF::parse("1/w", n.names(1)).unwrap());
        let pulled = n.pull_form(0, 1, &w).unwrap();
        assert_eq!(pulled, RForm::term(sh, sh.dz(0), RF::parse("-1/z", n.names(0)).unwrap()));
        let area = RForm::term(sh, sh.dz(0) | sh.dzbar(0), RF::one());
        let pulled = n.pull_form(0, 1, &area).unwrap();
        assert_eq!(pulled.coeff(sh.dz(0) | sh.dzbar(0)), RF::parse("1/(z^2 zbar^2)", n.names(0)).unwrap());
    }

    #[test]
    fn rejects_bad_glue() {
        let e = ChartNerve::new(&[("U0", &["z"]), ("U1", &["w"])], &[], &[("U0", "U1", &[("w", "zbar")])]);
        assert!(matches!(e, Err(BundleError::NonHolomorphicGlue { .. })));
        let e = ChartNerve::new(
            &[("U0", &["z"]), ("U1", &["w"])],
            &[],
            &[("U0", "U1", &[("w", "1/z")]), ("U1", "U0", &[("z", "w")])],
        );
        assert!(matches!(e, Err(BundleError::GlueNotInverse { .. })));
    }

    #[test]
    fn composition_on_p2() {
        let n = ChartNerve::new(
            &[("U0", &["z1", "z2"]), ("U1", &["w1", "w2"]), ("U2", &["u1", "u2"])],
            &[],
            &[
                ("U0", "U1", &[("w1", "1/z1"), ("w2", "z2/z1")]),
                ("U1", "U0", &[("z1", "1/w1"), ("z2", "w2/w1")]),
                ("U0", "U2", &[("u1", "1/z2"), ("u2", "z1/z2")]),
                ("U2", "U0", &[("z1", "u2/u1"), ("z2", "1/u1")]),
            ],
        )
        .unwrap();
        // U1 -> U2: u1 = 1/z2 = w1/w2, u2 = z1/z2 = 1/w2
        let g = n.glue(1, 2).unwrap();
        assert_eq!(g[0], RF::parse("w1/w2", n.names(1)).unwrap());
        assert_eq!(g[1], RF::parse("1/w2", n.names(1)).unwrap());
    }
}
