//! Transition cocycles of rank-l bundles over a chart nerve.
//!
//! Local components transform by `s_a = φ_ab s_b`; `φ_ab` is written in the
//! coordinates of chart `a`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::nerve::{BundleError, ChartNerve};
use super::ratfunc::RationalFunction;
use crate::linalg::Matrix;

type RF = RationalFunction;

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionCocycle {
    nerve: ChartNerve,
    rank: usize,
    phi: BTreeMap<(usize, usize), Matrix<RF>>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OverlapCheck {
    pub charts: Vec<String>,
    pub pass: bool,
    /// The product that should be the identity, when it is not.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CocycleReport {
    pub inverse: Vec<OverlapCheck>,
    pub triple: Vec<OverlapCheck>,
    pub valid: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GhWitness {
    pub overlap: (String, String),
    pub entry: (usize, usize),
    pub variables: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GhReport {
    pub gh: bool,
    pub offending: Vec<GhWitness>,
}

impl TransitionCocycle {
    /// Takes transition matrices on some ordered overlaps; the remaining
    /// ones are obtained by inversion and composition.
    pub fn new(
        nerve: ChartNerve,
        rank: usize,
        given: BTreeMap<(usize, usize), Matrix<RF>>,
    ) -> Result<Self, BundleError> {
        let mut phi = BTreeMap::new();
        for ((a, b), m) in given {
            let err_names = (nerve.chart_name(a).to_string(), nerve.chart_name(b).to_string());
            if m.rows() != rank || m.cols() != rank {
                return Err(BundleError::Shape { from: err_names.0, to: err_names.1, rank });
            }
            let det = m.det();
            if det.is_zero() {
                return Err(BundleError::Singular {
                    from: err_names.0,
                    to: err_names.1,
                    det: det.display(nerve.names(a)),
                });
            }
            phi.insert((a, b), m);
        }
        let mut c = TransitionCocycle { nerve, rank, phi };
        c.complete()?;
        Ok(c)
    }

    /// Parses `(from, to, rows)` with entries in the variables of either chart.
    pub fn parse(nerve: ChartNerve, rank: usize, given: &[(&str, &str, Vec<Vec<&str>>)]) -> Result<Self, BundleError> {
        let mut map = BTreeMap::new();
        for (from, to, rows) in given {
            let (a, b) = (nerve.index(from)?, nerve.index(to)?);
            let rows = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|s| {
                            nerve.parse_on_overlap(a, b, s).map_err(|error| BundleError::Parse {
                                context: format!("transition {},{}", from, to),
                                error,
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            if rows.len() != rank || rows.iter().any(|r| r.len() != rank) {
                return Err(BundleError::Shape { from: from.to_string(), to: to.to_string(), rank });
            }
            map.insert((a, b), Matrix::from_rows(rows));
        }
        Self::new(nerve, rank, map)
    }

    fn complete(&mut self) -> Result<(), BundleError> {
        let n = self.nerve.len();
        loop {
            let mut changed = false;
            for a in 0..n {
                for b in 0..n {
                    if a == b || self.phi.contains_key(&(a, b)) {
                        continue;
                    }
                    if let Some(m) = self.phi.get(&(b, a)) {
                        let inv = m.inverse().expect("checked invertible");
                        let m = self.nerve.pull_matrix(a, b, &inv).ok_or_else(|| self.singular_glue(a, b))?;
                        self.phi.insert((a, b), m);
                        changed = true;
                        continue;
                    }
                    for c in 0..n {
                        if c == a || c == b {
                            continue;
                        }
                        if let (Some(ac), Some(cb)) = (self.phi.get(&(a, c)), self.phi.get(&(c, b))) {
                            let cb = self.nerve.pull_matrix(a, c, cb).ok_or_else(|| self.singular_glue(a, c))?;
                            self.phi.insert((a, b), ac.mul(&cb));
                            changed = true;
                            break;
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
                if a != b && !self.phi.contains_key(&(a, b)) {
                    return Err(BundleError::MissingGlue {
                        from: self.nerve.chart_name(a).to_string(),
                        to: self.nerve.chart_name(b).to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    fn singular_glue(&self, a: usize, b: usize) -> BundleError {
        BundleError::SingularGlue { from: self.nerve.chart_name(a).to_string(), to: self.nerve.chart_name(b).to_string() }
    }

    pub fn nerve(&self) -> &ChartNerve {
        &self.nerve
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `φ_ab`; the identity when `a == b`.
    pub fn phi(&self, a: usize, b: usize) -> Matrix<RF> {
        if a == b {
            return Matrix::identity(self.rank);
        }
        self.phi[&(a, b)].clone()
    }

    pub fn overlaps(&self) -> Vec<(usize, usize)> {
        self.phi.keys().copied().collect()
    }

    /// Ordered triples of pairwise distinct charts.
    pub fn triples(&self) -> Vec<(usize, usize, usize)> {
        let n = self.nerve.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a != b && b != c && a != c {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out
    }

    /// Applies `f` to every transition matrix and re-validates the shapes.
    pub fn map_transitions(&self, f: impl Fn(usize, usize, &Matrix<RF>) -> Matrix<RF>) -> Result<Self, BundleError> {
        let given = self.phi.iter().map(|(&(a, b), m)| ((a, b), f(a, b, m))).collect();
        Self::new(self.nerve.clone(), self.rank, given)
    }

    pub fn display_matrix(&self, a: usize, m: &Matrix<RF>) -> Vec<Vec<String>> {
        m.to_rows().iter().map(|r| r.iter().map(|f| f.display(self.nerve.names(a))).collect()).collect()
    }

    fn names(&self, charts: &[usize]) -> Vec<String> {
        charts.iter().map(|c| self.nerve.chart_name(*c).to_string()).collect()
    }
}

/// Checks `φ_ab φ_ba = I` and `φ_ab φ_bc φ_ca = I` after substitution.
pub fn validate_cocycle(c: &TransitionCocycle) -> CocycleReport {
    let nerve = c.nerve();
    let id = Matrix::<RF>::identity(c.rank());
    let check = |charts: Vec<usize>, product: Option<Matrix<RF>>| {
        let pass = product.as_ref() == Some(&id);
        let witness = if pass { None } else { product.map(|p| c.display_matrix(charts[0], &p)) };
        OverlapCheck { charts: c.names(&charts), pass, witness }
    };
    let mut inverse = Vec::new();
    for (a, b) in c.overlaps() {
        if a > b {
            continue;
        }
        let p = nerve.pull_matrix(a, b, &c.phi(b, a)).map(|m| c.phi(a, b).mul(&m));
        inverse.push(check(vec![a, b], p));
    }
    let mut triple = Vec::new();
    for (a, b, cc) in c.triples() {
        let p = (|| {
            let bc = nerve.pull_matrix(a, b, &c.phi(b, cc))?;
            let ca = nerve.pull_matrix(a, cc, &c.phi(cc, a))?;
            Some(c.phi(a, b).mul(&bc).mul(&ca))
        })();
        triple.push(check(vec![a, b, cc], p));
    }
    let valid = inverse.iter().chain(&triple).all(|x| x.pass);
    CocycleReport { inverse, triple, valid }
}

/// Lists entries depending on conjugate or leaf variables.
pub fn check_gh_cocycle(c: &TransitionCocycle) -> GhReport {
    let mut offending = Vec::new();
    for (a, b) in c.overlaps() {
        let m = c.phi(a, b);
        for i in 0..c.rank() {
            for j in 0..c.rank() {
                let bad = m[(i, j)].non_gh_vars();
                if !bad.is_empty() {
                    offending.push(GhWitness {
                        overlap: (c.nerve().chart_name(a).to_string(), c.nerve().chart_name(b).to_string()),
                        entry: (i, j),
                        variables: bad.iter().map(|v| c.nerve().names(a).name(*v)).collect(),
                    });
                }
            }
        }
    }
    GhReport { gh: offending.is_empty(), offending }
}

/// The principal `GL_l` bundle of frames, described by the same transition data.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalCocycle {
    pub group_rank: usize,
    pub nerve: ChartNerve,
    pub transitions: BTreeMap<(usize, usize), Matrix<RF>>,
}

impl PrincipalCocycle {
    pub fn from_vector_bundle(e: &TransitionCocycle) -> Self {
        PrincipalCocycle { group_rank: e.rank, nerve: e.nerve.clone(), transitions: e.phi.clone() }
    }

    pub fn to_vector_bundle(&self) -> Result<TransitionCocycle, BundleError> {
        TransitionCocycle::new(self.nerve.clone(), self.group_rank, self.transitions.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn p1() -> ChartNerve {
        ChartNerve::new(&[("U0", &["z"]), ("U1", &["w"])], &[], &[("U0", "U1", &[("w", "1/z")])]).unwrap()
    }

    #[test]
    fn degree_one_cocycle_is_valid() {
        let c = TransitionCocycle::parse(p1(), 1, &[("U0", "U1", vec![vec!["z"]])]).unwrap();
        assert!(validate_cocycle(&c).valid);
        // φ_10 = 1/z written in w is w
        assert_eq!(c.phi(1, 0)[(0, 0)], RF::parse("w", c.nerve().names(1)).unwrap());
        assert!(check_gh_cocycle(&c).gh);
    }

    #[test]
    fn broken_inverse_is_localized() {
        let c = TransitionCocycle::parse(p1(), 1, &[("U0", "U1", vec![vec!["z"]]), ("U1", "U0", vec![vec!["z"]])]).unwrap();
        let r = validate_cocycle(&c);
        assert!(!r.valid);
        assert_eq!(r.inverse[0].charts, vec!["U0", "U1"]);
        assert_eq!(r.inverse[0].witness, Some(vec![vec!["z^2".to_string()]]));
    }

    #[test]
    fn singular_transition_rejected() {
        let e = TransitionCocycle::parse(p1(), 2, &[("U0", "U1", vec![vec!["z", "1"], vec!["z^2", "z"]])]);
        assert!(matches!(e, Err(BundleError::Singular { .. })));
    }

    #[test]
    fn principal_round_trip() {
        let c = TransitionCocycle::parse(p1(), 2, &[("U0", "U1", vec![vec!["z", "1"], vec!["0", "z"]])]).unwrap();
        let p = PrincipalCocycle::from_vector_bundle(&c);
        assert_eq!(p.to_vector_bundle().unwrap(), c);
    }
}
