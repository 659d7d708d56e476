//! Atiyah cocycles and bounded searches for generalized holomorphic
//! connections.

use std::collections::BTreeMap;

use serde::Serialize;

use super::cocycle::{check_gh_cocycle, OverlapCheck, TransitionCocycle};
use super::forms::{MForm, RForm};
use super::nerve::BundleError;
use super::poly::{gcd, Monomial, Poly, Var};
use super::ratfunc::RationalFunction;
use crate::linalg::Matrix;
use crate::scalar::GaussianRational;

type RF = RationalFunction;
type C = GaussianRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    /// Coefficients free of leaf variables.
    Transverse,
    /// Leaf dependence allowed.
    SmoothGeneralized,
}

/// One matrix of (1,0)-forms per chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionData {
    pub kind: ConnectionKind,
    pub theta: Vec<MForm>,
}

impl ConnectionData {
    pub fn zero(c: &TransitionCocycle) -> Self {
        let sh = c.nerve().shape();
        ConnectionData { kind: ConnectionKind::Transverse, theta: vec![MForm::zero(sh, c.rank()); c.nerve().len()] }
    }

    pub fn display(&self, c: &TransitionCocycle) -> Vec<Vec<Vec<String>>> {
        self.theta.iter().enumerate().map(|(a, t)| t.display(c.nerve().names(a))).collect()
    }

    /// Rejects entries that are not (1,0)-forms and, for transverse data,
    /// coefficients depending on leaf variables.
    pub fn check(&self, c: &TransitionCocycle) -> Result<(), BundleError> {
        if self.theta.len() != c.nerve().len() {
            return Err(BundleError::Contract(format!(
                "connection has {} charts, nerve has {}",
                self.theta.len(),
                c.nerve().len()
            )));
        }
        for (a, t) in self.theta.iter().enumerate() {
            let chart = c.nerve().chart_name(a).to_string();
            if t.rank() != c.rank() {
                return Err(BundleError::Connection { chart, message: format!("expected a {0}x{0} matrix", c.rank()) });
            }
            if !t.is_of_type(1, 0) && !t.is_zero() {
                return Err(BundleError::Connection { chart, message: "entries must be (1,0)-forms".into() });
            }
            if self.kind == ConnectionKind::Transverse && t.entries().iter().flatten().any(|e| e.has_leaf_variables()) {
                return Err(BundleError::Connection {
                    chart,
                    message: "transverse connection depends on a leaf variable".into(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtiyahData {
    /// `ξ_ab = ∂φ_ab · φ_ab⁻¹`.
    pub xi: BTreeMap<(usize, usize), MForm>,
    /// `b_ab = φ_ab · ∂(φ_ab⁻¹)`, the cocycle of the vector bundle.
    pub b: BTreeMap<(usize, usize), MForm>,
    /// Overlaps where `b_ab = −ξ_ab` holds.
    pub sign_theorem: Vec<OverlapCheck>,
    /// `ξ_ac = ξ_ab + φ_ab ξ_bc φ_ab⁻¹` on triples (`c = a` allowed).
    pub twisted_cocycle: Vec<OverlapCheck>,
}

impl AtiyahData {
    pub fn passed(&self) -> bool {
        self.sign_theorem.iter().chain(&self.twisted_cocycle).all(|c| c.pass)
    }

    pub fn xi(&self, a: usize, b: usize, c: &TransitionCocycle) -> MForm {
        self.xi.get(&(a, b)).cloned().unwrap_or_else(|| MForm::zero(c.nerve().shape(), c.rank()))
    }
}

/// Derivatives are taken in the holomorphic variables only.
pub fn atiyah_cocycles(c: &TransitionCocycle) -> Result<AtiyahData, BundleError> {
    let gh = check_gh_cocycle(c);
    if !gh.gh {
        let w = &gh.offending[0];
        return Err(BundleError::NotGh(format!(
            "entry {:?} on {},{} depends on {}",
            w.entry,
            w.overlap.0,
            w.overlap.1,
            w.variables.join(", ")
        )));
    }
    let nerve = c.nerve();
    let sh = nerve.shape();
    let names = |v: &[usize]| v.iter().map(|a| nerve.chart_name(*a).to_string()).collect::<Vec<_>>();
    let mut xi = BTreeMap::new();
    let mut b = BTreeMap::new();
    let mut sign_theorem = Vec::new();
    for (x, y) in c.overlaps() {
        let phi = c.phi(x, y);
        let inv = phi.inverse().expect("valid cocycle");
        let f = MForm::functions(sh, &phi);
        let finv = MForm::functions(sh, &inv);
        let xv = f.d_lbar().wedge(&finv);
        let bv = f.wedge(&finv.d_lbar());
        sign_theorem.push(OverlapCheck { charts: names(&[x, y]), pass: bv == xv.neg(), witness: None });
        xi.insert((x, y), xv);
        b.insert((x, y), bv);
    }
    let mut data = AtiyahData { xi, b, sign_theorem, twisted_cocycle: Vec::new() };
    let n = nerve.len();
    for a in 0..n {
        for m in 0..n {
            for z in 0..n {
                if a == m || m == z {
                    continue;
                }
                let lhs = data.xi(a, z, c);
                let pass = nerve
                    .pull_mform(a, m, &data.xi(m, z, c))
                    .map(|p| {
                        let phi = c.phi(a, m);
                        data.xi(a, m, c).add(&p.sandwich(&phi, &phi.inverse().unwrap()))
                    })
                    .map(|rhs| rhs == lhs)
                    .unwrap_or(false);
                data.twisted_cocycle.push(OverlapCheck { charts: names(&[a, m, z]), pass, witness: None });
            }
        }
    }
    Ok(data)
}

/// `φ_ab Θ_b φ_ab⁻¹ − Θ_a` in the coordinates of `a`.
pub fn coboundary(c: &TransitionCocycle, theta: &[MForm], a: usize, b: usize) -> Option<MForm> {
    let phi = c.phi(a, b);
    let pulled = c.nerve().pull_mform(a, b, &theta[b])?;
    Some(pulled.sandwich(&phi, &phi.inverse()?).sub(&theta[a]))
}

/// Checks the law `ξ_ab = φ_ab Θ_b φ_ab⁻¹ − Θ_a` on every ordered overlap.
pub fn check_connection_law(c: &TransitionCocycle, xi: &AtiyahData, conn: &ConnectionData) -> Vec<OverlapCheck> {
    c.overlaps()
        .into_iter()
        .map(|(a, b)| {
            let got = coboundary(c, &conn.theta, a, b);
            let want = xi.xi(a, b, c);
            let pass = got.as_ref() == Some(&want);
            let witness = if pass { None } else { got.map(|g| g.sub(&want).display(c.nerve().names(a))) };
            OverlapCheck {
                charts: vec![c.nerve().chart_name(a).to_string(), c.nerve().chart_name(b).to_string()],
                pass,
                witness,
            }
        })
        .collect()
}

/// (overlap a, overlap b, row, col, blade, monomial)
type EquationKey = (usize, usize, usize, usize, u64, Monomial);

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Found(ConnectionData),
    /// No solution among polynomial coefficients of degree at most `bound`.
    /// This is not a proof of nonexistence.
    NotFoundWithinBound { bound: u32, unknowns: usize, equations: usize },
}

fn monomials(k: usize, bound: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::new()];
    for j in 0..k {
        let mut next = Vec::new();
        for m in &out {
            let used: u32 = m.values().sum();
            for e in 0..=(bound - used) {
                let mut m2 = m.clone();
                if e > 0 {
                    m2.insert(Var::Holo(j), e);
                }
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

/// Solves the coboundary law for `Θ` whose entries are `Σ c · z^α dz_j` with
/// `|α| ≤ degree_bound`. The ansatz uses coefficients regular on each chart.
pub fn gh_connection_search(
    c: &TransitionCocycle,
    xi: &AtiyahData,
    degree_bound: i64,
) -> Result<SearchOutcome, BundleError> {
    if degree_bound < 0 {
        return Err(BundleError::Contract(format!("degree bound must be nonnegative, got {}", degree_bound)));
    }
    let bound = degree_bound as u32;
    let nerve = c.nerve();
    let sh = nerve.shape();
    let (l, k, n) = (c.rank(), nerve.k(), nerve.len());
    let monos = monomials(k, bound);

    // unknown = (chart, row, col, dz index, monomial)
    let mut unknowns = Vec::new();
    for a in 0..n {
        for i in 0..l {
            for j in 0..l {
                for d in 0..k {
                    for m in &monos {
                        unknowns.push((a, i, j, d, m.clone()));
                    }
                }
            }
        }
    }
    let basis_form = |u: &(usize, usize, usize, usize, Monomial)| {
        let mut t = MForm::zero(sh, l);
        let f = RF::poly(Poly::from_terms([(u.4.clone(), C::one())]));
        let mut entries = t.entries().to_vec();
        entries[u.1][u.2] = RForm::term(sh, sh.dz(u.3), f);
        t = MForm::from_entries(sh, entries);
        t
    };

    // equations keyed by (overlap, row, col, blade, monomial)
    let mut rows: BTreeMap<EquationKey, (BTreeMap<usize, C>, C)> = BTreeMap::new();
    for (a, b) in c.overlaps() {
        if a > b {
            continue;
        }
        let phi = c.phi(a, b);
        let inv = phi.inverse().expect("valid cocycle");
        // per unknown, its contribution to this overlap
        let mut contributions: Vec<(usize, MForm)> = Vec::new();
        for (ui, u) in unknowns.iter().enumerate() {
            if u.0 == b {
                let p = nerve.pull_mform(a, b, &basis_form(u)).ok_or_else(|| BundleError::SingularGlue {
                    from: nerve.chart_name(a).to_string(),
                    to: nerve.chart_name(b).to_string(),
                })?;
                contributions.push((ui, p.sandwich(&phi, &inv)));
            } else if u.0 == a {
                contributions.push((ui, basis_form(u).neg()));
            }
        }
        let target = xi.xi(a, b, c);
        for i in 0..l {
            for j in 0..l {
                let mut blades: Vec<u64> = target.entry(i, j).terms().map(|(bl, _)| bl).collect();
                for (_, f) in &contributions {
                    blades.extend(f.entry(i, j).terms().map(|(bl, _)| bl));
                }
                blades.sort();
                blades.dedup();
                for bl in blades {
                    let rhs = target.entry(i, j).coeff(bl);
                    let coeffs: Vec<(usize, RF)> = contributions
                        .iter()
                        .map(|(ui, f)| (*ui, f.entry(i, j).coeff(bl)))
                        .filter(|(_, f)| !f.is_zero())
                        .collect();
                    let den = coeffs.iter().fold(rhs.den().clone(), |acc, (_, f)| lcm(&acc, f.den()));
                    let scale = |f: &RF| f.num().mul(&den.div_exact(f.den()).expect("lcm"));
                    for (mono, cf) in scale(&rhs).terms() {
                        rows.entry((a, b, i, j, bl, mono.clone())).or_insert_with(|| (BTreeMap::new(), C::zero())).1 =
                            cf.clone();
                    }
                    for (ui, f) in &coeffs {
                        for (mono, cf) in scale(f).terms() {
                            let e = rows.entry((a, b, i, j, bl, mono.clone())).or_insert_with(|| (BTreeMap::new(), C::zero()));
                            let v = e.0.entry(*ui).or_insert_with(C::zero);
                            *v += cf;
                        }
                    }
                }
            }
        }
    }
    let nu = unknowns.len();
    let neq = rows.len();
    let mut m = Matrix::<C>::zeros(neq, nu);
    let mut rhs = vec![C::zero(); neq];
    for (r, (_, (cs, b))) in rows.into_iter().enumerate() {
        for (u, v) in cs {
            m[(r, u)] = v;
        }
        rhs[r] = b;
    }
    let Some(x) = (if neq == 0 { Some(vec![C::zero(); nu]) } else { m.solve(&rhs) }) else {
        return Ok(SearchOutcome::NotFoundWithinBound { bound, unknowns: nu, equations: neq });
    };
    let mut theta = vec![MForm::zero(sh, l); n];
    for (u, v) in unknowns.iter().zip(&x) {
        if v.is_zero() {
            continue;
        }
        theta[u.0] = theta[u.0].add(&basis_form(u).scale(&RF::constant(v.clone())));
    }
    let conn = ConnectionData { kind: ConnectionKind::Transverse, theta };
    if !check_connection_law(c, xi, &conn).iter().all(|o| o.pass) {
        return Err(BundleError::Contract("linear solution does not satisfy the coboundary law".into()));
    }
    Ok(SearchOutcome::Found(conn))
}

fn lcm(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() {
        return b.clone();
    }
    if b.is_constant() {
        return a.clone();
    }
    a.mul(&b.div_exact(&gcd(a, b)).expect("gcd divides"))
}
