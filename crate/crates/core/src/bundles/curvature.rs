//! Curvature, Chern–Weil forms, transgression and Chern connections.

use serde::Serialize;

use super::atiyah::{atiyah_cocycles, check_connection_law, AtiyahData, ConnectionData, ConnectionKind};
use super::cocycle::{OverlapCheck, TransitionCocycle};
use super::forms::{form_det, FormShape, MForm, RForm};
use super::nerve::BundleError;
use super::poly::Var;
use super::ratfunc::RationalFunction;
use crate::linalg::Matrix;

type RF = RationalFunction;

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureData {
    /// `Ω = D̃Θ + Θ∧Θ`.
    pub omega: Vec<MForm>,
    /// `Ω^{1,1} = d_L Θ`.
    pub omega11: Vec<MForm>,
    /// `Ω^{1,1}_a = φ_ab Ω^{1,1}_b φ_ab⁻¹` per ordered overlap.
    pub equivariance: Vec<OverlapCheck>,
}

pub fn curvature(c: &TransitionCocycle, conn: &ConnectionData) -> Result<CurvatureData, BundleError> {
    conn.check(c)?;
    let omega: Vec<MForm> = conn.theta.iter().map(|t| t.d().add(&t.wedge(t))).collect();
    let omega11: Vec<MForm> = conn.theta.iter().map(|t| t.d_l()).collect();
    let equivariance = overlap_checks(c, |a, b| {
        let phi = c.phi(a, b);
        let p = c.nerve().pull_mform(a, b, &omega11[b])?;
        Some(p.sandwich(&phi, &phi.inverse()?) == omega11[a])
    });
    Ok(CurvatureData { omega, omega11, equivariance })
}

fn overlap_checks(c: &TransitionCocycle, f: impl Fn(usize, usize) -> Option<bool>) -> Vec<OverlapCheck> {
    c.overlaps()
        .into_iter()
        .map(|(a, b)| OverlapCheck {
            charts: vec![c.nerve().chart_name(a).to_string(), c.nerve().chart_name(b).to_string()],
            pass: f(a, b).unwrap_or(false),
            witness: None,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChernConvention {
    /// `det(I + tA/2πi)`.
    Principal,
    /// `det(I − tA/2πi)`.
    #[default]
    Vector,
}

impl ChernConvention {
    pub fn sign(self, k: usize) -> i64 {
        match self {
            ChernConvention::Principal => 1,
            ChernConvention::Vector if k % 2 == 1 => -1,
            ChernConvention::Vector => 1,
        }
    }
}

/// `(2πi)^{-exponent} · forms[a]` on each chart.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicClass {
    pub degree: usize,
    pub exponent: usize,
    pub convention: ChernConvention,
    pub forms: Vec<RForm>,
    pub closed: Vec<bool>,
    pub agreement: Vec<OverlapCheck>,
}

impl CharacteristicClass {
    pub fn passed(&self) -> bool {
        self.closed.iter().all(|c| *c) && self.agreement.iter().all(|c| c.pass)
    }

    pub fn display(&self, c: &TransitionCocycle) -> Vec<String> {
        self.forms
            .iter()
            .enumerate()
            .map(|(a, f)| {
                let body = f.display(c.nerve().names(a));
                if self.exponent == 0 || f.is_zero() {
                    body
                } else {
                    format!("(2*pi*i)^-{} * ({})", self.exponent, body)
                }
            })
            .collect()
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn restrict(m: &MForm, s: &[usize]) -> Vec<Vec<RForm>> {
    s.iter().map(|&i| s.iter().map(|&j| m.entry(i, j).clone()).collect()).collect()
}

/// `f_k(A)`, the sum of principal `k × k` minors (coefficient of `t^k` in
/// `det(I + tA)`), for a matrix of even forms.
pub fn elementary_invariant(a: &MForm, k: usize) -> RForm {
    let sh = a.shape();
    subsets(a.rank(), k).iter().fold(RForm::zero(sh), |acc, s| acc.add(&form_det(&restrict(a, s), sh)))
}

pub fn chern_weil(
    c: &TransitionCocycle,
    omega11: &[MForm],
    k: usize,
    convention: ChernConvention,
) -> Result<CharacteristicClass, BundleError> {
    for (a, w) in omega11.iter().enumerate() {
        let dw = w.d_l();
        if !dw.is_zero() {
            return Err(BundleError::Connection {
                chart: c.nerve().chart_name(a).to_string(),
                message: format!("curvature is not d_L-closed: d_L Ω = {:?}", dw.display(c.nerve().names(a))),
            });
        }
    }
    let sign = RF::from_int(convention.sign(k));
    let forms: Vec<RForm> = omega11.iter().map(|w| elementary_invariant(w, k).scale(&sign)).collect();
    let closed = forms.iter().map(|f| f.d_l().is_zero()).collect();
    let agreement = overlap_checks(c, |a, b| Some(c.nerve().pull_form(a, b, &forms[b])? == forms[a]));
    Ok(CharacteristicClass { degree: k, exponent: k, convention, forms, closed, agreement })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransgressionReport {
    /// `T` with `f(Ω'^{1,1}) − f(Ω^{1,1}) = d_L T`, same normalization as the classes.
    pub t: Vec<RForm>,
    pub exact: Vec<bool>,
    pub agreement: Vec<OverlapCheck>,
    pub admissible: [Vec<OverlapCheck>; 2],
}

impl TransgressionReport {
    pub fn passed(&self) -> bool {
        self.exact.iter().all(|x| *x)
            && self.agreement.iter().chain(&self.admissible[0]).chain(&self.admissible[1]).all(|c| c.pass)
    }
}

/// `T = ∫_0^1 Σ_{|S|=k} Σ_{i∈S} det(Ω_t|_S with row i replaced by ω|_S) dt`
/// where `ω = Θ' − Θ` and `Ω_t = d_L(Θ + tω)`.
pub fn transgression(
    c: &TransitionCocycle,
    at: &AtiyahData,
    conn0: &ConnectionData,
    conn1: &ConnectionData,
    k: usize,
    convention: ChernConvention,
) -> Result<TransgressionReport, BundleError> {
    conn0.check(c)?;
    conn1.check(c)?;
    let sh = c.nerve().shape();
    let t = RF::var(Var::Param);
    let sign = RF::from_int(convention.sign(k));
    let mut forms = Vec::new();
    let mut exact = Vec::new();
    for (th0, th1) in conn0.theta.iter().zip(&conn1.theta) {
        let omega = th1.sub(th0);
        let om_t = th0.d_l().add(&omega.d_l().scale(&t));
        let mut integrand = RForm::zero(sh);
        for s in subsets(c.rank(), k) {
            for (pos, _) in s.iter().enumerate() {
                let mut rows = restrict(&om_t, &s);
                rows[pos] = restrict(&omega, &s)[pos].clone();
                integrand = integrand.add(&form_det(&rows, sh));
            }
        }
        let tf = integrand
            .map_coeffs(|f| f.integrate_param())
            .ok_or_else(|| BundleError::Contract("transgression integrand is not polynomial in t".into()))?
            .scale(&sign);
        let f0 = elementary_invariant(&th0.d_l(), k).scale(&sign);
        let f1 = elementary_invariant(&th1.d_l(), k).scale(&sign);
        exact.push(f1.sub(&f0) == tf.d_l());
        forms.push(tf);
    }
    let agreement = overlap_checks(c, |a, b| Some(c.nerve().pull_form(a, b, &forms[b])? == forms[a]));
    let admissible = [check_connection_law(c, at, conn0), check_connection_law(c, at, conn1)];
    Ok(TransgressionReport { t: forms, exact, agreement, admissible })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChernData {
    pub connection: ConnectionData,
    pub curvature: CurvatureData,
    /// `h_b = φ_abᵀ h_a φ̄_ab` per ordered overlap.
    pub metric_compatible: Vec<OverlapCheck>,
    /// `Ω = Ω^{1,1}` of type (1,1) on every chart.
    pub type_11: bool,
    /// `Ωᵀ h + h Ω̄ = 0` on every chart.
    pub skew_hermitian: bool,
    /// Coboundary law against the Atiyah cocycle, when the cocycle is GH.
    pub law: Vec<OverlapCheck>,
}

impl ChernData {
    pub fn passed(&self) -> bool {
        self.type_11
            && self.skew_hermitian
            && self.metric_compatible.iter().chain(&self.law).chain(&self.curvature.equivariance).all(|c| c.pass)
    }
}

fn conj_matrix(m: &Matrix<RF>) -> Matrix<RF> {
    m.map(|f| f.conj())
}

/// `θ_a = h̄_a⁻¹ ∂h̄_a` for per-chart hermitian metrics `h_a`.
pub fn chern_connection(c: &TransitionCocycle, metrics: &[Matrix<RF>]) -> Result<ChernData, BundleError> {
    let nerve = c.nerve();
    let sh: FormShape = nerve.shape();
    if metrics.len() != nerve.len() {
        return Err(BundleError::Contract(format!("{} metrics for {} charts", metrics.len(), nerve.len())));
    }
    let mut theta = Vec::new();
    for (a, h) in metrics.iter().enumerate() {
        let err = |message: &str| BundleError::Metric { chart: nerve.chart_name(a).to_string(), message: message.into() };
        if h.rows() != c.rank() || h.cols() != c.rank() {
            return Err(err("wrong size"));
        }
        if conj_matrix(h).transpose() != *h {
            return Err(err("not hermitian"));
        }
        if h.to_rows().iter().flatten().any(|f| f.vars().iter().any(|v| matches!(v, Var::Leaf(_)))) {
            return Err(err("depends on a leaf variable"));
        }
        let hb = conj_matrix(h);
        let inv = hb.inverse().ok_or_else(|| err("degenerate"))?;
        theta.push(MForm::functions(sh, &inv).wedge(&MForm::functions(sh, &hb).d_lbar()));
    }
    let connection = ConnectionData { kind: ConnectionKind::Transverse, theta };
    let curv = curvature(c, &connection)?;
    let metric_compatible = overlap_checks(c, |a, b| {
        let phi = c.phi(a, b);
        Some(nerve.pull_matrix(a, b, &metrics[b])? == phi.transpose().mul(&metrics[a]).mul(&conj_matrix(&phi)))
    });
    let type_11 = curv.omega.iter().zip(&curv.omega11).all(|(o, o11)| o == o11 && o11.is_of_type(1, 1));
    let skew_hermitian = curv.omega.iter().zip(metrics).all(|(o, h)| {
        let hm = MForm::functions(sh, h);
        o.transpose().wedge(&hm).add(&hm.wedge(&o.conj())).is_zero()
    });
    let law = match atiyah_cocycles(c) {
        Ok(at) => check_connection_law(c, &at, &connection),
        Err(_) => Vec::new(),
    };
    Ok(ChernData { connection, curvature: curv, metric_compatible, type_11, skew_hermitian, law })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::nerve::ChartNerve;

    fn single(vars: &[&str], rank: usize) -> TransitionCocycle {
        TransitionCocycle::new(ChartNerve::single("U", vars, &[]), rank, Default::default()).unwrap()
    }

    fn p1_line(m: &str) -> TransitionCocycle {
        let n = ChartNerve::new(&[("U0", &["z"]), ("U1", &["w"])], &[], &[("U0", "U1", &[("w", "1/z")])]).unwrap();
        TransitionCocycle::parse(n, 1, &[("U0", "U1", vec![vec![m]])]).unwrap()
    }

    fn f(c: &TransitionCocycle, a: usize, s: &str) -> RF {
        c.nerve().parse_on_chart(a, s).unwrap()
    }

    #[test]
    fn zbar_dz() {
        let c = single(&["z"], 1);
        let sh = c.nerve().shape();
        let theta = MForm::from_entries(sh, vec![vec![RForm::term(sh, sh.dz(0), f(&c, 0, "zbar"))]]);
        let cd = curvature(&c, &ConnectionData { kind: ConnectionKind::Transverse, theta: vec![theta] }).unwrap();
        // d_L(z̄ dz) = dz̄ ∧ dz = −dz ∧ dz̄
        assert_eq!(cd.omega11[0].entry(0, 0), &RForm::term(sh, sh.dz(0) | sh.dzbar(0), RF::from_int(-1)));
    }

    #[test]
    fn bracket_term_without_derivative() {
        let c = single(&["z1", "z2"], 2);
        let sh = c.nerve().shape();
        let one = |b| RForm::term(sh, b, RF::one());
        let z = RForm::zero(sh);
        let theta = MForm::from_entries(sh, vec![vec![z.clone(), one(sh.dz(0))], vec![one(sh.dz(1)), z.clone()]]);
        assert!(theta.d().is_zero());
        let cd = curvature(&c, &ConnectionData { kind: ConnectionKind::Transverse, theta: vec![theta] }).unwrap();
        let b = sh.dz(0) | sh.dz(1);
        assert_eq!(cd.omega[0].entry(0, 0), &RForm::term(sh, b, RF::one()));
        assert_eq!(cd.omega[0].entry(1, 1), &RForm::term(sh, b, RF::from_int(-1)));
        assert!(cd.omega11[0].is_zero());
    }

    #[test]
    fn non_one_zero_forms_rejected() {
        let c = single(&["z"], 1);
        let sh = c.nerve().shape();
        let theta = MForm::from_entries(sh, vec![vec![RForm::term(sh, sh.dzbar(0), RF::one())]]);
        assert!(curvature(&c, &ConnectionData { kind: ConnectionKind::Transverse, theta: vec![theta] }).is_err());
    }

    #[test]
    fn classes_of_simple_curvatures() {
        let c = single(&["z1", "z2"], 2);
        let sh = c.nerve().shape();
        let w1 = RForm::term(sh, sh.dz(0) | sh.dzbar(0), RF::one());
        let w2 = RForm::term(sh, sh.dz(1) | sh.dzbar(1), RF::from_int(3));
        let omega = MForm::from_entries(sh, vec![vec![w1.clone(), RForm::zero(sh)], vec![RForm::zero(sh), w2.clone()]]);
        let c2 = chern_weil(&c, std::slice::from_ref(&omega), 2, ChernConvention::Principal).unwrap();
        assert_eq!(c2.forms[0], w1.wedge(&w2));
        let c1 = chern_weil(&c, std::slice::from_ref(&omega), 1, ChernConvention::Vector).unwrap();
        assert_eq!(c1.forms[0], w1.add(&w2).neg());
        let c1p = chern_weil(&c, &[omega], 1, ChernConvention::Principal).unwrap();
        assert_eq!(c1p.forms[0], w1.add(&w2));
        let zero = chern_weil(&c, &[MForm::zero(sh, 2)], 0, ChernConvention::Vector).unwrap();
        assert_eq!(zero.forms[0], RForm::function(sh, RF::one()));
        assert!(chern_weil(&c, &[MForm::zero(sh, 2)], 1, ChernConvention::Vector).unwrap().forms[0].is_zero());
    }

    #[test]
    fn fubini_study_type() {
        let c = single(&["z"], 1);
        let sh = c.nerve().shape();
        let h = Matrix::from_rows(vec![vec![f(&c, 0, "1 + z zbar")]]);
        let ch = chern_connection(&c, &[h]).unwrap();
        assert_eq!(ch.connection.theta[0].entry(0, 0), &RForm::term(sh, sh.dz(0), f(&c, 0, "zbar/(1 + z zbar)")));
        assert_eq!(
            ch.curvature.omega[0].entry(0, 0),
            &RForm::term(sh, sh.dz(0) | sh.dzbar(0), f(&c, 0, "-1/(1 + z zbar)^2"))
        );
        assert!(ch.passed());
    }

    #[test]
    fn block_diagonal_metric() {
        let c = single(&["z"], 2);
        let h = Matrix::from_rows(vec![vec![RF::one(), RF::zero()], vec![RF::zero(), f(&c, 0, "1 + z zbar")]]);
        let ch = chern_connection(&c, &[h]).unwrap();
        let t = &ch.connection.theta[0];
        assert!(t.entry(0, 0).is_zero() && t.entry(0, 1).is_zero() && t.entry(1, 0).is_zero());
        assert!(!t.entry(1, 1).is_zero());
        assert!(ch.passed());
        let bad = Matrix::from_rows(vec![vec![RF::one(), f(&c, 0, "z")], vec![f(&c, 0, "z"), RF::one()]]);
        assert!(matches!(chern_connection(&c, &[bad]), Err(BundleError::Metric { .. })));
    }

    #[test]
    fn two_metrics_on_o1() {
        let c = p1_line("z");
        let at = atiyah_cocycles(&c).unwrap();
        let metric = |s0: &str, s1: &str| vec![Matrix::from_rows(vec![vec![f(&c, 0, s0)]]), Matrix::from_rows(vec![vec![f(&c, 1, s1)]])];
        let ch0 = chern_connection(&c, &metric("1/(1 + z zbar)", "1/(1 + w wbar)")).unwrap();
        let ch1 = chern_connection(&c, &metric("1/(1 + 2 z zbar)", "1/(2 + w wbar)")).unwrap();
        assert!(ch0.passed() && ch1.passed());
        let c1 = chern_weil(&c, &ch0.curvature.omega11, 1, ChernConvention::Vector).unwrap();
        assert!(c1.passed());
        let tr = transgression(&c, &at, &ch0.connection, &ch1.connection, 1, ChernConvention::Vector).unwrap();
        assert!(tr.passed());
        assert!(!tr.t[0].is_zero());
    }
}
