//! Generalized complex structures on a based space `V` (and on invariant data
//! of a Lie algebra): axioms, the +i eigenspace `L`, type, B-field transforms,
//! GC maps, pure spinors, Calabi–Yau checks and the leaf distribution.
//!
//! A structure is the real `2m × 2m` matrix `𝒥 = (−J, β; B, J*)` acting on
//! columns `(X, ξ)`. The `B` block is the map `X ↦ i_X B` and the `β` block
//! `ξ ↦ i_ξ β`, so a 2-form `B` with coefficients `B_ij` enters as `Bᵀ`.

use serde::Serialize;

use crate::exterior::{blades_of_grade, form_exp, BasedSpace, Blade, GeneralizedVector, Multivector};
use crate::lie::LieStructure;
use crate::linalg::{in_span, intersect, same_span, span_basis, span_rank, CMatrix, Matrix};
use crate::scalar::{GaussianRational, Rational};

type C = GaussianRational;
type CVec = Vec<GaussianRational>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GcsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix entries must be real rationals")]
    NotReal,
    #[error("defective eigenstructure: {0}")]
    Defective(String),
    #[error("B-field is not closed: dB = {0}")]
    NotClosed(String),
    #[error("B-field must be a real 2-form")]
    BadBField,
    #[error("spinor is not pure: annihilator has dimension {found}, expected {expected}")]
    NotPure { found: usize, expected: usize },
    #[error("spinor annihilator meets its conjugate in dimension {0}")]
    RealIndex(usize),
    #[error("integrability cannot be checked without a Lie algebra")]
    NeedsLie,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    fn ok() -> Self {
        Check { pass: true, witness: None }
    }
    fn fail(w: String) -> Self {
        Check { pass: false, witness: Some(w) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    /// (a) `𝒥² = −1`
    pub square: Check,
    /// (b) orthogonality for the pairing
    pub orthogonal: Check,
    /// (c) vanishing Nijenhuis tensor; `None` when no Lie algebra was given
    pub integrable: Option<Check>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.square.pass && self.orthogonal.pass && self.integrable.as_ref().is_none_or(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigen {
    /// basis of `L = ker(𝒥 − i)`
    pub l: Vec<GeneralizedVector>,
    /// basis of `E = ρ(L)`
    pub e: Vec<CVec>,
    /// complex basis of `Δ ⊗ ℂ = E ∩ Ē`
    pub delta_c: Vec<CVec>,
    /// real basis of `Δ`
    #[serde(serialize_with = "crate::scalar::serialize_rational_rows")]
    pub delta: Vec<Vec<Rational>>,
    /// `codim_ℂ E`
    pub k: usize,
}

#[derive(Clone, PartialEq, Debug)]
pub struct GCStructure {
    m: usize,
    matrix: CMatrix,
}

fn c_int(n: i64) -> C {
    C::from_int(n)
}

fn is_real_matrix(m: &CMatrix) -> bool {
    (0..m.rows()).all(|i| m.row(i).iter().all(|c| c.is_real()))
}

/// A generalized vector as a combination of `e1..em, e^1..e^m`.
fn fmt_gvec(v: &GeneralizedVector) -> String {
    let m = v.vector.len();
    let terms: Vec<String> = v
        .vector
        .iter()
        .chain(&v.covector)
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| {
            let name = gbasis_name(m, i);
            if *c == C::one() {
                name
            } else if c.is_real() || c.conj() == -c {
                format!("{}*{}", c, name)
            } else {
                format!("({})*{}", c, name)
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Name of the i-th element of the basis `e1..em, e^1..e^m`.
fn gbasis_name(m: usize, i: usize) -> String {
    if i < m {
        format!("e{}", i + 1)
    } else {
        format!("e^{}", i - m + 1)
    }
}

/// Matrix of `X ↦ i_X B` for a 2-form `B`.
pub fn two_form_map(b: &Multivector) -> CMatrix {
    let m = b.dim();
    Matrix::from_fn(m, m, |j, i| {
        let mut x = vec![C::zero(); m];
        let mut y = vec![C::zero(); m];
        x[i] = C::one();
        y[j] = C::one();
        b.eval2(&x, &y)
    })
}

/// Inverse of [`two_form_map`] on antisymmetric matrices.
pub fn map_to_two_form(a: &CMatrix) -> Multivector {
    let m = a.rows();
    let mut out = Multivector::zero(m);
    for i in 0..m {
        for j in i + 1..m {
            out.add_term(1 << i | 1 << j, &a[(j, i)]);
        }
    }
    out
}

fn pairing_matrix(m: usize) -> CMatrix {
    let half = C::from_ratio(1, 2);
    Matrix::from_fn(2 * m, 2 * m, |i, j| if i + m == j || j + m == i { half.clone() } else { C::zero() })
}

fn first_nonzero(m: &CMatrix) -> Option<(usize, usize, C)> {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if !m[(i, j)].is_zero() {
                return Some((i, j, m[(i, j)].clone()));
            }
        }
    }
    None
}

impl GCStructure {
    /// From the full real `2m × 2m` matrix.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self, GcsError> {
        if !matrix.is_square() || !matrix.rows().is_multiple_of(2) {
            return Err(GcsError::Dimension(format!("{}x{} is not 2m x 2m", matrix.rows(), matrix.cols())));
        }
        if !is_real_matrix(&matrix) {
            return Err(GcsError::NotReal);
        }
        Ok(GCStructure { m: matrix.rows() / 2, matrix })
    }

    /// Assembles `(−J, β; B, Jᵀ)` from `J`, the 2-form `B` and the map `β`.
    pub fn from_blocks(j: &CMatrix, b: &Multivector, beta: &CMatrix) -> Result<Self, GcsError> {
        let m = j.rows();
        if j.cols() != m || b.dim() != m || beta.rows() != m || beta.cols() != m {
            return Err(GcsError::Dimension("blocks must all be m x m".into()));
        }
        if !b.is_real() || !(b.is_zero() || b.degree() == Some(2)) {
            return Err(GcsError::BadBField);
        }
        let full = Matrix::from_blocks(&j.neg(), beta, &two_form_map(b), &j.transpose());
        Self::from_matrix(full)
    }

    /// The structure `(−J, 0; 0, Jᵀ)` of a complex structure `J`.
    pub fn from_complex(j: &CMatrix) -> Result<Self, GcsError> {
        let m = j.rows();
        Self::from_blocks(j, &Multivector::zero(m), &Matrix::zeros(m, m))
    }

    /// The structure `(0, −ω⁻¹; ω, 0)` of a symplectic form.
    pub fn from_symplectic(omega: &Multivector) -> Result<Self, GcsError> {
        let m = omega.dim();
        let w = two_form_map(omega);
        let winv = w.inverse().ok_or_else(|| GcsError::Defective("symplectic form is degenerate".into()))?;
        Self::from_blocks(&Matrix::zeros(m, m), omega, &winv.neg())
    }

    /// Standard complex structure on `ℝ^{2k}`: `J e_{2j−1} = e_{2j}`.
    pub fn standard_complex(k: usize) -> Self {
        let m = 2 * k;
        let j = Matrix::from_fn(m, m, |r, c| {
            if c % 2 == 0 && r == c + 1 {
                C::one()
            } else if c % 2 == 1 && r + 1 == c {
                c_int(-1)
            } else {
                C::zero()
            }
        });
        Self::from_complex(&j).expect("standard complex structure")
    }

    /// Block-diagonal sum of two structures on `V ⊕ W`.
    pub fn direct_sum(&self, o: &Self) -> Self {
        let (a, b) = (self.m, o.m);
        let n = a + b;
        let mut out = Matrix::zeros(2 * n, 2 * n);
        // index maps: V vectors, W vectors, V covectors, W covectors
        let map_s = |i: usize| if i < a { i } else { n + (i - a) };
        let map_o = |i: usize| if i < b { a + i } else { n + a + (i - b) };
        for i in 0..2 * a {
            for j in 0..2 * a {
                out[(map_s(i), map_s(j))] = self.matrix[(i, j)].clone();
            }
        }
        for i in 0..2 * b {
            for j in 0..2 * b {
                out[(map_o(i), map_o(j))] = o.matrix[(i, j)].clone();
            }
        }
        GCStructure { m: n, matrix: out }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// The endomorphism `J` (minus the top-left block).
    pub fn j_block(&self) -> CMatrix {
        self.matrix.block(0, 0, self.m, self.m).neg()
    }

    pub fn beta_block(&self) -> CMatrix {
        self.matrix.block(0, self.m, self.m, self.m)
    }

    pub fn b_block(&self) -> CMatrix {
        self.matrix.block(self.m, 0, self.m, self.m)
    }

    pub fn b_form(&self) -> Multivector {
        map_to_two_form(&self.b_block())
    }

    /// Whether `B = β = 0`, i.e. the structure comes from a complex structure.
    pub fn is_complex_type(&self) -> bool {
        self.beta_block().is_zero() && self.b_block().is_zero()
    }

    pub fn apply(&self, v: &GeneralizedVector) -> GeneralizedVector {
        GeneralizedVector::from_column(&self.matrix.apply(&v.to_column()))
    }

    /// Checks (a) and (b), and (c) when a Lie algebra is supplied.
    pub fn check_axioms(&self, lie: Option<&LieStructure>) -> Result<AxiomReport, GcsError> {
        let m = self.m;
        let n2 = 2 * m;
        let sq = self.matrix.mul(&self.matrix).add(&Matrix::identity(n2));
        let square = match first_nonzero(&sq) {
            None => Check::ok(),
            Some((i, j, v)) => Check::fail(format!("(J^2 + 1)[{},{}] = {}", i + 1, j + 1, v)),
        };
        let g = pairing_matrix(m);
        let orth = self.matrix.transpose().mul(&g).mul(&self.matrix).sub(&g);
        let orthogonal = match first_nonzero(&orth) {
            None => Check::ok(),
            Some((i, j, v)) => Check::fail(format!(
                "<J{}, J{}> - <{}, {}> = {}",
                gbasis_name(m, i),
                gbasis_name(m, j),
                gbasis_name(m, i),
                gbasis_name(m, j),
                v
            )),
        };
        let integrable = match lie {
            None => None,
            Some(l) => {
                if l.dim() != m {
                    return Err(GcsError::Dimension(format!("Lie algebra has dimension {}, structure {}", l.dim(), m)));
                }
                Some(self.nijenhuis_check(l))
            }
        };
        Ok(AxiomReport { square, orthogonal, integrable })
    }

    /// `N(C, D) = [𝒥C, 𝒥D] − 𝒥[𝒥C, D] − 𝒥[C, 𝒥D] − [C, D]` on all basis pairs.
    pub fn nijenhuis(&self, lie: &LieStructure, c: &GeneralizedVector, d: &GeneralizedVector) -> GeneralizedVector {
        let jc = self.apply(c);
        let jd = self.apply(d);
        let t1 = lie.courant_bracket(&jc, &jd);
        let t2 = self.apply(&lie.courant_bracket(&jc, d));
        let t3 = self.apply(&lie.courant_bracket(c, &jd));
        let t4 = lie.courant_bracket(c, d);
        t1.add(&t2.neg()).add(&t3.neg()).add(&t4.neg())
    }

    fn nijenhuis_check(&self, lie: &LieStructure) -> Check {
        let m = self.m;
        for i in 0..2 * m {
            for j in i + 1..2 * m {
                let n = self.nijenhuis(lie, &GeneralizedVector::basis(m, i), &GeneralizedVector::basis(m, j));
                if !n.is_zero() {
                    return Check::fail(format!(
                        "N({}, {}) = {}",
                        gbasis_name(m, i),
                        gbasis_name(m, j),
                        fmt_gvec(&n)
                    ));
                }
            }
        }
        Check::ok()
    }

    /// `L`, `E`, `Δ` and the type; fails if `dim L ≠ m` or `L ∩ L̄ ≠ 0`.
    pub fn eigen(&self) -> Result<Eigen, GcsError> {
        let m = self.m;
        let shifted = self.matrix.sub(&Matrix::identity(2 * m).scale(&C::i()));
        let l_cols = shifted.kernel();
        if l_cols.len() != m {
            return Err(GcsError::Defective(format!("dim L = {}, expected {}", l_cols.len(), m)));
        }
        let mut both = l_cols.clone();
        both.extend(l_cols.iter().map(|v| v.iter().map(|c| c.conj()).collect::<Vec<_>>()));
        let r = span_rank(&both, 2 * m);
        if r != 2 * m {
            return Err(GcsError::Defective(format!("L meets its conjugate in dimension {}", 2 * m - r)));
        }
        let l: Vec<GeneralizedVector> = l_cols.iter().map(|v| GeneralizedVector::from_column(v)).collect();
        let e = span_basis(&l.iter().map(|v| v.vector.clone()).collect::<Vec<_>>(), m);
        let e_bar: Vec<CVec> = e.iter().map(|v| v.iter().map(|c| c.conj()).collect()).collect();
        let delta_c = intersect(&e, &e_bar, m);
        let delta = real_basis(&delta_c, m);
        let k = m - e.len();
        Ok(Eigen { l, e, delta_c, delta, k })
    }

    pub fn type_k(&self) -> Result<usize, GcsError> {
        Ok(self.eigen()?.k)
    }

    /// `e^{−B} 𝒥 e^{B}` with `e^B = (1, 0; B, 1)`. When `lie` is given the
    /// field must be closed.
    pub fn b_transform(&self, b: &Multivector, lie: Option<&LieStructure>) -> Result<Self, GcsError> {
        let m = self.m;
        if b.dim() != m {
            return Err(GcsError::Dimension(format!("B lives in dimension {}, structure in {}", b.dim(), m)));
        }
        if !b.is_real() || !(b.is_zero() || b.degree() == Some(2)) {
            return Err(GcsError::BadBField);
        }
        if let Some(l) = lie {
            let db = l.ce_d(b);
            if !db.is_zero() {
                return Err(GcsError::NotClosed(l.space().print(&db)));
            }
        }
        let bm = two_form_map(b);
        let id = Matrix::identity(m);
        let z = Matrix::zeros(m, m);
        let exp_b = Matrix::from_blocks(&id, &z, &bm, &id);
        let exp_mb = Matrix::from_blocks(&id, &z, &bm.neg(), &id);
        Ok(GCStructure { m, matrix: exp_mb.mul(&self.matrix).mul(&exp_b) })
    }

    /// `σ(X, Y) = ξ_X(Y)` for `X, Y ∈ E`, where `X + ξ_X ∈ L`.
    fn sigma_covector(&self, eig: &Eigen, x: &[C]) -> CVec {
        let m = self.m;
        let vecs: Vec<CVec> = eig.l.iter().map(|v| v.vector.clone()).collect();
        let a = Matrix::from_cols(m, &vecs);
        let coeffs = a.solve(x).expect("vector lies in E");
        let mut xi = vec![C::zero(); m];
        for (c, v) in coeffs.iter().zip(&eig.l) {
            for (acc, t) in xi.iter_mut().zip(&v.covector) {
                *acc += &(c * t);
            }
        }
        xi
    }

    /// Basis (columns of length 2m) of the linear Poisson structure
    /// `L(Δ ⊗ ℂ, Ω_Δ)` with `Ω_Δ = Im σ|_Δ`.
    pub fn linear_poisson(&self) -> Result<Vec<CVec>, GcsError> {
        let m = self.m;
        let eig = self.eigen()?;
        let delta: Vec<CVec> = eig.delta.iter().map(|v| v.iter().map(|r| C::real(r.clone())).collect()).collect();
        let mut out = Vec::new();
        if !delta.is_empty() {
            let constraint = Matrix::from_rows(delta.clone());
            for da in &delta {
                let xi = self.sigma_covector(&eig, da);
                // Ω_Δ(δ_a, δ_b) = Im ξ_a(δ_b)
                let vals: CVec = delta
                    .iter()
                    .map(|db| {
                        let s: C = xi.iter().zip(db).fold(C::zero(), |acc, (p, q)| &acc + &(p * q));
                        C::real(s.im.clone())
                    })
                    .collect();
                let eta = constraint.solve(&vals).expect("Δ basis is independent");
                out.push(da.iter().cloned().chain(eta).collect());
            }
            for ann in constraint.kernel() {
                out.push(vec![C::zero(); m].into_iter().chain(ann).collect());
            }
        } else {
            for i in 0..m {
                out.push(GeneralizedVector::basis_covector(m, i).to_column());
            }
        }
        Ok(out)
    }

    /// Generator of the pure spinor line annihilated by `L`.
    pub fn structure_to_spinor(&self) -> Result<PureSpinorLine, GcsError> {
        let m = self.m;
        let eig = self.eigen()?;
        let all: Vec<Blade> = (0..=m).flat_map(|r| blades_of_grade(m, r)).collect();
        let mut rows: Vec<CVec> = Vec::new();
        for v in &eig.l {
            // column b of the map ρ ↦ v·ρ
            let images: Vec<CVec> = all
                .iter()
                .map(|b| v.clifford_act(&Multivector::term(m, *b, C::one())).coords(&all))
                .collect();
            let mat = Matrix::from_cols(all.len(), &images);
            rows.extend(mat.to_rows());
        }
        let kernel = if rows.is_empty() {
            vec![vec![C::one()]]
        } else {
            Matrix::from_rows(rows).kernel()
        };
        if kernel.len() != 1 {
            return Err(GcsError::Defective(format!("spinor line has dimension {}", kernel.len())));
        }
        let mut rho = Multivector::from_coords(m, &all, &kernel[0]);
        let lead = all.iter().map(|b| rho.coeff(*b)).find(|c| !c.is_zero()).expect("nonzero spinor");
        rho = rho.scale(&lead.inv().unwrap());
        Ok(PureSpinorLine::new(rho))
    }
}

/// Real basis of a conjugation-invariant complex subspace.
fn real_basis(vs: &[CVec], m: usize) -> Vec<Vec<Rational>> {
    let mut reals: Vec<Vec<Rational>> = Vec::new();
    for v in vs {
        reals.push(v.iter().map(|c| c.re.clone()).collect());
        reals.push(v.iter().map(|c| c.im.clone()).collect());
    }
    if reals.is_empty() {
        return reals;
    }
    let basis = span_basis(&reals, m);
    debug_assert_eq!(basis.len(), vs.len());
    basis
}

/// `ρ = e^{B + iω} ∧ θ_1 ∧ … ∧ θ_k`.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct Factored {
    pub b: Multivector,
    pub omega: Multivector,
    pub theta: Vec<Multivector>,
}

impl Factored {
    pub fn big_omega(&self) -> Multivector {
        let m = self.b.dim();
        self.theta.iter().fold(Multivector::one(m), |acc, t| acc.wedge(t))
    }

    pub fn rho(&self) -> Result<Multivector, GcsError> {
        let f = self.b.add(&self.omega.scale(&C::i()));
        let e = form_exp(&f).map_err(|_| GcsError::BadBField)?;
        Ok(e.wedge(&self.big_omega()))
    }
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct PureSpinorLine {
    pub rho: Multivector,
    pub factored: Option<Factored>,
}

impl PureSpinorLine {
    pub fn new(rho: Multivector) -> Self {
        PureSpinorLine { rho, factored: None }
    }

    pub fn from_factors(b: Multivector, omega: Multivector, theta: Vec<Multivector>) -> Result<Self, GcsError> {
        let m = b.dim();
        if omega.dim() != m || theta.iter().any(|t| t.dim() != m || !(t.is_zero() || t.degree() == Some(1))) {
            return Err(GcsError::Dimension("factors must be a 2-form pair and 1-forms on one space".into()));
        }
        for f in [&b, &omega] {
            if !f.is_real() || !(f.is_zero() || f.degree() == Some(2)) {
                return Err(GcsError::BadBField);
            }
        }
        let f = Factored { b, omega, theta };
        Ok(PureSpinorLine { rho: f.rho()?, factored: Some(f) })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `{v : v·ρ = 0}` as columns of length 2m.
    pub fn annihilator(&self) -> Vec<CVec> {
        let m = self.dim();
        let all: Vec<Blade> = (0..=m).flat_map(|r| blades_of_grade(m, r)).collect();
        let cols: Vec<CVec> =
            (0..2 * m).map(|i| GeneralizedVector::basis(m, i).clifford_act(&self.rho).coords(&all)).collect();
        Matrix::from_cols(all.len(), &cols).kernel()
    }

    /// Degree of the lowest nonzero component (the type).
    pub fn lowest_degree(&self) -> Option<usize> {
        self.rho.grades().first().copied()
    }

    /// Given or reconstructed factorisation `e^{B+iω} ∧ θ_1 ∧ … ∧ θ_k`.
    pub fn factor(&self) -> Option<Factored> {
        if let Some(f) = &self.factored {
            return Some(f.clone());
        }
        factor_spinor(&self.rho)
    }
}

/// Degree-1 annihilator `{η : η ∧ Ω = 0}`, as an echelon basis.
pub fn one_form_annihilator(w: &Multivector) -> Vec<CVec> {
    let m = w.dim();
    let targets: Vec<Blade> = (0..=m).flat_map(|r| blades_of_grade(m, r)).collect();
    let cols: Vec<CVec> = (0..m).map(|i| Multivector::gen(m, i).wedge(w).coords(&targets)).collect();
    let k = Matrix::from_cols(targets.len(), &cols).kernel();
    span_basis(&k, m)
}

/// Writes a homogeneous form as a product of 1-forms drawn from its
/// degree-1 annihilator, if it is decomposable.
pub fn decompose(w: &Multivector) -> Option<Vec<Multivector>> {
    let m = w.dim();
    let k = w.degree()?;
    if w.is_zero() {
        return None;
    }
    if k == 0 {
        return Some(Vec::new());
    }
    let ann = one_form_annihilator(w);
    if ann.len() != k {
        return None;
    }
    let mut theta: Vec<Multivector> = ann.iter().map(|v| Multivector::from_coeffs(v)).collect();
    let prod = theta.iter().fold(Multivector::one(m), |acc, t| acc.wedge(t));
    let (b, c) = prod.terms().next()?;
    let ratio = &w.coeff(b) / c;
    theta[0] = theta[0].scale(&ratio);
    let prod = theta.iter().fold(Multivector::one(m), |acc, t| acc.wedge(t));
    (prod == *w).then_some(theta)
}

fn factor_spinor(rho: &Multivector) -> Option<Factored> {
    let m = rho.dim();
    let k = *rho.grades().first()?;
    let omega0 = rho.grade_part(k);
    let theta = decompose(&omega0)?;
    // F ∧ Ω = ρ_{k+2}, solved for a complex 2-form F
    let twos = blades_of_grade(m, 2);
    let targets = blades_of_grade(m, k + 2);
    let f = if targets.is_empty() || twos.is_empty() {
        Multivector::zero(m)
    } else {
        let cols: Vec<CVec> =
            twos.iter().map(|b| Multivector::term(m, *b, C::one()).wedge(&omega0).coords(&targets)).collect();
        let sol = Matrix::from_cols(targets.len(), &cols).solve(&rho.grade_part(k + 2).coords(&targets))?;
        Multivector::from_coords(m, &twos, &sol)
    };
    let fac = Factored { b: f.real_part(), omega: f.imag_part(), theta };
    (fac.rho().ok()? == *rho).then_some(fac)
}

/// Structure whose `+i` eigenspace is the annihilator of `ρ`.
pub fn spinor_to_structure(s: &PureSpinorLine) -> Result<GCStructure, GcsError> {
    let m = s.dim();
    let ann = s.annihilator();
    if ann.len() != m {
        return Err(GcsError::NotPure { found: ann.len(), expected: m });
    }
    let mut cols = ann.clone();
    cols.extend(ann.iter().map(|v| v.iter().map(|c| c.conj()).collect::<Vec<_>>()));
    let p = Matrix::from_cols(2 * m, &cols);
    let pinv = p.inverse().ok_or_else(|| GcsError::RealIndex(2 * m - p.rank()))?;
    let d = Matrix::from_fn(2 * m, 2 * m, |i, j| {
        if i != j {
            C::zero()
        } else if i < m {
            C::i()
        } else {
            -C::i()
        }
    });
    GCStructure::from_matrix(p.mul(&d).mul(&pinv))
}

pub fn structure_to_spinor(j: &GCStructure) -> Result<PureSpinorLine, GcsError> {
    j.structure_to_spinor()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalabiYauReport {
    pub type_k: usize,
    pub d_rho_zero: bool,
    pub d_rho: Multivector,
    /// `ω^{n−k} ∧ Ω ∧ Ω̄`
    pub nondegeneracy: Option<Multivector>,
    pub nondegenerate: bool,
    pub pure: bool,
    pub decomposable: bool,
    pub factors: Option<Factored>,
    /// `dθ_j` for each factor
    pub d_theta: Vec<Multivector>,
    pub gcy: bool,
    pub strong_gcy: Option<bool>,
}

impl CalabiYauReport {
    pub fn passed(&self) -> bool {
        self.gcy && self.strong_gcy.unwrap_or(true)
    }
}

/// Generalized Calabi–Yau checks for an invariant spinor.
pub fn check_calabi_yau(lie: &LieStructure, s: &PureSpinorLine, strong: bool) -> Result<CalabiYauReport, GcsError> {
    let m = s.dim();
    if lie.dim() != m {
        return Err(GcsError::Dimension(format!("Lie algebra has dimension {}, spinor {}", lie.dim(), m)));
    }
    if !m.is_multiple_of(2) {
        return Err(GcsError::Dimension(format!("odd dimension {}", m)));
    }
    let n = m / 2;
    let d_rho = lie.ce_d(&s.rho);
    let pure = s.annihilator().len() == m && spinor_to_structure(s).is_ok();
    let type_k = s.lowest_degree().unwrap_or(0);
    let factors = s.factor();
    let nondegeneracy = factors.as_ref().and_then(|f| {
        let big = f.big_omega();
        (type_k <= n).then(|| f.omega.wedge_pow(n - type_k).wedge(&big).wedge(&big.conj()))
    });
    let nondegenerate = nondegeneracy.as_ref().is_some_and(|v| !v.top_coeff().is_zero());
    let decomposable = factors.is_some();
    let d_theta: Vec<Multivector> =
        factors.as_ref().map(|f| f.theta.iter().map(|t| lie.ce_d(t)).collect()).unwrap_or_default();
    let gcy = d_rho.is_zero() && pure && nondegenerate;
    let strong_gcy = strong.then(|| gcy && decomposable && d_theta.iter().all(|d| d.is_zero()));
    Ok(CalabiYauReport {
        type_k,
        d_rho_zero: d_rho.is_zero(),
        d_rho,
        nondegeneracy,
        nondegenerate,
        pure,
        decomposable,
        factors,
        d_theta,
        gcy,
        strong_gcy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafReport {
    /// real basis of `s = {X : i_X(Ω ∧ Ω̄) = 0}`
    #[serde(serialize_with = "crate::scalar::serialize_rational_rows")]
    pub basis: Vec<Vec<Rational>>,
    pub codim: usize,
    pub subalgebra: bool,
}

/// The leaf distribution of a factored spinor on an invariant model.
pub fn leaf_distribution(lie: &LieStructure, s: &PureSpinorLine) -> Result<LeafReport, GcsError> {
    let m = s.dim();
    let f = s.factor().ok_or_else(|| GcsError::Defective("spinor is not decomposable".into()))?;
    let big = f.big_omega();
    let vol = big.wedge(&big.conj());
    let targets: Vec<Blade> = (0..=m).flat_map(|r| blades_of_grade(m, r)).collect();
    // real unknowns X; real and imaginary parts of i_X(Ω∧Ω̄) must vanish
    let cols: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let c = vol.interior_basis(i).coords(&targets);
            c.iter().map(|x| x.re.clone()).chain(c.iter().map(|x| x.im.clone())).collect()
        })
        .collect();
    let basis = if targets.is_empty() {
        Vec::new()
    } else {
        let k = Matrix::from_cols(2 * targets.len(), &cols).kernel();
        span_basis(&k, m)
    };
    let cb: Vec<CVec> = basis.iter().map(|v| v.iter().map(|r| C::real(r.clone())).collect()).collect();
    let subalgebra = cb.iter().all(|x| cb.iter().all(|y| in_span(&cb, &lie.bracket(x, y))));
    Ok(LeafReport { codim: m - basis.len(), basis, subalgebra })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcMapReport {
    pub e_inclusion: bool,
    pub poisson_pushforward: bool,
    /// `ψ J_V = J_W ψ` and `ψ β_V = 0`, only for complex-type targets
    pub lemma: Option<LemmaConditions>,
    /// `ψ(E_V ∩ Ē_V) = E_W ∩ Ē_W`, checked when the map passes
    pub image_law: Option<bool>,
    pub is_gc_map: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaConditions {
    pub commutes_with_j: bool,
    pub kills_beta: bool,
}

/// A real linear map `ψ: V → W` between two generalized complex spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct GcMapCandidate {
    pub source: GCStructure,
    pub target: GCStructure,
    /// `dim W × dim V`
    pub psi: CMatrix,
}

pub fn check_gc_map(c: &GcMapCandidate) -> Result<GcMapReport, GcsError> {
    let (mv, mw) = (c.source.dim(), c.target.dim());
    if c.psi.rows() != mw || c.psi.cols() != mv {
        return Err(GcsError::Dimension(format!("psi is {}x{}, expected {}x{}", c.psi.rows(), c.psi.cols(), mw, mv)));
    }
    if !is_real_matrix(&c.psi) {
        return Err(GcsError::NotReal);
    }
    let ev = c.source.eigen()?;
    let ew = c.target.eigen()?;
    let e_inclusion = ev.e.iter().all(|x| in_span(&ew.e, &c.psi.apply(x)));

    // ψ_*(P̃_V) = {ψ(Y) + η : Y + ψ*(η) ∈ P̃_V}
    let pv = c.source.linear_poisson()?;
    let pw = c.target.linear_poisson()?;
    let psi_t = c.psi.transpose();
    let mut cols: Vec<CVec> = pv.iter().map(|p| p[mv..].to_vec()).collect();
    for j in 0..mw {
        cols.push(psi_t.col(j).iter().map(|x| -x).collect());
    }
    let sys = Matrix::from_cols(mv, &cols);
    let pushed: Vec<CVec> = sys
        .kernel()
        .iter()
        .map(|sol| {
            let (coef, eta) = sol.split_at(pv.len());
            let mut y = vec![C::zero(); mv];
            for (a, p) in coef.iter().zip(&pv) {
                for (acc, t) in y.iter_mut().zip(&p[..mv]) {
                    *acc += &(a * t);
                }
            }
            c.psi.apply(&y).into_iter().chain(eta.iter().cloned()).collect()
        })
        .collect();
    let poisson_pushforward = same_span(&pushed, &pw, 2 * mw);

    let lemma = c.target.is_complex_type().then(|| LemmaConditions {
        commutes_with_j: c.psi.mul(&c.source.j_block()) == c.target.j_block().mul(&c.psi),
        kills_beta: c.psi.mul(&c.source.beta_block()).is_zero(),
    });
    let is_gc_map = e_inclusion && poisson_pushforward;
    let image_law = is_gc_map.then(|| {
        let img: Vec<CVec> = ev.delta_c.iter().map(|v| c.psi.apply(v)).collect();
        same_span(&img, &ew.delta_c, mw)
    });
    let failing = if !e_inclusion {
        Some("psi(E_V) is not contained in E_W".to_string())
    } else if !poisson_pushforward {
        Some("pushforward of the linear Poisson structure differs".to_string())
    } else {
        None
    };
    Ok(GcMapReport { e_inclusion, poisson_pushforward, lemma, image_law, is_gc_map, failing })
}

/// The standard Iwasawa spinor (not closed: see `iwasawa_closed_spinor`):
/// `e^{i e56} ∧ (e1 + i e2) ∧ (e3 + i e4)`.
pub fn iwasawa_spinor() -> PureSpinorLine {
    let s = BasedSpace::standard(6);
    PureSpinorLine::from_factors(
        Multivector::zero(6),
        s.parse("e5^e6").unwrap(),
        vec![s.parse("e1 + i e2").unwrap(), s.parse("e3 + i e4").unwrap()],
    )
    .unwrap()
}

/// A closed variant with `θ = (e1 + i e3, e2 + i e4)`, which is annihilated by
/// both `de5` and `de6`.
pub fn iwasawa_closed_spinor() -> PureSpinorLine {
    let s = BasedSpace::standard(6);
    PureSpinorLine::from_factors(
        Multivector::zero(6),
        s.parse("e5^e6").unwrap(),
        vec![s.parse("e1 + i e3").unwrap(), s.parse("e2 + i e4").unwrap()],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::iwasawa;

    fn plane() -> BasedSpace {
        BasedSpace::standard(2)
    }

    #[test]
    fn plane_examples_pass_all_axioms() {
        let ab = LieStructure::abelian(2);
        let cx = GCStructure::standard_complex(1);
        assert!(cx.check_axioms(Some(&ab)).unwrap().passed());
        let sy = GCStructure::from_symplectic(&plane().parse("e1^e2").unwrap()).unwrap();
        assert!(sy.check_axioms(Some(&ab)).unwrap().passed());
        assert_eq!(cx.type_k().unwrap(), 1);
        assert_eq!(sy.type_k().unwrap(), 0);
    }

    #[test]
    fn corrupted_j_fails_square() {
        let mut m = GCStructure::standard_complex(1).matrix().clone();
        m[(0, 0)] = C::one();
        m[(1, 1)] = C::one();
        m[(0, 1)] = C::zero();
        m[(1, 0)] = C::zero();
        let r = GCStructure::from_matrix(m).unwrap().check_axioms(None).unwrap();
        assert!(!r.square.pass);
        assert!(r.square.witness.is_some());
        assert!(r.integrable.is_none());
    }

    #[test]
    fn complex_plane_eigenspace() {
        let e = GCStructure::standard_complex(1).eigen().unwrap();
        // L = T^{0,1} ⊕ (T^{1,0})*: vector part ∝ e1 + i e2... in E, covector ∝ dz
        let expected_e = vec![vec![C::one(), C::i()]];
        assert!(same_span(&e.e, &expected_e, 2));
        let dz = GeneralizedVector::new(vec![C::zero(), C::zero()], vec![C::one(), C::i()]).to_column();
        assert!(in_span(&e.l.iter().map(|v| v.to_column()).collect::<Vec<_>>(), &dz));
    }

    #[test]
    fn symplectic_eigenspace_is_graph() {
        let w = plane().parse("e1^e2").unwrap();
        let e = GCStructure::from_symplectic(&w).unwrap().eigen().unwrap();
        for v in &e.l {
            // X − i i_X ω
            let expect: CVec = w.interior(&v.vector).one_form_coeffs().iter().map(|c| -(c * &C::i())).collect();
            assert_eq!(v.covector, expect);
        }
    }

    #[test]
    fn spinor_round_trips() {
        let s = plane();
        let dz = PureSpinorLine::new(s.parse("e1 + i e2").unwrap());
        let j = spinor_to_structure(&dz).unwrap();
        assert_eq!(j, GCStructure::standard_complex(1));
        let sym = PureSpinorLine::new(form_exp(&s.parse("i e1^e2").unwrap()).unwrap());
        let j = spinor_to_structure(&sym).unwrap();
        assert_eq!(j, GCStructure::from_symplectic(&s.parse("e1^e2").unwrap()).unwrap());
        assert_eq!(spinor_to_structure(&j.structure_to_spinor().unwrap()).unwrap(), j);
    }

    #[test]
    fn non_pure_spinor_rejected() {
        let s = BasedSpace::standard(4);
        let rho = PureSpinorLine::new(s.parse("1 + e1^e2^e3^e4").unwrap().add(&s.parse("e1").unwrap()));
        assert!(matches!(spinor_to_structure(&rho), Err(GcsError::NotPure { .. })));
    }

    #[test]
    fn iwasawa_spinor_structure() {
        let l = iwasawa();
        let j = spinor_to_structure(&iwasawa_spinor()).unwrap();
        let r = j.check_axioms(Some(&l)).unwrap();
        assert!(r.square.pass && r.orthogonal.pass);
        // this spinor is not closed, so the structure is not integrable
        assert!(!r.integrable.unwrap().pass);
        assert_eq!(j.type_k().unwrap(), 2);

        let jc = spinor_to_structure(&iwasawa_closed_spinor()).unwrap();
        assert!(jc.check_axioms(Some(&l)).unwrap().passed());
        assert_eq!(jc.type_k().unwrap(), 2);
    }

    #[test]
    fn calabi_yau_reports() {
        let l = iwasawa();
        let r = check_calabi_yau(&l, &iwasawa_spinor(), true).unwrap();
        let s = l.space();
        // dρ = i d(e56) ∧ Ω = 2 e12345 + 2i e12346
        assert_eq!(r.d_rho, s.parse("2*e1^e2^e3^e4^e5 + 2 i*e1^e2^e3^e4^e6").unwrap());
        assert!(!r.gcy);
        assert_eq!(r.nondegeneracy.as_ref().unwrap().top_coeff(), C::from_int(4));
        assert_eq!(r.type_k, 2);

        let r = check_calabi_yau(&l, &iwasawa_closed_spinor(), true).unwrap();
        assert!(r.d_rho_zero && r.gcy && r.strong_gcy == Some(true));
        assert_eq!(r.nondegeneracy.unwrap().top_coeff(), C::from_int(-4));

        let ab = LieStructure::abelian(2);
        let sym = PureSpinorLine::from_factors(Multivector::zero(2), plane().parse("e1^e2").unwrap(), vec![]).unwrap();
        let r = check_calabi_yau(&ab, &sym, false).unwrap();
        assert!(r.gcy);
        assert_eq!(r.type_k, 0);

        let bad = PureSpinorLine::from_factors(
            Multivector::zero(6),
            s.parse("e5^e6").unwrap(),
            vec![s.parse("e1 + i e2").unwrap(), s.parse("e3 + i e5").unwrap()],
        )
        .unwrap();
        let r = check_calabi_yau(&l, &bad, true).unwrap();
        assert!(!r.d_rho_zero && !r.gcy);
    }

    #[test]
    fn leaves() {
        let l = iwasawa();
        let r = leaf_distribution(&l, &iwasawa_spinor()).unwrap();
        assert_eq!(r.codim, 4);
        assert!(r.subalgebra);
        let e5e6: Vec<CVec> = (4..6).map(|i| GeneralizedVector::basis_vector(6, i).vector).collect();
        let got: Vec<CVec> = r.basis.iter().map(|v| v.iter().map(|x| C::real(x.clone())).collect()).collect();
        assert!(same_span(&got, &e5e6, 6));

        let ab = LieStructure::abelian(2);
        let sym = PureSpinorLine::from_factors(Multivector::zero(2), plane().parse("e1^e2").unwrap(), vec![]).unwrap();
        assert_eq!(leaf_distribution(&ab, &sym).unwrap().codim, 0);
        let cx = PureSpinorLine::new(plane().parse("e1 + i e2").unwrap());
        let r = leaf_distribution(&ab, &cx).unwrap();
        assert_eq!((r.codim, r.basis.len()), (2, 0));
    }

    #[test]
    fn factoring_recovers_presentation() {
        let rho = iwasawa_closed_spinor().rho;
        let f = factor_spinor(&rho).unwrap();
        assert_eq!(f.rho().unwrap(), rho);
        assert_eq!(f.theta.len(), 2);
    }

    #[test]
    fn gc_maps() {
        let cx = GCStructure::standard_complex(1);
        let id = Matrix::identity(2);
        let r = check_gc_map(&GcMapCandidate { source: cx.clone(), target: cx.clone(), psi: id }).unwrap();
        assert!(r.is_gc_map && r.image_law == Some(true));
        assert_eq!(r.lemma, Some(LemmaConditions { commutes_with_j: true, kills_beta: true }));

        let sy = GCStructure::from_symplectic(&plane().parse("e1^e2").unwrap()).unwrap();
        let psi = crate::linalg::cmat(&[&[1, 0], &[0, 0]]);
        let r = check_gc_map(&GcMapCandidate { source: sy.clone(), target: cx.clone(), psi }).unwrap();
        assert!(!r.is_gc_map);
        assert!(!r.lemma.unwrap().kills_beta);

        let prod = cx.direct_sum(&sy);
        let proj = crate::linalg::cmat(&[&[1, 0, 0, 0], &[0, 1, 0, 0]]);
        let r = check_gc_map(&GcMapCandidate { source: prod, target: cx, psi: proj }).unwrap();
        assert!(r.is_gc_map);
        assert_eq!(r.lemma, Some(LemmaConditions { commutes_with_j: true, kills_beta: true }));
        assert_eq!(r.image_law, Some(true));
    }

    #[test]
    fn b_transform_basics() {
        let l = iwasawa();
        let j = spinor_to_structure(&iwasawa_closed_spinor()).unwrap();
        assert_eq!(j.b_transform(&Multivector::zero(6), Some(&l)).unwrap(), j);
        let b = l.space().parse("e1^e2 + e5^e1").unwrap();
        let jb = j.b_transform(&b, Some(&l));
        // d(e5^e1) = (e13 + e42)^e1 = -e1^e2^e4 ≠ 0
        assert!(matches!(jb, Err(GcsError::NotClosed(_))));
        let b = l.space().parse("e1^e2 + 3*e3^e6").unwrap();
        let jb = j.b_transform(&b, None).unwrap();
        assert_eq!(jb.type_k().unwrap(), 2);
        let r = jb.check_axioms(None).unwrap();
        assert!(r.square.pass && r.orthogonal.pass);
    }
}
