//! Transverse bigraded complexes with constant coefficients.
//!
//! A [`TransverseSplitting`] is a list of complex 1-forms `dz_1..dz_k` on a Lie
//! algebra whose span, together with the conjugates, is closed under the
//! Chevalley–Eilenberg differential. Forms are written in the abstract basis
//! `dz_1..dz_k, dzb_1..dzb_k` (generator `k + j` is `dz̄_j`), so that the
//! bidegree of a monomial is read off its bit pattern. `d_L` raises `q` and
//! `d_L̄` raises `p`.
//!
//! All operators are stored as square matrices on the full exterior algebra in
//! a fixed monomial order; bidegree blocks are extracted on demand.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use crate::exterior::{blade_order_key, blades_of_grade, grade, indices, wedge_sign, BasedSpace, Blade, Multivector};
use crate::gcs::GCStructure;
use crate::lie::{extend_derivation, LieStructure};
use crate::linalg::{span_basis, span_rank, CMatrix, Matrix};
use crate::scalar::{GaussianRational, Rational};

type C = GaussianRational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComplexError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("d({generator}) = {form} leaves the transverse subalgebra")]
    NotClosed { generator: String, form: String },
    #[error("d({generator}) = {form} has a component outside A^(2,0) + A^(1,1)")]
    Bidegree { generator: String, form: String },
    #[error("metric: {0}")]
    Metric(String),
}

/// Monomial basis of `Λ(𝒢* ⊕ 𝒢̄*)` ordered by total degree, then by `p`
/// descending, then lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Bigrading {
    k: usize,
    basis: Vec<Blade>,
}

impl Bigrading {
    pub fn new(k: usize) -> Self {
        let mut basis: Vec<Blade> = (0..=2 * k).flat_map(|r| blades_of_grade(2 * k, r)).collect();
        basis.sort_by_key(|b| {
            let (p, q) = bidegree(k, *b);
            (p + q, std::cmp::Reverse(p), blade_order_key(*b))
        });
        Bigrading { k, basis }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Blade] {
        &self.basis
    }

    /// Positions of the monomials of bidegree `(p, q)`.
    pub fn pq(&self, p: usize, q: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| bidegree(self.k, self.basis[i]) == (p, q)).collect()
    }

    /// Positions of the monomials of total degree `r`.
    pub fn degree(&self, r: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| grade(self.basis[i]) == r).collect()
    }

    pub fn coords(&self, m: &Multivector) -> Vec<C> {
        self.basis.iter().map(|b| m.coeff(*b)).collect()
    }

    pub fn form(&self, v: &[C]) -> Multivector {
        Multivector::from_coords(2 * self.k, &self.basis, v)
    }

    /// Matrix of a linear map given on monomials.
    pub fn matrix_of(&self, f: impl Fn(&Multivector) -> Multivector) -> CMatrix {
        let n2 = 2 * self.k;
        let cols: Vec<Vec<C>> = self.basis.iter().map(|b| self.coords(&f(&Multivector::term(n2, *b, C::one())))).collect();
        Matrix::from_cols(self.len(), &cols)
    }
}

pub fn bidegree(k: usize, b: Blade) -> (usize, usize) {
    let low = b & ((1u64 << k) - 1);
    (low.count_ones() as usize, (b >> k).count_ones() as usize)
}

fn sub_cols(m: &CMatrix, cols: &[usize]) -> CMatrix {
    Matrix::from_fn(m.rows(), cols.len(), |i, j| m[(i, cols[j])].clone())
}

fn sub_block(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    Matrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])].clone())
}

fn rank_on(m: &CMatrix, cols: &[usize]) -> usize {
    if cols.is_empty() {
        0
    } else {
        sub_cols(m, cols).rank()
    }
}

fn conj_matrix(m: &CMatrix) -> CMatrix {
    m.map(|c| c.conj())
}

#[derive(Clone, PartialEq, Debug)]
pub struct TransverseSplitting {
    k: usize,
    ambient: LieStructure,
    generators: Vec<Multivector>,
    /// `d` of `dz_1..dz_k, dz̄_1..dz̄_k` in the abstract basis
    table: Vec<Multivector>,
    space: BasedSpace,
}

impl TransverseSplitting {
    /// `𝒢* = L ∩ (V* ⊗ ℂ)` of an integrable structure.
    pub fn from_gcs(j: &GCStructure, lie: &LieStructure) -> Result<Self, ComplexError> {
        let axioms = j.check_axioms(Some(lie)).map_err(|e| ComplexError::Contract(e.to_string()))?;
        if !axioms.passed() {
            let w = [Some(&axioms.square), Some(&axioms.orthogonal), axioms.integrable.as_ref()]
                .into_iter()
                .flatten()
                .find(|c| !c.pass)
                .and_then(|c| c.witness.clone())
                .unwrap_or_default();
            return Err(ComplexError::Contract(format!("structure is not an integrable GCS: {}", w)));
        }
        let eig = j.eigen().map_err(|e| ComplexError::Contract(e.to_string()))?;
        let m = j.dim();
        let vec_part = Matrix::from_cols(m, &eig.l.iter().map(|v| v.vector.clone()).collect::<Vec<_>>());
        let covs: Vec<Vec<C>> = vec_part
            .kernel()
            .iter()
            .map(|c| {
                let mut xi = vec![C::zero(); m];
                for (a, v) in c.iter().zip(&eig.l) {
                    for (acc, t) in xi.iter_mut().zip(&v.covector) {
                        *acc += &(a * t);
                    }
                }
                xi
            })
            .collect();
        let basis = if covs.is_empty() { covs } else { span_basis(&covs, m) };
        if basis.len() != eig.k {
            return Err(ComplexError::Contract(format!("dim G* = {} but type is {}", basis.len(), eig.k)));
        }
        let gens = basis.iter().map(|v| Multivector::from_coeffs(v)).collect();
        Self::from_generators(lie, gens)
    }

    /// Splitting spanned by the given complex 1-forms.
    pub fn from_generators(lie: &LieStructure, generators: Vec<Multivector>) -> Result<Self, ComplexError> {
        let m = lie.dim();
        let k = generators.len();
        if generators.iter().any(|g| g.dim() != m || !(g.is_zero() || g.degree() == Some(1))) {
            return Err(ComplexError::Contract("generators must be 1-forms on the Lie algebra".into()));
        }
        let mut all: Vec<Multivector> = generators.clone();
        all.extend(generators.iter().map(|g| g.conj()));
        let coeffs: Vec<Vec<C>> = all.iter().map(|g| g.one_form_coeffs()).collect();
        if span_rank(&coeffs, m) != 2 * k {
            return Err(ComplexError::Contract(format!(
                "generators and their conjugates span {} dimensions, expected {}",
                span_rank(&coeffs, m),
                2 * k
            )));
        }
        let space = abstract_space(k);
        // d(g_a) = Σ c_{bc} g_b ∧ g_c, solved over the pairwise wedges
        let pairs = blades_of_grade(2 * k, 2);
        let v2 = blades_of_grade(m, 2);
        let cols: Vec<Vec<C>> = pairs
            .iter()
            .map(|b| {
                let ij: Vec<usize> = indices(*b).collect();
                all[ij[0]].wedge(&all[ij[1]]).coords(&v2)
            })
            .collect();
        let sys = Matrix::from_cols(v2.len(), &cols);
        let mut table = Vec::with_capacity(2 * k);
        for (a, g) in all.iter().enumerate() {
            let dg = lie.ce_d(g);
            let name = space.labels()[a].clone();
            let sol = if pairs.is_empty() { (dg.is_zero()).then(Vec::new) } else { sys.solve(&dg.coords(&v2)) };
            let sol = sol.ok_or_else(|| ComplexError::NotClosed { generator: name.clone(), form: lie.space().print(&dg) })?;
            let t = Multivector::from_coords(2 * k, &pairs, &sol);
            table.push(t);
        }
        for (a, t) in table.iter().enumerate().take(k) {
            if t.terms().any(|(b, _)| bidegree(k, b) == (0, 2)) {
                return Err(ComplexError::Bidegree { generator: space.labels()[a].clone(), form: space.print(t) });
            }
        }
        Ok(TransverseSplitting { k, ambient: lie.clone(), generators, table, space })
    }

    /// Splitting on the real `2k`-dimensional algebra determined by
    /// `d(dz_j)`, given in the abstract basis; `d(dz̄_j)` is the conjugate.
    pub fn from_table(k: usize, d_dz: &[Multivector]) -> Result<Self, ComplexError> {
        if d_dz.len() != k || d_dz.iter().any(|t| t.dim() != 2 * k) {
            return Err(ComplexError::Contract(format!("expected {} forms on {} generators", k, 2 * k)));
        }
        let to_real = real_images(k);
        let mut real_table = vec![Multivector::zero(2 * k); 2 * k];
        let half = C::from_ratio(1, 2);
        for j in 0..k {
            let d = &d_dz[j];
            let db = bar(k, d);
            // e_{2j-1} = (dz + dz̄)/2, e_{2j} = (dz − dz̄)/(2i)
            real_table[2 * j] = d.add(&db).scale(&half).map_linear(&to_real);
            real_table[2 * j + 1] = d.sub(&db).scale(&(-(&half * &C::i()))).map_linear(&to_real);
        }
        let lie = LieStructure::new(BasedSpace::standard(2 * k), real_table)
            .map_err(|e| ComplexError::Contract(format!("table does not define a Lie algebra: {}", e)))?;
        Self::from_generators(&lie, to_real[..k].to_vec())
    }

    /// Parses `d(dz_j)` over the labels `dz1.., dzb1..`.
    pub fn from_table_strings(k: usize, d_dz: &[&str]) -> Result<Self, ComplexError> {
        let space = abstract_space(k);
        let forms = d_dz
            .iter()
            .map(|s| space.parse(s).map_err(|e| ComplexError::Contract(format!("'{}': {}", s, e))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_table(k, &forms)
    }

    /// The flat splitting of the abelian `ℝ^{2k}`.
    pub fn flat(k: usize) -> Self {
        Self::from_table(k, &vec![Multivector::zero(2 * k); k]).expect("flat table")
    }

    /// Re-frames so that the hermitian Gram matrix `h_ij = ⟨dz_i, dz_j⟩`
    /// becomes the identity. Requires an exact rational square root of every
    /// pivot of the `LDL*` factorisation.
    pub fn with_metric(&self, h: &CMatrix) -> Result<Self, ComplexError> {
        let a = unitary_frame(h, self.k)?;
        let gens: Vec<Multivector> = (0..self.k)
            .map(|i| {
                (0..self.k).fold(Multivector::zero(self.ambient.dim()), |acc, j| {
                    acc.add(&self.generators[j].scale(&a[(i, j)]))
                })
            })
            .collect();
        Self::from_generators(&self.ambient, gens)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ambient(&self) -> &LieStructure {
        &self.ambient
    }

    pub fn generators(&self) -> &[Multivector] {
        &self.generators
    }

    /// `d` of the abstract generators `dz_1..dz_k, dz̄_1..dz̄_k`.
    pub fn table(&self) -> &[Multivector] {
        &self.table
    }

    pub fn space(&self) -> &BasedSpace {
        &self.space
    }

    /// Real frame `Re dz_j, Im dz_j` of the transverse codirections.
    pub fn leaf_codirections(&self) -> Vec<Multivector> {
        self.generators.iter().flat_map(|g| [g.real_part(), g.imag_part()]).collect()
    }

    pub fn d(&self, w: &Multivector) -> Multivector {
        extend_derivation(&self.table, w)
    }

    pub fn bar(&self, w: &Multivector) -> Multivector {
        bar(self.k, w)
    }

    /// Rewrites a form in the real orthonormal frame `e_{2j−1} = Re dz_j`,
    /// `e_{2j} = Im dz_j`.
    pub fn to_real_frame(&self, w: &Multivector) -> Multivector {
        w.map_linear(&real_images(self.k))
    }

    pub fn from_real_frame(&self, w: &Multivector) -> Multivector {
        w.map_linear(&complex_images(self.k))
    }

    /// `⋆` on a form in the abstract basis.
    pub fn star(&self, w: &Multivector) -> Multivector {
        self.from_real_frame(&real_star(&self.to_real_frame(w)))
    }

    /// Coefficient of `e_1 ∧ … ∧ e_{2k}`.
    pub fn integral(&self, w: &Multivector) -> C {
        self.to_real_frame(&w.grade_part(2 * self.k)).top_coeff()
    }

    /// `h(α, β)`: top coefficient of `α ∧ ⋆β̄`.
    pub fn hermitian(&self, a: &Multivector, b: &Multivector) -> C {
        self.integral(&a.wedge(&self.star(&self.bar(b))))
    }

    /// Transverse fundamental form `Σ e_{2j−1} ∧ e_{2j} = (i/2) Σ dz_j ∧ dz̄_j`.
    pub fn omega(&self) -> Multivector {
        let k = self.k;
        let c = &C::i() * &C::from_ratio(1, 2);
        (0..k).fold(Multivector::zero(2 * k), |acc, j| acc.add(&Multivector::monomial(2 * k, &[j, k + j]).scale(&c)))
    }
}

fn abstract_space(k: usize) -> BasedSpace {
    let labels = (1..=k).map(|j| format!("dz{}", j)).chain((1..=k).map(|j| format!("dzb{}", j))).collect();
    BasedSpace::with_labels(labels).expect("distinct labels")
}

/// Images of `dz_j, dz̄_j` in the real frame.
fn real_images(k: usize) -> Vec<Multivector> {
    let n = 2 * k;
    let dz = |j: usize, s: i64| Multivector::gen(n, 2 * j).add(&Multivector::gen(n, 2 * j + 1).scale(&(&C::i() * &C::from_int(s))));
    (0..k).map(|j| dz(j, 1)).chain((0..k).map(|j| dz(j, -1))).collect()
}

/// Images of the real frame in the abstract basis.
fn complex_images(k: usize) -> Vec<Multivector> {
    let n = 2 * k;
    let half = C::from_ratio(1, 2);
    let mhalf_i = -(&half * &C::i());
    (0..2 * k)
        .map(|a| {
            let j = a / 2;
            let (z, zb) = (Multivector::gen(n, j), Multivector::gen(n, k + j));
            if a % 2 == 0 {
                z.add(&zb).scale(&half)
            } else {
                z.sub(&zb).scale(&mhalf_i)
            }
        })
        .collect()
}

/// Complex conjugation in the abstract basis: conjugate coefficients and swap
/// `dz_j ↔ dz̄_j`.
fn bar(k: usize, w: &Multivector) -> Multivector {
    let n = 2 * k;
    let swap: Vec<Multivector> = (0..n).map(|a| Multivector::gen(n, if a < k { a + k } else { a - k })).collect();
    w.conj().map_linear(&swap)
}

/// Hodge star of the standard orthonormal frame: `e_I ↦ ε(I, I^c) e_{I^c}`.
pub fn real_star(w: &Multivector) -> Multivector {
    let n = w.dim();
    let full: Blade = if n == 0 { 0 } else { (1u64 << n) - 1 };
    let mut out = Multivector::zero(n);
    for (b, c) in w.terms() {
        let comp = full & !b;
        let s = wedge_sign(b, comp);
        out.add_term(comp, &c.scale(&Rational::from_integer(s.into())));
    }
    out
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| Rational::new(sn, sd))
}

/// `A` with `A H A* = 1`, as `D^{-1/2} L^{-1}` from `H = L D L*`.
fn unitary_frame(h: &CMatrix, k: usize) -> Result<CMatrix, ComplexError> {
    if h.rows() != k || h.cols() != k {
        return Err(ComplexError::Metric(format!("expected a {}x{} matrix", k, k)));
    }
    if conj_matrix(&h.transpose()) != *h {
        return Err(ComplexError::Metric("matrix is not hermitian".into()));
    }
    let mut l = Matrix::<C>::identity(k);
    let mut d: Vec<Rational> = Vec::with_capacity(k);
    for j in 0..k {
        let mut djj = h[(j, j)].clone();
        for s in 0..j {
            djj -= &(&l[(j, s)] * &l[(j, s)].conj()).scale(&d[s]);
        }
        if !djj.is_real() || !djj.re.is_positive() {
            return Err(ComplexError::Metric("matrix is not positive definite".into()));
        }
        d.push(djj.re.clone());
        for i in j + 1..k {
            let mut v = h[(i, j)].clone();
            for s in 0..j {
                v -= &(&l[(i, s)] * &l[(j, s)].conj()).scale(&d[s]);
            }
            l[(i, j)] = v.scale(&(Rational::from_integer(BigInt::from(1)) / &d[j]));
        }
    }
    let linv = l.inverse().expect("unit triangular");
    let mut a = linv;
    for (i, di) in d.iter().enumerate() {
        let s = rational_sqrt(di)
            .ok_or_else(|| ComplexError::Metric(format!("pivot {} has no rational square root", di)))?;
        let inv = C::real(Rational::from_integer(BigInt::from(1)) / s);
        for j in 0..k {
            a[(i, j)] = &a[(i, j)] * &inv;
        }
    }
    Ok(a)
}

/// `D`, `d_L`, `d_L̄` on the whole transverse algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Operators {
    pub grading: Bigrading,
    pub d: CMatrix,
    pub d_l: CMatrix,
    pub d_lbar: CMatrix,
}

/// One bidegree block of an operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorMatrix {
    pub source: (usize, usize),
    pub target: (usize, usize),
    pub matrix: CMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorIdentities {
    pub d_squared: bool,
    pub d_l_squared: bool,
    pub d_lbar_squared: bool,
    pub anticommute: bool,
}

impl OperatorIdentities {
    pub fn all(&self) -> bool {
        self.d_squared && self.d_l_squared && self.d_lbar_squared && self.anticommute
    }
}

impl Operators {
    pub fn k(&self) -> usize {
        self.grading.k
    }

    /// Block of `op` from `A^{p,q}` to `A^{p+dp,q+dq}`.
    pub fn block(&self, op: &CMatrix, (p, q): (usize, usize), (dp, dq): (usize, usize)) -> OperatorMatrix {
        let src = self.grading.pq(p, q);
        let tgt = self.grading.pq(p + dp, q + dq);
        OperatorMatrix { source: (p, q), target: (p + dp, q + dq), matrix: sub_block(op, &tgt, &src) }
    }

    pub fn identities(&self) -> OperatorIdentities {
        OperatorIdentities {
            d_squared: self.d.mul(&self.d).is_zero(),
            d_l_squared: self.d_l.mul(&self.d_l).is_zero(),
            d_lbar_squared: self.d_lbar.mul(&self.d_lbar).is_zero(),
            anticommute: self.d_l.mul(&self.d_lbar).add(&self.d_lbar.mul(&self.d_l)).is_zero(),
        }
    }
}

pub fn build_operators(s: &TransverseSplitting) -> Result<Operators, ComplexError> {
    let k = s.k;
    let grading = Bigrading::new(k);
    let d = grading.matrix_of(|w| s.d(w));
    let n = grading.len();
    let mut d_l = Matrix::zeros(n, n);
    let mut d_lbar = Matrix::zeros(n, n);
    for (j, src) in grading.basis.iter().enumerate() {
        let (p, q) = bidegree(k, *src);
        for i in 0..n {
            let c = &d[(i, j)];
            if c.is_zero() {
                continue;
            }
            match bidegree(k, grading.basis[i]) {
                t if t == (p, q + 1) => d_l[(i, j)] = c.clone(),
                t if t == (p + 1, q) => d_lbar[(i, j)] = c.clone(),
                t => {
                    return Err(ComplexError::Contract(format!(
                        "D maps A^({},{}) into A^({},{})",
                        p, q, t.0, t.1
                    )))
                }
            }
        }
    }
    Ok(Operators { grading, d, d_l, d_lbar })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flavor {
    D,
    #[serde(rename = "dL")]
    DL,
    #[serde(rename = "dLbar")]
    DLbar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohomologyDims {
    /// `dim H^r_D`, `r = 0..=2k`
    #[serde(rename = "D")]
    pub d: Vec<usize>,
    /// `h^{p,q}` of `d_L`, indexed `[p][q]`
    #[serde(rename = "dL")]
    pub d_l: Vec<Vec<usize>>,
    #[serde(rename = "dLbar")]
    pub d_lbar: Vec<Vec<usize>>,
}

pub fn cohomology_dims(ops: &Operators) -> CohomologyDims {
    let k = ops.k();
    let g = &ops.grading;
    let d = (0..=2 * k)
        .map(|r| {
            let here = g.degree(r);
            let below = if r > 0 { g.degree(r - 1) } else { Vec::new() };
            here.len() - rank_on(&ops.d, &here) - rank_on(&ops.d, &below)
        })
        .collect();
    let bigraded = |op: &CMatrix, raises_q: bool| -> Vec<Vec<usize>> {
        (0..=k)
            .map(|p| {
                (0..=k)
                    .map(|q| {
                        let here = g.pq(p, q);
                        let below = match (raises_q, p, q) {
                            (true, _, 0) | (false, 0, _) => Vec::new(),
                            (true, _, _) => g.pq(p, q - 1),
                            (false, _, _) => g.pq(p - 1, q),
                        };
                        here.len() - rank_on(op, &here) - rank_on(op, &below)
                    })
                    .collect()
            })
            .collect()
    };
    CohomologyDims { d, d_l: bigraded(&ops.d_l, true), d_lbar: bigraded(&ops.d_lbar, false) }
}

/// Hodge data: `⋆`, conjugation and the Gram matrix of `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeData {
    pub star: CMatrix,
    pub star_inverse: CMatrix,
    /// `bar(x) = conj_matrix · x̄`
    pub conj: CMatrix,
    /// `G[a][b] = h(basis_a, basis_b)`
    pub gram: CMatrix,
    /// coefficient of the real volume in `dz_1…dz_k dz̄_1…dz̄_k`
    pub top: C,
}

pub fn hodge_data(s: &TransverseSplitting, g: &Bigrading) -> HodgeData {
    let k = s.k;
    let star = g.matrix_of(|w| s.star(w));
    let signs = Matrix::from_fn(g.len(), g.len(), |i, j| {
        if i != j {
            C::zero()
        } else {
            let r = grade(g.basis[i]);
            C::from_int(if (r * (2 * k - r)).is_multiple_of(2) { 1 } else { -1 })
        }
    });
    let star_inverse = signs.mul(&star);
    let conj = g.matrix_of(|w| s.bar(w));
    let n2 = 2 * k;
    let gram = Matrix::from_fn(g.len(), g.len(), |a, b| {
        s.hermitian(&Multivector::term(n2, g.basis[a], C::one()), &Multivector::term(n2, g.basis[b], C::one()))
    });
    let full: Blade = if n2 == 0 { 0 } else { (1u64 << n2) - 1 };
    let top = s.integral(&Multivector::term(n2, full, C::one()));
    HodgeData { star, star_inverse, conj, gram, top }
}

/// `⋆` applied to a form; rejects forms on a different number of generators.
pub fn hodge_star(s: &TransverseSplitting, w: &Multivector) -> Result<Multivector, ComplexError> {
    if w.dim() != 2 * s.k {
        return Err(ComplexError::Contract(format!(
            "form lives on {} generators, the transverse algebra has {}",
            w.dim(),
            2 * s.k
        )));
    }
    Ok(s.star(w))
}

/// `⋆⋆ = (−1)^{r(2k−r)}` on every degree, as a matrix identity.
pub fn star_star_check(s: &TransverseSplitting, g: &Bigrading) -> Vec<bool> {
    let h = hodge_data(s, g);
    let ss = h.star.mul(&h.star);
    (0..=2 * s.k)
        .map(|r| {
            let idx = g.degree(r);
            let sign = C::from_int(if (r * (2 * s.k - r)).is_multiple_of(2) { 1 } else { -1 });
            idx.iter().all(|&j| (0..g.len()).all(|i| ss[(i, j)] == if i == j { sign.clone() } else { C::zero() }))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adjoints {
    pub d_star: CMatrix,
    pub d_l_star: CMatrix,
    pub d_lbar_star: CMatrix,
    pub lap_d: CMatrix,
    pub lap_d_l: CMatrix,
    pub lap_d_lbar: CMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointReport {
    /// `D` vanishes on `A^{2k−1}`, i.e. `∫ Dγ = 0`
    pub unimodular: bool,
    pub d_adjoint: bool,
    pub d_l_adjoint: bool,
    pub d_lbar_adjoint: bool,
    pub laplacians_self_adjoint: bool,
    pub gram_positive: bool,
    pub harmonic: CohomologyDims,
    pub harmonic_matches_cohomology: bool,
}

/// `A*` is the `h`-adjoint of `A`: `Aᵀ G = G conj(A*)`.
fn is_adjoint(a: &CMatrix, a_star: &CMatrix, g: &CMatrix) -> bool {
    a.transpose().mul(g) == g.mul(&conj_matrix(a_star))
}

pub fn adjoints(ops: &Operators, h: &HodgeData) -> Adjoints {
    let conj_by_star = |a: &CMatrix| h.star.mul(a).mul(&h.star).neg();
    let d_star = conj_by_star(&ops.d);
    let d_l_star = conj_by_star(&ops.d_lbar);
    let d_lbar_star = conj_by_star(&ops.d_l);
    let lap = |a: &CMatrix, b: &CMatrix| b.mul(a).add(&a.mul(b));
    Adjoints {
        lap_d: lap(&ops.d, &d_star),
        lap_d_l: lap(&ops.d_l, &d_l_star),
        lap_d_lbar: lap(&ops.d_lbar, &d_lbar_star),
        d_star,
        d_l_star,
        d_lbar_star,
    }
}

fn harmonic_dims(ops: &Operators, adj: &Adjoints) -> CohomologyDims {
    let k = ops.k();
    let g = &ops.grading;
    let ker = |m: &CMatrix, idx: &[usize]| idx.len() - rank_on(m, idx);
    CohomologyDims {
        d: (0..=2 * k).map(|r| ker(&adj.lap_d, &g.degree(r))).collect(),
        d_l: (0..=k).map(|p| (0..=k).map(|q| ker(&adj.lap_d_l, &g.pq(p, q))).collect()).collect(),
        d_lbar: (0..=k).map(|p| (0..=k).map(|q| ker(&adj.lap_d_lbar, &g.pq(p, q))).collect()).collect(),
    }
}

/// Gram matrices are diagonal in the monomial basis; positivity is checked
/// on the diagonal and off-diagonal vanishing.
fn gram_positive(g: &CMatrix) -> bool {
    (0..g.rows()).all(|i| {
        (0..g.cols()).all(|j| if i == j { g[(i, i)].is_real() && g[(i, i)].re.is_positive() } else { g[(i, j)].is_zero() })
    })
}

pub fn adjoints_and_laplacians(s: &TransverseSplitting, ops: &Operators) -> (Adjoints, AdjointReport) {
    let h = hodge_data(s, &ops.grading);
    let adj = adjoints(ops, &h);
    let g = &ops.grading;
    let top_minus_one = if s.k == 0 { Vec::new() } else { g.degree(2 * s.k - 1) };
    let unimodular = top_minus_one.iter().all(|&j| (0..g.len()).all(|i| ops.d[(i, j)].is_zero()));
    let sa = |m: &CMatrix| is_adjoint(m, m, &h.gram);
    let harmonic = harmonic_dims(ops, &adj);
    let coh = cohomology_dims(ops);
    let report = AdjointReport {
        unimodular,
        d_adjoint: is_adjoint(&ops.d, &adj.d_star, &h.gram),
        d_l_adjoint: is_adjoint(&ops.d_l, &adj.d_l_star, &h.gram),
        d_lbar_adjoint: is_adjoint(&ops.d_lbar, &adj.d_lbar_star, &h.gram),
        laplacians_self_adjoint: sa(&adj.lap_d) && sa(&adj.lap_d_l) && sa(&adj.lap_d_lbar),
        gram_positive: gram_positive(&h.gram),
        harmonic_matches_cohomology: harmonic == coh,
        harmonic,
    };
    (adj, report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_bidegree: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KahlerReport {
    pub d_omega_zero: bool,
    /// `None` when the Kähler branch is skipped
    pub identities: Option<Vec<IdentityCheck>>,
    pub laplacian_relation: Option<bool>,
    pub hodge_decomposition: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl KahlerReport {
    pub fn passed(&self) -> bool {
        self.identities.as_ref().is_some_and(|ids| ids.iter().all(|c| c.pass))
            && self.laplacian_relation == Some(true)
            && self.hodge_decomposition == Some(true)
    }
}

fn compare(name: &str, g: &Bigrading, lhs: &CMatrix, rhs: &CMatrix) -> IdentityCheck {
    let k = g.k;
    let failing = (0..=k).flat_map(|p| (0..=k).map(move |q| (p, q))).find(|&(p, q)| {
        g.pq(p, q).iter().any(|&j| (0..g.len()).any(|i| lhs[(i, j)] != rhs[(i, j)]))
    });
    IdentityCheck { name: name.to_string(), pass: failing.is_none(), failing_bidegree: failing }
}

pub fn lefschetz_check(s: &TransverseSplitting, ops: &Operators) -> KahlerReport {
    let omega = s.omega();
    let d_omega = s.d(&omega);
    if !d_omega.is_zero() {
        return KahlerReport {
            d_omega_zero: false,
            identities: None,
            laplacian_relation: None,
            hodge_decomposition: None,
            diagnostic: Some(format!("D omega = {} != 0", s.space.print(&d_omega))),
        };
    }
    let g = &ops.grading;
    let h = hodge_data(s, g);
    let adj = adjoints(ops, &h);
    let lef = g.matrix_of(|w| omega.wedge(w));
    let lambda = h.star_inverse.mul(&lef).mul(&h.star);
    let counting = Matrix::from_fn(g.len(), g.len(), |i, j| {
        if i != j {
            C::zero()
        } else {
            let (p, q) = bidegree(s.k, g.basis[i]);
            C::from_int(s.k as i64 - (p + q) as i64)
        }
    });
    let i = C::i();
    let mi = -C::i();
    let identities = vec![
        compare("[Lambda, L] = (k - (p+q)) id", g, &lambda.commutator(&lef), &counting),
        compare("[dL*, L] = i dLbar", g, &adj.d_l_star.commutator(&lef), &ops.d_lbar.scale(&i)),
        compare("[dLbar*, L] = -i dL", g, &adj.d_lbar_star.commutator(&lef), &ops.d_l.scale(&mi)),
        compare("[Lambda, dL] = -i dLbar*", g, &lambda.commutator(&ops.d_l), &adj.d_lbar_star.scale(&mi)),
        compare("[Lambda, dLbar] = i dL*", g, &lambda.commutator(&ops.d_lbar), &adj.d_l_star.scale(&i)),
    ];
    let laplacian_relation = adj.lap_d == adj.lap_d_l.scale(&C::from_int(2));
    let coh = cohomology_dims(ops);
    let hodge_decomposition = (0..=2 * s.k).all(|r| {
        let sum: usize = (0..=s.k).flat_map(|p| (0..=s.k).map(move |q| (p, q))).filter(|(p, q)| p + q == r).map(|(p, q)| coh.d_l[p][q]).sum();
        sum == coh.d[r]
    });
    KahlerReport {
        d_omega_zero: true,
        identities: Some(identities),
        laplacian_relation: Some(laplacian_relation),
        hodge_decomposition: Some(hodge_decomposition),
        diagnostic: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingEntry {
    pub degree: Vec<usize>,
    pub dual: Vec<usize>,
    pub dims: (usize, usize),
    pub determinant: Option<C>,
    pub nondegenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub d_symmetric: bool,
    pub d_l_symmetric: bool,
    pub pairings: Vec<PairingEntry>,
}

impl DualityReport {
    pub fn passed(&self) -> bool {
        self.d_symmetric && self.d_l_symmetric && self.pairings.iter().all(|p| p.nondegenerate)
    }
}

fn harmonic_basis(lap: &CMatrix, g: &Bigrading, idx: &[usize]) -> Vec<Multivector> {
    if idx.is_empty() {
        return Vec::new();
    }
    sub_cols(lap, idx)
        .kernel()
        .iter()
        .map(|c| {
            let mut full = vec![C::zero(); g.len()];
            for (v, &i) in c.iter().zip(idx) {
                full[i] = v.clone();
            }
            g.form(&full)
        })
        .collect()
}

fn pairing(s: &TransverseSplitting, a: &[Multivector], b: &[Multivector], degree: Vec<usize>, dual: Vec<usize>) -> PairingEntry {
    let dims = (a.len(), b.len());
    let determinant = (dims.0 == dims.1).then(|| {
        if dims.0 == 0 {
            C::one()
        } else {
            Matrix::from_fn(dims.0, dims.1, |i, j| s.integral(&a[i].wedge(&b[j]))).det()
        }
    });
    let nondegenerate = determinant.as_ref().is_some_and(|d| !d.is_zero());
    PairingEntry { degree, dual, dims, determinant, nondegenerate }
}

pub fn duality_report(s: &TransverseSplitting, ops: &Operators) -> DualityReport {
    let k = s.k;
    let g = &ops.grading;
    let coh = cohomology_dims(ops);
    let h = hodge_data(s, g);
    let adj = adjoints(ops, &h);
    let d_symmetric = (0..=2 * k).all(|r| coh.d[r] == coh.d[2 * k - r]);
    let d_l_symmetric = (0..=k).all(|p| (0..=k).all(|q| coh.d_l[p][q] == coh.d_l[k - p][k - q]));
    let mut pairings = Vec::new();
    for r in 0..=2 * k {
        let a = harmonic_basis(&adj.lap_d, g, &g.degree(r));
        let b = harmonic_basis(&adj.lap_d, g, &g.degree(2 * k - r));
        pairings.push(pairing(s, &a, &b, vec![r], vec![2 * k - r]));
    }
    for p in 0..=k {
        for q in 0..=k {
            let a = harmonic_basis(&adj.lap_d_l, g, &g.pq(p, q));
            let b = harmonic_basis(&adj.lap_d_l, g, &g.pq(k - p, k - q));
            pairings.push(pairing(s, &a, &b, vec![p, q], vec![k - p, k - q]));
        }
    }
    DualityReport { d_symmetric, d_l_symmetric, pairings }
}

/// Everything the `hodge` command reports, in one pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HodgeSummary {
    pub k: usize,
    pub operator_identities: OperatorIdentities,
    pub dims: CohomologyDims,
    pub star_star: Vec<bool>,
    pub adjoints: AdjointReport,
    pub kahler: KahlerReport,
    pub duality: DualityReport,
}

pub fn hodge_summary(s: &TransverseSplitting) -> Result<HodgeSummary, ComplexError> {
    let ops = build_operators(s)?;
    let (_, adjoints) = adjoints_and_laplacians(s, &ops);
    Ok(HodgeSummary {
        k: s.k,
        operator_identities: ops.identities(),
        dims: cohomology_dims(&ops),
        star_star: star_star_check(s, &ops.grading),
        adjoints,
        kahler: lefschetz_check(s, &ops),
        duality: duality_report(s, &ops),
    })
}

/// `C(n, r)`.
pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Hodge numbers as a map, convenient for reports.
pub fn hodge_numbers(c: &CohomologyDims) -> BTreeMap<(usize, usize), usize> {
    c.d_l.iter().enumerate().flat_map(|(p, row)| row.iter().enumerate().map(move |(q, h)| ((p, q), *h))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcs::{iwasawa_closed_spinor, iwasawa_spinor, spinor_to_structure};
    use crate::lie::iwasawa;

    fn iwasawa_transverse() -> TransverseSplitting {
        let l = iwasawa();
        let s = l.space();
        TransverseSplitting::from_generators(&l, vec![s.parse("e1 + i e2").unwrap(), s.parse("e3 + i e4").unwrap()])
            .unwrap()
    }

    /// The Iwasawa algebra as a complex 3-fold: `d dz3 = dz1 ∧ dz2`.
    fn iwasawa_complex() -> TransverseSplitting {
        TransverseSplitting::from_table_strings(3, &["0", "0", "dz1^dz2"]).unwrap()
    }

    #[test]
    fn splits_from_structures() {
        let ab = LieStructure::abelian(2);
        let cx = GCStructure::standard_complex(1);
        let s = TransverseSplitting::from_gcs(&cx, &ab).unwrap();
        assert_eq!(s.k(), 1);
        assert_eq!(s.generators()[0], BasedSpace::standard(2).parse("e1 + i e2").unwrap());
        let sy = GCStructure::from_symplectic(&BasedSpace::standard(2).parse("e1^e2").unwrap()).unwrap();
        assert_eq!(TransverseSplitting::from_gcs(&sy, &ab).unwrap().k(), 0);

        let l = iwasawa();
        let j = spinor_to_structure(&iwasawa_closed_spinor()).unwrap();
        let s = TransverseSplitting::from_gcs(&j, &l).unwrap();
        assert_eq!(s.k(), 2);
        assert!(s.table().iter().all(|t| t.is_zero()));
        let bad = spinor_to_structure(&iwasawa_spinor()).unwrap();
        assert!(matches!(TransverseSplitting::from_gcs(&bad, &l), Err(ComplexError::Contract(_))));
    }

    #[test]
    fn rejects_unclosed_generators() {
        let l = iwasawa();
        let s = l.space();
        let r = TransverseSplitting::from_generators(&l, vec![s.parse("e1 + i e5").unwrap()]);
        assert!(matches!(r, Err(ComplexError::NotClosed { .. })));
    }

    #[test]
    fn iwasawa_transverse_cohomology() {
        let s = iwasawa_transverse();
        let ops = build_operators(&s).unwrap();
        assert!(ops.d.is_zero());
        let c = cohomology_dims(&ops);
        assert_eq!(c.d, vec![1, 4, 6, 4, 1]);
        for p in 0..=2 {
            for q in 0..=2 {
                assert_eq!(c.d_l[p][q], binomial(2, p) * binomial(2, q));
            }
        }
    }

    #[test]
    fn iwasawa_complex_numbers() {
        let s = iwasawa_complex();
        let ops = build_operators(&s).unwrap();
        assert!(ops.identities().all());
        let c = cohomology_dims(&ops);
        assert_eq!(c.d, vec![1, 4, 8, 10, 8, 4, 1]);
        assert_eq!(c.d_l[0][1], 2);
        assert_eq!(c.d_l[1][0], 3);
        assert_eq!(c.d_l[1][1], 6);
        let (_, r) = adjoints_and_laplacians(&s, &ops);
        assert!(r.unimodular && r.d_adjoint && r.d_l_adjoint && r.d_lbar_adjoint);
        assert!(r.harmonic_matches_cohomology && r.laplacians_self_adjoint && r.gram_positive);
        let k = lefschetz_check(&s, &ops);
        assert!(!k.d_omega_zero && k.identities.is_none());
        assert!(duality_report(&s, &ops).passed());
    }

    #[test]
    fn star_conventions() {
        let s = TransverseSplitting::flat(1);
        let r = BasedSpace::standard(2);
        let e = |t: &str| r.parse(t).unwrap();
        assert_eq!(real_star(&e("e1")), e("e2"));
        assert_eq!(real_star(&e("e2")), e("-e1"));
        assert_eq!(real_star(&e("1")), e("e1^e2"));
        for k in 1..=3 {
            let s = TransverseSplitting::flat(k);
            assert!(star_star_check(&s, &Bigrading::new(k)).iter().all(|b| *b));
        }
        let dz = s.space().parse("dz1").unwrap();
        // ⋆ maps A^{1,0} to A^{1,0}
        let st = s.star(&dz);
        assert_eq!(st, dz.scale(&-C::i()));
    }

    #[test]
    fn flat_kahler_identities() {
        for k in 1..=3 {
            let s = TransverseSplitting::flat(k);
            let ops = build_operators(&s).unwrap();
            let r = lefschetz_check(&s, &ops);
            assert!(r.passed(), "k = {}: {:?}", k, r);
        }
    }

    #[test]
    fn lambda_l_on_k1() {
        let s = TransverseSplitting::flat(1);
        let ops = build_operators(&s).unwrap();
        let g = &ops.grading;
        let h = hodge_data(&s, g);
        let lef = g.matrix_of(|w| s.omega().wedge(w));
        let lambda = h.star_inverse.mul(&lef).mul(&h.star);
        let c = lambda.commutator(&lef);
        let one = g.pq(0, 0)[0];
        let top = g.pq(1, 1)[0];
        assert_eq!(c[(one, one)], C::one());
        assert_eq!(c[(top, top)], C::from_int(-1));
    }

    #[test]
    fn contrived_table_drops_h01() {
        let closed = build_operators(&TransverseSplitting::flat(3)).unwrap();
        let c0 = cohomology_dims(&closed);
        let c1 = cohomology_dims(&build_operators(&iwasawa_complex()).unwrap());
        assert_eq!(c0.d_l[0][1], c1.d_l[0][1] + 1);
    }

    #[test]
    fn metric_reframing() {
        let l = LieStructure::abelian(2);
        let s = TransverseSplitting::from_generators(&l, vec![BasedSpace::standard(2).parse("e1 + i e2").unwrap()]).unwrap();
        let h = crate::linalg::cmat(&[&[4]]);
        let s2 = s.with_metric(&h).unwrap();
        assert_eq!(s2.generators()[0], BasedSpace::standard(2).parse("1/2 e1 + 1/2 i e2").unwrap());
        assert!(matches!(s.with_metric(&crate::linalg::cmat(&[&[2]])), Err(ComplexError::Metric(_))));
        let h = crate::linalg::cmat(&[&[1, 1], &[1, 2]]);
        assert!(unitary_frame(&h, 2).is_ok());
    }
}
