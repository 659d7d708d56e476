//! Lie algebras given by the differentials of the dual generators, the
//! Chevalley–Eilenberg differential, and the Courant bracket on invariant
//! sections of `(g ⊕ g*) ⊗ ℂ`.
//!
//! Conventions: `de^k` is a 2-form, 2-forms are evaluated as
//! `e^{ij}(X, Y) = e^i(X)e^j(Y) − e^j(X)e^i(Y)`, and the bracket satisfies
//! `dα(X, Y) = −α([X, Y])` for invariant 1-forms α. Structure constants
//! `[e_i, e_j] = Σ c^k_{ij} e_k` therefore correspond to
//! `de^k = −Σ_{i<j} c^k_{ij} e^i∧e^j`.

use std::collections::BTreeMap;

use crate::exterior::{indices, BasedSpace, Blade, GeneralizedVector, Multivector};
use crate::linalg::{span_basis, Matrix};
use crate::scalar::GaussianRational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LieError {
    #[error("d_table has {got} entries for a space of dimension {dim}")]
    TableSize { dim: usize, got: usize },
    #[error("de^{generator} must be a real 2-form")]
    NotReal2Form { generator: usize },
    #[error("d^2 e^{generator} = {witness} != 0 (Jacobi identity fails)")]
    NotClosed { generator: usize, witness: String },
    #[error("structure constants are not antisymmetric: {0}")]
    NotAntisymmetric(String),
    #[error("algebra was declared nilpotent but its lower central series stabilises at dimension {0}")]
    NotNilpotent(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieStructure {
    space: BasedSpace,
    d_table: Vec<Multivector>,
}

/// Outcome of [`LieStructure::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct LieReport {
    pub antisymmetric: bool,
    pub antisymmetry_violations: Vec<String>,
    pub d_squared_zero: bool,
    /// first generator (1-based) with `d²e^k ≠ 0`, and the offending form
    pub first_failure: Option<(usize, String)>,
    /// nilpotency class, `None` when not nilpotent
    pub nilpotency_class: Option<usize>,
}

impl LieReport {
    pub fn valid(&self) -> bool {
        self.antisymmetric && self.d_squared_zero
    }
}

impl LieStructure {
    /// Builds and validates (`d² = 0` on every generator).
    pub fn new(space: BasedSpace, d_table: Vec<Multivector>) -> Result<Self, LieError> {
        let l = Self::unchecked(space, d_table)?;
        let r = l.validate();
        if let Some((generator, witness)) = r.first_failure {
            return Err(LieError::NotClosed { generator, witness });
        }
        Ok(l)
    }

    /// Builds without checking the Jacobi identity; shape and reality are still enforced.
    pub fn unchecked(space: BasedSpace, d_table: Vec<Multivector>) -> Result<Self, LieError> {
        let n = space.dim();
        if d_table.len() != n {
            return Err(LieError::TableSize { dim: n, got: d_table.len() });
        }
        for (k, d) in d_table.iter().enumerate() {
            if d.dim() != n || !d.is_real() || !(d.is_zero() || d.degree() == Some(2)) {
                return Err(LieError::NotReal2Form { generator: k + 1 });
            }
        }
        Ok(LieStructure { space, d_table })
    }

    pub fn abelian(n: usize) -> Self {
        LieStructure { space: BasedSpace::standard(n), d_table: vec![Multivector::zero(n); n] }
    }

    /// Parses `de^k` for the listed generators; absent generators are closed.
    pub fn from_strings(n: usize, d: &[(&str, &str)]) -> Result<Self, Box<dyn std::error::Error>> {
        let space = BasedSpace::standard(n);
        let mut table = vec![Multivector::zero(n); n];
        for (g, s) in d {
            let k = space.index_of(g).ok_or_else(|| format!("unknown generator {}", g))?;
            table[k] = space.parse(s)?;
        }
        Ok(Self::new(space, table)?)
    }

    /// `c[(i, j, k)] = c^k_{ij}` (0-based) with `[e_i, e_j] = Σ_k c^k_{ij} e_k`.
    pub fn from_structure_constants(
        n: usize,
        c: &BTreeMap<(usize, usize, usize), GaussianRational>,
    ) -> Result<Self, LieError> {
        let mut bad = Vec::new();
        for (&(i, j, k), v) in c {
            let other = c.get(&(j, i, k)).cloned().unwrap_or_else(GaussianRational::zero);
            if &(-&other) != v {
                bad.push(format!("c^{}_{}{} = {} but c^{}_{}{} = {}", k + 1, i + 1, j + 1, v, k + 1, j + 1, i + 1, other));
            }
        }
        if !bad.is_empty() {
            return Err(LieError::NotAntisymmetric(bad.join("; ")));
        }
        let mut table = vec![Multivector::zero(n); n];
        for (&(i, j, k), v) in c {
            if i < j {
                table[k].add_term(1 << i | 1 << j, &-v);
            }
        }
        Self::new(BasedSpace::standard(n), table)
    }

    /// `c^k_{ij}` for `i < j`, nonzero entries only.
    pub fn structure_constants(&self) -> BTreeMap<(usize, usize, usize), GaussianRational> {
        let mut out = BTreeMap::new();
        for (k, d) in self.d_table.iter().enumerate() {
            for (b, c) in d.terms() {
                let ij: Vec<usize> = indices(b).collect();
                out.insert((ij[0], ij[1], k), -c);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> &BasedSpace {
        &self.space
    }

    pub fn d_table(&self) -> &[Multivector] {
        &self.d_table
    }

    pub fn is_abelian(&self) -> bool {
        self.d_table.iter().all(|d| d.is_zero())
    }

    pub fn validate(&self) -> LieReport {
        let n = self.dim();
        let mut first_failure = None;
        for k in 0..n {
            let dd = self.ce_d(&self.d_table[k]);
            if !dd.is_zero() {
                first_failure = Some((k + 1, self.space.print(&dd)));
                break;
            }
        }
        let ok = first_failure.is_none();
        LieReport {
            antisymmetric: true,
            antisymmetry_violations: Vec::new(),
            d_squared_zero: ok,
            first_failure,
            nilpotency_class: if ok { self.nilpotency_class() } else { None },
        }
    }

    /// Chevalley–Eilenberg differential, the antiderivation extending `d_table`.
    pub fn ce_d(&self, w: &Multivector) -> Multivector {
        assert_eq!(w.dim(), self.dim(), "ce_d: space mismatch");
        extend_derivation(&self.d_table, w)
    }

    /// `[X, Y]` with `[X, Y]^k = −de^k(X, Y)`.
    pub fn bracket(&self, x: &[GaussianRational], y: &[GaussianRational]) -> Vec<GaussianRational> {
        self.d_table.iter().map(|d| -d.eval2(x, y)).collect()
    }

    /// Courant bracket of invariant sections. Since `i_X η` is constant its
    /// differential vanishes and the bracket reduces to
    /// `[X, Y] + i_X dη − i_Y dξ`.
    pub fn courant_bracket(&self, u: &GeneralizedVector, v: &GeneralizedVector) -> GeneralizedVector {
        let vec = self.bracket(&u.vector, &v.vector);
        let form = self
            .ce_d(&v.covector_form())
            .interior(&u.vector)
            .sub(&self.ce_d(&u.covector_form()).interior(&v.vector));
        GeneralizedVector::from_parts(vec, &form)
    }

    /// Span of all brackets `[a, b]` with a, b drawn from the given spanning sets.
    pub fn bracket_span(&self, a: &[Vec<GaussianRational>], b: &[Vec<GaussianRational>]) -> Vec<Vec<GaussianRational>> {
        let mut vs = Vec::new();
        for x in a {
            for y in b {
                let z = self.bracket(x, y);
                if z.iter().any(|c| !c.is_zero()) {
                    vs.push(z);
                }
            }
        }
        span_basis(&vs, self.dim())
    }

    /// Dimensions of the lower central series `g ⊇ [g,g] ⊇ [g,[g,g]] ⊇ …`
    /// until it stabilises.
    pub fn lower_central_series(&self) -> Vec<usize> {
        let n = self.dim();
        let g: Vec<Vec<GaussianRational>> = (0..n).map(|i| GeneralizedVector::basis_vector(n, i).vector).collect();
        let mut cur = g.clone();
        let mut dims = vec![n];
        loop {
            let next = self.bracket_span(&g, &cur);
            let d = next.len();
            if d == *dims.last().unwrap() {
                return dims;
            }
            dims.push(d);
            if d == 0 {
                return dims;
            }
            cur = next;
        }
    }

    /// Smallest c with `g^{c+1} = 0`, or `None` if the series stalls above 0.
    pub fn nilpotency_class(&self) -> Option<usize> {
        let dims = self.lower_central_series();
        (*dims.last().unwrap() == 0).then(|| dims.len() - 1)
    }

    pub fn check_nilpotent_claim(&self) -> Result<usize, LieError> {
        self.nilpotency_class()
            .ok_or_else(|| LieError::NotNilpotent(*self.lower_central_series().last().unwrap()))
    }

    /// Whether `d` vanishes on `(n−1)`-forms, i.e. `tr ad_X = 0` for all X.
    pub fn is_unimodular(&self) -> bool {
        let n = self.dim();
        let e = |i| GeneralizedVector::basis_vector(n, i).vector;
        (0..n).all(|i| {
            let mut tr = GaussianRational::zero();
            for k in 0..n {
                tr += &self.bracket(&e(i), &e(k))[k];
            }
            tr.is_zero()
        })
    }

    /// Real basis of the closed 2-forms `ker(d: Λ² → Λ³)`.
    pub fn closed_two_forms(&self) -> Vec<Multivector> {
        let n = self.dim();
        let src = crate::exterior::blades_of_grade(n, 2);
        let dst = crate::exterior::blades_of_grade(n, 3);
        let cols: Vec<Vec<GaussianRational>> =
            src.iter().map(|b| d_blade(&self.d_table, *b).coords(&dst)).collect();
        if dst.is_empty() {
            return src.iter().map(|b| Multivector::term(n, *b, GaussianRational::one())).collect();
        }
        let m = Matrix::from_cols(dst.len(), &cols);
        m.kernel().iter().map(|k| Multivector::from_coords(n, &src, k)).collect()
    }
}

/// Free-function form of the Chevalley–Eilenberg differential.
/// Extends `d` on generators (a table of 2-forms, real or complex) to the
/// unique degree-one antiderivation of the exterior algebra.
pub fn extend_derivation(table: &[Multivector], w: &Multivector) -> Multivector {
    let n = w.dim();
    let mut out = Multivector::zero(n);
    for (b, c) in w.terms() {
        out = out.add(&d_blade(table, b).scale(c));
    }
    out
}

fn d_blade(table: &[Multivector], b: Blade) -> Multivector {
    let n = table.len();
    let mut out = Multivector::zero(n);
    for (s, j) in indices(b).enumerate() {
        let dj = &table[j];
        if dj.is_zero() {
            continue;
        }
        let below = b & ((1u64 << j) - 1);
        let above = b & !below & !(1u64 << j);
        let t = Multivector::term(n, below, GaussianRational::one())
            .wedge(dj)
            .wedge(&Multivector::term(n, above, GaussianRational::one()));
        out = if s % 2 == 0 { out.add(&t) } else { out.sub(&t) };
    }
    out
}

pub fn ce_d(l: &LieStructure, w: &Multivector) -> Multivector {
    l.ce_d(w)
}

pub fn courant_bracket(l: &LieStructure, u: &GeneralizedVector, v: &GeneralizedVector) -> GeneralizedVector {
    l.courant_bracket(u, v)
}

/// The Iwasawa algebra: `de5 = e13 + e42`, `de6 = e14 + e23`.
pub fn iwasawa() -> LieStructure {
    LieStructure::from_strings(6, &[("e5", "e1^e3 + e4^e2"), ("e6", "e1^e4 + e2^e3")]).expect("Iwasawa table")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        let a = LieStructure::abelian(4);
        let r = a.validate();
        assert!(r.valid());
        assert_eq!(r.nilpotency_class, Some(1));

        let w = iwasawa();
        assert_eq!(w.validate().nilpotency_class, Some(2));
        assert!(w.is_unimodular());

        // de3 = e12, de2 = e34: d²e2 = de3^e4 = e1^e2^e4 (and d²e3 = -e1^e3^e4)
        let s = BasedSpace::standard(4);
        let bad = LieStructure::unchecked(
            s.clone(),
            vec![Multivector::zero(4), s.parse("e3^e4").unwrap(), s.parse("e1^e2").unwrap(), Multivector::zero(4)],
        )
        .unwrap();
        let r = bad.validate();
        assert!(!r.d_squared_zero);
        assert_eq!(r.first_failure, Some((2, "e1^e2^e4".to_string())));
        assert!(LieStructure::new(s, bad.d_table.clone()).is_err());
    }

    #[test]
    fn ce_d_examples() {
        let w = iwasawa();
        let s = w.space().clone();
        assert_eq!(w.ce_d(&s.parse("e5").unwrap()), s.parse("e1^e3 + e4^e2").unwrap());
        // -e1^(e13 + e42) = -e1^e4^e2 = e1^e2^e4
        assert_eq!(w.ce_d(&s.parse("e1^e5").unwrap()), s.parse("e1^e2^e4").unwrap());
        assert!(w.ce_d(&s.parse("7").unwrap()).is_zero());
    }

    #[test]
    fn courant_examples() {
        let w = iwasawa();
        let s = w.space().clone();
        let e1 = GeneralizedVector::basis_vector(6, 0);
        let f5 = GeneralizedVector::basis_covector(6, 4);
        let br = w.courant_bracket(&e1, &f5);
        assert_eq!(br.covector_form(), s.parse("e3").unwrap());
        assert!(br.vector.iter().all(|c| c.is_zero()));
        // on vectors the bracket is the Lie bracket: [e1, e3] = -de5(e1,e3) e5 = -e5
        let e3 = GeneralizedVector::basis_vector(6, 2);
        let br = w.courant_bracket(&e1, &e3);
        assert_eq!(br.vector[4], GaussianRational::from_int(-1));
        assert!(br.covector.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn structure_constant_round_trip() {
        let w = iwasawa();
        let c = w.structure_constants();
        let mut full = c.clone();
        for (&(i, j, k), v) in &c {
            full.insert((j, i, k), -v);
        }
        assert_eq!(LieStructure::from_structure_constants(6, &full).unwrap(), w);
        assert!(LieStructure::from_structure_constants(6, &c).is_err());
    }

    #[test]
    fn pairing_examples() {
        let n = 2;
        let e1 = GeneralizedVector::basis_vector(n, 0);
        let e2 = GeneralizedVector::basis_vector(n, 1);
        let f1 = GeneralizedVector::basis_covector(n, 0);
        let f2 = GeneralizedVector::basis_covector(n, 1);
        assert_eq!(e1.add(&f1).pairing(&e1.add(&f1)), GaussianRational::one());
        assert!(e1.pairing(&e2).is_zero());
        assert_eq!(e1.add(&f2).pairing(&e2.add(&f1)), GaussianRational::one());
    }
}
