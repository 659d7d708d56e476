//! Complexified exterior algebra over a based real vector space.
//!
//! A basis monomial `e_{i1}∧…∧e_{ir}` (i1 < … < ir) is stored as a bitmask;
//! signs come from counting transpositions. Forms, spinors and curvatures are
//! all `Multivector`s, possibly of mixed degree.

use std::collections::BTreeMap;
use std::fmt;

use crate::expr::{self, Algebra, Dialect, ParseError};
use crate::scalar::{join_terms, GaussianRational};

pub type Blade = u64;

pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExteriorError {
    #[error("space mismatch: dimension {0} vs {1}")]
    SpaceMismatch(usize, usize),
    #[error("form_exp needs an even form of degree >= 2; found a degree {0} component")]
    NotEven(usize),
    #[error("labels must be distinct and at most {MAX_DIM} in number")]
    BadLabels,
}

/// Basis labels of a real vector space; the dual basis is written `e^k` in docs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasedSpace {
    labels: Vec<String>,
}

impl BasedSpace {
    /// Standard labels `e1..en`.
    pub fn standard(n: usize) -> Self {
        assert!(n <= MAX_DIM, "dimension {} exceeds {}", n, MAX_DIM);
        BasedSpace { labels: (1..=n).map(|i| format!("e{}", i)).collect() }
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self, ExteriorError> {
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() || labels.len() > MAX_DIM || labels.iter().any(|l| l == "i") {
            return Err(ExteriorError::BadLabels);
        }
        Ok(BasedSpace { labels })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn blade_name(&self, b: Blade) -> String {
        indices(b).map(|i| self.labels[i].as_str()).collect::<Vec<_>>().join("^")
    }

    /// Parses a form in the shared expression grammar.
    pub fn parse(&self, s: &str) -> Result<Multivector, ParseError> {
        expr::eval::<Multivector>(&expr::parse(s, Dialect::Form)?, self)
    }

    pub fn print(&self, m: &Multivector) -> String {
        assert_eq!(m.dim, self.dim());
        let mut keys: Vec<&Blade> = m.terms.keys().collect();
        keys.sort_by_key(|b| blade_order_key(**b));
        join_terms(keys.into_iter().map(|b| (&m.terms[b], self.blade_name(*b))), "*")
    }
}

/// Iterates the set bits of a blade in increasing order.
pub fn indices(b: Blade) -> impl Iterator<Item = usize> {
    (0..MAX_DIM).filter(move |i| b >> i & 1 == 1)
}

pub fn grade(b: Blade) -> usize {
    b.count_ones() as usize
}

pub fn blade_of(idx: &[usize]) -> Blade {
    idx.iter().fold(0, |acc, &i| acc | 1 << i)
}

/// Sorting key: by grade, then lexicographically on the index list.
pub fn blade_order_key(b: Blade) -> (usize, Vec<usize>) {
    (grade(b), indices(b).collect())
}

/// Sign of `e_a ∧ e_b` relative to `e_{a∪b}`; zero if they overlap.
pub fn wedge_sign(a: Blade, b: Blade) -> i32 {
    if a & b != 0 {
        return 0;
    }
    let mut swaps = 0u32;
    for j in indices(b) {
        swaps += (a >> (j + 1)).count_ones();
    }
    if swaps.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// All blades of a given grade in a space of dimension `n`, in canonical order.
pub fn blades_of_grade(n: usize, r: usize) -> Vec<Blade> {
    let mut out = Vec::new();
    fn rec(n: usize, r: usize, start: usize, cur: Blade, out: &mut Vec<Blade>) {
        if r == 0 {
            out.push(cur);
            return;
        }
        for i in start..n {
            if n - i < r {
                break;
            }
            rec(n, r - 1, i + 1, cur | 1 << i, out);
        }
    }
    rec(n, r, 0, 0, &mut out);
    out
}

#[derive(Clone, PartialEq, Eq)]
pub struct Multivector {
    dim: usize,
    terms: BTreeMap<Blade, GaussianRational>,
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", BasedSpace::standard(self.dim).print(self))
    }
}

impl Multivector {
    pub fn zero(dim: usize) -> Self {
        assert!(dim <= MAX_DIM);
        Multivector { dim, terms: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, c: GaussianRational) -> Self {
        Self::term(dim, 0, c)
    }

    pub fn one(dim: usize) -> Self {
        Self::scalar(dim, GaussianRational::one())
    }

    pub fn term(dim: usize, b: Blade, c: GaussianRational) -> Self {
        let mut m = Self::zero(dim);
        assert!(dim == MAX_DIM || b >> dim == 0, "blade outside the space");
        if !c.is_zero() {
            m.terms.insert(b, c);
        }
        m
    }

    /// The basis 1-form / vector `e_{i+1}` (0-based index `i`).
    pub fn gen(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        Self::term(dim, 1 << i, GaussianRational::one())
    }

    pub fn monomial(dim: usize, idx: &[usize]) -> Self {
        let mut m = Self::one(dim);
        for &i in idx {
            m = m.wedge(&Self::gen(dim, i));
        }
        m
    }

    /// 1-form `Σ c_i e_i`.
    pub fn from_coeffs(cs: &[GaussianRational]) -> Self {
        let mut m = Self::zero(cs.len());
        for (i, c) in cs.iter().enumerate() {
            m.add_term(1 << i, c);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &GaussianRational)> {
        self.terms.iter().map(|(b, c)| (*b, c))
    }

    pub fn coeff(&self, b: Blade) -> GaussianRational {
        self.terms.get(&b).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, b: Blade, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(b).or_insert_with(GaussianRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&b);
        }
    }

    /// Grades present, ascending.
    pub fn grades(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.terms.keys().map(|b| grade(*b)).collect();
        g.sort();
        g.dedup();
        g
    }

    /// `Some(r)` if homogeneous of degree r (zero counts as degree 0).
    pub fn degree(&self) -> Option<usize> {
        match self.grades().as_slice() {
            [] => Some(0),
            [r] => Some(*r),
            _ => None,
        }
    }

    pub fn grade_part(&self, r: usize) -> Self {
        Multivector {
            dim: self.dim,
            terms: self.terms.iter().filter(|(b, _)| grade(**b) == r).map(|(b, c)| (*b, c.clone())).collect(),
        }
    }

    /// Coefficient of the top monomial `e1∧…∧en`.
    pub fn top_coeff(&self) -> GaussianRational {
        let top = if self.dim == MAX_DIM { u64::MAX } else { (1u64 << self.dim) - 1 };
        self.coeff(top)
    }

    fn check(&self, o: &Self) -> Result<(), ExteriorError> {
        if self.dim != o.dim {
            Err(ExteriorError::SpaceMismatch(self.dim, o.dim))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, ExteriorError> {
        self.check(o)?;
        let mut out = self.clone();
        for (b, c) in &o.terms {
            out.add_term(*b, c);
        }
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.checked_add(o).expect("exterior add")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        if s.is_zero() {
            return Self::zero(self.dim);
        }
        self.map_coeffs(|c| c * s)
    }

    pub fn conj(&self) -> Self {
        self.map_coeffs(|c| c.conj())
    }

    pub fn real_part(&self) -> Self {
        self.map_coeffs(|c| GaussianRational::real(c.re.clone()))
    }

    pub fn imag_part(&self) -> Self {
        self.map_coeffs(|c| GaussianRational::real(c.im.clone()))
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.is_real())
    }

    fn map_coeffs(&self, f: impl Fn(&GaussianRational) -> GaussianRational) -> Self {
        Multivector {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter_map(|(b, c)| {
                    let v = f(c);
                    (!v.is_zero()).then_some((*b, v))
                })
                .collect(),
        }
    }

    pub fn checked_wedge(&self, o: &Self) -> Result<Self, ExteriorError> {
        self.check(o)?;
        let mut out = Self::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                match wedge_sign(*a, *b) {
                    0 => {}
                    1 => out.add_term(a | b, &(ca * cb)),
                    _ => out.add_term(a | b, &-(ca * cb)),
                }
            }
        }
        Ok(out)
    }

    pub fn wedge(&self, o: &Self) -> Self {
        self.checked_wedge(o).expect("exterior wedge")
    }

    /// `self^∧k`.
    pub fn wedge_pow(&self, k: usize) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..k {
            acc = acc.wedge(self);
        }
        acc
    }

    /// Contraction `i_X` by a vector with coefficients `x` (in the basis e_i).
    pub fn interior(&self, x: &[GaussianRational]) -> Self {
        assert_eq!(x.len(), self.dim, "interior: vector length mismatch");
        let mut out = Self::zero(self.dim);
        for (b, c) in &self.terms {
            for (pos, j) in indices(*b).enumerate() {
                if x[j].is_zero() {
                    continue;
                }
                let v = c * &x[j];
                if pos % 2 == 0 {
                    out.add_term(b & !(1 << j), &v);
                } else {
                    out.add_term(b & !(1 << j), &-v);
                }
            }
        }
        out
    }

    /// Contraction by the basis vector `e_{j+1}`.
    pub fn interior_basis(&self, j: usize) -> Self {
        let mut x = vec![GaussianRational::zero(); self.dim];
        x[j] = GaussianRational::one();
        self.interior(&x)
    }

    /// Evaluates a 2-form on a pair of vectors: `α(X, Y) = i_Y i_X α`.
    pub fn eval2(&self, x: &[GaussianRational], y: &[GaussianRational]) -> GaussianRational {
        self.grade_part(2).interior(x).interior(y).coeff(0)
    }

    /// Coefficients of the degree-1 part.
    pub fn one_form_coeffs(&self) -> Vec<GaussianRational> {
        (0..self.dim).map(|i| self.coeff(1 << i)).collect()
    }

    /// Applies the algebra morphism determined by the images of the
    /// generators: `e_i ↦ images[i]`, extended multiplicatively.
    pub fn map_linear(&self, images: &[Multivector]) -> Multivector {
        assert_eq!(images.len(), self.dim);
        let target = images.first().map_or(0, |m| m.dim);
        let mut out = Multivector::zero(target);
        for (b, c) in &self.terms {
            let mut t = Multivector::scalar(target, c.clone());
            for i in indices(*b) {
                t = t.wedge(&images[i]);
                if t.is_zero() {
                    break;
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// The vector of coefficients on the given list of blades.
    pub fn coords(&self, basis: &[Blade]) -> Vec<GaussianRational> {
        basis.iter().map(|b| self.coeff(*b)).collect()
    }

    pub fn from_coords(dim: usize, basis: &[Blade], v: &[GaussianRational]) -> Self {
        let mut m = Self::zero(dim);
        for (b, c) in basis.iter().zip(v) {
            m.add_term(*b, c);
        }
        m
    }
}

impl Algebra for Multivector {
    type Ctx = BasedSpace;

    fn scalar(space: &BasedSpace, c: GaussianRational) -> Self {
        Multivector::scalar(space.dim(), c)
    }

    fn ident(space: &BasedSpace, name: &str, pos: usize) -> Result<Self, ParseError> {
        match space.index_of(name) {
            Some(i) => Ok(Multivector::gen(space.dim(), i)),
            None => Err(ParseError { pos, message: format!("unknown generator '{}'", name) }),
        }
    }

    fn add(&self, o: &Self) -> Self {
        Multivector::add(self, o)
    }

    fn neg(&self) -> Self {
        Multivector::neg(self)
    }

    fn mul(&self, o: &Self) -> Self {
        self.wedge(o)
    }

    fn div(&self, o: &Self, pos: usize) -> Result<Self, ParseError> {
        let only_scalar = o.terms.keys().all(|b| *b == 0);
        match (only_scalar, o.coeff(0).inv()) {
            (true, Some(inv)) => Ok(self.scale(&inv)),
            (false, _) => Err(ParseError { pos, message: "can only divide by a nonzero scalar".into() }),
            (true, None) => Err(ParseError { pos, message: "division by zero".into() }),
        }
    }
}

/// `Σ β^k / k!`; the series terminates since the space is finite dimensional.
pub fn form_exp(beta: &Multivector) -> Result<Multivector, ExteriorError> {
    if let Some(&r) = beta.grades().iter().find(|&&r| r % 2 == 1 || r == 0) {
        return Err(ExteriorError::NotEven(r));
    }
    let dim = beta.dim();
    let mut out = Multivector::one(dim);
    let mut power = Multivector::one(dim);
    let mut k = 0i64;
    loop {
        k += 1;
        power = power.wedge(beta).scale(&GaussianRational::from_ratio(1, k));
        if power.is_zero() {
            return Ok(out);
        }
        out = out.add(&power);
    }
}

/// An element `X + ξ` of `(V ⊕ V*) ⊗ ℂ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GeneralizedVector {
    pub vector: Vec<GaussianRational>,
    pub covector: Vec<GaussianRational>,
}

impl GeneralizedVector {
    pub fn new(vector: Vec<GaussianRational>, covector: Vec<GaussianRational>) -> Self {
        assert_eq!(vector.len(), covector.len(), "vector and covector parts differ in length");
        GeneralizedVector { vector, covector }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![GaussianRational::zero(); n], vec![GaussianRational::zero(); n])
    }

    /// The basis vector `e_{i+1}`.
    pub fn basis_vector(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.vector[i] = GaussianRational::one();
        v
    }

    /// The dual basis covector `e^{i+1}`.
    pub fn basis_covector(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.covector[i] = GaussianRational::one();
        v
    }

    /// `X + ξ` from a vector and a 1-form.
    pub fn from_parts(x: Vec<GaussianRational>, xi: &Multivector) -> Self {
        let n = x.len();
        assert_eq!(xi.dim(), n);
        Self::new(x, xi.one_form_coeffs())
    }

    /// The i-th element of the basis `e1..en, e^1..e^n`.
    pub fn basis(n: usize, i: usize) -> Self {
        if i < n {
            Self::basis_vector(n, i)
        } else {
            Self::basis_covector(n, i - n)
        }
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn covector_form(&self) -> Multivector {
        Multivector::from_coeffs(&self.covector)
    }

    /// Coordinates `(X, ξ)` as a single column of length 2n.
    pub fn to_column(&self) -> Vec<GaussianRational> {
        self.vector.iter().chain(&self.covector).cloned().collect()
    }

    pub fn from_column(v: &[GaussianRational]) -> Self {
        assert!(v.len().is_multiple_of(2));
        let n = v.len() / 2;
        Self::new(v[..n].to_vec(), v[n..].to_vec())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_column(&self.to_column().iter().zip(o.to_column()).map(|(a, b)| a + &b).collect::<Vec<_>>())
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        Self::from_column(&self.to_column().iter().map(|a| a * s).collect::<Vec<_>>())
    }

    pub fn neg(&self) -> Self {
        self.scale(&GaussianRational::from_int(-1))
    }

    pub fn conj(&self) -> Self {
        Self::from_column(&self.to_column().iter().map(|a| a.conj()).collect::<Vec<_>>())
    }

    pub fn is_zero(&self) -> bool {
        self.to_column().iter().all(|c| c.is_zero())
    }

    /// `⟨X+ξ, Y+η⟩ = ½(ξ(Y) + η(X))`.
    pub fn pairing(&self, o: &Self) -> GaussianRational {
        assert_eq!(self.dim(), o.dim());
        let mut acc = GaussianRational::zero();
        for i in 0..self.dim() {
            acc += &(&self.covector[i] * &o.vector[i]);
            acc += &(&o.covector[i] * &self.vector[i]);
        }
        acc.scale(&crate::scalar::rat(1, 2))
    }

    /// Clifford action `(X + η)·ρ = i_X ρ + η∧ρ`.
    pub fn clifford_act(&self, rho: &Multivector) -> Multivector {
        assert_eq!(self.dim(), rho.dim(), "clifford_act: space mismatch");
        rho.interior(&self.vector).add(&self.covector_form().wedge(rho))
    }
}

pub fn pairing(u: &GeneralizedVector, v: &GeneralizedVector) -> GaussianRational {
    u.pairing(v)
}

pub fn clifford_act(v: &GeneralizedVector, rho: &Multivector) -> Multivector {
    v.clifford_act(rho)
}

impl serde::Serialize for Multivector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&BasedSpace::standard(self.dim).print(self))
    }
}

impl serde::Serialize for GeneralizedVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("GeneralizedVector", 2)?;
        st.serialize_field("vector", &self.vector)?;
        st.serialize_field("covector", &self.covector_form())?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn sp(n: usize) -> BasedSpace {
        BasedSpace::standard(n)
    }

    #[test]
    fn wedge_examples() {
        let s = sp(4);
        let e = |i| Multivector::gen(4, i);
        assert_eq!(e(0).wedge(&e(1)), s.parse("e1^e2").unwrap());
        assert_eq!(e(1).wedge(&e(0)), s.parse("-e1^e2").unwrap());
        assert!(e(0).wedge(&e(0)).is_zero());
        let a = s.parse("e1 + i e2").unwrap();
        let b = s.parse("e3 + i e4").unwrap();
        // bilinear expansion by hand: e13 + i e14 + i e23 - e24
        let expected = s.parse("e1^e3 + i*e1^e4 + i e2^e3 - e2^e4").unwrap();
        assert_eq!(a.wedge(&b), expected);
    }

    #[test]
    fn interior_examples() {
        let s = sp(4);
        let e1 = GeneralizedVector::basis_vector(4, 0);
        assert_eq!(s.parse("e1^e3").unwrap().interior(&e1.vector), s.parse("e3").unwrap());
        assert!(s.parse("e4^e2").unwrap().interior(&e1.vector).is_zero());
        assert_eq!(s.parse("e1^e3 + e4^e2").unwrap().interior(&e1.vector), s.parse("e3").unwrap());
    }

    #[test]
    fn clifford_examples() {
        let s = sp(2);
        let e1 = GeneralizedVector::basis_vector(2, 0);
        let f1 = GeneralizedVector::basis_covector(2, 0);
        assert_eq!(e1.clifford_act(&s.parse("e1^e2").unwrap()), s.parse("e2").unwrap());
        assert_eq!(f1.clifford_act(&s.parse("e2").unwrap()), s.parse("e1^e2").unwrap());
        let v = e1.add(&f1);
        assert_eq!(v.pairing(&v), GaussianRational::one());
        let rho = s.parse("3 + e1 - 2 i e2 + 5*e1^e2").unwrap();
        assert_eq!(v.clifford_act(&v.clifford_act(&rho)), rho);
    }

    #[test]
    fn exp_examples() {
        let s6 = sp(6);
        assert_eq!(form_exp(&Multivector::zero(6)).unwrap(), Multivector::one(6));
        assert_eq!(form_exp(&s6.parse("i e5^e6").unwrap()).unwrap(), s6.parse("1 + i e5^e6").unwrap());
        let s4 = sp(4);
        assert_eq!(
            form_exp(&s4.parse("e1^e2 + e3^e4").unwrap()).unwrap(),
            s4.parse("1 + e1^e2 + e3^e4 + e1^e2^e3^e4").unwrap()
        );
        assert!(matches!(form_exp(&s4.parse("e1").unwrap()), Err(ExteriorError::NotEven(1))));
        assert!(form_exp(&s4.parse("1 + e1^e2").unwrap()).is_err());
    }

    #[test]
    fn printing() {
        let s = sp(4);
        let m = s.parse("e2^e4 - 3/2 i e1 + (1 + 2 i)*e1^e3 - 1").unwrap();
        assert_eq!(s.print(&m), "-1 - 3/2 i*e1 + (1 + 2 i)*e1^e3 + e2^e4");
        assert_eq!(s.parse(&s.print(&m)).unwrap(), m);
        assert_eq!(s.print(&Multivector::zero(4)), "0");
        assert_eq!(s.parse("e1/2").unwrap().coeff(1), GaussianRational::real(rat(1, 2)));
        assert!(s.parse("e1/e2").is_err());
        assert!(s.parse("e5").is_err());
    }

    #[test]
    fn space_mismatch_is_an_error() {
        let a = Multivector::gen(2, 0);
        let b = Multivector::gen(3, 0);
        assert_eq!(a.checked_wedge(&b), Err(ExteriorError::SpaceMismatch(2, 3)));
    }
}
