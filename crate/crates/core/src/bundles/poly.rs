//! Sparse multivariate polynomials over the Gaussian rationals, with exact
//! division and a recursive primitive-PRS gcd.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use crate::scalar::{join_terms, GaussianRational};

type C = GaussianRational;

/// Chart variables: holomorphic `z_j`, their conjugates, leaf coordinates
/// `p_l`, and the homotopy parameter `t` used in transgression integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Holo(usize),
    Conj(usize),
    Leaf(usize),
    Param,
}

impl Var {
    pub fn conj(self) -> Var {
        match self {
            Var::Holo(j) => Var::Conj(j),
            Var::Conj(j) => Var::Holo(j),
            v => v,
        }
    }
}

pub type Monomial = BTreeMap<Var, u32>;

fn mono_degree(m: &Monomial) -> u32 {
    m.values().sum()
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = a.clone();
    for (v, e) in b {
        *out.entry(*v).or_insert(0) += e;
    }
    out
}

/// Names used to print and parse chart variables.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VarNames {
    pub holo: Vec<String>,
    pub leaf: Vec<String>,
}

impl VarNames {
    pub fn new(holo: &[&str], leaf: &[&str]) -> Self {
        VarNames { holo: holo.iter().map(|s| s.to_string()).collect(), leaf: leaf.iter().map(|s| s.to_string()).collect() }
    }

    pub fn name(&self, v: Var) -> String {
        match v {
            Var::Holo(j) => self.holo.get(j).cloned().unwrap_or_else(|| format!("z{}", j + 1)),
            Var::Conj(j) => format!("{}bar", self.name(Var::Holo(j))),
            Var::Leaf(l) => self.leaf.get(l).cloned().unwrap_or_else(|| format!("p{}", l + 1)),
            Var::Param => "t".to_string(),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        if let Some(j) = self.holo.iter().position(|h| h == name) {
            return Some(Var::Holo(j));
        }
        if let Some(l) = self.leaf.iter().position(|h| h == name) {
            return Some(Var::Leaf(l));
        }
        let base = name.strip_suffix("bar")?;
        self.holo.iter().position(|h| h == base).map(Var::Conj)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, C>,
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.display(&VarNames::default()))
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: C) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::new(), &c);
        p
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn var(v: Var) -> Self {
        Self::monomial(v, 1)
    }

    pub fn monomial(v: Var, e: u32) -> Self {
        let mut m = Monomial::new();
        if e > 0 {
            m.insert(v, e);
        }
        let mut p = Poly::zero();
        p.add_term(m, &C::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: &C) {
        if c.is_zero() {
            return;
        }
        let m: Monomial = m.into_iter().filter(|(_, e)| *e > 0).collect();
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_empty())
    }

    pub fn constant_value(&self) -> Option<C> {
        if self.is_zero() {
            Some(C::zero())
        } else if self.is_constant() {
            self.terms.get(&Monomial::new()).cloned()
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.keys().copied()).collect()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(mono_degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.get(&v).copied().unwrap_or(0)).max().unwrap_or(0)
    }

    /// Leading monomial under the graded order (degree, then the map order).
    pub fn leading(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().max_by(|a, b| (mono_degree(a.0), a.0).cmp(&(mono_degree(b.0), b.0)))
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(mono_mul(m1, m2), &(c1 * c2));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Poly::one(), |acc, _| acc.mul(self))
    }

    pub fn mul_monomial(&self, v: Var, e: u32) -> Self {
        self.mul(&Poly::monomial(v, e))
    }

    pub fn derivative(&self, v: Var) -> Self {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if let Some(&e) = m.get(&v) {
                let mut m2 = m.clone();
                m2.insert(v, e - 1);
                out.add_term(m2, &c.scale(&crate::scalar::rat(e as i64, 1)));
            }
        }
        out
    }

    /// Conjugates coefficients and swaps `z_j ↔ z̄_j`.
    pub fn conj(&self) -> Self {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.iter().map(|(v, e)| (v.conj(), *e)).collect(), c.conj())))
    }

    /// Coefficients as a polynomial in `v`: `self = Σ out[i] v^i`.
    pub fn coeffs_in(&self, v: Var) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let e = m.get(&v).copied().unwrap_or(0);
            let mut rest = m.clone();
            rest.remove(&v);
            out[e as usize].add_term(rest, c);
        }
        out
    }

    pub fn from_coeffs_in(v: Var, cs: &[Poly]) -> Self {
        cs.iter().enumerate().fold(Poly::zero(), |acc, (i, c)| acc.add(&c.mul_monomial(v, i as u32)))
    }

    /// Exact quotient, if `d` divides `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.inv()?));
        }
        let x = *d.vars().iter().next_back()?;
        let n = d.degree_in(x);
        let lc_d = d.coeffs_in(x).pop().unwrap();
        let mut a = self.clone();
        let mut q = Poly::zero();
        while !a.is_zero() {
            let da = a.degree_in(x);
            if da < n {
                return None;
            }
            let lc_a = a.coeffs_in(x).pop().unwrap();
            let t = lc_a.div_exact(&lc_d)?.mul_monomial(x, da - n);
            a = a.sub(&t.mul(d));
            q = q.add(&t);
        }
        Some(q)
    }

    /// Makes the leading coefficient 1.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) => self.scale(&c.inv().unwrap()),
        }
    }

    /// Evaluates by substituting each variable through `f`.
    pub fn eval_with<T: Clone>(
        &self,
        zero: T,
        one: T,
        scalar: impl Fn(&C) -> T,
        var: impl Fn(Var) -> T,
        add: impl Fn(&T, &T) -> T,
        mul: impl Fn(&T, &T) -> T,
    ) -> T {
        let mut cache: BTreeMap<(Var, u32), T> = BTreeMap::new();
        let mut out = zero;
        for (m, c) in &self.terms {
            let mut t = scalar(c);
            for (v, e) in m {
                let p = cache
                    .entry((*v, *e))
                    .or_insert_with(|| {
                        let base = var(*v);
                        (0..*e).fold(one.clone(), |acc, _| mul(&acc, &base))
                    })
                    .clone();
                t = mul(&t, &p);
            }
            out = add(&out, &t);
        }
        out
    }

    pub fn display(&self, names: &VarNames) -> String {
        let mut terms: Vec<(&Monomial, &C)> = self.terms.iter().collect();
        terms.sort_by(|a, b| (mono_degree(b.0), b.0).cmp(&(mono_degree(a.0), a.0)));
        join_terms(
            terms.into_iter().map(|(m, c)| {
                let s = m
                    .iter()
                    .map(|(v, e)| if *e == 1 { names.name(*v) } else { format!("{}^{}", names.name(*v), e) })
                    .collect::<Vec<_>>()
                    .join("*");
                (c, s)
            }),
            "*",
        )
    }
}

fn content_in(p: &Poly, x: Var) -> Poly {
    p.coeffs_in(x).iter().fold(Poly::zero(), |acc, c| gcd(&acc, c))
}

fn pp_in(p: &Poly, x: Var) -> Poly {
    let c = content_in(p, x);
    if c.is_zero() {
        return p.clone();
    }
    p.div_exact(&c).expect("content divides")
}

fn prem(a: &Poly, b: &Poly, x: Var) -> Poly {
    let db = b.degree_in(x);
    let lc_b = b.coeffs_in(x).pop().unwrap();
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(x) >= db {
        let dr = r.degree_in(x);
        let lc_r = r.coeffs_in(x).pop().unwrap();
        r = r.mul(&lc_b).sub(&b.mul(&lc_r).mul_monomial(x, dr - db));
    }
    r
}

/// Monic greatest common divisor (zero only when both inputs are zero).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let vars: BTreeSet<Var> = a.vars().union(&b.vars()).copied().collect();
    let x = *vars.iter().next_back().unwrap();
    let (da, db) = (a.degree_in(x), b.degree_in(x));
    if da == 0 {
        return gcd(a, &content_in(b, x));
    }
    if db == 0 {
        return gcd(&content_in(a, x), b);
    }
    let c = gcd(&content_in(a, x), &content_in(b, x));
    let (mut r0, mut r1) = (pp_in(a, x), pp_in(b, x));
    if r0.degree_in(x) < r1.degree_in(x) {
        std::mem::swap(&mut r0, &mut r1);
    }
    let g = loop {
        let r = prem(&r0, &r1, x);
        if r.is_zero() {
            break r1;
        }
        if r.degree_in(x) == 0 {
            break Poly::one();
        }
        r0 = r1;
        r1 = pp_in(&r, x);
    };
    c.mul(&pp_in(&g, x)).monic()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Poly {
        Poly::var(Var::Holo(0))
    }
    fn w() -> Poly {
        Poly::var(Var::Holo(1))
    }

    #[test]
    fn gcd_of_products() {
        let a = z().add(&Poly::one()).mul(&z().sub(&w()));
        let b = z().add(&Poly::one()).mul(&z().add(&w()).pow(2));
        assert_eq!(gcd(&a, &b), z().add(&Poly::one()));
        let c = z().mul(&w()).sub(&Poly::one());
        assert_eq!(gcd(&c.pow(2).mul(&z()), &c.mul(&w())), c);
        assert_eq!(gcd(&z(), &w()), Poly::one());
    }

    #[test]
    fn exact_division() {
        let a = z().pow(3).sub(&w().pow(3));
        let d = z().sub(&w());
        let q = a.div_exact(&d).unwrap();
        assert_eq!(q.mul(&d), a);
        assert!(z().div_exact(&w()).is_none());
    }

    #[test]
    fn names() {
        let n = VarNames::new(&["z"], &["p1"]);
        assert_eq!(n.lookup("zbar"), Some(Var::Conj(0)));
        assert_eq!(n.lookup("p1"), Some(Var::Leaf(0)));
        let p = z().mul(&Poly::var(Var::Conj(0))).add(&Poly::one());
        assert_eq!(p.display(&n), "z*zbar + 1");
    }
}
