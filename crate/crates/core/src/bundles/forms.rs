//! Differential forms on a chart with rational-function coefficients, and
//! square matrices of such forms.
//!
//! Generators are `dz_1..dz_k`, `dz̄_1..dz̄_k`, `dp_1..dp_l` (bits `0..k`,
//! `k..2k`, `2k..2k+l` of the blade mask). `d_L` differentiates in the
//! conjugate and leaf variables, `d_L̄` in the holomorphic ones.

use std::collections::BTreeMap;

use super::poly::{Var, VarNames};
use super::ratfunc::RationalFunction;
use crate::exterior::{indices, wedge_sign, Blade};
use crate::expr::{self, Algebra, Dialect, ParseError};
use crate::linalg::Matrix;
use crate::scalar::GaussianRational;

type RF = RationalFunction;
type C = GaussianRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormShape {
    pub k: usize,
    pub leaves: usize,
}

impl FormShape {
    pub fn dz(&self, j: usize) -> Blade {
        1 << j
    }
    pub fn dzbar(&self, j: usize) -> Blade {
        1 << (self.k + j)
    }
    pub fn dp(&self, l: usize) -> Blade {
        1 << (2 * self.k + l)
    }
    /// `(p, q, leaf degree)` of a blade.
    pub fn degrees(&self, b: Blade) -> (usize, usize, usize) {
        let k = self.k;
        let low = b & ((1 << k) - 1);
        let mid = (b >> k) & ((1 << k) - 1);
        ((low.count_ones()) as usize, mid.count_ones() as usize, (b >> (2 * k)).count_ones() as usize)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct RForm {
    shape: FormShape,
    terms: BTreeMap<Blade, RF>,
}

impl std::fmt::Debug for RForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.display(&VarNames::default()))
    }
}

impl RForm {
    pub fn zero(shape: FormShape) -> Self {
        RForm { shape, terms: BTreeMap::new() }
    }

    pub fn function(shape: FormShape, f: RF) -> Self {
        Self::term(shape, 0, f)
    }

    pub fn term(shape: FormShape, b: Blade, f: RF) -> Self {
        let mut out = Self::zero(shape);
        out.add_term(b, &f);
        out
    }

    pub fn shape(&self) -> FormShape {
        self.shape
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &RF)> {
        self.terms.iter().map(|(b, f)| (*b, f))
    }

    pub fn coeff(&self, b: Blade) -> RF {
        self.terms.get(&b).cloned().unwrap_or_else(RF::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, b: Blade, f: &RF) {
        if f.is_zero() {
            return;
        }
        let v = self.terms.get(&b).map(|g| g.add(f)).unwrap_or_else(|| f.clone());
        if v.is_zero() {
            self.terms.remove(&b);
        } else {
            self.terms.insert(b, v);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (b, f) in &o.terms {
            out.add_term(*b, f);
        }
        out
    }

    pub fn neg(&self) -> Self {
        RForm { shape: self.shape, terms: self.terms.iter().map(|(b, f)| (*b, f.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, g: &RF) -> Self {
        let mut out = Self::zero(self.shape);
        for (b, f) in &self.terms {
            out.add_term(*b, &f.mul(g));
        }
        out
    }

    pub fn scale_c(&self, c: &C) -> Self {
        self.scale(&RF::constant(c.clone()))
    }

    pub fn wedge(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.shape);
        for (a, f) in &self.terms {
            for (b, g) in &o.terms {
                if a & b != 0 {
                    continue;
                }
                let s = wedge_sign(*a, *b);
                let c = f.mul(g);
                out.add_term(a | b, &if s < 0 { c.neg() } else { c });
            }
        }
        out
    }

    /// Components with `(p, q)` as given (leaf degree ignored).
    pub fn bidegree_part(&self, p: usize, q: usize) -> Self {
        let mut out = Self::zero(self.shape);
        for (b, f) in &self.terms {
            let (bp, bq, _) = self.shape.degrees(*b);
            if (bp, bq) == (p, q) {
                out.add_term(*b, f);
            }
        }
        out
    }

    /// Whether every term has exactly `(p, q)` and no leaf differentials.
    pub fn is_of_type(&self, p: usize, q: usize) -> bool {
        self.terms.keys().all(|b| self.shape.degrees(*b) == (p, q, 0))
    }

    fn d_by(&self, vars: &[(Var, Blade)]) -> Self {
        let mut out = Self::zero(self.shape);
        for (b, f) in &self.terms {
            for (v, g) in vars {
                if b & g != 0 {
                    continue;
                }
                let df = f.derivative(*v);
                if df.is_zero() {
                    continue;
                }
                let s = wedge_sign(*g, *b);
                out.add_term(b | g, &if s < 0 { df.neg() } else { df });
            }
        }
        out
    }

    /// `d_L`: derivative in the conjugate and leaf variables.
    pub fn d_l(&self) -> Self {
        let sh = self.shape;
        let vars: Vec<(Var, Blade)> = (0..sh.k)
            .map(|j| (Var::Conj(j), sh.dzbar(j)))
            .chain((0..sh.leaves).map(|l| (Var::Leaf(l), sh.dp(l))))
            .collect();
        self.d_by(&vars)
    }

    /// `d_L̄`: derivative in the holomorphic variables.
    pub fn d_lbar(&self) -> Self {
        let sh = self.shape;
        let vars: Vec<(Var, Blade)> = (0..sh.k).map(|j| (Var::Holo(j), sh.dz(j))).collect();
        self.d_by(&vars)
    }

    /// `D̃ = d_L + d_L̄`.
    pub fn d(&self) -> Self {
        self.d_l().add(&self.d_lbar())
    }

    /// Complex conjugate: conjugate coefficients and swap `dz_j ↔ dz̄_j`.
    pub fn conj(&self) -> Self {
        let k = self.shape.k;
        let mut out = Self::zero(self.shape);
        for (b, f) in &self.terms {
            // rebuild the blade generator by generator to track the sign
            let mut sign = 1;
            let mut acc: Blade = 0;
            for i in indices(*b) {
                let g = if i < k {
                    1 << (i + k)
                } else if i < 2 * k {
                    1 << (i - k)
                } else {
                    1 << i
                };
                sign *= wedge_sign(acc, g);
                acc |= g;
            }
            let c = f.conj();
            out.add_term(acc, &if sign < 0 { c.neg() } else { c });
        }
        out
    }

    /// Substitutes coefficients and replaces each generator by a 1-form.
    pub fn transform(
        &self,
        target: FormShape,
        subst: &BTreeMap<Var, RF>,
        images: &[RForm],
    ) -> Option<Self> {
        let mut out = Self::zero(target);
        for (b, f) in &self.terms {
            let mut t = RForm::function(target, f.substitute(subst)?);
            for i in indices(*b) {
                t = t.wedge(&images[i]);
            }
            out = out.add(&t);
        }
        Some(out)
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&RF) -> Option<RF>) -> Option<Self> {
        let mut out = Self::zero(self.shape);
        for (b, c) in &self.terms {
            out.add_term(*b, &f(c)?);
        }
        Some(out)
    }

    pub fn is_gh_coefficients(&self) -> bool {
        self.terms.values().all(|f| f.is_gh())
    }

    pub fn has_leaf_variables(&self) -> bool {
        self.terms.values().any(|f| f.vars().iter().any(|v| matches!(v, Var::Leaf(_))))
    }

    pub fn blade_name(&self, b: Blade, names: &VarNames) -> String {
        let k = self.shape.k;
        indices(b)
            .map(|i| {
                if i < k {
                    format!("d{}", names.name(Var::Holo(i)))
                } else if i < 2 * k {
                    format!("d{}", names.name(Var::Conj(i - k)))
                } else {
                    format!("d{}", names.name(Var::Leaf(i - 2 * k)))
                }
            })
            .collect::<Vec<_>>()
            .join("^")
    }

    pub fn display(&self, names: &VarNames) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut keys: Vec<Blade> = self.terms.keys().copied().collect();
        keys.sort_by_key(|b| crate::exterior::blade_order_key(*b));
        keys.iter()
            .map(|b| {
                let f = self.terms[b].display(names);
                let needs = f.contains(' ') || f.contains('/') || f.starts_with('-');
                let f = if needs { format!("({})", f) } else { f };
                if *b == 0 {
                    f
                } else if f == "1" {
                    self.blade_name(*b, names)
                } else {
                    format!("{}*{}", f, self.blade_name(*b, names))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Square matrix of forms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MForm {
    shape: FormShape,
    entries: Vec<Vec<RForm>>,
}

impl MForm {
    pub fn zero(shape: FormShape, n: usize) -> Self {
        MForm { shape, entries: vec![vec![RForm::zero(shape); n]; n] }
    }

    pub fn from_entries(shape: FormShape, entries: Vec<Vec<RForm>>) -> Self {
        MForm { shape, entries }
    }

    /// Constant-form matrix from a function matrix.
    pub fn functions(shape: FormShape, m: &Matrix<RF>) -> Self {
        let n = m.rows();
        MForm::from_entries(
            shape,
            (0..n).map(|i| (0..n).map(|j| RForm::function(shape, m[(i, j)].clone())).collect()).collect(),
        )
    }

    pub fn shape(&self) -> FormShape {
        self.shape
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &RForm {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<RForm>] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero())
    }

    pub fn map(&self, f: impl Fn(&RForm) -> RForm) -> Self {
        MForm { shape: self.shape, entries: self.entries.iter().map(|r| r.iter().map(&f).collect()).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&RForm) -> Option<RForm>) -> Option<Self> {
        let entries = self
            .entries
            .iter()
            .map(|r| r.iter().map(&f).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Some(MForm { shape: self.shape, entries })
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.rank();
        MForm {
            shape: self.shape,
            entries: (0..n).map(|i| (0..n).map(|j| self.entries[i][j].add(&o.entries[i][j])).collect()).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|e| e.neg())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, f: &RF) -> Self {
        self.map(|e| e.scale(f))
    }

    /// Matrix product with entries multiplied by `∧`.
    pub fn wedge(&self, o: &Self) -> Self {
        let n = self.rank();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).fold(RForm::zero(self.shape), |acc, s| acc.add(&self.entries[i][s].wedge(&o.entries[s][j]))))
                    .collect()
            })
            .collect();
        MForm { shape: self.shape, entries }
    }

    /// `g · self · h` for function matrices.
    pub fn sandwich(&self, g: &Matrix<RF>, h: &Matrix<RF>) -> Self {
        let sh = self.shape;
        MForm::functions(sh, g).wedge(self).wedge(&MForm::functions(sh, h))
    }

    pub fn trace(&self) -> RForm {
        (0..self.rank()).fold(RForm::zero(self.shape), |acc, i| acc.add(&self.entries[i][i]))
    }

    pub fn d_l(&self) -> Self {
        self.map(|e| e.d_l())
    }

    pub fn d_lbar(&self) -> Self {
        self.map(|e| e.d_lbar())
    }

    pub fn d(&self) -> Self {
        self.map(|e| e.d())
    }

    pub fn transpose(&self) -> Self {
        let n = self.rank();
        MForm {
            shape: self.shape,
            entries: (0..n).map(|i| (0..n).map(|j| self.entries[j][i].clone()).collect()).collect(),
        }
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> Self {
        self.map(|e| e.conj())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.rank();
        MForm {
            shape: self.shape,
            entries: (0..n).map(|i| (0..n).map(|j| self.entries[j][i].conj()).collect()).collect(),
        }
    }

    pub fn bidegree_part(&self, p: usize, q: usize) -> Self {
        self.map(|e| e.bidegree_part(p, q))
    }

    pub fn is_of_type(&self, p: usize, q: usize) -> bool {
        self.entries.iter().flatten().all(|e| e.is_of_type(p, q))
    }

    pub fn display(&self, names: &VarNames) -> Vec<Vec<String>> {
        self.entries.iter().map(|r| r.iter().map(|e| e.display(names)).collect()).collect()
    }
}

/// Determinant by permutation expansion, for matrices of even forms (whose
/// entries commute). Rows may be replaced by other rows of any degree.
pub fn form_det(rows: &[Vec<RForm>], shape: FormShape) -> RForm {
    let n = rows.len();
    let mut out = RForm::zero(shape);
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p| {
        let sign = permutation_sign(p);
        let mut t = RForm::function(shape, RF::from_int(sign));
        for (i, &j) in p.iter().enumerate() {
            t = t.wedge(&rows[i][j]);
            if t.is_zero() {
                return;
            }
        }
        out = out.add(&t);
    });
    out
}

fn permute(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, f);
        p.swap(i, j);
    }
}

fn permutation_sign(p: &[usize]) -> i64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Forms are read in the function dialect: `*` (or juxtaposition) is the
/// wedge product, `^` an integer power of a function, and `dz`, `dzbar`,
/// `dp` name the generators of a chart with variables `z` and leaf `p`.
impl Algebra for RForm {
    type Ctx = (VarNames, FormShape);

    fn scalar((_, sh): &Self::Ctx, c: C) -> Self {
        RForm::function(*sh, RF::constant(c))
    }

    fn ident((names, sh): &Self::Ctx, name: &str, pos: usize) -> Result<Self, ParseError> {
        if let Some(v) = names.lookup(name) {
            return Ok(RForm::function(*sh, RF::var(v)));
        }
        let generator = name.strip_prefix('d').and_then(|rest| names.lookup(rest)).and_then(|v| match v {
            Var::Holo(j) => Some(sh.dz(j)),
            Var::Conj(j) => Some(sh.dzbar(j)),
            Var::Leaf(l) => Some(sh.dp(l)),
            Var::Param => None,
        });
        match generator {
            Some(b) => Ok(RForm::term(*sh, b, RF::one())),
            None => Err(ParseError { pos, message: format!("unknown symbol '{}'", name) }),
        }
    }

    fn add(&self, o: &Self) -> Self {
        RForm::add(self, o)
    }

    fn neg(&self) -> Self {
        RForm::neg(self)
    }

    fn mul(&self, o: &Self) -> Self {
        self.wedge(o)
    }

    fn div(&self, o: &Self, pos: usize) -> Result<Self, ParseError> {
        let f = o.as_function().ok_or_else(|| ParseError { pos, message: "can only divide by a function".into() })?;
        let inv = f.inv().ok_or_else(|| ParseError { pos, message: "division by zero".into() })?;
        Ok(self.scale(&inv))
    }

    fn pow(&self, e: i64, pos: usize) -> Result<Self, ParseError> {
        let f = self.as_function().ok_or_else(|| ParseError { pos, message: "only functions can be raised to a power".into() })?;
        let p = f.pow(e).ok_or_else(|| ParseError { pos, message: "zero to a negative power".into() })?;
        Ok(RForm::function(self.shape, p))
    }
}

impl RForm {
    pub fn parse(s: &str, names: &VarNames, shape: FormShape) -> Result<Self, ParseError> {
        expr::eval(&expr::parse(s, Dialect::Function)?, &(names.clone(), shape))
    }

    /// The coefficient when this is a 0-form.
    pub fn as_function(&self) -> Option<RF> {
        self.terms.keys().all(|b| *b == 0).then(|| self.coeff(0))
    }
}
