//! Reduced quotients of polynomials in chart variables.

use std::collections::BTreeMap;

use super::poly::{gcd, Poly, Var, VarNames};
use crate::expr::{self, Algebra, Dialect, ParseError};
use crate::linalg::Field;
use crate::scalar::{GaussianRational, Rational};

type C = GaussianRational;

/// `num / den` with `gcd(num, den) = 1` and `den` monic; zero is `0 / 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl std::fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.display(&VarNames::default()))
    }
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(Self::zero());
        }
        let g = gcd(&num, &den);
        let (n, d) = (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap());
        let lc = d.leading().unwrap().1.clone();
        let inv = lc.inv().unwrap();
        Some(RationalFunction { num: n.scale(&inv), den: d.scale(&inv) })
    }

    pub fn poly(p: Poly) -> Self {
        RationalFunction { num: p, den: Poly::one() }
    }

    pub fn zero() -> Self {
        Self::poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::poly(Poly::one())
    }

    pub fn constant(c: C) -> Self {
        Self::poly(Poly::constant(c))
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(C::from_int(n))
    }

    pub fn var(v: Var) -> Self {
        Self::poly(Poly::var(v))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<C> {
        if self.den.is_constant() {
            let d = self.den.constant_value()?;
            Some(&self.num.constant_value()? / &d)
        } else {
            None
        }
    }

    pub fn vars(&self) -> std::collections::BTreeSet<Var> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    /// Generalized holomorphic: no conjugate or leaf variable occurs.
    pub fn is_gh(&self) -> bool {
        self.non_gh_vars().is_empty()
    }

    pub fn non_gh_vars(&self) -> Vec<Var> {
        self.vars().into_iter().filter(|v| matches!(v, Var::Conj(_) | Var::Leaf(_))).collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::new(self.num.add(&o.num), self.den.clone()).unwrap();
        }
        Self::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den)).unwrap()
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).unwrap()
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunction { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn inv(&self) -> Option<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        Some(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let e = e.unsigned_abs() as u32;
        Some(RationalFunction::new(base.num.pow(e), base.den.pow(e)).unwrap())
    }

    pub fn derivative(&self, v: Var) -> Self {
        let n = self.num.derivative(v).mul(&self.den).sub(&self.num.mul(&self.den.derivative(v)));
        Self::new(n, self.den.mul(&self.den)).unwrap()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.num.conj(), self.den.conj()).unwrap()
    }

    /// Substitutes variables (those absent from `map` are kept).
    pub fn substitute(&self, map: &BTreeMap<Var, RationalFunction>) -> Option<Self> {
        let ev = |p: &Poly| {
            p.eval_with(
                Self::zero(),
                Self::one(),
                |c| Self::constant(c.clone()),
                |v| map.get(&v).cloned().unwrap_or_else(|| Self::var(v)),
                |a, b| a.add(b),
                |a, b| a.mul(b),
            )
        };
        ev(&self.num).div(&ev(&self.den))
    }

    /// `∫_0^1 f dt` for `f` polynomial in the parameter `t`.
    pub fn integrate_param(&self) -> Option<Self> {
        if self.den.vars().contains(&Var::Param) {
            return None;
        }
        let cs = self.num.coeffs_in(Var::Param);
        let n = cs.iter().enumerate().fold(Poly::zero(), |acc, (i, c)| {
            acc.add(&c.scale(&C::real(Rational::new(1.into(), (i as i64 + 1).into()))))
        });
        Self::new(n, self.den.clone())
    }

    pub fn display(&self, names: &VarNames) -> String {
        let n = self.num.display(names);
        if self.den == Poly::one() {
            return n;
        }
        let d = self.den.display(names);
        let wrap = |s: String, p: &Poly| {
            let single = p.terms().count() == 1 && !s.starts_with('-') && !s.contains('/');
            if single {
                s
            } else {
                format!("({})", s)
            }
        };
        let d_single = self.den.terms().count() == 1 && !d.contains('*') && !d.contains('/') && !d.contains('^');
        let d = if d_single { d } else { format!("({})", d) };
        format!("{}/{}", wrap(n, &self.num), d)
    }

    pub fn parse(s: &str, names: &VarNames) -> Result<Self, ParseError> {
        expr::eval::<RationalFunction>(&expr::parse(s, Dialect::Function)?, names)
    }

    /// Laurent coefficient of `v^{-1}` at `v = 0` for a function of `v` alone.
    pub fn residue_at_zero(&self, v: Var) -> Option<C> {
        if self.vars().iter().any(|u| *u != v) {
            return None;
        }
        // den = v^a · d0 with d0(0) ≠ 0
        let dc = self.den.coeffs_in(v);
        let a = dc.iter().position(|c| !c.is_zero())?;
        let d0: Vec<C> = dc[a..].iter().map(|c| c.constant_value().unwrap()).collect();
        let nc: Vec<C> = self.num.coeffs_in(v).iter().map(|c| c.constant_value().unwrap()).collect();
        if a == 0 {
            return Some(C::zero());
        }
        // series of num/d0 up to order a - 1
        let mut s: Vec<C> = Vec::with_capacity(a);
        let inv0 = d0[0].inv()?;
        for n in 0..a {
            let mut acc = nc.get(n).cloned().unwrap_or_else(C::zero);
            for j in 1..=n {
                if let Some(dj) = d0.get(j) {
                    acc -= &(dj * &s[n - j]);
                }
            }
            s.push(&acc * &inv0);
        }
        Some(s[a - 1].clone())
    }
}

impl Algebra for RationalFunction {
    type Ctx = VarNames;

    fn scalar(_: &VarNames, c: C) -> Self {
        Self::constant(c)
    }

    fn ident(names: &VarNames, name: &str, pos: usize) -> Result<Self, ParseError> {
        names
            .lookup(name)
            .map(Self::var)
            .ok_or_else(|| ParseError { pos, message: format!("unknown variable '{}'", name) })
    }

    fn add(&self, o: &Self) -> Self {
        RationalFunction::add(self, o)
    }

    fn neg(&self) -> Self {
        RationalFunction::neg(self)
    }

    fn mul(&self, o: &Self) -> Self {
        RationalFunction::mul(self, o)
    }

    fn div(&self, o: &Self, pos: usize) -> Result<Self, ParseError> {
        RationalFunction::div(self, o).ok_or_else(|| ParseError { pos, message: "division by zero".into() })
    }

    fn pow(&self, e: i64, pos: usize) -> Result<Self, ParseError> {
        RationalFunction::pow(self, e).ok_or_else(|| ParseError { pos, message: "zero to a negative power".into() })
    }
}

impl Field for RationalFunction {
    fn zero() -> Self {
        RationalFunction::zero()
    }
    fn one() -> Self {
        RationalFunction::one()
    }
    fn is_zero(&self) -> bool {
        RationalFunction::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        RationalFunction::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RationalFunction::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        RationalFunction::mul(self, o)
    }
    fn neg(&self) -> Self {
        RationalFunction::neg(self)
    }
    fn inv(&self) -> Self {
        RationalFunction::inv(self).expect("inverse of zero")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> VarNames {
        VarNames::new(&["z", "w"], &["p1"])
    }

    fn rf(s: &str) -> RationalFunction {
        RationalFunction::parse(s, &names()).unwrap()
    }

    #[test]
    fn canonical_form() {
        assert_eq!(rf("(z^2 - 1)/(z - 1)"), rf("z + 1"));
        assert_eq!(rf("(2 z)/(4 z w)"), rf("1/(2 w)"));
        assert_eq!(rf("1/z + 1/w"), rf("(z + w)/(z w)"));
        assert_eq!(rf("z^-2"), rf("1/(z*z)"));
    }

    #[test]
    fn derivatives_and_flags() {
        let f = rf("zbar/(1 + z zbar)");
        assert_eq!(f.derivative(Var::Conj(0)), rf("1/(1 + z zbar)^2"));
        assert!(!f.is_gh());
        assert!(rf("z^3/(w - 2)").is_gh());
        assert_eq!(rf("p1 z").non_gh_vars(), vec![Var::Leaf(0)]);
    }

    #[test]
    fn printing_round_trips() {
        for s in ["z", "1/z", "(z + 1)/(z*w - 2)", "-z^2/w", "(1/2 + i)*z", "zbar/(z*zbar + 1)"] {
            let f = rf(s);
            assert_eq!(rf(&f.display(&names())), f, "{}", s);
        }
    }

    #[test]
    fn residues() {
        let z = Var::Holo(0);
        assert_eq!(rf("1/z").residue_at_zero(z), Some(C::one()));
        assert_eq!(rf("3/z + z").residue_at_zero(z), Some(C::from_int(3)));
        assert_eq!(rf("1/(z^2 (1 - z))").residue_at_zero(z), Some(C::one()));
        assert_eq!(rf("1/(z - 1)").residue_at_zero(z), Some(C::zero()));
    }

    #[test]
    fn param_integral() {
        let names = names();
        let t = RationalFunction::var(Var::Param);
        let f = t.mul(&t).scale(&C::from_int(3)).add(&RationalFunction::parse("z", &names).unwrap());
        assert_eq!(f.integrate_param().unwrap(), rf("1 + z"));
    }
}
