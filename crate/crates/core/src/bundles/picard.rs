//! Line-bundle group operations, the Bott table for projective space, and a
//! brute-force Čech computation on the projective line.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;

use super::cocycle::TransitionCocycle;
use super::nerve::BundleError;
use super::poly::Var;
use super::ratfunc::RationalFunction;
use crate::linalg::Matrix;
use crate::scalar::{GaussianRational, Rational};

type RF = RationalFunction;
type C = GaussianRational;

fn kron(a: &Matrix<RF>, b: &Matrix<RF>) -> Matrix<RF> {
    let (p, q) = (a.rows(), b.rows());
    Matrix::from_fn(p * q, p * q, |r, c| a[(r / q, c / q)].mul(&b[(r % q, c % q)]))
}

/// Tensor product; for line bundles the entrywise product.
pub fn tensor(a: &TransitionCocycle, b: &TransitionCocycle) -> Result<TransitionCocycle, BundleError> {
    if a.nerve() != b.nerve() {
        return Err(BundleError::Contract("tensor product needs cocycles on the same nerve".into()));
    }
    let given = a.overlaps().into_iter().map(|(x, y)| ((x, y), kron(&a.phi(x, y), &b.phi(x, y)))).collect();
    TransitionCocycle::new(a.nerve().clone(), a.rank() * b.rank(), given)
}

/// Dual bundle, `(φ⁻¹)ᵀ`; for line bundles the entrywise inverse.
pub fn dual(a: &TransitionCocycle) -> Result<TransitionCocycle, BundleError> {
    a.map_transitions(|_, _, m| m.inverse().expect("valid cocycle").transpose())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Triviality {
    Trivial,
    NonTrivial { degree: i64 },
    Undecided { reason: String },
}

/// `c · Π z_j^{e_j}` with integer exponents.
fn laurent_monomial(f: &RF) -> Option<(C, BTreeMap<Var, i64>)> {
    let single = |p: &super::poly::Poly| {
        let mut it = p.terms();
        let (m, c) = it.next()?;
        it.next().is_none().then(|| (m.clone(), c.clone()))
    };
    let (nm, nc) = single(f.num())?;
    let (dm, dc) = single(f.den())?;
    let mut exps: BTreeMap<Var, i64> = nm.iter().map(|(v, e)| (*v, *e as i64)).collect();
    for (v, e) in dm {
        *exps.entry(v).or_insert(0) -= e as i64;
    }
    exps.retain(|_, e| *e != 0);
    Some((&nc / &dc, exps))
}

/// Exact for Laurent-monomial cocycles on the standard affine cover of
/// projective space (`φ_0b = c · z_j^m` for one coordinate `z_j` per chart,
/// with a common `m`), and for constant cocycles. Otherwise undecided.
pub fn triviality(a: &TransitionCocycle) -> Result<Triviality, BundleError> {
    if a.rank() != 1 {
        return Err(BundleError::Contract("triviality is decided for line bundles only".into()));
    }
    let n = a.nerve().len();
    if n == 1 {
        return Ok(Triviality::Trivial);
    }
    let mut degree = None;
    let mut constants = Vec::new();
    for b in 1..n {
        let f = a.phi(0, b)[(0, 0)].clone();
        let Some((c, exps)) = laurent_monomial(&f) else {
            return Ok(Triviality::Undecided { reason: format!("transition on U0,{} is not a Laurent monomial", a.nerve().chart_name(b)) });
        };
        let m = match exps.len() {
            0 => 0,
            1 => *exps.values().next().unwrap(),
            _ => {
                return Ok(Triviality::Undecided {
                    reason: format!("transition on U0,{} involves several coordinates", a.nerve().chart_name(b)),
                })
            }
        };
        if *degree.get_or_insert(m) != m {
            return Ok(Triviality::Undecided { reason: "chart degrees disagree".into() });
        }
        constants.push(c);
    }
    match degree {
        Some(0) | None => {
            // φ_ab = g_a / g_b with g_0 = 1, g_b = 1/φ_0b
            let mut g = vec![C::one()];
            g.extend(constants.iter().map(|c| c.inv().unwrap()));
            let ok = a.overlaps().into_iter().all(|(x, y)| a.phi(x, y)[(0, 0)] == RF::constant(&g[x] / &g[y]));
            Ok(if ok {
                Triviality::Trivial
            } else {
                Triviality::Undecided { reason: "constant cocycle is not a constant coboundary".into() }
            })
        }
        Some(m) => Ok(Triviality::NonTrivial { degree: m }),
    }
}

/// Degree of a line bundle on a two-chart cover in one variable, as the
/// residue at `z = 0` of `ξ_01 = dφ_01/φ_01`.
pub fn residue_degree(a: &TransitionCocycle) -> Option<C> {
    if a.rank() != 1 || a.nerve().k() != 1 || a.nerve().len() != 2 {
        return None;
    }
    let f = a.phi(0, 1)[(0, 0)].clone();
    let z = Var::Holo(0);
    f.derivative(z).div(&f)?.residue_at_zero(z)
}

fn binomial(n: i64, r: i64) -> BigUint {
    if r < 0 || n < 0 || r > n {
        return BigUint::from(0u32);
    }
    let r = r.min(n - r);
    let mut acc = BigUint::from(1u32);
    for i in 0..r {
        acc = acc * BigUint::from((n - i) as u64) / BigUint::from((i + 1) as u64);
    }
    acc
}

/// `dim H^q(P^n, Ω^p(m))` by the Bott formula.
pub fn bott_dims(n: i64, m: i64, p: i64, q: i64) -> Result<BigUint, BundleError> {
    if n < 1 {
        return Err(BundleError::Contract(format!("n must be at least 1, got {}", n)));
    }
    let pr = 0 <= p && p <= n;
    Ok(if q == 0 && pr && m > p {
        binomial(m + n - p, m) * binomial(m - 1, p)
    } else if q == n && pr && m < p - n {
        binomial(-m + p, -m) * binomial(-m - 1, n - p)
    } else if m == 0 && pr && p == q {
        BigUint::from(1u32)
    } else {
        BigUint::from(0u32)
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub dim: usize,
    pub truncation: i64,
    /// Same answer at `truncation + 1`.
    pub stable: bool,
}

fn cech_p1_at(m: i64, t: i64) -> (usize, usize) {
    // s0 = Σ_{i≤t} a_i z^i, s1 = Σ_{j≤t} b_j w^j, δ = s0 − z^m s1(1/z)
    let lo = 0.min(m - t);
    let hi = t.max(m);
    let rows = (hi - lo + 1) as usize;
    let cols = 2 * (t as usize + 1);
    let mut d = Matrix::<Rational>::zeros(rows, cols);
    for i in 0..=t {
        d[((i - lo) as usize, i as usize)] = Rational::from_integer(1.into());
    }
    for j in 0..=t {
        d[((m - j - lo) as usize, (t + 1 + j) as usize)] = Rational::from_integer((-1).into());
    }
    let rank = d.rank();
    (cols - rank, rows - rank)
}

/// `dim H^q(P^1, Ω^p(m))` from the two-chart Čech complex with sections
/// truncated at degree `truncation`; `Ω^1(m) = O(m − 2)`.
pub fn cech_oracle_p1(m: i64, p: u8, q: u8, truncation: i64) -> Result<OracleResult, BundleError> {
    let deg = match p {
        0 => m,
        1 => m - 2,
        _ => return Err(BundleError::Contract("p must be 0 or 1 on the projective line".into())),
    };
    if q > 1 {
        return Err(BundleError::Contract("q must be 0 or 1 on the projective line".into()));
    }
    if truncation < deg.abs() + 2 {
        return Err(BundleError::Contract(format!(
            "truncation {} is below |m| + 2 = {}",
            truncation,
            deg.abs() + 2
        )));
    }
    let pick = |(h0, h1): (usize, usize)| if q == 0 { h0 } else { h1 };
    let dim = pick(cech_p1_at(deg, truncation));
    let stable = pick(cech_p1_at(deg, truncation + 1)) == dim;
    Ok(OracleResult { dim, truncation, stable })
}

/// Smallest admissible truncation for a degree.
pub fn default_truncation(m: i64, p: u8) -> i64 {
    let deg = if p == 1 { m - 2 } else { m };
    deg.abs() + 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::nerve::ChartNerve;

    fn line(m: &str) -> TransitionCocycle {
        let n = ChartNerve::new(&[("U0", &["z"]), ("U1", &["w"])], &[], &[("U0", "U1", &[("w", "1/z")])]).unwrap();
        TransitionCocycle::parse(n, 1, &[("U0", "U1", vec![vec![m]])]).unwrap()
    }

    #[test]
    fn group_law() {
        let a = line("z^2");
        let b = line("z^-3");
        assert_eq!(tensor(&a, &b).unwrap(), line("1/z"));
        assert_eq!(triviality(&tensor(&a, &dual(&a).unwrap()).unwrap()).unwrap(), Triviality::Trivial);
        assert_eq!(triviality(&a).unwrap(), Triviality::NonTrivial { degree: 2 });
        assert_eq!(triviality(&line("5")).unwrap(), Triviality::Trivial);
        assert!(matches!(triviality(&line("z + 1")).unwrap(), Triviality::Undecided { .. }));
        assert_eq!(residue_degree(&a), Some(C::from_int(2)));
    }

    #[test]
    fn bott_spot_values() {
        assert_eq!(bott_dims(1, 2, 0, 0).unwrap(), BigUint::from(3u32));
        assert_eq!(bott_dims(1, -3, 0, 1).unwrap(), BigUint::from(2u32));
        assert_eq!(bott_dims(2, 0, 1, 1).unwrap(), BigUint::from(1u32));
        // H^0(P^2, Ω^1(2)) = 3
        assert_eq!(bott_dims(2, 2, 1, 0).unwrap(), BigUint::from(3u32));
        assert!(bott_dims(0, 1, 0, 0).is_err());
    }

    #[test]
    fn oracle_spot_values() {
        assert_eq!(cech_oracle_p1(2, 0, 0, 4).unwrap().dim, 3);
        assert_eq!(cech_oracle_p1(-1, 0, 0, 3).unwrap().dim, 0);
        assert_eq!(cech_oracle_p1(-1, 0, 1, 3).unwrap().dim, 0);
        assert_eq!(cech_oracle_p1(-3, 0, 1, 5).unwrap().dim, 2);
        assert!(cech_oracle_p1(-3, 0, 1, 4).is_err());
        // Ω^1 = O(−2): H^1 = 1
        assert_eq!(cech_oracle_p1(0, 1, 1, 4).unwrap().dim, 1);
    }
}
