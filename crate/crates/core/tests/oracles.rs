//! Values computed by hand or taken from independent sources, frozen.

use gcgw::bundles::{
    atiyah_cocycles, bott_dims, cech_oracle_p1, chern_connection, ChartNerve, RForm, TransitionCocycle,
};
use gcgw::complexes::{binomial, build_operators, cohomology_dims, hodge_numbers, TransverseSplitting};
use gcgw::exterior::form_exp;
use gcgw::gcs::{check_calabi_yau, iwasawa_closed_spinor, iwasawa_spinor, leaf_distribution};
use gcgw::lie::{iwasawa, LieStructure};
use gcgw::linalg::Matrix;
use gcgw::{BasedSpace, GaussianRational as C, GeneralizedVector};
use num_bigint::BigUint;

fn space(n: usize) -> BasedSpace {
    BasedSpace::standard(n)
}

#[test]
fn wedge_and_interior() {
    let s = space(4);
    let a = s.parse("e1 + i e2").unwrap().wedge(&s.parse("e3 + i e4").unwrap());
    assert_eq!(a, s.parse("e1^e3 + i e1^e4 + i e2^e3 - e2^e4").unwrap());
    let w = s.parse("e1^e3 + e4^e2").unwrap();
    assert_eq!(w.interior_basis(0), s.parse("e3").unwrap());
    // i_{e2}(e4^e2) = -e4
    assert_eq!(w.interior_basis(1), s.parse("-e4").unwrap());
    assert_eq!(form_exp(&s.parse("e1^e2 + e3^e4").unwrap()).unwrap(), s.parse("1 + e1^e2 + e3^e4 + e1^e2^e3^e4").unwrap());
}

#[test]
fn clifford_square_is_the_pairing() {
    // v·v·ρ = ⟨v, v⟩ρ, and ⟨e1 + e^1, e1 + e^1⟩ = 1
    let s = space(4);
    let v = GeneralizedVector::basis_vector(4, 0).add(&GeneralizedVector::basis_covector(4, 0));
    assert_eq!(v.pairing(&v), C::one());
    let rho = s.parse("1 + 2 e2^e3 - i e1^e4 + e1^e2^e3").unwrap();
    assert_eq!(v.clifford_act(&v.clifford_act(&rho)), rho);
}

#[test]
fn d_squared_by_hand() {
    // de3 = e12, de2 = e13: d(e12) = -e1^e13 = 0 and d(e13) = -e1^e12 = 0, a Lie algebra
    let ok = LieStructure::from_strings(3, &[("e3", "e1^e2"), ("e2", "e1^e3")]).unwrap();
    assert!(ok.validate().valid());
    // de3 = e12, de2 = e34: d(de3) = -e1^e34 ≠ 0
    assert!(LieStructure::from_strings(4, &[("e3", "e1^e2"), ("e2", "e3^e4")]).is_err());
}

#[test]
fn iwasawa_brackets() {
    let l = iwasawa();
    let s = l.space().clone();
    assert_eq!(l.ce_d(&s.parse("e1^e5").unwrap()), s.parse("e1^e2^e4").unwrap());
    assert_eq!(l.ce_d(&s.parse("e5^e6").unwrap()), s.parse("e1^e3^e6 + e4^e2^e6 - e5^e1^e4 - e5^e2^e3").unwrap());
    assert_eq!(l.lower_central_series(), vec![6, 2, 0]);
    // ⟨e1 + e^2, e2 + e^1⟩ = ½(1 + 1)
    let u = GeneralizedVector::basis_vector(6, 0).add(&GeneralizedVector::basis_covector(6, 1));
    let v = GeneralizedVector::basis_vector(6, 1).add(&GeneralizedVector::basis_covector(6, 0));
    assert_eq!(u.pairing(&v), C::one());
}

#[test]
fn iwasawa_spinors() {
    let l = iwasawa();
    let s = l.space().clone();
    // d(e^{i e56} Ω) = i de5^e6^Ω - i e5^de6^Ω with Ω = (e1 + i e2)^(e3 + i e4),
    // de5^Ω = 2 e1234 and de6^Ω = -2i e1234
    let standard = check_calabi_yau(&l, &iwasawa_spinor(), true).unwrap();
    assert_eq!(standard.d_rho, s.parse("2 e1^e2^e3^e4^e5 + 2 i e1^e2^e3^e4^e6").unwrap());
    assert_eq!(standard.nondegeneracy.unwrap(), s.parse("4 e1^e2^e3^e4^e5^e6").unwrap());
    let closed = check_calabi_yau(&l, &iwasawa_closed_spinor(), true).unwrap();
    assert!(closed.gcy && closed.strong_gcy == Some(true));
    assert_eq!(leaf_distribution(&l, &iwasawa_closed_spinor()).unwrap().codim, 4);
}

#[test]
fn iwasawa_manifold_numbers() {
    // the complex Iwasawa manifold: Betti numbers 1,4,8,10,8,4,1 and its
    // Dolbeault numbers h^{p,q}
    let s = TransverseSplitting::from_table_strings(3, &["0", "0", "dz1^dz2"]).unwrap();
    let c = cohomology_dims(&build_operators(&s).unwrap());
    assert_eq!(c.d, vec![1, 4, 8, 10, 8, 4, 1]);
    let h = [[1, 2, 2, 1], [3, 6, 6, 3], [3, 6, 6, 3], [1, 2, 2, 1]];
    for (p, row) in h.iter().enumerate() {
        assert_eq!(c.d_l[p], row.to_vec());
    }
}

#[test]
fn torus_hodge_numbers() {
    for k in 1..=3 {
        let c = cohomology_dims(&build_operators(&TransverseSplitting::flat(k)).unwrap());
        for ((p, q), h) in hodge_numbers(&c) {
            assert_eq!(h, binomial(k, p) * binomial(k, q));
        }
        assert_eq!(c.d, (0..=2 * k).map(|r| binomial(2 * k, r)).collect::<Vec<_>>());
    }
}

fn p1_line(m: &str) -> TransitionCocycle {
    let n = ChartNerve::new(&[("U0", &["z"]), ("U1", &["w"])], &[], &[("U0", "U1", &[("w", "1/z")])]).unwrap();
    TransitionCocycle::parse(n, 1, &[("U0", "U1", vec![vec![m]])]).unwrap()
}

#[test]
fn dlog_and_chern_connection() {
    let c = p1_line("z");
    let sh = c.nerve().shape();
    let f = |a: usize, s: &str| c.nerve().parse_on_chart(a, s).unwrap();
    let at = atiyah_cocycles(&c).unwrap();
    assert_eq!(at.xi[&(0, 1)].entry(0, 0), &RForm::term(sh, sh.dz(0), f(0, "1/z")));

    // h_0 = 1/(1 + z zbar): θ = ∂log h̄ = -zbar dz/(1 + z zbar), Ω = dz^dzbar/(1 + z zbar)^2
    let h = vec![Matrix::from_rows(vec![vec![f(0, "1/(1 + z zbar)")]]), Matrix::from_rows(vec![vec![f(1, "1/(1 + w wbar)")]])];
    let ch = chern_connection(&c, &h).unwrap();
    assert!(ch.passed());
    assert_eq!(ch.connection.theta[0].entry(0, 0), &RForm::term(sh, sh.dz(0), f(0, "-zbar/(1 + z zbar)")));
    assert_eq!(ch.curvature.omega[0].entry(0, 0), &RForm::term(sh, sh.dz(0) | sh.dzbar(0), f(0, "1/(1 + z zbar)^2")));
}

fn big(n: u32) -> BigUint {
    BigUint::from(n)
}

#[test]
fn bott_spot_values_and_oracle() {
    assert_eq!(bott_dims(1, 2, 0, 0).unwrap(), big(3));
    assert_eq!(bott_dims(1, -3, 0, 1).unwrap(), big(2));
    assert_eq!(bott_dims(1, -1, 0, 0).unwrap(), big(0));
    assert_eq!(bott_dims(1, -1, 0, 1).unwrap(), big(0));
    for (m, q, dim) in [(2, 0, 3), (-1, 0, 0), (-1, 1, 0), (-3, 1, 2)] {
        assert_eq!(cech_oracle_p1(m, 0, q, 6).unwrap().dim, dim);
    }
}

#[test]
fn bott_satisfies_serre_duality() {
    // H^q(Ω^p(m)) ≅ H^{n-q}(Ω^{n-p}(-m))*
    for n in 1..=4i64 {
        for p in 0..=n {
            for q in 0..=n {
                for m in -7..=7 {
                    assert_eq!(bott_dims(n, m, p, q).unwrap(), bott_dims(n, -m, n - p, n - q).unwrap(), "{n} {m} {p} {q}");
                }
            }
        }
    }
}

#[test]
fn bott_euler_characteristic() {
    // χ(O(m)) = (m+1)(m+2)…(m+n)/n!
    for n in 1..=4i64 {
        for m in -8..=8i64 {
            let chi: i128 = (0..=n)
                .map(|q| {
                    let d: i128 = bott_dims(n, m, 0, q).unwrap().try_into().unwrap();
                    if q % 2 == 0 { d } else { -d }
                })
                .sum();
            let num: i128 = (1..=n).map(|j| (m + j) as i128).product();
            let den: i128 = (1..=n as i128).product();
            assert_eq!(chi * den, num, "n={n} m={m}");
        }
    }
}
