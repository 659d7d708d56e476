use gcgw::bundles::{
    atiyah_cocycles, bott_dims, cech_oracle_p1, chern_connection, chern_weil, check_connection_law, curvature,
    default_truncation, gh_connection_search, residue_degree, transgression, triviality, validate_cocycle, ChartNerve,
    ChernConvention, SearchOutcome, TransitionCocycle, Triviality,
};
use gcgw::complexes::{
    adjoints_and_laplacians, build_operators, cohomology_dims, lefschetz_check, star_star_check, Bigrading,
    TransverseSplitting,
};
use gcgw::exterior::{blades_of_grade, clifford_act, pairing, Blade};
use gcgw::gcs::{check_calabi_yau, iwasawa_closed_spinor, spinor_to_structure, GCStructure, PureSpinorLine};
use gcgw::lie::{iwasawa, LieStructure};
use gcgw::linalg::{CMatrix, Matrix};
use gcgw::scalar::rat;
use gcgw::{expr, BasedSpace, GaussianRational as C, GeneralizedVector, Multivector};
use proptest::prelude::*;

fn scalar() -> impl Strategy<Value = C> {
    (-4i64..=4, 1i64..=3, -3i64..=3).prop_map(|(n, d, i)| C::new(rat(n, d), rat(i, 1)))
}

/// A random homogeneous form of degree `r` in dimension `n`.
fn homogeneous(n: usize, r: usize) -> impl Strategy<Value = Multivector> {
    let blades: Vec<Blade> = blades_of_grade(n, r);
    let len = blades.len();
    proptest::collection::vec(proptest::option::weighted(0.5, scalar()), len).prop_map(move |cs| {
        let mut m = Multivector::zero(n);
        for (b, c) in blades.iter().zip(cs) {
            if let Some(c) = c {
                m.add_term(*b, &c);
            }
        }
        m
    })
}

fn mixed(n: usize) -> impl Strategy<Value = Multivector> {
    (0..=n)
        .map(|r| homogeneous(n, r).boxed())
        .collect::<Vec<_>>()
        .prop_map(move |parts| parts.iter().fold(Multivector::zero(n), |acc, p| acc.add(p)))
}

fn vector(n: usize) -> impl Strategy<Value = Vec<C>> {
    proptest::collection::vec(scalar(), n)
}

fn gvector(n: usize) -> impl Strategy<Value = GeneralizedVector> {
    (vector(n), vector(n)).prop_map(|(x, xi)| GeneralizedVector::new(x, xi))
}

fn sign(k: usize) -> C {
    if k.is_multiple_of(2) {
        C::one()
    } else {
        -C::one()
    }
}

/// Two-step nilpotent algebras: `e1..er` closed, `de_k` an arbitrary real
/// 2-form in `e1..er` for `k > r`. These always satisfy `d² = 0`.
fn two_step(n: usize, r: usize) -> impl Strategy<Value = LieStructure> {
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).collect();
    proptest::collection::vec(proptest::collection::vec(-2i64..=2, pairs.len()), n - r).prop_map(move |rows| {
        let mut table = vec![Multivector::zero(n); n];
        for (k, row) in rows.iter().enumerate() {
            for ((i, j), c) in pairs.iter().zip(row) {
                if *c != 0 {
                    table[r + k] = table[r + k].add(&Multivector::monomial(n, &[*i, *j]).scale(&C::from_int(*c)));
                }
            }
        }
        LieStructure::new(BasedSpace::standard(n), table).expect("two-step algebras are Lie algebras")
    })
}

fn real_two_form(n: usize) -> impl Strategy<Value = Multivector> {
    let blades = blades_of_grade(n, 2);
    proptest::collection::vec(-3i64..=3, blades.len()).prop_map(move |cs| {
        let mut m = Multivector::zero(n);
        for (b, c) in blades.iter().zip(cs) {
            m.add_term(*b, &C::from_int(c));
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_graded_commutative(
        (r, s, a, b) in (0usize..=3, 0usize..=3).prop_flat_map(|(r, s)| (Just(r), Just(s), homogeneous(5, r), homogeneous(5, s)))
    ) {
        prop_assert_eq!(a.wedge(&b), b.wedge(&a).scale(&sign(r * s)));
    }

    #[test]
    fn interior_is_a_graded_derivation(a in homogeneous(4, 2), b in mixed(4), x in vector(4)) {
        let lhs = a.wedge(&b).interior(&x);
        let rhs = a.interior(&x).wedge(&b).add(&a.wedge(&b.interior(&x)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn interior_derivation_odd_degree(a in homogeneous(4, 1), b in mixed(4), x in vector(4)) {
        let lhs = a.wedge(&b).interior(&x);
        let rhs = a.interior(&x).wedge(&b).sub(&a.wedge(&b.interior(&x)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn clifford_relation(v in gvector(3), w in gvector(3), rho in mixed(3)) {
        prop_assert_eq!(clifford_act(&v, &clifford_act(&v, &rho)), rho.scale(&pairing(&v, &v)));
        let anti = clifford_act(&v, &clifford_act(&w, &rho)).add(&clifford_act(&w, &clifford_act(&v, &rho)));
        prop_assert_eq!(anti, rho.scale(&(pairing(&v, &w) * C::from_int(2))));
    }

    #[test]
    fn scalars_round_trip(c in scalar()) {
        prop_assert_eq!(expr::parse_scalar(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn forms_round_trip(m in mixed(4)) {
        let s = BasedSpace::standard(4);
        prop_assert_eq!(s.parse(&s.print(&m)).unwrap(), m);
    }

    #[test]
    fn d_squared_vanishes(l in two_step(5, 3), w in mixed(5)) {
        prop_assert!(l.validate().valid());
        prop_assert!(l.ce_d(&l.ce_d(&w)).is_zero());
    }

    #[test]
    fn courant_bracket_properties(l in two_step(5, 3), u in gvector(5), v in gvector(5), x in vector(5), y in vector(5)) {
        let uv = l.courant_bracket(&u, &v);
        let vu = l.courant_bracket(&v, &u);
        prop_assert_eq!(uv, vu.neg());
        let n = 5;
        let pure = l.courant_bracket(&GeneralizedVector::new(x.clone(), vec![C::zero(); n]), &GeneralizedVector::new(y.clone(), vec![C::zero(); n]));
        prop_assert_eq!(pure.vector, l.bracket(&x, &y));
        prop_assert!(pure.covector.iter().all(|c| c.is_zero()));
    }
}

fn standard_structures() -> Vec<GCStructure> {
    let s4 = BasedSpace::standard(4);
    vec![
        GCStructure::standard_complex(2),
        GCStructure::from_symplectic(&s4.parse("e1^e2 + e3^e4").unwrap()).unwrap(),
        GCStructure::standard_complex(1).direct_sum(&GCStructure::from_symplectic(&BasedSpace::standard(2).parse("e1^e2").unwrap()).unwrap()),
    ]
}

fn is_minus_identity(j: &CMatrix) -> bool {
    j.mul(j) == Matrix::identity(j.rows()).neg()
}

/// `⟨u, v⟩ = ½(ξ(y) + η(x))` as a matrix.
fn pairing_matrix(m: usize) -> CMatrix {
    let half = C::from_ratio(1, 2);
    let z = Matrix::zeros(m, m);
    let i = Matrix::identity(m).scale(&half);
    Matrix::from_blocks(&z, &i, &i, &z)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn b_transforms_keep_axioms_and_type(which in 0usize..3, b in real_two_form(4)) {
        let j = &standard_structures()[which];
        let abelian = LieStructure::abelian(4);
        let t = j.b_transform(&b, Some(&abelian)).unwrap();
        let m = t.matrix();
        prop_assert!(is_minus_identity(m));
        let g = pairing_matrix(4);
        prop_assert_eq!(m.transpose().mul(&g).mul(m), g);
        prop_assert_eq!(t.type_k().unwrap(), j.type_k().unwrap());
        prop_assert!(t.check_axioms(Some(&abelian)).unwrap().passed());
    }

    #[test]
    fn eigenbundle_is_maximal_isotropic(which in 0usize..3, b in real_two_form(4)) {
        let t = standard_structures()[which].b_transform(&b, None).unwrap();
        let e = t.eigen().unwrap();
        prop_assert_eq!(e.l.len(), 4);
        for u in &e.l {
            for v in &e.l {
                prop_assert!(pairing(u, v).is_zero());
            }
        }
        // L ∩ L̄ = 0
        let cols: Vec<Vec<C>> = e.l.iter().chain(e.l.iter().map(|u| u.conj()).collect::<Vec<_>>().iter()).map(|u| u.to_column()).collect();
        prop_assert_eq!(gcgw::linalg::span_rank(&cols, 8), 8);
    }

    #[test]
    fn spinor_round_trip(which in 0usize..3, b in real_two_form(4)) {
        let t = standard_structures()[which].b_transform(&b, None).unwrap();
        let s = t.structure_to_spinor().unwrap();
        prop_assert_eq!(spinor_to_structure(&s).unwrap(), t.clone());
        let back = spinor_to_structure(&s).unwrap().structure_to_spinor().unwrap();
        prop_assert!(gcgw::linalg::same_span(&back.annihilator(), &s.annihilator(), 8));
    }

    #[test]
    fn gcy_spinors_are_integrable(coeffs in proptest::collection::vec(-2i64..=2, 8)) {
        // closed B-transforms e^B ∧ ρ of the closed Iwasawa spinor stay Calabi–Yau
        let l = iwasawa();
        let closed = l.closed_two_forms();
        let b = closed.iter().zip(coeffs.iter().cycle()).fold(Multivector::zero(6), |acc, (w, c)| acc.add(&w.scale(&C::from_int(*c))));
        let rho = gcgw::exterior::form_exp(&b).unwrap().wedge(&iwasawa_closed_spinor().rho);
        let s = PureSpinorLine::new(rho);
        let r = check_calabi_yau(&l, &s, false).unwrap();
        prop_assert!(r.gcy);
        let j = spinor_to_structure(&s).unwrap();
        prop_assert!(j.check_axioms(Some(&l)).unwrap().integrable.unwrap().pass);
    }
}

/// Splittings with `d dz_j` built from `dz_a ∧ dz_b`, `a, b < j`, and their
/// conjugates; `d² = 0` holds by the same two-step argument.
/// Splittings with `d dz_k` a combination of `dz_a ∧ dz_b`, `dz_a ∧ dz̄_b`
/// and `dz̄_a ∧ dz̄_b` for `a, b < k`; the rest closed. `d² = 0` holds by the
/// same two-step argument.
fn two_step_splitting(k: usize) -> impl Strategy<Value = Option<TransverseSplitting>> {
    let n = 2 * k;
    let low: Vec<usize> = (0..k - 1).chain(k..2 * k - 1).collect();
    let pairs: Vec<(usize, usize)> =
        low.iter().flat_map(|&i| low.iter().filter(move |&&j| j > i).map(move |&j| (i, j))).collect();
    proptest::collection::vec(proptest::option::weighted(0.4, scalar()), pairs.len()).prop_map(move |cs| {
        let mut table = vec![Multivector::zero(n); k];
        for ((a, b), c) in pairs.iter().zip(&cs) {
            if let Some(c) = c {
                table[k - 1] = table[k - 1].add(&Multivector::monomial(n, &[*a, *b]).scale(c));
            }
        }
        TransverseSplitting::from_table(k, &table).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn splitting_identities_and_hodge(s in two_step_splitting(3)) {
        prop_assume!(s.is_some());
        let s = s.unwrap();
        let ops = build_operators(&s).unwrap();
        prop_assert!(ops.identities().all());
        prop_assert!(star_star_check(&s, &Bigrading::new(3)).iter().all(|b| *b));
        let (_, r) = adjoints_and_laplacians(&s, &ops);
        prop_assert!(r.d_l_adjoint && r.d_lbar_adjoint && r.gram_positive && r.laplacians_self_adjoint);
        prop_assert!(r.harmonic_matches_cohomology);
        prop_assert_eq!(&r.harmonic, &cohomology_dims(&ops));
        let kahler = lefschetz_check(&s, &ops);
        if kahler.d_omega_zero {
            prop_assert!(kahler.passed());
        }
    }

    #[test]
    fn positive_hermitian_product(s in two_step_splitting(2), w in mixed(4)) {
        prop_assume!(s.is_some());
        let s = s.unwrap();
        let h = s.hermitian(&w, &w);
        if w.is_zero() {
            prop_assert!(h.is_zero());
        } else {
            prop_assert!(h.is_real() && h.re > num_rational::BigRational::from_integer(0.into()));
        }
    }
}

fn p1() -> ChartNerve {
    ChartNerve::new(&[("U0", &["z"]), ("U1", &["w"])], &[], &[("U0", "U1", &[("w", "1/z")])]).unwrap()
}

fn laurent(c: i64, m: i64) -> String {
    match m {
        0 => format!("{}", c),
        m if m > 0 => format!("{}*z^{}", c, m),
        m => format!("{}/z^{}", c, -m),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn line_bundle_atiyah_and_degree(c in prop_oneof![1i64..=5, -5i64..=-1], m in -4i64..=4) {
        let phi = laurent(c, m);
        let cy = TransitionCocycle::parse(p1(), 1, &[("U0", "U1", vec![vec![phi.as_str()]])]).unwrap();
        prop_assert!(validate_cocycle(&cy).valid);
        let at = atiyah_cocycles(&cy).unwrap();
        prop_assert!(at.passed());
        let t = triviality(&cy).unwrap();
        if m == 0 {
            prop_assert_eq!(t, Triviality::Trivial);
        } else {
            prop_assert_eq!(t, Triviality::NonTrivial { degree: m });
        }
        prop_assert_eq!(residue_degree(&cy), Some(C::from_int(m)));
    }

    #[test]
    fn rank_two_triangular_cocycles(a in 0i64..=2, b in 0i64..=2, p in proptest::collection::vec(-2i64..=2, 3)) {
        let off = p.iter().enumerate().map(|(i, c)| format!("({})*z^{}", c, i)).collect::<Vec<_>>().join(" + ");
        let (da, db) = (laurent(1, a), laurent(1, b));
        let cy = TransitionCocycle::parse(p1(), 2, &[("U0", "U1", vec![vec![da.as_str(), off.as_str()], vec!["0", db.as_str()]])]).unwrap();
        prop_assert!(validate_cocycle(&cy).valid);
        prop_assert!(atiyah_cocycles(&cy).unwrap().passed());
    }

    #[test]
    fn found_connections_satisfy_the_law(e in proptest::collection::vec(prop_oneof![1i64..=3, -3i64..=-1], 2), f in -3i64..=3) {
        // constant cocycles are flat; the search must find Θ and it must glue
        let (a, d) = (e[0].to_string(), e[1].to_string());
        let off = f.to_string();
        let cy = TransitionCocycle::parse(p1(), 2, &[("U0", "U1", vec![vec![a.as_str(), off.as_str()], vec!["0", d.as_str()]])]).unwrap();
        let at = atiyah_cocycles(&cy).unwrap();
        match gh_connection_search(&cy, &at, 2).unwrap() {
            SearchOutcome::Found(conn) => {
                prop_assert!(check_connection_law(&cy, &at, &conn).iter().all(|l| l.pass));
                let cd = curvature(&cy, &conn).unwrap();
                prop_assert!(cd.equivariance.iter().all(|e| e.pass));
            }
            other => prop_assert!(false, "expected a connection, got {:?}", other),
        }
    }

    #[test]
    fn chern_weil_is_closed_and_connection_independent(a0 in 1i64..=4, b0 in 1i64..=4, a1 in 1i64..=4, b1 in 1i64..=4) {
        let cy = TransitionCocycle::parse(p1(), 1, &[("U0", "U1", vec![vec!["z"]])]).unwrap();
        let metric = |a: i64, b: i64| {
            vec![
                Matrix::from_rows(vec![vec![cy.nerve().parse_on_chart(0, &format!("1/({} + {}*z*zbar)", a, b)).unwrap()]]),
                Matrix::from_rows(vec![vec![cy.nerve().parse_on_chart(1, &format!("1/({}*w*wbar + {})", a, b)).unwrap()]]),
            ]
        };
        let c0 = chern_connection(&cy, &metric(a0, b0)).unwrap();
        let c1 = chern_connection(&cy, &metric(a1, b1)).unwrap();
        prop_assert!(c0.passed() && c1.passed());
        for conv in [ChernConvention::Vector, ChernConvention::Principal] {
            let cls = chern_weil(&cy, &c0.curvature.omega11, 1, conv).unwrap();
            prop_assert!(cls.passed());
        }
        let at = atiyah_cocycles(&cy).unwrap();
        let t = transgression(&cy, &at, &c0.connection, &c1.connection, 1, ChernConvention::Vector).unwrap();
        prop_assert!(t.passed());
    }

    #[test]
    fn bott_matches_the_oracle(m in -6i64..=6, q in 0u8..=1) {
        let oracle = cech_oracle_p1(m, 0, q, default_truncation(m, 0)).unwrap();
        prop_assert!(oracle.stable);
        prop_assert_eq!(bott_dims(1, m, 0, q as i64).unwrap(), (oracle.dim as u64).into());
    }

    #[test]
    fn vanishing_above_the_middle(m in 1i64..=6) {
        let r = cech_oracle_p1(m, 1, 1, default_truncation(m, 1)).unwrap();
        prop_assert!(r.stable);
        prop_assert_eq!(r.dim, 0);
    }
}
