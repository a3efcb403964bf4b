//! Randomized properties of the exact layers: intersection products, pairing
//! invariance under the involution action, degree growth, monomial
//! functoriality, gcd divisibility, scale invariance of evaluation and
//! potentials, and deterministic summation.

use num::complex::Complex64;
use num::BigInt;
use proptest::array::{uniform3, uniform4};
use proptest::collection::vec as pvec;
use proptest::prelude::*;

use pseudodyn_core::maps::{compose, mat3_pow, monomial_degree, monomial_map, reduce};
use pseudodyn_core::poly::Poly;
use pseudodyn_core::potentials::phi1;
use pseudodyn_core::rational::rat;
use pseudodyn_core::sampling::pairwise_sum;
use pseudodyn_core::{
    catalog_map, cup11, degree_sequence, evaluate, make_blowup_space, pair, triple, EvalResult,
    Rat,
};

fn rat_small() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

fn coeffs5() -> impl Strategy<Value = Vec<Rat>> {
    pvec(rat_small(), 5)
}

fn point() -> impl Strategy<Value = [Complex64; 4]> {
    uniform4(uniform3(-2.0f64..2.0)).prop_map(|rows| {
        [
            Complex64::new(rows[0][0], rows[0][1]),
            Complex64::new(rows[1][0], rows[1][1]),
            Complex64::new(rows[2][0], rows[2][1]),
            Complex64::new(rows[3][0], rows[3][1]),
        ]
    })
}

fn poly_small() -> impl Strategy<Value = Poly> {
    pvec((1i64..=3, uniform4(0u32..=2u32)), 1..=3).prop_map(|terms| {
        let mut p = Poly::default();
        for (c, exps) in terms {
            p.add_term(exps, &BigInt::from(c));
        }
        p
    })
}

fn exp_matrix() -> impl Strategy<Value = [[i64; 3]; 3]> {
    uniform3(uniform3(-1i64..=2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cup_is_symmetric(a in coeffs5(), b in coeffs5()) {
        let space = make_blowup_space(4);
        let a = space.class11(a).unwrap();
        let b = space.class11(b).unwrap();
        prop_assert!(cup11(&a, &b).unwrap().eq_exact(&cup11(&b, &a).unwrap()));
    }

    #[test]
    fn triple_is_permutation_invariant(a in coeffs5(), b in coeffs5(), c in coeffs5()) {
        let space = make_blowup_space(4);
        let a = space.class11(a).unwrap();
        let b = space.class11(b).unwrap();
        let c = space.class11(c).unwrap();
        let base = triple(&a, &b, &c).unwrap();
        for (x, y, z) in [
            (&a, &c, &b),
            (&b, &a, &c),
            (&b, &c, &a),
            (&c, &a, &b),
            (&c, &b, &a),
        ] {
            prop_assert_eq!(triple(x, y, z).unwrap(), base.clone());
        }
    }

    #[test]
    fn pair_is_bilinear(
        a in coeffs5(),
        b in coeffs5(),
        c in coeffs5(),
        s in rat_small(),
        t in rat_small(),
    ) {
        let space = make_blowup_space(4);
        let a = space.class11(a).unwrap();
        let b = space.class11(b).unwrap();
        let c = space.class22(c).unwrap();
        let lhs = pair(&a.scale(&s).add(&b.scale(&t)).unwrap(), &c).unwrap();
        let rhs = s * pair(&a, &c).unwrap() + t * pair(&b, &c).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn cup_is_bilinear(
        a in coeffs5(),
        b in coeffs5(),
        c in coeffs5(),
        s in rat_small(),
        t in rat_small(),
    ) {
        let space = make_blowup_space(4);
        let a = space.class11(a).unwrap();
        let b = space.class11(b).unwrap();
        let c = space.class11(c).unwrap();
        let lhs = cup11(&a.scale(&s).add(&b.scale(&t)).unwrap(), &c).unwrap();
        let rhs = cup11(&a, &c)
            .unwrap()
            .scale(&s)
            .add(&cup11(&b, &c).unwrap().scale(&t))
            .unwrap();
        prop_assert!(lhs.eq_exact(&rhs));
    }

    #[test]
    fn involution_action_preserves_pairings(theta in coeffs5(), eta in coeffs5()) {
        let action = catalog_map("cremona_j").unwrap().action.unwrap();
        let theta = action.space.class11(theta).unwrap();
        let eta = action.space.class22(eta).unwrap();
        prop_assert_eq!(
            pair(
                &action.apply11(&theta).unwrap(),
                &action.apply22(&eta).unwrap()
            )
            .unwrap(),
            pair(&theta, &eta).unwrap()
        );
    }

    #[test]
    fn cremona_degrees_are_submultiplicative(m in 1u32..=3, n in 1u32..=3) {
        let j = catalog_map("cremona_j").unwrap();
        let seq = degree_sequence(&j, m + n).unwrap();
        let d = |k: u32| seq.entries[(k - 1) as usize].1;
        prop_assert!(d(m + n) <= d(m) * d(n));
    }

    #[test]
    fn monomial_composition_matches_matrix_product(a in exp_matrix(), b in exp_matrix()) {
        let fa = monomial_map(a);
        let fb = monomial_map(b);
        prop_assume!(fa.is_ok() && fb.is_ok());
        let mut ab = [[0i64; 3]; 3];
        for (i, row) in ab.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        let composed = reduce(&compose(&fa.unwrap(), &fb.unwrap()).unwrap()).unwrap();
        prop_assert_eq!(composed.components, monomial_map(ab).unwrap().components);
    }

    #[test]
    fn monomial_degree_sequence_matches_closed_form(a in exp_matrix()) {
        let fa = monomial_map(a);
        prop_assume!(fa.is_ok());
        let seq = degree_sequence(&fa.unwrap(), 3).unwrap();
        for (n, d) in &seq.entries {
            prop_assert_eq!(BigInt::from(*d), monomial_degree(&mat3_pow(&a, *n)));
        }
    }

    #[test]
    fn gcd_divides_both_products(a in poly_small(), b in poly_small(), g in poly_small()) {
        let ag = a.mul(&g);
        let bg = b.mul(&g);
        let h = ag.gcd(&bg);
        prop_assert!(ag.div_exact(&h).is_some());
        prop_assert!(bg.div_exact(&h).is_some());
        prop_assert!(h.total_degree() >= g.total_degree());
    }

    #[test]
    fn evaluate_respects_projective_scaling(
        x in point(),
        lam in (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im)),
    ) {
        prop_assume!(lam.norm() > 1e-2);
        prop_assume!(x.iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-2);
        let j = catalog_map("cremona_j").unwrap();
        let scaled = [x[0] * lam, x[1] * lam, x[2] * lam, x[3] * lam];
        match (evaluate(&j, &x).unwrap(), evaluate(&j, &scaled).unwrap()) {
            (EvalResult::Point(p), EvalResult::Point(q)) => {
                for k in 0..4 {
                    prop_assert!((p[k] - q[k]).norm() <= 1e-12);
                }
            }
            (EvalResult::Indeterminate, EvalResult::Indeterminate) => {}
            _ => prop_assert!(false, "scaling changed the indeterminacy classification"),
        }
    }

    #[test]
    fn phi1_is_scale_invariant(
        x in point(),
        c in (0.05f64..20.0, 0.0f64..std::f64::consts::TAU)
            .prop_map(|(r, t)| Complex64::from_polar(r, t)),
    ) {
        prop_assume!(x.iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-1);
        let f = catalog_map("squaring").unwrap();
        let scaled = [x[0] * c, x[1] * c, x[2] * c, x[3] * c];
        let base = phi1(&f, 2.0, &x).unwrap();
        prop_assert!((base - phi1(&f, 2.0, &scaled).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn pairwise_sum_matches_naive(v in pvec(-1e3f64..1e3, 0..200)) {
        let naive: f64 = v.iter().sum();
        let abs: f64 = v.iter().map(|x| x.abs()).sum();
        prop_assert!((pairwise_sum(&v) - naive).abs() <= 1e-12 * abs.max(1.0));
    }
}
