use num_traits::Zero;
use proptest::prelude::*;
use radialscope_core::symalg::{ad_exponential, bracket, Exponents, ModelQuadratic, VariableLayout, WeightedPolynomial};
use radialscope_core::{Complex, ExactPolynomial, Rational};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn layout() -> VariableLayout {
    VariableLayout::all_double_prime(3).unwrap()
}

fn poly() -> impl Strategy<Value = ExactPolynomial> {
    prop::collection::vec((0u32..2, [0u32..3, 0u32..3], [0u32..3, 0u32..3], -4i64..=4, -3i64..=3), 1..5).prop_map(
        |ts| {
            let mut p = WeightedPolynomial::zero(layout());
            for (a, al, be, re, im) in ts {
                p.add_term(Exponents::new(a, al.to_vec(), be.to_vec()), Complex::new(q(re, 1), q(im, 2)));
            }
            p
        },
    )
}

fn monomial() -> impl Strategy<Value = Exponents> {
    (0u32..3, [0u32..4, 0u32..4], [0u32..4, 0u32..4])
        .prop_filter("grade <= 6", |(a, al, be)| 2 * a + al.iter().sum::<u32>() + be.iter().sum::<u32>() <= 8)
        .prop_map(|(a, al, be)| Exponents::new(a, al.to_vec(), be.to_vec()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antisymmetry(a in poly(), b in poly()) {
        let ab = bracket(&a, &b).unwrap();
        let ba = bracket(&b, &a).unwrap();
        prop_assert!((&ab + &ba).is_zero());
    }

    #[test]
    fn jacobi(a in poly(), b in poly(), c in poly()) {
        let t1 = bracket(&a, &bracket(&b, &c).unwrap()).unwrap();
        let t2 = bracket(&b, &bracket(&c, &a).unwrap()).unwrap();
        let t3 = bracket(&c, &bracket(&a, &b).unwrap()).unwrap();
        prop_assert!((&(&t1 + &t2) + &t3).is_zero());
    }

    #[test]
    fn leibniz_defect(a in poly(), b in poly(), c in poly()) {
        // {{a, bc}} - {{a, b}} c - b {{a, c}} = -(d_nu a) b c
        let lhs = &(&bracket(&a, &(&b * &c)).unwrap() - &(&bracket(&a, &b).unwrap() * &c)) - &(&b * &bracket(&a, &c).unwrap());
        let rhs = -&(&(&a.d_nu() * &b) * &c);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn eigen_lemma(idx in monomial(), rn in -6i64..6, rd in 1i64..7, rn2 in 1i64..3, lam in 1i64..4) {
        let r1 = q(rn, rd);
        let r2 = q(rn2, 5);
        prop_assume!(r1 < Rational::zero() || (r1 > Rational::zero() && r1 < q(1, 2)));
        let neg = usize::from(r1 < Rational::zero());
        let l = VariableLayout::new(3, neg + 1, 3).unwrap();
        let model = ModelQuadratic::real(l, q(-lam, 1), vec![r1, r2]).unwrap();
        let m = WeightedPolynomial::monomial(l, idx.clone(), Complex::new(q(1, 1), q(0, 1)));
        let lhs = bracket(&model.p0(), &m).unwrap();
        prop_assert_eq!(lhs, m.scale(&model.eigenvalue(&idx)));
    }

    #[test]
    fn exponential_round_trip(p in poly(), bc in -3i64..=3, grade in 1u32..3) {
        let l = layout();
        let b = WeightedPolynomial::monomial(l, Exponents::new(0, vec![grade + 2, 0], vec![0, 0]), Complex::new(q(bc, 1), q(0, 1)));
        let n = 6;
        let forward = ad_exponential(&b, &p, n).unwrap();
        let back = ad_exponential(&-&b, &forward, n).unwrap();
        prop_assert_eq!(back, p.truncate(n));
    }
}
