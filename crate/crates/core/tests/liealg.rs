mod common;

use common::*;
use dnb_core::liealg::check_linear_form;
use dnb_core::{LinearBracketData, Rational};
use num_traits::Zero;
use proptest::prelude::*;
use symexpr::ratio;

fn r(n: i64) -> Rational {
    ratio(n, 1)
}

#[test]
fn vector_field_algebras_satisfy_jacobi() {
    for n in 1..=3 {
        let l = LinearBracketData::vector_fields(n);
        assert!(l.jacobi_check().passed(), "n = {n}");
    }
    for n in 1..=2 {
        assert!(LinearBracketData::vector_fields(n).functional_oracle(3, 11) < 1e-9);
    }
}

#[test]
fn abelian_and_one_component_data() {
    let zero = LinearBracketData::zero(2, 2);
    assert!(zero.jacobi_check().passed());
    assert_eq!(zero.functional_oracle(2, 1), 0.0);
    assert_eq!(zero.multiply(1, &[r(1), r(2)], &[r(3), r(4)]), vec![r(0), r(0)]);

    let mut one = LinearBracketData::zero(1, 1);
    one.set_b(0, 0, 0, 0, r(1));
    assert!(one.jacobi_check().passed());
    assert_eq!(one.to_bracket(), torus(1));
}

#[test]
fn broken_perturbation_is_caught_by_both_checks() {
    let mut l = LinearBracketData::vector_fields(2);
    let old = l.b(1, 0, 0, 0).clone();
    l.set_b(1, 0, 0, 0, old + r(1));
    assert!(!l.jacobi_check().passed());
    assert!(l.functional_oracle(3, 11) > 1e-3);
}

#[test]
fn symbolic_and_functional_checks_agree_on_random_perturbations() {
    for seed in 0..6u64 {
        let mut l = LinearBracketData::vector_fields(2);
        let (a, i, j, k) =
            ((seed % 2) as usize, (seed / 2 % 2) as usize, (seed / 4 % 2) as usize, (seed % 3 % 2) as usize);
        let old = l.b(a, i, j, k).clone();
        l.set_b(a, i, j, k, old + ratio(1, 2));
        let symbolic = l.jacobi_check().passed();
        let numeric = l.functional_oracle(2, seed) < 1e-9;
        assert_eq!(symbolic, numeric, "perturbation of b^{}{}{}_{}", i + 1, j + 1, a + 1, k + 1);
    }
}

#[test]
fn torus_bracket_round_trips_through_linear_form() {
    let l = LinearBracketData::vector_fields(2);
    assert_eq!(l.to_bracket(), torus_by_hand(2));
    assert_eq!(check_linear_form(&torus(2)), Some(l));
}

#[test]
fn canonical_bracket_is_linear_with_constant_first_metric() {
    let l = check_linear_form(&canonical()).unwrap();
    assert_eq!(l.g0(0, 0, 0), &r(1));
    assert_eq!(l.g0(0, 1, 1), &r(-1));
    assert!(l.g0(0, 0, 1).is_zero());
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                assert!(l.b(0, i, j, k).is_zero());
            }
            assert!(l.g0(1, i, j).is_zero());
        }
    }
    assert_eq!(l.to_bracket(), canonical());
    assert!(l.normal_form_conditions().hold());
    assert!(!LinearBracketData::vector_fields(2).normal_form_conditions().first_direction_constant);
}

#[test]
fn quadratic_metric_is_not_linear() {
    let br = dnb_core::HydroBracket::from_metrics(vec![diag(&["u1^2", "1"]), diag(&["1", "1"])]).unwrap();
    assert_eq!(check_linear_form(&br), None);
}

#[test]
fn trivial_cocycle() {
    let rep = LinearBracketData::vector_fields(2).cocycle_check();
    assert!(rep.skew && rep.closed);
    assert_eq!(rep.coboundary, Some(vec![r(0), r(0)]));
}

#[test]
fn shifted_vector_field_cocycle_is_a_coboundary() {
    for (c1, c2) in [(ratio(3, 2), r(-2)), (r(0), r(5)), (ratio(-1, 3), ratio(7, 4))] {
        let base = LinearBracketData::vector_fields(2);
        // g0^{ijα} = c^i δ^{jα} + c^j δ^{iα}
        let c = [c1.clone(), c2.clone()];
        let g0: Vec<Vec<Vec<Rational>>> = (0..2)
            .map(|a| {
                (0..2)
                    .map(|i| {
                        (0..2)
                            .map(|j| {
                                let mut v = r(0);
                                if j == a {
                                    v += &c[i];
                                }
                                if i == a {
                                    v += &c[j];
                                }
                                v
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let l = base.clone().with_g0(g0).unwrap();
        assert!(l.jacobi_check().passed());
        let rep = l.cocycle_check();
        assert!(rep.skew && rep.closed);
        let shift = rep.coboundary.unwrap();
        assert_eq!(shift, c.to_vec());
        // substituting u ↦ u − c removes g0
        assert_eq!(l.shifted_bracket(&shift).unwrap(), base.to_bracket());
    }
}

#[test]
fn canonical_cocycle_is_not_a_coboundary() {
    let l = check_linear_form(&canonical()).unwrap();
    assert!(l.jacobi_check().passed());
    let rep = l.cocycle_check();
    assert!(rep.skew && rep.closed);
    assert_eq!(rep.coboundary, None);
}

#[test]
fn vector_field_multiplication() {
    let l = LinearBracketData::vector_fields(2);
    let (e1, e2) = ([r(1), r(0)], [r(0), r(1)]);
    assert_eq!(l.multiply(1, &e1, &e1), vec![r(0), r(0)]);
    assert_eq!(l.multiply(1, &e1, &e2), e1.to_vec());
    assert_eq!(l.multiply(0, &e2, &e1), e2.to_vec());
}

fn small() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_bilinear(x in prop::collection::vec(small(), 3), x2 in prop::collection::vec(small(), 3),
                                  y in prop::collection::vec(small(), 3), s in small(), a in 0usize..3) {
        let l = LinearBracketData::vector_fields(3);
        let sum: Vec<Rational> = x.iter().zip(&x2).map(|(p, q)| p + q).collect();
        let lhs = l.multiply(a, &sum, &y);
        let rhs: Vec<Rational> = l.multiply(a, &x, &y).iter().zip(l.multiply(a, &x2, &y)).map(|(p, q)| p + q).collect();
        prop_assert_eq!(lhs, rhs);
        let scaled: Vec<Rational> = y.iter().map(|v| v * &s).collect();
        let lhs = l.multiply(a, &x, &scaled);
        let rhs: Vec<Rational> = l.multiply(a, &x, &y).iter().map(|v| v * &s).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn field_bracket_is_skew(c in prop::collection::vec(-3i64..=3, 8)) {
        // polynomial covector fields on the plane, bracket computed symbolically
        let l = LinearBracketData::vector_fields(2);
        let v = symexpr::Vars::coordinates(2);
        let field = |o: usize| -> Vec<dnb_core::Expr> {
            (0..2).map(|i| {
                let s = format!("{}*u1^2 + {}*u1*u2", c[o + 2 * i], c[o + 2 * i + 1]);
                symexpr::parse(&s, &v).unwrap()
            }).collect()
        };
        let (xi, eta) = (field(0), field(4));
        let ab = l.bracket_fields(&xi, &eta);
        let ba = l.bracket_fields(&eta, &xi);
        for k in 0..2 {
            prop_assert!((&ab[k] + &ba[k]).is_zero());
        }
    }
}
