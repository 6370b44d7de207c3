//! Worked examples with exact expected values.

mod common;

use common::*;
use dnb_core::bracket::{connection_crosscheck, obstructions, verify_flat_pencil_relations, verify_poisson};
use dnb_core::classify::{
    classify_one_component, compose_bracket, is_constant_reducible, pull_back, reducibility_by_nonsingularity,
    transform, two_component_verdict, TwoComponentClass,
};
use dnb_core::compat::MetricPair;
use dnb_core::geometry::Metric;
use dnb_core::{CoordinateChange, Error, Expr, HydroBracket, Slot, Tensor, VerdictKind};
use symexpr::{parse, ratio, Vars};

fn names(n: usize) -> Vec<String> {
    Vars::coordinates(n).names().to_vec()
}

// Nonzero entries of T^{ijk,12}, one-based (i, j, k), computed independently
// with a computer algebra system from the Levi-Civita connections.
const TORUS_T: [((usize, usize, usize), &str); 6] = [
    ((1, 1, 2), "u1"),
    ((1, 2, 1), "-2*u1"),
    ((1, 2, 2), "-u2"),
    ((2, 1, 1), "u1"),
    ((2, 1, 2), "2*u2"),
    ((2, 2, 1), "-u2"),
];
const CANONICAL_T: [((usize, usize, usize), &str); 6] =
    [((1, 1, 2), "1"), ((1, 2, 1), "-2"), ((1, 2, 2), "-1"), ((2, 1, 1), "1"), ((2, 1, 2), "2"), ((2, 2, 1), "-1")];

fn assert_upper_obstruction(br: &HydroBracket, table: &[((usize, usize, usize), &str)]) {
    let set = obstructions(br).unwrap();
    let t = &set.upper[&(0, 1)];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let want =
                    table.iter().find(|(ix, _)| *ix == (i + 1, j + 1, k + 1)).map_or(Expr::zero(), |(_, e)| ex(e, 2));
                assert_eq!(t.get(&[i, j, k]), &want, "T^{{{}{}{},12}}", i + 1, j + 1, k + 1);
            }
        }
    }
}

#[test]
fn torus_bracket_is_poisson_with_exact_obstruction() {
    let br = torus(2);
    assert_eq!(br, torus_by_hand(2));
    let report = verify_poisson(&br);
    for name in ["a1", "a2", "a3", "a4", "a5", "a6", "a7"] {
        assert!(report.verdict(name).unwrap().passed(), "{name}");
    }
    assert_upper_obstruction(&br, &TORUS_T);
    assert_eq!(obstructions(&br).unwrap().upper[&(0, 1)].get(&[0, 0, 1]), &ex("u1", 2));
}

#[test]
fn torus_metrics_are_flat_and_satisfy_pencil_relations() {
    let br = torus(2);
    assert!(verify_flat_pencil_relations(&br).unwrap().passed());
    assert!(connection_crosscheck(&br).unwrap());
}

#[test]
fn canonical_bracket() {
    let br = canonical();
    assert!(verify_poisson(&br).passed());
    for a in 0..2 {
        assert!(Metric::new(br.metric(a).clone()).unwrap().is_flat());
    }
    let rel = verify_flat_pencil_relations(&br).unwrap();
    assert_eq!(rel.verdicts.iter().map(|v| v.name).collect::<Vec<_>>(), ["b1", "b2", "b3", "b4"]);
    assert!(rel.passed());
    assert!(connection_crosscheck(&br).unwrap());
    assert_upper_obstruction(&br, &CANONICAL_T);
    assert_eq!(obstructions(&br).unwrap().upper[&(0, 1)].get(&[1, 0, 0]), &Expr::one());
}

#[test]
fn canonical_b_is_induced_by_its_metrics() {
    let br = canonical();
    let derived = HydroBracket::from_metrics(br.metrics().to_vec()).unwrap();
    assert_eq!(derived, br);
}

#[test]
fn canonical_obstruction_is_minus_epsilon_b() {
    // T^{ijk,12} = −ε^i b^{kj2}_i with ε = (1, −1)
    let br = canonical();
    let t = obstructions(&br).unwrap().upper[&(0, 1)].clone();
    let eps = [1, -1];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let want = br.b(1).get(&[k, j, i]).scale(&ratio(-eps[i], 1));
                assert_eq!(t.get(&[i, j, k]), &want);
            }
        }
    }
}

#[test]
fn quadratic_change_carries_torus_to_canonical() {
    let q = quadratic_change();
    // the torus bracket lives in w = φ(u); rewritten in u it is canonical
    assert_eq!(pull_back(&torus(2), &q).unwrap(), canonical());
    // equivalently the canonical bracket, pushed to w, is the torus bracket
    // composed with φ
    assert_eq!(transform(&canonical(), &q).unwrap(), compose_bracket(&torus(2), &q).unwrap());
}

#[test]
fn identity_change_is_trivial() {
    for br in [torus(2), canonical()] {
        let id = CoordinateChange::identity(2);
        assert_eq!(transform(&br, &id).unwrap(), br);
        assert_eq!(pull_back(&br, &id).unwrap(), br);
    }
}

#[test]
fn non_invertible_change_is_rejected() {
    let err = CoordinateChange::new(vec![ex("u1 + u2", 2), ex("2*u1 + 2*u2", 2)]).unwrap_err();
    assert!(matches!(err, Error::NonInvertibleChange));
}

#[test]
fn linear_change_of_constant_bracket_stays_constant() {
    let br = constant(&[&["1", "1"], &["2", "3"]]);
    let c = CoordinateChange::new(vec![ex("2*u1 + u2", 2), ex("u1 - u2", 2)]).unwrap();
    let out = transform(&br, &c).unwrap();
    for a in 0..2 {
        assert!(out.metric(a).iter().all(|(_, e)| e.is_constant()));
        assert!(out.b(a).is_zero());
    }
}

#[test]
fn canonical_pencil_has_a_double_root() {
    let br = canonical();
    let pair = MetricPair::new(br.metric(1).clone(), br.metric(0).clone()).unwrap();
    let pa = pair.pencil_analysis();
    let vars = Vars::coordinates(2).with("l");
    assert_eq!(pa.char_poly, parse("-(l - (u2 - u1))^2", &vars).unwrap());
    assert!(pa.discriminant.is_zero());
    assert!(!pa.nonsingular);
    assert_eq!(pa.repeated_root, Some(ex("u2 - u1", 2)));
}

#[test]
fn torus_pencil_is_singular() {
    let br = torus(2);
    let pair = MetricPair::new(br.metric(0).clone(), br.metric(1).clone()).unwrap();
    let pa = pair.pencil_analysis();
    assert!(pa.discriminant.is_zero());
    assert!(!pa.nonsingular);
}

#[test]
fn higher_dimensional_torus_metrics_are_degenerate() {
    for n in 3..=4 {
        let br = torus(n);
        assert!(verify_poisson(&br).passed());
        for a in 0..n {
            assert!(br.metric(a).det().unwrap().is_zero());
            assert!(matches!(Metric::new(br.metric(a).clone()), Err(Error::DegenerateMetric { .. })));
        }
        assert!(matches!(obstructions(&br), Err(Error::DegenerateMetric { direction: Some(0) })));
        assert!(matches!(is_constant_reducible(&br), Err(Error::DegenerateMetric { .. })));
        assert!(matches!(HydroBracket::from_metrics(br.metrics().to_vec()), Err(Error::DegenerateMetric { .. })));
    }
}

fn one_component(gs: &[&str], bs: &[&str]) -> HydroBracket {
    let g = gs.iter().map(|s| Tensor::matrix(vec![vec![ex(s, 1)]], Slot::UP, Slot::UP).unwrap()).collect();
    let b = bs.iter().map(|s| Tensor::from_fn(&[Slot::UP, Slot::UP, Slot::DOWN], 1, 0, |_| ex(s, 1))).collect();
    HydroBracket::new(g, b).unwrap()
}

#[test]
fn one_component_operator_2u() {
    let br = one_component(&["2*u1"], &["1"]);
    assert_eq!(br, torus(1));
    assert!(verify_poisson(&br).passed());
    let out = classify_one_component(&br, &names(1)).unwrap();
    assert_eq!(out.verdict.kind, VerdictKind::ConstantReducible);
    assert_eq!(out.factors, vec![ratio(1, 1)]);
    assert_eq!(out.reference, Some(0));
}

#[test]
fn one_component_proportional_metrics() {
    let br = one_component(&["2*u1", "4*u1", "6*u1"], &["1", "2", "3"]);
    assert!(verify_poisson(&br).passed());
    let out = classify_one_component(&br, &names(1)).unwrap();
    assert_eq!(out.factors, vec![ratio(1, 1), ratio(2, 1), ratio(3, 1)]);

    let zero_first = one_component(&["0", "2*u1"], &["0", "1"]);
    let out = classify_one_component(&zero_first, &names(1)).unwrap();
    assert_eq!(out.reference, Some(1));
    assert_eq!(out.factors, vec![ratio(0, 1), ratio(1, 1)]);
}

#[test]
fn one_component_non_proportional_metrics_fail() {
    let br = one_component(&["2*u1", "u1^2 + 1"], &["1", "u1"]);
    let report = verify_poisson(&br);
    for name in ["a1", "a2", "a3"] {
        assert!(report.verdict(name).unwrap().passed(), "{name}");
    }
    let a4 = report.verdict("a4").unwrap().violation.clone().unwrap();
    assert_eq!(a4.at, vec![0, 0, 0, 0, 1]);
    assert_eq!(a4.residual, ex("3*u1^2 - 3", 1));
    let a6 = report.verdict("a6").unwrap().violation.clone().unwrap();
    assert_eq!(a6.at, vec![0, 0, 0, 0, 0, 1]);
    assert_eq!(a6.residual, ex("-2*u1", 1));
    assert!(matches!(classify_one_component(&br, &names(1)), Err(Error::NotAPoissonBracket(_))));
}

#[test]
fn broken_torus_fails_a2() {
    let br = torus(2);
    let zero_b =
        HydroBracket::new(br.metrics().to_vec(), vec![Tensor::zeros(&[Slot::UP, Slot::UP, Slot::DOWN], 2, 0); 2])
            .unwrap();
    let report = verify_poisson(&zero_b);
    assert!(!report.verdict("a2").unwrap().passed());
    assert!(matches!(is_constant_reducible(&zero_b), Err(Error::NotAPoissonBracket(_))));
}

#[test]
fn constant_reducibility_verdicts() {
    let c = constant(&[&["1", "1"], &["2", "3"]]);
    assert_eq!(is_constant_reducible(&c).unwrap().kind, VerdictKind::ConstantReducible);

    let t = is_constant_reducible(&torus(2)).unwrap();
    assert_eq!(t.kind, VerdictKind::Obstructed);
    assert_eq!(t.witness, Some((vec![0, 0, 1, 0, 1], ex("u1", 2))));

    let k = is_constant_reducible(&canonical()).unwrap();
    assert_eq!(k.kind, VerdictKind::Obstructed);
    let (at, value) = k.witness.unwrap();
    assert!(!value.is_zero());
    assert_eq!(obstructions(&canonical()).unwrap().upper[&(at[3], at[4])].get(&at[..3]), &value);
}

#[test]
fn nonsingularity_criterion() {
    let c = constant(&[&["1", "1"], &["2", "3"]]);
    assert_eq!(reducibility_by_nonsingularity(&c).unwrap().kind, VerdictKind::ConstantReducible);
    assert_eq!(reducibility_by_nonsingularity(&canonical()).unwrap().kind, VerdictKind::Undecided);
    assert_eq!(reducibility_by_nonsingularity(&torus(2)).unwrap().kind, VerdictKind::Undecided);
}

#[test]
fn two_component_classes() {
    assert_eq!(two_component_verdict(&canonical()).unwrap().class, TwoComponentClass::VectorFieldsOnTorus);
    assert_eq!(two_component_verdict(&torus(2)).unwrap().class, TwoComponentClass::VectorFieldsOnTorus);
    let c = two_component_verdict(&constant(&[&["1", "1"], &["1", "-1"]])).unwrap();
    assert_eq!(c.class, TwoComponentClass::Constant);
    // diag(1, 1) is positive definite everywhere
    assert!(c.definite.iter().any(|(a, _)| *a == 0));
}

#[test]
fn hyperbolic_metric_is_not_flat() {
    let m = Metric::new(diag(&["u2^2", "u2^2"])).unwrap();
    assert!(!m.is_flat());
    // Gaussian curvature −1: R^1_{212} = −1/u2^2 with this convention
    assert_eq!(m.curvature().get(&[0, 1, 0, 1]), &ex("-1/u2^2", 2));
}
