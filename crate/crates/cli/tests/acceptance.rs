//! One line per acceptance criterion. Built without the test harness so the
//! table is always printed; the process fails if any criterion does.

mod common;

use common::*;
use dnb_core::bracket::{connection_crosscheck, obstructions, verify_flat_pencil_relations, verify_poisson};
use dnb_core::classify::{classify_one_component, is_constant_reducible, pull_back, transform, transform_metric};
use dnb_core::compat::MetricPair;
use dnb_core::geometry::Metric;
use dnb_core::oracle::{
    cross_check, nijenhuis_check, numeric_curvature, random_constant_metric, random_triangular_change, MetricJet,
};
use dnb_core::{CoordinateChange, Error, Expr, LinearBracketData, Rational, Slot, Tensor};
use symexpr::{parse, ratio, Vars};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ex(s: &str, n: usize) -> Expr {
    parse(s, &Vars::coordinates(n)).unwrap()
}

fn quad(names: &[String]) -> CoordinateChange {
    let vars = Vars::new(names.iter().cloned());
    let f = ["(1/2)*(u1^2 - u2^2)", "(1/2)*(u1 + u2)"].map(|s| parse(s, &vars).unwrap());
    CoordinateChange::new(f.to_vec()).unwrap()
}

fn torus_bracket() -> Check {
    let run = dnb(&["verify", "@torus_n2"]);
    ensure!(run.code == 0, "verify exited {}", run.code);
    for r in ["a1", "a2", "a3", "a4", "a5", "a6", "a7"] {
        ensure!(run.stdout.contains(&format!("{r}: pass")), "{r} not reported as passing");
    }
    let (br, _) = bracket("torus_n2");
    ensure!(verify_poisson(&br).passed(), "relations fail through the library");
    let t = obstructions(&br).map_err(|e| e.to_string())?;
    let value = t.upper[&(0, 1)].get(&[0, 0, 1]);
    ensure!(value == &Expr::var(0), "T^{{112,12}} = {value}");
    let run = dnb(&["obstructions", "@torus_n2"]);
    ensure!(run.stdout.lines().any(|l| l == "T^{112,12} = u1"), "CLI output lacks T^{{112,12}} = u1");
    Ok("a1..a7 exact, T^{112,12} = u1".into())
}

fn canonical_bracket() -> Check {
    let (br, _) = bracket("canonical_c6");
    for a in 0..2 {
        let m = Metric::new(br.metric(a).clone()).map_err(|e| e.to_string())?;
        ensure!(m.is_flat(), "metric {} not flat", a + 1);
    }
    let rel = verify_flat_pencil_relations(&br).map_err(|e| e.to_string())?;
    ensure!(rel.verdicts.len() == 4 && rel.passed(), "b1..b4 do not all pass");
    let t = obstructions(&br).map_err(|e| e.to_string())?;
    ensure!(t.upper[&(0, 1)].get(&[1, 0, 0]) == &Expr::one(), "T^{{211,12}} != 1");
    ensure!(connection_crosscheck(&br).map_err(|e| e.to_string())?, "relation sets disagree");
    let run = dnb(&["obstructions", "@canonical_c6"]);
    ensure!(run.stdout.lines().any(|l| l == "T^{211,12} = 1"), "CLI output lacks T^{{211,12}} = 1");
    Ok("both metrics flat, b1..b4 pass, T^{211,12} = 1, cross-check true".into())
}

fn coordinate_change() -> Check {
    let (torus, names) = bracket("torus_n2");
    let (canonical, _) = bracket("canonical_c6");
    let pulled = pull_back(&torus, &quad(&names)).map_err(|e| e.to_string())?;
    ensure!(pulled == canonical, "pullback of the torus bracket differs from the canonical one");
    let fwd = dnb(&["transform", "@canonical_c6", "@quad", "--expect", "@torus_n2"]);
    ensure!(fwd.code == 0, "transform --expect exited {}: {}", fwd.code, fwd.stderr);
    let back = dnb(&["transform", "@torus_n2", "@quad", "--pullback", "--expect", "@canonical_c6"]);
    ensure!(back.code == 0, "transform --pullback --expect exited {}: {}", back.code, back.stderr);
    Ok("pullback identity exact, both transform --expect runs exit 0".into())
}

fn pencil_singularity() -> Check {
    let (br, _) = bracket("canonical_c6");
    let pair = MetricPair::new(br.metric(1).clone(), br.metric(0).clone()).map_err(|e| e.to_string())?;
    let p = pair.pencil_analysis();
    let expected = parse("-(l - (u2 - u1))^2", &Vars::coordinates(2).with("l")).unwrap();
    let ratio = p.char_poly.checked_div(&expected).map_err(|e| e.to_string())?;
    let c = ratio.constant_value();
    ensure!(c.as_ref().is_some_and(|c| *c != Rational::from_integer(0.into())), "char_poly / target = {ratio}");
    ensure!(p.discriminant.is_zero(), "discriminant = {}", p.discriminant);
    ensure!(!p.nonsingular, "pair reported nonsingular");
    ensure!(p.repeated_root == Some(ex("u2 - u1", 2)), "repeated root {:?}", p.repeated_root);
    Ok(format!("char_poly = {} * target, discriminant 0, singular", c.unwrap()))
}

fn degeneracy_n3() -> Check {
    let gs = raw_metrics("torus_n3");
    for (a, g) in gs.iter().enumerate() {
        ensure!(g.det().map_err(|e| e.to_string())?.is_zero(), "det g{} not identically zero", a + 1);
        ensure!(matches!(Metric::new(g.clone()), Err(Error::DegenerateMetric { .. })), "g{} accepted", a + 1);
    }
    ensure!(MetricPair::new(gs[1].clone(), gs[0].clone()).is_err(), "pair accepted");
    let (br, _) = bracket("torus_n3");
    ensure!(br.metrics() == gs.as_slice(), "fixture metrics read differently");
    ensure!(verify_poisson(&br).passed(), "torus n = 3 should still be a Poisson bracket");
    ensure!(obstructions(&br).is_err(), "obstructions accepted degenerate metrics");
    ensure!(cross_check(&br, 4, 1).is_err(), "oracle accepted degenerate metrics");
    let run = dnb(&["classify", "@torus_n3"]);
    ensure!(run.code == 2, "classify exited {}", run.code);
    Ok("three metrics with det = 0, rejected by nondegenerate-only operations".into())
}

fn one_component_operator() -> Check {
    let run = dnb(&["verify", "@onecomp_2u"]);
    ensure!(run.code == 0, "verify exited {}", run.code);
    let (br, names) = bracket("onecomp_2u");
    let out = classify_one_component(&br, &names).map_err(|e| e.to_string())?;
    ensure!(out.verdict.kind == dnb_core::VerdictKind::ConstantReducible, "verdict {:?}", out.verdict.kind);
    Ok("M = 2u d/dx + u_x passes, ConstantReducible".into())
}

fn one_component_proportionality() -> Check {
    let (br, names) = bracket("onecomp_proportional");
    let out = classify_one_component(&br, &names).map_err(|e| e.to_string())?;
    ensure!(out.factors == vec![ratio(1, 1), ratio(2, 1), ratio(3, 1)], "factors {:?}", out.factors);
    let (bad, _) = bracket("onecomp_nonproportional");
    let report = verify_poisson(&bad);
    let a4 = report.verdict("a4").and_then(|v| v.violation.clone()).ok_or("a4 passes")?;
    ensure!(a4.at == [0, 0, 0, 0, 1] && a4.residual == ex("3*u1^2 - 3", 1), "a4 witness {:?}", a4);
    let a6 = report.verdict("a6").and_then(|v| v.violation.clone()).ok_or("a6 passes")?;
    ensure!(a6.at == [0, 0, 0, 0, 0, 1] && a6.residual == ex("-2*u1", 1), "a6 witness {:?}", a6);
    let run = dnb(&["verify", "@onecomp_nonproportional"]);
    ensure!(run.code == 1, "verify exited {}", run.code);
    Ok("c = (1, 2, 3); non-proportional pair fails a4 (3u1^2 - 3) and a6 (-2u1)".into())
}

fn diagonal(g: &[&str], f: &[&str]) -> (Tensor, Tensor) {
    let n = g.len();
    let d = |e: Vec<String>| {
        Tensor::from_fn(&[Slot::UP, Slot::UP], n, 0, |x| if x[0] == x[1] { ex(&e[x[0]], n) } else { Expr::zero() })
    };
    let g1 = g.iter().zip(f).map(|(g, f)| format!("({f})*({g})")).collect();
    (d(g1), d(g.iter().map(|s| s.to_string()).collect()))
}

fn pair_suite() -> Vec<(Tensor, Tensor)> {
    let (t10, _) = bracket("t10_pair");
    let mut out = vec![(t10.metric(1).clone(), t10.metric(0).clone())];
    out.push(diagonal(&["1", "1"], &["u1", "u2"]));
    out.push(diagonal(&["u1 + u2", "1"], &["u1^2", "2"]));
    out.push(diagonal(&["u1*u2", "u2"], &["u1 + 1", "-u2"]));
    let forms = out.clone();
    for (k, (g1, g2)) in forms.iter().enumerate() {
        let c = random_triangular_change(2, 100 + k as u64).unwrap();
        out.push((transform_metric(g1, &c).unwrap(), transform_metric(g2, &c).unwrap()));
    }
    out.push((metric_file("flat_a"), metric_file("flat_b")));
    out.push(diagonal(&["1", "1"], &["u2", "u1"]));
    out.push(diagonal(&["1", "u2"], &["u1 + u2", "u1/u2"]));
    out
}

fn nijenhuis_suite() -> Check {
    let suite = pair_suite();
    ensure!(suite.len() >= 10, "only {} pairs", suite.len());
    let (mut yes, mut no) = (0, 0);
    for (k, (g1, g2)) in suite.into_iter().enumerate() {
        let p = MetricPair::new(g1, g2).map_err(|e| format!("pair {k}: {e}"))?;
        ensure!(p.pencil_analysis().nonsingular, "pair {k} singular");
        let c = p.is_compatible();
        ensure!(c == p.nijenhuis().is_zero(), "pair {k}: compatible {c}, Nijenhuis disagrees");
        ensure!(p.pencil_direct_check().map_err(|e| e.to_string())? == c, "pair {k}: direct check disagrees");
        if c {
            yes += 1;
        } else {
            no += 1;
        }
    }
    Ok(format!("{} nonsingular pairs ({yes} compatible, {no} not), all three tests agree", yes + no))
}

fn flatness() -> Check {
    let (h, _) = bracket("hyperbolic");
    let m = Metric::new(h.metric(0).clone()).map_err(|e| e.to_string())?;
    ensure!(!m.is_flat(), "hyperbolic metric reported flat");
    let jet = MetricJet::at(h.metric(0), &[1.0, 1.0]).map_err(|e| e.to_string())?;
    let r = numeric_curvature(&jet).map_err(|e| e.to_string())?;
    let biggest = r.iter().flatten().flatten().flatten().fold(0f64, |a, &b| a.max(b.abs()));
    ensure!(biggest > 1e-6, "numeric curvature at (1,1) is {biggest}");
    for seed in 0..5 {
        let g = random_constant_metric(2, seed);
        let c = random_triangular_change(2, 200 + seed).map_err(|e| e.to_string())?;
        let pushed = transform_metric(&g, &c).map_err(|e| e.to_string())?;
        let m = Metric::new(pushed).map_err(|e| e.to_string())?;
        ensure!(m.is_flat(), "pushforward {seed} reported non-flat");
    }
    Ok(format!("hyperbolic |R| = {biggest} at (1,1); 5 pushforwards flat"))
}

/// Fixtures whose `b` is the one the metrics induce.
const ORACLE_FIXTURES: [&str; 10] = [
    "torus_n1",
    "torus_n2",
    "canonical_c6",
    "constant_pair",
    "constant_signature",
    "onecomp_2u",
    "onecomp_proportional",
    "onecomp_nonproportional",
    "t10_pair",
    "hyperbolic",
];

fn oracle_agreement() -> Check {
    let mut values = 0;
    for (k, name) in ORACLE_FIXTURES.iter().enumerate() {
        let (br, _) = bracket(name);
        let r = cross_check(&br, 20, 1000 + k as u64).map_err(|e| format!("{name}: {e}"))?;
        ensure!(r.points == 20 && r.passed(), "{name}: {} points, {:?}", r.points, r.mismatches);
        values += r.compared;
    }
    // b set to zero by hand: the recomputation from the metrics must object
    let (broken, _) = bracket("broken_a2");
    let r = cross_check(&broken, 20, 1099).map_err(|e| e.to_string())?;
    ensure!(r.mismatches.iter().any(|m| m.starts_with('b')), "broken_a2: oracle missed the altered b");
    let pair = MetricPair::new(metric_file("flat_a"), metric_file("flat_b")).unwrap();
    let r = nijenhuis_check(&pair, 20, 7).map_err(|e| e.to_string())?;
    ensure!(r.points == 20 && r.passed(), "flat pair: {:?}", r.mismatches);
    values += r.compared;
    let mut worst = 0f64;
    for n in 1..=3 {
        let l = LinearBracketData::vector_fields(n);
        let res = l.functional_oracle(2, 11);
        ensure!(res < 1e-9, "vector fields n = {n}: residual {res}");
        worst = worst.max(res);
    }
    let mut broken = LinearBracketData::vector_fields(2);
    let old = broken.b(1, 0, 0, 0).clone();
    broken.set_b(1, 0, 0, 0, old + ratio(1, 1));
    let res = broken.functional_oracle(3, 11);
    ensure!(res > 1e-3, "broken perturbation residual {res}");
    Ok(format!("{values} symbolic values match jets; functional residual {worst:.1e} vs broken {res:.1e}"))
}

/// `J^i_a J^j_b J^k_c T^{abc}`, composed with the inverse map.
fn push_upper3(t: &Tensor, change: &CoordinateChange) -> Tensor {
    let n = t.coords();
    let j = change.jacobian();
    let out = Tensor::from_fn(&[Slot::UP, Slot::UP, Slot::UP], n, 0, |x| {
        let mut acc = Expr::zero();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let w = &(j.get(&[x[0], a]) * j.get(&[x[1], b])) * j.get(&[x[2], c]);
                    if !w.is_zero() {
                        acc = &acc + &(&w * t.get(&[a, b, c]));
                    }
                }
            }
        }
        acc
    });
    out.try_map(|e| Ok(e.compose(change.inverse().unwrap())?)).unwrap()
}

fn invariance() -> Check {
    let mut runs = 0;
    for (k, name) in ORACLE_FIXTURES.iter().chain(&["broken_a2"]).enumerate() {
        let (br, _) = bracket(name);
        let poisson = verify_poisson(&br).passed();
        let kind = is_constant_reducible(&br).map(|v| v.kind).ok();
        let before = obstructions(&br).ok();
        for seed in 0..5 {
            let change = random_triangular_change(br.components(), 300 + 10 * k as u64 + seed).unwrap();
            let moved = transform(&br, &change).map_err(|e| format!("{name}: {e}"))?;
            ensure!(verify_poisson(&moved).passed() == poisson, "{name}, seed {seed}: verify verdict changed");
            ensure!(
                is_constant_reducible(&moved).map(|v| v.kind).ok() == kind,
                "{name}, seed {seed}: classification changed"
            );
            if let Some(before) = &before {
                let after = obstructions(&moved).map_err(|e| e.to_string())?;
                for (pair, t) in &before.upper {
                    ensure!(after.upper[pair] == push_upper3(t, &change), "{name}, seed {seed}: T not tensorial");
                }
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} transformed fixtures keep their verdicts; T transforms with the Jacobian"))
}

fn lie_algebra() -> Check {
    for n in 1..=3 {
        ensure!(LinearBracketData::vector_fields(n).jacobi_check().passed(), "Jacobi fails at n = {n}");
    }
    let run = dnb(&["liealg", "@coboundary_shift"]);
    ensure!(run.code == 0 && run.stdout.contains("c = (1, 2)"), "liealg output: {}", run.stdout);
    let base = LinearBracketData::vector_fields(2);
    let g0 = vec![
        vec![vec![ratio(2, 1), ratio(2, 1)], vec![ratio(2, 1), ratio(0, 1)]],
        vec![vec![ratio(0, 1), ratio(1, 1)], vec![ratio(1, 1), ratio(4, 1)]],
    ];
    let shifted = base.clone().with_g0(g0).unwrap();
    let c = shifted.cocycle_check().coboundary.ok_or("no coboundary found")?;
    let substituted = shifted.shifted_bracket(&c).map_err(|e| e.to_string())?;
    ensure!(substituted == base.to_bracket(), "shift by c = {c:?} leaves a constant part");
    let run = dnb(&["liealg", "@cocycle_diag"]);
    ensure!(run.stdout.contains("g0 is not a coboundary"), "diag(1, -1) output: {}", run.stdout);
    let diag = LinearBracketData::zero(2, 1)
        .with_g0(vec![vec![vec![ratio(1, 1), ratio(0, 1)], vec![ratio(0, 1), ratio(-1, 1)]]])
        .unwrap();
    let rep = diag.cocycle_check();
    ensure!(rep.skew && rep.closed && rep.coboundary.is_none(), "diag(1, -1): {rep:?}");
    Ok("Jacobi at n = 1, 2, 3; shift c = (1, 2) removes g0; diag(1, -1) is no coboundary".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("torus bracket, n = N = 2", torus_bracket),
        ("canonical bracket", canonical_bracket),
        ("coordinate-change reproduction", coordinate_change),
        ("pencil singularity", pencil_singularity),
        ("degeneracy at n = 3", degeneracy_n3),
        ("one-component operator", one_component_operator),
        ("one-component proportionality", one_component_proportionality),
        ("Nijenhuis criterion suite", nijenhuis_suite),
        ("flatness discrimination", flatness),
        ("numeric oracle agreement", oracle_agreement),
        ("invariance suite", invariance),
        ("Lie-algebra layer", lie_algebra),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
