use std::path::Path;

use anyhow::{bail, Context, Result};
use num_traits::Zero;
use serde_json::{json, Value};

use dnb_core::bracket::{obstructions, verify_poisson};
use dnb_core::classify::{
    classify_one_component, compose_bracket, is_constant_reducible, pull_back, reducibility_by_nonsingularity,
    transform, two_component_verdict, TwoComponentClass,
};
use dnb_core::liealg::check_linear_form;
use dnb_core::oracle::{cross_check, nijenhuis_check, OracleReport, TOLERANCE};
use dnb_core::{index_label, HydroBracket, LinearBracketData, Metric, MetricPair, Tensor, VerdictKind};

use crate::files::{classify_input, BracketFile, ChangeFile, Input, LoadedBracket};
use crate::report::{relations, tuple, upper_label, yes, Report};

/// Options shared by every subcommand.
pub struct Common {
    pub seed: u64,
    pub oracle: bool,
    pub points: usize,
}

const DERIVED_NOTE: &str = "b derived from the metrics";

fn load(path: &Path) -> Result<LoadedBracket> {
    BracketFile::load(path)
}

fn note_derived(report: &mut Report, loaded: &LoadedBracket) {
    report.field("b_derived", json!(loaded.derived_b));
    if loaded.derived_b {
        report.line(format!("note: {DERIVED_NOTE}"));
    }
}

fn attach_oracle(report: &mut Report, r: &OracleReport) {
    let worst: serde_json::Map<String, Value> = r.worst.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    report.field(
        "oracle",
        json!({
            "passed": r.passed(),
            "points": r.points,
            "compared": r.compared,
            "worst_relative_error": worst,
            "mismatches": r.mismatches,
        }),
    );
    let worst: Vec<String> = r.worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect();
    report.line(format!(
        "oracle: {} ({} points, {} values, worst {})",
        if r.passed() { "agrees" } else { "MISMATCH" },
        r.points,
        r.compared,
        worst.join(", ")
    ));
    for m in &r.mismatches {
        report.line(format!("  {m}"));
    }
    if !r.passed() {
        report.fail();
    }
}

pub fn verify(path: &Path, common: &Common) -> Result<Report> {
    let loaded = load(path)?;
    let mut report = Report::new("verify", &[path]);
    note_derived(&mut report, &loaded);
    let rel = verify_poisson(&loaded.bracket);
    let (lines, items) = relations(&rel, &loaded.names);
    lines.into_iter().for_each(|l| report.line(l));
    report.field("relations", items);
    let mut flat = Vec::new();
    for (a, g) in loaded.bracket.metrics().iter().enumerate() {
        let Ok(m) = Metric::new(g.clone()) else {
            report.line(format!("g{}: degenerate", a + 1));
            flat.push(Value::Null);
            continue;
        };
        match m.curvature().first_nonzero() {
            None => report.line(format!("g{}: flat", a + 1)),
            Some((ix, e)) => report.line(format!(
                "g{}: not flat, R^{}_{{{}}} = {}",
                a + 1,
                ix[0] + 1,
                index_label(&ix[1..]),
                e.render(&loaded.names)
            )),
        }
        flat.push(json!(m.is_flat()));
    }
    report.field("flat", Value::Array(flat));
    report.line(if rel.passed() { "Poisson bracket: yes" } else { "Poisson bracket: NO" });
    if !rel.passed() {
        report.fail();
    }
    if common.oracle {
        attach_oracle(&mut report, &cross_check(&loaded.bracket, common.points, common.seed)?);
    }
    Ok(report)
}

pub fn obstructions_cmd(path: &Path, mixed: bool, common: &Common) -> Result<Report> {
    let loaded = load(path)?;
    let names = &loaded.names;
    let mut report = Report::new("obstructions", &[path]);
    note_derived(&mut report, &loaded);
    let set = obstructions(&loaded.bracket)?;
    let mut entries = Vec::new();
    for (&(a, b), t) in set.upper.iter().filter(|((a, b), _)| a < b) {
        for (ix, e) in t.iter().filter(|(_, e)| !e.is_zero()) {
            let label = upper_label("T", &ix, (a, b));
            report.line(format!("{label} = {}", e.render(names)));
            entries.push(
                json!({"tensor": "upper", "indices": one_based(&ix), "pair": [a + 1, b + 1], "value": e.render(names)}),
            );
        }
    }
    if mixed {
        for (&(a, b), t) in set.mixed.iter().filter(|((a, b), _)| a < b) {
            for (ix, e) in t.iter().filter(|(_, e)| !e.is_zero()) {
                let label = format!("T^{{{},{}}}_{{{}}}", ix[0] + 1, index_label(&[a, b]), index_label(&ix[1..]));
                report.line(format!("{label} = {}", e.render(names)));
                entries.push(json!({"tensor": "mixed", "indices": one_based(&ix), "pair": [a + 1, b + 1], "value": e.render(names)}));
            }
        }
    }
    if set.is_zero() {
        report.line("all obstruction tensors vanish");
    } else if let Some((w, e)) = set.witness() {
        report.line(format!("witness: {} = {}", upper_label("T", &w[..3], (w[3], w[4])), e.render(names)));
        report.field("witness", json!({"indices": one_based(&w), "value": e.render(names)}));
    }
    report.field("vanish", json!(set.is_zero()));
    report.field("entries", Value::Array(entries));
    if common.oracle {
        attach_oracle(&mut report, &cross_check(&loaded.bracket, common.points, common.seed)?);
    }
    Ok(report)
}

fn one_based(ix: &[usize]) -> Vec<usize> {
    ix.iter().map(|i| i + 1).collect()
}

/// Pairs to analyse and the coordinate names: every `α < β` of a bracket
/// file as `(g^β, g^α)`, or the two metrics of two metric files.
fn pairs(first: &Path, second: Option<&Path>) -> Result<(Vec<(String, MetricPair)>, Vec<String>)> {
    match (classify_input(first)?, second) {
        (Input::Bracket(file), None) => {
            let loaded = file.build()?;
            let br = &loaded.bracket;
            if br.dimension() < 2 {
                bail!("a bracket needs at least two directions to form a pencil");
            }
            let mut out = Vec::new();
            for a in 0..br.dimension() {
                for b in a + 1..br.dimension() {
                    let pair = MetricPair::new(br.metric(b).clone(), br.metric(a).clone())
                        .with_context(|| format!("directions {} and {}", a + 1, b + 1))?;
                    out.push((format!("g{} and g{}", b + 1, a + 1), pair));
                }
            }
            Ok((out, loaded.names))
        }
        (Input::Metric(m1), Some(second)) => {
            let Input::Metric(m2) = classify_input(second)? else {
                bail!("{} is not a metric file", second.display());
            };
            if m1.coordinates != m2.coordinates {
                bail!("the two metric files use different coordinates");
            }
            let pair = MetricPair::new(m1.build()?, m2.build()?)?;
            Ok((vec![("g1 and g2".to_string(), pair)], m1.coordinates))
        }
        (Input::Metric(_), None) => bail!("a metric file needs a second metric file to pair with"),
        (_, Some(_)) => bail!("{} is not a metric file", first.display()),
        (Input::Constants(_), None) => bail!("{} is not a bracket file", first.display()),
    }
}

pub fn compat(first: &Path, second: Option<&Path>, show_nijenhuis: bool, common: &Common) -> Result<Report> {
    let inputs: Vec<&Path> = std::iter::once(first).chain(second).collect();
    let mut report = Report::new(if show_nijenhuis { "nijenhuis" } else { "compat" }, &inputs);
    let (pairs, names) = pairs(first, second)?;
    let mut with_lambda = names.clone();
    with_lambda.push("λ".to_string());
    let mut items = Vec::new();
    for (label, pair) in &pairs {
        report.line(format!("pair {label}:"));
        let rel = pair.relations();
        let almost = rel.verdict("b1").is_some_and(|v| v.passed());
        let compatible = rel.passed();
        let nij = pair.nijenhuis();
        let pencil = pair.pencil_analysis();
        report.line(format!("  almost compatible: {}", yes(almost)));
        report.line(format!("  compatible: {}", yes(compatible)));
        for v in rel.failed() {
            if let Some(x) = &v.violation {
                report.line(format!(
                    "  {} fails at {}: residual = {}",
                    v.name,
                    tuple(v.indices, &x.at),
                    x.residual.render(&names)
                ));
            }
        }
        report.line(format!("  Nijenhuis tensor vanishes: {}", yes(nij.is_zero())));
        let mut nij_entries = Vec::new();
        if show_nijenhuis {
            for (ix, e) in nij.iter().filter(|(ix, e)| ix[1] < ix[2] && !e.is_zero()) {
                report.line(format!("  N^{}_{{{}}} = {}", ix[0] + 1, index_label(&ix[1..]), e.render(&names)));
                nij_entries.push(json!({"indices": one_based(&ix), "value": e.render(&names)}));
            }
        }
        report.line(format!("  det(g1 - λ g2) = {}", pencil.char_poly.render(&with_lambda)));
        report.line(format!("  discriminant = {}", pencil.discriminant.render(&names)));
        report.line(format!("  nonsingular: {} ({})", yes(pencil.nonsingular), pencil.note));
        if let Some(root) = &pencil.repeated_root {
            report.line(format!("  double root λ = {}", root.render(&names)));
        }
        if !compatible {
            report.fail();
        }
        let (_, rel_json) = relations(&rel, &names);
        let mut item = json!({
            "pair": label,
            "almost_compatible": almost,
            "compatible": compatible,
            "relations": rel_json,
            "nijenhuis_vanishes": nij.is_zero(),
            "char_poly": pencil.char_poly.render(&with_lambda),
            "discriminant": pencil.discriminant.render(&names),
            "nonsingular": pencil.nonsingular,
            "repeated_root": pencil.repeated_root.as_ref().map(|r| r.render(&names)),
        });
        if show_nijenhuis {
            item["nijenhuis"] = Value::Array(nij_entries);
        }
        if common.oracle {
            let r = nijenhuis_check(pair, common.points, common.seed)?;
            item["oracle_passed"] = json!(r.passed());
            attach_oracle(&mut report, &r);
        }
        items.push(item);
    }
    report.field("pairs", Value::Array(items));
    Ok(report)
}

pub fn classify(path: &Path, common: &Common) -> Result<Report> {
    let loaded = load(path)?;
    let (br, names) = (&loaded.bracket, &loaded.names);
    let mut report = Report::new("classify", &[path]);
    note_derived(&mut report, &loaded);
    if br.components() == 1 {
        let one = classify_one_component(br, names)?;
        report.line("reducible to constant form: yes");
        report.line(format!("reason: {}", one.verdict.note));
        let factors: Vec<String> = one.factors.iter().map(|c| c.to_string()).collect();
        if let Some(r) = one.reference {
            report.line(format!("g^α = c^α g^{}, c = ({})", r + 1, factors.join(", ")));
        }
        report.line(format!("normalizing coordinate: {}", one.normalizing_coordinate));
        report.field("verdict", json!("constant_reducible"));
        report.field("factors", json!(factors));
        report.field("normalizing_coordinate", json!(one.normalizing_coordinate));
        return Ok(report);
    }
    let direct = is_constant_reducible(br)?;
    match (&direct.kind, &direct.witness) {
        (VerdictKind::ConstantReducible, _) => report.line("reducible to constant form: yes"),
        (_, Some((w, e))) => {
            report.line("reducible to constant form: no");
            report.line(format!("witness: {} = {}", upper_label("T", &w[..3], (w[3], w[4])), e.render(names)));
            report.field("witness", json!({"indices": one_based(w), "value": e.render(names)}));
        }
        (_, None) => report.line("reducible to constant form: undecided"),
    }
    report.line(format!("reason: {}", direct.note));
    report.field(
        "verdict",
        json!(match direct.kind {
            VerdictKind::ConstantReducible => "constant_reducible",
            VerdictKind::Obstructed => "obstructed",
            VerdictKind::Undecided => "undecided",
        }),
    );
    let ns = reducibility_by_nonsingularity(br)?;
    report.line(format!("nonsingularity criterion: {}", ns.note));
    report.field("nonsingularity", json!(ns.note));
    if br.components() == 2 && br.dimension() == 2 {
        let two = two_component_verdict(br)?;
        let class = match two.class {
            TwoComponentClass::Constant => "constant",
            TwoComponentClass::VectorFieldsOnTorus => "vector fields on the torus",
        };
        report.line(format!("two-component class: {class}"));
        for (a, p) in &two.definite {
            let p: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            report.line(format!("  g{} is definite at ({})", a + 1, p.join(", ")));
        }
        report.field("two_component_class", json!(class));
    }
    if common.oracle {
        attach_oracle(&mut report, &cross_check(br, common.points, common.seed)?);
    }
    Ok(report)
}

/// First entry where two brackets differ, if any.
fn first_difference(a: &HydroBracket, b: &HydroBracket, names: &[String]) -> Option<String> {
    if a.components() != b.components() || a.dimension() != b.dimension() {
        return Some("shapes differ".into());
    }
    let diff = |what: &str, alpha: usize, x: &Tensor, y: &Tensor| {
        x.iter().zip(y.iter()).find(|((_, p), (_, q))| p != q).map(|((ix, p), (_, q))| {
            format!(
                "{what}^{{{}}} of direction {}: {} vs {}",
                index_label(&ix),
                alpha + 1,
                p.render(names),
                q.render(names)
            )
        })
    };
    (0..a.dimension()).find_map(|alpha| {
        diff("g", alpha, a.metric(alpha), b.metric(alpha)).or_else(|| diff("b", alpha, a.b(alpha), b.b(alpha)))
    })
}

pub fn transform_cmd(path: &Path, change_path: &Path, pullback: bool, expect: Option<&Path>) -> Result<Report> {
    let loaded = load(path)?;
    let names = &loaded.names;
    let change = ChangeFile::load(change_path, names)?;
    let inputs: Vec<&Path> = [path, change_path].into_iter().chain(expect).collect();
    let mut report = Report::new("transform", &inputs);
    let (out, note) = if pullback {
        (pull_back(&loaded.bracket, &change)?, None)
    } else if change.inverse().is_some() {
        (transform(&loaded.bracket, &change)?, None)
    } else {
        let note =
            "pullback representation: indices refer to the new coordinates, entries are functions of the old ones";
        (transform(&loaded.bracket, &change)?, Some(note.to_string()))
    };
    if let Some(n) = &note {
        report.line(format!("note: {n}"));
    }
    let file = BracketFile::from_bracket(&out, names, note.clone());
    report.output = Some(serde_json::to_string_pretty(&file)? + "\n");
    if let Some(expect) = expect {
        let target = load(expect)?;
        let reference =
            if note.is_some() { compose_bracket(&target.bracket, &change)? } else { target.bracket.clone() };
        match first_difference(&out, &reference, names) {
            None => report.line(format!("matches {}", expect.display())),
            Some(d) => {
                report.line(format!("DIFFERS from {}: {d}", expect.display()));
                report.fail();
            }
        }
    }
    Ok(report)
}

/// Largest Jacobi residual the functional oracle tolerates.
const FUNCTIONAL_TOLERANCE: f64 = TOLERANCE;

pub fn liealg(path: &Path, trials: usize, common: &Common) -> Result<Report> {
    let mut report = Report::new("liealg", &[path]);
    let data: LinearBracketData = match classify_input(path)? {
        Input::Constants(c) => c.build()?,
        Input::Bracket(b) => {
            let loaded = b.build()?;
            match check_linear_form(&loaded.bracket) {
                Some(d) => d,
                None => {
                    report.line("linear form: no (b is not constant or the metrics are not linear in it)");
                    report.field("linear_form", json!(false));
                    report.fail();
                    return Ok(report);
                }
            }
        }
        Input::Metric(_) => bail!("{} is a metric file; liealg needs constants or a bracket", path.display()),
    };
    report.line("linear form: yes");
    report.field("linear_form", json!(true));
    let jac = data.jacobi_check();
    let names: Vec<String> = (1..=data.components()).map(|i| format!("u{i}")).collect();
    report.line(format!("Jacobi identity: {}", if jac.passed() { "holds" } else { "FAILS" }));
    for v in jac.failed() {
        if let Some(x) = &v.violation {
            report.line(format!(
                "  {} fails at {}: residual = {}",
                v.name,
                tuple(v.indices, &x.at),
                x.residual.render(&names)
            ));
        }
    }
    report.field("jacobi", json!(jac.passed()));
    if !jac.passed() {
        report.fail();
    }
    let co = data.cocycle_check();
    report.line(format!("g0 cocycle: skew {}, closed {}", yes(co.skew), yes(co.closed)));
    let c = co.coboundary.as_ref().map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>());
    let zero_g0 = (0..data.dimension())
        .all(|a| (0..data.components()).all(|i| (0..data.components()).all(|j| data.g0(a, i, j).is_zero())));
    match &c {
        _ if zero_g0 => report.line("g0 = 0"),
        Some(c) => report.line(format!("g0 is a coboundary: c = ({}); shifting u ↦ u - c removes it", c.join(", "))),
        None if co.skew && co.closed => report.line("g0 is not a coboundary"),
        None => report.fail(),
    }
    report.field("cocycle", json!({"skew": co.skew, "closed": co.closed, "coboundary": c}));
    let nf = data.normal_form_conditions();
    let nondeg: Vec<&str> = nf.nondegenerate.iter().map(|&b| yes(b)).collect();
    report.line(format!(
        "normal form: first direction constant {}, metrics nondegenerate ({})",
        yes(nf.first_direction_constant),
        nondeg.join(", ")
    ));
    report.field(
        "normal_form",
        json!({"first_direction_constant": nf.first_direction_constant, "nondegenerate": nf.nondegenerate}),
    );
    if common.oracle {
        let worst = data.functional_oracle(trials, common.seed);
        let agrees = (worst < FUNCTIONAL_TOLERANCE) == jac.passed();
        report.line(format!(
            "functional oracle: {} (largest Jacobi residual {worst:.1e} over {trials} trials)",
            if agrees { "agrees" } else { "MISMATCH" }
        ));
        report.field("functional_oracle", json!({"trials": trials, "largest_residual": worst, "agrees": agrees}));
        if !agrees {
            report.fail();
        }
    }
    Ok(report)
}
