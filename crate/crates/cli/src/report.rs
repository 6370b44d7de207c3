//! Text and JSON renderings of a command's results.

use serde_json::{json, Map, Value};

use dnb_core::{index_label, RelationReport, Verdict};

pub struct Report {
    command: String,
    inputs: Vec<String>,
    lines: Vec<String>,
    fields: Map<String, Value>,
    /// Whether every check of the command passed.
    pub passed: bool,
    /// Document for stdout; the lines then go to stderr.
    pub output: Option<String>,
}

impl Report {
    pub fn new(command: &str, inputs: &[&std::path::Path]) -> Self {
        Report {
            command: command.to_string(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            lines: Vec::new(),
            fields: Map::new(),
            passed: true,
            output: None,
        }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn field(&mut self, key: &str, value: Value) {
        self.fields.insert(key.to_string(), value);
    }

    pub fn fail(&mut self) {
        self.passed = false;
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut out = Map::new();
            out.insert("command".into(), json!(self.command));
            out.insert("inputs".into(), json!(self.inputs));
            out.insert("passed".into(), json!(self.passed));
            out.extend(self.fields.clone());
            let mut s = serde_json::to_string_pretty(&Value::Object(out)).expect("plain JSON values");
            s.push('\n');
            s
        } else {
            let mut s = self.lines.join("\n");
            s.push('\n');
            s
        }
    }
}

/// `(i, j, k) = (1, 1, 2)` in one-based form.
pub fn tuple(names: &[&str], at: &[usize]) -> String {
    let vals: Vec<String> = at.iter().map(|v| (v + 1).to_string()).collect();
    format!("({}) = ({})", names.join(", "), vals.join(", "))
}

pub fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// One line per relation, plus the JSON array.
pub fn relations(report: &RelationReport, names: &[String]) -> (Vec<String>, Value) {
    let mut lines = Vec::new();
    let mut items = Vec::new();
    for v in &report.verdicts {
        lines.push(verdict_line(v, names));
        items.push(verdict_json(v, names));
    }
    (lines, Value::Array(items))
}

fn verdict_line(v: &Verdict, names: &[String]) -> String {
    match &v.violation {
        None => format!("{}: pass", v.name),
        Some(x) => format!("{}: FAIL at {}: residual = {}", v.name, tuple(v.indices, &x.at), x.residual.render(names)),
    }
}

fn verdict_json(v: &Verdict, names: &[String]) -> Value {
    match &v.violation {
        None => json!({"relation": v.name, "passed": true}),
        Some(x) => json!({
            "relation": v.name,
            "passed": false,
            "indices": v.indices,
            "at": x.at.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "residual": x.residual.render(names),
        }),
    }
}

/// `T^{112,12}`
pub fn upper_label(name: &str, ix: &[usize], pair: (usize, usize)) -> String {
    format!("{name}^{{{},{}}}", index_label(ix), index_label(&[pair.0, pair.1]))
}
