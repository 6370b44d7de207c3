#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

use dnb_core::{Expr, HydroBracket, Slot, Tensor};
use serde_json::Value;
use symexpr::{parse, Vars};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"))
}

fn json(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn strings(v: &Value) -> Vec<&Value> {
    v.as_array().unwrap().iter().collect()
}

/// Loads a bracket fixture without going through the binary. Without `b`
/// the coefficients are derived from the metrics.
pub fn bracket(name: &str) -> (HydroBracket, Vec<String>) {
    let v = json(name);
    let names: Vec<String> = strings(&v["coordinates"]).iter().map(|s| s.as_str().unwrap().to_string()).collect();
    let vars = Vars::new(names.iter().cloned());
    let ex = |s: &Value| -> Expr { parse(s.as_str().unwrap(), &vars).unwrap() };
    let g: Vec<Tensor> = strings(&v["metrics"])
        .iter()
        .map(|m| {
            let rows = strings(m).iter().map(|r| strings(r).iter().map(|s| ex(s)).collect()).collect();
            Tensor::matrix(rows, Slot::UP, Slot::UP).unwrap()
        })
        .collect();
    let n = names.len();
    let br = match v.get("b") {
        None => HydroBracket::from_metrics(g).unwrap(),
        Some(b) => {
            let b = strings(b)
                .iter()
                .map(|ba| Tensor::from_fn(&[Slot::UP, Slot::UP, Slot::DOWN], n, 0, |x| ex(&ba[x[0]][x[1]][x[2]])))
                .collect();
            HydroBracket::new(g, b).unwrap()
        }
    };
    (br, names)
}

/// Same as [`bracket`] but for fixtures whose metrics may be degenerate.
pub fn raw_metrics(name: &str) -> Vec<Tensor> {
    let v = json(name);
    let vars = Vars::new(strings(&v["coordinates"]).iter().map(|s| s.as_str().unwrap().to_string()));
    strings(&v["metrics"])
        .iter()
        .map(|m| {
            let rows = strings(m)
                .iter()
                .map(|r| strings(r).iter().map(|s| parse(s.as_str().unwrap(), &vars).unwrap()).collect())
                .collect();
            Tensor::matrix(rows, Slot::UP, Slot::UP).unwrap()
        })
        .collect()
}

pub fn metric_file(name: &str) -> Tensor {
    let v = json(name);
    let vars = Vars::new(strings(&v["coordinates"]).iter().map(|s| s.as_str().unwrap().to_string()));
    let rows = strings(&v["metric"])
        .iter()
        .map(|r| strings(r).iter().map(|s| parse(s.as_str().unwrap(), &vars).unwrap()).collect())
        .collect();
    Tensor::matrix(rows, Slot::UP, Slot::UP).unwrap()
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the binary with fixture names substituted for `@name` arguments.
pub fn dnb(args: &[&str]) -> Run {
    let args: Vec<String> = args
        .iter()
        .map(|a| match a.strip_prefix('@') {
            Some(name) => fixture(name).display().to_string(),
            None => a.to_string(),
        })
        .collect();
    let out = Command::new(env!("CARGO_BIN_EXE_dnb")).args(&args).output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}
