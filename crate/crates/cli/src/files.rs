//! JSON input and output formats.

use std::path::Path;

use anyhow::{bail, Context, Result};
use dnb_core::{CoordinateChange, Expr, HydroBracket, LinearBracketData, Rational, Slot, Tensor};
use serde::{Deserialize, Serialize};
use symexpr::{parse, Vars};

/// `{"components": N, "dimension": n, "coordinates": [...], "metrics":
/// [α][i][j], "b": [α][i][j][k]}` with expression strings. Without `b`,
/// the coefficients are derived from nondegenerate metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketFile {
    pub components: usize,
    pub dimension: usize,
    pub coordinates: Vec<String>,
    pub metrics: Vec<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<Vec<Vec<String>>>>>,
    /// Free-form remark, e.g. that coefficients are in pullback form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// `{"forward": [...], "inverse": [...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChangeFile {
    pub forward: Vec<String>,
    #[serde(default)]
    pub inverse: Option<Vec<String>>,
}

/// `{"coordinates": [...], "metric": [i][j]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricFile {
    pub coordinates: Vec<String>,
    pub metric: Vec<Vec<String>>,
}

/// `{"components": N, "dimension": n, "b": [α][i][j][k], "g0": [α][i][j]}`
/// with rational number strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsFile {
    pub components: usize,
    pub dimension: usize,
    pub b: Vec<Vec<Vec<Vec<String>>>>,
    #[serde(default)]
    pub g0: Option<Vec<Vec<Vec<String>>>>,
}

pub struct LoadedBracket {
    pub bracket: HydroBracket,
    pub names: Vec<String>,
    pub derived_b: bool,
}

pub fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))
}

fn from_value<T: serde::de::DeserializeOwned>(v: serde_json::Value, path: &Path, what: &str) -> Result<T> {
    serde_json::from_value(v).with_context(|| format!("{} is not a {what} file", path.display()))
}

fn expr(s: &str, vars: &Vars, at: impl Fn() -> String) -> Result<Expr> {
    parse(s, vars).with_context(|| format!("{}: cannot parse `{s}`", at()))
}

fn check_len<T>(v: &[T], n: usize, what: impl Fn() -> String) -> Result<()> {
    if v.len() != n {
        bail!("{} has {} entries, expected {n}", what(), v.len());
    }
    Ok(())
}

fn square(
    rows: &[Vec<String>],
    n: usize,
    vars: &Vars,
    what: &str,
    label: impl Fn(usize, usize) -> String,
) -> Result<Tensor> {
    check_len(rows, n, || what.to_string())?;
    let mut out = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        check_len(row, n, || format!("row {} of {what}", i + 1))?;
        out.push(row.iter().enumerate().map(|(j, s)| expr(s, vars, || label(i, j))).collect::<Result<Vec<_>>>()?);
    }
    Ok(Tensor::matrix(out, Slot::UP, Slot::UP)?)
}

impl BracketFile {
    pub fn load(path: &Path) -> Result<LoadedBracket> {
        let v = read_json(path)?;
        from_value::<BracketFile>(v, path, "bracket")?.build()
    }

    pub fn build(&self) -> Result<LoadedBracket> {
        let (n, d) = (self.components, self.dimension);
        if n == 0 || d == 0 {
            bail!("components and dimension must be positive");
        }
        check_len(&self.coordinates, n, || "coordinates".into())?;
        check_len(&self.metrics, d, || "metrics".into())?;
        let vars = Vars::new(self.coordinates.iter().cloned());
        let g = self
            .metrics
            .iter()
            .enumerate()
            .map(|(a, m)| {
                let what = format!("metric of direction {}", a + 1);
                square(m, n, &vars, &what, |i, j| format!("g^{{{}{}}} of direction {}", i + 1, j + 1, a + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        let (bracket, derived_b) = match &self.b {
            Some(b) => {
                check_len(b, d, || "b".into())?;
                let mut bs = Vec::with_capacity(d);
                for (a, ba) in b.iter().enumerate() {
                    check_len(ba, n, || format!("b of direction {}", a + 1))?;
                    let mut t = Tensor::zeros(&[Slot::UP, Slot::UP, Slot::DOWN], n, 0);
                    for (i, bi) in ba.iter().enumerate() {
                        check_len(bi, n, || format!("b^{{{}.}} of direction {}", i + 1, a + 1))?;
                        for (j, bij) in bi.iter().enumerate() {
                            check_len(bij, n, || format!("b^{{{}{}}} of direction {}", i + 1, j + 1, a + 1))?;
                            for (k, s) in bij.iter().enumerate() {
                                let label = || format!("b^{{{}{}}}_{} of direction {}", i + 1, j + 1, k + 1, a + 1);
                                t.set(&[i, j, k], expr(s, &vars, label)?);
                            }
                        }
                    }
                    bs.push(t);
                }
                (HydroBracket::new(g, bs)?, false)
            }
            None => (HydroBracket::from_metrics(g)?, true),
        };
        Ok(LoadedBracket { bracket, names: self.coordinates.clone(), derived_b })
    }

    pub fn from_bracket(br: &HydroBracket, names: &[String], note: Option<String>) -> Self {
        let n = br.components();
        let metrics = br
            .metrics()
            .iter()
            .map(|g| (0..n).map(|i| (0..n).map(|j| g.get(&[i, j]).render(names)).collect()).collect())
            .collect();
        let b = br
            .bs()
            .iter()
            .map(|b| {
                (0..n)
                    .map(|i| (0..n).map(|j| (0..n).map(|k| b.get(&[i, j, k]).render(names)).collect()).collect())
                    .collect()
            })
            .collect();
        BracketFile { components: n, dimension: br.dimension(), coordinates: names.to_vec(), metrics, b: Some(b), note }
    }
}

impl ChangeFile {
    pub fn load(path: &Path, names: &[String]) -> Result<CoordinateChange> {
        let file: ChangeFile = from_value(read_json(path)?, path, "coordinate change")?;
        let vars = Vars::new(names.iter().cloned());
        check_len(&file.forward, names.len(), || "forward map".into())?;
        let forward = file
            .forward
            .iter()
            .enumerate()
            .map(|(i, s)| expr(s, &vars, || format!("forward component {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        let change = CoordinateChange::new(forward)?;
        match &file.inverse {
            None => Ok(change),
            Some(inv) => {
                check_len(inv, names.len(), || "inverse map".into())?;
                let inverse = inv
                    .iter()
                    .enumerate()
                    .map(|(i, s)| expr(s, &vars, || format!("inverse component {}", i + 1)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(change.with_inverse(inverse)?)
            }
        }
    }
}

impl MetricFile {
    pub fn build(&self) -> Result<Tensor> {
        let n = self.coordinates.len();
        let vars = Vars::new(self.coordinates.iter().cloned());
        square(&self.metric, n, &vars, "metric", |i, j| format!("g^{{{}{}}}", i + 1, j + 1))
    }
}

fn rational(s: &str, at: impl Fn() -> String) -> Result<Rational> {
    let e = parse(s, &Vars::new(Vec::<String>::new())).with_context(|| format!("{}: cannot parse `{s}`", at()))?;
    e.constant_value().with_context(|| format!("{}: `{s}` is not a constant", at()))
}

impl ConstantsFile {
    pub fn build(&self) -> Result<LinearBracketData> {
        let (n, d) = (self.components, self.dimension);
        check_len(&self.b, d, || "b".into())?;
        let mut b = Vec::with_capacity(d);
        for (a, ba) in self.b.iter().enumerate() {
            check_len(ba, n, || format!("b of direction {}", a + 1))?;
            let mut rows = Vec::with_capacity(n);
            for (i, bi) in ba.iter().enumerate() {
                check_len(bi, n, || format!("b^{{{}.}} of direction {}", i + 1, a + 1))?;
                let mut mid = Vec::with_capacity(n);
                for (j, bij) in bi.iter().enumerate() {
                    check_len(bij, n, || format!("b^{{{}{}}} of direction {}", i + 1, j + 1, a + 1))?;
                    let ks = bij
                        .iter()
                        .enumerate()
                        .map(|(k, s)| {
                            rational(s, || format!("b^{{{}{}}}_{} of direction {}", i + 1, j + 1, k + 1, a + 1))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    mid.push(ks);
                }
                rows.push(mid);
            }
            b.push(rows);
        }
        let g0 = match &self.g0 {
            None => vec![vec![vec![Rational::from_integer(0.into()); n]; n]; d],
            Some(g0) => {
                check_len(g0, d, || "g0".into())?;
                let mut out = Vec::with_capacity(d);
                for (a, ga) in g0.iter().enumerate() {
                    check_len(ga, n, || format!("g0 of direction {}", a + 1))?;
                    let mut rows = Vec::with_capacity(n);
                    for (i, row) in ga.iter().enumerate() {
                        check_len(row, n, || format!("row {} of g0 in direction {}", i + 1, a + 1))?;
                        rows.push(
                            row.iter()
                                .enumerate()
                                .map(|(j, s)| {
                                    rational(s, || format!("g0^{{{}{}}} of direction {}", i + 1, j + 1, a + 1))
                                })
                                .collect::<Result<Vec<_>>>()?,
                        );
                    }
                    out.push(rows);
                }
                out
            }
        };
        Ok(LinearBracketData::new(b, g0)?)
    }
}

/// What a JSON document describes, decided by its keys.
pub enum Input {
    Bracket(BracketFile),
    Metric(MetricFile),
    Constants(ConstantsFile),
}

pub fn classify_input(path: &Path) -> Result<Input> {
    let v = read_json(path)?;
    if v.get("metric").is_some() {
        Ok(Input::Metric(from_value(v, path, "metric")?))
    } else if v.get("metrics").is_some() {
        Ok(Input::Bracket(from_value(v, path, "bracket")?))
    } else if v.get("b").is_some() {
        Ok(Input::Constants(from_value(v, path, "constants")?))
    } else {
        bail!("{}: expected a bracket, metric or constants file", path.display())
    }
}
