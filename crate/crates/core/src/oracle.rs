//! Floating-point cross-checks. Every quantity here is recomputed from the
//! second-order jets of the metric entries alone, by matrix algebra in
//! `f64`, and compared with the exact symbolic result at sample points.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symexpr::{Expr, Rational};

use crate::bracket::{obstructions, HydroBracket};
use crate::classify::CoordinateChange;
use crate::compat::MetricPair;
use crate::geometry::Metric;
use crate::tensor::Tensor;
use crate::{Error, Result};

/// Relative tolerance of every numeric comparison.
pub const TOLERANCE: f64 = 1e-9;

/// Sample points where a metric's condition number exceeds this are
/// skipped: the float recomputation loses too many digits there.
pub const MAX_CONDITION: f64 = 1e3;

/// Ratio of the largest to the smallest singular value.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// `|a − b| ≤ 1e-9 · max(1, |a|, |b|)`
pub fn close(a: f64, b: f64) -> bool {
    close_at_scale(a, b, 0.0)
}

/// [`close`] for a value computed as a sum of terms whose absolute values
/// add up to `scale`. Cancellation leaves rounding error proportional to
/// `scale` rather than to the result.
pub fn close_at_scale(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= TOLERANCE * relative_base(a, b, scale)
}

fn relative_base(a: f64, b: f64, scale: f64) -> f64 {
    1f64.max(a.abs()).max(b.abs()).max(scale)
}

/// Reproducible rational sample points with small numerators and
/// denominators, away from zero in every coordinate.
pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let mut p: i64 = rng.gen_range(-9..=9);
                    if p == 0 {
                        p = 1;
                    }
                    symexpr::ratio(p, rng.gen_range(1..=7))
                })
                .collect()
        })
        .collect()
}

fn to_f64(p: &[Rational]) -> Vec<f64> {
    p.iter().map(symexpr::rational_to_f64).collect()
}

/// A metric `g^{ij}` at one point with its first and second derivatives.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    /// `dg[k] = ∂_k g^{ij}`
    pub dg: Vec<DMatrix<f64>>,
    /// `ddg[k][l] = ∂_k ∂_l g^{ij}`
    pub ddg: Vec<Vec<DMatrix<f64>>>,
}

impl MetricJet {
    pub fn at(upper: &Tensor, point: &[f64]) -> Result<Self> {
        let n = upper.coords();
        let mut g = DMatrix::zeros(n, n);
        let mut dg = vec![DMatrix::zeros(n, n); n];
        let mut ddg = vec![vec![DMatrix::zeros(n, n); n]; n];
        for i in 0..n {
            for j in 0..n {
                let jet = upper.get(&[i, j]).eval_jet(point)?;
                g[(i, j)] = jet.value();
                for k in 0..n {
                    dg[k][(i, j)] = jet.gradient()[k];
                    for l in 0..n {
                        ddg[k][l][(i, j)] = jet.hessian(k, l);
                    }
                }
            }
        }
        Ok(MetricJet { g, dg, ddg })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `g_{ij}` with first and second derivatives, from
    /// `∂L = −L ∂G L` and its derivative.
    pub fn lower(&self) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>, Vec<Vec<DMatrix<f64>>>)> {
        let n = self.dim();
        let l = self.g.clone().try_inverse().ok_or(Error::DegenerateMetric { direction: None })?;
        let dl: Vec<DMatrix<f64>> = (0..n).map(|k| -(&l * &self.dg[k] * &l)).collect();
        let ddl = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| -(&dl[a] * &self.dg[b] * &l + &l * &self.ddg[a][b] * &l + &l * &self.dg[b] * &dl[a]))
                    .collect()
            })
            .collect();
        Ok((l, dl, ddl))
    }

    /// Levi-Civita connection `gamma[k][i][j] = Γ^k_{ij}` and its
    /// derivatives `dgamma[m][k][i][j] = ∂_m Γ^k_{ij}`.
    pub fn connection(&self) -> Result<(Vec3, Vec<Vec3>)> {
        let n = self.dim();
        let (_, dl, ddl) = self.lower()?;
        // Γ_{l,ij} = ½ (∂_i g_{lj} + ∂_j g_{li} − ∂_l g_{ij}) and its derivative
        let first = |i: usize, j: usize, s: usize| 0.5 * (dl[i][(s, j)] + dl[j][(s, i)] - dl[s][(i, j)]);
        let dfirst =
            |m: usize, i: usize, j: usize, s: usize| 0.5 * (ddl[m][i][(s, j)] + ddl[m][j][(s, i)] - ddl[m][s][(i, j)]);
        let mut gamma = vec![vec![vec![0.0; n]; n]; n];
        let mut dgamma = vec![vec![vec![vec![0.0; n]; n]; n]; n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    gamma[k][i][j] = (0..n).map(|s| self.g[(k, s)] * first(i, j, s)).sum();
                    for m in 0..n {
                        dgamma[m][k][i][j] = (0..n)
                            .map(|s| self.dg[m][(k, s)] * first(i, j, s) + self.g[(k, s)] * dfirst(m, i, j, s))
                            .sum();
                    }
                }
            }
        }
        Ok((gamma, dgamma))
    }
}

pub type Vec3 = Vec<Vec<Vec<f64>>>;

/// `R^i_{jkl}` at one point, indexed `[i][j][k][l]`.
pub fn numeric_curvature(jet: &MetricJet) -> Result<Vec<Vec3>> {
    Ok(numeric_curvature_with_scale(jet)?.0)
}

/// The curvature together with, per entry, the sum of the absolute values
/// of the terms that make it up.
pub fn numeric_curvature_with_scale(jet: &MetricJet) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    let n = jet.dim();
    let (gm, dgm) = jet.connection()?;
    let mut r = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    let mut scale = r.clone();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let (d1, d2) = (dgm[k][i][l][j], dgm[l][i][k][j]);
                    let mut acc = d1 - d2;
                    let mut size = d1.abs() + d2.abs();
                    for s in 0..n {
                        let (p, q) = (gm[i][k][s] * gm[s][l][j], gm[i][l][s] * gm[s][k][j]);
                        acc += p - q;
                        size += p.abs() + q.abs();
                    }
                    r[i][j][k][l] = acc;
                    scale[i][j][k][l] = size;
                }
            }
        }
    }
    Ok((r, scale))
}

/// `b^{ij}_k = −g^{is} Γ^j_{sk}`, indexed `[i][j][k]`.
pub fn numeric_b(jet: &MetricJet) -> Result<Vec3> {
    let n = jet.dim();
    let (gm, _) = jet.connection()?;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| -(0..n).map(|s| jet.g[(i, s)] * gm[j][s][k]).sum::<f64>()).collect())
                .collect()
        })
        .collect())
}

/// `T^{ijkαβ} = g^{ksβ} g^{irα} (Γ^{jβ}_{rs} − Γ^{jα}_{rs})`, indexed `[i][j][k]`.
pub fn numeric_obstruction(a: &MetricJet, b: &MetricJet) -> Result<Vec3> {
    let n = a.dim();
    let (ga, _) = a.connection()?;
    let (gb, _) = b.connection()?;
    let mut t = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for r in 0..n {
                    for s in 0..n {
                        acc += b.g[(k, s)] * a.g[(i, r)] * (gb[j][r][s] - ga[j][r][s]);
                    }
                }
                t[i][j][k] = acc;
            }
        }
    }
    Ok(t)
}

/// Nijenhuis tensor `N^k_{ij}` of `v = g1 · g2⁻¹`, indexed `[k][i][j]`.
pub fn numeric_nijenhuis(g1: &MetricJet, g2: &MetricJet) -> Result<Vec3> {
    let n = g1.dim();
    let (l2, dl2, _) = g2.lower()?;
    let v = &g1.g * &l2;
    let dv: Vec<DMatrix<f64>> = (0..n).map(|s| &g1.dg[s] * &l2 + &g1.g * &dl2[s]).collect();
    let mut out = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                out[k][i][j] = (0..n)
                    .map(|s| {
                        v[(s, i)] * dv[s][(k, j)] - v[(s, j)] * dv[s][(k, i)]
                            + v[(k, s)] * (dv[j][(s, i)] - dv[i][(s, j)])
                    })
                    .sum();
            }
        }
    }
    Ok(out)
}

/// Largest relative discrepancy found by [`cross_check`], per quantity:
/// `Γ`, `R`, `b`, `T` and `N` (Nijenhuis tensors of the pairs).
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub points: usize,
    pub compared: usize,
    pub worst: BTreeMap<&'static str, f64>,
    pub mismatches: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.points > 0
    }

    fn note(&mut self, what: &'static str, ix: &[usize], exact: f64, numeric: f64, scale: f64) {
        let r = (exact - numeric).abs() / relative_base(exact, numeric, scale);
        let w = self.worst.entry(what).or_insert(0.0);
        *w = w.max(r);
        self.compared += 1;
        if !close_at_scale(exact, numeric, scale) && self.mismatches.len() < 8 {
            self.mismatches.push(format!("{what}{ix:?}: exact {exact}, numeric {numeric}"));
        }
    }
}

fn eval_at(e: &Expr, p: &[f64]) -> Option<f64> {
    e.eval_f64(p).ok().filter(|v| v.is_finite())
}

/// Compares the exact connections, curvatures, `b` coefficients,
/// obstruction tensors and pair Nijenhuis tensors of a bracket with
/// nondegenerate metrics against the jet recomputation at `count` sample
/// points. Points where anything is singular or badly conditioned are
/// skipped. Indices in the report are zero-based and prefixed by the
/// direction(s).
pub fn cross_check(br: &HydroBracket, count: usize, seed: u64) -> Result<OracleReport> {
    let n = br.components();
    let d = br.dimension();
    let metrics = br.metrics().iter().cloned().map(Metric::new).collect::<Result<Vec<_>>>()?;
    let obs = obstructions(br)?;
    let mut nij = BTreeMap::new();
    for a in 0..d {
        for be in a + 1..d {
            nij.insert((a, be), MetricPair::from_metrics(metrics[be].clone(), metrics[a].clone())?.nijenhuis());
        }
    }
    let mut report = OracleReport { points: 0, compared: 0, worst: BTreeMap::new(), mismatches: Vec::new() };
    'points: for p in sample_points(n, count * 4, seed) {
        if report.points == count {
            break;
        }
        let x = to_f64(&p);
        let mut jets = Vec::with_capacity(d);
        for m in &metrics {
            match MetricJet::at(m.upper(), &x) {
                Ok(j) if condition_number(&j.g) <= MAX_CONDITION => jets.push(j),
                _ => continue 'points,
            }
        }
        let mut rows: Vec<(&'static str, Vec<usize>, &Expr, f64, f64)> = Vec::new();
        for (a, (m, jet)) in metrics.iter().zip(&jets).enumerate() {
            let (Ok((gamma, _)), Ok((r, r_scale)), Ok(b)) =
                (jet.connection(), numeric_curvature_with_scale(jet), numeric_b(jet))
            else {
                continue 'points;
            };
            for (ix, e) in m.christoffel().iter() {
                rows.push(("Γ", [vec![a], ix.clone()].concat(), e, gamma[ix[0]][ix[1]][ix[2]], 0.0));
            }
            for (ix, e) in m.curvature().iter() {
                let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
                rows.push(("R", [vec![a], ix.clone()].concat(), e, r[i][j][k][l], r_scale[i][j][k][l]));
            }
            for (ix, e) in br.b(a).iter() {
                rows.push(("b", [vec![a], ix.clone()].concat(), e, b[ix[0]][ix[1]][ix[2]], 0.0));
            }
        }
        for ((a, be), t) in &obs.upper {
            let Ok(num) = numeric_obstruction(&jets[*a], &jets[*be]) else { continue 'points };
            for (ix, e) in t.iter() {
                rows.push(("T", [vec![*a, *be], ix.clone()].concat(), e, num[ix[0]][ix[1]][ix[2]], 0.0));
            }
        }
        for ((a, be), t) in &nij {
            let Ok(num) = numeric_nijenhuis(&jets[*be], &jets[*a]) else { continue 'points };
            for (ix, e) in t.iter() {
                rows.push(("N", [vec![*a, *be], ix.clone()].concat(), e, num[ix[0]][ix[1]][ix[2]], 0.0));
            }
        }
        let mut values = Vec::with_capacity(rows.len());
        for (what, ix, e, numeric, scale) in rows {
            let Some(v) = eval_at(e, &x) else { continue 'points };
            values.push((what, ix, v, numeric, scale));
        }
        for (what, ix, exact, numeric, scale) in values {
            report.note(what, &ix, exact, numeric, scale);
        }
        report.points += 1;
    }
    Ok(report)
}

/// The Nijenhuis tensor of a single pair against the jets.
pub fn nijenhuis_check(pair: &MetricPair, count: usize, seed: u64) -> Result<OracleReport> {
    let n = pair.dim();
    let nij = pair.nijenhuis();
    let mut report = OracleReport { points: 0, compared: 0, worst: BTreeMap::new(), mismatches: Vec::new() };
    'points: for p in sample_points(n, count * 4, seed) {
        if report.points == count {
            break;
        }
        let x = to_f64(&p);
        let (Ok(j1), Ok(j2)) = (MetricJet::at(pair.first().upper(), &x), MetricJet::at(pair.second().upper(), &x))
        else {
            continue;
        };
        if condition_number(&j1.g) > MAX_CONDITION || condition_number(&j2.g) > MAX_CONDITION {
            continue;
        }
        let Ok(num) = numeric_nijenhuis(&j1, &j2) else { continue };
        let mut values = Vec::new();
        for (ix, e) in nij.iter() {
            let Some(v) = eval_at(e, &x) else { continue 'points };
            let numeric = num[ix[0]][ix[1]][ix[2]];
            values.push((ix, v, numeric));
        }
        for (ix, exact, numeric) in values {
            report.note("N", &ix, exact, numeric, 0.0);
        }
        report.points += 1;
    }
    Ok(report)
}

/// A random lower-triangular polynomial change of coordinates with a
/// polynomial inverse:
///
/// ```text
/// w^i = a_i u^i + Σ_{j<i} c_{ij} u^j + d_i (u^{i−1})²
/// ```
///
/// with `a_i` a nonzero integer.
pub fn random_triangular_change(n: usize, seed: u64) -> Result<CoordinateChange> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut int = |lo: i64, hi: i64, nonzero: bool| loop {
        let v = rng.gen_range(lo..=hi);
        if !nonzero || v != 0 {
            break symexpr::ratio(v, 1);
        }
    };
    let a: Vec<Rational> = (0..n).map(|_| int(-2, 2, true)).collect();
    let c: Vec<Vec<Rational>> = (0..n).map(|i| (0..i).map(|_| int(-1, 1, false)).collect()).collect();
    let d: Vec<Rational> = (0..n).map(|i| if i == 0 { Rational::zero() } else { int(-1, 1, true) }).collect();
    // the lower part of w^i as a function of the earlier coordinates
    let tail = |i: usize, earlier: &[Expr]| -> Expr {
        let mut e: Expr = (0..i).map(|j| earlier[j].scale(&c[i][j])).sum();
        if i > 0 {
            e = &e + &earlier[i - 1].pow(2).scale(&d[i]);
        }
        e
    };
    let vars: Vec<Expr> = (0..n).map(Expr::var).collect();
    let forward: Vec<Expr> = (0..n).map(|i| &vars[i].scale(&a[i]) + &tail(i, &vars)).collect();
    // u^i = (w^i − tail(u^1, …, u^{i−1})) / a_i, solved in order
    let mut inverse: Vec<Expr> = Vec::with_capacity(n);
    for i in 0..n {
        let e = (&vars[i] - &tail(i, &inverse)).scale(&a[i].recip());
        inverse.push(e);
    }
    CoordinateChange::new(forward)?.with_inverse(inverse)
}

/// A random constant symmetric matrix with nonzero determinant.
pub fn random_constant_metric(n: usize, seed: u64) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut rows = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = Expr::from_int(rng.gen_range(-3..=3));
                rows[i][j] = v.clone();
                rows[j][i] = v;
            }
        }
        let t = Tensor::matrix(rows, crate::tensor::Slot::UP, crate::tensor::Slot::UP).expect("square rows");
        if t.det().is_ok_and(|d| !d.is_zero()) {
            return t;
        }
    }
}
