//! The bracket data model, the coefficient relations equivalent to skew
//! symmetry and the Jacobi identity, and the obstruction tensors.

use std::collections::BTreeMap;

use rayon::prelude::*;
use symexpr::Expr;

use crate::geometry::{self, connection_from_b, covariant_derivative_3up, Metric, B_SLOTS};
use crate::tensor::{Slot, Tensor};
use crate::{Error, Result};

/// Coefficients `g^{ijα}(u)` and `b^{ijα}_k(u)` of a bracket with `N`
/// components in `n` spatial dimensions. No symmetry is imposed here.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroBracket {
    g: Vec<Tensor>,
    b: Vec<Tensor>,
}

impl HydroBracket {
    pub fn new(g: Vec<Tensor>, b: Vec<Tensor>) -> Result<Self> {
        if g.is_empty() || g.len() != b.len() {
            return Err(Error::InvalidInput("need one metric and one b array per spatial direction".into()));
        }
        let n = g[0].coords();
        for (ga, ba) in g.iter().zip(&b) {
            if ga.slots() != [Slot::UP, Slot::UP] || ga.coords() != n || ba.slots() != B_SLOTS || ba.coords() != n {
                return Err(Error::ShapeMismatch);
            }
        }
        Ok(HydroBracket { g, b })
    }

    /// Bracket whose `b` arrays are derived from nondegenerate metrics.
    pub fn from_metrics(g: Vec<Tensor>) -> Result<Self> {
        let b = g
            .iter()
            .enumerate()
            .map(|(a, ga)| geometry::b_from_metric(ga).map_err(|e| with_direction(e, a)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(g, b)
    }

    /// Number of field components `N`.
    pub fn components(&self) -> usize {
        self.g[0].coords()
    }

    /// Number of spatial dimensions `n`.
    pub fn dimension(&self) -> usize {
        self.g.len()
    }

    pub fn metric(&self, alpha: usize) -> &Tensor {
        &self.g[alpha]
    }

    pub fn b(&self, alpha: usize) -> &Tensor {
        &self.b[alpha]
    }

    pub fn metrics(&self) -> &[Tensor] {
        &self.g
    }

    pub fn bs(&self) -> &[Tensor] {
        &self.b
    }

    /// Applies `f` to every coefficient.
    pub fn map<F>(&self, f: F) -> HydroBracket
    where
        F: Fn(&Expr) -> Expr + Sync + Send,
    {
        HydroBracket { g: self.g.iter().map(|t| t.map(&f)).collect(), b: self.b.iter().map(|t| t.map(&f)).collect() }
    }

    pub fn try_map<F>(&self, f: F) -> Result<HydroBracket>
    where
        F: Fn(&Expr) -> Result<Expr> + Sync + Send,
    {
        Ok(HydroBracket {
            g: self.g.iter().map(|t| t.try_map(&f)).collect::<Result<_>>()?,
            b: self.b.iter().map(|t| t.try_map(&f)).collect::<Result<_>>()?,
        })
    }
}

pub(crate) fn with_direction(e: Error, alpha: usize) -> Error {
    match e {
        Error::DegenerateMetric { .. } => Error::DegenerateMetric { direction: Some(alpha) },
        other => other,
    }
}

/// The first violating index tuple of a relation (zero-based, in the order
/// named by [`Verdict::indices`]) and the residual there.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub at: Vec<usize>,
    pub residual: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: &'static str,
    /// Names of the free indices, e.g. `["i", "j", "k", "α"]`.
    pub indices: &'static [&'static str],
    pub violation: Option<Violation>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationReport {
    pub verdicts: Vec<Verdict>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(Verdict::passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.passed())
    }
}

/// Evaluates `residual` on every tuple of `ranges` and keeps the
/// lexicographically first nonzero value.
fn check<F>(name: &'static str, indices: &'static [&'static str], ranges: &[usize], residual: F) -> Verdict
where
    F: Fn(&[usize]) -> Expr + Sync,
{
    let total: usize = ranges.iter().product();
    let violation = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut ix = vec![0; ranges.len()];
            let mut rest = flat;
            for (slot, &d) in ranges.iter().enumerate().rev() {
                ix[slot] = rest % d;
                rest /= d;
            }
            let r = residual(&ix);
            (!r.is_zero()).then_some(Violation { at: ix, residual: r })
        })
        .find_first(Option::is_some)
        .flatten();
    Verdict { name, indices, violation }
}

/// Checks the seven coefficient relations (a1)–(a7) as identities.
pub fn verify_poisson(br: &HydroBracket) -> RelationReport {
    let n = br.components();
    let d = br.dimension();
    let g = &br.g;
    let b = &br.b;
    // db[α] at (i, j, k, s) = ∂_s b^{ijα}_k
    let db: Vec<Tensor> = b.iter().map(Tensor::gradient).collect();

    let a1 = check("a1", &["i", "j", "α"], &[n, n, d], |x| g[x[2]].get(&[x[0], x[1]]) - g[x[2]].get(&[x[1], x[0]]));
    let a2 = check("a2", &["i", "j", "k", "α"], &[n, n, n, d], |x| {
        let (i, j, k, a) = (x[0], x[1], x[2], x[3]);
        &(&g[a].get(&[i, j]).diff(k) - b[a].get(&[i, j, k])) - b[a].get(&[j, i, k])
    });

    // e3(i, j, r, α, β) = g^{siα} b^{jrβ}_s − g^{sjβ} b^{irα}_s
    let e3 = |i: usize, j: usize, r: usize, a: usize, be: usize| -> Expr {
        (0..n)
            .map(|s| &(g[a].get(&[s, i]) * b[be].get(&[j, r, s])) - &(g[be].get(&[s, j]) * b[a].get(&[i, r, s])))
            .sum()
    };
    let a3 = check("a3", &["i", "j", "r", "α", "β"], &[n, n, n, d, d], |x| {
        let (i, j, r, a, be) = (x[0], x[1], x[2], x[3], x[4]);
        e3(i, j, r, a, be) + e3(i, j, r, be, a)
    });
    let a4 = check("a4", &["i", "j", "r", "α", "β"], &[n, n, n, d, d], |x| {
        let (i, j, r, a, be) = (x[0], x[1], x[2], x[3], x[4]);
        &(e3(i, j, r, a, be) + e3(j, r, i, a, be)) + &e3(r, i, j, a, be)
    });

    // e5[(α, β)] at (i, j, r, q) =
    //   g^{siα}(∂_q b^{jrβ}_s − ∂_s b^{jrβ}_q) + b^{ijα}_s b^{srβ}_q − b^{irα}_s b^{sjβ}_q
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (0..d).map(move |be| (a, be))).collect();
    let e5: Vec<Tensor> = pairs
        .iter()
        .map(|&(a, be)| {
            Tensor::from_fn(&[Slot::UP, Slot::UP, Slot::UP, Slot::DOWN], n, 0, |x| {
                let (i, j, r, q) = (x[0], x[1], x[2], x[3]);
                (0..n)
                    .map(|s| {
                        let curl = db[be].get(&[j, r, s, q]) - db[be].get(&[j, r, q, s]);
                        let t = g[a].get(&[s, i]) * &curl;
                        &(&t + &(b[a].get(&[i, j, s]) * b[be].get(&[s, r, q])))
                            - &(b[a].get(&[i, r, s]) * b[be].get(&[s, j, q]))
                    })
                    .sum()
            })
        })
        .collect();
    let e5_at = |a: usize, be: usize| &e5[a * d + be];

    let a5 = check("a5", &["i", "j", "r", "q", "α", "β"], &[n, n, n, n, d, d], |x| {
        let (a, be) = (x[4], x[5]);
        e5_at(a, be).get(&x[..4]) + e5_at(be, a).get(&x[..4])
    });
    let a6 = check("a6", &["i", "j", "r", "q", "α", "β"], &[n, n, n, n, d, d], |x| {
        let (i, j, r, q, a, be) = (x[0], x[1], x[2], x[3], x[4], x[5]);
        (0..n)
            .map(|s| {
                let lhs = &(&(g[be].get(&[s, i]) * db[a].get(&[j, r, q, s]))
                    - &(b[be].get(&[i, j, s]) * b[a].get(&[s, r, q])))
                    - &(b[be].get(&[i, r, s]) * b[a].get(&[j, s, q]));
                let rhs = &(&(g[a].get(&[s, j]) * db[be].get(&[i, r, q, s]))
                    - &(b[a].get(&[j, i, s]) * b[be].get(&[s, r, q])))
                    - &(b[be].get(&[i, s, q]) * b[a].get(&[j, r, s]));
                lhs - rhs
            })
            .sum()
    });

    let de5: Vec<Tensor> = e5.iter().map(Tensor::gradient).collect();
    // c(i, j, r; k, q; α, β) = b^{siβ}_q (∂_s b^{jrα}_k − ∂_k b^{jrα}_s)
    let c = |i: usize, j: usize, r: usize, k: usize, q: usize, a: usize, be: usize| -> Expr {
        (0..n).map(|s| b[be].get(&[s, i, q]) * &(db[a].get(&[j, r, k, s]) - db[a].get(&[j, r, s, k]))).sum()
    };
    let a7 = check("a7", &["i", "j", "r", "k", "q", "α", "β"], &[n, n, n, n, n, d, d], |x| {
        let (i, j, r, k, q, a, be) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6]);
        let mut acc = de5[a * d + be].get(&[i, j, r, q, k]) + de5[be * d + a].get(&[i, j, r, k, q]);
        for (x1, x2, x3) in [(i, j, r), (j, r, i), (r, i, j)] {
            acc = &acc + &c(x1, x2, x3, k, q, a, be);
            acc = &acc + &c(x1, x2, x3, q, k, be, a);
        }
        acc
    });

    RelationReport { verdicts: vec![a1, a2, a3, a4, a5, a6, a7] }
}

/// Geometry of one spatial direction: the metric with its Levi-Civita
/// data, and the connection `Γ^k_{ij} = −g_{is} b^{sk}_j` read off `b`.
#[derive(Debug, Clone)]
pub struct DirectionGeometry {
    pub metric: Metric,
    pub connection: Tensor,
}

impl DirectionGeometry {
    /// Whether the connection read off `b` is the Levi-Civita connection.
    pub fn matches_levi_civita(&self) -> bool {
        &self.connection == self.metric.christoffel()
    }
}

pub fn derive_geometry(br: &HydroBracket) -> Result<Vec<DirectionGeometry>> {
    (0..br.dimension())
        .map(|a| {
            let metric = Metric::new(br.g[a].clone()).map_err(|e| with_direction(e, a))?;
            let connection = connection_from_b(metric.lower(), &br.b[a]);
            Ok(DirectionGeometry { metric, connection })
        })
        .collect()
}

/// Obstruction tensors for every ordered pair of distinct directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionSet {
    /// `T^{iαβ}_{jk} = Γ^{iβ}_{jk} − Γ^{iα}_{jk}`, tuple order `(i, j, k)`.
    pub mixed: BTreeMap<(usize, usize), Tensor>,
    /// `T^{ijkαβ} = g^{ksβ} g^{irα} T^{jαβ}_{rs}`, tuple order `(i, j, k)`.
    pub upper: BTreeMap<(usize, usize), Tensor>,
}

impl ObstructionSet {
    /// Builds the set from one contravariant metric and one connection per
    /// direction.
    pub fn from_connections(metrics: &[&Tensor], connections: &[&Tensor]) -> Self {
        let d = metrics.len();
        let n = metrics[0].coords();
        let mut mixed = BTreeMap::new();
        let mut upper = BTreeMap::new();
        for a in 0..d {
            for be in 0..d {
                if a == be {
                    continue;
                }
                let t = connections[be].sub(connections[a]).expect("connections share a shape");
                let (ga, gb) = (metrics[a], metrics[be]);
                let up = Tensor::from_fn(&[Slot::UP, Slot::UP, Slot::UP], n, 0, |x| {
                    let (i, j, k) = (x[0], x[1], x[2]);
                    let mut acc = Expr::zero();
                    for r in 0..n {
                        let gir = ga.get(&[i, r]);
                        if gir.is_zero() {
                            continue;
                        }
                        let inner: Expr = (0..n).map(|s| gb.get(&[k, s]) * t.get(&[j, r, s])).sum();
                        acc = &acc + &(gir * &inner);
                    }
                    acc
                });
                mixed.insert((a, be), t);
                upper.insert((a, be), up);
            }
        }
        ObstructionSet { mixed, upper }
    }

    pub fn is_zero(&self) -> bool {
        self.mixed.values().all(Tensor::is_zero)
    }

    /// First nonzero `T^{ijkαβ}` over pairs `α < β`, as `(i, j, k, α, β)`.
    pub fn witness(&self) -> Option<(Vec<usize>, Expr)> {
        self.upper.iter().filter(|((a, be), _)| a < be).find_map(|(&(a, be), t)| {
            t.first_nonzero().map(|(mut ix, e)| {
                ix.extend([a, be]);
                (ix, e.clone())
            })
        })
    }
}

/// Obstruction tensors built from the connections that `b` defines.
pub fn obstructions(br: &HydroBracket) -> Result<ObstructionSet> {
    let geo = derive_geometry(br)?;
    let metrics: Vec<&Tensor> = br.g.iter().collect();
    let conns: Vec<&Tensor> = geo.iter().map(|x| &x.connection).collect();
    Ok(ObstructionSet::from_connections(&metrics, &conns))
}

/// Relations (b1)–(b4) for the Levi-Civita connections of flat metrics.
pub fn verify_flat_pencil_relations(br: &HydroBracket) -> Result<RelationReport> {
    let metrics =
        br.g.iter()
            .enumerate()
            .map(|(a, g)| {
                let m = Metric::new(g.clone()).map_err(|e| with_direction(e, a))?;
                if !m.is_flat() {
                    return Err(Error::NonFlatMetric { direction: a });
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
    Ok(pencil_relations(&metrics))
}

/// (b1)–(b4) for an arbitrary family of nondegenerate metrics, using their
/// Levi-Civita connections. Flatness is the caller's concern.
pub fn pencil_relations(metrics: &[Metric]) -> RelationReport {
    pencil_relations_among(metrics, &["b1", "b2", "b3", "b4"])
}

/// The named subset of (b1)–(b4), in that order.
pub fn pencil_relations_among(metrics: &[Metric], names: &[&str]) -> RelationReport {
    let want = |name: &str| names.contains(&name);
    let d = metrics.len();
    let n = metrics[0].dim();
    let uppers: Vec<&Tensor> = metrics.iter().map(Metric::upper).collect();
    let conns: Vec<&Tensor> = metrics.iter().map(Metric::christoffel).collect();
    let set = ObstructionSet::from_connections(&uppers, &conns);
    let pairs = |x: &[usize]| x[3] != x[4];
    let tu = |a: usize, be: usize| &set.upper[&(a, be)];
    let tm = |a: usize, be: usize| &set.mixed[&(a, be)];

    let b1 = want("b1").then(|| {
        check("b1", &["i", "j", "k", "α", "β"], &[n, n, n, d, d], |x| {
            if !pairs(x) {
                return Expr::zero();
            }
            let t = tu(x[3], x[4]);
            t.get(&[x[0], x[1], x[2]]) - t.get(&[x[2], x[1], x[0]])
        })
    });
    let b2 = want("b2").then(|| {
        check("b2", &["i", "j", "k", "α", "β"], &[n, n, n, d, d], |x| {
            if !pairs(x) {
                return Expr::zero();
            }
            let t = tu(x[3], x[4]);
            let (i, j, k) = (x[0], x[1], x[2]);
            &(t.get(&[i, j, k]) + t.get(&[j, k, i])) + t.get(&[k, i, j])
        })
    });
    let b3 = want("b3").then(|| {
        check("b3", &["i", "j", "r", "t", "α", "β"], &[n, n, n, n, d, d], |x| {
            let (i, j, r, t, a, be) = (x[0], x[1], x[2], x[3], x[4], x[5]);
            if a == be {
                return Expr::zero();
            }
            let (u, m) = (tu(a, be), tm(a, be));
            (0..n).map(|s| &(u.get(&[i, j, s]) * m.get(&[r, s, t])) - &(u.get(&[i, r, s]) * m.get(&[j, s, t]))).sum()
        })
    });
    let b4 = want("b4").then(|| {
        let nabla: BTreeMap<(usize, usize), Tensor> = set
            .upper
            .par_iter()
            .map(|(&(a, be), t)| ((a, be), covariant_derivative_3up(t, conns[a]).expect("shapes agree")))
            .collect();
        check("b4", &["i", "j", "k", "r", "α", "β"], &[n, n, n, n, d, d], |x| {
            let (a, be) = (x[4], x[5]);
            if a == be {
                return Expr::zero();
            }
            nabla[&(a, be)].get(&x[..4]).clone()
        })
    });
    RelationReport { verdicts: [b1, b2, b3, b4].into_iter().flatten().collect() }
}

/// Whether the verdict of (a1)–(a7) coincides with "all metrics flat and
/// (b1)–(b4) hold". The two must agree when `b` is the one induced by the
/// metrics, so a `false` here points at an engine defect.
pub fn connection_crosscheck(br: &HydroBracket) -> Result<bool> {
    let lhs = verify_poisson(br).passed();
    let rhs = match verify_flat_pencil_relations(br) {
        Ok(report) => report.passed(),
        Err(Error::NonFlatMetric { .. }) => false,
        Err(e) => return Err(e),
    };
    Ok(lhs == rhs)
}
