//! Pairs of metrics: almost compatibility, compatibility, the direct pencil
//! test, the Nijenhuis tensor of the affinor, and pencil eigenvalues.

use std::sync::OnceLock;

use symexpr::{gcd::gcd, Expr};

use crate::bracket::{pencil_relations_among, ObstructionSet, RelationReport, Verdict};
use crate::classify::{push_metric, CoordinateChange};
use crate::geometry::{curvature, Metric};
use crate::tensor::{det, Slot, Tensor};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct MetricPair {
    g1: Metric,
    g2: Metric,
    affinor: OnceLock<Tensor>,
}

impl MetricPair {
    /// Both metrics must be nondegenerate; a degenerate one is reported as
    /// direction 0 (`g1`) or 1 (`g2`).
    pub fn new(g1: Tensor, g2: Tensor) -> Result<Self> {
        if g1.coords() != g2.coords() {
            return Err(Error::ShapeMismatch);
        }
        let g1 = Metric::new(g1).map_err(|e| crate::bracket::with_direction(e, 0))?;
        let g2 = Metric::new(g2).map_err(|e| crate::bracket::with_direction(e, 1))?;
        Ok(MetricPair { g1, g2, affinor: OnceLock::new() })
    }

    pub fn from_metrics(g1: Metric, g2: Metric) -> Result<Self> {
        if g1.dim() != g2.dim() {
            return Err(Error::ShapeMismatch);
        }
        Ok(MetricPair { g1, g2, affinor: OnceLock::new() })
    }

    pub fn first(&self) -> &Metric {
        &self.g1
    }

    pub fn second(&self) -> &Metric {
        &self.g2
    }

    pub fn dim(&self) -> usize {
        self.g1.dim()
    }

    /// Obstruction tensors of the pair, with `g1` in the role of `α` and
    /// `g2` in the role of `β`.
    pub fn obstructions(&self) -> ObstructionSet {
        ObstructionSet::from_connections(
            &[self.g1.upper(), self.g2.upper()],
            &[self.g1.christoffel(), self.g2.christoffel()],
        )
    }

    /// (b1) and (b3) for the pair.
    pub fn relations(&self) -> RelationReport {
        pencil_relations_among(&[self.g1.clone(), self.g2.clone()], &["b1", "b3"])
    }

    pub fn is_almost_compatible(&self) -> bool {
        self.relations().verdict("b1").is_some_and(Verdict::passed)
    }

    pub fn is_compatible(&self) -> bool {
        self.relations().passed()
    }

    /// Compatibility straight from the definition: the connection and
    /// curvature of `λ1·g1 + λ2·g2`, first index raised, must be the same
    /// combination of those of `g1` and `g2`. Both sides are homogeneous of
    /// degree one in `(λ1, λ2)`, so it is enough to take `λ2 = 1` and keep
    /// `λ = λ1` as one extra symbolic variable.
    pub fn pencil_direct_check(&self) -> Result<bool> {
        let n = self.dim();
        let l = Expr::var(n);
        let pencil =
            Tensor::from_fn(&[Slot::UP, Slot::UP], n, 0, |x| &(&l * self.g1.upper().get(x)) + self.g2.upper().get(x));
        let pm = match Metric::new(pencil) {
            Ok(m) => m,
            Err(Error::DegenerateMetric { .. }) => return Err(Error::DegeneratePencil),
            Err(e) => return Err(e),
        };
        let raised_gamma = |m: &Metric| {
            Tensor::from_fn(&[Slot::UP, Slot::UP, Slot::DOWN], n, 0, |x| {
                (0..n).map(|s| m.upper().get(&[x[0], s]) * m.christoffel().get(&[x[1], s, x[2]])).sum()
            })
        };
        let raised_riemann = |m: &Metric, r: &Tensor| {
            Tensor::from_fn(&[Slot::UP, Slot::UP, Slot::DOWN, Slot::DOWN], n, 0, |x| {
                (0..n).map(|s| m.upper().get(&[x[0], s]) * r.get(&[x[1], s, x[2], x[3]])).sum()
            })
        };
        let combine = |a: &Tensor, b: &Tensor| a.zip_with(b, |x, y| &(&l * x) + y);
        let gp = raised_gamma(&pm);
        if gp != combine(&raised_gamma(&self.g1), &raised_gamma(&self.g2))? {
            return Ok(false);
        }
        let rp = raised_riemann(&pm, &curvature(pm.christoffel()));
        let r1 = raised_riemann(&self.g1, self.g1.curvature());
        let r2 = raised_riemann(&self.g2, self.g2.curvature());
        Ok(rp == combine(&r1, &r2)?)
    }

    /// `v^i_j = g1^{is} g2_{sj}`
    pub fn affinor(&self) -> &Tensor {
        self.affinor.get_or_init(|| self.g1.upper().matmul(self.g2.lower()).expect("square metrics"))
    }

    /// Nijenhuis tensor of the affinor, tuple order `(k, i, j)` for
    /// `N^k_{ij}`.
    pub fn nijenhuis(&self) -> Tensor {
        let v = self.affinor();
        let dv = v.gradient(); // (i, j, s) = ∂_s v^i_j
        let n = self.dim();
        Tensor::from_fn(&[Slot::UP, Slot::DOWN, Slot::DOWN], n, 0, |x| {
            let (k, i, j) = (x[0], x[1], x[2]);
            if i == j {
                return Expr::zero();
            }
            (0..n)
                .map(|s| {
                    let a = &(v.get(&[s, i]) * dv.get(&[k, j, s])) - &(v.get(&[s, j]) * dv.get(&[k, i, s]));
                    let b = v.get(&[k, s]) * &(dv.get(&[s, i, j]) - dv.get(&[s, j, i]));
                    a + b
                })
                .sum()
        })
    }

    /// Characteristic polynomial `det(g1 − λ·g2)` and its discriminant.
    pub fn pencil_analysis(&self) -> PencilAnalysis {
        let n = self.dim();
        let lambda = Expr::var(n);
        let rows: Vec<Vec<Expr>> = (0..n)
            .map(|i| (0..n).map(|j| self.g1.upper().get(&[i, j]) - &(&lambda * self.g2.upper().get(&[i, j]))).collect())
            .collect();
        let char_poly = det(&rows);
        let den = Expr::from_poly(char_poly.den().clone());
        let coefficients: Vec<Expr> =
            char_poly.num().coeffs_in(n).into_iter().map(|c| &Expr::from_poly(c) / &den).collect();
        let discriminant = discriminant(&coefficients);
        let nonsingular = !discriminant.is_zero();
        let num = char_poly.num();
        let repeated = gcd(num, &num.diff(n));
        let repeated_factor = (repeated.degree_in(n) > 0).then(|| Expr::from_poly(repeated.clone()));
        let repeated_root = (repeated.degree_in(n) == 1).then(|| {
            let c = repeated.coeffs_in(n);
            -(&Expr::from_poly(c[0].clone()) / &Expr::from_poly(c[1].clone()))
        });
        let note = match (&repeated_root, nonsingular) {
            (_, true) => format!("{} distinct eigenvalues", n),
            (Some(_), false) => "a single eigenvalue is repeated identically".to_string(),
            (None, false) => "eigenvalues coincide identically".to_string(),
        };
        PencilAnalysis {
            lambda: n,
            char_poly,
            coefficients,
            discriminant,
            nonsingular,
            repeated_factor,
            repeated_root,
            note,
        }
    }

    /// Pushes both metrics through `change` and tests the diagonal normal
    /// form: both diagonal, and each ratio `g1^{ii}/g2^{ii}` depends on the
    /// new coordinate `w^i` only. Derivatives along `w^j` are taken by the
    /// chain rule, so no inverse map is needed.
    pub fn verify_diagonal_form(&self, change: &CoordinateChange) -> Result<bool> {
        let n = self.dim();
        if change.dim() != n {
            return Err(Error::ShapeMismatch);
        }
        let h1 = push_metric(self.g1.upper(), change);
        let h2 = push_metric(self.g2.upper(), change);
        for i in 0..n {
            for j in 0..n {
                if i != j && (!h1.get(&[i, j]).is_zero() || !h2.get(&[i, j]).is_zero()) {
                    return Ok(false);
                }
            }
        }
        let inv = change.inverse_jacobian();
        for i in 0..n {
            let ratio = h1.get(&[i, i]).checked_div(h2.get(&[i, i]))?;
            let grad: Vec<Expr> = (0..n).map(|s| ratio.diff(s)).collect();
            for j in (0..n).filter(|&j| j != i) {
                let along: Expr = (0..n).map(|s| inv.get(&[s, j]) * &grad[s]).sum();
                if !along.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PencilAnalysis {
    /// Variable index used for `λ` (one past the coordinates).
    pub lambda: usize,
    pub char_poly: Expr,
    /// Coefficients of the characteristic polynomial in `λ`, constant term
    /// first.
    pub coefficients: Vec<Expr>,
    /// Resultant of the characteristic polynomial and its `λ`-derivative.
    pub discriminant: Expr,
    pub nonsingular: bool,
    /// Primitive part of `gcd(p, ∂p/∂λ)` when it involves `λ`.
    pub repeated_factor: Option<Expr>,
    /// The repeated eigenvalue, when the repeated factor is linear in `λ`.
    pub repeated_root: Option<Expr>,
    pub note: String,
}

/// `Res(p, p')` through the Sylvester matrix. Coefficients are given
/// constant term first; degree-one polynomials have discriminant 1.
pub fn discriminant(coefficients: &[Expr]) -> Expr {
    let m = coefficients.len().saturating_sub(1);
    if m <= 1 {
        return Expr::one();
    }
    let dp: Vec<Expr> = (1..=m).map(|k| coefficients[k].scale(&symexpr::ratio(k as i64, 1))).collect();
    resultant(coefficients, &dp)
}

/// Sylvester resultant of two polynomials given by coefficients, constant
/// term first.
pub fn resultant(p: &[Expr], q: &[Expr]) -> Expr {
    let (m, k) = (p.len() - 1, q.len() - 1);
    let size = m + k;
    let mut rows = vec![vec![Expr::zero(); size]; size];
    for r in 0..k {
        for (t, c) in p.iter().rev().enumerate() {
            rows[r][r + t] = c.clone();
        }
    }
    for r in 0..m {
        for (t, c) in q.iter().rev().enumerate() {
            rows[k + r][r + t] = c.clone();
        }
    }
    det(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use symexpr::{parse, Vars};

    fn matrix(rows: &[&[&str]]) -> Tensor {
        let vars = Vars::coordinates(rows.len());
        Tensor::matrix(
            rows.iter().map(|r| r.iter().map(|s| parse(s, &vars).unwrap()).collect()).collect(),
            Slot::UP,
            Slot::UP,
        )
        .unwrap()
    }

    fn canonical_pair() -> MetricPair {
        MetricPair::new(matrix(&[&["2*u2", "u1+u2"], &["u1+u2", "2*u1"]]), matrix(&[&["1", "0"], &["0", "-1"]]))
            .unwrap()
    }

    #[test]
    fn canonical_pair_is_compatible_and_singular() {
        let p = canonical_pair();
        assert!(p.is_almost_compatible());
        assert!(p.is_compatible());
        assert!(p.pencil_direct_check().unwrap());
        assert!(p.nijenhuis().is_zero());
        let pa = p.pencil_analysis();
        assert!(!pa.nonsingular);
        let vars = Vars::coordinates(2).with("l");
        assert_eq!(pa.char_poly, parse("-(l - (u2 - u1))^2", &vars).unwrap());
        assert_eq!(pa.repeated_root.unwrap(), parse("u2 - u1", &vars).unwrap());
    }

    #[test]
    fn constant_distinct_eigenvalues() {
        let p = MetricPair::new(matrix(&[&["2", "0"], &["0", "3"]]), matrix(&[&["1", "0"], &["0", "1"]])).unwrap();
        let pa = p.pencil_analysis();
        assert!(pa.nonsingular);
        assert!(pa.repeated_root.is_none());
    }

    #[test]
    fn identical_metrics() {
        let g = matrix(&[&["u1", "1"], &["1", "u2"]]);
        let p = MetricPair::new(g.clone(), g).unwrap();
        assert!(p.is_compatible());
        assert!(p.pencil_direct_check().unwrap());
        assert!(p.nijenhuis().is_zero());
    }

    #[test]
    fn resultant_of_quadratic() {
        // (x − 1)(x − 2): discriminant of x² − 3x + 2 is 1, Res(p, p') = −1
        let c = [Expr::from_int(2), Expr::from_int(-3), Expr::one()];
        assert_eq!(discriminant(&c), Expr::from_int(-1));
        let c = [Expr::one(), Expr::from_int(-2), Expr::one()];
        assert!(discriminant(&c).is_zero());
    }
}
