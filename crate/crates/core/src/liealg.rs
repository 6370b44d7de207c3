//! Brackets linear in the fields: Lie algebras of hydrodynamic type, their
//! 2-cocycles and coboundaries, and the multiplications `e^i ∘_α e^j`.
//!
//! The structure constants `b^{ijα}_k` define the operation
//!
//! ```text
//! [ξ, η]_k = b^{ijα}_k ((η_i)_α ξ_j − η_j (ξ_i)_α)
//! ```
//!
//! on covector fields over the torus `Tⁿ`.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use symexpr::{rational_to_f64, Expr, Rational};

use crate::bracket::{verify_poisson, HydroBracket, RelationReport};
use crate::geometry::B_SLOTS;
use crate::tensor::{Slot, Tensor};
use crate::{Error, Result};

/// Constant data `b^{ijα}_k` and `g^{ijα}_0` of a field-linear bracket
/// `g^{ijα}(u) = (b^{ijα}_k + b^{jiα}_k) u^k + g^{ijα}_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBracketData {
    n: usize,
    dim: usize,
    // b[α][i][j][k]
    b: Vec<Vec<Vec<Vec<Rational>>>>,
    // g0[α][i][j]
    g0: Vec<Vec<Vec<Rational>>>,
}

fn zero() -> Rational {
    Rational::zero()
}

impl LinearBracketData {
    pub fn new(b: Vec<Vec<Vec<Vec<Rational>>>>, g0: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        let dim = b.len();
        let n = b.first().map_or(0, Vec::len);
        let ok = dim > 0
            && n > 0
            && g0.len() == dim
            && b.iter().all(|ba| ba.len() == n && ba.iter().all(|r| r.len() == n && r.iter().all(|c| c.len() == n)))
            && g0.iter().all(|ga| ga.len() == n && ga.iter().all(|r| r.len() == n));
        if !ok {
            return Err(Error::ShapeMismatch);
        }
        Ok(LinearBracketData { n, dim, b, g0 })
    }

    pub fn zero(n: usize, dim: usize) -> Self {
        LinearBracketData {
            n,
            dim,
            b: vec![vec![vec![vec![zero(); n]; n]; n]; dim],
            g0: vec![vec![vec![zero(); n]; n]; dim],
        }
    }

    /// Vector fields on `Tⁿ`: `N = n`, `b^{ijα}_k = δ^i_k δ^{jα}`.
    pub fn vector_fields(n: usize) -> Self {
        let mut out = Self::zero(n, n);
        for a in 0..n {
            for i in 0..n {
                out.b[a][i][a][i] = Rational::one();
            }
        }
        out
    }

    pub fn components(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// `b^{ijα}_k`
    pub fn b(&self, alpha: usize, i: usize, j: usize, k: usize) -> &Rational {
        &self.b[alpha][i][j][k]
    }

    pub fn set_b(&mut self, alpha: usize, i: usize, j: usize, k: usize, value: Rational) {
        self.b[alpha][i][j][k] = value;
    }

    /// `g^{ijα}_0`
    pub fn g0(&self, alpha: usize, i: usize, j: usize) -> &Rational {
        &self.g0[alpha][i][j]
    }

    pub fn with_g0(mut self, g0: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        if g0.len() != self.dim || g0.iter().any(|ga| ga.len() != self.n || ga.iter().any(|r| r.len() != self.n)) {
            return Err(Error::ShapeMismatch);
        }
        self.g0 = g0;
        Ok(self)
    }

    /// The same structure constants with `g0 = 0`.
    pub fn homogeneous(&self) -> Self {
        Self::zero(self.n, self.dim).with_b(self.b.clone())
    }

    fn with_b(mut self, b: Vec<Vec<Vec<Vec<Rational>>>>) -> Self {
        self.b = b;
        self
    }

    pub fn to_bracket(&self) -> HydroBracket {
        let n = self.n;
        let g = (0..self.dim)
            .map(|a| {
                Tensor::from_fn(&[Slot::UP, Slot::UP], n, 0, |x| {
                    let (i, j) = (x[0], x[1]);
                    let lin: Expr =
                        (0..n).map(|k| Expr::var(k).scale(&(&self.b[a][i][j][k] + &self.b[a][j][i][k]))).sum();
                    &lin + &Expr::from_rational(self.g0[a][i][j].clone())
                })
            })
            .collect();
        let b = (0..self.dim)
            .map(|a| Tensor::from_fn(&B_SLOTS, n, 0, |x| Expr::from_rational(self.b[a][x[0]][x[1]][x[2]].clone())))
            .collect();
        HydroBracket::new(g, b).expect("shapes are consistent by construction")
    }

    /// Skew symmetry and the Jacobi identity of the operation on covector
    /// fields, decided through the coefficient relations of the bracket with
    /// `g0 = 0`.
    pub fn jacobi_check(&self) -> RelationReport {
        verify_poisson(&self.homogeneous().to_bracket())
    }

    /// Whether `g0` defines a 2-cocycle, and whether it is a coboundary.
    /// The verdicts are meaningful when [`jacobi_check`](Self::jacobi_check)
    /// passes: the homogeneous residuals then vanish and whatever remains is
    /// due to `g0`.
    pub fn cocycle_check(&self) -> CocycleReport {
        let report = verify_poisson(&self.to_bracket());
        let skew = ["a1", "a2"].iter().all(|r| report.verdict(r).is_some_and(|v| v.passed()));
        let closed = ["a3", "a4", "a5", "a6", "a7"].iter().all(|r| report.verdict(r).is_some_and(|v| v.passed()));
        let coboundary = if skew && closed { self.solve_coboundary() } else { None };
        CocycleReport { skew, closed, coboundary }
    }

    /// Solves `(b^{ijα}_k + b^{jiα}_k) c^k = g^{ijα}_0` over the rationals.
    pub fn solve_coboundary(&self) -> Option<Vec<Rational>> {
        let n = self.n;
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for a in 0..self.dim {
            for i in 0..n {
                for j in 0..n {
                    let mut row: Vec<Rational> = (0..n).map(|k| &self.b[a][i][j][k] + &self.b[a][j][i][k]).collect();
                    row.push(self.g0[a][i][j].clone());
                    rows.push(row);
                }
            }
        }
        solve_linear(rows, n)
    }

    /// The bracket after the shift `u^k ↦ u^k − c^k`.
    pub fn shifted_bracket(&self, c: &[Rational]) -> Result<HydroBracket> {
        let shift: Vec<Expr> = (0..self.n).map(|k| &Expr::var(k) - &Expr::from_rational(c[k].clone())).collect();
        self.to_bracket().try_map(|e| Ok(e.compose(&shift)?))
    }

    /// `(x ∘_α y)_k = x_i y_j b^{ijα}_k`
    pub fn multiply(&self, alpha: usize, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut acc = zero();
                for i in 0..n {
                    for j in 0..n {
                        acc += &x[i] * &y[j] * &self.b[alpha][i][j][k];
                    }
                }
                acc
            })
            .collect()
    }

    /// The operation on covector fields whose components are expressions in
    /// the spatial variables `x^1, …, x^n` (variable indices `0..n`).
    pub fn bracket_fields(&self, xi: &[Expr], eta: &[Expr]) -> Vec<Expr> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut acc = Expr::zero();
                for a in 0..self.dim {
                    for i in 0..n {
                        for j in 0..n {
                            let c = &self.b[a][i][j][k];
                            if c.is_zero() {
                                continue;
                            }
                            let t = &(&eta[i].diff(a) * &xi[j]) - &(&eta[j] * &xi[i].diff(a));
                            acc = &acc + &t.scale(c);
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// Largest pointwise Jacobi residual `[ξ,[η,ζ]] + [η,[ζ,ξ]] + [ζ,[ξ,η]]`
    /// over random trigonometric covector fields of harmonic degree at most
    /// two, sampled on a uniform 16ⁿ grid of the torus.
    pub fn functional_oracle(&self, trials: usize, seed: u64) -> f64 {
        let consts = self.float_constants();
        let modes = modes(self.dim);
        let grid = grid(self.dim, 16);
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
                let fields: Vec<TrigField> = (0..3).map(|_| TrigField::random(self.n, &modes, &mut rng)).collect();
                grid.iter()
                    .map(|x| {
                        let [xi, eta, zeta] = [0, 1, 2].map(|f| fields[f].jet(x, self.dim));
                        let r1 = bracket_value(&consts, &xi, &bracket_jet(&consts, &eta, &zeta));
                        let r2 = bracket_value(&consts, &eta, &bracket_jet(&consts, &zeta, &xi));
                        let r3 = bracket_value(&consts, &zeta, &bracket_jet(&consts, &xi, &eta));
                        (0..self.n).map(|k| (r1[k] + r2[k] + r3[k]).abs()).fold(0.0, f64::max)
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// The normal-form conditions: `b^{ij1}_k = 0` and every metric
    /// `(b^{ijα}_k + b^{jiα}_k) u^k + g^{ijα}_0` nondegenerate.
    pub fn normal_form_conditions(&self) -> NormalFormConditions {
        let first_direction_constant = self.b[0].iter().flatten().flatten().all(Zero::is_zero);
        let br = self.to_bracket();
        let nondegenerate = (0..self.dim).map(|a| br.metric(a).det().is_ok_and(|d| !d.is_zero())).collect();
        NormalFormConditions { first_direction_constant, nondegenerate }
    }

    fn float_constants(&self) -> Vec<(usize, usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for a in 0..self.dim {
            for i in 0..self.n {
                for j in 0..self.n {
                    for k in 0..self.n {
                        let c = &self.b[a][i][j][k];
                        if !c.is_zero() {
                            out.push((a, i, j, k, rational_to_f64(c)));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Reads off the constants of a bracket whose `b` is constant and whose
/// metrics are `(b^{ijα}_k + b^{jiα}_k) u^k + const`.
pub fn check_linear_form(br: &HydroBracket) -> Option<LinearBracketData> {
    let n = br.components();
    let d = br.dimension();
    let mut out = LinearBracketData::zero(n, d);
    for a in 0..d {
        for (x, e) in br.b(a).iter() {
            out.b[a][x[0]][x[1]][x[2]] = e.constant_value()?;
        }
    }
    let origin = vec![zero(); n];
    for a in 0..d {
        for i in 0..n {
            for j in 0..n {
                let g = br.metric(a).get(&[i, j]);
                if !g.is_polynomial() {
                    return None;
                }
                let g0 = g.eval_rational(&origin).ok()?;
                let lin: Expr = (0..n).map(|k| Expr::var(k).scale(&(&out.b[a][i][j][k] + &out.b[a][j][i][k]))).sum();
                if &(&lin + &Expr::from_rational(g0.clone())) != g {
                    return None;
                }
                out.g0[a][i][j] = g0;
            }
        }
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormConditions {
    /// `b^{ij1}_k = 0`
    pub first_direction_constant: bool,
    /// `det g^{ijα} ≢ 0`, per direction.
    pub nondegenerate: Vec<bool>,
}

impl NormalFormConditions {
    pub fn hold(&self) -> bool {
        self.first_direction_constant && self.nondegenerate.iter().all(|&d| d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CocycleReport {
    pub skew: bool,
    pub closed: bool,
    /// A shift `c^k` removing `g0`, or `None` when there is none.
    pub coboundary: Option<Vec<Rational>>,
}

/// Gaussian elimination on an augmented system with `unknowns` columns.
fn solve_linear(mut rows: Vec<Vec<Rational>>, unknowns: usize) -> Option<Vec<Rational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                let pivot_row = rows[r].clone();
                for (v, pv) in rows[i].iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[unknowns].is_zero()) {
        return None;
    }
    let mut x = vec![zero(); unknowns];
    for (row, &col) in pivots.iter().enumerate() {
        x[col] = rows[row][unknowns].clone();
    }
    Some(x)
}

/// Value, gradient and Hessian of every component at one point.
struct FieldJet {
    v: Vec<f64>,
    d: Vec<Vec<f64>>,
    dd: Vec<Vec<Vec<f64>>>,
}

/// Value and gradient of every component.
struct FieldJet1 {
    v: Vec<f64>,
    d: Vec<Vec<f64>>,
}

struct TrigField {
    // per component: (mode index, cos coefficient, sin coefficient)
    terms: Vec<Vec<(Vec<i32>, f64, f64)>>,
}

impl TrigField {
    fn random(n: usize, modes: &[Vec<i32>], rng: &mut ChaCha8Rng) -> Self {
        let terms = (0..n)
            .map(|_| modes.iter().map(|m| (m.clone(), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect();
        TrigField { terms }
    }

    fn jet(&self, x: &[f64], dim: usize) -> FieldJet {
        let n = self.terms.len();
        let mut out = FieldJet { v: vec![0.0; n], d: vec![vec![0.0; dim]; n], dd: vec![vec![vec![0.0; dim]; dim]; n] };
        for (i, terms) in self.terms.iter().enumerate() {
            for (m, a, b) in terms {
                let phase: f64 = m.iter().zip(x).map(|(&k, &xv)| k as f64 * xv).sum();
                let (s, c) = phase.sin_cos();
                // f = a cos + b sin, f' = m (−a sin + b cos), f'' = −m m f
                let f = a * c + b * s;
                let df = -a * s + b * c;
                out.v[i] += f;
                for p in 0..dim {
                    out.d[i][p] += m[p] as f64 * df;
                    for q in 0..dim {
                        out.dd[i][p][q] -= (m[p] * m[q]) as f64 * f;
                    }
                }
            }
        }
        out
    }
}

fn modes(dim: usize) -> Vec<Vec<i32>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out.into_iter().flat_map(|m| (-2..=2).map(move |k| [m.clone(), vec![k]].concat())).collect();
    }
    out.retain(|m| m.iter().map(|k| k.abs()).sum::<i32>() <= 2);
    out
}

fn grid(dim: usize, points: usize) -> Vec<Vec<f64>> {
    let step = std::f64::consts::TAU / points as f64;
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|x| (0..points).map(move |k| [x.clone(), vec![k as f64 * step]].concat()))
            .collect();
    }
    out
}

type Consts = [(usize, usize, usize, usize, f64)];

/// `[ξ, η]` with its gradient.
fn bracket_jet(consts: &Consts, xi: &FieldJet, eta: &FieldJet) -> FieldJet1 {
    let n = xi.v.len();
    let dim = xi.d.first().map_or(0, Vec::len);
    let mut out = FieldJet1 { v: vec![0.0; n], d: vec![vec![0.0; dim]; n] };
    for &(a, i, j, k, c) in consts {
        out.v[k] += c * (eta.d[i][a] * xi.v[j] - eta.v[j] * xi.d[i][a]);
        for g in 0..dim {
            out.d[k][g] += c
                * (eta.dd[i][a][g] * xi.v[j] + eta.d[i][a] * xi.d[j][g]
                    - eta.d[j][g] * xi.d[i][a]
                    - eta.v[j] * xi.dd[i][a][g]);
        }
    }
    out
}

/// `[ξ, η]` where `η` is only known to first order.
fn bracket_value(consts: &Consts, xi: &FieldJet, eta: &FieldJet1) -> Vec<f64> {
    let mut out = vec![0.0; xi.v.len()];
    for &(a, i, j, k, c) in consts {
        out[k] += c * (eta.d[i][a] * xi.v[j] - eta.v[j] * xi.d[i][a]);
    }
    out
}

/// Largest absolute value in a rational vector, for reports.
pub fn max_abs(v: &[Rational]) -> Rational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(zero)
}
