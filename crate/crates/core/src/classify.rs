//! Coordinate changes and the classification verdicts built on the
//! obstruction tensors.

use symexpr::{Expr, Rational};

use crate::bracket::{obstructions, verify_poisson, with_direction, HydroBracket};
use crate::compat::MetricPair;
use crate::geometry::{Metric, B_SLOTS};
use crate::tensor::{Slot, Tensor};
use crate::{Error, Result};

/// A change of field coordinates `w^i = w^i(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateChange {
    forward: Vec<Expr>,
    jacobian: Tensor,
    inverse_jacobian: Tensor,
    // hessians[j] at (q, s) = ∂²w^j/∂u^q∂u^s
    hessians: Vec<Tensor>,
    inverse: Option<Vec<Expr>>,
}

impl CoordinateChange {
    pub fn new(forward: Vec<Expr>) -> Result<Self> {
        let n = forward.len();
        let jacobian = Tensor::from_fn(&[Slot::UP, Slot::DOWN], n, 0, |x| forward[x[0]].diff(x[1]));
        let inverse_jacobian = match jacobian.invert() {
            Ok(t) => t,
            Err(Error::DegenerateMetric { .. }) => return Err(Error::NonInvertibleChange),
            Err(e) => return Err(e),
        };
        let hessians = forward
            .iter()
            .map(|w| Tensor::from_fn(&[Slot::DOWN, Slot::DOWN], n, 0, |x| w.diff(x[0]).diff(x[1])))
            .collect();
        Ok(CoordinateChange { forward, jacobian, inverse_jacobian, hessians, inverse: None })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(Expr::var).collect()).expect("identity is invertible")
    }

    /// Attaches the inverse map `u^i = u^i(w)` after checking both
    /// compositions against the identity.
    pub fn with_inverse(mut self, inverse: Vec<Expr>) -> Result<Self> {
        let n = self.dim();
        if inverse.len() != n {
            return Err(Error::ShapeMismatch);
        }
        for i in 0..n {
            if self.forward[i].compose(&inverse)? != Expr::var(i) || inverse[i].compose(&self.forward)? != Expr::var(i)
            {
                return Err(Error::InvalidInput(format!("supplied inverse does not invert component {}", i + 1)));
            }
        }
        self.inverse = Some(inverse);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.forward.len()
    }

    pub fn forward(&self) -> &[Expr] {
        &self.forward
    }

    pub fn inverse(&self) -> Option<&[Expr]> {
        self.inverse.as_deref()
    }

    /// `J^i_j = ∂w^i/∂u^j`
    pub fn jacobian(&self) -> &Tensor {
        &self.jacobian
    }

    /// `(J⁻¹)^s_k = ∂u^s/∂w^k`, as a function of `u`.
    pub fn inverse_jacobian(&self) -> &Tensor {
        &self.inverse_jacobian
    }

    /// `u ↦ other(self(u))`.
    pub fn then(&self, other: &CoordinateChange) -> Result<CoordinateChange> {
        let forward =
            other.forward.iter().map(|w| w.compose(&self.forward)).collect::<std::result::Result<Vec<_>, _>>()?;
        let out = CoordinateChange::new(forward)?;
        match (&self.inverse, &other.inverse) {
            (Some(a), Some(b)) => {
                let inv = a.iter().map(|u| u.compose(b)).collect::<std::result::Result<Vec<_>, _>>()?;
                out.with_inverse(inv)
            }
            _ => Ok(out),
        }
    }

    /// Composes `e(w)` with the forward map, giving a function of `u`.
    pub fn pull(&self, e: &Expr) -> Result<Expr> {
        Ok(e.compose(&self.forward)?)
    }
}

/// `J g J^T`, still written in the source coordinates.
pub fn push_metric(g: &Tensor, change: &CoordinateChange) -> Tensor {
    let j = change.jacobian();
    let n = g.coords();
    Tensor::from_fn(&[Slot::UP, Slot::UP], n, 0, |x| {
        let (a, b) = (x[0], x[1]);
        let mut acc = Expr::zero();
        for p in 0..n {
            if j.get(&[a, p]).is_zero() {
                continue;
            }
            let inner: Expr = (0..n).map(|q| g.get(&[p, q]) * j.get(&[b, q])).sum();
            acc = &acc + &(j.get(&[a, p]) * &inner);
        }
        acc
    })
}

/// `J g J^T`, re-expressed in `w` when the change carries its inverse.
pub fn transform_metric(g: &Tensor, change: &CoordinateChange) -> Result<Tensor> {
    let pushed = push_metric(g, change);
    match change.inverse() {
        Some(inv) => pushed.try_map(|e| Ok(e.compose(inv)?)),
        None => Ok(pushed),
    }
}

/// Coefficients in the new coordinates `w`:
///
/// ```text
/// g'^{ij} = J^i_p J^j_q g^{pq}
/// b'^{ij}_k = [J^i_p J^j_q b^{pq}_s + J^i_p g^{pq} ∂²w^j/∂u^q∂u^s] (J⁻¹)^s_k
/// ```
///
/// Without an inverse map the result is the pullback representation: the
/// indices refer to `w` but the entries are functions of `u`, so it should
/// only be compared against a target composed with the forward map. With an
/// inverse attached, the entries are re-expressed in `w` and the result is
/// an ordinary bracket.
pub fn transform(br: &HydroBracket, change: &CoordinateChange) -> Result<HydroBracket> {
    let n = br.components();
    if change.dim() != n {
        return Err(Error::ShapeMismatch);
    }
    let j = change.jacobian();
    let jinv = change.inverse_jacobian();
    let mut gs = Vec::new();
    let mut bs = Vec::new();
    for a in 0..br.dimension() {
        let g = br.metric(a);
        let b = br.b(a);
        gs.push(push_metric(g, change));
        // inner[(i, j, s)] before the final contraction with J⁻¹
        let inner = Tensor::from_fn(&B_SLOTS, n, 0, |x| {
            let (i, jj, s) = (x[0], x[1], x[2]);
            let mut acc = Expr::zero();
            for p in 0..n {
                let jip = j.get(&[i, p]);
                if jip.is_zero() {
                    continue;
                }
                let mut row = Expr::zero();
                for q in 0..n {
                    row = &row + &(j.get(&[jj, q]) * b.get(&[p, q, s]));
                    row = &row + &(g.get(&[p, q]) * change.hessians[jj].get(&[q, s]));
                }
                acc = &acc + &(jip * &row);
            }
            acc
        });
        bs.push(Tensor::from_fn(&B_SLOTS, n, 0, |x| {
            (0..n).map(|s| inner.get(&[x[0], x[1], s]) * jinv.get(&[s, x[2]])).sum()
        }));
    }
    let out = HydroBracket::new(gs, bs)?;
    match change.inverse() {
        Some(inv) => out.try_map(|e| Ok(e.compose(inv)?)),
        None => Ok(out),
    }
}

/// Rewrites a bracket given in coordinates `w` in the coordinates `u` of
/// the change `w = w(u)`:
///
/// ```text
/// g'^{ab} = (J⁻¹)^a_i (J⁻¹)^b_j g^{ij}(w(u))
/// b'^{ab}_t = (J⁻¹)^a_i (J⁻¹)^b_j [b^{ij}_k(w(u)) J^k_t − J^i_p g'^{pq} ∂²w^j/∂u^q∂u^t]
/// ```
///
/// No inverse map is needed, and the result is an ordinary bracket in `u`.
pub fn pull_back(br: &HydroBracket, change: &CoordinateChange) -> Result<HydroBracket> {
    let n = br.components();
    if change.dim() != n {
        return Err(Error::ShapeMismatch);
    }
    let j = change.jacobian();
    let jinv = change.inverse_jacobian();
    let mut gs = Vec::new();
    let mut bs = Vec::new();
    for a in 0..br.dimension() {
        let gw = br.metric(a).try_map(|e| change.pull(e))?;
        let bw = br.b(a).try_map(|e| change.pull(e))?;
        let gu = Tensor::from_fn(&[Slot::UP, Slot::UP], n, 0, |x| {
            let mut acc = Expr::zero();
            for i in 0..n {
                let l = jinv.get(&[x[0], i]);
                if l.is_zero() {
                    continue;
                }
                let inner: Expr = (0..n).map(|jj| gw.get(&[i, jj]) * jinv.get(&[x[1], jj])).sum();
                acc = &acc + &(l * &inner);
            }
            acc
        });
        // inner[(i, j, t)] = b^{ij}_k J^k_t − J^i_p g'^{pq} H^j_{qt}
        let inner = Tensor::from_fn(&B_SLOTS, n, 0, |x| {
            let (i, jj, t) = (x[0], x[1], x[2]);
            let mut acc: Expr = (0..n).map(|k| bw.get(&[i, jj, k]) * j.get(&[k, t])).sum();
            for p in 0..n {
                let jip = j.get(&[i, p]);
                if jip.is_zero() {
                    continue;
                }
                let row: Expr = (0..n).map(|q| gu.get(&[p, q]) * change.hessians[jj].get(&[q, t])).sum();
                acc = &acc - &(jip * &row);
            }
            acc
        });
        bs.push(Tensor::from_fn(&B_SLOTS, n, 0, |x| {
            let (aa, bb, t) = (x[0], x[1], x[2]);
            let mut acc = Expr::zero();
            for i in 0..n {
                let l = jinv.get(&[aa, i]);
                if l.is_zero() {
                    continue;
                }
                let inner_row: Expr = (0..n).map(|jj| jinv.get(&[bb, jj]) * inner.get(&[i, jj, t])).sum();
                acc = &acc + &(l * &inner_row);
            }
            acc
        }));
        gs.push(gu);
    }
    HydroBracket::new(gs, bs)
}

/// Coefficients of `target` composed with the forward map, for comparison
/// with the pullback representation returned by [`transform`].
pub fn compose_bracket(target: &HydroBracket, change: &CoordinateChange) -> Result<HydroBracket> {
    target.try_map(|e| change.pull(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    ConstantReducible,
    Obstructed,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationVerdict {
    pub kind: VerdictKind,
    /// For an obstructed bracket: `(i, j, k, α, β)` and the nonzero value of
    /// `T^{ijkαβ}` there.
    pub witness: Option<(Vec<usize>, Expr)>,
    pub note: String,
}

fn require_poisson(br: &HydroBracket) -> Result<()> {
    let report = verify_poisson(br);
    if report.passed() {
        return Ok(());
    }
    let names: Vec<&str> = report.failed().map(|v| v.name).collect();
    Err(Error::NotAPoissonBracket(format!("relations {} fail", names.join(", "))))
}

/// Reducible to a constant bracket exactly when every obstruction tensor
/// vanishes identically.
pub fn is_constant_reducible(br: &HydroBracket) -> Result<ClassificationVerdict> {
    require_poisson(br)?;
    let set = obstructions(br)?;
    Ok(match set.witness() {
        None => ClassificationVerdict {
            kind: VerdictKind::ConstantReducible,
            witness: None,
            note: "all obstruction tensors vanish identically".into(),
        },
        Some(w) => ClassificationVerdict {
            kind: VerdictKind::Obstructed,
            witness: Some(w),
            note: "a nonzero obstruction tensor prevents reduction to constant form".into(),
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneComponent {
    pub verdict: ClassificationVerdict,
    /// Direction `α₀` with `g^{α₀} ≢ 0`, if any.
    pub reference: Option<usize>,
    /// `c^α` with `g^α = c^α g^{α₀}`.
    pub factors: Vec<Rational>,
    /// The normalizing coordinate, which in general is not rational.
    pub normalizing_coordinate: String,
}

/// One-component brackets are always reducible; the metrics of the
/// directions are constant multiples of one another.
pub fn classify_one_component(br: &HydroBracket, names: &[String]) -> Result<OneComponent> {
    if br.components() != 1 {
        return Err(Error::InvalidInput("one-component classification needs N = 1".into()));
    }
    require_poisson(br)?;
    let gs: Vec<&Expr> = (0..br.dimension()).map(|a| br.metric(a).get(&[0, 0])).collect();
    let reference = gs.iter().position(|g| !g.is_zero());
    let mut factors = Vec::new();
    if let Some(r) = reference {
        for g in &gs {
            let c = g.checked_div(gs[r])?;
            match c.constant_value() {
                Some(v) => factors.push(v),
                None => {
                    return Err(Error::Inconsistent(format!(
                        "metrics of a one-component Poisson bracket are not proportional: {}",
                        c.render(names)
                    )))
                }
            }
        }
    } else {
        factors = vec![Rational::from_integer(0.into()); br.dimension()];
    }
    let normalizing_coordinate = match reference {
        Some(r) => format!("ũ = ∫ du / sqrt(|{}|)", gs[r].render(names)),
        None => "every metric vanishes; the bracket is already zero".to_string(),
    };
    Ok(OneComponent {
        verdict: ClassificationVerdict {
            kind: VerdictKind::ConstantReducible,
            witness: None,
            note: "one-component brackets are always reducible to constant form".into(),
        },
        reference,
        factors,
        normalizing_coordinate,
    })
}

/// If some metric forms nonsingular pairs with all the others, the bracket
/// is reducible. The verdict is cross-checked against the obstruction
/// tensors and a disagreement is an error.
pub fn reducibility_by_nonsingularity(br: &HydroBracket) -> Result<ClassificationVerdict> {
    require_poisson(br)?;
    let metrics = metrics_of(br)?;
    let d = metrics.len();
    let mut nonsingular = vec![vec![false; d]; d];
    for a in 0..d {
        for b in a + 1..d {
            let flag = MetricPair::from_metrics(metrics[b].clone(), metrics[a].clone())?.pencil_analysis().nonsingular;
            nonsingular[a][b] = flag;
            nonsingular[b][a] = flag;
        }
    }
    let found = (0..d).find(|&a| (0..d).all(|b| b == a || nonsingular[a][b]));
    let Some(a0) = found else {
        return Ok(ClassificationVerdict {
            kind: VerdictKind::Undecided,
            witness: None,
            note: "no metric forms nonsingular pairs with all the others".into(),
        });
    };
    let direct = is_constant_reducible(br)?;
    if direct.kind != VerdictKind::ConstantReducible {
        return Err(Error::Inconsistent(format!(
            "metric {} forms nonsingular pairs with all others, yet an obstruction tensor is nonzero",
            a0 + 1
        )));
    }
    Ok(ClassificationVerdict {
        kind: VerdictKind::ConstantReducible,
        witness: None,
        note: format!("metric {} forms nonsingular pairs with all the others", a0 + 1),
    })
}

fn metrics_of(br: &HydroBracket) -> Result<Vec<Metric>> {
    (0..br.dimension()).map(|a| Metric::new(br.metric(a).clone()).map_err(|e| with_direction(e, a))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoComponentClass {
    Constant,
    /// Generated by the Lie algebra of vector fields on the two-torus.
    VectorFieldsOnTorus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoComponent {
    pub class: TwoComponentClass,
    /// Directions whose metric is definite at some sample point, with that
    /// point.
    pub definite: Vec<(usize, Vec<Rational>)>,
}

/// Two-component brackets in two dimensions are either constant or
/// equivalent to the canonical bracket of vector fields on the torus.
pub fn two_component_verdict(br: &HydroBracket) -> Result<TwoComponent> {
    if br.components() != 2 || br.dimension() != 2 {
        return Err(Error::InvalidInput("two-component classification needs N = n = 2".into()));
    }
    require_poisson(br)?;
    metrics_of(br)?;
    let class =
        if obstructions(br)?.is_zero() { TwoComponentClass::Constant } else { TwoComponentClass::VectorFieldsOnTorus };
    let mut definite = Vec::new();
    for a in 0..2 {
        let g = br.metric(a);
        let det = g.det()?;
        for p in crate::oracle::sample_points(2, 8, 0xD1F) {
            let (Ok(m1), Ok(m2)) = (g.get(&[0, 0]).eval_rational(&p), det.eval_rational(&p)) else { continue };
            let zero = Rational::from_integer(0.into());
            if m2 > zero && m1 != zero {
                definite.push((a, p));
                break;
            }
        }
    }
    Ok(TwoComponent { class, definite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use symexpr::{parse, Vars};

    fn ex(s: &str) -> Expr {
        parse(s, &Vars::coordinates(2)).unwrap()
    }

    #[test]
    fn jacobian_of_quadratic_change() {
        let c = CoordinateChange::new(vec![ex("(1/2)*(u1^2 - u2^2)"), ex("(1/2)*(u1 + u2)")]).unwrap();
        assert_eq!(c.jacobian().get(&[0, 1]), &ex("-u2"));
        let prod = c.jacobian().matmul(c.inverse_jacobian()).unwrap();
        assert_eq!(prod, Tensor::delta(2));
    }

    #[test]
    fn degenerate_change_is_rejected() {
        assert_eq!(CoordinateChange::new(vec![ex("u1 + u2"), ex("2*u1 + 2*u2")]), Err(Error::NonInvertibleChange));
    }

    #[test]
    fn inverse_is_checked() {
        let c = CoordinateChange::new(vec![ex("u1"), ex("u2 + u1^2")]).unwrap();
        assert!(c.clone().with_inverse(vec![ex("u1"), ex("u2 - u1^2")]).is_ok());
        assert!(c.with_inverse(vec![ex("u1"), ex("u2 + u1^2")]).is_err());
    }
}
