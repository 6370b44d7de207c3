//! Per-metric differential geometry: covariant inverse, Levi-Civita
//! connection, curvature, and the `b`-coefficients a metric induces.
//!
//! Index layouts used throughout the crate:
//!
//! | object        | slots                  | tuple order     |
//! |---------------|------------------------|-----------------|
//! | `g^{ij}`      | `[UP, UP]`             | `(i, j)`        |
//! | `g_{ij}`      | `[DOWN, DOWN]`         | `(i, j)`        |
//! | `Γ^k_{ij}`    | `[UP, DOWN, DOWN]`     | `(k, i, j)`     |
//! | `R^i_{jkl}`   | `[UP, DOWN, DOWN, DOWN]` | `(i, j, k, l)` |
//! | `b^{ij}_k`    | `[UP, UP, DOWN]`       | `(i, j, k)`     |
//!
//! Only the first `N` variables of an expression are differentiated; any
//! further variables (pencil parameters, for instance) are treated as
//! constants.

use std::sync::OnceLock;

use symexpr::Expr;

use crate::tensor::{Slot, Tensor};
use crate::{Error, Result};

const GAMMA: [Slot; 3] = [Slot::UP, Slot::DOWN, Slot::DOWN];
const RIEMANN: [Slot; 4] = [Slot::UP, Slot::DOWN, Slot::DOWN, Slot::DOWN];
pub(crate) const B_SLOTS: [Slot; 3] = [Slot::UP, Slot::UP, Slot::DOWN];

/// A nondegenerate contravariant metric together with its derived
/// objects. Construction fails on degenerate or asymmetric input.
#[derive(Debug)]
pub struct Metric {
    upper: Tensor,
    lower: Tensor,
    christoffel: Tensor,
    curvature: OnceLock<Tensor>,
}

impl Clone for Metric {
    fn clone(&self) -> Self {
        let curvature = OnceLock::new();
        if let Some(r) = self.curvature.get() {
            let _ = curvature.set(r.clone());
        }
        Metric {
            upper: self.upper.clone(),
            lower: self.lower.clone(),
            christoffel: self.christoffel.clone(),
            curvature,
        }
    }
}

impl Metric {
    pub fn new(upper: Tensor) -> Result<Self> {
        if upper.slots() != [Slot::UP, Slot::UP] {
            return Err(Error::InvalidInput("a metric must be a contravariant square matrix".into()));
        }
        if !upper.is_symmetric()? {
            return Err(Error::InvalidInput("metric is not symmetric".into()));
        }
        let lower = upper.invert()?;
        let christoffel = christoffel(&upper, &lower);
        let defect = metricity_defect(&lower, &christoffel);
        if let Some((ix, _)) = defect.first_nonzero() {
            return Err(Error::Inconsistent(format!("Levi-Civita connection is not metric at {:?}", ix)));
        }
        Ok(Metric { upper, lower, christoffel, curvature: OnceLock::new() })
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Self> {
        Self::new(Tensor::matrix(rows, Slot::UP, Slot::UP)?)
    }

    pub fn dim(&self) -> usize {
        self.upper.coords()
    }

    /// `g^{ij}`
    pub fn upper(&self) -> &Tensor {
        &self.upper
    }

    /// `g_{ij}`
    pub fn lower(&self) -> &Tensor {
        &self.lower
    }

    /// `Γ^k_{ij}` of the Levi-Civita connection.
    pub fn christoffel(&self) -> &Tensor {
        &self.christoffel
    }

    /// `R^i_{jkl}`, computed on first use.
    pub fn curvature(&self) -> &Tensor {
        self.curvature.get_or_init(|| curvature(&self.christoffel))
    }

    pub fn is_flat(&self) -> bool {
        self.curvature().is_zero()
    }

    /// `b^{ij}_k = −g^{is} Γ^j_{sk}`.
    pub fn b_coefficients(&self) -> Tensor {
        b_from_connection(&self.upper, &self.christoffel)
    }
}

/// Christoffel symbols of the second kind from a metric and its inverse.
pub fn christoffel(upper: &Tensor, lower: &Tensor) -> Tensor {
    let n = upper.coords();
    // dl[(s, j, i)] = ∂_i g_{sj}
    let dl = lower.gradient();
    let first = Tensor::from_fn(&[Slot::DOWN, Slot::DOWN, Slot::DOWN], n, 0, |ix| {
        let (s, i, j) = (ix[0], ix[1], ix[2]);
        if i > j {
            return Expr::zero();
        }
        let t = &(dl.get(&[s, j, i]) + dl.get(&[s, i, j])) - dl.get(&[i, j, s]);
        t.scale(&symexpr::ratio(1, 2))
    });
    Tensor::from_fn(&GAMMA, n, 0, |ix| {
        let (k, i, j) = (ix[0], ix[1].min(ix[2]), ix[1].max(ix[2]));
        (0..n).map(|s| upper.get(&[k, s]) * first.get(&[s, i, j])).sum()
    })
}

/// Levi-Civita connection of a contravariant metric.
pub fn levi_civita(upper: &Tensor) -> Result<Tensor> {
    Ok(Metric::new(upper.clone())?.christoffel)
}

/// `∇_k g_{ij} = ∂_k g_{ij} − Γ^s_{ki} g_{sj} − Γ^s_{kj} g_{is}`, as a
/// tensor with tuple order `(i, j, k)`.
pub fn metricity_defect(lower: &Tensor, gamma: &Tensor) -> Tensor {
    let n = lower.coords();
    Tensor::from_fn(&[Slot::DOWN, Slot::DOWN, Slot::DOWN], n, 0, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let mut acc = lower.get(&[i, j]).diff(k);
        for s in 0..n {
            acc = &acc - &(gamma.get(&[s, k, i]) * lower.get(&[s, j]));
            acc = &acc - &(gamma.get(&[s, k, j]) * lower.get(&[i, s]));
        }
        acc
    })
}

/// `R^i_{jkl} = ∂_k Γ^i_{lj} − ∂_l Γ^i_{kj} + Γ^i_{ks} Γ^s_{lj} − Γ^i_{ls} Γ^s_{kj}`
pub fn curvature(gamma: &Tensor) -> Tensor {
    let n = gamma.coords();
    let half = Tensor::from_fn(&RIEMANN, n, 0, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        if k >= l {
            return Expr::zero();
        }
        let mut acc = &gamma.get(&[i, l, j]).diff(k) - &gamma.get(&[i, k, j]).diff(l);
        for s in 0..n {
            acc = &acc + &(gamma.get(&[i, k, s]) * gamma.get(&[s, l, j]));
            acc = &acc - &(gamma.get(&[i, l, s]) * gamma.get(&[s, k, j]));
        }
        acc
    });
    let mut r = half.clone();
    for (ix, e) in half.iter() {
        if ix[2] < ix[3] {
            r.set(&[ix[0], ix[1], ix[3], ix[2]], -e.clone());
        }
    }
    r
}

/// `b^{ij}_k = −g^{is} Γ^j_{sk}`
pub fn b_from_connection(upper: &Tensor, gamma: &Tensor) -> Tensor {
    let n = upper.coords();
    Tensor::from_fn(&B_SLOTS, n, 0, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        -(0..n).map(|s| upper.get(&[i, s]) * gamma.get(&[j, s, k])).sum::<Expr>()
    })
}

/// `Γ^k_{ij} = −g_{is} b^{sk}_j`
pub fn connection_from_b(lower: &Tensor, b: &Tensor) -> Tensor {
    let n = lower.coords();
    Tensor::from_fn(&GAMMA, n, 0, |ix| {
        let (k, i, j) = (ix[0], ix[1], ix[2]);
        -(0..n).map(|s| lower.get(&[i, s]) * b.get(&[s, k, j])).sum::<Expr>()
    })
}

/// `b`-coefficients of the one-dimensional bracket defined by a metric.
/// The identity `∂_k g^{ij} = b^{ij}_k + b^{ji}_k` is checked before return.
pub fn b_from_metric(upper: &Tensor) -> Result<Tensor> {
    let b = Metric::new(upper.clone())?.b_coefficients();
    let residual = skew_residual(upper, &b);
    if let Some((ix, _)) = residual.first_nonzero() {
        return Err(Error::Inconsistent(format!("derived b violates ∂g = b + bᵀ at {:?}", ix)));
    }
    Ok(b)
}

/// `∂_k g^{ij} − b^{ij}_k − b^{ji}_k`
pub fn skew_residual(upper: &Tensor, b: &Tensor) -> Tensor {
    Tensor::from_fn(&B_SLOTS, upper.coords(), 0, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        &(&upper.get(&[i, j]).diff(k) - b.get(&[i, j, k])) - b.get(&[j, i, k])
    })
}

/// `∇_r T^{ijk} = ∂_r T^{ijk} + Γ^i_{rs} T^{sjk} + Γ^j_{rs} T^{isk} + Γ^k_{rs} T^{ijs}`
pub fn covariant_derivative_3up(t: &Tensor, gamma: &Tensor) -> Result<Tensor> {
    if t.slots() != [Slot::UP, Slot::UP, Slot::UP] || gamma.slots() != GAMMA || t.coords() != gamma.coords() {
        return Err(Error::ShapeMismatch);
    }
    let n = t.coords();
    Ok(Tensor::from_fn(&[Slot::UP, Slot::UP, Slot::UP, Slot::DOWN], n, 0, |ix| {
        let (i, j, k, r) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = t.get(&[i, j, k]).diff(r);
        for s in 0..n {
            acc = &acc + &(gamma.get(&[i, r, s]) * t.get(&[s, j, k]));
            acc = &acc + &(gamma.get(&[j, r, s]) * t.get(&[i, s, k]));
            acc = &acc + &(gamma.get(&[k, r, s]) * t.get(&[i, j, s]));
        }
        acc
    }))
}
