#![allow(dead_code)]

use dnb_core::{Expr, HydroBracket, Slot, Tensor};
use symexpr::{parse, Vars};

pub fn ex(s: &str, n: usize) -> Expr {
    parse(s, &Vars::coordinates(n)).unwrap()
}

pub fn matrix(rows: &[&[&str]]) -> Tensor {
    let n = rows.len();
    Tensor::matrix(rows.iter().map(|r| r.iter().map(|s| ex(s, n)).collect()).collect(), Slot::UP, Slot::UP).unwrap()
}

pub fn diag(entries: &[&str]) -> Tensor {
    let n = entries.len();
    Tensor::from_fn(&[Slot::UP, Slot::UP], n, 0, |x| if x[0] == x[1] { ex(entries[x[0]], n) } else { Expr::zero() })
}

/// The bracket of vector fields on `Tⁿ` with `N = n`:
/// `g^{ijα} = u^i δ^{jα} + u^j δ^{iα}`, `b^{ijα}_k = δ^i_k δ^{jα}`.
pub fn torus(n: usize) -> HydroBracket {
    dnb_core::LinearBracketData::vector_fields(n).to_bracket()
}

/// The same bracket written out entry by entry, independent of the
/// Lie-algebra layer.
pub fn torus_by_hand(n: usize) -> HydroBracket {
    let g = (0..n)
        .map(|a| {
            Tensor::from_fn(&[Slot::UP, Slot::UP], n, 0, |x| {
                let mut e = Expr::zero();
                if x[1] == a {
                    e = &e + &Expr::var(x[0]);
                }
                if x[0] == a {
                    e = &e + &Expr::var(x[1]);
                }
                e
            })
        })
        .collect();
    let b = (0..n)
        .map(|a| {
            Tensor::from_fn(&[Slot::UP, Slot::UP, Slot::DOWN], n, 0, |x| {
                if x[0] == x[2] && x[1] == a {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            })
        })
        .collect();
    HydroBracket::new(g, b).unwrap()
}

/// Canonical two-component bracket in two dimensions with metrics
/// `diag(1, −1)` and `((2u2, u1+u2), (u1+u2, 2u1))`.
pub fn canonical() -> HydroBracket {
    let g1 = diag(&["1", "-1"]);
    let g2 = matrix(&[&["2*u2", "u1 + u2"], &["u1 + u2", "2*u1"]]);
    let bc2 = [[[0, 1], [2, -1]], [[-1, 2], [1, 0]]];
    let b2 = Tensor::from_fn(&[Slot::UP, Slot::UP, Slot::DOWN], 2, 0, |x| Expr::from_int(bc2[x[0]][x[1]][x[2]]));
    let b1 = Tensor::zeros(&[Slot::UP, Slot::UP, Slot::DOWN], 2, 0);
    HydroBracket::new(vec![g1, g2], vec![b1, b2]).unwrap()
}

pub fn quadratic_change() -> dnb_core::CoordinateChange {
    dnb_core::CoordinateChange::new(vec![ex("(1/2)*(u1^2 - u2^2)", 2), ex("(1/2)*(u1 + u2)", 2)]).unwrap()
}

pub fn constant(metrics: &[&[&str]]) -> HydroBracket {
    HydroBracket::from_metrics(metrics.iter().map(|d| diag(d)).collect()).unwrap()
}
