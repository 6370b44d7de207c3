use std::collections::HashMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::gcd::gcd;
use crate::jet::Jet2;
use crate::poly::{rational_content, Poly};
use crate::{ExprError, Rational};

/// Exact rational function in the variables `x_0, x_1, ...`.
///
/// Canonical form: `num / den` with `gcd(num, den) = 1`, both having integer
/// coefficients whose joint content is 1, and `den` having a positive leading
/// coefficient. Equal rational functions therefore have identical
/// representations and `==` is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Fraction>);

#[derive(Clone, PartialEq, Eq, Hash)]
struct Fraction {
    num: Poly,
    den: Poly,
}

impl Expr {
    pub fn zero() -> Self {
        Expr(Arc::new(Fraction { num: Poly::zero(), den: Poly::one() }))
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(c: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(c)))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_rational(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_rational(c: Rational) -> Self {
        Expr(Arc::new(Fraction {
            num: Poly::constant(Rational::from_integer(c.numer().clone())),
            den: Poly::constant(Rational::from_integer(c.denom().clone())),
        }))
    }

    pub fn var(index: usize) -> Self {
        Self::from_poly(Poly::var(index))
    }

    pub fn from_poly(p: Poly) -> Self {
        Self::from_coprime(p, Poly::one())
    }

    /// Builds `num / den`, reducing to canonical form.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = gcd(&num, &den);
        if g.is_one() {
            Ok(Self::from_coprime(num, den))
        } else {
            let n = num.div_exact(&g).expect("gcd divides numerator");
            let d = den.div_exact(&g).expect("gcd divides denominator");
            Ok(Self::from_coprime(n, d))
        }
    }

    /// Scales an already coprime pair into canonical form.
    fn from_coprime(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let mut c = rational_content(num.terms().chain(den.terms()).map(|(_, c)| c));
        if den.leading_coeff().is_some_and(|l| l.is_negative()) {
            c = -c;
        }
        if c.is_one() {
            Expr(Arc::new(Fraction { num, den }))
        } else {
            let inv = c.recip();
            Expr(Arc::new(Fraction { num: num.scale(&inv), den: den.scale(&inv) }))
        }
    }

    pub fn num(&self) -> &Poly {
        &self.0.num
    }

    pub fn den(&self) -> &Poly {
        &self.0.den
    }

    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.num.is_one() && self.0.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.0.num.is_constant() && self.0.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        let n = self.0.num.constant_value()?;
        let d = self.0.den.constant_value()?;
        Some(n / d)
    }

    /// True when the denominator is a constant.
    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_constant()
    }

    /// The polynomial `num / den` when the denominator is constant.
    pub fn as_poly(&self) -> Option<Poly> {
        let d = self.0.den.constant_value()?;
        Some(self.0.num.scale(&d.recip()))
    }

    pub fn involves(&self, var: usize) -> bool {
        self.0.num.involves(var) || self.0.den.involves(var)
    }

    /// One past the highest variable index present.
    pub fn width(&self) -> usize {
        self.0.num.width().max(self.0.den.width())
    }

    pub fn checked_div(&self, rhs: &Expr) -> Result<Expr, ExprError> {
        if rhs.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(self * &rhs.recip_unchecked())
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(self.recip_unchecked())
    }

    fn recip_unchecked(&self) -> Expr {
        Self::from_coprime(self.0.den.clone(), self.0.num.clone())
    }

    pub fn pow(&self, k: u32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        Self::from_coprime(self.0.num.pow(k), self.0.den.pow(k))
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Self::from_coprime(self.0.num.scale(c), self.0.den.clone())
    }

    /// Exact partial derivative with respect to `x_var`.
    pub fn diff(&self, var: usize) -> Expr {
        let Fraction { num, den } = &*self.0;
        if !num.involves(var) && !den.involves(var) {
            return Expr::zero();
        }
        if den.is_constant() {
            return Self::from_coprime(num.diff(var), den.clone());
        }
        let dn = num.diff(var);
        let dd = den.diff(var);
        let top = &(&dn * den) - &(num * &dd);
        if top.is_zero() {
            return Expr::zero();
        }
        // any common factor of top and den^2 divides den
        let g = gcd(&top, den);
        if g.is_one() {
            Self::from_coprime(top, den.pow(2))
        } else {
            let t = top.div_exact(&g).expect("gcd divides");
            let d = &den.div_exact(&g).expect("gcd divides") * den;
            Expr::from_parts(t, d).expect("nonzero denominator")
        }
    }

    /// Replaces each bound variable `x_i` by `bindings[i]`.
    pub fn substitute(&self, bindings: &HashMap<usize, Expr>) -> Result<Expr, ExprError> {
        let relevant = |p: &Poly| bindings.keys().any(|&v| p.involves(v));
        if !relevant(&self.0.num) && !relevant(&self.0.den) {
            return Ok(self.clone());
        }
        let num = substitute_poly(&self.0.num, bindings);
        let den = substitute_poly(&self.0.den, bindings);
        num.checked_div(&den)
    }

    /// Substitutes `bindings[i]` for `x_i` for every `i` in range.
    pub fn compose(&self, bindings: &[Expr]) -> Result<Expr, ExprError> {
        let map = bindings.iter().cloned().enumerate().collect();
        self.substitute(&map)
    }

    pub fn eval_rational(&self, point: &[Rational]) -> Result<Rational, ExprError> {
        self.check_width(point.len())?;
        let d = self.0.den.eval_rational(point);
        if d.is_zero() {
            return Err(ExprError::Pole);
        }
        Ok(self.0.num.eval_rational(point) / d)
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, ExprError> {
        self.check_width(point.len())?;
        let d = self.0.den.eval_f64(point);
        if d.abs() <= 1e-12 {
            return Err(ExprError::Pole);
        }
        Ok(self.0.num.eval_f64(point) / d)
    }

    /// Value, gradient and Hessian at `point` by order-2 Taylor arithmetic.
    pub fn eval_jet(&self, point: &[f64]) -> Result<Jet2, ExprError> {
        self.check_width(point.len())?;
        let num = Jet2::eval_poly(&self.0.num, point);
        let den = Jet2::eval_poly(&self.0.den, point);
        num.checked_div(&den)
    }

    fn check_width(&self, n: usize) -> Result<(), ExprError> {
        let w = self.width();
        if w > n {
            return Err(ExprError::UnknownVariable(w - 1));
        }
        Ok(())
    }

    /// Renders as expanded numerator over expanded denominator.
    pub fn render(&self, names: &[String]) -> String {
        let Fraction { num, den } = &*self.0;
        if den.is_one() {
            return num.render(names);
        }
        let wrap = |p: &Poly| {
            let s = p.render(names);
            if p.len() > 1 {
                format!("({s})")
            } else {
                s
            }
        };
        let n = if num.len() > 1 || num.leading_term().is_some_and(|(m, _)| !m.is_one()) {
            wrap(num)
        } else {
            num.render(names)
        };
        format!("{}/{}", n, wrap(den))
    }
}

fn substitute_poly(p: &Poly, bindings: &HashMap<usize, Expr>) -> Expr {
    // polynomial bindings stay in the polynomial ring until the end
    let poly_bindings: Option<HashMap<usize, Poly>> =
        bindings.iter().map(|(&k, e)| e.as_poly().map(|p| (k, p))).collect();
    if let Some(pb) = poly_bindings {
        let mut cache: HashMap<(usize, u32), Poly> = HashMap::new();
        let mut acc = Poly::zero();
        for (m, c) in p.terms() {
            let mut t = Poly::constant(c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let f =
                    cache.entry((i, e)).or_insert_with(|| pb.get(&i).cloned().unwrap_or_else(|| Poly::var(i)).pow(e));
                t = &t * f;
            }
            acc = &acc + &t;
        }
        return Expr::from_poly(acc);
    }
    let mut cache: HashMap<(usize, u32), Expr> = HashMap::new();
    let mut acc = Expr::zero();
    for (m, c) in p.terms() {
        let mut t = Expr::from_rational(c.clone());
        for (i, &e) in m.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let f =
                cache.entry((i, e)).or_insert_with(|| bindings.get(&i).cloned().unwrap_or_else(|| Expr::var(i)).pow(e));
            t = &t * &*f;
        }
        acc = &acc + &t;
    }
    acc
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl From<i64> for Expr {
    fn from(c: i64) -> Self {
        Expr::from_int(c)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::from_rational(c)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.width()).map(|i| format!("u{}", i + 1)).collect();
        f.write_str(&self.render(&names))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b) = (&*self.0, &*rhs.0);
        if a.den == b.den {
            let num = &a.num + &b.num;
            if a.den.is_constant() {
                return Expr::from_coprime(num, a.den.clone());
            }
            return Expr::from_parts(num, a.den.clone()).expect("nonzero denominator");
        }
        if a.den.is_constant() && b.den.is_constant() {
            let num = &a.num.scale(&b.den.constant_value().unwrap()) + &b.num.scale(&a.den.constant_value().unwrap());
            let den = a.den.scale(&b.den.constant_value().unwrap());
            return Expr::from_coprime(num, den);
        }
        // Henrici: only factors of gcd(den_a, den_b) can cancel
        let g = gcd(&a.den, &b.den);
        let da = a.den.div_exact(&g).expect("gcd divides");
        let db = b.den.div_exact(&g).expect("gcd divides");
        let num = &(&a.num * &db) + &(&b.num * &da);
        let den = &a.den * &db;
        if num.is_zero() {
            return Expr::zero();
        }
        let h = gcd(&num, &g);
        if h.is_one() {
            Expr::from_coprime(num, den)
        } else {
            Expr::from_coprime(num.div_exact(&h).expect("gcd divides"), den.div_exact(&h).expect("gcd divides"))
        }
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return rhs.clone();
        }
        if rhs.is_one() {
            return self.clone();
        }
        let (a, b) = (&*self.0, &*rhs.0);
        let g1 = gcd(&a.num, &b.den);
        let g2 = gcd(&b.num, &a.den);
        let cut = |p: &Poly, g: &Poly| if g.is_one() { p.clone() } else { p.div_exact(g).expect("gcd divides") };
        let num = &cut(&a.num, &g1) * &cut(&b.num, &g2);
        let den = &cut(&a.den, &g2) * &cut(&b.den, &g1);
        Expr::from_coprime(num, den)
    }
}

/// Panics on a zero divisor, like integer division; see [`Expr::checked_div`].
impl<'a> Div<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        self.checked_div(rhs).expect("division by the zero expression")
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr(Arc::new(Fraction { num: -&self.0.num, den: self.0.den.clone() }))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Expr> for &'a Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |acc, e| &acc + &e)
    }
}

impl<'a> Sum<&'a Expr> for Expr {
    fn sum<I: Iterator<Item = &'a Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |acc, e| &acc + e)
    }
}
