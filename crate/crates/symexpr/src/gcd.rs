//! Multivariate polynomial gcd over the rationals.
//!
//! Recursive content / primitive-part scheme: the polynomials are viewed as
//! univariate in their highest variable with coefficients in the remaining
//! variables, contents are split off recursively and the primitive parts go
//! through a primitive pseudo-remainder sequence.

use crate::monomial::Monomial;
use crate::poly::Poly;
use crate::Rational;
use num_traits::One;

/// Greatest common divisor, normalized to coprime integer coefficients with
/// a positive leading coefficient. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.primitive();
    }
    if b.is_zero() {
        return a.primitive();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.is_monomial() {
        return monomial_gcd(a, b);
    }
    if b.is_monomial() {
        return monomial_gcd(b, a);
    }
    let pa = a.primitive();
    let pb = b.primitive();
    if pa == pb {
        return pa;
    }
    let var = pa.main_var().max(pb.main_var()).expect("non-constant");
    if !pa.involves(var) {
        return gcd(&pa, &content_in(&pb, var));
    }
    if !pb.involves(var) {
        return gcd(&content_in(&pa, var), &pb);
    }
    // cheap trial divisions catch the common "one divides the other" case
    if pa.total_degree() <= pb.total_degree() {
        if pb.div_exact(&pa).is_some() {
            return pa;
        }
    } else if pa.div_exact(&pb).is_some() {
        return pb;
    }
    if certainly_coprime(&pa, &pb) {
        return Poly::one();
    }
    if let Some(h) = heuristic::gcd(&pa, &pb) {
        return h.primitive();
    }
    let ca = content_in(&pa, var);
    let cb = content_in(&pb, var);
    let ppa = pa.div_exact(&ca).expect("content divides");
    let ppb = pb.div_exact(&cb).expect("content divides");
    let c = gcd(&ca, &cb);
    let g = subresultant_gcd(ppa, ppb, var);
    (&c * &g).primitive()
}

fn monomial_gcd(mono: &Poly, other: &Poly) -> Poly {
    let (m, _) = mono.leading_term().expect("monomial is nonzero");
    let mut g = m.clone();
    for (t, _) in other.terms() {
        g = g.gcd(t);
        if g.is_one() {
            break;
        }
    }
    Poly::monomial(g, Rational::one())
}

/// gcd of the coefficients of `p` viewed as a polynomial in `var`.
pub fn content_in(p: &Poly, var: usize) -> Poly {
    let mut coeffs: Vec<Poly> = p.coeffs_in(var).into_iter().filter(|c| !c.is_zero()).collect();
    // small coefficients first keeps the running gcd cheap
    coeffs.sort_by_key(|c| (c.total_degree(), c.len()));
    let mut iter = coeffs.into_iter();
    let mut g = match iter.next() {
        Some(c) => c.primitive(),
        None => return Poly::zero(),
    };
    for c in iter {
        if g.is_one() {
            break;
        }
        g = gcd(&g, &c);
    }
    g
}

fn primitive_part_in(p: &Poly, var: usize) -> Poly {
    let c = content_in(p, var);
    p.div_exact(&c).expect("content divides").primitive()
}

/// Subresultant remainder sequence for `a`, `b` primitive in `var`; returns
/// the gcd's primitive part with respect to `var`.
fn subresultant_gcd(a: Poly, b: Poly, var: usize) -> Poly {
    let (mut f, mut g) = if a.degree_in(var) >= b.degree_in(var) { (a, b) } else { (b, a) };
    let mut lc_prev = Poly::one();
    let mut h = Poly::one();
    loop {
        let delta = f.degree_in(var) - g.degree_in(var);
        let r = pseudo_rem(&f, &g, var);
        if r.is_zero() {
            return primitive_part_in(&g, var);
        }
        if r.degree_in(var) == 0 {
            return Poly::one();
        }
        let divisor = &lc_prev * &h.pow(delta);
        f = g;
        g = r.div_exact(&divisor).expect("subresultant division is exact");
        lc_prev = leading_coeff_in(&f, var);
        h = if delta == 0 {
            h
        } else {
            let num = lc_prev.pow(delta);
            num.div_exact(&h.pow(delta - 1)).expect("subresultant division is exact")
        };
    }
}

fn leading_coeff_in(p: &Poly, var: usize) -> Poly {
    p.coeffs_in(var).pop().expect("nonzero")
}

/// Exact pseudo-remainder: `lc(g)^(deg f - deg g + 1) * f mod g`.
fn pseudo_rem(f: &Poly, g: &Poly, var: usize) -> Poly {
    let dg = g.degree_in(var);
    let lc_g = leading_coeff_in(g, var);
    let mut steps = f.degree_in(var) - dg + 1;
    let mut r = f.clone();
    while !r.is_zero() && r.degree_in(var) >= dg {
        let dr = r.degree_in(var);
        let lc_r = leading_coeff_in(&r, var);
        let shift = Monomial::var_pow(var, dr - dg);
        let t = &lc_r * &g.mul_monomial(&shift, &Rational::one());
        r = &(&lc_g * &r) - &t;
        steps -= 1;
    }
    if steps > 0 && !r.is_zero() {
        r = &r * &lc_g.pow(steps);
    }
    r
}

/// Modular images used to certify coprimality cheaply. A specialization of
/// all variables but one cannot lower the degree of the gcd in that variable
/// as long as both leading coefficients survive, so a constant image gcd
/// proves the true gcd does not involve the variable.
mod image {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::{Signed, ToPrimitive};

    const P: u64 = (1 << 61) - 1;

    fn mulm(a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % P as u128) as u64
    }

    fn powm(mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = mulm(r, a);
            }
            a = mulm(a, a);
            e >>= 1;
        }
        r
    }

    fn invm(a: u64) -> u64 {
        powm(a, P - 2)
    }

    fn reduce(c: &Rational) -> Option<u64> {
        let m = BigInt::from(P);
        let red = |x: &BigInt| -> u64 {
            let r = ((x % &m) + &m) % &m;
            r.abs().to_u64().expect("reduced")
        };
        let d = red(c.denom());
        if d == 0 {
            return None;
        }
        Some(mulm(red(c.numer()), invm(d)))
    }

    /// Univariate image in `var`, all other variables set from `point`.
    fn specialize(p: &Poly, var: usize, point: &[u64]) -> Option<Vec<u64>> {
        let mut out = vec![0u64; p.degree_in(var) as usize + 1];
        for (m, c) in p.terms() {
            let mut t = reduce(c)?;
            for (i, &e) in m.exponents().iter().enumerate() {
                if i != var && e > 0 {
                    t = mulm(t, powm(point[i], e as u64));
                }
            }
            let k = m.exp(var) as usize;
            out[k] = (out[k] + t) % P;
        }
        Some(out)
    }

    fn trim(v: &mut Vec<u64>) {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    }

    fn degree_of_gcd(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
        trim(&mut a);
        trim(&mut b);
        while !(b.len() == 1 && b[0] == 0) {
            // a mod b
            let inv = invm(*b.last().unwrap());
            while a.len() >= b.len() && !(a.len() == 1 && a[0] == 0) {
                let shift = a.len() - b.len();
                let q = mulm(*a.last().unwrap(), inv);
                for (i, &bc) in b.iter().enumerate() {
                    a[i + shift] = (a[i + shift] + P - mulm(q, bc)) % P;
                }
                a.pop();
                if a.is_empty() {
                    a.push(0);
                }
                trim(&mut a);
            }
            std::mem::swap(&mut a, &mut b);
        }
        a.len() - 1
    }

    /// `Some(true)` when the images prove `gcd(a, b)` is free of `var`.
    pub fn free_of(a: &Poly, b: &Poly, var: usize, seed: u64) -> bool {
        let width = a.width().max(b.width());
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(var as u64 + 1);
        let point: Vec<u64> = (0..width)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state % P
            })
            .collect();
        let (Some(ia), Some(ib)) = (specialize(a, var, &point), specialize(b, var, &point)) else {
            return false;
        };
        let da = a.degree_in(var) as usize;
        let db = b.degree_in(var) as usize;
        if ia.len() != da + 1 || ib.len() != db + 1 || ia[da] == 0 || ib[db] == 0 {
            return false;
        }
        degree_of_gcd(ia, ib) == 0
    }
}

/// Heuristic gcd: evaluate the main variable at a large integer, recurse
/// down to integer gcds, lift the result back by balanced radix expansion
/// and accept it only if it divides both inputs.
mod heuristic {
    use super::*;
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{Signed, Zero};

    fn int_of(c: &Rational) -> &BigInt {
        debug_assert!(c.is_integer());
        c.numer()
    }

    fn max_norm(p: &Poly) -> BigInt {
        p.terms().map(|(_, c)| int_of(c).abs()).max().unwrap_or_else(BigInt::zero)
    }

    fn int_content(p: &Poly) -> BigInt {
        p.terms().fold(BigInt::zero(), |acc, (_, c)| acc.gcd(int_of(c)))
    }

    fn eval_at(p: &Poly, var: usize, x: &BigInt) -> Poly {
        let mut powers: Vec<BigInt> = vec![BigInt::from(1)];
        Poly::from_terms(p.terms().map(|(m, c)| {
            let e = m.exp(var) as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap() * x;
                powers.push(next);
            }
            (m.with_exp(var, 0), c * Rational::from_integer(powers[e].clone()))
        }))
    }

    fn symmetric_mod(c: &BigInt, x: &BigInt) -> BigInt {
        let mut r = c.mod_floor(x);
        if &r * 2 > *x {
            r -= x;
        }
        r
    }

    fn interpolate(h: &Poly, var: usize, x: &BigInt) -> Poly {
        let mut rest = h.clone();
        let mut coeffs = Vec::new();
        let xr = Rational::from_integer(x.clone());
        while !rest.is_zero() {
            let digit = Poly::from_terms(
                rest.terms().map(|(m, c)| (m.clone(), Rational::from_integer(symmetric_mod(int_of(c), x)))),
            );
            rest = (&rest - &digit).scale(&xr.recip());
            coeffs.push(digit);
            if coeffs.len() > 64 {
                break;
            }
        }
        Poly::from_coeffs_in(var, &coeffs)
    }

    pub fn gcd(f: &Poly, g: &Poly) -> Option<Poly> {
        if f.is_zero() {
            return Some(g.primitive());
        }
        if g.is_zero() {
            return Some(f.primitive());
        }
        let cf = int_content(f);
        let cg = int_content(g);
        let c = Rational::from_integer(cf.gcd(&cg));
        if f.is_constant() || g.is_constant() {
            return Some(Poly::constant(c));
        }
        let f = f.scale(&Rational::from_integer(cf).recip());
        let g = g.scale(&Rational::from_integer(cg).recip());
        let var = f.main_var().max(g.main_var()).expect("non-constant");
        let nf = max_norm(&f);
        let ng = max_norm(&g);
        let b: BigInt = 2 * nf.clone().min(ng.clone()) + 29;
        let lf = int_of(f.leading_coeff().unwrap()).abs();
        let lg = int_of(g.leading_coeff().unwrap()).abs();
        let mut x = std::cmp::max(std::cmp::min(b.clone(), 99 * b.sqrt()), 2 * std::cmp::min(&nf / &lf, &ng / &lg) + 2);
        for _ in 0..6 {
            let ff = eval_at(&f, var, &x);
            let gg = eval_at(&g, var, &x);
            if !ff.is_zero() && !gg.is_zero() {
                if let Some(h) = gcd(&ff, &gg) {
                    let cand = interpolate(&h, var, &x).primitive();
                    if !cand.is_zero() && f.div_exact(&cand).is_some() && g.div_exact(&cand).is_some() {
                        return Some(cand.scale(&c));
                    }
                }
            }
            x = (&x * x.sqrt().sqrt() * 73794) / 27011;
        }
        None
    }
}

/// Cheap certificate that `gcd(a, b)` is a constant.
fn certainly_coprime(a: &Poly, b: &Poly) -> bool {
    let width = a.width().max(b.width());
    (0..width).all(|v| !(a.involves(v) && b.involves(v)) || image::free_of(a, b, v, 0x5EED))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Poly {
        Poly::var(i)
    }

    #[test]
    fn coprime_gives_one() {
        let a = &x(0) + &x(1);
        let b = &x(0) - &x(1);
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn common_factor_recovered() {
        let f = &(&x(0) * &x(1)) + &Poly::from_int(1);
        let a = &f * &(&x(0) + &x(2));
        let b = &f * &(&x(1) - &Poly::from_int(3));
        assert_eq!(gcd(&a, &b), f);
    }

    #[test]
    fn content_factor_in_lower_variable() {
        let c = &x(0) + &Poly::from_int(2);
        let a = &c * &(&x(1) * &x(1));
        let b = &c.pow(2) * &(&x(1) + &Poly::one());
        assert_eq!(gcd(&a, &b), c);
    }

    #[test]
    fn monomial_case() {
        let a = &(&x(0) * &x(0)) * &x(1);
        let b = &(&(&x(0) * &x(1)) * &x(1)) + &(&x(0) * &x(0)).scale(&Rational::from_integer(3.into()));
        assert_eq!(gcd(&a, &b), x(0));
    }

    #[test]
    fn normalization() {
        let a = (&x(0) - &x(1)).scale(&Rational::from_integer((-6).into()));
        let g = gcd(&a, &(&a * &x(2)));
        // positive leading coefficient in graded-lex with x1 > x0
        assert_eq!(g, &x(1) - &x(0));
    }
}
