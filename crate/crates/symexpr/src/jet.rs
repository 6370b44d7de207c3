use crate::poly::{rational_to_f64, Poly};
use crate::ExprError;

/// Second-order truncated Taylor expansion of a scalar function of `n`
/// variables: value, gradient and symmetric Hessian (packed upper triangle).
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    value: f64,
    gradient: Vec<f64>,
    hessian: Vec<f64>,
}

fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl Jet2 {
    pub fn constant(value: f64, n: usize) -> Self {
        Jet2 { value, gradient: vec![0.0; n], hessian: vec![0.0; packed_len(n)] }
    }

    pub fn variable(index: usize, value: f64, n: usize) -> Self {
        let mut j = Self::constant(value, n);
        j.gradient[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn gradient(&self) -> &[f64] {
        &self.gradient
    }

    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        self.hessian[packed_index(self.dim(), i, j)]
    }

    pub fn hessian_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.hessian(i, j)).collect()).collect()
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            gradient: self.gradient.iter().zip(&o.gradient).map(|(a, b)| a + b).collect(),
            hessian: self.hessian.iter().zip(&o.hessian).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Jet2) -> Jet2 {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value * c,
            gradient: self.gradient.iter().map(|a| a * c).collect(),
            hessian: self.hessian.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let n = self.dim();
        let mut out = Jet2::constant(self.value * o.value, n);
        for i in 0..n {
            out.gradient[i] = self.value * o.gradient[i] + o.value * self.gradient[i];
        }
        for i in 0..n {
            for j in i..n {
                let k = packed_index(n, i, j);
                out.hessian[k] = self.value * o.hessian[k]
                    + o.value * self.hessian[k]
                    + self.gradient[i] * o.gradient[j]
                    + self.gradient[j] * o.gradient[i];
            }
        }
        out
    }

    /// Applies a scalar function given its value and first two derivatives at
    /// `self.value`.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Jet2 {
        let n = self.dim();
        let mut out = Jet2::constant(f, n);
        for i in 0..n {
            out.gradient[i] = df * self.gradient[i];
        }
        for i in 0..n {
            for j in i..n {
                let k = packed_index(n, i, j);
                out.hessian[k] = df * self.hessian[k] + d2f * self.gradient[i] * self.gradient[j];
            }
        }
        out
    }

    pub fn powi(&self, e: u32) -> Jet2 {
        let x = self.value;
        let e_f = e as f64;
        let f = x.powi(e as i32);
        let df = if e >= 1 { e_f * x.powi(e as i32 - 1) } else { 0.0 };
        let d2f = if e >= 2 { e_f * (e_f - 1.0) * x.powi(e as i32 - 2) } else { 0.0 };
        self.chain(f, df, d2f)
    }

    pub fn recip(&self) -> Result<Jet2, ExprError> {
        let x = self.value;
        if x.abs() <= 1e-12 {
            return Err(ExprError::Pole);
        }
        Ok(self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)))
    }

    pub fn checked_div(&self, o: &Jet2) -> Result<Jet2, ExprError> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn eval_poly(p: &Poly, point: &[f64]) -> Jet2 {
        let n = point.len();
        let vars: Vec<Jet2> = (0..n).map(|i| Jet2::variable(i, point[i], n)).collect();
        let mut acc = Jet2::constant(0.0, n);
        for (m, c) in p.terms() {
            let mut t = Jet2::constant(rational_to_f64(c), n);
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t = t.mul(&vars[i].powi(e));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_layout() {
        assert_eq!(packed_index(3, 0, 0), 0);
        assert_eq!(packed_index(3, 0, 2), 2);
        assert_eq!(packed_index(3, 1, 1), 3);
        assert_eq!(packed_index(3, 2, 1), 4);
        assert_eq!(packed_index(3, 2, 2), 5);
    }

    #[test]
    fn reciprocal_second_derivative() {
        // 1/x at x = 2: 1/2, -1/4, 2/8
        let j = Jet2::variable(0, 2.0, 1).recip().unwrap();
        assert_eq!(j.value(), 0.5);
        assert_eq!(j.gradient()[0], -0.25);
        assert_eq!(j.hessian(0, 0), 0.25);
    }
}
