//! Truncated power series in one variable with f64 coefficients.
//!
//! All operations truncate at a fixed length chosen by the caller; a series of
//! length `L` represents `c₀ + c₁ t + … + c_{L-1} t^{L-1} + O(t^L)`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    c: Vec<f64>,
}

impl Series {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        Series { c: coeffs }
    }

    pub fn zero(len: usize) -> Self {
        Series { c: vec![0.0; len] }
    }

    pub fn constant(value: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        c[0] = value;
        Series { c }
    }

    /// The variable `t` itself.
    pub fn identity(len: usize) -> Self {
        let mut c = vec![0.0; len];
        if len > 1 {
            c[1] = 1.0;
        }
        Series { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn coeff(&self, j: usize) -> f64 {
        self.c.get(j).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn truncate(&self, len: usize) -> Self {
        let mut c = self.c.clone();
        c.resize(len, 0.0);
        Series { c }
    }

    pub fn scale(&self, s: f64) -> Self {
        Series {
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    /// Multiplies by t^m (shifting coefficients up, truncating at the length).
    pub fn shift_up(&self, m: usize) -> Self {
        let mut c = vec![0.0; self.len()];
        if m < self.len() {
            c[m..].copy_from_slice(&self.c[..self.len() - m]);
        }
        Series { c }
    }

    /// Divides by t^m; panics if any of the dropped leading coefficients is
    /// not (numerically) zero.
    pub fn shift_down(&self, m: usize, tol: f64) -> Self {
        for j in 0..m.min(self.len()) {
            assert!(
                self.c[j].abs() <= tol,
                "shift_down would drop nonzero coefficient {} at order {}",
                self.c[j],
                j
            );
        }
        let mut c = vec![0.0; self.len()];
        for j in 0..self.len() - m {
            c[j] = self.coeff(j + m);
        }
        Series { c }
    }

    pub fn derivative(&self) -> Self {
        let mut c = vec![0.0; self.len()];
        for j in 1..self.len() {
            c[j - 1] = self.c[j] * j as f64;
        }
        Series { c }
    }

    /// Term-by-term antiderivative with zero constant term.
    pub fn integral(&self) -> Self {
        let mut c = vec![0.0; self.len()];
        for j in 0..self.len() - 1 {
            c[j + 1] = self.c[j] / (j + 1) as f64;
        }
        Series { c }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Self {
        let a0 = self.c[0];
        assert!(a0 != 0.0, "series inverse needs nonzero constant term");
        let mut c = vec![0.0; self.len()];
        c[0] = 1.0 / a0;
        for j in 1..self.len() {
            let mut acc = 0.0;
            for i in 1..=j {
                acc += self.coeff(i) * c[j - i];
            }
            c[j] = -acc / a0;
        }
        Series { c }
    }

    pub fn div(&self, rhs: &Series) -> Self {
        self * &rhs.inverse()
    }

    /// exp of the series (constant term may be arbitrary).
    pub fn exp(&self) -> Self {
        let mut c = vec![0.0; self.len()];
        c[0] = self.c[0].exp();
        // b' = a' b  =>  j b_j = Σ_{i=1..j} i a_i b_{j-i}
        for j in 1..self.len() {
            let mut acc = 0.0;
            for i in 1..=j {
                acc += i as f64 * self.coeff(i) * c[j - i];
            }
            c[j] = acc / j as f64;
        }
        Series { c }
    }

    /// log of the series; requires a positive constant term.
    pub fn log(&self) -> Self {
        let a0 = self.c[0];
        assert!(a0 > 0.0, "series log needs positive constant term");
        // (log a)' = a'/a, integrated term by term.
        let mut res = self.derivative().div(self).integral();
        res.c[0] = a0.ln();
        res
    }

    /// Real power `self^p` via exp(p log self); requires positive constant term.
    pub fn powf(&self, p: f64) -> Self {
        self.log().scale(p).exp()
    }

    /// Integer power; negative exponents go through the inverse.
    pub fn powi(&self, p: i64) -> Self {
        if p == 0 {
            return Series::constant(1.0, self.len());
        }
        let base = if p < 0 { self.inverse() } else { self.clone() };
        let mut acc = Series::constant(1.0, self.len());
        for _ in 0..p.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    /// Horner evaluation of the truncated polynomial at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    /// Taylor coefficients of cos t.
    pub fn cos(len: usize) -> Self {
        let mut c = vec![0.0; len];
        for (j, cj) in c.iter_mut().enumerate() {
            if j % 2 == 0 {
                *cj = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 } / factorial_f(j);
            }
        }
        Series { c }
    }

    /// Taylor coefficients of sin t.
    pub fn sin(len: usize) -> Self {
        let mut c = vec![0.0; len];
        for (j, cj) in c.iter_mut().enumerate() {
            if j % 2 == 1 {
                *cj = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 } / factorial_f(j);
            }
        }
        Series { c }
    }
}

fn factorial_f(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let len = self.len().max(rhs.len());
        Series {
            c: (0..len).map(|j| self.coeff(j) + rhs.coeff(j)).collect(),
        }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let len = self.len().max(rhs.len());
        Series {
            c: (0..len).map(|j| self.coeff(j) - rhs.coeff(j)).collect(),
        }
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let len = self.len().max(rhs.len());
        let mut c = vec![0.0; len];
        for i in 0..self.len().min(len) {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..rhs.len().min(len - i) {
                c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Series { c }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Series, b: &Series, tol: f64) {
        for j in 0..a.len().max(b.len()) {
            assert!(
                (a.coeff(j) - b.coeff(j)).abs() < tol,
                "coeff {} differs: {} vs {}",
                j,
                a.coeff(j),
                b.coeff(j)
            );
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let s = Series::new(vec![2.0, -1.0, 0.5, 0.25, -0.125, 1.0]);
        let one = &s * &s.inverse();
        close(&one, &Series::constant(1.0, 6), 1e-14);
    }

    #[test]
    fn exp_log_roundtrip() {
        let s = Series::new(vec![0.7, 0.3, -0.2, 0.1, 0.05, -0.01]);
        close(&s.exp().log(), &s, 1e-13);
    }

    #[test]
    fn sqrt_squares() {
        let s = Series::new(vec![1.0, 0.4, -0.3, 0.2, -0.1, 0.05]);
        let r = s.sqrt();
        close(&(&r * &r), &s, 1e-13);
    }

    #[test]
    fn sin_over_t_matches_known_taylor() {
        let sin = Series::sin(8);
        let v = sin.shift_down(1, 0.0);
        assert!((v.coeff(0) - 1.0).abs() < 1e-15);
        assert!((v.coeff(2) + 1.0 / 6.0).abs() < 1e-15);
        assert!((v.coeff(4) - 1.0 / 120.0).abs() < 1e-15);
    }

    #[test]
    fn powi_matches_powf() {
        let s = Series::new(vec![1.3, 0.2, -0.4, 0.1, 0.0, 0.3]);
        close(&s.powi(-3), &s.powf(-3.0), 1e-11);
    }

    #[test]
    fn eval_horner() {
        let s = Series::new(vec![1.0, 2.0, 3.0]);
        assert!((s.eval(0.5) - (1.0 + 1.0 + 0.75)).abs() < 1e-15);
    }
}
