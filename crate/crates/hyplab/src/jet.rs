//! Second-order jets (value + first two derivatives) used as derivative
//! oracles for the catalog coefficients. Chain/product rules are applied
//! mechanically, so every catalog function gets exact-to-roundoff
//! derivatives without hand calculus.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub fn var(x: f64) -> Self {
        Jet2 { v: x, d1: 1.0, d2: 0.0 }
    }

    pub fn con(c: f64) -> Self {
        Jet2 { v: c, d1: 0.0, d2: 0.0 }
    }

    /// Lift a scalar function with known value/first/second derivative at `self.v`.
    fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        Jet2 {
            v: f,
            d1: df * self.d1,
            d2: ddf * self.d1 * self.d1 + df * self.d2,
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    /// Power with a constant exponent; base must be positive.
    pub fn powf(self, p: f64) -> Self {
        let f = self.v.powf(p);
        self.chain(f, p * f / self.v, p * (p - 1.0) * f / (self.v * self.v))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn is_finite(self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, c: f64) -> Jet2 {
        Jet2 { v: self.v + c, ..self }
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, c: f64) -> Jet2 {
        Jet2 { v: self.v - c, ..self }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        Jet2 { v: self.v * c, d1: self.d1 * c, d2: self.d2 * c }
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, j: Jet2) -> Jet2 {
        j * self
    }
}

impl Add<Jet2> for f64 {
    type Output = Jet2;
    fn add(self, j: Jet2) -> Jet2 {
        j + self
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, j: Jet2) -> Jet2 {
        -j + self
    }
}

/// 4th-order central difference for the first derivative.
pub fn fd4_first<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// 4th-order central difference for the second derivative.
pub fn fd4_second<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn jet_matches_hand_derivatives() {
        // f(t) = sin(ln(1/t)) on t = 0.3
        let t = 0.3f64;
        let j = Jet2::var(t).recip().ln().sin();
        let g = (1.0 / t).ln();
        assert!(close(j.v, g.sin(), 1e-14));
        assert!(close(j.d1, -g.cos() / t, 1e-12));
        assert!(close(j.d2, (g.cos() - g.sin()) / (t * t), 1e-12));
    }

    #[test]
    fn jet_matches_fd() {
        // Example 1.1 time part at a generic point.
        let alpha = 0.5;
        let c = |t: f64| {
            let l = (1.0 / t).ln();
            2.0 + (-l.powf(1.0 - alpha)).exp() * (l.powf(2.0 * alpha) * l.powf(1.0 - alpha).exp()).sin()
        };
        let t = 0.07;
        let l = Jet2::var(t).recip().ln();
        let j = (-l.powf(1.0 - alpha)).exp() * (l.powf(2.0 * alpha) * l.powf(1.0 - alpha).exp()).sin() + 2.0;
        let h = 1e-5 * t;
        assert!(close(j.v, c(t), 1e-13));
        assert!(close(j.d1, fd4_first(c, t, h), 1e-8));
        assert!(close(j.d2, fd4_second(c, t, h), 1e-5));
    }
}
