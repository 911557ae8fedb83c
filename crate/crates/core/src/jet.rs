//! Second-order forward-mode jets and a finite-difference cross-check.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum number of independent variables (real chart dimension).
pub const MAX_VARS: usize = 8;
const HESS_LEN: usize = MAX_VARS * (MAX_VARS + 1) / 2;

#[inline]
pub fn hess_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * (2 * MAX_VARS - a - 1) / 2 + b
}

/// Scalars the tensor assembly is generic over: plain `f64` or [`Jet`].
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn val(&self) -> f64;
    /// Applies a scalar function given its value and first two derivatives at `self.val()`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self;

    fn sqrt(self) -> Self {
        let s = self.val().sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }
    fn exp(self) -> Self {
        let e = self.val().exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let v = self.val();
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    fn atan(self) -> Self {
        let v = self.val();
        let d = 1.0 / (1.0 + v * v);
        self.chain(v.atan(), d, -2.0 * v * d * d)
    }
    fn powi(self, k: u32) -> Self {
        let mut acc = Self::cst(1.0);
        for _ in 0..k {
            acc = acc * self;
        }
        acc
    }
    fn zero() -> Self {
        Self::cst(0.0)
    }
    /// True only for a constant zero, so products with it may be skipped.
    fn is_exact_zero(&self) -> bool;
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn val(&self) -> f64 {
        *self
    }
    fn chain(self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
}

/// Value, gradient and packed Hessian with respect to up to [`MAX_VARS`] variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; MAX_VARS],
    pub h: [f64; HESS_LEN],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { v, g: [0.0; MAX_VARS], h: [0.0; HESS_LEN] }
    }

    /// The coordinate function `x_i` evaluated at `v`.
    pub fn var(v: f64, i: usize) -> Self {
        assert!(i < MAX_VARS, "jet variable index {i} exceeds {MAX_VARS}");
        let mut j = Jet::constant(v);
        j.g[i] = 1.0;
        j
    }

    pub fn seed(x: &[f64]) -> Vec<Jet> {
        x.iter().enumerate().map(|(i, &v)| Jet::var(v, i)).collect()
    }

    pub fn grad(&self, i: usize) -> f64 {
        self.g[i]
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.h[hess_index(i, j)]
    }
}

impl Real for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn val(&self) -> f64 {
        self.v
    }
    fn is_exact_zero(&self) -> bool {
        self.v == 0.0 && self.g.iter().all(|x| *x == 0.0) && self.h.iter().all(|x| *x == 0.0)
    }
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet::constant(f0);
        for i in 0..MAX_VARS {
            out.g[i] = f1 * self.g[i];
        }
        for i in 0..MAX_VARS {
            for j in i..MAX_VARS {
                let k = hess_index(i, j);
                out.h[k] = f1 * self.h[k] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.v += o.v;
        for (a, b) in self.g.iter_mut().zip(&o.g) {
            *a += b;
        }
        for (a, b) in self.h.iter_mut().zip(&o.h) {
            *a += b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.v = -self.v;
        self.g.iter_mut().for_each(|x| *x = -*x);
        self.h.iter_mut().for_each(|x| *x = -*x);
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::constant(self.v * o.v);
        for i in 0..MAX_VARS {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        for i in 0..MAX_VARS {
            for j in i..MAX_VARS {
                let k = hess_index(i, j);
                out.h[k] = self.h[k] * o.v + self.v * o.h[k] + self.g[i] * o.g[j] + self.g[j] * o.g[i];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let v = o.v;
        self * o.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, c: f64) -> Jet {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, c: f64) -> Jet {
        self.v *= c;
        self.g.iter_mut().for_each(|x| *x *= c);
        self.h.iter_mut().for_each(|x| *x *= c);
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self * (1.0 / c)
    }
}

/// Central difference `∂f/∂x_i`.
pub fn fd_first(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    let mut m = x.to_vec();
    p[i] += h;
    m[i] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}

/// Central difference `∂²f/∂x_i∂x_j`.
pub fn fd_second(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, j: usize, h: f64) -> f64 {
    let at = |di: f64, dj: f64| {
        let mut y = x.to_vec();
        y[i] += di;
        y[j] += dj;
        f(&y)
    };
    if i == j {
        (at(h, 0.0) - 2.0 * f(x) + at(-h, 0.0)) / (h * h)
    } else {
        (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h)
    }
}
