//! Exact symmetric-function algebra and the Vandermonde-type sums used to
//! identify the flat comparison metric.
//!
//! Every `vandermonde_*` function returns the raw left-hand side of its
//! identity. Right-hand sides are computed separately by the caller, so a
//! mismatch points at one side.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::number::{format_rat, int, ExactField, Rat};

/// Largest `l` accepted by the exact identity routines.
pub const MAX_EXACT_L: usize = 12;

/// Univariate polynomial with exact rational coefficients, ascending degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPoly {
    coeffs: Vec<Rat>,
}

impl ExactPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ExactPoly { coeffs }
    }

    pub fn zero() -> Self {
        ExactPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        Self::new(vec![c])
    }

    /// `t - root`
    pub fn linear_root(root: &Rat) -> Self {
        Self::new(vec![-root.clone(), Rat::one()])
    }

    /// `Π (t - r)^m` over `(r, m)` pairs.
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = (&'a Rat, usize)>) -> Self {
        let mut acc = Self::constant(Rat::one());
        for (r, m) in roots {
            let f = Self::linear_root(r);
            for _ in 0..m {
                acc = &acc * &f;
            }
        }
        acc
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn eval(&self, t: &Rat) -> Rat {
        self.eval_in(t)
    }

    /// Horner evaluation in any exact field containing the coefficients.
    pub fn eval_in<F: ExactField>(&self, t: &F) -> F {
        let mut acc = F::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t.clone() + F::from_rat(c.clone());
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + crate::number::rat_to_f64(c))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * int(k as i64))
                .collect(),
        )
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Euclidean division `self = q·divisor + r`.
    pub fn div_rem(&self, divisor: &ExactPoly) -> (ExactPoly, ExactPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rat::zero(); self.coeffs.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let c = rem.last().unwrap() / &lead;
            for (k, dc) in divisor.coeffs.iter().enumerate() {
                rem[shift + k] -= &c * dc;
            }
            quot[shift] = c;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (ExactPoly::new(quot), ExactPoly::new(rem))
    }

    /// Exact quotient, failing on a nonzero remainder.
    pub fn div_exact(&self, divisor: &ExactPoly) -> Result<ExactPoly> {
        let (q, r) = self.div_rem(divisor);
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::InexactDivision(r.to_string()))
        }
    }
}

impl Add for &ExactPoly {
    type Output = ExactPoly;
    fn add(self, o: &ExactPoly) -> ExactPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let zero = Rat::zero();
        ExactPoly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&zero) + o.coeffs.get(k).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Neg for &ExactPoly {
    type Output = ExactPoly;
    fn neg(self) -> ExactPoly {
        ExactPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl Sub for &ExactPoly {
    type Output = ExactPoly;
    fn sub(self, o: &ExactPoly) -> ExactPoly {
        self + &(-o)
    }
}

impl Mul for &ExactPoly {
    type Output = ExactPoly;
    fn mul(self, o: &ExactPoly) -> ExactPoly {
        if self.is_zero() || o.is_zero() {
            return ExactPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ExactPoly::new(out)
    }
}

impl fmt::Display for ExactPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format_rat(c),
                1 => format!("{}*t", format_rat(c)),
                _ => format!("{}*t^{k}", format_rat(c)),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// A point `(ξ_1, …, ξ_l)` with pairwise distinct exact coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct XiVector(Vec<Rat>);

impl XiVector {
    pub fn new(xi: Vec<Rat>) -> Result<Self> {
        for i in 0..xi.len() {
            for j in 0..i {
                if xi[i] == xi[j] {
                    return Err(Error::DuplicateEntries);
                }
            }
        }
        Ok(XiVector(xi))
    }

    pub fn as_slice(&self) -> &[Rat] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks `ξ_1 < α_1 < ξ_2 < … < α_{l-1}` together with `ξ_l > α_l`.
    pub fn check_interleaved(&self, alpha: &[Rat]) -> Result<()> {
        let l = self.0.len();
        if alpha.len() != l {
            return Err(Error::AlphaCount { expected: l, got: alpha.len() });
        }
        for j in 0..l - 1 {
            let lower_ok = j == 0 || self.0[j] > alpha[j - 1];
            if !(lower_ok && self.0[j] < alpha[j]) {
                return Err(Error::NotInterleaved(j));
            }
        }
        if self.0[l - 1] <= alpha[l - 1] {
            return Err(Error::NotInterleaved(l - 1));
        }
        Ok(())
    }

    /// `p_nc(t) = Π (t - ξ_j)` evaluated at `t`.
    pub fn p_nc(&self, t: &Rat) -> Rat {
        self.0.iter().fold(Rat::one(), |acc, x| acc * (t - x))
    }
}

/// All elementary symmetric polynomials `σ_0, …, σ_k` of `xs`.
pub fn elementary_all<F: ExactField>(xs: &[F]) -> Vec<F> {
    let mut e = vec![F::zero(); xs.len() + 1];
    e[0] = F::one();
    for (k, x) in xs.iter().enumerate() {
        for r in (1..=k + 1).rev() {
            e[r] = e[r].clone() + x.clone() * e[r - 1].clone();
        }
    }
    e
}

/// `σ_r(xs)` for any `r`, zero beyond the number of variables.
pub fn sigma<F: ExactField>(xs: &[F], r: usize) -> F {
    elementary_all(xs).get(r).cloned().unwrap_or_else(F::zero)
}

/// `σ_r(ξ_1, …, ξ_l)`, `0 ≤ r ≤ l`.
pub fn elementary_sym(xi: &XiVector, r: usize) -> Result<Rat> {
    let l = xi.len();
    if r > l {
        return Err(Error::IndexOutOfRange { index: r, max: l });
    }
    Ok(elementary_all(xi.as_slice())[r].clone())
}

/// Complete homogeneous symmetric polynomial `h_p` of `xs`.
pub fn complete_of<F: ExactField>(xs: &[F], p: usize) -> F {
    // h_k over the first m variables, built up one variable at a time
    let mut h = vec![F::zero(); p + 1];
    h[0] = F::one();
    for x in xs {
        for k in 1..=p {
            h[k] = h[k].clone() + x.clone() * h[k - 1].clone();
        }
    }
    h[p].clone()
}

pub fn complete_sym(xi: &XiVector, p: usize) -> Rat {
    complete_of(xi.as_slice(), p)
}

/// `Π_{i≠j} (x_j - x_i)` over a slice.
pub fn delta_of<F: ExactField>(xs: &[F], j: usize) -> F {
    xs.iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .fold(F::one(), |acc, (_, x)| acc * (xs[j].clone() - x.clone()))
}

/// `Δ(ξ_j) = Π_{i≠j}(ξ_j - ξ_i)`, 0-based `j`.
pub fn delta(xi: &XiVector, j: usize) -> Result<Rat> {
    if j >= xi.len() {
        return Err(Error::IndexOutOfRange { index: j, max: xi.len().saturating_sub(1) });
    }
    Ok(delta_of(xi.as_slice(), j))
}

fn pow(x: &Rat, e: usize) -> Rat {
    num_traits::pow(x.clone(), e)
}

fn check_pole(xi: &XiVector, alpha: &Rat) -> Result<()> {
    if xi.as_slice().contains(alpha) {
        Err(Error::PoleCollision(format_rat(alpha)))
    } else {
        Ok(())
    }
}

/// `Σ_i ξ_i^{l-s} / Δ(ξ_i)`, `1 ≤ s ≤ l`.
pub fn vandermonde_basic(xi: &XiVector, s: usize) -> Result<Rat> {
    let l = xi.len();
    if s < 1 || s > l {
        return Err(Error::IndexOutOfRange { index: s, max: l });
    }
    Ok(weighted_sum(xi, |x| pow(x, l - s)))
}

/// `Σ_i ξ_i^s / (Δ(ξ_i)(ξ_i - α))`, `0 ≤ s ≤ l-1`.
pub fn vandermonde_pole(xi: &XiVector, s: usize, alpha: &Rat) -> Result<Rat> {
    let l = xi.len();
    if s >= l {
        return Err(Error::IndexOutOfRange { index: s, max: l - 1 });
    }
    check_pole(xi, alpha)?;
    Ok(weighted_sum(xi, |x| pow(x, s) / (x - alpha)))
}

/// `Σ_i ξ_i^s / (Δ(ξ_i)(ξ_i - α)^2)`, the α-derivative of [`vandermonde_pole`].
pub fn vandermonde_pole_derivative(xi: &XiVector, s: usize, alpha: &Rat) -> Result<Rat> {
    let l = xi.len();
    if s >= l {
        return Err(Error::IndexOutOfRange { index: s, max: l - 1 });
    }
    check_pole(xi, alpha)?;
    Ok(weighted_sum(xi, |x| {
        let d = x - alpha;
        pow(x, s) / (&d * &d)
    }))
}

/// `Σ_j ξ_j^{l-1+p} / Δ(ξ_j)`.
pub fn vandermonde_extended(xi: &XiVector, p: usize) -> Rat {
    let l = xi.len();
    weighted_sum(xi, |x| pow(x, l - 1 + p))
}

/// `Σ_i ξ_i^{l+p} / (Δ(ξ_i)(ξ_i - α))`.
pub fn vandermonde_pole_extended(xi: &XiVector, p: usize, alpha: &Rat) -> Result<Rat> {
    check_pole(xi, alpha)?;
    let l = xi.len();
    Ok(weighted_sum(xi, |x| pow(x, l + p) / (x - alpha)))
}

fn weighted_sum(xi: &XiVector, f: impl Fn(&Rat) -> Rat) -> Rat {
    let xs = xi.as_slice();
    (0..xs.len()).map(|i| f(&xs[i]) / delta_of(xs, i)).sum()
}

/// Coefficients `1 / (Δ_i(α)(ξ - α_i))` whose sum is `1 / Π_k (ξ - α_k)`.
pub fn partial_fraction_split(xi_j: &Rat, alpha: &[Rat]) -> Result<Vec<Rat>> {
    if alpha.contains(xi_j) {
        return Err(Error::PoleCollision(format_rat(xi_j)));
    }
    for i in 0..alpha.len() {
        if alpha[..i].contains(&alpha[i]) {
            return Err(Error::DuplicateEntries);
        }
    }
    Ok((0..alpha.len())
        .map(|i| Rat::one() / (delta_of(alpha, i) * (xi_j - &alpha[i])))
        .collect())
}
