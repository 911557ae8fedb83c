//! Exact scalars: arbitrary-precision rationals and quadratic surds `a + b√m`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rat = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // Ratio::to_f64 handles huge numerators/denominators without overflow.
    ToPrimitive::to_f64(r).unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// `p/q` with `q` omitted for integers.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q`, an integer, or a plain decimal such as `-2.75` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let bad = || Error::MalformedRational(s.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let v = Rat::new(numer, denom);
    Ok(if neg { -v } else { v })
}

/// Field operations shared by [`Rat`] and [`Surd`], enough to evaluate the
/// structure polynomials and the cone invariants over either.
pub trait ExactField:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_rat(r: Rat) -> Self;
    fn to_f64(&self) -> f64;
    fn as_rational(&self) -> Option<Rat>;
    fn from_surd(x: &Surd) -> Option<Self>;

    fn from_i64(v: i64) -> Self {
        Self::from_rat(int(v))
    }

    fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

impl ExactField for Rat {
    fn from_rat(r: Rat) -> Self {
        r
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }
    fn as_rational(&self) -> Option<Rat> {
        Some(self.clone())
    }
    fn from_surd(x: &Surd) -> Option<Self> {
        x.as_rational()
    }
}

/// An element `rational + surd·√radicand` of a real quadratic field.
///
/// `radicand == 1` marks a plain rational (and then `surd == 0`). Mixing two
/// different non-trivial radicands in one operation panics; parameter
/// validation rejects such inputs before arithmetic starts.
#[derive(Clone, Debug)]
pub struct Surd {
    rational: Rat,
    surd: Rat,
    radicand: u64,
}

impl Surd {
    pub fn rational(r: Rat) -> Self {
        Surd { rational: r, surd: Rat::zero(), radicand: 1 }
    }

    /// `a + b√m`. `m` must be square-free and at least 2, or 1.
    pub fn new(a: Rat, b: Rat, m: u64) -> Result<Self, Error> {
        if m == 0 || !is_square_free(m) {
            return Err(Error::InvalidRadicand(m));
        }
        Ok(Surd { rational: a, surd: b, radicand: m }.normalized())
    }

    pub fn sqrt_of(m: u64) -> Result<Self, Error> {
        Self::new(Rat::zero(), Rat::one(), m)
    }

    pub fn rational_part(&self) -> &Rat {
        &self.rational
    }
    pub fn surd_part(&self) -> &Rat {
        &self.surd
    }
    pub fn radicand(&self) -> u64 {
        self.radicand
    }
    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    fn normalized(mut self) -> Self {
        if self.radicand == 1 {
            self.rational += &self.surd;
            self.surd = Rat::zero();
        }
        if self.surd.is_zero() {
            self.radicand = 1;
        }
        self
    }

    fn join(a: u64, b: u64) -> u64 {
        match (a, b) {
            (1, m) | (m, 1) => m,
            (m, k) if m == k => m,
            (m, k) => panic!("quadratic surds from different fields: sqrt({m}) and sqrt({k})"),
        }
    }

    fn conjugate(&self) -> Self {
        Surd { rational: self.rational.clone(), surd: -self.surd.clone(), radicand: self.radicand }
    }

    pub fn signum(&self) -> i32 {
        let sa = sign(&self.rational);
        let sb = sign(&self.surd);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let a2 = &self.rational * &self.rational;
        let b2m = &self.surd * &self.surd * int(self.radicand as i64);
        match a2.cmp(&b2m) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }
}

fn sign(r: &Rat) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

pub fn is_square_free(m: u64) -> bool {
    let mut p = 2u64;
    while p * p <= m {
        if m % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

impl PartialEq for Surd {
    fn eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).signum() == 0
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((self.clone() - other.clone()).signum().cmp(&0))
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, o: Surd) -> Surd {
        let m = Surd::join(self.radicand, o.radicand);
        Surd { rational: self.rational + o.rational, surd: self.surd + o.surd, radicand: m }.normalized()
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, o: Surd) -> Surd {
        self + (-o)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { rational: -self.rational, surd: -self.surd, radicand: self.radicand }
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, o: Surd) -> Surd {
        let m = Surd::join(self.radicand, o.radicand);
        let mm = int(m as i64);
        let rational = &self.rational * &o.rational + &self.surd * &o.surd * mm;
        let surd = &self.rational * &o.surd + &self.surd * &o.rational;
        Surd { rational, surd, radicand: m }.normalized()
    }
}

impl Div for Surd {
    type Output = Surd;
    fn div(self, o: Surd) -> Surd {
        assert!(o.signum() != 0, "division by zero surd");
        let conj = o.conjugate();
        let norm = (o * conj.clone()).rational;
        let num = self * conj;
        Surd { rational: num.rational / &norm, surd: num.surd / &norm, radicand: num.radicand }.normalized()
    }
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::rational(Rat::zero())
    }
    fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.surd.is_zero()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::rational(Rat::one())
    }
}

impl ExactField for Surd {
    fn from_rat(r: Rat) -> Self {
        Surd::rational(r)
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(&self.rational) + rat_to_f64(&self.surd) * (self.radicand as f64).sqrt()
    }
    fn as_rational(&self) -> Option<Rat> {
        self.is_rational().then(|| self.rational.clone())
    }
    fn from_surd(x: &Surd) -> Option<Self> {
        Some(x.clone())
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", format_rat(&self.rational));
        }
        let coeff = if self.surd.is_one() {
            String::new()
        } else if (-self.surd.clone()).is_one() {
            "-".to_string()
        } else {
            format!("{}*", format_rat(&self.surd))
        };
        if self.rational.is_zero() {
            write!(f, "{coeff}sqrt({})", self.radicand)
        } else if self.surd.is_positive() {
            write!(f, "{} + {coeff}sqrt({})", format_rat(&self.rational), self.radicand)
        } else {
            let pos = if self.surd == -Rat::one() {
                String::new()
            } else {
                format!("{}*", format_rat(&-self.surd.clone()))
            };
            write!(f, "{} - {pos}sqrt({})", format_rat(&self.rational), self.radicand)
        }
    }
}
