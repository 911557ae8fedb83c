//! Soliton parameters and the structure polynomials built from them.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::number::{int, rat_to_f64, ExactField, Rat, Surd};
use crate::symalg::ExactPoly;

/// The discrete data `n = l + Σ d_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    l: usize,
    d: Vec<usize>,
}

impl Partition {
    /// Checks `n = l + Σ_{j<l} d_j`, `l ≥ 2` and that `d` has `l - 1` entries.
    pub fn new(n: usize, l: usize, d: Vec<usize>) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidPartition(format!("l = {l} must be at least 2")));
        }
        if d.len() != l - 1 {
            return Err(Error::InvalidPartition(format!("expected {} multiplicities, got {}", l - 1, d.len())));
        }
        let sum = l + d.iter().sum::<usize>();
        if sum != n {
            return Err(Error::PartitionMismatch { n, sum });
        }
        Ok(Partition { n, l, d })
    }

    pub fn from_multiplicities(d: Vec<usize>) -> Result<Self> {
        let l = d.len() + 1;
        let n = l + d.iter().sum::<usize>();
        Self::new(n, l, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn l(&self) -> usize {
        self.l
    }
    /// `d_1, …, d_{l-1}`; the formal `d_l = 0` is not stored.
    pub fn d(&self) -> &[usize] {
        &self.d
    }
    /// `d_j` with the convention `d_l = 0`, 0-based.
    pub fn d_or_zero(&self, j: usize) -> usize {
        self.d.get(j).copied().unwrap_or(0)
    }
}

/// Validated parameters `(l, d_j, α_j, a)`.
#[derive(Clone, Debug)]
pub struct SolitonParams {
    partition: Partition,
    alpha: Vec<Surd>,
    a: Rat,
}

impl SolitonParams {
    /// Builds and validates in one step.
    pub fn new(partition: Partition, alpha: Vec<Surd>, a: Rat) -> Result<Self> {
        validate(SolitonParams { partition, alpha, a })
    }

    pub fn rational(partition: Partition, alpha: Vec<Rat>, a: Rat) -> Result<Self> {
        Self::new(partition, alpha.into_iter().map(Surd::rational).collect(), a)
    }

    /// Unchecked constructor; pass the result through [`validate`].
    pub fn raw(partition: Partition, alpha: Vec<Surd>, a: Rat) -> Self {
        SolitonParams { partition, alpha, a }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }
    pub fn n(&self) -> usize {
        self.partition.n
    }
    pub fn l(&self) -> usize {
        self.partition.l
    }
    pub fn alpha(&self) -> &[Surd] {
        &self.alpha
    }
    pub fn a(&self) -> &Rat {
        &self.a
    }

    pub fn is_rational(&self) -> bool {
        self.alpha.iter().all(Surd::is_rational)
    }

    pub fn alpha_rational(&self) -> Result<Vec<Rat>> {
        self.alpha.iter().map(|x| x.as_rational().ok_or(Error::IrrationalParameter)).collect()
    }

    pub fn alpha_f64(&self) -> Vec<f64> {
        self.alpha.iter().map(ExactField::to_f64).collect()
    }

    pub fn a_f64(&self) -> f64 {
        rat_to_f64(&self.a)
    }

    /// `q(t) = Σ_{j<l} (2a(t-α_j) + d_j + 1) Π_{k≠j, k<l} (t-α_k)` in any exact field.
    pub fn q_at<F: ExactField>(&self, t: &F) -> F {
        let alpha: Vec<F> = self.alpha_field::<F>();
        let l = self.l();
        let two_a = F::from_rat(&self.a * int(2));
        (0..l - 1)
            .map(|j| {
                let lin = two_a.clone() * (t.clone() - alpha[j].clone())
                    + F::from_i64(self.partition.d[j] as i64 + 1);
                (0..l - 1)
                    .filter(|&k| k != j)
                    .fold(lin, |acc, k| acc * (t.clone() - alpha[k].clone()))
            })
            .fold(F::zero(), |acc, x| acc + x)
    }

    /// α in a field type that can hold it; panics for surds requested as `Rat`.
    pub fn alpha_field<F: ExactField>(&self) -> Vec<F> {
        self.alpha
            .iter()
            .map(|x| F::from_surd(x).expect("irrational alpha requested as a rational"))
            .collect()
    }
}

impl fmt::Display for SolitonParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alpha: Vec<String> = self.alpha.iter().map(|x| x.to_string()).collect();
        write!(
            f,
            "n = {}, l = {}, d = {:?}, alpha = [{}], a = {}",
            self.n(),
            self.l(),
            self.partition.d,
            alpha.join(", "),
            crate::number::format_rat(&self.a)
        )
    }
}

/// Returns the parameters iff every invariant holds; otherwise the first violation.
pub fn validate(params: SolitonParams) -> Result<SolitonParams> {
    let l = params.partition.l;
    if params.alpha.len() != l {
        return Err(Error::AlphaCount { expected: l, got: params.alpha.len() });
    }
    let mut field = 1u64;
    for x in &params.alpha {
        let m = x.radicand();
        if m != 1 {
            if field != 1 && field != m {
                return Err(Error::MixedQuadraticFields(field, m));
            }
            field = m;
        }
    }
    for j in 1..l {
        if params.alpha[j] <= params.alpha[j - 1] {
            return Err(Error::AlphaNotIncreasing(j));
        }
    }
    if params.a.is_negative() {
        return Err(Error::NegativeA);
    }
    Ok(params)
}

/// `F_l(t) = P(t) - e^{rate·(anchor - t)}·amplitude`, kept exact as its parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpCorrectedPoly {
    pub poly: ExactPoly,
    /// `2a`
    pub rate: Rat,
    /// `α_l`
    pub anchor: Rat,
    /// `P(α_l)`
    pub amplitude: Rat,
}

impl ExpCorrectedPoly {
    pub fn eval_f64(&self, t: f64) -> f64 {
        let rate = rat_to_f64(&self.rate);
        self.poly.eval_f64(t) - (rate * (rat_to_f64(&self.anchor) - t)).exp() * rat_to_f64(&self.amplitude)
    }

    /// Exact value when the exponential is trivial (`a = 0`) or at the anchor.
    pub fn eval_exact(&self, t: &Rat) -> Option<Rat> {
        if self.rate.is_zero() || *t == self.anchor {
            Some(self.poly.eval(t) - &self.amplitude)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructurePolys {
    /// `Π (t-α_j)^{d_j}`
    pub p_c: ExactPoly,
    /// `Π (t-α_j)^{d_j+1}`
    pub p: ExactPoly,
    /// `(P' + 2aP) / p_c`
    pub q: ExactPoly,
    /// `F_l`; `F_1 = … = F_{l-1} = P`.
    pub f_last: ExpCorrectedPoly,
}

/// Exact structure polynomials; rational parameters only.
pub fn build_structure(params: &SolitonParams) -> Result<StructurePolys> {
    let alpha = params.alpha_rational()?;
    let d = params.partition.d();
    let l = params.l();
    let p_c = ExactPoly::from_roots((0..l - 1).map(|j| (&alpha[j], d[j])));
    let p = ExactPoly::from_roots((0..l - 1).map(|j| (&alpha[j], d[j] + 1)));
    let two_a = params.a() * int(2);
    let numer = &p.derivative() + &p.scale(&two_a);
    let q = numer.div_exact(&p_c)?;
    let anchor = alpha[l - 1].clone();
    let f_last = ExpCorrectedPoly { poly: p.clone(), rate: two_a, amplitude: p.eval(&anchor), anchor };
    Ok(StructurePolys { p_c, p, q, f_last })
}

/// The equivalent tuple `(a/c, cα + d)` with `α_1 = 0`, `α_2 = 1`.
pub fn normalize(params: &SolitonParams) -> Result<SolitonParams> {
    let gap = params.alpha[1].clone() - params.alpha[0].clone();
    let c = Surd::one() / gap;
    let shift = -(c.clone() * params.alpha[0].clone());
    let alpha: Vec<Surd> = params.alpha.iter().map(|x| c.clone() * x.clone() + shift.clone()).collect();
    let a = if params.a.is_zero() {
        Rat::zero()
    } else {
        c.as_rational()
            .map(|c| &params.a / c)
            .ok_or_else(|| Error::Unsupported("normalizing a > 0 with an irrational gap α_2 - α_1".into()))?
    };
    validate(SolitonParams { partition: params.partition.clone(), alpha, a })
}

/// `Π_{k≠j, k<l} (α_j - α_k)` over the first `l-1` alphas, i.e. `Δ_j(α_1, …, α_{l-1})`.
pub fn delta_constant<F: ExactField>(alpha: &[F], j: usize) -> F {
    let l = alpha.len();
    (0..l - 1)
        .filter(|&k| k != j)
        .fold(F::one(), |acc, k| acc * (alpha[j].clone() - alpha[k].clone()))
}

/// `Π_{k≠j} (α_j - α_k)` over all `l` alphas.
pub fn delta_full<F: ExactField>(alpha: &[F], j: usize) -> F {
    crate::symalg::delta_of(alpha, j)
}

/// `(-1)^k` as a field element.
pub fn sign_pow<F: ExactField>(k: usize) -> F {
    if k % 2 == 0 {
        F::one()
    } else {
        -F::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::rat;

    fn params(d: Vec<usize>, alpha: Vec<Rat>, a: Rat) -> Result<SolitonParams> {
        SolitonParams::rational(Partition::from_multiplicities(d)?, alpha, a)
    }

    #[test]
    fn validates_normalized_l2() {
        let p = SolitonParams::rational(Partition::new(3, 2, vec![1]).unwrap(), vec![int(0), int(1)], int(0));
        assert!(p.is_ok());
    }

    #[test]
    fn rejects_bad_ordering_and_partition() {
        let e = params(vec![0], vec![int(1), int(0)], int(0)).unwrap_err();
        assert_eq!(e, Error::AlphaNotIncreasing(1));
        assert!(e.to_string().contains("alpha not increasing"));
        let e = Partition::new(4, 3, vec![1, 1]).unwrap_err();
        assert!(e.to_string().contains("partition mismatch"));
        assert_eq!(params(vec![0], vec![int(0), int(1)], int(-1)).unwrap_err(), Error::NegativeA);
        assert!(Partition::new(1, 1, vec![]).is_err());
    }

    #[test]
    fn rejects_mixed_fields() {
        let part = Partition::from_multiplicities(vec![0, 0]).unwrap();
        let alpha = vec![Surd::rational(int(0)), Surd::sqrt_of(2).unwrap(), Surd::sqrt_of(3).unwrap()];
        assert_eq!(SolitonParams::new(part, alpha, int(0)).unwrap_err(), Error::MixedQuadraticFields(2, 3));
    }

    #[test]
    fn l2_structure_matches_closed_forms() {
        let p = params(vec![1], vec![int(0), int(1)], int(0)).unwrap();
        let s = build_structure(&p).unwrap();
        assert_eq!(s.p_c, ExactPoly::new(vec![int(0), int(1)]));
        assert_eq!(s.p, ExactPoly::new(vec![int(0), int(0), int(1)]));
        assert_eq!(s.q, ExactPoly::constant(int(2)));
        // F_2(t) = t^2 - 1
        assert_eq!(s.f_last.eval_exact(&int(3)), Some(int(8)));
        for n in 2..8usize {
            let p = params(vec![n - 2], vec![int(0), int(1)], int(0)).unwrap();
            let s = build_structure(&p).unwrap();
            assert_eq!(s.q, ExactPoly::constant(int(n as i64 - 1)));
        }
    }

    #[test]
    fn q_matches_sum_formula_and_signs() {
        let p = params(vec![0, 0], vec![int(0), int(1), int(2)], int(0)).unwrap();
        let s = build_structure(&p).unwrap();
        // q(t) = (t-1) + t = 2t - 1 when a = 0, d = (0, 0)
        assert_eq!(s.q, ExactPoly::new(vec![int(-1), int(2)]));
        let alpha = p.alpha_rational().unwrap();
        for j in 0..2 {
            let qj = s.q.eval(&alpha[j]);
            assert_eq!(qj, p.q_at(&alpha[j]));
            let expected = int(p.partition().d()[j] as i64 + 1) * delta_constant(&alpha, j);
            assert_eq!(qj, expected);
            let signed = sign_pow::<Rat>(3 - 1 - (j + 1)) * qj;
            assert!(signed.is_positive());
        }
    }

    #[test]
    fn degree_of_q_drops_when_a_vanishes() {
        let p = params(vec![1, 2], vec![int(0), int(1), int(3)], int(0)).unwrap();
        assert_eq!(build_structure(&p).unwrap().q.degree(), Some(1));
        let p = params(vec![1, 2], vec![int(0), int(1), int(3)], rat(1, 3)).unwrap();
        assert_eq!(build_structure(&p).unwrap().q.degree(), Some(2));
    }

    #[test]
    fn normalize_example() {
        let p = params(vec![0, 0], vec![int(1), int(3), int(7)], int(2)).unwrap();
        let q = normalize(&p).unwrap();
        assert_eq!(q.alpha_rational().unwrap(), vec![int(0), int(1), int(3)]);
        assert_eq!(q.a(), &int(4));
        let already = params(vec![0], vec![int(0), int(1)], int(0)).unwrap();
        let same = normalize(&already).unwrap();
        assert_eq!(same.alpha_rational().unwrap(), vec![int(0), int(1)]);
        assert_eq!(same.a(), &int(0));
    }

    #[test]
    fn f_last_positive_beyond_anchor() {
        let p = params(vec![1, 2], vec![int(0), int(1), int(3)], rat(1, 2)).unwrap();
        let s = build_structure(&p).unwrap();
        assert_eq!(s.f_last.eval_exact(&int(3)), Some(int(0)));
        let mut t = 1.0f64;
        while t < 1e6 {
            assert!(s.f_last.eval_f64(3.0 * t + 1.0) > 0.0);
            t *= 1.1;
        }
    }
}
