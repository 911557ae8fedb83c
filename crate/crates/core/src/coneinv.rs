//! Asymptotic-cone invariants: τ, the e₁ expansion, Λ and the cone descriptor.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::number::{format_rat, int, ExactField, Rat, Surd};
use crate::params::{delta_full, sign_pow, SolitonParams};

/// `τ_j = (-1)^{l-j} Π_{k≠j, k<l} (α_l-α_k) / q(α_l)` for `j < l`.
pub fn tau(params: &SolitonParams) -> Vec<Surd> {
    let alpha = params.alpha();
    let l = alpha.len();
    let last = &alpha[l - 1];
    let q = params.q_at(last);
    (0..l - 1)
        .map(|j| {
            let prod = (0..l - 1)
                .filter(|&k| k != j)
                .fold(Surd::one(), |acc, k| acc * (last.clone() - alpha[k].clone()));
            sign_pow::<Surd>(l - 1 - j) * prod / q.clone()
        })
        .collect()
}

/// Coefficient of `T_j` in `K_1`.
pub fn e1_expansion(params: &SolitonParams) -> Vec<Surd> {
    let alpha = params.alpha();
    let l = alpha.len();
    (0..l)
        .map(|j| {
            let d = params.partition().d_or_zero(j) as i64;
            sign_pow::<Surd>(l - j) * params.q_at(&alpha[j]) / Surd::rational(int(2 * (d + 1)))
                / delta_full(alpha, j)
        })
        .collect()
}

/// The lattice generators `v_j ∈ ℝ^l` in the `e_r` basis.
pub fn lattice_vectors(params: &SolitonParams) -> Vec<Vec<Surd>> {
    let alpha = params.alpha();
    let l = alpha.len();
    (0..l)
        .map(|j| {
            let d = params.partition().d_or_zero(j) as i64;
            let s = sign_pow::<Surd>(l - 1 - j) * Surd::rational(int(2 * (d + 1))) / params.q_at(&alpha[j]);
            (1..=l).map(|r| s.clone() * sign_pow::<Surd>(r) * alpha[j].pow(l - r)).collect()
        })
        .collect()
}

/// Gaussian elimination over an exact field; `None` when singular.
pub fn solve_exact<F: ExactField>(m: &[Vec<F>], b: &[F]) -> Option<Vec<F>> {
    let n = b.len();
    let mut a: Vec<Vec<F>> = m.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(bi.clone());
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for c in col..=n {
            a[col][c] = a[col][c].clone() / p.clone();
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    a[r][c] = a[r][c].clone() - f.clone() * a[col][c].clone();
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n].clone()).collect())
}

/// Solves `e_1 = Σ c_j v_j` directly.
pub fn e1_by_solve(params: &SolitonParams) -> Option<Vec<Surd>> {
    let v = lattice_vectors(params);
    let l = v.len();
    let m: Vec<Vec<Surd>> = (0..l).map(|r| (0..l).map(|j| v[j][r].clone()).collect()).collect();
    let mut e1 = vec![Surd::zero(); l];
    e1[0] = Surd::one();
    solve_exact(&m, &e1)
}

/// Exact `dim Λ = dim_ℚ Span{1, τ_j} - 1` with a short certificate.
///
/// All entries live in one quadratic field `ℚ(√m)`, so the span is read off
/// the rational and surd parts.
pub fn lambda_dimension(tau: &[Surd]) -> Result<(usize, String)> {
    let mut field = 1u64;
    for t in tau {
        if t.radicand() != 1 {
            if field != 1 && field != t.radicand() {
                return Err(Error::MixedQuadraticFields(field, t.radicand()));
            }
            field = t.radicand();
        }
    }
    match tau.iter().position(|t| !t.is_rational()) {
        None => Ok((0, "all rational".to_string())),
        Some(j) => Ok((
            1,
            format!("tau_{} = {} has a nonzero sqrt({field}) part; span is Q + Q*sqrt({field})", j + 1, tau[j]),
        )),
    }
}

/// Exact or untagged floating input for [`lambda_dimension_checked`].
#[derive(Clone, Debug)]
pub enum TauEntry {
    Exact(Surd),
    Float(f64),
}

/// Rejects untagged floats instead of guessing.
pub fn lambda_dimension_checked(tau: &[TauEntry]) -> Result<(usize, String)> {
    let exact: Vec<Surd> = tau
        .iter()
        .map(|t| match t {
            TauEntry::Exact(s) => Ok(s.clone()),
            TauEntry::Float(_) => Err(Error::UntaggedFloat),
        })
        .collect::<Result<_>>()?;
    lambda_dimension(&exact)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Confidence {
    High,
    Low,
}

/// Best-effort numeric estimate; never a certificate.
#[derive(Clone, Debug)]
pub struct FloatLambdaEstimate {
    pub dim: usize,
    /// Integer relations `Σ m_i x_i ≈ 0` on `(1, τ_1, …)`.
    pub relations: Vec<Vec<i64>>,
    pub confidence: Confidence,
}

/// Integer-relation search on `(1, τ_1, …, τ_{l-1})` by LLL reduction.
pub fn lambda_dimension_float(tau: &[f64]) -> FloatLambdaEstimate {
    let mut x = vec![1.0];
    x.extend_from_slice(tau);
    let k = x.len();
    let scale = 1e14;
    let mut basis: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row = vec![0.0; k + 1];
            row[i] = 1.0;
            row[k] = (scale * x[i]).round();
            row
        })
        .collect();
    lll(&mut basis, 0.75);
    let mut found: Vec<Vec<i64>> = Vec::new();
    let mut smallest_miss = f64::INFINITY;
    let mut largest_hit: f64 = 0.0;
    for row in &basis {
        let coeffs: Vec<i64> = row[..k].iter().map(|c| c.round() as i64).collect();
        let size = coeffs.iter().map(|c| c.abs()).max().unwrap_or(0) as f64;
        let resid: f64 = coeffs.iter().zip(&x).map(|(c, xi)| *c as f64 * xi).sum::<f64>().abs();
        if size <= 1e3 && resid < 1e-10 {
            largest_hit = largest_hit.max(resid);
            found.push(coeffs);
        } else {
            smallest_miss = smallest_miss.min(resid);
        }
    }
    let rank = integer_rank(&found);
    let separated = smallest_miss > 1e4 * largest_hit.max(1e-15);
    FloatLambdaEstimate {
        dim: (k - 1).saturating_sub(rank),
        relations: found,
        confidence: if separated { Confidence::High } else { Confidence::Low },
    }
}

fn lll(b: &mut [Vec<f64>], delta: f64) {
    let n = b.len();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let gso = |b: &[Vec<f64>]| {
        let mut bs: Vec<Vec<f64>> = Vec::with_capacity(b.len());
        let mut mu = vec![vec![0.0; b.len()]; b.len()];
        for i in 0..b.len() {
            let mut v = b[i].clone();
            for j in 0..i {
                mu[i][j] = dot(&b[i], &bs[j]) / dot(&bs[j], &bs[j]);
                for (vc, bc) in v.iter_mut().zip(&bs[j]) {
                    *vc -= mu[i][j] * bc;
                }
            }
            bs.push(v);
        }
        (bs, mu)
    };
    let mut k = 1;
    let mut guard = 0;
    while k < n && guard < 10_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (_, mu) = gso(b);
            let q = mu[k][j].round();
            if q != 0.0 {
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= q * y;
                }
            }
        }
        let (bs, mu) = gso(b);
        if dot(&bs[k], &bs[k]) >= (delta - mu[k][k - 1] * mu[k][k - 1]) * dot(&bs[k - 1], &bs[k - 1]) {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = k.max(2) - 1;
        }
    }
}

fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<Rat>> = rows.iter().map(|r| r.iter().map(|&c| int(c)).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                let pivot = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn frac_part(r: &Rat) -> Rat {
    r - r.floor()
}

/// Order of `τ` in `T^{l-1}`: lcm of reduced denominators after reduction to `[0, 1)`.
pub fn lambda_finite_order(tau: &[Surd]) -> Result<BigInt> {
    let rat: Vec<Rat> = tau.iter().map(|t| t.as_rational().ok_or(Error::IrrationalParameter)).collect::<Result<_>>()?;
    Ok(rat.iter().map(|t| frac_part(t).denom().clone()).fold(BigInt::one(), |acc, d| acc.lcm(&d)))
}

/// The multiples `kτ mod ℤ^{l-1}` until they return to 0.
pub fn cyclic_subgroup(tau: &[Rat]) -> Vec<Vec<Rat>> {
    let step: Vec<Rat> = tau.iter().map(frac_part).collect();
    let mut out = vec![vec![Rat::zero(); tau.len()]];
    loop {
        let next: Vec<Rat> = out.last().unwrap().iter().zip(&step).map(|(a, b)| frac_part(&(a + b))).collect();
        if next.iter().all(Zero::is_zero) {
            return out;
        }
        out.push(next);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaOrder {
    Finite(BigInt),
    Infinite,
}

impl fmt::Display for LambdaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaOrder::Finite(m) => write!(f, "{m}"),
            LambdaOrder::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConeInvariants {
    pub tau: Vec<Surd>,
    pub e1_coeffs: Vec<Surd>,
    pub lambda_dim: usize,
    pub lambda_certificate: String,
    pub lambda_order: LambdaOrder,
    pub cone_dim: usize,
    pub descriptor: String,
}

impl ConeInvariants {
    pub fn lambda_label(&self) -> String {
        match &self.lambda_order {
            LambdaOrder::Finite(m) if m.is_one() => "trivial".to_string(),
            LambdaOrder::Finite(m) => format!("Z_{m}"),
            LambdaOrder::Infinite => format!("closed subgroup of dimension {}", self.lambda_dim),
        }
    }

    /// One-line report, e.g. `tau = [-1/2]; Lambda = Z_2; cone = (C^2/Z_2) x R; dim = 5`.
    pub fn summary(&self) -> String {
        let tau: Vec<String> = self.tau.iter().map(ToString::to_string).collect();
        format!(
            "tau = [{}]; Lambda = {}; cone = {}; dim = {}",
            tau.join(", "),
            self.lambda_label(),
            self.descriptor,
            self.cone_dim
        )
    }
}

pub fn cone_descriptor(params: &SolitonParams) -> Result<ConeInvariants> {
    let tau = tau(params);
    let (lambda_dim, lambda_certificate) = lambda_dimension(&tau)?;
    let lambda_order = if lambda_dim == 0 {
        LambdaOrder::Finite(lambda_finite_order(&tau)?)
    } else {
        LambdaOrder::Infinite
    };
    let n = params.n();
    let d = params.partition().d();
    let factors: Vec<String> = d.iter().map(|dj| format!("C^{}", dj + 1)).collect();
    let product = factors.join(" x ");
    let descriptor = match &lambda_order {
        LambdaOrder::Finite(m) if m.is_one() => {
            let real_dim: usize = d.iter().map(|dj| 2 * (dj + 1)).sum::<usize>() + 1;
            format!("R^{real_dim}")
        }
        LambdaOrder::Finite(m) => format!("({product}/Z_{m}) x R"),
        LambdaOrder::Infinite => format!("({product}/Lambda) x R"),
    };
    Ok(ConeInvariants {
        e1_coeffs: e1_expansion(params),
        tau,
        lambda_dim,
        lambda_certificate,
        lambda_order,
        cone_dim: 2 * n - 1 - lambda_dim,
        descriptor,
    })
}

/// `l = 2` only: order `k` of the image of `(v_1+v_2)/n` in `T²/Span{e_1}`,
/// and the resulting total cyclic order `k·|Λ|` acting on the cone factor.
pub fn l2_diagonal_quotient(params: &SolitonParams) -> Result<(BigInt, BigInt)> {
    if params.l() != 2 {
        return Err(Error::Unsupported("diagonal quotient is only implemented for l = 2".into()));
    }
    let v: Vec<Vec<Rat>> = lattice_vectors(params)
        .iter()
        .map(|v| v.iter().map(|x| x.as_rational().ok_or(Error::IrrationalParameter)).collect())
        .collect::<Result<_>>()?;
    let n = int(params.n() as i64);
    let image = (&v[0][1] + &v[1][1]) / &n;
    // the projected lattice {m v_1 + k v_2}_2 is generated by the rational gcd of the two entries
    let period = rat_gcd(&v[0][1], &v[1][1]);
    let k = frac_part(&(image / period)).denom().clone();
    let lambda = match cone_descriptor(params)?.lambda_order {
        LambdaOrder::Finite(m) => m,
        LambdaOrder::Infinite => return Err(Error::Unsupported("infinite Lambda".into())),
    };
    Ok((k.clone(), k * lambda))
}

fn rat_gcd(a: &Rat, b: &Rat) -> Rat {
    let den = a.denom().lcm(b.denom());
    let an = (a * Rat::from_integer(den.clone())).to_integer();
    let bn = (b * Rat::from_integer(den.clone())).to_integer();
    Rat::new(an.gcd(&bn).abs(), den)
}

/// Rational `τ` formatted as `p/q` entries.
pub fn format_tau(tau: &[Surd]) -> String {
    let parts: Vec<String> = tau
        .iter()
        .map(|t| t.as_rational().map(|r| format_rat(&r)).unwrap_or_else(|| t.to_string()))
        .collect();
    format!("[{}]", parts.join(", "))
}
