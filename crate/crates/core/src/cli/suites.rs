//! Randomized exact suites: each left side from the library against a right side
//! computed here by a different route.

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::Result;
use crate::flatmodel::{
    beta_closedness_coefficients, gbeta_last_entry_from_derivative, gbeta_on_y, gtheta_on_y, gxi_closed_form,
    gxi_matrix, gxi_pullback, radii_squared,
};
use crate::number::{format_rat, rat, rat_to_f64, Rat};
use crate::params::{Partition, SolitonParams};
use crate::symalg::{
    complete_sym, partial_fraction_split, vandermonde_basic, vandermonde_extended, vandermonde_pole,
    vandermonde_pole_extended, XiVector,
};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    pub checks: usize,
    /// Largest `|lhs - rhs|` seen, as `f64`.
    pub worst: f64,
    /// Descriptions of checks above tolerance, in order.
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn record(&mut self, name: &str, lhs: &Rat, rhs: &Rat, tol: f64) {
        self.checks += 1;
        let diff = (lhs - rhs).abs();
        let d = rat_to_f64(&diff);
        self.worst = self.worst.max(d);
        let fail = if tol == 0.0 { !diff.is_zero() } else { d > tol };
        if fail {
            self.failures.push(format!("{name}: lhs {} != rhs {}", format_rat(lhs), format_rat(rhs)));
        }
    }

    pub fn merge(&mut self, other: SuiteReport) {
        self.checks += other.checks;
        self.worst = self.worst.max(other.worst);
        self.failures.extend(other.failures);
    }
}

pub fn random_rational(rng: &mut impl Rng, span: i64) -> Rat {
    rat(rng.gen_range(-span * 6..=span * 6), rng.gen_range(1..=6))
}

/// `k` distinct random rationals.
pub fn distinct_rationals(rng: &mut impl Rng, k: usize, span: i64) -> Vec<Rat> {
    let mut out: Vec<Rat> = Vec::with_capacity(k);
    while out.len() < k {
        let x = random_rational(rng, span);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn poly_from_roots_at(roots: &[Rat], t: &Rat) -> Rat {
    roots.iter().fold(Rat::one(), |acc, r| acc * (t - r))
}

/// Brute-force `h_p`: sum over all monomials of degree `p`.
pub fn complete_brute(xs: &[Rat], p: usize) -> Rat {
    fn go(xs: &[Rat], p: usize, start: usize, acc: Rat) -> Rat {
        if p == 0 {
            return acc;
        }
        (start..xs.len()).fold(Rat::zero(), |s, i| s + go(xs, p - 1, i, &acc * &xs[i]))
    }
    go(xs, p, 0, Rat::one())
}

/// The five Vandermonde-type identities on `instances` random `ξ` with `2 ≤ l ≤ 5`.
pub fn identity_suite(rng: &mut impl Rng, instances: usize, tol: f64) -> SuiteReport {
    let mut rep = SuiteReport::default();
    for k in 0..instances {
        let l = 2 + k % 4;
        let xs = distinct_rationals(rng, l + 1, 6);
        let (alpha, xs) = (xs[l].clone(), xs[..l].to_vec());
        let xi = XiVector::new(xs.clone()).expect("distinct by construction");
        let p_nc_alpha = poly_from_roots_at(&xs, &alpha);
        for s in 1..=l {
            let want = if s == 1 { Rat::one() } else { Rat::zero() };
            rep.record(&format!("basic l={l} s={s}"), &vandermonde_basic(&xi, s).unwrap(), &want, tol);
        }
        for s in 0..l {
            let want = -num_traits::pow(alpha.clone(), s) / &p_nc_alpha;
            rep.record(&format!("pole l={l} s={s}"), &vandermonde_pole(&xi, s, &alpha).unwrap(), &want, tol);
        }
        for p in 0..4 {
            let h = complete_brute(&xs, p);
            rep.record(&format!("extended l={l} p={p}"), &vandermonde_extended(&xi, p), &h, tol);
            rep.record(&format!("complete l={l} p={p}"), &complete_sym(&xi, p), &h, tol);
            let sum = (0..=p).fold(Rat::zero(), |acc, j| acc + complete_brute(&xs, p - j) * num_traits::pow(alpha.clone(), j));
            let want = sum - num_traits::pow(alpha.clone(), l + p) / &p_nc_alpha;
            rep.record(&format!("pole-extended l={l} p={p}"), &vandermonde_pole_extended(&xi, p, &alpha).unwrap(), &want, tol);
        }
        let poles = &xs[..l.min(xs.len())];
        let split = partial_fraction_split(&alpha, poles).unwrap();
        let want = Rat::one() / poly_from_roots_at(poles, &alpha);
        rep.record(&format!("partial-fraction m={}", poles.len()), &split.iter().sum(), &want, tol);
    }
    rep
}

/// Random rational parameters with `2 ≤ l ≤ lmax` and an interleaved `ξ`.
pub fn random_flat_instance(rng: &mut impl Rng, lmax: usize) -> (SolitonParams, XiVector) {
    let l = rng.gen_range(2..=lmax);
    let mut alpha = distinct_rationals(rng, l, 5);
    alpha.sort();
    let d: Vec<usize> = (0..l - 1).map(|_| rng.gen_range(0..=2)).collect();
    let params = SolitonParams::rational(Partition::from_multiplicities(d).unwrap(), alpha.clone(), Rat::zero())
        .expect("sorted distinct alpha");
    let between = |rng: &mut dyn rand::RngCore, lo: &Rat, hi: &Rat| {
        let t = rat(rng.gen_range(1..=9), 10);
        lo + (hi - lo) * t
    };
    let mut xi = Vec::with_capacity(l);
    xi.push(&alpha[0] - rat(rng.gen_range(1..=40), rng.gen_range(1..=4)));
    for j in 1..l - 1 {
        xi.push(between(rng, &alpha[j - 1], &alpha[j]));
    }
    xi.push(&alpha[l - 1] + rat(rng.gen_range(1..=40), rng.gen_range(1..=4)));
    (params, XiVector::new(xi).expect("interleaved entries are distinct"))
}

/// `g′_θ = g′_β` on the `Y` basis, the three `g′_ξ` routes, `dβ` and the last-entry derivative.
pub fn flat_suite(rng: &mut impl Rng, instances: usize, tol: f64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::default();
    for k in 0..instances {
        let (params, xi) = random_flat_instance(rng, 5);
        let l = params.l();
        let tag = format!("instance {k} (l={l})");
        let gt = gtheta_on_y(&xi, &params)?;
        let gb = gbeta_on_y(&xi, &params)?;
        let gx = gxi_matrix(&xi, &params)?;
        let gc = gxi_closed_form(&xi, &params)?;
        let gp = gxi_pullback(&xi, &params)?;
        for r in 0..l {
            for s in 0..l {
                rep.record(&format!("{tag} gtheta=gbeta [{r}][{s}]"), &gt[r][s], &gb[r][s], tol);
                rep.record(&format!("{tag} gxi=closed [{r}][{s}]"), &gx[r][s], &gc[r][s], tol);
                rep.record(&format!("{tag} gxi=pullback [{r}][{s}]"), &gx[r][s], &gp[r][s], tol);
            }
        }
        rep.record(&format!("{tag} last entry"), &gb[l - 1][l - 1], &gbeta_last_entry_from_derivative(&xi, &params)?, tol);
        for (i, c) in beta_closedness_coefficients(&params)?.iter().enumerate() {
            rep.record(&format!("{tag} dbeta {i}"), c, &Rat::zero(), tol);
        }
        for (j, r2) in radii_squared(&xi, &params)?.iter().enumerate() {
            rep.checks += 1;
            if r2.is_negative() {
                rep.failures.push(format!("{tag} negative r_{}²", j + 1));
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::int;
    use rand::SeedableRng;

    #[test]
    fn brute_complete() {
        let xs = [int(-1), int(2)];
        assert_eq!(complete_brute(&xs, 2), int(3));
        assert_eq!(complete_brute(&xs, 0), int(1));
    }

    #[test]
    fn suites_pass_exactly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let r = identity_suite(&mut rng, 20, 0.0);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert!(r.checks > 100);
        let f = flat_suite(&mut rng, 10, 0.0).unwrap();
        assert!(f.failures.is_empty(), "{:?}", f.failures);
    }
}
