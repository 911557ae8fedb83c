//! The Kähler potential of the `l = 2`, `α = (0, 1)` family and its checks.

use nalgebra::DMatrix;

use crate::chartmetric::{build_frame, metric_values, ChartPoint, NumericParams, Which};
use crate::error::{Error, Result};
use crate::jet::{Jet, Real};
use crate::quadrature::{integrate, Tolerance};

/// Candidate normalizations `κ` in `d^c H = κ dH ∘ J`.
pub const DDC_FACTORS: [f64; 6] = [1.0, -1.0, 2.0, -2.0, 0.5, -0.5];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialSpec {
    pub c: f64,
    pub n: usize,
}

impl PotentialSpec {
    /// Requires `C > 2` so that `½x² - x + ½C > ¼x²`.
    pub fn new(c: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPartition(format!("n = {n} < 2")));
        }
        if !(c > 2.0) {
            return Err(Error::Unsupported(format!("potential constant {c} must exceed 2")));
        }
        Ok(PotentialSpec { c, n })
    }
}

/// `1 + t + … + t^{n-2}` and its derivative.
fn geometric(n: usize, t: f64) -> (f64, f64) {
    let (mut s, mut d1) = (0.0, 0.0);
    for k in 0..=n - 2 {
        s += t.powi(k as i32);
        if k >= 1 {
            d1 += k as f64 * t.powi(k as i32 - 1);
        }
    }
    (s, d1)
}

/// `∫_0^x dt/(1 + t + … + t^{n-2})`.
pub fn integral_term(n: usize, x: f64) -> Result<f64> {
    Ok(match n {
        2 => x,
        3 => x.ln_1p(),
        4 => {
            let r3 = 3f64.sqrt();
            2.0 / r3 * (((2.0 * x + 1.0) / r3).atan() - std::f64::consts::FRAC_PI_6)
        }
        _ => integrate(|t| 1.0 / geometric(n, t).0, 0.0, x, Tolerance::default())?.0,
    })
}

fn h_generic<T: Real>(spec: &PotentialSpec, x1: T, x2: T) -> Result<T> {
    let v = x2.val();
    let (s, d1) = geometric(spec.n, v);
    let i = x2.chain(integral_term(spec.n, v)?, 1.0 / s, -d1 / (s * s));
    Ok(x1 * x1 * 0.5 - x1 + x2 * x2 * 0.5 - x2 + i + spec.c)
}

pub fn h(xi1: f64, xi2: f64, spec: &PotentialSpec) -> Result<f64> {
    h_generic(spec, xi1, xi2)
}

/// `(∂H/∂ξ_1, ∂H/∂ξ_2)`.
pub fn dh_coefficients(xi1: f64, xi2: f64, spec: &PotentialSpec) -> (f64, f64) {
    (xi1 - 1.0, xi2 - 1.0 + 1.0 / geometric(spec.n, xi2).0)
}

fn check_family(np: &NumericParams, spec: &PotentialSpec) -> Result<()> {
    if np.l != 2 || np.alpha != [0.0, 1.0] || np.a != 0.0 || np.n != spec.n {
        return Err(Error::Unsupported("the potential is implemented for l = 2, alpha = (0, 1), a = 0".into()));
    }
    Ok(())
}

/// `dd^c f` with `d^c f = κ df ∘ J`, as a matrix `[a * dim + b]`.
pub fn ddc_of(np: &NumericParams, point: &ChartPoint, kappa: f64, f: impl Fn(&[Jet]) -> Result<Jet>) -> Result<Vec<f64>> {
    let dim = np.dim();
    let x = Jet::seed(&point.coords());
    let hj = f(&x)?;
    let jm = build_frame(np, &x, Which::G).complex_structure();
    // β_b = κ Σ_c ∂_c H J^c_b, differentiated through the jets of H and J
    let dbeta = |a: usize, b: usize| -> f64 {
        kappa * (0..dim).map(|c| hj.hess(a, c) * jm[c * dim + b].v + hj.grad(c) * jm[c * dim + b].grad(a)).sum::<f64>()
    };
    let mut m = vec![0.0; dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            m[a * dim + b] = dbeta(a, b) - dbeta(b, a);
        }
    }
    Ok(m)
}

fn ddc_matrix(np: &NumericParams, point: &ChartPoint, spec: &PotentialSpec, kappa: f64) -> Result<Vec<f64>> {
    ddc_of(np, point, kappa, |x| h_generic(spec, x[0], x[1]))
}

fn omega_values(np: &NumericParams, point: &ChartPoint) -> Vec<f64> {
    build_frame(np, &point.coords(), Which::G).omega()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Point used to fix `κ`.
pub fn ddc_reference_point(np: &NumericParams) -> ChartPoint {
    let mut p = ChartPoint::centered(np, vec![-1.3, 2.2]);
    p.t = vec![0.4, 1.1];
    for (k, w) in p.w.iter_mut().flatten().enumerate() {
        *w = (0.1 + 0.05 * k as f64, -0.2 + 0.03 * k as f64);
    }
    p
}

/// The `κ` from [`DDC_FACTORS`] that best matches `ω` at the reference point.
pub fn ddc_normalization(np: &NumericParams, spec: &PotentialSpec) -> Result<f64> {
    check_family(np, spec)?;
    let p = ddc_reference_point(np);
    let om = omega_values(np, &p);
    let mut best = (f64::INFINITY, DDC_FACTORS[0]);
    for k in DDC_FACTORS {
        let r = max_diff(&ddc_matrix(np, &p, spec, k)?, &om);
        if r < best.0 {
            best = (r, k);
        }
    }
    Ok(best.1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DdcResult {
    pub kappa: f64,
    /// Largest entry of `|dd^c H - ω|`.
    pub residual: f64,
}

pub fn ddc_check(point: &ChartPoint, spec: &PotentialSpec, np: &NumericParams) -> Result<DdcResult> {
    point.validate(np)?;
    let kappa = ddc_normalization(np, spec)?;
    let residual = max_diff(&ddc_matrix(np, point, spec, kappa)?, &omega_values(np, point));
    Ok(DdcResult { kappa, residual })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialReport {
    pub samples: usize,
    pub h_min: f64,
    /// Range of `H/(ξ_1² + ξ_2²)` over all samples.
    pub quadratic_ratio: (f64, f64),
    /// Range of `H/ρ²` over samples with `ρ` at least `core`.
    pub rho_ratio: (f64, f64),
    pub core: f64,
    /// `max |dH|²_g / H`, so that `dH ⊗ dH ≤ C′ H g`.
    pub c_prime: f64,
}

/// Samples a `k × k` grid with `k² ≈ budget`, `ξ_1 ∈ [-extent, 0)`, `ξ_2 ∈ (1, 1 + extent]`.
pub fn potential_properties(spec: &PotentialSpec, np: &NumericParams, budget: usize, extent: f64) -> Result<PotentialReport> {
    check_family(np, spec)?;
    let k = (budget as f64).sqrt().ceil().max(2.0) as usize;
    let core = (extent / 10.0).max(2.0);
    let axis = |i: usize| 1e-3 * (extent / 1e-3).powf(i as f64 / (k - 1) as f64);
    let dim = np.dim();
    let mut rep = PotentialReport {
        samples: 0,
        h_min: f64::INFINITY,
        quadratic_ratio: (f64::INFINITY, 0.0),
        rho_ratio: (f64::INFINITY, 0.0),
        core,
        c_prime: 0.0,
    };
    for i in 0..k {
        for j in 0..k {
            let (x1, x2) = (-axis(i), 1.0 + axis(j));
            let hv = h(x1, x2, spec)?;
            rep.samples += 1;
            rep.h_min = rep.h_min.min(hv);
            let q = hv / (x1 * x1 + x2 * x2);
            rep.quadratic_ratio = (rep.quadratic_ratio.0.min(q), rep.quadratic_ratio.1.max(q));
            let rho = x2 - x1;
            if rho >= core {
                let r = hv / (rho * rho);
                rep.rho_ratio = (rep.rho_ratio.0.min(r), rep.rho_ratio.1.max(r));
            }
            let g = metric_values(np, &ChartPoint::centered(np, vec![x1, x2]), Which::G)?;
            let gi = DMatrix::from_row_slice(dim, dim, &g).try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
            let (d1, d2) = dh_coefficients(x1, x2, spec);
            let dh2 = gi[(0, 0)] * d1 * d1 + 2.0 * gi[(0, 1)] * d1 * d2 + gi[(1, 1)] * d2 * d2;
            rep.c_prime = rep.c_prime.max(dh2 / hv);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartmetric::tests::l2;
    use rand::SeedableRng;

    #[test]
    fn closed_forms_match_quadrature() {
        for n in [2usize, 3, 4] {
            for x in [0.0, 0.5, 3.0, 40.0] {
                let q = integrate(|t| 1.0 / geometric(n, t).0, 0.0, x, Tolerance::default()).unwrap().0;
                assert!((integral_term(n, x).unwrap() - q).abs() < 1e-12 * (1.0 + q), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn example_values() {
        let s3 = PotentialSpec::new(3.0, 3).unwrap();
        assert!((h(0.0, 1.0, &s3).unwrap() - (3.0 - 0.5 + 2f64.ln())).abs() < 1e-15);
        let s2 = PotentialSpec::new(2.5, 2).unwrap();
        assert!((h(-2.0, 3.0, &s2).unwrap() - (2.0 + 2.0 + 4.5 + 2.5)).abs() < 1e-14);
        assert!(PotentialSpec::new(2.0, 3).is_err());
    }

    #[test]
    fn potential_jet_matches_finite_differences() {
        let s = PotentialSpec::new(3.0, 5).unwrap();
        let x = [-1.7, 2.4];
        let j = h_generic(&s, Jet::var(x[0], 0), Jet::var(x[1], 1)).unwrap();
        let f = |y: &[f64]| h(y[0], y[1], &s).unwrap();
        for i in 0..2 {
            assert!((j.grad(i) - crate::jet::fd_first(f, &x, i, 1e-6)).abs() < 1e-7);
            let (d1, d2) = dh_coefficients(x[0], x[1], &s);
            assert!((j.grad(i) - [d1, d2][i]).abs() < 1e-13);
            for k in 0..2 {
                assert!((j.hess(i, k) - crate::jet::fd_second(f, &x, i, k, 1e-4)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn ddc_h_is_omega() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 3, 4] {
            let np = l2(n, 0);
            let s = PotentialSpec::new(3.0, n).unwrap();
            for _ in 0..5 {
                let p = ChartPoint::random(&np, &mut rng);
                let r = ddc_check(&p, &s, &np).unwrap();
                assert!(r.residual < 1e-9, "n={n} {r:?}");
            }
        }
    }

    #[test]
    fn real_part_of_holomorphic_square_is_pluriharmonic() {
        let np = l2(3, 0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let off = np.base_offset(0);
        for _ in 0..5 {
            let p = ChartPoint::random(&np, &mut rng);
            for kappa in [1.0, -1.0] {
                let m = ddc_of(&np, &p, kappa, |x| Ok(x[off] * x[off] - x[off + 1] * x[off + 1] + x[off] * 3.0)).unwrap();
                assert!(m.iter().all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn properties_on_a_grid() {
        let np = l2(3, 0);
        let s = PotentialSpec::new(3.0, 3).unwrap();
        let r = potential_properties(&s, &np, 400, 1e3).unwrap();
        assert!(r.h_min > 0.25);
        assert!(r.quadratic_ratio.0 > 0.25 && r.quadratic_ratio.1 <= 3.0 + 1.5);
        assert!(r.rho_ratio.0 > 0.0 && r.rho_ratio.1.is_finite());
        assert!(r.c_prime.is_finite());
    }
}
