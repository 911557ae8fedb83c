//! Distance surrogates, the g/g′ deviation, the regular/singular split, connecting
//! curves, curvature scans along rays and volume growth.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{curvature, metric_values, ChartPoint, NumericParams, Which};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Width of the strip along `∂D̊` left out of volume integrals.
pub const VOLUME_COLLAR: f64 = 1e-3;

/// The `(α, c)` used to tag scan rows.
pub const DEFAULT_REGION: (f64, f64) = (0.5, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Surrogates {
    /// `ξ_l - ξ_1`
    pub rho: f64,
    /// `√(Σ r_j² + σ²)` in the flat model
    pub cone_radius: f64,
}

pub fn rho_surrogate(np: &NumericParams, point: &ChartPoint) -> Surrogates {
    let xi = &point.xi;
    let l = np.l;
    let mut sum = 0.0;
    for j in 0..l - 1 {
        let p_nc: f64 = xi.iter().map(|x| np.alpha[j] - x).product();
        sum += (-4.0 * p_nc / np.pi[j]).max(0.0);
    }
    let sigma = xi.iter().sum::<f64>() - np.alpha.iter().sum::<f64>();
    Surrogates { rho: xi[l - 1] - xi[0], cone_radius: (sum + sigma * sigma).sqrt() }
}

/// `F_l/P - 1` at `ξ_l`.
pub fn deviation_epsilon(np: &NumericParams, xi_l: f64) -> f64 {
    let last = np.alpha[np.l - 1];
    -(-2.0 * np.a * (xi_l - last)).exp() * np.p_at_last / np.p_poly(xi_l)
}

/// `|g - g′|_g` from the two affected coframe entries alone.
pub fn deviation_closed_form(np: &NumericParams, xi: &[f64]) -> f64 {
    let e = deviation_epsilon(np, xi[np.l - 1]);
    let f = e / (1.0 + e);
    (e * e + f * f).sqrt()
}

/// `|g - g′|_g = √tr(g⁻¹ D g⁻¹ D)` with `D = g - g′` assembled in coordinates.
pub fn g_gprime_deviation(np: &NumericParams, point: &ChartPoint) -> Result<f64> {
    let n = np.dim();
    let g = DMatrix::from_row_slice(n, n, &metric_values(np, point, Which::G)?);
    let gp = DMatrix::from_row_slice(n, n, &metric_values(np, point, Which::GPrime)?);
    let gi = g.clone().try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
    let m = &gi * (&g - &gp);
    Ok((&m * &m).trace().max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Regular,
    Singular,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Regular => "regular",
            Region::Singular => "singular",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionTag {
    pub alpha_exp: f64,
    pub c: f64,
    pub tag: Region,
}

/// Regular iff `ξ_l > c (ξ_l - ξ_1)^α`; equality counts as singular.
pub fn region_classify(xi: &[f64], alpha_exp: f64, c: f64) -> Result<RegionTag> {
    if !(alpha_exp > 0.0 && alpha_exp < 1.0) {
        return Err(Error::Unsupported(format!("region exponent {alpha_exp} not in (0, 1)")));
    }
    if !(c > 0.0) {
        return Err(Error::Unsupported(format!("region constant {c} not positive")));
    }
    let l = xi.len();
    let tag = if xi[l - 1] > c * (xi[l - 1] - xi[0]).powf(alpha_exp) { Region::Regular } else { Region::Singular };
    Ok(RegionTag { alpha_exp, c, tag })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveTarget {
    /// Move `ξ_l` up until the point enters the regular region.
    Regular,
    /// Move `ξ_l` down to `α_l`.
    XiLEqualsAlphaL,
}

/// Coefficients of `s ↦ P(α_l + s)`.
fn p_shifted(np: &NumericParams) -> Vec<f64> {
    let last = np.alpha[np.l - 1];
    let mut c = vec![1.0];
    for j in 0..np.l - 1 {
        let root = last - np.alpha[j];
        for _ in 0..=np.d[j] {
            let mut next = vec![0.0; c.len() + 1];
            for (k, v) in c.iter().enumerate() {
                next[k] += root * v;
                next[k + 1] += v;
            }
            c = next;
        }
    }
    c
}

/// `F_l(α_l + s)/s` without cancellation for small `s > 0`.
fn f_last_over_s(np: &NumericParams, coeffs: &[f64], s: f64) -> f64 {
    let poly = coeffs[1..].iter().rev().fold(0.0, |acc, c| acc * s + c);
    let k = 2.0 * np.a;
    let expo = if s == 0.0 { k } else { -(-k * s).exp_m1() / s };
    poly + np.p_at_last * expo
}

/// Length of the curve that moves only `ξ_l`, measured in `g`.
///
/// Returns 0 when the point already lies in the target set.
pub fn connecting_curve_length(
    np: &NumericParams,
    xi: &[f64],
    alpha_exp: f64,
    c: f64,
    target: CurveTarget,
) -> Result<f64> {
    let l = np.l;
    let last = np.alpha[l - 1];
    if target == CurveTarget::XiLEqualsAlphaL && xi.len() == l && xi[l - 1] <= last {
        return Ok(0.0);
    }
    np.check_domain(xi)?;
    if target == CurveTarget::Regular && region_classify(xi, alpha_exp, c)?.tag == Region::Regular {
        return Ok(0.0);
    }
    let (lo, hi) = match target {
        CurveTarget::XiLEqualsAlphaL => (last, xi[l - 1]),
        CurveTarget::Regular => (xi[l - 1], regular_entry(xi[0], xi[l - 1], alpha_exp, c)),
    };
    let coeffs = p_shifted(np);
    let others = &xi[..l - 1];
    // t = α_l + u², which removes the inverse square root at α_l
    let integrand = |u: f64| {
        let s = u * u;
        let t = last + s;
        let num = np.p_c(t) * others.iter().map(|x| t - x).product::<f64>();
        2.0 * (num / f_last_over_s(np, &coeffs, s)).sqrt()
    };
    let (v, _) = integrate(integrand, (lo - last).sqrt(), (hi - last).sqrt(), Tolerance::default())?;
    Ok(v)
}

/// The `s > ξ_l` with `s = (c + ½)(s - ξ_1)^α`, which sits strictly inside
/// `c(s - ξ_1)^α < s < (c + 1)(s - ξ_1)^α`.
fn regular_entry(xi1: f64, xil: f64, alpha_exp: f64, c: f64) -> f64 {
    let k = c + 0.5;
    let h = |s: f64| s - k * (s - xi1).powf(alpha_exp);
    let mut lo = xil;
    let mut hi = xil.abs().max(1.0) * 2.0;
    while h(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    if h(lo) > 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi.abs() {
            break;
        }
    }
    hi
}

/// A one-parameter family of points with `t = 0`, `w = 0` and the middle `ξ`
/// at the midpoints of their intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ray {
    /// `ξ_1` fixed, `ξ_l = α_l + s` for `s` from `from` to `to`.
    Regular { xi1: f64, from: f64, to: f64 },
    /// `ξ_l` fixed, `ξ_1 = α_1 - s` for `s` from `from` to `to`.
    Singular { xil: f64, from: f64, to: f64 },
}

impl Ray {
    /// `samples` points, geometrically spaced in `s`.
    pub fn points(&self, np: &NumericParams, samples: usize) -> Vec<Vec<f64>> {
        let l = np.l;
        let (from, to) = match *self {
            Ray::Regular { from, to, .. } | Ray::Singular { from, to, .. } => (from, to),
        };
        let ratio = (to / from).ln();
        (0..samples)
            .map(|k| {
                let s = if samples == 1 { from } else { from * (ratio * k as f64 / (samples - 1) as f64).exp() };
                let mut xi: Vec<f64> = (0..l).map(|j| if j == 0 || j + 1 == l { 0.0 } else { 0.5 * (np.alpha[j - 1] + np.alpha[j]) }).collect();
                match *self {
                    Ray::Regular { xi1, .. } => {
                        xi[0] = xi1;
                        xi[l - 1] = np.alpha[l - 1] + s;
                    }
                    Ray::Singular { xil, .. } => {
                        xi[0] = np.alpha[0] - s;
                        xi[l - 1] = xil;
                    }
                }
                xi
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    pub rho: f64,
    pub surrogate: f64,
    pub norm_rm: f64,
    pub norm_ric: f64,
    pub deviation: f64,
    pub region: Region,
}

impl DecayRow {
    pub const CSV_HEADER: &'static str = "rho,surrogate,norm_rm,norm_ric,deviation,region";

    pub fn csv(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.rho, self.surrogate, self.norm_rm, self.norm_ric, self.deviation, self.region
        )
    }
}

/// Curvature of `g` along a ray; rows come back in ray order.
pub fn curvature_decay_scan(np: &NumericParams, ray: &Ray, samples: usize) -> Result<Vec<DecayRow>> {
    let (ae, c) = DEFAULT_REGION;
    ray.points(np, samples)
        .into_par_iter()
        .map(|xi| {
            let point = ChartPoint::centered(np, xi);
            let curv = curvature(np, &point, Which::G)?;
            let s = rho_surrogate(np, &point);
            Ok(DecayRow {
                rho: s.rho,
                surrogate: s.cone_radius,
                norm_rm: curv.norm_rm,
                norm_ric: curv.norm_ric,
                deviation: deviation_closed_form(np, &point.xi),
                region: region_classify(&point.xi, ae, c)?.tag,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeRow {
    pub r: f64,
    pub volume: f64,
    pub err: f64,
}

impl VolumeRow {
    pub const CSV_HEADER: &'static str = "R,volume,err";

    pub fn csv(&self) -> String {
        format!("{:.16e},{:.16e},{:.16e}", self.r, self.volume, self.err)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeFit {
    pub rows: Vec<VolumeRow>,
    /// Least-squares slope of `log Vol` against `log R`.
    pub slope: f64,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `√det` of the metric at `(ξ, t = 0, w = 0)` integrated over the base and torus.
fn volume_density(np: &NumericParams, xi: &[f64], which: Which) -> Result<f64> {
    let n = np.dim();
    let point = ChartPoint::centered(np, xi.to_vec());
    let det = DMatrix::from_row_slice(n, n, &metric_values(np, &point, which)?).determinant();
    // at w = 0 each Fubini-Study block contributes 2^{d_j} to √det, and
    // ∫ (1 + |w|²)^{-(d+1)} over ℂ^d is π^d/d!
    let base: f64 = np.d.iter().map(|&d| (std::f64::consts::PI / 2.0).powi(d as i32) / factorial(d)).product();
    Ok(det.max(0.0).sqrt() * base * np.torus_volume)
}

/// `Vol{ξ_l - ξ_1 ≤ R}` for `l = 2`, with the boundary collar excised and bounded.
pub fn volume_within(np: &NumericParams, r: f64, which: Which) -> Result<VolumeRow> {
    if np.l != 2 {
        return Err(Error::Unsupported("volume growth is implemented for l = 2".into()));
    }
    let (a1, a2) = (np.alpha[0], np.alpha[1]);
    let delta = VOLUME_COLLAR;
    if r <= a2 - a1 + 2.0 * delta {
        return Err(Error::Unsupported(format!("radius {r} does not reach past the collar")));
    }
    let tol = Tolerance { abs: 0.0, rel: 1e-12, max_intervals: 200 };
    let failure = std::cell::Cell::new(None);
    let density = |x1: f64, x2: f64| match volume_density(np, &[x1, x2], which) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let inner = |x2: f64| match integrate(|x1| density(x1, x2), x2 - r, a1 - delta, tol) {
        Ok((v, _)) => v,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let outcome = integrate(inner, a2 + delta, a1 - delta + r, tol);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let (volume, quad_err) = outcome?;
    let sup = density(a1 - delta, a1 + r - delta).max(density(a2 + delta - r, a2 + delta));
    let collar = 2.0 * delta * (r - (a2 - a1));
    Ok(VolumeRow { r, volume, err: sup * collar + quad_err })
}

pub fn volume_growth_fit(np: &NumericParams, radii: &[f64], which: Which) -> Result<VolumeFit> {
    let rows = radii.iter().map(|&r| volume_within(np, r, which)).collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|row| (row.r.ln(), row.volume.ln())).collect();
    Ok(VolumeFit { slope: least_squares_slope(&pts), rows })
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviationRow {
    pub xi_l: f64,
    pub deviation: f64,
    /// `deviation · ξ_l^{n-1}`
    pub scaled: f64,
}

/// Closed-form deviation along `ξ_1 = xi1` (middle `ξ` at midpoints) for the given `ξ_l` values.
pub fn deviation_scan(np: &NumericParams, xi1: f64, xi_l: &[f64]) -> Vec<DeviationRow> {
    xi_l.iter()
        .map(|&x| {
            let xi = Ray::Regular { xi1, from: 1.0, to: 1.0 }.points(np, 1).remove(0);
            let mut xi = xi;
            xi[np.l - 1] = x;
            let deviation = deviation_closed_form(np, &xi);
            DeviationRow { xi_l: x, deviation, scaled: deviation * x.powi(np.n as i32 - 1) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartmetric::tests::l2;

    #[test]
    fn surrogates_at_example_point() {
        let np = l2(3, 0);
        let s = rho_surrogate(&np, &ChartPoint::centered(&np, vec![-1.0, 2.0]));
        assert_eq!(s.rho, 3.0);
        assert!((s.cone_radius - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn deviation_at_example_point() {
        let np = l2(3, 0);
        assert!((deviation_epsilon(&np, 2.0) + 0.25).abs() < 1e-15);
        let want = (1.0f64 / 16.0 + 1.0 / 9.0).sqrt();
        let p = ChartPoint::centered(&np, vec![-1.0, 2.0]);
        assert!((deviation_closed_form(&np, &p.xi) - want).abs() < 1e-15);
        assert!((g_gprime_deviation(&np, &p).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn region_examples() {
        assert_eq!(region_classify(&[-100.0, 2.0], 0.5, 1.0).unwrap().tag, Region::Singular);
        assert_eq!(region_classify(&[-1.0, 100.0], 0.5, 1.0).unwrap().tag, Region::Regular);
        // 3 = (12 - 3)^{1/2}
        assert_eq!(region_classify(&[-6.0, 3.0], 0.5, 1.0).unwrap().tag, Region::Singular);
        assert!(region_classify(&[-1.0, 2.0], 1.0, 1.0).is_err());
        assert!(region_classify(&[-1.0, 2.0], 0.5, 0.0).is_err());
    }

    #[test]
    fn shifted_polynomial_and_stable_quotient() {
        let np = l2(4, 1);
        let c = p_shifted(&np);
        // P(t) = t³ around α_2 = 1
        assert_eq!(c, vec![1.0, 3.0, 3.0, 1.0]);
        for s in [1e-12, 1e-3, 0.7, 4.0] {
            let naive = np.f_last_f64(1.0 + s) / s;
            let stable = f_last_over_s(&np, &c, s);
            if s > 1e-4 {
                assert!((naive - stable).abs() < 1e-9 * stable.abs());
            }
            assert!(stable > 0.0);
        }
        assert_eq!(f_last_over_s(&np, &c, 0.0), 3.0 + 2.0);
    }

    #[test]
    fn regular_entry_is_bracketed() {
        for (x1, xl, ae, c) in [(-100.0, 1.5, 0.5, 1.0), (-1e4, 2.0, 0.3, 2.0), (-50.0, 1.1, 0.7, 0.5)] {
            let s = regular_entry(x1, xl, ae, c);
            assert!(s > xl);
            assert!(c * (s - x1).powf(ae) < s);
            assert!(s < (c + 1.0) * (s - x1).powf(ae));
        }
    }

    #[test]
    fn curve_to_wall_is_zero_on_the_wall() {
        let np = l2(3, 0);
        assert_eq!(connecting_curve_length(&np, &[-5.0, 1.0], 0.5, 1.0, CurveTarget::XiLEqualsAlphaL).unwrap(), 0.0);
        assert_eq!(connecting_curve_length(&np, &[-1.0, 100.0], 0.5, 1.0, CurveTarget::Regular).unwrap(), 0.0);
    }

    #[test]
    fn ray_points_are_ordered() {
        let np = l2(3, 0);
        let pts = Ray::Singular { xil: 1.5, from: 1.0, to: 1000.0 }.points(&np, 5);
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], vec![-1.0, 1.5]);
        assert!((pts[4][0] + 1000.0).abs() < 1e-9);
        assert!(pts.windows(2).all(|w| w[1][0] < w[0][0]));
    }

    #[test]
    fn slope_of_exact_power() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 5.0].iter().map(|x| (x.ln(), 3.0 * x.ln() + 0.2)).collect();
        assert!((least_squares_slope(&pts) - 3.0).abs() < 1e-14);
    }
}
