//! Christoffel symbols, Riemann and Ricci tensors from a second-order metric jet.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use super::{eigen_range, metric_tensor, ChartPoint, MetricJet, NumericParams, Which};
use crate::error::{Error, Result};

/// Condition numbers above this are refused.
pub const MAX_CONDITION: f64 = 1e14;

#[derive(Clone, Debug)]
pub struct Curvature {
    pub dim: usize,
    pub g_inv: Vec<f64>,
    /// `christoffel[(e * n + a) * n + b] = Γ^e_{ab}`
    pub christoffel: Vec<f64>,
    /// `riemann[((a * n + b) * n + c) * n + d] = R_{abcd}`, with `Ric_{bd} = g^{ac} R_{abcd}`
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub norm_rm: f64,
    pub norm_ric: f64,
    pub condition: f64,
}

impl Curvature {
    pub fn gamma(&self, e: usize, a: usize, b: usize) -> f64 {
        self.christoffel[(e * self.dim + a) * self.dim + b]
    }

    /// `|T|_g` for a covariant 2-tensor stored row-major.
    pub fn norm2_tensor(&self, t: &[f64]) -> f64 {
        let n = self.dim;
        let gi = &self.g_inv;
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut raised = 0.0;
                for c in 0..n {
                    for d in 0..n {
                        raised += gi[a * n + c] * gi[b * n + d] * t[c * n + d];
                    }
                }
                s += raised * t[a * n + b];
            }
        }
        s.max(0.0).sqrt()
    }
}

pub fn curvature_from_jet(m: &MetricJet) -> Result<Curvature> {
    let n = m.dim;
    let gm = m.matrix();
    let (lo, hi) = eigen_range(&gm);
    if lo <= 0.0 {
        return Err(Error::NotPositiveDefinite(lo));
    }
    let condition = hi / lo;
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned(condition));
    }
    let gi_m: DMatrix<f64> = gm.try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
    let gi: Vec<f64> = (0..n * n).map(|k| gi_m[(k / n, k % n)]).collect();
    let dg = |c: usize, a: usize, b: usize| m.dg[(c * n + a) * n + b];
    let d2g = |c: usize, d: usize, a: usize, b: usize| m.d2g[((c * n + d) * n + a) * n + b];

    // first kind Γ_{c,ab}
    let mut g1 = vec![0.0; n * n * n];
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                g1[(c * n + a) * n + b] = 0.5 * (dg(a, b, c) + dg(b, a, c) - dg(c, a, b));
            }
        }
    }
    let mut gamma = vec![0.0; n * n * n];
    for e in 0..n {
        for a in 0..n {
            for b in 0..n {
                gamma[(e * n + a) * n + b] = (0..n).map(|c| gi[e * n + c] * g1[(c * n + a) * n + b]).sum();
            }
        }
    }
    let mut riemann = vec![0.0; n.pow(4)];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let second = 0.5 * (d2g(b, c, a, d) + d2g(a, d, b, c) - d2g(b, d, a, c) - d2g(a, c, b, d));
                    let mut quad = 0.0;
                    for f in 0..n {
                        quad += g1[(f * n + b) * n + c] * gamma[(f * n + a) * n + d]
                            - g1[(f * n + b) * n + d] * gamma[(f * n + a) * n + c];
                    }
                    riemann[((a * n + b) * n + c) * n + d] = second + quad;
                }
            }
        }
    }
    let mut ricci = vec![0.0; n * n];
    for b in 0..n {
        for d in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                for c in 0..n {
                    s += gi[a * n + c] * riemann[((a * n + b) * n + c) * n + d];
                }
            }
            ricci[b * n + d] = s;
        }
    }
    let norm_rm = riemann_norm(&riemann, &gi, n);
    let mut out = Curvature { dim: n, g_inv: gi, christoffel: gamma, riemann, ricci, norm_rm, norm_ric: 0.0, condition };
    out.norm_ric = out.norm2_tensor(&out.ricci);
    Ok(out)
}

fn riemann_norm(r: &[f64], gi: &[f64], n: usize) -> f64 {
    // raise one index at a time
    let mut t = r.to_vec();
    for slot in 0..4 {
        let mut next = vec![0.0; n.pow(4)];
        let stride = n.pow(3 - slot as u32);
        for idx in 0..n.pow(4) {
            let k = (idx / stride) % n;
            let base = idx - k * stride;
            let mut s = 0.0;
            for m in 0..n {
                s += gi[k * n + m] * t[base + m * stride];
            }
            next[idx] = s;
        }
        t = next;
    }
    r.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
}

pub fn curvature(np: &NumericParams, point: &ChartPoint, which: Which) -> Result<Curvature> {
    curvature_from_jet(&metric_tensor(np, point, which)?)
}

/// `∇²σ_1 = -Σ_{c ∈ ξ} Γ^c_{ab}` since `σ_1` is the sum of the `ξ` coordinates.
pub fn hessian_sigma1(curv: &Curvature, l: usize) -> Vec<f64> {
    let n = curv.dim;
    let mut h = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            h[a * n + b] = -(0..l).map(|c| curv.gamma(c, a, b)).sum::<f64>();
        }
    }
    h
}

/// Candidate values of `s` in `Ric + s·a·∇²σ_1 = 0`.
pub const SOLITON_COEFFICIENTS: [f64; 6] = [1.0, -1.0, 2.0, -2.0, 0.5, -0.5];

static SOLITON_COEFFICIENT: OnceLock<f64> = OnceLock::new();

/// The calibrated `s` in `Ric + s·a·∇²σ_1 = 0`, once a soliton residual with `a > 0` has run.
pub fn soliton_sign() -> Option<f64> {
    SOLITON_COEFFICIENT.get().copied()
}

/// `|Ric + s·a·∇²σ_1|_g`.
///
/// `X = a K_1` is Killing and `JX` is a gradient field with potential
/// proportional to `a σ_1`, so `½ L_{JX} g` is a multiple of `a ∇²σ_1`.
/// The first call with `a > 0` picks `s` from [`SOLITON_COEFFICIENTS`]
/// by smallest residual; later calls reuse it.
pub fn soliton_residual(np: &NumericParams, point: &ChartPoint) -> Result<f64> {
    let curv = curvature(np, point, Which::G)?;
    if np.a == 0.0 {
        return Ok(curv.norm_ric);
    }
    let hess = hessian_sigma1(&curv, np.l);
    let resid = |s: f64| {
        let t: Vec<f64> = curv.ricci.iter().zip(&hess).map(|(r, h)| r + s * np.a * h).collect();
        curv.norm2_tensor(&t)
    };
    let s = *SOLITON_COEFFICIENT.get_or_init(|| {
        SOLITON_COEFFICIENTS.into_iter().min_by(|x, y| resid(*x).total_cmp(&resid(*y))).unwrap()
    });
    Ok(resid(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{Jet, Real};

    /// Round unit sphere in stereographic-free polar form: `dθ² + sin²θ dφ² + …` built recursively.
    fn sphere_metric<T: Real>(x: &[T]) -> Vec<T> {
        let n = x.len();
        let mut g = vec![T::zero(); n * n];
        let mut f = T::cst(1.0);
        for i in 0..n {
            g[i * n + i] = f;
            let s = sin(x[i]);
            f = f * s * s;
        }
        g
    }

    fn sin<T: Real>(x: T) -> T {
        let v = x.val();
        x.chain(v.sin(), v.cos(), -v.sin())
    }

    #[test]
    fn round_sphere_is_einstein() {
        for n in [2usize, 3, 4] {
            let x: Vec<f64> = (0..n).map(|i| 0.7 + 0.2 * i as f64).collect();
            let m: Vec<Jet> = sphere_metric(&Jet::seed(&x));
            let c = curvature_from_jet(&MetricJet::from_jets(&m, n)).unwrap();
            for a in 0..n {
                for b in 0..n {
                    let want = (n as f64 - 1.0) * m[a * n + b].v;
                    assert!((c.ricci[a * n + b] - want).abs() < 1e-10, "n={n} ({a},{b})");
                }
            }
            // |Rm|² = 2n(n-1) for unit curvature
            assert!((c.norm_rm - (2.0 * n as f64 * (n as f64 - 1.0)).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_polar_and_constant_metrics() {
        let x = [1.7, 0.3];
        let r = Jet::var(x[0], 0);
        let m = vec![Jet::constant(1.0), Jet::constant(0.0), Jet::constant(0.0), r * r];
        let c = curvature_from_jet(&MetricJet::from_jets(&m, 2)).unwrap();
        assert!(c.norm_rm < 1e-14);
        assert!((c.gamma(0, 1, 1) + x[0]).abs() < 1e-14);
        let e = curvature_from_jet(&MetricJet::constant(vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], 3)).unwrap();
        assert_eq!(e.norm_rm, 0.0);
        assert_eq!(e.norm_ric, 0.0);
        assert!(e.christoffel.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_indefinite() {
        let m = MetricJet::constant(vec![1.0, 0.0, 0.0, -1.0], 2);
        assert!(matches!(curvature_from_jet(&m), Err(Error::NotPositiveDefinite(_))));
    }
}
