//! The metrics g and g′, the 2-form ω and the complex structure J on an explicit
//! local chart `(ξ, t, w)` of the open dense orbit, plus curvature and asymptotics.

pub mod asymptotics;
pub mod curvature;
pub mod kahler;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::coneinv::lattice_vectors;
use crate::error::{Error, Result};
use crate::flatmodel::connection_coefficients_f64;
use crate::jet::{fd_first, fd_second, Jet, Real, MAX_VARS};
use crate::number::ExactField;
use crate::params::{delta_constant, SolitonParams};

pub use asymptotics::*;
pub use curvature::*;
pub use kahler::*;

/// Points with `|w|` at or beyond this radius are refused.
pub const AFFINE_CHART_RADIUS: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    G,
    GPrime,
}

/// Floating-point view of validated parameters plus derived constants.
#[derive(Clone, Debug)]
pub struct NumericParams {
    pub n: usize,
    pub l: usize,
    pub d: Vec<usize>,
    pub alpha: Vec<f64>,
    pub a: f64,
    /// `c[r][j]` with `dθ_r = Σ_j c[r][j] ω̌_j⁰`
    pub conn: Vec<Vec<f64>>,
    /// `Δ_j(α_1, …, α_{l-1})`, signed
    pub pi: Vec<f64>,
    /// `P(α_l)`
    pub p_at_last: f64,
    /// `|det(v_1, …, v_l)|`, the volume of the torus in `t` coordinates with unit periods.
    pub torus_volume: f64,
}

impl NumericParams {
    pub fn new(params: &SolitonParams) -> Result<Self> {
        let l = params.l();
        let n = params.n();
        if 2 * n > MAX_VARS {
            return Err(Error::Unsupported(format!("chart dimension {} exceeds {MAX_VARS}", 2 * n)));
        }
        let alpha = params.alpha_f64();
        let pi = (0..l - 1).map(|j| delta_constant(params.alpha(), j).to_f64()).collect();
        let d = params.partition().d().to_vec();
        let p_at_last = (0..l - 1).map(|j| (alpha[l - 1] - alpha[j]).powi(d[j] as i32 + 1)).product();
        let v: Vec<f64> = lattice_vectors(params).iter().flatten().map(|x| x.to_f64()).collect();
        let torus_volume = DMatrix::from_row_slice(l, l, &v).determinant().abs();
        Ok(NumericParams {
            n,
            l,
            d,
            alpha,
            a: params.a_f64(),
            conn: connection_coefficients_f64(params),
            pi,
            p_at_last,
            torus_volume,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// First coordinate index of base factor `j` (2 reals per complex coordinate).
    pub fn base_offset(&self, j: usize) -> usize {
        2 * self.l + 2 * self.d[..j].iter().sum::<usize>()
    }

    pub fn p_c<T: Real>(&self, t: T) -> T {
        (0..self.l - 1).fold(T::cst(1.0), |acc, j| acc * (t - self.alpha[j]).powi(self.d[j] as u32))
    }

    pub fn p_poly<T: Real>(&self, t: T) -> T {
        (0..self.l - 1).fold(T::cst(1.0), |acc, j| acc * (t - self.alpha[j]).powi(self.d[j] as u32 + 1))
    }

    /// `F_j`; equals `P` unless `j` is the last index and `which` is `G`.
    pub fn f_j<T: Real>(&self, j: usize, t: T, which: Which) -> T {
        let p = self.p_poly(t);
        if j + 1 < self.l || which == Which::GPrime {
            return p;
        }
        let last = self.alpha[self.l - 1];
        p - ((t - last) * (-2.0 * self.a)).exp() * self.p_at_last
    }

    pub fn f_last_f64(&self, t: f64) -> f64 {
        self.f_j(self.l - 1, t, Which::G)
    }

    pub fn check_domain(&self, xi: &[f64]) -> Result<()> {
        let l = self.l;
        if xi.len() != l {
            return Err(Error::AlphaCount { expected: l, got: xi.len() });
        }
        for j in 0..l - 1 {
            let lower = if j == 0 { f64::NEG_INFINITY } else { self.alpha[j - 1] };
            if !(xi[j] > lower && xi[j] < self.alpha[j]) {
                return Err(Error::OutsideDomain(format!("xi_{} = {}", j + 1, xi[j])));
            }
        }
        if !(xi[l - 1] > self.alpha[l - 1]) {
            return Err(Error::OutsideDomain(format!("xi_{} = {}", l, xi[l - 1])));
        }
        Ok(())
    }
}

/// A point `(ξ, t, w)`; `w[j]` holds the affine coordinates of the `j`-th projective factor.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub xi: Vec<f64>,
    pub t: Vec<f64>,
    pub w: Vec<Vec<(f64, f64)>>,
}

impl ChartPoint {
    /// Torus angles and base coordinates at the chart centre.
    pub fn centered(np: &NumericParams, xi: Vec<f64>) -> Self {
        ChartPoint { t: vec![0.0; np.l], w: np.d.iter().map(|&d| vec![(0.0, 0.0); d]).collect(), xi }
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut x = self.xi.clone();
        x.extend(&self.t);
        for f in &self.w {
            for &(re, im) in f {
                x.push(re);
                x.push(im);
            }
        }
        x
    }

    pub fn validate(&self, np: &NumericParams) -> Result<()> {
        np.check_domain(&self.xi)?;
        if self.t.len() != np.l || self.w.len() != np.l - 1 || self.w.iter().zip(&np.d).any(|(w, &d)| w.len() != d) {
            return Err(Error::OutsideDomain("chart point shape does not match the partition".into()));
        }
        for f in &self.w {
            let r = f.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            if r >= AFFINE_CHART_RADIUS {
                return Err(Error::OutsideAffineChart(r));
            }
        }
        Ok(())
    }

    pub fn with_t(&self, t: Vec<f64>) -> Self {
        ChartPoint { t, ..self.clone() }
    }

    /// Uniform interior sample: `ξ` at least 0.2 inside each interval, `|w_k| ≤ 0.5`.
    pub fn random(np: &NumericParams, rng: &mut impl Rng) -> Self {
        let l = np.l;
        let a = &np.alpha;
        let mut xi = Vec::with_capacity(l);
        for j in 0..l {
            let (lo, hi) = if j == 0 {
                (a[0] - 5.0, a[0] - 0.2)
            } else if j + 1 < l {
                let gap = a[j] - a[j - 1];
                (a[j - 1] + 0.1 * gap, a[j] - 0.1 * gap)
            } else {
                (a[l - 1] + 0.2, a[l - 1] + 5.0)
            };
            xi.push(rng.gen_range(lo..hi));
        }
        let t = (0..l).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let w = np.d.iter().map(|&d| (0..d).map(|_| (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect()).collect();
        ChartPoint { xi, t, w }
    }
}

/// Dense row-major square matrix over a [`Real`] scalar.
pub type Mat<T> = Vec<T>;

fn zeros<T: Real>(n: usize) -> Mat<T> {
    vec![T::zero(); n * n]
}

fn matmul<T: Real>(a: &Mat<T>, b: &Mat<T>, n: usize) -> Mat<T> {
    let mut c = zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.is_exact_zero() {
                continue;
            }
            for j in 0..n {
                c[i * n + j] = c[i * n + j] + aik * b[k * n + j];
            }
        }
    }
    c
}

fn transpose<T: Real>(a: &Mat<T>, n: usize) -> Mat<T> {
    let mut t = zeros(n);
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

/// Everything expressed in the coframe `(dξ, θ, dx_base)` before the change to coordinates.
pub struct Frame<T: Real> {
    dim: usize,
    /// `N` in `coframe = (I + N) dx`; only `θ`-rows and base columns are nonzero.
    n_mat: Mat<T>,
    g: Mat<T>,
    omega: Mat<T>,
    j: Mat<T>,
}

/// `ǧ⁰` on one affine chart of `ℂP^d`, as a real `2d × 2d` matrix in `(x_1, y_1, …)`.
pub fn fubini_study<T: Real>(w: &[T]) -> Mat<T> {
    let d = w.len() / 2;
    let m = 2 * d;
    let norm2 = (0..m).fold(T::cst(1.0), |acc, k| acc + w[k] * w[k]);
    let inv = T::cst(1.0) / (norm2 * norm2);
    let mut out = zeros(m);
    for a in 0..d {
        for b in 0..d {
            let (xa, ya, xb, yb) = (w[2 * a], w[2 * a + 1], w[2 * b], w[2 * b + 1]);
            let delta = if a == b { norm2 } else { T::zero() };
            let hr = (delta - (xa * xb + ya * yb)) * inv;
            let hi = -(xa * yb - ya * xb) * inv;
            out[(2 * a) * m + 2 * b] = hr * 2.0;
            out[(2 * a + 1) * m + 2 * b + 1] = hr * 2.0;
            out[(2 * a) * m + 2 * b + 1] = hi * 2.0;
            out[(2 * b + 1) * m + 2 * a] = hi * 2.0;
        }
    }
    out
}

/// `ω̌⁰ = i∂∂̄ log(1+|w|²)` as a real antisymmetric matrix.
pub fn fubini_study_form<T: Real>(w: &[T]) -> Mat<T> {
    let g = fubini_study(w);
    let m = w.len();
    let mut out = zeros(m);
    for a in 0..m / 2 {
        for q in 0..m {
            out[(2 * a) * m + q] = g[(2 * a + 1) * m + q];
            out[(2 * a + 1) * m + q] = -g[(2 * a) * m + q];
        }
    }
    out
}

fn sym_all<T: Real>(xs: &[T]) -> Vec<T> {
    let mut e = vec![T::zero(); xs.len() + 1];
    e[0] = T::cst(1.0);
    for (k, &x) in xs.iter().enumerate() {
        for r in (1..=k + 1).rev() {
            e[r] = e[r] + x * e[r - 1];
        }
    }
    e
}

pub fn build_frame<T: Real>(np: &NumericParams, x: &[T], which: Which) -> Frame<T> {
    let l = np.l;
    let dim = np.dim();
    let xi = &x[..l];
    let mut g = zeros(dim);
    let mut omega = zeros(dim);
    let mut jm = zeros(dim);
    let mut n_mat = zeros(dim);

    let delta = |j: usize| (0..l).filter(|&k| k != j).fold(T::cst(1.0), |acc, k| acc * (xi[j] - xi[k]));
    let mut a_coef = Vec::with_capacity(l);
    let mut s = Vec::with_capacity(l);
    for j in 0..l {
        let f = np.f_j(j, xi[j], which);
        let pc = np.p_c(xi[j]);
        a_coef.push(pc * delta(j) / f);
        let rest: Vec<T> = (0..l).filter(|&k| k != j).map(|k| xi[k]).collect();
        s.push(sym_all(&rest));
    }
    for j in 0..l {
        g[j * dim + j] = a_coef[j];
        for r in 0..l {
            for q in 0..l {
                let th = (l + r) * dim + l + q;
                g[th] = g[th] + s[j][r] * s[j][q] / a_coef[j];
            }
            omega[j * dim + l + r] = omega[j * dim + l + r] + s[j][r];
            omega[(l + r) * dim + j] = omega[(l + r) * dim + j] - s[j][r];
            jm[j * dim + l + r] = s[j][r] / a_coef[j];
            // (-1)^r for 1-based r
            let sign = if (r + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let pcf = np.p_c(xi[j]) / np.f_j(j, xi[j], which);
            jm[(l + r) * dim + j] = pcf * xi[j].powi((l - r - 1) as u32) * sign;
        }
    }
    for j in 0..l - 1 {
        let d = np.d[j];
        if d == 0 {
            continue;
        }
        let off = np.base_offset(j);
        let m = 2 * d;
        let w = &x[off..off + m];
        let p_nc = xi.iter().fold(T::cst(1.0), |acc, &v| acc * (T::cst(np.alpha[j]) - v));
        let sign_b = if (l - 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
        let b = p_nc * sign_b;
        let pi = np.pi[j];
        let s_j = pi.signum();
        let cg = b * (2.0 / pi.abs());
        let fs = fubini_study(w);
        let fw = fubini_study_form(w);
        for p in 0..m {
            for q in 0..m {
                g[(off + p) * dim + off + q] = cg * fs[p * m + q];
                omega[(off + p) * dim + off + q] = cg * fw[p * m + q] * s_j;
            }
        }
        for k in 0..d {
            let (px, py) = (off + 2 * k, off + 2 * k + 1);
            jm[px * dim + py] = T::cst(s_j);
            jm[py * dim + px] = T::cst(-s_j);
        }
        let norm2 = (0..m).fold(T::cst(1.0), |acc, k| acc + w[k] * w[k]);
        for r in 0..l {
            let c = np.conn[r][j];
            if c == 0.0 {
                continue;
            }
            for k in 0..d {
                let (xk, yk) = (w[2 * k], w[2 * k + 1]);
                n_mat[(l + r) * dim + off + 2 * k] = -yk / norm2 * c;
                n_mat[(l + r) * dim + off + 2 * k + 1] = xk / norm2 * c;
            }
        }
    }
    Frame { dim, n_mat, g, omega, j: jm }
}

impl<T: Real> Frame<T> {
    fn cf(&self) -> Mat<T> {
        let mut c = self.n_mat.clone();
        for i in 0..self.dim {
            c[i * self.dim + i] = c[i * self.dim + i] + 1.0;
        }
        c
    }

    fn cf_inv(&self) -> Mat<T> {
        // N² = 0
        let mut c: Mat<T> = self.n_mat.iter().map(|&v| -v).collect();
        for i in 0..self.dim {
            c[i * self.dim + i] = c[i * self.dim + i] + 1.0;
        }
        c
    }

    fn pull_back(&self, m: &Mat<T>) -> Mat<T> {
        let cf = self.cf();
        matmul(&transpose(&cf, self.dim), &matmul(m, &cf, self.dim), self.dim)
    }

    pub fn metric(&self) -> Mat<T> {
        self.pull_back(&self.g)
    }

    pub fn omega(&self) -> Mat<T> {
        self.pull_back(&self.omega)
    }

    /// `J^a_b` acting on vectors (equivalently `(Jα)_b = α_a J^a_b` on forms).
    pub fn complex_structure(&self) -> Mat<T> {
        matmul(&self.cf_inv(), &matmul(&self.j, &self.cf(), self.dim), self.dim)
    }

    /// Row `l + r` of the coframe matrix: the components of `θ_r`.
    pub fn theta(&self, r: usize, l: usize) -> Vec<T> {
        let cf = self.cf();
        cf[(l + r) * self.dim..(l + r + 1) * self.dim].to_vec()
    }
}

/// Metric value and derivatives at a point. Index layout `dg[(c * n + a) * n + b] = ∂_c g_ab`.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub dim: usize,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub d2g: Vec<f64>,
}

impl MetricJet {
    pub fn from_jets(m: &[Jet], dim: usize) -> Self {
        let mut dg = vec![0.0; dim * dim * dim];
        let mut d2g = vec![0.0; dim.pow(4)];
        for a in 0..dim {
            for b in 0..dim {
                let e = &m[a * dim + b];
                for c in 0..dim {
                    dg[(c * dim + a) * dim + b] = e.grad(c);
                    for d in 0..dim {
                        d2g[((c * dim + d) * dim + a) * dim + b] = e.hess(c, d);
                    }
                }
            }
        }
        MetricJet { dim, g: m.iter().map(|e| e.v).collect(), dg, d2g }
    }

    /// Constant metric with vanishing derivatives.
    pub fn constant(g: Vec<f64>, dim: usize) -> Self {
        MetricJet { dim, g, dg: vec![0.0; dim.pow(3)], d2g: vec![0.0; dim.pow(4)] }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.g)
    }
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let e = SymmetricEigen::new(m.clone()).eigenvalues;
    (e.min(), e.max())
}

pub fn metric_values(np: &NumericParams, point: &ChartPoint, which: Which) -> Result<Vec<f64>> {
    point.validate(np)?;
    Ok(build_frame(np, &point.coords(), which).metric())
}

/// `g` or `g′` with first and second derivatives; fails off the domain or if not positive definite.
pub fn metric_tensor(np: &NumericParams, point: &ChartPoint, which: Which) -> Result<MetricJet> {
    point.validate(np)?;
    let x = Jet::seed(&point.coords());
    let m = build_frame(np, &x, which).metric();
    let mj = MetricJet::from_jets(&m, np.dim());
    let (lo, _) = eigen_range(&mj.matrix());
    if lo <= 0.0 {
        return Err(Error::NotPositiveDefinite(lo));
    }
    Ok(mj)
}

/// Same as [`metric_tensor`] with derivatives from central differences of step `h`.
pub fn metric_tensor_fd(np: &NumericParams, point: &ChartPoint, which: Which, h: f64) -> Result<MetricJet> {
    point.validate(np)?;
    let dim = np.dim();
    let x = point.coords();
    let comp = |a: usize, b: usize| move |y: &[f64]| build_frame(np, y, which).metric()[a * dim + b];
    let g = build_frame(np, &x, which).metric();
    let mut dg = vec![0.0; dim.pow(3)];
    let mut d2g = vec![0.0; dim.pow(4)];
    for a in 0..dim {
        for b in a..dim {
            for c in 0..dim {
                let v = fd_first(comp(a, b), &x, c, h);
                dg[(c * dim + a) * dim + b] = v;
                dg[(c * dim + b) * dim + a] = v;
                for d in c..dim {
                    let v = fd_second(comp(a, b), &x, c, d, h.sqrt() * 1e-1);
                    for (p, q) in [(c, d), (d, c)] {
                        d2g[((p * dim + q) * dim + a) * dim + b] = v;
                        d2g[((p * dim + q) * dim + b) * dim + a] = v;
                    }
                }
            }
        }
    }
    Ok(MetricJet { dim, g, dg, d2g })
}

/// Components of `θ_r` at a point and of `dθ_r`, plus the structure constants used.
#[derive(Clone, Debug)]
pub struct ConnectionForms {
    pub coefficients: Vec<Vec<f64>>,
    /// `theta[r][b]`
    pub theta: Vec<Vec<f64>>,
    /// `dtheta[r][a * dim + b] = ∂_a θ_b - ∂_b θ_a`
    pub dtheta: Vec<Vec<f64>>,
}

pub fn local_connection_forms(np: &NumericParams, point: &ChartPoint) -> Result<ConnectionForms> {
    point.validate(np)?;
    let dim = np.dim();
    let x = Jet::seed(&point.coords());
    let frame = build_frame(np, &x, Which::G);
    let mut theta = Vec::with_capacity(np.l);
    let mut dtheta = Vec::with_capacity(np.l);
    for r in 0..np.l {
        let th = frame.theta(r, np.l);
        theta.push(th.iter().map(|e| e.v).collect());
        let mut d = vec![0.0; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                d[a * dim + b] = th[b].grad(a) - th[a].grad(b);
            }
        }
        dtheta.push(d);
    }
    Ok(ConnectionForms { coefficients: np.conn.clone(), theta, dtheta })
}
