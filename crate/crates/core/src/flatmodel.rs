//! The locally flat comparison metric g′ on the vertical and ξ blocks.

use num_traits::{One, Signed, Zero};

use crate::chartmetric::{curvature, curvature_from_jet, metric_tensor_fd, ChartPoint, NumericParams, Which};
use crate::error::{Error, Result};
use crate::number::{int, rat_to_f64, ExactField, Rat};
use crate::params::{delta_constant, sign_pow, SolitonParams};
use crate::symalg::{delta_of, sigma, ExactPoly, XiVector};

/// Coefficients `c[r][j]` with `dθ_r = Σ_j c[r][j] ω̌_j⁰`, `r < l`, `j < l-1`.
pub fn connection_coefficients<F: ExactField>(alpha: &[F]) -> Vec<Vec<F>> {
    let l = alpha.len();
    (1..=l)
        .map(|r| {
            (1..l)
                .map(|j| {
                    let aj = &alpha[j - 1];
                    let num = sign_pow::<F>(l - j + r) * F::from_i64(2) * aj.pow(l - r);
                    num / delta_constant(alpha, j - 1)
                })
                .collect()
        })
        .collect()
}

/// Vertical data in the `K_r` basis. Rows index the vector or form, columns index `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerticalFrame {
    /// `Y_j = Σ_r y[j][r] K_r`
    pub y: Vec<Vec<Rat>>,
    /// `β_i = Σ_r beta[i][r] θ_r`, `i = 0..l-1`
    pub beta: Vec<Vec<Rat>>,
    /// `T_j = t_scale[j] Y_j`
    pub t_scale: Vec<Rat>,
}

impl VerticalFrame {
    pub fn build(params: &SolitonParams) -> Result<Self> {
        let alpha = params.alpha_rational()?;
        let l = alpha.len();
        let y = alpha
            .iter()
            .map(|a| (1..=l).map(|r| sign_pow::<Rat>(r) * ExactField::pow(a, l - r)).collect())
            .collect();
        let head = &alpha[..l - 1];
        let mut beta = vec![(1..=l).map(|r| sigma(head, r - 1)).collect::<Vec<_>>()];
        for i in 0..l - 1 {
            let rest: Vec<Rat> = head.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, x)| x.clone()).collect();
            beta.push(
                (1..=l).map(|r| if r < 2 { Rat::zero() } else { sigma(&rest, r - 2) }).collect(),
            );
        }
        let t_scale = (0..l)
            .map(|j| {
                let d = params.partition().d_or_zero(j) as i64;
                sign_pow::<Rat>(l - 1 - j) * int(2 * (d + 1)) / params.q_at(&alpha[j])
            })
            .collect();
        Ok(VerticalFrame { y, beta, t_scale })
    }

    /// `β_i(Y_j)`
    pub fn beta_on_y(&self) -> Vec<Vec<Rat>> {
        self.beta.iter().map(|b| self.y.iter().map(|yj| dot(b, yj)).collect()).collect()
    }
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

fn checked(xi: &XiVector, params: &SolitonParams) -> Result<Vec<Rat>> {
    let alpha = params.alpha_rational()?;
    xi.check_interleaved(&alpha)?;
    Ok(alpha)
}

/// `Π_{k<l-1} (t - α_k)`
fn pi_head(alpha: &[Rat], t: &Rat) -> Rat {
    alpha[..alpha.len() - 1].iter().fold(Rat::one(), |acc, a| acc * (t - a))
}

/// `g′_θ(Y_m, Y_n)` from its defining sum over the non-constant roots.
pub fn gtheta_on_y(xi: &XiVector, params: &SolitonParams) -> Result<Vec<Vec<Rat>>> {
    let alpha = checked(xi, params)?;
    let x = xi.as_slice();
    let l = x.len();
    // Θ_i(Y_m) up to a common sign that cancels in the product
    let theta: Vec<Vec<Rat>> = (0..l)
        .map(|i| {
            alpha
                .iter()
                .map(|am| (0..l).filter(|&k| k != i).fold(Rat::one(), |acc, k| acc * (am - &x[k])))
                .collect()
        })
        .collect();
    let weight: Vec<Rat> = (0..l).map(|i| pi_head(&alpha, &x[i]) / delta_of(x, i)).collect();
    Ok((0..l)
        .map(|m| {
            (0..l)
                .map(|n| (0..l).fold(Rat::zero(), |acc, i| acc + &weight[i] * &theta[i][m] * &theta[i][n]))
                .collect()
        })
        .collect())
}

/// `β_0² + Σ_j (-p_nc(α_j)/Δ_j) β_j²` on the `Y` basis.
pub fn gbeta_on_y(xi: &XiVector, params: &SolitonParams) -> Result<Vec<Vec<Rat>>> {
    let alpha = checked(xi, params)?;
    let l = alpha.len();
    let pair = VerticalFrame::build(params)?.beta_on_y();
    let head = &alpha[..l - 1];
    let mut coeff = vec![Rat::one()];
    coeff.extend((0..l - 1).map(|j| -xi.p_nc(&alpha[j]) / delta_of(head, j)));
    Ok((0..l)
        .map(|m| {
            (0..l)
                .map(|n| (0..l).fold(Rat::zero(), |acc, i| acc + &coeff[i] * &pair[i][m] * &pair[i][n]))
                .collect()
        })
        .collect())
}

/// `(Y_l, Y_l)` entry predicted by `Π(α_l-α_k)² · d/dt[p_nc/Π(t-α_k)]` at `t = α_l`.
pub fn gbeta_last_entry_from_derivative(xi: &XiVector, params: &SolitonParams) -> Result<Rat> {
    let alpha = checked(xi, params)?;
    let l = alpha.len();
    let p_nc = ExactPoly::from_roots(xi.as_slice().iter().map(|x| (x, 1)));
    let pi = ExactPoly::from_roots(alpha[..l - 1].iter().map(|a| (a, 1)));
    let num = &(&p_nc.derivative() * &pi) - &(&p_nc * &pi.derivative());
    Ok(num.eval(&alpha[l - 1]))
}

/// `G_rs = (-1)^{r+s} Σ_j ξ_j^{2l-r-s} / (Δ(ξ_j) Π_{k<l}(ξ_j-α_k))`, 0-based `r, s`.
pub fn gxi_matrix(xi: &XiVector, params: &SolitonParams) -> Result<Vec<Vec<Rat>>> {
    let alpha = checked(xi, params)?;
    let x = xi.as_slice();
    let l = x.len();
    let w: Vec<Rat> = (0..l).map(|j| Rat::one() / (delta_of(x, j) * pi_head(&alpha, &x[j]))).collect();
    Ok(square(l, |r, s| {
        let sum = (0..l).fold(Rat::zero(), |acc, j| acc + &w[j] * ExactField::pow(&x[j], 2 * l - r - s - 2));
        sign_pow::<Rat>(r + s) * sum
    }))
}

/// Coefficients of `(dσ_1)² + Σ_i (-1/(Δ_i p_nc(α_i))) (dp_nc(α_i))²` in the `dσ_r dσ_s` basis.
pub fn gxi_closed_form(xi: &XiVector, params: &SolitonParams) -> Result<Vec<Vec<Rat>>> {
    let alpha = checked(xi, params)?;
    let l = alpha.len();
    let head = &alpha[..l - 1];
    let c: Vec<Rat> = (0..l - 1).map(|i| -Rat::one() / (delta_of(head, i) * xi.p_nc(&alpha[i]))).collect();
    Ok(square(l, |r, s| {
        let base = if r == 0 && s == 0 { Rat::one() } else { Rat::zero() };
        let sum = (0..l - 1).fold(Rat::zero(), |acc, i| acc + &c[i] * ExactField::pow(&alpha[i], 2 * l - r - s - 2));
        base + sign_pow::<Rat>(r + s) * sum
    }))
}

/// `Σ_j Δ(ξ_j)/Π(ξ_j-α_k) dξ_j²` pulled back through `dξ_j = Σ_r M_jr dσ_r`.
pub fn gxi_pullback(xi: &XiVector, params: &SolitonParams) -> Result<Vec<Vec<Rat>>> {
    let alpha = checked(xi, params)?;
    let x = xi.as_slice();
    let l = x.len();
    let m: Vec<Vec<Rat>> = (0..l)
        .map(|j| {
            let dj = delta_of(x, j);
            (1..=l).map(|r| sign_pow::<Rat>(r + 1) * ExactField::pow(&x[j], l - r) / &dj).collect()
        })
        .collect();
    let diag: Vec<Rat> = (0..l).map(|j| delta_of(x, j) / pi_head(&alpha, &x[j])).collect();
    Ok(square(l, |r, s| (0..l).fold(Rat::zero(), |acc, j| acc + &m[j][r] * &diag[j] * &m[j][s])))
}

fn square(l: usize, f: impl Fn(usize, usize) -> Rat) -> Vec<Vec<Rat>> {
    (0..l).map(|r| (0..l).map(|s| f(r, s)).collect()).collect()
}

/// Residuals of `dβ_0 = 0` and `dβ_i = (-1)^{l-i} 2 ω̌_i⁰`, one per `(form, base factor)`.
pub fn beta_closedness_coefficients(params: &SolitonParams) -> Result<Vec<Rat>> {
    let alpha = params.alpha_rational()?;
    let l = alpha.len();
    let c = connection_coefficients(&alpha);
    let frame = VerticalFrame::build(params)?;
    let mut out = Vec::with_capacity(l * (l - 1));
    for (i, b) in frame.beta.iter().enumerate() {
        for j in 0..l - 1 {
            let pairing = (0..l).fold(Rat::zero(), |acc, r| acc + &b[r] * &c[r][j]);
            let expected = if i > 0 && i - 1 == j { sign_pow::<Rat>(l - i) * int(2) } else { Rat::zero() };
            out.push(pairing - expected);
        }
    }
    Ok(out)
}

/// `g′_θ` in the `K_r` basis: `Σ_i w_i σ_{r-1}(ξ̂_i) σ_{s-1}(ξ̂_i)`.
pub fn gtheta_on_k(xi: &XiVector, params: &SolitonParams) -> Result<Vec<Vec<Rat>>> {
    let alpha = checked(xi, params)?;
    let x = xi.as_slice();
    let l = x.len();
    let s: Vec<Vec<Rat>> = (0..l)
        .map(|i| {
            let rest: Vec<Rat> = (0..l).filter(|&k| k != i).map(|k| x[k].clone()).collect();
            (0..l).map(|r| sigma(&rest, r)).collect()
        })
        .collect();
    let w: Vec<Rat> = (0..l).map(|i| pi_head(&alpha, &x[i]) / delta_of(x, i)).collect();
    Ok(square(l, |r, t| (0..l).fold(Rat::zero(), |acc, i| acc + &w[i] * &s[i][r] * &s[i][t])))
}

/// Exact `r_j² = -4 p_nc(α_j)/Δ_j(α_1, …, α_{l-1})`.
pub fn radii_squared(xi: &XiVector, params: &SolitonParams) -> Result<Vec<Rat>> {
    let alpha = checked(xi, params)?;
    let l = alpha.len();
    let head = &alpha[..l - 1];
    Ok((0..l - 1).map(|j| int(-4) * xi.p_nc(&alpha[j]) / delta_of(head, j)).collect())
}

/// Target coordinates of the flat embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatCoords {
    pub r: Vec<f64>,
    /// `σ_1 - Σ α_k`
    pub sigma: f64,
    /// The coordinate dual to `β_0` is never pinned down; kept empty.
    pub beta0_angle: Option<f64>,
}

impl FlatCoords {
    /// `¼ Σ r_j²/(α_l-α_j) + σ`; positive on the embedded image.
    pub fn embedding_margin(&self, alpha: &[f64]) -> f64 {
        let l = alpha.len();
        let s: f64 = self.r.iter().enumerate().map(|(j, r)| r * r / (alpha[l - 1] - alpha[j])).sum();
        0.25 * s + self.sigma
    }

    pub fn cone_radius(&self) -> f64 {
        (self.r.iter().map(|r| r * r).sum::<f64>() + self.sigma * self.sigma).sqrt()
    }
}

pub fn flat_coords(xi: &[f64], params: &SolitonParams) -> Result<FlatCoords> {
    let alpha = params.alpha_f64();
    let l = alpha.len();
    if xi.len() != l {
        return Err(Error::AlphaCount { expected: l, got: xi.len() });
    }
    let head = &alpha[..l - 1];
    let mut r = Vec::with_capacity(l - 1);
    for j in 0..l - 1 {
        let p_nc: f64 = xi.iter().map(|x| alpha[j] - x).product();
        let dj: f64 = (0..l - 1).filter(|&k| k != j).map(|k| head[j] - head[k]).product();
        let r2 = -4.0 * p_nc / dj;
        if r2 < 0.0 {
            return Err(Error::NotInterleaved(j));
        }
        r.push(r2.sqrt());
    }
    let sigma = xi.iter().sum::<f64>() - alpha.iter().sum::<f64>();
    Ok(FlatCoords { r, sigma, beta0_angle: None })
}

/// Same as [`flat_coords`] with exact input; `σ` exact, radii through `f64`.
pub fn flat_coords_exact(xi: &XiVector, params: &SolitonParams) -> Result<(Vec<Rat>, Rat)> {
    let r2 = radii_squared(xi, params)?;
    let alpha = params.alpha_rational()?;
    let sigma = xi.as_slice().iter().fold(Rat::zero(), |a, x| a + x) - alpha.iter().fold(Rat::zero(), |a, x| a + x);
    if let Some(j) = r2.iter().position(|x| x.is_negative()) {
        return Err(Error::NotInterleaved(j));
    }
    Ok((r2, sigma))
}

/// `g′(T_j, T_j)` for `j < l-1` from the exact `Y`-basis matrix.
pub fn gprime_t_lengths(xi: &XiVector, params: &SolitonParams) -> Result<Vec<Rat>> {
    let gy = gtheta_on_y(xi, params)?;
    let frame = VerticalFrame::build(params)?;
    let l = gy.len();
    Ok((0..l - 1).map(|j| &frame.t_scale[j] * &frame.t_scale[j] * &gy[j][j]).collect())
}

pub fn to_f64_matrix(m: &[Vec<Rat>]) -> Vec<Vec<f64>> {
    m.iter().map(|row| row.iter().map(rat_to_f64).collect()).collect()
}

pub fn connection_coefficients_f64(params: &SolitonParams) -> Vec<Vec<f64>> {
    connection_coefficients(params.alpha())
        .iter()
        .map(|row| row.iter().map(ExactField::to_f64).collect())
        .collect()
}

/// `|Rm(g′)|` at a chart point, through the same curvature engine used for `g`.
pub fn flat_metric_curvature(point: &ChartPoint, params: &SolitonParams) -> Result<f64> {
    let np = NumericParams::new(params)?;
    Ok(curvature(&np, point, Which::GPrime)?.norm_rm)
}

/// [`flat_metric_curvature`] with finite-difference derivatives instead of jets.
pub fn flat_metric_curvature_fd(point: &ChartPoint, params: &SolitonParams) -> Result<f64> {
    let np = NumericParams::new(params)?;
    Ok(curvature_from_jet(&metric_tensor_fd(&np, point, Which::GPrime, 1e-6)?)?.norm_rm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::rat;
    use crate::params::Partition;

    fn params(d: Vec<usize>, alpha: Vec<Rat>) -> SolitonParams {
        SolitonParams::rational(Partition::from_multiplicities(d).unwrap(), alpha, int(0)).unwrap()
    }

    fn xi(v: &[(i64, i64)]) -> XiVector {
        XiVector::new(v.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
    }

    #[test]
    fn l2_gtheta_entry() {
        let p = params(vec![1], vec![int(0), int(1)]);
        let x = xi(&[(-3, 2), (7, 3)]);
        let g = gtheta_on_y(&x, &p).unwrap();
        assert_eq!(g[0][0], rat(3, 2) * rat(7, 3));
        assert_eq!(g, gbeta_on_y(&x, &p).unwrap());
    }

    #[test]
    fn l3_offdiagonal_and_frame() {
        let p = params(vec![1, 0], vec![int(0), int(1), rat(5, 2)]);
        let x = xi(&[(-1, 1), (1, 2), (4, 1)]);
        let g = gtheta_on_y(&x, &p).unwrap();
        assert!(g[0][1].is_zero());
        assert_eq!(g, gbeta_on_y(&x, &p).unwrap());
        let pair = VerticalFrame::build(&p).unwrap().beta_on_y();
        for i in 1..3 {
            for j in 0..2 {
                let want = if i - 1 == j { delta_of(&[int(0), int(1)], j) } else { Rat::zero() };
                assert_eq!(pair[i][j], want);
            }
        }
        assert_eq!(g[2][2], gbeta_last_entry_from_derivative(&x, &p).unwrap());
    }

    #[test]
    fn gxi_three_routes_agree() {
        let p = params(vec![0, 2], vec![int(-1), rat(1, 3), int(2)]);
        let x = xi(&[(-4, 1), (0, 1), (9, 2)]);
        let direct = gxi_matrix(&x, &p).unwrap();
        assert_eq!(direct, gxi_closed_form(&x, &p).unwrap());
        assert_eq!(direct, gxi_pullback(&x, &p).unwrap());
    }

    #[test]
    fn beta_forms_closed_as_claimed() {
        let p = params(vec![1, 1, 0], vec![int(-2), int(0), rat(1, 2), int(3)]);
        assert!(beta_closedness_coefficients(&p).unwrap().iter().all(Zero::is_zero));
        let p = params(vec![1], vec![int(0), int(1)]);
        assert!(beta_closedness_coefficients(&p).unwrap().iter().all(Zero::is_zero));
    }

    #[test]
    fn flat_coordinates_example() {
        let p = params(vec![1], vec![int(0), int(1)]);
        let fc = flat_coords(&[-1.0, 2.0], &p).unwrap();
        assert!((fc.r[0] - 8f64.sqrt()).abs() < 1e-14);
        assert_eq!(fc.sigma, 0.0);
        assert!(fc.embedding_margin(&[0.0, 1.0]) > 0.0);
        let (r2, s) = flat_coords_exact(&xi(&[(-1, 1), (2, 1)]), &p).unwrap();
        assert_eq!((r2[0].clone(), s), (int(8), int(0)));
        let near = flat_coords(&[-1e-9, 2.0], &p).unwrap();
        assert!(near.r[0] < 1e-3);
    }

    #[test]
    fn t_lengths_match_radii_and_k1_is_unit() {
        let p = params(vec![2, 1], vec![int(0), int(1), int(3)]);
        let x = xi(&[(-2, 1), (1, 3), (5, 1)]);
        assert_eq!(gprime_t_lengths(&x, &p).unwrap(), radii_squared(&x, &p).unwrap());
        assert_eq!(gtheta_on_k(&x, &p).unwrap()[0][0], Rat::one());
    }

    #[test]
    fn l2_connection_coefficients() {
        let c = connection_coefficients(&[int(0), int(1)]);
        assert_eq!(c, vec![vec![Rat::zero()], vec![int(-2)]]);
    }

    #[test]
    fn rejects_non_interleaved() {
        let p = params(vec![1], vec![int(0), int(1)]);
        assert!(matches!(gtheta_on_y(&xi(&[(1, 2), (2, 1)]), &p), Err(Error::NotInterleaved(0))));
        assert!(flat_coords(&[1.5, 2.0], &p).is_err());
    }

    #[test]
    fn gprime_is_flat_at_random_points() {
        use rand::SeedableRng;
        let p = params(vec![1], vec![int(0), int(1)]);
        let np = NumericParams::new(&p).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let pt = ChartPoint::random(&np, &mut rng);
            assert!(flat_metric_curvature(&pt, &p).unwrap() < 1e-6);
            assert!(flat_metric_curvature_fd(&pt, &p).unwrap() < 1e-4);
            let g = crate::chartmetric::metric_values(&np, &pt, Which::GPrime).unwrap();
            assert!((g[2 * np.dim() + 2] - 1.0).abs() < 1e-12);
        }
    }
}
