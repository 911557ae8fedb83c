use super::{build_frame, ChartPoint, NumericParams, Which};
use crate::error::Result;
use crate::jet::Jet;

/// Largest absolute entries of each defect; all vanish for a Kähler structure.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KahlerResiduals {
    /// `J² + I`
    pub j_squared: f64,
    /// `g(J·, J·) - g`
    pub compatibility: f64,
    /// `ω - g(·, J·)`
    pub omega_vs_gj: f64,
    /// `dω`
    pub d_omega: f64,
    /// `ι_{K_r} ω + dσ_r`
    pub moment_map: f64,
}

impl KahlerResiduals {
    pub fn max(&self) -> f64 {
        [self.j_squared, self.compatibility, self.omega_vs_gj, self.d_omega, self.moment_map]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn kahler_structure_check(np: &NumericParams, point: &ChartPoint) -> Result<KahlerResiduals> {
    point.validate(np)?;
    let n = np.dim();
    let l = np.l;
    let x = Jet::seed(&point.coords());
    let frame = build_frame(np, &x, Which::G);
    let gj = frame.metric();
    let oj = frame.omega();
    let jj = frame.complex_structure();
    let g: Vec<f64> = gj.iter().map(|e| e.v).collect();
    let om: Vec<f64> = oj.iter().map(|e| e.v).collect();
    let jm: Vec<f64> = jj.iter().map(|e| e.v).collect();
    let mut res = KahlerResiduals::default();
    for a in 0..n {
        for b in 0..n {
            let j2: f64 = (0..n).map(|c| jm[a * n + c] * jm[c * n + b]).sum::<f64>() + if a == b { 1.0 } else { 0.0 };
            res.j_squared = res.j_squared.max(j2.abs());
            let mut jgj = 0.0;
            for c in 0..n {
                for d in 0..n {
                    jgj += jm[c * n + a] * g[c * n + d] * jm[d * n + b];
                }
            }
            res.compatibility = res.compatibility.max((jgj - g[a * n + b]).abs());
            let gjab: f64 = (0..n).map(|c| g[a * n + c] * jm[c * n + b]).sum();
            res.omega_vs_gj = res.omega_vs_gj.max((om[a * n + b] - gjab).abs());
            for c in 0..n {
                let d = oj[b * n + c].grad(a) + oj[c * n + a].grad(b) + oj[a * n + b].grad(c);
                res.d_omega = res.d_omega.max(d.abs());
            }
        }
    }
    for r in 0..l {
        for b in 0..n {
            let d_sigma = if b < l { elementary_without(&point.xi, b, r) } else { 0.0 };
            res.moment_map = res.moment_map.max((om[(l + r) * n + b] + d_sigma).abs());
        }
    }
    Ok(res)
}

/// `σ_r` of the `ξ` with entry `skip` removed.
fn elementary_without(xi: &[f64], skip: usize, r: usize) -> f64 {
    let mut e = vec![0.0; xi.len() + 1];
    e[0] = 1.0;
    let mut k = 0;
    for (i, &x) in xi.iter().enumerate() {
        if i == skip {
            continue;
        }
        k += 1;
        for s in (1..=k).rev() {
            e[s] += x * e[s - 1];
        }
    }
    e[r]
}
