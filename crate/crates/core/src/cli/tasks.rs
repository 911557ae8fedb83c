//! Task dispatch, assertions and artifact writing.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ConfigError, RunConfig, Task};
use super::suites::{flat_suite, identity_suite};
use crate::chartmetric::{
    curvature, curvature_decay_scan, curvature_from_jet, deviation_closed_form, deviation_scan, g_gprime_deviation,
    kahler_structure_check, metric_tensor, metric_tensor_fd, soliton_residual, soliton_sign, volume_growth_fit,
    ChartPoint, DecayRow, NumericParams, Ray, VolumeRow, Which,
};
use crate::coneinv::{cone_descriptor, format_tau, l2_diagonal_quotient};
use crate::error::Error;
use crate::params::{build_structure, SolitonParams};
use crate::potential::{ddc_check, PotentialSpec};

pub const DEFAULT_OUT: &str = "taubnut-out";

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Compute(Error),
    Io(io::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Compute(e) => write!(f, "computation failed: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}
impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Compute(e)
    }
}
impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Report lines, written files and the assertion verdicts of one task.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    fn info(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    /// Records `value ≤ tol` under `name`.
    fn at_most(&mut self, name: &str, value: f64, tol: f64) {
        let ok = value <= tol;
        self.lines.push(format!("{} {name}: {value:.3e} (tolerance {tol:.1e})", if ok { "ok  " } else { "FAIL" }));
        if !ok {
            self.failures.push(format!("{name}: {value:.6e} exceeds {tol:.1e}"));
        }
    }

    fn holds(&mut self, name: &str, ok: bool, detail: String) {
        self.lines.push(format!("{} {name}: {detail}", if ok { "ok  " } else { "FAIL" }));
        if !ok {
            self.failures.push(format!("{name}: {detail}"));
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome, RunError> {
    let task = config.task.ok_or(ConfigError { line: None, message: "no task given".into() })?;
    let params = config.params()?;
    let out_dir = config.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&out_dir)?;
    let mut o = Outcome::default();
    o.info(format!("task {task}"));
    o.info(format!("params {params}"));
    o.info(format!("seed {}", config.seed));
    match task {
        Task::Invariants => invariants(&params, &mut o)?,
        Task::VerifyIdentities => verify_identities(config, &params, &mut o)?,
        Task::VerifyMetric => verify_metric(config, &params, &mut o)?,
        Task::DecayScan => decay_scan(config, &params, &out_dir, &mut o)?,
        Task::VolumeFit => volume_fit(config, &params, &out_dir, &mut o)?,
        Task::DeviationScan => deviation(config, &params, &out_dir, &mut o)?,
    }
    o.info(if o.passed() { "result PASS".to_string() } else { format!("result FAIL ({})", o.failures[0]) });
    let report = out_dir.join("report.txt");
    fs::write(&report, o.lines.join("\n") + "\n")?;
    o.files.push(report);
    Ok(o)
}

fn invariants(params: &SolitonParams, o: &mut Outcome) -> Result<(), RunError> {
    let inv = cone_descriptor(params)?;
    o.info(inv.summary());
    o.info(format!("e1 = {}", format_tau(&inv.e1_coeffs)));
    o.info(format!("Lambda certificate: {}", inv.lambda_certificate));
    if params.l() == 2 {
        let (k, total) = l2_diagonal_quotient(params)?;
        o.info(format!("diagonal Z_n quotient: k = {k}, total order = {total}"));
    }
    Ok(())
}

fn verify_identities(config: &RunConfig, params: &SolitonParams, o: &mut Outcome) -> Result<(), RunError> {
    let k = config.samples.unwrap_or(100);
    let tol = config.tolerance("identities");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ids = identity_suite(&mut rng, k, tol);
    let flat = flat_suite(&mut rng, k, tol)?;
    for (name, rep) in [("vandermonde identities", &ids), ("flat model identities", &flat)] {
        o.holds(
            name,
            rep.failures.is_empty(),
            format!("{} checks, worst |lhs - rhs| = {:.3e}{}", rep.checks, rep.worst, rep.failures.first().map(|f| format!(", first failure: {f}")).unwrap_or_default()),
        );
    }
    if params.is_rational() {
        let s = build_structure(params)?;
        o.info(format!("structure polynomials: deg P = {}, deg q = {}", s.p.degree().unwrap_or(0), s.q.degree().unwrap_or(0)));
    }
    Ok(())
}

struct PointResult {
    kahler: f64,
    ricci: f64,
    flat: f64,
    soliton: Option<f64>,
    ddc: Option<f64>,
    torus: f64,
}

fn verify_metric(config: &RunConfig, params: &SolitonParams, o: &mut Outcome) -> Result<(), RunError> {
    let np = NumericParams::new(params)?;
    let k = config.samples.unwrap_or(50).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let points: Vec<ChartPoint> = (0..k).map(|_| ChartPoint::random(&np, &mut rng)).collect();
    let spec = PotentialSpec::new(config.potential_c, np.n)?;
    let with_potential = np.l == 2 && np.alpha == [0.0, 1.0] && np.a == 0.0;
    if np.a > 0.0 {
        // fix the soliton convention on the first point before fanning out
        soliton_residual(&np, &points[0])?;
    }
    let results: Vec<PointResult> = points
        .par_iter()
        .map(|p| -> Result<PointResult, Error> {
            let c = curvature(&np, p, Which::G)?;
            let shifted = p.with_t(p.t.iter().map(|t| t + 0.9).collect());
            let c2 = curvature(&np, &shifted, Which::G)?;
            Ok(PointResult {
                kahler: kahler_structure_check(&np, p)?.max(),
                ricci: c.norm_ric / (1.0 + c.norm_rm),
                flat: curvature(&np, p, Which::GPrime)?.norm_rm,
                soliton: if np.a > 0.0 { Some(soliton_residual(&np, p)?) } else { None },
                ddc: if with_potential { Some(ddc_check(p, &spec, &np)?.residual) } else { None },
                torus: (c.norm_rm - c2.norm_rm).abs().max((c.norm_ric - c2.norm_ric).abs()),
            })
        })
        .collect::<Result<_, _>>()?;
    let max = |f: &dyn Fn(&PointResult) -> Option<f64>| results.iter().filter_map(f).fold(0.0, f64::max);
    o.info(format!("{k} random chart points"));
    o.at_most("kahler residual", max(&|r| Some(r.kahler)), config.tolerance("kahler"));
    o.at_most("flatness |Rm(g')|", max(&|r| Some(r.flat)), config.tolerance("flat"));
    if np.a == 0.0 {
        o.at_most("ricci |Ric|/(1+|Rm|)", max(&|r| Some(r.ricci)), config.tolerance("ricci"));
    } else {
        let s = soliton_sign().unwrap_or(f64::NAN);
        o.info(format!("soliton convention: Ric + ({s})·a·Hess(sigma_1) = 0"));
        o.at_most("soliton residual", max(&|r| r.soliton), config.tolerance("soliton"));
    }
    if with_potential {
        o.at_most("ddc H - omega", max(&|r| r.ddc), config.tolerance("ddc"));
    } else {
        o.info("ddc check skipped: potential needs l = 2, alpha = (0, 1) and a = 0");
    }
    o.at_most("torus invariance", max(&|r| Some(r.torus)), 1e-10);
    let fd = fd_agreement(&np, &points[0])?;
    o.at_most("jet vs finite differences (relative)", fd, config.tolerance("fd"));
    let fd_curv = curvature_from_jet(&metric_tensor_fd(&np, &points[0], Which::GPrime, 1e-6)?)?.norm_rm;
    o.at_most("flatness |Rm(g')| from finite differences", fd_curv, config.tolerance("fd"));
    Ok(())
}

/// Largest relative gap between jet and central-difference first derivatives of `g`.
pub fn fd_agreement(np: &NumericParams, p: &ChartPoint) -> Result<f64, Error> {
    let a = metric_tensor(np, p, Which::G)?;
    let b = metric_tensor_fd(np, p, Which::G, 1e-6)?;
    let scale = a.dg.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    Ok(a.dg.iter().zip(&b.dg).map(|(x, y)| (x - y).abs() / scale).fold(0.0, f64::max))
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> io::Result<()> {
    let mut text = String::from(header);
    text.push('\n');
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    fs::write(path, text)
}

fn decay_max(np: &NumericParams, rays: &[Ray], per_ray: usize) -> Result<(f64, Vec<Vec<DecayRow>>), Error> {
    let mut m: f64 = 0.0;
    let mut all = Vec::new();
    for ray in rays {
        let rows = curvature_decay_scan(np, ray, per_ray)?;
        m = rows.iter().map(|r| r.norm_rm * (1.0 + r.rho)).fold(m, f64::max);
        all.push(rows);
    }
    Ok((m, all))
}

fn decay_scan(config: &RunConfig, params: &SolitonParams, out: &Path, o: &mut Outcome) -> Result<(), RunError> {
    let np = NumericParams::new(params)?;
    let per_ray = (config.samples.unwrap_or(200) / 2).max(2);
    let rays = [
        Ray::Regular { xi1: np.alpha[0] - 1.0, from: 0.5, to: config.ray_max },
        Ray::Singular { xil: np.alpha[np.l - 1] + 0.5, from: 0.5, to: config.ray_max },
    ];
    let (m1, rows) = decay_max(&np, &rays, per_ray)?;
    let (m10, _) = decay_max(&np, &rays, per_ray * 10)?;
    for (name, rs) in ["decay_regular.csv", "decay_singular.csv"].iter().zip(&rows) {
        let path = out.join(name);
        write_csv(&path, DecayRow::CSV_HEADER, rs.iter().map(DecayRow::csv))?;
        o.files.push(path);
        let monotone = rs.windows(2).all(|w| w[1].rho > w[0].rho);
        o.holds(&format!("{name} rho monotone"), monotone, format!("{} rows", rs.len()));
    }
    o.holds("max |Rm|(1+rho) finite", m1.is_finite(), format!("{m1:.6e} over {} samples", 2 * per_ray));
    let change = (m10 - m1).abs() / m1;
    o.info(format!("refined max |Rm|(1+rho) = {m10:.6e} over {} samples", 20 * per_ray));
    o.at_most("relative change under 10x refinement", change, config.tolerance("refinement"));
    Ok(())
}

fn volume_fit(config: &RunConfig, params: &SolitonParams, out: &Path, o: &mut Outcome) -> Result<(), RunError> {
    let np = NumericParams::new(params)?;
    let target = (2 * np.n - 1) as f64;
    for (which, name) in [(Which::G, "volume.csv"), (Which::GPrime, "volume_flat.csv")] {
        let fit = volume_growth_fit(&np, &config.radii, which)?;
        let path = out.join(name);
        write_csv(&path, VolumeRow::CSV_HEADER, fit.rows.iter().map(VolumeRow::csv))?;
        o.files.push(path);
        let label = if which == Which::G { "g" } else { "g'" };
        o.info(format!("volume slope ({label}) = {:.6}", fit.slope));
        o.at_most(&format!("|slope - (2n-1)| for {label}"), (fit.slope - target).abs(), config.tolerance("slope"));
    }
    Ok(())
}

fn deviation(config: &RunConfig, params: &SolitonParams, out: &Path, o: &mut Outcome) -> Result<(), RunError> {
    let np = NumericParams::new(params)?;
    let k = config.samples.unwrap_or(50).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..k {
        let p = ChartPoint::random(&np, &mut rng);
        let closed = deviation_closed_form(&np, &p.xi);
        let numeric = g_gprime_deviation(&np, &p)?;
        // both routes subtract O(1) metrics, so small deviations are compared absolutely
        worst = worst.max((numeric - closed).abs() / closed.max(1.0));
    }
    o.at_most("|numeric - closed form| / max(closed form, 1)", worst, config.tolerance("deviation"));
    let al = np.alpha[np.l - 1];
    let xs: Vec<f64> = (0..=30).map(|i| al + 10f64.powf(1.0 + i as f64 / 10.0)).collect();
    let rows = deviation_scan(&np, np.alpha[0] - 1.0, &xs);
    let path = out.join("deviation.csv");
    write_csv(
        &path,
        "xi_l,deviation,scaled",
        rows.iter().map(|r| format!("{:.16e},{:.16e},{:.16e}", r.xi_l, r.deviation, r.scaled)),
    )?;
    o.files.push(path);
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.scaled), b.max(r.scaled)));
    if np.a == 0.0 {
        o.at_most("band max/min of deviation * xi_l^(n-1)", hi / lo, config.tolerance("band"));
    } else {
        let decreasing = rows.windows(2).all(|w| w[1].scaled <= w[0].scaled);
        o.holds("deviation * xi_l^(n-1) decreasing (a > 0)", decreasing, format!("last {:.3e}", rows.last().map(|r| r.scaled).unwrap_or(0.0)));
    }
    Ok(())
}
