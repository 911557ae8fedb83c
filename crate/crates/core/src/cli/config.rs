//! `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::Error;
use crate::number::{parse_rat, Rat, Surd};
use crate::params::{validate, Partition, SolitonParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Task {
    Invariants,
    VerifyIdentities,
    VerifyMetric,
    DecayScan,
    VolumeFit,
    DeviationScan,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::Invariants,
        Task::VerifyIdentities,
        Task::VerifyMetric,
        Task::DecayScan,
        Task::VolumeFit,
        Task::DeviationScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Invariants => "invariants",
            Task::VerifyIdentities => "verify-identities",
            Task::VerifyMetric => "verify-metric",
            Task::DecayScan => "decay-scan",
            Task::VolumeFit => "volume-fit",
            Task::DeviationScan => "deviation-scan",
        }
    }
}

impl FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Task::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Task::ALL.iter().map(|t| t.name()).collect();
            format!("unknown task `{s}` (expected one of {})", names.join(", "))
        })
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Tolerance names and their defaults.
pub const DEFAULT_TOLERANCES: [(&str, f64); 11] = [
    ("identities", 0.0),
    ("kahler", 1e-6),
    ("ricci", 1e-6),
    ("flat", 1e-6),
    ("soliton", 1e-5),
    ("ddc", 1e-6),
    ("fd", 1e-4),
    ("deviation", 1e-10),
    ("refinement", 0.2),
    ("slope", 0.2),
    ("band", 2.0),
];

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    /// 1-based line, when the problem can be pinned to one.
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Not yet validated; see [`RunConfig::params`].
    pub raw_params: SolitonParams,
    pub task: Option<Task>,
    pub seed: u64,
    pub samples: Option<usize>,
    pub radii: Vec<f64>,
    pub ray_max: f64,
    pub potential_c: f64,
    pub out: Option<PathBuf>,
    pub tolerances: BTreeMap<String, f64>,
    /// Line of each key that was set.
    pub lines: BTreeMap<String, usize>,
}

impl RunConfig {
    /// Validated parameters; failures point at the offending line.
    pub fn params(&self) -> Result<SolitonParams, ConfigError> {
        validate(self.raw_params.clone()).map_err(|e| {
            let key = match e {
                Error::NegativeA => "a",
                Error::PartitionMismatch { .. } | Error::InvalidPartition(_) => "d",
                _ => "alpha",
            };
            ConfigError { line: self.lines.get(key).copied(), message: e.to_string() }
        })
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn set_tolerance(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        if !self.tolerances.contains_key(name) {
            return Err(ConfigError { line: None, message: format!("unknown tolerance `{name}`") });
        }
        if !(value >= 0.0) {
            return Err(ConfigError { line: None, message: format!("tolerance `{name}` must be non-negative") });
        }
        self.tolerances.insert(name.to_string(), value);
        Ok(())
    }
}

const KEYS: [&str; 12] = ["n", "l", "d", "alpha", "a", "task", "seed", "samples", "radii", "ray_max", "potential_c", "out"];

/// Parses the line-oriented grammar: `key = value`, `#` comments, `[a, b]` lists,
/// rationals as `p/q` or decimals, and `a + b*sqrt(m)` style surds.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut values: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut tolerances: BTreeMap<String, f64> = DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{body}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(name) = key.strip_prefix("tolerance.") {
            if !tolerances.contains_key(name) {
                return Err(ConfigError::at(line, format!("unknown tolerance `{name}`")));
            }
            let v: f64 = value.parse().map_err(|_| ConfigError::at(line, format!("malformed number `{value}`")))?;
            if !(v >= 0.0) {
                return Err(ConfigError::at(line, "tolerances must be non-negative"));
            }
            tolerances.insert(name.to_string(), v);
            continue;
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::at(line, format!("unknown key `{key}`")));
        }
        if values.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(ConfigError::at(line, format!("duplicate key `{key}`")));
        }
    }
    let get = |k: &str| values.get(k).map(|(l, v)| (*l, v.as_str()));
    let required = |k: &str| get(k).ok_or_else(|| ConfigError { line: None, message: format!("missing key `{k}`") });

    let (dl, dv) = required("d")?;
    let d: Vec<usize> = parse_list(dv).map_err(|m| ConfigError::at(dl, m))?.iter().map(|s| parse_usize(s)).collect::<Result<_, _>>().map_err(|m| ConfigError::at(dl, m))?;
    let l = match get("l") {
        Some((ll, v)) => parse_usize(v).map_err(|m| ConfigError::at(ll, m))?,
        None => d.len() + 1,
    };
    let n = match get("n") {
        Some((nl, v)) => parse_usize(v).map_err(|m| ConfigError::at(nl, m))?,
        None => l + d.iter().sum::<usize>(),
    };
    let partition = Partition::new(n, l, d).map_err(|e| ConfigError::at(dl, e.to_string()))?;

    let (al, av) = required("alpha")?;
    let alpha: Vec<Surd> = parse_list(av).map_err(|m| ConfigError::at(al, m))?.iter().map(|s| parse_surd(s)).collect::<Result<_, _>>().map_err(|e| ConfigError::at(al, e.to_string()))?;
    let a = match get("a") {
        Some((l, v)) => parse_rat(v).map_err(|e| ConfigError::at(l, e.to_string()))?,
        None => Rat::zero(),
    };

    let task = match get("task") {
        Some((l, v)) => Some(v.parse::<Task>().map_err(|m| ConfigError::at(l, m))?),
        None => None,
    };
    let seed = match get("seed") {
        Some((l, v)) => v.parse().map_err(|_| ConfigError::at(l, format!("malformed seed `{v}`")))?,
        None => 0,
    };
    let samples = match get("samples") {
        Some((l, v)) => Some(parse_usize(v).map_err(|m| ConfigError::at(l, m))?),
        None => None,
    };
    let radii = match get("radii") {
        Some((l, v)) => parse_list(v)
            .and_then(|xs| xs.iter().map(|s| parse_positive(s)).collect())
            .map_err(|m| ConfigError::at(l, m))?,
        None => vec![50.0, 100.0, 200.0, 400.0],
    };
    let ray_max = match get("ray_max") {
        Some((l, v)) => parse_positive(v).map_err(|m| ConfigError::at(l, m))?,
        None => 1e3,
    };
    let potential_c = match get("potential_c") {
        Some((l, v)) => parse_positive(v).map_err(|m| ConfigError::at(l, m))?,
        None => 3.0,
    };
    let out = get("out").map(|(_, v)| PathBuf::from(v));
    let lines = values.iter().map(|(k, (l, _))| (k.clone(), *l)).collect();
    Ok(RunConfig {
        raw_params: SolitonParams::raw(partition, alpha, a),
        task,
        seed,
        samples,
        radii,
        ray_max,
        potential_c,
        out,
        tolerances,
        lines,
    })
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("expected a non-negative integer, got `{}`", s.trim()))
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got `{}`", s.trim())),
    }
}

/// `[a, b, c]` into its trimmed items; `[]` is the empty list.
pub fn parse_list(s: &str) -> Result<Vec<String>, String> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected a list `[...]`, got `{}`", s.trim()))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    let items: Vec<String> = inner.split(',').map(|x| x.trim().to_string()).collect();
    if items.iter().any(String::is_empty) {
        return Err(format!("empty list item in `{}`", s.trim()));
    }
    Ok(items)
}

/// Sums of terms `q`, `sqrt(m)`, `q*sqrt(m)` or `sqrt(m)/k`, all in one field `ℚ(√m)`.
pub fn parse_surd(s: &str) -> Result<Surd, Error> {
    let bad = || Error::MalformedRational(s.trim().to_string());
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(bad());
    }
    // split at top-level signs that are not part of an exponent-free leading sign
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    let mut depth = 0i32;
    for (i, ch) in compact.chars().enumerate() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if (ch == '+' || ch == '-') && depth == 0 && !(cur.is_empty() && i == 0) {
            if cur.is_empty() {
                return Err(bad());
            }
            terms.push((neg, std::mem::take(&mut cur)));
            neg = ch == '-';
            continue;
        }
        if (ch == '+' || ch == '-') && i == 0 {
            neg = ch == '-';
            continue;
        }
        cur.push(ch);
    }
    if cur.is_empty() || depth != 0 {
        return Err(bad());
    }
    terms.push((neg, cur));

    let mut rational = Rat::zero();
    let mut surd = Rat::zero();
    let mut field = 1u64;
    for (neg, term) in terms {
        let (coef, m) = parse_term(&term).ok_or_else(bad)?;
        let coef = if neg { -coef } else { coef };
        if m == 1 {
            rational += coef;
            continue;
        }
        if field != 1 && field != m {
            return Err(Error::MixedQuadraticFields(field, m));
        }
        field = m;
        surd += coef;
    }
    Surd::new(rational, surd, field)
}

/// One term: `(coefficient, radicand)` with radicand 1 for plain rationals.
fn parse_term(t: &str) -> Option<(Rat, u64)> {
    let Some(pos) = t.find("sqrt(") else {
        return parse_rat(t).ok().map(|r| (r, 1));
    };
    let close = t[pos..].find(')')? + pos;
    let m: u64 = t[pos + 5..close].parse().ok().filter(|&m| m > 0)?;
    let before = &t[..pos];
    let after = &t[close + 1..];
    let mut coef = match before {
        "" => Rat::one(),
        b => parse_rat(b.strip_suffix('*')?).ok()?,
    };
    if !after.is_empty() {
        let k = parse_rat(after.strip_prefix('/')?).ok()?;
        if k.is_zero() {
            return None;
        }
        coef /= k;
    }
    // √(k² m') = k√m'
    let mut rest = m;
    let mut outside = 1u64;
    let mut f = 2u64;
    while f * f <= rest {
        while rest % (f * f) == 0 {
            rest /= f * f;
            outside *= f;
        }
        f += 1;
    }
    Some((coef * Rat::from_integer(outside.into()), rest))
}
