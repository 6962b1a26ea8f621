//! Run configuration: JSON file values overridden by command-line flags.

use crate::args::Common;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use surfmem::analytic::AnalyticParams;
use surfmem::estimator::GridParam;
use surfmem::{Basis, CnotOrder, NoiseParams};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// A duration as written by the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Time {
    /// Seconds.
    Absolute(f64),
    /// Multiple of the total idling time `T`.
    OfTotal(f64),
    Infinite,
}

impl Time {
    pub fn resolve(self, total: f64) -> f64 {
        match self {
            Time::Absolute(s) => s,
            Time::OfTotal(k) => k * total,
            Time::Infinite => f64::INFINITY,
        }
    }
}

/// Parses `2T`, `0.5 T`, `20us`, `900ns`, `1.5ms`, `2s`, `inf` or a bare number of seconds.
pub fn parse_time(s: &str) -> Result<Time, ConfigError> {
    let t = s.trim();
    let lower = t.to_ascii_lowercase();
    if matches!(lower.as_str(), "inf" | "infinity" | "∞") {
        return Ok(Time::Infinite);
    }
    let num = |body: &str| -> Result<f64, ConfigError> {
        let v: f64 = body
            .trim()
            .parse()
            .map_err(|_| invalid(format!("cannot parse time {s:?}")))?;
        if !v.is_finite() {
            return Err(invalid(format!("cannot parse time {s:?}")));
        }
        Ok(v)
    };
    if let Some(body) = t.strip_suffix('T') {
        return Ok(Time::OfTotal(if body.trim().is_empty() { 1.0 } else { num(body)? }));
    }
    for (suffix, scale) in [("ns", 1e-9), ("us", 1e-6), ("µs", 1e-6), ("ms", 1e-3), ("s", 1.0)] {
        if let Some(body) = lower.strip_suffix(suffix) {
            return Ok(Time::Absolute(num(body)? * scale));
        }
    }
    Ok(Time::Absolute(num(t)?))
}

/// Parses `N`, `min:max:step` or a comma list of either into ascending round counts.
pub fn parse_rounds(s: &str) -> Result<Vec<usize>, ConfigError> {
    let bad = || invalid(format!("invalid rounds {s:?}: expected N, min:max:step or a comma list"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let nums: Vec<usize> = part
            .split(':')
            .map(|x| x.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        match nums[..] {
            [n] => out.push(n),
            [lo, hi, step] if step > 0 && lo <= hi => out.extend((lo..=hi).step_by(step)),
            [lo, hi] if lo <= hi => out.extend(lo..=hi),
            _ => return Err(bad()),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    if out.contains(&0) {
        return Err(invalid("invalid rounds: every round count must be at least 1"));
    }
    if out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("invalid rounds: round counts must be strictly ascending"));
    }
    Ok(out)
}

pub fn parse_bases(s: &str) -> Result<Vec<Basis>, ConfigError> {
    let mut out = Vec::new();
    for part in s.split(',').map(|p| p.trim().to_ascii_lowercase()) {
        match part.as_str() {
            "x" => out.push(Basis::X),
            "y" => out.push(Basis::Y),
            "z" => out.push(Basis::Z),
            "all" | "xyz" => out.extend(Basis::ALL),
            _ => return Err(invalid(format!("unknown basis {part:?}; use x, y, z or all"))),
        }
    }
    out.sort_by_key(|b| b.index());
    out.dedup();
    Ok(out)
}

pub fn parse_distances(s: &str) -> Result<Vec<usize>, ConfigError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| invalid(format!("invalid distance {p:?}")))
        })
        .collect()
}

pub fn parse_order(s: &str) -> Result<CnotOrder, ConfigError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "hook-safe" | "safe" => Ok(CnotOrder::HookSafe),
        "hook-aligned" | "aligned" | "bad" => Ok(CnotOrder::HookAligned),
        other => Err(invalid(format!("unknown CNOT order {other:?}; use hook-safe or hook-aligned"))),
    }
}

/// `t1=1T,3T` or `p=0.004,0.008`.
pub fn parse_grid(s: &str, total: f64) -> Result<(GridParam, Vec<f64>), ConfigError> {
    let (name, values) = s
        .split_once('=')
        .ok_or_else(|| invalid(format!("invalid grid {s:?}: expected NAME=V1,V2,...")))?;
    let param = GridParam::parse(name.trim()).map_err(|e| invalid(e.to_string()))?;
    let values = values
        .split(',')
        .map(|v| match param {
            GridParam::T1 | GridParam::Tphi => parse_time(v).map(|t| t.resolve(total)),
            GridParam::P | GridParam::Q => v
                .trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("invalid grid value {v:?}"))),
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok((param, values))
}

/// Scalar config value: JSON number or string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Num(f64),
    Str(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Num(v) => v.to_string(),
            Scalar::Str(s) => s.clone(),
        }
    }
}

/// Scalar or list of scalars, joined with commas.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Listish {
    One(Scalar),
    Many(Vec<Scalar>),
}

impl Listish {
    fn text(&self) -> String {
        match self {
            Listish::One(s) => s.text(),
            Listish::Many(v) => v.iter().map(Scalar::text).collect::<Vec<_>>().join(","),
        }
    }
}

/// Keys of the JSON config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    d: Option<Listish>,
    basis: Option<Listish>,
    rounds: Option<Listish>,
    t1: Option<Scalar>,
    tphi: Option<Scalar>,
    p: Option<f64>,
    q: Option<f64>,
    #[serde(alias = "T")]
    total_time: Option<Scalar>,
    shots: Option<u64>,
    seed: Option<u64>,
    workers: Option<usize>,
    output: Option<PathBuf>,
    cnot_order: Option<String>,
    grid: Option<Vec<String>>,
}

/// Fully resolved settings shared by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub d: Vec<usize>,
    pub bases: Vec<Basis>,
    pub rounds: Vec<usize>,
    pub total_time: f64,
    pub t1: f64,
    pub t_phi: f64,
    pub p: f64,
    pub q: f64,
    pub shots: u64,
    pub seed: u64,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub cnot_order: CnotOrder,
    pub grid: Vec<String>,
}

/// Per-subcommand fallbacks for values neither the file nor the flags set.
pub struct Defaults {
    pub d: &'static str,
    pub bases: &'static str,
    pub rounds: &'static str,
}

impl RunConfig {
    pub fn resolve(common: &Common, defaults: &Defaults) -> Result<Self, ConfigError> {
        let file = match &common.config {
            None => FileConfig::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
                serde_json::from_str(&text).map_err(|e| ConfigError::Unreadable {
                    path: path.clone(),
                    reason: e.to_string(),
                })?
            }
        };
        let pick = |flag: &Option<String>, file: Option<String>, default: &str| -> String {
            flag.clone().or(file).unwrap_or_else(|| default.to_string())
        };

        let total_text = pick(&common.total_time, file.total_time.as_ref().map(Scalar::text), "1s");
        let total = match parse_time(&total_text)? {
            Time::Absolute(v) if v > 0.0 => v,
            _ => return Err(invalid("invalid T: must be a positive finite duration such as 1, 10us or 2ms")),
        };
        let time = |flag: &Option<String>, file: &Option<Scalar>, default: &str| -> Result<f64, ConfigError> {
            Ok(parse_time(&pick(flag, file.as_ref().map(Scalar::text), default))?.resolve(total))
        };
        let grid = if common.grid.is_empty() {
            file.grid.unwrap_or_default()
        } else {
            common.grid.clone()
        };
        let cfg = RunConfig {
            d: parse_distances(&pick(&common.d, file.d.as_ref().map(Listish::text), defaults.d))?,
            bases: parse_bases(&pick(&common.basis, file.basis.as_ref().map(Listish::text), defaults.bases))?,
            rounds: parse_rounds(&pick(&common.rounds, file.rounds.as_ref().map(Listish::text), defaults.rounds))?,
            total_time: total,
            t1: time(&common.t1, &file.t1, "2T")?,
            t_phi: time(&common.tphi, &file.tphi, "12T")?,
            p: common.p.or(file.p).unwrap_or(0.006),
            q: common.q.or(file.q).unwrap_or(0.02),
            shots: common.shots.or(file.shots).unwrap_or(10_000),
            seed: common.seed.or(file.seed).unwrap_or(1),
            workers: common
                .workers
                .or(file.workers)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            output: common.output.clone().or(file.output),
            cnot_order: parse_order(&pick(&common.cnot_order, file.cnot_order, "hook-safe"))?,
            grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.d.is_empty() {
            return Err(invalid("invalid d: no distance given"));
        }
        for &d in &self.d {
            if d < 3 || d % 2 == 0 {
                return Err(invalid(format!("invalid d: code distance must be odd and at least 3, got {d}")));
            }
        }
        if self.bases.is_empty() {
            return Err(invalid("invalid basis: no basis given"));
        }
        if self.shots == 0 {
            return Err(invalid("invalid shots: must be at least 1"));
        }
        if self.workers == 0 {
            return Err(invalid("invalid workers: must be at least 1"));
        }
        self.noise().validate().map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }

    pub fn noise(&self) -> NoiseParams {
        NoiseParams {
            t1: self.t1,
            t_phi: self.t_phi,
            p: self.p,
            q: self.q,
            total_time: self.total_time,
        }
    }

    pub fn single_d(&self) -> Result<usize, ConfigError> {
        match self.d[..] {
            [d] => Ok(d),
            _ => Err(invalid("this command takes a single distance")),
        }
    }

    pub fn single_rounds(&self) -> Result<usize, ConfigError> {
        match self.rounds[..] {
            [n] => Ok(n),
            _ => Err(invalid("this command takes a single round count")),
        }
    }

    pub fn analytic_params(&self, d: usize) -> Result<AnalyticParams, ConfigError> {
        AnalyticParams::new(d, self.total_time, self.t1, self.t_phi, self.p).map_err(|e| invalid(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times() {
        assert_eq!(parse_time("2T").unwrap(), Time::OfTotal(2.0));
        assert_eq!(parse_time("T").unwrap(), Time::OfTotal(1.0));
        assert_eq!(parse_time("inf").unwrap(), Time::Infinite);
        assert_eq!(parse_time("3").unwrap(), Time::Absolute(3.0));
        assert!((parse_time("20us").unwrap().resolve(1.0) - 20e-6).abs() < 1e-18);
        assert!((parse_time("900ns").unwrap().resolve(1.0) - 900e-9).abs() < 1e-18);
        assert!((parse_time("2ms").unwrap().resolve(1.0) - 2e-3).abs() < 1e-18);
        assert_eq!(parse_time("12T").unwrap().resolve(10e-6), 12.0 * 10e-6);
        assert!(parse_time("fast").is_err());
        assert!(parse_time("").is_err());
    }

    #[test]
    fn rounds() {
        assert_eq!(parse_rounds("5:80:5").unwrap().len(), 16);
        assert_eq!(parse_rounds("2").unwrap(), vec![2]);
        assert_eq!(parse_rounds("1,3,10:12").unwrap(), vec![1, 3, 10, 11, 12]);
        assert!(parse_rounds("5:1:1").is_err());
        assert!(parse_rounds("0").is_err());
        assert!(parse_rounds("3,2").is_err());
        assert!(parse_rounds("a").is_err());
    }

    #[test]
    fn bases_and_grid() {
        assert_eq!(parse_bases("all").unwrap(), Basis::ALL.to_vec());
        assert_eq!(parse_bases("z,x").unwrap(), vec![Basis::X, Basis::Z]);
        assert!(parse_bases("w").is_err());
        let (p, v) = parse_grid("t1=1T,3T", 2.0).unwrap();
        assert_eq!(p, GridParam::T1);
        assert_eq!(v, vec![2.0, 6.0]);
        assert!(parse_grid("t1", 1.0).is_err());
        assert!(parse_grid("bogus=1", 1.0).is_err());
    }
}
