//! Flat `key = value` sweep configuration.
//!
//! Grammar: one `key = value` per line; blank lines and lines starting with
//! `#` are ignored; a key may appear once. Keys are the long flag names of
//! `edss sweep` with `-` written as `_` (`protocol`, `mode`, `channel`, `d`,
//! `max_d`, `lambda1`, `lambda2`, `lambda3`, `t3`, `param`, `from`, `to`,
//! `points`, `csv`, `svg`, `check`).

use std::collections::BTreeMap;
use std::path::PathBuf;

use super::{ChannelSpec, Checks, SweepSpec};
use crate::channels::NoiseFamily;
use crate::error::{Error, Result};
use crate::protocols::{Mode, ProtocolKind, DEFAULT_MAX_DIM};

const KEYS: [&str; 16] = [
    "protocol", "mode", "channel", "d", "max_d", "lambda1", "lambda2", "lambda3", "t3", "param",
    "from", "to", "points", "csv", "svg", "check",
];

fn invalid(msg: String) -> Error {
    Error::InvalidSpec(msg)
}

/// Parses configuration text into key/value pairs.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("line {}: expected key = value", n + 1)))?;
        let k = k.trim().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            return Err(invalid(format!("line {}: unknown key '{k}'", n + 1)));
        }
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(invalid(format!("line {}: key '{k}' repeated", n + 1)));
        }
    }
    Ok(out)
}

fn number(pairs: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match pairs.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| invalid(format!("{key}: '{v}' is not a number"))),
    }
}

fn count(pairs: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize> {
    match pairs.get(key) {
        None => Ok(default),
        Some(v) => parse_count(key, v),
    }
}

fn parse_count(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| invalid(format!("{key}: '{v}' is not a non-negative integer")))
}

/// `3`, `2,3,4` or the inclusive range `2..6`.
fn dimensions(v: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = v.split_once("..") {
        let (a, b) = (parse_count("d", a)?, parse_count("d", b)?);
        if a > b {
            return Err(invalid(format!("d: empty range {v}")));
        }
        return Ok((a..=b).collect());
    }
    v.split(',').map(|s| parse_count("d", s)).collect()
}

fn checks(v: &str) -> Result<Checks> {
    let mut c = Checks::default();
    for name in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name {
            "identity" => c.identity = true,
            "separability" => c.separability = true,
            "closed_form" => c.closed_form = true,
            "all" => {
                c = Checks {
                    identity: true,
                    separability: true,
                    closed_form: true,
                }
            }
            other => return Err(invalid(format!("check: unknown check '{other}'"))),
        }
    }
    Ok(c)
}

/// Builds and validates a [`SweepSpec`] from key/value pairs.
pub fn parse_pairs(pairs: &BTreeMap<String, String>) -> Result<SweepSpec> {
    if let Some(k) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(invalid(format!("unknown key '{k}'")));
    }
    let required = |k: &str| pairs.get(k).ok_or_else(|| invalid(format!("missing '{k}'")));
    let protocol: ProtocolKind = required("protocol")?
        .parse()
        .map_err(|e: Error| invalid(e.to_string()))?;
    let mode: Mode = match pairs.get("mode") {
        Some(m) => m.parse().map_err(|e: Error| invalid(e.to_string()))?,
        None => Mode::Probabilistic,
    };
    let channel = match required("channel")?.as_str() {
        "depolarizing" => ChannelSpec::Noise(NoiseFamily::Depolarizing),
        "amplitude_damping" => ChannelSpec::Noise(NoiseFamily::AmplitudeDamping),
        "canonical" => ChannelSpec::Canonical {
            lambda1: number(pairs, "lambda1", 1.0)?,
            lambda2: number(pairs, "lambda2", 1.0)?,
            lambda3: number(pairs, "lambda3", 1.0)?,
            t3: number(pairs, "t3", 0.0)?,
        },
        other => return Err(invalid(format!("unknown channel '{other}'"))),
    };
    if !matches!(channel, ChannelSpec::Canonical { .. }) {
        if let Some(k) = ["lambda1", "lambda2", "lambda3", "t3"].iter().find(|k| pairs.contains_key(**k)) {
            return Err(invalid(format!("{k} applies only to the canonical channel")));
        }
    }
    let param = match (pairs.get("param"), channel) {
        (Some(p), _) => p.clone(),
        (None, ChannelSpec::Noise(f)) => f.parameter_name().to_string(),
        (None, ChannelSpec::Canonical { .. }) => return Err(invalid("canonical channel needs 'param'".into())),
    };
    let dims = match pairs.get("d") {
        Some(v) => dimensions(v)?,
        None => vec![2],
    };
    let spec = SweepSpec {
        protocol,
        mode,
        channel,
        param,
        from: number(pairs, "from", 0.0)?,
        to: number(pairs, "to", 1.0)?,
        points: count(pairs, "points", 21)?,
        dims,
        max_dim: count(pairs, "max_d", DEFAULT_MAX_DIM)?,
        csv: PathBuf::from(required("csv")?),
        svg: pairs.get("svg").map(PathBuf::from),
        checks: match pairs.get("check") {
            Some(v) => checks(v)?,
            None => Checks::default(),
        },
    };
    spec.validate()?;
    Ok(spec)
}
