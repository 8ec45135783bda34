//! Parameter sweeps over protocol runs, CSV/SVG output, verification
//! suites and protocol descriptions.

mod checks;
mod config;
mod describe;
mod output;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use checks::{run_checks, run_checks_with, CheckLine, CheckReport, CheckSuite};
pub use config::{parse_config, parse_pairs};
pub use describe::describe;
pub use output::{format_value, to_csv, to_svg};

use crate::channels::{canonical_channel, NoiseFamily, QuditChannel};
use crate::error::{Error, Result};
use crate::protocols::{
    closed_form, qudit_critical_noise, run_ghz, run_qudit_bounded, run_two_qubit,
    separability_audit, simulated_from_trace, verify_identity_chain, ClosedForm, Mode,
    ProtocolKind, ProtocolTrace, CHECK_TOL, DEFAULT_MAX_DIM,
};

/// Channel family of a sweep plus the parameters held fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelSpec {
    Noise(NoiseFamily),
    /// Qubit canonical channel; one of the four parameters is swept.
    Canonical {
        lambda1: f64,
        lambda2: f64,
        lambda3: f64,
        t3: f64,
    },
}

impl ChannelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelSpec::Noise(f) => f.name(),
            ChannelSpec::Canonical { .. } => "canonical",
        }
    }

    fn family(&self) -> Option<NoiseFamily> {
        match self {
            ChannelSpec::Noise(f) => Some(*f),
            ChannelSpec::Canonical { .. } => None,
        }
    }

    fn allowed_params(&self) -> &'static [&'static str] {
        match self {
            ChannelSpec::Noise(NoiseFamily::Depolarizing) => &["p"],
            ChannelSpec::Noise(NoiseFamily::AmplitudeDamping) => &["gamma"],
            ChannelSpec::Canonical { .. } => &["lambda1", "lambda2", "lambda3", "t3"],
        }
    }

    /// Channel on a `d`-level carrier with the swept parameter set to `x`.
    pub fn build(&self, param: &str, x: f64, d: usize) -> Result<QuditChannel> {
        match *self {
            ChannelSpec::Noise(f) => f.channel(d, x),
            ChannelSpec::Canonical {
                mut lambda1,
                mut lambda2,
                mut lambda3,
                mut t3,
            } => {
                if d != 2 {
                    return Err(Error::InvalidSpec("canonical channels act on qubits only".into()));
                }
                match param {
                    "lambda1" => lambda1 = x,
                    "lambda2" => lambda2 = x,
                    "lambda3" => lambda3 = x,
                    "t3" => t3 = x,
                    other => return Err(Error::InvalidSpec(format!("cannot sweep '{other}'"))),
                }
                Ok(canonical_channel(lambda1, lambda2, lambda3, t3))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Checks {
    pub identity: bool,
    pub separability: bool,
    pub closed_form: bool,
}

impl Checks {
    pub fn any(&self) -> bool {
        self.identity || self.separability || self.closed_form
    }
}

/// A validated sweep request.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub protocol: ProtocolKind,
    pub mode: Mode,
    pub channel: ChannelSpec,
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    /// Qudit dimensions; `[2]` for the qubit protocols.
    pub dims: Vec<usize>,
    pub max_dim: usize,
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub checks: Checks,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !self.channel.allowed_params().contains(&self.param.as_str()) {
            return bad(format!(
                "parameter '{}' cannot be swept for channel {} (allowed: {})",
                self.param,
                self.channel.name(),
                self.channel.allowed_params().join(", ")
            ));
        }
        if !(self.from.is_finite() && self.to.is_finite()) || self.from > self.to {
            return bad(format!("need from <= to, got {} and {}", self.from, self.to));
        }
        if self.from < 0.0 || self.to > 1.0 {
            return bad(format!("swept range [{}, {}] leaves [0, 1]", self.from, self.to));
        }
        if self.points < 2 {
            return bad(format!("need at least 2 points, got {}", self.points));
        }
        if self.mode == Mode::Deterministic && self.protocol != ProtocolKind::TwoQubit {
            return bad("deterministic mode exists only for two_qubit".into());
        }
        if self.dims.is_empty() {
            return bad("no dimension given".into());
        }
        if self.protocol != ProtocolKind::Qudit && self.dims != [2] {
            return bad(format!("protocol {} uses qubits; d must be 2", self.protocol));
        }
        for &d in &self.dims {
            if d < 2 || d > self.max_dim {
                return bad(format!("d = {d} outside [2, {}]", self.max_dim));
            }
            if d > 2 && matches!(self.channel, ChannelSpec::Canonical { .. }) {
                return bad("canonical channels act on qubits only".into());
            }
        }
        Ok(())
    }

    /// Grid values `from + k (to − from)/(points − 1)`, ending exactly at `to`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|k| {
                if k == n {
                    self.to
                } else {
                    self.from + (self.to - self.from) * k as f64 / n as f64
                }
            })
            .collect()
    }

    /// Closed forms with a per-row reference column.
    pub fn closed_forms(&self) -> Vec<ClosedForm> {
        let Some(family) = self.channel.family() else {
            return Vec::new();
        };
        ClosedForm::ALL
            .into_iter()
            .filter(|f| {
                f.protocol() == self.protocol
                    && f.family() == family
                    && !f.is_threshold()
                    && (!f.is_deterministic() || self.mode == Mode::Deterministic)
            })
            .collect()
    }

    fn has_critical_column(&self) -> bool {
        self.protocol == ProtocolKind::Qudit
            && self.channel == ChannelSpec::Noise(NoiseFamily::Depolarizing)
    }

    /// Column names, swept parameter first.
    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.param.clone()];
        if self.protocol == ProtocolKind::Qudit {
            h.push("d".into());
        }
        h.push("success_probability".into());
        let quantities: &[&str] = match self.protocol {
            ProtocolKind::TwoQubit => &[
                "avg_negativity",
                "N_a_b_success",
                "N_a_bc_rho1p",
                "N_a_bc_rho2p",
                "N_b_ac_rho2p",
            ],
            ProtocolKind::Ghz => &[
                "avg_negativity",
                "N_a_bc_avg",
                "N_b_ac_avg",
                "N_c_ab_avg",
                "N_a_bc_success",
                "N_b_ac_success",
                "N_c_ab_success",
                "N_a_bcD_sigma1p",
                "N_a_bcD_sigma2p",
                "N_b_acD_sigma2p",
                "N_c_abD_sigma2p",
                "N_a_b_pair",
                "N_b_c_pair",
                "N_a_c_pair",
            ],
            ProtocolKind::Qudit => &[
                "avg_negativity",
                "N_a_b_success",
                "N_a_bc_omega1p",
                "N_a_bc_omega2p",
                "N_b_ac_omega2p",
            ],
        };
        h.extend(quantities.iter().map(|s| s.to_string()));
        if self.mode == Mode::Deterministic {
            h.push("det_negativity".into());
            h.push("det_concurrence".into());
        }
        h.push(match self.protocol {
            ProtocolKind::Ghz => "N_D_abc_max".into(),
            _ => "N_c_ab_max".into(),
        });
        h.push("chain_deviation".into());
        if self.has_critical_column() {
            h.push("p_c_sim".into());
        }
        if self.checks.closed_form {
            h.extend(self.closed_forms().iter().map(|f| format!("cf_{}", f.id())));
            if self.has_critical_column() {
                h.push(format!("cf_{}", ClosedForm::QuditDepCritical.id()));
            }
        }
        h
    }
}

/// One grid point; `values` align with the header after the parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    pub dim: usize,
    pub values: Vec<f64>,
}

/// A check that failed on one row.
#[derive(Clone, Debug, PartialEq)]
pub struct RowFailure {
    pub row: usize,
    pub check: &'static str,
    pub deviation: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub header: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<RowFailure>,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Values of `column` across rows, in row order.
    pub fn column(&self, column: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == column)?;
        Some(
            self.rows
                .iter()
                .map(|r| if idx == 0 { r.parameter } else { r.row_value(&self.header, idx) })
                .collect(),
        )
    }
}

impl SweepRow {
    fn row_value(&self, header: &[String], idx: usize) -> f64 {
        if header.get(1).map(String::as_str) == Some("d") {
            if idx == 1 {
                return self.dim as f64;
            }
            self.values[idx - 2]
        } else {
            self.values[idx - 1]
        }
    }

    /// Every field of the row in header order.
    pub fn all_values(&self, header: &[String]) -> Vec<f64> {
        (0..header.len())
            .map(|i| if i == 0 { self.parameter } else { self.row_value(header, i) })
            .collect()
    }
}

fn run_point(spec: &SweepSpec, x: f64, d: usize) -> Result<ProtocolTrace> {
    let ch = spec.channel.build(&spec.param, x, d)?;
    match spec.protocol {
        ProtocolKind::TwoQubit => run_two_qubit(&ch, spec.mode),
        ProtocolKind::Ghz => run_ghz(&ch, &ch),
        ProtocolKind::Qudit => run_qudit_bounded(d, &ch, spec.max_dim),
    }
}

fn key(trace: &ProtocolTrace, k: &str) -> f64 {
    trace
        .partition(k)
        .or_else(|| trace.average(k))
        .or_else(|| trace.pairwise_negativities.get(k).copied())
        .unwrap_or(f64::NAN)
}

struct PointResult {
    row: SweepRow,
    failures: Vec<(&'static str, f64, String)>,
}

fn evaluate_point(spec: &SweepSpec, x: f64, d: usize, p_c: Option<f64>) -> Result<PointResult> {
    let trace = run_point(spec, x, d)?;
    let mut v = vec![trace.success_probability, trace.average_negativity];
    match spec.protocol {
        ProtocolKind::TwoQubit => v.extend(
            ["a|b@success", "a|bc@rho1'", "a|bc@rho2'", "b|ac@rho2'"].map(|k| key(&trace, k)),
        ),
        ProtocolKind::Ghz => v.extend(
            [
                "a|bc",
                "b|ac",
                "c|ab",
                "a|bc@success",
                "b|ac@success",
                "c|ab@success",
                "a|bcD@sigma1'",
                "a|bcD@sigma2'",
                "b|acD@sigma2'",
                "c|abD@sigma2'",
            ]
            .map(|k| key(&trace, k)),
        ),
        ProtocolKind::Qudit => v.extend(
            ["a|b@success", "a|bc@omega1'", "a|bc@omega2'", "b|ac@omega2'"].map(|k| key(&trace, k)),
        ),
    }
    if spec.protocol == ProtocolKind::Ghz {
        v.extend(["a|b", "b|c", "a|c"].map(|k| trace.pairwise_negativities.get(k).copied().unwrap_or(0.0)));
    }
    if let Some(det) = &trace.deterministic_output {
        v.push(det.negativity);
        v.push(det.concurrence);
    }
    let audit = separability_audit(&trace);
    let chain = verify_identity_chain(&trace);
    v.push(audit.max_negativity);
    v.push(chain.max_deviation);
    if let Some(pc) = p_c {
        v.push(pc);
    }

    let mut failures = Vec::new();
    if spec.checks.identity && !chain.passed {
        failures.push(("identity", chain.max_deviation, "identity chain deviation".to_string()));
    }
    if spec.checks.separability && !audit.passed {
        failures.push(("separability", audit.max_negativity, "exchange partition is NPT".to_string()));
    }
    if spec.checks.closed_form {
        for f in spec.closed_forms() {
            let reference = closed_form(f, x, d)?;
            let simulated = simulated_from_trace(f, &trace)?;
            let dev = (reference - simulated).abs();
            if dev.is_nan() || dev > CHECK_TOL {
                failures.push(("closed_form", dev, format!("{f}: simulated {simulated}, closed form {reference}")));
            }
            v.push(reference);
        }
        if let Some(pc) = p_c {
            let reference = closed_form(ClosedForm::QuditDepCritical, x, d)?;
            let dev = (reference - pc).abs();
            if dev.is_nan() || dev > CHECK_TOL {
                failures.push(("closed_form", dev, format!("p_c: simulated {pc}, closed form {reference}")));
            }
            v.push(reference);
        }
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "non-finite value in column {} at {} = {x}",
            spec.header()[i + 1 + usize::from(spec.protocol == ProtocolKind::Qudit)],
            spec.param
        )));
    }
    Ok(PointResult {
        row: SweepRow {
            parameter: x,
            dim: d,
            values: v,
        },
        failures,
    })
}

/// Evaluates every grid point (concurrently) without writing files. Rows
/// are ordered by dimension, then by grid value.
pub fn evaluate(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let grid = spec.grid();
    let critical: Vec<Option<f64>> = spec
        .dims
        .par_iter()
        .map(|&d| {
            if spec.has_critical_column() {
                qudit_critical_noise(d, NoiseFamily::Depolarizing, spec.max_dim)?
                    .map(Some)
                    .ok_or_else(|| Error::InvalidSpec(format!("no critical noise found for d = {d}")))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64, Option<f64>)> = spec
        .dims
        .iter()
        .zip(&critical)
        .flat_map(|(&d, &pc)| grid.iter().map(move |&x| (d, x, pc)))
        .collect();
    let results: Vec<PointResult> = jobs
        .par_iter()
        .map(|&(d, x, pc)| evaluate_point(spec, x, d, pc))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        failures.extend(r.failures.into_iter().map(|(check, deviation, detail)| RowFailure {
            row: i,
            check,
            deviation,
            detail,
        }));
        rows.push(r.row);
    }
    Ok(SweepOutcome {
        header: spec.header(),
        rows,
        failures,
    })
}

/// Evaluates the sweep and writes the CSV (and SVG, if requested).
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    let outcome = evaluate(spec)?;
    write_file(&spec.csv, &to_csv(&outcome))?;
    if let Some(svg) = &spec.svg {
        let title = format!("{} / {} / {}", spec.protocol, spec.channel.name(), spec.param);
        write_file(svg, &to_svg(&outcome, &title))?;
    }
    Ok(outcome)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            protocol: ProtocolKind::TwoQubit,
            mode: Mode::Probabilistic,
            channel: ChannelSpec::Noise(NoiseFamily::Depolarizing),
            param: "p".into(),
            from: 0.0,
            to: 1.0,
            points: 21,
            dims: vec![2],
            max_dim: DEFAULT_MAX_DIM,
            csv: PathBuf::from("sweep.csv"),
            svg: None,
            checks: Checks::default(),
        }
    }
}
