//! Verification suites over fixed noise grids and seeded random channels.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channels::{NoiseFamily, QuditChannel};
use crate::error::{Error, Result};
use crate::protocols::{
    closed_form, run_ghz, run_qudit, run_two_qubit, separability_audit, simulate,
    verify_identity_chain, ClosedForm, Mode, ProtocolTrace, CHECK_TOL, DEFAULT_MAX_DIM,
};
use crate::random::{random_cp_canonical, seeded_rng};

const GRID_POINTS: usize = 21;
const RANDOM_CHANNELS: usize = 50;
const RANDOM_SEED: u64 = 20_240_917;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckSuite {
    All,
    Identity,
    Separability,
    ClosedForm,
}

impl FromStr for CheckSuite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(CheckSuite::All),
            "identity" => Ok(CheckSuite::Identity),
            "separability" => Ok(CheckSuite::Separability),
            "closed_form" => Ok(CheckSuite::ClosedForm),
            other => Err(Error::Unknown(format!("check suite '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub max_deviation: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Error text when a run could not be completed.
    pub error: Option<String>,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:.3e} {:e} {}",
            self.name,
            self.max_deviation,
            self.threshold,
            if self.passed { "PASS" } else { "FAIL" }
        )?;
        if let Some(e) = &self.error {
            write!(f, " ({e})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

fn line(name: String, result: Result<f64>) -> CheckLine {
    match result {
        Ok(dev) => CheckLine {
            name,
            max_deviation: dev,
            threshold: CHECK_TOL,
            passed: dev <= CHECK_TOL,
            error: None,
        },
        Err(e) => CheckLine {
            name,
            max_deviation: f64::INFINITY,
            threshold: CHECK_TOL,
            passed: false,
            error: Some(e.to_string()),
        },
    }
}

fn grid() -> Vec<f64> {
    (0..GRID_POINTS).map(|k| k as f64 / (GRID_POINTS - 1) as f64).collect()
}

/// A named family of protocol runs.
#[derive(Clone, Debug)]
enum RunSet {
    TwoQubit(NoiseFamily),
    TwoQubitRandomCanonical,
    Ghz(NoiseFamily),
    Qudit(NoiseFamily, usize),
}

impl RunSet {
    fn name(&self) -> String {
        match self {
            RunSet::TwoQubit(f) => format!("two_qubit_{}", f.name()),
            RunSet::TwoQubitRandomCanonical => format!("two_qubit_random_canonical_x{RANDOM_CHANNELS}"),
            RunSet::Ghz(f) => format!("ghz_{}", f.name()),
            RunSet::Qudit(f, d) => format!("qudit_{}_d{d}", f.name()),
        }
    }

    fn traces(&self) -> Result<Vec<ProtocolTrace>> {
        match self {
            RunSet::TwoQubit(f) => grid()
                .par_iter()
                .map(|&x| run_two_qubit(&f.channel(2, x)?, Mode::Deterministic))
                .collect(),
            RunSet::TwoQubitRandomCanonical => {
                let mut rng = seeded_rng(RANDOM_SEED);
                let channels: Vec<QuditChannel> = (0..RANDOM_CHANNELS)
                    .map(|_| QuditChannel::Canonical(random_cp_canonical(&mut rng)))
                    .collect();
                channels
                    .par_iter()
                    .map(|c| run_two_qubit(c, Mode::Probabilistic))
                    .collect()
            }
            RunSet::Ghz(f) => grid()
                .par_iter()
                .map(|&x| {
                    let ch = f.channel(2, x)?;
                    run_ghz(&ch, &ch)
                })
                .collect(),
            RunSet::Qudit(f, d) => grid().par_iter().map(|&x| run_qudit(*d, &f.channel(*d, x)?)).collect(),
        }
    }
}

fn run_sets() -> Vec<RunSet> {
    let families = [NoiseFamily::Depolarizing, NoiseFamily::AmplitudeDamping];
    let mut sets = vec![RunSet::TwoQubitRandomCanonical];
    sets.extend(families.map(RunSet::TwoQubit));
    sets.extend(families.map(RunSet::Ghz));
    for f in families {
        sets.extend((2..=DEFAULT_MAX_DIM).map(|d| RunSet::Qudit(f, d)));
    }
    sets
}

fn max_over(traces: &[ProtocolTrace], f: impl Fn(&ProtocolTrace) -> f64) -> f64 {
    traces.iter().map(f).fold(0.0, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
}

type Reference<'a> = &'a (dyn Fn(ClosedForm, f64, usize) -> Result<f64> + Sync);

fn closed_form_lines(reference: Reference<'_>) -> Vec<CheckLine> {
    let cases: Vec<(ClosedForm, usize)> = ClosedForm::ALL
        .into_iter()
        .flat_map(|f| {
            let dims: Vec<usize> = if f.uses_dimension() { (2..=DEFAULT_MAX_DIM).collect() } else { vec![2] };
            dims.into_iter().map(move |d| (f, d))
        })
        .collect();
    cases
        .par_iter()
        .map(|&(f, d)| {
            let name = if f.uses_dimension() {
                format!("closed_form/{}_d{d}", f.id())
            } else {
                format!("closed_form/{}", f.id())
            };
            let xs = if f.is_threshold() { vec![0.0] } else { grid() };
            let dev = xs.iter().try_fold(0.0f64, |acc, &x| {
                let dev = (reference(f, x, d)? - simulate(f, x, d, DEFAULT_MAX_DIM)?).abs();
                Ok::<f64, Error>(if dev.is_nan() { f64::INFINITY } else { acc.max(dev) })
            });
            line(name, dev)
        })
        .collect()
}

/// Runs `suite` against the built-in closed forms.
pub fn run_checks(suite: CheckSuite) -> CheckReport {
    run_checks_with(suite, &closed_form)
}

/// Runs `suite`, taking closed-form reference values from `reference`.
pub fn run_checks_with(suite: CheckSuite, reference: Reference<'_>) -> CheckReport {
    let identity = matches!(suite, CheckSuite::All | CheckSuite::Identity);
    let separability = matches!(suite, CheckSuite::All | CheckSuite::Separability);
    let mut lines = Vec::new();
    if identity || separability {
        let results: Vec<(String, Result<Vec<ProtocolTrace>>)> =
            run_sets().par_iter().map(|s| (s.name(), s.traces())).collect();
        if identity {
            for (name, traces) in &results {
                let dev = traces
                    .as_ref()
                    .map(|t| max_over(t, |t| verify_identity_chain(t).max_deviation))
                    .map_err(Clone::clone);
                lines.push(line(format!("identity/{name}"), dev));
            }
        }
        if separability {
            for (name, traces) in &results {
                let dev = traces
                    .as_ref()
                    .map(|t| max_over(t, |t| separability_audit(t).max_negativity))
                    .map_err(Clone::clone);
                lines.push(line(format!("separability/{name}"), dev));
            }
        }
    }
    if matches!(suite, CheckSuite::All | CheckSuite::ClosedForm) {
        lines.extend(closed_form_lines(reference));
    }
    CheckReport { lines }
}
