//! End-to-end runs of the separable-carrier distribution protocols: two-qubit
//! (probabilistic and deterministic), three-qubit GHZ, and two-qudit Bell.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::channels::{apply_to_subsystem, is_cpt, NoiseFamily, NoiseModel, QuditChannel};
use crate::error::{Error, Result};
use crate::measures::{average_negativity, concurrence, negativity, negativity_of};
use crate::states::{
    bob_deterministic_map, cnot, edss_initial_two_qubit, ghz_initial_state,
    measure_computational, measure_computational_joint, qudit_initial_state, MeasurementBranch,
};
use crate::tensor::{
    hermitian_eigenvalues, partial_trace, partial_transpose, Bipartition, DensityOperator,
    VALIDITY_TOL,
};

/// Largest qudit dimension accepted unless overridden.
pub const DEFAULT_MAX_DIM: usize = 6;

/// Chains and audits pass at or below this deviation.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolKind {
    TwoQubit,
    Ghz,
    Qudit,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [ProtocolKind::TwoQubit, ProtocolKind::Ghz, ProtocolKind::Qudit];

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::TwoQubit => "two_qubit",
            ProtocolKind::Ghz => "ghz",
            ProtocolKind::Qudit => "qudit",
        }
    }

    /// Exchange-versus-rest partition label used by the separability audit.
    pub fn exchange_partition(&self) -> &'static str {
        match self {
            ProtocolKind::Ghz => "D|abc",
            _ => "c|ab",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_qubit" => Ok(ProtocolKind::TwoQubit),
            "ghz" => Ok(ProtocolKind::Ghz),
            "qudit" => Ok(ProtocolKind::Qudit),
            other => Err(Error::Unknown(format!("protocol '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Probabilistic,
    Deterministic,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prob" | "probabilistic" => Ok(Mode::Probabilistic),
            "det" | "deterministic" => Ok(Mode::Deterministic),
            other => Err(Error::Unknown(format!("mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolStep {
    pub label: String,
    pub state: DensityOperator,
}

/// Two-qubit state after Bob's local map, with its entanglement.
#[derive(Clone, Debug)]
pub struct DeterministicOutput {
    pub state: DensityOperator,
    pub negativity: f64,
    pub concurrence: f64,
}

/// Everything computed during one protocol run.
///
/// Partition keys have the form `"<side>|<rest>@<step label>"`, with
/// `@success` for the success branch. `average_negativities` is keyed by the
/// bare partition of the post-measurement register.
#[derive(Clone, Debug)]
pub struct ProtocolTrace {
    pub kind: ProtocolKind,
    pub dim: usize,
    pub steps: Vec<ProtocolStep>,
    pub branches: Vec<MeasurementBranch>,
    pub partition_negativities: BTreeMap<String, f64>,
    pub average_negativities: BTreeMap<String, f64>,
    /// `a|b` for the two-party protocols, `a|bc` for GHZ.
    pub average_negativity: f64,
    pub success_probability: f64,
    /// GHZ only: `a|b`, `b|c`, `a|c` of the success branch.
    pub pairwise_negativities: BTreeMap<String, f64>,
    pub deterministic_output: Option<DeterministicOutput>,
    /// Set when the run falls outside the assumptions behind the identity
    /// chains (non-canonical qubit channel, distinct GHZ channels).
    pub outside_claims: Option<String>,
    pub noise: Option<NoiseModel>,
}

impl ProtocolTrace {
    pub fn step(&self, label: &str) -> Option<&DensityOperator> {
        self.steps.iter().find(|s| s.label == label).map(|s| &s.state)
    }

    pub fn partition(&self, key: &str) -> Option<f64> {
        self.partition_negativities.get(key).copied()
    }

    pub fn average(&self, partition: &str) -> Option<f64> {
        self.average_negativities.get(partition).copied()
    }

    pub fn success_branch(&self) -> &MeasurementBranch {
        &self.branches[0]
    }
}

fn require_cpt(ch: &QuditChannel) -> Result<()> {
    let report = is_cpt(ch, VALIDITY_TOL)?;
    if !report.is_cpt {
        return Err(Error::NotCpt(format!(
            "min Choi eigenvalue {:e}, trace-preservation error {:e}",
            report.min_choi_eigenvalue, report.trace_preservation_error
        )));
    }
    Ok(())
}

fn require_qubit(ch: &QuditChannel) -> Result<()> {
    if ch.input_dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "qubit channel required, got dimension {}",
            ch.input_dim()
        )));
    }
    Ok(())
}

fn step(label: &str, state: DensityOperator) -> ProtocolStep {
    ProtocolStep {
        label: label.to_string(),
        state,
    }
}

/// `ρ0`, `ρ1 = C_ac ρ0`, `ρ1' = E_c ρ1`, `ρ2' = C_bc ρ1'`.
pub fn two_qubit_states(ch: &QuditChannel) -> Result<Vec<ProtocolStep>> {
    require_qubit(ch)?;
    let r0 = edss_initial_two_qubit();
    let r1 = cnot(&r0, 0, 2, false)?;
    let r1p = apply_to_subsystem(ch, &r1, 2)?;
    let r2p = cnot(&r1p, 1, 2, false)?;
    Ok(vec![
        step("rho0", r0),
        step("rho1", r1),
        step("rho1'", r1p),
        step("rho2'", r2p),
    ])
}

/// Register `(a, b, c, d1, d2)`: `σ0`, `σ1 = C_{a,d2} C_{a,d1} σ0`,
/// `σ1' = (E1 ⊗ E2) σ1`, `σ2' = C_{c,d2} C_{b,d1} σ1'`.
pub fn ghz_states(ch1: &QuditChannel, ch2: &QuditChannel) -> Result<Vec<ProtocolStep>> {
    require_qubit(ch1)?;
    require_qubit(ch2)?;
    let s0 = ghz_initial_state();
    let s1 = cnot(&cnot(&s0, 0, 3, false)?, 0, 4, false)?;
    let s1p = apply_to_subsystem(ch2, &apply_to_subsystem(ch1, &s1, 3)?, 4)?;
    let s2p = cnot(&cnot(&s1p, 1, 3, false)?, 2, 4, false)?;
    Ok(vec![
        step("sigma0", s0),
        step("sigma1", s1),
        step("sigma1'", s1p),
        step("sigma2'", s2p),
    ])
}

/// `Ω0`, `Ω1 = C_ac Ω0`, `Ω1' = E_c Ω1`, `Ω2' = C⁻¹_bc Ω1'`.
pub fn qudit_states(d: usize, ch: &QuditChannel) -> Result<Vec<ProtocolStep>> {
    let o0 = qudit_initial_state(d)?;
    let o1 = cnot(&o0, 0, 2, false)?;
    qudit_states_from(o0, o1, ch)
}

fn qudit_states_from(
    o0: DensityOperator,
    o1: DensityOperator,
    ch: &QuditChannel,
) -> Result<Vec<ProtocolStep>> {
    let o1p = apply_to_subsystem(ch, &o1, 2)?;
    let o2p = cnot(&o1p, 1, 2, true)?;
    Ok(vec![
        step("omega0", o0),
        step("omega1", o1),
        step("omega1'", o1p),
        step("omega2'", o2p),
    ])
}

fn success_negativity(branch: &MeasurementBranch, side_a: &[usize]) -> Result<f64> {
    match &branch.post_state {
        Some(s) => negativity_of(s, side_a),
        None => Ok(0.0),
    }
}

fn exchange_audit(
    pn: &mut BTreeMap<String, f64>,
    steps: &[ProtocolStep],
    label: &str,
    side: &[usize],
) -> Result<()> {
    for s in steps {
        pn.insert(format!("{label}@{}", s.label), negativity_of(&s.state, side)?);
    }
    Ok(())
}

fn non_canonical_note(ch: &QuditChannel) -> Option<String> {
    if ch.input_dim() == 2 && ch.canonical_form(1e-12).is_none() {
        Some("channel is not a canonical (t1 = t2 = 0) qubit map".into())
    } else {
        None
    }
}

/// Two-qubit run. Branches and averages are filled in both modes;
/// deterministic mode also applies Bob's local map.
pub fn run_two_qubit(ch: &QuditChannel, mode: Mode) -> Result<ProtocolTrace> {
    require_qubit(ch)?;
    require_cpt(ch)?;
    let steps = two_qubit_states(ch)?;
    let r1p = &steps[2].state;
    let r2p = &steps[3].state;
    let mut pn = BTreeMap::new();
    pn.insert("a|bc@rho1'".to_string(), negativity_of(r1p, &[0])?);
    pn.insert("a|bc@rho2'".to_string(), negativity_of(r2p, &[0])?);
    pn.insert("b|ac@rho2'".to_string(), negativity_of(r2p, &[1])?);
    exchange_audit(&mut pn, &steps, "c|ab", &[2])?;

    let branches = measure_computational(r2p, 2)?;
    let avg = average_negativity(&branches, &Bipartition::split(&[0], 2)?)?;
    pn.insert("a|b@success".to_string(), success_negativity(&branches[0], &[0])?);

    let deterministic_output = match mode {
        Mode::Probabilistic => None,
        Mode::Deterministic => {
            let state = bob_deterministic_map(r2p)?;
            Some(DeterministicOutput {
                negativity: negativity_of(&state, &[0])?,
                concurrence: concurrence(&state)?,
                state,
            })
        }
    };
    Ok(ProtocolTrace {
        kind: ProtocolKind::TwoQubit,
        dim: 2,
        success_probability: branches[0].probability,
        steps,
        branches,
        partition_negativities: pn,
        average_negativities: BTreeMap::from([("a|b".to_string(), avg)]),
        average_negativity: avg,
        pairwise_negativities: BTreeMap::new(),
        deterministic_output,
        outside_claims: non_canonical_note(ch),
        noise: ch.noise_model(),
    })
}

/// GHZ run with channel `ch1` on `d1` and `ch2` on `d2`.
pub fn run_ghz(ch1: &QuditChannel, ch2: &QuditChannel) -> Result<ProtocolTrace> {
    require_qubit(ch1)?;
    require_qubit(ch2)?;
    require_cpt(ch1)?;
    require_cpt(ch2)?;
    let steps = ghz_states(ch1, ch2)?;
    let s1p = &steps[2].state;
    let s2p = &steps[3].state;
    let mut pn = BTreeMap::new();
    pn.insert("a|bcD@sigma1'".to_string(), negativity_of(s1p, &[0])?);
    pn.insert("a|bcD@sigma2'".to_string(), negativity_of(s2p, &[0])?);
    pn.insert("b|acD@sigma2'".to_string(), negativity_of(s2p, &[1])?);
    pn.insert("c|abD@sigma2'".to_string(), negativity_of(s2p, &[2])?);
    exchange_audit(&mut pn, &steps, "D|abc", &[3, 4])?;

    let branches = measure_computational_joint(s2p, &[3, 4])?;
    let mut averages = BTreeMap::new();
    for (name, side) in [("a|bc", 0), ("b|ac", 1), ("c|ab", 2)] {
        averages.insert(
            name.to_string(),
            average_negativity(&branches, &Bipartition::split(&[side], 3)?)?,
        );
        pn.insert(format!("{name}@success"), success_negativity(&branches[0], &[side])?);
    }
    let mut pairwise = BTreeMap::new();
    if let Some(s) = &branches[0].post_state {
        for (name, keep) in [("a|b", [0, 1]), ("b|c", [1, 2]), ("a|c", [0, 2])] {
            pairwise.insert(name.to_string(), negativity_of(&partial_trace(s, &keep)?, &[0])?);
        }
    }
    let identical = ch1
        .unit_images()
        .iter()
        .zip(ch2.unit_images().iter())
        .all(|(a, b)| a.approx_eq(b, 1e-12));
    let outside_claims = if !identical {
        Some("channels on d1 and d2 differ".to_string())
    } else {
        non_canonical_note(ch1)
    };
    let noise = if identical { ch1.noise_model() } else { None };
    Ok(ProtocolTrace {
        kind: ProtocolKind::Ghz,
        dim: 2,
        success_probability: branches[0].probability,
        average_negativity: averages["a|bc"],
        steps,
        branches,
        partition_negativities: pn,
        average_negativities: averages,
        pairwise_negativities: pairwise,
        deterministic_output: None,
        outside_claims,
        noise,
    })
}

/// Qudit run bounded by [`DEFAULT_MAX_DIM`].
pub fn run_qudit(d: usize, ch: &QuditChannel) -> Result<ProtocolTrace> {
    run_qudit_bounded(d, ch, DEFAULT_MAX_DIM)
}

pub fn run_qudit_bounded(d: usize, ch: &QuditChannel, max_dim: usize) -> Result<ProtocolTrace> {
    check_qudit_args(d, ch, max_dim)?;
    require_cpt(ch)?;
    let steps = qudit_states(d, ch)?;
    let o1p = &steps[2].state;
    let o2p = &steps[3].state;
    let mut pn = BTreeMap::new();
    pn.insert("a|bc@omega1'".to_string(), negativity_of(o1p, &[0])?);
    pn.insert("b|ac@omega1'".to_string(), negativity_of(o1p, &[1])?);
    pn.insert("a|bc@omega2'".to_string(), negativity_of(o2p, &[0])?);
    pn.insert("b|ac@omega2'".to_string(), negativity_of(o2p, &[1])?);
    exchange_audit(&mut pn, &steps, "c|ab", &[2])?;

    let branches = measure_computational(o2p, 2)?;
    let avg = average_negativity(&branches, &Bipartition::split(&[0], 2)?)?;
    pn.insert("a|b@success".to_string(), success_negativity(&branches[0], &[0])?);
    Ok(ProtocolTrace {
        kind: ProtocolKind::Qudit,
        dim: d,
        success_probability: branches[0].probability,
        steps,
        branches,
        partition_negativities: pn,
        average_negativities: BTreeMap::from([("a|b".to_string(), avg)]),
        average_negativity: avg,
        pairwise_negativities: BTreeMap::new(),
        deterministic_output: None,
        outside_claims: non_canonical_note(ch),
        noise: ch.noise_model(),
    })
}

fn check_qudit_args(d: usize, ch: &QuditChannel, max_dim: usize) -> Result<()> {
    if d < 2 || d > max_dim {
        return Err(Error::InvalidDims(format!("qudit dimension {d} outside [2, {max_dim}]")));
    }
    if ch.input_dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "channel acts on dimension {}, protocol uses {d}",
            ch.input_dim()
        )));
    }
    if d > 2 && ch.noise_model().is_none() {
        return Err(Error::UnsupportedChannel(
            "qudit runs with d > 2 accept only depolarizing or amplitude damping".into(),
        ));
    }
    Ok(())
}

/// One group of quantities that must coincide.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub name: String,
    pub members: Vec<(String, f64)>,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityChainReport {
    pub chains: Vec<Chain>,
    pub max_deviation: f64,
    pub passed: bool,
}

fn chain(name: &str, members: Vec<(String, f64)>) -> Chain {
    let hi = members.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = members.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    Chain {
        name: name.to_string(),
        members,
        deviation: hi - lo,
    }
}

fn member(trace: &ProtocolTrace, key: &str) -> (String, f64) {
    let v = trace
        .partition(key)
        .or_else(|| key.strip_prefix("avg ").and_then(|p| trace.average(p)))
        .unwrap_or(f64::NAN);
    (key.to_string(), v)
}

/// Branch average against the pre-measurement partitions it must equal.
pub fn verify_identity_chain(trace: &ProtocolTrace) -> IdentityChainReport {
    let m = |k: &str| member(trace, k);
    let chains = match trace.kind {
        ProtocolKind::TwoQubit => vec![chain(
            "a|b",
            vec![m("avg a|b"), m("a|bc@rho1'"), m("a|bc@rho2'"), m("b|ac@rho2'")],
        )],
        ProtocolKind::Qudit => vec![chain(
            "a|b",
            vec![m("avg a|b"), m("a|bc@omega1'"), m("a|bc@omega2'"), m("b|ac@omega2'")],
        )],
        ProtocolKind::Ghz => {
            let mut v = vec![
                chain("a|bc", vec![m("avg a|bc"), m("a|bcD@sigma2'"), m("a|bcD@sigma1'")]),
                chain("b|ac", vec![m("avg b|ac"), m("b|acD@sigma2'")]),
                chain("c|ab", vec![m("avg c|ab"), m("c|abD@sigma2'")]),
            ];
            if trace.outside_claims.is_none() {
                v.push(chain(
                    "b|ac = c|ab",
                    vec![m("avg b|ac"), m("b|acD@sigma2'"), m("c|abD@sigma2'"), m("avg c|ab")],
                ));
            }
            v
        }
    };
    let max_deviation = chains
        .iter()
        .map(|c| if c.deviation.is_nan() { f64::INFINITY } else { c.deviation })
        .fold(0.0, f64::max);
    IdentityChainReport {
        passed: max_deviation <= CHECK_TOL,
        chains,
        max_deviation,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparabilityReport {
    pub entries: Vec<(String, f64)>,
    pub max_negativity: f64,
    pub passed: bool,
}

/// Negativity of the exchange system against the rest at every step.
pub fn separability_audit(trace: &ProtocolTrace) -> SeparabilityReport {
    let prefix = format!("{}@", trace.kind.exchange_partition());
    let entries: Vec<(String, f64)> = trace
        .steps
        .iter()
        .map(|s| {
            let key = format!("{prefix}{}", s.label);
            let v = trace.partition(&key).unwrap_or(f64::NAN);
            (key, v)
        })
        .collect();
    let max_negativity = entries
        .iter()
        .map(|e| if e.1.is_nan() { f64::INFINITY } else { e.1 })
        .fold(0.0, f64::max);
    SeparabilityReport {
        passed: max_negativity <= CHECK_TOL,
        entries,
        max_negativity,
    }
}

fn min_pt_eigenvalue(rho: &DensityOperator, side_a: &[usize]) -> Result<f64> {
    let part = Bipartition::split(side_a, rho.num_subsystems())?;
    let pt = partial_transpose(rho, &part)?;
    Ok(hermitian_eigenvalues(&pt)?.first().copied().unwrap_or(0.0))
}

/// Smallest `x` in `[lo, hi]` with `f(x) ≥ 0`, assuming `f` is negative
/// below it and non-negative above; `None` if `f(hi) < 0`.
pub fn bisect_sign_change<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    if f(hi)? < 0.0 {
        return Ok(None);
    }
    if f(lo)? >= 0.0 {
        return Ok(Some(lo));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if f(mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

const THRESHOLD_TOL: f64 = 1e-13;

/// Noise level at which the success branch of the qudit run stops being NPT.
pub fn qudit_critical_noise(d: usize, family: NoiseFamily, max_dim: usize) -> Result<Option<f64>> {
    check_qudit_args(d, &family.channel(d, 0.0)?, max_dim)?;
    let o0 = qudit_initial_state(d)?;
    let o1 = cnot(&o0, 0, 2, false)?;
    bisect_sign_change(
        |x| {
            let ch = family.channel(d, x)?;
            let o1p = apply_to_subsystem(&ch, &o1, 2)?;
            let o2p = cnot(&o1p, 1, 2, true)?;
            success_min_eigenvalue(&measure_computational(&o2p, 2)?[0], &[0])
        },
        0.0,
        1.0,
        THRESHOLD_TOL,
    )
}

/// Noise level at which the GHZ success branch stops being NPT across
/// `side | rest` (`side` in 0..3), for identical channels on both ancillas.
pub fn ghz_critical_noise(family: NoiseFamily, side: usize) -> Result<Option<f64>> {
    if side > 2 {
        return Err(Error::IndexOutOfRange { index: side, count: 3 });
    }
    bisect_sign_change(
        |x| {
            let ch = family.channel(2, x)?;
            let steps = ghz_states(&ch, &ch)?;
            let br = measure_computational_joint(&steps[3].state, &[3, 4])?;
            success_min_eigenvalue(&br[0], &[side])
        },
        0.0,
        1.0,
        THRESHOLD_TOL,
    )
}

/// Noise level at which Bob's deterministic output stops being NPT.
pub fn two_qubit_deterministic_threshold(family: NoiseFamily) -> Result<Option<f64>> {
    bisect_sign_change(
        |x| {
            let ch = family.channel(2, x)?;
            let steps = two_qubit_states(&ch)?;
            min_pt_eigenvalue(&bob_deterministic_map(&steps[3].state)?, &[0])
        },
        0.0,
        1.0,
        THRESHOLD_TOL,
    )
}

fn success_min_eigenvalue(branch: &MeasurementBranch, side: &[usize]) -> Result<f64> {
    match &branch.post_state {
        Some(s) => min_pt_eigenvalue(s, side),
        None => Ok(0.0),
    }
}

/// Analytic results for the protocols, each a function of one noise
/// parameter `x` (and the qudit dimension where relevant).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClosedForm {
    TwoQubitDepSuccessProbability,
    TwoQubitDepSuccessNegativity,
    TwoQubitDepAverage,
    TwoQubitDepDeterministic,
    TwoQubitDepDeterministicThreshold,
    TwoQubitAdSuccessProbability,
    TwoQubitAdSuccessNegativity,
    TwoQubitAdAverage,
    TwoQubitAdDeterministic,
    GhzDepSuccessProbability,
    GhzDepSuccessNegativityA,
    GhzDepSuccessNegativityB,
    GhzDepAverageA,
    GhzDepAverageB,
    GhzDepCriticalA,
    GhzDepCriticalB,
    GhzAdSuccessProbability,
    GhzAdSuccessNegativityA,
    GhzAdSuccessNegativityB,
    GhzAdAverageA,
    GhzAdAverageB,
    QuditDepSuccessProbability,
    QuditDepSuccessNegativity,
    QuditDepAverage,
    QuditDepCritical,
    QuditAdSuccessProbability,
    QuditAdSuccessNegativity,
    QuditAdAverage,
}

use ClosedForm as CF;

impl ClosedForm {
    pub const ALL: [ClosedForm; 28] = [
        CF::TwoQubitDepSuccessProbability,
        CF::TwoQubitDepSuccessNegativity,
        CF::TwoQubitDepAverage,
        CF::TwoQubitDepDeterministic,
        CF::TwoQubitDepDeterministicThreshold,
        CF::TwoQubitAdSuccessProbability,
        CF::TwoQubitAdSuccessNegativity,
        CF::TwoQubitAdAverage,
        CF::TwoQubitAdDeterministic,
        CF::GhzDepSuccessProbability,
        CF::GhzDepSuccessNegativityA,
        CF::GhzDepSuccessNegativityB,
        CF::GhzDepAverageA,
        CF::GhzDepAverageB,
        CF::GhzDepCriticalA,
        CF::GhzDepCriticalB,
        CF::GhzAdSuccessProbability,
        CF::GhzAdSuccessNegativityA,
        CF::GhzAdSuccessNegativityB,
        CF::GhzAdAverageA,
        CF::GhzAdAverageB,
        CF::QuditDepSuccessProbability,
        CF::QuditDepSuccessNegativity,
        CF::QuditDepAverage,
        CF::QuditDepCritical,
        CF::QuditAdSuccessProbability,
        CF::QuditAdSuccessNegativity,
        CF::QuditAdAverage,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            CF::TwoQubitDepSuccessProbability => "two_qubit_dep_success_probability",
            CF::TwoQubitDepSuccessNegativity => "two_qubit_dep_success_negativity",
            CF::TwoQubitDepAverage => "two_qubit_dep_avg",
            CF::TwoQubitDepDeterministic => "two_qubit_dep_det",
            CF::TwoQubitDepDeterministicThreshold => "two_qubit_dep_det_threshold",
            CF::TwoQubitAdSuccessProbability => "two_qubit_ad_success_probability",
            CF::TwoQubitAdSuccessNegativity => "two_qubit_ad_success_negativity",
            CF::TwoQubitAdAverage => "two_qubit_ad_avg",
            CF::TwoQubitAdDeterministic => "two_qubit_ad_det",
            CF::GhzDepSuccessProbability => "ghz_dep_success_probability",
            CF::GhzDepSuccessNegativityA => "ghz_dep_success_N_a_bc",
            CF::GhzDepSuccessNegativityB => "ghz_dep_success_N_b_ac",
            CF::GhzDepAverageA => "ghz_dep_avg_N_a_bc",
            CF::GhzDepAverageB => "ghz_dep_avg_N_b_ac",
            CF::GhzDepCriticalA => "ghz_dep_critical_a_bc",
            CF::GhzDepCriticalB => "ghz_dep_critical_b_ac",
            CF::GhzAdSuccessProbability => "ghz_ad_success_probability",
            CF::GhzAdSuccessNegativityA => "ghz_ad_success_N_a_bc",
            CF::GhzAdSuccessNegativityB => "ghz_ad_success_N_b_ac",
            CF::GhzAdAverageA => "ghz_ad_avg_N_a_bc",
            CF::GhzAdAverageB => "ghz_ad_avg_N_b_ac",
            CF::QuditDepSuccessProbability => "qudit_dep_success_probability",
            CF::QuditDepSuccessNegativity => "qudit_dep_success_negativity",
            CF::QuditDepAverage => "qudit_dep_avg",
            CF::QuditDepCritical => "qudit_dep_critical",
            CF::QuditAdSuccessProbability => "qudit_ad_success_probability",
            CF::QuditAdSuccessNegativity => "qudit_ad_success_negativity",
            CF::QuditAdAverage => "qudit_ad_avg",
        }
    }

    pub fn protocol(&self) -> ProtocolKind {
        match self {
            CF::TwoQubitDepSuccessProbability
            | CF::TwoQubitDepSuccessNegativity
            | CF::TwoQubitDepAverage
            | CF::TwoQubitDepDeterministic
            | CF::TwoQubitDepDeterministicThreshold
            | CF::TwoQubitAdSuccessProbability
            | CF::TwoQubitAdSuccessNegativity
            | CF::TwoQubitAdAverage
            | CF::TwoQubitAdDeterministic => ProtocolKind::TwoQubit,
            CF::GhzDepSuccessProbability
            | CF::GhzDepSuccessNegativityA
            | CF::GhzDepSuccessNegativityB
            | CF::GhzDepAverageA
            | CF::GhzDepAverageB
            | CF::GhzDepCriticalA
            | CF::GhzDepCriticalB
            | CF::GhzAdSuccessProbability
            | CF::GhzAdSuccessNegativityA
            | CF::GhzAdSuccessNegativityB
            | CF::GhzAdAverageA
            | CF::GhzAdAverageB => ProtocolKind::Ghz,
            _ => ProtocolKind::Qudit,
        }
    }

    pub fn family(&self) -> NoiseFamily {
        if self.id().contains("_dep_") {
            NoiseFamily::Depolarizing
        } else {
            NoiseFamily::AmplitudeDamping
        }
    }

    /// Thresholds take no noise parameter.
    pub fn is_threshold(&self) -> bool {
        matches!(
            self,
            CF::TwoQubitDepDeterministicThreshold | CF::GhzDepCriticalA | CF::GhzDepCriticalB | CF::QuditDepCritical
        )
    }

    pub fn uses_dimension(&self) -> bool {
        self.protocol() == ProtocolKind::Qudit
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, CF::TwoQubitDepDeterministic | CF::TwoQubitAdDeterministic)
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ClosedForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClosedForm::ALL
            .iter()
            .copied()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::Unknown(format!("closed form '{s}'")))
    }
}

/// Evaluates a closed form at noise `x` and dimension `d` (ignored by
/// qubit formulas; `x` ignored by thresholds). Piecewise formulas return 0
/// in their zero region.
pub fn closed_form(form: ClosedForm, x: f64, d: usize) -> Result<f64> {
    if !form.is_threshold() && !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain {
            name: form.family().parameter_name(),
            value: x,
            domain: "[0, 1]",
        });
    }
    if form.uses_dimension() && d < 2 {
        return Err(Error::InvalidDims(format!("dimension {d} < 2")));
    }
    let p = x;
    let g = x;
    let df = d as f64;
    let sqrt5 = 5f64.sqrt();
    let ghz_b_critical = (sqrt5 - 1.0) / sqrt5;
    let det_threshold = (3.0 - sqrt5) / 2.0;
    let clip = |v: f64, active: bool| if active { v } else { 0.0 };
    Ok(match form {
        CF::TwoQubitDepSuccessProbability => (2.0 + p) / 6.0,
        CF::TwoQubitDepSuccessNegativity => clip((2.0 - 3.0 * p) / (2.0 + p), p <= 2.0 / 3.0),
        CF::TwoQubitDepAverage => clip((2.0 - 3.0 * p) / 6.0, p <= 2.0 / 3.0),
        CF::TwoQubitDepDeterministic => clip(
            ((17.0 * p * p - 40.0 * p + 32.0).sqrt() - p - 4.0) / 12.0,
            p < det_threshold,
        ),
        CF::TwoQubitDepDeterministicThreshold => det_threshold,
        CF::TwoQubitAdSuccessProbability => (2.0 + g) / 6.0,
        CF::TwoQubitAdSuccessNegativity => (2.0 - 2.0 * g) / (2.0 + g),
        CF::TwoQubitAdAverage => (1.0 - g) / 3.0,
        CF::TwoQubitAdDeterministic => ((8.0 + g * g).sqrt() - 2.0 - g) / 6.0,
        CF::GhzDepSuccessProbability => (4.0 + 4.0 * p - p * p) / 28.0,
        CF::GhzDepSuccessNegativityA => clip(
            (4.0 - 8.0 * p + 3.0 * p * p) / (4.0 + 4.0 * p - p * p),
            p <= 2.0 / 3.0,
        ),
        CF::GhzDepSuccessNegativityB => clip(
            (4.0 - 10.0 * p + 5.0 * p * p) / (4.0 + 4.0 * p - p * p),
            p <= ghz_b_critical,
        ),
        CF::GhzDepAverageA => clip((4.0 - 8.0 * p + 3.0 * p * p) / 28.0, p <= 2.0 / 3.0),
        CF::GhzDepAverageB => clip((4.0 - 10.0 * p + 5.0 * p * p) / 28.0, p <= ghz_b_critical),
        CF::GhzDepCriticalA => 2.0 / 3.0,
        CF::GhzDepCriticalB => ghz_b_critical,
        CF::GhzAdSuccessProbability => (2.0 + 2.0 * g + g * g) / 14.0,
        CF::GhzAdSuccessNegativityA => {
            ((g.powi(4) + (2.0 * g - 2.0).powi(2)).sqrt() - g * g) / (g * g + 2.0 * g + 2.0)
        }
        CF::GhzAdSuccessNegativityB => {
            (1.0 - g) * ((g * g + 4.0).sqrt() - g) / (g * g + 2.0 * g + 2.0)
        }
        CF::GhzAdAverageA => ((g.powi(4) + 4.0 * (1.0 - g).powi(2)).sqrt() - g * g) / 14.0,
        CF::GhzAdAverageB => (1.0 - g) * ((g * g + 4.0).sqrt() - g) / 14.0,
        CF::QuditDepSuccessProbability => (df + p * (df - 1.0)) / (df * (2.0 * df - 1.0)),
        CF::QuditDepSuccessNegativity => clip(
            (df - (df + 1.0) * p) / (df + (df - 1.0) * p),
            p <= df / (df + 1.0),
        ),
        CF::QuditDepAverage => clip(
            (df - (df + 1.0) * p) / (df * (2.0 * df - 1.0)),
            p <= df / (df + 1.0),
        ),
        CF::QuditDepCritical => df / (df + 1.0),
        CF::QuditAdSuccessProbability => (df + (df - 1.0) * g) / (df * (2.0 * df - 1.0)),
        CF::QuditAdSuccessNegativity => df * (1.0 - g) / (df + (df - 1.0) * g),
        CF::QuditAdAverage => (1.0 - g) / (2.0 * df - 1.0),
    })
}

/// Runs the protocol a non-threshold closed form describes.
pub fn run_for(form: ClosedForm, x: f64, d: usize, max_dim: usize) -> Result<ProtocolTrace> {
    let family = form.family();
    match form.protocol() {
        ProtocolKind::TwoQubit => {
            let mode = if form.is_deterministic() { Mode::Deterministic } else { Mode::Probabilistic };
            run_two_qubit(&family.channel(2, x)?, mode)
        }
        ProtocolKind::Ghz => {
            let ch = family.channel(2, x)?;
            run_ghz(&ch, &ch)
        }
        ProtocolKind::Qudit => run_qudit_bounded(d, &family.channel(d, x)?, max_dim),
    }
}

/// The simulated counterpart of `form`, read from a trace produced by
/// [`run_for`] for the same form.
pub fn simulated_from_trace(form: ClosedForm, trace: &ProtocolTrace) -> Result<f64> {
    let get = |key: &str| {
        trace
            .partition(key)
            .ok_or_else(|| Error::Unknown(format!("partition '{key}' missing from trace")))
    };
    let avg = |key: &str| {
        trace
            .average(key)
            .ok_or_else(|| Error::Unknown(format!("average '{key}' missing from trace")))
    };
    match form {
        CF::TwoQubitDepSuccessProbability
        | CF::TwoQubitAdSuccessProbability
        | CF::GhzDepSuccessProbability
        | CF::GhzAdSuccessProbability
        | CF::QuditDepSuccessProbability
        | CF::QuditAdSuccessProbability => Ok(trace.success_probability),
        CF::TwoQubitDepSuccessNegativity
        | CF::TwoQubitAdSuccessNegativity
        | CF::QuditDepSuccessNegativity
        | CF::QuditAdSuccessNegativity => get("a|b@success"),
        CF::TwoQubitDepAverage | CF::TwoQubitAdAverage | CF::QuditDepAverage | CF::QuditAdAverage => {
            avg("a|b")
        }
        CF::TwoQubitDepDeterministic | CF::TwoQubitAdDeterministic => trace
            .deterministic_output
            .as_ref()
            .map(|o| o.negativity)
            .ok_or_else(|| Error::Unknown("trace has no deterministic output".into())),
        CF::GhzDepSuccessNegativityA | CF::GhzAdSuccessNegativityA => get("a|bc@success"),
        CF::GhzDepSuccessNegativityB | CF::GhzAdSuccessNegativityB => get("b|ac@success"),
        CF::GhzDepAverageA | CF::GhzAdAverageA => avg("a|bc"),
        CF::GhzDepAverageB | CF::GhzAdAverageB => avg("b|ac"),
        CF::TwoQubitDepDeterministicThreshold | CF::GhzDepCriticalA | CF::GhzDepCriticalB | CF::QuditDepCritical => {
            Err(Error::Unknown(format!("{form} is a threshold, not a trace quantity")))
        }
    }
}

/// Simulated value of `form` at `(x, d)`; thresholds are located by
/// bisection and ignore `x`.
pub fn simulate(form: ClosedForm, x: f64, d: usize, max_dim: usize) -> Result<f64> {
    let missing = || Error::Unknown(format!("{form}: no sign change in [0, 1]"));
    match form {
        CF::TwoQubitDepDeterministicThreshold => {
            two_qubit_deterministic_threshold(NoiseFamily::Depolarizing)?.ok_or_else(missing)
        }
        CF::GhzDepCriticalA => ghz_critical_noise(NoiseFamily::Depolarizing, 0)?.ok_or_else(missing),
        CF::GhzDepCriticalB => ghz_critical_noise(NoiseFamily::Depolarizing, 1)?.ok_or_else(missing),
        CF::QuditDepCritical => {
            qudit_critical_noise(d, NoiseFamily::Depolarizing, max_dim)?.ok_or_else(missing)
        }
        _ => simulated_from_trace(form, &run_for(form, x, d, max_dim)?),
    }
}

/// Negativity of `rho` across `part`; re-exported for callers holding a
/// trace step.
pub fn step_negativity(rho: &DensityOperator, part: &Bipartition) -> Result<f64> {
    Ok(negativity(rho, part)?.value)
}
