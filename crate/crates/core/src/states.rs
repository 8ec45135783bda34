//! Reference states, protocol initial states, generalized CNOT gates and
//! computational-basis measurement.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::channels::{apply_to_subsystems, KrausChannel, QuditChannel};
use crate::error::{Error, Result};
use crate::tensor::{partial_trace, ComplexMatrix, DensityOperator, Layout};

/// Probabilities at or below this are reported as exact zeros with no post-state.
pub const ZERO_PROBABILITY: f64 = 1e-14;

const NORM_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Normalized state vector on a multi-qudit register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidDims(format!("{dims:?}")));
        }
        let n: usize = dims.iter().product();
        if amplitudes.len() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n} amplitudes"),
                got: format!("{}", amplitudes.len()),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidTrace(norm * norm));
        }
        Ok(PureState { amplitudes, dims })
    }

    /// `|digits>` in the computational basis.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        check_digits(&dims, digits)?;
        let mut amps = vec![c(0.0, 0.0); dims.iter().product()];
        amps[Layout::new(&dims).index(digits)] = c(1.0, 0.0);
        PureState::new(amps, dims)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState { amplitudes, dims }
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_parts(self.projector(), self.dims.clone())
    }

    /// Generalized CNOT on the state vector.
    pub fn apply_cnot(&self, control: usize, target: usize, inverse: bool) -> Result<PureState> {
        let perm = cnot_permutation(&self.dims, control, target, inverse)?;
        let mut amplitudes = vec![c(0.0, 0.0); self.amplitudes.len()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            amplitudes[perm[i]] = a;
        }
        Ok(PureState {
            amplitudes,
            dims: self.dims.clone(),
        })
    }
}

fn check_digits(dims: &[usize], digits: &[usize]) -> Result<()> {
    if digits.len() != dims.len() || digits.iter().zip(dims).any(|(&x, &d)| x >= d) {
        return Err(Error::InvalidDims(format!(
            "basis label {digits:?} does not fit dims {dims:?}"
        )));
    }
    Ok(())
}

/// `Π_{digits}` as a matrix on a register with `dims`.
pub fn basis_projector(dims: &[usize], digits: &[usize]) -> Result<ComplexMatrix> {
    check_digits(dims, digits)?;
    let n = dims.iter().product();
    let i = Layout::new(dims).index(digits);
    Ok(ComplexMatrix::unit(n, i, i))
}

/// `(1/√d) Σ_i |i>^{⊗n}`.
pub fn ghz_state(n: usize, d: usize) -> Result<PureState> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidDims(format!("GHZ needs n >= 2 and d >= 2, got n={n}, d={d}")));
    }
    let dims = vec![d; n];
    let layout = Layout::new(&dims);
    let mut amps = vec![c(0.0, 0.0); layout.total()];
    let w = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        amps[layout.index(&vec![i; n])] = c(w, 0.0);
    }
    PureState::new(amps, dims)
}

/// `(1/√d) Σ_j |jj>`.
pub fn bell_chi0(d: usize) -> Result<PureState> {
    ghz_state(2, d)
}

/// `(|00> + |11>)/√2`.
pub fn psi_plus() -> PureState {
    bell_chi0(2).expect("qubit Bell state")
}

/// `(|0> + e^{iθ}|1>)/√2`.
fn phase_qubit(theta: f64) -> [Complex64; 2] {
    [c(FRAC_1_SQRT_2, 0.0), Complex64::from_polar(FRAC_1_SQRT_2, theta)]
}

fn add_projector(m: &mut ComplexMatrix, psi: &[Complex64], weight: f64) {
    let n = psi.len();
    for i in 0..n {
        let a = psi[i] * weight;
        for j in 0..n {
            m[(i, j)] += a * psi[j].conj();
        }
    }
}

fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Separable three-qubit state `(a, b, c)`:
/// `1/6 Σ_{k=0}^{3} |ψ_k, ψ_{−k}, 0><…| + 1/6 Σ_i Π_{i,i,1}` with
/// `|ψ_k> = (|0> + e^{ikπ/2}|1>)/√2`.
pub fn edss_initial_two_qubit() -> DensityOperator {
    let dims = vec![2, 2, 2];
    let mut m = ComplexMatrix::zeros(8, 8);
    let zero = [c(1.0, 0.0), c(0.0, 0.0)];
    for k in 0..4 {
        let theta = k as f64 * PI / 2.0;
        let psi = kron_vec(&kron_vec(&phase_qubit(theta), &phase_qubit(-theta)), &zero);
        add_projector(&mut m, &psi, 1.0 / 6.0);
    }
    let layout = Layout::new(&dims);
    for i in 0..2 {
        let idx = layout.index(&[i, i, 1]);
        m[(idx, idx)] += c(1.0 / 6.0, 0.0);
    }
    DensityOperator::from_parts(m, dims)
}

/// Separable five-qubit state on `(a, b, c, d1, d2)`:
/// `4/49 Σ_{k=0}^{6} |ω(k)><ω(k)| ⊗ Π_00 + 1/14 Σ_m Π_mmm ⊗ (I − Π_00)`, where
/// `|ω(k)> = |φ_1(k), φ_2(k), φ_3(k)>` and `|φ_n(k)> = (|0> + e^{2^n πik/7}|1>)/√2`.
pub fn ghz_initial_state() -> DensityOperator {
    let dims = vec![2; 5];
    let layout = Layout::new(&dims);
    let mut m = ComplexMatrix::zeros(32, 32);
    let ancilla_00 = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    for k in 0..7 {
        let phi = |n: i32| phase_qubit(2f64.powi(n) * PI * k as f64 / 7.0);
        let omega = kron_vec(&kron_vec(&phi(1), &phi(2)), &phi(3));
        add_projector(&mut m, &kron_vec(&omega, &ancilla_00), 4.0 / 49.0);
    }
    for mm in 0..2 {
        for (d1, d2) in [(0, 1), (1, 0), (1, 1)] {
            let idx = layout.index(&[mm, mm, mm, d1, d2]);
            m[(idx, idx)] += c(1.0 / 14.0, 0.0);
        }
    }
    DensityOperator::from_parts(m, dims)
}

/// Separable three-qudit state on `(a, b, c)`:
/// `d/(D(2d−1)) Σ_{k<D} |φ(k), φ(−k), 0><…| + 1/(d(2d−1)) Σ_{j≠l} Π_{j,j,l−j}`
/// with `|φ(±k)> = d^{-1/2} Σ_j w^{±s_j k}|j>`, `w = e^{2πi/D}`, `D = 2^d − 1`,
/// `s_j = 2^j − 1`.
pub fn qudit_initial_state(d: usize) -> Result<DensityOperator> {
    if d < 2 {
        return Err(Error::InvalidDims(format!("qudit dimension {d} < 2")));
    }
    if d > 30 {
        return Err(Error::InvalidDims(format!("qudit dimension {d} too large")));
    }
    let big_d = (1usize << d) - 1;
    let dims = vec![d; 3];
    let layout = Layout::new(&dims);
    let norm = 1.0 / (d as f64).sqrt();
    let phase = |sign: f64, j: usize, k: usize| {
        // s_j k mod D keeps the angle small for large d
        let e = (((1usize << j) - 1) * k) % big_d;
        Complex64::from_polar(norm, sign * 2.0 * PI * e as f64 / big_d as f64)
    };
    // Σ_k |φ(k) φ(−k)><…| on (a, b), then embedded with c = 0
    let nab = d * d;
    let mut ab = ComplexMatrix::zeros(nab, nab);
    for k in 0..big_d {
        let plus: Vec<Complex64> = (0..d).map(|j| phase(1.0, j, k)).collect();
        let minus: Vec<Complex64> = (0..d).map(|j| phase(-1.0, j, k)).collect();
        add_projector(&mut ab, &kron_vec(&plus, &minus), 1.0);
    }
    let weight = d as f64 / (big_d as f64 * (2 * d - 1) as f64);
    let mut m = ComplexMatrix::zeros(layout.total(), layout.total());
    for i in 0..nab {
        for j in 0..nab {
            m[(i * d, j * d)] = ab[(i, j)] * weight;
        }
    }
    let diag = 1.0 / (d * (2 * d - 1)) as f64;
    for j in 0..d {
        for l in 0..d {
            if j != l {
                let idx = layout.index(&[j, j, (l + d - j) % d]);
                m[(idx, idx)] += c(diag, 0.0);
            }
        }
    }
    Ok(DensityOperator::from_parts(m, dims))
}

/// Index map of `C|i, j> = |i, j ± i mod d>` on the full register.
pub(crate) fn cnot_permutation(
    dims: &[usize],
    control: usize,
    target: usize,
    inverse: bool,
) -> Result<Vec<usize>> {
    let n = dims.len();
    for idx in [control, target] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, count: n });
        }
    }
    if control == target {
        return Err(Error::InvalidDims("control and target coincide".into()));
    }
    let d = dims[control];
    if dims[target] != d {
        return Err(Error::DimensionMismatch(format!(
            "control dimension {d} differs from target dimension {}",
            dims[target]
        )));
    }
    let layout = Layout::new(dims);
    Ok((0..layout.total())
        .map(|i| {
            let x = layout.digit(i, control);
            let y = layout.digit(i, target);
            let shift = if inverse { d - x } else { x };
            layout.with_digit(i, target, (y + shift) % d)
        })
        .collect())
}

/// Conjugation by the generalized CNOT `C_{control,target}` (or its inverse).
pub fn cnot(
    rho: &DensityOperator,
    control: usize,
    target: usize,
    inverse: bool,
) -> Result<DensityOperator> {
    let perm = cnot_permutation(rho.dims(), control, target, inverse)?;
    let m = rho.matrix();
    let n = perm.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(perm[i], perm[j])] = m[(i, j)];
        }
    }
    Ok(DensityOperator::from_parts(out, rho.dims().to_vec()))
}

/// One outcome of a computational-basis measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementBranch {
    pub outcome: Vec<usize>,
    pub probability: f64,
    /// Normalized state of the unmeasured subsystems; `None` when the
    /// outcome has zero probability.
    pub post_state: Option<DensityOperator>,
}

/// Measures `target` in the computational basis; the measured subsystem is
/// removed from each post-state.
pub fn measure_computational(rho: &DensityOperator, target: usize) -> Result<Vec<MeasurementBranch>> {
    measure_computational_joint(rho, &[target])
}

/// Joint computational-basis measurement of `targets`; outcomes are listed
/// with the last target varying fastest.
pub fn measure_computational_joint(
    rho: &DensityOperator,
    targets: &[usize],
) -> Result<Vec<MeasurementBranch>> {
    if targets.is_empty() {
        return Err(Error::InvalidDims("no measured subsystem".into()));
    }
    for (i, &t) in targets.iter().enumerate() {
        rho.check_index(t)?;
        if targets[..i].contains(&t) {
            return Err(Error::InvalidDims(format!("subsystem {t} measured twice")));
        }
    }
    let dims = rho.dims();
    if targets.len() == dims.len() {
        return Err(Error::InvalidDims("cannot measure every subsystem".into()));
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&k| dims[k]).collect();
    let target_dims: Vec<usize> = targets.iter().map(|&k| dims[k]).collect();
    let layout = Layout::new(dims);
    let outcomes = Layout::new(&target_dims);
    let nr: usize = rest_dims.iter().product();

    // rows[outcome][r] = register index with target digits `outcome` and rest index r
    let mut rows = vec![vec![0usize; nr]; outcomes.total()];
    for i in 0..layout.total() {
        rows[layout.sub_index(i, targets)][layout.sub_index(i, &rest)] = i;
    }
    let m = rho.matrix();
    let mut branches = Vec::with_capacity(outcomes.total());
    for (o, idx) in rows.iter().enumerate() {
        let block = ComplexMatrix::from_fn(nr, nr, |r, s| m[(idx[r], idx[s])]);
        let p = block.trace().re;
        let outcome = outcomes.digits(o);
        if p <= ZERO_PROBABILITY {
            branches.push(MeasurementBranch {
                outcome,
                probability: 0.0,
                post_state: None,
            });
        } else {
            branches.push(MeasurementBranch {
                outcome,
                probability: p,
                post_state: Some(DensityOperator::from_parts(block.scale_real(1.0 / p), rest_dims.clone())),
            });
        }
    }
    Ok(branches)
}

/// Kraus operators on `(b, c)`: `I ⊗ |0><0|`, `|01><01|`, `|01><11|`.
pub fn bob_kraus_operators() -> Vec<ComplexMatrix> {
    let i2 = ComplexMatrix::identity(2);
    vec![
        i2.kron(&ComplexMatrix::unit(2, 0, 0)),
        ComplexMatrix::unit(4, 1, 1),
        ComplexMatrix::unit(4, 1, 3),
    ]
}

/// Applies Bob's local map on `(b, c)` and traces out `c`.
pub fn bob_deterministic_map(rho_abc: &DensityOperator) -> Result<DensityOperator> {
    if rho_abc.dims() != [2, 2, 2] {
        return Err(Error::InvalidDims(format!(
            "expected three qubits, got dims {:?}",
            rho_abc.dims()
        )));
    }
    let ch = QuditChannel::Kraus(KrausChannel::new(bob_kraus_operators())?);
    let out = apply_to_subsystems(&ch, rho_abc, &[1, 2])?;
    partial_trace(&out, &[0, 1])
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).expect("2x2")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diag_real(&[1.0, -1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, apply_to_subsystem, depolarizing};
    use crate::tensor::{hermitian_eigenvalues, VALIDITY_TOL};

    fn proj(dims: &[usize], digits: &[usize]) -> ComplexMatrix {
        basis_projector(dims, digits).unwrap()
    }

    fn ket_bra(dims: &[usize], a: &[usize], b: &[usize]) -> ComplexMatrix {
        let l = Layout::new(dims);
        ComplexMatrix::unit(l.total(), l.index(a), l.index(b))
    }

    /// `1/3 |GHZ_3><GHZ_3| + 1/6 Σ_{j≠k} Π_ijk`.
    fn after_first_cnot_two_qubit() -> ComplexMatrix {
        let d = [2, 2, 2];
        let mut m = ghz_state(3, 2).unwrap().projector().scale_real(1.0 / 3.0);
        for i in 0..2 {
            for j in 0..2 {
                m += &proj(&d, &[i, j, 1 - j]).scale_real(1.0 / 6.0);
            }
        }
        m
    }

    #[test]
    fn constructors_are_valid_states() {
        edss_initial_two_qubit().validate(VALIDITY_TOL).unwrap();
        ghz_initial_state().validate(VALIDITY_TOL).unwrap();
        for d in 2..=6 {
            qudit_initial_state(d).unwrap().validate(VALIDITY_TOL).unwrap();
        }
        assert!(qudit_initial_state(1).is_err());
    }

    #[test]
    fn first_cnot_two_qubit() {
        let r1 = cnot(&edss_initial_two_qubit(), 0, 2, false).unwrap();
        assert!(r1.matrix().approx_eq(&after_first_cnot_two_qubit(), 1e-12));
    }

    #[test]
    fn first_cnots_ghz() {
        let s = ghz_initial_state();
        let s1 = cnot(&cnot(&s, 0, 3, false).unwrap(), 0, 4, false).unwrap();
        let dims = [2; 5];
        let mut want = ghz_state(5, 2).unwrap().projector().scale_real(1.0 / 7.0);
        // labels (a, bc, D) with two-qubit pairs encoded 0..3:
        // (0, 0, i), (0, i, 0) for i ≠ 0 and (1, 3, i), (1, i, 3) for i ≠ 3
        let pair = |x: usize| [x >> 1, x & 1];
        for i in 1..4 {
            let [p, q] = pair(i);
            want += &proj(&dims, &[0, 0, 0, p, q]).scale_real(1.0 / 14.0);
            want += &proj(&dims, &[0, p, q, 0, 0]).scale_real(1.0 / 14.0);
        }
        for i in 0..3 {
            let [p, q] = pair(i);
            want += &proj(&dims, &[1, 1, 1, p, q]).scale_real(1.0 / 14.0);
            want += &proj(&dims, &[1, p, q, 1, 1]).scale_real(1.0 / 14.0);
        }
        assert!(s1.matrix().approx_eq(&want, 1e-12));
    }

    #[test]
    fn first_cnot_qudit() {
        for d in 2..=5 {
            let r1 = cnot(&qudit_initial_state(d).unwrap(), 0, 2, false).unwrap();
            let dims = [d; 3];
            let scale = (2 * d - 1) as f64;
            let mut want = ghz_state(3, d).unwrap().projector().scale_real(1.0 / scale);
            for j in 0..d {
                for l in 0..d {
                    if j != l {
                        want += &proj(&dims, &[j, j, l]).scale_real(1.0 / (d as f64 * scale));
                        want += &proj(&dims, &[j, l, j]).scale_real(1.0 / (d as f64 * scale));
                    }
                }
            }
            assert!(r1.matrix().approx_eq(&want, 1e-12), "d = {d}");
        }
    }

    #[test]
    fn qudit_and_qubit_constructions_agree_after_cnot() {
        let a = cnot(&qudit_initial_state(2).unwrap(), 0, 2, false).unwrap();
        let b = cnot(&edss_initial_two_qubit(), 0, 2, false).unwrap();
        assert!(a.matrix().approx_eq(b.matrix(), 1e-12));
    }

    #[test]
    fn reference_states() {
        let g = ghz_state(2, 2).unwrap();
        assert_eq!(g, psi_plus());
        assert_eq!(g, bell_chi0(2).unwrap());
        let g3 = ghz_state(3, 2).unwrap();
        assert!((g3.inner(&g3) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(ghz_state(1, 2).is_err());
        assert!(PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)], vec![2]).is_err());
    }

    #[test]
    fn cnot_on_basis_states() {
        let s = PureState::basis(vec![2, 2], &[1, 1]).unwrap();
        assert_eq!(s.apply_cnot(0, 1, false).unwrap(), PureState::basis(vec![2, 2], &[1, 0]).unwrap());
        let s = PureState::basis(vec![3, 3], &[2, 2]).unwrap();
        let t = s.apply_cnot(0, 1, false).unwrap();
        assert_eq!(t, PureState::basis(vec![3, 3], &[2, 1]).unwrap());
        assert_eq!(t.apply_cnot(0, 1, true).unwrap(), s);
        let rho = DensityOperator::maximally_mixed(vec![2, 3]).unwrap();
        assert!(matches!(cnot(&rho, 0, 1, false), Err(Error::DimensionMismatch(_))));
        assert!(cnot(&rho, 0, 0, false).is_err());
        assert!(matches!(cnot(&rho, 0, 5, false), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn cnot_acts_as_controlled_bit_flip() {
        // C(|m><n| ⊗ ρ) = |m><n| ⊗ X^m ρ X^n
        let rho = ComplexMatrix::from_vec(2, 2, vec![c(0.3, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.7, 0.0)]).unwrap();
        let x = pauli_x();
        let pow = |k: usize| if k == 0 { ComplexMatrix::identity(2) } else { x.clone() };
        for m in 0..2 {
            for n in 0..2 {
                let input = ComplexMatrix::unit(2, m, n).kron(&rho);
                let out = cnot(&DensityOperator::from_parts(input, vec![2, 2]), 0, 1, false).unwrap();
                let want = ComplexMatrix::unit(2, m, n).kron(&(&(&pow(m) * &rho) * &pow(n)));
                assert!(out.matrix().approx_eq(&want, 0.0));
            }
        }
    }

    #[test]
    fn noiseless_two_qubit_measurement() {
        let r2 = cnot(&cnot(&edss_initial_two_qubit(), 0, 2, false).unwrap(), 1, 2, false).unwrap();
        let br = measure_computational(&r2, 2).unwrap();
        assert_eq!(br.len(), 2);
        assert!((br[0].probability - 1.0 / 3.0).abs() < 1e-12);
        assert!((br[1].probability - 2.0 / 3.0).abs() < 1e-12);
        let s0 = br[0].post_state.as_ref().unwrap();
        assert!(s0.matrix().approx_eq(&psi_plus().projector(), 1e-12));
        let s1 = br[1].post_state.as_ref().unwrap();
        assert!(s1.matrix().approx_eq(&ComplexMatrix::identity(4).scale_real(0.25), 1e-12));
    }

    #[test]
    fn measuring_a_product_state() {
        let rho_ab = psi_plus().density();
        let zero = DensityOperator::from_parts(ComplexMatrix::unit(2, 0, 0), vec![2]);
        let br = measure_computational(&rho_ab.tensor(&zero), 2).unwrap();
        assert!((br[0].probability - 1.0).abs() < 1e-15);
        assert!(br[0].post_state.as_ref().unwrap().matrix().approx_eq(rho_ab.matrix(), 1e-15));
        assert_eq!(br[1].probability, 0.0);
        assert!(br[1].post_state.is_none());
    }

    #[test]
    fn joint_measurement_orders_outcomes() {
        let s = PureState::basis(vec![2, 2, 2], &[0, 1, 1]).unwrap().density();
        let br = measure_computational_joint(&s, &[1, 2]).unwrap();
        let outcomes: Vec<_> = br.iter().map(|b| b.outcome.clone()).collect();
        assert_eq!(outcomes, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(br[3].probability, 1.0);
        assert!(measure_computational_joint(&s, &[0, 1, 2]).is_err());
        assert!(measure_computational_joint(&s, &[1, 1]).is_err());
    }

    #[test]
    fn branch_probabilities_for_canonical_noise() {
        // q_l = (3 − (−1)^l λ3)/6
        for (l1, l2, l3, t) in [(0.8, 0.6, 0.5, 0.1), (0.5, 0.5, 0.2, -0.3)] {
            let ch = crate::channels::canonical_channel(l1, l2, l3, t);
            let r1 = cnot(&edss_initial_two_qubit(), 0, 2, false).unwrap();
            let r1p = apply_to_subsystem(&ch, &r1, 2).unwrap();
            let br = measure_computational(&cnot(&r1p, 1, 2, false).unwrap(), 2).unwrap();
            assert!((br[0].probability - (3.0 - l3) / 6.0).abs() < 1e-12);
            assert!((br[1].probability - (3.0 + l3) / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarized_intermediate_state_matches_three_term_form() {
        // 1/6 Σ_m Π_mm ⊗ (I + tσz) + 1/12 Σ_{m≠n} Π_mn ⊗ (I + (t + (−1)^m λ3)σz)
        //   + 1/12 Σ_{m≠n} |mm><nn| ⊗ (λ1σx + i(−1)^m λ2σy)
        let p = 0.2;
        let l = 1.0 - p;
        let r1 = DensityOperator::from_parts(after_first_cnot_two_qubit(), vec![2, 2, 2]);
        let out = apply_to_subsystem(&depolarizing(2, p).unwrap(), &r1, 2).unwrap();
        let d2 = [2, 2];
        let i2 = ComplexMatrix::identity(2);
        let z = pauli_z();
        let mut want = ComplexMatrix::zeros(8, 8);
        for m in 0..2 {
            want += &proj(&d2, &[m, m]).kron(&i2).scale_real(1.0 / 6.0);
            let sign = if m == 0 { 1.0 } else { -1.0 };
            let n = 1 - m;
            let diag = &i2 + &z.scale_real(sign * l);
            want += &proj(&d2, &[m, n]).kron(&diag).scale_real(1.0 / 12.0);
            let off = &pauli_x().scale_real(l) + &pauli_y().scale(c(0.0, sign * l));
            want += &ket_bra(&d2, &[m, m], &[n, n]).kron(&off).scale_real(1.0 / 12.0);
        }
        assert!(out.matrix().approx_eq(&want, 1e-12));
    }

    #[test]
    fn damped_ancillas_ghz() {
        // blocks E(Π_m)^{⊗2} and E(|m><n|)^{⊗2} after both ancillas are damped
        let g = 0.35;
        let ch = amplitude_damping(2, g).unwrap();
        let s = ghz_initial_state();
        let s1 = cnot(&cnot(&s, 0, 3, false).unwrap(), 0, 4, false).unwrap();
        let s1p = apply_to_subsystem(&ch, &apply_to_subsystem(&ch, &s1, 3).unwrap(), 4).unwrap();
        let e = |m: usize, n: usize| ch.image_of_unit(m, n);
        let i2 = ComplexMatrix::identity(2);
        let e_id = &e(0, 0) + &e(1, 1);
        let d3 = [2, 2, 2];
        let mut want = ComplexMatrix::zeros(32, 32);
        for m in 0..2 {
            let n = 1 - m;
            want += &ket_bra(&d3, &[m, m, m], &[n, n, n]).kron(&e(m, n).kron(&e(m, n))).scale_real(1.0 / 14.0);
            let diff = &e_id.kron(&e_id) - &e(m, m).kron(&e(m, m));
            want += &proj(&d3, &[m, m, m]).kron(&diff).scale_real(1.0 / 14.0);
            let local = ComplexMatrix::unit(2, m, m).kron(&i2).kron(&i2);
            want += &local.kron(&e(m, m).kron(&e(m, m))).scale_real(1.0 / 14.0);
        }
        assert!(s1p.matrix().approx_eq(&want, 1e-12));
    }

    #[test]
    fn bob_map_kraus_completeness() {
        let mut sum = ComplexMatrix::zeros(4, 4);
        for a in bob_kraus_operators() {
            sum += &(&a.adjoint() * &a);
        }
        assert_eq!(sum, ComplexMatrix::identity(4));
    }

    #[test]
    fn bob_map_on_noiseless_state() {
        let r2 = cnot(&cnot(&edss_initial_two_qubit(), 0, 2, false).unwrap(), 1, 2, false).unwrap();
        let out = bob_deterministic_map(&r2).unwrap();
        let want = &psi_plus().projector().scale_real(1.0 / 3.0)
            + &ComplexMatrix::identity(2).kron(&ComplexMatrix::unit(2, 0, 0)).scale_real(1.0 / 3.0);
        assert!(out.matrix().approx_eq(&want, 1e-12));
        assert!(bob_deterministic_map(&psi_plus().density()).is_err());
    }

    #[test]
    fn bob_map_on_depolarized_state() {
        let p = 0.2;
        let r1 = cnot(&edss_initial_two_qubit(), 0, 2, false).unwrap();
        let r1p = apply_to_subsystem(&depolarizing(2, p).unwrap(), &r1, 2).unwrap();
        let chi = bob_deterministic_map(&cnot(&r1p, 1, 2, false).unwrap()).unwrap();
        let d2 = [2, 2];
        let i_p0 = ComplexMatrix::identity(2).kron(&ComplexMatrix::unit(2, 0, 0));
        let mut want = (&psi_plus().projector() + &i_p0).scale_real((1.0 - p) / 3.0);
        let mut tail = &proj(&d2, &[0, 0]) + &proj(&d2, &[1, 1]);
        tail += &ComplexMatrix::identity(4);
        tail += &i_p0.scale_real(3.0);
        want += &tail.scale_real(p / 12.0);
        assert!(chi.matrix().approx_eq(&want, 1e-12));
    }

    #[test]
    fn cnot_preserves_spectrum() {
        let r = qudit_initial_state(3).unwrap();
        let before = hermitian_eigenvalues(r.matrix()).unwrap();
        let after = hermitian_eigenvalues(cnot(&r, 1, 2, true).unwrap().matrix()).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
