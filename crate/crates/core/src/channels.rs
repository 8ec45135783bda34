//! Qubit and qudit noise channels: canonical affine qubit maps, depolarizing
//! and amplitude damping, plus Choi-matrix validation.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{hermitian_eigenvalues, ComplexMatrix, DensityOperator, Layout, VALIDITY_TOL};

/// Qubit channel acting on the Bloch vector as `r -> diag(λ1, λ2, λ3) r + (0, 0, t3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalQubitChannel {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub t3: f64,
}

impl CanonicalQubitChannel {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64, t3: f64) -> Self {
        CanonicalQubitChannel {
            lambda1,
            lambda2,
            lambda3,
            t3,
        }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 1.0, 1.0, 0.0)
    }

    pub fn depolarizing(p: f64) -> Self {
        let l = 1.0 - p;
        Self::new(l, l, l, 0.0)
    }

    pub fn amplitude_damping(gamma: f64) -> Self {
        let l = (1.0 - gamma).sqrt();
        Self::new(l, l, 1.0 - gamma, gamma)
    }

    /// `E(|m><n|)`: `E(Π_m) = (I + (t3 + (-1)^m λ3) σz)/2` and
    /// `E(|m><n|) = (λ1 σx + i (-1)^m λ2 σy)/2` for `m != n`.
    pub fn image_of_unit(&self, m: usize, n: usize) -> ComplexMatrix {
        let sign = if m == 0 { 1.0 } else { -1.0 };
        let z = Complex64::new(0.0, 0.0);
        if m == n {
            let s = self.t3 + sign * self.lambda3;
            let data = vec![Complex64::new((1.0 + s) / 2.0, 0.0), z, z, Complex64::new((1.0 - s) / 2.0, 0.0)];
            ComplexMatrix::from_vec(2, 2, data).expect("2x2")
        } else {
            // λ1 σx + i s λ2 σy = [[0, λ1 + s λ2], [λ1 - s λ2, 0]]
            let upper = (self.lambda1 + sign * self.lambda2) / 2.0;
            let lower = (self.lambda1 - sign * self.lambda2) / 2.0;
            let data = vec![z, Complex64::new(upper, 0.0), Complex64::new(lower, 0.0), z];
            ComplexMatrix::from_vec(2, 2, data).expect("2x2")
        }
    }

    /// Extreme-point test: `(λ1 ± λ2)² = (1 ± λ3)² − t3²`, both signs.
    pub fn is_extreme_point(&self, tol: f64) -> bool {
        let t2 = self.t3 * self.t3;
        let plus = (self.lambda1 + self.lambda2).powi(2) - ((1.0 + self.lambda3).powi(2) - t2);
        let minus = (self.lambda1 - self.lambda2).powi(2) - ((1.0 - self.lambda3).powi(2) - t2);
        plus.abs() <= tol && minus.abs() <= tol
    }
}

/// Channel given by Kraus operators on a `input_dim`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    input_dim: usize,
    kraus_ops: Vec<ComplexMatrix>,
    model: Option<NoiseModel>,
}

impl KrausChannel {
    /// Validates shapes and `Σ A†A = I` within [`VALIDITY_TOL`].
    pub fn new(kraus_ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus_ops
            .first()
            .ok_or_else(|| Error::UnsupportedChannel("empty Kraus set".into()))?;
        let d = first.rows();
        if kraus_ops.iter().any(|k| k.rows() != d || k.cols() != d) {
            return Err(Error::DimensionMismatch(
                "Kraus operators must all be square of equal size".into(),
            ));
        }
        let ch = KrausChannel {
            input_dim: d,
            kraus_ops,
            model: None,
        };
        let err = ch.completeness_error();
        if err > VALIDITY_TOL {
            return Err(Error::NotCpt(format!("Σ A†A deviates from I by {err:e}")));
        }
        Ok(ch)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    /// Largest entry of `|Σ A†A − I|`.
    pub fn completeness_error(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.input_dim, self.input_dim);
        for k in &self.kraus_ops {
            sum += &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.input_dim))
    }

    fn image_of_unit(&self, m: usize, n: usize) -> ComplexMatrix {
        let d = self.input_dim;
        // Σ_k A_k |m><n| A_k† = Σ_k (column m of A_k)(column n of A_k)†
        ComplexMatrix::from_fn(d, d, |i, j| {
            self.kraus_ops
                .iter()
                .map(|a| a[(i, m)] * a[(j, n)].conj())
                .sum()
        })
    }
}

/// Qudit depolarizing map `X -> (1 − p) X + (p/d) tr(X) I`, applied through
/// its action rather than a Kraus decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepolarizingChannel {
    pub dim: usize,
    pub p: f64,
}

/// Noise families without their parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseFamily {
    Depolarizing,
    AmplitudeDamping,
}

impl NoiseFamily {
    pub fn channel(&self, d: usize, x: f64) -> Result<QuditChannel> {
        match self {
            NoiseFamily::Depolarizing => depolarizing(d, x),
            NoiseFamily::AmplitudeDamping => amplitude_damping(d, x),
        }
    }

    /// `p` or `gamma`.
    pub fn parameter_name(&self) -> &'static str {
        match self {
            NoiseFamily::Depolarizing => "p",
            NoiseFamily::AmplitudeDamping => "gamma",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseFamily::Depolarizing => "depolarizing",
            NoiseFamily::AmplitudeDamping => "amplitude_damping",
        }
    }
}

/// Named noise families with closed-form results.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    Depolarizing { p: f64 },
    AmplitudeDamping { gamma: f64 },
}

impl NoiseModel {
    pub fn family(&self) -> NoiseFamily {
        match self {
            NoiseModel::Depolarizing { .. } => NoiseFamily::Depolarizing,
            NoiseModel::AmplitudeDamping { .. } => NoiseFamily::AmplitudeDamping,
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            NoiseModel::Depolarizing { p } => p,
            NoiseModel::AmplitudeDamping { gamma } => gamma,
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::Depolarizing { p } => write!(f, "depolarizing(p={p})"),
            NoiseModel::AmplitudeDamping { gamma } => write!(f, "amplitude_damping(gamma={gamma})"),
        }
    }
}

/// A completely positive trace-preserving map on one qudit (or a small
/// joint register, for Kraus channels).
#[derive(Clone, Debug, PartialEq)]
pub enum QuditChannel {
    Canonical(CanonicalQubitChannel),
    Kraus(KrausChannel),
    Depolarizing(DepolarizingChannel),
}

impl QuditChannel {
    pub fn input_dim(&self) -> usize {
        match self {
            QuditChannel::Canonical(_) => 2,
            QuditChannel::Kraus(k) => k.input_dim,
            QuditChannel::Depolarizing(d) => d.dim,
        }
    }

    /// `E(|m><n|)`.
    pub fn image_of_unit(&self, m: usize, n: usize) -> ComplexMatrix {
        match self {
            QuditChannel::Canonical(c) => c.image_of_unit(m, n),
            QuditChannel::Kraus(k) => k.image_of_unit(m, n),
            QuditChannel::Depolarizing(dep) => {
                let d = dep.dim;
                let mut out = ComplexMatrix::unit(d, m, n).scale_real(1.0 - dep.p);
                if m == n {
                    for i in 0..d {
                        out[(i, i)] += Complex64::new(dep.p / d as f64, 0.0);
                    }
                }
                out
            }
        }
    }

    /// Images of all matrix units, indexed `m * d + n`.
    pub fn unit_images(&self) -> Vec<ComplexMatrix> {
        let d = self.input_dim();
        (0..d * d).map(|k| self.image_of_unit(k / d, k % d)).collect()
    }

    /// Applies the channel to a `d x d` operator.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.input_dim();
        if x.rows() != d || x.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "channel acts on dimension {d}, operator is {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(d, d);
        for m in 0..d {
            for n in 0..d {
                let c = x[(m, n)];
                if c != Complex64::new(0.0, 0.0) {
                    out += &self.image_of_unit(m, n).scale(c);
                }
            }
        }
        Ok(out)
    }

    /// Noise family, when the channel belongs to one.
    pub fn noise_model(&self) -> Option<NoiseModel> {
        match self {
            QuditChannel::Depolarizing(d) => Some(NoiseModel::Depolarizing { p: d.p }),
            QuditChannel::Kraus(k) => k.model,
            QuditChannel::Canonical(c) => {
                let exact = |a: f64, b: f64| (a - b).abs() <= 1e-12;
                if c.t3 == 0.0 && exact(c.lambda1, c.lambda2) && exact(c.lambda2, c.lambda3) {
                    let p = 1.0 - c.lambda1;
                    if (0.0..=1.0).contains(&p) {
                        return Some(NoiseModel::Depolarizing { p });
                    }
                }
                let gamma = c.t3;
                if (0.0..=1.0).contains(&gamma)
                    && exact(c.lambda1, (1.0 - gamma).sqrt())
                    && exact(c.lambda2, c.lambda1)
                    && exact(c.lambda3, 1.0 - gamma)
                {
                    return Some(NoiseModel::AmplitudeDamping { gamma });
                }
                None
            }
        }
    }

    /// Canonical parameters of a qubit channel whose Pauli transfer matrix is
    /// diagonal with shift only along z; `None` otherwise.
    pub fn canonical_form(&self, tol: f64) -> Option<CanonicalQubitChannel> {
        if let QuditChannel::Canonical(c) = self {
            return Some(*c);
        }
        if self.input_dim() != 2 {
            return None;
        }
        let e00 = self.image_of_unit(0, 0);
        let e11 = self.image_of_unit(1, 1);
        let e01 = self.image_of_unit(0, 1);
        let e10 = self.image_of_unit(1, 0);
        // E(I) = e00 + e11, E(σx) = e01 + e10, E(σy) = i(e10 − e01), E(σz) = e00 − e11.
        let img_i = &e00 + &e11;
        let img_x = &e01 + &e10;
        let img_y = (&e10 - &e01).scale(Complex64::new(0.0, 1.0));
        let img_z = &e00 - &e11;
        let comps = |m: &ComplexMatrix| -> [Complex64; 4] {
            [
                (m[(0, 0)] + m[(1, 1)]) * 0.5,
                (m[(0, 1)] + m[(1, 0)]) * 0.5,
                (m[(0, 1)] - m[(1, 0)]) * Complex64::new(0.0, 0.5),
                (m[(0, 0)] - m[(1, 1)]) * 0.5,
            ]
        };
        let rows = [comps(&img_i), comps(&img_x), comps(&img_y), comps(&img_z)];
        // rows[j][k] = tr(σ_k E(σ_j))/2
        for (j, row) in rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if v.im.abs() > tol {
                    return None;
                }
                let allowed = j == k || (j == 0 && k == 3);
                if !allowed && v.re.abs() > tol {
                    return None;
                }
            }
        }
        Some(CanonicalQubitChannel::new(
            rows[1][1].re,
            rows[2][2].re,
            rows[3][3].re,
            rows[0][3].re,
        ))
    }
}

pub fn canonical_channel(lambda1: f64, lambda2: f64, lambda3: f64, t3: f64) -> QuditChannel {
    QuditChannel::Canonical(CanonicalQubitChannel::new(lambda1, lambda2, lambda3, t3))
}

pub fn identity_channel(d: usize) -> Result<QuditChannel> {
    depolarizing(d, 0.0)
}

/// Depolarizing channel; canonical form for qubits.
pub fn depolarizing(d: usize, p: f64) -> Result<QuditChannel> {
    check_dim(d)?;
    check_unit_interval("p", p)?;
    if d == 2 {
        Ok(QuditChannel::Canonical(CanonicalQubitChannel::depolarizing(p)))
    } else {
        Ok(QuditChannel::Depolarizing(DepolarizingChannel { dim: d, p }))
    }
}

/// Amplitude damping with Kraus operators
/// `E_0 = |0><0| + Σ_{i≥1} √(1−γ) |i><i|` and `E_m = √γ |0><m|`.
pub fn amplitude_damping(d: usize, gamma: f64) -> Result<QuditChannel> {
    check_dim(d)?;
    check_unit_interval("gamma", gamma)?;
    let mut e0 = ComplexMatrix::zeros(d, d);
    e0[(0, 0)] = Complex64::new(1.0, 0.0);
    for i in 1..d {
        e0[(i, i)] = Complex64::new((1.0 - gamma).sqrt(), 0.0);
    }
    let mut ops = vec![e0];
    for m in 1..d {
        let mut e = ComplexMatrix::zeros(d, d);
        e[(0, m)] = Complex64::new(gamma.sqrt(), 0.0);
        ops.push(e);
    }
    let mut ch = KrausChannel::new(ops)?;
    ch.model = Some(NoiseModel::AmplitudeDamping { gamma });
    Ok(QuditChannel::Kraus(ch))
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDims(format!("dimension {d} < 2")));
    }
    Ok(())
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfDomain {
            name,
            value,
            domain: "[0, 1]",
        });
    }
    Ok(())
}

/// Applies a local map given by its matrix-unit images to the joint register
/// `targets` (in the given order), identity elsewhere.
pub(crate) fn apply_unit_images(
    m: &ComplexMatrix,
    dims: &[usize],
    targets: &[usize],
    images: &[ComplexMatrix],
) -> ComplexMatrix {
    let layout = Layout::new(dims);
    let n = layout.total();
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
    let dt: usize = targets.iter().map(|&k| dims[k]).product();
    let target_idx: Vec<usize> = (0..n).map(|i| layout.sub_index(i, targets)).collect();
    let rest_idx: Vec<usize> = (0..n).map(|i| layout.sub_index(i, &rest)).collect();
    let n_rest = n / dt;
    // full[r * dt + t] = register index with rest part r and target part t
    let mut full = vec![0usize; n];
    for i in 0..n {
        full[rest_idx[i] * dt + target_idx[i]] = i;
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let (r, a) = (rest_idx[i], target_idx[i]);
        for j in 0..n {
            let x = m[(i, j)];
            if x == zero {
                continue;
            }
            let (s, b) = (rest_idx[j], target_idx[j]);
            let img = &images[a * dt + b];
            for ti in 0..dt {
                let row = full[r * dt + ti];
                for tj in 0..dt {
                    let y = img[(ti, tj)];
                    if y != zero {
                        out[(row, full[s * dt + tj])] += x * y;
                    }
                }
            }
        }
    }
    debug_assert_eq!(n_rest * dt, n);
    out
}

/// Applies `ch` to subsystem `target`, identity elsewhere.
pub fn apply_to_subsystem(
    ch: &QuditChannel,
    rho: &DensityOperator,
    target: usize,
) -> Result<DensityOperator> {
    apply_to_subsystems(ch, rho, &[target])
}

/// Applies `ch` to the joint register of `targets` (in that order).
pub fn apply_to_subsystems(
    ch: &QuditChannel,
    rho: &DensityOperator,
    targets: &[usize],
) -> Result<DensityOperator> {
    for (i, &t) in targets.iter().enumerate() {
        rho.check_index(t)?;
        if targets[..i].contains(&t) {
            return Err(Error::InvalidDims(format!("target {t} repeated")));
        }
    }
    let joint: usize = targets.iter().map(|&k| rho.dims()[k]).product();
    if joint != ch.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel acts on dimension {}, targets {targets:?} have dimension {joint}",
            ch.input_dim()
        )));
    }
    let out = apply_unit_images(rho.matrix(), rho.dims(), targets, &ch.unit_images());
    Ok(DensityOperator::from_parts(out, rho.dims().to_vec()))
}

/// `Σ_ij |i><j| ⊗ E(|i><j|)`, input factor first.
pub fn choi_matrix(ch: &QuditChannel) -> ComplexMatrix {
    let d = ch.input_dim();
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let img = ch.image_of_unit(i, j);
            for a in 0..d {
                for b in 0..d {
                    out[(i * d + a, j * d + b)] = img[(a, b)];
                }
            }
        }
    }
    out
}

/// Outcome of [`is_cpt`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptReport {
    pub is_cpt: bool,
    pub min_choi_eigenvalue: f64,
    /// Largest entry of `|tr_out(Choi) − I|`; equals the deviation of
    /// `Σ A†A` from `I` for Kraus channels.
    pub trace_preservation_error: f64,
}

/// Complete positivity via the Choi spectrum, trace preservation via the
/// partial trace of the Choi matrix over the output factor.
pub fn is_cpt(ch: &QuditChannel, tol: f64) -> Result<CptReport> {
    let d = ch.input_dim();
    let choi = choi_matrix(ch);
    let min = hermitian_eigenvalues(&choi)?
        .first()
        .copied()
        .unwrap_or(0.0);
    let mut tp: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let tr: Complex64 = (0..d).map(|a| choi[(i * d + a, j * d + a)]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            tp = tp.max((tr - want).norm());
        }
    }
    if let QuditChannel::Kraus(k) = ch {
        tp = tp.max(k.completeness_error());
    }
    Ok(CptReport {
        is_cpt: min >= -tol && tp <= tol,
        min_choi_eigenvalue: min,
        trace_preservation_error: tp,
    })
}

/// Extreme-point test for canonical qubit channels.
pub fn is_extreme_point(ch: &CanonicalQubitChannel, tol: f64) -> bool {
    ch.is_extreme_point(tol)
}
