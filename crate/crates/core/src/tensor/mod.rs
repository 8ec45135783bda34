//! Dense complex linear algebra over multi-qudit registers.

mod eigen;
mod matrix;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, trace_norm, HermitianEigen};
pub use matrix::{kron, ComplexMatrix};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance for validity checks (Hermiticity, trace, positivity).
pub const VALIDITY_TOL: f64 = 1e-9;
/// Absolute tolerance for algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Mixed-radix index arithmetic for a register with the given subsystem
/// dimensions. Subsystem 0 is the most significant digit.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl Layout {
    pub(crate) fn new(dims: &[usize]) -> Self {
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Layout {
            dims: dims.to_vec(),
            strides,
            total: dims.iter().product(),
        }
    }

    pub(crate) fn total(&self) -> usize {
        self.total
    }

    pub(crate) fn digit(&self, index: usize, k: usize) -> usize {
        (index / self.strides[k]) % self.dims[k]
    }

    pub(crate) fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|k| self.digit(index, k)).collect()
    }

    pub(crate) fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Index with digit `k` replaced by `value`.
    pub(crate) fn with_digit(&self, index: usize, k: usize, value: usize) -> usize {
        index - self.digit(index, k) * self.strides[k] + value * self.strides[k]
    }

    /// Index of the sub-register formed by `subsystems` (in the given order).
    pub(crate) fn sub_index(&self, index: usize, subsystems: &[usize]) -> usize {
        subsystems
            .iter()
            .fold(0, |acc, &k| acc * self.dims[k] + self.digit(index, k))
    }
}

/// Density operator of a multi-qudit register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validated construction: square, side = product of `dims`, Hermitian,
    /// unit trace and positive semi-definite within [`VALIDITY_TOL`].
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let side: usize = dims.iter().product();
        if !matrix.is_square() {
            return Err(Error::NotSquare(matrix.rows(), matrix.cols()));
        }
        if matrix.rows() != side {
            return Err(Error::ShapeMismatch {
                expected: format!("{side}x{side} for dims {dims:?}"),
                got: format!("{}x{}", matrix.rows(), matrix.cols()),
            });
        }
        let rho = DensityOperator { matrix, dims };
        rho.validate(VALIDITY_TOL)?;
        Ok(rho)
    }

    /// Construction for outputs of operations that preserve validity.
    pub(crate) fn from_parts(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.rows(), dims.iter().product::<usize>());
        DensityOperator { matrix, dims }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let n: usize = dims.iter().product();
        Ok(DensityOperator {
            matrix: ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
            dims,
        })
    }

    /// Checks Hermiticity, trace and positivity within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = self.matrix.hermiticity_error();
        if herm > tol {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = self.min_eigenvalue()?;
        if min < -tol {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.matrix)?
            .first()
            .copied()
            .unwrap_or(0.0))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Side of the matrix.
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `self ⊗ other`, subsystems of `self` first.
    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityOperator::from_parts(self.matrix.kron(&other.matrix), dims)
    }

    /// `<psi|rho|psi>` for a state vector of matching size.
    pub fn expectation(&self, psi: &[Complex64]) -> Result<f64> {
        let v = self.matrix.apply(psi)?;
        Ok(psi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<Complex64>().re)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.dims.len() {
            return Err(Error::IndexOutOfRange {
                index,
                count: self.dims.len(),
            });
        }
        Ok(())
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("no subsystems".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidDims(format!("subsystem dimension {d} < 2")));
    }
    Ok(())
}

/// Split of the subsystem indices into a transposed side A and the rest B.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl Bipartition {
    pub fn new(mut side_a: Vec<usize>, mut side_b: Vec<usize>, subsystems: usize) -> Result<Self> {
        side_a.sort_unstable();
        side_b.sort_unstable();
        if side_a.is_empty() || side_b.is_empty() {
            return Err(Error::InvalidPartition("both sides must be nonempty".into()));
        }
        let mut seen = vec![false; subsystems];
        for &k in side_a.iter().chain(&side_b) {
            if k >= subsystems {
                return Err(Error::InvalidPartition(format!(
                    "index {k} out of range for {subsystems} subsystems"
                )));
            }
            if seen[k] {
                return Err(Error::InvalidPartition(format!("index {k} repeated")));
            }
            seen[k] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidPartition(
                "sides do not cover every subsystem".into(),
            ));
        }
        Ok(Bipartition { side_a, side_b })
    }

    /// Side A as given, side B its complement.
    pub fn split(side_a: &[usize], subsystems: usize) -> Result<Self> {
        let side_b = (0..subsystems).filter(|k| !side_a.contains(k)).collect();
        Self::new(side_a.to_vec(), side_b, subsystems)
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    pub fn subsystems(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    /// Hilbert-space dimensions of the two sides.
    pub fn side_dims(&self, dims: &[usize]) -> (usize, usize) {
        let a = self.side_a.iter().map(|&k| dims[k]).product();
        let b = self.side_b.iter().map(|&k| dims[k]).product();
        (a, b)
    }

    pub fn swapped(&self) -> Self {
        Bipartition {
            side_a: self.side_b.clone(),
            side_b: self.side_a.clone(),
        }
    }
}

/// Reduced operator on `keep`; kept subsystems stay in their original order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(Error::InvalidDims("nothing to keep".into()));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &k in &keep {
        rho.check_index(k)?;
    }
    let traced: Vec<usize> = (0..rho.num_subsystems())
        .filter(|k| !keep.contains(k))
        .collect();
    let layout = Layout::new(rho.dims());
    let n = layout.total();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| rho.dims()[k]).collect();
    let side: usize = kept_dims.iter().product();
    let keep_idx: Vec<usize> = (0..n).map(|i| layout.sub_index(i, &keep)).collect();
    let trace_idx: Vec<usize> = (0..n).map(|i| layout.sub_index(i, &traced)).collect();

    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(side, side);
    for i in 0..n {
        for j in 0..n {
            if trace_idx[i] == trace_idx[j] {
                out[(keep_idx[i], keep_idx[j])] += m[(i, j)];
            }
        }
    }
    Ok(DensityOperator::from_parts(out, kept_dims))
}

/// Transposes the indices of `part.side_a`.
pub fn partial_transpose(rho: &DensityOperator, part: &Bipartition) -> Result<ComplexMatrix> {
    partial_transpose_matrix(rho.matrix(), rho.dims(), part)
}

/// Partial transpose of a bare matrix over a register with `dims`.
pub fn partial_transpose_matrix(
    m: &ComplexMatrix,
    dims: &[usize],
    part: &Bipartition,
) -> Result<ComplexMatrix> {
    if part.subsystems() != dims.len() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} subsystems, register has {}",
            part.subsystems(),
            dims.len()
        )));
    }
    let layout = Layout::new(dims);
    let n = layout.total();
    if m.rows() != n || m.cols() != n {
        return Err(Error::ShapeMismatch {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    // Split each index into its side-A digits (as a number in the full
    // register) and the remainder; transposition swaps the side-A parts.
    let a_part: Vec<usize> = (0..n)
        .map(|i| {
            part.side_a()
                .iter()
                .map(|&k| layout.digit(i, k) * layout.strides[k])
                .sum()
        })
        .collect();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let (ai, ri) = (a_part[i], i - a_part[i]);
        for j in 0..n {
            let (aj, rj) = (a_part[j], j - a_part[j]);
            out[(ri + aj, rj + ai)] = m[(i, j)];
        }
    }
    Ok(out)
}
