//! Negativity over arbitrary bipartitions, two-qubit concurrence, and
//! branch-averaged negativity.

use crate::error::{Error, Result};
use crate::states::{pauli_y, MeasurementBranch};
use crate::tensor::{
    hermitian_eigen, hermitian_eigenvalues, partial_transpose, Bipartition, ComplexMatrix,
    DensityOperator,
};

/// Eigenvalues of the partial transpose above `-NEGATIVE_EIGENVALUE_CUTOFF`
/// are treated as zero.
pub const NEGATIVE_EIGENVALUE_CUTOFF: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct NegativityResult {
    /// `(‖ρ^{T_A}‖₁ − 1)/(min_dim − 1)`.
    pub value: f64,
    /// `tr(ρ^{T_A}) + 2 Σ |negative eigenvalues|`, i.e. the trace norm with
    /// sub-cutoff eigenvalues clipped to zero.
    pub trace_norm: f64,
    /// `min(dim A, dim B)` over full side dimensions.
    pub min_dim: usize,
    pub negative_eigenvalues: Vec<f64>,
}

pub fn negativity(rho: &DensityOperator, part: &Bipartition) -> Result<NegativityResult> {
    let pt = partial_transpose(rho, part)?;
    let (da, db) = part.side_dims(rho.dims());
    let min_dim = da.min(db);
    let negative_eigenvalues: Vec<f64> = hermitian_eigenvalues(&pt)?
        .into_iter()
        .filter(|&x| x < -NEGATIVE_EIGENVALUE_CUTOFF)
        .collect();
    let neg_sum: f64 = negative_eigenvalues.iter().map(|x| x.abs()).sum();
    let trace = pt.trace().re;
    Ok(NegativityResult {
        value: 2.0 * neg_sum / (min_dim - 1) as f64,
        trace_norm: trace + 2.0 * neg_sum,
        min_dim,
        negative_eigenvalues,
    })
}

/// Negativity value of `side_a` against the remaining subsystems.
pub fn negativity_of(rho: &DensityOperator, side_a: &[usize]) -> Result<f64> {
    let part = Bipartition::split(side_a, rho.num_subsystems())?;
    Ok(negativity(rho, &part)?.value)
}

/// `max(0, λ1 − λ2 − λ3 − λ4)` with `λ_i` the descending square roots of
/// the spectrum of `ρ ρ̃`, `ρ̃ = (σy ⊗ σy) ρ* (σy ⊗ σy)`.
///
/// Evaluated as the singular values of `τ = Wᵀ (σy ⊗ σy) W` with `ρ = W W†`.
pub fn concurrence(rho: &DensityOperator) -> Result<f64> {
    if rho.dims() != [2, 2] {
        return Err(Error::InvalidDims(format!(
            "concurrence needs two qubits, got dims {:?}",
            rho.dims()
        )));
    }
    let eig = hermitian_eigen(rho.matrix())?;
    let roots: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let w = &eig.vectors * &ComplexMatrix::diag_real(&roots);
    let yy = pauli_y().kron(&pauli_y());
    let tau = &(&w.transpose() * &yy) * &w;
    let mut lambdas = singular_values(&tau)?;
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Singular values from the spectrum of `[[0, A], [A†, 0]]`, which is `±σ_i`.
fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = a.rows();
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let block = ComplexMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => a[(i, j - n)],
        (false, true) => a[(j, i - n)].conj(),
        _ => zero,
    });
    let values = hermitian_eigenvalues(&block)?;
    Ok(values[n..].iter().map(|x| x.max(0.0)).collect())
}

/// `Σ_k p_k N(post_k)` over branches with a post-state.
pub fn average_negativity(branches: &[MeasurementBranch], part: &Bipartition) -> Result<f64> {
    let mut total = 0.0;
    for b in branches {
        if let Some(s) = &b.post_state {
            total += b.probability * negativity(s, part)?.value;
        }
    }
    Ok(total)
}
