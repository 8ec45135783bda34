//! Seeded sampling of states, unitaries and canonical channels.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{is_cpt, CanonicalQubitChannel, QuditChannel};
use crate::tensor::{hermitian_eigen, ComplexMatrix, DensityOperator, VALIDITY_TOL};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Full-rank density operator `G G† / tr(G G†)`.
pub fn random_density<R: Rng>(dims: &[usize], rng: &mut R) -> DensityOperator {
    let n: usize = dims.iter().product();
    let g = ComplexMatrix::from_fn(n, n, |_, _| random_complex(rng));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(m.scale_real(1.0 / tr), dims.to_vec()).expect("G G† is a valid state")
}

/// Unitary `V diag(e^{iθ}) V†` from the eigenbasis of a random Hermitian matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| random_complex(rng));
    let h = (&g + &g.adjoint()).scale_real(0.5);
    let eig = hermitian_eigen(&h).expect("Hermitian by construction");
    let phases = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &(&eig.vectors * &phases) * &eig.vectors.adjoint()
}

/// Canonical channel with parameters uniform in `[-1, 1]` and `t3 = 0`.
pub fn random_unital_canonical<R: Rng>(rng: &mut R) -> CanonicalQubitChannel {
    CanonicalQubitChannel::new(
        rng.gen_range(-1.0..=1.0),
        rng.gen_range(-1.0..=1.0),
        rng.gen_range(-1.0..=1.0),
        0.0,
    )
}

/// Rejection sample of a completely positive canonical channel.
pub fn random_cp_canonical<R: Rng>(rng: &mut R) -> CanonicalQubitChannel {
    loop {
        let c = CanonicalQubitChannel::new(
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        );
        if is_cpt(&QuditChannel::Canonical(c), VALIDITY_TOL).map(|r| r.is_cpt).unwrap_or(false) {
            return c;
        }
    }
}
