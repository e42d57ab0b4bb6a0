//! Wootters concurrence.

use crate::dynamics::{Basis, DensityMatrix, EvolutionRecord};
use crate::error::{Error, Result};
use crate::model::DIM;
use crate::numerics::{self, c, ComplexMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceResult {
    pub value: f64,
    /// `λ_i`, the square roots of the eigenvalues of `ρρ̃`, decreasing.
    pub spin_flipped_spectrum: [f64; DIM],
}

/// `σy ⊗ σy` in the computational basis.
pub fn spin_flip() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(DIM, DIM);
    for (a, b, s) in [(0, 3, -1.0), (1, 2, 1.0), (2, 1, 1.0), (3, 0, -1.0)] {
        m[(a, b)] = c(s);
    }
    m
}

/// `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
pub fn spin_flipped(rho: &ComplexMatrix) -> ComplexMatrix {
    let yy = spin_flip();
    &yy * rho.conjugate() * &yy
}

/// `C = max(0, λ₁ − λ₂ − λ₃ − λ₄)` with `λ₁` the largest.
///
/// The `λ`'s are the square roots of the eigenvalues of `ρρ̃`. Taking those
/// roots numerically turns round-off of order 1e-17 into errors of 1e-8 when
/// `ρ` is rank deficient, so they are obtained instead as singular values of
/// `τ = Wᵀ(σy⊗σy)W` with `ρ = WW†`: `τ†τ` is similar to `ρρ̃`.
pub fn concurrence(rho: &DensityMatrix) -> Result<ConcurrenceResult> {
    concurrence_within(rho, 1e-8)
}

fn concurrence_within(rho: &DensityMatrix, neg_tol: f64) -> Result<ConcurrenceResult> {
    if rho.basis != Basis::Computational {
        return Err(Error::NonPhysicalInput(format!("concurrence needs the computational basis, got {:?}", rho.basis)));
    }
    rho.validate_within(neg_tol)?;
    let m = (&rho.matrix + rho.matrix.adjoint()) * c(0.5);
    let eig = numerics::hermitian_eig(&m)?;
    // negative eigenvalues within the validation tolerance are round-off
    let w = eig.map_columns(|p| c(p.max(0.0).sqrt()));
    let tau = w.transpose() * spin_flip() * &w;
    let sv = tau.singular_values();
    let mut lambda = [0.0; DIM];
    for (l, s) in lambda.iter_mut().zip(sv.iter()) {
        *l = *s;
    }
    lambda.sort_by(|a, b| b.total_cmp(a));
    let value = (lambda[0] - lambda[1] - lambda[2] - lambda[3]).clamp(0.0, 1.0);
    Ok(ConcurrenceResult {
        value,
        spin_flipped_spectrum: lambda,
    })
}

/// `C(t)` at every recorded stroboscopic instant. The full generator is not
/// completely positive, so transients are held to the looser trajectory
/// tolerance [`NONPHYSICAL_TOL`](crate::dynamics::NONPHYSICAL_TOL).
pub fn concurrence_trace(rec: &EvolutionRecord) -> Result<Vec<(f64, f64)>> {
    (0..rec.len())
        .map(|i| Ok((rec.times[i], concurrence_within(&rec.computational(i), crate::dynamics::NONPHYSICAL_TOL)?.value)))
        .collect()
}
