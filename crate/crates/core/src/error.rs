use thiserror::Error;

/// Everything that can go wrong between building a Hamiltonian and reading
/// off a steady-state concurrence.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NonHermitianInput { defect: f64 },
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NonUnitaryInput { defect: f64 },
    #[error("matrix is indefinite (min eigenvalue {min_eigenvalue:.3e})")]
    IndefiniteInput { min_eigenvalue: f64 },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("H0 spectrum is degenerate (gap {gap:.3e}); eigenstate labels are ambiguous")]
    DegenerateSpectrum { gap: f64 },
    #[error("perturbative denominator {denominator:.3e} is within 10*max(delta) of zero")]
    ResonantDenominator { denominator: f64 },
    #[error("adaptive integrator stalled at t = {t:.6e} (step {step:.3e})")]
    StepSizeUnderflow { t: f64, step: f64 },
    #[error("quasienergies {first} and {second} differ by {gap:.3e}")]
    QuasienergyDegeneracy { first: usize, second: usize, gap: f64 },
    #[error("Floquet state tracking is ambiguous at ramp step {step} (overlap margin {margin:.3e})")]
    AmbiguousTracking { step: usize, margin: f64 },
    #[error("generator leaks trace (defect {defect:.3e})")]
    TraceLeak { defect: f64 },
    #[error("density matrix is not physical (min eigenvalue {min_eigenvalue:.3e})")]
    NonphysicalState { min_eigenvalue: f64 },
    #[error("steady state is not unique (kernel dimension {dimension})")]
    DegenerateSteadyState { dimension: usize },
    #[error("density matrix violates physical invariants: {0}")]
    NonPhysicalInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
