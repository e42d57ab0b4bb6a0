//! Two coupled flux qubits: static Hamiltonian, ac drive and the operator
//! through which they talk to the bath.
//!
//! Computational basis order is `|00⟩, |01⟩, |10⟩, |11⟩` with qubit 1 the
//! left tensor factor and `σz|0⟩ = +|0⟩`. Energies are in units of the drive
//! frequency with ħ = 1.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::numerics::{self, c, ComplexMatrix, ComplexVector};

pub const DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub eps0: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Exchange coupling `J` (signed).
    pub coupling: f64,
    pub omega: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            eps0: 3.7,
            delta1: 0.1,
            delta2: 0.15,
            coupling: -2.5,
            omega: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.eps0, self.delta1, self.delta2, self.coupling, self.omega]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("model parameters must be finite".into()));
        }
        if self.delta1 < 0.0 || self.delta2 < 0.0 {
            return Err(Error::InvalidParameter("tunnelling amplitudes must be non-negative".into()));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParameter("drive frequency must be positive".into()));
        }
        Ok(())
    }

    /// `ε_c = |J|/2`, the detuning where the separable and entangled ground
    /// states swap.
    pub fn eps_c(&self) -> f64 {
        self.coupling.abs() / 2.0
    }

    /// Minimal amplitude reaching the `|ε₀| = ε_c` avoided crossing.
    pub fn crossover_amplitude(&self) -> f64 {
        (self.eps0.abs() - self.eps_c()).max(0.0)
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }

    /// `Δ± = (Δ₁ ± Δ₂) / (2√2)`.
    pub fn delta_pm(&self) -> (f64, f64) {
        let s = 0.5 * FRAC_1_SQRT_2;
        ((self.delta1 + self.delta2) * s, (self.delta1 - self.delta2) * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub amplitude: f64,
    pub omega: f64,
}

impl DriveParams {
    pub fn new(amplitude: f64, omega: f64) -> Self {
        Self { amplitude, omega }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::InvalidParameter("drive amplitude must be finite and >= 0".into()));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParameter("drive frequency must be positive".into()));
        }
        Ok(())
    }
}

/// `H₀ = Σᵢ (−ε₀/2 σzⁱ − Δᵢ/2 σxⁱ) − J/2 (σ₊¹σ₋² + σ₋¹σ₊²)`.
pub fn build_h0(p: &ModelParams) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(DIM, DIM);
    h[(0, 0)] = c(-p.eps0);
    h[(3, 3)] = c(p.eps0);
    // σx on qubit 1 flips the left bit
    for (a, b) in [(0, 2), (1, 3)] {
        h[(a, b)] = c(-p.delta1 / 2.0);
        h[(b, a)] = c(-p.delta1 / 2.0);
    }
    for (a, b) in [(0, 1), (2, 3)] {
        h[(a, b)] = c(-p.delta2 / 2.0);
        h[(b, a)] = c(-p.delta2 / 2.0);
    }
    h[(1, 2)] = c(-p.coupling / 2.0);
    h[(2, 1)] = c(-p.coupling / 2.0);
    h
}

/// Diagonal of `V(t) / (A cos ωt)`, i.e. of `−(σz¹ + σz²)/2`.
pub const DRIVE_PROFILE: [f64; DIM] = [-1.0, 0.0, 0.0, 1.0];

/// `V(t) = −A cos(ωt) (σz¹ + σz²)/2`.
pub fn build_drive(d: &DriveParams, t: f64) -> ComplexMatrix {
    let f = d.amplitude * (d.omega * t).cos();
    numerics::from_real_diagonal(&DRIVE_PROFILE.map(|x| x * f))
}

/// `𝒜 = γ₁σz¹ + γ₂σz²` with `γ₂ = ξγ₁`.
pub fn build_coupling_op(gamma1: f64, xi: f64) -> ComplexMatrix {
    let g2 = xi * gamma1;
    numerics::from_real_diagonal(&[gamma1 + g2, gamma1 - g2, -gamma1 + g2, -(gamma1 + g2)])
}

/// Character of an `H₀` eigenstate in the small-Δ limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateLabel {
    /// `≈ |00⟩`
    S0,
    /// `≈ (|10⟩ − |01⟩)/√2`, the singlet
    EMinus,
    /// `≈ (|01⟩ + |10⟩)/√2`
    EPlus,
    /// `≈ |11⟩`
    S1,
}

impl StateLabel {
    pub const ALL: [StateLabel; 4] = [StateLabel::S0, StateLabel::EMinus, StateLabel::EPlus, StateLabel::S1];

    pub fn is_entangled(self) -> bool {
        matches!(self, StateLabel::EMinus | StateLabel::EPlus)
    }

    pub fn name(self) -> &'static str {
        match self {
            StateLabel::S0 => "s0",
            StateLabel::EMinus => "e-",
            StateLabel::EPlus => "e+",
            StateLabel::S1 => "s1",
        }
    }

    /// Eigenstate of `H₀` at `Δ₁ = Δ₂ = 0`. The singlet carries the sign
    /// `(|10⟩ − |01⟩)/√2`, the phase for which the first-order corrections
    /// in [`perturbative_eigenstates`] take their textbook form.
    pub fn zeroth_order_state(self) -> ComplexVector {
        let r = FRAC_1_SQRT_2;
        let v = match self {
            StateLabel::S0 => [1.0, 0.0, 0.0, 0.0],
            StateLabel::EMinus => [0.0, -r, r, 0.0],
            StateLabel::EPlus => [0.0, r, r, 0.0],
            StateLabel::S1 => [0.0, 0.0, 0.0, 1.0],
        };
        ComplexVector::from_iterator(DIM, v.iter().map(|&x| c(x)))
    }
}

/// Exact eigensystem of `H₀` with energy-ordered states `|0⟩..|3⟩`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: [f64; DIM],
    /// Eigenvectors as columns, in the computational basis.
    pub states: ComplexMatrix,
    /// `labels[k]` is the character of eigenstate `k`.
    pub labels: [StateLabel; DIM],
}

impl EigenSystem {
    pub fn state(&self, k: usize) -> ComplexVector {
        self.states.column(k).into_owned()
    }

    pub fn index_of(&self, label: StateLabel) -> usize {
        self.labels
            .iter()
            .position(|&l| l == label)
            .expect("labels are a permutation")
    }

    pub fn ground_label(&self) -> StateLabel {
        self.labels[0]
    }
}

/// All 24 permutations of `0..4`, in lexicographic order.
pub(crate) fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let distinct = (0..4).all(|i| (i + 1..4).all(|j| p[i] != p[j]));
                    if distinct {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Assignment maximizing `Σᵢ weight[i][perm[i]]`. The first maximum in
/// lexicographic order wins, which prefers energy order on ties.
pub(crate) fn best_assignment(weight: &[[f64; 4]; 4]) -> [usize; 4] {
    let mut best = [0, 1, 2, 3];
    let mut best_score = f64::NEG_INFINITY;
    for p in permutations4() {
        let score: f64 = (0..4).map(|i| weight[i][p[i]]).sum();
        if score > best_score + 1e-14 {
            best_score = score;
            best = p;
        }
    }
    best
}

pub fn diagonalize_h0(p: &ModelParams) -> Result<EigenSystem> {
    p.validate()?;
    let eig = numerics::hermitian_eig(&build_h0(p))?;
    let gap = eig.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if gap < 1e-12 {
        return Err(Error::DegenerateSpectrum { gap });
    }
    // weight[k][slot] = |⟨label_slot⁽⁰⁾|k⟩|²
    let zeroth: Vec<ComplexVector> = StateLabel::ALL.iter().map(|l| l.zeroth_order_state()).collect();
    let mut weight = [[0.0; 4]; 4];
    for (k, row) in weight.iter_mut().enumerate() {
        let v = eig.vectors.column(k);
        for (slot, z) in zeroth.iter().enumerate() {
            row[slot] = z.dotc(&v).norm_sqr();
        }
    }
    let assignment = best_assignment(&weight);
    let labels = assignment.map(|slot| StateLabel::ALL[slot]);
    let mut energies = [0.0; DIM];
    energies.copy_from_slice(&eig.values);
    Ok(EigenSystem {
        energies,
        states: eig.vectors,
        labels,
    })
}

/// First-order eigenstates in the tunnelling amplitudes, normalized.
/// Index the result with [`StateLabel`] order: `s0, e-, e+, s1`.
pub fn perturbative_eigenstates(p: &ModelParams) -> Result<[ComplexVector; 4]> {
    p.validate()?;
    let (dp, dm) = p.delta_pm();
    let lo = p.eps0 + p.coupling / 2.0;
    let hi = p.eps0 - p.coupling / 2.0;
    let guard = 10.0 * p.delta1.max(p.delta2);
    for denominator in [lo, hi] {
        if denominator.abs() < guard || denominator == 0.0 {
            return Err(Error::ResonantDenominator { denominator });
        }
    }
    let z = |l: StateLabel| l.zeroth_order_state();
    use StateLabel::*;
    let s0 = z(S0) + z(EMinus) * c(dm / lo) + z(EPlus) * c(dp / hi);
    let s1 = z(S1) + z(EMinus) * c(dm / hi) - z(EPlus) * c(dp / lo);
    let em = z(EMinus) - z(S0) * c(dm / lo) - z(S1) * c(dm / hi);
    let ep = z(EPlus) - z(S0) * c(dp / hi) + z(S1) * c(dp / lo);
    let mut out = [s0, em, ep, s1];
    for v in &mut out {
        v.normalize_mut();
    }
    Ok(out)
}

/// Pure-state density matrix `|ψ⟩⟨ψ|`.
pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}
