//! Stroboscopic Floquet-Markov dynamics, steady states and basis changes.
//!
//! Density matrices live in the Floquet basis `{u_α(t)}` unless tagged
//! otherwise; the physical state at time `t` is
//! `ρ(t) = Σ_αβ ρ_αβ(t) |u_α(t)⟩⟨u_β(t)|`, so at stroboscopic instants the
//! frame is `u_α(0)`.

use crate::bath::{self, BathParams, GeneratorQ0, RateTensor};
use crate::error::{Error, Result};
use crate::floquet::FloquetSolution;
use crate::model::{EigenSystem, DIM};
use crate::numerics::{self, c, C64, ComplexMatrix, ComplexVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Computational,
    Eigenstate,
    Floquet,
}

/// Relative singular-value threshold of the steady-state kernel.
pub const STEADY_STATE_TOL: f64 = 1e-11;
/// Most negative eigenvalue tolerated along a trajectory.
pub const NONPHYSICAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: ComplexMatrix,
    pub basis: Basis,
    /// In units of the drive period.
    pub time: f64,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, basis: Basis, time: f64) -> Self {
        Self { matrix, basis, time }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn diagonal(&self) -> [f64; DIM] {
        std::array::from_fn(|k| self.matrix[(k, k)].re)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * c(0.5);
        Ok(numerics::hermitian_eig(&h)?.values[0])
    }

    /// Checks Hermiticity (1e-10), unit trace (1e-9) and positivity (−1e-8).
    pub fn validate(&self) -> Result<()> {
        self.validate_within(1e-8)
    }

    /// As [`validate`](Self::validate), tolerating eigenvalues down to `-neg_tol`.
    pub fn validate_within(&self, neg_tol: f64) -> Result<()> {
        let defect = numerics::hermiticity_defect(&self.matrix);
        if defect > 1e-10 {
            return Err(Error::NonPhysicalInput(format!("not Hermitian (defect {defect:.3e})")));
        }
        let tr = self.trace();
        if (tr - c(1.0)).norm() > 1e-9 {
            return Err(Error::NonPhysicalInput(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue()?;
        if min < -neg_tol {
            return Err(Error::NonPhysicalInput(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }
}

/// Which master equation to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeneratorFlavor {
    /// The full period-averaged Redfield-type generator.
    #[default]
    Full,
    /// Secular (Lindblad) restriction with rates `Γ_αβ`; completely positive.
    Secular,
}

/// Secular generator
/// `ρ̇_μν = −i(γ_μ−γ_ν)ρ_μν + δ_μν Σ_β Γ_μβ ρ_ββ − ½(Σ_α Γ_αμ + Σ_α Γ_αν) ρ_μν`.
///
/// `Γ_αβ = 2 Re R_{αα,ββ}`, the population rates of the full generator, so
/// both flavors share their rate equation.
pub fn secular_generator(r: &RateTensor, quasienergies: [f64; DIM]) -> GeneratorQ0 {
    let gamma: [[f64; DIM]; DIM] = std::array::from_fn(|a| std::array::from_fn(|b| 2.0 * r[a][a][b][b].re));
    let out: [f64; DIM] = std::array::from_fn(|m| (0..DIM).map(|a| gamma[a][m]).sum());
    let mut l = ComplexMatrix::zeros(DIM * DIM, DIM * DIM);
    for m in 0..DIM {
        for n in 0..DIM {
            l[(bath::pair(m, n), bath::pair(m, n))] += c(0.5 * (out[m] + out[n]));
        }
        for b in 0..DIM {
            l[(bath::pair(m, m), bath::pair(b, b))] -= c(gamma[m][b]);
        }
    }
    GeneratorQ0 {
        quasienergies,
        coefficients: l,
    }
}

/// Generator of the requested flavor for one Floquet solution.
pub fn build_generator(sol: &FloquetSolution, b: &BathParams, flavor: GeneratorFlavor) -> Result<GeneratorQ0> {
    match flavor {
        GeneratorFlavor::Full => bath::build_generator(sol, b),
        GeneratorFlavor::Secular => {
            b.validate()?;
            let a = bath::transition_elements(sol, &b.coupling_op())?;
            let g = bath::thermal_table(sol, b, a.kmax);
            Ok(secular_generator(&bath::rate_tensor(&g, &a), sol.quasienergies))
        }
    }
}

/// `ρ_αβ(0) = ⟨u_α(0)|0⟩⟨0|u_β(0)⟩`: the ground state of `H₀` in the
/// Floquet basis.
pub fn initial_state(eig: &EigenSystem, sol: &FloquetSolution) -> DensityMatrix {
    let amp = sol.frame0().adjoint() * eig.state(0);
    DensityMatrix::new(&amp * amp.adjoint(), Basis::Floquet, 0.0)
}

fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_fn(DIM * DIM, |i, _| m[(i / DIM, i % DIM)])
}

fn unvectorize(v: &ComplexVector) -> ComplexMatrix {
    ComplexMatrix::from_fn(DIM, DIM, |a, b| v[bath::pair(a, b)])
}

/// Stroboscopic trajectory.
#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    /// `t/τ` of each entry.
    pub times: Vec<f64>,
    /// Floquet-basis states.
    pub states: Vec<DensityMatrix>,
    /// `P_k(t)` on the `H₀` eigenstates.
    pub populations: Vec<[f64; DIM]>,
    /// Columns `u_α(0)`, the stroboscopic frame.
    pub frame: ComplexMatrix,
}

impl EvolutionRecord {
    /// Entry `i` in the computational basis.
    pub fn computational(&self, i: usize) -> DensityMatrix {
        let s = &self.states[i];
        DensityMatrix::new(&self.frame * &s.matrix * self.frame.adjoint(), Basis::Computational, s.time)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn populations(frame: &ComplexMatrix, eig: &EigenSystem, rho: &ComplexMatrix) -> [f64; DIM] {
    // eigenstate components of the Floquet frame
    let w = eig.states.adjoint() * frame;
    let r = &w * rho * w.adjoint();
    std::array::from_fn(|k| r[(k, k)].re)
}

/// Evolves `rho0` to the stroboscopic instants `periods` (sorted, in units
/// of `τ`) with the exact propagator of the constant generator.
pub fn evolve_at(
    gen: &GeneratorQ0,
    sol: &FloquetSolution,
    eig: &EigenSystem,
    rho0: &DensityMatrix,
    periods: &[u64],
) -> Result<EvolutionRecord> {
    if rho0.basis != Basis::Floquet {
        return Err(Error::InvalidParameter("initial state must be in the Floquet basis".into()));
    }
    if periods.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("evolution instants must be sorted".into()));
    }
    let m = gen.superoperator();
    let frame = sol.frame0();
    let mut v = vectorize(&rho0.matrix);
    let mut now = 0u64;
    let mut cached: Option<(u64, ComplexMatrix)> = None;
    let mut record = EvolutionRecord {
        times: Vec::with_capacity(periods.len()),
        states: Vec::with_capacity(periods.len()),
        populations: Vec::with_capacity(periods.len()),
        frame: frame.clone(),
    };
    for &target in periods {
        let gap = target - now;
        if gap > 0 {
            let prop = match &cached {
                Some((g, p)) if *g == gap => p,
                _ => {
                    let p = numerics::expm(&(&m * c(gap as f64 * sol.period())));
                    &cached.insert((gap, p)).1
                }
            };
            v = prop * &v;
            now = target;
        }
        let rho = unvectorize(&v);
        let state = DensityMatrix::new(rho, Basis::Floquet, target as f64);
        let min = state.min_eigenvalue()?;
        if min < -NONPHYSICAL_TOL {
            return Err(Error::NonphysicalState { min_eigenvalue: min });
        }
        record.populations.push(populations(&frame, eig, &state.matrix));
        record.times.push(target as f64);
        record.states.push(state);
    }
    Ok(record)
}

/// Evolves over `horizon` periods recording every `stride` periods
/// (including `t = 0`).
pub fn evolve(
    gen: &GeneratorQ0,
    sol: &FloquetSolution,
    eig: &EigenSystem,
    rho0: &DensityMatrix,
    horizon: u64,
    stride: u64,
) -> Result<EvolutionRecord> {
    if horizon < 1 || stride < 1 {
        return Err(Error::InvalidParameter(format!("need horizon, stride >= 1 (got {horizon}, {stride})")));
    }
    let periods: Vec<u64> = (0..=horizon / stride).map(|m| m * stride).collect();
    evolve_at(gen, sol, eig, rho0, &periods)
}

/// State after `2^doublings` periods, by repeated squaring of the one-period
/// propagator. A cheap route to the long-time limit.
pub fn evolve_long(gen: &GeneratorQ0, sol: &FloquetSolution, rho0: &DensityMatrix, doublings: u32) -> DensityMatrix {
    let mut p = numerics::expm(&(gen.superoperator() * c(sol.period())));
    for _ in 0..doublings {
        p = &p * &p;
    }
    let v = p * vectorize(&rho0.matrix);
    // round-off leaks ~1e-16 of trace per period; renormalize the result
    let rho = unvectorize(&v);
    let tr = rho.trace();
    DensityMatrix::new(hermitize(&(rho / tr)), Basis::Floquet, 2f64.powi(doublings as i32))
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Unique stationary state of the full linear map, from its kernel.
pub fn steady_state(gen: &GeneratorQ0, _sol: &FloquetSolution) -> Result<DensityMatrix> {
    let m = gen.superoperator();
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.max();
    let dimension = sigma.iter().filter(|&&s| s <= STEADY_STATE_TOL * sigma_max).count();
    if dimension > 1 {
        return Err(Error::DegenerateSteadyState { dimension });
    }
    let smallest = sigma.imin();
    let v: ComplexVector = v_t.row(smallest).adjoint();
    let rho = unvectorize(&v);
    let tr = rho.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::DegenerateSteadyState { dimension: 0 });
    }
    Ok(DensityMatrix::new(hermitize(&(rho / tr)), Basis::Floquet, f64::INFINITY))
}

/// `ρ̄ = (1/N_t) Σ_j Σ_αβ ρ_αβ u_α(t_j) u_β(t_j)†` in the computational basis.
pub fn period_average(rho: &DensityMatrix, sol: &FloquetSolution) -> Result<DensityMatrix> {
    if rho.basis != Basis::Floquet {
        return Err(Error::InvalidParameter("period average needs a Floquet-basis state".into()));
    }
    let nt = sol.nt();
    let mut acc = ComplexMatrix::zeros(DIM, DIM);
    for j in 0..nt {
        let f = sol.frame_at_sample(j);
        acc += &f * &rho.matrix * f.adjoint();
    }
    Ok(DensityMatrix::new(hermitize(&(acc / c(nt as f64))), Basis::Computational, rho.time))
}

/// Matrix whose columns are the `basis` vectors in computational coordinates.
fn frame(basis: Basis, sol: &FloquetSolution, eig: &EigenSystem, t: f64) -> ComplexMatrix {
    match basis {
        Basis::Computational => ComplexMatrix::identity(DIM, DIM),
        Basis::Eigenstate => eig.states.clone(),
        Basis::Floquet => sol.frame_at(t * sol.period()),
    }
}

/// Re-expresses `rho` in `target`, using the Floquet frame at `t` (units of
/// `τ`) where it is involved.
pub fn to_basis(rho: &DensityMatrix, target: Basis, sol: &FloquetSolution, eig: &EigenSystem, t: f64) -> DensityMatrix {
    if rho.basis == target {
        return rho.clone();
    }
    let from = frame(rho.basis, sol, eig, t);
    let to = frame(target, sol, eig, t);
    let u = to.adjoint() * from;
    DensityMatrix::new(&u * &rho.matrix * u.adjoint(), target, rho.time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{self, solve_floquet, solve_floquet_auto};
    use crate::model::{self, DriveParams, ModelParams};

    struct Point {
        sol: FloquetSolution,
        eig: EigenSystem,
        bath: BathParams,
    }

    fn point(eps0: f64, a: f64, xi: f64) -> Point {
        let p = ModelParams {
            eps0,
            ..ModelParams::default()
        };
        let eig = model::diagonalize_h0(&p).unwrap();
        let d = DriveParams::new(a, 1.0);
        let sol = solve_floquet_auto(&p, &d, floquet::DEFAULT_TOL).unwrap();
        let labels = floquet::label_floquet_states(&p, &sol, &eig, &d, 64).unwrap();
        Point {
            sol: sol.with_labels(labels).ordered_by_label(),
            eig,
            bath: BathParams::default().with_xi(xi),
        }
    }

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn initial_state_without_drive_is_ground_projector() {
        let pt = point(3.7, 0.0, 0.1);
        let rho = initial_state(&pt.eig, &pt.sol);
        let mut want = ComplexMatrix::zeros(DIM, DIM);
        want[(0, 0)] = c(1.0);
        assert!(max_diff(&rho.matrix, &want) < 1e-9);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn initial_state_off_resonance_is_mostly_floquet_zero() {
        let pt = point(3.7, 3.8, 0.1);
        let rho = initial_state(&pt.eig, &pt.sol);
        let d = rho.diagonal();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((1..DIM).all(|k| d[0] > d[k]));
    }

    #[test]
    fn zero_generator_only_rotates_phases() {
        let pt = point(3.7, 3.8, 0.1);
        let gen = GeneratorQ0 {
            quasienergies: pt.sol.quasienergies,
            coefficients: ComplexMatrix::zeros(16, 16),
        };
        let rho0 = initial_state(&pt.eig, &pt.sol);
        let rec = evolve(&gen, &pt.sol, &pt.eig, &rho0, 50, 5).unwrap();
        for (state, pops) in rec.states.iter().zip(&rec.populations) {
            for a in 0..DIM {
                assert!((state.matrix[(a, a)] - rho0.matrix[(a, a)]).norm() < 1e-12);
            }
            assert!((pops.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // coherences pick up e^{-i(γ_α-γ_β)t}
        let t = rec.times[3] * pt.sol.period();
        let want = rho0.matrix[(0, 2)] * C64::from_polar(1.0, -(pt.sol.quasienergies[0] - pt.sol.quasienergies[2]) * t);
        assert!((rec.states[3].matrix[(0, 2)] - want).norm() < 1e-10);
    }

    #[test]
    fn trace_and_populations_conserved() {
        let pt = point(3.7, 3.8, 0.1);
        let gen = build_generator(&pt.sol, &pt.bath, GeneratorFlavor::Full).unwrap();
        let rho0 = initial_state(&pt.eig, &pt.sol);
        let rec = evolve(&gen, &pt.sol, &pt.eig, &rho0, 100_000, 1000).unwrap();
        for (s, p) in rec.states.iter().zip(&rec.populations) {
            assert!((s.trace() - c(1.0)).norm() < 1e-9);
            assert!(numerics::hermiticity_defect(&s.matrix) < 1e-10);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn steady_state_matches_long_time_limit() {
        let pt = point(3.7, 3.8, 0.1);
        let gen = build_generator(&pt.sol, &pt.bath, GeneratorFlavor::Full).unwrap();
        let kernel = steady_state(&gen, &pt.sol).unwrap();
        let long = evolve_long(&gen, &pt.sol, &initial_state(&pt.eig, &pt.sol), 40);
        let diff = max_diff(&kernel.matrix, &long.matrix);
        assert!(diff < 1e-6, "{diff:e}\n{}\n{}", kernel.matrix, long.matrix);
        kernel.validate().unwrap();
    }

    #[test]
    fn undriven_steady_state_is_ground_state() {
        let pt = point(3.7, 0.0, 0.1);
        let gen = build_generator(&pt.sol, &pt.bath, GeneratorFlavor::Full).unwrap();
        let rho = steady_state(&gen, &pt.sol).unwrap();
        assert!((rho.matrix[(0, 0)].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn decoupled_singlet_gives_degenerate_kernel() {
        // equal tunnelling and symmetric coupling: e- neither decays nor is fed
        let p = ModelParams {
            delta2: 0.1,
            ..ModelParams::default()
        };
        let sol = solve_floquet(&p, &DriveParams::new(0.0, 1.0), 8, 32).unwrap().ordered_by_label();
        let gen = build_generator(&sol, &BathParams::default().with_xi(1.0), GeneratorFlavor::Full).unwrap();
        assert!(matches!(steady_state(&gen, &sol), Err(Error::DegenerateSteadyState { .. })));
    }

    #[test]
    fn secular_flavor_keeps_positivity() {
        let pt = point(3.7, 3.8, 0.1);
        let gen = build_generator(&pt.sol, &pt.bath, GeneratorFlavor::Secular).unwrap();
        assert!(gen.trace_defect() < 1e-14);
        let rho0 = initial_state(&pt.eig, &pt.sol);
        let rec = evolve_at(&gen, &pt.sol, &pt.eig, &rho0, &[0, 1, 10, 100, 1000, 10_000, 100_000]).unwrap();
        for s in &rec.states {
            assert!(s.min_eigenvalue().unwrap() >= -1e-10);
        }
    }

    #[test]
    fn period_average_cases() {
        let still = point(3.7, 0.0, 0.1);
        let gen = build_generator(&still.sol, &still.bath, GeneratorFlavor::Full).unwrap();
        let rho = steady_state(&gen, &still.sol).unwrap();
        let avg = period_average(&rho, &still.sol).unwrap();
        let direct = to_basis(&rho, Basis::Computational, &still.sol, &still.eig, 0.0);
        assert!(max_diff(&avg.matrix, &direct.matrix) < 1e-9);

        let pt = point(3.7, 3.8, 0.1);
        let mixed = DensityMatrix::new(ComplexMatrix::identity(DIM, DIM) * c(0.25), Basis::Floquet, 0.0);
        let avg = period_average(&mixed, &pt.sol).unwrap();
        let diff = max_diff(&avg.matrix, &mixed.matrix);
        assert!(diff < 1e-12, "{diff:e}");
    }

    #[test]
    fn period_average_converges_in_samples() {
        let p = ModelParams::default();
        let d = DriveParams::new(3.8, 1.0);
        let k = 2 * floquet::default_kmax(&d);
        let coarse = solve_floquet(&p, &d, k, floquet::default_samples(k)).unwrap();
        let fine = solve_floquet(&p, &d, k, 2 * floquet::default_samples(k)).unwrap();
        let rho = DensityMatrix::new(
            ComplexMatrix::from_fn(DIM, DIM, |a, b| if a == b { c([0.1, 0.6, 0.2, 0.1][a]) } else { c(0.0) }),
            Basis::Floquet,
            0.0,
        );
        let x = period_average(&rho, &coarse).unwrap();
        let y = period_average(&rho, &fine).unwrap();
        assert!(max_diff(&x.matrix, &y.matrix) < 1e-8);
    }

    #[test]
    fn basis_round_trips_preserve_spectrum() {
        let pt = point(3.7, 3.8, 0.1);
        let rho = DensityMatrix::new(
            ComplexMatrix::from_fn(DIM, DIM, |a, b| {
                if a == b {
                    c([0.4, 0.3, 0.2, 0.1][a])
                } else {
                    C64::new(0.02, 0.01 * (a as f64 - b as f64))
                }
            }),
            Basis::Computational,
            0.0,
        );
        for t in [0.0, 0.3] {
            let fl = to_basis(&rho, Basis::Floquet, &pt.sol, &pt.eig, t);
            let back = to_basis(&fl, Basis::Computational, &pt.sol, &pt.eig, t);
            let diff = max_diff(&back.matrix, &rho.matrix);
            assert!(diff < 1e-10, "t {t}: {diff:e}");
            let e = to_basis(&fl, Basis::Eigenstate, &pt.sol, &pt.eig, t);
            let want = numerics::hermitian_eig(&rho.matrix).unwrap().values;
            let got = numerics::hermitian_eig(&e.matrix).unwrap().values;
            for (x, y) in want.iter().zip(&got) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn separable_ground_state_in_computational_basis() {
        let p = ModelParams {
            eps0: 6.0,
            delta1: 0.02,
            delta2: 0.03,
            ..ModelParams::default()
        };
        let eig = model::diagonalize_h0(&p).unwrap();
        let sol = solve_floquet(&p, &DriveParams::new(0.0, 1.0), 8, 32).unwrap();
        let mut g = ComplexMatrix::zeros(DIM, DIM);
        g[(0, 0)] = c(1.0);
        let comp = to_basis(&DensityMatrix::new(g, Basis::Eigenstate, 0.0), Basis::Computational, &sol, &eig, 0.0);
        let oracle = model::projector(&model::perturbative_eigenstates(&p).unwrap()[0]);
        assert!(max_diff(&comp.matrix, &oracle) < 1e-4);
        assert!((comp.matrix[(0, 0)].re - 1.0).abs() < 1e-4);
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = ComplexMatrix::identity(DIM, DIM) * c(0.25);
        assert!(DensityMatrix::new(m.clone(), Basis::Computational, 0.0).validate().is_ok());
        m[(0, 0)] = c(0.5);
        assert!(DensityMatrix::new(m.clone(), Basis::Computational, 0.0).validate().is_err());
        m[(0, 0)] = c(0.25);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m, Basis::Computational, 0.0).validate().is_err());
    }
}
