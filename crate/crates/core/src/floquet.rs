//! Floquet states of `H_s(t) = H₀ + V(t)`.
//!
//! The one-period propagator `U(τ, 0)` is integrated with an adaptive
//! Dormand-Prince 5(4) scheme. Its eigenphases give the quasienergies
//! `e^{-iγ_α τ}` and its eigenvectors the modes at `t = 0`; the modes over
//! the period follow from `u_α(t) = e^{iγ_α t} U(t, 0) u_α(0)`, and their
//! Fourier components from a discrete transform of those samples.

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::model::{self, DriveParams, EigenSystem, ModelParams, DIM};
use crate::numerics::{self, c, C64, ComplexMatrix, ComplexVector};

/// Default relative tolerance of the propagator.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default number of amplitude increments used to track states from `A = 0`.
pub const DEFAULT_RAMP_STEPS: usize = 64;
/// Minimal separation of two folded quasienergies.
pub const DEGENERACY_GAP: f64 = 1e-10;
/// Largest weight `‖u_α(±kmax)‖²` accepted at the edge of the Fourier table.
pub const TAIL_TOL: f64 = 1e-10;
/// Edge weight targeted by [`solve_floquet_auto`]. Reconstructing the modes
/// to 1e-8 from the truncated series needs edge amplitudes well below that,
/// so the automatic cutoff is stricter than [`TAIL_TOL`]; the extra cost is a
/// longer discrete transform, not more integration.
pub const AUTO_TAIL_TOL: f64 = 1e-20;
/// Minimal margin between best and runner-up overlaps when tracking.
pub const TRACKING_MARGIN: f64 = 0.05;

type M4 = Matrix4<C64>;

/// `H(t) = H₀ + f(t) D` in a form cheap to evaluate inside the integrator.
struct Hamiltonian {
    h0: M4,
    amplitude: f64,
    omega: f64,
}

impl Hamiltonian {
    fn new(p: &ModelParams, d: &DriveParams) -> Self {
        let h = model::build_h0(p);
        Self {
            h0: M4::from_fn(|r, col| h[(r, col)]),
            amplitude: d.amplitude,
            omega: d.omega,
        }
    }

    /// `dU/dt = -i H(t) U`
    fn rhs(&self, t: f64, u: &M4) -> M4 {
        let f = self.amplitude * (self.omega * t).cos();
        let mut hu = self.h0 * u;
        for (row, &w) in model::DRIVE_PROFILE.iter().enumerate() {
            if w != 0.0 {
                for col in 0..DIM {
                    hu[(row, col)] += u[(row, col)] * (w * f);
                }
            }
        }
        hu * C64::new(0.0, -1.0)
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrates `dU/dt = -iH(t)U` from `t0` to `t1` starting at `u0`.
fn integrate(ham: &Hamiltonian, t0: f64, t1: f64, u0: M4, tol: f64) -> Result<M4> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(u0);
    }
    let min_step = 1e-13 * span.abs().max(1.0);
    let mut t = t0;
    let mut u = u0;
    let mut h = (0.05 * span).clamp(-0.05, 0.05);
    let mut k1 = ham.rhs(t, &u);
    loop {
        let remaining = t1 - t;
        if remaining.abs() <= 1e-15 * span.abs() {
            break;
        }
        if h.abs() > remaining.abs() {
            h = remaining;
        }
        let mut k = [k1, M4::zeros(), M4::zeros(), M4::zeros(), M4::zeros(), M4::zeros(), M4::zeros()];
        for stage in 1..7 {
            let mut y = u;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    y += kj * c(h * a);
                }
            }
            k[stage] = ham.rhs(t + C[stage] * h, &y);
        }
        // stage 7 was evaluated at the fifth-order solution (FSAL)
        let mut next = u;
        for (j, kj) in k.iter().enumerate().take(6) {
            let b = A[6][j];
            if b != 0.0 {
                next += kj * c(h * b);
            }
        }
        let mut err: f64 = 0.0;
        for idx in 0..16 {
            let e: C64 = (0..7).map(|j| k[j][idx] * E[j]).sum::<C64>() * h;
            let scale = tol * (1.0 + u[idx].norm().max(next[idx].norm()));
            err = err.max(e.norm() / scale);
        }
        if err <= 1.0 {
            t += h;
            u = next;
            k1 = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < min_step {
            return Err(Error::StepSizeUnderflow { t, step: h });
        }
    }
    Ok(u)
}

fn to_dense(m: &M4) -> ComplexMatrix {
    ComplexMatrix::from_fn(DIM, DIM, |r, col| m[(r, col)])
}

fn check_tol(tol: f64) -> Result<()> {
    if (1e-14..=1e-6).contains(&tol) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("propagator tolerance {tol} outside [1e-14, 1e-6]")))
    }
}

/// `U(t, 0)` for arbitrary `t`.
pub fn propagate(p: &ModelParams, d: &DriveParams, t: f64, tol: f64) -> Result<ComplexMatrix> {
    check_tol(tol)?;
    let ham = Hamiltonian::new(p, d);
    integrate(&ham, 0.0, t, M4::identity(), tol).map(|u| to_dense(&u))
}

/// One-period propagator `U(τ, 0)`.
pub fn propagate_period(p: &ModelParams, d: &DriveParams, tol: f64) -> Result<ComplexMatrix> {
    propagate(p, d, std::f64::consts::TAU / d.omega, tol)
}

/// Folds a quasienergy into `[-ω/2, ω/2)`.
pub fn fold(gamma: f64, omega: f64) -> f64 {
    let x = gamma - omega * (gamma / omega + 0.5).floor();
    if x >= 0.5 * omega {
        x - omega
    } else {
        x
    }
}

/// Distance between two quasienergies modulo `ω`.
pub fn zone_distance(a: f64, b: f64, omega: f64) -> f64 {
    fold(a - b, omega).abs()
}

/// Default Fourier cutoff `2⌈A/ω⌉ + 8`.
pub fn default_kmax(d: &DriveParams) -> usize {
    2 * (d.amplitude / d.omega).ceil() as usize + 8
}

/// Smallest power of two `≥ 4 kmax`.
pub fn default_samples(kmax: usize) -> usize {
    (4 * kmax).next_power_of_two()
}

/// Floquet states over one period.
#[derive(Debug, Clone)]
pub struct FloquetSolution {
    pub omega: f64,
    /// Quasienergies folded to `[-ω/2, ω/2)` (unless shifted by
    /// [`FloquetSolution::shift_zone`]).
    pub quasienergies: [f64; DIM],
    pub kmax: usize,
    /// `fourier[α][K + kmax] = u_α(K)`.
    pub fourier: Vec<Vec<ComplexVector>>,
    /// `samples[α][j] = u_α(j τ / nt)`.
    pub samples: Vec<Vec<ComplexVector>>,
    /// `labels[α]` is the index of the `H₀` eigenstate Floquet state `α`
    /// continues to as the drive is switched off.
    pub labels: [usize; DIM],
}

impl FloquetSolution {
    pub fn nt(&self) -> usize {
        self.samples[0].len()
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }

    /// `u_α(K)`, zero outside the stored range.
    pub fn component(&self, alpha: usize, k: i64) -> Option<&ComplexVector> {
        let idx = k + self.kmax as i64;
        if idx < 0 {
            return None;
        }
        self.fourier[alpha].get(idx as usize)
    }

    /// `u_α(0)`, the mode at stroboscopic times.
    pub fn mode0(&self, alpha: usize) -> ComplexVector {
        self.samples[alpha][0].clone()
    }

    /// Columns are `u_α(0)`.
    pub fn frame0(&self) -> ComplexMatrix {
        self.frame_at_sample(0)
    }

    /// Columns are `u_α(t_j)`.
    pub fn frame_at_sample(&self, j: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(DIM, DIM, |r, a| self.samples[a][j][r])
    }

    /// `u_α(t)` rebuilt from its Fourier series.
    pub fn mode_at(&self, alpha: usize, t: f64) -> ComplexVector {
        let mut out = ComplexVector::zeros(DIM);
        for (i, comp) in self.fourier[alpha].iter().enumerate() {
            let k = i as f64 - self.kmax as f64;
            out.axpy(C64::from_polar(1.0, -k * self.omega * t), comp, c(1.0));
        }
        out
    }

    /// Orthonormal frame `u_α(t)` from the Fourier series.
    pub fn frame_at(&self, t: f64) -> ComplexMatrix {
        let cols: Vec<ComplexVector> = (0..DIM).map(|a| self.mode_at(a, t)).collect();
        let f = ComplexMatrix::from_columns(&cols);
        numerics::orthonormalize(&f).unwrap_or(f)
    }

    /// `max_α ‖u_α(±kmax)‖²`.
    pub fn tail_weight(&self) -> f64 {
        self.fourier
            .iter()
            .map(|f| f[0].norm_squared().max(f[f.len() - 1].norm_squared()))
            .fold(0.0, f64::max)
    }

    /// `Σ_K ‖u_α(K)‖²` for each `α`.
    pub fn parseval(&self) -> [f64; DIM] {
        let mut out = [0.0; DIM];
        for (a, slot) in out.iter_mut().enumerate() {
            *slot = self.fourier[a].iter().map(|v| v.norm_squared()).sum();
        }
        out
    }

    /// Reorders the states so that `α` coincides with the `H₀` eigenstate
    /// index it is labelled with.
    pub fn ordered_by_label(&self) -> Self {
        let mut order = [0; DIM];
        for (alpha, &k) in self.labels.iter().enumerate() {
            order[k] = alpha;
        }
        Self {
            omega: self.omega,
            quasienergies: order.map(|a| self.quasienergies[a]),
            kmax: self.kmax,
            fourier: order.iter().map(|&a| self.fourier[a].clone()).collect(),
            samples: order.iter().map(|&a| self.samples[a].clone()).collect(),
            labels: [0, 1, 2, 3],
        }
    }

    pub fn with_labels(mut self, labels: [usize; DIM]) -> Self {
        self.labels = labels;
        self
    }

    /// Equivalent description with `γ_α → γ_α + mω` and
    /// `u_α(K) → u_α(K + m)`. The table is widened by `|m|` on both sides so
    /// no component is lost.
    pub fn shift_zone(&self, alpha: usize, m: i64) -> Self {
        let pad = m.unsigned_abs() as usize;
        let kmax = self.kmax + pad;
        let fourier = (0..DIM)
            .map(|a| {
                let shift = if a == alpha { m } else { 0 };
                (-(kmax as i64)..=kmax as i64)
                    .map(|k| self.component(a, k + shift).cloned().unwrap_or_else(|| ComplexVector::zeros(DIM)))
                    .collect()
            })
            .collect();
        let nt = self.nt();
        let samples = (0..DIM)
            .map(|a| {
                (0..nt)
                    .map(|j| {
                        if a == alpha {
                            let t = self.period() * j as f64 / nt as f64;
                            &self.samples[a][j] * C64::from_polar(1.0, m as f64 * self.omega * t)
                        } else {
                            self.samples[a][j].clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let mut quasienergies = self.quasienergies;
        quasienergies[alpha] += m as f64 * self.omega;
        Self {
            omega: self.omega,
            quasienergies,
            kmax,
            fourier,
            samples,
            labels: self.labels,
        }
    }
}

/// Labels Floquet states by maximal overlap `|⟨k|u_α(0)⟩|²` with the `H₀`
/// eigenstates (no continuation).
pub fn direct_labels(frame0: &ComplexMatrix, eig: &EigenSystem) -> [usize; DIM] {
    let mut weight = [[0.0; DIM]; DIM];
    for (alpha, row) in weight.iter_mut().enumerate() {
        for (k, w) in row.iter_mut().enumerate() {
            *w = eig.states.column(k).dotc(&frame0.column(alpha)).norm_sqr();
        }
    }
    model::best_assignment(&weight)
}

/// Solves for the Floquet states with Fourier cutoff `kmax` from `nt` period
/// samples. Labels are initialized by direct overlap with `H₀` eigenstates.
pub fn solve_floquet(p: &ModelParams, d: &DriveParams, kmax: usize, nt: usize) -> Result<FloquetSolution> {
    solve_floquet_with_tol(p, d, kmax, nt, DEFAULT_TOL)
}

pub fn solve_floquet_with_tol(
    p: &ModelParams,
    d: &DriveParams,
    kmax: usize,
    nt: usize,
    tol: f64,
) -> Result<FloquetSolution> {
    p.validate()?;
    d.validate()?;
    check_tol(tol)?;
    if kmax < 1 || nt < 2 * kmax + 2 {
        return Err(Error::InvalidParameter(format!("need kmax >= 1 and nt >= 2 kmax + 2 (kmax {kmax}, nt {nt})")));
    }
    let ham = Hamiltonian::new(p, d);
    let period = std::f64::consts::TAU / d.omega;
    let times: Vec<f64> = (0..=nt).map(|j| period * j as f64 / nt as f64).collect();

    let mut props = Vec::with_capacity(nt + 1);
    let mut u = M4::identity();
    props.push(u);
    for w in times.windows(2) {
        u = integrate(&ham, w[0], w[1], u, tol)?;
        props.push(u);
    }
    let u_period = to_dense(&props[nt]);
    let eig = numerics::unitary_eig(&u_period)?;

    let mut quasienergies = [0.0; DIM];
    for (q, lambda) in quasienergies.iter_mut().zip(&eig.values) {
        *q = fold(-lambda.arg() / period, d.omega);
    }
    for a in 0..DIM {
        for b in (a + 1)..DIM {
            let gap = zone_distance(quasienergies[a], quasienergies[b], d.omega);
            if gap < DEGENERACY_GAP {
                return Err(Error::QuasienergyDegeneracy { first: a, second: b, gap });
            }
        }
    }

    // Frames are unitary up to the integration tolerance; restoring exact
    // orthonormality keeps basis changes and period averages trace-exact.
    let mut frames = Vec::with_capacity(nt);
    for j in 0..nt {
        let phases = ComplexMatrix::from_diagonal(&ComplexVector::from_fn(DIM, |a, _| {
            C64::from_polar(1.0, quasienergies[a] * times[j])
        }));
        frames.push(numerics::orthonormalize(&(to_dense(&props[j]) * &eig.vectors * phases))?);
    }
    let samples: Vec<Vec<ComplexVector>> = (0..DIM)
        .map(|a| frames.iter().map(|f| f.column(a).into_owned()).collect())
        .collect();
    let fourier = samples.iter().map(|s| numerics::fourier_coefficients(s, kmax)).collect();

    let eig0 = model::diagonalize_h0(p)?;
    let frame0 = ComplexMatrix::from_fn(DIM, DIM, |r, a| samples[a][0][r]);
    let labels = direct_labels(&frame0, &eig0);
    Ok(FloquetSolution {
        omega: d.omega,
        quasienergies,
        kmax,
        fourier,
        samples,
        labels,
    })
}

/// Solves with the default cutoff, doubling it until the edge of the Fourier
/// table carries less than [`AUTO_TAIL_TOL`].
pub fn solve_floquet_auto(p: &ModelParams, d: &DriveParams, tol: f64) -> Result<FloquetSolution> {
    let mut kmax = default_kmax(d);
    loop {
        let sol = solve_floquet_with_tol(p, d, kmax, default_samples(kmax), tol)?;
        if sol.tail_weight() <= AUTO_TAIL_TOL || kmax >= 512 {
            return Ok(sol);
        }
        kmax *= 2;
    }
}

/// Tracks each Floquet state back to the `H₀` eigenstate it continues to at
/// `A = 0`, ramping the amplitude in `steps` increments and following the
/// maximal overlap `|⟨u_α(0)|u_prev⟩|` from step to step.
///
/// Returns `labels` with `labels[α] = k` for the states of `sol`.
pub fn label_floquet_states(
    p: &ModelParams,
    sol: &FloquetSolution,
    eig: &EigenSystem,
    d: &DriveParams,
    steps: usize,
) -> Result<[usize; DIM]> {
    let steps = steps.max(1);
    let mut tracked: Vec<ComplexVector> = (0..DIM).map(|k| eig.state(k)).collect();
    for step in 1..=steps {
        let amp = d.amplitude * step as f64 / steps as f64;
        let frame = if step == steps {
            sol.frame0()
        } else {
            let u = propagate_period(p, &DriveParams::new(amp, d.omega), DEFAULT_TOL)?;
            numerics::unitary_eig(&u)?.vectors
        };
        let assignment = track_step(&tracked, &frame, step)?;
        tracked = assignment.iter().map(|&a| frame.column(a).into_owned()).collect();
        if step == steps {
            let mut labels = [0; DIM];
            for (k, &alpha) in assignment.iter().enumerate() {
                labels[alpha] = k;
            }
            return Ok(labels);
        }
    }
    unreachable!("loop returns on the last step")
}

/// `assignment[k]` is the column of `frame` continuing `tracked[k]`.
fn track_step(tracked: &[ComplexVector], frame: &ComplexMatrix, step: usize) -> Result<[usize; DIM]> {
    let mut weight = [[0.0; DIM]; DIM];
    for (k, row) in weight.iter_mut().enumerate() {
        for (a, w) in row.iter_mut().enumerate() {
            *w = frame.column(a).dotc(&tracked[k]).norm();
        }
    }
    for row in &weight {
        let mut sorted = *row;
        sorted.sort_by(|x, y| y.total_cmp(x));
        let margin = sorted[0] - sorted[1];
        if margin < TRACKING_MARGIN {
            return Err(Error::AmbiguousTracking { step, margin });
        }
    }
    let squared = weight.map(|row| row.map(|w| w * w));
    Ok(model::best_assignment(&squared))
}
