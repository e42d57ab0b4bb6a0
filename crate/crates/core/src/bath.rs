//! Ohmic bath, Floquet-Markov rate tensor and transition-rate tables.
//!
//! Sign conventions: quasienergies follow `Ψ_α = e^{-iγ_α t} u_α(t)` and
//! `g(Ω)` is large for `Ω < 0` (emission). A transition `β → α` absorbing
//! `K` photons from the drive exchanges `γ_α − γ_β − Kω` with the bath, so
//! every thermal weight below is evaluated there. In the static limit this is
//! `E_α − E_β`, and `Γ_αβ` always reads "rate into `α` from `β`".

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::floquet::FloquetSolution;
use crate::model::{self, EigenSystem, ModelParams, StateLabel, DIM};
use crate::numerics::{self, C64, ComplexMatrix, ComplexVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Dimensionless Ohmic strength `κ`.
    pub kappa: f64,
    /// `k_B T` in units of `ω`.
    pub temperature: f64,
    /// Exponential cutoff `ω_c`.
    pub cutoff: f64,
    pub gamma1: f64,
    /// `ξ = γ₂/γ₁`.
    pub xi: f64,
}

impl Default for BathParams {
    fn default() -> Self {
        Self {
            kappa: 0.001,
            temperature: 0.00467,
            cutoff: 10.0,
            gamma1: 1.0,
            xi: 0.1,
        }
    }
}

impl BathParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("kappa", self.kappa), ("temperature", self.temperature), ("cutoff", self.cutoff)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("bath {name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("gamma1", self.gamma1), ("xi", self.xi)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("bath {name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_xi(self, xi: f64) -> Self {
        Self { xi, ..self }
    }

    /// `𝒜 = γ₁σz¹ + γ₂σz²`.
    pub fn coupling_op(&self) -> ComplexMatrix {
        model::build_coupling_op(self.gamma1, self.xi)
    }
}

/// `J(Ω) = κ Ω e^{-|Ω|/ω_c}`.
pub fn spectral_density(omega: f64, b: &BathParams) -> f64 {
    b.kappa * omega * (-omega.abs() / b.cutoff).exp()
}

/// `ln g(Ω)` where `g(Ω) = J(Ω) n_th(Ω)`, finite for every `Ω`.
pub fn log_thermal_weight(omega: f64, b: &BathParams) -> f64 {
    if omega == 0.0 {
        return (b.kappa * b.temperature).ln();
    }
    let x = omega.abs() / b.temperature;
    // |Ω| e^{-|Ω|/ω_c} / (1 - e^{-x}) is the emission branch; absorption
    // carries the extra Boltzmann factor e^{-x}.
    let emission = b.kappa.ln() + omega.abs().ln() - omega.abs() / b.cutoff - (-(-x).exp_m1()).ln();
    if omega > 0.0 {
        emission - x
    } else {
        emission
    }
}

/// `g(Ω) = J(Ω) n_th(Ω)` with `n_th(x) = 1/(e^{x/T} − 1)`; `g(0) = κT`.
pub fn thermal_weight(omega: f64, b: &BathParams) -> f64 {
    log_thermal_weight(omega, b).exp()
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != DIM || m.ncols() != DIM {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let defect = numerics::hermiticity_defect(m);
    if defect > 1e-12 * m.norm().max(1.0) {
        return Err(Error::NonHermitianInput { defect });
    }
    Ok(())
}

/// A table indexed by `(α, β, K)` with `|K| ≤ kmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandTable<T> {
    pub kmax: usize,
    entries: Vec<[[T; DIM]; DIM]>,
}

impl<T: Copy> SidebandTable<T> {
    pub fn get(&self, alpha: usize, beta: usize, k: i64) -> T {
        self.entries[(k + self.kmax as i64) as usize][alpha][beta]
    }

    pub fn sideband(&self, k: i64) -> &[[T; DIM]; DIM] {
        &self.entries[(k + self.kmax as i64) as usize]
    }

    pub fn orders(&self) -> impl Iterator<Item = i64> {
        let k = self.kmax as i64;
        -k..=k
    }
}

/// Transition elements `A^K_αβ = Σ_L ⟨u_α(L)|𝒜|u_β(L+K)⟩` for
/// `|K| ≤ 2 kmax`.
pub fn transition_elements(sol: &FloquetSolution, coupling: &ComplexMatrix) -> Result<SidebandTable<C64>> {
    check_hermitian(coupling)?;
    let n = sol.kmax as i64;
    let applied: Vec<Vec<ComplexVector>> = sol
        .fourier
        .iter()
        .map(|f| f.iter().map(|v| coupling * v).collect())
        .collect();
    let entries = (-2 * n..=2 * n)
        .map(|k| {
            let mut table = [[C64::new(0.0, 0.0); DIM]; DIM];
            for (alpha, row) in table.iter_mut().enumerate() {
                for (beta, slot) in row.iter_mut().enumerate() {
                    let lo = (-n).max(-n - k);
                    let hi = n.min(n - k);
                    *slot = (lo..=hi)
                        .map(|l| sol.fourier[alpha][(l + n) as usize].dotc(&applied[beta][(l + k + n) as usize]))
                        .sum();
                }
            }
            table
        })
        .collect();
    Ok(SidebandTable {
        kmax: 2 * sol.kmax,
        entries,
    })
}

/// Thermal weights `g(γ_α − γ_β − Kω)` on the same index range as `a_table`.
pub fn thermal_table(sol: &FloquetSolution, b: &BathParams, kmax: usize) -> SidebandTable<f64> {
    let n = kmax as i64;
    let entries = (-n..=n)
        .map(|k| {
            let mut table = [[0.0; DIM]; DIM];
            for (alpha, row) in table.iter_mut().enumerate() {
                for (beta, slot) in row.iter_mut().enumerate() {
                    let gap = sol.quasienergies[alpha] - sol.quasienergies[beta] - k as f64 * sol.omega;
                    *slot = thermal_weight(gap, b);
                }
            }
            table
        })
        .collect();
    SidebandTable { kmax, entries }
}

/// `R_{αβ,α'β'}` stored at `[α][β][α'][β']`.
pub type RateTensor = [[[[C64; DIM]; DIM]; DIM]; DIM];

/// `R_{αβ,α'β'} = Σ_K g^K_{αα'} A^K_{αα'} (A^K_{ββ'})*`.
pub fn rate_tensor(g_table: &SidebandTable<f64>, a_table: &SidebandTable<C64>) -> RateTensor {
    let mut r = [[[[C64::new(0.0, 0.0); DIM]; DIM]; DIM]; DIM];
    let kmax = g_table.kmax.min(a_table.kmax) as i64;
    for k in -kmax..=kmax {
        let g = g_table.sideband(k);
        let a = a_table.sideband(k);
        for al in 0..DIM {
            for be in 0..DIM {
                for alp in 0..DIM {
                    let left = a[al][alp] * g[al][alp];
                    if left == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for bep in 0..DIM {
                        r[al][be][alp][bep] += left * a[be][bep].conj();
                    }
                }
            }
        }
    }
    r
}

/// Period-averaged dissipator of the Floquet-Markov master equation,
///
/// `ρ̇_αβ = −i(γ_α − γ_β) ρ_αβ − Σ_{α'β'} ℒ_{αβ,α'β'} ρ_{α'β'}`.
///
/// Superoperator index of `ρ_αβ` is `4α + β`.
#[derive(Debug, Clone)]
pub struct GeneratorQ0 {
    pub quasienergies: [f64; DIM],
    /// `ℒ` as a 16×16 matrix.
    pub coefficients: ComplexMatrix,
}

pub const fn pair(alpha: usize, beta: usize) -> usize {
    DIM * alpha + beta
}

impl GeneratorQ0 {
    /// The full linear map `vec(ρ) ↦ vec(ρ̇)`.
    pub fn superoperator(&self) -> ComplexMatrix {
        let mut m = -self.coefficients.clone();
        for a in 0..DIM {
            for b in 0..DIM {
                let gap = self.quasienergies[a] - self.quasienergies[b];
                m[(pair(a, b), pair(a, b))] += C64::new(0.0, -gap);
            }
        }
        m
    }

    /// `ρ̇` for a Floquet-basis `ρ`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let v = ComplexVector::from_fn(DIM * DIM, |i, _| rho[(i / DIM, i % DIM)]);
        let out = self.superoperator() * v;
        ComplexMatrix::from_fn(DIM, DIM, |a, b| out[pair(a, b)])
    }

    /// `max |Σ_α [ℒ E_{α'β'}]_{αα}|` over basis matrices `E_{α'β'}`.
    pub fn trace_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for col in 0..DIM * DIM {
            let s: C64 = (0..DIM).map(|a| self.coefficients[(pair(a, a), col)]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }
}

/// `ℒ_{αβ,α'β'} = δ_ββ' Σ_η R_{ηη,α'α} + δ_αα' Σ_η R*_{ηη,β'β}
///  − R_{αβ,α'β'} − R*_{βα,β'α'}`.
pub fn generator_q0(r: &RateTensor, quasienergies: [f64; DIM]) -> Result<GeneratorQ0> {
    // Σ_η R_{ηη,xy}
    let mut out_rate = [[C64::new(0.0, 0.0); DIM]; DIM];
    for (x, row) in out_rate.iter_mut().enumerate() {
        for (y, slot) in row.iter_mut().enumerate() {
            *slot = (0..DIM).map(|eta| r[eta][eta][x][y]).sum();
        }
    }
    let mut l = ComplexMatrix::zeros(DIM * DIM, DIM * DIM);
    for a in 0..DIM {
        for b in 0..DIM {
            for ap in 0..DIM {
                for bp in 0..DIM {
                    let mut v = -r[a][b][ap][bp] - r[b][a][bp][ap].conj();
                    if b == bp {
                        v += out_rate[ap][a];
                    }
                    if a == ap {
                        v += out_rate[bp][b].conj();
                    }
                    l[(pair(a, b), pair(ap, bp))] = v;
                }
            }
        }
    }
    let generator = GeneratorQ0 {
        quasienergies,
        coefficients: l,
    };
    let defect = generator.trace_defect();
    let scale = generator.coefficients.norm().max(f64::MIN_POSITIVE);
    if defect > 1e-10 * scale.max(1.0) {
        return Err(Error::TraceLeak { defect });
    }
    Ok(generator)
}

/// Convenience: thermal table, transition elements, tensor and generator for
/// one solution.
pub fn build_generator(sol: &FloquetSolution, b: &BathParams) -> Result<GeneratorQ0> {
    b.validate()?;
    let a = transition_elements(sol, &b.coupling_op())?;
    let g = thermal_table(sol, b, a.kmax);
    generator_q0(&rate_tensor(&g, &a), sol.quasienergies)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateBasis {
    Floquet,
    Eigenstate,
    Effective,
}

/// Pairwise rates `Γ_αβ` (into `α` from `β`) with their photon-resolved
/// parts `Γ^{(n)}_αβ`. Diagonal entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub basis: RateBasis,
    pub rates: [[f64; DIM]; DIM],
    /// `per_photon[n + nmax]`.
    pub per_photon: Vec<[[f64; DIM]; DIM]>,
    pub nmax: usize,
}

impl RateTable {
    fn from_photons(basis: RateBasis, nmax: usize, per_photon: Vec<[[f64; DIM]; DIM]>) -> Self {
        let mut rates = [[0.0; DIM]; DIM];
        for table in &per_photon {
            for (a, row) in rates.iter_mut().enumerate() {
                for (b, slot) in row.iter_mut().enumerate() {
                    *slot += table[a][b];
                }
            }
        }
        Self {
            basis,
            rates,
            per_photon,
            nmax,
        }
    }

    pub fn rate(&self, into: usize, from: usize) -> f64 {
        self.rates[into][from]
    }

    pub fn photon(&self, into: usize, from: usize, n: i64) -> f64 {
        let idx = n + self.nmax as i64;
        if idx < 0 {
            return 0.0;
        }
        self.per_photon.get(idx as usize).map_or(0.0, |t| t[into][from])
    }

    /// `Σ_{αβ} Γ_αβ`.
    pub fn total(&self) -> f64 {
        self.rates.iter().flatten().sum()
    }
}

/// Secular Floquet rates `Γ^{(n)}_αβ = 2π g(γ_α − γ_β − nω) |A^n_αβ|²`.
pub fn floquet_rates(g_table: &SidebandTable<f64>, a_table: &SidebandTable<C64>) -> RateTable {
    let nmax = g_table.kmax.min(a_table.kmax);
    let per_photon = (-(nmax as i64)..=nmax as i64)
        .map(|n| {
            let mut t = [[0.0; DIM]; DIM];
            for (a, row) in t.iter_mut().enumerate() {
                for (b, slot) in row.iter_mut().enumerate() {
                    if a != b {
                        *slot = TAU * g_table.get(a, b, n) * a_table.get(a, b, n).norm_sqr();
                    }
                }
            }
            t
        })
        .collect();
    RateTable::from_photons(RateBasis::Floquet, nmax, per_photon)
}

/// Secular Floquet rates straight from a solution.
pub fn floquet_rates_for(sol: &FloquetSolution, b: &BathParams) -> Result<RateTable> {
    b.validate()?;
    let a = transition_elements(sol, &b.coupling_op())?;
    let g = thermal_table(sol, b, a.kmax);
    Ok(floquet_rates(&g, &a))
}

/// Golden-rule rates between `H₀` eigenstates,
/// `Γ_kl = 2π g(E_k − E_l) |⟨l|𝒜|k⟩|²`.
pub fn fgr_rates(eig: &EigenSystem, coupling: &ComplexMatrix, b: &BathParams) -> Result<RateTable> {
    check_hermitian(coupling)?;
    let mut t = [[0.0; DIM]; DIM];
    for (k, row) in t.iter_mut().enumerate() {
        for (l, slot) in row.iter_mut().enumerate() {
            if k != l {
                let element = eig.state(l).dotc(&(coupling * eig.state(k)));
                *slot = TAU * thermal_weight(eig.energies[k] - eig.energies[l], b) * element.norm_sqr();
            }
        }
    }
    Ok(RateTable::from_photons(RateBasis::Eigenstate, 0, vec![t]))
}

/// First-order closed forms for the five decay channels `1←2`, `0←1`,
/// `1←3`, `0←2` and `2←3`, written for states `s0, e−, e+, s1` and mapped to
/// energy indices (which swaps 1 and 2 for `J > 0`), always in the downhill
/// direction. Thermal weights use the
/// exact `H₀` energies; all other entries are zero.
pub fn fgr_rates_perturbative(p: &ModelParams, b: &BathParams) -> Result<RateTable> {
    b.validate()?;
    // validates the perturbative regime
    model::perturbative_eigenstates(p)?;
    let eig = model::diagonalize_h0(p)?;
    let (dp, dm) = p.delta_pm();
    let lo = p.eps0 + p.coupling / 2.0;
    let hi = p.eps0 - p.coupling / 2.0;
    let (sym, anti) = (1.0 + b.xi, 1.0 - b.xi);
    use StateLabel::*;
    let channels = [
        (EMinus, EPlus, anti + 2.0 * sym * dm * dp / (lo * hi)),
        (S0, EMinus, anti * dp / hi + sym * dm / lo),
        (EMinus, S1, anti * dp / lo + sym * dm / hi),
        (S0, EPlus, sym * dp / hi + anti * dm / lo),
        (EPlus, S1, sym * dp / lo + anti * dm / hi),
    ];
    let mut t = [[0.0; DIM]; DIM];
    for (into, from, amplitude) in channels {
        // each channel is a decay; for J > 0 the singlet lies above e+
        let (a, c) = (eig.index_of(into), eig.index_of(from));
        let (k, l) = (a.min(c), a.max(c));
        let weight = thermal_weight(eig.energies[k] - eig.energies[l], b);
        t[k][l] = TAU * weight * b.gamma1 * b.gamma1 * amplitude * amplitude;
    }
    Ok(RateTable::from_photons(RateBasis::Eigenstate, 0, vec![t]))
}

/// Effective rates between eigenstates of a driven system,
/// `Γ̄_ij = Σ_αβ |⟨i|u_α(0)⟩|² |⟨u_β(0)|j⟩|² Γ_αβ`, applied photon by photon.
pub fn effective_rates(rates: &RateTable, sol: &FloquetSolution, eig: &EigenSystem) -> RateTable {
    let mut w = [[0.0; DIM]; DIM];
    for (i, row) in w.iter_mut().enumerate() {
        for (alpha, slot) in row.iter_mut().enumerate() {
            *slot = eig.state(i).dotc(&sol.mode0(alpha)).norm_sqr();
        }
    }
    let per_photon = rates
        .per_photon
        .iter()
        .map(|g| {
            let mut t = [[0.0; DIM]; DIM];
            for (i, row) in t.iter_mut().enumerate() {
                for (j, slot) in row.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for a in 0..DIM {
                        for bb in 0..DIM {
                            s += w[i][a] * w[j][bb] * g[a][bb];
                        }
                    }
                    *slot = s;
                }
            }
            t
        })
        .collect();
    RateTable::from_photons(RateBasis::Effective, rates.nmax, per_photon)
}

/// Roots of `f` on `[lo, hi]`: sign changes on a `scan`-point grid, each
/// refined by bisection to `tol`.
pub fn find_crossings(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, scan: usize, tol: f64) -> Result<Vec<f64>> {
    let scan = scan.max(2);
    let xs: Vec<f64> = (0..scan).map(|i| lo + (hi - lo) * i as f64 / (scan - 1) as f64).collect();
    let mut values = Vec::with_capacity(scan);
    for &x in &xs {
        values.push(f(x)?);
    }
    let mut roots = Vec::new();
    for i in 0..scan - 1 {
        let (mut a, mut b) = (xs[i], xs[i + 1]);
        let (mut fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        while b - a > tol {
            let m = 0.5 * (a + b);
            let fm = f(m)?;
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    Ok(roots)
}

/// `ξ_c` candidates in `[0, 1]` where `Γ_{1←2} = Γ_{0←2}` for the rates
/// produced by `rates_at(ξ)` (indices in energy order).
pub fn xi_crossover(mut rates_at: impl FnMut(f64) -> Result<RateTable>) -> Result<Vec<f64>> {
    find_crossings(
        |xi| {
            let t = rates_at(xi)?;
            Ok(t.rate(1, 2) - t.rate(0, 2))
        },
        0.0,
        1.0,
        101,
        1e-9,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{self, solve_floquet, solve_floquet_auto};
    use crate::model::DriveParams;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    /// Elementwise relative agreement, except that entries many orders of
    /// magnitude below the largest rate (thermally forbidden absorption,
    /// `~e^{-E/T}`) only need to be negligible in both tables.
    fn tables_agree(x: &RateTable, y: &RateTable, tol: f64) -> bool {
        let floor = 1e-12 * x.rates.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
        (0..DIM).all(|a| {
            (0..DIM).all(|b| {
                let (u, v) = (x.rate(a, b), y.rate(a, b));
                (u <= floor && v <= floor) || rel(u, v) < tol
            })
        })
    }

    fn labelled(p: &ModelParams, a: f64) -> FloquetSolution {
        solve_floquet_auto(p, &DriveParams::new(a, p.omega), floquet::DEFAULT_TOL)
            .unwrap()
            .ordered_by_label()
    }

    #[test]
    fn spectral_density_cases() {
        let b = BathParams::default();
        assert_eq!(spectral_density(0.0, &b), 0.0);
        assert_eq!(spectral_density(-1.3, &b), -spectral_density(1.3, &b));
        assert!((spectral_density(1.0, &b) - 0.001 * (-0.1f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn thermal_weight_limits() {
        let b = BathParams::default();
        assert!(rel(thermal_weight(0.0, &b), b.kappa * b.temperature) < 1e-15);
        // continuity through the removable singularity
        assert!(rel(thermal_weight(1e-9, &b), b.kappa * b.temperature) < 1e-6);
        assert!(rel(thermal_weight(-1e-9, &b), b.kappa * b.temperature) < 1e-6);
        // direct formula where it does not overflow
        let hot = BathParams { temperature: 2.0, ..b };
        for w in [-3.0, -0.5, 0.7, 4.0] {
            let direct = spectral_density(w, &hot) / ((w / hot.temperature).exp() - 1.0);
            assert!(rel(thermal_weight(w, &hot), direct) < 1e-13);
        }
    }

    #[test]
    fn detailed_balance_in_log_space() {
        let b = BathParams::default();
        for w in [1e-3, 0.3, 1.0, 2.5, 7.9] {
            let ratio = log_thermal_weight(-w, &b) - log_thermal_weight(w, &b);
            assert!((ratio - w / b.temperature).abs() <= 4.0 * f64::EPSILON * (w / b.temperature).max(1.0));
        }
        // g(−1)/g(1) ≈ e^{214}: both sides finite in log space
        let ratio = log_thermal_weight(-1.0, &b) - log_thermal_weight(1.0, &b);
        assert!((ratio - 214.13).abs() < 0.01);
        assert!(thermal_weight(8.0, &b) == 0.0 || thermal_weight(8.0, &b) > 0.0);
    }

    #[test]
    fn transition_elements_static_limit() {
        let p = ModelParams::default();
        let sol = solve_floquet(&p, &DriveParams::new(0.0, 1.0), 8, 32).unwrap().ordered_by_label();
        let eig = model::diagonalize_h0(&p).unwrap();
        let op = BathParams::default().coupling_op();
        let a = transition_elements(&sol, &op).unwrap();
        for al in 0..DIM {
            for be in 0..DIM {
                let direct = eig.state(al).dotc(&(&op * eig.state(be))).norm();
                let mut found = 0.0;
                for k in a.orders() {
                    let v = a.get(al, be, k).norm();
                    if v > 1e-8 {
                        // folding puts each transition in a single sideband
                        assert_eq!(found, 0.0);
                        found = v;
                    }
                }
                assert!((found - direct).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn transition_elements_symmetry() {
        let p = ModelParams {
            eps0: 2.3,
            delta1: 0.4,
            delta2: 0.25,
            coupling: 1.1,
            omega: 1.0,
        };
        let sol = solve_floquet(&p, &DriveParams::new(1.7, 1.0), 14, 64).unwrap();
        let a = transition_elements(&sol, &model::build_coupling_op(0.8, 0.35)).unwrap();
        for k in a.orders() {
            for al in 0..DIM {
                for be in 0..DIM {
                    assert!((a.get(al, be, k).conj() - a.get(be, al, -k)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn transition_elements_match_time_average() {
        // A^K_αβ = (1/τ)∫ ⟨u_α(t)|𝒜|u_β(t)⟩ e^{iKωt} dt, by trapezoid on a
        // fine grid of Fourier-reconstructed modes
        let p = ModelParams::default();
        let sol = solve_floquet_auto(&p, &DriveParams::new(3.8, 1.0), floquet::DEFAULT_TOL).unwrap();
        let op = BathParams::default().coupling_op();
        let a = transition_elements(&sol, &op).unwrap();
        let n = 400;
        for (al, be, k) in [(0, 2, 0), (1, 2, 3), (2, 0, -4), (3, 1, 7)] {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                let t = sol.period() * j as f64 / n as f64;
                let v = sol.mode_at(al, t).dotc(&(&op * sol.mode_at(be, t)));
                acc += v * C64::from_polar(1.0, k as f64 * t);
            }
            acc /= n as f64;
            assert!((acc - a.get(al, be, k)).norm() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_hermitian_coupling() {
        let sol = solve_floquet(&ModelParams::default(), &DriveParams::new(0.0, 1.0), 4, 16).unwrap();
        let mut op = BathParams::default().coupling_op();
        op[(0, 1)] = C64::new(0.3, 0.0);
        assert!(matches!(transition_elements(&sol, &op), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn floquet_rates_reduce_to_golden_rule_without_drive() {
        let p = ModelParams::default();
        let b = BathParams::default();
        let sol = solve_floquet(&p, &DriveParams::new(0.0, 1.0), 8, 32).unwrap().ordered_by_label();
        let eig = model::diagonalize_h0(&p).unwrap();
        let fl = floquet_rates_for(&sol, &b).unwrap();
        let fgr = fgr_rates(&eig, &b.coupling_op(), &b).unwrap();
        assert!(tables_agree(&fgr, &fl, 1e-8), "{:?}\n{:?}", fgr.rates, fl.rates);
    }

    #[test]
    fn rate_table_sums_photons() {
        let p = ModelParams::default();
        let sol = labelled(&p, 3.8);
        let t = floquet_rates_for(&sol, &BathParams::default()).unwrap();
        for a in 0..DIM {
            for b in 0..DIM {
                let s: f64 = (-(t.nmax as i64)..=t.nmax as i64).map(|n| t.photon(a, b, n)).sum();
                assert!(rel(s, t.rate(a, b)) < 1e-12 || s == t.rate(a, b));
                for n in -(t.nmax as i64)..=t.nmax as i64 {
                    assert!(t.photon(a, b, n) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn rates_are_gauge_invariant() {
        let p = ModelParams::default();
        let b = BathParams::default();
        let sol = labelled(&p, 3.8);
        let base = floquet_rates_for(&sol, &b).unwrap();
        let shifted = floquet_rates_for(&sol.shift_zone(1, 2).shift_zone(3, -1), &b).unwrap();
        for a in 0..DIM {
            for c in 0..DIM {
                let (x, y) = (base.rate(a, c), shifted.rate(a, c));
                assert!(x == y || rel(x, y) < 1e-9);
            }
        }
    }

    #[test]
    fn rates_converge_in_kmax() {
        let p = ModelParams::default();
        let b = BathParams::default();
        let d = DriveParams::new(3.8, 1.0);
        let k = floquet::default_kmax(&d);
        let r1 = floquet_rates_for(&solve_floquet(&p, &d, k, floquet::default_samples(k)).unwrap(), &b).unwrap();
        let r2 =
            floquet_rates_for(&solve_floquet(&p, &d, 2 * k, floquet::default_samples(2 * k)).unwrap(), &b).unwrap();
        for a in 0..DIM {
            for c in 0..DIM {
                if r1.rate(a, c) > 1e-30 {
                    assert!(rel(r1.rate(a, c), r2.rate(a, c)) < 1e-6);
                }
            }
        }
    }

    #[test]
    fn tensor_population_block_is_nonnegative_real() {
        let p = ModelParams::default();
        let sol = labelled(&p, 3.8);
        let b = BathParams::default();
        let a = transition_elements(&sol, &b.coupling_op()).unwrap();
        let r = rate_tensor(&thermal_table(&sol, &b, a.kmax), &a);
        for al in 0..DIM {
            for be in 0..DIM {
                let v = r[al][al][be][be];
                assert!(v.im.abs() <= 1e-15 * v.re.abs().max(1e-300));
                assert!(v.re >= 0.0);
            }
        }
        // secular rates are the population block with the table prefactor
        let t = floquet_rates(&thermal_table(&sol, &b, a.kmax), &a);
        for al in 0..DIM {
            for be in 0..DIM {
                if al != be {
                    assert!(rel(t.rate(al, be), TAU * r[al][al][be][be].re) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity() {
        let p = ModelParams::default();
        let sol = labelled(&p, 3.8);
        let g = build_generator(&sol, &BathParams::default()).unwrap();
        assert!(g.trace_defect() < 1e-10 * g.coefficients.norm());
        let rho = ComplexMatrix::from_fn(DIM, DIM, |a, b| {
            let x = (a as f64 + 1.0) * 0.1 + (b as f64) * 0.03;
            if a == b {
                C64::new(x, 0.0)
            } else if a < b {
                C64::new(0.01 * x, 0.02 * x)
            } else {
                C64::new(0.01 * (b as f64 + 1.0) * 0.1 + 0.01 * (a as f64) * 0.03, 0.0)
            }
        });
        let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        let d = g.apply(&rho);
        assert!(numerics::hermiticity_defect(&d) < 1e-14);
        assert!(d.trace().norm() < 1e-14);
    }

    #[test]
    fn zero_coupling_gives_zero_generator() {
        let sol = labelled(&ModelParams::default(), 3.8);
        let b = BathParams {
            gamma1: 0.0,
            ..BathParams::default()
        };
        assert_eq!(build_generator(&sol, &b).unwrap().coefficients.norm(), 0.0);
    }

    #[test]
    fn symmetric_coupling_closes_the_singlet_channel() {
        let p = ModelParams {
            delta2: 0.1,
            ..ModelParams::default()
        };
        let b = BathParams::default().with_xi(1.0);
        let eig = model::diagonalize_h0(&p).unwrap();
        let fgr = fgr_rates(&eig, &b.coupling_op(), &b).unwrap();
        assert!(fgr.rate(1, 2) < 1e-25);
        let pert = fgr_rates_perturbative(&p, &b).unwrap();
        assert_eq!(pert.rate(1, 2), 0.0);
        let sol = solve_floquet(&p, &DriveParams::new(0.0, 1.0), 8, 32).unwrap().ordered_by_label();
        assert!(floquet_rates_for(&sol, &b).unwrap().rate(1, 2) < 1e-25);
        // the remaining decays into the ground state and from the top state
        let decays = [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)];
        let max = decays.iter().map(|&(k, l)| fgr.rate(k, l)).fold(0.0, f64::max);
        assert!(max == fgr.rate(0, 2) || max == fgr.rate(2, 3));
    }

    #[test]
    fn singlet_channel_dominates_for_one_sided_coupling() {
        let p = ModelParams::default();
        let b = BathParams::default().with_xi(0.0);
        let fgr = fgr_rates(&model::diagonalize_h0(&p).unwrap(), &b.coupling_op(), &b).unwrap();
        assert!(fgr.rate(1, 2) > 10.0 * fgr.rate(0, 2));
        assert!(fgr.rate(1, 2) > 10.0 * fgr.rate(2, 3));
    }

    #[test]
    fn decays_dominate_excitations_at_low_temperature() {
        let p = ModelParams::default();
        let b = BathParams::default();
        let fgr = fgr_rates(&model::diagonalize_h0(&p).unwrap(), &b.coupling_op(), &b).unwrap();
        for k in 0..DIM {
            for l in (k + 1)..DIM {
                assert!(fgr.rate(k, l) >= 0.0);
                assert!(fgr.rate(l, k) <= 1e-50 * fgr.rate(k, l).max(1e-300) || fgr.rate(l, k) == 0.0);
            }
        }
    }

    #[test]
    fn high_temperature_detailed_balance() {
        let p = ModelParams::default();
        let b = BathParams {
            temperature: 3.0,
            ..BathParams::default()
        };
        let eig = model::diagonalize_h0(&p).unwrap();
        let fgr = fgr_rates(&eig, &b.coupling_op(), &b).unwrap();
        for k in 0..DIM {
            for l in (k + 1)..DIM {
                let de = eig.energies[l] - eig.energies[k];
                assert!(rel(fgr.rate(k, l) / fgr.rate(l, k), (de / b.temperature).exp()) < 1e-12);
            }
        }
    }

    #[test]
    fn perturbative_rates_track_exact_golden_rule() {
        let p = ModelParams::default();
        let eig = model::diagonalize_h0(&p).unwrap();
        for xi in [0.0, 0.1, 0.5, 0.9] {
            let b = BathParams::default().with_xi(xi);
            let exact = fgr_rates(&eig, &b.coupling_op(), &b).unwrap();
            let pert = fgr_rates_perturbative(&p, &b).unwrap();
            for (k, l) in [(1, 2), (0, 1), (1, 3), (0, 2), (2, 3)] {
                assert!(rel(exact.rate(k, l), pert.rate(k, l)) < 0.05, "xi {xi} ({k},{l})");
            }
        }
    }

    #[test]
    fn perturbative_rates_swap_for_positive_exchange() {
        let p = ModelParams {
            coupling: 2.5,
            ..ModelParams::default()
        };
        let eig = model::diagonalize_h0(&p).unwrap();
        assert_eq!(eig.labels[1], StateLabel::EPlus);
        let b = BathParams::default();
        let exact = fgr_rates(&eig, &b.coupling_op(), &b).unwrap();
        let pert = fgr_rates_perturbative(&p, &b).unwrap();
        for (k, l) in [(1, 2), (0, 2), (2, 3), (0, 1), (1, 3)] {
            assert!(rel(exact.rate(k, l), pert.rate(k, l)) < 0.05, "({k},{l})");
        }
    }

    #[test]
    fn symmetric_limit_keeps_cross_term_only() {
        let p = ModelParams::default();
        let b = BathParams::default().with_xi(1.0);
        let eig = model::diagonalize_h0(&p).unwrap();
        let (dp, dm) = p.delta_pm();
        let cross = 4.0 * dm * dp / (p.eps0 * p.eps0 - p.coupling * p.coupling / 4.0);
        let want = TAU * thermal_weight(eig.energies[1] - eig.energies[2], &b) * cross * cross;
        assert!(rel(fgr_rates_perturbative(&p, &b).unwrap().rate(1, 2), want) < 1e-12);
    }

    #[test]
    fn golden_rule_crossover_is_unique() {
        let p = ModelParams::default();
        let eig = model::diagonalize_h0(&p).unwrap();
        let roots = xi_crossover(|xi| {
            let b = BathParams::default().with_xi(xi);
            fgr_rates(&eig, &b.coupling_op(), &b)
        })
        .unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0] > 0.0 && roots[0] < 1.0);
    }

    #[test]
    fn effective_rates_static_limit() {
        let p = ModelParams::default();
        let b = BathParams::default();
        let sol = solve_floquet(&p, &DriveParams::new(0.0, 1.0), 8, 32).unwrap().ordered_by_label();
        let eig = model::diagonalize_h0(&p).unwrap();
        let fl = floquet_rates_for(&sol, &b).unwrap();
        let eff = effective_rates(&fl, &sol, &eig);
        assert!(tables_agree(&fl, &eff, 1e-12));
    }

    #[test]
    fn effective_rates_bounded_by_total() {
        let p = ModelParams::default();
        let sol = labelled(&p, 3.8);
        let eig = model::diagonalize_h0(&p).unwrap();
        let fl = floquet_rates_for(&sol, &BathParams::default()).unwrap();
        let eff = effective_rates(&fl, &sol, &eig);
        for i in 0..DIM {
            let row: f64 = eff.rates[i].iter().sum();
            assert!(row <= fl.total() * (1.0 + 1e-12));
        }
        assert!(rel(eff.total(), fl.total()) < 1e-10);
    }

    #[test]
    fn find_crossings_on_polynomial() {
        let roots = find_crossings(|x| Ok((x - 0.25) * (x - 0.73)), 0.0, 1.0, 11, 1e-12).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - 0.25).abs() < 1e-11 && (roots[1] - 0.73).abs() < 1e-11);
    }
}
