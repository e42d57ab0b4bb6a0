use floquet_qubits::bath::{self, BathParams, RateTable};
use floquet_qubits::dynamics::{self, Basis};
use floquet_qubits::entanglement::concurrence;
use floquet_qubits::floquet::{self, FloquetSolution};
use floquet_qubits::model::{self, DriveParams, EigenSystem, ModelParams, DIM};
use floquet_qubits::{Error, Result};

use crate::config::RunConfig;

/// Quasienergy gaps below this are reported as a near-degenerate
/// (multiphoton-resonant) point.
pub const RESONANCE_GAP: f64 = 1e-3;

/// Everything a point needs before a bath is attached. Independent of `ξ`.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub model: ModelParams,
    pub drive: DriveParams,
    pub eig: EigenSystem,
    /// Floquet states ordered so that state `α` continues to eigenstate `α`.
    pub sol: FloquetSolution,
    /// Amplitude tracking failed and overlap labels at full drive were used.
    pub tracking_fallback: bool,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let (p, d) = (cfg.model, cfg.drive);
    let n = &cfg.numerics;
    let eig = model::diagonalize_h0(&p)?;
    let sol = match n.kmax {
        Some(k) => floquet::solve_floquet_with_tol(&p, &d, k, floquet::default_samples(k), n.tol)?,
        None => floquet::solve_floquet_auto(&p, &d, n.tol)?,
    };
    let (labels, tracking_fallback) = match floquet::label_floquet_states(&p, &sol, &eig, &d, n.ramp_steps) {
        Ok(l) => (l, false),
        Err(Error::AmbiguousTracking { .. }) => (sol.labels, true),
        Err(e) => return Err(e),
    };
    let sol = sol.with_labels(labels).ordered_by_label();
    Ok(Prepared {
        model: p,
        drive: d,
        eig,
        sol,
        tracking_fallback,
    })
}

impl Prepared {
    /// Smallest distance between two quasienergies, modulo `ω`.
    pub fn min_gap(&self) -> f64 {
        let q = &self.sol.quasienergies;
        let mut gap = f64::INFINITY;
        for a in 0..DIM {
            for b in (a + 1)..DIM {
                gap = gap.min(floquet::zone_distance(q[a], q[b], self.sol.omega));
            }
        }
        gap
    }

    pub fn rates(&self, b: &BathParams) -> Result<RateTable> {
        bath::floquet_rates_for(&self.sol, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Steady {
    /// Period-averaged concurrence `C_∞`.
    pub concurrence: f64,
    /// Stroboscopic populations of the `H₀` eigenstates.
    pub populations: [f64; DIM],
}

pub fn steady(prep: &Prepared, cfg: &RunConfig) -> Result<Steady> {
    let generator = dynamics::build_generator(&prep.sol, &cfg.bath, cfg.numerics.flavor)?;
    let rho = dynamics::steady_state(&generator, &prep.sol)?;
    let averaged = dynamics::period_average(&rho, &prep.sol)?;
    let c = concurrence(&averaged)?.value;
    let populations = dynamics::to_basis(&rho, Basis::Eigenstate, &prep.sol, &prep.eig, 0.0).diagonal();
    Ok(Steady {
        concurrence: c,
        populations,
    })
}

/// One evaluated point. Quantities that could not be computed are NaN and
/// `error` says why.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub eps0: f64,
    pub amplitude: f64,
    pub xi: f64,
    pub coupling: f64,
    pub concurrence: f64,
    pub populations: [f64; DIM],
    /// Floquet rates `Γ_{1←2}`, `Γ_{0←2}`, `Γ_{2←3}`.
    pub gamma_12: f64,
    pub gamma_02: f64,
    pub gamma_23: f64,
    pub min_gap: f64,
    pub near_resonance: bool,
    pub tracking_fallback: bool,
    pub error: Option<String>,
}

impl PointRecord {
    fn blank(cfg: &RunConfig) -> Self {
        Self {
            eps0: cfg.model.eps0,
            amplitude: cfg.drive.amplitude,
            xi: cfg.bath.xi,
            coupling: cfg.model.coupling,
            concurrence: f64::NAN,
            populations: [f64::NAN; DIM],
            gamma_12: f64::NAN,
            gamma_02: f64::NAN,
            gamma_23: f64::NAN,
            min_gap: f64::NAN,
            near_resonance: false,
            tracking_fallback: false,
            error: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs the full chain for one parameter point. Never fails: errors land in
/// the record.
pub fn run_point(cfg: &RunConfig) -> PointRecord {
    let mut rec = PointRecord::blank(cfg);
    let prep = match prepare(cfg) {
        Ok(p) => p,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.min_gap = prep.min_gap();
    rec.near_resonance = rec.min_gap < RESONANCE_GAP;
    rec.tracking_fallback = prep.tracking_fallback;
    let outcome = prep.rates(&cfg.bath).and_then(|r| {
        rec.gamma_12 = r.rate(1, 2);
        rec.gamma_02 = r.rate(0, 2);
        rec.gamma_23 = r.rate(2, 3);
        steady(&prep, cfg)
    });
    match outcome {
        Ok(s) => {
            rec.concurrence = s.concurrence;
            rec.populations = s.populations;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}
