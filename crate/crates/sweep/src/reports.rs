use floquet_qubits::bath::{self, RateTable};
use floquet_qubits::dynamics::{self, DensityMatrix, Basis};
use floquet_qubits::entanglement::{concurrence, concurrence_trace};
use floquet_qubits::model::{self, DIM};
use floquet_qubits::{numerics, Result};

use crate::config::{Axis, AxisName, ConfigError, RunConfig};
use crate::output::{Cell, Table};
use crate::point::{prepare, Prepared};

/// Channels reported by the rate tables, as `(into, from)` energy indices.
pub const CHANNELS: [(usize, usize); 5] = [(1, 2), (0, 2), (2, 3), (0, 1), (1, 3)];

pub const RATE_BASES: [&str; 4] = ["pert", "fgr", "eff", "floquet"];

/// The line-scan axis of a report: the configured `x` axis, which must be
/// `want`, or the default range with 101 points.
fn line_axis(cfg: &RunConfig, want: AxisName) -> Result<Axis, ConfigError> {
    if cfg.y.is_some() {
        return Err(ConfigError::Invalid("this product takes a single sweep axis".into()));
    }
    match cfg.x {
        Some(a) if a.name == want => Ok(a),
        Some(a) => Err(ConfigError::Invalid(format!("this product sweeps {want}, not {}", a.name))),
        None => {
            let (min, max) = match want {
                AxisName::Xi => (0.0, 1.0),
                _ => (0.0, 5.0),
            };
            Ok(Axis {
                name: want,
                min,
                max,
                steps: 101,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatesReport {
    pub table: Table,
    /// `ξ_c` roots on `[0, 1]` per basis, or the error that prevented them.
    pub crossovers: Vec<(&'static str, std::result::Result<Vec<f64>, String>)>,
}

impl RatesReport {
    pub fn crossover_table(&self) -> Table {
        let mut t = Table::new(["basis", "roots", "xi_c", "all_roots", "error"]);
        for (basis, res) in &self.crossovers {
            let row = match res {
                Ok(roots) => vec![
                    Cell::Text(basis.to_string()),
                    Cell::Int(roots.len() as i64),
                    Cell::Num(roots.first().copied().unwrap_or(f64::NAN)),
                    Cell::Text(roots.iter().map(|r| format!("{r:.16e}")).collect::<Vec<_>>().join(" ")),
                    Cell::Text(String::new()),
                ],
                Err(e) => vec![
                    Cell::Text(basis.to_string()),
                    Cell::Int(0),
                    Cell::Num(f64::NAN),
                    Cell::Text(String::new()),
                    Cell::Text(e.clone()),
                ],
            };
            t.push(row);
        }
        t
    }

    pub fn failures(&self) -> usize {
        self.table.error_rows() + self.crossovers.iter().filter(|(_, r)| r.is_err()).count()
    }
}

/// Rate tables of one `ξ` in every basis, sharing a single Floquet solution.
struct RateSources<'a> {
    cfg: &'a RunConfig,
    prep: std::result::Result<Prepared, String>,
}

impl RateSources<'_> {
    fn at(&self, basis: &str, xi: f64) -> Result<RateTable> {
        let b = self.cfg.bath.with_xi(xi);
        let prep = self
            .prep
            .as_ref()
            .map_err(|e| floquet_qubits::Error::InvalidParameter(e.clone()))?;
        match basis {
            "pert" => bath::fgr_rates_perturbative(&prep.model, &b),
            "fgr" => bath::fgr_rates(&prep.eig, &b.coupling_op(), &b),
            "eff" => Ok(bath::effective_rates(&prep.rates(&b)?, &prep.sol, &prep.eig)),
            _ => prep.rates(&b),
        }
    }
}

/// Rates of the main decay channels against `ξ`: first-order closed forms,
/// exact golden rule between `H₀` eigenstates, effective eigenstate rates of
/// the driven system, and Floquet rates.
pub fn rates_report(cfg: &RunConfig) -> Result<RatesReport, ConfigError> {
    let axis = line_axis(cfg, AxisName::Xi)?;
    let src = RateSources {
        cfg,
        prep: prepare(cfg).map_err(|e| e.to_string()),
    };
    let mut header = vec!["xi".to_string()];
    for basis in RATE_BASES {
        for (i, f) in CHANNELS {
            header.push(format!("{basis}_{i}{f}"));
        }
    }
    header.push("error".into());
    let mut table = Table::new(header);
    for xi in axis.values() {
        let mut row = vec![Cell::Num(xi)];
        let mut errors = Vec::new();
        for basis in RATE_BASES {
            match src.at(basis, xi) {
                Ok(t) => row.extend(CHANNELS.iter().map(|&(i, f)| Cell::Num(t.rate(i, f)))),
                Err(e) => {
                    row.extend(CHANNELS.iter().map(|_| Cell::Num(f64::NAN)));
                    errors.push(format!("{basis}: {e}"));
                }
            }
        }
        row.push(Cell::Text(errors.join("; ")));
        table.push(row);
    }
    let crossovers = RATE_BASES
        .iter()
        .map(|&basis| (basis, bath::xi_crossover(|xi| src.at(basis, xi)).map_err(|e| e.to_string())))
        .collect();
    Ok(RatesReport { table, crossovers })
}

/// Stroboscopic instants: every `stride` periods up to `horizon`, or about
/// `log_points` logarithmically spaced ones (plus `t = 0`).
pub fn trace_instants(horizon: u64, stride: u64, log_points: usize) -> Vec<u64> {
    if log_points == 0 {
        return (0..=horizon / stride).map(|m| m * stride).collect();
    }
    let mut out = vec![0];
    let top = (horizon as f64).ln();
    for i in 0..log_points {
        let f = if log_points == 1 { 1.0 } else { i as f64 / (log_points - 1) as f64 };
        out.push((f * top).exp().round() as u64);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// `P_k(t)` on the `H₀` eigenstates and `C(t)` at stroboscopic instants,
/// starting from the ground state of `H₀`.
pub fn trace_report(cfg: &RunConfig) -> Result<Table, ConfigError> {
    if cfg.x.is_some() {
        return Err(ConfigError::Invalid("trace runs at a single point; remove the sweep axes".into()));
    }
    let mut table = Table::new(["t_over_tau", "P0", "P1", "P2", "P3", "C", "error"]);
    let n = &cfg.numerics;
    let instants = trace_instants(n.horizon, n.stride, n.log_points);
    let run = || -> Result<Vec<Vec<Cell>>> {
        let prep = prepare(cfg)?;
        let generator = dynamics::build_generator(&prep.sol, &cfg.bath, n.flavor)?;
        let rho0 = dynamics::initial_state(&prep.eig, &prep.sol);
        let rec = dynamics::evolve_at(&generator, &prep.sol, &prep.eig, &rho0, &instants)?;
        let c = concurrence_trace(&rec)?;
        Ok((0..rec.len())
            .map(|i| {
                let mut row = vec![Cell::Num(rec.times[i])];
                row.extend(rec.populations[i].iter().map(|&p| Cell::Num(p)));
                row.push(Cell::Num(c[i].1));
                row.push(Cell::Text(String::new()));
                row
            })
            .collect())
    };
    match run() {
        Ok(rows) => rows.into_iter().for_each(|r| table.push(r)),
        Err(e) => {
            let mut row = vec![Cell::Num(f64::NAN); DIM + 2];
            row.push(Cell::Text(e.to_string()));
            table.push(row);
        }
    }
    Ok(table)
}

/// `H₀` eigenenergies against `ε₀`, with the concurrence of the ground state.
/// The drive plays no part.
pub fn spectrum_report(cfg: &RunConfig) -> Result<Table, ConfigError> {
    let axis = line_axis(cfg, AxisName::Eps0)?;
    let mut table = Table::new(["eps0", "E0", "E1", "E2", "E3", "C_ground"]);
    for eps0 in axis.values() {
        let p = model::ModelParams { eps0, ..cfg.model };
        // direct eigensolve: exact crossings are fine here
        let eig = numerics::hermitian_eig(&model::build_h0(&p)).expect("H0 is Hermitian");
        let ground = eig.vectors.column(0).into_owned();
        let rho = DensityMatrix::new(model::projector(&ground), Basis::Computational, 0.0);
        let c = concurrence(&rho).map_or(f64::NAN, |r| r.value);
        let mut row = vec![Cell::Num(eps0)];
        row.extend(eig.values.iter().map(|&e| Cell::Num(e)));
        row.push(Cell::Num(c));
        table.push(row);
    }
    Ok(table)
}
