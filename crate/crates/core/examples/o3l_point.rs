//! Steady state at one parameter point.
//!
//!     cargo run --example o3l_point -- 3.7 3.8 0.1 -2.5
//!
//! Arguments: eps0, A, xi, J (all in units of the drive frequency).

use floquet_qubits::bath::{floquet_rates_for, BathParams};
use floquet_qubits::dynamics::{build_generator, period_average, steady_state, to_basis, Basis, GeneratorFlavor};
use floquet_qubits::entanglement::concurrence;
use floquet_qubits::floquet::{label_floquet_states, solve_floquet_auto, DEFAULT_RAMP_STEPS, DEFAULT_TOL};
use floquet_qubits::model::{diagonalize_h0, DriveParams, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let [eps0, a, xi, j] = args[..] else {
        return Err("usage: o3l_point EPS0 A XI J".into());
    };
    let p = ModelParams {
        eps0,
        coupling: j,
        ..ModelParams::default()
    };
    let d = DriveParams::new(a, p.omega);
    let eig = diagonalize_h0(&p)?;
    let sol = solve_floquet_auto(&p, &d, DEFAULT_TOL)?;
    let labels = label_floquet_states(&p, &sol, &eig, &d, DEFAULT_RAMP_STEPS)?;
    let sol = sol.with_labels(labels).ordered_by_label();
    let b = BathParams::default().with_xi(xi);

    let rho = steady_state(&build_generator(&sol, &b, GeneratorFlavor::Full)?, &sol)?;
    let c = concurrence(&period_average(&rho, &sol)?)?.value;
    let pops = to_basis(&rho, Basis::Eigenstate, &sol, &eig, 0.0).diagonal();
    println!("C_inf = {c:.4}");
    println!("P_k   = {:.4?}", pops);
    let rates = floquet_rates_for(&sol, &b)?;
    println!("Gamma_12 = {:.3e}, Gamma_02 = {:.3e}", rates.rate(1, 2), rates.rate(0, 2));
    Ok(())
}
