//! Steady-state entanglement of two driven, dissipative qubits.
//!
//! A strong ac drive on the common detuning of two exchange-coupled qubits,
//! combined with relaxation into a shared Ohmic bath, can hold the pair in an
//! entangled state. This crate computes that steady state:
//!
//! - [`model`]: static Hamiltonian, drive and bath coupling operator;
//! - [`floquet`]: Floquet states and quasienergies of the driven problem;
//! - [`bath`]: thermal weights, transition rates and the master-equation
//!   generator in the Floquet basis;
//! - [`dynamics`]: steady state and stroboscopic time evolution;
//! - [`entanglement`]: Wootters' concurrence;
//! - [`numerics`]: the small dense linear-algebra kernel underneath.
//!
//! ```
//! use floquet_qubits::model::{diagonalize_h0, ModelParams, StateLabel};
//!
//! let eig = diagonalize_h0(&ModelParams::default())?;
//! assert!(eig.labels[1].is_entangled());
//! # Ok::<(), floquet_qubits::Error>(())
//! ```

pub mod bath;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod floquet;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};

// Code blocks in the guide run as doc tests of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/floquet.md")]
    mod floquet {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/steady-state.md")]
    mod steady_state {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/reproducing.md")]
    mod reproducing {}
}
