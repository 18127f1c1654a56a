//! Core solvers for minimizing the probability and severity of lifetime ruin.
//!
//! An individual consumes at a constant rate `c`, invests in a riskless asset
//! earning `r` and a risky asset with drift `mu` and volatility `sigma`, and
//! dies at an exponential time with hazard rate `lambda`. This crate computes,
//! in closed or semi-closed form, the minimized values and optimal investment
//! strategies for four objectives:
//!
//! * [`lifetime_ruin`]: probability that wealth ever falls to a level `x`
//!   before death;
//! * [`ruin_at_death`]: probability that wealth at death is at or below `x`,
//!   regularized by an outer absorbing level below `x`;
//! * [`shortfall`]: expected shortfall of lifetime minimum wealth below `x`,
//!   and general penalty functionals of the minimum;
//! * [`shortfall_at_death`]: expected shortfall of wealth at death below `x`.
//!
//! The [`no_borrow`] module re-solves the first and third problems under the
//! constraint that the investor can neither short the riskless asset nor the
//! risky one (`0 <= pi <= max(0, w)`).
//!
//! The two death-conditioned problems are solved through a convex dual: the
//! nonlinear HJB equation linearizes in the dual variable `y = -(value)'(w)`,
//! leaving either a two-parameter power curve ([`ruin_at_death::DualCurve`])
//! or a linear ODE integrated by shooting ([`shortfall_at_death::solve_U`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); disable default features
//! and enable `libm` for builds without the standard library.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("ruinkit-core requires either the `std` or the `libm` feature");

mod fm;

pub mod error;
pub mod lifetime_ruin;
pub mod market;
pub mod no_borrow;
pub mod numerics;
pub mod ruin_at_death;
pub mod shortfall;
pub mod shortfall_at_death;
pub mod strategy;

pub use error::{Error, Result};
pub use lifetime_ruin::{min_wealth_cdf, pi_psi, psi};
pub use market::{derive_constants, DerivedConstants, MarketParams, NegativeWealthMode, ProblemSpec};
pub use no_borrow::{
    pi_nb, psi_nb, solve_psi_nb, value_f_nb, value_shortfall_nb, BandProfile,
    ConstrainedOdeBasis, NoBorrowCase, NoBorrowSolution,
};
pub use ruin_at_death::{
    phi, pi_phi, solve_boundaries, solve_ratio_equation, DualCurve, RuinAtDeathSolution,
};
pub use shortfall::{pi_V, value_f, value_shortfall, PenaltyFunction};
pub use shortfall_at_death::{pi_U, solve_U, ShootingSolution, U_value};
pub use strategy::{Regime, Strategy};
