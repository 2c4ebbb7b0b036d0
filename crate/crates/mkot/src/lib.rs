//! Exact-rational discrete optimal transport.
//!
//! Solves the discrete Monge–Kantorovich problem — minimize the expected cost
//! over transport plans with prescribed marginals — with costs in
//! `[0, +inf]`, where `+inf` marks forbidden arcs. Everything is exact
//! `BigRational` arithmetic: the primal simplex, the Kantorovich dual,
//! cyclical-monotonicity checks, optimality certificates, and the penalized
//! relaxation of the transport functional are all tolerance-free.
//!
//! Module map:
//! - [`ext`]: extended rationals (`[0,∞]` costs, `[-∞,∞)` potentials);
//! - [`instance`]: problem instances, plans, potentials, signed couplings;
//! - [`solver`]: exact primal solver, brute-force coupling enumeration,
//!   finite feasibility, vertex enumeration;
//! - [`duality`]: dual potentials, dual equality, complementary slackness;
//! - [`monotonicity`]: cyclical monotonicity, strong/weak certificates,
//!   essential arcs, certificate spread;
//! - [`relaxation`]: penalized relaxed functional, its sweep in the penalty
//!   parameter, approximate necessary certificates;
//! - [`fixtures`]: reproducible example instances;
//! - [`textio`]: plain-text instance and report formats used by the CLI.

#![forbid(unsafe_code)]

pub mod duality;
mod error;
pub mod ext;
pub mod fixtures;
pub mod instance;
mod lp;
pub mod monotonicity;
pub mod relaxation;
mod simplex;
pub mod solver;
pub mod textio;

pub use error::Error;
pub use ext::{ExtRat, PotVal, Rat};
pub use instance::{Instance, Plan, Potentials, SignedCoupling};
