//! Subexponential tail asymptotics for the running maximum of negatively
//! driven processes.
//!
//! The crate covers three process classes with heavy-tailed jumps:
//! random walks, compound renewal processes with linear drift, and
//! jump-diffusion Lévy processes. For each it provides
//!
//! * exact path simulation with exact running maxima ([`simulate`]),
//! * closed-form and quadrature evaluation of the tail asymptotics of the
//!   maximum and of ruin probabilities ([`asymptotics`]),
//! * crude Monte Carlo estimation, single-big-jump event detection and
//!   formula-vs-simulation comparison ([`montecarlo`]),
//! * numerical diagnostics of the tail classes involved ([`tailmath`]).

pub mod asymptotics;
pub mod dist;
pub mod error;
pub mod montecarlo;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod tailmath;

pub use asymptotics::{AsymptoticEstimate, EstimateFlags, FormulaId, TailKernel};
pub use dist::{FamilyKind, HeavyDistribution, IntegratedTail, TailClasses};
pub use error::{Error, Result};
pub use montecarlo::{BigJumpParams, MCEstimate, Statistic};
pub use rng::RandomStream;
pub use simulate::{PathResult, ProcessSpec};
