//! Error mitigation by quasi-probability sampling, and gauge choices that
//! reduce its overhead.

pub mod gauge_opt;
pub mod pec;
pub mod quasiprob;

pub use gauge_opt::{gauge_optimize, gauge_optimize_two_step, GaugeOptResult, GaugeProblem};
pub use pec::{mitigated_expectation, pec_expectation_exact, pec_expectation_with_plan, pec_sample, PecConfig, PecEstimate};
pub use quasiprob::{inverse_quasiprob_dense, inverse_quasiprob_factored, ChannelInverse, PlanMode, QuasiProbPlan};
