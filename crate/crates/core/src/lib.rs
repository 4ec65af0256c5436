//! Cascading failures in financial cross-holdings networks.
//!
//! Organizations hold shares of one another and of outside assets. Equity
//! follows a discrete-time switched affine map: cross-holding income plus
//! asset income, minus a failure cost that switches on whenever an
//! organization's equity sits below its failure threshold. This crate
//! provides:
//!
//! - [`model`]: the validated network description and failure indicator;
//! - [`dynamics`]: the step map, price signals with shock windows, full
//!   simulations, and convergence detection;
//! - [`equilibria`]: per-orthant equilibrium candidates, exhaustive
//!   enumeration for small networks, regime classification, failure-count
//!   bounds, and a no-all-fail certificate;
//! - [`sign_iteration`]: the monotone sign-space iteration that brackets
//!   the long-run outcome between worst and best cases in at most n+1
//!   steps, at any network size;
//! - [`scenario`]: the text format for scenario files and the bundled
//!   example datasets;
//! - [`export`]: CSV/JSON trajectory dumps and DOT/JSON topology
//!   snapshots;
//! - [`numerics`]: the small dense-matrix kernel behind all of the above;
//! - [`rng`]: the pinned generator that makes seeded scenarios
//!   bit-reproducible.

pub mod dynamics;
pub mod equilibria;
pub mod export;
pub mod model;
pub mod numerics;
pub mod rng;
pub mod scenario;
pub mod sign_iteration;

pub use dynamics::{simulate, step, PriceSignal, Trajectory};
pub use equilibria::{
    classify_regime, enumerate_equilibria, no_all_fail_certificate, orthant_equilibrium, translate,
    OrthantEquilibrium, RegimeReport, TranslatedSystem,
};
pub use export::{topology_dot, topology_json, topology_snapshot, trajectory_csv, trajectory_json};
pub use model::{failure_indicator, EquityState, FailureIndicator, FinancialNetwork};
pub use scenario::{parse_scenario, serialize_scenario, ScenarioFile, ScenarioSpec};
pub use sign_iteration::{attractors, iterate_best, iterate_worst, SignIterationTrace, SignVector};
