//! Forward simulation of the cascade dynamics.
//!
//! The step map is
//!
//! ```text
//! V(t+1) = C V(t) + D p(t) - B phi(V(t) - v_threshold)
//! ```
//!
//! with B = diag(beta). Prices may vary over time through a
//! [`PriceSignal`]: a baseline vector plus disjoint override windows, which
//! is enough to express shock-and-recovery experiments.
//!
//! Convergence is judged on the trajectory tail, not on the first quiet
//! stretch: a simulation that settles during a temporary price shock and is
//! then kicked again when prices recover must not be declared converged at
//! the early lull. [`simulate`] therefore runs the full horizon and scans
//! backwards for the earliest step after which both the state differences
//! stay below `conv_tol` and the failure indicator stops changing.

use crate::model::{
    failure_indicator, EquityState, FailureIndicator, FinancialNetwork, ModelError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default infinity-norm step-difference tolerance for convergence.
pub const DEFAULT_CONV_TOL: f64 = 1e-9;

/// Default number of trailing quiet steps required to declare convergence.
pub const DEFAULT_CONFIRM_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("price override window [{start}, {end_exclusive}) is invalid: {reason}")]
    BadOverride {
        start: usize,
        end_exclusive: usize,
        reason: String,
    },
    #[error("price vector has length {actual}, expected m = {expected}")]
    PriceLength { expected: usize, actual: usize },
    #[error("initial state has length {actual}, expected n = {expected}")]
    StateLength { expected: usize, actual: usize },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
}

/// A temporary replacement of the baseline prices over [start, end_exclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceOverride {
    pub start: usize,
    pub end_exclusive: usize,
    pub prices: Vec<f64>,
}

/// Time-varying prices: a baseline vector plus disjoint override windows.
/// At each step the prices in force are the baseline unless an override
/// window covers that step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSignal {
    base: Vec<f64>,
    overrides: Vec<PriceOverride>,
}

fn validate_price_vector(prices: &[f64], m: usize) -> Result<(), DynamicsError> {
    if prices.len() != m {
        return Err(DynamicsError::PriceLength {
            expected: m,
            actual: prices.len(),
        });
    }
    if let Some(&bad) = prices.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(DynamicsError::BadOverride {
            start: 0,
            end_exclusive: 0,
            reason: format!("price {bad} must be finite and nonnegative"),
        });
    }
    if prices.iter().all(|&v| v == 0.0) {
        return Err(DynamicsError::BadOverride {
            start: 0,
            end_exclusive: 0,
            reason: "price vector must not be all zero".to_string(),
        });
    }
    Ok(())
}

impl PriceSignal {
    /// A signal holding the baseline prices at every step.
    pub fn constant(base: Vec<f64>) -> Result<Self, DynamicsError> {
        validate_price_vector(&base, base.len())?;
        Ok(PriceSignal {
            base,
            overrides: Vec::new(),
        })
    }

    /// Adds an override window. Windows must not overlap; they are kept
    /// sorted by start so lookup order never depends on insertion order.
    pub fn with_override(
        mut self,
        start: usize,
        end_exclusive: usize,
        prices: Vec<f64>,
    ) -> Result<Self, DynamicsError> {
        if start >= end_exclusive {
            return Err(DynamicsError::BadOverride {
                start,
                end_exclusive,
                reason: "window is empty".to_string(),
            });
        }
        validate_price_vector(&prices, self.base.len()).map_err(|e| match e {
            DynamicsError::BadOverride { reason, .. } => DynamicsError::BadOverride {
                start,
                end_exclusive,
                reason,
            },
            other => other,
        })?;
        for w in &self.overrides {
            if start < w.end_exclusive && w.start < end_exclusive {
                return Err(DynamicsError::BadOverride {
                    start,
                    end_exclusive,
                    reason: format!("overlaps window [{}, {})", w.start, w.end_exclusive),
                });
            }
        }
        self.overrides.push(PriceOverride {
            start,
            end_exclusive,
            prices,
        });
        self.overrides.sort_by_key(|w| w.start);
        Ok(self)
    }

    /// The baseline prices.
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// The override windows, sorted by start.
    pub fn overrides(&self) -> &[PriceOverride] {
        &self.overrides
    }

    /// The prices in force at step t.
    pub fn prices_at(&self, t: usize) -> &[f64] {
        for w in &self.overrides {
            if w.start <= t && t < w.end_exclusive {
                return &w.prices;
            }
            if t < w.start {
                break;
            }
        }
        &self.base
    }
}

/// A full simulation run: one state and indicator per step, plus the
/// convergence verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Equity values for t = 0, ..., horizon.
    pub states: Vec<EquityState>,
    /// Failure indicator of each state.
    pub indicators: Vec<FailureIndicator>,
    /// Whether the tail of the run is quiet for at least the confirmation
    /// window.
    pub converged: bool,
    /// First step of the quiet tail, present only when converged.
    pub settle_time: Option<usize>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn final_state(&self) -> &EquityState {
        self.states.last().expect("a trajectory is never empty")
    }

    pub fn final_indicator(&self) -> &FailureIndicator {
        self.indicators.last().expect("a trajectory is never empty")
    }
}

/// One application of the step map with the given prices in force.
pub fn step(network: &FinancialNetwork, v: &[f64], p_t: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    if v.len() != network.n() {
        return Err(DynamicsError::StateLength {
            expected: network.n(),
            actual: v.len(),
        });
    }
    if p_t.len() != network.m() {
        return Err(DynamicsError::PriceLength {
            expected: network.m(),
            actual: p_t.len(),
        });
    }
    let phi = failure_indicator(v, network.v_threshold())?;
    let cv = network.c().mul_vec(v);
    let dp = network.dp_at(p_t);
    Ok((0..network.n())
        .map(|i| cv[i] + dp[i] - network.beta()[i] * f64::from(phi.phi[i]))
        .collect())
}

/// Simulates the full horizon and judges convergence on the trailing quiet
/// stretch: the earliest step s such that every later step difference stays
/// below `conv_tol` and the failure indicator never changes again. The run
/// converged when that stretch spans at least `confirm_window` steps, and
/// s is then reported as the settle time.
pub fn simulate(
    network: &FinancialNetwork,
    v0: &[f64],
    prices: &PriceSignal,
    horizon: usize,
    conv_tol: f64,
    confirm_window: usize,
) -> Result<Trajectory, DynamicsError> {
    if horizon == 0 {
        return Err(DynamicsError::ZeroHorizon);
    }
    if v0.len() != network.n() {
        return Err(DynamicsError::StateLength {
            expected: network.n(),
            actual: v0.len(),
        });
    }
    validate_price_vector(prices.base(), network.m())?;
    for w in prices.overrides() {
        if w.prices.len() != network.m() {
            return Err(DynamicsError::PriceLength {
                expected: network.m(),
                actual: w.prices.len(),
            });
        }
    }

    let mut states = Vec::with_capacity(horizon + 1);
    let mut indicators = Vec::with_capacity(horizon + 1);
    states.push(EquityState {
        t: 0,
        v: v0.to_vec(),
    });
    indicators.push(failure_indicator(v0, network.v_threshold())?);
    for t in 0..horizon {
        let next = step(network, &states[t].v, prices.prices_at(t))?;
        indicators.push(failure_indicator(&next, network.v_threshold())?);
        states.push(EquityState { t: t + 1, v: next });
    }

    // Backward scan for the start of the quiet tail.
    let last = indicators.last().expect("nonempty by construction");
    let mut settle = horizon;
    for t in (0..horizon).rev() {
        let diff = max_abs_diff(&states[t].v, &states[t + 1].v);
        if diff < conv_tol && indicators[t] == *last {
            settle = t;
        } else {
            break;
        }
    }
    let converged = horizon - settle >= confirm_window;
    Ok(Trajectory {
        states,
        indicators,
        converged,
        settle_time: converged.then_some(settle),
    })
}

/// Whether the network satisfies the nonnegativity guarantee D p - beta >= 0
/// at its baseline prices. When it holds, any trajectory started at a
/// nonnegative state stays nonnegative.
pub fn check_positivity_condition(network: &FinancialNetwork) -> bool {
    network
        .dp()
        .iter()
        .zip(network.beta().iter())
        .all(|(&income, &cost)| income - cost >= 0.0)
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y).abs())
        .fold(0.0, f64::max)
}
