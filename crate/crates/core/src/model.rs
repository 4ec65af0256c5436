//! The financial network and its state.
//!
//! A network is the tuple (C, D, p, beta, v_threshold): cross-holdings among
//! n organizations, their holdings of m outside assets, asset prices, failure
//! costs, and failure thresholds. The equity vector V evolves as
//!
//! ```text
//! V(t+1) = C V(t) + D p(t) - B phi(V(t) - v_threshold)
//! ```
//!
//! where B = diag(beta) and phi marks which organizations sit strictly below
//! their thresholds. The single boundary convention used everywhere: an
//! organization exactly at its threshold is healthy (phi = 0).

use crate::numerics::Matrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// A single invariant violation found while validating a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Which field broke the invariant (`"C"`, `"D"`, `"p"`, `"beta"`, ...).
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Validation result carrying every violation found, not only the first.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationFailure {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "network validation failed:")?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Errors from state-level operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("length mismatch: {context} (expected {expected}, got {actual})")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("orthant index {k} out of range for n = {n}")]
    OrthantOutOfRange { k: u64, n: usize },
    #[error("orthant patterns support at most 63 organizations, got {n}")]
    TooManyOrganizations { n: usize },
}

/// The immutable, validated model data. Constructing one runs the full
/// invariant check; a value of this type is always safe to analyze.
///
/// Invariants enforced by [`FinancialNetwork::new`]:
/// - C is n-by-n, elementwise nonnegative, zero diagonal, every column sum
///   strictly below 1 (no organization is owned away entirely);
/// - D is n-by-m, elementwise nonnegative, and D p is strictly positive
///   (every organization owns some income-producing assets);
/// - p is nonnegative and not the zero vector;
/// - beta is strictly positive;
/// - v_threshold has length n (any real values).
#[derive(Debug, Clone, PartialEq)]
pub struct FinancialNetwork {
    c: Matrix,
    d: Matrix,
    p: Vec<f64>,
    beta: Vec<f64>,
    v_threshold: Vec<f64>,
}

impl FinancialNetwork {
    /// Validates the tuple and returns the network, or the complete list of
    /// violations.
    pub fn new(
        c: Matrix,
        d: Matrix,
        p: Vec<f64>,
        beta: Vec<f64>,
        v_threshold: Vec<f64>,
    ) -> Result<Self, ValidationFailure> {
        let mut violations = Vec::new();
        let n = c.rows();
        let m = d.cols();

        if !c.is_square() {
            violations.push(Violation {
                field: "C",
                message: format!("must be square, got {}x{}", c.rows(), c.cols()),
            });
        } else {
            if let Some((row, col, value)) = c.first_negative_entry() {
                violations.push(Violation {
                    field: "C",
                    message: format!("entry ({row},{col}) = {value} is negative"),
                });
            }
            for i in 0..n {
                if c.get(i, i) != 0.0 {
                    violations.push(Violation {
                        field: "C",
                        message: format!("diagonal entry ({i},{i}) = {} must be 0", c.get(i, i)),
                    });
                }
            }
            for (col, sum) in c.column_sums().into_iter().enumerate() {
                if sum >= 1.0 {
                    violations.push(Violation {
                        field: "C",
                        message: format!(
                            "column {col} sums to {sum}; every column sum must be strictly below 1"
                        ),
                    });
                }
            }
        }

        if d.rows() != n {
            violations.push(Violation {
                field: "D",
                message: format!("must have {n} rows to match C, got {}", d.rows()),
            });
        }
        if let Some((row, col, value)) = d.first_negative_entry() {
            violations.push(Violation {
                field: "D",
                message: format!("entry ({row},{col}) = {value} is negative"),
            });
        }

        if p.len() != m {
            violations.push(Violation {
                field: "p",
                message: format!("length {} does not match the {m} columns of D", p.len()),
            });
        }
        if let Some(i) = p.iter().position(|&v| v < 0.0 || !v.is_finite()) {
            violations.push(Violation {
                field: "p",
                message: format!("entry {i} = {} must be finite and nonnegative", p[i]),
            });
        } else if p.iter().all(|&v| v == 0.0) {
            violations.push(Violation {
                field: "p",
                message: "must not be the zero vector".to_string(),
            });
        }

        // D p > 0 elementwise: zero total asset income would make an
        // organization's equity collapse to a cross-holdings-only fixed
        // point, which the model rules out.
        if d.rows() == n && p.len() == m && d.first_negative_entry().is_none() {
            let dp = d.mul_vec(&p);
            if let Some(i) = dp.iter().position(|&v| v <= 0.0) {
                violations.push(Violation {
                    field: "D",
                    message: format!(
                        "row {i} of D gives (D p)_{i} = {}; D p must be strictly positive",
                        dp[i]
                    ),
                });
            }
        }

        if beta.len() != n {
            violations.push(Violation {
                field: "beta",
                message: format!("length {} does not match n = {n}", beta.len()),
            });
        }
        if let Some(i) = beta.iter().position(|&v| v <= 0.0 || !v.is_finite()) {
            violations.push(Violation {
                field: "beta",
                message: format!(
                    "entry {i} = {} must be finite and strictly positive",
                    beta[i]
                ),
            });
        }

        if v_threshold.len() != n {
            violations.push(Violation {
                field: "v_threshold",
                message: format!("length {} does not match n = {n}", v_threshold.len()),
            });
        }
        if let Some(i) = v_threshold.iter().position(|&v| !v.is_finite()) {
            violations.push(Violation {
                field: "v_threshold",
                message: format!("entry {i} = {} must be finite", v_threshold[i]),
            });
        }

        if violations.is_empty() {
            Ok(FinancialNetwork {
                c,
                d,
                p,
                beta,
                v_threshold,
            })
        } else {
            Err(ValidationFailure { violations })
        }
    }

    /// Number of organizations.
    pub fn n(&self) -> usize {
        self.c.rows()
    }

    /// Number of outside assets.
    pub fn m(&self) -> usize {
        self.d.cols()
    }

    /// Cross-holdings matrix: entry (i, j) is the fraction of organization
    /// j's equity owned by organization i.
    pub fn c(&self) -> &Matrix {
        &self.c
    }

    /// Asset-holdings matrix: entry (i, k) is organization i's share of
    /// asset k.
    pub fn d(&self) -> &Matrix {
        &self.d
    }

    /// Baseline asset prices.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// Failure costs: the lump loss beta_i charged while organization i is
    /// below threshold.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Failure thresholds.
    pub fn v_threshold(&self) -> &[f64] {
        &self.v_threshold
    }

    /// D p at the baseline prices.
    pub fn dp(&self) -> Vec<f64> {
        self.d.mul_vec(&self.p)
    }

    /// D p at the given prices (must have length m).
    pub fn dp_at(&self, prices: &[f64]) -> Vec<f64> {
        self.d.mul_vec(prices)
    }
}

/// Equity values at a single time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquityState {
    pub t: usize,
    pub v: Vec<f64>,
}

/// Binary failure indicator: entry i is 1 when organization i sits strictly
/// below its threshold, 0 otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureIndicator {
    pub phi: Vec<u8>,
}

impl FailureIndicator {
    pub fn n(&self) -> usize {
        self.phi.len()
    }

    /// Number of failed organizations.
    pub fn count_failed(&self) -> usize {
        self.phi.iter().filter(|&&b| b == 1).count()
    }

    /// Indices of failed organizations, ascending.
    pub fn failed_indices(&self) -> Vec<usize> {
        self.phi
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
            .collect()
    }

    /// The orthant index whose bit pattern equals this indicator
    /// (component 1 is the most significant bit). Requires n <= 63.
    pub fn orthant_index(&self) -> u64 {
        debug_assert!(self.phi.len() <= 63, "orthant index would overflow");
        self.phi.iter().fold(0u64, |k, &b| (k << 1) | b as u64)
    }
}

impl fmt::Display for FailureIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.phi {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// The indicator phi(V - v_threshold): 1 exactly where V_i < v_threshold_i.
/// Sitting exactly on the threshold counts as healthy.
pub fn failure_indicator(v: &[f64], v_threshold: &[f64]) -> Result<FailureIndicator, ModelError> {
    if v.len() != v_threshold.len() {
        return Err(ModelError::LengthMismatch {
            context: "failure indicator inputs",
            expected: v_threshold.len(),
            actual: v.len(),
        });
    }
    Ok(FailureIndicator {
        phi: v
            .iter()
            .zip(v_threshold.iter())
            .map(|(&vi, &ti)| u8::from(vi < ti))
            .collect(),
    })
}

/// The binary pattern of orthant k over n organizations, with component 1 as
/// the most significant bit: for n = 3, k = 1 gives [0, 0, 1] and k = 4
/// gives [1, 0, 0].
pub fn orthant_sign_pattern(k: u64, n: usize) -> Result<Vec<u8>, ModelError> {
    if n > 63 {
        return Err(ModelError::TooManyOrganizations { n });
    }
    if k >= 1u64 << n {
        return Err(ModelError::OrthantOutOfRange { k, n });
    }
    Ok((0..n).map(|i| ((k >> (n - 1 - i)) & 1) as u8).collect())
}

/// Inverse of [`orthant_sign_pattern`]: the index of the orthant with the
/// given binary pattern. Requires length <= 63.
pub fn orthant_index(pattern: &[u8]) -> u64 {
    debug_assert!(pattern.len() <= 63, "orthant index would overflow");
    pattern.iter().fold(0u64, |k, &b| (k << 1) | u64::from(b))
}
