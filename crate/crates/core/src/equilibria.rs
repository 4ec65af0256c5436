//! Equilibrium candidates, consistency, regime classification, and
//! stability.
//!
//! Freezing the failure indicator to a fixed binary pattern phi makes the
//! step map affine, so each of the 2^n patterns has exactly one candidate
//! equilibrium
//!
//! ```text
//! v_bar = (I - C)^{-1} (D p - B phi)
//! ```
//!
//! which is a true equilibrium only when it is consistent: the indicator it
//! induces must equal the pattern that produced it. Analysis happens in
//! translated coordinates x = V - v_threshold, where the data collapse to
//! the triple (P, r, beta) with P = (I - C)^{-1} and
//! r = (C - I) v_threshold + D p. Two sign conditions on P r and
//! P (r - beta) then classify the whole network: existence and uniqueness
//! of the all-healthy and all-fail equilibria, and bounds on how many
//! organizations can fail in any equilibrium at all.

use crate::dynamics::check_positivity_condition;
use crate::model::{
    failure_indicator, orthant_index, orthant_sign_pattern, FinancialNetwork, ModelError,
};
use crate::numerics::{
    clamp_tiny_to_zero, frobenius_eigenvalue, invert_i_minus_c, principal_submatrix, Matrix,
    NumericsError, POWER_MAX_ITER, POWER_TOL,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Distance from the threshold below which an equilibrium counts as sitting
/// on the failure boundary. Boundary equilibria are reported but marked
/// fragile: an arbitrarily small perturbation changes their sign pattern.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Largest n for which the 2^n orthant sweep is allowed by default. Larger
/// networks should use the sign iteration, which needs at most n + 1 steps.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// How many incremental orthant updates may pass before the candidate
/// equilibrium is recomputed from scratch to shed accumulated rounding.
const REFRESH_INTERVAL: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriaError {
    #[error("network has {n} organizations; the orthant sweep is capped at {max_n}")]
    TooLarge { n: usize, max_n: usize },
    #[error("orthant {k} is not a consistent equilibrium; stability is only defined for consistent ones")]
    InconsistentEquilibrium { k: u64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The network seen in translated coordinates x = V - v_threshold: the
/// dynamics become x(t+1) = C x(t) + r - B phi(x(t)) and every equilibrium
/// question reduces to sign patterns of P-weighted combinations of r and
/// beta.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslatedSystem {
    /// Cross-holdings matrix of the source network, kept so trajectory
    /// checks can step the translated dynamics directly.
    pub c: Matrix,
    /// The inverse (I - C)^{-1}, elementwise nonnegative.
    pub p: Matrix,
    /// Translated income r = (C - I) v_threshold + D p.
    pub r: Vec<f64>,
    /// Failure costs, copied from the network.
    pub beta: Vec<f64>,
}

impl TranslatedSystem {
    pub fn n(&self) -> usize {
        self.r.len()
    }
}

/// Builds the translated view of a network.
pub fn translate(network: &FinancialNetwork) -> Result<TranslatedSystem, EquilibriaError> {
    let c = network.c().clone();
    let p = invert_i_minus_c(&c)?;
    let cv = c.mul_vec(network.v_threshold());
    let dp = network.dp();
    let r = (0..network.n())
        .map(|i| cv[i] - network.v_threshold()[i] + dp[i])
        .collect();
    Ok(TranslatedSystem {
        c,
        p,
        r,
        beta: network.beta().to_vec(),
    })
}

/// One orthant's candidate equilibrium and its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthantEquilibrium {
    /// Orthant index; its binary pattern (component 1 as the most
    /// significant bit) is `phi_k`.
    pub k: u64,
    pub phi_k: Vec<u8>,
    /// Candidate equity values in original coordinates.
    pub v_bar: Vec<f64>,
    /// The same point in translated coordinates, x_bar = v_bar - v_threshold.
    pub x_bar: Vec<f64>,
    /// Whether the candidate induces exactly the pattern that produced it,
    /// which is what makes it an actual equilibrium of the dynamics.
    pub consistent: bool,
    /// Whether some component sits within [`BOUNDARY_TOL`] of its threshold.
    pub on_boundary: bool,
}

/// Computes orthant k's candidate equilibrium and judges consistency.
pub fn orthant_equilibrium(
    ts: &TranslatedSystem,
    network: &FinancialNetwork,
    k: u64,
) -> Result<OrthantEquilibrium, EquilibriaError> {
    let n = network.n();
    let phi_k = orthant_sign_pattern(k, n)?;
    let dp = network.dp();
    let adjusted: Vec<f64> = (0..n)
        .map(|i| dp[i] - network.beta()[i] * f64::from(phi_k[i]))
        .collect();
    let v_bar = ts.p.mul_vec(&adjusted);
    let x_bar: Vec<f64> = v_bar
        .iter()
        .zip(network.v_threshold().iter())
        .map(|(&v, &t)| v - t)
        .collect();
    let induced = failure_indicator(&v_bar, network.v_threshold())?;
    let on_boundary = x_bar.iter().any(|&x| x.abs() < BOUNDARY_TOL);
    Ok(OrthantEquilibrium {
        k,
        phi_k: phi_k.clone(),
        v_bar,
        x_bar,
        consistent: induced.phi == phi_k,
        on_boundary,
    })
}

/// Sweeps all 2^n orthants and returns the consistent equilibria, sorted by
/// orthant index.
///
/// The sweep walks the orthants in Gray-code order so each candidate is one
/// scaled-column update away from the previous one; candidates that survive
/// a sign screen are recomputed from scratch before the final verdict, and
/// the running value is refreshed periodically so rounding cannot drift.
/// The screen tolerates components within [`BOUNDARY_TOL`] of zero, so a
/// boundary-hugging candidate is never discarded on rounding noise alone.
pub fn enumerate_equilibria(
    ts: &TranslatedSystem,
    network: &FinancialNetwork,
    max_n: usize,
) -> Result<Vec<OrthantEquilibrium>, EquilibriaError> {
    let n = network.n();
    if n > max_n || n > 63 {
        return Err(EquilibriaError::TooLarge {
            n,
            max_n: max_n.min(63),
        });
    }

    // Scaled columns beta_j * P[:, j]: flipping organization j in or out of
    // the failed set moves the candidate by exactly this vector.
    let scaled_cols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| ts.beta[j] * ts.p.get(i, j)).collect())
        .collect();
    let fresh_x = |phi: &[u8]| -> Vec<f64> {
        let adjusted: Vec<f64> = (0..n)
            .map(|i| ts.r[i] - ts.beta[i] * f64::from(phi[i]))
            .collect();
        ts.p.mul_vec(&adjusted)
    };

    let mut phi = vec![0u8; n];
    let mut x = fresh_x(&phi);
    let mut results = Vec::new();
    let screen = |x: &[f64], phi: &[u8]| {
        x.iter()
            .zip(phi.iter())
            .all(|(&xi, &pi)| u8::from(xi < 0.0) == pi || xi.abs() < BOUNDARY_TOL)
    };

    let total = 1u64 << n;
    for step in 0..total {
        if step > 0 {
            // Gray code: step s flips exactly bit trailing_zeros(s), and
            // bit b corresponds to component n - 1 - b.
            let j = n - 1 - step.trailing_zeros() as usize;
            let col = &scaled_cols[j];
            if phi[j] == 0 {
                phi[j] = 1;
                for i in 0..n {
                    x[i] -= col[i];
                }
            } else {
                phi[j] = 0;
                for i in 0..n {
                    x[i] += col[i];
                }
            }
            if step % REFRESH_INTERVAL == 0 {
                x = fresh_x(&phi);
            }
        }
        if screen(&x, &phi) {
            let eq = orthant_equilibrium(ts, network, orthant_index(&phi))?;
            if eq.consistent {
                results.push(eq);
            }
        }
    }
    results.sort_by_key(|eq| eq.k);
    Ok(results)
}

/// The network-level verdict from the two sign conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// D p - beta >= 0: trajectories from nonnegative states stay
    /// nonnegative.
    pub positivity_ok: bool,
    /// P r >= 0: the all-healthy equilibrium exists.
    pub pos_eq_exists: bool,
    /// P (r - beta) >= 0: the all-healthy equilibrium is the only
    /// equilibrium of the system.
    pub pos_eq_unique_overall: bool,
    /// P (r - beta) < 0: the all-fail equilibrium exists.
    pub neg_eq_exists: bool,
    /// P r < 0: the all-fail equilibrium is the only equilibrium.
    pub neg_eq_unique_overall: bool,
    /// Fewest failures any equilibrium can have: the count of negative
    /// components of P r.
    pub n_f_lower: usize,
    /// Most failures any equilibrium can have: the count of negative
    /// components of P (r - beta).
    pub n_f_upper: usize,
}

/// Classifies the network by the sign patterns of P r and P (r - beta).
/// Componentwise, P (r - beta) <= x_bar <= P r holds for every consistent
/// equilibrium, which is what gives the two vectors their power: their
/// negative-component counts bound the failure count of every equilibrium
/// at once. Strict comparisons treat magnitudes below 1e-12 as exact zeros.
pub fn classify_regime(ts: &TranslatedSystem, network: &FinancialNetwork) -> RegimeReport {
    let mut pr = ts.p.mul_vec(&ts.r);
    let shifted: Vec<f64> =
        ts.r.iter()
            .zip(ts.beta.iter())
            .map(|(r, b)| r - b)
            .collect();
    let mut prb = ts.p.mul_vec(&shifted);
    clamp_tiny_to_zero(&mut pr);
    clamp_tiny_to_zero(&mut prb);
    RegimeReport {
        positivity_ok: check_positivity_condition(network),
        pos_eq_exists: pr.iter().all(|&v| v >= 0.0),
        pos_eq_unique_overall: prb.iter().all(|&v| v >= 0.0),
        neg_eq_exists: prb.iter().all(|&v| v < 0.0),
        neg_eq_unique_overall: pr.iter().all(|&v| v < 0.0),
        n_f_lower: pr.iter().filter(|&&v| v < 0.0).count(),
        n_f_upper: prb.iter().filter(|&&v| v < 0.0).count(),
    }
}

/// Sufficient condition for "no equilibrium has every organization failed":
/// true iff v_threshold_i < (D p - beta)_i / (1 - lambda) for every i, with
/// lambda the dominant eigenvalue of the principal submatrix of C selected
/// by `indices`. When the power iteration does not converge, the submatrix
/// one-norm stands in for lambda; it can only overestimate, which keeps a
/// true answer sound.
pub fn no_all_fail_certificate(
    network: &FinancialNetwork,
    indices: &[usize],
) -> Result<bool, EquilibriaError> {
    let sub = principal_submatrix(network.c(), indices)?;
    let spectral = frobenius_eigenvalue(&sub, POWER_TOL, POWER_MAX_ITER)?;
    let lambda = if spectral.converged {
        spectral.radius
    } else {
        sub.one_norm()
    };
    if lambda >= 1.0 {
        return Ok(false);
    }
    let dp = network.dp();
    Ok((0..network.n())
        .all(|i| network.v_threshold()[i] < (dp[i] - network.beta()[i]) / (1.0 - lambda)))
}

/// Stability verdict for one consistent equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub k: u64,
    /// Interior consistent equilibria are locally asymptotically stable:
    /// within their orthant the error dynamics contract through C alone.
    pub locally_stable: bool,
    /// Boundary-sitting equilibria are fragile: an arbitrarily small
    /// perturbation changes the failure pattern, so no stability claim is
    /// made for them.
    pub fragile: bool,
    /// The contraction rate bound, the one-norm of C (strictly below 1 for
    /// every valid network).
    pub contraction_norm: f64,
}

/// Judges local stability of a consistent equilibrium.
pub fn stability_report(
    eq: &OrthantEquilibrium,
    network: &FinancialNetwork,
) -> Result<StabilityReport, EquilibriaError> {
    if !eq.consistent {
        return Err(EquilibriaError::InconsistentEquilibrium { k: eq.k });
    }
    Ok(StabilityReport {
        k: eq.k,
        locally_stable: !eq.on_boundary,
        fragile: eq.on_boundary,
        contraction_norm: network.c().one_norm(),
    })
}
