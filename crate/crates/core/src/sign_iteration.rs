//! The monotone sign-space iteration: equilibrium discovery without the
//! 2^n sweep.
//!
//! In translated coordinates an equilibrium is determined by its sign
//! pattern alone: if sigma in {-1, +1}^n is the pattern, the equilibrium is
//! P Psi(sigma), where Psi picks r_i for positive components and
//! r_i - beta_i for negative ones. Sign patterns of actual equilibria are
//! exactly the fixed points of
//!
//! ```text
//! sigma(k+1) = sign[P Psi(sigma(k))]
//! ```
//!
//! and because that map is monotone, iterating from the all-minus pattern
//! climbs to the least fixed point sigma_W (the worst case) and iterating
//! from all-plus descends to the greatest one sigma_B (the best case), each
//! in at most n + 1 steps. Every equilibrium's pattern lies between the
//! two, and the corresponding states x_W = P Psi(sigma_W) and
//! x_B = P Psi(sigma_B) attract the dynamics from below and from above.
//!
//! Sign convention everywhere: sign(0) = +1, matching the model rule that
//! sitting exactly on the threshold is healthy.

use crate::equilibria::TranslatedSystem;
use crate::numerics::{clamp_tiny_to_zero, ZERO_CLAMP};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// How close the verification trajectories must settle to the predicted
/// attractors in [`attractors`].
const ATTRACTOR_SETTLE_TOL: f64 = 1e-8;

/// Step cap for the verification trajectories; the contraction through C
/// settles desk-scale systems in a few hundred steps.
const TRAJECTORY_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignIterationError {
    #[error(
        "sign iteration lost monotonicity ({detail}); this is an internal defect, not bad input"
    )]
    NonMonotoneTrace { detail: String },
    #[error("trajectory from the {direction} starting point moved against the guaranteed direction at step {t}, component {i} ({from} to {to})")]
    MonotoneViolation {
        direction: &'static str,
        t: usize,
        i: usize,
        from: f64,
        to: f64,
    },
    #[error("trajectory from the {direction} starting point settled {gap:e} away from the predicted attractor at component {i}")]
    AttractorMismatch {
        direction: &'static str,
        i: usize,
        gap: f64,
    },
    #[error("trajectory from the {direction} starting point did not settle within {cap} steps")]
    TrajectoryStalled { direction: &'static str, cap: usize },
}

/// A vector over {-1, +1}: the sign pattern of a translated state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignVector {
    pub signs: Vec<i8>,
}

impl SignVector {
    pub fn all_minus(n: usize) -> Self {
        SignVector { signs: vec![-1; n] }
    }

    pub fn all_plus(n: usize) -> Self {
        SignVector { signs: vec![1; n] }
    }

    /// Converts a failure indicator (1 = failed) to signs via
    /// sigma = 1 - 2 phi.
    pub fn from_indicator(phi: &[u8]) -> Self {
        SignVector {
            signs: phi.iter().map(|&b| 1 - 2 * b as i8).collect(),
        }
    }

    /// The failure indicator this pattern encodes (1 where the sign is -1).
    pub fn indicator(&self) -> Vec<u8> {
        self.signs.iter().map(|&s| u8::from(s < 0)).collect()
    }

    pub fn n(&self) -> usize {
        self.signs.len()
    }

    /// Indices whose sign is +1: the organizations this pattern marks safe.
    pub fn safe_set(&self) -> Vec<usize> {
        self.signs
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Componentwise order: self <= other in every position.
    pub fn le(&self, other: &SignVector) -> bool {
        self.signs
            .iter()
            .zip(other.signs.iter())
            .all(|(&a, &b)| a <= b)
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            write!(f, "{}", if s > 0 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

/// Which end of the sign lattice an iteration starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationDirection {
    /// From all-minus, climbing to the least fixed point sigma_W.
    Worst,
    /// From all-plus, descending to the greatest fixed point sigma_B.
    Best,
}

impl IterationDirection {
    fn name(self) -> &'static str {
        match self {
            IterationDirection::Worst => "worst",
            IterationDirection::Best => "best",
        }
    }
}

/// Full record of one sign iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignIterationTrace {
    pub direction: IterationDirection,
    /// The visited sign vectors, starting at the initial pattern; the last
    /// entry is the fixed point.
    pub sequence: Vec<SignVector>,
    /// The safe set of each visited vector: nondecreasing under inclusion
    /// in the worst direction, nonincreasing in the best.
    pub safe_sets: Vec<Vec<usize>>,
    pub fixed_point: SignVector,
    /// Number of sign-map applications, including the one that confirmed
    /// the fixed point. At most n + 1 by monotonicity.
    pub iterations: usize,
    /// Components whose value fell within 1e-12 of zero during some sign
    /// decision; their +1 verdicts are exact-boundary calls.
    pub marginal_components: Vec<usize>,
}

/// The selection map: component i of Psi(sigma) is r_i when sigma_i = +1
/// and r_i - beta_i when sigma_i = -1.
pub fn psi(ts: &TranslatedSystem, sigma: &SignVector) -> Vec<f64> {
    assert_eq!(
        sigma.n(),
        ts.n(),
        "sign vector length must match the system"
    );
    ts.r.iter()
        .zip(ts.beta.iter())
        .zip(sigma.signs.iter())
        .map(|((&r, &b), &s)| if s > 0 { r } else { r - b })
        .collect()
}

fn sign_of(values: &[f64], marginal: &mut BTreeSet<usize>) -> SignVector {
    SignVector {
        signs: values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v.abs() < ZERO_CLAMP {
                    marginal.insert(i);
                    1
                } else if v < 0.0 {
                    -1
                } else {
                    1
                }
            })
            .collect(),
    }
}

/// One application of the sign map: sign(P Psi(sigma)), with zero mapping
/// to +1.
pub fn sign_step(ts: &TranslatedSystem, sigma: &SignVector) -> SignVector {
    let mut marginal = BTreeSet::new();
    sign_of(&ts.p.mul_vec(&psi(ts, sigma)), &mut marginal)
}

fn iterate(
    ts: &TranslatedSystem,
    direction: IterationDirection,
) -> Result<SignIterationTrace, SignIterationError> {
    let n = ts.n();
    let cap = n + 2;
    let mut marginal = BTreeSet::new();
    let mut current = match direction {
        IterationDirection::Worst => SignVector::all_minus(n),
        IterationDirection::Best => SignVector::all_plus(n),
    };
    let mut sequence = vec![current.clone()];
    let mut safe_sets = vec![current.safe_set()];
    let mut iterations = 0;
    loop {
        if iterations == cap {
            return Err(SignIterationError::NonMonotoneTrace {
                detail: format!(
                    "no fixed point within {cap} steps in the {} direction for n = {n}",
                    direction.name()
                ),
            });
        }
        let next = sign_of(&ts.p.mul_vec(&psi(ts, &current)), &mut marginal);
        iterations += 1;
        if next == current {
            break;
        }
        let ordered = match direction {
            IterationDirection::Worst => current.le(&next),
            IterationDirection::Best => next.le(&current),
        };
        if !ordered {
            return Err(SignIterationError::NonMonotoneTrace {
                detail: format!(
                    "step {iterations} moved against the {} direction",
                    direction.name()
                ),
            });
        }
        sequence.push(next.clone());
        safe_sets.push(next.safe_set());
        current = next;
    }
    Ok(SignIterationTrace {
        direction,
        sequence,
        safe_sets,
        fixed_point: current,
        iterations,
        marginal_components: marginal.into_iter().collect(),
    })
}

/// Iterates from all-minus up to the least fixed point sigma_W. Organizations
/// whose sign turns positive along the way can never fail in any equilibrium,
/// so the safe sets grow monotonically.
pub fn iterate_worst(ts: &TranslatedSystem) -> Result<SignIterationTrace, SignIterationError> {
    iterate(ts, IterationDirection::Worst)
}

/// Iterates from all-plus down to the greatest fixed point sigma_B.
pub fn iterate_best(ts: &TranslatedSystem) -> Result<SignIterationTrace, SignIterationError> {
    iterate(ts, IterationDirection::Best)
}

/// Verdict for one organization that holds across every equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeSignClass {
    /// (P r)_i < 0: failed in every equilibrium.
    AlwaysNegative,
    /// (P (r - beta))_i >= 0: healthy in every equilibrium.
    AlwaysPositive,
    /// Neither one-sided test decides; the outcome depends on which
    /// equilibrium the dynamics reach.
    Undetermined,
}

/// Classifies each organization by the one-sided tests on P r and
/// P (r - beta). The two conditions are mutually exclusive because
/// P (r - beta) <= P r componentwise.
pub fn fixed_sign_classification(ts: &TranslatedSystem) -> Vec<NodeSignClass> {
    let mut pr = ts.p.mul_vec(&ts.r);
    let shifted: Vec<f64> =
        ts.r.iter()
            .zip(ts.beta.iter())
            .map(|(r, b)| r - b)
            .collect();
    let mut prb = ts.p.mul_vec(&shifted);
    clamp_tiny_to_zero(&mut pr);
    clamp_tiny_to_zero(&mut prb);
    pr.iter()
        .zip(prb.iter())
        .map(|(&upper, &lower)| {
            if upper < 0.0 {
                NodeSignClass::AlwaysNegative
            } else if lower >= 0.0 {
                NodeSignClass::AlwaysPositive
            } else {
                NodeSignClass::Undetermined
            }
        })
        .collect()
}

/// The two attracting equilibria and their sign patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorPair {
    /// x_W = P Psi(sigma_W): the equilibrium reached from the all-fail side.
    pub x_worst: Vec<f64>,
    /// x_B = P Psi(sigma_B): the equilibrium reached from the all-healthy
    /// side.
    pub x_best: Vec<f64>,
    pub sigma_worst: SignVector,
    pub sigma_best: SignVector,
}

fn translated_step(ts: &TranslatedSystem, x: &[f64]) -> Vec<f64> {
    let cx = ts.c.mul_vec(x);
    (0..x.len())
        .map(|i| {
            let cost = if x[i] < 0.0 { ts.beta[i] } else { 0.0 };
            cx[i] + ts.r[i] - cost
        })
        .collect()
}

/// Runs the translated dynamics from `x`, asserting elementwise movement in
/// one direction only, until the state reproduces itself exactly.
///
/// Differences below 1e-12 are pinned to the previous value before the
/// monotonicity check: a genuinely monotone trajectory can dip by one part
/// in 10^13 through rounding in P, and pinning turns the eventual fixed
/// point into an exact one so settling is detected by equality.
fn run_monotone_trajectory(
    ts: &TranslatedSystem,
    mut x: Vec<f64>,
    upward: bool,
    direction: &'static str,
) -> Result<Vec<f64>, SignIterationError> {
    let n = x.len();
    for t in 0..TRAJECTORY_CAP {
        let mut next = translated_step(ts, &x);
        for i in 0..n {
            if (next[i] - x[i]).abs() < ZERO_CLAMP {
                next[i] = x[i];
            }
        }
        for i in 0..n {
            let against = if upward {
                next[i] < x[i]
            } else {
                next[i] > x[i]
            };
            if against {
                return Err(SignIterationError::MonotoneViolation {
                    direction,
                    t,
                    i,
                    from: x[i],
                    to: next[i],
                });
            }
        }
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    Err(SignIterationError::TrajectoryStalled {
        direction,
        cap: TRAJECTORY_CAP,
    })
}

/// Computes both attractors and verifies them dynamically: the trajectory
/// from P Psi of all-minus must climb monotonically and settle at x_W, and
/// the one from P Psi of all-plus must descend to x_B.
pub fn attractors(ts: &TranslatedSystem) -> Result<AttractorPair, SignIterationError> {
    let worst = iterate_worst(ts)?;
    let best = iterate_best(ts)?;
    let x_worst = ts.p.mul_vec(&psi(ts, &worst.fixed_point));
    let x_best = ts.p.mul_vec(&psi(ts, &best.fixed_point));

    let from_below = run_monotone_trajectory(
        ts,
        ts.p.mul_vec(&psi(ts, &SignVector::all_minus(ts.n()))),
        true,
        "worst",
    )?;
    let from_above = run_monotone_trajectory(
        ts,
        ts.p.mul_vec(&psi(ts, &SignVector::all_plus(ts.n()))),
        false,
        "best",
    )?;
    for (settled, predicted, direction) in [
        (&from_below, &x_worst, "worst"),
        (&from_above, &x_best, "best"),
    ] {
        for i in 0..ts.n() {
            let gap = (settled[i] - predicted[i]).abs();
            if gap > ATTRACTOR_SETTLE_TOL {
                return Err(SignIterationError::AttractorMismatch { direction, i, gap });
            }
        }
    }

    Ok(AttractorPair {
        x_worst,
        x_best,
        sigma_worst: worst.fixed_point,
        sigma_best: best.fixed_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{enumerate_equilibria, orthant_equilibrium, translate};
    use crate::model::FinancialNetwork;
    use crate::numerics::{invert_i_minus_c, Matrix};
    use approx::assert_abs_diff_eq;

    /// A three-stage cascade: organization 0 is solidly healthy, 1 fails
    /// only while 0 is counted as failed, and 2 fails regardless. The worst
    /// iteration needs one step per rescued organization.
    fn cascade_ts() -> TranslatedSystem {
        let c = Matrix::from_rows(&[
            vec![0.0, 0.0, 0.0],
            vec![0.8, 0.0, 0.0],
            vec![0.0, 0.8, 0.0],
        ])
        .unwrap();
        let p = invert_i_minus_c(&c).unwrap();
        TranslatedSystem {
            c,
            p,
            r: vec![3.0, -1.3, -2.0],
            beta: vec![1.0, 1.0, 1.0],
        }
    }

    /// Two decoupled organizations: signs never interact.
    fn decoupled_ts(r: Vec<f64>, beta: Vec<f64>) -> TranslatedSystem {
        let n = r.len();
        TranslatedSystem {
            c: Matrix::zeros(n, n),
            p: Matrix::identity(n),
            r,
            beta,
        }
    }

    /// The bistable coupled pair: both the all-healthy and the all-fail
    /// patterns are fixed points.
    fn bistable_ts() -> TranslatedSystem {
        let net = FinancialNetwork::new(
            Matrix::from_rows(&[vec![0.0, 0.025], vec![0.005, 0.0]]).unwrap(),
            Matrix::constant(2, 2, 0.05).unwrap(),
            vec![20.0, 20.0],
            vec![1.0, 1.0],
            vec![1.5, 1.5],
        )
        .unwrap();
        translate(&net).unwrap()
    }

    #[test]
    fn psi_selects_componentwise() {
        let ts = decoupled_ts(vec![0.5, 0.5], vec![0.3, 0.3]);
        assert_eq!(psi(&ts, &SignVector::all_plus(2)), vec![0.5, 0.5]);
        assert_eq!(psi(&ts, &SignVector::all_minus(2)), vec![0.2, 0.2]);
        let mixed = SignVector { signs: vec![1, -1] };
        assert_eq!(psi(&ts, &mixed), vec![0.5, 0.2]);
    }

    #[test]
    fn all_plus_is_fixed_when_income_stays_positive() {
        let ts = decoupled_ts(vec![0.5, 0.5], vec![0.3, 0.3]);
        let sigma = SignVector::all_plus(2);
        assert_eq!(sign_step(&ts, &sigma), sigma);
    }

    #[test]
    fn worst_iteration_climbs_the_cascade_one_rescue_per_step() {
        let ts = cascade_ts();
        let trace = iterate_worst(&ts).unwrap();
        assert_eq!(trace.fixed_point.signs, vec![1, 1, -1]);
        assert_eq!(trace.iterations, 3);
        assert_eq!(trace.safe_sets, vec![vec![], vec![0], vec![0, 1]]);
        assert_eq!(trace.sequence.len(), 3);
        assert!(trace.marginal_components.is_empty());
    }

    #[test]
    fn best_iteration_descends_the_cascade() {
        let ts = cascade_ts();
        let trace = iterate_best(&ts).unwrap();
        assert_eq!(trace.fixed_point.signs, vec![1, 1, -1]);
        assert_eq!(trace.iterations, 2);
        assert_eq!(trace.safe_sets, vec![vec![0, 1, 2], vec![0, 1]]);
    }

    #[test]
    fn worst_stays_below_best_on_the_bistable_pair() {
        let ts = bistable_ts();
        let worst = iterate_worst(&ts).unwrap();
        let best = iterate_best(&ts).unwrap();
        assert_eq!(worst.fixed_point.signs, vec![-1, -1]);
        assert_eq!(best.fixed_point.signs, vec![1, 1]);
        assert!(worst.fixed_point.le(&best.fixed_point));
        // Both ends are genuine fixed points, one application deep.
        assert_eq!(worst.iterations, 1);
        assert_eq!(best.iterations, 1);
    }

    #[test]
    fn iteration_count_respects_the_monotone_bound() {
        for ts in [
            cascade_ts(),
            bistable_ts(),
            decoupled_ts(vec![0.5, -0.5], vec![0.3, 0.3]),
        ] {
            let n = ts.n();
            assert!(iterate_worst(&ts).unwrap().iterations <= n + 1);
            assert!(iterate_best(&ts).unwrap().iterations <= n + 1);
        }
    }

    #[test]
    fn sign_step_preserves_componentwise_order() {
        let ts = cascade_ts();
        let lo = SignVector::all_minus(3);
        let hi = SignVector::all_plus(3);
        let mut a = lo.clone();
        let mut b = hi.clone();
        for _ in 0..4 {
            a = sign_step(&ts, &a);
            b = sign_step(&ts, &b);
            assert!(a.le(&b));
        }
    }

    #[test]
    fn classification_separates_decoupled_signs() {
        let ts = decoupled_ts(vec![1.0, -1.0], vec![0.5, 0.5]);
        assert_eq!(
            fixed_sign_classification(&ts),
            vec![NodeSignClass::AlwaysPositive, NodeSignClass::AlwaysNegative]
        );
    }

    #[test]
    fn classification_leaves_the_cascade_middle_undetermined() {
        let ts = cascade_ts();
        assert_eq!(
            fixed_sign_classification(&ts),
            vec![
                NodeSignClass::AlwaysPositive,
                NodeSignClass::Undetermined,
                NodeSignClass::AlwaysNegative,
            ]
        );
    }

    #[test]
    fn marginal_zero_components_are_flagged_and_count_positive() {
        let ts = decoupled_ts(vec![0.0, 1.0], vec![0.5, 0.5]);
        let trace = iterate_best(&ts).unwrap();
        assert_eq!(trace.fixed_point.signs, vec![1, 1]);
        assert_eq!(trace.marginal_components, vec![0]);
    }

    #[test]
    fn attractors_bracket_the_bistable_equilibria() {
        let ts = bistable_ts();
        let pair = attractors(&ts).unwrap();
        assert_eq!(pair.sigma_worst.signs, vec![-1, -1]);
        assert_eq!(pair.sigma_best.signs, vec![1, 1]);
        for i in 0..2 {
            assert!(pair.x_worst[i] <= pair.x_best[i]);
        }
        // The worst attractor is the all-fail equilibrium and the best is
        // the all-healthy one, matching the orthant computation exactly.
        let net = FinancialNetwork::new(
            Matrix::from_rows(&[vec![0.0, 0.025], vec![0.005, 0.0]]).unwrap(),
            Matrix::constant(2, 2, 0.05).unwrap(),
            vec![20.0, 20.0],
            vec![1.0, 1.0],
            vec![1.5, 1.5],
        )
        .unwrap();
        let all_fail = orthant_equilibrium(&ts, &net, 3).unwrap();
        let all_healthy = orthant_equilibrium(&ts, &net, 0).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(pair.x_worst[i], all_fail.x_bar[i], epsilon = 1e-12);
            assert_abs_diff_eq!(pair.x_best[i], all_healthy.x_bar[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn attractors_coincide_in_single_equilibrium_regimes() {
        // r - beta >= 0: only the all-healthy equilibrium exists.
        let ts = decoupled_ts(vec![0.5, 0.5], vec![0.3, 0.3]);
        let pair = attractors(&ts).unwrap();
        assert_eq!(pair.sigma_worst, pair.sigma_best);
        assert_eq!(pair.x_worst, pair.x_best);
        assert_eq!(pair.x_best, vec![0.5, 0.5]);

        // r < 0 with P r < 0: only the all-fail equilibrium exists.
        let ts = decoupled_ts(vec![-0.5, -0.5], vec![0.3, 0.3]);
        let pair = attractors(&ts).unwrap();
        assert_eq!(pair.sigma_worst, pair.sigma_best);
        assert_eq!(pair.x_worst, vec![-0.8, -0.8]);
    }

    #[test]
    fn attractor_patterns_bound_every_enumerated_equilibrium() {
        let ts = cascade_ts();
        let worst = iterate_worst(&ts).unwrap().fixed_point;
        let best = iterate_best(&ts).unwrap().fixed_point;
        // Equilibria of the cascade system via the orthant sweep, using a
        // network that reproduces the same translated data.
        let net = cascade_network();
        let eqs = enumerate_equilibria(&ts, &net, 20).unwrap();
        assert!(!eqs.is_empty());
        for eq in &eqs {
            let sigma = SignVector::from_indicator(&eq.phi_k);
            assert!(worst.le(&sigma) && sigma.le(&best));
        }
    }

    /// A network whose translated data equals `cascade_ts` exactly: with
    /// D = I and v_threshold = t, prices must satisfy p = r + t - C t.
    /// Thresholds of 12 keep those prices strictly positive despite the
    /// negative entries of r.
    fn cascade_network() -> FinancialNetwork {
        let ts = cascade_ts();
        let t = vec![12.0, 12.0, 12.0];
        let ct = ts.c.mul_vec(&t);
        let p: Vec<f64> = (0..3).map(|i| ts.r[i] + t[i] - ct[i]).collect();
        let net = FinancialNetwork::new(ts.c.clone(), Matrix::identity(3), p, ts.beta.clone(), t)
            .unwrap();
        let check = translate(&net).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(check.r[i], ts.r[i], epsilon = 1e-12);
        }
        net
    }

    #[test]
    fn display_renders_signs_compactly() {
        let sigma = SignVector {
            signs: vec![1, -1, 1],
        };
        assert_eq!(sigma.to_string(), "+-+");
        assert_eq!(sigma.indicator(), vec![0, 1, 0]);
        assert_eq!(SignVector::from_indicator(&[0, 1, 0]), sigma);
    }
}
