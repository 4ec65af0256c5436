//! Deterministic network sampler shared by the integration suites.
//!
//! Everything is driven by the crate's pinned generator, so a failing seed
//! reproduces exactly on any machine.

#![allow(dead_code)]

use crossnet_core::equilibria::{TranslatedSystem, BOUNDARY_TOL};
use crossnet_core::model::{orthant_sign_pattern, FinancialNetwork};
use crossnet_core::numerics::{invert_i_minus_c, Matrix};
use crossnet_core::rng::SplitMix64;
use crossnet_core::sign_iteration::{psi, sign_step, SignVector};

/// Draws a valid network with 2 to 10 organizations.
pub fn sample_network(g: &mut SplitMix64) -> FinancialNetwork {
    let n = 2 + (g.next_u64() % 9) as usize;
    sample_network_sized(g, n)
}

/// Draws a valid network with exactly `n` organizations and 1 to 5 assets.
///
/// Cross-holdings are uniform below `spread / n` with a random spread, so
/// column sums stay strictly below 1. Failure thresholds are scaled around
/// the all-healthy equilibrium level (factor 0.7 to 1.3), which makes the
/// sampler hit the all-healthy, all-fail, and genuinely mixed regimes.
pub fn sample_network_sized(g: &mut SplitMix64, n: usize) -> FinancialNetwork {
    let m = 1 + (g.next_u64() % 5) as usize;
    let spread = g.next_in_range(0.2, 0.9);
    let mut c_entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                c_entries.push(0.0);
            } else {
                c_entries.push(g.next_in_range(0.0, spread / n as f64));
            }
        }
    }
    let c = Matrix::new(n, n, c_entries).unwrap();
    let d_entries: Vec<f64> = (0..n * m).map(|_| g.next_in_range(0.01, 1.0)).collect();
    let d = Matrix::new(n, m, d_entries).unwrap();
    let p: Vec<f64> = (0..m).map(|_| g.next_in_range(0.5, 2.0)).collect();
    let beta: Vec<f64> = (0..n).map(|_| g.next_in_range(0.1, 2.0)).collect();

    let healthy = invert_i_minus_c(&c).unwrap().mul_vec(&d.mul_vec(&p));
    let v_threshold: Vec<f64> = healthy
        .iter()
        .map(|&h| h * g.next_in_range(0.7, 1.3))
        .collect();
    FinancialNetwork::new(c, d, p, beta, v_threshold).unwrap()
}

/// Draws a network guaranteed to satisfy the positivity condition
/// D p - beta >= 0, by scaling each failure cost below the asset income.
pub fn sample_positivity_network(g: &mut SplitMix64) -> FinancialNetwork {
    let base = sample_network(g);
    let dp = base.dp();
    let beta: Vec<f64> = dp.iter().map(|&v| v * g.next_in_range(0.1, 1.0)).collect();
    FinancialNetwork::new(
        base.c().clone(),
        base.d().clone(),
        base.p().to_vec(),
        beta,
        base.v_threshold().to_vec(),
    )
    .unwrap()
}

/// Draws a nonnegative initial state below `hi`.
pub fn sample_state(g: &mut SplitMix64, n: usize, hi: f64) -> Vec<f64> {
    (0..n).map(|_| g.next_in_range(0.0, hi)).collect()
}

/// Exhaustive scan of all 2^n sign vectors: the fixed points of the sign
/// step, paired with their translated equilibrium values P psi(sigma).
pub fn exhaustive_sign_fixed_points(ts: &TranslatedSystem) -> Vec<(u64, Vec<f64>)> {
    let n = ts.n();
    let mut out = Vec::new();
    for k in 0..(1u64 << n) {
        let sigma = SignVector::from_indicator(&orthant_sign_pattern(k, n).unwrap());
        if sign_step(ts, &sigma) == sigma {
            out.push((k, ts.p.mul_vec(&psi(ts, &sigma))));
        }
    }
    out
}

/// Whether any component sits within the boundary tolerance of zero.
pub fn near_boundary(x: &[f64]) -> bool {
    x.iter().any(|&v| v.abs() < BOUNDARY_TOL)
}
