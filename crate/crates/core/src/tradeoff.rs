//! Solvers for the optimal harvest duration.
//!
//! Each closed-form objective `(T-tau)/T * log2(1 + k*tau/(T-tau))` is zero
//! at both slot endpoints and has a single interior stationary point, so the
//! optimum is found by bisecting the derivative's root and comparing the
//! candidate set `{0, T, tau_root}`.

use std::f64::consts::LN_2;
use std::fmt;

use crate::bounds::{compute_coefficients, rate_from_coefficient};
use crate::error::Error;
use crate::model::SystemParams;

/// Which rule produced a [`TauSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Maximize the Jensen upper bound.
    Ua,
    /// Maximize the approximate lower bound.
    La,
    /// Fixed equal split, `tau = T/2`.
    Ea,
    /// Numerically search the simulated average rate.
    Oa,
    /// Maximize the imperfect-estimation upper bound.
    UaImperfect,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Ua => "UA",
            Algorithm::La => "LA",
            Algorithm::Ea => "EA",
            Algorithm::Oa => "OA",
            Algorithm::UaImperfect => "UA-imperfect",
        })
    }
}

/// A solved harvest-duration split.
#[derive(Debug, Clone)]
pub struct TauSolution {
    pub algorithm: Algorithm,
    /// Chosen harvest duration, seconds.
    pub tau_star: f64,
    /// Objective value at `tau_star` under the algorithm's own objective.
    pub rate_at_tau: f64,
    /// Every `(tau, objective)` candidate that was compared.
    pub candidates: Vec<(f64, f64)>,
    /// `|derivative|` at the interior stationary point, when one exists.
    pub residual: Option<f64>,
}

/// Dimensionless stationary condition at `x = tau / T`:
/// `k / ((1 + (k-1)x) ln 2) - log2(1 + k x / (1-x))`.
///
/// Positive as `x -> 0+`, diverges to `-inf` as `x -> 1-`, so its root is
/// the interior maximizer of the rate shape.
pub fn stationary_lhs(coeff: f64, x: f64) -> f64 {
    coeff / ((1.0 + (coeff - 1.0) * x) * LN_2) - (1.0 + coeff * x / (1.0 - x)).log2()
}

/// Solves the stationary condition for the harvest duration, returning
/// `tau` in `(0, T)`.
///
/// Bisection on `x = tau/T`: the bracket `[1e-9, 1 - 1e-9]` is verified by
/// a sign change and then halved to machine-level width, which leaves the
/// residual comfortably below the 1e-10 contract.
pub fn stationary_tau(coeff: f64, slot: f64) -> Result<f64, Error> {
    if !(slot > 0.0) {
        return Err(Error::NonPositive {
            name: "slot",
            value: slot,
        });
    }
    if !(coeff > 0.0) {
        return Err(Error::NoStationaryPoint { coeff });
    }
    const EDGE: f64 = 1e-9;
    let mut lo = EDGE;
    let mut hi = 1.0 - EDGE;
    if !(stationary_lhs(coeff, lo) > 0.0 && stationary_lhs(coeff, hi) < 0.0) {
        return Err(Error::NoStationaryPoint { coeff });
    }
    for _ in 0..200 {
        if hi - lo <= 1e-15 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if stationary_lhs(coeff, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) * slot)
}

/// Generic candidate-comparison solve for one coefficient.
pub fn solve_with_coefficient(coeff: f64, slot: f64, algorithm: Algorithm) -> TauSolution {
    let mut candidates = vec![(0.0, 0.0), (slot, 0.0)];
    let mut residual = None;
    if let Ok(tau) = stationary_tau(coeff, slot) {
        let objective = rate_from_coefficient(tau, coeff, slot).expect("tau in (0, T)");
        candidates.push((tau, objective));
        residual = Some(stationary_lhs(coeff, tau / slot).abs());
    }
    // strict comparison: ties keep the earliest candidate, so a dead link
    // (all-zero objective) settles at tau = 0
    let (mut tau_star, mut rate_at_tau) = candidates[0];
    for &(tau, obj) in &candidates[1..] {
        if obj > rate_at_tau {
            tau_star = tau;
            rate_at_tau = obj;
        }
    }
    TauSolution {
        algorithm,
        tau_star,
        rate_at_tau,
        candidates,
        residual: if tau_star > 0.0 && tau_star < slot {
            residual
        } else {
            None
        },
    }
}

/// Optimal split under the Jensen upper bound.
pub fn solve_ua(params: &SystemParams) -> TauSolution {
    let c = compute_coefficients(params);
    solve_with_coefficient(c.b_upper, params.slot_seconds, Algorithm::Ua)
}

/// Optimal split under the approximate lower bound.
pub fn solve_la(params: &SystemParams) -> TauSolution {
    let c = compute_coefficients(params);
    solve_with_coefficient(c.d_lower, params.slot_seconds, Algorithm::La)
}

/// The equal-split baseline: `tau = T/2` unconditionally, reported against
/// the upper-bound objective.
pub fn solve_ea(params: &SystemParams) -> TauSolution {
    let c = compute_coefficients(params);
    let slot = params.slot_seconds;
    let tau = 0.5 * slot;
    let rate = rate_from_coefficient(tau, c.b_upper, slot).expect("midpoint in range");
    TauSolution {
        algorithm: Algorithm::Ea,
        tau_star: tau,
        rate_at_tau: rate,
        candidates: vec![(tau, rate)],
        residual: None,
    }
}

/// Optimal split under the imperfect-estimation upper bound.
pub fn solve_ua_imperfect(params: &SystemParams) -> TauSolution {
    let c = compute_coefficients(params);
    solve_with_coefficient(c.b_imperfect, params.slot_seconds, Algorithm::UaImperfect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_coefficient_root_is_one_minus_inv_e() {
        // with k = 1 the objective is (1-x) log2(1/(1-x)), maximized at
        // 1 - 1/e
        let tau = stationary_tau(1.0, 1.0).unwrap();
        assert!((tau - (1.0 - std::f64::consts::E.recip())).abs() < 1e-12);
    }

    #[test]
    fn root_matches_dense_grid_argmax() {
        let (coeff, slot) = (10.0, 1.0);
        let tau = stationary_tau(coeff, slot).unwrap();

        let n = 1_000_000usize;
        let mut best_i = 0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            let t = slot * i as f64 / n as f64;
            let r = if i == 0 || i == n {
                0.0
            } else {
                (slot - t) / slot * (1.0 + coeff * t / (slot - t)).log2()
            };
            if r > best {
                best = r;
                best_i = i;
            }
        }
        let grid_tau = slot * best_i as f64 / n as f64;
        assert!(
            (tau - grid_tau).abs() <= slot / n as f64,
            "{tau} vs {grid_tau}"
        );
    }

    #[test]
    fn residual_is_tiny_at_root() {
        for coeff in [1e-2, 0.5, 1.0, 42.0, 1e3, 1e6] {
            let tau = stationary_tau(coeff, 3.0).unwrap();
            let res = stationary_lhs(coeff, tau / 3.0).abs();
            assert!(res < 1e-10, "coeff {coeff}: residual {res}");
        }
    }

    #[test]
    fn nonpositive_coefficient_has_no_root() {
        assert!(matches!(
            stationary_tau(0.0, 1.0),
            Err(Error::NoStationaryPoint { .. })
        ));
        assert!(stationary_tau(-5.0, 1.0).is_err());
        assert!(stationary_tau(1.0, 0.0).is_err());
    }

    #[test]
    fn ua_with_dead_link_sits_at_zero() {
        let params = SystemParams {
            eta: 0.0,
            ..SystemParams::default()
        };
        let sol = solve_ua(&params);
        assert_eq!(sol.tau_star, 0.0);
        assert_eq!(sol.rate_at_tau, 0.0);
        assert!(sol.residual.is_none());
    }

    #[test]
    fn ua_picks_the_interior_point_when_live() {
        let params = SystemParams::default();
        let sol = solve_ua(&params);
        assert!(sol.tau_star > 0.0 && sol.tau_star < params.slot_seconds);
        assert!(sol.rate_at_tau > 0.0);
        assert!(sol.residual.unwrap() < 1e-10);
        for &(_, obj) in &sol.candidates {
            assert!(sol.rate_at_tau >= obj);
        }
    }

    #[test]
    fn la_harvests_longer_than_ua() {
        // the lower-bound coefficient is smaller, and a smaller coefficient
        // pushes the stationary point later; check the solved taus directly
        for p1_dbm in [-10.0, 0.0, 10.0, 20.0, 30.0] {
            let params = SystemParams {
                p1_watts: crate::model::dbm_to_watts(p1_dbm),
                ..SystemParams::default()
            };
            let ua = solve_ua(&params);
            let la = solve_la(&params);
            assert!(
                la.tau_star > ua.tau_star,
                "p1 {p1_dbm} dBm: {} !> {}",
                la.tau_star,
                ua.tau_star
            );
        }
    }

    #[test]
    fn ea_is_always_the_midpoint() {
        let mut params = SystemParams::default();
        assert!((solve_ea(&params).tau_star - 2.5e-3).abs() < 1e-18);
        params.slot_seconds = 1.0;
        let sol = solve_ea(&params);
        assert!((sol.tau_star - 0.5).abs() < 1e-15);

        // unit coefficient at the midpoint gives exactly half a bit
        let rate = rate_from_coefficient(0.5, 1.0, 1.0).unwrap();
        assert!((rate - 0.5).abs() < 1e-15);
    }

    #[test]
    fn imperfect_solver_collapses_at_rho_one() {
        let params = SystemParams::default();
        let ua = solve_ua(&params);
        let uae = solve_ua_imperfect(&params);
        assert_eq!(ua.tau_star, uae.tau_star);
        assert_eq!(ua.rate_at_tau, uae.rate_at_tau);
    }

    #[test]
    fn imperfect_solver_loses_rate_at_rho_below_one() {
        let perfect = solve_ua(&SystemParams::default());
        let degraded = solve_ua_imperfect(&SystemParams {
            rho: 0.9,
            ..SystemParams::default()
        });
        assert!(degraded.rate_at_tau < perfect.rate_at_tau);
    }

    #[test]
    fn imperfect_solver_ignores_bits_at_rho_zero() {
        let a = solve_ua_imperfect(&SystemParams {
            rho: 0.0,
            feedback_bits: 0,
            ..SystemParams::default()
        });
        let b = solve_ua_imperfect(&SystemParams {
            rho: 0.0,
            feedback_bits: 8,
            ..SystemParams::default()
        });
        assert_eq!(a.tau_star, b.tau_star);
        assert_eq!(a.rate_at_tau, b.rate_at_tau);
    }

    #[test]
    fn solver_beats_a_fine_grid() {
        // random parameter sets; the candidate solve must match or beat a
        // 10^4-point scan of its own objective
        let mut seed = 0x243f6a8885a308d3u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let coeff = 10f64.powf(-2.0 + 8.0 * next());
            let slot = 10f64.powf(-3.0 + 4.0 * next());
            let sol = solve_with_coefficient(coeff, slot, Algorithm::Ua);
            let mut grid_best = f64::NEG_INFINITY;
            for i in 0..=10_000 {
                let t = slot * (i as f64 / 10_000.0);
                grid_best = grid_best.max(rate_from_coefficient(t, coeff, slot).unwrap());
            }
            assert!(
                sol.rate_at_tau >= grid_best - 1e-9,
                "coeff {coeff} slot {slot}: {} vs {grid_best}",
                sol.rate_at_tau
            );
        }
    }

    #[test]
    fn optimal_fraction_decreases_with_coefficient() {
        let mut prev = f64::INFINITY;
        let mut k = 1e-2;
        while k <= 1e6 {
            let x = stationary_tau(k, 1.0).unwrap();
            assert!(x < prev, "k {k}: {x} !< {prev}");
            prev = x;
            k *= 10.0;
        }
    }

    proptest! {
        #[test]
        fn root_scales_linearly_with_slot(
            log_k in -2.0..6.0f64,
            slot in 1e-3..10.0f64,
        ) {
            let k = 10f64.powf(log_k);
            let one = stationary_tau(k, slot).unwrap();
            let two = stationary_tau(k, 2.0 * slot).unwrap();
            prop_assert!((two - 2.0 * one).abs() / two < 1e-9);
        }

        #[test]
        fn stationary_point_increasing_in_slot(
            log_k in -2.0..6.0f64,
            slot in 1e-3..10.0f64,
            factor in 1.1..10.0f64,
        ) {
            let k = 10f64.powf(log_k);
            let base = stationary_tau(k, slot).unwrap();
            let longer = stationary_tau(k, slot * factor).unwrap();
            prop_assert!(longer > base);
        }
    }
}
