//! Built-in invariant suite behind `weit check`: fast self-contained
//! verifications of the closed forms, printed one line per check.

use weit_core::bounds::{compute_coefficients, digamma_positive_int, EULER_CONSTANT};
use weit_core::codebook::{expected_max_beta, max_beta_pdf, mean_gain_bracket};
use weit_core::model::{dbm_to_watts, watts_to_dbm, FormulaMode, SystemParams};
use weit_core::montecarlo::{mc_rate, McConfig};
use weit_core::tradeoff::{stationary_lhs, stationary_tau};

type CheckResult = Result<String, String>;

/// Runs every check and prints one ok/FAIL line each; returns whether the
/// whole suite passed.
pub fn run_all() -> bool {
    let checks: [(&str, fn() -> CheckResult); 7] = [
        ("dbm round trip", check_dbm_round_trip),
        ("mean-gain pinch", check_gain_bracket),
        ("digamma harmonic form", check_digamma),
        ("gain mean vs quadrature", check_quadrature_mean),
        ("stationary residuals", check_stationary),
        ("coefficient collapse", check_collapse),
        ("simulation determinism", check_determinism),
    ];
    let mut all_ok = true;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("ok   {name} — {detail}"),
            Err(detail) => {
                all_ok = false;
                println!("FAIL {name} — {detail}");
            }
        }
    }
    all_ok
}

fn check_dbm_round_trip() -> CheckResult {
    let mut worst = 0.0f64;
    let mut x = -150.0;
    while x <= 50.0 {
        let back = watts_to_dbm(dbm_to_watts(x)).map_err(|e| e.to_string())?;
        worst = worst.max((back - x).abs() / x.abs().max(1.0));
        x += 0.25;
    }
    if worst < 1e-12 {
        Ok(format!("worst relative error {worst:.2e}"))
    } else {
        Err(format!("worst relative error {worst:.2e} exceeds 1e-12"))
    }
}

fn check_gain_bracket() -> CheckResult {
    for nt in 2..=8usize {
        for bits in 0..=10u32 {
            let mean = expected_max_beta(nt, bits).map_err(|e| e.to_string())?;
            let (lo, hi) = mean_gain_bracket(nt, bits);
            let ok = lo < mean
                && if bits == 0 {
                    (mean - hi).abs() < 1e-12
                } else {
                    mean < hi
                };
            if !ok {
                return Err(format!("nt={nt} bits={bits}: {lo} / {mean} / {hi}"));
            }
        }
    }
    Ok("strict inside the pinch for B >= 1, right-edge equality at B = 0".to_string())
}

fn check_digamma() -> CheckResult {
    let got = digamma_positive_int(4).map_err(|e| e.to_string())?;
    let want = 11.0 / 6.0 - EULER_CONSTANT;
    let err = (got - want).abs();
    if err < 1e-12 {
        Ok(format!("psi(4) error {err:.2e}"))
    } else {
        Err(format!("psi(4) error {err:.2e} exceeds 1e-12"))
    }
}

fn check_quadrature_mean() -> CheckResult {
    // composite Simpson on a fine uniform grid
    let (nt, bits) = (4usize, 4u32);
    let n = 200_000usize;
    let h = 1.0 / n as f64;
    let f = |x: f64| x * max_beta_pdf(x, nt, bits).unwrap();
    let mut sum = f(0.0) + f(1.0);
    for i in 1..n {
        let w = if i % 2 == 0 { 2.0 } else { 4.0 };
        sum += w * f(i as f64 * h);
    }
    let mean = sum * h / 3.0;
    let closed = expected_max_beta(nt, bits).map_err(|e| e.to_string())?;
    let err = (mean - closed).abs();
    if err < 1e-8 {
        Ok(format!("|quadrature - closed form| = {err:.2e}"))
    } else {
        Err(format!("|quadrature - closed form| = {err:.2e} exceeds 1e-8"))
    }
}

fn check_stationary() -> CheckResult {
    let mut worst = 0.0f64;
    for i in 0..40 {
        let coeff = 10f64.powf(-2.0 + 8.0 * (i as f64 / 39.0));
        let slot = 5e-3;
        let tau = stationary_tau(coeff, slot).map_err(|e| e.to_string())?;
        worst = worst.max(stationary_lhs(coeff, tau / slot).abs());
    }
    if worst < 1e-10 {
        Ok(format!("worst residual {worst:.2e}"))
    } else {
        Err(format!("worst residual {worst:.2e} exceeds 1e-10"))
    }
}

fn check_collapse() -> CheckResult {
    for mode in [FormulaMode::PaperExact, FormulaMode::Consistent] {
        let coeff = compute_coefficients(&SystemParams {
            mode,
            ..SystemParams::default()
        });
        if coeff.b_imperfect != coeff.b_upper {
            return Err(format!("{mode}: imperfect coefficient differs at rho = 1"));
        }
        if coeff.d_lower >= coeff.b_upper {
            return Err(format!("{mode}: lower coefficient not below upper"));
        }
    }
    Ok("rho = 1 collapse exact; lower < upper in both conventions".to_string())
}

fn check_determinism() -> CheckResult {
    let params = SystemParams::default();
    let cfg = McConfig::new(5_000, 424242, params.slot_seconds);
    let a = mc_rate(&params, 2e-3, &cfg).map_err(|e| e.to_string())?;
    let b = mc_rate(&params, 2e-3, &cfg).map_err(|e| e.to_string())?;
    if a.mean.to_bits() == b.mean.to_bits() && a.std_error.to_bits() == b.std_error.to_bits() {
        Ok(format!("repeated estimate identical ({:.6} b/s/Hz)", a.mean))
    } else {
        Err("repeated estimate differs".to_string())
    }
}
