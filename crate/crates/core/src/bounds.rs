//! Closed-form bounds on the average information rate.
//!
//! Every bound has the shape `(T-tau)/T * log2(1 + k * tau / (T-tau))` and
//! differs only in the constant `k`:
//!
//! - `b_upper` — Jensen upper bound on the true average rate;
//! - `d_lower` — approximate lower bound, obtained by pushing the
//!   expectation through the exponential and replacing the mean log fading
//!   power with the digamma function;
//! - `b_imperfect` — upper bound when beam selection runs on an imperfect
//!   channel estimate with correlation `rho`.

use crate::error::Error;
use crate::model::{snr_coefficient_a, FormulaMode, SystemParams};

/// Euler's constant as used by the digamma evaluation.
pub const EULER_CONSTANT: f64 = 0.57721566490;

/// Derived scalars feeding the closed-form rate functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    /// End-to-end SNR coefficient `a`.
    pub a: f64,
    /// Upper-bound coefficient `b`.
    pub b_upper: f64,
    /// `c = a * (1 - 2^(-B/(Nt-1)))`, the SNR coefficient scaled by the
    /// lower pinch on the mean quantization gain.
    pub c_gain: f64,
    /// Lower-bound coefficient `d`.
    pub d_lower: f64,
    /// Upper-bound coefficient under imperfect estimation; collapses to
    /// `b_upper` at `rho = 1`.
    pub b_imperfect: f64,
    /// Convention the coefficients were computed under.
    pub mode: FormulaMode,
}

/// Digamma at a positive integer: `psi(n) = H_{n-1} - C`, the harmonic
/// partial sum minus Euler's constant.
pub fn digamma_positive_int(n: usize) -> Result<f64, Error> {
    if n < 1 {
        return Err(Error::TooSmall {
            name: "n",
            min: 1,
            value: n,
        });
    }
    let harmonic: f64 = (1..n).map(|k| 1.0 / k as f64).sum();
    Ok(harmonic - EULER_CONSTANT)
}

/// Quantization-gain factors `(upper, lower)` for the mean-gain pinch;
/// a single antenna always has gain one.
fn gain_factors(nt: usize, bits: u32) -> (f64, f64) {
    if nt == 1 {
        return (1.0, 1.0);
    }
    let nt = nt as f64;
    let x = 2f64.powf(-(bits as f64) / (nt - 1.0));
    (1.0 - (nt - 1.0) / nt * x, 1.0 - x)
}

fn with_gain_factors(params: &SystemParams, gain_upper: f64, gain_lower: f64) -> Coefficients {
    let a = snr_coefficient_a(params);
    let nt = params.nt as f64;
    let psi = digamma_positive_int(params.nt).expect("nt >= 1");
    let exp_2psi = (2.0 * psi).exp();
    let rho2 = params.rho * params.rho;
    let (b_upper, d_lower, b_imperfect) = match params.mode {
        FormulaMode::PaperExact => {
            let b = 4.0 * a * nt * nt * gain_upper;
            let d = a * gain_lower * exp_2psi;
            let be = rho2 * b + 2.0 * a * (1.0 - rho2) * nt;
            (b, d, be)
        }
        FormulaMode::Consistent => {
            let v2 = params.entry_variance * params.entry_variance;
            let b = a * v2 * nt * nt * gain_upper;
            let d = a * v2 * gain_lower * exp_2psi;
            let be = rho2 * b + a * (1.0 - rho2) * v2 * nt;
            (b, d, be)
        }
    };
    Coefficients {
        a,
        b_upper,
        c_gain: a * gain_lower,
        d_lower,
        b_imperfect,
        mode: params.mode,
    }
}

/// Computes all rate coefficients for the configured feedback budget.
pub fn compute_coefficients(params: &SystemParams) -> Coefficients {
    let (gu, gl) = gain_factors(params.nt, params.feedback_bits);
    with_gain_factors(params, gu, gl)
}

/// Coefficients for a full-CSI beam (the infinite-feedback limit, where the
/// quantization gain is one).
pub fn compute_coefficients_mrt(params: &SystemParams) -> Coefficients {
    with_gain_factors(params, 1.0, 1.0)
}

/// The common rate shape `(T-tau)/T * log2(1 + k * tau/(T-tau))`, with the
/// endpoint values pinned to their continuous limit of zero.
pub fn rate_from_coefficient(tau: f64, coeff: f64, slot: f64) -> Result<f64, Error> {
    if !(tau >= 0.0 && tau <= slot) {
        return Err(Error::OutOfRange {
            name: "tau",
            lo: 0.0,
            hi: slot,
            value: tau,
        });
    }
    if tau == 0.0 || tau == slot {
        return Ok(0.0);
    }
    let remaining = slot - tau;
    Ok(remaining / slot * (1.0 + coeff * tau / remaining).log2())
}

/// Jensen upper bound on the average rate at harvest duration `tau`.
pub fn rate_upper(tau: f64, coeff: &Coefficients, slot: f64) -> Result<f64, Error> {
    rate_from_coefficient(tau, coeff.b_upper, slot)
}

/// Approximate lower bound on the average rate.
pub fn rate_lower(tau: f64, coeff: &Coefficients, slot: f64) -> Result<f64, Error> {
    rate_from_coefficient(tau, coeff.d_lower, slot)
}

/// Upper bound under imperfect channel estimation.
pub fn rate_upper_imperfect(tau: f64, coeff: &Coefficients, slot: f64) -> Result<f64, Error> {
    rate_from_coefficient(tau, coeff.b_imperfect, slot)
}
