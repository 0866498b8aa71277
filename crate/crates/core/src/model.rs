//! System parameters, unit conversions, and the power-law path loss model.
//!
//! Everything downstream works in SI units (watts, seconds). dBm and
//! milliseconds exist only at the CLI boundary, converted through this
//! module, so the closed-form algebra never sees mixed units.

use crate::error::Error;

/// Which coefficient convention the closed-form bounds use.
///
/// The two conventions differ in how the fading normalization enters the
/// rate coefficients:
///
/// - [`FormulaMode::PaperExact`] uses fixed constants (`4 a Nt^2`,
///   `2 a (1-rho^2) Nt`, and `exp(2 psi(Nt))` without a variance factor),
///   i.e. it ignores [`SystemParams::entry_variance`].
/// - [`FormulaMode::Consistent`] scales every moment by the actual
///   per-entry variance `v`, so the bound ordering (upper bound above the
///   simulated mean) provably holds for any `v`. This is the default.
///
/// Both produce the same upper-bound coefficient when `v = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaMode {
    PaperExact,
    Consistent,
}

impl FormulaMode {
    /// Stable token used in CLI flags, config files, and CSV metadata.
    pub fn token(self) -> &'static str {
        match self {
            FormulaMode::PaperExact => "paper-exact",
            FormulaMode::Consistent => "consistent",
        }
    }
}

impl std::fmt::Display for FormulaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for FormulaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "paper-exact" => Ok(FormulaMode::PaperExact),
            "consistent" => Ok(FormulaMode::Consistent),
            _ => Err(Error::OutOfRange {
                name: "mode",
                lo: 0.0,
                hi: 1.0,
                value: f64::NAN,
            }),
        }
    }
}

/// All physical and protocol constants of one link configuration.
///
/// Fields are public; call [`SystemParams::validate`] after construction
/// (the CLI does) — the numerical routines assume a valid set.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Antenna count at the powering terminal.
    pub nt: usize,
    /// Feedback budget `B`; the codebook has `2^B` entries.
    pub feedback_bits: u32,
    /// Energy conversion efficiency, in `[0, 1]`.
    pub eta: f64,
    /// Transmit power of the powering terminal, watts.
    pub p1_watts: f64,
    /// Receiver noise variance, watts.
    pub sigma2_watts: f64,
    /// Slot length `T`, seconds.
    pub slot_seconds: f64,
    /// Forward (power-transfer) path loss, unitless.
    pub alpha: f64,
    /// Reverse (information) path loss, unitless.
    pub theta: f64,
    /// Correlation between the true and estimated forward channel;
    /// `1` means perfect estimation.
    pub rho: f64,
    /// Per-complex-entry variance `v` of the fading vectors, i.e.
    /// `E|h_i|^2`; real and imaginary parts each carry `v/2`.
    pub entry_variance: f64,
    /// Coefficient convention for the closed-form bounds.
    pub mode: FormulaMode,
}

impl Default for SystemParams {
    /// A four-antenna desk-scale link: 10 m separation with a fourth-power
    /// path loss referenced to 20 dB at 1 m, 0 dBm transmit power,
    /// -125 dBm noise, 5 ms slots, 4 feedback bits, perfect estimation.
    fn default() -> Self {
        SystemParams {
            nt: 4,
            feedback_bits: 4,
            eta: 0.8,
            p1_watts: dbm_to_watts(0.0),
            sigma2_watts: dbm_to_watts(-125.0),
            slot_seconds: 5e-3,
            alpha: 1e-6,
            theta: 1e-6,
            rho: 1.0,
            entry_variance: 2.0,
            mode: FormulaMode::Consistent,
        }
    }
}

impl SystemParams {
    /// Checks every invariant; returns the first violation.
    pub fn validate(&self) -> Result<(), Error> {
        if self.nt < 1 {
            return Err(Error::TooSmall {
                name: "nt",
                min: 1,
                value: self.nt,
            });
        }
        for (name, value) in [
            ("p1_watts", self.p1_watts),
            ("sigma2_watts", self.sigma2_watts),
            ("slot_seconds", self.slot_seconds),
            ("alpha", self.alpha),
            ("theta", self.theta),
            ("entry_variance", self.entry_variance),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositive { name, value });
            }
        }
        for (name, value) in [("eta", self.eta), ("rho", self.rho)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange {
                    name,
                    lo: 0.0,
                    hi: 1.0,
                    value,
                });
            }
        }
        Ok(())
    }
}

/// dBm to watts: `10^((x - 30) / 10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Watts to dBm; errors on non-positive power.
pub fn watts_to_dbm(watts: f64) -> Result<f64, Error> {
    if !(watts > 0.0) {
        return Err(Error::NonPositive {
            name: "watts",
            value: watts,
        });
    }
    Ok(10.0 * watts.log10() + 30.0)
}

/// Power-law path loss with a 20 dB reference loss at 1 m:
/// `10^-2 * distance^-exponent`.
pub fn path_loss(distance_m: f64, exponent: f64) -> Result<f64, Error> {
    if !(distance_m > 0.0) {
        return Err(Error::NonPositive {
            name: "distance_m",
            value: distance_m,
        });
    }
    Ok(1e-2 * distance_m.powf(-exponent))
}

/// The end-to-end SNR coefficient `a = eta * alpha * theta * P1 / sigma^2`
/// that multiplies every fading term in the rate expressions.
pub fn snr_coefficient_a(params: &SystemParams) -> f64 {
    params.eta * params.alpha * params.theta * params.p1_watts / params.sigma2_watts
}
