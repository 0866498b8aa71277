//! Fading realizations and the correlated estimation-error model.
//!
//! Forward and reverse channels are independent circularly symmetric
//! Gaussian vectors (the duplexing gap is assumed wider than the
//! correlation bandwidth), redrawn every slot.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::model::SystemParams;

/// One slot's channel realization.
#[derive(Debug, Clone)]
pub struct ChannelDraw {
    /// True forward fading (power transfer direction).
    pub h: Vec<Complex64>,
    /// Reverse fading (information direction), independent of `h`.
    pub g: Vec<Complex64>,
    /// Estimated forward fading available at the device.
    pub h_est: Vec<Complex64>,
    /// Estimation noise; combined with `h_est` to form `h`.
    pub n_err: Vec<Complex64>,
}

impl ChannelDraw {
    /// Samples a full realization: `h_est`, `g`, `n_err` in that order,
    /// then composes the true channel from the estimation pair.
    pub fn sample(params: &SystemParams, rng: &mut impl Rng) -> Result<ChannelDraw, Error> {
        let v = params.entry_variance;
        let h_est = sample_fading(params.nt, v, rng);
        let g = sample_fading(params.nt, v, rng);
        let n_err = sample_fading(params.nt, v, rng);
        let h = apply_estimation_error(&h_est, &n_err, params.rho)?;
        Ok(ChannelDraw { h, g, h_est, n_err })
    }
}

/// Draws an i.i.d. circularly symmetric Gaussian vector whose real and
/// imaginary parts each carry variance `entry_variance / 2`, so that
/// `E||h||^2 = nt * entry_variance`.
pub fn sample_fading(nt: usize, entry_variance: f64, rng: &mut impl Rng) -> Vec<Complex64> {
    let scale = (entry_variance / 2.0).sqrt();
    (0..nt)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(scale * re, scale * im)
        })
        .collect()
}

/// Composes the true channel from an estimate and an independent noise
/// vector: `rho * h_est + sqrt(1 - rho^2) * n_err`.
///
/// When both inputs share the same entry variance the output does too, for
/// any `rho`. The endpoints return the corresponding input bit-for-bit.
pub fn apply_estimation_error(
    h_est: &[Complex64],
    n_err: &[Complex64],
    rho: f64,
) -> Result<Vec<Complex64>, Error> {
    if h_est.len() != n_err.len() {
        return Err(Error::LengthMismatch {
            left: h_est.len(),
            right: n_err.len(),
        });
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::OutOfRange {
            name: "rho",
            lo: 0.0,
            hi: 1.0,
            value: rho,
        });
    }
    if rho == 1.0 {
        return Ok(h_est.to_vec());
    }
    if rho == 0.0 {
        return Ok(n_err.to_vec());
    }
    let noise_scale = (1.0 - rho * rho).sqrt();
    Ok(h_est
        .iter()
        .zip(n_err)
        .map(|(e, n)| rho * e + noise_scale * n)
        .collect())
}
