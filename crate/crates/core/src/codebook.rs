//! Limited-feedback quantization codebooks and the order statistics of the
//! quantization gain.
//!
//! A random vector quantization (RVQ) codebook holds `2^B` i.i.d. isotropic
//! unit vectors. For an isotropic channel direction the squared inner
//! product with one codeword is Beta(1, Nt-1) distributed, so the selected
//! gain is the maximum of `2^B` such variables; [`max_beta_pdf`] and
//! [`expected_max_beta`] give its density and mean in closed form.

use num_complex::Complex64;
use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::channel::sample_fading;
use crate::cvec::{inner, norm_sqr, normalized};
use crate::error::Error;

/// An immutable beamforming codebook of `2^bits` unit-norm vectors.
#[derive(Debug, Clone)]
pub struct Codebook {
    vectors: Vec<Vec<Complex64>>,
    bits: u32,
}

impl Codebook {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn get(&self, index: usize) -> &[Complex64] {
        &self.vectors[index]
    }

    /// Builds a codebook from explicit vectors (normalizing each); mainly
    /// useful for tests and frozen designs.
    pub fn from_vectors(vectors: Vec<Vec<Complex64>>, bits: u32) -> Result<Codebook, Error> {
        if vectors.len() != 1usize << bits {
            return Err(Error::TooSmall {
                name: "codebook entries",
                min: 1usize << bits,
                value: vectors.len(),
            });
        }
        let vectors = vectors.iter().map(|v| normalized(v)).collect();
        Ok(Codebook { vectors, bits })
    }
}

/// Generates a fresh RVQ codebook: `2^bits` independent isotropic unit
/// vectors of dimension `nt`.
pub fn generate_rvq(nt: usize, bits: u32, rng: &mut impl Rng) -> Codebook {
    assert!(nt >= 1, "nt must be at least 1");
    assert!(bits <= 24, "a codebook of 2^{bits} entries is impractical");
    let count = 1usize << bits;
    let vectors = (0..count)
        .map(|_| {
            // Normalizing an isotropic Gaussian vector gives a uniform
            // direction on the complex unit sphere.
            let v = sample_fading(nt, 2.0, rng);
            normalized(&v)
        })
        .collect();
    Codebook { vectors, bits }
}

/// Picks the codeword maximizing `|h^H w_i|^2`; ties go to the lowest index.
pub fn select_codeword(h: &[Complex64], cb: &Codebook) -> Result<usize, Error> {
    if norm_sqr(h) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut best = 0usize;
    let mut best_gain = f64::NEG_INFINITY;
    for (i, w) in cb.vectors.iter().enumerate() {
        if w.len() != h.len() {
            return Err(Error::LengthMismatch {
                left: h.len(),
                right: w.len(),
            });
        }
        let gain = inner(h, w).norm_sqr();
        if gain > best_gain {
            best_gain = gain;
            best = i;
        }
    }
    Ok(best)
}

/// Normalized beamforming gain `|h^H w|^2 / ||h||^2`, in `[0, 1]` for a
/// unit-norm `w`.
pub fn quantization_gain(h: &[Complex64], w: &[Complex64]) -> Result<f64, Error> {
    if h.len() != w.len() {
        return Err(Error::LengthMismatch {
            left: h.len(),
            right: w.len(),
        });
    }
    let h2 = norm_sqr(h);
    if h2 == 0.0 || norm_sqr(w) == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(inner(h, w).norm_sqr() / h2)
}

/// Density of the selected quantization gain: the maximum of `2^bits`
/// i.i.d. Beta(1, nt-1) variables,
/// `2^B (Nt-1) (1-x)^(Nt-2) (1 - (1-x)^(Nt-1))^(2^B - 1)` on `[0, 1]`.
///
/// Points outside the support have density zero. A single antenna has a
/// deterministic gain of one and therefore no density.
pub fn max_beta_pdf(x: f64, nt: usize, bits: u32) -> Result<f64, Error> {
    if nt < 1 {
        return Err(Error::TooSmall {
            name: "nt",
            min: 1,
            value: nt,
        });
    }
    if nt == 1 {
        return Err(Error::DegenerateGain);
    }
    if !(0.0..=1.0).contains(&x) {
        return Ok(0.0);
    }
    let count = 2f64.powi(bits as i32);
    let shape = (nt - 1) as f64;
    let single_cdf = 1.0 - (1.0 - x).powf(shape);
    Ok(count * shape * (1.0 - x).powf(shape - 1.0) * single_cdf.powf(count - 1.0))
}

/// Closed-form mean of the selected quantization gain,
/// `1 - 2^B * Beta(2^B, Nt / (Nt-1))`, evaluated through log-gamma so the
/// codebook size can reach `2^20` and beyond without overflow.
///
/// A single antenna returns exactly one (the gain is deterministic).
pub fn expected_max_beta(nt: usize, bits: u32) -> Result<f64, Error> {
    if nt < 1 {
        return Err(Error::TooSmall {
            name: "nt",
            min: 1,
            value: nt,
        });
    }
    if nt == 1 {
        return Ok(1.0);
    }
    let count = 2f64.powi(bits as i32);
    let s = nt as f64 / (nt as f64 - 1.0);
    let ln_beta = ln_gamma(count) + ln_gamma(s) - ln_gamma(count + s);
    Ok(1.0 - (bits as f64 * std::f64::consts::LN_2 + ln_beta).exp())
}

/// The two-sided pinch on [`expected_max_beta`]:
/// `1 - 2^(-B/(Nt-1)) < mean <= 1 - ((Nt-1)/Nt) 2^(-B/(Nt-1))`,
/// with equality on the right exactly at `B = 0`.
pub fn mean_gain_bracket(nt: usize, bits: u32) -> (f64, f64) {
    let x = 2f64.powf(-(bits as f64) / (nt as f64 - 1.0));
    (1.0 - x, 1.0 - (nt as f64 - 1.0) / nt as f64 * x)
}
