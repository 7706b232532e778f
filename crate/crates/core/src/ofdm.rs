//! CP-OFDM and closed-form Gray-QAM bit error probabilities.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};
use crate::gfdm::{add_cp, remove_cp};
use crate::mapping::Qam;
use crate::scalar::Real;

/// Magnitude below which a channel bin is treated as a spectral null.
pub const NULL_BIN_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OfdmParams {
    pub n_fft: usize,
    pub n_cp: usize,
    /// Active bins in the order data symbols are loaded.
    pub active: Vec<usize>,
}

impl OfdmParams {
    /// All `n_fft` bins active.
    pub fn full(n_fft: usize, n_cp: usize) -> Result<Self> {
        Self::new(n_fft, n_cp, (0..n_fft).collect())
    }

    pub fn new(n_fft: usize, n_cp: usize, active: Vec<usize>) -> Result<Self> {
        if n_fft == 0 {
            return Err(Error::param("n_fft", "must be >= 1"));
        }
        if n_cp >= n_fft {
            return Err(Error::param("n_cp", format!("{n_cp} must be below n_fft = {n_fft}")));
        }
        let mut seen = vec![false; n_fft];
        for &bin in &active {
            if bin >= n_fft || seen[bin] {
                return Err(Error::param("active", format!("bin {bin} out of range or repeated")));
            }
            seen[bin] = true;
        }
        if active.is_empty() {
            return Err(Error::param("active", "no active subcarriers"));
        }
        Ok(Self { n_fft, n_cp, active })
    }

    pub fn frame_len(&self) -> usize {
        self.n_fft + self.n_cp
    }
}

#[derive(Clone)]
pub struct OfdmModem<T: Real> {
    params: OfdmParams,
    ifft: Arc<dyn Fft<T>>,
    fft: Arc<dyn Fft<T>>,
    norm: T,
}

impl<T: Real> fmt::Debug for OfdmModem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OfdmModem").field("params", &self.params).finish()
    }
}

impl<T: Real> OfdmModem<T> {
    pub fn new(params: OfdmParams) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            ifft: planner.plan_fft_inverse(params.n_fft),
            fft: planner.plan_fft_forward(params.n_fft),
            norm: T::from_count(params.n_fft).sqrt().recip(),
            params,
        }
    }

    pub fn params(&self) -> &OfdmParams {
        &self.params
    }

    /// Unitary inverse DFT of the loaded bins, then the cyclic prefix.
    pub fn modulate(&self, d: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        check_len("OFDM data vector", self.params.active.len(), d.len())?;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.params.n_fft];
        for (&bin, &v) in self.params.active.iter().zip(d) {
            buf[bin] = v;
        }
        self.ifft.process(&mut buf);
        buf.iter_mut().for_each(|v| *v = *v * self.norm);
        add_cp(&buf, self.params.n_cp)
    }

    /// Removes the prefix, applies the unitary DFT and divides every active
    /// bin by `response[bin]` (flat channel when `None`).
    pub fn demodulate(&self, y: &[Complex<T>], response: Option<&[Complex<T>]>) -> Result<Vec<Complex<T>>> {
        check_len("OFDM received frame", self.params.frame_len(), y.len())?;
        if let Some(h) = response {
            check_len("OFDM channel response", self.params.n_fft, h.len())?;
        }
        let mut buf = remove_cp(y, self.params.n_cp)?;
        self.fft.process(&mut buf);
        self.params
            .active
            .iter()
            .map(|&bin| {
                let v = buf[bin] * self.norm;
                match response {
                    None => Ok(v),
                    Some(h) => {
                        let mag = h[bin].norm().to_f64_lossy();
                        if mag < NULL_BIN_THRESHOLD {
                            return Err(Error::IllConditionedEqualization { bin, magnitude: mag });
                        }
                        Ok(v / h[bin])
                    }
                }
            })
            .collect()
    }
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Channel assumption for the closed-form curves.
#[derive(Clone, Debug, PartialEq)]
pub enum TheoryChannel {
    Awgn,
    /// Flat Rayleigh fading with `E|h|^2 = mean_power`.
    RayleighFlat { mean_power: f64 },
    /// Fixed per-subcarrier power gains `|H_k|^2`, BER averaged over subcarriers.
    SubcarrierGains(Vec<f64>),
}

/// Terms `(weight, c)` such that the per-axis Gray-PAM bit error probability
/// equals `sum weight * Q(c * sqrt(gamma_b))`.
fn gray_pam_terms(order: usize) -> Result<Vec<(f64, f64)>> {
    let q = Qam::<f64>::new(order)?;
    let bits = q.bits_per_symbol();
    let levels = 1usize << (bits / 2);
    let gray = |i: usize| i ^ (i >> 1);
    let bits_per_axis = (bits / 2) as f64;
    // distance (in half-spacing units) -> accumulated weight
    let mut weights = vec![0.0; 2 * levels + 1];
    for i in 0..levels {
        for j in 0..levels {
            if i == j {
                continue;
            }
            let flips = (gray(i) ^ gray(j)).count_ones() as f64;
            // decision region of level j spans boundaries at |j - i| * 2 -+ 1 half-spacings
            let dist = 2 * i.abs_diff(j);
            let inner = dist - 1;
            let outer = dist + 1;
            let w = flips / (levels as f64 * bits_per_axis);
            weights[inner] += w;
            if j != 0 && j != levels - 1 {
                weights[outer] -= w;
            }
        }
    }
    // half spacing over per-axis noise std: scale * sqrt(2 log2(M) gamma_b)
    let base = q.scale() * (2.0 * bits as f64).sqrt();
    Ok(weights
        .iter()
        .enumerate()
        .filter(|(_, w)| w.abs() > 0.0)
        .map(|(d, &w)| (w, base * d as f64))
        .collect())
}

/// Bit error probability of Gray-mapped square QAM at `ebn0_db`.
pub fn theoretical_ber(ebn0_db: f64, order: usize, channel: &TheoryChannel) -> Result<f64> {
    let terms = gray_pam_terms(order)?;
    let gamma = 10f64.powf(ebn0_db / 10.0);
    let awgn = |g: f64| -> f64 { terms.iter().map(|&(w, c)| w * q_function(c * g.sqrt())).sum() };
    let p = match channel {
        TheoryChannel::Awgn => awgn(gamma),
        TheoryChannel::RayleighFlat { mean_power } => terms
            .iter()
            .map(|&(w, c)| {
                let b = c * c * mean_power * gamma / 2.0;
                w * 0.5 * (1.0 - (b / (1.0 + b)).sqrt())
            })
            .sum(),
        TheoryChannel::SubcarrierGains(g) => {
            if g.is_empty() {
                return Err(Error::Empty("subcarrier gains"));
            }
            g.iter().map(|&h2| awgn(gamma * h2)).sum::<f64>() / g.len() as f64
        }
    };
    Ok(p.clamp(0.0, 0.5))
}
