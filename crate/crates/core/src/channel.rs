//! Channel models, noise, the circulant channel matrix and frequency-domain
//! zero-forcing equalization.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::ofdm::NULL_BIN_THRESHOLD;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelLabel {
    Awgn,
    Tifs,
    Tvfs,
}

impl ChannelLabel {
    pub fn name(self) -> &'static str {
        match self {
            ChannelLabel::Awgn => "awgn",
            ChannelLabel::Tifs => "tifs",
            ChannelLabel::Tvfs => "tvfs",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvolutionMode {
    /// Output has `len(x) + len(taps) - 1` samples.
    Linear,
    /// Output has `len(x)` samples; the tail wraps onto the start.
    Circular,
}

/// Tap amplitudes of the time-variant profile.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TvfsProfile {
    /// `[1, 0, 0.01^2, 0.02^2] / sqrt(2)`, as tabulated.
    #[default]
    Verbatim,
    /// `[1, 0.4, 0.01, 0.02] / sqrt(2)`. Not the tabulated profile: a
    /// noticeably frequency-selective alternative.
    Corrected,
}

impl TvfsProfile {
    pub fn gains(self) -> [f64; 4] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            TvfsProfile::Verbatim => [s, 0.0, 0.01 * 0.01 * s, 0.02 * 0.02 * s],
            TvfsProfile::Corrected => [s, 0.4 * s, 0.01 * s, 0.02 * s],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization<T> {
    pub taps: Vec<Complex<T>>,
    pub mode: ConvolutionMode,
    pub label: ChannelLabel,
}

fn real_taps<T: Real>(taps: &[f64]) -> Vec<Complex<T>> {
    taps.iter().map(|&v| Complex::new(T::lit(v), T::zero())).collect()
}

pub const TIFS_TAPS: [f64; 8] = [1.0, 0.0, 0.0, 0.0, 0.4, 0.0, 0.0, 0.2];

pub fn make_awgn<T: Real>(mode: ConvolutionMode) -> ChannelRealization<T> {
    ChannelRealization {
        taps: real_taps(&[1.0]),
        mode,
        label: ChannelLabel::Awgn,
    }
}

pub fn make_tifs<T: Real>(mode: ConvolutionMode) -> ChannelRealization<T> {
    ChannelRealization {
        taps: real_taps(&TIFS_TAPS),
        mode,
        label: ChannelLabel::Tifs,
    }
}

/// One `CN(0, 1)` sample.
pub fn standard_complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(T::lit(re * s), T::lit(im * s))
}

/// Block-fading draw: `taps[n] = gain[n] r_n`, `r_n ~ CN(0, 1)` i.i.d.
pub fn draw_tvfs<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    profile: TvfsProfile,
    mode: ConvolutionMode,
) -> ChannelRealization<T> {
    let taps = profile
        .gains()
        .iter()
        .map(|&g| standard_complex_normal::<T, R>(rng) * T::lit(g))
        .collect();
    ChannelRealization {
        taps,
        mode,
        label: ChannelLabel::Tvfs,
    }
}

pub fn convolve_linear<T: Real>(x: &[Complex<T>], taps: &[Complex<T>]) -> Vec<Complex<T>> {
    if x.is_empty() || taps.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex::new(T::zero(), T::zero()); x.len() + taps.len() - 1];
    for (l, &h) in taps.iter().enumerate() {
        if h == Complex::new(T::zero(), T::zero()) {
            continue;
        }
        for (o, &v) in out[l..].iter_mut().zip(x) {
            *o = *o + h * v;
        }
    }
    out
}

pub fn convolve_circular<T: Real>(x: &[Complex<T>], taps: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = x.len();
    let mut out = vec![Complex::new(T::zero(), T::zero()); n];
    if n == 0 {
        return out;
    }
    for (i, v) in convolve_linear(x, taps).into_iter().enumerate() {
        out[i % n] = out[i % n] + v;
    }
    out
}

/// i.i.d. circular complex Gaussian samples of total variance `noise_var`.
pub fn complex_noise<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, noise_var: f64) -> Vec<Complex<T>> {
    let s = T::lit(noise_var.sqrt());
    (0..n).map(|_| standard_complex_normal::<T, R>(rng) * s).collect()
}

/// `y = h * x + w` with `w` white of variance `noise_var` per sample.
pub fn apply_channel<T: Real, R: Rng + ?Sized>(
    x: &[Complex<T>],
    ch: &ChannelRealization<T>,
    rng: &mut R,
    noise_var: f64,
) -> Result<Vec<Complex<T>>> {
    if ch.taps.is_empty() {
        return Err(Error::Empty("channel taps"));
    }
    if !(noise_var >= 0.0) {
        return Err(Error::param("noise_var", format!("must be >= 0, got {noise_var}")));
    }
    let mut y = match ch.mode {
        ConvolutionMode::Linear => convolve_linear(x, &ch.taps),
        ConvolutionMode::Circular => convolve_circular(x, &ch.taps),
    };
    if noise_var > 0.0 {
        let w = complex_noise::<T, R>(rng, y.len(), noise_var);
        y.iter_mut().zip(w).for_each(|(a, b)| *a = *a + b);
    }
    Ok(y)
}

/// `N x N` circulant whose first column is the zero-padded taps.
pub fn circulant_matrix<T: Real>(taps: &[Complex<T>], n: usize) -> Result<CMatrix<T>> {
    if taps.is_empty() {
        return Err(Error::Empty("channel taps"));
    }
    if taps.len() > n {
        return Err(Error::param(
            "taps",
            format!("{} taps exceed matrix size {n}", taps.len()),
        ));
    }
    Ok(CMatrix::from_fn(n, n, |r, c| {
        taps.get((r + n - c) % n)
            .copied()
            .unwrap_or(Complex::new(T::zero(), T::zero()))
    }))
}

/// Cached FFT plans for one transform length.
#[derive(Clone)]
pub struct FdZfEqualizer<T: Real> {
    fft_len: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for FdZfEqualizer<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FdZfEqualizer").field("fft_len", &self.fft_len).finish()
    }
}

impl<T: Real> FdZfEqualizer<T> {
    pub fn new(fft_len: usize) -> Result<Self> {
        if fft_len == 0 {
            return Err(Error::param("fft_len", "must be >= 1"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            fft_len,
            fwd: planner.plan_fft_forward(fft_len),
            inv: planner.plan_fft_inverse(fft_len),
        })
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    /// `fft_len`-point DFT of the zero-padded taps.
    pub fn response(&self, taps: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if taps.len() > self.fft_len {
            return Err(Error::param(
                "fft_len",
                format!("{} is shorter than the {} channel taps", self.fft_len, taps.len()),
            ));
        }
        let mut h = taps.to_vec();
        h.resize(self.fft_len, Complex::new(T::zero(), T::zero()));
        self.fwd.process(&mut h);
        Ok(h)
    }

    /// Zero-pads `y` to `fft_len`, divides each bin by the channel response,
    /// transforms back and keeps the first `frame_len` samples.
    pub fn equalize(&self, y: &[Complex<T>], taps: &[Complex<T>], frame_len: usize) -> Result<Vec<Complex<T>>> {
        if y.len() > self.fft_len || frame_len > self.fft_len {
            return Err(Error::param(
                "fft_len",
                format!("{} is shorter than the {}-sample input", self.fft_len, y.len().max(frame_len)),
            ));
        }
        let h = self.response(taps)?;
        let mut buf = y.to_vec();
        buf.resize(self.fft_len, Complex::new(T::zero(), T::zero()));
        self.fwd.process(&mut buf);
        let scale = T::from_count(self.fft_len).recip();
        for (bin, (b, hk)) in buf.iter_mut().zip(&h).enumerate() {
            let mag = hk.norm().to_f64_lossy();
            if mag < NULL_BIN_THRESHOLD {
                return Err(Error::IllConditionedEqualization { bin, magnitude: mag });
            }
            *b = *b / hk * scale;
        }
        self.inv.process(&mut buf);
        buf.truncate(frame_len);
        Ok(buf)
    }
}

/// `fft_len`-point channel frequency response.
pub fn frequency_response<T: Real>(taps: &[Complex<T>], fft_len: usize) -> Result<Vec<Complex<T>>> {
    FdZfEqualizer::new(fft_len)?.response(taps)
}

/// One-shot frequency-domain ZF; see [`FdZfEqualizer::equalize`].
pub fn fd_zf_equalize<T: Real>(
    y: &[Complex<T>],
    taps: &[Complex<T>],
    fft_len: usize,
    frame_len: usize,
) -> Result<Vec<Complex<T>>> {
    FdZfEqualizer::new(fft_len)?.equalize(y, taps, frame_len)
}
