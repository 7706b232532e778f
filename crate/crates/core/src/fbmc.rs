//! FBMC-OQAM synthesis and analysis filter banks.
//!
//! Pulses follow
//! `g^(I)_{k,m}[n] = p[n - m K] e^{j 2 pi k n / K} j^k` and
//! `g^(Q)_{k,m}[n] = p[n - (m + 1/2) K] e^{j 2 pi k n / K} j^k`,
//! with `n` the absolute burst sample index. A burst of `m_symbols` complex
//! symbols per subcarrier has `Lp + (2 m_symbols - 1) K / 2` samples.
//!
//! The transmitter evaluates the pulse superposition one half-symbol at a
//! time: all pulses of a half-symbol share the envelope `p[n - tau]`, so
//! their carrier sum is a single `K`-point inverse DFT. The receiver folds
//! `y[n] p[n - tau]` modulo `K` and takes a `K`-point DFT.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};
use crate::prototype::PrototypeFilter;
use crate::scalar::{j_pow, twiddle, Real};

/// Which OQAM branch a pulse belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulsePart {
    /// Carries the real part, delay `m K`.
    InPhase,
    /// Carries the imaginary part, delay `m K + K/2`.
    Quadrature,
}

/// One synthesis pulse over `n = 0 .. len`.
pub fn synthesis_pulse<T: Real>(
    k: usize,
    m: usize,
    part: PulsePart,
    p: &PrototypeFilter<T>,
    subcarriers: usize,
    len: usize,
) -> Result<Vec<Complex<T>>> {
    if subcarriers == 0 || subcarriers % 2 != 0 {
        return Err(Error::param("K", format!("must be even and >= 2, got {subcarriers}")));
    }
    if k >= subcarriers {
        return Err(Error::param("k", format!("subcarrier {k} out of range 0..{subcarriers}")));
    }
    let delay = match part {
        PulsePart::InPhase => m * subcarriers,
        PulsePart::Quadrature => m * subcarriers + subcarriers / 2,
    };
    let phase = j_pow::<T>(k);
    let taps = p.coefficients();
    Ok((0..len)
        .map(|n| match n.checked_sub(delay).and_then(|i| taps.get(i)) {
            Some(&tap) => twiddle::<T>(k, n, subcarriers) * phase * tap,
            None => Complex::new(T::zero(), T::zero()),
        })
        .collect())
}

/// A transmitted FBMC-OQAM burst.
#[derive(Clone, Debug, PartialEq)]
pub struct FbmcBurst<T> {
    pub samples: Vec<Complex<T>>,
    pub k: usize,
    pub m_symbols: usize,
    pub theta: usize,
}

/// Filter-bank transceiver for a fixed prototype, `K` and burst size.
#[derive(Clone)]
pub struct FbmcModem<T: Real> {
    prototype: PrototypeFilter<T>,
    k: usize,
    m_symbols: usize,
    pulse_energy: T,
    ifft: Arc<dyn Fft<T>>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for FbmcModem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FbmcModem")
            .field("k", &self.k)
            .field("m_symbols", &self.m_symbols)
            .field("prototype_len", &self.prototype.len())
            .finish()
    }
}

impl<T: Real> FbmcModem<T> {
    pub fn new(prototype: PrototypeFilter<T>, k: usize, m_symbols: usize) -> Result<Self> {
        if k == 0 || k % 2 != 0 {
            return Err(Error::param("K", format!("must be even and >= 2, got {k}")));
        }
        if m_symbols == 0 {
            return Err(Error::param("m_symbols", "must be >= 1"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            pulse_energy: prototype.energy(),
            ifft: planner.plan_fft_inverse(k),
            fft: planner.plan_fft_forward(k),
            prototype,
            k,
            m_symbols,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    pub fn m_symbols(&self) -> usize {
        self.m_symbols
    }

    pub fn prototype(&self) -> &PrototypeFilter<T> {
        &self.prototype
    }

    /// Data symbols per burst, `K m_symbols`, indexed `k + m K`.
    pub fn symbols(&self) -> usize {
        self.k * self.m_symbols
    }

    /// `Lp + (2 m_symbols - 1) K / 2`.
    pub fn burst_len(&self) -> usize {
        self.prototype.len() + (2 * self.m_symbols - 1) * self.k / 2
    }

    fn half_symbol_delay(&self, slot: usize) -> usize {
        slot * self.k / 2
    }

    /// Evaluates the synthesis bank for `d[k + m K]`.
    pub fn modulate(&self, d: &[Complex<T>]) -> Result<FbmcBurst<T>> {
        check_len("FBMC data vector", self.symbols(), d.len())?;
        let k = self.k;
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; self.burst_len()];
        let mut buf = vec![zero; k];
        let taps = self.prototype.coefficients();
        for slot in 0..2 * self.m_symbols {
            let m = slot / 2;
            let quadrature = slot % 2 == 1;
            for (sub, b) in buf.iter_mut().enumerate() {
                let v = d[sub + m * k];
                let coeff = if quadrature {
                    Complex::new(T::zero(), v.im)
                } else {
                    Complex::new(v.re, T::zero())
                };
                *b = coeff * j_pow::<T>(sub);
            }
            self.ifft.process(&mut buf);
            let tau = self.half_symbol_delay(slot);
            for (i, &tap) in taps.iter().enumerate() {
                let n = tau + i;
                out[n] = out[n] + buf[n % k] * tap;
            }
        }
        Ok(FbmcBurst {
            samples: out,
            k,
            m_symbols: self.m_symbols,
            theta: self.prototype.overlap(),
        })
    }

    /// Correlations `<y, g^(I)_{k,m}>` and `<y, g^(Q)_{k,m}>` (conjugate on the pulse).
    pub fn analysis(&self, y: &[Complex<T>]) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
        check_len("FBMC received burst", self.burst_len(), y.len())?;
        let k = self.k;
        let zero = Complex::new(T::zero(), T::zero());
        let mut zi = vec![zero; self.symbols()];
        let mut zq = vec![zero; self.symbols()];
        let mut buf = vec![zero; k];
        let taps = self.prototype.coefficients();
        for slot in 0..2 * self.m_symbols {
            let m = slot / 2;
            let tau = self.half_symbol_delay(slot);
            buf.iter_mut().for_each(|b| *b = zero);
            for (i, &tap) in taps.iter().enumerate() {
                let n = tau + i;
                buf[n % k] = buf[n % k] + y[n] * tap;
            }
            self.fft.process(&mut buf);
            let target = if slot % 2 == 1 { &mut zq } else { &mut zi };
            for (sub, &b) in buf.iter().enumerate() {
                target[sub + m * k] = b * j_pow::<T>(sub).conj();
            }
        }
        Ok((zi, zq))
    }

    /// `Re{<y, g^(I)>} + j Im{<y, g^(Q)>}` without gain normalization: the
    /// real adjoint of [`FbmcModem::modulate`].
    pub fn adjoint(&self, y: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let (zi, zq) = self.analysis(y)?;
        Ok(zi
            .iter()
            .zip(&zq)
            .map(|(a, b)| Complex::new(a.re, b.im))
            .collect())
    }

    /// Matched-filter detection, each output divided by the pulse energy.
    pub fn demodulate(&self, y_eq: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let g = self.pulse_energy;
        Ok(self.adjoint(y_eq)?.into_iter().map(|v| v / g).collect())
    }
}
