//! Prototype filters and the zero-padding transform behind Linear GFDM.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which family a [`PrototypeFilter`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrototypeKind {
    Phydyas,
    Rectangular,
    Custom,
}

/// A real, unit-energy prototype impulse response.
#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeFilter<T> {
    coefficients: Vec<T>,
    overlap: usize,
    subcarriers: usize,
    kind: PrototypeKind,
}

/// Frequency-domain samples `P_0 .. P_{theta-1}` of the PHYDYAS design.
fn phydyas_frequency_samples(theta: usize) -> Option<&'static [f64]> {
    const T1: [f64; 1] = [1.0];
    const T2: [f64; 2] = [1.0, std::f64::consts::FRAC_1_SQRT_2];
    const T3: [f64; 3] = [1.0, 0.911438, 0.411438];
    const T4: [f64; 4] = [1.0, 0.971960, std::f64::consts::FRAC_1_SQRT_2, 0.235147];
    match theta {
        1 => Some(&T1),
        2 => Some(&T2),
        3 => Some(&T3),
        4 => Some(&T4),
        _ => None,
    }
}

fn normalize<T: Real>(mut p: Vec<T>) -> Vec<T> {
    let e: T = p.iter().map(|&v| v * v).sum();
    let s = e.sqrt().recip();
    p.iter_mut().for_each(|v| *v = *v * s);
    p
}

impl<T: Real> PrototypeFilter<T> {
    /// PHYDYAS frequency-sampling filter with `theta * k + 1` taps.
    ///
    /// Coefficients are `P_0 + 2 sum_l (-1)^l P_l cos(2 pi l n / (theta k))`
    /// for `n = 0 ..= theta k`, then scaled to unit energy. The sequence is
    /// exactly even-symmetric and both end taps sit at the design's zero.
    pub fn phydyas(k: usize, theta: usize) -> Result<Self> {
        if k < 2 || k % 2 != 0 {
            return Err(Error::param("K", format!("must be even and >= 2, got {k}")));
        }
        if theta < 1 {
            return Err(Error::param("theta", "must be >= 1"));
        }
        let samples = phydyas_frequency_samples(theta).ok_or_else(|| {
            Error::param("theta", format!("PHYDYAS coefficients known for 1..=4, got {theta}"))
        })?;
        let span = theta * k;
        let coefficients = (0..=span)
            .map(|n| {
                let mut acc = T::lit(samples[0]);
                for (l, &pl) in samples.iter().enumerate().skip(1) {
                    let sign = if l % 2 == 1 { -T::one() } else { T::one() };
                    // cos is even: fold l*n onto [0, span/2] so mirrored taps are bit-identical
                    let r = (l * n) % span;
                    let r = r.min(span - r);
                    let arg = T::TAU() * T::from_count(r) / T::from_count(span);
                    acc = acc + T::lit(2.0) * sign * T::lit(pl) * arg.cos();
                }
                acc
            })
            .collect();
        Ok(Self {
            coefficients: normalize(coefficients),
            overlap: theta,
            subcarriers: k,
            kind: PrototypeKind::Phydyas,
        })
    }

    /// `k` equal taps with unit energy.
    pub fn rectangular(k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::param("K", "must be >= 1"));
        }
        Ok(Self {
            coefficients: normalize(vec![T::one(); k]),
            overlap: 1,
            subcarriers: k,
            kind: PrototypeKind::Rectangular,
        })
    }

    /// Wraps arbitrary taps, scaled to unit energy.
    pub fn from_taps(taps: Vec<T>, subcarriers: usize, overlap: usize) -> Result<Self> {
        if taps.is_empty() || taps.iter().all(|v| *v == T::zero()) {
            return Err(Error::param("taps", "need at least one nonzero tap"));
        }
        Ok(Self {
            coefficients: normalize(taps),
            overlap,
            subcarriers,
            kind: PrototypeKind::Custom,
        })
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    /// Number of taps, `Lp`.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn kind(&self) -> PrototypeKind {
        self.kind
    }

    pub fn energy(&self) -> T {
        self.coefficients.iter().map(|&v| v * v).sum()
    }
}

/// Whether the pad length has to cover the half-symbol OQAM offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PadVariant {
    /// `K M - K/2 + 1`: room for both the in-phase and the quadrature matrix.
    Oqam,
    /// `K (M - 1) + 1`: a single (non-OQAM) matrix.
    SingleMatrix,
}

/// Number of zeros appended to the prototype so circular shifts never wrap.
pub fn linear_pad_length(k: usize, m: usize, variant: PadVariant) -> Result<usize> {
    if k == 0 || k % 2 != 0 {
        return Err(Error::param("K", format!("must be even and >= 2, got {k}")));
    }
    if m < 1 {
        return Err(Error::param("M", "must be >= 1"));
    }
    Ok(match variant {
        PadVariant::Oqam => k * m - k / 2 + 1,
        PadVariant::SingleMatrix => k * (m - 1) + 1,
    })
}

/// `p` followed by `pad` zeros.
pub fn zero_pad<T: Real>(p: &PrototypeFilter<T>, pad: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(p.len() + pad);
    out.extend_from_slice(p.coefficients());
    out.resize(p.len() + pad, T::zero());
    out
}
