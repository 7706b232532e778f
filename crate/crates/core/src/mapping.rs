//! Gray-mapped square QAM and the real/imaginary split used by OQAM.
//!
//! Each axis carries an independent Gray-coded PAM. Bit label `0...0` sits on
//! the most positive level, so QPSK maps `[0, 0]` to `(1 + j) / sqrt(2)`.
//! The first half of every symbol's bits selects the in-phase level, the
//! second half the quadrature level. Average symbol energy is one.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Qam<T> {
    order: usize,
    bits_per_axis: usize,
    /// PAM amplitude of level index `i` (index 0 is the most positive level).
    amplitudes: Vec<T>,
    /// Gray label of level index `i`.
    labels: Vec<usize>,
    /// Level index carrying Gray label `g`.
    index_of_label: Vec<usize>,
    scale: T,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

impl<T: Real> Qam<T> {
    /// Square constellation of `order = 4^q` points.
    pub fn new(order: usize) -> Result<Self> {
        let bits = order.trailing_zeros() as usize;
        if order < 4 || !order.is_power_of_two() || bits % 2 != 0 {
            return Err(Error::param(
                "qam_order",
                format!("must be a power of 4 (4, 16, 64, ...), got {order}"),
            ));
        }
        let bits_per_axis = bits / 2;
        let levels = 1usize << bits_per_axis;
        // mean |s|^2 of the unscaled grid {+-1, +-3, ...} on both axes is 2 (L^2 - 1) / 3
        let scale = (T::lit(2.0) * T::from_count(levels * levels - 1) / T::lit(3.0))
            .sqrt()
            .recip();
        let amplitudes = (0..levels)
            .map(|i| T::from_count(levels - 1) - T::lit(2.0) * T::from_count(i))
            .map(|a| a * scale)
            .collect();
        let labels: Vec<usize> = (0..levels).map(gray).collect();
        let mut index_of_label = vec![0; levels];
        for (i, &g) in labels.iter().enumerate() {
            index_of_label[g] = i;
        }
        Ok(Self {
            order,
            bits_per_axis,
            amplitudes,
            labels,
            index_of_label,
            scale,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Half the minimum distance between points.
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis
    }

    /// All constellation points, indexed by their integer bit label.
    pub fn points(&self) -> Vec<Complex<T>> {
        (0..self.order).map(|label| self.point(label)).collect()
    }

    /// Point for the integer label whose MSB is the first bit on the wire.
    pub fn point(&self, label: usize) -> Complex<T> {
        let q = self.bits_per_axis;
        let mask = (1 << q) - 1;
        let i_label = (label >> q) & mask;
        let q_label = label & mask;
        Complex::new(
            self.amplitudes[self.index_of_label[i_label]],
            self.amplitudes[self.index_of_label[q_label]],
        )
    }

    pub fn map(&self, bits: &[u8]) -> Result<Vec<Complex<T>>> {
        let bps = self.bits_per_symbol();
        if bits.len() % bps != 0 {
            return Err(Error::param(
                "bits",
                format!("length {} is not a multiple of {bps}", bits.len()),
            ));
        }
        bits.chunks(bps)
            .map(|chunk| {
                let mut label = 0usize;
                for &b in chunk {
                    if b > 1 {
                        return Err(Error::param("bits", format!("bit value {b} not in {{0, 1}}")));
                    }
                    label = (label << 1) | b as usize;
                }
                Ok(self.point(label))
            })
            .collect()
    }

    /// Nearest level on one axis; on an exact boundary the smaller Gray label wins.
    fn decide_axis(&self, x: T) -> usize {
        let levels = self.amplitudes.len();
        let top = T::from_count(levels - 1);
        let u = (top - x / self.scale) / T::lit(2.0);
        if !(u > T::zero()) {
            return self.labels[0];
        }
        if u >= top {
            return self.labels[levels - 1];
        }
        let lo = u.floor();
        let frac = u - lo;
        let lo = lo.to_usize().unwrap_or(0).min(levels - 1);
        let hi = (lo + 1).min(levels - 1);
        let half = T::lit(0.5);
        if frac < half {
            self.labels[lo]
        } else if frac > half {
            self.labels[hi]
        } else {
            self.labels[lo].min(self.labels[hi])
        }
    }

    /// Hard-decision demapping.
    pub fn demap(&self, symbols: &[Complex<T>]) -> Vec<u8> {
        let q = self.bits_per_axis;
        let mut out = Vec::with_capacity(symbols.len() * 2 * q);
        for s in symbols {
            let label = (self.decide_axis(s.re) << q) | self.decide_axis(s.im);
            for b in (0..2 * q).rev() {
                out.push(((label >> b) & 1) as u8);
            }
        }
        out
    }
}

/// Splits symbols into their real and imaginary parts.
pub fn split_oqam<T: Real>(d: &[Complex<T>]) -> (Vec<T>, Vec<T>) {
    d.iter().map(|v| (v.re, v.im)).unzip()
}

/// Inverse of [`split_oqam`].
pub fn combine_oqam<T: Real>(re: &[T], im: &[T]) -> Vec<Complex<T>> {
    re.iter().zip(im).map(|(&a, &b)| Complex::new(a, b)).collect()
}
