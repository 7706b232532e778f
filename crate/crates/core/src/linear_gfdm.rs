//! Linear GFDM.
//!
//! The prototype is zero padded by `L_Z = K M - K/2 + 1` samples before the
//! GFDM columns are formed, so the matrix rows span `N_ext = Lp + L_Z`
//! samples. Every circular shift of the padded prototype (at most
//! `(M - 1) K + K/2`) then stays inside the frame and the transmit matrices
//! perform linear rather than circular filtering. With the quadrature
//! subcarrier phase the frame is sample-for-sample the FBMC-OQAM burst for
//! the same data, followed by one zero sample.

use num_complex::Complex;

use crate::error::{check_len, Error, Result};
use crate::gfdm::{modulation_matrix, oqam_synthesize, SubcarrierPhase};
use crate::matrix::CMatrix;
use crate::prototype::{linear_pad_length, zero_pad, PadVariant, PrototypeFilter};
use crate::scalar::Real;

/// Transmit matrices `A_i^(L)`, `A_q^(L)` (`N_ext x N`) and their matched filters.
#[derive(Clone, Debug)]
pub struct LinearGfdmMatrixSet<T> {
    k: usize,
    m: usize,
    prototype_len: usize,
    pad_len: usize,
    a_i: CMatrix<T>,
    a_q: CMatrix<T>,
    b_i: CMatrix<T>,
    b_q: CMatrix<T>,
    gain_i: Vec<T>,
    gain_q: Vec<T>,
}

impl<T: Real> LinearGfdmMatrixSet<T> {
    /// Builds the matrices with the OQAM subcarrier phase `j^k`, the
    /// convention under which the frame equals the FBMC-OQAM burst.
    pub fn build(p: &PrototypeFilter<T>, k: usize, m: usize) -> Result<Self> {
        Self::build_with_phase(p, k, m, SubcarrierPhase::Quadrature)
    }

    pub fn build_with_phase(
        p: &PrototypeFilter<T>,
        k: usize,
        m: usize,
        phase: SubcarrierPhase,
    ) -> Result<Self> {
        let pad_len = linear_pad_length(k, m, PadVariant::Oqam)?;
        let padded = zero_pad(p, pad_len);
        let n_ext = padded.len();
        let last_end = (m - 1) * k + k / 2 + p.len();
        if last_end > n_ext {
            return Err(Error::param(
                "prototype",
                format!("{} taps do not fit the {n_ext}-sample extended frame", p.len()),
            ));
        }
        let a_i = modulation_matrix(&padded, k, m, 0, phase);
        let a_q = modulation_matrix(&padded, k, m, k / 2, phase);
        let b_i = a_i.adjoint();
        let b_q = a_q.adjoint();
        let gain_i = a_i.column_energies();
        let gain_q = a_q.column_energies();
        Ok(Self {
            k,
            m,
            prototype_len: p.len(),
            pad_len,
            a_i,
            a_q,
            b_i,
            b_q,
            gain_i,
            gain_q,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    pub fn subsymbols(&self) -> usize {
        self.m
    }

    /// Data symbols per frame, `N = K M`.
    pub fn symbols(&self) -> usize {
        self.k * self.m
    }

    /// Samples per frame, `N_ext = Lp + L_Z`.
    pub fn frame_len(&self) -> usize {
        self.prototype_len + self.pad_len
    }

    pub fn pad_len(&self) -> usize {
        self.pad_len
    }

    pub fn prototype_len(&self) -> usize {
        self.prototype_len
    }

    pub fn in_phase(&self) -> &CMatrix<T> {
        &self.a_i
    }

    pub fn quadrature(&self) -> &CMatrix<T> {
        &self.a_q
    }

    /// `B_i^(L) = A_i^(L)^H`.
    pub fn in_phase_receiver(&self) -> &CMatrix<T> {
        &self.b_i
    }

    /// `B_q^(L) = A_q^(L)^H`.
    pub fn quadrature_receiver(&self) -> &CMatrix<T> {
        &self.b_q
    }

    /// `x = A_i^(L) Re{d} + j A_q^(L) Im{d}`, `N_ext` samples, no cyclic prefix.
    pub fn modulate(&self, d: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        check_len("Linear GFDM data vector", self.symbols(), d.len())?;
        oqam_synthesize(&self.a_i, &self.a_q, d)
    }

    /// Matched-filter detection `Re{B_i y} + j Im{B_q y}`, each branch divided
    /// by the column energy of its transmit matrix.
    pub fn demodulate(&self, y_eq: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        check_len("Linear GFDM received frame", self.frame_len(), y_eq.len())?;
        let zi = self.b_i.mul_vec(y_eq)?;
        let zq = self.b_q.mul_vec(y_eq)?;
        Ok((0..self.symbols())
            .map(|s| Complex::new(zi[s].re / self.gain_i[s], zq[s].im / self.gain_q[s]))
            .collect())
    }
}

/// How consecutive frames are laid out in a continuous stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameAssembly {
    /// Frame `i` starts at `i * stride`; overlapping tails add up.
    OverlapAdd { stride: usize },
    /// Frames are concatenated whole.
    BackToBack,
}

/// Lays frames out in one sample stream.
pub fn assemble_stream<T: Real>(frames: &[Vec<Complex<T>>], assembly: FrameAssembly) -> Vec<Complex<T>> {
    match assembly {
        FrameAssembly::BackToBack => frames.iter().flatten().copied().collect(),
        FrameAssembly::OverlapAdd { stride } => {
            let total = frames
                .iter()
                .enumerate()
                .map(|(i, f)| i * stride + f.len())
                .max()
                .unwrap_or(0);
            let mut out = vec![Complex::new(T::zero(), T::zero()); total];
            for (i, f) in frames.iter().enumerate() {
                for (o, v) in out[i * stride..].iter_mut().zip(f) {
                    *o = *o + v;
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn smallest_even_case_is_plain_shift() {
        let p = PrototypeFilter::<f64>::from_taps(vec![1.0, 0.0, 0.0], 2, 1).unwrap();
        let set = LinearGfdmMatrixSet::build_with_phase(&p, 2, 1, SubcarrierPhase::None).unwrap();
        assert_eq!(set.pad_len(), 2);
        assert_eq!(set.frame_len(), 5);
        let ai = set.in_phase();
        let aq = set.quadrature();
        for col in 0..2 {
            assert_eq!(ai.column_support(col), 0..1);
            assert_eq!(aq.column_support(col), 1..2);
            for r in 2..5 {
                assert_eq!(ai.get(r, col), C::new(0.0, 0.0));
                assert_eq!(aq.get(r, col), C::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn table_setup_dimensions_and_support() {
        let p = PrototypeFilter::<f64>::phydyas(128, 4).unwrap();
        let set = LinearGfdmMatrixSet::build(&p, 128, 4).unwrap();
        assert_eq!(set.frame_len(), 962);
        assert_eq!(set.in_phase().rows(), 962);
        assert_eq!(set.in_phase().cols(), 512);
        // last Q column: shift 3*128 + 64, support ends at sample 960
        let support = set.quadrature().column_support(511);
        assert!(support.end <= 961);
        assert!(support.start >= 3 * 128 + 64);
    }

    #[test]
    fn odd_k_rejected() {
        let p = PrototypeFilter::<f64>::rectangular(3).unwrap();
        assert!(LinearGfdmMatrixSet::build(&p, 3, 2).is_err());
    }

    #[test]
    fn zero_input_zero_output() {
        let p = PrototypeFilter::<f64>::phydyas(8, 4).unwrap();
        let set = LinearGfdmMatrixSet::build(&p, 8, 2).unwrap();
        let d = set.demodulate(&vec![C::new(0.0, 0.0); set.frame_len()]).unwrap();
        assert!(d.iter().all(|v| *v == C::new(0.0, 0.0)));
        assert!(set.demodulate(&[C::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn overlap_add_and_concatenation() {
        let f = vec![vec![C::new(1.0, 0.0); 3], vec![C::new(0.0, 1.0); 3]];
        let s = assemble_stream(&f, FrameAssembly::OverlapAdd { stride: 2 });
        assert_eq!(s.len(), 5);
        assert_eq!(s[2], C::new(1.0, 1.0));
        let s = assemble_stream(&f, FrameAssembly::BackToBack);
        assert_eq!(s.len(), 6);
    }
}
