//! Circular GFDM: transmit matrix, ZF/MF/MMSE receivers, the time-domain
//! OQAM variant and cyclic-prefix handling.
//!
//! Column `k + m K` of a transmit matrix is the prototype (wrapped onto the
//! frame length `N = K M`) circularly shifted by `m K` samples and modulated
//! by `e^{j 2 pi k n / K}`, with `n` the absolute sample index of the frame.

use num_complex::Complex;

use crate::error::{check_len, Error, Result};
use crate::mapping::split_oqam;
use crate::matrix::CMatrix;
use crate::prototype::PrototypeFilter;
use crate::scalar::{j_pow, twiddle, Real};

/// Per-subcarrier phase applied on top of the frequency shift.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SubcarrierPhase {
    /// No extra phase.
    #[default]
    None,
    /// `e^{j pi k / 2} = j^k`, the OQAM phase that makes neighbouring
    /// subcarriers orthogonal in the real domain.
    Quadrature,
}

impl SubcarrierPhase {
    #[inline]
    pub(crate) fn factor<T: Real>(self, k: usize) -> Complex<T> {
        match self {
            SubcarrierPhase::None => Complex::new(T::one(), T::zero()),
            SubcarrierPhase::Quadrature => j_pow(k),
        }
    }
}

/// Folds a prototype onto `n` samples; taps beyond `n` wrap additively.
pub fn wrap_prototype<T: Real>(p: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    for (i, &v) in p.iter().enumerate() {
        out[i % n] = out[i % n] + v;
    }
    out
}

/// Builds `rows x (K M)` modulation matrix columns from a base pulse of
/// `rows` samples, shifting subsymbol `m` by `m K + offset` (mod `rows`).
pub(crate) fn modulation_matrix<T: Real>(
    base: &[T],
    k: usize,
    m: usize,
    offset: usize,
    phase: SubcarrierPhase,
) -> CMatrix<T> {
    let rows = base.len();
    CMatrix::from_fn(rows, k * m, |n, col| {
        let (sub, slot) = (col % k, col / k);
        let shift = (slot * k + offset) % rows;
        let tap = base[(n + rows - shift) % rows];
        if tap == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        twiddle::<T>(sub, n, k) * phase.factor::<T>(sub) * tap
    })
}

fn check_grid(k: usize, m: usize) -> Result<()> {
    if k == 0 || m == 0 {
        return Err(Error::param("K*M", format!("must be positive, got K={k}, M={m}")));
    }
    Ok(())
}

/// Classic GFDM transmit matrix `A` (N x N).
#[derive(Clone, Debug)]
pub struct GfdmMatrixSet<T> {
    k: usize,
    m: usize,
    a: CMatrix<T>,
}

impl<T: Real> GfdmMatrixSet<T> {
    pub fn build(p: &PrototypeFilter<T>, k: usize, m: usize) -> Result<Self> {
        check_grid(k, m)?;
        let base = wrap_prototype(p.coefficients(), k * m);
        Ok(Self {
            k,
            m,
            a: modulation_matrix(&base, k, m, 0, SubcarrierPhase::None),
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    pub fn subsymbols(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.k * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.a
    }

    /// `x = A d`.
    pub fn modulate(&self, d: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        check_len("GFDM data vector", self.len(), d.len())?;
        self.a.mul_vec(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReceiverKind {
    ZeroForcing,
    MatchedFilter,
    Mmse,
}

/// A receiver matrix `B`; demodulation is `d_hat = B y`.
///
/// For MMSE the stored matrix already includes the per-symbol bias
/// normalization, i.e. row `i` is divided by `(B_mmse H A)_{ii}`.
#[derive(Clone, Debug)]
pub struct ReceiverMatrix<T> {
    b: CMatrix<T>,
    kind: ReceiverKind,
}

impl<T: Real> ReceiverMatrix<T> {
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.b
    }

    pub fn kind(&self) -> ReceiverKind {
        self.kind
    }

    /// `d_hat = B y`. ZF and MF expect an already equalized `y`.
    pub fn demodulate(&self, y: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        check_len("received vector", self.b.cols(), y.len())?;
        self.b.mul_vec(y)
    }
}

/// Builds a receiver for transmit matrix `a`.
///
/// `noise_var` and `channel` are only read for MMSE; a missing channel
/// matrix means a flat channel (`H = I`).
pub fn build_receiver<T: Real>(
    a: &CMatrix<T>,
    kind: ReceiverKind,
    noise_var: Option<T>,
    channel: Option<&CMatrix<T>>,
) -> Result<ReceiverMatrix<T>> {
    let b = match kind {
        ReceiverKind::ZeroForcing => a.inverse()?,
        ReceiverKind::MatchedFilter => a.adjoint(),
        ReceiverKind::Mmse => {
            let sigma2 = noise_var
                .ok_or_else(|| Error::param("noise_var", "required for the MMSE receiver"))?;
            if !(sigma2 >= T::zero()) {
                return Err(Error::param("noise_var", "must be >= 0"));
            }
            let ha = match channel {
                Some(h) => h.matmul(a)?,
                None => a.clone(),
            };
            let ha_h = ha.adjoint();
            let gram = ha_h.matmul(&ha)?.add_diagonal(sigma2);
            let raw = gram.inverse()?.matmul(&ha_h)?;
            let bias = raw.matmul(&ha)?.diagonal();
            let norm = bias
                .iter()
                .map(|g| {
                    if g.norm() > T::zero() {
                        Ok(g.inv())
                    } else {
                        Err(Error::Singular {
                            column: 0,
                            pivot: 0.0,
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            raw.scale_rows(&norm)?
        }
    };
    Ok(ReceiverMatrix { b, kind })
}

/// Circular GFDM-OQAM: `x = A_i Re{d} + j A_q Im{d}`.
#[derive(Clone, Debug)]
pub struct OqamMatrixSet<T> {
    k: usize,
    m: usize,
    a_i: CMatrix<T>,
    a_q: CMatrix<T>,
}

impl<T: Real> OqamMatrixSet<T> {
    /// `A_i` as the classic matrix (plus `phase`), `A_q` its columns circularly
    /// delayed by `K / 2`.
    pub fn build(p: &PrototypeFilter<T>, k: usize, m: usize, phase: SubcarrierPhase) -> Result<Self> {
        check_grid(k, m)?;
        if k % 2 != 0 {
            return Err(Error::param("K", format!("OQAM needs an even K, got {k}")));
        }
        let n = k * m;
        let base = wrap_prototype(p.coefficients(), n);
        let a_i = modulation_matrix(&base, k, m, 0, phase);
        let a_q = CMatrix::from_fn(n, n, |r, c| a_i.get((r + n - k / 2) % n, c));
        Ok(Self { k, m, a_i, a_q })
    }

    pub fn len(&self) -> usize {
        self.k * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    pub fn in_phase(&self) -> &CMatrix<T> {
        &self.a_i
    }

    pub fn quadrature(&self) -> &CMatrix<T> {
        &self.a_q
    }

    pub fn modulate(&self, d: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        check_len("GFDM-OQAM data vector", self.len(), d.len())?;
        oqam_synthesize(&self.a_i, &self.a_q, d)
    }

    /// Matched-filter receivers `(A_i^H, A_q^H)`.
    pub fn matched_filters(&self) -> (ReceiverMatrix<T>, ReceiverMatrix<T>) {
        (
            ReceiverMatrix {
                b: self.a_i.adjoint(),
                kind: ReceiverKind::MatchedFilter,
            },
            ReceiverMatrix {
                b: self.a_q.adjoint(),
                kind: ReceiverKind::MatchedFilter,
            },
        )
    }
}

pub(crate) fn oqam_synthesize<T: Real>(
    a_i: &CMatrix<T>,
    a_q: &CMatrix<T>,
    d: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    let (re, im) = split_oqam(d);
    let xi = a_i.mul_real_vec(&re)?;
    let xq = a_q.mul_real_vec(&im)?;
    Ok(xi
        .iter()
        .zip(&xq)
        .map(|(a, b)| Complex::new(a.re - b.im, a.im + b.re))
        .collect())
}

/// `d_hat = Re{B_i y} + j Im{B_q y}`.
pub fn oqam_demodulate<T: Real>(
    b_i: &ReceiverMatrix<T>,
    b_q: &ReceiverMatrix<T>,
    y_eq: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    let zi = b_i.demodulate(y_eq)?;
    let zq = b_q.demodulate(y_eq)?;
    Ok(zi
        .iter()
        .zip(&zq)
        .map(|(a, b)| Complex::new(a.re, b.im))
        .collect())
}

/// Prepends the last `n_cp` samples of `x`.
pub fn add_cp<T: Copy>(x: &[T], n_cp: usize) -> Result<Vec<T>> {
    if n_cp > x.len() {
        return Err(Error::param(
            "n_cp",
            format!("{n_cp} exceeds frame length {}", x.len()),
        ));
    }
    let mut out = Vec::with_capacity(x.len() + n_cp);
    out.extend_from_slice(&x[x.len() - n_cp..]);
    out.extend_from_slice(x);
    Ok(out)
}

/// Drops the first `n_cp` samples.
pub fn remove_cp<T: Copy>(x: &[T], n_cp: usize) -> Result<Vec<T>> {
    if n_cp > x.len() {
        return Err(Error::param(
            "n_cp",
            format!("{n_cp} exceeds frame length {}", x.len()),
        ));
    }
    Ok(x[n_cp..].to_vec())
}
