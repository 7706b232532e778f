//! Uniform frame-level interface over the five waveforms.
//!
//! Receivers get the linear convolution of the emitted frame with the channel
//! taps plus noise. CP waveforms keep the first `frame_len` samples, drop the
//! prefix and equalize with an `N`-point FD-ZF; the CP-free waveforms equalize
//! the whole received burst with a power-of-two FD-ZF and keep the frame
//! support.

use std::sync::{Arc, Mutex};

use crate::channel::{circulant_matrix, FdZfEqualizer};
use crate::error::{check_len, Result};
use crate::fbmc::FbmcModem;
use crate::gfdm::{add_cp, build_receiver, oqam_demodulate, remove_cp, GfdmMatrixSet, OqamMatrixSet, ReceiverKind, ReceiverMatrix};
use crate::linear_gfdm::{FrameAssembly, LinearGfdmMatrixSet};
use crate::ofdm::{OfdmModem, OfdmParams};
use crate::prototype::PrototypeFilter;
use crate::sim::config::{WaveformKind, WaveformParams};
use crate::Complex64 as C64;

/// Slack reserved in the cached linear equalizer for channel memory.
const MAX_CHANNEL_MEMORY: usize = 15;

pub trait FrameModem: Send + Sync {
    fn kind(&self) -> WaveformKind;
    /// Data symbols per frame.
    fn symbols(&self) -> usize;
    /// Emitted samples per frame, prefix included.
    fn frame_len(&self) -> usize;
    fn cp_len(&self) -> usize {
        0
    }
    /// Size of the subcarrier grid.
    fn subcarriers(&self) -> usize;
    /// Subcarrier carrying data symbol `i`.
    fn subcarrier_of(&self, i: usize) -> usize;
    fn modulate(&self, d: &[C64]) -> Result<Vec<C64>>;
    /// Equalizes and detects a received frame of `frame_len + taps.len() - 1`
    /// samples. `noise_var` is only read by the MMSE receiver.
    fn detect(&self, y: &[C64], taps: &[C64], noise_var: f64) -> Result<Vec<C64>>;
    /// Layout of consecutive frames in a continuous stream.
    fn stream_assembly(&self) -> FrameAssembly;
}

fn is_identity(taps: &[C64]) -> bool {
    taps.len() == 1 && taps[0] == C64::new(1.0, 0.0)
}

fn check_received(frame_len: usize, y: &[C64], taps: &[C64]) -> Result<()> {
    check_len("received frame", frame_len + taps.len().max(1) - 1, y.len())
}

/// Circular processing after the prefix: receive window, CP removal, N-point FD-ZF.
fn circular_front_end(eq: &FdZfEqualizer<f64>, cp: usize, n: usize, y: &[C64], taps: &[C64]) -> Result<Vec<C64>> {
    let body = remove_cp(&y[..n + cp], cp)?;
    if is_identity(taps) {
        return Ok(body);
    }
    eq.equalize(&body, taps, n)
}

/// Full-burst FD-ZF for CP-free frames.
fn linear_front_end(eq: &FdZfEqualizer<f64>, frame_len: usize, y: &[C64], taps: &[C64]) -> Result<Vec<C64>> {
    if is_identity(taps) {
        return Ok(y[..frame_len].to_vec());
    }
    if y.len() <= eq.fft_len() {
        eq.equalize(y, taps, frame_len)
    } else {
        FdZfEqualizer::new(y.len().next_power_of_two())?.equalize(y, taps, frame_len)
    }
}

pub struct OfdmFrame {
    modem: OfdmModem<f64>,
    eq: FdZfEqualizer<f64>,
}

impl OfdmFrame {
    pub fn new(params: OfdmParams) -> Result<Self> {
        Ok(Self {
            eq: FdZfEqualizer::new(params.n_fft)?,
            modem: OfdmModem::new(params),
        })
    }
}

impl FrameModem for OfdmFrame {
    fn kind(&self) -> WaveformKind {
        WaveformKind::Ofdm
    }
    fn symbols(&self) -> usize {
        self.modem.params().active.len()
    }
    fn frame_len(&self) -> usize {
        self.modem.params().frame_len()
    }
    fn cp_len(&self) -> usize {
        self.modem.params().n_cp
    }
    fn subcarriers(&self) -> usize {
        self.modem.params().n_fft
    }
    fn subcarrier_of(&self, i: usize) -> usize {
        self.modem.params().active[i]
    }
    fn modulate(&self, d: &[C64]) -> Result<Vec<C64>> {
        self.modem.modulate(d)
    }
    fn detect(&self, y: &[C64], taps: &[C64], _noise_var: f64) -> Result<Vec<C64>> {
        check_received(self.frame_len(), y, taps)?;
        let frame = &y[..self.frame_len()];
        if is_identity(taps) {
            return self.modem.demodulate(frame, None);
        }
        let h = self.eq.response(taps)?;
        self.modem.demodulate(frame, Some(&h))
    }
    fn stream_assembly(&self) -> FrameAssembly {
        FrameAssembly::BackToBack
    }
}

type MmseCache = Mutex<Option<(Vec<C64>, f64, Arc<ReceiverMatrix<f64>>)>>;

/// Classic circular GFDM with CP and a ZF, MF or MMSE matrix receiver.
pub struct GfdmFrame {
    set: GfdmMatrixSet<f64>,
    receiver: Option<ReceiverMatrix<f64>>,
    mmse: MmseCache,
    cp: usize,
    eq: FdZfEqualizer<f64>,
}

impl GfdmFrame {
    pub fn new(p: &PrototypeFilter<f64>, k: usize, m: usize, cp: usize, kind: ReceiverKind) -> Result<Self> {
        let set = GfdmMatrixSet::build(p, k, m)?;
        let receiver = match kind {
            ReceiverKind::Mmse => None,
            _ => Some(build_receiver(set.matrix(), kind, None, None)?),
        };
        Ok(Self {
            eq: FdZfEqualizer::new(set.len())?,
            set,
            receiver,
            mmse: Mutex::new(None),
            cp,
        })
    }

    fn mmse_receiver(&self, taps: &[C64], noise_var: f64) -> Result<Arc<ReceiverMatrix<f64>>> {
        let mut cache = self.mmse.lock().expect("MMSE cache poisoned");
        if let Some((t, v, b)) = cache.as_ref() {
            if t == taps && *v == noise_var {
                return Ok(b.clone());
            }
        }
        let h = if is_identity(taps) {
            None
        } else {
            Some(circulant_matrix(taps, self.set.len())?)
        };
        let b = Arc::new(build_receiver(self.set.matrix(), ReceiverKind::Mmse, Some(noise_var), h.as_ref())?);
        *cache = Some((taps.to_vec(), noise_var, b.clone()));
        Ok(b)
    }
}

impl FrameModem for GfdmFrame {
    fn kind(&self) -> WaveformKind {
        WaveformKind::Gfdm
    }
    fn symbols(&self) -> usize {
        self.set.len()
    }
    fn frame_len(&self) -> usize {
        self.set.len() + self.cp
    }
    fn cp_len(&self) -> usize {
        self.cp
    }
    fn subcarriers(&self) -> usize {
        self.set.subcarriers()
    }
    fn subcarrier_of(&self, i: usize) -> usize {
        i % self.set.subcarriers()
    }
    fn modulate(&self, d: &[C64]) -> Result<Vec<C64>> {
        add_cp(&self.set.modulate(d)?, self.cp)
    }
    fn detect(&self, y: &[C64], taps: &[C64], noise_var: f64) -> Result<Vec<C64>> {
        check_received(self.frame_len(), y, taps)?;
        let n = self.set.len();
        match &self.receiver {
            Some(b) => b.demodulate(&circular_front_end(&self.eq, self.cp, n, y, taps)?),
            None => {
                // MMSE works on the unequalized frame
                let body = remove_cp(&y[..n + self.cp], self.cp)?;
                self.mmse_receiver(taps, noise_var)?.demodulate(&body)
            }
        }
    }
    fn stream_assembly(&self) -> FrameAssembly {
        FrameAssembly::BackToBack
    }
}

/// Circular time-domain GFDM-OQAM with CP and matched filters.
pub struct GfdmOqamFrame {
    set: OqamMatrixSet<f64>,
    b_i: ReceiverMatrix<f64>,
    b_q: ReceiverMatrix<f64>,
    gain_i: Vec<f64>,
    gain_q: Vec<f64>,
    cp: usize,
    eq: FdZfEqualizer<f64>,
}

impl GfdmOqamFrame {
    pub fn new(set: OqamMatrixSet<f64>, cp: usize) -> Result<Self> {
        let (b_i, b_q) = set.matched_filters();
        Ok(Self {
            gain_i: set.in_phase().column_energies(),
            gain_q: set.quadrature().column_energies(),
            eq: FdZfEqualizer::new(set.len())?,
            b_i,
            b_q,
            set,
            cp,
        })
    }
}

impl FrameModem for GfdmOqamFrame {
    fn kind(&self) -> WaveformKind {
        WaveformKind::GfdmOqamCircular
    }
    fn symbols(&self) -> usize {
        self.set.len()
    }
    fn frame_len(&self) -> usize {
        self.set.len() + self.cp
    }
    fn cp_len(&self) -> usize {
        self.cp
    }
    fn subcarriers(&self) -> usize {
        self.set.subcarriers()
    }
    fn subcarrier_of(&self, i: usize) -> usize {
        i % self.set.subcarriers()
    }
    fn modulate(&self, d: &[C64]) -> Result<Vec<C64>> {
        add_cp(&self.set.modulate(d)?, self.cp)
    }
    fn detect(&self, y: &[C64], taps: &[C64], _noise_var: f64) -> Result<Vec<C64>> {
        check_received(self.frame_len(), y, taps)?;
        let y_eq = circular_front_end(&self.eq, self.cp, self.set.len(), y, taps)?;
        let d = oqam_demodulate(&self.b_i, &self.b_q, &y_eq)?;
        Ok(d.iter()
            .enumerate()
            .map(|(i, v)| C64::new(v.re / self.gain_i[i], v.im / self.gain_q[i]))
            .collect())
    }
    fn stream_assembly(&self) -> FrameAssembly {
        FrameAssembly::BackToBack
    }
}

pub struct LinearGfdmFrame {
    set: LinearGfdmMatrixSet<f64>,
    eq: FdZfEqualizer<f64>,
    assembly: FrameAssembly,
}

impl LinearGfdmFrame {
    pub fn new(set: LinearGfdmMatrixSet<f64>, assembly: FrameAssembly) -> Result<Self> {
        Ok(Self {
            eq: FdZfEqualizer::new((set.frame_len() + MAX_CHANNEL_MEMORY).next_power_of_two())?,
            set,
            assembly,
        })
    }
}

impl FrameModem for LinearGfdmFrame {
    fn kind(&self) -> WaveformKind {
        WaveformKind::LinearGfdm
    }
    fn symbols(&self) -> usize {
        self.set.symbols()
    }
    fn frame_len(&self) -> usize {
        self.set.frame_len()
    }
    fn subcarriers(&self) -> usize {
        self.set.subcarriers()
    }
    fn subcarrier_of(&self, i: usize) -> usize {
        i % self.set.subcarriers()
    }
    fn modulate(&self, d: &[C64]) -> Result<Vec<C64>> {
        self.set.modulate(d)
    }
    fn detect(&self, y: &[C64], taps: &[C64], _noise_var: f64) -> Result<Vec<C64>> {
        check_received(self.frame_len(), y, taps)?;
        self.set.demodulate(&linear_front_end(&self.eq, self.frame_len(), y, taps)?)
    }
    fn stream_assembly(&self) -> FrameAssembly {
        self.assembly
    }
}

pub struct FbmcFrame {
    modem: FbmcModem<f64>,
    eq: FdZfEqualizer<f64>,
    assembly: FrameAssembly,
}

impl FbmcFrame {
    pub fn new(modem: FbmcModem<f64>, assembly: FrameAssembly) -> Result<Self> {
        Ok(Self {
            eq: FdZfEqualizer::new((modem.burst_len() + MAX_CHANNEL_MEMORY).next_power_of_two())?,
            modem,
            assembly,
        })
    }
}

impl FrameModem for FbmcFrame {
    fn kind(&self) -> WaveformKind {
        WaveformKind::Fbmc
    }
    fn symbols(&self) -> usize {
        self.modem.symbols()
    }
    fn frame_len(&self) -> usize {
        self.modem.burst_len()
    }
    fn subcarriers(&self) -> usize {
        self.modem.subcarriers()
    }
    fn subcarrier_of(&self, i: usize) -> usize {
        i % self.modem.subcarriers()
    }
    fn modulate(&self, d: &[C64]) -> Result<Vec<C64>> {
        Ok(self.modem.modulate(d)?.samples)
    }
    fn detect(&self, y: &[C64], taps: &[C64], _noise_var: f64) -> Result<Vec<C64>> {
        check_received(self.frame_len(), y, taps)?;
        self.modem.demodulate(&linear_front_end(&self.eq, self.frame_len(), y, taps)?)
    }
    fn stream_assembly(&self) -> FrameAssembly {
        self.assembly
    }
}

/// Builds the frame modem for `kind` from the scenario parameters.
pub fn build_modem(kind: WaveformKind, p: &WaveformParams) -> Result<Box<dyn FrameModem>> {
    let k = p.subcarriers;
    let stride = k * p.subsymbols;
    Ok(match kind {
        WaveformKind::Ofdm => Box::new(OfdmFrame::new(OfdmParams::full(p.ofdm_subcarriers, p.cp_len)?)?),
        WaveformKind::Gfdm => {
            let proto = PrototypeFilter::phydyas(k, p.overlap)?;
            Box::new(GfdmFrame::new(&proto, k, p.gfdm_subsymbols, p.cp_len, p.receiver)?)
        }
        WaveformKind::GfdmOqamCircular => {
            let proto = PrototypeFilter::phydyas(k, p.overlap)?;
            let set = OqamMatrixSet::build(&proto, k, p.subsymbols, p.subcarrier_phase)?;
            Box::new(GfdmOqamFrame::new(set, p.cp_len)?)
        }
        WaveformKind::LinearGfdm => {
            let proto = PrototypeFilter::phydyas(k, p.overlap)?;
            let set = LinearGfdmMatrixSet::build_with_phase(&proto, k, p.subsymbols, p.subcarrier_phase)?;
            Box::new(LinearGfdmFrame::new(set, p.frame_assembly.assembly(stride))?)
        }
        WaveformKind::Fbmc => {
            let proto = PrototypeFilter::phydyas(k, p.overlap)?;
            let modem = FbmcModem::new(proto, k, p.subsymbols)?;
            Box::new(FbmcFrame::new(modem, p.frame_assembly.assembly(stride))?)
        }
    })
}
