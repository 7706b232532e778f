//! BER, PSD and PAPR experiments.
//!
//! Frames are processed in fixed batches with rayon and reduced in frame
//! order, so a given configuration yields bit-identical results for any
//! number of worker threads. `WAVEMOD_THREADS` caps the pool size.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;

use crate::channel::{apply_channel, draw_tvfs, make_awgn, make_tifs, ChannelLabel, ConvolutionMode, ChannelRealization};
use crate::error::{Error, Result};
use crate::linear_gfdm::assemble_stream;
use crate::mapping::Qam;
use crate::metrics::{ber_count, oob_ratio, papr, papr_ccdf, segment_starts, BitErrors, CurveKind, MetricCurve, Psd, WelchAccumulator};
use crate::ofdm::{theoretical_ber, TheoryChannel};
use crate::sim::config::{MetricKind, ScenarioConfig};
use crate::sim::modem::{build_modem, FrameModem};
use crate::sim::rng::{frame_rng, random_bits, Purpose};
use crate::Complex64 as C64;

/// Frames per parallel batch; early-stop decisions happen between batches.
pub const BATCH_FRAMES: u64 = 64;
/// Welch segments per parallel work item.
const SEGMENT_CHUNK: usize = 64;

/// Runs `f` on a pool sized by `WAVEMOD_THREADS`, or on the global pool.
pub fn with_thread_pool<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    match std::env::var("WAVEMOD_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::config("WAVEMOD_THREADS", format!("not a thread count: `{v}`")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("WAVEMOD_THREADS", e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

/// Symbol energy over noise density: `N0 = Es / (log2(M) * Eb/N0)` with
/// `Es = 1`, scaled by `(N + Ncp) / N` when the prefix counts as spent energy.
pub fn noise_variance(ebn0_db: f64, bits_per_symbol: usize, cp_factor: f64) -> f64 {
    cp_factor / (bits_per_symbol as f64 * 10f64.powf(ebn0_db / 10.0))
}

fn cp_factor(cfg: &ScenarioConfig, modem: &dyn FrameModem) -> f64 {
    if cfg.waveform_params.include_cp_energy && modem.cp_len() > 0 {
        let body = (modem.frame_len() - modem.cp_len()) as f64;
        modem.frame_len() as f64 / body
    } else {
        1.0
    }
}

fn frame_symbols(qam: &Qam<f64>, cfg: &ScenarioConfig, frame: u64, n: usize) -> Result<(Vec<u8>, Vec<C64>)> {
    let bits = random_bits(&mut frame_rng(cfg.seed, Purpose::Data, 0, frame), n * qam.bits_per_symbol());
    let d = qam.map(&bits)?;
    Ok((bits, d))
}

fn frame_channel(cfg: &ScenarioConfig, frame: u64) -> ChannelRealization<f64> {
    match cfg.channel {
        ChannelLabel::Awgn => make_awgn(ConvolutionMode::Linear),
        ChannelLabel::Tifs => make_tifs(ConvolutionMode::Linear),
        ChannelLabel::Tvfs => draw_tvfs(
            &mut frame_rng(cfg.seed, Purpose::Channel, 0, frame),
            cfg.waveform_params.tvfs_profile,
            ConvolutionMode::Linear,
        ),
    }
}

/// Closed-form OFDM reference for the configured channel.
pub fn theory_channel(cfg: &ScenarioConfig) -> Result<TheoryChannel> {
    Ok(match cfg.channel {
        ChannelLabel::Awgn => TheoryChannel::Awgn,
        ChannelLabel::Tifs => {
            let taps = make_tifs::<f64>(ConvolutionMode::Linear).taps;
            let h = crate::channel::frequency_response(&taps, cfg.waveform_params.ofdm_subcarriers)?;
            TheoryChannel::SubcarrierGains(h.iter().map(|v| v.norm_sqr()).collect())
        }
        ChannelLabel::Tvfs => TheoryChannel::RayleighFlat {
            mean_power: cfg.waveform_params.tvfs_profile.gains().iter().map(|g| g * g).sum(),
        },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub tally: BitErrors,
    pub frames: u64,
    pub theory: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerReport {
    pub points: Vec<BerPoint>,
    pub curve: MetricCurve,
}

fn ber_frame(
    modem: &dyn FrameModem,
    qam: &Qam<f64>,
    cfg: &ScenarioConfig,
    point: usize,
    frame: u64,
    noise_var: f64,
) -> Result<BitErrors> {
    let (bits, d) = frame_symbols(qam, cfg, frame, modem.symbols())?;
    let x = modem.modulate(&d)?;
    let ch = frame_channel(cfg, frame);
    let mut rng = frame_rng(cfg.seed, Purpose::Noise, point, frame);
    let y = apply_channel(&x, &ch, &mut rng, noise_var)?;
    let d_hat = modem.detect(&y, &ch.taps, noise_var)?;
    ber_count(&bits, &qam.demap(&d_hat))
}

/// Bit error ratio over the Eb/N0 grid, with the OFDM closed form alongside.
pub fn run_ber(cfg: &ScenarioConfig) -> Result<BerReport> {
    cfg.validate()?;
    with_thread_pool(|| ber_points(cfg))?
}

fn ber_points(cfg: &ScenarioConfig) -> Result<BerReport> {
    let modem = build_modem(cfg.waveform, &cfg.waveform_params)?;
    let qam = Qam::<f64>::new(cfg.waveform_params.qam_order)?;
    let bps = qam.bits_per_symbol();
    let factor = cp_factor(cfg, modem.as_ref());
    let theory_ch = theory_channel(cfg)?;
    let mut points = Vec::with_capacity(cfg.ebn0_grid_db.len());
    for (pi, &ebn0) in cfg.ebn0_grid_db.iter().enumerate() {
        let noise_var = if cfg.noiseless { 0.0 } else { noise_variance(ebn0, bps, factor) };
        let mut tally = BitErrors::default();
        let mut done = 0u64;
        while done < cfg.frames {
            let end = (done + BATCH_FRAMES).min(cfg.frames);
            let batch: Vec<Result<BitErrors>> = (done..end)
                .into_par_iter()
                .map(|f| ber_frame(modem.as_ref(), &qam, cfg, pi, f, noise_var))
                .collect();
            for r in batch {
                tally = tally.merge(r?);
            }
            done = end;
            if tally.errors >= cfg.max_errors && tally.total >= cfg.min_bits {
                break;
            }
        }
        // the closed form sees the energy actually left on the data subcarriers
        let theory = theoretical_ber(ebn0 - 10.0 * factor.log10(), cfg.waveform_params.qam_order, &theory_ch)?;
        points.push(BerPoint {
            ebn0_db: ebn0,
            tally,
            frames: done,
            theory,
        });
    }
    let curve = MetricCurve::new(CurveKind::Ber, points.iter().map(|p| (p.ebn0_db, p.tally.ratio())).collect())?
        .with_reference("theory", points.iter().map(|p| p.theory).collect())?;
    let curve = with_common_meta(curve, cfg);
    Ok(BerReport { points, curve })
}

fn with_common_meta(curve: MetricCurve, cfg: &ScenarioConfig) -> MetricCurve {
    let p = &cfg.waveform_params;
    curve
        .with_meta("metric", cfg.metric.name())
        .with_meta("waveform", cfg.waveform)
        .with_meta("channel", cfg.channel.name())
        .with_meta("seed", cfg.seed)
        .with_meta("frames", cfg.frames)
        .with_meta("qam_order", p.qam_order)
        .with_meta("subcarriers", p.subcarriers)
        .with_meta("subsymbols", p.subsymbols)
        .with_meta("overlap", p.overlap)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsdReport {
    /// Linear density.
    pub psd: Psd,
    /// dB relative to the in-band plateau.
    pub curve: MetricCurve,
    pub plateau: f64,
    /// Upper edge of the occupied band (cycles/sample).
    pub band_edge: f64,
    /// Frequency step of one "subcarrier" offset, `1 / subcarriers`.
    pub offset_unit: f64,
}

impl PsdReport {
    /// Suppression (dB below plateau) `offset` subcarriers beyond the band edge.
    pub fn suppression_at(&self, offset_subcarriers: f64) -> Result<f64> {
        oob_ratio(&self.curve, self.band_edge, offset_subcarriers * self.offset_unit)
    }
}

/// Active bins of the half-band allocation: `[0, K/4) u [3K/4, K)`.
pub fn half_band_active(subcarrier: usize, grid: usize) -> bool {
    subcarrier < grid / 4 || subcarrier >= 3 * grid / 4
}

/// Emits the configured number of frames with the half-band allocation,
/// laid out as a continuous stream.
pub fn psd_stream(cfg: &ScenarioConfig, modem: &dyn FrameModem) -> Result<Vec<C64>> {
    let qam = Qam::<f64>::new(cfg.waveform_params.qam_order)?;
    let grid = modem.subcarriers();
    let frames: Vec<Result<Vec<C64>>> = (0..cfg.frames)
        .into_par_iter()
        .map(|f| {
            let (_, mut d) = frame_symbols(&qam, cfg, f, modem.symbols())?;
            for (i, v) in d.iter_mut().enumerate() {
                if !half_band_active(modem.subcarrier_of(i), grid) {
                    *v = C64::new(0.0, 0.0);
                }
            }
            modem.modulate(&d)
        })
        .collect();
    let frames = frames.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(assemble_stream(&frames, modem.stream_assembly()))
}

/// Welch estimate of a stream; segments are reduced in fixed chunks.
pub fn welch_parallel(stream: &[C64], cfg: &ScenarioConfig) -> Result<Psd> {
    let starts: Vec<usize> = segment_starts(stream.len(), &cfg.welch).collect();
    if starts.is_empty() {
        return Err(Error::config(
            "welch_seg_len",
            format!("{} exceeds the {}-sample stream", cfg.welch.seg_len, stream.len()),
        ));
    }
    let seg = cfg.welch.seg_len;
    let parts: Vec<Result<WelchAccumulator>> = starts
        .par_chunks(SEGMENT_CHUNK)
        .map(|chunk| {
            let mut acc = WelchAccumulator::new(cfg.welch)?;
            for &s in chunk {
                acc.push_segment(&stream[s..s + seg])?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = WelchAccumulator::new(cfg.welch)?;
    for p in parts {
        total.merge(&p?)?;
    }
    total.finish()
}

/// Spectrum of a stream of frames with half of the subcarriers active.
pub fn run_psd(cfg: &ScenarioConfig) -> Result<PsdReport> {
    cfg.validate()?;
    with_thread_pool(|| psd_report(cfg))?
}

fn psd_report(cfg: &ScenarioConfig) -> Result<PsdReport> {
    let modem = build_modem(cfg.waveform, &cfg.waveform_params)?;
    let stream = psd_stream(cfg, modem.as_ref())?;
    let psd = welch_parallel(&stream, cfg)?;
    let grid = modem.subcarriers() as f64;
    let band_edge = 0.25 - 0.5 / grid;
    let plateau = psd.mean_level(-band_edge / 2.0, band_edge / 2.0)?;
    if !(plateau > 0.0) {
        return Err(Error::ZeroPower);
    }
    let curve = with_common_meta(psd.to_db_curve(plateau)?, cfg)
        .with_meta("welch_seg_len", cfg.welch.seg_len)
        .with_meta("band_edge", band_edge);
    Ok(PsdReport {
        psd,
        curve,
        plateau,
        band_edge,
        offset_unit: 1.0 / cfg.waveform_params.subcarriers as f64,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PaprReport {
    /// Per-frame PAPR in dB, in frame order.
    pub paprs: Vec<f64>,
    pub curve: MetricCurve,
}

/// Per-frame PAPR values, in frame order.
pub fn papr_samples(cfg: &ScenarioConfig, modem: &dyn FrameModem) -> Result<Vec<f64>> {
    let qam = Qam::<f64>::new(cfg.waveform_params.qam_order)?;
    let out: Vec<Result<f64>> = (0..cfg.frames)
        .into_par_iter()
        .map(|f| {
            let (_, d) = frame_symbols(&qam, cfg, f, modem.symbols())?;
            papr(&modem.modulate(&d)?)
        })
        .collect();
    out.into_iter().collect()
}

/// CCDF of the per-frame PAPR on the configured threshold grid.
pub fn run_papr(cfg: &ScenarioConfig) -> Result<PaprReport> {
    cfg.validate()?;
    with_thread_pool(|| papr_report(cfg))?
}

fn papr_report(cfg: &ScenarioConfig) -> Result<PaprReport> {
    let modem = build_modem(cfg.waveform, &cfg.waveform_params)?;
    let paprs = papr_samples(cfg, modem.as_ref())?;
    let curve = with_common_meta(papr_ccdf(&paprs, &cfg.papr_thresholds_db)?, cfg);
    Ok(PaprReport { paprs, curve })
}

/// Runs the configured experiment and writes its CSV when an output path is set.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<MetricCurve> {
    let curve = match cfg.metric {
        MetricKind::Ber => run_ber(cfg)?.curve,
        MetricKind::Psd => run_psd(cfg)?.curve,
        MetricKind::Papr => run_papr(cfg)?.curve,
    };
    if let Some(path) = &cfg.output_path {
        write_csv(&curve, path)?;
    }
    Ok(curve)
}

pub fn write_csv(curve: &MetricCurve, path: &Path) -> Result<()> {
    curve.write_csv(BufWriter::new(File::create(path)?))
}

pub fn write_plot_data(curve: &MetricCurve, path: &Path) -> Result<()> {
    curve.write_plot_data(BufWriter::new(File::create(path)?))
}
