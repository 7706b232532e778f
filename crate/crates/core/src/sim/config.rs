//! Scenario configuration: defaults, a flat `key = value` file format and validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::channel::{ChannelLabel, TvfsProfile};
use crate::error::{Error, Result};
use crate::gfdm::{ReceiverKind, SubcarrierPhase};
use crate::linear_gfdm::FrameAssembly;
use crate::metrics::{default_papr_grid, Window, WelchConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WaveformKind {
    Ofdm,
    Gfdm,
    GfdmOqamCircular,
    LinearGfdm,
    Fbmc,
}

impl WaveformKind {
    pub const ALL: [WaveformKind; 5] = [
        WaveformKind::Ofdm,
        WaveformKind::Gfdm,
        WaveformKind::GfdmOqamCircular,
        WaveformKind::LinearGfdm,
        WaveformKind::Fbmc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WaveformKind::Ofdm => "ofdm",
            WaveformKind::Gfdm => "gfdm",
            WaveformKind::GfdmOqamCircular => "gfdm_oqam_circular",
            WaveformKind::LinearGfdm => "linear_gfdm",
            WaveformKind::Fbmc => "fbmc",
        }
    }
}

impl fmt::Display for WaveformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveformKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        WaveformKind::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "waveform",
                    format!("unknown waveform `{s}` (ofdm, gfdm, gfdm_oqam_circular, linear_gfdm, fbmc)"),
                )
            })
    }
}

impl FromStr for ChannelLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "awgn" => Ok(ChannelLabel::Awgn),
            "tifs" => Ok(ChannelLabel::Tifs),
            "tvfs" => Ok(ChannelLabel::Tvfs),
            _ => Err(Error::config("channel", format!("unknown channel `{s}` (awgn, tifs, tvfs)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Ber,
    Psd,
    Papr,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Ber => "ber",
            MetricKind::Psd => "psd",
            MetricKind::Papr => "papr",
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ber" => Ok(MetricKind::Ber),
            "psd" => Ok(MetricKind::Psd),
            "papr" => Ok(MetricKind::Papr),
            _ => Err(Error::config("metric", format!("unknown metric `{s}` (ber, psd, papr)"))),
        }
    }
}

/// Waveform dimensions and receiver options.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveformParams {
    pub qam_order: usize,
    /// `K` for the GFDM variants and FBMC.
    pub subcarriers: usize,
    /// `M` for GFDM-OQAM, Linear GFDM and FBMC (OQAM symbols per burst).
    pub subsymbols: usize,
    /// `M` for classic circular GFDM.
    pub gfdm_subsymbols: usize,
    pub overlap: usize,
    pub cp_len: usize,
    pub ofdm_subcarriers: usize,
    pub receiver: ReceiverKind,
    pub subcarrier_phase: SubcarrierPhase,
    pub frame_assembly: FrameAssemblyMode,
    pub tvfs_profile: TvfsProfile,
    pub include_cp_energy: bool,
}

/// Stream layout for PSD estimation of the CP-free waveforms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FrameAssemblyMode {
    /// Frames start every `K M` samples and their tails add up.
    #[default]
    OverlapAdd,
    BackToBack,
}

impl FrameAssemblyMode {
    pub fn assembly(self, stride: usize) -> FrameAssembly {
        match self {
            FrameAssemblyMode::OverlapAdd => FrameAssembly::OverlapAdd { stride },
            FrameAssemblyMode::BackToBack => FrameAssembly::BackToBack,
        }
    }
}

impl Default for WaveformParams {
    fn default() -> Self {
        Self {
            qam_order: 16,
            subcarriers: 128,
            subsymbols: 4,
            gfdm_subsymbols: 5,
            overlap: 4,
            cp_len: 32,
            ofdm_subcarriers: 512,
            receiver: ReceiverKind::ZeroForcing,
            subcarrier_phase: SubcarrierPhase::Quadrature,
            frame_assembly: FrameAssemblyMode::OverlapAdd,
            tvfs_profile: TvfsProfile::Verbatim,
            include_cp_energy: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub waveform: WaveformKind,
    pub channel: ChannelLabel,
    pub metric: MetricKind,
    pub ebn0_grid_db: Vec<f64>,
    /// Frame budget per Eb/N0 point (BER) or in total (PSD, PAPR).
    pub frames: u64,
    pub seed: u64,
    pub waveform_params: WaveformParams,
    pub output_path: Option<PathBuf>,
    /// BER early stop: quit a point once this many errors and `min_bits` bits are in.
    pub max_errors: u64,
    pub min_bits: u64,
    /// Noise-free BER run (the Eb/N0 grid is still reported).
    pub noiseless: bool,
    pub welch: WelchConfig,
    pub papr_thresholds_db: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            waveform: WaveformKind::LinearGfdm,
            channel: ChannelLabel::Awgn,
            metric: MetricKind::Ber,
            ebn0_grid_db: (0..=7).map(|i| 2.0 * i as f64).collect(),
            frames: 1000,
            seed: 1,
            waveform_params: WaveformParams::default(),
            output_path: None,
            max_errors: 500,
            min_bits: 0,
            noiseless: false,
            welch: WelchConfig::default(),
            papr_thresholds_db: default_papr_grid(),
        }
    }
}

fn parse_num<T: FromStr>(field: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{value}` as a number")))
}

fn parse_bool(field: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(field, format!("expected true or false, got `{value}`"))),
    }
}

/// Comma-separated values, or an inclusive `start:step:stop` range.
pub fn parse_grid(field: &str, value: &str) -> Result<Vec<f64>> {
    let value = value.trim();
    if value.is_empty() {
        return Err(Error::config(field, "grid is empty"));
    }
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::config(field, "range must be start:step:stop"));
        }
        let start: f64 = parse_num(field, parts[0])?;
        let step: f64 = parse_num(field, parts[1])?;
        let stop: f64 = parse_num(field, parts[2])?;
        if !(step > 0.0) || stop < start {
            return Err(Error::config(field, "range needs step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + step * i as f64).collect());
    }
    value.split(',').map(|v| parse_num(field, v.trim())).collect()
}

/// `key = value` pairs of a config file; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::config(format!("line {}", i + 1), format!("expected `key = value`, got `{line}`"))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ScenarioConfig {
    /// Sets one field from its textual form. Keys are the field names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.waveform_params;
        match key {
            "waveform" => self.waveform = value.parse()?,
            "channel" => self.channel = value.parse()?,
            "metric" => self.metric = value.parse()?,
            "ebn0_grid_db" | "ebn0" => self.ebn0_grid_db = parse_grid(key, value)?,
            "frames" => self.frames = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "output_path" | "out" => self.output_path = Some(PathBuf::from(value)),
            "max_errors" => self.max_errors = parse_num(key, value)?,
            "min_bits" => self.min_bits = parse_num(key, value)?,
            "noiseless" => self.noiseless = parse_bool(key, value)?,
            "welch_seg_len" => self.welch.seg_len = parse_num(key, value)?,
            "welch_overlap" => self.welch.overlap = parse_num(key, value)?,
            "welch_window" => {
                self.welch.window = match value {
                    "hann" => Window::Hann,
                    "rectangular" => Window::Rectangular,
                    _ => return Err(Error::config(key, format!("unknown window `{value}` (hann, rectangular)"))),
                }
            }
            "papr_thresholds_db" => self.papr_thresholds_db = parse_grid(key, value)?,
            "qam_order" => p.qam_order = parse_num(key, value)?,
            "subcarriers" => p.subcarriers = parse_num(key, value)?,
            "subsymbols" => p.subsymbols = parse_num(key, value)?,
            "gfdm_subsymbols" => p.gfdm_subsymbols = parse_num(key, value)?,
            "overlap" => p.overlap = parse_num(key, value)?,
            "cp_len" => p.cp_len = parse_num(key, value)?,
            "ofdm_subcarriers" => p.ofdm_subcarriers = parse_num(key, value)?,
            "include_cp_energy" => p.include_cp_energy = parse_bool(key, value)?,
            "receiver" => {
                p.receiver = match value {
                    "zf" => ReceiverKind::ZeroForcing,
                    "mf" => ReceiverKind::MatchedFilter,
                    "mmse" => ReceiverKind::Mmse,
                    _ => return Err(Error::config(key, format!("unknown receiver `{value}` (zf, mf, mmse)"))),
                }
            }
            "subcarrier_phase" => {
                p.subcarrier_phase = match value {
                    "quadrature" => SubcarrierPhase::Quadrature,
                    "none" => SubcarrierPhase::None,
                    _ => return Err(Error::config(key, format!("unknown phase `{value}` (quadrature, none)"))),
                }
            }
            "frame_assembly" => {
                p.frame_assembly = match value {
                    "overlap_add" => FrameAssemblyMode::OverlapAdd,
                    "back_to_back" => FrameAssemblyMode::BackToBack,
                    _ => {
                        return Err(Error::config(
                            key,
                            format!("unknown assembly `{value}` (overlap_add, back_to_back)"),
                        ))
                    }
                }
            }
            "tvfs_profile" => {
                p.tvfs_profile = match value {
                    "verbatim" => TvfsProfile::Verbatim,
                    "corrected" => TvfsProfile::Corrected,
                    _ => return Err(Error::config(key, format!("unknown profile `{value}` (verbatim, corrected)"))),
                }
            }
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies every pair of a config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_config_text(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.waveform_params;
        if self.frames < 1 {
            return Err(Error::config("frames", "must be >= 1"));
        }
        if self.metric == MetricKind::Ber && self.ebn0_grid_db.is_empty() {
            return Err(Error::config("ebn0_grid_db", "grid is empty"));
        }
        if self.ebn0_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("ebn0_grid_db", "values must be finite"));
        }
        if self.ebn0_grid_db.len() >= 1 << 16 {
            return Err(Error::config("ebn0_grid_db", "at most 65535 points"));
        }
        if self.frames >= 1 << 40 {
            return Err(Error::config("frames", "must be below 2^40"));
        }
        let bits = p.qam_order.trailing_zeros();
        if p.qam_order < 4 || !p.qam_order.is_power_of_two() || bits % 2 != 0 {
            return Err(Error::config("qam_order", format!("must be a power of 4, got {}", p.qam_order)));
        }
        if p.subcarriers < 2 || p.subcarriers % 2 != 0 {
            return Err(Error::config("subcarriers", format!("must be even and >= 2, got {}", p.subcarriers)));
        }
        if p.subcarriers % 4 != 0 && self.metric == MetricKind::Psd {
            return Err(Error::config("subcarriers", "PSD runs need a multiple of 4 (half-band allocation)"));
        }
        if p.subsymbols < 1 {
            return Err(Error::config("subsymbols", "must be >= 1"));
        }
        if p.gfdm_subsymbols < 1 {
            return Err(Error::config("gfdm_subsymbols", "must be >= 1"));
        }
        if !(1..=4).contains(&p.overlap) {
            return Err(Error::config("overlap", format!("PHYDYAS supports 1..=4, got {}", p.overlap)));
        }
        if p.ofdm_subcarriers < 4 || p.ofdm_subcarriers % 4 != 0 {
            return Err(Error::config("ofdm_subcarriers", "must be a multiple of 4"));
        }
        let cp_frames = match self.waveform {
            WaveformKind::Ofdm => Some(p.ofdm_subcarriers),
            WaveformKind::Gfdm => Some(p.subcarriers * p.gfdm_subsymbols),
            WaveformKind::GfdmOqamCircular => Some(p.subcarriers * p.subsymbols),
            _ => None,
        };
        if let Some(n) = cp_frames {
            if p.cp_len >= n {
                return Err(Error::config("cp_len", format!("{} must be below the frame length {n}", p.cp_len)));
            }
            if self.channel != ChannelLabel::Awgn && p.cp_len + 1 < 8 {
                return Err(Error::config("cp_len", "must cover the 8-tap channel memory (>= 7)"));
            }
        }
        if self.welch.seg_len < 2 {
            return Err(Error::config("welch_seg_len", "must be >= 2"));
        }
        if !(0.0..1.0).contains(&self.welch.overlap) {
            return Err(Error::config("welch_overlap", "must lie in [0, 1)"));
        }
        if self.metric == MetricKind::Papr {
            if self.papr_thresholds_db.is_empty() {
                return Err(Error::config("papr_thresholds_db", "grid is empty"));
            }
            if self.papr_thresholds_db.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::config("papr_thresholds_db", "must be strictly increasing"));
            }
        }
        if self.metric == MetricKind::Ber && self.ebn0_grid_db.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("ebn0_grid_db", "must be strictly increasing"));
        }
        Ok(())
    }
}
