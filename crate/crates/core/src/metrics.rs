//! BER counting, Welch PSD estimation, PAPR and curve export.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

/// Bit error tally.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BitErrors {
    pub errors: u64,
    pub total: u64,
}

impl BitErrors {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.errors as f64 / self.total as f64
        }
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            errors: self.errors + other.errors,
            total: self.total + other.total,
        }
    }
}

pub fn ber_count(tx: &[u8], rx: &[u8]) -> Result<BitErrors> {
    check_len("BER bit streams", tx.len(), rx.len())?;
    let errors = tx.iter().zip(rx).filter(|(a, b)| a != b).count() as u64;
    Ok(BitErrors {
        errors,
        total: tx.len() as u64,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    /// Periodic window of `n` samples.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WelchConfig {
    pub seg_len: usize,
    pub overlap: f64,
    pub window: Window,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            seg_len: 2048,
            overlap: 0.5,
            window: Window::Hann,
        }
    }
}

impl WelchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seg_len < 2 {
            return Err(Error::param("seg_len", "must be >= 2"));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::param("overlap", format!("must lie in [0, 1), got {}", self.overlap)));
        }
        Ok(())
    }

    /// Samples between consecutive segment starts.
    pub fn hop(&self) -> usize {
        let ov = (self.seg_len as f64 * self.overlap).round() as usize;
        (self.seg_len - ov).max(1)
    }
}

/// Running sum of windowed periodograms. Accumulators over disjoint
/// segment sets combine with [`WelchAccumulator::merge`].
#[derive(Clone)]
pub struct WelchAccumulator {
    config: WelchConfig,
    window: Vec<f64>,
    window_power: f64,
    fft: Arc<dyn Fft<f64>>,
    sum: Vec<f64>,
    segments: u64,
}

impl fmt::Debug for WelchAccumulator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WelchAccumulator")
            .field("config", &self.config)
            .field("segments", &self.segments)
            .finish()
    }
}

impl WelchAccumulator {
    pub fn new(config: WelchConfig) -> Result<Self> {
        config.validate()?;
        let window = config.window.coefficients(config.seg_len);
        let window_power = window.iter().map(|w| w * w).sum();
        Ok(Self {
            fft: FftPlanner::new().plan_fft_forward(config.seg_len),
            sum: vec![0.0; config.seg_len],
            config,
            window,
            window_power,
            segments: 0,
        })
    }

    pub fn config(&self) -> &WelchConfig {
        &self.config
    }

    pub fn segments(&self) -> u64 {
        self.segments
    }

    /// Adds one `seg_len` segment.
    pub fn push_segment<T: Real>(&mut self, seg: &[Complex<T>]) -> Result<()> {
        check_len("Welch segment", self.config.seg_len, seg.len())?;
        let mut buf: Vec<Complex<f64>> = seg
            .iter()
            .zip(&self.window)
            .map(|(v, &w)| Complex::new(v.re.to_f64_lossy() * w, v.im.to_f64_lossy() * w))
            .collect();
        self.fft.process(&mut buf);
        for (s, v) in self.sum.iter_mut().zip(&buf) {
            *s += v.norm_sqr();
        }
        self.segments += 1;
        Ok(())
    }

    /// Adds every full segment of a stream (hop from [`WelchConfig::hop`]).
    pub fn push_stream<T: Real>(&mut self, x: &[Complex<T>]) -> Result<()> {
        for start in segment_starts(x.len(), &self.config) {
            self.push_segment(&x[start..start + self.config.seg_len])?;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.config != other.config {
            return Err(Error::param("welch", "cannot merge accumulators with different settings"));
        }
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        self.segments += other.segments;
        Ok(())
    }

    /// Two-sided density in power per cycle/sample, ordered from `-1/2` up.
    pub fn finish(&self) -> Result<Psd> {
        if self.segments == 0 {
            return Err(Error::Empty("Welch estimate has no segments"));
        }
        let n = self.config.seg_len;
        let norm = 1.0 / (self.segments as f64 * self.window_power);
        let mut freqs = Vec::with_capacity(n);
        let mut density = Vec::with_capacity(n);
        for i in 0..n {
            // fftshift: bin (i + n/2) mod n sits at frequency (i - n/2) / n
            let bin = (i + n / 2) % n;
            freqs.push((i as f64 - (n / 2) as f64) / n as f64);
            density.push(self.sum[bin] * norm);
        }
        Ok(Psd { freqs, density })
    }
}

/// Segment start indices covering a stream of `len` samples.
pub fn segment_starts(len: usize, config: &WelchConfig) -> impl Iterator<Item = usize> {
    let seg = config.seg_len;
    let hop = config.hop();
    let count = if len < seg { 0 } else { (len - seg) / hop + 1 };
    (0..count).map(move |i| i * hop)
}

/// Welch estimate over a set of independent streams.
pub fn welch_psd<T: Real>(streams: &[Vec<Complex<T>>], config: WelchConfig) -> Result<Psd> {
    if streams.iter().all(|s| s.is_empty()) {
        return Err(Error::Empty("Welch input"));
    }
    let mut acc = WelchAccumulator::new(config)?;
    let total: usize = streams.iter().map(|s| s.len()).sum();
    if streams.iter().all(|s| s.len() < config.seg_len) {
        return Err(Error::param(
            "seg_len",
            format!("{} exceeds every stream ({} samples in total)", config.seg_len, total),
        ));
    }
    for s in streams {
        acc.push_stream(s)?;
    }
    acc.finish()
}

/// Linear-scale power spectral density on `[-1/2, 1/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub density: Vec<f64>,
}

impl Psd {
    /// Integral of the density: the mean signal power.
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() / self.density.len() as f64
    }

    /// Mean density over `lo <= f <= hi`.
    pub fn mean_level(&self, lo: f64, hi: f64) -> Result<f64> {
        let v: Vec<f64> = self
            .freqs
            .iter()
            .zip(&self.density)
            .filter(|(&f, _)| f >= lo && f <= hi)
            .map(|(_, &d)| d)
            .collect();
        if v.is_empty() {
            return Err(Error::param("band", format!("no PSD bins in [{lo}, {hi}]")));
        }
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    }

    /// `10 log10(density / plateau)` as a curve.
    pub fn to_db_curve(&self, plateau: f64) -> Result<MetricCurve> {
        if !(plateau > 0.0) {
            return Err(Error::ZeroPower);
        }
        let points = self
            .freqs
            .iter()
            .zip(&self.density)
            .map(|(&f, &d)| (f, 10.0 * (d / plateau).max(f64::MIN_POSITIVE).log10()))
            .collect();
        MetricCurve::new(CurveKind::PsdDb, points)
    }
}

/// `10 log10(max |x|^2 / mean |x|^2)`.
pub fn papr<T: Real>(frame: &[Complex<T>]) -> Result<f64> {
    if frame.is_empty() {
        return Err(Error::Empty("PAPR frame"));
    }
    let mut peak = 0.0f64;
    let mut sum = 0.0f64;
    for v in frame {
        let p = v.norm_sqr().to_f64_lossy();
        peak = peak.max(p);
        sum += p;
    }
    if sum == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(10.0 * (peak * frame.len() as f64 / sum).log10())
}

/// Thresholds `6, 6.5, ..., 15` dB.
pub fn default_papr_grid() -> Vec<f64> {
    (0..=18).map(|i| 6.0 + 0.5 * i as f64).collect()
}

/// Empirical `Pr{PAPR > threshold}`.
pub fn papr_ccdf(paprs: &[f64], thresholds: &[f64]) -> Result<MetricCurve> {
    if paprs.is_empty() {
        return Err(Error::Empty("PAPR samples"));
    }
    let n = paprs.len() as f64;
    let points = thresholds
        .iter()
        .map(|&t| (t, paprs.iter().filter(|&&p| p > t).count() as f64 / n))
        .collect();
    MetricCurve::new(CurveKind::Ccdf, points)
}

/// Level difference between the in-band plateau and the PSD at
/// `band_edge + offset`, linearly interpolated. The curve must already be
/// normalized to a 0 dB plateau.
pub fn oob_ratio(psd_db: &MetricCurve, band_edge: f64, offset: f64) -> Result<f64> {
    let f = band_edge + offset;
    let pts = &psd_db.points;
    let (first, last) = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::Empty("PSD curve")),
    };
    if f < first || f > last {
        return Err(Error::param(
            "offset",
            format!("frequency {f} outside the estimate range [{first}, {last}]"),
        ));
    }
    let i = pts.partition_point(|p| p.0 < f);
    let level = if i == 0 || pts[i].0 == f {
        pts[i].1
    } else {
        let (f0, v0) = pts[i - 1];
        let (f1, v1) = pts[i];
        v0 + (v1 - v0) * (f - f0) / (f1 - f0)
    };
    Ok(-level)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Ber,
    PsdDb,
    Ccdf,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::Ber => "ber",
            CurveKind::PsdDb => "psd_db",
            CurveKind::Ccdf => "ccdf",
        }
    }
}

/// `(abscissa, value)` points with an optional reference column.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricCurve {
    pub kind: CurveKind,
    pub points: Vec<(f64, f64)>,
    pub reference: Option<(String, Vec<f64>)>,
    pub meta: Vec<(String, String)>,
}

impl MetricCurve {
    pub fn new(kind: CurveKind, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::param("abscissa", "must be strictly increasing"));
        }
        if matches!(kind, CurveKind::Ber | CurveKind::Ccdf)
            && points.iter().any(|p| !(0.0..=1.0).contains(&p.1))
        {
            return Err(Error::param("value", "probabilities must lie in [0, 1]"));
        }
        Ok(Self {
            kind,
            points,
            reference: None,
            meta: Vec::new(),
        })
    }

    pub fn with_reference(mut self, name: &str, values: Vec<f64>) -> Result<Self> {
        check_len("reference column", self.points.len(), values.len())?;
        self.reference = Some((name.to_string(), values));
        Ok(self)
    }

    pub fn with_meta(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == x).map(|p| p.1)
    }

    fn header(&self) -> String {
        let mut h = format!("# kind={}", self.kind.name());
        for (k, v) in &self.meta {
            h.push_str(&format!("; {k}={v}"));
        }
        h
    }

    /// Header comment, column names, then rows at full double precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.header())?;
        match &self.reference {
            Some((name, _)) => writeln!(w, "abscissa,value,{name}")?,
            None => writeln!(w, "abscissa,value")?,
        }
        for (i, (x, y)) in self.points.iter().enumerate() {
            match &self.reference {
                Some((_, r)) => writeln!(w, "{x:e},{y:e},{:e}", r[i])?,
                None => writeln!(w, "{x:e},{y:e}")?,
            }
        }
        Ok(())
    }

    /// Whitespace-separated columns for gnuplot.
    pub fn write_plot_data<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.header())?;
        for (i, (x, y)) in self.points.iter().enumerate() {
            match &self.reference {
                Some((_, r)) => writeln!(w, "{x:e} {y:e} {:e}", r[i])?,
                None => writeln!(w, "{x:e} {y:e}")?,
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}
