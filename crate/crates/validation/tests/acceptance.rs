//! Acceptance suite: one PASS/FAIL line per criterion, followed by the
//! individual checks. Runs without the libtest harness so the report is
//! always printed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavemod::channel::{circulant_matrix, convolve_circular, convolve_linear, ChannelLabel, TIFS_TAPS};
use wavemod::fbmc::FbmcModem;
use wavemod::gfdm::{build_receiver, GfdmMatrixSet, ReceiverKind};
use wavemod::linear_gfdm::LinearGfdmMatrixSet;
use wavemod::mapping::Qam;
use wavemod::ofdm::{theoretical_ber, OfdmModem, OfdmParams, TheoryChannel};
use wavemod::prototype::PrototypeFilter;
use wavemod::scalar::max_abs_diff;
use wavemod::sim::runner::{run_ber, run_papr, run_psd, BerReport, PsdReport};
use wavemod::sim::{build_modem, MetricKind, ScenarioConfig, WaveformKind, WaveformParams};
use wavemod::Complex64 as C;
use wavemod_validation::{binom_sigma, run, Criterion, Entry};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn qam16(r: &mut ChaCha8Rng, n: usize) -> (Vec<u8>, Vec<C>) {
    let bits: Vec<u8> = (0..4 * n).map(|_| r.random_range(0..2u8)).collect();
    let d = Qam::<f64>::new(16).unwrap().map(&bits).unwrap();
    (bits, d)
}

fn papr_cfg(waveform: WaveformKind, frames: u64) -> ScenarioConfig {
    ScenarioConfig {
        waveform,
        metric: MetricKind::Papr,
        frames,
        ..Default::default()
    }
}

fn papr_reproduction(c: &mut Criterion) {
    let frames = 100_000u64;
    let n = frames as f64;
    let ccdf = |w: WaveformKind| run_papr(&papr_cfg(w, frames)).unwrap().curve;
    let ofdm = ccdf(WaveformKind::Ofdm);
    let fbmc = ccdf(WaveformKind::Fbmc);
    let lin = ccdf(WaveformKind::LinearGfdm);

    let mut point = |name: &str, curve: &wavemod::metrics::MetricCurve, t: f64, lo: f64, hi: f64| {
        let v = curve.value_at(t).unwrap();
        let s = binom_sigma((lo + hi) / 2.0, n);
        let target = if lo == hi { format!("{lo}") } else { format!("[{lo}, {hi}]") };
        c.check(
            v >= lo - 3.0 * s && v <= hi + 3.0 * s,
            format!("{name} Pr{{PAPR > {t} dB}} = {v:.6}, target {target}, 3 sigma = {:.6}", 3.0 * s),
        );
    };
    point("OFDM", &ofdm, 8.0, 0.200178, 0.200178);
    point("OFDM", &ofdm, 10.0, 0.004695, 0.004695);
    point("FBMC", &fbmc, 11.0, 0.399853, 0.399853);
    point("Linear GFDM", &lin, 11.0, 0.399853, 0.399853);
    point("FBMC", &fbmc, 12.0, 0.0799, 0.0801);
    point("Linear GFDM", &lin, 12.0, 0.0799, 0.0801);

    let mut worst: f64 = 0.0;
    let mut agree = true;
    for ((t, a), (_, b)) in fbmc.points.iter().zip(&lin.points) {
        let bound = 3.0 * (binom_sigma(*a, n).powi(2) + binom_sigma(*b, n).powi(2)).sqrt();
        if (a - b).abs() > bound {
            agree = false;
            c.info(format!("threshold {t} dB: FBMC {a:.6} vs Linear GFDM {b:.6}, bound {bound:.6}"));
        }
        worst = worst.max((a - b).abs());
    }
    c.check(agree, format!("Linear GFDM and FBMC CCDFs within joint 3 sigma on 6..15 dB (max |diff| {worst:.6})"));

    // the OFDM targets are met by a 128-point transform
    let mut small = papr_cfg(WaveformKind::Ofdm, frames);
    small.waveform_params.ofdm_subcarriers = 128;
    let alt = run_papr(&small).unwrap().curve;
    c.info(format!(
        "OFDM with 128 subcarriers: Pr{{>8 dB}} = {:.6}, Pr{{>10 dB}} = {:.6}",
        alt.value_at(8.0).unwrap(),
        alt.value_at(10.0).unwrap()
    ));
}

fn ber_cfg(waveform: WaveformKind, channel: ChannelLabel, grid: Vec<f64>) -> ScenarioConfig {
    ScenarioConfig {
        waveform,
        channel,
        ebn0_grid_db: grid,
        // 489 frames of 2048 bits: just over 10^6 bits per point
        frames: 489,
        min_bits: 1_000_000,
        seed: 99,
        ..Default::default()
    }
}

const BER_WAVEFORMS: [WaveformKind; 3] = [WaveformKind::Ofdm, WaveformKind::Fbmc, WaveformKind::LinearGfdm];

fn ber_vs_theory(c: &mut Criterion) {
    for w in BER_WAVEFORMS {
        let r = run_ber(&ber_cfg(w, ChannelLabel::Awgn, vec![4.0, 8.0, 12.0])).unwrap();
        for p in &r.points {
            let th = theoretical_ber(p.ebn0_db, 16, &TheoryChannel::Awgn).unwrap();
            let n = p.tally.total as f64;
            let s = binom_sigma(th, n);
            let ber = p.tally.ratio();
            c.check(
                n >= 1e6 && (ber - th).abs() <= 3.0 * s,
                format!("{w} at {} dB: BER {ber:.4e} vs theory {th:.4e} (3 sigma {:.2e}, {} bits)", p.ebn0_db, 3.0 * s, p.tally.total),
            );
        }
    }
}

fn equivalence(c: &mut Criterion) {
    let p = PrototypeFilter::<f64>::phydyas(128, 4).unwrap();
    let lin = LinearGfdmMatrixSet::build(&p, 128, 4).unwrap();
    let fbmc = FbmcModem::new(p, 128, 4).unwrap();
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (_, d) = qam16(&mut r, 512);
        let x = lin.modulate(&d).unwrap();
        let b = fbmc.modulate(&d).unwrap().samples;
        worst = worst.max(max_abs_diff(&x[..b.len()], &b));
        worst = worst.max(x[b.len()..].iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    c.check(worst <= 1e-10, format!("max |x_linear - x_fbmc| over 20 frames = {worst:.3e} (limit 1e-10)"));
}

fn band_report(w: WaveformKind) -> PsdReport {
    run_psd(&ScenarioConfig {
        waveform: w,
        metric: MetricKind::Psd,
        frames: 1000,
        seed: 5,
        ..Default::default()
    })
    .unwrap()
}

fn spectral_containment(c: &mut Criterion) {
    let lin = band_report(WaveformKind::LinearGfdm);
    let fbmc = band_report(WaveformKind::Fbmc);
    let circ = band_report(WaveformKind::GfdmOqamCircular);
    let ofdm = band_report(WaveformKind::Ofdm);
    let s = |r: &PsdReport, off: f64| r.suppression_at(off).unwrap();
    let mut worst: f64 = 0.0;
    for off in 1..=32 {
        let d = (s(&lin, off as f64) - s(&fbmc, off as f64)).abs();
        worst = worst.max(d);
    }
    c.check(worst <= 1.0, format!("Linear GFDM vs FBMC, offsets 1..32: max |difference| {worst:.3} dB (limit 1 dB)"));
    let gap = s(&lin, 2.0) - s(&circ, 2.0);
    c.check(
        gap >= 20.0,
        format!("circular GFDM-OQAM exceeds Linear GFDM at 2 subcarriers by {gap:.1} dB (need 20 dB)"),
    );
    let gap = s(&fbmc, 8.0) - s(&ofdm, 8.0);
    c.check(gap >= 20.0, format!("OFDM exceeds FBMC at 8 subcarriers by {gap:.1} dB (need 20 dB)"));
    for (name, r) in [("linear_gfdm", &lin), ("fbmc", &fbmc), ("gfdm_oqam_circular", &circ), ("ofdm", &ofdm)] {
        c.info(format!(
            "{name}: suppression at 1/2/8/32 subcarriers = {:.1}/{:.1}/{:.1}/{:.1} dB",
            s(r, 1.0),
            s(r, 2.0),
            s(r, 8.0),
            s(r, 32.0)
        ));
    }
}

fn matrix_identities(c: &mut Criterion) {
    let p = PrototypeFilter::<f64>::phydyas(128, 4).unwrap();
    let a = GfdmMatrixSet::build(&p, 128, 5).unwrap();
    let zf = build_receiver(a.matrix(), ReceiverKind::ZeroForcing, None, None).unwrap();
    let err = zf.matrix().matmul(a.matrix()).unwrap().identity_error();
    c.check(err <= 1e-9, format!("K=128 M=5 PHYDYAS: max |B_ZF A - I| = {err:.3e}"));
    let mf = build_receiver(a.matrix(), ReceiverKind::MatchedFilter, None, None).unwrap();
    c.check(
        mf.matrix().as_slice() == a.matrix().adjoint().as_slice(),
        "B_MF equals A^H entry for entry",
    );
    let mmse = build_receiver(a.matrix(), ReceiverKind::Mmse, Some(1e-12), None).unwrap();
    let diff = mmse.matrix().max_abs_diff(zf.matrix()).unwrap();
    c.check(diff <= 1e-6, format!("MMSE at noise variance 1e-12 vs ZF: {diff:.3e}"));

    let mut r = rng(4);
    let (_, d) = qam16(&mut r, 512);
    let ofdm = OfdmModem::<f64>::new(OfdmParams::full(512, 0).unwrap());
    let rect = GfdmMatrixSet::build(&PrototypeFilter::<f64>::rectangular(512).unwrap(), 512, 1).unwrap();
    let diff = max_abs_diff(&ofdm.modulate(&d).unwrap(), &rect.modulate(&d).unwrap());
    c.check(diff <= 1e-12, format!("OFDM vs GFDM(M=1, rectangular): {diff:.3e}"));

    let taps: Vec<C> = TIFS_TAPS.iter().map(|&t| C::new(t, 0.0)).collect();
    let h = circulant_matrix(&taps, 512).unwrap();
    let diff = max_abs_diff(&h.mul_vec(&d).unwrap(), &convolve_circular(&d, &taps));
    c.check(diff <= 1e-12, format!("circulant H x vs circular convolution: {diff:.3e}"));
}

fn noiseless_loopback(c: &mut Criterion) {
    let params = WaveformParams::default();
    let q = Qam::<f64>::new(16).unwrap();
    let tifs: Vec<C> = TIFS_TAPS.iter().map(|&t| C::new(t, 0.0)).collect();
    let cases = [
        (WaveformKind::LinearGfdm, "identity", vec![C::new(1.0, 0.0)]),
        (WaveformKind::Fbmc, "identity", vec![C::new(1.0, 0.0)]),
        (WaveformKind::GfdmOqamCircular, "identity", vec![C::new(1.0, 0.0)]),
        (WaveformKind::Ofdm, "TIFS", tifs.clone()),
        (WaveformKind::Gfdm, "TIFS", tifs),
    ];
    for (w, ch, taps) in cases {
        let modem = build_modem(w, &params).unwrap();
        let mut r = rng(6);
        let (mut errors, mut bits_total) = (0usize, 0usize);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..20 {
            let (bits, d) = qam16(&mut r, modem.symbols());
            let y = convolve_linear(&modem.modulate(&d).unwrap(), &taps);
            let d_hat = modem.detect(&y, &taps, 0.0).unwrap();
            errors += q.demap(&d_hat).iter().zip(&bits).filter(|(a, b)| a != b).count();
            bits_total += bits.len();
            for (a, b) in d.iter().zip(&d_hat) {
                worst = worst.max(10.0 * ((a - b).norm_sqr() / 1.0).max(1e-300).log10());
            }
        }
        let limit = if ch == "TIFS" { -160.0 } else { -40.0 };
        c.check(
            errors == 0 && worst <= limit,
            format!("{w} through {ch}: {errors} / {bits_total} bit errors, worst symbol error {worst:.1} dB (limit {limit} dB)"),
        );
    }
}

fn pairwise(c: &mut Criterion, label: &str, reports: &[(WaveformKind, BerReport)]) {
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            for (a, b) in reports[i].1.points.iter().zip(&reports[j].1.points) {
                let (pa, pb) = (a.tally.ratio(), b.tally.ratio());
                let bound = 3.0
                    * (binom_sigma(pa, a.tally.total as f64).powi(2) + binom_sigma(pb, b.tally.total as f64).powi(2)).sqrt();
                c.check(
                    (pa - pb).abs() <= bound && a.tally.total >= 1_000_000 && b.tally.total >= 1_000_000,
                    format!(
                        "{label} {} dB: {} {pa:.4e} vs {} {pb:.4e} (joint 3 sigma {bound:.2e})",
                        a.ebn0_db, reports[i].0, reports[j].0
                    ),
                );
            }
        }
    }
}

fn cross_waveform(c: &mut Criterion) {
    for (ch, grid) in [(ChannelLabel::Tifs, vec![10.0, 14.0]), (ChannelLabel::Tvfs, vec![10.0, 20.0])] {
        let reports: Vec<(WaveformKind, BerReport)> = BER_WAVEFORMS
            .iter()
            .map(|&w| (w, run_ber(&ber_cfg(w, ch, grid.clone())).unwrap()))
            .collect();
        pairwise(c, ch.name(), &reports);
    }
}

fn main() {
    let entries = [
        Entry { name: "PAPR CCDF reproduction", time_limit: None, body: papr_reproduction },
        Entry { name: "BER vs theory over AWGN", time_limit: Some(300.0), body: ber_vs_theory },
        Entry { name: "Linear GFDM equals FBMC-OQAM", time_limit: Some(60.0), body: equivalence },
        Entry { name: "spectral containment", time_limit: Some(120.0), body: spectral_containment },
        Entry { name: "matrix identities", time_limit: Some(60.0), body: matrix_identities },
        Entry { name: "noiseless loopback", time_limit: Some(60.0), body: noiseless_loopback },
        Entry { name: "cross-waveform BER on TIFS and TVFS", time_limit: Some(600.0), body: cross_waveform },
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let failed = run(&entries, filter.as_deref());
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
