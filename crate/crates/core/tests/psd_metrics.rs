mod common;

use common::*;
use proptest::prelude::*;
use wavemod::channel::complex_noise;
use wavemod::metrics::{oob_ratio, papr, papr_ccdf, welch_psd, WelchConfig};
use wavemod::ofdm::{OfdmModem, OfdmParams};
use wavemod::Complex64 as C;

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[test]
fn white_noise_estimate_is_flat() {
    let cfg = WelchConfig::default();
    let segments = 1000;
    let len = cfg.seg_len + (segments - 1) * cfg.hop();
    let w: Vec<C> = complex_noise(&mut rng(41), len, 1.0);
    let psd = welch_psd(&[w], cfg).unwrap();
    let bins = psd.density.len();
    let mean = psd.density.iter().sum::<f64>() / bins as f64;
    assert!((psd.total_power() - 1.0).abs() < 0.02);

    // one-subcarrier resolution (1/128 of the band) is what the containment
    // figures read; each band averages 16 bins
    let band = bins / 128;
    let worst = psd
        .density
        .chunks(band)
        .map(|c| db(c.iter().sum::<f64>() / band as f64 / mean).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.5, "{worst} dB");

    // per-bin scatter: half-overlapping Hann segments have squared correlation
    // 1/36, so the relative variance is (1 + 2/36) / segments
    let rel_var = psd.density.iter().map(|v| (v / mean - 1.0).powi(2)).sum::<f64>() / bins as f64;
    let expected = (1.0 + 2.0 / 36.0) / segments as f64;
    assert!((rel_var / expected - 1.0).abs() < 0.15, "{rel_var} vs {expected}");

    let curve = psd.to_db_curve(mean).unwrap();
    for offset in [0.01, 0.1, 0.2] {
        assert!(oob_ratio(&curve, 0.2, offset).unwrap().abs() <= 0.5);
    }
}

#[test]
fn welch_integral_matches_signal_power() {
    let modem = OfdmModem::<f64>::new(OfdmParams::full(512, 32).unwrap());
    let mut r = rng(42);
    let mut stream = Vec::new();
    for _ in 0..100 {
        let (_, d) = qam16(&mut r, 512);
        stream.extend(modem.modulate(&d).unwrap());
    }
    let power = stream.iter().map(|v| v.norm_sqr()).sum::<f64>() / stream.len() as f64;
    let psd = welch_psd(&[stream], WelchConfig::default()).unwrap();
    assert!((psd.total_power() / power - 1.0).abs() <= 0.02);
}

#[test]
fn ofdm_single_tone_has_rectangular_sidelobes() {
    // one active subcarrier: the symbol pulse is a (N + Ncp)-sample rectangle
    let n = 512;
    let ncp = 32;
    let sub = 100;
    let modem = OfdmModem::<f64>::new(OfdmParams::new(n, ncp, vec![sub]).unwrap());
    let mut r = rng(43);
    let mut stream = Vec::new();
    for _ in 0..2000 {
        let (_, d) = qam16(&mut r, 1);
        stream.extend(modem.modulate(&d).unwrap());
    }
    let cfg = WelchConfig {
        seg_len: 8192,
        ..WelchConfig::default()
    };
    let psd = welch_psd(&[stream], cfg).unwrap();
    let f0 = sub as f64 / n as f64;
    let t = (n + ncp) as f64;
    let level = |f: f64| {
        let i = psd
            .freqs
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - f).abs().total_cmp(&(b.1 - f).abs()))
            .unwrap()
            .0;
        psd.density[i]
    };
    let peak = level(f0);
    // first sidelobe of sinc^2 sits near 1.43 / T from the carrier, 13.26 dB down
    let side = (0..200)
        .map(|i| level(f0 + (1.2 + 0.002 * i as f64) / t))
        .fold(0.0, f64::max);
    let rel = db(side / peak);
    assert!((rel + 13.26).abs() <= 1.0, "{rel} dB");
}

#[test]
fn identical_symbols_give_worst_case_papr() {
    let modem = OfdmModem::<f64>::new(OfdmParams::full(512, 0).unwrap());
    let x = modem.modulate(&vec![C::new(1.0, 0.0); 512]).unwrap();
    assert!((papr(&x).unwrap() - db(512.0)).abs() < 1e-9);
}

proptest! {
    #[test]
    fn ccdf_is_a_non_increasing_probability(
        paprs in prop::collection::vec(0.0f64..20.0, 1..200),
    ) {
        let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.5 + 3.0).collect();
        let curve = papr_ccdf(&paprs, &grid).unwrap();
        let values: Vec<f64> = curve.points.iter().map(|p| p.1).collect();
        prop_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(values.windows(2).all(|w| w[1] <= w[0]));
        for (t, v) in &curve.points {
            let count = paprs.iter().filter(|p| *p > t).count() as f64;
            prop_assert_eq!(*v, count / paprs.len() as f64);
        }
    }

    #[test]
    fn papr_is_scale_invariant(seed in 0u64..1000, scale in 0.01f64..100.0) {
        let x = gaussian_vec(&mut rng(seed), 64);
        let y: Vec<C> = x.iter().map(|v| v * scale).collect();
        prop_assert!((papr(&x).unwrap() - papr(&y).unwrap()).abs() < 1e-9);
        prop_assert!(papr(&x).unwrap() >= 0.0);
    }
}
