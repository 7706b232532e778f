#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavemod::mapping::Qam;
use wavemod::Complex64 as C;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// Random Gray 16-QAM symbols and the bits behind them.
pub fn qam16(rng: &mut ChaCha8Rng, n: usize) -> (Vec<u8>, Vec<C>) {
    let q = Qam::<f64>::new(16).unwrap();
    let bits = random_bits(rng, 4 * n);
    let d = q.map(&bits).unwrap();
    (bits, d)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
    (0..n)
        .map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

/// Worst per-symbol error energy relative to the mean symbol energy, in dB.
pub fn worst_error_db(d: &[C], d_hat: &[C]) -> f64 {
    let es = d.iter().map(|v| v.norm_sqr()).sum::<f64>() / d.len() as f64;
    let worst = d
        .iter()
        .zip(d_hat)
        .map(|(a, b)| (a - b).norm_sqr())
        .fold(0.0, f64::max);
    10.0 * (worst / es).max(1e-300).log10()
}

pub fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
