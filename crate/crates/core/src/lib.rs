//! Multicarrier waveform modems (OFDM, circular GFDM, GFDM-OQAM, Linear GFDM,
//! FBMC-OQAM), channel models, evaluation metrics and a Monte Carlo runner.
//!
//! Signal processing is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the simulation layer uses.

pub mod channel;
pub mod error;
pub mod fbmc;
pub mod gfdm;
pub mod linear_gfdm;
pub mod mapping;
pub mod matrix;
pub mod metrics;
pub mod ofdm;
pub mod prototype;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;

pub type CMatrix64 = matrix::CMatrix<f64>;
pub type Prototype64 = prototype::PrototypeFilter<f64>;
pub type Qam64 = mapping::Qam<f64>;
pub type Gfdm64 = gfdm::GfdmMatrixSet<f64>;
pub type GfdmOqam64 = gfdm::OqamMatrixSet<f64>;
pub type LinearGfdm64 = linear_gfdm::LinearGfdmMatrixSet<f64>;
pub type Fbmc64 = fbmc::FbmcModem<f64>;
pub type Ofdm64 = ofdm::OfdmModem<f64>;
pub type Channel64 = channel::ChannelRealization<f64>;

pub type Prototype32 = prototype::PrototypeFilter<f32>;
pub type LinearGfdm32 = linear_gfdm::LinearGfdmMatrixSet<f32>;
pub type Fbmc32 = fbmc::FbmcModem<f32>;
pub type Ofdm32 = ofdm::OfdmModem<f32>;
